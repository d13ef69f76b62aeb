""" Discrete Bayesian networks: declarations, validation and the compiled,
immutable network. """

import math
from types import MappingProxyType
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import attr
import networkx as nx
import numpy as np

from . import validators
from .elimination import EliminationTree
from .errors import (ArityMismatch, CycleDetected, DuplicateCpt, DuplicateRow,
                     DuplicateState, DuplicateVariable, IncompleteAssignment,
                     InvalidNetwork, MissingCpt, MissingRow, RowNotNormalized,
                     SourcePosition, UnknownParent, UnknownState,
                     UnknownStateInRow, UnknownVariable)

ROW_TOLERANCE = 1e-6

BANDS = ("strong", "moderate", "weak")


def _distinct_states(instance, attribute, states):
    seen = set()
    for s in states:
        if s in seen:
            raise DuplicateState(instance.name, s, instance.position)
        seen.add(s)

def _float_tuple(values) -> tuple:
    return tuple(float(v) for v in values)

def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr

def _band(cls, attribute, val):
    if val is not None and val not in BANDS:
        raise ValueError("band must be one of {}, received {!r}".format(BANDS, val))


@attr.s(frozen=True, slots=True)
class Variable(object):
    """ A discrete random variable. State order is fixed: every CPT row and
    evidence vector is indexed by it. """
    name = attr.ib(validator=validators.identifier)
    states = attr.ib(converter=tuple,
                     validator=[validators.state_list, _distinct_states])
    position = attr.ib(default=None, eq=False, repr=False,
                       type=Optional[SourcePosition])

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(self.name, state)


@attr.s(frozen=True, slots=True)
class CptRow(object):
    """ One row of a declared CPT, keyed by the parents' state names. """
    key = attr.ib(converter=tuple)
    probabilities = attr.ib(converter=_float_tuple)
    band = attr.ib(default=None, validator=_band)
    position = attr.ib(default=None, eq=False, repr=False,
                       type=Optional[SourcePosition])


@attr.s(frozen=True, slots=True)
class CptDeclaration(object):
    """ Uncompiled CPT for *child* given ordered *parents*. """
    child = attr.ib(validator=validators.identifier)
    parents = attr.ib(converter=tuple, default=())
    rows = attr.ib(converter=tuple, default=())
    position = attr.ib(default=None, eq=False, repr=False,
                       type=Optional[SourcePosition])


@attr.s(frozen=True, slots=True)
class Cpt(object):
    """ Compiled CPT. *table* has one axis per parent, in parent order,
    followed by the child axis; every row sums to one. """
    child = attr.ib(type=Variable)
    parents = attr.ib(converter=tuple)
    table = attr.ib(converter=_readonly, repr=False,
                    eq=attr.cmp_using(eq=np.array_equal))
    bands = attr.ib(factory=dict, converter=lambda d: MappingProxyType(dict(d)),
                    eq=attr.cmp_using(eq=lambda a, b: dict(a) == dict(b)),
                    repr=False)

    @property
    def scope(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parents) + (self.child.name,)

    def _key(self, parent_states: Sequence[str]) -> tuple:
        parent_states = tuple(parent_states)
        if len(parent_states) != len(self.parents):
            raise ArityMismatch(self.child.name, parent_states, len(self.parents),
                                len(parent_states), what="parent states")
        return tuple(p.index(s) for p, s in zip(self.parents, parent_states))

    def row(self, parent_states: Sequence[str] = ()) -> np.ndarray:
        return self.table[self._key(parent_states)]

    def probability(self, state: str, parent_states: Sequence[str] = ()) -> float:
        return float(self.row(parent_states)[self.child.index(state)])

    def rows(self) -> Iterator[Tuple[Tuple[str, ...], np.ndarray]]:
        """ Yield ``(parent states, probability vector)`` for every parent
        configuration, last parent varying fastest. """
        for idx in np.ndindex(*self.table.shape[:-1]):
            key = tuple(p.states[i] for p, i in zip(self.parents, idx))
            yield key, self.table[idx]


@attr.s(frozen=True, slots=True)
class BayesianNetwork(object):
    """ Compiled network. Build it with :func:`validate_network` (or from a
    document with :func:`picotriage.document.compile`), never directly. """
    variables = attr.ib(converter=tuple)
    cpts = attr.ib(converter=tuple, repr=False)
    topological_indices = attr.ib(converter=tuple, repr=False)
    metadata = attr.ib(factory=dict, converter=lambda d: MappingProxyType(dict(d)),
                       eq=attr.cmp_using(eq=lambda a, b: dict(a) == dict(b)),
                       repr=False)
    elimination_tree = attr.ib(default=None, eq=False, repr=False)
    _lookup = attr.ib(default=None, eq=False, repr=False)

    def __attrs_post_init__(self):
        lookup = {v.name: i for i, v in enumerate(self.variables)}
        object.__setattr__(self, "_lookup", lookup)
        if self.elimination_tree is None:
            scopes = [tuple(lookup[name] for name in cpt.scope) for cpt in self.cpts]
            object.__setattr__(self, "elimination_tree",
                               EliminationTree.build(len(self.variables), scopes))

    def __len__(self):
        return len(self.variables)

    def __contains__(self, name):
        return name in self._lookup

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def topological_order(self) -> Tuple[str, ...]:
        return tuple(self.variables[i].name for i in self.topological_indices)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self._lookup[name]
        except KeyError:
            raise UnknownVariable(name)

    def variable(self, name: str) -> Variable:
        return self.variables[self.index(name)]

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def cpt(self, name: str) -> Cpt:
        return self.cpts[self.index(name)]

    def parents(self, name: str) -> Tuple[str, ...]:
        return tuple(p.name for p in self.cpt(name).parents)

    def children(self, name: str) -> Tuple[str, ...]:
        self.index(name)
        return tuple(c.child.name for c in self.cpts
                     if name in (p.name for p in c.parents))

    def band(self, child: str, parent_states: Sequence[str] = ()) -> Optional[str]:
        """ Elicitation band annotated on one CPT row, if any. """
        return self.cpt(child).bands.get(tuple(parent_states))

    def bands(self, child: str) -> Dict[tuple, str]:
        return dict(self.cpt(child).bands)

    def scope_indices(self, i: int) -> Tuple[int, ...]:
        return tuple(self._lookup[name] for name in self.cpts[i].scope)


VariableLike = Union[Variable, Tuple[str, Sequence[str]]]


def validate_network(variables: Sequence[VariableLike],
                     cpts: Sequence[CptDeclaration],
                     metadata: Optional[Mapping[str, str]] = None) -> BayesianNetwork:
    """ Check a candidate network and compile it.

    Every violation is collected before anything is raised; the
    :class:`~picotriage.errors.InvalidNetwork` error lists them all. Rows that
    sum to one within ``1e-6`` are accepted and renormalized.
    """
    errors = []

    declared = []
    names = {}
    for v in variables:
        if not isinstance(v, Variable):
            try:
                v = Variable(v[0], v[1])
            except DuplicateState as e:
                errors.append(e)
                continue
        if v.name in names:
            errors.append(DuplicateVariable(v.name, v.position))
            continue
        names[v.name] = v
        declared.append(v)

    by_child = {}
    for decl in cpts:
        if decl.child not in names:
            errors.append(UnknownVariable(decl.child, decl.position))
            continue
        if decl.child in by_child:
            errors.append(DuplicateCpt(decl.child, decl.position))
            continue
        by_child[decl.child] = decl

    for v in declared:
        if v.name not in by_child:
            errors.append(MissingCpt(v.name, v.position))

    compiled = {}
    graph = nx.DiGraph()
    graph.add_nodes_from(v.name for v in declared)
    for v in declared:
        decl = by_child.get(v.name)
        if decl is None:
            continue
        parent_errors = []
        seen = set()
        for p in decl.parents:
            if p not in names:
                parent_errors.append(UnknownParent(decl.child, p, decl.position))
            elif p in seen:
                parent_errors.append(DuplicateVariable(p, decl.position))
            else:
                graph.add_edge(p, decl.child)
            seen.add(p)
        if parent_errors:
            errors.extend(parent_errors)
            continue
        parents = [names[p] for p in decl.parents]
        table, bands, row_errors = _compile_rows(v, parents, decl)
        if row_errors:
            errors.extend(row_errors)
            continue
        compiled[v.name] = Cpt(v, parents, table, bands)

    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle is not None:
        nodes = [u for u, _ in cycle]
        errors.append(CycleDetected(nodes, [by_child[n].position for n in nodes
                                            if by_child[n].position is not None]))

    if errors:
        raise InvalidNetwork(errors)

    order = {v.name: i for i, v in enumerate(declared)}
    topo = nx.lexicographical_topological_sort(graph, key=order.__getitem__)
    return BayesianNetwork(variables=declared,
                           cpts=[compiled[v.name] for v in declared],
                           topological_indices=[order[n] for n in topo],
                           metadata=metadata or {})

def _compile_rows(child, parents, decl):
    errors = []
    shape = tuple(p.cardinality for p in parents) + (child.cardinality,)
    table = np.zeros(shape, dtype=float)
    filled = np.zeros(shape[:-1], dtype=bool)
    bands = {}
    for row in decl.rows:
        position = row.position or decl.position
        if len(row.key) != len(parents):
            errors.append(ArityMismatch(child.name, row.key, len(parents), len(row.key),
                                        what="parent states", position=position))
            continue
        idx = []
        for p, s in zip(parents, row.key):
            if s not in p.states:
                errors.append(UnknownStateInRow(child.name, p.name, s, position))
                break
            idx.append(p.states.index(s))
        else:
            idx = tuple(idx)
            if filled[idx]:
                errors.append(DuplicateRow(child.name, row.key, position))
                continue
            if len(row.probabilities) != child.cardinality:
                errors.append(ArityMismatch(child.name, row.key, child.cardinality,
                                            len(row.probabilities), position=position))
                continue
            probs = np.array(row.probabilities, dtype=float)
            total = math.fsum(probs)
            if (not np.all(np.isfinite(probs)) or np.any(probs < 0)
                    or abs(total - 1.0) > ROW_TOLERANCE):
                errors.append(RowNotNormalized(child.name, row.key, total, position))
                continue
            table[idx] = probs if total == 1.0 else probs / total
            filled[idx] = True
            if row.band is not None:
                bands[row.key] = row.band
    if not errors:
        for idx in np.ndindex(*shape[:-1]):
            if filled[idx]:
                continue
            key = tuple(p.states[i] for p, i in zip(parents, idx))
            errors.append(MissingRow(child.name, key, decl.position))
    return table, bands, errors


def joint_probability(net: BayesianNetwork, assignment: Mapping[str, str]) -> float:
    """ Probability of a full assignment: the product over variables of
    ``P(x_i | parents(x_i))``. """
    missing = [name for name in net.names if name not in assignment]
    if missing:
        raise IncompleteAssignment(missing)
    state = {}
    for name, label in assignment.items():
        state[name] = net.variable(name).index(label)
    p = []
    for cpt in net.cpts:
        p.append(cpt.table[tuple(state[name] for name in cpt.scope)])
    return float(math.prod(p))
