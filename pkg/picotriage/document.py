""" The declarative form of a network, as read from `.bnet` text or its JSON
mirror, before compilation. """

from typing import Optional, Sequence

import attr

from .errors import (DuplicateRow, DuplicateVariable, MissingRow,
                     UnknownStateInRow)
from .network import BayesianNetwork, CptDeclaration, Variable, validate_network

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)

# Probabilities are written with this many decimals
PRECISION = 6


@attr.s(frozen=True, slots=True)
class NetworkDocument(object):
    version = attr.ib(type=int, default=FORMAT_VERSION)
    variables = attr.ib(converter=tuple, factory=tuple)
    cpts = attr.ib(converter=tuple, factory=tuple)
    metadata = attr.ib(converter=dict, factory=dict)

    def variable(self, name: str) -> Optional[Variable]:
        for v in self.variables:
            if v.name == name:
                return v
        return None

    def cpt(self, child: str) -> Optional[CptDeclaration]:
        for c in self.cpts:
            if c.child == child:
                return c
        return None

    def structure(self, precision: int = PRECISION) -> tuple:
        """ Everything but source positions, with probabilities at the
        written precision and rows in key order. Two documents are
        structurally identical when their structures are equal. """
        variables = tuple((v.name, v.states) for v in self.variables)
        cpts = []
        for c in self.cpts:
            rows = sorted(((r.key, tuple(round(p, precision) for p in r.probabilities), r.band)
                           for r in c.rows), key=lambda row: row[0])
            cpts.append((c.child, c.parents, tuple(rows)))
        return (self.version, variables, tuple(cpts),
                tuple(sorted(self.metadata.items())))


def check_document(doc: NetworkDocument) -> None:
    """ Raise the first declaration-level error of *doc*, in source order:
    a repeated variable, a row naming an undeclared parent state, a repeated
    row, or a missing parent configuration. Graph and row-sum checks are left
    to compilation. """
    errors = []
    states = {}
    for v in doc.variables:
        if v.name in states:
            errors.append(DuplicateVariable(v.name, v.position))
        else:
            states[v.name] = v.states

    for c in doc.cpts:
        if any(p not in states for p in c.parents):
            continue
        parents = [(p, states[p]) for p in c.parents]
        keys = set()
        complete = True
        for row in c.rows:
            if len(row.key) != len(parents):
                complete = False
                continue
            bad = [(p, s) for (p, declared), s in zip(parents, row.key) if s not in declared]
            if bad:
                errors.append(UnknownStateInRow(c.child, bad[0][0], bad[0][1],
                                                row.position or c.position))
                complete = False
                continue
            if row.key in keys:
                errors.append(DuplicateRow(c.child, row.key, row.position or c.position))
            keys.add(row.key)
        if complete:
            for key in _configurations([s for _, s in parents]):
                if key not in keys:
                    errors.append(MissingRow(c.child, key, c.position))
                    break

    if errors:
        errors.sort(key=lambda e: (e.position is None,
                                   e.position and (e.position.line, e.position.column)))
        raise errors[0]

def _configurations(state_lists: Sequence[Sequence[str]]):
    if not state_lists:
        yield ()
        return
    for head in state_lists[0]:
        for tail in _configurations(state_lists[1:]):
            yield (head,) + tail


def compile(doc: NetworkDocument) -> BayesianNetwork:
    """ Compile a parsed document. Validation errors keep the source
    positions of the declarations they concern; band annotations stay
    attached to their CPT rows. """
    return validate_network(doc.variables, doc.cpts, doc.metadata)
