""" Exact inference.

:func:`infer_marginals` runs variable elimination over the network's cluster
tree: an upward sweep sums each variable out in min-fill order, a downward
sweep sends the complementary messages back, and every single-variable
posterior is read from its cluster. :func:`enumerate_marginals` builds the
full joint table instead and serves as an independent check.
"""

from types import MappingProxyType
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import attr
import numpy as np

from .errors import StateSpaceTooLarge, ZeroProbabilityEvidence
from .evidence import EvidenceSet
from .network import BayesianNetwork


ORACLE_CELL_CAP = 2 ** 24


@attr.s(frozen=True, slots=True, eq=False)
class Marginals(object):
    """ Posterior probability vector per variable, in declared state order. """
    network = attr.ib(type=BayesianNetwork, repr=False)
    values = attr.ib(converter=lambda d: MappingProxyType(dict(d)))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __contains__(self, name):
        return name in self.values

    def probability(self, name: str, state: str) -> float:
        return float(self.values[name][self.network.variable(name).index(state)])

    def mode(self, name: str) -> str:
        """ Most probable state; ties go to the first declared state. """
        return self.network.variable(name).states[int(np.argmax(self.values[name]))]

    def max_probability(self, name: str) -> float:
        return float(np.max(self.values[name]))

    def max_abs_difference(self, other: "Marginals") -> float:
        return max(float(np.max(np.abs(self.values[n] - other.values[n])))
                   for n in self.values)

    def todict(self) -> Dict[str, Dict[str, float]]:
        out = {}
        for name, vec in self.values.items():
            states = self.network.variable(name).states
            out[name] = {s: float(p) for s, p in zip(states, vec)}
        return out


def _freeze(vec: np.ndarray) -> np.ndarray:
    vec.flags.writeable = False
    return vec

def _contract(operands: List[Tuple[np.ndarray, Sequence[int]]],
              output: Sequence[int]) -> np.ndarray:
    """ Multiply factors given as ``(array, scope)`` and sum out every
    variable not in *output* in a single einsum call. """
    local = {}
    args = []
    for arr, scope in operands:
        args.append(arr)
        args.append([local.setdefault(v, len(local)) for v in scope])
    args.append([local[v] for v in output])
    return np.einsum(*args)

def _query_indices(net: BayesianNetwork, query: Optional[Iterable[str]]) -> List[int]:
    if query is None:
        return list(range(len(net)))
    return [net.index(name) for name in query]


def infer_marginals(net: BayesianNetwork, evidence: Optional[EvidenceSet] = None,
                    query: Optional[Iterable[str]] = None) -> Marginals:
    """ Exact posterior marginals by variable elimination.

    Parameters
    ----------
    net : BayesianNetwork
    evidence : EvidenceSet, optional
        Hard findings enter as one-hot likelihoods, virtual evidence as its
        likelihood vector; variables without evidence are summed out.
    query : iterable of str, optional
        Variables to report (default: all).

    Raises
    ------
    ZeroProbabilityEvidence
        when the evidence is impossible under the network.
    """
    tree = net.elimination_tree
    unary = evidence.likelihoods() if evidence is not None else {}
    scopes = [net.scope_indices(i) for i in range(len(net))]

    def potentials(v):
        cluster = tree.clusters[v]
        ops = [(net.cpts[f].table, scopes[f]) for f in cluster.factors]
        if v in unary:
            ops.append((unary[v], (v,)))
        else:
            # keeps v in scope when the cluster holds no factor mentioning it
            ops.append((np.ones(net.variables[v].cardinality), (v,)))
        return ops

    up = {}
    for v in tree.order:
        cluster = tree.clusters[v]
        ops = potentials(v) + [(up[c], tree.clusters[c].separator) for c in cluster.children]
        up[v] = _contract(ops, cluster.separator)
        if cluster.parent is None:
            z = float(up[v])
            if not z > 0.0:
                raise ZeroProbabilityEvidence()

    down = {}
    for v in reversed(tree.order):
        cluster = tree.clusters[v]
        if not cluster.children:
            continue
        base = potentials(v)
        if cluster.parent is not None:
            base.append((down[v], cluster.separator))
        for c in cluster.children:
            ops = base + [(up[o], tree.clusters[o].separator)
                          for o in cluster.children if o != c]
            down[c] = _contract(ops, tree.clusters[c].separator)

    values = {}
    for v in _query_indices(net, query):
        cluster = tree.clusters[v]
        ops = potentials(v) + [(up[c], tree.clusters[c].separator) for c in cluster.children]
        if cluster.parent is not None:
            ops.append((down[v], cluster.separator))
        belief = _contract(ops, (v,))
        total = belief.sum()
        if not total > 0.0:
            raise ZeroProbabilityEvidence()
        values[net.variables[v].name] = _freeze(belief / total)
    return Marginals(net, values)


def _expand(table: np.ndarray, scope: Sequence[int], n: int) -> np.ndarray:
    """ Broadcast a factor over the axes ``0..n-1``. """
    perm = sorted(range(len(scope)), key=lambda i: scope[i])
    values = np.transpose(table, perm)
    shape = [1] * n
    for i in perm:
        shape[scope[i]] = table.shape[i]
    return values.reshape(shape)

def joint_distribution(net: BayesianNetwork, cap: int = ORACLE_CELL_CAP) -> np.ndarray:
    """ The full joint table, one axis per variable in declared order. """
    cells = int(np.prod(net.cardinalities, dtype=np.int64))
    if cells > cap:
        raise StateSpaceTooLarge(cells, cap)
    n = len(net)
    joint = np.ones(net.cardinalities, dtype=float)
    for i, cpt in enumerate(net.cpts):
        joint = joint * _expand(cpt.table, net.scope_indices(i), n)
    return joint

def enumerate_marginals(net: BayesianNetwork, evidence: Optional[EvidenceSet] = None,
                        cap: int = ORACLE_CELL_CAP) -> Marginals:
    """ Posterior marginals by brute force over the joint table. Exponential
    in the number of variables; refuses state spaces above *cap* cells. """
    joint = joint_distribution(net, cap)
    n = len(net)
    if evidence is not None:
        for v, vec in evidence.likelihoods().items():
            joint = joint * _expand(vec, (v,), n)
    total = joint.sum()
    if not total > 0.0:
        raise ZeroProbabilityEvidence()
    joint = joint / total
    values = {}
    for v, variable in enumerate(net.variables):
        axes = tuple(a for a in range(n) if a != v)
        values[variable.name] = _freeze(joint.sum(axis=axes))
    return Marginals(net, values)
