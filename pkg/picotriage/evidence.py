""" Hard findings and virtual (likelihood) evidence for one network. """

from typing import Dict, Mapping, Optional, Sequence

import attr
import numpy as np

from .errors import (AllZeroLikelihood, ConflictsWithHardEvidence, EvidenceError,
                     LengthMismatch, NetworkError)
from .network import BayesianNetwork


@attr.s(slots=True, eq=False)
class EvidenceSet(object):
    """ Evidence about one case.

    *hard* maps a variable to its observed state; *virtual* maps a variable to
    a likelihood vector ``P(observation | state)`` that need not sum to one.
    A variable carries at most one kind. Evidence sets are owned by a single
    writer and are not shared while being updated.
    """
    network = attr.ib(type=BayesianNetwork, repr=False)
    hard = attr.ib(factory=dict)        # type: Dict[str, str]
    virtual = attr.ib(factory=dict)     # type: Dict[str, np.ndarray]

    def __len__(self):
        return len(self.hard) + len(self.virtual)

    def __contains__(self, name):
        return name in self.hard or name in self.virtual

    @property
    def variables(self):
        return tuple(n for n in self.network.names if n in self)

    def set_hard(self, name: str, state: str) -> "EvidenceSet":
        self.network.variable(name).index(state)
        if name in self.virtual:
            raise ConflictsWithHardEvidence(name)
        self.hard[name] = state
        return self

    def add_virtual(self, name: str, likelihood: Sequence[float]) -> "EvidenceSet":
        """ Record a likelihood vector for *name*. A second vector on the same
        variable is combined by element-wise product, treating the sources
        as conditionally independent given the state. """
        variable = self.network.variable(name)
        vec = np.array(likelihood, dtype=float).ravel()
        if vec.shape[0] != variable.cardinality:
            raise LengthMismatch(name, variable.cardinality, vec.shape[0])
        if not np.all(np.isfinite(vec)) or np.any(vec < 0):
            raise EvidenceError("likelihood for '{}' must be finite and non-negative: {}"
                             .format(name, list(likelihood)))
        if not np.any(vec > 0):
            raise AllZeroLikelihood(name)
        if name in self.hard:
            raise ConflictsWithHardEvidence(name)
        if name in self.virtual:
            vec = self.virtual[name] * vec
            if not np.any(vec > 0):
                raise AllZeroLikelihood(name)
            vec = vec / vec.max()
        vec.flags.writeable = False
        self.virtual[name] = vec
        return self

    def clear(self, name: str) -> "EvidenceSet":
        self.hard.pop(name, None)
        self.virtual.pop(name, None)
        return self

    def copy(self) -> "EvidenceSet":
        return EvidenceSet(self.network, dict(self.hard), dict(self.virtual))

    def likelihood(self, name: str) -> Optional[np.ndarray]:
        """ Evidence on *name* as a likelihood vector (one-hot for a hard
        finding), or None. """
        if name in self.hard:
            variable = self.network.variable(name)
            vec = np.zeros(variable.cardinality)
            vec[variable.index(self.hard[name])] = 1.0
            return vec
        return self.virtual.get(name)

    def likelihoods(self) -> Dict[int, np.ndarray]:
        """ Likelihood vectors keyed by variable index. """
        out = {}
        for name in self.hard:
            out[self.network.index(name)] = self.likelihood(name)
        for name, vec in self.virtual.items():
            out[self.network.index(name)] = vec
        return out

    def todict(self) -> dict:
        return {"hard": dict(self.hard),
                "virtual": {k: [float(x) for x in v] for k, v in self.virtual.items()}}

    @classmethod
    def fromdict(cls, network: BayesianNetwork, d: Mapping) -> "EvidenceSet":
        if not isinstance(d, Mapping):
            raise EvidenceError("evidence must be a JSON object")
        unknown = set(d) - {"hard", "virtual"}
        if unknown:
            raise EvidenceError("unrecognized evidence keys: {}".format(sorted(unknown)))
        ev = cls(network)
        try:
            for name, state in d.get("hard", {}).items():
                ev.set_hard(name, state)
            for name, vec in d.get("virtual", {}).items():
                ev.add_virtual(name, vec)
        except (EvidenceError, NetworkError):
            raise
        except (AttributeError, TypeError, ValueError) as e:
            raise EvidenceError("malformed evidence: {}".format(e))
        return ev


def apply_virtual_evidence(ev: EvidenceSet, name: str,
                           likelihood: Sequence[float]) -> EvidenceSet:
    """ Return a copy of *ev* with *likelihood* recorded on *name*. """
    return ev.copy().add_virtual(name, likelihood)
