""" Forward (ancestral) sampling. """

from typing import Dict, Union

import numpy as np

from .inference import Marginals
from .network import BayesianNetwork

Seed = Union[int, np.random.Generator, None]


def as_generator(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)

def ancestral_samples(net: BayesianNetwork, n: int, seed: Seed = None) -> np.ndarray:
    """ Draw *n* joint samples as an ``(n, len(net))`` array of state
    indices. Variables are visited in topological order and each is drawn
    from its CPT row given the parents already drawn. """
    rng = as_generator(seed)
    out = np.zeros((n, len(net)), dtype=np.int64)
    for v in net.topological_indices:
        cpt = net.cpts[v]
        scope = net.scope_indices(v)
        rows = cpt.table[tuple(out[:, p] for p in scope[:-1])]
        if rows.ndim == 1:
            rows = np.broadcast_to(rows, (n, rows.shape[0]))
        cumulative = np.cumsum(rows, axis=1)
        u = rng.random(n)
        picks = (u[:, None] >= cumulative).sum(axis=1)
        out[:, v] = np.minimum(picks, rows.shape[1] - 1)
    return out

def ancestral_sample(net: BayesianNetwork, seed: Seed = None) -> Dict[str, str]:
    """ One joint sample as ``{variable: state}``; fixed seeds give fixed
    samples. """
    row = ancestral_samples(net, 1, seed)[0]
    return {var.name: var.states[row[i]] for i, var in enumerate(net.variables)}

def empirical_marginals(net: BayesianNetwork, samples: np.ndarray) -> Marginals:
    """ Relative state frequencies of each variable in *samples*. """
    values = {}
    for i, var in enumerate(net.variables):
        counts = np.bincount(samples[:, i], minlength=var.cardinality)
        values[var.name] = counts / float(samples.shape[0])
    return Marginals(net, values)
