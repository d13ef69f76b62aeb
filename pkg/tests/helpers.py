""" Random networks and evidence for the property suites. """

import numpy as np

from picotriage.evidence import EvidenceSet
from picotriage.network import CptDeclaration, CptRow, Variable, validate_network

STATE_SPACE_CAP = 2 ** 16


def random_declarations(rng, n_variables, max_states=4, max_parents=3, cap=STATE_SPACE_CAP):
    """ Variables ``v0..`` with 2 to *max_states* states each, joint state
    space below *cap*, parents drawn among earlier variables and CPT rows
    from a flat Dirichlet. Declarations come back in shuffled order. """
    cards = []
    for _ in range(n_variables):
        k = int(rng.integers(2, max_states + 1))
        while k > 2 and np.prod(cards + [k]) > cap:
            k -= 1
        if np.prod(cards + [k]) > cap:
            break
        cards.append(k)
    variables = [Variable("v{}".format(i), ["s{}".format(j) for j in range(k)])
                 for i, k in enumerate(cards)]
    decls = []
    for i, v in enumerate(variables):
        n_parents = int(rng.integers(0, min(i, max_parents) + 1))
        parents = sorted(rng.choice(i, size=n_parents, replace=False).tolist()) if n_parents else []
        rows = []
        for idx in np.ndindex(*[cards[p] for p in parents]):
            key = [variables[p].states[j] for p, j in zip(parents, idx)]
            rows.append(CptRow(key, rng.dirichlet(np.ones(v.cardinality))))
        decls.append(CptDeclaration(v.name, [variables[p].name for p in parents], rows))
    order = rng.permutation(len(variables))
    return [variables[i] for i in order], [decls[i] for i in order]

def random_network(rng, n_variables=None, **kw):
    if n_variables is None:
        n_variables = int(rng.integers(1, 13))
    variables, decls = random_declarations(rng, n_variables, **kw)
    return validate_network(variables, decls)

def random_evidence(rng, net, max_hard=2, max_virtual=3):
    """ Hard findings and strictly positive likelihoods on distinct
    variables. """
    ev = EvidenceSet(net)
    names = [str(n) for n in rng.permutation(net.names)]
    n_hard = int(rng.integers(0, min(max_hard, len(names)) + 1))
    for name in names[:n_hard]:
        states = net.variable(name).states
        ev.set_hard(name, states[int(rng.integers(len(states)))])
    rest = names[n_hard:]
    n_virtual = int(rng.integers(0, min(max_virtual, len(rest)) + 1))
    for name in rest[:n_virtual]:
        ev.add_virtual(name, rng.uniform(0.05, 1.0, net.cardinality(name)))
    return ev
