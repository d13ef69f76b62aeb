""" Elimination ordering and the cluster tree it induces.

Variables are integers ``0..n-1``; a factor is described only by its scope,
so the tree can be built once per network and reused for any evidence.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import attr
import networkx as nx


def interaction_graph(n: int, scopes: Sequence[Sequence[int]]) -> nx.Graph:
    """ Undirected graph with an edge between every pair of variables that
    share a factor (the moral graph when scopes are CPT families). """
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for scope in scopes:
        scope = list(scope)
        for i, u in enumerate(scope):
            for v in scope[i+1:]:
                if u != v:
                    graph.add_edge(u, v)
    return graph

def fill_in_cost(graph: nx.Graph, node: int) -> int:
    """ Number of edges added if *node* were eliminated next. """
    neighbors = sorted(graph.adj[node])
    cost = 0
    for i, u in enumerate(neighbors):
        for v in neighbors[i+1:]:
            if not graph.has_edge(u, v):
                cost += 1
    return cost

def min_fill_order(graph: nx.Graph) -> List[int]:
    """ Greedy elimination order. Each step removes the node with the fewest
    fill-in edges; ties go to the smaller neighbourhood, then to the smaller
    node id, so the order is deterministic. """
    remaining = graph.copy()
    order = []
    while remaining.number_of_nodes() > 0:
        node = min(remaining.nodes,
                   key=lambda n: (fill_in_cost(remaining, n), remaining.degree(n), n))
        neighbors = list(remaining.adj[node])
        for i, u in enumerate(neighbors):
            for v in neighbors[i+1:]:
                remaining.add_edge(u, v)
        remaining.remove_node(node)
        order.append(node)
    return order


@attr.s(frozen=True, slots=True)
class Cluster(object):
    """ Bucket of one eliminated variable.

    *scope* is every variable the bucket's product depends on, *separator* the
    scope of the message it sends to *parent* (``scope`` minus ``variable``).
    """
    variable = attr.ib(type=int)
    scope = attr.ib(type=tuple)
    separator = attr.ib(type=tuple)
    parent = attr.ib(type=Optional[int])
    children = attr.ib(type=tuple)
    factors = attr.ib(type=tuple)


@attr.s(frozen=True, slots=True)
class EliminationTree(object):
    order = attr.ib(type=tuple)
    clusters = attr.ib(type=tuple, repr=False)

    @property
    def roots(self) -> Tuple[int, ...]:
        return tuple(c.variable for c in self.clusters if c.parent is None)

    @property
    def width(self) -> int:
        """ Largest cluster size minus one. """
        return max((len(c.scope) for c in self.clusters), default=1) - 1

    @classmethod
    def build(cls, n: int, scopes: Sequence[Sequence[int]],
              order: Optional[Sequence[int]] = None) -> "EliminationTree":
        """ Build the cluster tree for factors with *scopes* over *n*
        variables. When *order* is omitted the min-fill order of the
        interaction graph is used. """
        if order is None:
            order = min_fill_order(interaction_graph(n, scopes))
        order = tuple(order)
        position = {v: i for i, v in enumerate(order)}

        assigned = {v: [] for v in order}       # type: Dict[int, List[int]]
        for f, scope in enumerate(scopes):
            first = min(scope, key=position.__getitem__)
            assigned[first].append(f)

        incoming = {v: [] for v in order}       # type: Dict[int, List[int]]
        separators = {}
        parents = {}
        scope_of = {}
        for v in order:
            members = {v}
            for f in assigned[v]:
                members.update(scopes[f])
            for child in incoming[v]:
                members.update(separators[child])
            separator = tuple(sorted(members - {v}))
            parent = min(separator, key=position.__getitem__) if separator else None
            if parent is not None:
                incoming[parent].append(v)
            separators[v] = separator
            parents[v] = parent
            scope_of[v] = tuple(sorted(members))

        clusters = tuple(Cluster(variable=v,
                                 scope=scope_of[v],
                                 separator=separators[v],
                                 parent=parents[v],
                                 children=tuple(incoming[v]),
                                 factors=tuple(assigned[v]))
                         for v in range(n))
        return cls(order=order, clusters=clusters)
