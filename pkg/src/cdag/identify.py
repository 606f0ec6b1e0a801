"""Identifying-set membership tests and enumeration.

A set A identifies the error variance of a vertex i when the conditional
variance of i given A equals that parameter on every model point, and
identifies the coefficient on an edge i -> j when the corresponding
regression quotient does.  Membership is a purely graphical condition;
the semantic soundness of these tests is exercised numerically in the
test suite.
"""

from __future__ import annotations

from itertools import combinations
from typing import FrozenSet, Set, Union

from .dag import Dag, Edge
from .errors import GraphError, SizeGuardError

ENUM_GUARD_P = 12


def is_vertex_identifying(g: Dag, i: int, candidate) -> bool:
    """True iff pa(i) is contained in the candidate set, which avoids i and
    all of its descendants."""
    a = frozenset(candidate)
    if i in a:
        raise GraphError(f"candidate set for vertex {i} may not contain it")
    return g.parents(i) <= a and not (a & g.closed_descendants(i))


def is_zero_identifying(g: Dag, i: int, j: int, candidate) -> bool:
    """For a non-edge (i, j): the regression quotient of i on j given the
    candidate set is identically zero iff the set minus i d-separates i and j."""
    if (i, j) in g.edges:
        raise GraphError(f"({i}, {j}) is an edge; use is_edge_identifying")
    a = frozenset(candidate)
    if j in a:
        raise GraphError(f"candidate set for pair ({i}, {j}) may not contain {j}")
    return g.d_separated({i}, {j}, a - {i})


def is_edge_identifying(g: Dag, i: int, j: int, candidate) -> bool:
    """For an edge i -> j: the candidate set must contain i, avoid j and its
    descendants, and, minus i, d-separate i and j in the graph with the edge
    i -> j and all descendants of j deleted."""
    if (i, j) not in g.edges:
        raise GraphError(f"({i}, {j}) is not an edge; use is_zero_identifying")
    a = frozenset(candidate)
    if j in a:
        raise GraphError(f"candidate set for edge ({i}, {j}) may not contain {j}")
    if i not in a or a & g.closed_descendants(j):
        return False
    # delete de(j) and the edge i -> j, then test separation
    dropped = g.descendants(j)
    keep = [v for v in range(g.p) if v not in dropped]
    relabel = {v: pos for pos, v in enumerate(keep)}
    sub_edges = [(relabel[a_], relabel[b_]) for a_, b_ in g.edges
                 if a_ not in dropped and b_ not in dropped and (a_, b_) != (i, j)]
    sub = Dag(len(keep), sub_edges)
    return sub.d_separated({relabel[i]}, {relabel[j]},
                           {relabel[v] for v in a - {i}})


def enumerate_identifying_sets(g: Dag,
                               target: Union[int, Edge]) -> Set[FrozenSet[int]]:
    """All identifying sets for a vertex or for a (present or absent) edge.

    Enumeration is exponential in p and guarded accordingly.
    """
    if g.p > ENUM_GUARD_P:
        raise SizeGuardError(f"identifying-set enumeration is limited to p <= {ENUM_GUARD_P}")
    if isinstance(target, int):
        g._check_vertex(target)
        universe = [v for v in range(g.p) if v != target]
        test = lambda a: is_vertex_identifying(g, target, a)
    else:
        i, j = target
        g._check_vertex(i)
        g._check_vertex(j)
        universe = [v for v in range(g.p) if v != j]
        if (i, j) in g.edges:
            test = lambda a: is_edge_identifying(g, i, j, a)
        else:
            test = lambda a: is_zero_identifying(g, i, j, a)
    found = set()
    for r in range(len(universe) + 1):
        for combo in combinations(universe, r):
            a = frozenset(combo)
            if test(a):
                found.add(a)
    return found
