"""
Where the proofs do not reach
=============================

Two situations in which a stated property does not hold for the definitions as
given. The verifier reports both instead of hiding them.
"""

from fractions import Fraction

from forktopo import fork_triple_classifier, growing_fork_space, make_graph, verify_metric_axioms
from forktopo import d_f, delta_f, is_discrete, separation_violations
from forktopo.sim import GrowingFork
from forktopo.chain_model import Fork, ForkGraph, ForkState

# 1. Fork distance with a non-live midpoint.
# Clusters 0 and 1 hold two live forks; cluster 2 holds three with its proxy eliminated.
graphs = {
    0: make_graph(0, [(0, False), (1, False)]),
    1: make_graph(1, [(0, False), (1, False)]),
    2: make_graph(2, [(0, True), (1, False), (2, False)]),
}
delta = delta_f(graphs.values())
live = {0: True, 1: True, 2: False}
rep = verify_metric_axioms([0, 1, 2], lambda p, q: d_f(graphs[p], 0, graphs[q], 0, delta),
                           classify=fork_triple_classifier(live), name="d_f")
for w in rep.uncovered_by_paper_proof:
    (x, z, y), (dxy, dxz, dzy) = w.points, w.values
    print(f"d({x},{y}) = {dxy} > d({x},{z}) + d({z},{y}) = {dxz} + {dzy}   [{w.label}]")
print("counted as a triangle failure:", bool(rep.triangle_failures))


# 2. Growing forks that first fork alike and diverge later.
def growing(cluster, counts):
    snaps = []
    for t, n in enumerate(counts):
        state = ForkState.CONFIRMED if n == 1 else ForkState.UNDECIDED
        forks = tuple(Fork(i, cluster, state, t, None if i == 0 else 0, 0 if i == 0 else 1) for i in range(n))
        snaps.append(ForkGraph(cluster, forks))
    return GrowingFork(cluster, tuple(snaps))


space = growing_fork_space([growing(0, (1, 2, 4)), growing(1, (1, 2, 5))])
print("epsilon:", space.epsilon, "distance:", space.distance(0, 1))
print("discrete:", is_discrete(space), "violations:", separation_violations(space))
assert space.distance(0, 1) == Fraction(1, 4) < space.epsilon
