"""
The three distances on small hand-made states
=============================================

Cluster outcomes, fork graphs and growing forks each get their own distance.
All values are exact fractions.
"""

from fractions import Fraction

from forktopo import Outcome, d_f, d_g, d_t, delta_f, make_graph

# Outcome distance: agreement on commit is "far", agreement on abort is "near"
for a in (Outcome.COMMIT, Outcome.ABORT):
    for b in (Outcome.COMMIT, Outcome.ABORT):
        print(f"d_t({a.value}, {b.value}) = {d_t(a, b)}")

# Fork distance between two clusters whose genesis proxies are still live.
# make_graph takes (fork id, eliminated) pairs.
left = make_graph(0, [(0, False), (1, False)])
right = make_graph(1, [(0, False), (1, False)])
delta = delta_f([left, right])
print("two live forks each:", d_f(left, 0, right, 0, delta))

# Once a proxy is eliminated the distance falls back to 1/sup|F|
left = make_graph(0, [(0, True), (1, False), (2, False)])
right = make_graph(1, [(0, True), (1, False)])
delta = delta_f([left, right])
print("proxies eliminated, 3 and 2 forks:", d_f(left, 0, right, 0, delta), "= delta", delta)

# Growing forks are compared at the first step where their fork counts differ.
# Plain count sequences are accepted as well as GrowingFork objects.
counts = {"A": (1, 1, 3), "B": (1, 1, 2), "C": (1, 1, 1)}
for p, q in [("A", "B"), ("B", "C"), ("A", "C")]:
    print(f"d_g({p}, {q}) = {d_g(counts[p], counts[q])}")

assert d_g(counts["A"], counts["B"]) == Fraction(1, 2)
