from __future__ import annotations

import pytest

from forktopo.chain_model import Transaction, TransactionParty
from forktopo.prng import SplitMix64
from forktopo.sim import SimConfig, Trace, run_simulation

# Three clusters over t = 0, 1, 2 with fork counts (1,1,3), (1,1,2), (1,1,1):
# the first divergence is at t = 2 with counts (3, 2, 1).
THREE_CLUSTER_TRACE = """\
{"event":"config","seed":0,"horizon":2,"clusters":3,"fork_prob":[1],"confirm_depth":2,"transactions":[{"txn_id":0,"parties":[{"cluster":0,"proxy":0},{"cluster":1,"proxy":0},{"cluster":2,"proxy":0}]}]}
{"t":1,"cluster":0,"event":"extend","fork":0,"len":1}
{"t":1,"cluster":1,"event":"extend","fork":0,"len":1}
{"t":1,"cluster":2,"event":"extend","fork":0,"len":1}
{"t":2,"cluster":0,"event":"extend","fork":0,"len":2}
{"t":2,"cluster":0,"event":"spawn","fork":1,"parent":0}
{"t":2,"cluster":0,"event":"spawn","fork":2,"parent":0}
{"t":2,"cluster":1,"event":"extend","fork":0,"len":2}
{"t":2,"cluster":1,"event":"spawn","fork":1,"parent":0}
{"t":2,"cluster":2,"event":"extend","fork":0,"len":2}
"""

# Clusters 0 and 1 end with 2 live forks each; cluster 2 ends with 3 forks and
# its genesis proxy eliminated (confirm_depth 2).
GAP_TRACE = """\
{"event":"config","seed":0,"horizon":3,"clusters":3,"fork_prob":["1/2","1/2"],"confirm_depth":2,"transactions":[{"txn_id":0,"parties":[{"cluster":0,"proxy":0},{"cluster":1,"proxy":0},{"cluster":2,"proxy":0}]}]}
{"t":1,"cluster":0,"event":"extend","fork":0,"len":1}
{"t":1,"cluster":0,"event":"spawn","fork":1,"parent":0}
{"t":1,"cluster":1,"event":"extend","fork":0,"len":1}
{"t":1,"cluster":1,"event":"spawn","fork":1,"parent":0}
{"t":1,"cluster":2,"event":"extend","fork":0,"len":1}
{"t":1,"cluster":2,"event":"spawn","fork":1,"parent":0}
{"t":1,"cluster":2,"event":"spawn","fork":2,"parent":0}
{"t":2,"cluster":0,"event":"extend","fork":1,"len":2}
{"t":2,"cluster":1,"event":"extend","fork":0,"len":2}
{"t":2,"cluster":2,"event":"extend","fork":1,"len":2}
{"t":3,"cluster":0,"event":"extend","fork":0,"len":2}
{"t":3,"cluster":1,"event":"extend","fork":1,"len":2}
{"t":3,"cluster":2,"event":"extend","fork":1,"len":3}
{"t":3,"cluster":2,"event":"eliminate","fork":0}
{"t":3,"cluster":2,"event":"eliminate","fork":2}
"""


def refork_trace(horizon: int) -> str:
    """Cluster 0 confirms its genesis fork at t=3, re-forks at t=4, re-confirms at t=6.

    Built by hand following the confirm_depth=2 sweep; cluster 1 never forks.
    """
    head = ('{"event":"config","seed":0,"horizon":%d,"clusters":2,"fork_prob":["1/2","1/2"],'
            '"confirm_depth":2,"transactions":[{"txn_id":5,"parties":[{"cluster":0,"proxy":0},'
            '{"cluster":1,"proxy":0}]}]}' % horizon)
    steps = {
        1: ['{"t":1,"cluster":0,"event":"extend","fork":0,"len":1}',
            '{"t":1,"cluster":0,"event":"spawn","fork":1,"parent":0}'],
        2: ['{"t":2,"cluster":0,"event":"extend","fork":0,"len":2}'],
        3: ['{"t":3,"cluster":0,"event":"extend","fork":0,"len":3}',
            '{"t":3,"cluster":0,"event":"eliminate","fork":1}'],
        4: ['{"t":4,"cluster":0,"event":"extend","fork":0,"len":4}',
            '{"t":4,"cluster":0,"event":"spawn","fork":2,"parent":0}'],
        5: ['{"t":5,"cluster":0,"event":"extend","fork":0,"len":5}'],
        6: ['{"t":6,"cluster":0,"event":"extend","fork":0,"len":6}',
            '{"t":6,"cluster":0,"event":"eliminate","fork":2}'],
        7: ['{"t":7,"cluster":0,"event":"extend","fork":0,"len":7}'],
    }
    lines = [head]
    for t in range(1, horizon + 1):
        lines.extend(steps[t])
        lines.append('{"t":%d,"cluster":1,"event":"extend","fork":0,"len":%d}' % (t, t))
    return "\n".join(lines) + "\n"


@pytest.fixture
def three_cluster_trace() -> Trace:
    return Trace.from_jsonl(THREE_CLUSTER_TRACE)


@pytest.fixture
def gap_trace() -> Trace:
    return Trace.from_jsonl(GAP_TRACE)


FORK_PRESETS = (
    ("9/10", "1/10"),
    ("17/20", "1/10", "1/20"),
    ("3/4", "3/20", "1/10"),
    ("19/20", "1/20"),
    ("1/2", "1/4", "1/4"),
)


def scenario_family(count: int = 120, base: int = 1000, *, max_clusters: int = 8, max_horizon: int = 200):
    """Seeded scenario parameters: (config, transactions) pairs.

    Every scenario carries one all-cluster transaction on genesis proxies when
    it has at least two clusters.
    """
    out = []
    for i in range(count):
        r = SplitMix64(base + i)
        n = 2 + r.below(max_clusters - 1)
        horizon = 20 + r.below(max_horizon - 19)
        probs = FORK_PRESETS[r.below(len(FORK_PRESETS))]
        depth = 1 + r.below(6)
        config = SimConfig(r.next(), horizon, n, probs, depth)
        txn = Transaction(0, tuple(TransactionParty(c, 0) for c in range(n)))
        out.append((config, (txn,)))
    return out


@pytest.fixture(scope="session")
def family_runs():
    """The acceptance family, simulated once: list of (trace, live growing forks)."""
    return [run_simulation(cfg, txns) for cfg, txns in scenario_family()]
