"""
Simulating clusters and replaying the trace
===========================================

A seeded run writes a JSON Lines trace; replaying it rebuilds every fork graph
exactly, so analysis never needs to rerun the simulator.
"""

import tempfile
from pathlib import Path

from forktopo import SimConfig, Transaction, TransactionParty, Trace, completion_check, run_simulation

config = SimConfig(seed=11, horizon=40, clusters=3, fork_prob=("3/4", "3/20", "1/10"), confirm_depth=2)
txn = Transaction(0, tuple(TransactionParty(c, 0) for c in range(3)))
trace, live = run_simulation(config, [txn])

print(f"{len(trace.events)} events")
for line in trace.to_jsonl().splitlines()[:6]:
    print("  ", line)

# fork counts over time for each cluster
for gf in live:
    print(f"cluster {gf.cluster_id}: counts {list(gf.fork_counts[:15])} ...")

# write, read back, and compare every snapshot
path = Path(tempfile.mkdtemp()) / "run.jsonl"
trace.write(path)
replayed = Trace.read(path)
same = all(a.snapshots == b.snapshots for a, b in zip(live, replayed.growing_forks))
print("replay matches the live run:", same)

# where does the transaction stand at the horizon?
print(completion_check(replayed, 0).to_json())
