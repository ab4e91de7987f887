"""
Balls, bases and the map diagram
================================

Each space gets an epsilon smaller than every pairwise distance, so its balls
are singletons and the topology is discrete. Every map out of a discrete space
is then continuous.
"""

from forktopo import Trace, analyze, verify_trace

# Three clusters; at the last step they hold 3, 2 and 1 forks.
TRACE = """\
{"event":"config","seed":0,"horizon":2,"clusters":3,"fork_prob":[1],"confirm_depth":2,"transactions":[]}
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
trace = Trace.from_jsonl(TRACE)

data = analyze(trace).to_json()
print("fork counts:", data["fork_counts"])
print("growing-fork space:", data["growing_space"])
(binding,) = data["bindings"]
print("fork space:", binding["fork_space"])
print("d_f pairs:", binding["d_f"])

# cluster 2 never forks, so g sends it to the empty image
result = verify_trace(trace)
(bv,) = result.bindings
print("discrete:", bv.discrete)
print("diagram:", bv.diagram.to_json())
print("all checks pass:", result.passed)
