"""Deterministic round-based fork simulator and JSON Lines trace replay.

Each step, clusters are processed in ascending id from one shared SplitMix64
stream. A cluster draws a fork multiplicity ``f`` from ``fork_prob``, picks a
live parent, extends it by one block, spawns ``f - 1`` sibling forks from the
new tip, and finally eliminates every fork trailing the longest live fork by
at least ``confirm_depth`` blocks.

The infinite growing-fork sequence is represented by its prefix up to
``horizon``; every analysis downstream is relative to that horizon.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import accumulate
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .chain_model import Fork, ForkGraph, ForkState, Transaction, TransactionParty, derive_fork_states
from .errors import InvalidConfig, MissingCluster, MissingTransaction, OutOfRange, TraceFormatError
from .prng import MASK64, prng_next

_TWO64 = 1 << 64
DECIMAL_TOLERANCE = Fraction(1, 10**9)


def _as_probability(value) -> int | float | Fraction:
    if isinstance(value, bool):
        raise InvalidConfig(f"probability must be numeric, got {value!r}")
    if isinstance(value, (int, float, Fraction)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise InvalidConfig(f"bad probability {value!r}") from None
    raise InvalidConfig(f"probability must be a number or 'p/q' string, got {value!r}")


def check_probabilities(probs: Sequence[int | float | Fraction]) -> None:
    """Raise InvalidConfig unless ``probs`` is a probability vector.

    The sum must be exactly 1, or within 1e-9 when any entry is a float.
    """
    if not probs:
        raise InvalidConfig("fork_prob needs at least one entry")
    exact = [Fraction(p) for p in probs]
    if any(p < 0 or p > 1 for p in exact):
        raise InvalidConfig(f"probabilities must lie in [0, 1], got {list(map(str, exact))}")
    total = sum(exact)
    if any(isinstance(p, float) for p in probs):
        if abs(total - 1) > DECIMAL_TOLERANCE:
            raise InvalidConfig(f"fork_prob sums to {float(total)!r}, not 1")
    elif total != 1:
        raise InvalidConfig(f"fork_prob sums to {total}, not 1")


@dataclass(frozen=True)
class SimConfig:
    """Simulator parameters.

    ``fork_prob[i]`` is the probability of drawing ``f = i + 1`` forks in one
    step (so ``fork_prob[0]`` is the chance of no new fork). Values may be
    ints, floats, :class:`~fractions.Fraction` or ``"p/q"`` strings; the sum
    must equal 1 exactly unless floats are involved, in which case it must be
    within 1e-9.
    """

    seed: int
    horizon: int
    clusters: int
    fork_prob: tuple[int | float | Fraction, ...]
    confirm_depth: int = 1

    def __post_init__(self) -> None:
        probs = tuple(_as_probability(p) for p in self.fork_prob)
        object.__setattr__(self, "fork_prob", probs)
        for name in ("seed", "horizon", "clusters", "confirm_depth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidConfig(f"{name} must be an integer, got {value!r}")
        if not 0 <= self.seed <= MASK64:
            raise InvalidConfig(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.horizon < 0:
            raise InvalidConfig(f"horizon must be >= 0, got {self.horizon}")
        if self.clusters < 1:
            raise InvalidConfig(f"clusters must be >= 1, got {self.clusters}")
        if self.confirm_depth < 1:
            raise InvalidConfig(f"confirm_depth must be >= 1, got {self.confirm_depth}")
        check_probabilities(probs)

    @property
    def fmax(self) -> int:
        return len(self.fork_prob)

    @cached_property
    def cdf(self) -> tuple[Fraction, ...]:
        return tuple(accumulate(Fraction(p) for p in self.fork_prob))

    def draw_fork_count(self, value: int) -> int:
        """Inverse CDF: map a 64-bit draw to ``f`` in ``1..fmax``."""
        u = Fraction(value, _TWO64)
        for i, c in enumerate(self.cdf):
            if u < c:
                return i + 1
        return self.fmax

    def with_seed(self, seed: int) -> SimConfig:
        return SimConfig(seed, self.horizon, self.clusters, self.fork_prob, self.confirm_depth)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "horizon": self.horizon,
            "clusters": self.clusters,
            "fork_prob": [str(p) if isinstance(p, Fraction) else p for p in self.fork_prob],
            "confirm_depth": self.confirm_depth,
        }


@dataclass(frozen=True, slots=True)
class TraceEvent:
    t: int
    cluster: int
    kind: str
    fork: int
    parent: int | None = None
    length: int | None = None

    KINDS = ("spawn", "extend", "eliminate")

    def to_json(self) -> dict:
        out = {"t": self.t, "cluster": self.cluster, "event": self.kind, "fork": self.fork}
        if self.kind == "spawn":
            out["parent"] = self.parent
        elif self.kind == "extend":
            out["len"] = self.length
        return out

    @classmethod
    def from_json(cls, obj: dict) -> TraceEvent:
        try:
            kind = obj["event"]
            if kind not in cls.KINDS:
                raise TraceFormatError(f"unknown event kind {kind!r}")
            return cls(
                int(obj["t"]),
                int(obj["cluster"]),
                kind,
                int(obj["fork"]),
                parent=int(obj["parent"]) if kind == "spawn" else None,
                length=int(obj["len"]) if kind == "extend" else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TraceFormatError):
                raise
            raise TraceFormatError(f"bad trace event {obj!r}: {exc}") from None


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def transaction_to_json(txn: Transaction) -> dict:
    return {
        "txn_id": txn.txn_id,
        "parties": [{"cluster": p.cluster_id, "proxy": p.proxy_fork_id} for p in txn.parties],
    }


def transaction_from_json(obj: dict) -> Transaction:
    return Transaction(
        int(obj["txn_id"]),
        tuple(TransactionParty(int(p["cluster"]), int(p.get("proxy", 0))) for p in obj["parties"]),
    )


@dataclass(frozen=True)
class GrowingFork:
    """One cluster's fork graphs at steps ``0..horizon``."""

    cluster_id: int
    snapshots: tuple[ForkGraph, ...]

    def __post_init__(self) -> None:
        if not self.snapshots:
            raise ValueError("a growing fork needs at least the genesis snapshot")

    @property
    def horizon(self) -> int:
        return len(self.snapshots) - 1

    @cached_property
    def fork_counts(self) -> tuple[int, ...]:
        return tuple(g.fork_count for g in self.snapshots)

    def at(self, t: int) -> ForkGraph:
        if not 0 <= t <= self.horizon:
            raise OutOfRange(f"step {t} outside 0..{self.horizon}")
        return self.snapshots[t]


def first_fork_time(growing: GrowingFork | Sequence[int]) -> int | None:
    """Smallest step whose fork count exceeds 1, or None if it never forks."""
    counts = growing.fork_counts if isinstance(growing, GrowingFork) else growing
    for t, c in enumerate(counts):
        if c > 1:
            return t
    return None


@dataclass(frozen=True)
class Trace:
    config: SimConfig
    transactions: tuple[Transaction, ...] = ()
    events: tuple[TraceEvent, ...] = field(default=(), repr=False)

    def to_jsonl(self) -> str:
        head = {"event": "config", **self.config.to_json(),
                "transactions": [transaction_to_json(t) for t in self.transactions]}
        lines = [_dumps(head)]
        lines.extend(_dumps(ev.to_json()) for ev in self.events)
        return "\n".join(lines) + "\n"

    def write(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str) -> Trace:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise TraceFormatError("empty trace")
        try:
            head = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line 1: {exc}") from None
        if not isinstance(head, dict) or head.get("event") != "config":
            raise TraceFormatError("first trace line must be the config echo")
        try:
            config = SimConfig(head["seed"], head["horizon"], head["clusters"],
                               tuple(head["fork_prob"]), head["confirm_depth"])
            txns = tuple(transaction_from_json(t) for t in head.get("transactions", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceFormatError(f"bad config echo: {exc}") from None
        events = []
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"line {lineno}: {exc}") from None
            events.append(TraceEvent.from_json(obj))
        keys = [(ev.t, ev.cluster) for ev in events]
        if keys != sorted(keys):
            raise TraceFormatError("events are not sorted by (t, cluster)")
        for ev in events:
            if not 1 <= ev.t <= config.horizon or not 0 <= ev.cluster < config.clusters:
                raise TraceFormatError(f"event outside horizon/cluster range: {ev}")
        return cls(config, txns, tuple(events))

    @classmethod
    def read(cls, path: str | os.PathLike) -> Trace:
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))

    @cached_property
    def growing_forks(self) -> tuple[GrowingFork, ...]:
        return replay(self)

    def transaction(self, txn_id: int) -> Transaction:
        for txn in self.transactions:
            if txn.txn_id == txn_id:
                return txn
        raise MissingTransaction(f"no transaction {txn_id} in trace")


class _ClusterBuilder:
    """Mutable working copy of one cluster's forks for a single step."""

    def __init__(self, graph: ForkGraph):
        self.cluster_id = graph.cluster_id
        self.forks: dict[int, Fork] = {f.fork_id: f for f in graph.forks}

    def extend(self, fork_id: int, length: int | None = None) -> int:
        f = self.forks[fork_id]
        new_len = f.length + 1 if length is None else length
        self.forks[fork_id] = Fork(f.fork_id, f.cluster_id, f.state, new_len, f.parent_id, f.spawn_step)
        return new_len

    def spawn(self, parent_id: int, t: int, fork_id: int | None = None) -> int:
        parent = self.forks[parent_id]
        new_id = max(self.forks) + 1 if fork_id is None else fork_id
        if new_id in self.forks:
            raise TraceFormatError(f"cluster {self.cluster_id}: fork {new_id} spawned twice")
        self.forks[new_id] = Fork(new_id, self.cluster_id, ForkState.UNDECIDED, parent.length, parent_id, t)
        return new_id

    def eliminate(self, fork_id: int) -> None:
        f = self.forks[fork_id]
        self.forks[fork_id] = Fork(f.fork_id, f.cluster_id, ForkState.ELIMINATED, f.length, f.parent_id, f.spawn_step)

    def sweep(self, confirm_depth: int) -> list[int]:
        live = [f for f in self.forks.values() if not f.is_eliminated]
        best = max(f.length for f in live)
        doomed = [f.fork_id for f in live if f.length <= best - confirm_depth]
        for fork_id in doomed:
            self.eliminate(fork_id)
        return doomed

    def apply(self, ev: TraceEvent) -> None:
        try:
            if ev.kind == "extend":
                self.extend(ev.fork, ev.length)
            elif ev.kind == "spawn":
                self.spawn(ev.parent, ev.t, ev.fork)
            else:
                self.eliminate(ev.fork)
        except KeyError as exc:
            raise TraceFormatError(f"event refers to unknown fork {exc}: {ev}") from None

    def graph(self) -> ForkGraph:
        forks = tuple(self.forks[k] for k in sorted(self.forks))
        return derive_fork_states(ForkGraph(self.cluster_id, forks))


def eliminate_trailing(graph: ForkGraph, confirm_depth: int) -> ForkGraph:
    """Run only the elimination sweep and state derivation on ``graph``."""
    b = _ClusterBuilder(graph)
    b.sweep(confirm_depth)
    return b.graph()


def sim_step(
    graphs: Sequence[ForkGraph], prng_state: int, config: SimConfig, t: int
) -> tuple[tuple[ForkGraph, ...], int, list[TraceEvent]]:
    """Advance every cluster by one step.

    Returns the new graphs, the advanced PRNG state and the events emitted, in
    emission order (per cluster: extend, spawns, eliminations).
    """
    if t < 1:
        raise ValueError(f"steps start at 1, got {t}")
    events: list[TraceEvent] = []
    out = []
    for graph in sorted(graphs, key=lambda g: g.cluster_id):
        cid = graph.cluster_id
        b = _ClusterBuilder(graph)
        prng_state, value = prng_next(prng_state)
        f = config.draw_fork_count(value)
        live = sorted(k for k, fk in b.forks.items() if not fk.is_eliminated)
        prng_state, value = prng_next(prng_state)
        parent = live[value % len(live)]
        new_len = b.extend(parent)
        events.append(TraceEvent(t, cid, "extend", parent, length=new_len))
        for _ in range(f - 1):
            child = b.spawn(parent, t)
            events.append(TraceEvent(t, cid, "spawn", child, parent=parent))
        for fork_id in b.sweep(config.confirm_depth):
            events.append(TraceEvent(t, cid, "eliminate", fork_id))
        out.append(b.graph())
    return tuple(out), prng_state, events


def run_simulation(
    config: SimConfig, txns: Iterable[Transaction] = ()
) -> tuple[Trace, tuple[GrowingFork, ...]]:
    """Simulate and also return the live per-cluster snapshot history."""
    txns = tuple(txns)
    for txn in txns:
        for cid in txn.cluster_ids:
            if not 0 <= cid < config.clusters:
                raise InvalidConfig(f"transaction {txn.txn_id} references cluster {cid} of {config.clusters}")
    graphs = tuple(ForkGraph.genesis(c) for c in range(config.clusters))
    history = [[g] for g in graphs]
    state = config.seed
    events: list[TraceEvent] = []
    for t in range(1, config.horizon + 1):
        graphs, state, step_events = sim_step(graphs, state, config, t)
        events.extend(step_events)
        for h, g in zip(history, graphs):
            h.append(g)
    trace = Trace(config, txns, tuple(events))
    return trace, tuple(GrowingFork(c, tuple(h)) for c, h in enumerate(history))


def simulate(config: SimConfig, txns: Iterable[Transaction] = ()) -> Trace:
    return run_simulation(config, txns)[0]


def _events_by_step(events: Iterable[TraceEvent]) -> Iterator[tuple[int, list[TraceEvent]]]:
    bucket: list[TraceEvent] = []
    current = None
    for ev in events:
        if ev.t != current and bucket:
            yield current, bucket
            bucket = []
        current = ev.t
        bucket.append(ev)
    if bucket:
        yield current, bucket


def replay(trace: Trace) -> tuple[GrowingFork, ...]:
    """Rebuild every cluster's snapshot sequence from the trace events."""
    n, horizon = trace.config.clusters, trace.config.horizon
    graphs = [ForkGraph.genesis(c) for c in range(n)]
    history = [[g] for g in graphs]
    pending = dict(_events_by_step(trace.events))
    for t in range(1, horizon + 1):
        touched: dict[int, _ClusterBuilder] = {}
        for ev in pending.get(t, ()):
            b = touched.get(ev.cluster)
            if b is None:
                b = touched[ev.cluster] = _ClusterBuilder(graphs[ev.cluster])
            b.apply(ev)
        for cid, b in touched.items():
            graphs[cid] = b.graph()
        for h, g in zip(history, graphs):
            h.append(g)
    return tuple(GrowingFork(c, tuple(h)) for c, h in enumerate(history))


def snapshot(trace: Trace, cluster_id: int, t: int) -> ForkGraph:
    """Fork graph of ``cluster_id`` after replaying all events up to step ``t``."""
    if not 0 <= cluster_id < trace.config.clusters:
        raise MissingCluster(f"no cluster {cluster_id} (trace has {trace.config.clusters})")
    if not 0 <= t <= trace.config.horizon:
        raise OutOfRange(f"step {t} outside 0..{trace.config.horizon}")
    return trace.growing_forks[cluster_id].snapshots[t]
