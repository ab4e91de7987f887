"""Static domain model: forks, fork graphs, transactions and their outcomes.

Everything here is immutable. A :class:`ForkGraph` is one cluster's set of
forks at a single moment; the growing, time-indexed view lives in
:mod:`forktopo.sim`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import MissingCluster, MissingFork


class ForkState(enum.Enum):
    UNDECIDED = "undecided"
    CONFIRMED = "confirmed"
    ELIMINATED = "eliminated"


class Outcome(enum.Enum):
    COMMIT = "commit"
    ABORT = "abort"
    PENDING = "pending"


class TxnStatus(enum.Enum):
    COMMIT = "commit"
    ABORT = "abort"
    PENDING = "pending"
    ATOMICITY_VIOLATION = "atomicity_violation"


@dataclass(frozen=True, slots=True)
class Fork:
    fork_id: int
    cluster_id: int
    state: ForkState = ForkState.UNDECIDED
    length: int = 0
    parent_id: int | None = None
    spawn_step: int = 0

    def __post_init__(self) -> None:
        if self.fork_id < 0:
            raise ValueError(f"fork_id must be >= 0, got {self.fork_id}")
        if self.length < 0:
            raise ValueError(f"length must be >= 0, got {self.length}")
        if self.parent_id is not None and self.parent_id == self.fork_id:
            raise ValueError(f"fork {self.fork_id} cannot be its own parent")
        if self.fork_id == 0 and (self.parent_id is not None or self.spawn_step != 0):
            raise ValueError("fork 0 is the genesis fork: no parent, spawn_step 0")

    @property
    def is_eliminated(self) -> bool:
        return self.state is ForkState.ELIMINATED


@dataclass(frozen=True, slots=True)
class ForkGraph:
    """All forks of one cluster at one moment, ordered by fork id.

    Fork states are expected to be consistent (see :func:`derive_fork_states`);
    the constructor only checks structural invariants so that callers can
    build a graph with raw elimination flags and then derive the rest.
    """

    cluster_id: int
    forks: tuple[Fork, ...]

    def __post_init__(self) -> None:
        forks = tuple(self.forks)
        object.__setattr__(self, "forks", forks)
        if not forks:
            raise ValueError("a fork graph holds at least one fork")
        ids = [f.fork_id for f in forks]
        if ids != sorted(set(ids)):
            raise ValueError(f"fork ids must be unique and ascending, got {ids}")
        for f in forks:
            if f.cluster_id != self.cluster_id:
                raise ValueError(f"fork {f.fork_id} belongs to cluster {f.cluster_id}, not {self.cluster_id}")

    @classmethod
    def genesis(cls, cluster_id: int) -> ForkGraph:
        return cls(cluster_id, (Fork(0, cluster_id, ForkState.CONFIRMED),))

    def __len__(self) -> int:
        return len(self.forks)

    @property
    def fork_count(self) -> int:
        """|F_i|: every fork counts, eliminated ones included."""
        return len(self.forks)

    def fork(self, fork_id: int) -> Fork:
        # ids are not necessarily dense for hand-built graphs
        for f in self.forks:
            if f.fork_id == fork_id:
                return f
        raise MissingFork(f"cluster {self.cluster_id} has no fork {fork_id}")

    def __contains__(self, fork_id: object) -> bool:
        return any(f.fork_id == fork_id for f in self.forks)

    def live_forks(self) -> list[Fork]:
        return [f for f in self.forks if not f.is_eliminated]

    def confirmed(self) -> Fork | None:
        for f in self.forks:
            if f.state is ForkState.CONFIRMED:
                return f
        return None

    def best_fork(self) -> Fork:
        """Longest non-eliminated fork, ties broken by lowest id."""
        live = self.live_forks() or list(self.forks)
        return max(live, key=lambda f: (f.length, -f.fork_id))

    def check_invariants(self) -> list[str]:
        """Return a list of violated state invariants (empty when consistent)."""
        problems = []
        confirmed = [f for f in self.forks if f.state is ForkState.CONFIRMED]
        if len(confirmed) > 1:
            problems.append(f"{len(confirmed)} confirmed forks")
        for f in self.forks:
            others_gone = all(o.is_eliminated for o in self.forks if o.fork_id != f.fork_id)
            if (f.state is ForkState.CONFIRMED) != (others_gone and not f.is_eliminated):
                problems.append(f"fork {f.fork_id} is {f.state.value} but others_eliminated={others_gone}")
        return problems


@dataclass(frozen=True, slots=True)
class TransactionParty:
    cluster_id: int
    proxy_fork_id: int = 0


@dataclass(frozen=True, slots=True)
class Transaction:
    txn_id: int
    parties: tuple[TransactionParty, ...]

    def __post_init__(self) -> None:
        parties = tuple(self.parties)
        object.__setattr__(self, "parties", parties)
        if len(parties) < 2:
            raise ValueError(f"transaction {self.txn_id} needs at least 2 parties")
        clusters = [p.cluster_id for p in parties]
        if len(set(clusters)) != len(clusters):
            raise ValueError(f"transaction {self.txn_id} repeats a cluster: {clusters}")

    @property
    def cluster_ids(self) -> tuple[int, ...]:
        return tuple(p.cluster_id for p in self.parties)

    def proxies(self) -> dict[int, int]:
        return {p.cluster_id: p.proxy_fork_id for p in self.parties}


@dataclass(frozen=True)
class TxnOutcome:
    status: TxnStatus
    per_party: tuple[Outcome, ...] = field(default=())


def derive_fork_states(graph: ForkGraph) -> ForkGraph:
    """Recompute Confirmed/Undecided from the sticky Eliminated flags.

    A surviving fork is confirmed exactly when every other fork is
    eliminated; a single-fork graph is therefore confirmed.
    """
    alive = [f for f in graph.forks if not f.is_eliminated]
    forks = []
    for f in graph.forks:
        if f.is_eliminated:
            forks.append(f)
            continue
        state = ForkState.CONFIRMED if len(alive) == 1 else ForkState.UNDECIDED
        forks.append(f if f.state is state else replace(f, state=state))
    return ForkGraph(graph.cluster_id, tuple(forks))


def is_live(graph: ForkGraph, fork_id: int) -> bool:
    return graph.fork(fork_id).state is not ForkState.ELIMINATED


_OUTCOME_OF_STATE = {
    ForkState.CONFIRMED: Outcome.COMMIT,
    ForkState.ELIMINATED: Outcome.ABORT,
    ForkState.UNDECIDED: Outcome.PENDING,
}


def party_outcome(graph: ForkGraph, fork_id: int) -> Outcome:
    return _OUTCOME_OF_STATE[graph.fork(fork_id).state]


def aggregate_outcomes(outcomes: Sequence[Outcome]) -> TxnStatus:
    if any(o is Outcome.PENDING for o in outcomes):
        return TxnStatus.PENDING
    if all(o is Outcome.COMMIT for o in outcomes):
        return TxnStatus.COMMIT
    if all(o is Outcome.ABORT for o in outcomes):
        return TxnStatus.ABORT
    return TxnStatus.ATOMICITY_VIOLATION


def txn_outcome(txn: Transaction, graphs: Mapping[int, ForkGraph]) -> TxnOutcome:
    per_party = []
    for party in txn.parties:
        try:
            graph = graphs[party.cluster_id]
        except KeyError:
            raise MissingCluster(f"no fork graph for cluster {party.cluster_id}") from None
        per_party.append(party_outcome(graph, party.proxy_fork_id))
    return TxnOutcome(aggregate_outcomes(per_party), tuple(per_party))


def make_graph(cluster_id: int, specs: Iterable[tuple[int, bool]] | Iterable[tuple[int, bool, int]]) -> ForkGraph:
    """Build a state-consistent graph from ``(fork_id, eliminated[, length])`` tuples.

    Handy for tests and hand-built scenarios; parents are left unset except
    that every non-genesis fork hangs off fork 0.
    """
    forks = []
    for spec in specs:
        fork_id, eliminated, *rest = spec
        length = rest[0] if rest else 0
        forks.append(
            Fork(
                fork_id,
                cluster_id,
                ForkState.ELIMINATED if eliminated else ForkState.UNDECIDED,
                length,
                None if fork_id == 0 else 0,
                0 if fork_id == 0 else 1,
            )
        )
    return derive_fork_states(ForkGraph(cluster_id, tuple(sorted(forks, key=lambda f: f.fork_id))))
