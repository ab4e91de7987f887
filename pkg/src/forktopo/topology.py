"""Finite metric spaces, their epsilon-ball bases, and continuity checks.

Open sets are never enumerated; a subset is open when it is the union of the
basis elements it contains, and continuity is decided by pulling back basis
elements only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .chain_model import ForkGraph, Outcome, is_live
from .errors import EmptyGraphPoint, EmptySpace, NotASubset, UndefinedDistance, UnknownPoint
from .metrics import d_f, d_g, d_t, delta_f
from .sim import GrowingFork, first_fork_time

Point = Hashable


class SpaceKind(enum.Enum):
    TRANSACTION = "TransactionSpace"
    FORK = "ForkSpace"
    GROWING_FORK = "GrowingForkSpace"


TRANSACTION_EPSILON = Fraction(1, 4)


def compute_epsilon(kind: SpaceKind, sizes: Iterable[int | None] = ()) -> Fraction:
    """Ball radius that isolates every point of a space of the given kind.

    ``sizes`` are fork counts for a fork space and first-fork counts for a
    growing-fork space; ``None`` marks a point without one (an empty image, or
    a cluster that never forks). When every entry is ``None`` the supremum is
    taken to be 1.
    """
    if kind is SpaceKind.TRANSACTION:
        return TRANSACTION_EPSILON
    sizes = list(sizes)
    if not sizes:
        raise EmptySpace(f"{kind.value} has no points")
    present = [s for s in sizes if s is not None]
    sup = max(present) if present else 1
    return Fraction(1, 1 + sup)


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    kind: SpaceKind
    points: tuple
    dist: Callable[[Point, Point], Fraction] = field(repr=False)
    epsilon: Fraction
    name: str = ""
    meta: Mapping = field(default_factory=dict, repr=False)
    basis: tuple[frozenset, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate points")
        if self.basis is None:
            object.__setattr__(self, "basis", induce_basis(self))

    def distance(self, p: Point, q: Point) -> Fraction | None:
        """``dist(p, q)``, or None when the pair has no defined distance."""
        try:
            return self.dist(p, q)
        except UndefinedDistance:
            return None

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "epsilon": str(self.epsilon),
            "basis": [sorted(b) for b in self.basis],
        }


def ball(space: FiniteSpace, center: Point, radius: Fraction) -> frozenset:
    """Open ball; the center always belongs, other points need a defined distance below ``radius``."""
    if center not in space.points:
        raise UnknownPoint(f"{center!r} is not a point of {space.name or space.kind.value}")
    members = {center}
    for p in space.points:
        if p == center:
            continue
        d = space.distance(center, p)
        if d is not None and d < radius:
            members.add(p)
    return frozenset(members)


def _sort_key(block: frozenset):
    return min(block), sorted(block)


def induce_basis(space: FiniteSpace) -> tuple[frozenset, ...]:
    blocks = {ball(space, p, space.epsilon) for p in space.points}
    return tuple(sorted(blocks, key=_sort_key))


def is_discrete(space: FiniteSpace) -> bool:
    return set(space.basis) == {frozenset([p]) for p in space.points}


def is_open(space: FiniteSpace, subset: Iterable[Point]) -> bool:
    subset = frozenset(subset)
    stray = subset - set(space.points)
    if stray:
        raise NotASubset(f"not points of the space: {sorted(map(repr, stray))}")
    covered = frozenset().union(*(b for b in space.basis if b <= subset))
    return covered == subset


@dataclass(frozen=True)
class PointMap:
    domain: str
    codomain: str
    assignment: Mapping[Point, Point]

    def __call__(self, p: Point) -> Point:
        return self.assignment[p]

    def image(self, subset: Iterable[Point]) -> frozenset:
        return frozenset(self.assignment[p] for p in subset)

    def preimage(self, subset: Iterable[Point]) -> frozenset:
        subset = frozenset(subset)
        return frozenset(p for p, q in self.assignment.items() if q in subset)

    def is_bijective_onto(self, points: Sequence[Point]) -> bool:
        values = list(self.assignment.values())
        return len(set(values)) == len(values) and set(values) == set(points)

    def inverse(self) -> PointMap:
        inv = {q: p for p, q in self.assignment.items()}
        if len(inv) != len(self.assignment):
            raise ValueError("map is not injective")
        return PointMap(self.codomain, self.domain, inv)


def identity_map(space: FiniteSpace) -> PointMap:
    return PointMap(space.name, space.name, {p: p for p in space.points})


@dataclass(frozen=True)
class ContinuityReport:
    continuous: bool
    witness: frozenset | None = None


@dataclass(frozen=True)
class HomeomorphismReport:
    bijective: bool
    forward_continuous: bool
    inverse_continuous: bool | None

    @property
    def is_homeomorphism(self) -> bool:
        return self.bijective and self.forward_continuous and bool(self.inverse_continuous)


def check_continuity(f: PointMap, dom: FiniteSpace, cod: FiniteSpace) -> ContinuityReport:
    missing = [p for p in dom.points if p not in f.assignment]
    if missing:
        raise ValueError(f"map is not total: no image for {missing}")
    for b in cod.basis:
        if not is_open(dom, f.preimage(b)):
            return ContinuityReport(False, b)
    return ContinuityReport(True)


def check_homeomorphism(f: PointMap, dom: FiniteSpace, cod: FiniteSpace) -> HomeomorphismReport:
    forward = check_continuity(f, dom, cod).continuous
    bijective = set(f.assignment) == set(dom.points) and f.is_bijective_onto(cod.points)
    if not bijective:
        return HomeomorphismReport(False, forward, None)
    inverse = check_continuity(f.inverse(), cod, dom).continuous
    return HomeomorphismReport(True, forward, inverse)


# -- the three concrete spaces ------------------------------------------------


def transaction_space(outcomes: Mapping[int, Outcome], name: str = "T") -> FiniteSpace:
    """Clusters with their per-party outcomes under the ternary distance."""
    outcomes = dict(outcomes)

    def dist(p, q):
        return d_t(outcomes[p], outcomes[q])

    return FiniteSpace(
        SpaceKind.TRANSACTION,
        tuple(sorted(outcomes)),
        dist,
        compute_epsilon(SpaceKind.TRANSACTION),
        name,
        {"outcomes": outcomes},
    )


def fork_space(
    graphs: Mapping[int, ForkGraph | None],
    proxies: Mapping[int, int],
    universe: Iterable[ForkGraph] | None = None,
    name: str = "F",
    *,
    strict: bool = True,
) -> FiniteSpace:
    """Clusters' fork graphs with their proxies under the fork distance.

    ``universe`` is the full fork-graph set the fallback distance and epsilon
    range over; it defaults to the non-empty graphs among the points. A
    ``None`` graph stands for the empty image of a never-forking cluster.
    With ``strict=False`` a proxy fork absent from its graph (not spawned yet)
    counts as not live instead of raising MissingFork.
    """
    graphs = dict(graphs)
    proxies = {c: proxies.get(c, 0) for c in graphs}
    pool = [g for g in (graphs.values() if universe is None else universe) if g is not None]
    delta = delta_f(pool) if pool else None
    if not strict:
        for c, g in graphs.items():
            if g is not None and proxies[c] not in g:
                proxies[c] = None
    live = {c: g is not None and proxies[c] is not None and is_live(g, proxies[c]) for c, g in graphs.items()}

    def dist(p, q):
        if proxies[p] is None or proxies[q] is None:
            if graphs[p] is None or graphs[q] is None:
                raise EmptyGraphPoint("fork distance is undefined on an empty first-fork image")
            return delta
        return d_f(graphs[p], proxies[p], graphs[q], proxies[q], delta)

    sizes = [g.fork_count for g in pool] if pool else [None] * len(graphs)
    return FiniteSpace(
        SpaceKind.FORK,
        tuple(sorted(graphs)),
        dist,
        compute_epsilon(SpaceKind.FORK, sizes),
        name,
        {
            "graphs": graphs,
            "proxies": dict(proxies),
            "delta": delta,
            "live": live,
            "empty_points": sorted(c for c, g in graphs.items() if g is None),
        },
    )


def growing_fork_space(growing: Sequence[GrowingFork], name: str = "G") -> FiniteSpace:
    by_id = {gf.cluster_id: gf for gf in growing}

    def dist(p, q):
        return d_g(by_id[p], by_id[q])

    first = {}
    for cid, gf in by_id.items():
        m = first_fork_time(gf)
        first[cid] = None if m is None else gf.fork_counts[m]
    return FiniteSpace(
        SpaceKind.GROWING_FORK,
        tuple(sorted(by_id)),
        dist,
        compute_epsilon(SpaceKind.GROWING_FORK, first.values()),
        name,
        {"first_fork_counts": first},
    )


def separation_violations(space: FiniteSpace) -> list[tuple[Point, Point, Fraction]]:
    """Pairs whose defined distance does not exceed epsilon."""
    bad = []
    for i, p in enumerate(space.points):
        for q in space.points[i + 1:]:
            d = space.distance(p, q)
            if d is not None and not space.epsilon < d:
                bad.append((p, q, d))
    return bad
