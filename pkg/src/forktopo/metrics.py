"""Exact distances on transactions, fork graphs and growing forks.

All distances are :class:`fractions.Fraction` values. A distance that has no
value for a pair (undecided outcomes, sequences that never diverge, empty
first-fork images) raises a subclass of
:class:`~forktopo.errors.UndefinedDistance`; the verifier records such pairs
as skipped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .chain_model import ForkGraph, Outcome, is_live
from .errors import EmptyGraphPoint, EmptySpace, NeverDiverged, PendingOutcome, UndefinedDistance
from .sim import GrowingFork

Rational = Fraction
Point = Hashable
Distance = Callable[[Point, Point], Fraction]

TERNARY_COMMIT = Fraction(2)
TERNARY_ABORT = Fraction(1, 2)
TERNARY_MIXED = Fraction(1)


def d_t(o_i: Outcome, o_j: Outcome) -> Fraction:
    if o_i is Outcome.PENDING or o_j is Outcome.PENDING:
        raise PendingOutcome("ternary distance needs two decided outcomes")
    if o_i is Outcome.COMMIT and o_j is Outcome.COMMIT:
        return TERNARY_COMMIT
    if o_i is Outcome.ABORT and o_j is Outcome.ABORT:
        return TERNARY_ABORT
    return TERNARY_MIXED


def _count(g: ForkGraph | int) -> int:
    return g if isinstance(g, int) else g.fork_count


def delta_f(graphs: Iterable[ForkGraph | int]) -> Fraction:
    """Fallback fork distance: one over the largest fork count in the set."""
    counts = [_count(g) for g in graphs if g is not None]
    if not counts:
        raise EmptySpace("delta_f needs at least one fork graph")
    return Fraction(1, max(counts))


def d_f(
    g_i: ForkGraph | None,
    proxy_i: int,
    g_j: ForkGraph | None,
    proxy_j: int,
    delta: Fraction,
) -> Fraction:
    """Fork distance between two proxies.

    ``1/|F_i| + 1/|F_j|`` when both proxies are live, otherwise ``delta``
    (which must be :func:`delta_f` of the scenario's full fork set).
    """
    if g_i is None or g_j is None:
        raise EmptyGraphPoint("fork distance is undefined on an empty first-fork image")
    live_i = is_live(g_i, proxy_i)
    live_j = is_live(g_j, proxy_j)
    if live_i and live_j:
        return Fraction(1, g_i.fork_count) + Fraction(1, g_j.fork_count)
    return delta


def divergence_step(a: GrowingFork | Sequence[int], b: GrowingFork | Sequence[int]) -> int | None:
    ca = a.fork_counts if isinstance(a, GrowingFork) else a
    cb = b.fork_counts if isinstance(b, GrowingFork) else b
    for t, (x, y) in enumerate(zip(ca, cb)):
        if x != y:
            return t
    return None


def d_g(a: GrowingFork | Sequence[int], b: GrowingFork | Sequence[int]) -> Fraction:
    """Growing-fork distance: one over the smaller count at the first step the counts differ."""
    m = divergence_step(a, b)
    if m is None:
        raise NeverDiverged("fork counts never differ within the horizon")
    ca = a.fork_counts if isinstance(a, GrowingFork) else a
    cb = b.fork_counts if isinstance(b, GrowingFork) else b
    return Fraction(1, min(ca[m], cb[m]))


# triangle classes for d_f triples (x, z, y) with z the midpoint
ALL_LIVE = "all_live"
ENDPOINT_NOT_LIVE = "endpoint_not_live"
UNCOVERED = "uncovered_by_paper_proof"


def fork_triple_classifier(live: Mapping[Point, bool]) -> Callable[[Point, Point, Point], str]:
    def classify(x, z, y) -> str:
        if not live[x] or not live[y]:
            return ENDPOINT_NOT_LIVE
        if not live[z]:
            return UNCOVERED
        return ALL_LIVE

    return classify


def _fmt(v: Fraction) -> str:
    return str(v)


@dataclass(frozen=True)
class Witness:
    points: tuple
    values: tuple[Fraction, ...]
    label: str | None = None

    def to_json(self) -> dict:
        out = {"points": list(self.points), "values": [_fmt(v) for v in self.values]}
        if self.label is not None:
            out["class"] = self.label
        return out


@dataclass
class MetricReport:
    name: str = "d"
    pairs_checked: int = 0
    triples_checked: int = 0
    pairs_skipped: int = 0
    triples_skipped: int = 0
    symmetry_failures: list[Witness] = field(default_factory=list)
    nonnegativity_failures: list[Witness] = field(default_factory=list)
    triangle_failures: list[Witness] = field(default_factory=list)
    uncovered_by_paper_proof: list[Witness] = field(default_factory=list)
    paper_proof_coverage: Counter = field(default_factory=Counter)

    @property
    def passed(self) -> bool:
        return not (self.symmetry_failures or self.nonnegativity_failures or self.triangle_failures)

    def to_json(self) -> dict:
        def wl(ws):
            return [w.to_json() for w in sorted(ws, key=lambda w: (tuple(map(str, w.points)), w.values))]

        return {
            "name": self.name,
            "passed": self.passed,
            "pairs_checked": self.pairs_checked,
            "pairs_skipped": self.pairs_skipped,
            "triples_checked": self.triples_checked,
            "triples_skipped": self.triples_skipped,
            "symmetry_failures": wl(self.symmetry_failures),
            "nonnegativity_failures": wl(self.nonnegativity_failures),
            "triangle_failures": wl(self.triangle_failures),
            "uncovered_by_paper_proof": wl(self.uncovered_by_paper_proof),
            "paper_proof_coverage": dict(sorted(self.paper_proof_coverage.items())),
        }


def verify_metric_axioms(
    points: Sequence[Point],
    dist: Distance | Mapping[tuple[Point, Point], Fraction],
    *,
    classify: Callable[[Point, Point, Point], str] | None = None,
    uncovered: Iterable[str] = (UNCOVERED,),
    name: str = "d",
) -> MetricReport:
    """Check non-negativity, symmetry and the triangle inequality by enumeration.

    Only distinct points are examined. ``dist`` may be a callable or a table
    keyed by ordered pairs (a missing key counts as undefined). Triangle
    triples ``(x, z, y)`` compare ``d(x, y)`` with ``d(x, z) + d(z, y)``; when
    ``classify`` puts a triple in one of the ``uncovered`` classes, a
    violation is reported under ``uncovered_by_paper_proof`` instead of as a
    failure.
    """
    if isinstance(dist, Mapping):
        table = dist

        def dist(p, q):
            try:
                return table[p, q]
            except KeyError:
                raise UndefinedDistance(f"no entry for {(p, q)}") from None

    uncovered = frozenset(uncovered)
    report = MetricReport(name=name)
    known: dict[tuple[Point, Point], Fraction] = {}
    for x, y in combinations(points, 2):
        try:
            dxy, dyx = dist(x, y), dist(y, x)
        except UndefinedDistance:
            report.pairs_skipped += 1
            continue
        report.pairs_checked += 1
        known[x, y], known[y, x] = dxy, dyx
        if dxy != dyx:
            report.symmetry_failures.append(Witness((x, y), (dxy, dyx)))
        for (p, q), v in (((x, y), dxy), ((y, x), dyx)):
            if v < 0:
                report.nonnegativity_failures.append(Witness((p, q), (v,)))

    for x, y in combinations(points, 2):
        for z in points:
            if z == x or z == y:
                continue
            try:
                dxy, dxz, dzy = known[x, y], known[x, z], known[z, y]
            except KeyError:
                report.triples_skipped += 1
                continue
            report.triples_checked += 1
            label = classify(x, z, y) if classify else None
            if label is not None:
                report.paper_proof_coverage[label] += 1
            if dxy > dxz + dzy:
                w = Witness((x, z, y), (dxy, dxz, dzy), label)
                if label in uncovered:
                    report.uncovered_by_paper_proof.append(w)
                else:
                    report.triangle_failures.append(w)
    return report
