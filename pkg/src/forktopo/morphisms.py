"""The maps between the three spaces and the commutative-diagram check.

``h`` sends the fork graph of cluster ``i`` to cluster ``i`` in the
transaction space. ``g`` flattens each cluster's growing fork to the fork
graph at its first forking step (an empty image when it never forks), so
that ``h o g`` carries a growing fork straight to its cluster.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .chain_model import ForkGraph
from .errors import DomainMismatch, SizeMismatch
from .sim import GrowingFork, Trace, first_fork_time
from .topology import (
    ContinuityReport,
    FiniteSpace,
    HomeomorphismReport,
    PointMap,
    check_continuity,
    check_homeomorphism,
    fork_space,
    is_discrete,
)


@dataclass(frozen=True)
class IndexCorrespondence:
    """An index set carried unchanged from one space to another."""

    indices: tuple[int, ...]
    left: str
    right: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(sorted(set(self.indices))))


@dataclass(frozen=True)
class FirstForkImage:
    cluster_id: int
    image: ForkGraph | None
    step: int | None = None
    trigger_event: int | None = None

    @property
    def is_empty(self) -> bool:
        return self.image is None


def build_h(fork_sp: FiniteSpace, txn_sp: FiniteSpace) -> PointMap:
    if len(fork_sp.points) != len(txn_sp.points):
        raise SizeMismatch(f"{len(fork_sp.points)} fork points vs {len(txn_sp.points)} clusters")
    return PointMap(fork_sp.name, txn_sp.name, dict(zip(fork_sp.points, txn_sp.points)))


def h_on_set(h: PointMap, indices: Iterable[int]) -> IndexCorrespondence:
    """Set-level action of ``h``: the fork set indexed by ``I`` goes to the clusters indexed by ``I``."""
    indices = tuple(indices)
    image = h.image(indices)
    return IndexCorrespondence(tuple(image), h.domain, h.codomain)


def first_fork_images(growing: Sequence[GrowingFork], trace: Trace | None = None) -> list[FirstForkImage]:
    images = []
    for gf in growing:
        m = first_fork_time(gf)
        if m is None:
            images.append(FirstForkImage(gf.cluster_id, None))
            continue
        trigger = None
        if trace is not None:
            trigger = next(
                (i for i, ev in enumerate(trace.events)
                 if ev.t == m and ev.cluster == gf.cluster_id and ev.kind == "spawn"),
                None,
            )
        images.append(FirstForkImage(gf.cluster_id, gf.snapshots[m], m, trigger))
    return images


def build_g(
    growing: Sequence[GrowingFork],
    trace: Trace | None = None,
    *,
    domain: str = "G",
    codomain: str = "F",
) -> tuple[PointMap, list[FirstForkImage]]:
    images = first_fork_images(growing, trace)
    return PointMap(domain, codomain, {im.cluster_id: im.cluster_id for im in images}), images


def g_image_space(images: Sequence[FirstForkImage], proxies: Mapping[int, int], name: str = "F") -> FiniteSpace:
    """Static fork space made of the first-fork images."""
    return fork_space({im.cluster_id: im.image for im in images}, proxies, name=name, strict=False)


def compose(g: PointMap, h: PointMap) -> PointMap:
    """Return ``h o g``."""
    if g.codomain != h.domain:
        raise DomainMismatch(f"cannot compose: g lands in {g.codomain!r}, h starts at {h.domain!r}")
    return PointMap(g.domain, h.codomain, {p: h(q) for p, q in g.assignment.items()})


@dataclass(frozen=True)
class DiagramReport:
    discrete: dict[str, bool]
    h: HomeomorphismReport
    g: ContinuityReport
    hg: ContinuityReport
    commutes: bool
    empty_points: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return (
            all(self.discrete.values())
            and self.h.is_homeomorphism
            and self.g.continuous
            and self.hg.continuous
            and self.commutes
        )

    def to_json(self) -> dict:
        return {
            "h": {
                "bijective": self.h.bijective,
                "continuous": self.h.forward_continuous,
                "inverse_continuous": self.h.inverse_continuous,
            },
            "g": {"continuous": self.g.continuous},
            "hg": {"continuous": self.hg.continuous, "commutes": self.commutes},
            "empty_points": list(self.empty_points),
            "discrete": dict(self.discrete),
        }


def verify_diagram(
    growing_sp: FiniteSpace,
    fork_sp: FiniteSpace,
    txn_sp: FiniteSpace,
    g: PointMap,
    h: PointMap,
) -> DiagramReport:
    # discreteness is reported on its own so it cannot masquerade as a continuity failure
    discrete = {sp.name: is_discrete(sp) for sp in (growing_sp, fork_sp, txn_sp)}
    hg = compose(g, h)
    commutes = all(hg(x) == h(g(x)) for x in growing_sp.points)
    return DiagramReport(
        discrete=discrete,
        h=check_homeomorphism(h, fork_sp, txn_sp),
        g=check_continuity(g, growing_sp, fork_sp),
        hg=check_continuity(hg, growing_sp, txn_sp),
        commutes=commutes,
        empty_points=tuple(fork_sp.meta.get("empty_points", ())),
    )
