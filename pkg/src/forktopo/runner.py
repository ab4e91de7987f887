"""Scenario documents, trace analysis, verification and completion checks.

These functions return plain report objects; :mod:`forktopo.cli` only parses
arguments and prints them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Mapping, Sequence

from .chain_model import (
    ForkGraph,
    Transaction,
    TransactionParty,
    TxnOutcome,
    TxnStatus,
    party_outcome,
    txn_outcome,
)
from .errors import (
    BadProbabilities,
    BadReference,
    InvalidConfig,
    MalformedDocument,
    MissingField,
    OutOfRange,
)
from .metrics import (
    MetricReport,
    d_g,
    delta_f,
    fork_triple_classifier,
    verify_metric_axioms,
)
from .morphisms import DiagramReport, build_g, build_h, g_image_space, verify_diagram
from .sim import SimConfig, Trace, check_probabilities, transaction_to_json
from .topology import (
    FiniteSpace,
    SpaceKind,
    fork_space,
    growing_fork_space,
    is_discrete,
    separation_violations,
    transaction_space,
)

REQUIRED_FIELDS = ("seed", "horizon", "clusters", "fork_prob", "confirm_depth")


@dataclass(frozen=True)
class Scenario:
    config: SimConfig
    transactions: tuple[Transaction, ...] = ()

    def to_json(self) -> dict:
        return {**self.config.to_json(), "transactions": [transaction_to_json(t) for t in self.transactions]}


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def _int_field(doc: dict, key: str, text: str) -> int:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedDocument(f"{key} must be an integer, got {value!r}", field=key, line=_line_of(text, key))
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise MalformedDocument("scenario must be a JSON object", line=1)
    for key in REQUIRED_FIELDS:
        if key not in doc:
            raise MissingField(f"missing required field {key!r}", field=key)

    values = {k: _int_field(doc, k, text) for k in ("seed", "horizon", "clusters", "confirm_depth")}
    probs = doc["fork_prob"]
    if not isinstance(probs, list):
        raise MalformedDocument("fork_prob must be a list", field="fork_prob", line=_line_of(text, "fork_prob"))
    try:
        config = SimConfig(values["seed"], values["horizon"], values["clusters"], tuple(probs), values["confirm_depth"])
    except InvalidConfig as exc:
        try:
            check_probabilities(tuple(Fraction(p) if isinstance(p, str) else p for p in probs))
        except (InvalidConfig, ValueError, ZeroDivisionError, TypeError):
            raise BadProbabilities(str(exc), field="fork_prob", line=_line_of(text, "fork_prob")) from None
        raise MalformedDocument(str(exc)) from None

    txns = []
    raw_txns = doc.get("transactions", [])
    if not isinstance(raw_txns, list):
        raise MalformedDocument("transactions must be a list", field="transactions", line=_line_of(text, "transactions"))
    seen_ids = set()
    for k, raw in enumerate(raw_txns):
        where = f"transactions[{k}]"
        try:
            txn_id = int(raw.get("txn_id", k))
            parties = []
            for j, p in enumerate(raw["parties"]):
                cluster = p["cluster"]
                if isinstance(cluster, bool) or not isinstance(cluster, int):
                    raise MalformedDocument(f"cluster must be an integer", field=f"{where}.parties[{j}].cluster")
                if not 0 <= cluster < config.clusters:
                    raise BadReference(
                        f"party references cluster {cluster} but the scenario has {config.clusters}",
                        field=f"{where}.parties[{j}].cluster",
                        line=_line_of(text, "parties"),
                    )
                parties.append(TransactionParty(cluster, int(p.get("proxy", 0))))
            txn = Transaction(txn_id, tuple(parties))
        except (MalformedDocument, BadReference):
            raise
        except KeyError as exc:
            raise MissingField(f"missing {exc}", field=where) from None
        except (TypeError, ValueError, AttributeError) as exc:
            raise MalformedDocument(str(exc), field=where) from None
        if txn.txn_id in seen_ids:
            raise MalformedDocument(f"duplicate txn_id {txn.txn_id}", field=where)
        seen_ids.add(txn.txn_id)
        txns.append(txn)
    return Scenario(config, tuple(txns))


# -- proxy bindings -----------------------------------------------------------


@dataclass(frozen=True)
class Binding:
    """Which fork each participating cluster's leg is carried out on."""

    label: str
    txn_id: int | None
    proxies: Mapping[int, int]

    @property
    def clusters(self) -> tuple[int, ...]:
        return tuple(sorted(self.proxies))


def bind(trace: Trace, txn: Transaction | None = None, proxy_at: int | None = None) -> Binding:
    """Proxy binding for ``txn`` (all clusters on genesis when None).

    With ``proxy_at`` every party is rebound to the best live fork of its
    cluster at that step, i.e. where a transaction submitted then would land.
    """
    if txn is None:
        proxies = {c: 0 for c in range(trace.config.clusters)}
        label, txn_id = "all-clusters", None
    else:
        proxies = txn.proxies()
        label, txn_id = f"txn {txn.txn_id}", txn.txn_id
    if proxy_at is not None:
        if not 0 <= proxy_at <= trace.config.horizon:
            raise OutOfRange(f"--proxy-at {proxy_at} outside 0..{trace.config.horizon}")
        proxies = {c: trace.growing_forks[c].snapshots[proxy_at].best_fork().fork_id for c in proxies}
    return Binding(label, txn_id, proxies)


def bindings(trace: Trace, proxy_at: int | None = None) -> list[Binding]:
    if not trace.transactions:
        return [bind(trace, None, proxy_at)]
    return [bind(trace, txn, proxy_at) for txn in trace.transactions]


def _bound_txn(txn: Transaction, b: Binding) -> Transaction:
    return Transaction(txn.txn_id, tuple(TransactionParty(p.cluster_id, b.proxies[p.cluster_id]) for p in txn.parties))


# -- analysis -------------------------------------------------------------------


def _q(v: Fraction | None) -> str | None:
    return None if v is None else str(v)


def _pairs(space: FiniteSpace) -> list[list]:
    return [[p, q, _q(space.distance(p, q))] for p, q in combinations(space.points, 2)]


@dataclass
class Analysis:
    snapshot: int | str
    fork_counts: list[int]
    delta_f: Fraction | None
    d_g: list[list]
    growing_epsilon: Fraction
    growing_basis: list
    bindings: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "snapshot": self.snapshot,
            "fork_counts": self.fork_counts,
            "delta_f": _q(self.delta_f),
            "d_g": self.d_g,
            "growing_space": {"kind": SpaceKind.GROWING_FORK.value, "epsilon": str(self.growing_epsilon),
                              "basis": self.growing_basis},
            "bindings": self.bindings,
        }


def analyze(trace: Trace, at: int | None = None, *, first_fork: bool = False,
            proxy_at: int | None = None) -> Analysis:
    """Distances, epsilons and bases of one snapshot (the horizon by default)."""
    cfg = trace.config
    growing = trace.growing_forks
    if first_fork:
        _, images = build_g(growing, trace)
        graphs: dict[int, ForkGraph | None] = {im.cluster_id: im.image for im in images}
        label: int | str = "first-fork"
    else:
        t = cfg.horizon if at is None else at
        if not 0 <= t <= cfg.horizon:
            raise OutOfRange(f"step {t} outside 0..{cfg.horizon}")
        graphs = {c: growing[c].snapshots[t] for c in range(cfg.clusters)}
        label = t
    if proxy_at is not None and not first_fork and label < proxy_at:
        raise OutOfRange(f"proxies bound at step {proxy_at} do not exist yet at step {label}")
    universe = [g for g in graphs.values() if g is not None]
    g_space = growing_fork_space(growing)
    out = Analysis(
        snapshot=label,
        fork_counts=[None if graphs[c] is None else graphs[c].fork_count for c in range(cfg.clusters)],
        delta_f=delta_f(universe) if universe else None,
        d_g=_pairs(g_space),
        growing_epsilon=g_space.epsilon,
        growing_basis=[sorted(b) for b in g_space.basis],
    )
    for b in bindings(trace, proxy_at):
        sub = {c: graphs[c] for c in b.clusters}
        f_space = fork_space(sub, b.proxies, universe, name="F", strict=not first_fork)
        entry: dict[str, Any] = {"label": b.label, "txn_id": b.txn_id,
                                 "proxies": [[c, b.proxies[c]] for c in b.clusters]}
        if not first_fork:
            outcomes = {c: party_outcome(sub[c], b.proxies[c]) for c in b.clusters}
            t_space = transaction_space(outcomes)
            entry["outcomes"] = [[c, outcomes[c].value] for c in b.clusters]
            entry["d_t"] = _pairs(t_space)
            entry["transaction_space"] = t_space.to_json()
        entry["d_f"] = _pairs(f_space)
        entry["fork_space"] = f_space.to_json()
        out.bindings.append(entry)
    return out


# -- verification ----------------------------------------------------------------


@dataclass
class BindingVerification:
    binding: Binding
    d_t: MetricReport
    d_f: MetricReport
    spaces: dict[str, FiniteSpace]
    discrete: dict[str, bool]
    expected_epsilon: dict[str, bool]
    diagram: DiagramReport

    @property
    def passed(self) -> bool:
        return (
            self.d_t.passed
            and self.d_f.passed
            and all(self.discrete.values())
            and all(self.expected_epsilon.values())
            and self.diagram.passed
        )

    def to_json(self) -> dict:
        return {
            "label": self.binding.label,
            "txn_id": self.binding.txn_id,
            "passed": self.passed,
            "metrics": {"d_t": self.d_t.to_json(), "d_f": self.d_f.to_json()},
            "spaces": {k: sp.to_json() for k, sp in self.spaces.items()},
            "discrete": self.discrete,
            "separation_violations": {
                k: [[p, q, str(d)] for p, q, d in separation_violations(sp)] for k, sp in self.spaces.items()
            },
            "epsilon_matches": self.expected_epsilon,
            "diagram": self.diagram.to_json(),
        }


@dataclass
class Verification:
    d_g: MetricReport
    bindings: list[BindingVerification]

    @property
    def passed(self) -> bool:
        return self.d_g.passed and all(b.passed for b in self.bindings)

    @property
    def uncovered(self) -> int:
        return sum(len(b.d_f.uncovered_by_paper_proof) for b in self.bindings)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "d_g": self.d_g.to_json(),
            "bindings": [b.to_json() for b in self.bindings],
        }


def _expected_epsilons(t_space, f_space, g_space, horizon_graphs, growing) -> dict[str, bool]:
    # recomputed from raw counts, not from the space builders
    sup_f = max(g.fork_count for g in horizon_graphs)
    first = []
    for gf in growing:
        counts = gf.fork_counts
        m = next((t for t, c in enumerate(counts) if c > 1), None)
        if m is not None:
            first.append(counts[m])
    sup_g = max(first) if first else 1
    return {
        "T": t_space.epsilon == Fraction(1, 4),
        "F": f_space.epsilon == Fraction(1, 1 + sup_f),
        "G": g_space.epsilon == Fraction(1, 1 + sup_g),
    }


def verify_binding(trace: Trace, b: Binding) -> BindingVerification:
    cfg = trace.config
    growing = trace.growing_forks
    horizon_graphs = [gf.snapshots[cfg.horizon] for gf in growing]
    sub = {c: horizon_graphs[c] for c in b.clusters}
    outcomes = {c: party_outcome(sub[c], b.proxies[c]) for c in b.clusters}

    t_space = transaction_space(outcomes, name="T")
    f_space = fork_space(sub, b.proxies, horizon_graphs, name="F")
    mine = [growing[c] for c in b.clusters]
    g_space = growing_fork_space(mine, name="G")

    dt_report = verify_metric_axioms(t_space.points, t_space.dist, name="d_t")
    df_report = verify_metric_axioms(
        f_space.points, f_space.dist, classify=fork_triple_classifier(f_space.meta["live"]), name="d_f"
    )

    g_map, images = build_g(mine, trace, domain="G", codomain="F*")
    image_space = g_image_space(images, b.proxies, name="F*")
    diagram_txn = transaction_space(outcomes, name="T")
    h_map = build_h(image_space, diagram_txn)
    diagram = verify_diagram(g_space, image_space, diagram_txn, g_map, h_map)

    spaces = {"T": t_space, "F": f_space, "G": g_space, "F*": image_space}
    return BindingVerification(
        binding=b,
        d_t=dt_report,
        d_f=df_report,
        spaces=spaces,
        discrete={k: is_discrete(sp) for k, sp in spaces.items()},
        expected_epsilon=_expected_epsilons(t_space, f_space, g_space, horizon_graphs, mine),
        diagram=diagram,
    )


def verify_trace(trace: Trace) -> Verification:
    growing = trace.growing_forks
    ids = [gf.cluster_id for gf in growing]
    by_id = {gf.cluster_id: gf for gf in growing}
    dg_report = verify_metric_axioms(ids, lambda p, q: d_g(by_id[p], by_id[q]), name="d_g")
    return Verification(dg_report, [verify_binding(trace, b) for b in bindings(trace)])


# -- completion -----------------------------------------------------------------


@dataclass(frozen=True)
class CompletionReport:
    txn_id: int
    outcome_at_horizon: TxnOutcome
    stable: bool
    first_decided_step: int | None
    proxies: tuple[tuple[int, int], ...] = ()

    def to_json(self) -> dict:
        return {
            "txn_id": self.txn_id,
            "outcome": self.outcome_at_horizon.status.value,
            "per_party": [o.value for o in self.outcome_at_horizon.per_party],
            "stable": self.stable,
            "first_decided_step": self.first_decided_step,
            "proxies": [list(p) for p in self.proxies],
        }


def completion_check(trace: Trace, txn_id: int, proxy_at: int | None = None) -> CompletionReport:
    """Outcome at the horizon, its stability, and when it last left Pending.

    ``stable`` means the aggregate outcome is decided and identical over the
    final ``confirm_depth`` snapshots. ``first_decided_step`` is the earliest
    step from which the outcome stays decided through the horizon.
    """
    txn = trace.transaction(txn_id)
    b = bind(trace, txn, proxy_at)
    bound = _bound_txn(txn, b)
    cfg = trace.config
    growing = trace.growing_forks
    start = proxy_at or 0
    history: list[TxnOutcome] = []
    for t in range(start, cfg.horizon + 1):
        graphs = {c: growing[c].snapshots[t] for c in bound.cluster_ids}
        history.append(txn_outcome(bound, graphs))
    final = history[-1]
    decided = final.status is not TxnStatus.PENDING
    window = history[-cfg.confirm_depth:]
    stable = decided and all(o.status is final.status for o in window)
    first = None
    if decided:
        k = len(history) - 1
        while k > 0 and history[k - 1].status is not TxnStatus.PENDING:
            k -= 1
        first = start + k
    return CompletionReport(txn.txn_id, final, stable, first, tuple(sorted(b.proxies.items())))
