"""Deterministic multi-chain fork simulation with exact finite-topology checks."""

from .chain_model import (
    Fork,
    ForkGraph,
    ForkState,
    Outcome,
    Transaction,
    TransactionParty,
    TxnOutcome,
    TxnStatus,
    derive_fork_states,
    is_live,
    make_graph,
    party_outcome,
    txn_outcome,
)
from .metrics import d_f, d_g, d_t, delta_f, fork_triple_classifier, verify_metric_axioms
from .morphisms import build_g, build_h, compose, verify_diagram
from .prng import SplitMix64, prng_next
from .runner import analyze, completion_check, parse_scenario, verify_trace
from .sim import GrowingFork, SimConfig, Trace, first_fork_time, replay, run_simulation, simulate, snapshot
from .topology import (
    FiniteSpace,
    PointMap,
    SpaceKind,
    ball,
    check_continuity,
    check_homeomorphism,
    compute_epsilon,
    fork_space,
    growing_fork_space,
    induce_basis,
    is_discrete,
    is_open,
    separation_violations,
    transaction_space,
)

__version__ = "0.1.0"
