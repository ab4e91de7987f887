from itertools import product

import pytest

from forktopo.chain_model import (
    Fork,
    ForkGraph,
    ForkState,
    Outcome,
    Transaction,
    TransactionParty,
    TxnStatus,
    derive_fork_states,
    is_live,
    make_graph,
    party_outcome,
    txn_outcome,
)
from forktopo.errors import MissingCluster, MissingFork

U, C, E = ForkState.UNDECIDED, ForkState.CONFIRMED, ForkState.ELIMINATED


def states(graph):
    return [f.state for f in graph.forks]


def raw(cluster, *flags):
    forks = [Fork(i, cluster, E if gone else U, 0, None if i == 0 else 0, 0 if i == 0 else 1)
             for i, gone in enumerate(flags)]
    return ForkGraph(cluster, tuple(forks))


class TestDeriveForkStates:
    def test_single_fork_is_confirmed(self):
        assert states(derive_fork_states(raw(0, False))) == [C]

    def test_survivor_of_two_is_confirmed(self):
        assert states(derive_fork_states(raw(0, False, True))) == [C, E]

    def test_two_survivors_stay_undecided(self):
        assert states(derive_fork_states(raw(0, False, False, True))) == [U, U, E]

    def test_confirmed_reverts_when_a_fork_appears(self):
        g = derive_fork_states(raw(0, False))
        forks = g.forks + (Fork(1, 0, U, 0, 0, 3),)
        assert states(derive_fork_states(ForkGraph(0, forks))) == [U, U]

    def test_all_eliminated_has_no_confirmed(self):
        g = derive_fork_states(raw(0, True, True))
        assert g.confirmed() is None
        assert g.check_invariants() == []

    def test_invariants_hold_for_every_flag_pattern(self):
        for n in range(1, 6):
            for flags in product([False, True], repeat=n):
                g = derive_fork_states(raw(0, *flags))
                assert g.check_invariants() == []
                assert sum(f.state is C for f in g.forks) <= 1


class TestForkGraph:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ForkGraph(0, ())

    def test_rejects_unsorted_ids(self):
        with pytest.raises(ValueError):
            ForkGraph(0, (Fork(1, 0, U, 0, 0, 1), Fork(0, 0)))

    def test_genesis_rules(self):
        with pytest.raises(ValueError):
            Fork(0, 0, parent_id=3)
        with pytest.raises(ValueError):
            Fork(2, 0, parent_id=2)

    def test_fork_count_includes_eliminated(self):
        assert make_graph(0, [(0, True), (1, False), (2, True)]).fork_count == 3


class TestLiveness:
    def test_confirmed_is_live(self):
        assert is_live(make_graph(0, [(0, False)]), 0)

    def test_eliminated_is_not_live(self):
        assert not is_live(make_graph(0, [(0, True), (1, False)]), 0)

    def test_undecided_is_live(self):
        assert is_live(make_graph(0, [(0, False), (1, False)]), 1)

    def test_missing_fork(self):
        with pytest.raises(MissingFork):
            is_live(make_graph(0, [(0, False)]), 7)


class TestPartyOutcome:
    def test_single_fork_commits(self):
        assert party_outcome(make_graph(0, [(0, False)]), 0) is Outcome.COMMIT

    def test_eliminated_aborts(self):
        assert party_outcome(make_graph(0, [(0, True), (1, False)]), 0) is Outcome.ABORT

    def test_undecided_pending(self):
        assert party_outcome(make_graph(0, [(0, False), (1, False)]), 0) is Outcome.PENDING

    def test_mapping_is_exhaustive(self):
        assert {party_outcome(g, 0) for g in (
            make_graph(0, [(0, False)]),
            make_graph(0, [(0, True), (1, False)]),
            make_graph(0, [(0, False), (1, False)]),
        )} == set(Outcome)


def graph_with_outcome(cluster, outcome):
    return {
        Outcome.COMMIT: make_graph(cluster, [(0, False)]),
        Outcome.ABORT: make_graph(cluster, [(0, True), (1, False)]),
        Outcome.PENDING: make_graph(cluster, [(0, False), (1, False)]),
    }[outcome]


def classify_by_counting(outcomes):
    # independent oracle: classify from the outcome multiset
    n = len(outcomes)
    pending = outcomes.count(Outcome.PENDING)
    commits = outcomes.count(Outcome.COMMIT)
    if pending:
        return TxnStatus.PENDING
    if commits == n:
        return TxnStatus.COMMIT
    if commits == 0:
        return TxnStatus.ABORT
    return TxnStatus.ATOMICITY_VIOLATION


class TestTxnOutcome:
    def txn(self, n):
        return Transaction(1, tuple(TransactionParty(c, 0) for c in range(n)))

    def test_all_confirmed_commit(self):
        graphs = {c: graph_with_outcome(c, Outcome.COMMIT) for c in range(3)}
        assert txn_outcome(self.txn(3), graphs).status is TxnStatus.COMMIT

    def test_all_eliminated_abort(self):
        graphs = {c: graph_with_outcome(c, Outcome.ABORT) for c in range(2)}
        assert txn_outcome(self.txn(2), graphs).status is TxnStatus.ABORT

    def test_mixed_is_atomicity_violation(self):
        graphs = {0: graph_with_outcome(0, Outcome.COMMIT), 1: graph_with_outcome(1, Outcome.ABORT)}
        result = txn_outcome(self.txn(2), graphs)
        assert result.status is TxnStatus.ATOMICITY_VIOLATION
        assert result.per_party == (Outcome.COMMIT, Outcome.ABORT)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_full_outcome_table(self, n):
        seen = {status: 0 for status in TxnStatus}
        for vec in product(list(Outcome), repeat=n):
            graphs = {c: graph_with_outcome(c, o) for c, o in enumerate(vec)}
            result = txn_outcome(self.txn(n), graphs)
            assert result.per_party == vec
            assert result.status is classify_by_counting(list(vec))
            seen[result.status] += 1
        assert sum(seen.values()) == 3**n
        # 2^n decided vectors minus the two uniform ones are violations
        assert seen[TxnStatus.ATOMICITY_VIOLATION] == 2**n - 2

    def test_missing_cluster(self):
        with pytest.raises(MissingCluster):
            txn_outcome(self.txn(2), {0: graph_with_outcome(0, Outcome.COMMIT)})

    def test_missing_proxy(self):
        txn = Transaction(1, (TransactionParty(0, 4), TransactionParty(1, 0)))
        graphs = {c: graph_with_outcome(c, Outcome.COMMIT) for c in range(2)}
        with pytest.raises(MissingFork):
            txn_outcome(txn, graphs)

    def test_transaction_validation(self):
        with pytest.raises(ValueError):
            Transaction(0, (TransactionParty(0, 0),))
        with pytest.raises(ValueError):
            Transaction(0, (TransactionParty(0, 0), TransactionParty(0, 1)))
