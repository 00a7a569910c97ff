"""Tests for synthetic runs and insertion sweeps."""

import numpy as np
import pytest

from itemfair.bounds import (
    ENT_OUR,
    FSAT_OUR,
    GINI_OUR,
    GINI_W_OUR,
    JAIN_OUR,
    QF_OUR,
    gini_max,
    gini_min,
)
from itemfair.errors import PoolExhausted, RunValidationError
from itemfair.exposure import build_exposure
from itemfair.experiments import (
    Generator,
    InsertionMode,
    InsertionState,
    RecommendationMode,
    endpoint_table,
    generate,
    insertion_indices,
    insertion_run,
    insertion_sweep,
    most_fair,
    most_unfair,
    sliding_window,
)
from itemfair.measures import FSAT, GINI, JAIN, QF, gini_ori
from itemfair.models import ExclusionSets, ItemCatalog, TopKRun, UserSet
from itemfair.relevance import precision


@pytest.fixture
def users():
    return UserSet.from_range(3)


@pytest.fixture
def catalog():
    return ItemCatalog.from_range(5)


class TestGenerators:
    """Tests for MostFair and MostUnfair runs."""

    def test_most_unfair_repeatable(self, users, catalog):
        """Test every user gets the first k items."""
        run = most_unfair(2, users, catalog)
        assert {run.list_for(u) for u in users.users} == {("i1", "i2")}

    def test_most_fair_repeatable_counts(self, users, catalog):
        """Test counts differ by at most one."""
        counts = build_exposure(most_fair(2, users, catalog), catalog).counts
        assert counts.max() - counts.min() <= 1
        assert int(counts.sum()) == 6

    def test_most_fair_wraps_the_catalog(self, users, catalog):
        """Test cyclic assignment wraps past the last item."""
        run = most_fair(2, users, catalog)
        assert run.list_for("u3") == ("i5", "i1")

    @pytest.mark.parametrize("k,m,n", [(2, 3, 5), (3, 4, 5), (1, 2, 6), (5, 10, 7)])
    def test_endpoints_match_gini_bounds(self, k, m, n):
        """Test generated runs attain the closed-form Gini bounds."""
        users, catalog = UserSet.from_range(m), ItemCatalog.from_range(n)
        fair = gini_ori(build_exposure(most_fair(k, users, catalog), catalog)).value
        unfair = gini_ori(build_exposure(most_unfair(k, users, catalog), catalog)).value
        assert fair == pytest.approx(gini_min(k, m, n), abs=1e-12)
        assert unfair == pytest.approx(gini_max(k, m, n))

    def test_k_above_n(self, users, catalog):
        """Test k > n is rejected."""
        with pytest.raises(ValueError, match="exceeds"):
            most_fair(6, users, catalog)

    def test_nonrepeatable_skips_excluded(self, users, catalog):
        """Test excluded items are replaced by the next ones."""
        exclusions = ExclusionSets.from_mapping({"u2": ["i1"]})
        run = most_unfair(2, users, catalog, RecommendationMode.NONREPEATABLE, exclusions)
        assert run.list_for("u1") == ("i1", "i2")
        assert run.list_for("u2") == ("i2", "i3")

    def test_nonrepeatable_most_fair_balances(self, users, catalog):
        """Test greedy least-recommended assignment."""
        exclusions = ExclusionSets.from_mapping({"u1": ["i1"]})
        run = most_fair(2, users, catalog, RecommendationMode.NONREPEATABLE, exclusions)
        assert run.list_for("u1") == ("i2", "i3")
        assert run.list_for("u2") == ("i1", "i4")
        assert run.list_for("u3") == ("i5", "i1")

    def test_exclusions_outside_catalog(self, users, catalog):
        """Test exclusions naming an unknown item are rejected."""
        exclusions = ExclusionSets.from_mapping({"u1": ["i9"]})
        with pytest.raises(RunValidationError, match="unknown item 'i9'"):
            most_unfair(2, users, catalog, RecommendationMode.NONREPEATABLE, exclusions)

    def test_pool_exhausted(self, users, catalog):
        """Test a user with fewer than k recommendable items."""
        exclusions = ExclusionSets.from_mapping({"u1": ["i1", "i2", "i3", "i4"]})
        with pytest.raises(PoolExhausted, match="u1"):
            most_fair(2, users, catalog, RecommendationMode.NONREPEATABLE, exclusions)

    def test_generate_dispatch(self, users, catalog):
        """Test generate picks the generator."""
        assert generate(Generator.MOST_UNFAIR, 2, users, catalog) == most_unfair(2, users, catalog)
        assert generate(Generator.MOST_FAIR, 2, users, catalog) == most_fair(2, users, catalog)


class TestSlidingWindow:
    """Tests for sliding_window."""

    @pytest.fixture
    def deep(self):
        return TopKRun.from_user_lists({"u1": ["i1", "i2", "i3", "i4"], "u2": ["i4", "i3", "i2", "i1"]})

    def test_window_reranks(self, deep):
        """Test ranks start..start+width-1 become 1..width."""
        window = sliding_window(deep, start=2, width=2)
        assert window.k == 2
        assert window.list_for("u1") == ("i2", "i3")
        assert window.list_for("u2") == ("i3", "i2")

    def test_window_past_depth(self, deep):
        """Test windows beyond the list depth."""
        with pytest.raises(ValueError, match="exceeds the run depth"):
            sliding_window(deep, start=3, width=5)

    def test_window_start(self, deep):
        """Test start below rank 1."""
        with pytest.raises(ValueError):
            sliding_window(deep, start=0, width=2)


class TestEndpointTable:
    """Tests for endpoint_table."""

    def test_corrected_endpoints(self):
        """Test corrected measures hit 0 and 1 at the generated extremes."""
        rows = endpoint_table([2, 3], m=4, n=7)
        assert len(rows) == 4
        for row in rows:
            fair = row.generator == Generator.MOST_FAIR
            assert row.scores[JAIN_OUR] == pytest.approx(1.0 if fair else 0.0)
            assert row.scores[GINI_OUR] == pytest.approx(0.0 if fair else 1.0, abs=1e-12)
            assert row.scores[QF_OUR] == pytest.approx(1.0 if fair else 0.0)

    @pytest.mark.parametrize("m,n", [(5, 20), (10, 7), (4, 40)])
    def test_endpoint_grid(self, m, n):
        """Test every corrected measure reaches its endpoints where it can."""
        for row in endpoint_table([1, 2, 3, 5], m=m, n=n):
            fair = row.generator == Generator.MOST_FAIR
            high, low = (1.0, 0.0) if fair else (0.0, 1.0)
            for measure in (JAIN_OUR, QF_OUR, ENT_OUR):
                assert row.scores[measure] == pytest.approx(high, abs=1e-9), (row.k, measure)
            assert row.scores[GINI_OUR] == pytest.approx(low, abs=1e-9)
            if row.k * m >= n:
                assert row.scores[FSAT_OUR] == pytest.approx(high, abs=1e-9)
            else:
                assert row.scores[FSAT] == pytest.approx(1.0)
            if not fair:
                assert row.scores[GINI_W_OUR] == pytest.approx(1.0, abs=1e-9)
            elif row.k * m <= n:
                assert row.scores[GINI_W_OUR] == pytest.approx(0.0, abs=1e-9)

    def test_originals_do_not_reach_one(self):
        """Test original Jain stays below 1 and Gini above 0 when km is not a multiple of n."""
        rows = endpoint_table([2], m=2, n=3)
        fair = next(r for r in rows if r.generator == Generator.MOST_FAIR)
        assert fair.scores[JAIN] < 1.0
        assert fair.scores[GINI] > 0.0

    def test_skips_k_at_n(self):
        """Test cutoffs without a correction are skipped."""
        rows = endpoint_table([2, 5], m=2, n=5)
        assert {r.k for r in rows} == {2}


class TestInsertion:
    """Tests for the artificial insertion sweeps."""

    @pytest.fixture
    def state(self):
        return InsertionState(m=10, k=10)

    def test_start_and_end(self, state):
        """Test LE goes from identical lists to disjoint lists."""
        start = insertion_indices(state, 0)
        end = insertion_indices(state, state.k)
        assert np.unique(start).size == state.k
        assert np.unique(end).size == state.n

    def test_me_puts_shared_items_back_from_the_bottom(self, state):
        """Test ME step j shows shared items on the bottom j ranks."""
        me = InsertionState(m=10, k=10, mode=InsertionMode.ME_IRRELEVANT)
        ranks = insertion_indices(me, 3)[1, 0]
        assert ranks[:7].tolist() == list(range(10, 17))
        assert ranks[7:].tolist() == [7, 8, 9]
        for step in range(state.k + 1):
            assert np.unique(insertion_indices(me, step)).size == np.unique(
                insertion_indices(state, state.k - step)
            ).size

    def test_step_range(self, state):
        """Test steps outside 0..k."""
        with pytest.raises(ValueError, match="step"):
            insertion_indices(state, 11)

    def test_relevance_grows_with_insertion(self, state):
        """Test inserted items are relevant to their user."""
        run, _, qrels = insertion_run(state, 10)
        assert precision(run, qrels).mean == pytest.approx(1.0)
        run, _, qrels = insertion_run(state, 0)
        assert precision(run, qrels).mean == pytest.approx(0.1)

    def test_le_sweep_is_linear(self, state):
        """Test corrected coverage measures equal the inserted fraction."""
        points = insertion_sweep(state)
        assert len(points) == state.k + 1
        for point in points:
            assert point.scores[QF_OUR] == pytest.approx(point.fraction)
            assert point.scores[FSAT_OUR] == pytest.approx(point.fraction)
            assert point.scores[ENT_OUR] == pytest.approx(point.fraction)
        assert points[-1].scores[GINI_OUR] == pytest.approx(0.0, abs=1e-12)
        assert points[-1].scores[JAIN_OUR] == pytest.approx(1.0)

    def test_me_sweep_decreases(self):
        """Test ME moves from fairest to least fair."""
        points = insertion_sweep(InsertionState(m=5, k=4, mode=InsertionMode.ME_IRRELEVANT))
        qf = [p.scores[QF_OUR] for p in points]
        assert qf == pytest.approx([1.0, 0.75, 0.5, 0.25, 0.0])

    def test_seed_only_relabels(self):
        """Test a seed shuffles labels but keeps the scores."""
        plain = insertion_sweep(InsertionState(m=4, k=3))
        seeded = insertion_sweep(InsertionState(m=4, k=3, seed=7))
        assert InsertionState(m=4, k=3, seed=7).catalog().items != InsertionState(m=4, k=3).catalog().items
        for a, b in zip(plain, seeded):
            assert a.scores[QF_OUR] == pytest.approx(b.scores[QF_OUR])

    def test_full_size_sweep(self):
        """Test the 1000-user sweep end to end."""
        state = InsertionState(m=1000, k=10)
        assert state.n == 10000
        points = insertion_sweep(state)
        assert points[0].scores[QF_OUR] == pytest.approx(0.0)
        assert points[5].scores[QF_OUR] == pytest.approx(0.5)
        for point in points:
            assert point.scores[QF] == pytest.approx(point.scores[FSAT], abs=1e-12)
            assert point.scores[ENT_OUR] == pytest.approx(point.scores[QF_OUR], abs=1e-9)
            assert point.scores[FSAT_OUR] == pytest.approx(point.scores[QF_OUR], abs=1e-9)
        for measure in (JAIN_OUR, QF_OUR, ENT_OUR, FSAT_OUR):
            values = [p.scores[measure] for p in points]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:])), measure
            assert values[-1] == pytest.approx(1.0)
        for measure in (GINI_OUR, GINI_W_OUR):
            values = [p.scores[measure] for p in points]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:])), measure
        assert points[-1].scores[GINI_OUR] == pytest.approx(0.0, abs=1e-9)
        assert points[-1].scores[GINI_W_OUR] == pytest.approx(0.0, abs=1e-9)
