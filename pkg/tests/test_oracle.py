"""Tests for the brute-force oracle."""

import pytest
from pydantic import ValidationError

from itemfair.bounds import (
    ENT_DEF,
    bounds_for,
    ent_max,
    gini_max,
    gini_min,
    giniw_max,
    giniw_min,
    jain_max,
    jain_min,
    qf_max,
    qf_min,
)
from itemfair.errors import SpaceTooLarge
from itemfair.measures import AID, ENT, FSAT, GINI, GINI_W, IID, JAIN, QF, VOCD
from itemfair.models import Direction, TopKRun
from itemfair.oracle import (
    EnumerationSpec,
    enumerate_all_extremes,
    enumerate_extremes,
    evaluate_witness,
    iter_runs,
    verify_bound,
    vocd_similarity_sweep,
)


class TestEnumerationSpec:
    """Tests for EnumerationSpec."""

    def test_space_size(self):
        """Test P(n, k)^(mW)."""
        spec = EnumerationSpec(k=2, m=2, n=3, rounds=2)
        assert spec.selections == 6
        assert spec.space_size == 6**4

    def test_k_above_n(self):
        """Test k > n is rejected."""
        with pytest.raises(ValidationError, match="exceeds"):
            EnumerationSpec(k=4, m=1, n=3)

    def test_unknown_measure(self):
        """Test an unknown measure id."""
        with pytest.raises(ValidationError, match="unknown measure"):
            EnumerationSpec(k=1, m=1, n=2, measure="nope")

    def test_space_too_large(self):
        """Test the cap is enforced before enumerating."""
        spec = EnumerationSpec(k=2, m=5, n=10, cap=1000)
        with pytest.raises(SpaceTooLarge, match="exceeds the cap"):
            next(iter_runs(spec))


class TestIterRuns:
    """Tests for run enumeration."""

    def test_count_and_order(self):
        """Test every run is produced once, lexicographically."""
        runs = list(iter_runs(EnumerationSpec(k=1, m=2, n=2)))
        assert len(runs) == 4
        assert [r[:, 0, 0].tolist() for r in runs] == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_lists_have_distinct_items(self):
        """Test ordered selections never repeat an item."""
        for indices in iter_runs(EnumerationSpec(k=2, m=1, n=3)):
            assert len(set(indices[0, 0].tolist())) == 2


class TestClosedFormsAgainstOracle:
    """The closed-form bounds must equal the enumerated extremes."""

    @pytest.mark.parametrize("k,m,n", [(1, 2, 3), (2, 2, 3), (2, 3, 4), (1, 3, 5)])
    def test_jain(self, k, m, n):
        """Test Jain min and max."""
        spec = EnumerationSpec(k=k, m=m, n=n, measure=JAIN)
        assert verify_bound(spec, jain_min(k, m, n), "min")
        assert verify_bound(spec, jain_max(k, m, n), "max")

    @pytest.mark.parametrize("k,m,n", [(1, 2, 3), (2, 2, 3), (2, 3, 4)])
    def test_qf(self, k, m, n):
        """Test QF min and max."""
        spec = EnumerationSpec(k=k, m=m, n=n, measure=QF)
        assert verify_bound(spec, qf_min(k, m, n), "min")
        assert verify_bound(spec, qf_max(k, m, n), "max")

    @pytest.mark.parametrize("k,m,n", [(1, 2, 3), (2, 2, 3), (2, 3, 4)])
    def test_gini(self, k, m, n):
        """Test Gini min and max."""
        spec = EnumerationSpec(k=k, m=m, n=n, measure=GINI)
        assert verify_bound(spec, gini_min(k, m, n), "min")
        assert verify_bound(spec, gini_max(k, m, n), "max")

    def test_entropy_max(self):
        """Test the maximum entropy in base 2."""
        spec = EnumerationSpec(k=2, m=2, n=3, measure=ENT_DEF, log_base=2)
        assert verify_bound(spec, ent_max(2, 2, 3, log_base=2), "max")
        assert verify_bound(spec, 1.0, "min")

    def test_gini_w_single_rank(self):
        """Test Gini-w bounds with km <= n."""
        spec = EnumerationSpec(k=1, m=2, n=3, measure=GINI_W)
        assert verify_bound(spec, giniw_min(1, 2, 3), "min")
        assert verify_bound(spec, giniw_max(1, 2, 3), "max")

    def test_gini_w_with_km_above_n(self):
        """Test Gini-w extremes where no closed-form minimum exists."""
        result = enumerate_extremes(EnumerationSpec(k=3, m=2, n=3, measure=GINI_W))
        assert result.min_value == pytest.approx(0.0373, abs=1e-3)
        assert result.max_value == pytest.approx(0.156, abs=1e-3)
        assert result.max_value == pytest.approx(giniw_max(3, 2, 3))

    def test_verify_bound_reports_mismatch(self):
        """Test a wrong closed form is rejected."""
        spec = EnumerationSpec(k=1, m=2, n=3, measure=JAIN)
        assert not verify_bound(spec, 0.5, "max")


class TestDisparityExtremes:
    """Enumerated II-D and AI-D extremes."""

    def test_single_rank_two_users(self):
        """Test k=1, m=2, n=3."""
        results = enumerate_all_extremes(EnumerationSpec(k=1, m=2, n=3), [IID, AID])
        assert results[IID].min_value == pytest.approx(2 / 9)
        assert results[IID].max_value == pytest.approx(2 / 9)
        assert results[AID].min_value == pytest.approx(1 / 18)

    def test_two_rounds_single_rank(self):
        """Test k=1, m=2, W=2, n=5."""
        results = enumerate_all_extremes(EnumerationSpec(k=1, m=2, n=5, rounds=2), [IID, AID])
        assert results[IID].min_value == pytest.approx(0.06, abs=5e-3)
        assert results[AID].min_value == pytest.approx(0.01, abs=5e-3)

    def test_two_rounds_two_ranks(self):
        """Test k=m=W=2, n=3."""
        results = enumerate_all_extremes(EnumerationSpec(k=2, m=2, n=3, rounds=2), [IID, AID])
        assert results[IID].min_value == pytest.approx(0.02, abs=5e-3)
        assert results[AID].min_value == pytest.approx(0.005, abs=5e-3)
        assert results[IID].max_value == pytest.approx(0.187, abs=5e-3)
        assert results[AID].max_value == pytest.approx(0.187, abs=5e-3)


class TestWitnesses:
    """Tests for argmin/argmax runs."""

    def test_witness_reproduces_extreme(self):
        """Test re-evaluating the witnesses gives the extremes."""
        spec = EnumerationSpec(k=2, m=2, n=3, measure=GINI)
        result = enumerate_extremes(spec)
        assert isinstance(result.argmin_run, TopKRun)
        assert evaluate_witness(spec, result.argmin_run) == pytest.approx(result.min_value)
        assert evaluate_witness(spec, result.argmax_run) == pytest.approx(result.max_value)

    def test_first_witness_is_kept(self):
        """Test ties keep the lexicographically first run."""
        result = enumerate_extremes(EnumerationSpec(k=1, m=2, n=2, measure=JAIN))
        assert result.argmin_run.list_for("u1") == ("i1",)
        assert result.argmin_run.list_for("u2") == ("i1",)
        assert result.argmax_run.list_for("u2") == ("i2",)

    def test_undefined_runs_are_counted(self):
        """Test Ent is skipped on runs leaving an item out."""
        result = enumerate_extremes(EnumerationSpec(k=1, m=2, n=2, measure=ENT))
        assert result.evaluated == 4
        assert result.undefined == 2
        assert result.min_value == pytest.approx(1.0)

    def test_undefined_everywhere(self):
        """Test a measure with no defined run."""
        spec = EnumerationSpec(k=1, m=2, n=3, measure=ENT)
        assert ENT not in enumerate_all_extremes(spec, [ENT])
        with pytest.raises(ValueError, match="undefined on every run"):
            enumerate_extremes(spec)

    def test_all_measures_in_one_pass(self):
        """Test every measure of a small shape."""
        results = enumerate_all_extremes(EnumerationSpec(k=1, m=2, n=2))
        assert {JAIN, QF, ENT, GINI, FSAT, VOCD, IID, AID} <= set(results)
        assert all(r.evaluated == 4 for r in results.values())


class TestVoCDSweep:
    """Tests for the VoCD similarity sweep."""

    def test_max_over_similarity_sets(self):
        """Test the bound (m-1)/m is attained at m=3."""
        assert vocd_similarity_sweep(2, 3, 3) == pytest.approx(2 / 3)

    def test_beta_shifts_the_maximum(self):
        """Test beta lowers the sweep maximum."""
        assert vocd_similarity_sweep(2, 3, 3, beta=0.25) == pytest.approx(2 / 3 - 0.25)

    def test_pair_limit(self):
        """Test too many recommended pairs."""
        with pytest.raises(SpaceTooLarge, match="max_pairs"):
            vocd_similarity_sweep(2, 2, 4, max_pairs=2)


def small_shapes():
    for n in range(2, 5):
        for k in range(1, min(3, n - 1) + 1):
            for m in range(1, 4):
                yield k, m, n


class TestBoundIdentities:
    """Closed-form bounds against enumeration over every small shape."""

    @pytest.mark.parametrize("k,m,n", list(small_shapes()))
    def test_count_based_measures(self, k, m, n):
        """Test Jain, QF, Ent, Gini and FSat extremes."""
        measures = (JAIN, QF, ENT_DEF, GINI, FSAT)
        results = enumerate_all_extremes(EnumerationSpec(k=k, m=m, n=n), measures)
        for measure in measures:
            report = bounds_for(measure, k, m, n)
            result = results[measure]
            if report.direction == Direction.HIGHER_IS_FAIRER:
                expected = (report.most_unfair_at_k, report.most_fair_at_k)
            else:
                expected = (report.most_fair_at_k, report.most_unfair_at_k)
            assert result.min_value == pytest.approx(expected[0], abs=1e-9), measure
            assert result.max_value == pytest.approx(expected[1], abs=1e-9), measure

    @pytest.mark.parametrize("k,m,n", [s for s in small_shapes() if s[0] * s[1] <= s[2]])
    def test_gini_w_minimum(self, k, m, n):
        """Test the Gini-w minimum wherever km <= n."""
        result = enumerate_extremes(EnumerationSpec(k=k, m=m, n=n, measure=GINI_W))
        assert result.min_value == pytest.approx(giniw_min(k, m, n), abs=1e-9)
        assert result.max_value == pytest.approx(giniw_max(k, m, n), abs=1e-9)
