"""Tests for the data models module."""

import numpy as np
import pytest
from pydantic import ValidationError

from itemfair.errors import RunValidationError
from itemfair.models import (
    Direction,
    ExaminationFunction,
    ExaminationVariant,
    ExclusionSets,
    ItemCatalog,
    MeasureResult,
    RelevanceJudgments,
    SimilarityProvider,
    SimilarityVariant,
    TopKRun,
    UserSet,
)


class TestItemCatalog:
    """Tests for ItemCatalog model."""

    def test_from_range(self):
        """Test synthetic catalog ids."""
        catalog = ItemCatalog.from_range(3)
        assert catalog.items == ("i1", "i2", "i3")
        assert catalog.n == 3

    def test_index_of(self):
        """Test catalog positions."""
        catalog = ItemCatalog(items=("b", "a", "c"))
        assert catalog.index_of("a") == 1
        assert "c" in catalog
        assert "z" not in catalog

    def test_unknown_item(self):
        """Test lookup of an unknown item."""
        with pytest.raises(RunValidationError, match="not in the catalog"):
            ItemCatalog.from_range(2).index_of("i9")

    def test_duplicate_items_rejected(self):
        """Test that duplicate ids are rejected."""
        with pytest.raises(ValidationError, match="duplicate"):
            ItemCatalog(items=("i1", "i2", "i1"))

    def test_empty_rejected(self):
        """Test that an empty catalog is rejected."""
        with pytest.raises(ValidationError):
            ItemCatalog(items=())


class TestTopKRun:
    """Tests for TopKRun model."""

    @pytest.fixture
    def run(self):
        return TopKRun.from_user_lists({"u1": ["i1", "i2"], "u2": ["i2", "i3"]})

    def test_from_user_lists(self, run):
        """Test building a single-round run."""
        assert run.k == 2
        assert run.m == 2
        assert run.rounds == 1
        assert run.slots == 4
        assert run.list_for("u2") == ("i2", "i3")

    def test_iter_lists_order(self, run):
        """Test iteration order follows users then rounds."""
        assert [user for user, _, _ in run.iter_lists()] == ["u1", "u2"]

    def test_wrong_length_rejected(self):
        """Test lists must hold exactly k items."""
        with pytest.raises(ValidationError, match="expected 2 items"):
            TopKRun.from_user_lists({"u1": ["i1", "i2"], "u2": ["i3"]})

    def test_duplicate_item_rejected(self):
        """Test an item may appear once per list."""
        with pytest.raises(ValidationError, match="listed twice"):
            TopKRun.from_user_lists({"u1": ["i1", "i1"]})

    def test_missing_round_rejected(self):
        """Test every user needs a list in every round."""
        with pytest.raises(ValidationError, match="no list for user"):
            TopKRun(
                k=1,
                rounds=2,
                users=UserSet(users=("u1",)),
                lists={("u1", 1): ("i1",)},
            )

    def test_index_matrix(self, run):
        """Test catalog positions of every entry."""
        catalog = ItemCatalog.from_range(4)
        indices = run.index_matrix(catalog)
        assert indices.shape == (2, 1, 2)
        assert indices[:, 0, :].tolist() == [[0, 1], [1, 2]]

    def test_index_matrix_unknown_item(self, run):
        """Test unknown items are reported with user and rank."""
        with pytest.raises(RunValidationError, match="user 'u2' round 1 rank 2"):
            run.index_matrix(ItemCatalog(items=("i1", "i2")))

    def test_from_index_matrix_inverse(self, run):
        """Test index matrix conversion is reversible."""
        catalog = ItemCatalog.from_range(4)
        rebuilt = TopKRun.from_index_matrix(run.index_matrix(catalog), run.users, catalog)
        assert rebuilt == run


class TestRelevanceJudgments:
    """Tests for RelevanceJudgments model."""

    def test_relevant_items(self):
        """Test relevant item lookup ignores zero labels."""
        qrels = RelevanceJudgments(labels={("u1", "i1"): 1, ("u1", "i2"): 0})
        assert qrels.relevant_items("u1") == frozenset({"i1"})
        assert qrels.relevant_items("u9") == frozenset()

    def test_non_binary_rejected(self):
        """Test labels outside {0, 1}."""
        with pytest.raises(ValidationError, match="must be 0 or 1"):
            RelevanceJudgments(labels={("u1", "i1"): 2})

    def test_check_ids(self):
        """Test references to unknown items."""
        qrels = RelevanceJudgments.from_relevant({"u1": ["i7"]})
        with pytest.raises(RunValidationError, match="unknown item"):
            qrels.check_ids(UserSet.from_range(1), ItemCatalog.from_range(3))


class TestExclusionSets:
    """Tests for ExclusionSets model."""

    def test_pool_keeps_catalog_order(self):
        """Test recommendable positions skip excluded items."""
        exclusions = ExclusionSets.from_mapping({"u1": ["i2"]})
        catalog = ItemCatalog.from_range(4)
        assert exclusions.pool("u1", catalog) == [0, 2, 3]
        assert exclusions.pool("u2", catalog) == [0, 1, 2, 3]

    def test_unknown_item(self):
        """Test excluded items must be in the catalog."""
        exclusions = ExclusionSets.from_mapping({"u1": ["x"]})
        with pytest.raises(RunValidationError):
            exclusions.check_catalog(ItemCatalog.from_range(2))


class TestExaminationFunction:
    """Tests for ExaminationFunction model."""

    def test_factories(self):
        """Test the three variants."""
        assert ExaminationFunction.uniform().variant == ExaminationVariant.UNIFORM
        assert ExaminationFunction.dcg().variant == ExaminationVariant.DCG
        assert ExaminationFunction.rbp(0.5).gamma == 0.5

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 1.5])
    def test_rbp_gamma_range(self, gamma):
        """Test RBP patience outside (0, 1)."""
        with pytest.raises(ValidationError):
            ExaminationFunction.rbp(gamma)


class TestMeasureResult:
    """Tests for MeasureResult model."""

    def test_undefined(self):
        """Test undefined results carry nan and a note."""
        result = MeasureResult.undefined("ent_ori", Direction.HIGHER_IS_FAIRER, "log 0")
        assert not result.defined
        assert np.isnan(result.value)
        assert result.note == "log 0"


class TestSimilarityProvider:
    """Tests for SimilarityProvider model."""

    def test_all_similar_pairs(self):
        """Test every distinct pair is similar by default."""
        left, right = SimilarityProvider().similar_pairs(["a", "b", "c"])
        assert list(zip(left.tolist(), right.tolist())) == [(0, 1), (0, 2), (1, 2)]

    def test_explicit_pairs(self):
        """Test explicit pairs restricted to the given items."""
        sim = SimilarityProvider.from_pairs([("i2", "i1"), ("i3", "i9")])
        left, right = sim.similar_pairs(["i1", "i2", "i3"])
        assert list(zip(left.tolist(), right.tolist())) == [(0, 1)]

    def test_embedding_threshold(self):
        """Test cosine distance threshold."""
        sim = SimilarityProvider(
            variant=SimilarityVariant.EMBEDDINGS,
            embeddings={"a": (1.0, 0.0), "b": (1.0, 0.1), "c": (0.0, 1.0)},
            alpha=0.5,
        )
        left, right = sim.similar_pairs(["a", "b", "c"])
        assert list(zip(left.tolist(), right.tolist())) == [(0, 1)]

    def test_zero_embedding_rejected(self):
        """Test zero vectors are rejected."""
        with pytest.raises(ValidationError, match="zero vector"):
            SimilarityProvider(
                variant=SimilarityVariant.EMBEDDINGS,
                embeddings={"a": (0.0, 0.0)},
            )

    def test_inconsistent_dimension_rejected(self):
        """Test embedding dimensions must agree."""
        with pytest.raises(ValidationError, match="dimension"):
            SimilarityProvider(
                variant=SimilarityVariant.EMBEDDINGS,
                embeddings={"a": (1.0,), "b": (1.0, 2.0)},
            )

    @pytest.mark.parametrize("alpha,beta", [(-0.1, 0.0), (2.1, 0.0), (1.0, 1.0)])
    def test_parameter_ranges(self, alpha, beta):
        """Test alpha in [0, 2] and beta in [0, 1)."""
        with pytest.raises(ValidationError):
            SimilarityProvider(alpha=alpha, beta=beta)
