"""itemfair - individual item fairness evaluation for top-k recommendation.

This package computes the original item fairness measures of top-k runs,
their closed-form most fair / most unfair bounds and min-max corrected
versions, and provides a brute-force oracle, synthetic experiments and
correlation analysis around them.
"""

__version__ = "0.1.0"
__author__ = "itemfair Team"

from .evaluator import FairnessEvaluator
from .models import ItemCatalog, RelevanceJudgments, TopKRun, UserSet

__all__ = ["FairnessEvaluator", "ItemCatalog", "RelevanceJudgments", "TopKRun", "UserSet"]
