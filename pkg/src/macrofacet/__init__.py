"""Dependency-aware, quota-constrained facet selection via submodular greedy."""

from ._accel import BACKEND
from .chronicle import (Chronicle, Facet, MacroFacet, MacroFacetSet, closure,
                        compile_chronicle, expand, is_closed, selection_cost)
from .errors import (InfeasibleError, InvariantError, LaminarityError,
                     LimitExceededError, MacrofacetError, SchemaError,
                     UnknownIdError, ZeroCostWarning)
from .matroid import (OracleState, QuotaTree, build_quota_tree, can_add,
                      is_independent, partition_matroid, verify_matroid_axioms)
from .selection import (SelectionResult, SelectionTrace, approximation_ratio,
                        brute_force_optimal, greedy_select, lazy_greedy_select)
from .utility import (LiftedUtility, ModularUtility, ScriptedUtility,
                      UtilityFunction, WeightedCoverage, lift, marginal_gain,
                      verify_monotone_submodular)

__version__ = "0.1.0"
