"""Pairwise scenario generation for context-oriented variability models.

A system model is a context feature diagram, a feature diagram and a
mapping from context combinations to the features they activate.  The
package translates such models to CNF, builds pairwise covering suites
with a SAT-backed greedy generator, reorders suites to reduce context
switches and augments existing suites when the model grows.
"""

from .augment import (
    AugmentationReport,
    EvolutionNotMonotone,
    ExhaustedRetries,
    ModelDelta,
    augment_suite,
    diff_models,
    noreuse_baseline,
)
from .citgen import (
    GenConfig,
    PairUniverse,
    PairwiseGenerator,
    coverage_report,
    enumerate_valid_pairs,
    generate_suite,
    valid_pair_universe,
)
from .cnf import CnfFormula, ModelTooLarge, diagram_to_cnf, mapping_to_cnf, system_to_cnf
from .formats import (
    ModelParseError,
    format_model,
    load_model,
    parse_model,
    read_suite,
    suite_from_csv,
    suite_from_json,
    suite_from_switch_table,
    suite_to_csv,
    suite_to_json,
    suite_to_switch_table,
)
from .model import (
    ChildGroup,
    ConstraintKind,
    CrossConstraint,
    DomainError,
    FeatureDiagram,
    GroupKind,
    IndividualMapping,
    Kind,
    Scenario,
    SystemModel,
    TestSuite,
    is_valid_scenario,
    validate_model,
)
from .rearrange import creation_cost, distance, rearrange, rearrange_order
from .sat import Solver, SolverStats, UnsatisfiableModel, find_core_dead, propagate, solve

__version__ = "0.1.0"
