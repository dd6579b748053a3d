"""Constraint-based causal structure learning toolkit.

Two-step neighborhood discovery (forward candidate enumeration + minimax
selection), full CPDAG orientation with prior knowledge, an
order-independent PC-style baseline, decomposable-criterion scoring, and a
Monte-Carlo benchmark harness.
"""

from .citest import (
    CICache,
    CIEngine,
    CITestResult,
    FisherZBackend,
    GTestBackend,
    InjectedBackend,
    OracleBackend,
    OracleGraph,
    ci_test,
    d_sep,
    inject_results,
    make_backend,
    oracle_ci,
)
from .dataset import (
    ContingencyTable,
    Dataset,
    VariableSchema,
    build_table,
    cap_levels,
    filter_dominant,
    load_csv,
    load_schema,
)
from .experiments import (
    CategoricalSimConfig,
    ContinuousSimConfig,
    run_categorical_experiment,
    run_continuous_experiment,
)
from .forward import CandidateSet, NeighborhoodFamily, candidate_extensions, forward_step
from .maximize import NeighborSelection, SepScore, maximization_step, q_value, sep_score
from .pcstable import pc_stable, pc_stable_skeleton
from .score import FitReport, bic_of_graph, dag_extension, fit_local
from .simgen import (
    LinearSemSpec,
    SimReport,
    evaluate_recovery,
    gen_discrete_net,
    gen_linear_sem,
    make_discrete_net,
    random_dag,
)
from .skeleton_orient import (
    Cpdag,
    PriorKnowledge,
    SeparationRecord,
    build_skeleton,
    compute_sepsets,
    cpdag_from_dot,
    edge_significance,
    learn_structure,
    orient,
)

__version__ = "0.1.0"
