"""Discrete gamma-calculus on weighted graphs.

Formal Laplacians, carre-du-champ operators, Bakry-Emery curvature,
intrinsic metrics with completeness certificates, heat semigroups with
Dirichlet exhaustions, and numerical checkers for the gradient-bound and
stochastic-completeness theorems they support.
"""

from .errors import (
    AsymmetricInput,
    BadRadii,
    DisconnectedDomainWarning,
    Disconnected,
    DuplicateEdge,
    EmptyDomain,
    GammaflowError,
    GraphConstructionError,
    InconclusiveTail,
    IntegrationError,
    InvalidSpec,
    IsolatedVertex,
    NegativeTime,
    NoLowerBound,
    NonPositiveWeight,
    TooLargeForSpectral,
    UnknownVertex,
    VertexOutsideDomain,
)
from .families import FamilySpec, birth_death, generate_family, parse_family, parse_sequence_expr
from .graph import (
    WeightedGraph,
    as_vector,
    build_graph,
    combinatorial_ball,
    constant,
    delta,
    dumps,
    is_non_degenerate,
    load,
    loads,
    save,
    sparse_map,
    support,
    weighted_degree,
)
from .heat import (
    DirichletRestriction,
    MassCurve,
    SemigroupOperator,
    apply_semigroup,
    build_semigroup,
    dirichlet_restriction,
    exhaustion_mass_curve,
    heat_mass,
)
from .metrics import (
    BaseMetric,
    CutoffSequence,
    completeness_certificate,
    cutoff,
    default_intrinsic_metric,
    hop_metric,
    metric_ball,
    user_metric,
    verify_intrinsic,
)
from .operators import (
    CurvatureResult,
    QuadraticFormPair,
    bakry_emery_curvature,
    curvature_forms,
    curvature_profile,
    dirichlet_energy,
    gamma,
    gamma2,
    laplacian,
    verify_cd,
)
from .report import VerificationReport, aggregate_exit_code
from .verify import (
    CHECK_NAMES,
    birth_death_completeness_oracle,
    check_caccioppoli,
    check_cd_from_gradient_bound,
    check_commutation,
    check_contraction,
    check_energy_decay,
    check_gradient_bound,
    check_green,
    check_heat_subsolution,
    check_monotone_G,
    check_positivity,
    check_semigroup_law,
    check_stochastic_completeness,
    check_strong_condition_fails,
    estimate_cd_constant_via_gradient,
    run_check_suite,
    sample_functions,
)

__version__ = "0.1.0"
