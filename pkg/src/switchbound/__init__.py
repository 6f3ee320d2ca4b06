"""Overshoot bounds for switched linear systems.

The package measures how far a family of matrices is from having a common
invariant subspace (the quasi-controllability measure sigma_p), turns a
certified positive measure into an a priori bound on trajectory overshoot,
and builds explicit diverging trajectories when the bound is violated.
Desynchronized fixed-point iterations are covered through their mixture
and vertex matrix families, with closed-form lower bounds on the measure.
"""
from ._version import __version__
from .core import (
    ENUMERATION_CAP,
    MAX_DIM,
    EnumerationCapError,
    FamilyFormatError,
    MatrixFamily,
    NormTag,
    dump_family,
    enumerate_products,
    induced_norm,
    load_family,
    orbit_points,
    parse_family,
    product_levels,
    spectral_radius,
    vector_norm,
    word_matrix,
)
from .desync import (
    UPDATE_LAWS,
    AsyncStabilityCertificate,
    DesyncBoundReport,
    UpdateLaw,
    async_stability_certificate,
    desync_overshoot_bound,
    desync_word,
    mixture_family,
    simulate_desync,
    vertex_family,
)
from .dynamics import (
    CertificateInconsistencyError,
    InstabilityWitness,
    JsrReport,
    OvershootReport,
    PoleOnCircleError,
    Trajectory,
    WitnessPreconditionError,
    chi_exact,
    circle_criterion_margin,
    instability_witness,
    jsr_bounds,
    overshoot_bound,
    overshoot_bruteforce,
    simulate,
)
from .geometry import (
    DegenerateHullError,
    SymmetricPolytope,
    absco_hull,
    inscribed_radius,
    inscribed_radius_oracle,
    membership_scale,
)
from .invariance import (
    QCStatus,
    QCVerdict,
    invariant_closure,
    irreducible,
    is_quasi_controllable,
    kalman_controllable,
    kalman_observable,
    mixture_qc_criterion,
    orbit_span_test,
    rank_one_family,
    vertex_qc_criterion,
)
from .measure import (
    MeasureReport,
    SearchConfig,
    StructuredBoundReport,
    mixture_lower_bound,
    quasi_controllability_measure,
    t_max,
    t_max_lipschitz,
    vertex_lower_bound,
)
from .report import (
    ReportEnvelope,
    canonical_json,
    family_digest,
    parse_report,
)
from .robustness import (
    LimitSuiteReport,
    PeakDemoReport,
    ProbeInapplicableError,
    SweepRow,
    SweepTable,
    drift_limit_member,
    instability_robustness_probe,
    intro_peak_demo,
    limit_family_suite,
    measure_sweep,
    shear_limit_member,
    single_matrix_chi,
)

__all__ = [
    "__version__",
    "ENUMERATION_CAP",
    "MAX_DIM",
    "EnumerationCapError",
    "FamilyFormatError",
    "MatrixFamily",
    "NormTag",
    "dump_family",
    "enumerate_products",
    "induced_norm",
    "load_family",
    "orbit_points",
    "parse_family",
    "product_levels",
    "spectral_radius",
    "vector_norm",
    "word_matrix",
    "UPDATE_LAWS",
    "AsyncStabilityCertificate",
    "DesyncBoundReport",
    "UpdateLaw",
    "async_stability_certificate",
    "desync_overshoot_bound",
    "desync_word",
    "mixture_family",
    "simulate_desync",
    "vertex_family",
    "CertificateInconsistencyError",
    "InstabilityWitness",
    "JsrReport",
    "OvershootReport",
    "PoleOnCircleError",
    "Trajectory",
    "WitnessPreconditionError",
    "chi_exact",
    "circle_criterion_margin",
    "instability_witness",
    "jsr_bounds",
    "overshoot_bound",
    "overshoot_bruteforce",
    "simulate",
    "DegenerateHullError",
    "SymmetricPolytope",
    "absco_hull",
    "inscribed_radius",
    "inscribed_radius_oracle",
    "membership_scale",
    "QCStatus",
    "QCVerdict",
    "invariant_closure",
    "irreducible",
    "is_quasi_controllable",
    "kalman_controllable",
    "kalman_observable",
    "mixture_qc_criterion",
    "orbit_span_test",
    "rank_one_family",
    "vertex_qc_criterion",
    "MeasureReport",
    "SearchConfig",
    "StructuredBoundReport",
    "mixture_lower_bound",
    "quasi_controllability_measure",
    "t_max",
    "t_max_lipschitz",
    "vertex_lower_bound",
    "ReportEnvelope",
    "canonical_json",
    "family_digest",
    "parse_report",
    "LimitSuiteReport",
    "PeakDemoReport",
    "ProbeInapplicableError",
    "SweepRow",
    "SweepTable",
    "drift_limit_member",
    "instability_robustness_probe",
    "intro_peak_demo",
    "limit_family_suite",
    "measure_sweep",
    "shear_limit_member",
    "single_matrix_chi",
]
