"""Coined quantum walks on finite graphs with semi-infinite tails.

Numerical engine for resonances (eigenvalues of the boundary matrix inside
the unit disk), scattering matrices on the tail ports, spectral-mapping
classification of the unperturbed spectrum, and second-order perturbative
asymptotics of resonance motion under the tunable coin family.
"""

__version__ = "0.1.0"

from .tailed_graph import (
    GraphError,
    InternalGraph,
    TailSpec,
    TailedGraph,
    attach_tails,
    boundary_arc_slots,
    build_internal,
    preset_graph,
)
from .coin_evolution import CoinFamily, WalkOperator, boundary_coin, grover, tunable_block
from .internal_spectral import (
    ClusterAmbiguity,
    InternalMatrix,
    NotAResonance,
    SpectralData,
    build_E,
    build_E_split,
    projection_contour_oracle,
    resonances,
    spectral_decompose,
    verify_outgoing,
)
from .scattering import (
    NoConvergence,
    ScatteringRecord,
    SigmaEvaluator,
    closed_form_sigma,
    stationary_iterate,
    transmission_curve,
    unitarity_defect,
)
from .smt_laplacian import (
    EigenClassification,
    LaplacianT,
    birth_basis,
    birth_multiplicities,
    build_operators,
    classify,
    is_bipartite,
    joukowsky,
    joukowsky_preimages,
    lift,
    persistent_basis,
    persistent_eigenvalues,
    t_eigenbasis_split,
)
from .perturbation import (
    AssumptionReport,
    AssumptionViolated,
    Branch,
    FirstSecondOrderMatrices,
    GroupEscapedContour,
    ReductionLedger,
    ResonantLimitRecord,
    Stage1NotSemisimple,
    assumption_report,
    build_M1,
    build_M2,
    fit_loglog_slope,
    mu2_bound_check,
    projection_expansion,
    puiseux_prediction,
    reduce_eigenvalue,
    resonance_asymptote,
    resonant_sigma_limit,
    total_projection,
)
