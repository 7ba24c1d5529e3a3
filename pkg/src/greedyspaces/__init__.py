"""Finite-horizon greedy approximation constants, weighted Lorentz sequence
norms, sequence regularity tests, and uniform-convexity estimates."""

from .convexity import (
    ConvexityConstants,
    ModulusEstimate,
    NormOracle,
    SummationBoundReport,
    balance_gaps,
    constants_for_norm,
    hilbert_modulus,
    modulus_estimate,
    qlaw_constants,
    remark_counterexample,
    split_point,
    summation_bound_check,
    verify_qlaw,
)
from .embeddings import (
    DyadicLevel,
    LowerEmbeddingReport,
    SqueezeReport,
    abel_tail,
    dyadic_decomposition,
    level_bounds,
    level_vectors,
    lower_embedding_check,
    squeeze_report,
    upper_embedding_check,
)
from .errors import BudgetExceededError, HorizonExhaustedError, InvariantViolationError
from .greedy import (
    Basis,
    FundamentalWeight,
    GreedyState,
    bidemocracy_ratio,
    canonical_basis,
    catalog_names,
    coefficient_transform,
    conditionality_constant,
    difference_basis,
    dual_basis,
    greedy_state,
    greedy_step,
    lebesgue_constant_lower,
    lorentz_unit_basis,
    make_catalog_basis,
    offset_basis,
    quasi_greedy_constant,
    super_democracy_lower,
    super_democracy_profile,
    super_democracy_upper,
    weight_from_fundamental,
)
from .lorentz import (
    BlockConstruction,
    LorentzSpec,
    RealSequence,
    ScaleEquivalenceReport,
    allen_dual_weight,
    block_ellinfty_construction,
    delta_m,
    discrete_hardy,
    embedding_gap_H,
    fundamental_function,
    hardy_equivalence_band,
    lorentz_norm,
    lorentz_norm_direct,
    lrp_equivalent_weight,
    marcinkiewicz_norm,
    norm,
    p_convexify,
    rearrangement,
)
from .seqreg import (
    PositiveSequence,
    Weight,
    doubling_ratio,
    dual_sequence,
    essentially_increasing_ratio,
    lrp_witness,
    parse_positive_sequence,
    parse_weight,
    power_sequence,
    primitive,
    running_max_monotone,
    urp_condition_c,
    urp_witness,
)

__version__ = "0.1.0"
