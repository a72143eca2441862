"""Centralized numeric tolerances.

All structural and spectral thresholds used across the package live here so
invariant tests have a single tuning point.  Structural identities (Hermiticity,
state norms) are held to 1e-12; spectral quantities (eigenvalues, traces,
unitarity) to 1e-10.
"""

# Structural matrix/vector identities.
HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12

# Spectral / trace-level quantities.
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
UNITARITY_TOL = 1e-10
BASIS_TOL = 1e-10

# Probability handling.
PROB_CLAMP_TOL = 1e-10   # largest negative probability that may be clamped to 0
PROB_FLOOR = 1e-15       # outcomes at or below this baseline are excluded from sums
PROB_SUM_TOL = 1e-10     # allowed drift of a distribution's total before renormalizing

# Postselection / weak-value degeneracy.
OVERLAP_TOL = 1e-12

# Estimation.
DERIVATIVE_SUM_TOL = 1e-8    # |sum_k dp_k/dg| bound for a normalized family
ROUTE_AGREEMENT_TOL = 1e-10  # cross-check of the two first-order bias routes
FISHER_MIN = 1e-300          # below this the bias quotient is undefined
FISHER_DEGENERACY_TOL = 1e-12
FD_STEP_FLOOR = 1e-9
FD_STEP_REL = 1e-4

# mle_oracle search.
GRID_POINTS_MIN = 1000
GRID_POINTS_DEFAULT = 2001
GOLDEN_REL_TOL = 1e-14
GOLDEN_MAX_STEPS = 200
GRID_TIE_TOL = 1e-12     # absolute tie window on the (<= 0) scan objective

# Perturbative-regime warnings.
PERTURBATIVE_WARN = 1e-2

# Pointer-shift reality check.
IMAG_RESIDUE_TOL = 1e-12

# Thermal truncation.
THERMAL_TAIL = 1e-12

# Ratio definedness.
RATIO_MIN_DENOMINATOR = 1e-300
