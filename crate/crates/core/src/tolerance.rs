//! Pinned numerical thresholds used by the verifiers and the acceptance suite.
//!
//! | Kind | Basis |
//! |------|-------|
//! | exact identities on step functions | rounding only |
//! | discretization slack | Riemann sums, sampled supports |
//! | scaling drift | sampled superlevel sets under dilation |

/// Layer-cake identity on the sampled step profile.
pub const LAYER_CAKE_REL: f64 = 1e-9;

/// Rearrangement preserves the multiset of samples.
pub const REARRANGEMENT_REL: f64 = 1e-12;

/// Weak interpolation with the constructive constant.
pub const INTERP_SLACK: f64 = 1e-9;

/// Plancherel defect of the matched-measure DFT.
pub const PLANCHEREL: f64 = 1e-10;

/// Transform round trips.
pub const ROUND_TRIP_REL: f64 = 1e-12;

/// Maximum deviation of the sampled Gaussian transform from the Gaussian.
pub const GAUSSIAN_FIXED_POINT: f64 = 1e-6;

/// Finite-difference gradient against the spectral first-order norm.
pub const GRADIENT_CROSS_CHECK_REL: f64 = 1e-2;

/// Strong Young inequality, constant one.
pub const YOUNG_SLACK: f64 = 1e-6;

/// Convolution theorem relative to the largest coefficient.
pub const CONVOLUTION_THEOREM: f64 = 1e-10;

/// Largest allowed ratio drift under dilation by 1/2 and 2.
pub const SCALING_DRIFT: f64 = 0.02;

/// Drift the perturbed-exponent negative control must exceed.
pub const NEGATIVE_CONTROL_DRIFT: f64 = 0.05;

/// Amplitude homogeneity of every ratio.
pub const HOMOGENEITY_REL: f64 = 1e-12;

/// Spectral energy allowed outside the band for band-limited inputs.
pub const BAND_LEAKAGE: f64 = 1e-10;

/// Hausdorff-Young exact cases (p = 1, p = 2): rounding only.
pub const HAUSDORFF_YOUNG_EXACT: f64 = 1e-12;

/// Hausdorff-Young at intermediate p: discretization slack.
pub const HAUSDORFF_YOUNG_SLACK: f64 = 5e-2;

/// Closed-form K-functional against brute-force split minimization.
pub const K_FUNCTIONAL_REL: f64 = 1e-6;

/// Minimum goodness of fit for John-Nirenberg exponential decay.
pub const JN_MIN_R_SQUARED: f64 = 0.9;

/// Allowed spread of the dyadic BMO norm of log|x| across resolutions.
pub const BMO_RESOLUTION_FACTOR: f64 = 1.3;

/// Relative slack for orderings that are exact in the continuum and attained
/// with equality by indicators.
pub const ORDERING_REL: f64 = 1e-12;
