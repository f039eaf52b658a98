//! Frozen calibrated constants.
//!
//! The decay bounds implemented in [`crate::estimator`] hold with universal
//! constants whose numerical values are not pinned by theory. This module
//! freezes implementation values, calibrated once with
//! `cargo run --release --example calibrate` (seed 20260810, grids listed in
//! the example) and kept under version control. Tests assert containment
//! against these frozen values, never against "true" constants.

/// Multiplier in the envelope threshold `T(p, q, n) = TAU * min(q, ln n)^(1/p)`
/// for the well-separated regime `q > 2p`. Above `T` the upper envelope is
/// asserted.
pub const TAU: f64 = 0.75;

/// Threshold multiplier for the generic regime `q <= 2p`, where the decay
/// onset sits farther out relative to `min(q, ln n)^(1/p)`.
pub const TAU_GENERIC: f64 = 1.35;

/// Upper-envelope rate: `mu(||u||_q > t) <= exp(-c(p,q) t^p n^(p/q))` with
/// `c(p, q) = GAMMA_LOWER * min(1, q/p - 1) / p` for `t > T`.
pub const GAMMA_LOWER: f64 = 0.15;

/// Lower-envelope rate: `mu(||u||_q > t) >= exp(-C(p,q) t^p n^(p/q))` with
/// `C(p, q) = GAMMA_UPPER / p` for `2 <= t <= n^(1/p - 1/q) / 2`.
pub const GAMMA_UPPER: f64 = 2.6;

/// Acceptance-grid sandwich floor: on admissible grid points,
/// `-ln(p_hat) / (t^p n^(p/q)) >= C_STAR_LOW`.
pub const C_STAR_LOW: f64 = 0.10;

/// Acceptance-grid sandwich ceiling, the companion of [`C_STAR_LOW`].
pub const C_STAR_HIGH: f64 = 1.60;

/// Envelope constants for the expected normalized q-norm: the empirical
/// `E (sum x_i^q)^(1/q)` over the calibration grid stays within
/// `[KAPPA_1, KAPPA_2]` times the regime formula
/// (`q^(1/p) n^(1/q)` for `q <= ln n`, `(ln n)^(1/p)` otherwise).
pub const KAPPA_1: f64 = 0.30;

/// See [`KAPPA_1`].
pub const KAPPA_2: f64 = 1.60;

/// Universal constant in the all-`u` tail bound `P(x^p > u) <= C e^{-u/2}`
/// for `p >= 1`. The bound needs only existence; `C = 2` dominates
/// `e^{1/2}` (the worst case, at `u -> 0`) with margin, and the tight
/// coefficient `c_p / p <= c_1 = 1` for `u >= 1`.
pub const UNIVERSAL_TAIL_C: f64 = 2.0;

/// Minimum hit count for a grid point to enter an exponent fit.
pub const MIN_FIT_HITS: u64 = 50;

/// Confidence level of every reported binomial interval.
pub const CONFIDENCE: f64 = 0.99;

/// One provenance line per frozen constant, printed by `print-constants`.
pub fn provenance() -> Vec<(&'static str, f64, &'static str)> {
    vec![
        ("tau", TAU, "threshold multiplier, q > 2p regime; calibration run, seed 20260810"),
        ("tau_generic", TAU_GENERIC, "threshold multiplier, q <= 2p regime; calibration run, seed 20260810"),
        ("gamma_lower", GAMMA_LOWER, "upper-envelope rate numerator; calibration run, seed 20260810"),
        ("gamma_upper", GAMMA_UPPER, "lower-envelope rate numerator; calibration run, seed 20260810"),
        ("c_star_low", C_STAR_LOW, "acceptance sandwich floor; calibration run, seed 20260810"),
        ("c_star_high", C_STAR_HIGH, "acceptance sandwich ceiling; calibration run, seed 20260810"),
        ("kappa_1", KAPPA_1, "expected q-norm envelope, lower; calibration run, seed 20260810"),
        ("kappa_2", KAPPA_2, "expected q-norm envelope, upper; calibration run, seed 20260810"),
        ("universal_tail_c", UNIVERSAL_TAIL_C, "P(x^p > u) <= C e^{-u/2}; dominates e^{1/2} analytically"),
        ("min_fit_hits", MIN_FIT_HITS as f64, "admissibility floor for exponent fits"),
        ("confidence", CONFIDENCE, "level of all binomial intervals"),
    ]
}
