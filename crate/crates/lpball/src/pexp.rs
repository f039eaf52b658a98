//! The p-exponential family: densities `c_p e^{-t^p}` on `(0, inf)`.
//!
//! A p-exponential variable raised to the p-th power is Gamma(1/p), which is
//! both how we sample it exactly and why normalized vectors of them land
//! uniformly on l_p spheres (see [`crate::geometry`]).

use crate::constants::{KAPPA_1, KAPPA_2, UNIVERSAL_TAIL_C};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_gamma_unchecked};
use crate::stream::Stream;

/// Shape parameter plus derived normalizing constant for one member of the
/// family. `c_p` is always recomputed from `p` at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponential {
    p: f64,
    c_p: f64,
    /// Set when `p < 1`: sampling and the lower tail bound remain exact, but
    /// the upper tail bound and the decay-envelope constants assume `p >= 1`
    /// and are not asserted.
    pub caveat_p_below_one: bool,
    root: RootEval,
}

/// Evaluation strategy for `G^{1/p}`, resolved once at construction so the
/// per-draw cost stays at multiplications for the common exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RootEval {
    Identity,
    Sqrt,
    Pow(f64),
}

impl PExponential {
    pub fn new(p: f64) -> Result<Self> {
        let c_p = normalizing_constant(p)?;
        let root = if p == 1.0 {
            RootEval::Identity
        } else if p == 2.0 {
            RootEval::Sqrt
        } else {
            RootEval::Pow(1.0 / p)
        };
        Ok(PExponential {
            p,
            c_p,
            caveat_p_below_one: p < 1.0,
            root,
        })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Normalizing constant `c_p = p / Gamma(1/p)`.
    #[inline]
    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    /// Density `c_p e^{-t^p}` for `t > 0`, zero elsewhere.
    pub fn density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.c_p * (-t.powf(self.p)).exp()
        }
    }

    /// One exact draw: `G^{1/p}` with `G ~ Gamma(1/p, 1)`.
    #[inline]
    pub fn sample(&self, stream: &mut Stream) -> f64 {
        self.root_of(sample_gamma(1.0 / self.p, stream))
    }

    /// Map a Gamma(1/p) variate to the p-exponential scale.
    #[inline]
    pub fn root_of(&self, g: f64) -> f64 {
        match self.root {
            RootEval::Identity => g,
            RootEval::Sqrt => g.sqrt(),
            RootEval::Pow(inv_p) => g.powf(inv_p),
        }
    }
}

/// `c_p = p / Gamma(1/p) = 1 / Gamma(1 + 1/p)`.
pub fn normalizing_constant(p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!(
            "normalizing constant requires p > 0, got {p}"
        )));
    }
    Ok((-ln_gamma_unchecked(1.0 + 1.0 / p)).exp())
}

/// Draw from Gamma(shape, 1) for any shape > 0.
///
/// Marsaglia-Tsang squeeze for shape >= 1, the `U^{1/shape}` boost below 1,
/// and plain inversion at shape exactly 1. Rejection loops terminate with
/// probability one and consume stream values deterministically.
pub fn sample_gamma(shape: f64, stream: &mut Stream) -> f64 {
    debug_assert!(shape > 0.0);
    if shape == 1.0 {
        stream.exponential()
    } else if shape < 1.0 {
        let g = sample_gamma_ge1(shape + 1.0, stream);
        g * stream.u01_open().powf(1.0 / shape)
    } else {
        sample_gamma_ge1(shape, stream)
    }
}

fn sample_gamma_ge1(shape: f64, stream: &mut Stream) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = stream.standard_normal();
        let v_cbrt = 1.0 + c * x;
        if v_cbrt <= 0.0 {
            continue;
        }
        let v = v_cbrt * v_cbrt * v_cbrt;
        let u = stream.u01_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// One draw with density `c_p e^{-t^p}`.
pub fn sample_p_exponential(spec: &PExponential, stream: &mut Stream) -> f64 {
    spec.sample(stream)
}

/// `E e^{-h x^p} = (1 + h)^{-1/p}`.
pub fn laplace_transform_xp(h: f64, p: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::domain(format!(
            "laplace transform requires h >= 0, got {h}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::domain(format!(
            "laplace transform requires p > 0, got {p}"
        )));
    }
    Ok((1.0 + h).powf(-1.0 / p))
}

/// Lower bound `e^{-h/p} <= E e^{-h x^p}`, valid for all h > 0.
pub fn laplace_lower_bound(h: f64, p: f64) -> f64 {
    (-h / p).exp()
}

/// Upper bound `E e^{-h x^p} <= e^{-h/(2p)}`, valid for 0 < h <= 1.
pub fn laplace_upper_bound(h: f64, p: f64) -> Option<f64> {
    if h > 0.0 && h <= 1.0 {
        Some((-h / (2.0 * p)).exp())
    } else {
        None
    }
}

/// Two-sided analytic bounds on `P(x^p > u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundPair {
    /// `(c_p / 2p) e^{-2u}`; valid for every p > 0 and u > 0.
    pub lower: f64,
    /// `(c_p / p) e^{-u/2}` for p >= 1, u >= 1; the universal
    /// `C e^{-u/2}` form (C = [`UNIVERSAL_TAIL_C`]) for p >= 1, u < 1.
    pub upper: f64,
    /// The upper form requires p >= 1.
    pub upper_valid: bool,
}

/// Analytic sandwich around the exact tail `P(x^p > u)`.
pub fn tail_bounds_xp(u: f64, spec: &PExponential) -> TailBoundPair {
    let p = spec.p();
    let c_p = spec.c_p();
    let lower = (c_p / (2.0 * p)) * (-2.0 * u).exp();
    if p >= 1.0 {
        let raw = if u >= 1.0 {
            (c_p / p) * (-u / 2.0).exp()
        } else {
            UNIVERSAL_TAIL_C * (-u / 2.0).exp()
        };
        TailBoundPair {
            lower,
            upper: raw.min(1.0),
            upper_valid: true,
        }
    } else {
        TailBoundPair {
            lower,
            upper: 1.0,
            upper_valid: false,
        }
    }
}

/// `ln E x^q = ln Gamma((q+1)/p) - ln Gamma(1/p)`.
pub fn ln_moment_xq(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("moment requires p > 0, got {p}")));
    }
    if !(q >= 0.0) {
        return Err(Error::domain(format!("moment requires q >= 0, got {q}")));
    }
    Ok(ln_gamma((q + 1.0) / p)? - ln_gamma(1.0 / p)?)
}

/// `E x^q = (c_p / p) Gamma((q+1)/p)`, evaluated in log space.
pub fn moment_xq(p: f64, q: f64) -> Result<f64> {
    Ok(ln_moment_xq(p, q)?.exp())
}

/// Two-sided envelope for `E (sum_i x_i^q)^{1/q}`: `[k1 M, k2 M]` where
/// `M = q^{1/p} n^{1/q}` when `q <= ln n` and `M = (ln n)^{1/p}` otherwise.
/// The regime boundary uses the natural log.
pub fn expected_qnorm_envelope(p: f64, q: f64, n: u64) -> Result<(f64, f64)> {
    if !(1.0 <= p && p <= q) || !q.is_finite() {
        return Err(Error::domain(format!(
            "q-norm envelope requires 1 <= p <= q < inf, got p={p}, q={q}"
        )));
    }
    if n < 2 {
        return Err(Error::domain(format!(
            "q-norm envelope requires n >= 2, got {n}"
        )));
    }
    let m = qnorm_regime_formula(p, q, n);
    Ok((KAPPA_1 * m, KAPPA_2 * m))
}

/// The regime formula `M` itself (the envelope midpoint scale).
pub fn qnorm_regime_formula(p: f64, q: f64, n: u64) -> f64 {
    let ln_n = (n as f64).ln();
    if q <= ln_n {
        q.powf(1.0 / p) * (n as f64).powf(1.0 / q)
    } else {
        ln_n.powf(1.0 / p)
    }
}
