//! Ball probabilities from sphere probabilities: the volume of a star-shaped
//! set decomposes radially as `nu(A) = n int_0^1 r^{n-1} mu(A/r) dr`, so a
//! norm-threshold ball tail is a weighted integral of sphere tails at scaled
//! thresholds. The substitution `s = r^n` absorbs the `r^{n-1}` weight
//! exactly (`nu = int_0^1 mu(t s^{-1/n}) ds`), which is the only
//! numerically viable form once n reaches the tens.

use crate::error::{Error, Result};
use crate::estimator::RatioSampleCache;
use crate::stats::{clopper_pearson, ks_p_value, ks_statistic_against_cdf, Z_995};
use crate::geometry::{Normalization, SpherePoint};

/// A sphere-tail value with its confidence band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuPoint {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MuPoint {
    pub fn exact(v: f64) -> MuPoint {
        MuPoint {
            p_hat: v,
            ci_low: v,
            ci_high: v,
        }
    }
}

/// A sphere-tail estimator the radial integrator can query at any threshold.
///
/// `eval` must return 0 at `threshold = +inf`. Estimators whose survival
/// function is a finite staircase (empirical caches, indicators) expose their
/// jump locations through `atoms`, unlocking the exact integration path.
pub trait MuEstimator: Sync {
    fn eval(&self, threshold: f64) -> MuPoint;
    /// Sorted ascending jump locations of a staircase estimator, each
    /// carrying mass 1/len.
    fn atoms(&self) -> Option<&[f64]> {
        None
    }
}

/// Wrap any closure as an estimator (exact oracle curves, analytic bounds).
pub struct FnMu<F: Fn(f64) -> MuPoint + Sync>(pub F);

impl<F: Fn(f64) -> MuPoint + Sync> MuEstimator for FnMu<F> {
    fn eval(&self, threshold: f64) -> MuPoint {
        (self.0)(threshold)
    }
}

impl MuEstimator for RatioSampleCache {
    fn eval(&self, threshold: f64) -> MuPoint {
        if threshold.is_infinite() {
            return MuPoint::exact(0.0);
        }
        match self.survival(threshold) {
            Ok(est) => MuPoint {
                p_hat: est.p_hat,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
            },
            Err(_) => MuPoint::exact(f64::NAN),
        }
    }

    fn atoms(&self) -> Option<&[f64]> {
        Some(self.values())
    }
}

/// `mu(threshold) = 1` below the jump, 0 at and above it: the survival
/// staircase of a point mass. Its radial integral has the closed form
/// `1 - (t / jump)^n`, which the exact path reproduces to rounding.
pub struct IndicatorMu {
    pub jump_at: f64,
}

impl MuEstimator for IndicatorMu {
    fn eval(&self, threshold: f64) -> MuPoint {
        MuPoint::exact(if threshold < self.jump_at { 1.0 } else { 0.0 })
    }

    fn atoms(&self) -> Option<&[f64]> {
        Some(std::slice::from_ref(&self.jump_at))
    }
}

/// Quadrature rule for function-backed estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Trapezoid,
    GaussLegendre,
}

impl QuadratureRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuadratureRule::Trapezoid => "trapezoid",
            QuadratureRule::GaussLegendre => "gauss-legendre",
        }
    }
}

/// A ball-tail value assembled from sphere tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuEstimate {
    pub value: f64,
    /// Confidence band combining the mu bands with the quadrature error.
    pub band_low: f64,
    pub band_high: f64,
    pub quadrature_error: f64,
}

/// `nu(||u||_q > t) = n int_0^1 r^{n-1} mu(||u||_q > t/r) dr`, integrated on
/// the `s = r^n` scale.
///
/// Staircase estimators (ones exposing `atoms`) are integrated exactly:
/// each atom `v` contributes `max(0, 1 - (t/v)^n) / N`, and the band scales
/// the atom-count uncertainty (exact binomial on the support count) combined
/// with a CLT band on the bounded weights. Smooth estimators are integrated
/// by the requested rule at the requested order, with the monotone
/// total-variation bound (trapezoid) or rule-halving delta (Gauss-Legendre)
/// as the quadrature error.
pub fn nu_from_mu(
    n: u64,
    t: f64,
    mu: &dyn MuEstimator,
    order: usize,
    rule: QuadratureRule,
) -> Result<NuEstimate> {
    if n == 0 {
        return Err(Error::domain("nu_from_mu requires n >= 1".to_string()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("nu_from_mu requires finite t >= 0, got {t}")));
    }
    if order < 2 {
        return Err(Error::domain(format!("quadrature order must be >= 2, got {order}")));
    }
    if let Some(atoms) = mu.atoms() {
        return nu_exact_from_atoms(n, t, atoms);
    }
    let nf = n as f64;
    // integrand on the s scale; s = 0 maps to threshold +inf where mu = 0
    let point_at = |s: f64| -> MuPoint {
        if s <= 0.0 {
            MuPoint::exact(0.0)
        } else if t == 0.0 {
            mu.eval(0.0)
        } else {
            mu.eval(t * (-s.ln() / nf).exp())
        }
    };
    let integrate = |nodes: &[(f64, f64)]| -> (f64, f64, f64) {
        let mut v = 0.0;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (s, w) in nodes {
            let m = point_at(*s);
            v += w * m.p_hat;
            lo += w * m.ci_low;
            hi += w * m.ci_high;
        }
        (v, lo, hi)
    };
    let (value, lo, hi, qerr) = match rule {
        QuadratureRule::Trapezoid => {
            let h = 1.0 / order as f64;
            let nodes: Vec<(f64, f64)> = (0..=order)
                .map(|k| {
                    let w = if k == 0 || k == order { 0.5 * h } else { h };
                    (k as f64 * h, w)
                })
                .collect();
            let (v, lo, hi) = integrate(&nodes);
            // monotone integrand: |error| <= h * total variation / 2
            let tv = (point_at(1.0).p_hat - point_at(0.0).p_hat).abs();
            (v, lo, hi, 0.5 * h * tv)
        }
        QuadratureRule::GaussLegendre => {
            let nodes = gauss_legendre_01(order);
            let (v, lo, hi) = integrate(&nodes);
            let coarse_nodes = gauss_legendre_01((order / 2).max(2));
            let (v2, _, _) = integrate(&coarse_nodes);
            (v, lo, hi, (v - v2).abs().max(1e-15))
        }
    };
    Ok(NuEstimate {
        value: value.clamp(0.0, 1.0),
        band_low: (lo - qerr).clamp(0.0, 1.0),
        band_high: (hi + qerr).clamp(0.0, 1.0),
        quadrature_error: qerr,
    })
}

fn nu_exact_from_atoms(n: u64, t: f64, atoms: &[f64]) -> Result<NuEstimate> {
    if atoms.is_empty() {
        return Err(Error::domain("empty atom list".to_string()));
    }
    let nf = n as f64;
    let total = atoms.len() as f64;
    let weight = |v: f64| -> f64 {
        if v <= t {
            0.0
        } else if t == 0.0 {
            1.0
        } else {
            -(t / v).ln().mul_add(0.0, 1.0 - (nf * (t / v).ln()).exp())
        }
    };
    // atoms are sorted: everything at or below t contributes nothing
    let start = atoms.partition_point(|v| *v <= t);
    let support = (atoms.len() - start) as u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for v in &atoms[start..] {
        let w = weight(*v);
        sum += w;
        sum_sq += w * w;
    }
    let value = sum / total;
    let (cp_lo, cp_hi) = clopper_pearson(support, atoms.len() as u64, crate::constants::CONFIDENCE)?;
    let (band_low, band_high) = if support == 0 {
        (0.0, cp_hi)
    } else {
        let p_nz = support as f64 / total;
        // binomial scaling of the support count, widened by the CLT band of
        // the bounded weights when that is larger
        let clt = Z_995 * ((sum_sq / total - value * value).max(0.0) / total).sqrt();
        let lo = (value * cp_lo / p_nz).min(value - clt);
        let hi = (value * cp_hi / p_nz).max(value + clt);
        (lo, hi)
    };
    Ok(NuEstimate {
        value,
        band_low: band_low.clamp(0.0, 1.0),
        band_high: band_high.clamp(0.0, 1.0),
        quadrature_error: 0.0,
    })
}

/// Gauss-Legendre nodes and weights on (0, 1).
pub fn gauss_legendre_01(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 + x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// The sampled radial profile behind one `nu_from_mu` evaluation: mu at
/// threshold `t / r` for each grid radius.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub mu_values: Vec<MuPoint>,
    pub quadrature: QuadratureRule,
}

/// Evaluate the profile on the quadrature grid mapped back to the r scale.
pub fn radial_profile(
    n: u64,
    t: f64,
    mu: &dyn MuEstimator,
    order: usize,
    rule: QuadratureRule,
) -> Result<RadialProfile> {
    if order < 2 {
        return Err(Error::domain(format!("quadrature order must be >= 2, got {order}")));
    }
    let nf = n as f64;
    let s_nodes: Vec<f64> = match rule {
        QuadratureRule::Trapezoid => (1..=order).map(|k| k as f64 / order as f64).collect(),
        QuadratureRule::GaussLegendre => gauss_legendre_01(order).iter().map(|(s, _)| *s).collect(),
    };
    let grid: Vec<f64> = s_nodes.iter().map(|s| (s.ln() / nf).exp()).collect();
    let mu_values: Vec<MuPoint> = grid.iter().map(|r| mu.eval(t / r)).collect();
    Ok(RadialProfile {
        grid,
        mu_values,
        quadrature: rule,
    })
}

/// Result of the ball radial-law check.
#[derive(Debug, Clone, Copy)]
pub struct RadialCheck {
    pub ks_statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
    /// Below 100 samples the test has essentially no power.
    pub underpowered: bool,
}

/// KS test of the radial statistic `(sum |c_i|^p)^{n/p}` of ball samples
/// against the uniform law it must follow. Sphere points (radius identically
/// one) or any non-ball input fail it loudly.
pub fn radial_cdf_check(samples: &[SpherePoint]) -> Result<RadialCheck> {
    if samples.is_empty() {
        return Err(Error::domain("radial_cdf_check needs at least one sample".to_string()));
    }
    let conv = samples[0].convention;
    let radial: Vec<f64> = samples
        .iter()
        .map(|pt| {
            if pt.convention.p != conv.p || pt.convention.n != conv.n {
                return Err(Error::domain("mixed conventions in radial_cdf_check".to_string()));
            }
            let scale = match pt.convention.normalization {
                Normalization::SmallEll => 1.0,
                Normalization::BigL => pt.convention.n as f64,
            };
            let sum: f64 = pt.coords.iter().map(|c| c.abs().powf(conv.p)).sum();
            Ok((sum / scale).powf(conv.n as f64 / conv.p))
        })
        .collect::<Result<_>>()?;
    let ks = ks_statistic_against_cdf(&radial, |t| t.clamp(0.0, 1.0));
    Ok(RadialCheck {
        ks_statistic: ks,
        p_value: ks_p_value(ks, radial.len() as u64),
        n_samples: radial.len(),
        underpowered: radial.len() < 100,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Body;
    use crate::geometry::{sample_ball, sample_full_sphere};
    use crate::oracle::{exact_small_n, SmallBody};
    use crate::stream::Stream;

    #[test]
    fn full_and_zero_measure_cases() {
        let one = FnMu(|_t: f64| MuPoint::exact(1.0));
        let est = nu_from_mu(64, 0.0, &one, 64, QuadratureRule::Trapezoid).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12, "mu = 1 gives nu = {}", est.value);
        let zero = FnMu(|_t: f64| MuPoint::exact(0.0));
        let est = nu_from_mu(64, 5.0, &zero, 64, QuadratureRule::GaussLegendre).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn indicator_reproduces_closed_form_exactly() {
        // mu(t/r) = 1[r > r0] integrates to 1 - r0^n
        for (n, r0, t) in [(64u64, 0.97f64, 1.5f64), (8, 0.5, 2.0), (1024, 0.999, 3.0)] {
            let mu = IndicatorMu { jump_at: t / r0 };
            let est = nu_from_mu(n, t, &mu, 64, QuadratureRule::Trapezoid).unwrap();
            let want = 1.0 - r0.powi(n as i32);
            assert!(
                (est.value - want).abs() < 1e-10,
                "n={n} r0={r0}: {} vs {want}",
                est.value
            );
            assert_eq!(est.quadrature_error, 0.0);
        }
    }

    #[test]
    fn smooth_oracle_curve_integrates_to_exact_ball_value() {
        // n = 2 self-consistency: radial integral of the exact sphere curve
        // must land on the exact ball value
        let (p, q, t) = (1.0, 2.0, 1.2);
        let mu = FnMu(move |thr: f64| {
            MuPoint::exact(exact_small_n(p, q, 2, thr, SmallBody::MuSphere).unwrap().value)
        });
        let want = exact_small_n(p, q, 2, t, SmallBody::NuBall).unwrap().value;
        for rule in [QuadratureRule::GaussLegendre, QuadratureRule::Trapezoid] {
            let est = nu_from_mu(2, t, &mu, 64, rule).unwrap();
            let tol = match rule {
                QuadratureRule::GaussLegendre => 1e-6,
                QuadratureRule::Trapezoid => 5e-3, // first-order rule on a kinked integrand
            };
            assert!(
                (est.value - want).abs() < tol,
                "{rule:?}: {} vs {want}",
                est.value
            );
            assert!(est.band_low <= want + tol && want - tol <= est.band_high);
        }
    }

    #[test]
    fn cache_backed_estimate_agrees_with_direct_ball_runs() {
        let (p, q, n, t) = (1.0, 2.0, 64u64, 1.5);
        let cache = RatioSampleCache::build(p, q, n, Body::MuSphere, 400_000, 77, 16).unwrap();
        let radial = nu_from_mu(n, t, &cache, 64, QuadratureRule::Trapezoid).unwrap();
        let direct = crate::estimator::estimate_tail(
            &crate::estimator::TailQuery::new(p, q, n, t, Body::NuBall).unwrap(),
            400_000,
            78,
            16,
        )
        .unwrap();
        assert!(
            radial.band_high >= direct.ci_low && direct.ci_high >= radial.band_low,
            "bands disjoint: radial [{}, {}] vs direct [{}, {}]",
            radial.band_low,
            radial.band_high,
            direct.ci_low,
            direct.ci_high
        );
    }

    #[test]
    fn order_must_be_at_least_two() {
        let one = FnMu(|_t: f64| MuPoint::exact(1.0));
        assert!(nu_from_mu(4, 1.0, &one, 1, QuadratureRule::Trapezoid).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let nodes = gauss_legendre_01(12);
        assert!((nodes.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-14);
        // degree-7 polynomial: exact for order >= 4
        let val: f64 = nodes.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((val - 1.0 / 8.0).abs() < 1e-14, "got {val}");
    }

    #[test]
    fn radial_law_holds_for_ball_samples_and_fails_for_sphere() {
        let mut s = Stream::for_chunk(80, 0);
        let (p, n) = (1.0, 8u64);
        let balls: Vec<SpherePoint> = (0..60_000)
            .map(|_| sample_ball(p, n, Normalization::SmallEll, &mut s).unwrap())
            .collect();
        let check = radial_cdf_check(&balls).unwrap();
        assert!(!check.underpowered);
        assert!(check.p_value > 0.001, "ball radial law rejected: {check:?}");

        let spheres: Vec<SpherePoint> = (0..2_000)
            .map(|_| sample_full_sphere(p, n, &mut s).unwrap())
            .collect();
        let bad = radial_cdf_check(&spheres).unwrap();
        assert!(bad.p_value < 1e-12, "sphere points passed the radial law");

        let tiny = radial_cdf_check(&balls[..10]).unwrap();
        assert!(tiny.underpowered);
        assert!(radial_cdf_check(&[]).is_err());
    }

    #[test]
    fn profile_is_monotone_for_cache_estimators() {
        let cache = RatioSampleCache::build(1.0, 2.0, 16, Body::MuSphere, 50_000, 81, 8).unwrap();
        let profile = radial_profile(16, 1.6, &cache, 32, QuadratureRule::Trapezoid).unwrap();
        for w in profile.mu_values.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat + 1e-15, "profile not monotone");
        }
        assert_eq!(profile.grid.len(), profile.mu_values.len());
    }
}
