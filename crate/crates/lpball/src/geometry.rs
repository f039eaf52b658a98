//! Exact uniform sampling on l_p spheres and L_p balls, normalized norms,
//! and the ratio statistic that ties norm events on the sphere to raw
//! p-exponential vectors.
//!
//! Conventions. The small-ell unit sphere is `{ t : t_i >= 0, sum t_i^p = 1 }`
//! on the positive quadrant (the set the quadrant sampler targets); the big-L
//! unit ball is `{ t : n^{-1} sum |t_i|^p <= 1 }`, i.e. `n^{1/p}` times the
//! small-ell ball. Sphere samplers return small-ell points; `rescaled` moves
//! between the two.

use crate::error::{Error, Result};
use crate::pexp::{sample_gamma, PExponential};
use crate::stream::Stream;

/// Which normalization the coordinates are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `sum |t_i|^p = 1` on spheres, `<= 1` on balls.
    SmallEll,
    /// `n^{-1} sum |t_i|^p = 1` on spheres, `<= 1` on balls.
    BigL,
}

/// Which region of the body the point lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    QuadrantSphere,
    FullSphere,
    FullBall,
}

/// Normalization and region tag carried by every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyConvention {
    pub p: f64,
    pub n: u64,
    pub normalization: Normalization,
    pub region: Region,
}

/// One sampled point. `source_s` retains the l_p normalizer of the underlying
/// raw vector; it is not part of the geometric value but makes the
/// independence of direction and norm directly testable.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    pub coords: Vec<f64>,
    pub convention: BodyConvention,
    pub source_s: f64,
}

impl SpherePoint {
    /// The same point expressed in the other normalization (pure rescale by
    /// `n^{1/p}`).
    pub fn rescaled(&self, normalization: Normalization) -> SpherePoint {
        if normalization == self.convention.normalization {
            return self.clone();
        }
        let factor = (self.convention.n as f64).powf(1.0 / self.convention.p);
        let factor = match normalization {
            Normalization::BigL => factor,
            Normalization::SmallEll => 1.0 / factor,
        };
        SpherePoint {
            coords: self.coords.iter().map(|c| c * factor).collect(),
            convention: BodyConvention {
                normalization,
                ..self.convention
            },
            source_s: self.source_s,
        }
    }
}

fn check_pn(p: f64, n: u64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("sampler requires p > 0, got {p}")));
    }
    if n == 0 {
        return Err(Error::domain("sampler requires n >= 1".to_string()));
    }
    Ok(())
}

/// Uniform sample on the positive quadrant of the small-ell p-sphere:
/// normalize a vector of i.i.d. p-exponentials by its l_p norm. The
/// direction is exactly surface-uniform and independent of the retained
/// normalizer `S`.
pub fn sample_quadrant_sphere(p: f64, n: u64, stream: &mut Stream) -> Result<SpherePoint> {
    check_pn(p, n)?;
    let spec = PExponential::new(p)?;
    let shape = 1.0 / p;
    let mut g = vec![0.0f64; n as usize];
    loop {
        let mut sum = 0.0;
        for gi in g.iter_mut() {
            *gi = sample_gamma(shape, stream);
            sum += *gi;
        }
        if sum > 0.0 {
            // coords_i = x_i / S = (g_i / sum)^{1/p}; S^p = sum
            let coords: Vec<f64> = g.iter().map(|gi| spec.root_of(gi / sum)).collect();
            let point = SpherePoint {
                coords,
                convention: BodyConvention {
                    p,
                    n,
                    normalization: Normalization::SmallEll,
                    region: Region::QuadrantSphere,
                },
                source_s: spec.root_of(sum),
            };
            debug_assert!(point_on_quadrant_sphere(&point));
            return Ok(point);
        }
        // probability-zero stream pathology; resample
        eprintln!("lpball: degenerate all-zero draw at p={p}, n={n}; resampling");
    }
}

/// Uniform sample on the full small-ell p-sphere: quadrant sample with an
/// independent sign per coordinate. Rejection from a cube is hopeless past a
/// few dimensions; sign symmetrization is exact and O(n).
pub fn sample_full_sphere(p: f64, n: u64, stream: &mut Stream) -> Result<SpherePoint> {
    let mut point = sample_quadrant_sphere(p, n, stream)?;
    for c in point.coords.iter_mut() {
        *c *= stream.sign();
    }
    point.convention.region = Region::FullSphere;
    Ok(point)
}

/// Uniform sample in the p-ball under the requested normalization: full
/// sphere point scaled by `U^{1/n}`, computed as `exp(ln(U)/n)` so the radius
/// keeps full precision at large `n`.
pub fn sample_ball(
    p: f64,
    n: u64,
    normalization: Normalization,
    stream: &mut Stream,
) -> Result<SpherePoint> {
    let mut point = sample_full_sphere(p, n, stream)?;
    let radius = (stream.u01_open().ln() / n as f64).exp();
    let scale = match normalization {
        Normalization::SmallEll => radius,
        Normalization::BigL => radius * (n as f64).powf(1.0 / p),
    };
    for c in point.coords.iter_mut() {
        *c *= scale;
    }
    point.convention.region = Region::FullBall;
    point.convention.normalization = normalization;
    debug_assert!(point_in_ball(&point));
    Ok(point)
}

fn point_on_quadrant_sphere(pt: &SpherePoint) -> bool {
    let p = pt.convention.p;
    let sum: f64 = pt.coords.iter().map(|c| c.powf(p)).sum();
    pt.coords.iter().all(|c| *c >= 0.0) && (sum - 1.0).abs() <= 1e-9
}

fn point_in_ball(pt: &SpherePoint) -> bool {
    let p = pt.convention.p;
    let sum: f64 = pt.coords.iter().map(|c| c.abs().powf(p)).sum();
    let bound = match pt.convention.normalization {
        Normalization::SmallEll => 1.0,
        Normalization::BigL => pt.convention.n as f64,
    };
    sum <= bound * (1.0 + 1e-9)
}

/// Normalized r-norm `(n^{-1} sum |u_i|^r)^{1/r}`, `max |u_i|` at r = inf.
/// Factored through the max so large exponents cannot overflow.
pub fn big_l_norm(u: &[f64], r: f64) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::domain("big_l_norm of empty vector".to_string()));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("big_l_norm requires finite entries".to_string()));
    }
    if !(r > 0.0) {
        return Err(Error::domain(format!("big_l_norm requires r > 0, got {r}")));
    }
    let m = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if r.is_infinite() || m == 0.0 {
        return Ok(m);
    }
    let n = u.len() as f64;
    let sum: f64 = u.iter().map(|v| (v.abs() / m).powf(r)).sum();
    Ok(m * (sum / n).powf(1.0 / r))
}

/// The sphere-measure reduction statistic
/// `n^{1/p - 1/q} (sum x_i^q)^{1/q} / (sum x_i^p)^{1/p}` of a raw positive
/// vector; its law under i.i.d. p-exponentials equals the law of the
/// normalized q-norm under the uniform sphere measure. For q = inf the
/// q-norm part degenerates to `max x_i` and the prefactor to `n^{1/p}`.
pub fn ratio_statistic(x: &[f64], p: f64, q: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::domain("ratio_statistic of empty vector".to_string()));
    }
    if !(p > 0.0) || !(q >= p) {
        return Err(Error::domain(format!(
            "ratio_statistic requires 0 < p <= q, got p={p}, q={q}"
        )));
    }
    if x.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(
            "ratio_statistic requires finite nonnegative entries".to_string(),
        ));
    }
    let m = x.iter().fold(0.0f64, |acc, v| acc.max(*v));
    if m == 0.0 {
        return Err(Error::domain("ratio_statistic of all-zero vector".to_string()));
    }
    let n = x.len() as f64;
    let sum_p: f64 = x.iter().map(|v| (v / m).powf(p)).sum();
    if q.is_infinite() {
        return Ok(n.powf(1.0 / p) / sum_p.powf(1.0 / p));
    }
    let sum_q: f64 = x.iter().map(|v| (v / m).powf(q)).sum();
    Ok(n.powf(1.0 / p - 1.0 / q) * sum_q.powf(1.0 / q) / sum_p.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::beta_coordinate_cdf;
    use crate::stats::{
        chi_square_independence, ks_critical_value, ks_statistic_against_cdf, ks_two_sample,
    };
    use proptest::prelude::*;

    #[test]
    fn single_point_sphere() {
        let mut s = Stream::for_chunk(31, 0);
        for p in [0.5, 1.0, 3.0] {
            let pt = sample_quadrant_sphere(p, 1, &mut s).unwrap();
            assert_eq!(pt.coords, vec![1.0]);
            assert!(pt.source_s > 0.0);
        }
        assert!(sample_quadrant_sphere(0.0, 3, &mut s).is_err());
        assert!(sample_quadrant_sphere(1.0, 0, &mut s).is_err());
    }

    #[test]
    fn simplex_first_coordinate_uniform() {
        // n = 2, p = 1: the simplex is a segment, coords_0 ~ U[0,1]
        let mut s = Stream::for_chunk(32, 0);
        let draws: Vec<f64> = (0..60_000)
            .map(|_| sample_quadrant_sphere(1.0, 2, &mut s).unwrap().coords[0])
            .collect();
        let d = ks_statistic_against_cdf(&draws, |t| t.clamp(0.0, 1.0));
        assert!(d < ks_critical_value(60_000, 0.001), "d = {d}");
    }

    #[test]
    fn first_coordinate_power_is_beta() {
        let mut s = Stream::for_chunk(33, 0);
        for (p, n) in [(1.0, 5u64), (2.0, 10), (3.0, 4)] {
            let draws: Vec<f64> = (0..40_000)
                .map(|_| {
                    sample_quadrant_sphere(p, n, &mut s).unwrap().coords[0].powf(p)
                })
                .collect();
            let d = ks_statistic_against_cdf(&draws, |t| {
                beta_coordinate_cdf(p, n, t.clamp(0.0, 1.0)).unwrap()
            });
            let crit = ks_critical_value(40_000, 0.001);
            assert!(d < crit, "(p={p}, n={n}): KS {d} >= {crit}");
        }
    }

    #[test]
    fn direction_independent_of_normalizer() {
        let mut s = Stream::for_chunk(34, 0);
        let n_draws = 30_000;
        let mut ss = Vec::with_capacity(n_draws);
        let mut c0 = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let pt = sample_quadrant_sphere(1.0, 8, &mut s).unwrap();
            ss.push(pt.source_s);
            c0.push(pt.coords[0]);
        }
        // correlation within 4 standard errors of zero
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ms, mc) = (mean(&ss), mean(&c0));
        let cov: f64 = ss.iter().zip(&c0).map(|(a, b)| (a - ms) * (b - mc)).sum::<f64>()
            / n_draws as f64;
        let vs = ss.iter().map(|a| (a - ms).powi(2)).sum::<f64>() / n_draws as f64;
        let vc = c0.iter().map(|b| (b - mc).powi(2)).sum::<f64>() / n_draws as f64;
        let corr = cov / (vs * vc).sqrt();
        assert!(
            corr.abs() < 4.0 / (n_draws as f64).sqrt(),
            "corr(S, coords_0) = {corr}"
        );
        let chi = chi_square_independence(&ss, &c0, 10).unwrap();
        assert!(chi.p_value > 0.001, "chi-square rejects independence: {chi:?}");
    }

    #[test]
    fn full_sphere_sign_symmetry_and_abs_marginal() {
        let mut s = Stream::for_chunk(35, 0);
        let n_draws = 50_000;
        let mut c0_full = Vec::with_capacity(n_draws);
        let mut c0_quad = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            c0_full.push(sample_full_sphere(2.0, 6, &mut s).unwrap().coords[0]);
        }
        for _ in 0..n_draws {
            c0_quad.push(sample_quadrant_sphere(2.0, 6, &mut s).unwrap().coords[0]);
        }
        let mean = c0_full.iter().sum::<f64>() / n_draws as f64;
        let var = c0_full.iter().map(|v| v * v).sum::<f64>() / n_draws as f64;
        assert!(mean.abs() < 4.0 * (var / n_draws as f64).sqrt(), "mean {mean}");
        let abs: Vec<f64> = c0_full.iter().map(|v| v.abs()).collect();
        let (_, p_val) = ks_two_sample(&abs, &c0_quad);
        assert!(p_val > 0.001, "|coords| marginal mismatch, p = {p_val}");
    }

    #[test]
    fn gaussian_case_angle_uniform() {
        let mut s = Stream::for_chunk(36, 0);
        let draws: Vec<f64> = (0..50_000)
            .map(|_| {
                let pt = sample_full_sphere(2.0, 2, &mut s).unwrap();
                let a = pt.coords[1].atan2(pt.coords[0]);
                (a + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
            })
            .collect();
        let d = ks_statistic_against_cdf(&draws, |t| t.clamp(0.0, 1.0));
        assert!(d < ks_critical_value(50_000, 0.001), "angle KS {d}");
    }

    #[test]
    fn exchangeability_of_coordinates() {
        let mut s = Stream::for_chunk(37, 0);
        let n_draws = 40_000;
        let mut c0 = Vec::with_capacity(n_draws);
        let mut c3 = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let pt = sample_quadrant_sphere(1.5, 5, &mut s).unwrap();
            c0.push(pt.coords[0]);
            c3.push(pt.coords[3]);
        }
        let (_, p_val) = ks_two_sample(&c0, &c3);
        assert!(p_val > 0.001, "coordinates not exchangeable, p = {p_val}");
    }

    #[test]
    fn ball_radial_statistic_uniform() {
        let mut s = Stream::for_chunk(38, 0);
        let (p, n) = (1.0, 3u64);
        let draws: Vec<f64> = (0..60_000)
            .map(|_| {
                let pt = sample_ball(p, n, Normalization::SmallEll, &mut s).unwrap();
                let sum: f64 = pt.coords.iter().map(|c| c.abs().powf(p)).sum();
                sum.powf(n as f64 / p)
            })
            .collect();
        let d = ks_statistic_against_cdf(&draws, |t| t.clamp(0.0, 1.0));
        assert!(d < ks_critical_value(60_000, 0.001), "radial KS {d}");
    }

    #[test]
    fn one_dimensional_ball_uniform() {
        let mut s = Stream::for_chunk(39, 0);
        let draws: Vec<f64> = (0..50_000)
            .map(|_| sample_ball(1.0, 1, Normalization::SmallEll, &mut s).unwrap().coords[0])
            .collect();
        let d = ks_statistic_against_cdf(&draws, |t| ((t + 1.0) / 2.0).clamp(0.0, 1.0));
        assert!(d < ks_critical_value(50_000, 0.001), "1-D ball KS {d}");
    }

    #[test]
    fn big_l_and_small_ell_differ_by_exact_factor() {
        let (p, n) = (1.5, 7u64);
        let mut s1 = Stream::for_chunk(40, 0);
        let mut s2 = Stream::for_chunk(40, 0);
        let a = sample_ball(p, n, Normalization::SmallEll, &mut s1).unwrap();
        let b = sample_ball(p, n, Normalization::BigL, &mut s2).unwrap();
        let factor = (n as f64).powf(1.0 / p);
        for (x, y) in a.coords.iter().zip(&b.coords) {
            assert_eq!(x * factor, *y, "not bit-identical after scaling");
        }
        let c = a.rescaled(Normalization::BigL);
        assert_eq!(c.coords, b.coords);
    }

    #[test]
    fn big_l_norm_examples() {
        for r in [0.5, 1.0, 2.0, 17.0, f64::INFINITY] {
            let ones = vec![1.0; 9];
            assert!((big_l_norm(&ones, r).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((big_l_norm(&[2.0, 0.0], 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(big_l_norm(&[3.0, 1.0, 2.0], f64::INFINITY).unwrap(), 3.0);
        assert!(big_l_norm(&[], 2.0).is_err());
        assert!(big_l_norm(&[1.0, f64::NAN], 2.0).is_err());
        // max factoring keeps huge entries finite at large r
        let v = big_l_norm(&[1e300, 5e299], 200.0).unwrap();
        assert!(v.is_finite() && v > 9e299);
    }

    #[test]
    fn ratio_statistic_examples() {
        let ones = vec![1.0; 12];
        assert!((ratio_statistic(&ones, 1.0, 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((ratio_statistic(&[0.3, 0.0, 2.0], 2.0, f64::INFINITY).unwrap()
            - (3.0f64 / ((0.3f64 / 2.0).powi(2) + 1.0)).sqrt())
        .abs()
            < 1e-12);
        assert!(ratio_statistic(&[0.0, 0.0], 1.0, 2.0).is_err());
        assert!(ratio_statistic(&[], 1.0, 2.0).is_err());
        assert!(ratio_statistic(&[1.0, -0.2], 1.0, 2.0).is_err());
    }

    #[test]
    fn ratio_statistic_agrees_with_big_l_norm_of_scaled_point() {
        // || n^{1/p} x / S ||_{L_q} = ratio_statistic(x, p, q), exactly
        let mut s = Stream::for_chunk(41, 0);
        let (p, q, n) = (1.0, 4.0, 32u64);
        let spec = PExponential::new(p).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| spec.sample(&mut s)).collect();
            let sp: f64 = x.iter().map(|v| v.powf(p)).sum();
            let scale = (n as f64).powf(1.0 / p) / sp.powf(1.0 / p);
            let u: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let a = big_l_norm(&u, q).unwrap();
            let b = ratio_statistic(&x, p, q).unwrap();
            assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn ratio_is_one_at_q_equals_p(p in 0.5f64..4.0, seed in 0u64..100) {
            let mut s = Stream::for_chunk(seed, 3);
            let spec = PExponential::new(p).unwrap();
            let x: Vec<f64> = (0..9).map(|_| spec.sample(&mut s)).collect();
            let r = ratio_statistic(&x, p, p).unwrap();
            prop_assert!((r - 1.0).abs() < 1e-10);
        }

        #[test]
        fn ratio_bounded_by_geometric_cap(seed in 0u64..100) {
            let mut s = Stream::for_chunk(seed, 4);
            let (p, q, n) = (1.0, 2.5, 17u64);
            let spec = PExponential::new(p).unwrap();
            let x: Vec<f64> = (0..n).map(|_| spec.sample(&mut s)).collect();
            let r = ratio_statistic(&x, p, q).unwrap();
            let cap = (n as f64).powf(1.0 / p - 1.0 / q);
            prop_assert!(r >= 1.0 - 1e-12 && r <= cap * (1.0 + 1e-12));
        }

        #[test]
        fn sphere_constraint_holds_for_every_sample(
            seed in 0u64..50, p in prop::sample::select(vec![0.5f64, 1.0, 2.0, 3.5]), n in 1u64..20
        ) {
            let mut s = Stream::for_chunk(seed, 5);
            let pt = sample_quadrant_sphere(p, n, &mut s).unwrap();
            let sum: f64 = pt.coords.iter().map(|c| c.powf(p)).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(pt.coords.iter().all(|c| *c >= 0.0));
            let ball = sample_ball(p, n, Normalization::BigL, &mut s).unwrap();
            let bsum: f64 = ball.coords.iter().map(|c| c.abs().powf(p)).sum();
            prop_assert!(bsum <= n as f64 * (1.0 + 1e-9));
        }
    }
}
