//! Goodness-of-fit machinery: Kolmogorov-Smirnov tests, a chi-square
//! independence test on quantile grids, and exact binomial (Clopper-Pearson)
//! confidence intervals.

use crate::error::{Error, Result};
use crate::special::{inc_gamma_q, inv_inc_beta};

/// z quantile at 99.5% (two-sided 99% CLT bands).
pub const Z_995: f64 = 2.575_829_303_548_900_4;

/// Kolmogorov distribution survival function
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.75 {
        // complement of the theta-series form, accurate at small x
        let mut sum = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            sum += (-m * m * std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        }
        return 1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * sum;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Critical value for the one-sample KS statistic at significance `alpha`
/// (asymptotic: `c / sqrt(n)` where `Q(c) = alpha`).
pub fn ks_critical_value(n: u64, alpha: f64) -> f64 {
    kolmogorov_quantile(alpha) / (n as f64).sqrt()
}

fn kolmogorov_quantile(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (1e-3, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sample KS statistic `sup |F_n - F|` against a CDF.
pub fn ks_statistic_against_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic p-value of a one-sample KS statistic.
pub fn ks_p_value(d: f64, n: u64) -> f64 {
    kolmogorov_sf(d * (n as f64).sqrt())
}

/// Two-sample KS statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).expect("NaN in KS sample"));
    ys.sort_by(|u, v| u.partial_cmp(v).expect("NaN in KS sample"));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let (fx, fy) = (i as f64 / n as f64, j as f64 / m as f64);
        d = d.max((fx - fy).abs());
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    (d, kolmogorov_sf(en * d))
}

/// Result of the chi-square independence test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Chi-square independence test of paired samples on a `bins x bins` grid of
/// empirical quantiles. Each margin is binned by its own sample quantiles,
/// which makes the expected cell counts essentially uniform.
pub fn chi_square_independence(xs: &[f64], ys: &[f64], bins: usize) -> Result<ChiSquareResult> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::domain(
            "chi-square independence needs equal-length nonempty samples".to_string(),
        ));
    }
    if bins < 2 {
        return Err(Error::domain("need at least 2 bins".to_string()));
    }
    let n = xs.len();
    let edges = |v: &[f64]| -> Vec<f64> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).expect("NaN in chi-square sample"));
        (1..bins).map(|k| s[k * n / bins]).collect()
    };
    let ex = edges(xs);
    let ey = edges(ys);
    let bin_of = |edges: &[f64], v: f64| edges.partition_point(|e| *e <= v);
    let mut counts = vec![0u64; bins * bins];
    for (x, y) in xs.iter().zip(ys) {
        counts[bin_of(&ex, *x) * bins + bin_of(&ey, *y)] += 1;
    }
    let row: Vec<f64> = (0..bins)
        .map(|i| (0..bins).map(|j| counts[i * bins + j] as f64).sum())
        .collect();
    let col: Vec<f64> = (0..bins)
        .map(|j| (0..bins).map(|i| counts[i * bins + j] as f64).sum())
        .collect();
    let mut stat = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let expected = row[i] * col[j] / n as f64;
            if expected > 0.0 {
                let diff = counts[i * bins + j] as f64 - expected;
                stat += diff * diff / expected;
            }
        }
    }
    let dof = ((bins - 1) * (bins - 1)) as u64;
    let p_value = inc_gamma_q(dof as f64 / 2.0, stat / 2.0)?;
    Ok(ChiSquareResult {
        statistic: stat,
        dof,
        p_value,
    })
}

/// Exact binomial confidence interval at the given two-sided confidence.
///
/// Zero hits collapse to `[0, upper]` with the one-sided upper limit
/// `1 - alpha^{1/n}`; symmetrically for all hits.
pub fn clopper_pearson(hits: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || hits > trials {
        return Err(Error::domain(format!(
            "clopper_pearson needs 0 <= hits <= trials, trials > 0; got {hits}/{trials}"
        )));
    }
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence must be in (0,1), got {confidence}"
        )));
    }
    let alpha = 1.0 - confidence;
    let n = trials as f64;
    let k = hits as f64;
    if hits == 0 {
        return Ok((0.0, 1.0 - alpha.powf(1.0 / n)));
    }
    if hits == trials {
        return Ok((alpha.powf(1.0 / n), 1.0));
    }
    let lo = inv_inc_beta(alpha / 2.0, k, n - k + 1.0)?;
    let hi = inv_inc_beta(1.0 - alpha / 2.0, k + 1.0, n - k)?;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::Stream;
    use crate::testutil::read_fixture;

    #[test]
    fn kolmogorov_sf_matches_reference() {
        for row in read_fixture("kolmogorov_sf.csv") {
            let x: f64 = row[0].parse().unwrap();
            let want: f64 = row[1].parse().unwrap();
            let got = kolmogorov_sf(x);
            assert!((got - want).abs() < 1e-10, "sf({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn ks_critical_value_at_tenth_percent() {
        // Q(1.9495...) = 0.001, from the frozen quantile row
        let c = ks_critical_value(100_000, 0.001);
        assert!((c * (100_000f64).sqrt() - 1.949_497).abs() < 1e-3, "c = {c}");
    }

    #[test]
    fn ks_accepts_uniform_rejects_shifted() {
        let mut s = Stream::for_chunk(21, 0);
        let xs: Vec<f64> = (0..50_000).map(|_| s.u01()).collect();
        let d = ks_statistic_against_cdf(&xs, |t| t.clamp(0.0, 1.0));
        assert!(d < ks_critical_value(50_000, 0.001), "uniform rejected, d={d}");
        let d_bad = ks_statistic_against_cdf(&xs, |t| (t * t).clamp(0.0, 1.0));
        assert!(d_bad > ks_critical_value(50_000, 0.001));
    }

    #[test]
    fn two_sample_ks_sane() {
        let mut s = Stream::for_chunk(22, 0);
        let a: Vec<f64> = (0..20_000).map(|_| s.u01()).collect();
        let b: Vec<f64> = (0..30_000).map(|_| s.u01()).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.001);
        let c: Vec<f64> = (0..30_000).map(|_| s.u01() * 0.95).collect();
        let (_, p_bad) = ks_two_sample(&a, &c);
        assert!(p_bad < 1e-6);
    }

    #[test]
    fn chi_square_independent_vs_dependent() {
        let mut s = Stream::for_chunk(23, 0);
        let xs: Vec<f64> = (0..40_000).map(|_| s.u01()).collect();
        let ys: Vec<f64> = (0..40_000).map(|_| s.u01()).collect();
        let r = chi_square_independence(&xs, &ys, 10).unwrap();
        assert_eq!(r.dof, 81);
        assert!(r.p_value > 0.001, "independent rejected: {r:?}");
        let zs: Vec<f64> = xs.iter().map(|x| x + 0.1 * ys[0].max(*x)).collect();
        let r_dep = chi_square_independence(&xs, &zs, 10).unwrap();
        assert!(r_dep.p_value < 1e-9, "dependent accepted: {r_dep:?}");
    }

    #[test]
    fn clopper_pearson_matches_reference() {
        for row in read_fixture("clopper_pearson.csv") {
            let hits: u64 = row[0].parse().unwrap();
            let trials: u64 = row[1].parse().unwrap();
            let lo_want: f64 = row[2].parse().unwrap();
            let hi_want: f64 = row[3].parse().unwrap();
            let (lo, hi) = clopper_pearson(hits, trials, 0.99).unwrap();
            assert!(
                (lo - lo_want).abs() < 2e-9 && (hi - hi_want).abs() < 2e-9,
                "CP({hits},{trials}) = [{lo},{hi}], want [{lo_want},{hi_want}]"
            );
        }
    }

    #[test]
    fn clopper_pearson_brackets_p_hat() {
        for (k, n) in [(1u64, 10u64), (5, 10), (9, 10), (0, 10), (10, 10), (3, 1000)] {
            let (lo, hi) = clopper_pearson(k, n, 0.99).unwrap();
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "({k},{n}): [{lo},{hi}] vs {p}");
        }
        assert!(clopper_pearson(2, 0, 0.99).is_err());
        assert!(clopper_pearson(3, 2, 0.99).is_err());
    }
}
