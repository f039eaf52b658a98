//! Monte Carlo tail estimation with reproducible chunked parallelism, exact
//! binomial intervals, and the analytic decay envelopes the estimates are
//! tested against.
//!
//! The mu-sphere estimator never materializes points: the normalized q-norm
//! of a uniform sphere point has the same law as the ratio statistic of the
//! underlying raw vector, and since each raw coordinate is `G^{1/p}` with G
//! Gamma-distributed, both power sums are accumulated directly from the G
//! draws. The nu-ball estimator multiplies the same statistic by an
//! independent `U^{1/n}` radius, which is exactly the law of the normalized
//! q-norm of a uniform ball point (signs never affect norms).

use crate::constants::{
    C_STAR_HIGH, C_STAR_LOW, GAMMA_LOWER, GAMMA_UPPER, MIN_FIT_HITS, TAU, TAU_GENERIC,
};
use crate::error::{Error, Result};
use crate::stats::clopper_pearson;
use crate::stream::{chunk_sizes, Stream};
use rayon::prelude::*;

/// Which measure a tail query targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Body {
    /// Uniform surface measure on the positive quadrant of the sphere.
    MuSphere,
    /// Normalized volume on the full ball.
    NuBall,
}

impl Body {
    pub fn as_str(&self) -> &'static str {
        match self {
            Body::MuSphere => "mu",
            Body::NuBall => "nu",
        }
    }
}

/// One tail probability to estimate: the measure of
/// `{ ||u||_{L_q^n} > t }` under `body`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub p: f64,
    pub q: f64,
    pub n: u64,
    pub t: f64,
    pub body: Body,
    /// p < 1 is accepted, but the envelope constants assume p >= 1.
    pub caveat_p_below_one: bool,
}

impl TailQuery {
    /// q = p is permitted (degenerate, useful in tests); q < p is not.
    pub fn new(p: f64, q: f64, n: u64, t: f64, body: Body) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::domain(format!("query requires p > 0, got {p}")));
        }
        if !(q >= p) {
            return Err(Error::domain(format!("query requires q >= p, got q={q}, p={p}")));
        }
        if n == 0 {
            return Err(Error::domain("query requires n >= 1".to_string()));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("query requires t > 0, got {t}")));
        }
        Ok(TailQuery {
            p,
            q,
            n,
            t,
            body,
            caveat_p_below_one: p < 1.0,
        })
    }

    /// `t^p n^{p/q}`; the `n^{p/q}` factor degenerates to 1 at q = inf.
    pub fn exponent_arg(&self) -> f64 {
        exponent_arg(self.p, self.q, self.n, self.t)
    }

    /// Largest attainable normalized q-norm: `n^{1/p - 1/q}`, reached by a
    /// single-coordinate vector.
    pub fn geometric_cap(&self) -> f64 {
        geometric_cap(self.p, self.q, self.n)
    }

    /// Upper envelope claimed for t above the threshold.
    pub fn upper_valid(&self) -> bool {
        self.t > threshold_t(self.p, self.q, self.n)
    }

    /// Lower envelope claimed on `2 <= t <= cap / 2`.
    pub fn lower_valid(&self) -> bool {
        2.0 <= self.t && self.t <= 0.5 * self.geometric_cap()
    }
}

pub fn exponent_arg(p: f64, q: f64, n: u64, t: f64) -> f64 {
    let n_factor = if q.is_infinite() {
        1.0
    } else {
        (n as f64).powf(p / q)
    };
    t.powf(p) * n_factor
}

pub fn geometric_cap(p: f64, q: f64, n: u64) -> f64 {
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    (n as f64).powf(1.0 / p - inv_q)
}

/// Envelope threshold `T(p, q, n) = tau * min(q, ln n)^{1/p}`, with the
/// better constant in the well-separated regime q > 2p and the calibrated
/// generic one otherwise.
pub fn threshold_t(p: f64, q: f64, n: u64) -> f64 {
    let tau = if q > 2.0 * p { TAU } else { TAU_GENERIC };
    tau * q.min((n as f64).ln()).powf(1.0 / p)
}

/// Analytic decay envelope for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEnvelope {
    /// `t^p n^{p/q}`.
    pub exponent_arg: f64,
    /// `exp(-C(p,q) * exponent_arg)`, the slower-decaying side.
    pub lower: f64,
    /// `exp(-c(p,q) * exponent_arg)`; identically 0 past the geometric cap.
    pub upper: f64,
    pub c_used: f64,
    pub big_c_used: f64,
    pub t_threshold: f64,
    pub upper_valid: bool,
    pub lower_valid: bool,
    /// Set when q <= 2p: the rate constants fall back to the generic
    /// calibration instead of the well-separated-regime values.
    pub generic_constants: bool,
}

/// Fill the envelope for a query. Rates: `c = GAMMA_LOWER min(1, q/p - 1)/p`,
/// `C = GAMMA_UPPER / p` (the `min` keeps the upper envelope honest as
/// q approaches p, where the decay rate collapses like q/p - 1).
pub fn bound_envelope(query: &TailQuery) -> BoundEnvelope {
    let TailQuery { p, q, n, t, .. } = *query;
    let arg = query.exponent_arg();
    let cap = query.geometric_cap();
    let ratio_margin = if q.is_infinite() { 1.0 } else { (q / p - 1.0).min(1.0) };
    let c_used = GAMMA_LOWER * ratio_margin / p;
    let big_c_used = GAMMA_UPPER / p;
    let (lower, upper) = if t > cap {
        (0.0, 0.0) // the event is geometrically impossible
    } else {
        ((-big_c_used * arg).exp(), (-c_used * arg).exp())
    };
    BoundEnvelope {
        exponent_arg: arg,
        lower,
        upper,
        c_used,
        big_c_used,
        t_threshold: threshold_t(p, q, n),
        upper_valid: query.upper_valid(),
        lower_valid: query.lower_valid(),
        generic_constants: !(q > 2.0 * p),
    }
}

/// One Monte Carlo estimate with its exact binomial interval and stream
/// provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub chunks: u64,
}

// ---------------------------------------------------------------------------
// sampling kernel

/// Per-coordinate power evaluation for `G^{q/p}`, resolved once per campaign
/// so the hot loop stays on multiplications for the common exponents.
#[derive(Debug, Clone, Copy)]
enum PowStrategy {
    /// q = p.
    Same,
    /// integer q/p.
    Int(i32),
    /// half-integer q/p: `G^k sqrt(G)`.
    IntSqrt(i32),
    /// general exponent.
    Gen(f64),
    /// q = inf: track the running max instead of a sum.
    Max,
}

#[derive(Debug, Clone, Copy)]
struct Kernel {
    shape: f64,
    n: u64,
    prefactor: f64,
    inv_p: f64,
    inv_q: f64,
    strategy: PowStrategy,
    radial: bool,
}

impl Kernel {
    fn new(p: f64, q: f64, n: u64, body: Body) -> Kernel {
        let strategy = if q.is_infinite() {
            PowStrategy::Max
        } else {
            let gamma = q / p;
            let rounded = gamma.round();
            let half_rounded = (2.0 * gamma).round();
            if gamma == 1.0 {
                PowStrategy::Same
            } else if (gamma - rounded).abs() < 1e-12 && (2.0..=32.0).contains(&rounded) {
                PowStrategy::Int(rounded as i32)
            } else if (2.0 * gamma - half_rounded).abs() < 1e-12 && half_rounded <= 64.0 {
                PowStrategy::IntSqrt(((half_rounded as i32) - 1) / 2)
            } else {
                PowStrategy::Gen(gamma)
            }
        };
        let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
        Kernel {
            shape: 1.0 / p,
            n,
            prefactor: (n as f64).powf(1.0 / p - inv_q),
            inv_p: 1.0 / p,
            inv_q,
            strategy,
            radial: body == Body::NuBall,
        }
    }

    /// One draw of the normalized-q-norm statistic.
    #[inline]
    fn statistic(&self, stream: &mut Stream) -> f64 {
        let mut sum_p = 0.0f64;
        let mut acc = 0.0f64;
        for _ in 0..self.n {
            let g = crate::pexp::sample_gamma(self.shape, stream);
            sum_p += g;
            acc = match self.strategy {
                PowStrategy::Same => 0.0,
                PowStrategy::Int(k) => acc + g.powi(k),
                PowStrategy::IntSqrt(k) => acc + g.powi(k) * g.sqrt(),
                PowStrategy::Gen(gamma) => acc + g.powf(gamma),
                PowStrategy::Max => acc.max(g),
            };
        }
        let stat = match self.strategy {
            PowStrategy::Same => 1.0,
            PowStrategy::Max => self.prefactor * (acc / sum_p).powf(self.inv_p),
            _ => self.prefactor * acc.powf(self.inv_q) / sum_p.powf(self.inv_p),
        };
        if self.radial {
            stat * (stream.u01_open().ln() / self.n as f64).exp()
        } else {
            stat
        }
    }
}

// ---------------------------------------------------------------------------
// estimation

fn validate_campaign(trials: u64, chunks: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1".to_string()));
    }
    if chunks == 0 {
        return Err(Error::domain("chunks must be >= 1".to_string()));
    }
    Ok(())
}

/// Estimate several thresholds of the same `(p, q, n, body)` family from one
/// shared draw population. Estimates are returned in the order the
/// thresholds were given; the draws are identical to `estimate_tail` run
/// separately with the same `(trials, seed, chunks)`.
pub fn estimate_tail_multi(
    p: f64,
    q: f64,
    n: u64,
    body: Body,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
    chunks: u64,
) -> Result<Vec<TailEstimate>> {
    for t in thresholds {
        TailQuery::new(p, q, n, *t, body)?;
    }
    validate_campaign(trials, chunks)?;
    if thresholds.is_empty() {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..thresholds.len()).collect();
    order.sort_by(|a, b| thresholds[*a].partial_cmp(&thresholds[*b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|i| thresholds[*i]).collect();

    let kernel = Kernel::new(p, q, n, body);
    let sizes = chunk_sizes(trials, chunks);
    // bucket[k] counts draws whose statistic exceeds exactly the k smallest
    // thresholds; merging is elementwise integer addition, order-free
    let buckets: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = Stream::for_chunk(seed, c);
            let mut local = vec![0u64; sorted.len() + 1];
            for _ in 0..sizes[c as usize] {
                let stat = kernel.statistic(&mut stream);
                let k = sorted.partition_point(|thr| *thr < stat);
                local[k] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; sorted.len() + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    // hits for threshold j = draws exceeding more than j thresholds
    let mut suffix = 0u64;
    let mut hits_sorted = vec![0u64; sorted.len()];
    for j in (0..sorted.len()).rev() {
        suffix += buckets[j + 1];
        hits_sorted[j] = suffix;
    }
    let mut out = vec![
        TailEstimate {
            hits: 0,
            trials,
            p_hat: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            seed,
            chunks
        };
        thresholds.len()
    ];
    for (rank, orig) in order.iter().enumerate() {
        out[*orig] = finish_estimate(hits_sorted[rank], trials, seed, chunks)?;
    }
    Ok(out)
}

fn finish_estimate(hits: u64, trials: u64, seed: u64, chunks: u64) -> Result<TailEstimate> {
    let (ci_low, ci_high) = clopper_pearson(hits, trials, crate::constants::CONFIDENCE)?;
    Ok(TailEstimate {
        hits,
        trials,
        p_hat: hits as f64 / trials as f64,
        ci_low,
        ci_high,
        seed,
        chunks,
    })
}

/// Estimate one tail query. Deterministic in `(query, trials, seed, chunks)`
/// regardless of worker parallelism.
pub fn estimate_tail(query: &TailQuery, trials: u64, seed: u64, chunks: u64) -> Result<TailEstimate> {
    Ok(estimate_tail_multi(
        query.p,
        query.q,
        query.n,
        query.body,
        &[query.t],
        trials,
        seed,
        chunks,
    )?
    .remove(0))
}

/// Specialization of [`estimate_tail`] to the sup norm (q = inf): the
/// statistic degenerates to `n^{1/p} max_i x_i / S` and the envelope argument
/// to `t^p`.
pub fn infinity_norm_tail(p: f64, n: u64, t: f64, trials: u64, seed: u64, chunks: u64) -> Result<TailEstimate> {
    let query = TailQuery::new(p, f64::INFINITY, n, t, Body::MuSphere)?;
    estimate_tail(&query, trials, seed, chunks)
}

// ---------------------------------------------------------------------------
// sorted sample cache

/// A sorted population of statistic draws for one `(p, q, n, body)` family.
/// Re-thresholding the same population makes survival estimates monotone by
/// construction and turns a t-grid or a radial integral into binary searches
/// instead of fresh campaigns.
#[derive(Debug, Clone)]
pub struct RatioSampleCache {
    pub p: f64,
    pub q: f64,
    pub n: u64,
    pub body: Body,
    pub seed: u64,
    pub chunks: u64,
    sorted: Vec<f64>,
}

impl RatioSampleCache {
    pub fn build(
        p: f64,
        q: f64,
        n: u64,
        body: Body,
        trials: u64,
        seed: u64,
        chunks: u64,
    ) -> Result<RatioSampleCache> {
        TailQuery::new(p, q.max(p * (1.0 + 1e-9)), n, 1.0, body)?; // validate p, n
        validate_campaign(trials, chunks)?;
        let kernel = Kernel::new(p, q, n, body);
        let sizes = chunk_sizes(trials, chunks);
        let mut per_chunk: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut stream = Stream::for_chunk(seed, c);
                (0..sizes[c as usize])
                    .map(|_| kernel.statistic(&mut stream))
                    .collect()
            })
            .collect();
        let mut sorted = Vec::with_capacity(trials as usize);
        for chunk in per_chunk.iter_mut() {
            sorted.append(chunk);
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("statistic is never NaN"));
        Ok(RatioSampleCache {
            p,
            q,
            n,
            body,
            seed,
            chunks,
            sorted,
        })
    }

    pub fn trials(&self) -> u64 {
        self.sorted.len() as u64
    }

    pub fn survival_count(&self, t: f64) -> u64 {
        (self.sorted.len() - self.sorted.partition_point(|v| *v <= t)) as u64
    }

    /// Survival estimate at one threshold, identical in law (and in draws)
    /// to a fresh `estimate_tail` with the same campaign parameters.
    pub fn survival(&self, t: f64) -> Result<TailEstimate> {
        finish_estimate(self.survival_count(t), self.trials(), self.seed, self.chunks)
    }

    /// The sorted draw values.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }
}

// ---------------------------------------------------------------------------
// exponent fitting

/// One grid point of an exponent fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPoint {
    pub t: f64,
    pub exponent_arg: f64,
    pub estimate: TailEstimate,
    pub upper_valid: bool,
    pub lower_valid: bool,
    pub admissible: bool,
    pub excluded_reason: Option<String>,
}

/// Least-squares decay fit over the admissible grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<FitPoint>,
    pub admissible_points: usize,
}

/// Fit the decay exponent: least-squares slope of `-ln p_hat` against
/// `t^p n^{p/q}` over grid points with at least [`MIN_FIT_HITS`] hits
/// (others are excluded and reported). With `enforce_window` the whole grid
/// must sit inside `[max(2, T), cap/2]`.
pub fn fit_exponent(
    p: f64,
    q: f64,
    n: u64,
    t_grid: &[f64],
    trials: u64,
    seed: u64,
    chunks: u64,
    enforce_window: bool,
) -> Result<ExponentFit> {
    if enforce_window {
        let t_lo = threshold_t(p, q, n).max(2.0);
        let t_hi = 0.5 * geometric_cap(p, q, n);
        for t in t_grid {
            if !(*t >= t_lo && *t <= t_hi) {
                return Err(Error::domain(format!(
                    "fit grid point t={t} outside window [{t_lo}, {t_hi}]"
                )));
            }
        }
    }
    let estimates = estimate_tail_multi(p, q, n, Body::MuSphere, t_grid, trials, seed, chunks)?;
    fit_from_estimates(p, q, n, t_grid, &estimates)
}

/// Fit from already-computed estimates (used by the CLI sweep so the fit
/// reuses the sweep's own rows).
pub fn fit_from_estimates(
    p: f64,
    q: f64,
    n: u64,
    t_grid: &[f64],
    estimates: &[TailEstimate],
) -> Result<ExponentFit> {
    let mut points = Vec::with_capacity(t_grid.len());
    for (t, est) in t_grid.iter().zip(estimates) {
        let query = TailQuery::new(p, q, n, *t, Body::MuSphere)?;
        let excluded_reason = if est.hits < MIN_FIT_HITS {
            Some(format!("hits {} below minimum {}", est.hits, MIN_FIT_HITS))
        } else if est.hits == est.trials {
            Some("saturated estimate".to_string())
        } else {
            None
        };
        points.push(FitPoint {
            t: *t,
            exponent_arg: query.exponent_arg(),
            estimate: *est,
            upper_valid: query.upper_valid(),
            lower_valid: query.lower_valid(),
            admissible: excluded_reason.is_none(),
            excluded_reason,
        });
    }
    let admissible: Vec<&FitPoint> = points.iter().filter(|pt| pt.admissible).collect();
    if admissible.len() < 2 {
        let count = admissible.len();
        return Err(Error::InsufficientData {
            admissible: count,
            table: points,
        });
    }
    let xs: Vec<f64> = admissible.iter().map(|pt| pt.exponent_arg).collect();
    let ys: Vec<f64> = admissible
        .iter()
        .map(|pt| -(pt.estimate.p_hat.ln()))
        .collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let count = admissible.len();
    Ok(ExponentFit {
        slope,
        intercept: my - slope * mx,
        points,
        admissible_points: count,
    })
}

/// The acceptance-grid sandwich window `[C_STAR_LOW, C_STAR_HIGH]` as a pair,
/// for reporting.
pub fn sandwich_window() -> (f64, f64) {
    (C_STAR_LOW, C_STAR_HIGH)
}
