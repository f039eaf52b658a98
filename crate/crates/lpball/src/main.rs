//! Batch experiment runner: reproducible sampling and tail-estimation
//! campaigns over parameter grids, emitted as flat CSV or JSON lines.

use clap::{Args, Parser, Subcommand};
use lpball::config::ExperimentConfig;
use lpball::error::Error;
use lpball::estimator::{
    bound_envelope, estimate_tail_multi, fit_from_estimates, RatioSampleCache, TailQuery,
};
use lpball::geometry::{sample_ball, sample_full_sphere, sample_quadrant_sphere, Region, SpherePoint};
use lpball::output::{Field, OutputFormat, RowWriter};
use lpball::radial::nu_from_mu;
use lpball::special::inc_gamma_p;
use lpball::stats::{chi_square_independence, ks_critical_value, ks_p_value, ks_statistic_against_cdf};
use lpball::stream::{chunk_sizes, Stream};
use std::io::Write;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "lpball",
    about = "Sampling and tail-probability campaigns on l_p spheres and L_p balls",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the chunk pool (results never depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Config file in flat `key = value` form; flags override its fields.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    #[command(flatten)]
    fields: FieldFlags,
}

/// Every config field, mirrored as a flag. Values use the same syntax as the
/// config file (lists comma-separated, `inf` allowed in q).
#[derive(Args)]
struct FieldFlags {
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    t_min: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    t_points: Option<String>,
    #[arg(long)]
    t_spacing: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    chunks: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    count: Option<String>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    convention: Option<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    draws: Option<String>,
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    fit: Option<String>,
    #[arg(long)]
    require_fit: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate tail probabilities over a (p, q, n, t) grid, with envelopes
    /// and an exponent-fit summary row per (p, q, n).
    TailSweep,
    /// Dump raw sphere or ball samples.
    Sample,
    /// Cross-check ball tails: radial integration of sphere estimates
    /// against direct ball sampling.
    RadialCheck,
    /// Run the distributional test battery (KS and chi-square).
    DistTests,
    /// Analytic envelopes only; no sampling.
    Envelope,
    /// Print the frozen calibrated constants with provenance.
    PrintConstants,
}

fn main() {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("lpball: failed to size worker pool: {e}");
            std::process::exit(1);
        }
    }
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("lpball: {e}");
            std::process::exit(match e {
                Error::Config { .. } => 2,
                Error::Io(_) => 3,
                Error::InsufficientData { .. } => 4,
                _ => 1,
            });
        }
    }
}

fn merged_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::parse_str(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let f = &cli.fields;
    let overrides: [(&str, &Option<String>); 22] = [
        ("p", &f.p),
        ("q", &f.q),
        ("n", &f.n),
        ("body", &f.body),
        ("t_min", &f.t_min),
        ("t_max", &f.t_max),
        ("t_points", &f.t_points),
        ("t_spacing", &f.t_spacing),
        ("trials", &f.trials),
        ("seed", &f.seed),
        ("chunks", &f.chunks),
        ("output", &f.output),
        ("format", &f.format),
        ("count", &f.count),
        ("region", &f.region),
        ("convention", &f.convention),
        ("order", &f.order),
        ("rule", &f.rule),
        ("draws", &f.draws),
        ("level", &f.level),
        ("fit", &f.fit),
        ("require_fit", &f.require_fit),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v, &format!("flag --{key}"))?;
        }
    }
    Ok(cfg)
}

fn open_output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, Error> {
    if cfg.output == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        Ok(Box::new(std::fs::File::create(&cfg.output)?))
    }
}

/// Per-combination sub-seed so every (p, q, n) cell of a sweep runs on its
/// own stream family. Pure arithmetic in (seed, combo index, role).
fn derive_seed(seed: u64, combo: u64, role: u64) -> u64 {
    seed.wrapping_add(combo.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(role.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

fn cartesian(cfg: &ExperimentConfig) -> Vec<(f64, f64, u64)> {
    let mut combos = Vec::new();
    for p in &cfg.p {
        for q in &cfg.q {
            for n in &cfg.n {
                combos.push((*p, *q, *n));
            }
        }
    }
    combos
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = merged_config(&cli)?;
    match cli.command {
        Command::TailSweep => tail_sweep(&cfg),
        Command::Sample => sample_dump(&cfg),
        Command::RadialCheck => radial_check(&cfg),
        Command::DistTests => dist_tests(&cfg),
        Command::Envelope => envelope_only(&cfg),
        Command::PrintConstants => {
            let mut out = open_output(&cfg)?;
            for (name, value, provenance) in lpball::constants::provenance() {
                writeln!(out, "{name} = {value}  # {provenance}")?;
            }
            Ok(())
        }
    }
}

const SWEEP_COLUMNS: [&str; 24] = [
    "row_type", "p", "q", "n", "t", "body", "hits", "trials", "p_hat", "ci_low", "ci_high",
    "exponent_arg", "env_lower", "env_upper", "c_used", "big_c_used", "t_threshold",
    "upper_valid", "lower_valid", "slope", "fit_points", "seed", "chunks", "wall_time_s",
];

fn tail_sweep(cfg: &ExperimentConfig) -> Result<(), Error> {
    cfg.require_grids()?;
    let (trials, seed, chunks) = cfg.require_campaign()?;
    let t_grid = cfg.t_grid()?;
    let mut writer = RowWriter::new(open_output(cfg)?, cfg.format, cols(&SWEEP_COLUMNS));
    let mut fit_failures = 0usize;
    for (combo, (p, q, n)) in cartesian(cfg).into_iter().enumerate() {
        let combo_seed = derive_seed(seed, combo as u64, 0);
        let started = Instant::now();
        let estimates = estimate_tail_multi(p, q, n, cfg.body, &t_grid, trials, combo_seed, chunks)?;
        let wall = started.elapsed().as_secs_f64();
        for (t, est) in t_grid.iter().zip(&estimates) {
            let query = TailQuery::new(p, q, n, *t, cfg.body)?;
            let env = bound_envelope(&query);
            writer.write_row(&[
                Field::str("data"),
                Field::F64(p),
                Field::F64(q),
                Field::U64(n),
                Field::F64(*t),
                Field::str(cfg.body.as_str()),
                Field::U64(est.hits),
                Field::U64(est.trials),
                Field::F64(est.p_hat),
                Field::F64(est.ci_low),
                Field::F64(est.ci_high),
                Field::F64(env.exponent_arg),
                Field::F64(env.lower),
                Field::F64(env.upper),
                Field::F64(env.c_used),
                Field::F64(env.big_c_used),
                Field::F64(env.t_threshold),
                Field::Bool(env.upper_valid),
                Field::Bool(env.lower_valid),
                Field::Empty,
                Field::Empty,
                Field::U64(combo_seed),
                Field::U64(chunks),
                Field::F64(wall),
            ])?;
        }
        if cfg.fit && t_grid.len() >= 2 {
            let fit_fields = match fit_from_estimates(p, q, n, &t_grid, &estimates) {
                Ok(fit) => (Field::F64(fit.slope), Field::U64(fit.admissible_points as u64)),
                Err(Error::InsufficientData { admissible, .. }) => {
                    fit_failures += 1;
                    eprintln!(
                        "lpball: (p={p}, q={q}, n={n}): {admissible} admissible points, no exponent fit"
                    );
                    (Field::Empty, Field::U64(admissible as u64))
                }
                Err(other) => return Err(other),
            };
            writer.write_row(&[
                Field::str("fit"),
                Field::F64(p),
                Field::F64(q),
                Field::U64(n),
                Field::Empty,
                Field::str(cfg.body.as_str()),
                Field::Empty,
                Field::U64(trials),
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                Field::Empty,
                fit_fields.0,
                fit_fields.1,
                Field::U64(combo_seed),
                Field::U64(chunks),
                Field::F64(wall),
            ])?;
        }
    }
    writer.finish()?;
    if cfg.require_fit && fit_failures > 0 {
        return Err(Error::InsufficientData {
            admissible: 0,
            table: Vec::new(),
        });
    }
    Ok(())
}

fn sample_dump(cfg: &ExperimentConfig) -> Result<(), Error> {
    if cfg.p.len() != 1 || cfg.n.len() != 1 {
        return Err(Error::Config {
            location: "config".to_string(),
            message: "sample needs exactly one p and one n".to_string(),
        });
    }
    let (p, n) = (cfg.p[0], cfg.n[0]);
    let count = cfg.count.ok_or_else(|| Error::Config {
        location: "config".to_string(),
        message: "count is required".to_string(),
    })?;
    let seed = cfg.seed.ok_or_else(|| Error::Config {
        location: "config".to_string(),
        message: "seed is required (no implicit entropy)".to_string(),
    })?;
    let chunks = cfg.chunks.unwrap_or(1).max(1);
    let mut columns = vec!["sample_index".to_string()];
    columns.extend((0..n).map(|i| format!("c{i}")));
    columns.push("source_s".to_string());
    let mut writer = RowWriter::new(open_output(cfg)?, cfg.format, columns);
    let sizes = chunk_sizes(count, chunks);
    let mut index = 0u64;
    for (chunk, size) in sizes.iter().enumerate() {
        let mut stream = Stream::for_chunk(seed, chunk as u64);
        for _ in 0..*size {
            let pt: SpherePoint = match cfg.region {
                Region::QuadrantSphere => {
                    sample_quadrant_sphere(p, n, &mut stream)?.rescaled(cfg.convention)
                }
                Region::FullSphere => sample_full_sphere(p, n, &mut stream)?.rescaled(cfg.convention),
                Region::FullBall => sample_ball(p, n, cfg.convention, &mut stream)?,
            };
            let mut row = Vec::with_capacity(n as usize + 2);
            row.push(Field::U64(index));
            row.extend(pt.coords.iter().map(|c| Field::F64(*c)));
            row.push(Field::F64(pt.source_s));
            writer.write_row(&row)?;
            index += 1;
        }
    }
    writer.finish()
}

const RADIAL_COLUMNS: [&str; 19] = [
    "p", "q", "n", "t", "trials", "order", "rule", "method", "nu_radial", "band_low", "band_high",
    "quadrature_error", "nu_direct", "ci_low", "ci_high", "consistent", "mu_seed", "nu_seed",
    "wall_time_s",
];

fn radial_check(cfg: &ExperimentConfig) -> Result<(), Error> {
    cfg.require_grids()?;
    let (trials, seed, chunks) = cfg.require_campaign()?;
    let t_grid = cfg.t_grid()?;
    let order = cfg.order as usize;
    let mut writer = RowWriter::new(open_output(cfg)?, cfg.format, cols(&RADIAL_COLUMNS));
    for (combo, (p, q, n)) in cartesian(cfg).into_iter().enumerate() {
        let mu_seed = derive_seed(seed, combo as u64, 0);
        let nu_seed = derive_seed(seed, combo as u64, 1);
        let started = Instant::now();
        let cache = RatioSampleCache::build(p, q, n, lpball::estimator::Body::MuSphere, trials, mu_seed, chunks)?;
        let direct = estimate_tail_multi(
            p,
            q,
            n,
            lpball::estimator::Body::NuBall,
            &t_grid,
            trials,
            nu_seed,
            chunks,
        )?;
        let wall = started.elapsed().as_secs_f64();
        for (t, d) in t_grid.iter().zip(&direct) {
            let radial = nu_from_mu(n, *t, &cache, order, cfg.rule)?;
            let consistent = radial.band_high >= d.ci_low && d.ci_high >= radial.band_low;
            writer.write_row(&[
                Field::F64(p),
                Field::F64(q),
                Field::U64(n),
                Field::F64(*t),
                Field::U64(trials),
                Field::U64(order as u64),
                Field::str(cfg.rule.as_str()),
                Field::str("exact-atoms"),
                Field::F64(radial.value),
                Field::F64(radial.band_low),
                Field::F64(radial.band_high),
                Field::F64(radial.quadrature_error),
                Field::F64(d.p_hat),
                Field::F64(d.ci_low),
                Field::F64(d.ci_high),
                Field::Bool(consistent),
                Field::U64(mu_seed),
                Field::U64(nu_seed),
                Field::F64(wall),
            ])?;
        }
    }
    writer.finish()
}

const DIST_COLUMNS: [&str; 10] = [
    "test", "p", "n", "draws", "statistic", "critical_value", "p_value", "pass", "seed",
    "wall_time_s",
];

fn dist_tests(cfg: &ExperimentConfig) -> Result<(), Error> {
    if cfg.p.is_empty() || cfg.n.is_empty() {
        return Err(Error::Config {
            location: "config".to_string(),
            message: "p and n lists must be nonempty".to_string(),
        });
    }
    let draws = cfg.draws.ok_or_else(|| Error::Config {
        location: "config".to_string(),
        message: "draws is required".to_string(),
    })?;
    let seed = cfg.seed.ok_or_else(|| Error::Config {
        location: "config".to_string(),
        message: "seed is required (no implicit entropy)".to_string(),
    })?;
    let level = cfg.level;
    let mut writer = RowWriter::new(open_output(cfg)?, cfg.format, cols(&DIST_COLUMNS));
    let mut combo = 0u64;
    for p in &cfg.p {
        for n in &cfg.n {
            let (p, n) = (*p, *n);
            let started = Instant::now();
            let mut stream = Stream::for_chunk(derive_seed(seed, combo, 0), 0);
            combo += 1;

            // coordinate law: coords_0^p against its Beta CDF
            let mut coord = Vec::with_capacity(draws as usize);
            let mut source_s = Vec::with_capacity(draws as usize);
            for _ in 0..draws {
                let pt = sample_quadrant_sphere(p, n, &mut stream)?;
                coord.push(pt.coords[0].powf(p));
                source_s.push(pt.source_s);
            }
            let ks = ks_statistic_against_cdf(&coord, |x| {
                lpball::oracle::beta_coordinate_cdf(p, n, x.clamp(0.0, 1.0)).unwrap_or(f64::NAN)
            });
            let crit = ks_critical_value(draws, level);
            let pv = ks_p_value(ks, draws);
            write_dist_row(&mut writer, "coord_beta_ks", p, n, draws, ks, crit, pv, pv > level, seed, &started)?;

            // independence of direction and normalizer
            let chi = chi_square_independence(&source_s, &coord, 10)?;
            write_dist_row(
                &mut writer,
                "independence_chi2",
                p,
                n,
                draws,
                chi.statistic,
                f64::NAN,
                chi.p_value,
                chi.p_value > level,
                seed,
                &started,
            )?;

            // ball radial law
            let radial: Vec<f64> = (0..draws)
                .map(|_| {
                    let pt = sample_ball(p, n, lpball::geometry::Normalization::SmallEll, &mut stream)?;
                    let sum: f64 = pt.coords.iter().map(|c| c.abs().powf(p)).sum();
                    Ok(sum.powf(n as f64 / p))
                })
                .collect::<Result<_, Error>>()?;
            let ks = ks_statistic_against_cdf(&radial, |x| x.clamp(0.0, 1.0));
            let pv = ks_p_value(ks, draws);
            write_dist_row(&mut writer, "ball_radial_ks", p, n, draws, ks, crit, pv, pv > level, seed, &started)?;

            // sampler exactness: x^p is Gamma(1/p)
            let spec = lpball::pexp::PExponential::new(p)?;
            let powers: Vec<f64> = (0..draws).map(|_| spec.sample(&mut stream).powf(p)).collect();
            let ks = ks_statistic_against_cdf(&powers, |x| inc_gamma_p(1.0 / p, x.max(0.0)).unwrap_or(f64::NAN));
            let pv = ks_p_value(ks, draws);
            write_dist_row(&mut writer, "gamma_power_ks", p, n, draws, ks, crit, pv, pv > level, seed, &started)?;
        }
    }
    writer.finish()
}

#[allow(clippy::too_many_arguments)]
fn write_dist_row<W: Write>(
    writer: &mut RowWriter<W>,
    test: &str,
    p: f64,
    n: u64,
    draws: u64,
    statistic: f64,
    critical: f64,
    p_value: f64,
    pass: bool,
    seed: u64,
    started: &Instant,
) -> Result<(), Error> {
    writer.write_row(&[
        Field::str(test),
        Field::F64(p),
        Field::U64(n),
        Field::U64(draws),
        Field::F64(statistic),
        if critical.is_nan() { Field::Empty } else { Field::F64(critical) },
        Field::F64(p_value),
        Field::Bool(pass),
        Field::U64(seed),
        Field::F64(started.elapsed().as_secs_f64()),
    ])
}

const ENVELOPE_COLUMNS: [&str; 13] = [
    "p", "q", "n", "t", "exponent_arg", "env_lower", "env_upper", "c_used", "big_c_used",
    "t_threshold", "upper_valid", "lower_valid", "generic_constants",
];

fn envelope_only(cfg: &ExperimentConfig) -> Result<(), Error> {
    cfg.require_grids()?;
    let t_grid = cfg.t_grid()?;
    let mut writer = RowWriter::new(open_output(cfg)?, cfg.format, cols(&ENVELOPE_COLUMNS));
    for (p, q, n) in cartesian(cfg) {
        for t in &t_grid {
            let query = TailQuery::new(p, q, n, *t, cfg.body)?;
            let env = bound_envelope(&query);
            writer.write_row(&[
                Field::F64(p),
                Field::F64(q),
                Field::U64(n),
                Field::F64(*t),
                Field::F64(env.exponent_arg),
                Field::F64(env.lower),
                Field::F64(env.upper),
                Field::F64(env.c_used),
                Field::F64(env.big_c_used),
                Field::F64(env.t_threshold),
                Field::Bool(env.upper_valid),
                Field::Bool(env.lower_valid),
                Field::Bool(env.generic_constants),
            ])?;
        }
    }
    writer.finish()
}
