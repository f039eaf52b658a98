//! Experiment configuration: a flat key = value text format with
//! comma-separated lists, mirrored one-to-one by CLI flags. Everything that
//! feeds randomness (seed, chunk count) is explicit; there is no implicit
//! entropy anywhere.

use crate::error::{Error, Result};
use crate::estimator::Body;
use crate::geometry::{Normalization, Region};
use crate::output::OutputFormat;
use crate::radial::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

/// Union of the per-subcommand parameter sets. Subcommands validate the
/// fields they need; unused fields are simply ignored by them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub n: Vec<u64>,
    pub body: Body,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_points: u64,
    pub t_spacing: Spacing,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub chunks: Option<u64>,
    pub output: String,
    pub format: OutputFormat,
    pub count: Option<u64>,
    pub region: Region,
    pub convention: Normalization,
    pub order: u64,
    pub rule: QuadratureRule,
    pub draws: Option<u64>,
    pub level: f64,
    pub fit: bool,
    pub require_fit: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: Vec::new(),
            q: Vec::new(),
            n: Vec::new(),
            body: Body::MuSphere,
            t_min: None,
            t_max: None,
            t_points: 1,
            t_spacing: Spacing::Linear,
            trials: None,
            seed: None,
            chunks: None,
            output: "-".to_string(),
            format: OutputFormat::Csv,
            count: None,
            region: Region::QuadrantSphere,
            convention: Normalization::SmallEll,
            order: 64,
            rule: QuadratureRule::Trapezoid,
            draws: None,
            level: 0.001,
            fit: true,
            require_fit: false,
        }
    }
}

fn config_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        location: location.into(),
        message: message.into(),
    }
}

fn parse_f64(field: &str, loc: &str, raw: &str) -> Result<f64> {
    if raw == "inf" {
        return Ok(f64::INFINITY);
    }
    raw.parse::<f64>()
        .map_err(|e| config_err(format!("{loc}, field `{field}`"), format!("bad float `{raw}`: {e}")))
}

fn parse_u64(field: &str, loc: &str, raw: &str) -> Result<u64> {
    raw.parse::<u64>()
        .map_err(|e| config_err(format!("{loc}, field `{field}`"), format!("bad integer `{raw}`: {e}")))
}

fn parse_bool(field: &str, loc: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(config_err(
            format!("{loc}, field `{field}`"),
            format!("expected true/false, got `{raw}`"),
        )),
    }
}

fn list_f64(field: &str, loc: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',').map(|s| parse_f64(field, loc, s.trim())).collect()
}

fn list_u64(field: &str, loc: &str, raw: &str) -> Result<Vec<u64>> {
    raw.split(',').map(|s| parse_u64(field, loc, s.trim())).collect()
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment. `loc` names the source (file line
    /// or flag) for diagnostics.
    pub fn set(&mut self, key: &str, value: &str, loc: &str) -> Result<()> {
        match key {
            "p" => self.p = list_f64(key, loc, value)?,
            "q" => self.q = list_f64(key, loc, value)?,
            "n" => self.n = list_u64(key, loc, value)?,
            "body" => {
                self.body = match value {
                    "mu" => Body::MuSphere,
                    "nu" => Body::NuBall,
                    _ => return Err(config_err(loc, format!("body must be mu|nu, got `{value}`"))),
                }
            }
            "t_min" => self.t_min = Some(parse_f64(key, loc, value)?),
            "t_max" => self.t_max = Some(parse_f64(key, loc, value)?),
            "t_points" => self.t_points = parse_u64(key, loc, value)?,
            "t_spacing" => {
                self.t_spacing = match value {
                    "linear" => Spacing::Linear,
                    "log" => Spacing::Log,
                    _ => {
                        return Err(config_err(
                            loc,
                            format!("t_spacing must be linear|log, got `{value}`"),
                        ))
                    }
                }
            }
            "trials" => self.trials = Some(parse_u64(key, loc, value)?),
            "seed" => self.seed = Some(parse_u64(key, loc, value)?),
            "chunks" => self.chunks = Some(parse_u64(key, loc, value)?),
            "output" => self.output = value.to_string(),
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json-lines" => OutputFormat::JsonLines,
                    _ => {
                        return Err(config_err(
                            loc,
                            format!("format must be csv|json-lines, got `{value}`"),
                        ))
                    }
                }
            }
            "count" => self.count = Some(parse_u64(key, loc, value)?),
            "region" => {
                self.region = match value {
                    "quadrant-sphere" => Region::QuadrantSphere,
                    "full-sphere" => Region::FullSphere,
                    "full-ball" => Region::FullBall,
                    _ => {
                        return Err(config_err(
                            loc,
                            format!("region must be quadrant-sphere|full-sphere|full-ball, got `{value}`"),
                        ))
                    }
                }
            }
            "convention" => {
                self.convention = match value {
                    "small-ell" => Normalization::SmallEll,
                    "big-l" => Normalization::BigL,
                    _ => {
                        return Err(config_err(
                            loc,
                            format!("convention must be small-ell|big-l, got `{value}`"),
                        ))
                    }
                }
            }
            "order" => self.order = parse_u64(key, loc, value)?,
            "rule" => {
                self.rule = match value {
                    "trapezoid" => QuadratureRule::Trapezoid,
                    "gauss-legendre" => QuadratureRule::GaussLegendre,
                    _ => {
                        return Err(config_err(
                            loc,
                            format!("rule must be trapezoid|gauss-legendre, got `{value}`"),
                        ))
                    }
                }
            }
            "draws" => self.draws = Some(parse_u64(key, loc, value)?),
            "level" => self.level = parse_f64(key, loc, value)?,
            "fit" => self.fit = parse_bool(key, loc, value)?,
            "require_fit" => self.require_fit = parse_bool(key, loc, value)?,
            _ => return Err(config_err(loc, format!("unknown field `{key}`"))),
        }
        Ok(())
    }

    /// Parse a whole config file body.
    pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let loc = format!("line {}", idx + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(&loc, format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value.trim(), &loc)?;
        }
        Ok(cfg)
    }

    /// Serialize every field; `parse_str` of the result reproduces the
    /// config exactly (floats print in shortest round-trip form).
    pub fn to_kv_string(&self) -> String {
        let f = |x: &f64| {
            if x.is_infinite() {
                "inf".to_string()
            } else {
                format!("{x}")
            }
        };
        let join_f = |v: &[f64]| v.iter().map(f).collect::<Vec<_>>().join(", ");
        let join_u = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut push = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        if !self.p.is_empty() {
            push("p", join_f(&self.p));
        }
        if !self.q.is_empty() {
            push("q", join_f(&self.q));
        }
        if !self.n.is_empty() {
            push("n", join_u(&self.n));
        }
        push("body", self.body.as_str().to_string());
        if let Some(v) = self.t_min {
            push("t_min", f(&v));
        }
        if let Some(v) = self.t_max {
            push("t_max", f(&v));
        }
        push("t_points", self.t_points.to_string());
        push("t_spacing", self.t_spacing.as_str().to_string());
        if let Some(v) = self.trials {
            push("trials", v.to_string());
        }
        if let Some(v) = self.seed {
            push("seed", v.to_string());
        }
        if let Some(v) = self.chunks {
            push("chunks", v.to_string());
        }
        push("output", self.output.clone());
        push("format", self.format.as_str().to_string());
        if let Some(v) = self.count {
            push("count", v.to_string());
        }
        push(
            "region",
            match self.region {
                Region::QuadrantSphere => "quadrant-sphere",
                Region::FullSphere => "full-sphere",
                Region::FullBall => "full-ball",
            }
            .to_string(),
        );
        push(
            "convention",
            match self.convention {
                Normalization::SmallEll => "small-ell",
                Normalization::BigL => "big-l",
            }
            .to_string(),
        );
        push("order", self.order.to_string());
        push("rule", self.rule.as_str().to_string());
        if let Some(v) = self.draws {
            push("draws", v.to_string());
        }
        push("level", f(&self.level));
        push("fit", self.fit.to_string());
        push("require_fit", self.require_fit.to_string());
        out
    }

    /// The t grid described by (t_min, t_max, t_points, t_spacing).
    pub fn t_grid(&self) -> Result<Vec<f64>> {
        let lo = self
            .t_min
            .ok_or_else(|| config_err("config", "t_min is required"))?;
        let points = self.t_points;
        if points == 0 {
            return Err(config_err("config", "t_points must be >= 1"));
        }
        if points == 1 {
            return Ok(vec![lo]);
        }
        let hi = self
            .t_max
            .ok_or_else(|| config_err("config", "t_max is required when t_points > 1"))?;
        if !(hi >= lo) {
            return Err(config_err("config", format!("t_max {hi} < t_min {lo}")));
        }
        match self.t_spacing {
            Spacing::Linear => Ok((0..points)
                .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                .collect()),
            Spacing::Log => {
                if !(lo > 0.0) {
                    return Err(config_err("config", "log spacing requires t_min > 0"));
                }
                let (llo, lhi) = (lo.ln(), hi.ln());
                Ok((0..points)
                    .map(|k| (llo + (lhi - llo) * k as f64 / (points - 1) as f64).exp())
                    .collect())
            }
        }
    }

    /// Shared validation for sampling subcommands: nonempty grids, explicit
    /// seed and chunk count.
    pub fn require_campaign(&self) -> Result<(u64, u64, u64)> {
        let trials = self
            .trials
            .ok_or_else(|| config_err("config", "trials is required"))?;
        let seed = self
            .seed
            .ok_or_else(|| config_err("config", "seed is required (no implicit entropy)"))?;
        let chunks = self
            .chunks
            .ok_or_else(|| config_err("config", "chunks is required (no implicit entropy)"))?;
        if trials == 0 {
            return Err(config_err("config", "trials must be >= 1"));
        }
        if chunks == 0 {
            return Err(config_err("config", "chunks must be >= 1"));
        }
        Ok((trials, seed, chunks))
    }

    pub fn require_grids(&self) -> Result<()> {
        if self.p.is_empty() || self.q.is_empty() || self.n.is_empty() {
            return Err(config_err("config", "p, q and n lists must be nonempty"));
        }
        Ok(())
    }
}
