//! Run configuration assembled from defaults, a JSON config file, and flags.

use cascade_scope::ensemble::EnsembleConfig;
use cascade_scope::{Error, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Which artifact kinds a command writes. `All` keeps every output in the
/// command's contract; the narrower choices act as a filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    All,
    Csv,
    Json,
    Svg,
}

/// Fully resolved parameters for one run. Every report embeds this record
/// so outputs are self-describing and reruns are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub r0: f64,
    pub t_horizon: f64,
    pub k1: usize,
    pub k2: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub delta: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    /// Intense-region gradient threshold. None selects the median of
    /// |grad u| over the first snapshot at run time.
    pub m: Option<f64>,
    pub scales: Vec<f64>,
    pub seed: u64,
    pub budget: usize,
    pub dim: usize,
    pub input: Option<String>,
    pub out_dir: String,
    pub format: OutputKind,
}

impl RunConfig {
    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            r0: self.r0,
            delta: self.delta,
            rho1: self.rho1,
            rho2: self.rho2,
            k1: self.k1,
            k2: self.k2,
            dim: self.dim,
        }
    }

    /// True when artifacts of this kind should be written.
    pub fn wants(&self, kind: OutputKind) -> bool {
        self.format == OutputKind::All || self.format == kind
    }
}

/// Partial overrides. The JSON config file and the command line both parse
/// into this shape; keys mirror the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    #[serde(rename = "T")]
    pub t_horizon: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: Option<usize>,
    #[serde(rename = "K2")]
    pub k2: Option<usize>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "C1")]
    pub c1: Option<f64>,
    #[serde(rename = "C2")]
    pub c2: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub scales: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub dim: Option<usize>,
    #[serde(rename = "in")]
    pub input: Option<String>,
    pub out: Option<String>,
    pub format: Option<OutputKind>,
}

impl ConfigPatch {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::InvalidParameter(format!("config file {}: {e}", path.display()))
        })
    }

    /// Returns self with every field set in `over` replacing this one's.
    pub fn overlay(mut self, over: ConfigPatch) -> ConfigPatch {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(
            r0, t_horizon, k1, k2, rho1, rho2, delta, beta, c1, c2, m, scales, seed, budget,
            dim, input, out, format
        );
        self
    }
}

/// Per-command fallbacks for the fields whose natural default depends on
/// what the command does.
#[derive(Debug, Clone, Copy)]
pub struct CommandDefaults {
    pub scales: ScalesDefault,
    pub budget: usize,
}

/// Default scale list when neither flag nor file provides one.
#[derive(Debug, Clone, Copy)]
pub enum ScalesDefault {
    /// The demo sweep range, forty log-spaced scales over [1e-2, 1e1].
    Demo,
    /// Five log-spaced scales over [R0/16, R0].
    DyadicOfR0,
    /// The single scale R0/10.
    TenthOfR0,
}

fn default_budgets(dim: usize) -> Result<(usize, usize)> {
    match dim {
        1 => Ok((3, 3)),
        2 => Ok((12, 16)),
        3 => Ok((30, 50)),
        _ => Err(Error::InvalidParameter(format!("dimension {dim} out of range"))),
    }
}

/// Materializes the full configuration for a run and validates every value
/// against the module preconditions before any computation starts.
pub fn resolve(patch: &ConfigPatch, defaults: &CommandDefaults, dim: usize) -> Result<RunConfig> {
    let r0 = patch.r0.unwrap_or(10.0);
    let (k1_default, k2_default) = default_budgets(dim)?;
    let scales_spec = match &patch.scales {
        Some(s) => s.clone(),
        None => match defaults.scales {
            ScalesDefault::Demo => "1e-2:1e1:40log".to_string(),
            ScalesDefault::DyadicOfR0 => format!("{}:{}:5log", r0 / 16.0, r0),
            ScalesDefault::TenthOfR0 => format!("{}", r0 / 10.0),
        },
    };
    let config = RunConfig {
        r0,
        t_horizon: patch.t_horizon.unwrap_or(100.0),
        k1: patch.k1.unwrap_or(k1_default),
        k2: patch.k2.unwrap_or(k2_default),
        rho1: patch.rho1.unwrap_or(0.75),
        rho2: patch.rho2.unwrap_or(0.75),
        delta: patch.delta.unwrap_or(1.0),
        beta: patch.beta.unwrap_or(0.1),
        c1: patch.c1.unwrap_or(1.0),
        c2: patch.c2.unwrap_or(1.0),
        m: patch.m,
        scales: parse_scales(&scales_spec)?,
        seed: patch.seed.unwrap_or(0),
        budget: patch.budget.unwrap_or(defaults.budget),
        dim,
        input: patch.input.clone(),
        out_dir: patch.out.clone().unwrap_or_else(|| "out".to_string()),
        format: patch.format.unwrap_or(OutputKind::All),
    };
    config.ensemble().validate()?;
    if !(config.t_horizon > 0.0 && config.t_horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "T = {} must be positive",
            config.t_horizon
        )));
    }
    if !(config.beta > 0.0 && config.beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta = {} must lie in (0, 1)",
            config.beta
        )));
    }
    for (name, v) in [("C1", config.c1), ("C2", config.c2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
        }
    }
    if let Some(m) = config.m {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("M = {m} must be nonnegative")));
        }
    }
    Ok(config)
}

/// Parses a scale list: `lo:hi:Nlog`, `lo:hi:Nlin`, or comma-separated
/// values. Range endpoints are included.
pub fn parse_scales(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::InvalidParameter("empty scale list".into()));
    }
    let bad = |msg: &str| Error::InvalidParameter(format!("scales {spec:?}: {msg}"));
    let scales = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:COUNTlog or lo:hi:COUNTlin"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad("bad lower bound"))?;
        let hi: f64 = parts[1].parse().map_err(|_| bad("bad upper bound"))?;
        let (count_str, log) = if let Some(s) = parts[2].strip_suffix("log") {
            (s, true)
        } else if let Some(s) = parts[2].strip_suffix("lin") {
            (s, false)
        } else {
            return Err(bad("count must end in log or lin"));
        };
        let count: usize = count_str.parse().map_err(|_| bad("bad count"))?;
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(bad("need 0 < lo <= hi"));
        }
        if count == 1 {
            vec![lo]
        } else {
            let denom = (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if log {
                        lo * (hi / lo).powf(i as f64 / denom)
                    } else {
                        lo + (hi - lo) * i as f64 / denom
                    }
                })
                .collect()
        }
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<f64>>>()?
    };
    for &r in &scales {
        if !(r > 0.0 && r.is_finite()) {
            return Err(bad("every scale must be positive and finite"));
        }
    }
    Ok(scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn demo_defaults() -> CommandDefaults {
        CommandDefaults { scales: ScalesDefault::Demo, budget: 64 }
    }

    #[test]
    fn log_range_hits_both_endpoints_with_the_requested_count() {
        let s = parse_scales("1e-2:1e1:40log").unwrap();
        assert_eq!(s.len(), 40);
        assert_relative_eq!(s[0], 1e-2, max_relative = 1e-12);
        assert_relative_eq!(s[39], 1e1, max_relative = 1e-12);
        for w in s.windows(2) {
            assert!(w[1] > w[0]);
        }
        let ratio = s[1] / s[0];
        for w in s.windows(2) {
            assert_relative_eq!(w[1] / w[0], ratio, max_relative = 1e-9);
        }
    }

    #[test]
    fn linear_range_and_comma_lists_parse() {
        let s = parse_scales("1:3:3lin").unwrap();
        assert_eq!(s, vec![1.0, 2.0, 3.0]);
        let s = parse_scales("0.5, 2.5,7").unwrap();
        assert_eq!(s, vec![0.5, 2.5, 7.0]);
        assert_eq!(parse_scales("0.4:0.4:1log").unwrap(), vec![0.4]);
    }

    #[test]
    fn malformed_scale_lists_are_rejected() {
        for spec in ["", "1:2", "1:2:5", "1:2:0log", "-1:2:3log", "2:1:3lin", "a,b"] {
            assert!(parse_scales(spec).is_err(), "{spec} should fail");
        }
    }

    #[test]
    fn flags_override_file_values() {
        let file = ConfigPatch { r0: Some(4.0), seed: Some(9), ..Default::default() };
        let flags = ConfigPatch { r0: Some(2.0), ..Default::default() };
        let cfg = resolve(&file.overlay(flags), &demo_defaults(), 1).unwrap();
        assert_eq!(cfg.r0, 2.0);
        assert_eq!(cfg.seed, 9);
        assert_eq!((cfg.k1, cfg.k2), (3, 3));
    }

    #[test]
    fn resolution_validates_before_running() {
        let patch = ConfigPatch { rho2: Some(1.5), ..Default::default() };
        assert!(resolve(&patch, &demo_defaults(), 1).is_err());
        let patch = ConfigPatch { beta: Some(1.0), ..Default::default() };
        assert!(resolve(&patch, &demo_defaults(), 3).is_err());
    }

    #[test]
    fn dimension_picks_the_cover_budget_defaults() {
        let cfg = resolve(&ConfigPatch::default(), &demo_defaults(), 3).unwrap();
        assert_eq!((cfg.k1, cfg.k2), (30, 50));
    }
}
