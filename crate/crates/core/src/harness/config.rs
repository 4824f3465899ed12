//! Sweep configuration: built-in defaults per experiment, an optional TOML
//! file, and command-line overrides, applied in that order.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::SystemDims;
use crate::error::{Error, Result};
use crate::estimator::{check_feasibility, AlsConfig};

use super::SweepPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    /// `None` writes to stdout.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// The axis swept besides SNR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "var", content = "values")]
pub enum SweepVariable {
    #[serde(rename = "snr")]
    Snr,
    N(Vec<usize>),
    P(Vec<usize>),
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Snr => "snr",
            SweepVariable::N(_) => "N",
            SweepVariable::P(_) => "P",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Base dimensions; a swept `N` or `P` replaces the corresponding field.
    pub dims: SystemDims,
    pub snr_grid_db: Vec<f64>,
    pub sweep: SweepVariable,
    pub trials: usize,
    pub base_seed: u64,
    pub als: AlsConfig,
    /// Also run the genie-aided LS baselines.
    pub baselines: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Which experiment a set of defaults reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// SNR sweep with baselines, `M=32, K=16, T=32, N=16, P=16`.
    Snr,
    /// RIS size sweep, `M=K=T=64, P=16, N in {16, 32, 64}`.
    Elements,
    /// Training length sweep, `M=K=T=N=64, P in {16, 24, 32, 40}`.
    Phases,
}

pub const DEFAULT_TRIALS: usize = 200;

fn default_snr_grid() -> Vec<f64> {
    (0..=6).map(|i| 5.0 * i as f64).collect()
}

impl SweepConfig {
    pub fn preset(preset: Preset) -> Self {
        let (dims, sweep, baselines) = match preset {
            Preset::Snr => (
                SystemDims { m: 32, k: 16, n: 16, p: 16, t: 32 },
                SweepVariable::Snr,
                true,
            ),
            Preset::Elements => (
                SystemDims { m: 64, k: 64, n: 64, p: 16, t: 64 },
                SweepVariable::N(vec![16, 32, 64]),
                false,
            ),
            Preset::Phases => (
                SystemDims { m: 64, k: 64, n: 64, p: 40, t: 64 },
                SweepVariable::P(vec![16, 24, 32, 40]),
                false,
            ),
        };
        SweepConfig {
            dims,
            snr_grid_db: default_snr_grid(),
            sweep,
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            als: AlsConfig::default(),
            baselines,
            output: OutputSpec::default(),
        }
    }

    /// Every point of the sweep, sweep values outermost.
    pub fn points(&self) -> Vec<SweepPoint> {
        let values: Vec<(f64, SystemDims)> = match &self.sweep {
            SweepVariable::Snr => vec![(f64::NAN, self.dims)],
            SweepVariable::N(ns) => ns
                .iter()
                .map(|&n| (n as f64, SystemDims { n, ..self.dims }))
                .collect(),
            SweepVariable::P(ps) => ps
                .iter()
                .map(|&p| (p as f64, SystemDims { p, ..self.dims }))
                .collect(),
        };
        values
            .into_iter()
            .flat_map(|(value, dims)| {
                self.snr_grid_db.iter().map(move |&snr| SweepPoint {
                    sweep_value: if value.is_nan() { snr } else { value },
                    snr_db: snr,
                    dims,
                })
            })
            .collect()
    }

    /// Validate the whole sweep before any trial runs. All problems are
    /// reported together.
    pub fn preflight(&self) -> Result<Vec<SweepPoint>> {
        let mut problems = Vec::new();
        if self.trials == 0 {
            problems.push("trials must be at least 1".to_string());
        }
        if self.snr_grid_db.is_empty() {
            problems.push("SNR grid is empty".to_string());
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            problems.push(format!("invalid SNR value {bad}"));
        }
        match &self.sweep {
            SweepVariable::N(v) | SweepVariable::P(v) if v.is_empty() => {
                problems.push(format!("no values given for swept {}", self.sweep.name()));
            }
            _ => {}
        }
        if let Err(e) = self.als.validate() {
            problems.push(e.to_string());
        }
        let points = self.points();
        let mut seen = Vec::new();
        for point in &points {
            if seen.contains(&point.dims) {
                continue;
            }
            seen.push(point.dims);
            if let Err(e) = point.dims.validate() {
                problems.push(e.to_string());
                continue;
            }
            let report = check_feasibility(&point.dims);
            if !report.is_feasible() {
                let d = point.dims;
                problems.push(format!(
                    "M={} K={} N={} P={}: {report}",
                    d.m, d.k, d.n, d.p
                ));
            }
        }
        if problems.is_empty() {
            Ok(points)
        } else {
            Err(Error::Preflight(problems))
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(m) = o.m {
            self.dims.m = m;
        }
        if let Some(k) = o.k {
            self.dims.k = k;
        }
        if let Some(t) = o.t {
            self.dims.t = t;
        }
        if let Some(n) = &o.n {
            self.dims.n = single_or_sweep(n, "n", matches!(self.sweep, SweepVariable::N(_)))?;
            if let SweepVariable::N(values) = &mut self.sweep {
                *values = n.clone();
            }
        }
        if let Some(p) = &o.p {
            self.dims.p = single_or_sweep(p, "p", matches!(self.sweep, SweepVariable::P(_)))?;
            if let SweepVariable::P(values) = &mut self.sweep {
                *values = p.clone();
            }
        }
        if let Some(snr) = &o.snr {
            self.snr_grid_db = snr.clone();
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        if let Some(seed) = o.seed {
            self.base_seed = seed;
        }
        if let Some(eps) = o.epsilon {
            self.als.epsilon = eps;
        }
        if let Some(iters) = o.max_iters {
            self.als.max_iters = iters;
        }
        if let Some(tol) = o.pinv_tol {
            self.als.pinv_tol = Some(tol);
        }
        if let Some(b) = o.baselines {
            self.baselines = b;
        }
        if let Some(out) = &o.out {
            self.output.path = Some(out.clone());
        }
        if let Some(format) = o.format {
            self.output.format = format;
        }
        Ok(())
    }
}

fn single_or_sweep(values: &[usize], name: &str, swept: bool) -> Result<usize> {
    match values {
        [] => Err(Error::Config(format!("`{name}` has no values"))),
        [one] => Ok(*one),
        [.., last] if swept => Ok(*last),
        _ => Err(Error::Config(format!(
            "`{name}` takes a list only when it is the swept variable"
        ))),
    }
}

/// Optional values from a config file or command-line flags.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub m: Option<usize>,
    pub k: Option<usize>,
    #[serde(default, deserialize_with = "de_usize_list")]
    pub n: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "de_usize_list")]
    pub p: Option<Vec<usize>>,
    pub t: Option<usize>,
    #[serde(default, deserialize_with = "de_f64_list")]
    pub snr: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub pinv_tol: Option<f64>,
    pub baselines: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl Overrides {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ListSpec<T> {
    One(T),
    Many(Vec<T>),
    Text(String),
}

fn de_list<'de, D, T>(d: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de> + RangeValue,
{
    let spec: Option<ListSpec<T>> = Option::deserialize(d)?;
    spec.map(|s| match s {
        ListSpec::One(v) => Ok(vec![v]),
        ListSpec::Many(v) => Ok(v),
        ListSpec::Text(s) => parse_list::<T>(&s).map_err(serde::de::Error::custom),
    })
    .transpose()
}

fn de_usize_list<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<usize>>, D::Error> {
    de_list(d)
}

fn de_f64_list<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    de_list(d)
}

/// Values that can be listed (`a,b,c`) or given as an inclusive range
/// (`start:stop:step`).
pub trait RangeValue: Copy + FromStr + PartialOrd {
    fn expand(start: Self, stop: Self, step: Self) -> Option<Vec<Self>>;
}

impl RangeValue for f64 {
    fn expand(start: f64, stop: f64, step: f64) -> Option<Vec<f64>> {
        if step.is_nan() || step <= 0.0 || stop < start {
            return None;
        }
        // index-based so 0:30:5 lands exactly on 30
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        Some((0..=count).map(|i| start + step * i as f64).collect())
    }
}

impl RangeValue for usize {
    fn expand(start: usize, stop: usize, step: usize) -> Option<Vec<usize>> {
        if step == 0 || stop < start {
            return None;
        }
        Some((start..=stop).step_by(step).collect())
    }
}

/// Parse `"0,5,10"`, `"0:30:5"` or a mix such as `"0:10:5,20"`.
pub fn parse_list<T: RangeValue>(text: &str) -> Result<Vec<T>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<T>()
            .map_err(|_| Error::Config(format!("cannot parse `{}` in `{text}`", s.trim())))
    };
    let mut out = Vec::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [single] => out.push(parse(single)?),
            [a, b, c] => {
                let values = T::expand(parse(a)?, parse(b)?, parse(c)?)
                    .ok_or_else(|| Error::Config(format!("empty or invalid range `{part}`")))?;
                out.extend(values);
            }
            _ => return Err(Error::Config(format!("expected value or start:stop:step, got `{part}`"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("no values in `{text}`")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list::<f64>("0:30:5").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(parse_list::<f64>("1.5, 2").unwrap(), vec![1.5, 2.0]);
        assert_eq!(parse_list::<usize>("16:64:16").unwrap(), vec![16, 32, 48, 64]);
        assert_eq!(parse_list::<usize>("16,24:40:8").unwrap(), vec![16, 24, 32, 40]);
        assert!(parse_list::<f64>("5:0:1").is_err());
        assert!(parse_list::<usize>("a").is_err());
        assert!(parse_list::<f64>("").is_err());
        assert!(parse_list::<f64>("1:2").is_err());
    }

    #[test]
    fn presets_match_experiments() {
        let c = SweepConfig::preset(Preset::Snr);
        assert_eq!(c.points().len(), 7);
        assert!(c.baselines);
        let c = SweepConfig::preset(Preset::Elements);
        assert_eq!(c.points().len(), 3 * 7);
        assert!(c.preflight().is_ok());
        let c = SweepConfig::preset(Preset::Phases);
        assert_eq!(c.points().len(), 4 * 7);
        assert!(c.preflight().is_ok());
    }

    #[test]
    fn toml_overrides_then_flags() {
        let file = Overrides::from_toml_str(
            r#"
            m = 8
            k = 8
            n = 4
            p = [2, 4]
            t = 8
            snr = "0:20:10"
            trials = 3
            seed = 9
            baselines = false
            format = "json"
            "#,
        )
        .unwrap();
        let mut cfg = SweepConfig::preset(Preset::Phases);
        cfg.apply(&file).unwrap();
        assert_eq!(cfg.dims, SystemDims { m: 8, k: 8, n: 4, p: 4, t: 8 });
        assert_eq!(cfg.sweep, SweepVariable::P(vec![2, 4]));
        assert_eq!(cfg.snr_grid_db, vec![0.0, 10.0, 20.0]);
        assert_eq!(cfg.output.format, OutputFormat::Json);

        let flags = Overrides {
            trials: Some(7),
            snr: Some(vec![5.0]),
            ..Default::default()
        };
        cfg.apply(&flags).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.snr_grid_db, vec![5.0]);
        assert_eq!(cfg.base_seed, 9);
    }

    #[test]
    fn list_for_unswept_dimension_is_rejected() {
        let mut cfg = SweepConfig::preset(Preset::Snr);
        let o = Overrides {
            n: Some(vec![4, 8]),
            ..Default::default()
        };
        assert!(cfg.apply(&o).is_err());
        assert!(Overrides::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn preflight_lists_every_violation() {
        let mut cfg = SweepConfig::preset(Preset::Elements);
        cfg.dims.k = 20;
        cfg.sweep = SweepVariable::N(vec![16, 32, 128]);
        let msg = cfg.preflight().unwrap_err().to_string();
        assert!(msg.contains("K >= N violated (K=20, N=32)"), "{msg}");
        assert!(msg.contains("M >= N violated (M=64, N=128)"), "{msg}");
        assert!(!msg.contains("N=16:"), "{msg}");
    }
}
