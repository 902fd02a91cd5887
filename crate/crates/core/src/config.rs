//! Experiment configuration, read from JSON.
//!
//! ```json
//! {
//!   "grid": { "dim": 1, "n": 256, "length": 6.283185307179586 },
//!   "gamma": 2.0,
//!   "eps_list": [0.1, 0.05, 0.025],
//!   "initial": {
//!     "kind": "wkb",
//!     "a": { "mean": 1.0, "bumps": [{ "center": [3.14159], "kappa": 1.0, "height": 0.3 }] },
//!     "v": { "slope": [0.0] }
//!   },
//!   "t_end": 0.5,
//!   "samples": 6,
//!   "integrator": { "dt_safety": 0.05, "filter_strength": 0.0 },
//!   "output": { "dir": "out", "prefix": "run" }
//! }
//! ```
//!
//! `initial.kind` is one of `wkb`, `plane_wave` (`amplitude: [re, im]`, `k`)
//! or `file` (`path` to a JSON file with `a_re`, `a_im`, `v` sampled on the
//! grid and an optional `slope`). Either `samples` (evenly spaced count
//! including both ends) or an explicit increasing `sample_times` list may be
//! given.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{ComplexField, Grid, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    /// Integer wave numbers per axis.
    pub k: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Periodic bump `height * prod_j exp(kappa (cos(2 pi (x_j - c_j)/L) - 1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Vec<f64>,
    pub kappa: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub bumps: Vec<Bump>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    #[serde(default)]
    pub slope: Vec<f64>,
    #[serde(default)]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub bumps: Vec<Bump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Wkb {
        a: FieldSpec,
        #[serde(default)]
        a_imag: FieldSpec,
        #[serde(default)]
        v: PhaseSpec,
    },
    PlaneWave {
        amplitude: [f64; 2],
        k: Vec<f64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    /// Fraction of the stability limit used for the wave equation step.
    #[serde(default = "default_dt_safety")]
    pub dt_safety: f64,
    #[serde(default)]
    pub filter_strength: f64,
}

fn default_dt_safety() -> f64 {
    0.05
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { dt_safety: default_dt_safety(), filter_strength: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_prefix() -> String {
    "run".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), prefix: default_prefix() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub gamma: f64,
    pub eps_list: Vec<f64>,
    pub initial: InitialSpec,
    pub t_end: f64,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Sampled initial data read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledData {
    pub a_re: Vec<f64>,
    pub a_im: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub slope: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        // Data files are resolved next to the config.
        if let InitialSpec::File { path: p } = &mut cfg.initial {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(1..=3).contains(&self.grid.dim) {
            return bad(format!("grid.dim = {} must be 1, 2 or 3", self.grid.dim));
        }
        if !(self.gamma >= 2.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {} must be >= 2", self.gamma));
        }
        if self.eps_list.is_empty() {
            return bad("eps_list is empty".into());
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad("every eps must lie in (0, 1)".into());
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps_list must be strictly decreasing".into());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.integrator.dt_safety > 0.0 && self.integrator.dt_safety <= 1.0) {
            return bad(format!("dt_safety = {} must lie in (0, 1]", self.integrator.dt_safety));
        }
        if self.integrator.filter_strength < 0.0 {
            return bad("filter_strength must be nonnegative".into());
        }
        if self.samples.is_some() && self.sample_times.is_some() {
            return bad("give either samples or sample_times, not both".into());
        }
        if let Some(n) = self.samples {
            if n < 2 {
                return bad("samples must be at least 2".into());
            }
        }
        if let Some(ts) = &self.sample_times {
            if ts.is_empty() || ts.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
                return bad("sample_times must lie in [0, t_end]".into());
            }
            if ts.windows(2).any(|w| w[1] <= w[0]) {
                return bad("sample_times must be strictly increasing".into());
            }
        }
        let d = self.grid.dim;
        let check_modes = |modes: &[Mode], bumps: &[Bump], what: &str| -> Result<()> {
            if modes.iter().any(|m| m.k.len() != d) || bumps.iter().any(|b| b.center.len() != d) {
                return Err(LabError::Config(format!("{what}: mode or bump has the wrong dimension")));
            }
            Ok(())
        };
        match &self.initial {
            InitialSpec::Wkb { a, a_imag, v } => {
                check_modes(&a.modes, &a.bumps, "a")?;
                check_modes(&a_imag.modes, &a_imag.bumps, "a_imag")?;
                check_modes(&v.modes, &v.bumps, "v")?;
                if !v.slope.is_empty() && v.slope.len() != d {
                    return bad("v.slope has the wrong dimension".into());
                }
            }
            InitialSpec::PlaneWave { k, .. } => {
                if k.len() != d {
                    return bad("plane wave k has the wrong dimension".into());
                }
            }
            InitialSpec::File { .. } => {}
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::uniform(self.grid.dim, self.grid.n, self.grid.length).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn times(&self) -> Vec<f64> {
        if let Some(ts) = &self.sample_times {
            return ts.clone();
        }
        let n = self.samples.unwrap_or(6);
        (0..n).map(|k| self.t_end * k as f64 / (n - 1) as f64).collect()
    }
}

fn eval_modes(grid: &Grid, mean: f64, modes: &[Mode], bumps: &[Bump]) -> ScalarField {
    let two_pi = 2.0 * std::f64::consts::PI;
    grid.sample(|x| {
        let mut v = mean;
        for m in modes {
            let ph: f64 = m.k.iter().zip(x).zip(grid.lengths()).map(|((k, xi), l)| two_pi * *k as f64 * xi / l).sum();
            v += m.cos * ph.cos() + m.sin * ph.sin();
        }
        for b in bumps {
            let e: f64 = b
                .center
                .iter()
                .zip(x)
                .zip(grid.lengths())
                .map(|((c, xi), l)| b.kappa * ((two_pi * (xi - c) / l).cos() - 1.0))
                .sum();
            v += b.height * e.exp();
        }
        v
    })
}

impl FieldSpec {
    pub fn sample(&self, grid: &Grid) -> ScalarField {
        eval_modes(grid, self.mean, &self.modes, &self.bumps)
    }
}

impl PhaseSpec {
    pub fn periodic(&self, grid: &Grid) -> ScalarField {
        eval_modes(grid, 0.0, &self.modes, &self.bumps)
    }

    pub fn slope(&self, dim: usize) -> Vec<f64> {
        if self.slope.is_empty() {
            vec![0.0; dim]
        } else {
            self.slope.clone()
        }
    }
}

impl SampledData {
    pub fn load(path: &Path, grid: &Grid) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let data: Self = serde_json::from_str(&text).map_err(|e| LabError::Config(e.to_string()))?;
        let n = grid.len();
        if data.a_re.len() != n || data.a_im.len() != n || data.v.len() != n {
            return Err(LabError::Config(format!("{}: arrays must have {n} entries", path.display())));
        }
        if !data.slope.is_empty() && data.slope.len() != grid.dim() {
            return Err(LabError::Config(format!("{}: slope has the wrong dimension", path.display())));
        }
        Ok(data)
    }

    pub fn amplitude(&self) -> ComplexField {
        self.a_re.iter().zip(&self.a_im).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUMP: &str = r#"{
        "grid": {"dim": 1, "n": 64, "length": 6.283185307179586},
        "gamma": 2.0,
        "eps_list": [0.1, 0.05],
        "initial": {"kind": "wkb", "a": {"mean": 1.0, "bumps": [{"center": [3.0], "kappa": 1.0, "height": 0.3}]}},
        "t_end": 0.5
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_json(BUMP).unwrap();
        assert_eq!(c.integrator, IntegratorSpec::default());
        assert_eq!(c.times(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        let g = c.build_grid().unwrap();
        if let InitialSpec::Wkb { a, .. } = &c.initial {
            let f = a.sample(&g);
            let peak = f.iter().cloned().fold(0.0, f64::max);
            assert!((peak - 1.3).abs() < 1e-2 && f.iter().all(|&v| v >= 1.0));
        } else {
            panic!("wrong kind");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let swap = BUMP.replace("[0.1, 0.05]", "[0.05, 0.1]");
        assert!(matches!(ExperimentConfig::from_json(&swap), Err(LabError::Config(_))));
        let unknown = BUMP.replace("\"t_end\"", "\"tend\"");
        assert!(ExperimentConfig::from_json(&unknown).is_err());
        let neg = BUMP.replace("0.5\n", "-1.0\n");
        assert!(ExperimentConfig::from_json(&neg).is_err());
        let dims = BUMP.replace("[3.0]", "[3.0, 1.0]");
        assert!(ExperimentConfig::from_json(&dims).is_err());
    }

    #[test]
    fn modes_evaluate_on_the_torus() {
        let g = Grid::uniform(1, 16, 2.0).unwrap();
        let spec = FieldSpec { mean: 0.5, modes: vec![Mode { k: vec![1], cos: 0.0, sin: 2.0 }], bumps: vec![] };
        let f = spec.sample(&g);
        for (i, v) in f.iter().enumerate() {
            let x = g.point(i)[0];
            assert!((v - (0.5 + 2.0 * (std::f64::consts::PI * x).sin())).abs() < 1e-14);
        }
    }
}
