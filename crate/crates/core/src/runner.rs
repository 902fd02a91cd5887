//! Experiment orchestration: one fluid trajectory shared by a wave
//! trajectory per `eps`, sampled at common times, and the files they produce.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InitialSpec, SampledData};
use crate::error::{LabError, Result};
use crate::fit::{fit_power_law, PowerFit};
use crate::grid::Grid;
use crate::kg::{KgSolver, KgState};
use crate::modulated::Modulator;
use crate::potential::Potential;
use crate::rep::{FluidState, RepSolver};
use crate::wkb::{close_eikonal, kg_initial_data, rep_initial_data, Phase, WkbData};

/// Growth factor of `max |Phi|` or the energy that counts as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// One sample of a run; serialized with the CSV column names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub eps: f64,
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    pub energy_drift: f64,
    pub charge_drift: f64,
    pub normalization_residual: f64,
    pub aborted: bool,
}

pub const COLUMNS: [&str; 13] = [
    "eps",
    "t",
    "H",
    "H0",
    "G",
    "n1",
    "n2",
    "n3",
    "n4",
    "energy_drift",
    "charge_drift",
    "normalization_residual",
    "aborted",
];

impl RecordRow {
    fn aborted(eps: f64, t: f64) -> Self {
        let nan = f64::NAN;
        Self {
            eps,
            t,
            h: nan,
            h0: nan,
            g: nan,
            n1: nan,
            n2: nan,
            n3: nan,
            n4: nan,
            energy_drift: nan,
            charge_drift: nan,
            normalization_residual: nan,
            aborted: true,
        }
    }

    /// Value of a numeric column by its CSV name.
    pub fn get(&self, column: &str) -> Option<f64> {
        Some(match column {
            "eps" => self.eps,
            "t" => self.t,
            "H" => self.h,
            "H0" => self.h0,
            "G" => self.g,
            "n1" => self.n1,
            "n2" => self.n2,
            "n3" => self.n3,
            "n4" => self.n4,
            "energy_drift" => self.energy_drift,
            "charge_drift" => self.charge_drift,
            "normalization_residual" => self.normalization_residual,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub eps: f64,
    pub wall_time_s: f64,
    pub abort_reason: Option<String>,
    pub kg_steps: usize,
    pub fluid_steps: usize,
    pub clipped_f_values: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub eps: f64,
    pub rows: Vec<RecordRow>,
    pub meta: RunMeta,
}

impl RunRecord {
    pub fn aborted(&self) -> bool {
        self.meta.abort_reason.is_some()
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut h = DefaultHasher::new();
    serde_json::to_string(cfg).unwrap_or_default().hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Initial wave data as a function of `eps`.
enum WaveSource {
    Wkb(WkbData),
    PlaneWave { amplitude: Complex64, k: Vec<f64> },
}

pub struct Experiment {
    cfg: ExperimentConfig,
    kg: KgSolver,
    rep: RepSolver,
    source: WaveSource,
    fluid0: FluidState,
}

/// Fluid samples with the number of steps taken and the failure, if any.
struct FluidTrajectory {
    states: Vec<FluidState>,
    steps: usize,
    failure: Option<String>,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.build_grid()?;
        let potential = Potential::new(cfg.gamma).map_err(|e| LabError::Config(e.to_string()))?;
        let kg = KgSolver::new(grid.clone(), potential);
        let rep = RepSolver::new(grid.clone(), potential).with_filter(cfg.integrator.filter_strength);
        let wkb = |a: Vec<Complex64>, phase: Phase| -> Result<WkbData> { close_eikonal(&grid, &potential, a, None, phase) };
        let source = match &cfg.initial {
            InitialSpec::Wkb { a, a_imag, v } => {
                let re = a.sample(&grid);
                let im = a_imag.sample(&grid);
                let amp = re.into_iter().zip(im).map(|(x, y)| Complex64::new(x, y)).collect();
                WaveSource::Wkb(wkb(amp, Phase { slope: v.slope(grid.dim()), periodic: v.periodic(&grid) })?)
            }
            InitialSpec::File { path } => {
                let data = SampledData::load(path, &grid)?;
                let slope = if data.slope.is_empty() { vec![0.0; grid.dim()] } else { data.slope.clone() };
                WaveSource::Wkb(wkb(data.amplitude(), Phase { slope, periodic: data.v.clone() })?)
            }
            InitialSpec::PlaneWave { amplitude, k } => {
                WaveSource::PlaneWave { amplitude: Complex64::new(amplitude[0], amplitude[1]), k: k.clone() }
            }
        };
        let fluid0 = match &source {
            WaveSource::Wkb(d) => rep
                .from_data(&rep_initial_data(&grid, d))
                .map_err(|e| LabError::Config(format!("fluid initial data: {e}")))?,
            WaveSource::PlaneWave { amplitude, k } => rep.constant_state(k, amplitude.norm_sqr())?,
        };
        Ok(Self { cfg, kg, rep, source, fluid0 })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        self.kg.grid()
    }

    pub fn kg_solver(&self) -> &KgSolver {
        &self.kg
    }

    pub fn rep_solver(&self) -> &RepSolver {
        &self.rep
    }

    pub fn initial_fluid(&self) -> &FluidState {
        &self.fluid0
    }

    pub fn initial_wave(&self, eps: f64) -> Result<KgState> {
        match &self.source {
            WaveSource::Wkb(d) => {
                let (phi, phi_t) = kg_initial_data(self.grid(), d, eps)?;
                self.kg.state(phi, phi_t, eps)
            }
            WaveSource::PlaneWave { amplitude, k } => self.kg.plane_wave(*amplitude, k, eps),
        }
    }

    fn fluid_trajectory(&self, times: &[f64]) -> FluidTrajectory {
        let mut states = Vec::with_capacity(times.len());
        let mut st = self.fluid0.clone();
        let mut steps = 0;
        for &t in times {
            while st.t < t {
                let dt = self.rep.dt_max(&st).min(t - st.t);
                if !(dt > 0.0) {
                    return FluidTrajectory {
                        states,
                        steps,
                        failure: Some(format!("fluid time step collapsed at t = {}", st.t)),
                    };
                }
                match self.rep.step(&st, dt) {
                    Ok(mut next) => {
                        // Land exactly on the sample time.
                        if (next.t - t).abs() < 1e-12 * (1.0 + t) {
                            next.t = t;
                        }
                        st = next;
                        steps += 1;
                    }
                    Err(e) => return FluidTrajectory { states, steps, failure: Some(format!("fluid: {e}")) },
                }
            }
            states.push(st.clone());
        }
        FluidTrajectory { states, steps, failure: None }
    }

    /// Evolves the wave to `t`; blow-up and solver faults become errors.
    pub fn advance_wave(&self, st: &KgState, t: f64, limits: (f64, f64), steps: &mut usize) -> Result<KgState> {
        let mut st = st.clone();
        while st.t < t {
            let dt = (self.cfg.integrator.dt_safety * self.kg.dt_max(&st)).min(t - st.t);
            let mut next = self.kg.step(&st, dt)?;
            if (next.t - t).abs() < 1e-12 * (1.0 + t) {
                next.t = t;
            }
            *steps += 1;
            let peak = next.phi.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if peak > BLOW_UP_FACTOR * limits.0 {
                return Err(LabError::BlowUp { t: next.t, reason: format!("max |Phi| = {peak:e}") });
            }
            let e = self.kg.grid().integrate(&self.kg.energy_density(&next));
            if e > BLOW_UP_FACTOR * limits.1 {
                return Err(LabError::BlowUp { t: next.t, reason: format!("energy = {e:e}") });
            }
            st = next;
        }
        Ok(st)
    }

    fn run_eps(&self, eps: f64, times: &[f64], fluid: &FluidTrajectory, hash: &str) -> RunRecord {
        let start = Instant::now();
        let modulator = Modulator::new(&self.kg, &self.rep).expect("solvers share grid and potential");
        let mut rows = Vec::with_capacity(times.len());
        let mut abort_reason = None;
        let mut kg_steps = 0;
        let mut wave = match self.initial_wave(eps) {
            Ok(w) => Some(w),
            Err(e) => {
                abort_reason = Some(format!("wave initial data: {e}"));
                None
            }
        };
        let (e0, q0, peak0) = match &wave {
            Some(w) => {
                let d = self.kg.diagnostics(w);
                (d.energy, d.charge, w.phi.iter().fold(0.0f64, |m, z| m.max(z.norm())))
            }
            None => (0.0, 0.0, 0.0),
        };
        let rel = |x: f64, x0: f64| if x0 != 0.0 { (x - x0).abs() / x0.abs() } else { (x - x0).abs() };

        for (k, &t) in times.iter().enumerate() {
            let Some(w) = wave.take() else {
                rows.push(RecordRow::aborted(eps, t));
                continue;
            };
            let w = match self.advance_wave(&w, t, (peak0, e0), &mut kg_steps) {
                Ok(w) => w,
                Err(e) => {
                    abort_reason.get_or_insert(format!("wave: {e}"));
                    rows.push(RecordRow::aborted(eps, t));
                    continue;
                }
            };
            let Some(fl) = fluid.states.get(k) else {
                abort_reason.get_or_insert(fluid.failure.clone().unwrap_or_else(|| "fluid trajectory ended".into()));
                rows.push(RecordRow::aborted(eps, t));
                continue;
            };
            match modulator.build(&w, fl) {
                Ok(b) => {
                    let d = self.kg.diagnostics(&w);
                    let row = RecordRow {
                        eps,
                        t,
                        h: b.h_energy,
                        h0: b.h00_energy,
                        g: b.g_corrector,
                        n1: b.norms.n1,
                        n2: b.norms.n2,
                        n3: b.norms.n3,
                        n4: b.norms.n4,
                        energy_drift: rel(d.energy, e0),
                        charge_drift: rel(d.charge, q0),
                        normalization_residual: self.rep.normalization_residual(fl),
                        aborted: false,
                    };
                    let finite = COLUMNS[..12].iter().all(|c| row.get(c).is_some_and(f64::is_finite));
                    if finite {
                        rows.push(row);
                    } else {
                        abort_reason.get_or_insert(format!("non-finite diagnostics at t = {t}"));
                        rows.push(RecordRow::aborted(eps, t));
                    }
                }
                Err(e) => {
                    abort_reason.get_or_insert(format!("modulated energy: {e}"));
                    rows.push(RecordRow::aborted(eps, t));
                }
            }
            wave = Some(w);
        }
        if let Some(r) = &abort_reason {
            log::warn!("eps = {eps}: run aborted: {r}");
        }
        RunRecord {
            eps,
            rows,
            meta: RunMeta {
                config_hash: hash.to_string(),
                eps,
                wall_time_s: start.elapsed().as_secs_f64(),
                abort_reason,
                kg_steps,
                fluid_steps: fluid.steps,
                clipped_f_values: self.rep.clipped_count(),
            },
        }
    }

    /// Co-evolves the fluid once and the wave for every `eps` (concurrently).
    pub fn run(&self) -> Vec<RunRecord> {
        let times = self.cfg.times();
        let fluid = self.fluid_trajectory(&times);
        if let Some(f) = &fluid.failure {
            log::warn!("{f}");
        }
        let hash = config_hash(&self.cfg);
        self.cfg.eps_list.par_iter().map(|&eps| self.run_eps(eps, &times, &fluid, &hash)).collect()
    }
}

fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

#[derive(Serialize)]
struct Sidecar<'a> {
    meta: &'a RunMeta,
    columns: &'a [&'a str],
    config: &'a ExperimentConfig,
}

/// Writes `<prefix>_eps<eps>.csv`, a JSON sidecar and one two-column `.dat`
/// file per quantity. Returns the CSV paths.
pub fn write_records(records: &[RunRecord], cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for rec in records {
        let stem = format!("{}_{}", cfg.output.prefix, eps_tag(rec.eps));
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path).map_err(csv_error)?;
        for row in &rec.rows {
            w.serialize(row).map_err(csv_error)?;
        }
        if rec.rows.is_empty() {
            w.write_record(COLUMNS).map_err(csv_error)?;
        }
        w.flush()?;

        let sidecar = Sidecar { meta: &rec.meta, columns: &COLUMNS, config: cfg };
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?)?;

        for col in &COLUMNS[2..12] {
            let mut s = format!("# t {col}\n");
            for row in rec.rows.iter().filter(|r| !r.aborted) {
                s.push_str(&format!("{:.17e} {:.17e}\n", row.t, row.get(col).unwrap_or(f64::NAN)));
            }
            std::fs::write(dir.join(format!("{stem}_{col}.dat")), s)?;
        }
        out.push(csv_path);
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> LabError {
    LabError::Io(std::io::Error::other(e.to_string()))
}

/// Reads the rows of one or more CSV record files.
pub fn read_records(paths: &[PathBuf]) -> Result<Vec<RecordRow>> {
    let mut rows = Vec::new();
    for p in paths {
        let mut r = csv::Reader::from_path(p).map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?;
        for row in r.deserialize() {
            rows.push(row.map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?);
        }
    }
    Ok(rows)
}

/// Log-log fit of `quantity` at the sample nearest `t_star` against `eps`.
pub fn fit_rate(rows: &[RecordRow], quantity: &str, t_star: f64) -> Result<PowerFit> {
    if !COLUMNS[2..12].contains(&quantity) {
        return Err(LabError::Config(format!("unknown quantity {quantity:?}")));
    }
    let mut eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &e in &eps {
        let best = rows
            .iter()
            .filter(|r| r.eps == e && !r.aborted)
            .min_by(|a, b| (a.t - t_star).abs().total_cmp(&(b.t - t_star).abs()));
        if let Some(r) = best {
            if (r.t - t_star).abs() > 1e-9 * (1.0 + t_star.abs()) {
                log::warn!("eps = {e}: nearest sample to t = {t_star} is t = {}", r.t);
            }
            xs.push(e);
            ys.push(r.get(quantity).unwrap_or(f64::NAN));
        }
    }
    if xs.len() < 3 {
        return Err(LabError::InvalidArgument(format!("need at least 3 eps values, found {}", xs.len())));
    }
    fit_power_law(&xs, &ys)
}

/// Quantities fitted by a sweep.
pub const SWEEP_QUANTITIES: [&str; 6] = ["H", "H0", "n1", "n2", "n3", "n4"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFit {
    pub quantity: String,
    pub t: f64,
    pub fit: Option<PowerFit>,
    pub error: Option<String>,
}

/// Power-law fits in `eps` of every sweep quantity at `t_star`.
pub fn sweep_fits(records: &[RunRecord], t_star: f64) -> Vec<SweepFit> {
    let rows: Vec<RecordRow> = records.iter().flat_map(|r| r.rows.iter().copied()).collect();
    SWEEP_QUANTITIES
        .iter()
        .map(|q| {
            let (fit, error) = match fit_rate(&rows, q, t_star) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepFit { quantity: q.to_string(), t: t_star, fit, error }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_cfg() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
            "grid": {"dim": 1, "n": 64, "length": 6.283185307179586},
            "gamma": 2.0,
            "eps_list": [0.25, 0.125, 0.0625],
            "initial": {"kind": "plane_wave", "amplitude": [1.0, 0.0], "k": [1.0]},
            "t_end": 0.2,
            "integrator": {"dt_safety": 0.1},
            "samples": 3
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn matched_plane_wave_run_is_zero() {
        let ex = Experiment::new(plane_cfg()).unwrap();
        for rec in ex.run() {
            assert!(!rec.aborted(), "{:?}", rec.meta);
            for r in &rec.rows {
                assert!(r.h.abs() < 1e-12 && r.h0.abs() < 1e-12, "{r:?}");
            }
        }
    }

    #[test]
    fn vacuum_run_is_zero() {
        let mut cfg = plane_cfg();
        cfg.initial = InitialSpec::Wkb {
            a: Default::default(),
            a_imag: Default::default(),
            v: Default::default(),
        };
        let ex = Experiment::new(cfg).unwrap();
        for rec in ex.run() {
            for r in &rec.rows {
                for c in &COLUMNS[2..12] {
                    assert_eq!(r.get(c), Some(0.0), "{c}");
                }
            }
        }
    }

    #[test]
    fn records_round_trip_and_are_deterministic() {
        let cfg = plane_cfg();
        let dir = tempfile::tempdir().unwrap();
        let ex = Experiment::new(cfg.clone()).unwrap();
        let a = write_records(&ex.run(), &cfg, &dir.path().join("a")).unwrap();
        let b = write_records(&ex.run(), &cfg, &dir.path().join("b")).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(p).unwrap(), std::fs::read(q).unwrap());
        }
        let header = std::fs::read_to_string(&a[0]).unwrap();
        assert!(header.starts_with(&COLUMNS.join(",")));
        let rows = read_records(&a).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(dir.path().join("a/run_eps0.25_H.dat").exists());
        assert!(dir.path().join("a/run_eps0.25.json").exists());
    }

    #[test]
    fn fit_rate_on_synthetic_rows() {
        let rows: Vec<RecordRow> = [0.1, 0.05, 0.025]
            .iter()
            .flat_map(|&e| {
                [0.0, 0.5].map(|t| RecordRow { eps: e, t, h: e * e, ..RecordRow::aborted(e, t) }).map(|mut r| {
                    r.aborted = false;
                    r
                })
            })
            .collect();
        let f = fit_rate(&rows, "H", 0.5).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-10);
        assert!(fit_rate(&rows, "bogus", 0.5).is_err());
        assert!(fit_rate(&rows[..4], "H", 0.5).is_err());
    }
}
