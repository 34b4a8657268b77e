//! Orchestrates a validated scenario and records what was produced.

use crate::config::{BathSource, CoefficientKind, InitialKind, OutputKind, ScenarioConfig};
use qbm_core::correspond::{
    build_propagators_from_self_energy, kernels_from_self_energy, self_energy_from_kernels, EffectiveEnvironment,
    SelfEnergyTable,
};
use qbm_core::greens::{build_propagators, causality_violation, to_time_domain, PropagatorSet, Regulator};
use qbm_core::io::{fmt_num, CsvTable};
use qbm_core::langevin::{memory_kernel, run_ensemble, EnsembleSpec, MemoryCutoff};
use qbm_core::master::{
    asymptotic_coefficients, evolve_gaussian, evolve_wigner_grid, max_gaussian_step, max_wigner_step, Axis,
    CoefficientSchedule, CoefficientSource, GaussianState, MasterCoefficients, WignerGrid,
};
use qbm_core::rates::{decay_rates, rate_sweep_csv, rates_from_effective, solve_on_shell, RatePair};
use qbm_core::spectral::{build_kernels, verify_fdt, FrequencyShift, KernelSet, KramersKronig};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const TOOL_NAME: &str = "qbm-modes";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const REPORT_FILE: &str = "report.json";

/// Failure that prevents a run from producing any report.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot create output directory {path}: {source}")]
    OutputDir { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OutputStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputReport {
    pub name: &'static str,
    pub status: OutputStatus,
    pub error: Option<String>,
    pub files: Vec<FileRecord>,
    /// Achieved tolerances and headline numbers.
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub seconds: f64,
}

/// Conventions in force for the run.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    /// `none`, `constant` or `absorb`.
    pub freq_shift_convention: String,
    /// Constant added to the principal-value part of `Re H`.
    pub freq_shift: Option<f64>,
    pub kramers_kronig: &'static str,
    /// Noise kernel uses `N = (1 + 2n) |d|`.
    pub factor2_harmonization: bool,
    pub noise_relation: &'static str,
    pub damping_relation: &'static str,
    pub regulator: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_path: Option<String>,
    pub config_echo: String,
    pub output_dir: String,
    pub master_seed: Option<u64>,
    pub conventions: Conventions,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputReport>,
    pub manifest: Option<FileRecord>,
    pub seconds: f64,
    pub success: bool,
}

impl RunReport {
    pub fn output(&self, kind: OutputKind) -> Option<&OutputReport> {
        self.outputs.iter().find(|o| o.name == kind.as_str())
    }

    /// Every CSV and text file emitted by the outputs.
    pub fn files(&self) -> impl Iterator<Item = &FileRecord> {
        self.outputs.iter().flat_map(|o| o.files.iter())
    }
}

/// Shared inputs derived once per run.
struct Prepared {
    kernels: Result<KernelSet, String>,
    sigma: Result<SelfEnergyTable, String>,
    /// Bath recovered from a self-energy input.
    effective: Option<EffectiveEnvironment>,
}

fn prepare(config: &ScenarioConfig) -> Prepared {
    match &config.bath {
        BathSource::Environment(env) => {
            let grid = config.grid.expect("environment input carries a grid");
            let kernels = build_kernels(env, &grid, &config.kernel_options).map_err(|e| e.to_string());
            let sigma = match &kernels {
                Ok(k) => self_energy_from_kernels(k, &config.mode).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            Prepared {
                kernels,
                sigma,
                effective: None,
            }
        }
        BathSource::SelfEnergy { table, .. } => match kernels_from_self_energy(table, &config.mode) {
            Ok((k, eff)) => Prepared {
                kernels: Ok(k),
                sigma: Ok(table.clone()),
                effective: Some(eff),
            },
            Err(e) => Prepared {
                kernels: Err(e.to_string()),
                sigma: Ok(table.clone()),
                effective: None,
            },
        },
    }
}

/// Collects the files, metrics and warnings of one output.
struct Sink<'a> {
    dir: &'a Path,
    files: Vec<FileRecord>,
    metrics: BTreeMap<String, f64>,
    warnings: Vec<String>,
}

type Step = Result<(), String>;

impl Sink<'_> {
    fn write(&mut self, name: &str, content: &str) -> Step {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.files.push(record(name, content.as_bytes()));
        Ok(())
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

fn record(name: &str, bytes: &[u8]) -> FileRecord {
    FileRecord {
        name: name.to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
        bytes: bytes.len() as u64,
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs every requested output, writes CSVs, the manifest and the report.
///
/// A failing output is recorded and the remaining outputs still run.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|source| RunError::OutputDir {
        path: dir.clone(),
        source,
    })?;

    let prepared = prepare(config);
    let mut warnings = Vec::new();
    if let Ok(k) = &prepared.kernels {
        warnings.extend(k.diagnostics.iter().map(|d| d.to_string()));
    }

    let mut outputs = Vec::new();
    for &kind in &config.outputs {
        let t0 = Instant::now();
        let mut sink = Sink {
            dir: &dir,
            files: Vec::new(),
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
        };
        let result = match kind {
            OutputKind::Kernels => kernels_output(config, &prepared, &mut sink),
            OutputKind::Propagators => propagators_output(config, &prepared, &mut sink),
            OutputKind::Correspond => correspond_output(config, &prepared, &mut sink),
            OutputKind::Rates => rates_output(config, &prepared, &mut sink),
            OutputKind::Master => master_output(config, &prepared, &mut sink),
            OutputKind::Langevin => langevin_output(config, &prepared, &mut sink),
        };
        outputs.push(OutputReport {
            name: kind.as_str(),
            status: if result.is_ok() {
                OutputStatus::Ok
            } else {
                OutputStatus::Failed
            },
            error: result.err(),
            files: sink.files,
            metrics: sink.metrics,
            warnings: sink.warnings,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }

    let success = outputs.iter().all(|o| o.status == OutputStatus::Ok);
    let mut report = RunReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        config_path: config.path.as_ref().map(|p| p.display().to_string()),
        config_echo: config.text.clone(),
        output_dir: dir.display().to_string(),
        master_seed: config.master_seed,
        conventions: conventions(config, &prepared),
        warnings,
        outputs,
        manifest: None,
        seconds: 0.0,
        success,
    };

    let manifest = manifest_text(&report);
    let manifest_path = dir.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, &manifest).map_err(|source| RunError::Write {
        path: manifest_path,
        source,
    })?;
    report.manifest = Some(record(MANIFEST_FILE, manifest.as_bytes()));
    report.seconds = start.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    let report_path = dir.join(REPORT_FILE);
    std::fs::write(&report_path, json + "\n").map_err(|source| RunError::Write {
        path: report_path,
        source,
    })?;
    Ok(report)
}

fn conventions(config: &ScenarioConfig, prepared: &Prepared) -> Conventions {
    let input_sigma = matches!(config.bath, BathSource::SelfEnergy { .. });
    let freq_shift_convention = if input_sigma {
        "self-energy".to_string()
    } else {
        match config.kernel_options.shift {
            FrequencyShift::None => "none".into(),
            FrequencyShift::Constant(_) => "constant".into(),
            FrequencyShift::AbsorbAt(w) => format!("absorb at {}", fmt_num(w)),
        }
    };
    Conventions {
        freq_shift_convention,
        freq_shift: prepared.kernels.as_ref().ok().map(|k| k.freq_shift),
        kramers_kronig: match config.kernel_options.kramers_kronig {
            KramersKronig::DiscreteHilbert => "discrete-hilbert",
            KramersKronig::SymmetricExclusion => "symmetric-exclusion",
        },
        factor2_harmonization: true,
        noise_relation: "N(w) = (1 + 2 n(|w|)) |d(w)|",
        damping_relation: "D(Omega) = i Omega gamma",
        regulator: match config.regulator {
            Regulator::Auto => "auto".into(),
            Regulator::Off => "off".into(),
            Regulator::Fixed(e) => fmt_num(e),
        },
    }
}

/// Deterministic key-value listing of the run's artifacts.
pub fn manifest_text(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool = {}", report.tool);
    let _ = writeln!(s, "version = {}", report.version);
    if let Some(seed) = report.master_seed {
        let _ = writeln!(s, "master_seed = {seed}");
    }
    let names: Vec<&str> = report.outputs.iter().map(|o| o.name).collect();
    let _ = writeln!(s, "outputs = {}", names.join(","));
    for o in &report.outputs {
        let status = match o.status {
            OutputStatus::Ok => "ok",
            OutputStatus::Failed => "failed",
        };
        let _ = writeln!(s, "status.{} = {status}", o.name);
        for f in &o.files {
            let _ = writeln!(s, "file.{} = sha256:{} bytes:{}", f.name, f.sha256, f.bytes);
        }
    }
    s
}

fn kernels_of(prepared: &Prepared) -> Result<&KernelSet, String> {
    prepared.kernels.as_ref().map_err(|e| e.clone())
}

fn kernels_csv(k: &KernelSet) -> String {
    let mut t = CsvTable::new(&["omega", "dissipation", "noise", "h_re", "h_im"]);
    for i in 0..k.grid.count() {
        t.row(&[k.grid.omega(i), k.dissipation[i], k.noise[i], k.h_re[i], k.h_im[i]]);
    }
    t.into_string()
}

fn kernels_output(config: &ScenarioConfig, prepared: &Prepared, sink: &mut Sink<'_>) -> Step {
    let k = kernels_of(prepared)?;
    sink.write("kernels.csv", &kernels_csv(k))?;
    let w = config.mode.omega;
    sink.metric("freq_shift", k.freq_shift);
    sink.metric("damping_rate_at_omega", k.damping_at(w).map_err(err)?);
    sink.metric("h_re_at_omega", k.h_at(w).map_err(err)?.re);
    if let BathSource::Environment(env) = &config.bath {
        sink.metric("fdt_max_rel_error", verify_fdt(k, &env.occupation).map_err(err)?.max_rel);
    }
    sink.warnings.extend(k.diagnostics.iter().map(|d| d.to_string()));
    Ok(())
}

fn propagator_header(first: &str, set: &PropagatorSet) -> Vec<String> {
    let mut h = vec![first.to_string()];
    for (name, _) in set.named() {
        h.push(format!("re_{name}"));
        h.push(format!("im_{name}"));
    }
    h
}

fn propagators_output(config: &ScenarioConfig, prepared: &Prepared, sink: &mut Sink<'_>) -> Step {
    let set = match &config.bath {
        BathSource::Environment(_) => build_propagators(&config.mode, kernels_of(prepared)?, config.regulator),
        BathSource::SelfEnergy { table, .. } => {
            if let Err(e) = table.check_physical() {
                sink.warnings.push(e.to_string());
            }
            build_propagators_from_self_energy(&config.mode, table, config.regulator)
        }
    }
    .map_err(err)?;
    let grid = set.grid;
    let named = set.named();

    let mut t = CsvTable::new(&propagator_header("omega", &set));
    let mut row = Vec::with_capacity(1 + 2 * named.len());
    for k in 0..grid.count() {
        row.clear();
        row.push(grid.omega(k));
        for (_, values) in &named {
            row.push(values[k].re);
            row.push(values[k].im);
        }
        t.row(&row);
    }
    sink.write("propagators.csv", t.as_str())?;

    let series: Vec<_> = named
        .iter()
        .map(|(_, v)| to_time_domain(&grid, v))
        .collect::<qbm_core::Result<_>>()
        .map_err(err)?;
    let times = grid.times();
    let mut t = CsvTable::new(&propagator_header("t", &set));
    for (i, &time) in times.iter().enumerate() {
        row.clear();
        row.push(time);
        for s in &series {
            row.push(s.values[i].re);
            row.push(s.values[i].im);
        }
        t.row(&row);
    }
    sink.write("propagators_time.csv", t.as_str())?;
    sink.metric("retarded_negative_time_mass", causality_violation(&set).map_err(err)?);
    sink.metric("regulator_epsilon", set.regulator);
    if set.regulator > 0.0 {
        sink.warnings.push(format!(
            "regulator epsilon = {:.3e} applied: the width at the mode frequency is below the grid resolution",
            set.regulator
        ));
    }
    sink.warnings.extend(set.diagnostics.iter().map(|d| d.to_string()));
    Ok(())
}

fn correspond_output(config: &ScenarioConfig, prepared: &Prepared, sink: &mut Sink<'_>) -> Step {
    let effective = match &config.bath {
        BathSource::Environment(_) => {
            let k = kernels_of(prepared)?;
            let sigma = prepared.sigma.as_ref().map_err(|e| e.clone())?;
            sink.write("self_energy.csv", &sigma.to_csv())?;
            let (back, eff) = kernels_from_self_energy(sigma, &config.mode).map_err(err)?;
            let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            let round_trip = diff(&k.dissipation, &back.dissipation)
                .max(diff(&k.noise, &back.noise))
                .max(diff(&k.h_re, &back.h_re));
            sink.metric("round_trip_max_error", round_trip);
            eff
        }
        BathSource::SelfEnergy { table, .. } => {
            table.check_physical().map_err(err)?;
            let k = kernels_of(prepared)?;
            sink.write("correspond_kernels.csv", &kernels_csv(k))?;
            prepared.effective.clone().ok_or("effective environment unavailable")?
        }
    };
    sink.write("effective_environment.csv", &effective.to_csv())?;
    let undetermined = effective.undetermined();
    sink.metric("undetermined_occupation_count", undetermined.len() as f64);
    if !undetermined.is_empty() {
        sink.warnings.push(format!(
            "occupation undetermined at {} frequencies where the dissipation vanishes",
            undetermined.len()
        ));
    }
    Ok(())
}

fn rates_output(config: &ScenarioConfig, prepared: &Prepared, sink: &mut Sink<'_>) -> Step {
    let rates: Vec<RatePair> = match &config.bath {
        BathSource::Environment(env) => {
            let grid = config.grid.expect("environment input carries a grid");
            grid.positive()
                .map(|k| decay_rates(env, grid.omega(k)))
                .collect::<qbm_core::Result<_>>()
                .map_err(err)?
        }
        BathSource::SelfEnergy { .. } => {
            let effective = prepared
                .effective
                .as_ref()
                .ok_or_else(|| kernels_of(prepared).err().unwrap_or_default())?;
            let all = rates_from_effective(effective);
            let missing = all.iter().filter(|r| r.is_none()).count();
            if missing > 0 {
                sink.warnings
                    .push(format!("rates skipped at {missing} frequencies with undetermined occupation"));
            }
            all.into_iter().flatten().collect()
        }
    };
    sink.write("rates.csv", &rate_sweep_csv(&rates))?;

    let sigma = prepared.sigma.as_ref().map_err(|e| e.clone())?;
    let sol = solve_on_shell(sigma, &config.mode).map_err(err)?;
    let mut t = CsvTable::new(&["energy", "width", "occupation", "long_lived"]);
    t.row(&[
        sol.energy,
        sol.width,
        sol.occupation.unwrap_or(f64::NAN),
        if sol.long_lived { 1.0 } else { 0.0 },
    ]);
    sink.write("quasiparticle.csv", t.as_str())?;
    sink.metric("quasiparticle_energy", sol.energy);
    sink.metric("quasiparticle_width", sol.width);
    sink.metric("root_count", sol.roots.len() as f64);
    if sol.roots.len() > 1 {
        let list: Vec<String> = sol.roots.iter().map(|r| format!("{r:.6}")).collect();
        sink.warnings.push(format!(
            "{} on-shell roots ({}); reporting the one nearest the bare energy",
            sol.roots.len(),
            list.join(", ")
        ));
    }
    if !sol.long_lived {
        sink.warnings.push("quasiparticle is not long-lived: width exceeds a tenth of its energy".into());
    }
    Ok(())
}

/// Late-time coefficients with `δΩ²` set to the full `Re H(Ω)`.
fn asymptotic_for(k: &KernelSet, omega: f64) -> qbm_core::Result<MasterCoefficients> {
    let mut c = asymptotic_coefficients(omega, k.damping_at(omega)?, k.occupation_at(omega)?)?;
    c.delta_omega2 = k.h_at(omega)?.re;
    Ok(c)
}

fn relaxation_time(k: &KernelSet, omega: f64) -> Result<f64, String> {
    let gamma = k.damping_at(omega).map_err(err)?;
    if gamma > 0.0 {
        Ok(1.0 / gamma)
    } else {
        Err("no damping at the mode frequency; give an explicit duration".into())
    }
}

fn master_output(config: &ScenarioConfig, prepared: &Prepared, sink: &mut Sink<'_>) -> Step {
    let k = kernels_of(prepared)?;
    let m = &config.master;
    let omega = config.mode.omega;
    let duration = match m.duration {
        Some(d) => d,
        None => 10.0 * relaxation_time(k, omega)?,
    };
    let schedule;
    let source = match m.coefficients {
        CoefficientKind::Asymptotic => CoefficientSource::Constant(asymptotic_for(k, omega).map_err(err)?),
        CoefficientKind::FiniteTime => {
            schedule = CoefficientSchedule::new(k, omega).map_err(err)?;
            CoefficientSource::Schedule(&schedule)
        }
    };
    let envelope = source.envelope(duration).map_err(err)?;
    let occupation = k.occupation_at(omega).map_err(err)?;
    let initial = match m.initial {
        InitialKind::Vacuum => GaussianState::vacuum(omega),
        InitialKind::Thermal => GaussianState::thermal(omega, occupation),
    }
    .displaced(m.initial_q, m.initial_p);
    let dt = m.dt.unwrap_or_else(|| max_gaussian_step(omega, envelope.gamma));
    let traj = evolve_gaussian(&initial, source, omega, duration, dt).map_err(err)?;
    sink.write("master_trajectory.csv", &traj.to_csv())?;
    if let CoefficientSource::Schedule(s) = source {
        sink.write("master_coefficients.csv", &s.to_csv(duration, duration / 1000.0).map_err(err)?)?;
    }
    let last = traj.last().state;
    sink.metric("final_energy", last.energy(omega));
    sink.metric("weak_coupling_stationary_energy", omega * (0.5 + occupation));
    sink.metric("final_cov_pp", last.cov_pp);
    sink.metric("duration", duration);
    sink.metric("dt", traj.samples.get(1).map_or(dt, |s| s.t));

    if m.wigner {
        let stationary = |s: f64| 6.0 * s.max(0.0).sqrt();
        let half_width = m.wigner_half_width.unwrap_or_else(|| {
            let spread = stationary((0.5 + occupation) / omega)
                .max(stationary(omega * (0.5 + occupation)))
                .max(stationary(initial.cov_qq))
                .max(stationary(initial.cov_pp));
            1.2 * (spread + m.initial_q.abs().max(m.initial_p.abs()))
        });
        let axis = Axis::symmetric(half_width, m.wigner_points).map_err(err)?;
        let w0 = WignerGrid::gaussian(axis, axis, &initial).map_err(err)?;
        let wdt = 0.99 * max_wigner_step(&axis, &axis, &envelope, omega);
        let snapshots = m.wigner_snapshots.clone().unwrap_or_else(|| vec![0.0, duration]);
        let steps = (duration / wdt).ceil() as usize;
        let run = evolve_wigner_grid(&w0, source, omega, duration, wdt, &snapshots, (steps / 1000).max(1))
            .map_err(err)?;
        let mut t = CsvTable::new(&["t", "mean_q", "mean_p", "cov_qq", "cov_qp", "cov_pp", "mass"]);
        for s in &run.history {
            let g = s.moments;
            t.row(&[s.t, g.mean_q, g.mean_p, g.cov_qq, g.cov_qp, g.cov_pp, s.mass]);
        }
        sink.write("wigner_moments.csv", t.as_str())?;
        for (i, (_, grid)) in run.snapshots.iter().enumerate() {
            sink.write(&format!("wigner_snapshot_{i}.csv"), &grid.to_csv())?;
        }
        let mass0 = w0.mass();
        let drift = run
            .history
            .iter()
            .filter(|s| s.t > 0.0)
            .fold(0.0f64, |acc, s| acc.max((s.mass - mass0).abs() / s.t));
        sink.metric("wigner_mass_drift_per_time", drift);
        if drift > 1e-6 {
            sink.warnings.push(format!(
                "phase-space mass drifts by {drift:.2e} per unit time; widen or refine the Wigner grid"
            ));
        }
        sink.metric("wigner_max_step_outflow", run.max_step_outflow);
        sink.metric("wigner_dt", wdt);
    }
    Ok(())
}

fn langevin_output(config: &ScenarioConfig, prepared: &Prepared, sink: &mut Sink<'_>) -> Step {
    let k = kernels_of(prepared)?;
    let l = &config.langevin;
    let mode = &config.mode;
    let seed = config.master_seed.ok_or("master_seed is required")?;
    let memory = memory_kernel(k, mode, l.memory).map_err(err)?;
    let dt = memory.dt;
    let burn_in = match l.burn_in {
        Some(b) => b,
        None => 10.0 * relaxation_time(k, mode.omega)?,
    };
    let window = l.window.unwrap_or(8.0 * l.segment as f64 * dt);
    let spec = EnsembleSpec {
        replicas: l.replicas,
        master_seed: seed,
        burn_in,
        window,
        segment: l.segment,
        max_lag: l.max_lag,
        initial_q: l.initial_q,
        initial_p: l.initial_p,
        target_rel_error: l.target_rel_error,
    };
    let est = run_ensemble(mode, k, &memory, &spec).map_err(err)?;
    sink.write("langevin_spectrum.csv", &est.spectrum_csv())?;
    sink.write("langevin_autocovariance.csv", &est.autocovariance_csv())?;

    let mut manifest = String::new();
    let cutoff = match memory.cutoff {
        MemoryCutoff::Amplitude(t) => format!("amplitude {}", fmt_num(t)),
        MemoryCutoff::Spectral(t) => format!("spectral {}", fmt_num(t)),
        MemoryCutoff::Lags(j) => format!("lags {j}"),
    };
    for (key, value) in [
        ("master_seed", seed.to_string()),
        ("replicas", spec.replicas.to_string()),
        ("dt", fmt_num(dt)),
        ("burn_in", fmt_num(burn_in)),
        ("window", fmt_num(window)),
        ("burn_in_steps", ((burn_in / dt).ceil() as usize).to_string()),
        ("window_steps", (((window / dt).ceil() as usize).max(spec.segment)).to_string()),
        ("segment", spec.segment.to_string()),
        ("max_lag", spec.max_lag.to_string()),
        ("memory_cutoff", cutoff),
        ("memory_lags", memory.lags().to_string()),
        ("memory_span", fmt_num(memory.lags() as f64 * dt)),
        ("memory_relative_error", fmt_num(memory.relative_error)),
        ("initial_q", fmt_num(spec.initial_q)),
        ("initial_p", fmt_num(spec.initial_p)),
    ] {
        let _ = writeln!(manifest, "{key} = {value}");
    }
    sink.write("langevin_manifest.txt", &manifest)?;

    sink.metric("equal_time_q2", est.equal_time);
    sink.metric("equal_time_q2_stderr", est.equal_time_stderr);
    sink.metric("memory_lags", memory.lags() as f64);
    sink.metric("memory_relative_error", memory.relative_error);
    // Reference value from the frequency integral of the Hadamard function.
    if let Ok(set) = build_propagators(mode, k, config.regulator) {
        if set.regulator == 0.0 {
            let integral = set.hadamard.iter().map(|z| z.re).sum::<f64>() * set.grid.spacing() / (4.0 * PI);
            sink.metric("q2_frequency_integral", integral);
        } else {
            sink.warnings.push("resonance unresolved on the grid; frequency-integral reference omitted".into());
        }
    }
    sink.warnings.extend(est.warnings.iter().cloned());
    if memory.relative_error > 1e-2 {
        sink.warnings.push(format!(
            "memory truncation changes H(omega) by {:.2e} relative to its maximum",
            memory.relative_error
        ));
    }
    Ok(())
}
