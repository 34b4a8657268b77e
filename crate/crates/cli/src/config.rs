//! Scenario configuration: a TOML document walked against a fixed schema.
//!
//! Every problem found is collected; parsing never stops at the first one.

use qbm_core::correspond::SelfEnergyTable;
use qbm_core::greens::{ModeSpec, Regulator};
use qbm_core::io::Table;
use qbm_core::langevin::MemoryCutoff;
use qbm_core::spectral::{Environment, FrequencyShift, KernelOptions, KramersKronig, Occupation, SpectralDensity};
use qbm_core::FrequencyGrid;
use std::fmt;
use std::path::{Path, PathBuf};
use toml::{Table as TomlTable, Value};

/// Environment variable that overrides `run.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "QBM_MODES_OUTPUT_DIR";

const DEFAULT_OUTPUT_DIR: &str = "qbm-output";

/// One schema violation, keyed by its dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

/// All issues found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    /// True when some issue is reported under `key`.
    pub fn mentions(&self, key: &str) -> bool {
        self.issues.iter().any(|i| i.key == key)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s)", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Artifacts a scenario can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputKind {
    Kernels,
    Propagators,
    Correspond,
    Rates,
    Master,
    Langevin,
}

impl OutputKind {
    pub const ALL: [OutputKind; 6] = [
        OutputKind::Kernels,
        OutputKind::Propagators,
        OutputKind::Correspond,
        OutputKind::Rates,
        OutputKind::Master,
        OutputKind::Langevin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutputKind::Kernels => "kernels",
            OutputKind::Propagators => "propagators",
            OutputKind::Correspond => "correspond",
            OutputKind::Rates => "rates",
            OutputKind::Master => "master",
            OutputKind::Langevin => "langevin",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Where the bath description comes from.
#[derive(Debug, Clone)]
pub enum BathSource {
    Environment(Environment),
    SelfEnergy { path: PathBuf, table: SelfEnergyTable },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    /// Late-time constants read off the kernels at `Ω`.
    Asymptotic,
    /// `δΩ²(t)`, `Γ(t)`, `Γ_h(t)`, `Γ_f(t)` from the time-domain kernels.
    FiniteTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Vacuum,
    Thermal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSettings {
    pub coefficients: CoefficientKind,
    /// Defaults to ten relaxation times.
    pub duration: Option<f64>,
    /// Defaults to the integrator's stability bound.
    pub dt: Option<f64>,
    pub initial: InitialKind,
    pub initial_q: f64,
    pub initial_p: f64,
    pub wigner: bool,
    pub wigner_points: usize,
    pub wigner_half_width: Option<f64>,
    pub wigner_snapshots: Option<Vec<f64>>,
}

impl Default for MasterSettings {
    fn default() -> Self {
        Self {
            coefficients: CoefficientKind::Asymptotic,
            duration: None,
            dt: None,
            initial: InitialKind::Vacuum,
            initial_q: 0.0,
            initial_p: 0.0,
            wigner: false,
            wigner_points: 101,
            wigner_half_width: None,
            wigner_snapshots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangevinSettings {
    pub replicas: usize,
    /// Defaults to ten relaxation times.
    pub burn_in: Option<f64>,
    /// Defaults to eight periodogram segments.
    pub window: Option<f64>,
    pub segment: usize,
    pub max_lag: usize,
    pub memory: MemoryCutoff,
    pub initial_q: f64,
    pub initial_p: f64,
    pub target_rel_error: f64,
}

impl Default for LangevinSettings {
    fn default() -> Self {
        Self {
            replicas: 0,
            burn_in: None,
            window: None,
            segment: 1024,
            max_lag: 64,
            memory: MemoryCutoff::default(),
            initial_q: 0.0,
            initial_p: 0.0,
            target_rel_error: 0.02,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// Path of the configuration file, if read from disk.
    pub path: Option<PathBuf>,
    /// Verbatim configuration text.
    pub text: String,
    pub outputs: Vec<OutputKind>,
    pub master_seed: Option<u64>,
    pub output_dir: PathBuf,
    pub mode: ModeSpec,
    pub bath: BathSource,
    /// Present for environment input; self-energy tables carry their own grid.
    pub grid: Option<FrequencyGrid>,
    pub kernel_options: KernelOptions,
    pub regulator: Regulator,
    pub master: MasterSettings,
    pub langevin: LangevinSettings,
}

impl ScenarioConfig {
    /// Replaces the output directory with `QBM_MODES_OUTPUT_DIR` when set.
    pub fn apply_env_override(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        issues: vec![ConfigIssue {
            key: "<file>".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }],
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut config = parse_config_str(&text, base)?;
    config.path = Some(path.to_path_buf());
    Ok(config)
}

/// Validates configuration text; relative paths are resolved against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<ScenarioConfig, ConfigError> {
    let root: TomlTable = text.parse().map_err(|e: toml::de::Error| ConfigError {
        issues: vec![ConfigIssue {
            key: "<syntax>".into(),
            message: e.to_string(),
        }],
    })?;
    let mut p = Parser {
        issues: Vec::new(),
        base: base.to_path_buf(),
    };
    let result = p.scenario(&root, text);
    match result {
        Some(config) if p.issues.is_empty() => Ok(config),
        _ => Err(ConfigError { issues: p.issues }),
    }
}

const SECTIONS: [&str; 11] = [
    "run",
    "mode",
    "environment",
    "density",
    "occupation",
    "self_energy",
    "grid",
    "kernels",
    "propagators",
    "master",
    "langevin",
];

struct Parser {
    issues: Vec<ConfigIssue>,
    base: PathBuf,
}

/// Keys of one section, checked against its allowed set on creation.
struct Section<'t> {
    name: &'static str,
    table: Option<&'t TomlTable>,
}

impl Parser {
    fn issue(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            key: key.into(),
            message: message.into(),
        });
    }

    fn section<'t>(&mut self, root: &'t TomlTable, name: &'static str, allowed: &[&str]) -> Section<'t> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.issue(name, "must be a section");
                None
            }
        };
        if let Some(t) = table {
            for key in t.keys() {
                if !allowed.contains(&key.as_str()) {
                    self.issue(format!("{name}.{key}"), "unknown key");
                }
            }
        }
        Section { name, table }
    }

    fn raw<'t>(&self, s: &Section<'t>, key: &str) -> Option<&'t Value> {
        s.table.and_then(|t| t.get(key))
    }

    fn f64(&mut self, s: &Section<'_>, key: &str) -> Option<f64> {
        let value = self.raw(s, key)?;
        let x = match value {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            _ => {
                self.issue(format!("{}.{key}", s.name), "must be a number");
                return None;
            }
        };
        if !x.is_finite() {
            self.issue(format!("{}.{key}", s.name), "must be finite");
            return None;
        }
        Some(x)
    }

    /// Number satisfying `ok`, described by `rule` otherwise.
    fn f64_where(&mut self, s: &Section<'_>, key: &str, rule: &str, ok: impl Fn(f64) -> bool) -> Option<f64> {
        let x = self.f64(s, key)?;
        if ok(x) {
            Some(x)
        } else {
            self.issue(format!("{}.{key}", s.name), format!("must be {rule}, got {x}"));
            None
        }
    }

    fn positive(&mut self, s: &Section<'_>, key: &str) -> Option<f64> {
        self.f64_where(s, key, "positive", |x| x > 0.0)
    }

    fn non_negative(&mut self, s: &Section<'_>, key: &str) -> Option<f64> {
        self.f64_where(s, key, "non-negative", |x| x >= 0.0)
    }

    fn integer(&mut self, s: &Section<'_>, key: &str, min: i64) -> Option<i64> {
        match self.raw(s, key)? {
            Value::Integer(i) if *i >= min => Some(*i),
            Value::Integer(i) => {
                self.issue(format!("{}.{key}", s.name), format!("must be at least {min}, got {i}"));
                None
            }
            _ => {
                self.issue(format!("{}.{key}", s.name), "must be an integer");
                None
            }
        }
    }

    fn string<'t>(&mut self, s: &Section<'t>, key: &str) -> Option<&'t str> {
        match self.raw(s, key)? {
            Value::String(v) => Some(v.as_str()),
            _ => {
                self.issue(format!("{}.{key}", s.name), "must be a string");
                None
            }
        }
    }

    fn boolean(&mut self, s: &Section<'_>, key: &str) -> Option<bool> {
        match self.raw(s, key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.issue(format!("{}.{key}", s.name), "must be true or false");
                None
            }
        }
    }

    fn required<T>(&mut self, s: &Section<'_>, key: &str, value: Option<T>) -> Option<T> {
        if value.is_none() && self.raw(s, key).is_none() {
            self.issue(format!("{}.{key}", s.name), "missing required key");
        }
        value
    }

    /// One of `choices`, or `None` if absent or invalid.
    fn choice<'t>(&mut self, s: &Section<'t>, key: &str, choices: &[&str]) -> Option<&'t str> {
        let v = self.string(s, key)?;
        if choices.contains(&v) {
            Some(v)
        } else {
            self.issue(format!("{}.{key}", s.name), format!("must be one of {}, got \"{v}\"", choices.join(", ")));
            None
        }
    }

    /// Existing file named by a string key, relative to the configuration directory.
    fn path(&mut self, s: &Section<'_>, key: &str) -> Option<PathBuf> {
        let v = self.string(s, key)?;
        let path = self.base.join(v);
        if path.is_file() {
            Some(path)
        } else {
            self.issue(format!("{}.{key}", s.name), format!("file {} does not exist", path.display()));
            None
        }
    }

    fn table(&mut self, s: &Section<'_>, key: &str) -> Option<Table> {
        let path = self.path(s, key)?;
        match Table::from_csv(&path) {
            Ok(t) => Some(t),
            Err(e) => {
                self.issue(format!("{}.{key}", s.name), e.to_string());
                None
            }
        }
    }

    fn scenario(&mut self, root: &TomlTable, text: &str) -> Option<ScenarioConfig> {
        for key in root.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                self.issue(key.clone(), "unknown section");
            }
        }
        let run = self.section(root, "run", &["outputs", "master_seed", "output_dir"]);
        let (listed, outputs_ok) = self.outputs(&run);
        let outputs = outputs_ok.then(|| listed.clone());
        let master_seed = self.integer(&run, "master_seed", 0).map(|s| s as u64);
        let output_dir = self.string(&run, "output_dir").unwrap_or(DEFAULT_OUTPUT_DIR);
        let output_dir = self.base.join(output_dir);

        let mode = self.mode(root);
        let has_env = root.contains_key("environment");
        let has_sigma = root.contains_key("self_energy");
        let bath = match (has_env, has_sigma) {
            (true, true) => {
                self.issue("self_energy", "exactly one of `environment` and `self_energy` may be given");
                // Still validate both for a complete report.
                self.environment(root);
                self.self_energy(root);
                None
            }
            (false, false) => {
                self.issue("environment", "one of `environment` and `self_energy` is required");
                None
            }
            (true, false) => self.environment(root).map(BathSource::Environment),
            (false, true) => self.self_energy(root),
        };
        for orphan in ["density", "occupation"] {
            if root.contains_key(orphan) && !has_env {
                self.issue(orphan, "only allowed together with `environment`");
            }
        }

        let grid_section = self.section(root, "grid", &["omega_max", "count"]);
        let grid = if has_sigma {
            if grid_section.table.is_some() {
                self.issue("grid", "the grid is fixed by the self-energy table");
            }
            None
        } else {
            let w = self.positive(&grid_section, "omega_max");
            let w = self.required(&grid_section, "omega_max", w);
            let n = self.integer(&grid_section, "count", 4);
            let n = self.required(&grid_section, "count", n);
            match (w, n) {
                (Some(w), Some(n)) => match FrequencyGrid::new(w, n as usize) {
                    Ok(g) => Some(g),
                    Err(e) => {
                        self.issue("grid", e.to_string());
                        None
                    }
                },
                _ => None,
            }
        };

        let kernel_options = self.kernel_options(root, mode.as_ref());
        let regulator = self.regulator(root);
        let master = self.master(root);
        let langevin = self.langevin(root, &listed);
        if listed.contains(&OutputKind::Langevin) && self.raw(&run, "master_seed").is_none() {
            self.issue("run.master_seed", "required when `langevin` output is requested");
        }

        Some(ScenarioConfig {
            path: None,
            text: text.to_string(),
            outputs: outputs?,
            master_seed,
            output_dir,
            mode: mode?,
            bath: bath?,
            grid,
            kernel_options: kernel_options?,
            regulator: regulator?,
            master: master?,
            langevin: langevin?,
        })
    }

    /// Recognised outputs, and whether the list as a whole is valid.
    fn outputs(&mut self, run: &Section<'_>) -> (Vec<OutputKind>, bool) {
        let Some(value) = self.raw(run, "outputs") else {
            self.issue("run.outputs", "missing required key");
            return (Vec::new(), false);
        };
        let Value::Array(items) = value else {
            self.issue("run.outputs", "must be an array of output names");
            return (Vec::new(), false);
        };
        let mut kinds = Vec::new();
        let mut ok = true;
        for item in items {
            match item.as_str().and_then(OutputKind::parse) {
                Some(k) if kinds.contains(&k) => {
                    self.issue("run.outputs", format!("`{}` listed twice", k.as_str()));
                    ok = false;
                }
                Some(k) => kinds.push(k),
                None => {
                    let names: Vec<&str> = OutputKind::ALL.iter().map(|k| k.as_str()).collect();
                    self.issue("run.outputs", format!("unknown output {item}; expected one of {}", names.join(", ")));
                    ok = false;
                }
            }
        }
        if kinds.is_empty() && ok {
            self.issue("run.outputs", "at least one output is required");
            ok = false;
        }
        (kinds, ok)
    }

    fn mode(&mut self, root: &TomlTable) -> Option<ModeSpec> {
        let s = self.section(root, "mode", &["omega", "mass", "momentum"]);
        if s.table.is_none() {
            self.issue("mode", "missing required section");
            return None;
        }
        let omega = self.positive(&s, "omega");
        let mass = self.non_negative(&s, "mass");
        let momentum = self.non_negative(&s, "momentum");
        let has = |k: &str| s.table.is_some_and(|t| t.contains_key(k));
        match (has("omega"), has("mass"), has("momentum")) {
            (_, true, false) => {
                self.issue("mode.momentum", "required together with `mode.mass`");
                None
            }
            (_, false, true) => {
                self.issue("mode.mass", "required together with `mode.momentum`");
                None
            }
            (false, false, false) => {
                self.issue("mode.omega", "give `omega`, or `mass` and `momentum`");
                None
            }
            (true, false, false) => Some(ModeSpec::new(omega?)),
            (false, true, true) => {
                let spec = ModeSpec::field(mass?, momentum?);
                if spec.omega > 0.0 {
                    Some(spec)
                } else {
                    self.issue("mode.momentum", "mass and momentum cannot both vanish");
                    None
                }
            }
            (true, true, true) => Some(ModeSpec {
                omega: omega?,
                mass: Some(mass?),
                momentum: Some(momentum?),
            }),
        }
    }

    fn environment(&mut self, root: &TomlTable) -> Option<Environment> {
        let env = self.section(root, "environment", &["coupling"]);
        let coupling = self.non_negative(&env, "coupling");
        let coupling = self.required(&env, "coupling", coupling);

        let d = self.section(root, "density", &["kind", "cutoff", "path"]);
        let density = if d.table.is_none() {
            self.issue("density", "missing required section");
            None
        } else {
            let kind = self.choice(&d, "kind", &["ohmic", "ohmic-drude", "table"]);
            match self.required(&d, "kind", kind) {
                Some("ohmic") => Some(SpectralDensity::Ohmic),
                Some("ohmic-drude") => {
                    let c = self.positive(&d, "cutoff");
                    self.required(&d, "cutoff", c)
                        .map(|cutoff| SpectralDensity::OhmicDrude { cutoff })
                }
                Some(_) => {
                    let t = self.table(&d, "path");
                    self.required(&d, "path", t).map(SpectralDensity::Tabulated)
                }
                None => None,
            }
        };

        let o = self.section(root, "occupation", &["kind", "T", "path"]);
        let occupation = if o.table.is_none() {
            self.issue("occupation", "missing required section");
            None
        } else {
            let kind = self.choice(&o, "kind", &["vacuum", "thermal", "table"]);
            match self.required(&o, "kind", kind) {
                Some("vacuum") => Some(Occupation::Vacuum),
                Some("thermal") => {
                    let t = self.positive(&o, "T");
                    self.required(&o, "T", t)
                        .map(|temperature| Occupation::Thermal { temperature })
                }
                Some(_) => {
                    let t = self.table(&o, "path");
                    self.required(&o, "path", t).map(Occupation::Tabulated)
                }
                None => None,
            }
        };

        let env = Environment::new(coupling?, density?, occupation?);
        if let Err(e) = env.validate() {
            self.issue("environment", e.to_string());
            return None;
        }
        Some(env)
    }

    fn self_energy(&mut self, root: &TomlTable) -> Option<BathSource> {
        let s = self.section(root, "self_energy", &["path"]);
        let path = self.path(&s, "path");
        let path = self.required(&s, "path", path)?;
        match SelfEnergyTable::from_csv(&path) {
            Ok(table) => Some(BathSource::SelfEnergy { path, table }),
            Err(e) => {
                self.issue("self_energy.path", e.to_string());
                None
            }
        }
    }

    fn kernel_options(&mut self, root: &TomlTable, mode: Option<&ModeSpec>) -> Option<KernelOptions> {
        let s = self.section(root, "kernels", &["kramers_kronig", "freq_shift"]);
        let kk = match self.choice(&s, "kramers_kronig", &["discrete-hilbert", "symmetric-exclusion"]) {
            Some("symmetric-exclusion") => KramersKronig::SymmetricExclusion,
            _ => KramersKronig::DiscreteHilbert,
        };
        let shift = match self.raw(&s, "freq_shift") {
            None => FrequencyShift::None,
            Some(Value::String(v)) if v == "none" => FrequencyShift::None,
            Some(Value::String(v)) if v == "absorb" => FrequencyShift::AbsorbAt(mode.map_or(1.0, |m| m.omega)),
            Some(Value::Float(_) | Value::Integer(_)) => FrequencyShift::Constant(self.f64(&s, "freq_shift")?),
            Some(_) => {
                self.issue("kernels.freq_shift", "must be \"none\", \"absorb\" or a number");
                return None;
            }
        };
        Some(KernelOptions {
            shift,
            kramers_kronig: kk,
        })
    }

    fn regulator(&mut self, root: &TomlTable) -> Option<Regulator> {
        let s = self.section(root, "propagators", &["regulator"]);
        match self.raw(&s, "regulator") {
            None => Some(Regulator::Auto),
            Some(Value::String(v)) if v == "auto" => Some(Regulator::Auto),
            Some(Value::String(v)) if v == "off" => Some(Regulator::Off),
            Some(Value::Float(_) | Value::Integer(_)) => self.positive(&s, "regulator").map(Regulator::Fixed),
            Some(_) => {
                self.issue("propagators.regulator", "must be \"auto\", \"off\" or a positive number");
                None
            }
        }
    }

    fn master(&mut self, root: &TomlTable) -> Option<MasterSettings> {
        let s = self.section(
            root,
            "master",
            &[
                "coefficients",
                "duration",
                "dt",
                "initial",
                "initial_q",
                "initial_p",
                "wigner",
                "wigner_points",
                "wigner_half_width",
                "wigner_snapshots",
            ],
        );
        let mut m = MasterSettings::default();
        let before = self.issues.len();
        if let Some(c) = self.choice(&s, "coefficients", &["asymptotic", "finite-time"]) {
            m.coefficients = if c == "finite-time" {
                CoefficientKind::FiniteTime
            } else {
                CoefficientKind::Asymptotic
            };
        }
        m.duration = self.positive(&s, "duration");
        m.dt = self.positive(&s, "dt");
        if let Some(i) = self.choice(&s, "initial", &["vacuum", "thermal"]) {
            m.initial = if i == "thermal" {
                InitialKind::Thermal
            } else {
                InitialKind::Vacuum
            };
        }
        m.initial_q = self.f64(&s, "initial_q").unwrap_or(0.0);
        m.initial_p = self.f64(&s, "initial_p").unwrap_or(0.0);
        m.wigner = self.boolean(&s, "wigner").unwrap_or(false);
        if let Some(n) = self.integer(&s, "wigner_points", 11) {
            m.wigner_points = n as usize;
        }
        m.wigner_half_width = self.positive(&s, "wigner_half_width");
        if let Some(v) = self.raw(&s, "wigner_snapshots") {
            let times: Option<Vec<f64>> = v.as_array().and_then(|a| {
                a.iter()
                    .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
                    .map(|x| x.filter(|t| t.is_finite() && *t >= 0.0))
                    .collect()
            });
            match times {
                Some(t) => m.wigner_snapshots = Some(t),
                None => self.issue("master.wigner_snapshots", "must be an array of non-negative times"),
            }
        }
        (self.issues.len() == before).then_some(m)
    }

    fn langevin(&mut self, root: &TomlTable, outputs: &[OutputKind]) -> Option<LangevinSettings> {
        let s = self.section(
            root,
            "langevin",
            &[
                "replicas",
                "burn_in",
                "window",
                "segment",
                "max_lag",
                "memory",
                "memory_tolerance",
                "memory_lags",
                "initial_q",
                "initial_p",
                "target_rel_error",
            ],
        );
        let mut l = LangevinSettings::default();
        let before = self.issues.len();
        let replicas = self.integer(&s, "replicas", 2);
        if outputs.contains(&OutputKind::Langevin) {
            if s.table.is_none() {
                self.issue("langevin.replicas", "missing required key");
            } else {
                self.required(&s, "replicas", replicas);
            }
        }
        l.replicas = replicas.unwrap_or(0) as usize;
        l.burn_in = self.positive(&s, "burn_in");
        l.window = self.positive(&s, "window");
        if let Some(n) = self.integer(&s, "segment", 8) {
            l.segment = n as usize;
        }
        if let Some(n) = self.integer(&s, "max_lag", 0) {
            l.max_lag = n as usize;
        }
        let tolerance = self.non_negative(&s, "memory_tolerance");
        let lags = self.integer(&s, "memory_lags", 0);
        match self.choice(&s, "memory", &["amplitude", "spectral", "lags"]) {
            Some("spectral") => l.memory = MemoryCutoff::Spectral(tolerance.unwrap_or(1e-2)),
            Some("lags") => {
                let lags = self.required(&s, "memory_lags", lags);
                l.memory = MemoryCutoff::Lags(lags.unwrap_or(0) as usize);
            }
            _ => {
                if let Some(t) = tolerance {
                    l.memory = MemoryCutoff::Amplitude(t);
                }
            }
        }
        l.initial_q = self.f64(&s, "initial_q").unwrap_or(0.0);
        l.initial_p = self.f64(&s, "initial_p").unwrap_or(0.0);
        if let Some(t) = self.positive(&s, "target_rel_error") {
            l.target_rel_error = t;
        }
        (self.issues.len() == before).then_some(l)
    }
}
