//! The acceptance suite: the library criteria plus end-to-end determinism.

use crate::config::parse_config_str;
use crate::scenario::{run_scenario, OutputStatus, RunReport};
use qbm_core::acceptance::{run_core, CriterionOutcome, ACCEPTANCE_REPLICAS};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Scenario used by the determinism check: every output, fixed seed.
pub const DETERMINISM_CONFIG: &str = r#"
[run]
outputs = ["kernels", "propagators", "correspond", "rates", "master", "langevin"]
master_seed = 42

[mode]
omega = 1.0

[environment]
coupling = 0.2

[density]
kind = "ohmic-drude"
cutoff = 20.0

[occupation]
kind = "thermal"
T = 2.0

[grid]
omega_max = 40.0
count = 4096

[kernels]
freq_shift = "absorb"

[master]
duration = 50.0
wigner = true
wigner_points = 41

[langevin]
replicas = 32
window = 200.0
segment = 512
memory = "spectral"
"#;

/// Fresh scratch directory under the system temporary directory.
fn scratch_dir(tag: &str) -> std::io::Result<PathBuf> {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos());
    let dir = std::env::temp_dir().join(format!("qbm-modes-{tag}-{}-{nanos}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run_into(dir: &Path) -> Result<RunReport, String> {
    let mut config = parse_config_str(DETERMINISM_CONFIG, dir).map_err(|e| e.to_string())?;
    config.output_dir = dir.to_path_buf();
    run_scenario(&config).map_err(|e| e.to_string())
}

/// Runs the determinism scenario twice and compares every CSV byte for byte.
pub fn determinism_check() -> CriterionOutcome {
    let start = Instant::now();
    let outcome = |passed: bool, detail: String| CriterionOutcome {
        id: 10,
        name: "end-to-end determinism",
        passed,
        detail,
        elapsed: start.elapsed(),
    };
    let dirs = match (scratch_dir("a"), scratch_dir("b")) {
        (Ok(a), Ok(b)) => [a, b],
        (Err(e), _) | (_, Err(e)) => return outcome(false, format!("error: {e}")),
    };
    let result = (|| -> Result<(usize, Vec<String>), String> {
        let first = run_into(&dirs[0])?;
        let second = run_into(&dirs[1])?;
        for r in [&first, &second] {
            if let Some(o) = r.outputs.iter().find(|o| o.status == OutputStatus::Failed) {
                return Err(format!("output {} failed: {}", o.name, o.error.clone().unwrap_or_default()));
            }
        }
        let mut compared = 0;
        let mut mismatched = Vec::new();
        for f in first.files().filter(|f| f.name.ends_with(".csv")) {
            let a = std::fs::read(dirs[0].join(&f.name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dirs[1].join(&f.name)).map_err(|e| e.to_string())?;
            compared += 1;
            if a != b {
                mismatched.push(f.name.clone());
            }
        }
        Ok((compared, mismatched))
    })();
    for d in &dirs {
        let _ = std::fs::remove_dir_all(d);
    }
    match result {
        Ok((n, bad)) if bad.is_empty() && n > 0 => outcome(true, format!("identical_csv_files={n}")),
        Ok((n, bad)) => outcome(false, format!("compared={n} differing={}", bad.join(","))),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

/// Runs all ten criteria with the given ensemble size.
pub fn run_suite(replicas: usize) -> Vec<CriterionOutcome> {
    let mut all = run_core(replicas);
    all.push(determinism_check());
    all
}

/// Runs the suite at full size, printing one line per criterion. Returns true if all pass.
pub fn selftest() -> bool {
    let mut passed = true;
    for outcome in run_suite(ACCEPTANCE_REPLICAS) {
        println!("{outcome}");
        passed &= outcome.passed;
    }
    passed
}
