mod common;

use common::*;
use qbm_cli::config::{BathSource, OutputKind};
use qbm_cli::{parse_config, parse_config_str};
use qbm_core::spectral::FrequencyShift;
use std::path::Path;

#[test]
fn minimal_config_is_valid() {
    let c = parse_config_str(MINIMAL, Path::new("/tmp")).unwrap();
    assert_eq!(c.outputs, vec![OutputKind::Rates]);
    assert_eq!(c.mode.omega, 1.0);
    assert!(matches!(c.bath, BathSource::Environment(_)));
    assert_eq!(c.grid.unwrap().count(), 4096);
    assert_eq!(c.output_dir, Path::new("/tmp").join("qbm-output"));
    assert_eq!(c.master_seed, None);
}

#[test]
fn environment_and_self_energy_are_exclusive() {
    let text = format!("{MINIMAL}\n[self_energy]\npath = \"sigma.csv\"\n");
    let err = parse_config_str(&text, Path::new("/nonexistent")).unwrap_err();
    assert!(err.mentions("self_energy"), "{err}");
}

#[test]
fn negative_temperature_names_the_key() {
    let err = parse_config_str(&MINIMAL.replace("T = 2.0", "T = -1.0"), Path::new(".")).unwrap_err();
    assert!(err.mentions("occupation.T"), "{err}");
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    let text = MINIMAL.replace("cutoff = 20.0", "cutoff = 20.0\ncutof = 3.0") + "\n[extras]\nx = 1\n";
    let err = parse_config_str(&text, Path::new(".")).unwrap_err();
    assert!(err.mentions("density.cutof"), "{err}");
    assert!(err.mentions("extras"), "{err}");
}

#[test]
fn every_issue_is_reported_at_once() {
    let text = MINIMAL
        .replace("T = 2.0", "T = -1.0")
        .replace("omega = 1.0", "omega = -1.0")
        .replace("count = 4096", "count = 1");
    let err = parse_config_str(&text, Path::new(".")).unwrap_err();
    assert!(err.issues.len() >= 3, "{err}");
    assert!(err.mentions("occupation.T"));
}

#[test]
fn missing_keys_are_named() {
    let text = MINIMAL.replace("[mode]\nomega = 1.0\n", "").replace("coupling = 0.2", "");
    let err = parse_config_str(&text, Path::new(".")).unwrap_err();
    let joined = err.to_string();
    assert!(joined.contains("mode"), "{joined}");
    assert!(err.mentions("environment.coupling"), "{joined}");
}

#[test]
fn bath_is_required() {
    let text = MINIMAL
        .replace("[environment]\ncoupling = 0.2\n", "")
        .replace("[density]\nkind = \"ohmic-drude\"\ncutoff = 20.0\n", "")
        .replace("[occupation]\nkind = \"thermal\"\nT = 2.0\n", "");
    assert!(parse_config_str(&text, Path::new(".")).unwrap_err().mentions("environment"));
}

#[test]
fn unknown_output_is_rejected() {
    let err = parse_config_str(&with_outputs(r#"["rates", "plots"]"#), Path::new(".")).unwrap_err();
    assert!(err.to_string().contains("plots"), "{err}");
}

#[test]
fn langevin_requires_a_seed() {
    let err = parse_config_str(&with_outputs(r#"["langevin"]"#), Path::new(".")).unwrap_err();
    assert!(err.mentions("run.master_seed"), "{err}");
}

#[test]
fn field_mode_and_shift_options() {
    let text = MINIMAL.replace("omega = 1.0", "mass = 0.6\nmomentum = 0.8") + "\n[kernels]\nfreq_shift = \"absorb\"\n";
    let c = parse_config_str(&text, Path::new(".")).unwrap();
    assert!((c.mode.omega - 1.0).abs() < 1e-15);
    assert!(matches!(c.kernel_options.shift, FrequencyShift::AbsorbAt(w) if (w - 1.0).abs() < 1e-15));
}

#[test]
fn self_energy_file_must_exist() {
    let text = with_outputs(r#"["correspond"]"#);
    let start = text.find("[environment]").unwrap();
    let end = text.find("[grid]").unwrap();
    let text = format!("{}[self_energy]\npath = \"missing.csv\"\n", &text[..start]) + &text[end + "[grid]\nomega_max = 100.0\ncount = 4096\n".len()..];
    let err = parse_config_str(&text, Path::new("/nonexistent-dir")).unwrap_err();
    assert!(err.mentions("self_energy.path"), "{err}");
}

#[test]
fn shipped_configs_are_valid() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn unreadable_file_is_a_validation_error() {
    assert!(parse_config(Path::new("/nonexistent/config.toml")).is_err());
}
