#![allow(dead_code)]

use std::path::{Path, PathBuf};

/// The minimal drude/thermal scenario.
pub const MINIMAL: &str = r#"
[run]
outputs = ["rates"]

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
omega_max = 100.0
count = 4096
"#;

/// `MINIMAL` with its output list replaced.
pub fn with_outputs(outputs: &str) -> String {
    MINIMAL.replace(r#"outputs = ["rates"]"#, &format!("outputs = {outputs}"))
}

pub fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}
