//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use qbm_core::acceptance::ACCEPTANCE_REPLICAS;

fn main() {
    let outcomes = qbm_cli::selftest::run_suite(ACCEPTANCE_REPLICAS);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
