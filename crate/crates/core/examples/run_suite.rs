//! Runs a verification suite from library code and prints its checks.

use stiefel_actions::verify::{run_suite, SuiteConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "curvature-sign".into());
    let config = SuiteConfig::new(name).with_trials(200);
    match run_suite(&config) {
        Ok(report) => {
            for c in &report.checks {
                println!("{:<32} {:>12.4e} {:?} {:>9.1e}  {}", c.id, c.value, c.relation, c.bound, if c.passed { "ok" } else { "FAIL" });
            }
            println!("passed: {}", report.passed);
        }
        Err(e) => eprintln!("{e}"),
    }
}
