//! Experiment driver for the `roughdrift` laboratory.
//!
//! Every study is a subcommand with a seeded, fully reproducible run and a
//! CSV artifact: `rate-euler`, `rate-milstein`, `coupling-gap`,
//! `spectral-identity`, `transform-check` and `regularity`. Configuration
//! comes from flags or a flat `key=value` file (flags win); results do not
//! depend on the thread count.
//!
//! Exit status: `0` when every enabled assertion passes, `3` when a
//! numerical assertion fails, `2` for usage errors, `1` for I/O or setup
//! failures. Progress goes to stderr; stdout carries the machine-readable
//! summary.

pub mod commands;
pub mod config;

pub use commands::{execute, Check, Outcome};
pub use config::ExperimentConfig;

/// Exit code for failed numerical assertions.
pub const EXIT_ASSERTION_FAILED: i32 = 3;

/// Execute `config`, write its artifacts, print the summary, and return
/// the process exit code.
pub fn run(config: &ExperimentConfig) -> roughdrift::Result<i32> {
    let outcome = execute(config)?;
    let path = config.output_path();
    std::fs::write(&path, &outcome.csv)?;
    eprintln!("wrote {path}");
    for (suffix, content) in &outcome.extra_files {
        let extra = derived_path(&path, suffix);
        std::fs::write(&extra, content)?;
        eprintln!("wrote {extra}");
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    for check in &outcome.checks {
        println!(
            "{} {}: {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    if !config.assertions || outcome.all_passed() {
        Ok(0)
    } else {
        Ok(EXIT_ASSERTION_FAILED)
    }
}

/// `report.csv` + `paths` -> `report_paths.csv`.
fn derived_path(base: &str, suffix: &str) -> String {
    match base.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{base}_{suffix}"),
    }
}
