//! Runs every acceptance criterion and prints one line per criterion.
//! Set `NGRC_ACCEPTANCE_SEED` to repeat the suite with another base seed.

use std::io::Write;
use std::process::ExitCode;

use ngrc::acceptance::{run_one, SuiteOptions, CRITERIA};

fn main() -> ExitCode {
    let mut opts = SuiteOptions::default();
    if let Some(seed) = std::env::var("NGRC_ACCEPTANCE_SEED").ok().and_then(|s| s.parse().ok()) {
        opts.seed = seed;
    }
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "\nacceptance suite, seed {}", opts.seed);
    let mut failed = 0;
    for c in CRITERIA {
        let o = run_one(c, &opts);
        failed += usize::from(!o.passed);
        let _ = writeln!(out, "{}", o.line());
        let _ = out.flush();
    }
    let _ = writeln!(out, "{} of {} criteria passed\n", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
