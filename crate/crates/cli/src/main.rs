use std::process::ExitCode;

use bbm_cli::parse_flags;
use bbm_core::exec::with_threads;
use bbm_core::harness::{render_checks, render_fits, run, run_fit, suite, to_json, Kind};
use bbm_core::HarnessError;

fn main() -> ExitCode {
    let inv = match parse_flags(std::env::args_os()) {
        Ok(inv) => inv,
        Err(failure) => {
            eprint!("{}", failure.message);
            if !failure.message.ends_with('\n') {
                eprintln!();
            }
            return ExitCode::from(failure.code as u8);
        }
    };
    match execute(&inv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(inv: &bbm_cli::Invocation) -> Result<i32, HarnessError> {
    let spec = &inv.spec;
    match spec.kind {
        Kind::Validate => {
            let checks = with_threads(inv.options.threads, || {
                suite(spec.replicates, spec.master_seed, inv.options.exec)
            });
            print!("{}", render_checks(&checks));
            let body: String = checks.iter().map(|c| to_json(c) + "\n").collect();
            std::fs::write(&spec.output_path, body)?;
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 })
        }
        Kind::Fit => {
            let reports = run_fit(spec)?;
            print!("{}", render_fits(&reports));
            Ok(0)
        }
        _ => {
            let summary = run(spec, &inv.options)?;
            println!(
                "wrote {} records to {} (manifest {}, digest {})",
                summary.replicates,
                summary.output_path.display(),
                summary.manifest_path.display(),
                &summary.config_digest[..12]
            );
            if summary.truncated_replicates > 0 {
                eprintln!("{} replicate(s) hit the particle budget", summary.truncated_replicates);
            }
            Ok(summary.exit_code())
        }
    }
}
