//! Acceptance criteria on the default configuration, one PASS/FAIL line each.
//! Exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use qsl_cli::checks::{self, Drift, Fixture, Outcome};

const QSL: &str = env!("CARGO_BIN_EXE_qsl");

fn cli_determinism() -> Outcome {
    let name = "CLI determinism and selftest";
    let fail = |detail: String| Outcome {
        name,
        passed: false,
        detail,
    };
    let Ok(dir) = tempfile::tempdir() else {
        return fail("cannot create a temporary directory".into());
    };
    let cfg = dir.path().join("cfg.json");
    if fs::write(&cfg, r#"{"scan": {"lambda_min": 0.1, "lambda_max": 20}}"#).is_err() {
        return fail("cannot write the config".into());
    }
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(QSL)
            .arg("spectrum")
            .arg("--config")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .output();
        match status {
            Ok(o) if o.status.success() => outputs.push(out),
            Ok(o) => return fail(format!("spectrum run {run} exited with {}", o.status)),
            Err(e) => return fail(format!("cannot run {QSL}: {e}")),
        }
    }
    let identical = match same_tree(&outputs[0], &outputs[1]) {
        Ok(v) => v,
        Err(e) => return fail(format!("cannot compare outputs: {e}")),
    };
    let selftest = Command::new(QSL).arg("selftest").current_dir(dir.path()).output();
    let selftest_ok = matches!(&selftest, Ok(o) if o.status.success());
    Outcome {
        name,
        passed: identical && selftest_ok,
        detail: format!("byte-identical outputs {identical}, selftest exit 0 {selftest_ok}"),
    }
}

/// Same file names with byte-identical CSV contents.
fn same_tree(a: &Path, b: &Path) -> std::io::Result<bool> {
    let list = |d: &Path| -> std::io::Result<Vec<_>> {
        let mut v: Vec<_> = fs::read_dir(d)?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()?;
        v.sort();
        Ok(v)
    };
    let (la, lb) = (list(a)?, list(b)?);
    if la != lb || la.is_empty() {
        return Ok(false);
    }
    for name in la {
        let is_csv = Path::new(&name).extension().is_some_and(|e| e == "csv");
        if is_csv && fs::read(a.join(&name))? != fs::read(b.join(&name))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let fx = match Fixture::standard() {
        Ok(fx) => fx,
        Err(e) => {
            println!("FAIL fixture: {e}");
            return ExitCode::FAILURE;
        }
    };
    let outcomes = [
        checks::wronskian_constancy(&fx, Drift::Absolute),
        checks::green_formula(&fx),
        checks::radius_chain(&fx),
        checks::m_function(&fx),
        checks::weyl_identities(&fx),
        checks::oracle_equivalence(&fx),
        checks::orthonormality(&fx),
        checks::eigenvalue_pairing(&fx),
        checks::parseval(&fx, 60.0, 512),
        checks::resolvent(&fx),
        cli_determinism(),
    ];
    let mut failed = 0;
    for (k, o) in outcomes.iter().enumerate() {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {}: {}", k + 1, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        outcomes.len() - failed,
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
