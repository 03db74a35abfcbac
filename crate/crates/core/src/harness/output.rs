use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::stats::{AggregateResult, ScalingFit, SweepResult};
use crate::partial::InvariantReport;

pub const TRAJECTORY_HEADER: &str = "t,mean_regret,ci_half_width";
pub const FINALS_HEADER: &str = "replication,final_regret";
pub const INVARIANTS_HEADER: &str = "C,kappa,kappa_method,iota,lambda,nu2,nu2_gap";
pub const SCALING_HEADER: &str = "T,mean_final_regret,ci_half_width,included";
pub const SWEEP_HEADER: &str = "value,mean_final_regret,ci_half_width,best";

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const FINALS_FILE: &str = "finals.csv";

/// Rows `t,mean,half_width` with `t` counted from 1.
pub fn write_trajectory(mut w: impl Write, agg: &AggregateResult) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (t, (m, h)) in agg.mean.iter().zip(&agg.half_width).enumerate() {
        writeln!(w, "{},{m},{h}", t + 1)?;
    }
    Ok(())
}

pub fn write_finals(mut w: impl Write, agg: &AggregateResult) -> io::Result<()> {
    writeln!(w, "{FINALS_HEADER}")?;
    for (i, f) in agg.finals.iter().enumerate() {
        writeln!(w, "{i},{f}")?;
    }
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// One row per graph; unknown invariants are left empty.
pub fn write_invariants(mut w: impl Write, reports: &[InvariantReport]) -> io::Result<()> {
    writeln!(w, "{INVARIANTS_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.contexts,
            r.kappa,
            r.kappa_method.as_str(),
            opt(r.iota),
            opt(r.lambda),
            r.nu2.value,
            opt(r.nu2_gap())
        )?;
    }
    Ok(())
}

pub fn write_scaling(mut w: impl Write, fit: &ScalingFit) -> io::Result<()> {
    writeln!(w, "{SCALING_HEADER}")?;
    for ((t, m), h) in fit.t_grid.iter().zip(&fit.mean_finals).zip(&fit.half_widths) {
        writeln!(w, "{t},{m},{h},{}", !fit.excluded.contains(t))?;
    }
    Ok(())
}

pub fn write_sweep(mut w: impl Write, sweep: &SweepResult) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (i, r) in sweep.rows.iter().enumerate() {
        writeln!(w, "{},{},{},{}", r.value, r.mean_final, r.half_width, i == sweep.best)?;
    }
    Ok(())
}

/// Writes `contents` to `path` through a buffered writer, creating parent
/// directories.
pub fn write_file(path: &Path, contents: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    contents(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes `trajectory.csv` and `finals.csv` into `dir`.
pub fn emit_csv(agg: &AggregateResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let trajectory = dir.join(TRAJECTORY_FILE);
    let finals = dir.join(FINALS_FILE);
    write_file(&trajectory, |w| write_trajectory(w, agg))?;
    write_file(&finals, |w| write_finals(w, agg))?;
    Ok((trajectory, finals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::RunResult;
    use crate::harness::stats::aggregate;

    fn agg() -> AggregateResult {
        aggregate(&[
            RunResult {
                replication: 0,
                log: None,
                regret: vec![0.5, 1.0, 1.25],
            },
            RunResult {
                replication: 1,
                log: None,
                regret: vec![0.5, 0.75, 1.5],
            },
        ])
        .unwrap()
    }

    #[test]
    fn trajectory_layout() {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &agg()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,mean_regret,ci_half_width");
        assert_eq!(lines.len(), 1 + 3);
        assert_eq!(lines[1], "1,0.5,0");
        assert!(lines[3].starts_with("3,1.375,"));
    }

    #[test]
    fn emits_both_files_reproducibly() {
        let dir = tempfile::tempdir().unwrap();
        let (t, f) = emit_csv(&agg(), &dir.path().join("nested")).unwrap();
        let first = (fs::read(&t).unwrap(), fs::read(&f).unwrap());
        emit_csv(&agg(), &dir.path().join("nested")).unwrap();
        assert_eq!(first, (fs::read(&t).unwrap(), fs::read(&f).unwrap()));
        assert_eq!(String::from_utf8(first.1).unwrap(), "replication,final_regret\n0,1.25\n1,1.5\n");
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_csv(&agg(), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }
}
