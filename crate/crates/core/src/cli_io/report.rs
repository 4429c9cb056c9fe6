//! Per-increment convergence log as CSV.

use std::fs::File;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::solver::SolveReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub increment: usize,
    pub newton_iters: usize,
    pub cg_iters_total: usize,
    pub residual: f64,
    pub wall_ms: f64,
    pub eps_bar: f64,
}

impl From<&SolveReport> for ReportRow {
    fn from(r: &SolveReport) -> Self {
        Self {
            increment: r.increment,
            newton_iters: r.newton_iterations,
            cg_iters_total: r.cg_total(),
            residual: r.final_residual(),
            wall_ms: r.wall_ms,
            eps_bar: r.eps_bar,
        }
    }
}

/// Appends one row per increment and flushes, so the log survives an abort.
pub struct ReportWriter {
    w: csv::Writer<File>,
}

impl ReportWriter {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self { w: csv::Writer::from_writer(File::create(path)?) })
    }

    pub fn append(&mut self, report: &SolveReport) -> io::Result<()> {
        self.w.serialize(ReportRow::from(report)).map_err(io::Error::other)?;
        self.w.flush()
    }
}

pub fn write_report(path: &Path, reports: &[SolveReport]) -> io::Result<()> {
    let mut w = ReportWriter::create(path)?;
    for r in reports {
        w.append(r)?;
    }
    Ok(())
}

pub fn read_report(path: &Path) -> io::Result<Vec<ReportRow>> {
    csv::Reader::from_path(path)
        .map_err(io::Error::other)?
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(io::Error::other)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let r = SolveReport {
            increment: 0,
            time: 1.0,
            newton_iterations: 3,
            cg_iterations: vec![10, 12, 4],
            residuals: vec![0.5, 1e-3, 1e-7],
            wall_ms: 2.5,
            eps_bar: 0.1,
            equilibrium: 0.0,
        };
        write_report(&path, std::slice::from_ref(&r)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("increment,newton_iters,cg_iters_total,residual,wall_ms,eps_bar\n"));
        let rows = read_report(&path).unwrap();
        assert_eq!(rows, vec![ReportRow::from(&r)]);
        assert_eq!(rows[0].cg_iters_total, 26);
        assert_eq!(rows[0].residual, 1e-7);
    }
}
