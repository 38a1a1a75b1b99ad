//! CSV renderings of optimizer logs, controls and trajectories.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::heat::{ControlTrajectory, TimeGrid};
use crate::optimizer::OptimReport;

pub const ITERATION_LOG_HEADER: &str = "k,J,e_k,active_set,wall_time_s";

/// One row per iterate. The wall-time column is the only non-deterministic
/// field.
pub fn iteration_log_csv(report: &OptimReport) -> String {
    let mut out = String::from(ITERATION_LOG_HEADER);
    out.push('\n');
    for rec in &report.log {
        let e = rec.rel_change.map(|e| format!("{e:e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:e},{},{},{:.6}",
            rec.k, rec.cost, e, rec.active_set, rec.elapsed_secs
        );
    }
    out
}

/// Drop the trailing wall-time column, leaving only reproducible fields.
pub fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `level,time,node,value` for every heater node and level.
pub fn control_csv(control: &ControlTrajectory, robin_nodes: &[usize], grid: &TimeGrid) -> String {
    let mut out = String::from("level,time,node,value\n");
    for m in 0..control.n_levels() {
        let t = grid.time(m);
        for (&node, value) in robin_nodes.iter().zip(control.level(m)) {
            let _ = writeln!(out, "{m},{t:e},{node},{value:e}");
        }
    }
    out
}

/// Streams `level,node,value` rows so long trajectories never sit in memory.
pub struct TrajectoryCsvWriter<W: Write> {
    inner: W,
}

impl<W: Write> TrajectoryCsvWriter<W> {
    pub fn new(mut inner: W) -> io::Result<Self> {
        writeln!(inner, "level,node,value")?;
        Ok(Self { inner })
    }

    pub fn write_level(&mut self, level: usize, values: &[f64]) -> io::Result<()> {
        for (node, v) in values.iter().enumerate() {
            writeln!(self.inner, "{level},{node},{v:e}")?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_writer_rows() {
        let mut w = TrajectoryCsvWriter::new(Vec::new()).unwrap();
        w.write_level(0, &[1.0, 2.5]).unwrap();
        let bytes = w.finish().unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "level,node,value\n0,0,1e0\n0,1,2.5e0\n");
    }

    #[test]
    fn strip_last_column() {
        assert_eq!(strip_wall_time("a,b,c\n1,2,3.1\n"), "a,b\n1,2");
    }

    #[test]
    fn control_rows() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let c = ControlTrajectory::constant(3, 2, 20.0);
        let csv = control_csv(&c, &[4, 9], &grid);
        assert_eq!(csv.lines().count(), 7);
        assert_eq!(csv.lines().nth(6).unwrap(), "2,1e0,9,2e1");
    }
}
