//! Flat-file exports. Numbers are written with Rust's shortest round-trip
//! formatting, so parsing a row back yields the exact `f64` that was written.

use std::io::{self, Write};

use crate::almostperiod::ScanResult;
use crate::bounds::InequalityRecord;
use crate::integrator::Trajectory;

pub const TRAJECTORY_HEADER: &str = "t,x1,y1,x2,y2";
pub const CONDITION_HEADER: &str = "name,lhs,rhs,margin,holds";
pub const SCAN_HEADER: &str = "T,defect,accepted";

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (t, z) in traj.iter() {
        writeln!(out, "{},{},{},{},{}", t, z[0], z[1], z[2], z[3])?;
    }
    out.flush()
}

pub fn write_conditions_csv<'a, W, I>(records: I, mut out: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a InequalityRecord>,
{
    writeln!(out, "{CONDITION_HEADER}")?;
    for r in records {
        // Names contain no commas or quotes; keep them quoted anyway.
        writeln!(out, "\"{}\",{},{},{},{}", r.name, r.lhs, r.rhs, r.margin, r.holds)?;
    }
    out.flush()
}

/// One row per scanned shift; `accepted` is `defect <= epsilon`.
pub fn write_scan_csv<W: Write>(scan: &ScanResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    for &(shift, defect) in &scan.rows {
        writeln!(out, "{},{},{}", shift, defect, defect <= scan.epsilon)?;
    }
    out.flush()
}
