//! Plain-text artifact writers: centerline tables, CSV-style series, and
//! nodal field snapshots that re-import bit-exactly.
//!
//! Every writer assembles the complete byte string before touching the
//! filesystem, and every float is printed with 17 significant digits, so
//! identical inputs produce identical files and parsing a file back recovers
//! the original `f64` values exactly.

use crate::error::{Result, RodError};
use crate::field::EulerField;
use crate::grid::Grid;
use crate::kinematics::Centerline;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Header line of a nodal field snapshot.
const SNAPSHOT_HEADER: &str = "s,theta,phi,psi";

/// 17 significant digits: enough for any `f64` to survive a text round trip.
pub(crate) fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a centerline as whitespace-separated `s x y z` lines, one per node.
pub fn export_centerline(c: &Centerline, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for (s, p) in c.s.iter().zip(&c.points) {
        writeln!(out, "{} {} {} {}", full(*s), full(p[0]), full(p[1]), full(p[2]))
            .expect("string writes cannot fail");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write a CSV-style series: one comma-separated header line naming the
/// columns, then one record per line. An empty record list leaves just the
/// header.
pub fn export_series(
    columns: &[&str],
    rows: &[Vec<f64>],
    path: impl AsRef<Path>,
) -> Result<()> {
    if columns.is_empty() {
        return Err(RodError::validation("columns", "a series needs at least one column"));
    }
    let mut out = String::new();
    writeln!(out, "{}", columns.join(",")).expect("string writes cannot fail");
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(RodError::validation(
                format!("rows[{i}]"),
                format!("has {} entries but the header names {} columns", row.len(), columns.len()),
            ));
        }
        let line: Vec<String> = row.iter().map(|&x| full(x)).collect();
        writeln!(out, "{}", line.join(",")).expect("string writes cannot fail");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write the nodal angles of a field as an `s,theta,phi,psi` series.
pub fn write_field_snapshot(field: &EulerField, path: impl AsRef<Path>) -> Result<()> {
    let nodes = field.grid().nodes();
    let rows: Vec<Vec<f64>> = (0..field.n_nodes())
        .map(|i| vec![nodes[i], field.theta()[i], field.phi()[i], field.psi()[i]])
        .collect();
    export_series(&["s", "theta", "phi", "psi"], &rows, path)
}

/// Read a field snapshot written by [`write_field_snapshot`]. The grid is
/// rebuilt from the first and last arc-length entries; the angles are the
/// exact values from the file, re-validated against the polar guard.
pub fn read_field_snapshot(path: impl AsRef<Path>) -> Result<EulerField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(SNAPSHOT_HEADER) => {}
        other => {
            return Err(RodError::validation(
                path.display().to_string(),
                format!("expected header `{SNAPSHOT_HEADER}`, found {other:?}"),
            ));
        }
    }
    let mut s = Vec::new();
    let mut theta = Vec::new();
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(RodError::validation(
                format!("{}:{}", path.display(), lineno + 2),
                format!("expected 4 comma-separated values, found {}", fields.len()),
            ));
        }
        let mut parsed = [0.0f64; 4];
        for (slot, text) in parsed.iter_mut().zip(&fields) {
            *slot = text.trim().parse().map_err(|e| {
                RodError::validation(
                    format!("{}:{}", path.display(), lineno + 2),
                    format!("bad float `{text}`: {e}"),
                )
            })?;
        }
        s.push(parsed[0]);
        theta.push(parsed[1]);
        phi.push(parsed[2]);
        psi.push(parsed[3]);
    }
    if s.len() < 2 {
        return Err(RodError::validation(
            path.display().to_string(),
            "a snapshot needs at least two nodes",
        ));
    }
    let grid = Grid::new(s[0], s[s.len() - 1], s.len() - 1)?;
    // The s column is derived data; only require it to describe the same
    // uniform grid instead of matching recomputed nodes to the last bit.
    let span = (grid.upper() - grid.lower()).abs();
    for (i, &si) in s.iter().enumerate() {
        if (si - grid.node(i)).abs() > 1e-12 * span.max(1.0) {
            return Err(RodError::validation(
                path.display().to_string(),
                format!("arc-length column is not a uniform grid at row {i}"),
            ));
        }
    }
    EulerField::new(grid, theta, phi, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::trivial_state;
    use crate::kinematics::centerline;

    #[test]
    fn straight_rod_centerline_ends_at_unit_x() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::unit(50).unwrap();
        let field = trivial_state(&grid, 1.0).unwrap();
        let c = centerline(&field, [0.0; 3]);
        let path = dir.path().join("centerline.txt");
        export_centerline(&c, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let last: Vec<f64> = text
            .lines()
            .last()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert!((last[0] - 1.0).abs() < 1e-15);
        assert!((last[1] - 1.0).abs() < 1e-12);
        assert!(last[2].abs() < 1e-12 && last[3].abs() < 1e-12);
    }

    #[test]
    fn empty_series_leaves_a_header_only_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        export_series(&["step", "energy"], &[], &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "step,energy\n");
    }

    #[test]
    fn series_rejects_rows_of_the_wrong_width() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let err = export_series(&["a", "b"], &[vec![1.0]], &path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::symmetric(10.0, 37).unwrap();
        let field = EulerField::from_functions(
            &grid,
            |s| 1.0 + 0.3 * (0.7 * s).sin(),
            |s| 0.1 * s * s - s / 3.0,
            |s| (s * 1.0e-1).exp(),
        )
        .unwrap();
        let path = dir.path().join("field.csv");
        write_field_snapshot(&field, &path).unwrap();
        let back = read_field_snapshot(&path).unwrap();
        assert_eq!(back, field);
        // Re-exporting the re-imported field reproduces the bytes too.
        let path2 = dir.path().join("field2.csv");
        write_field_snapshot(&back, &path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn snapshot_rejects_mangled_headers_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mangled.csv");
        fs::write(&path, "s,theta\n0,1\n").unwrap();
        assert!(read_field_snapshot(&path).is_err());
        fs::write(&path, "s,theta,phi,psi\n0.0,1.0,0.0,abc\n1.0,1.0,0.0,0.0\n").unwrap();
        assert!(read_field_snapshot(&path).is_err());
        // A polar value outside the guard fails field validation on import.
        fs::write(&path, "s,theta,phi,psi\n0.0,0.0,0.0,0.0\n1.0,1.0,0.0,0.0\n").unwrap();
        assert!(read_field_snapshot(&path).is_err());
    }
}
