use std::path::{Path, PathBuf};

use crate::em_core::{FieldPoint, Vec3};
use crate::error::{Error, Result};

pub const SNAPSHOT_HEADER: &str = "t,x,H1,H2,H3,E1,E2,E3";
const AUX_COLUMNS: [&str; 12] = [
    "V1", "V2", "V3", "U1", "U2", "U3", "P1", "P2", "P3", "Q1", "Q2", "Q3",
];
const FIELD_COLUMNS: [&str; 6] = ["H1", "H2", "H3", "E1", "E2", "E3"];

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub t: f64,
    pub x: f64,
    pub fields: FieldPoint,
    /// `(H2_exact, err_H2)` when an exact solution is known.
    pub exact_h2: Option<(f64, f64)>,
}

pub fn snapshot_name(step: usize, total: usize) -> String {
    let width = total.to_string().len().max(6);
    format!("snapshot_{step:0width$}.csv")
}

pub fn render_snapshot(rows: &[SnapshotRow]) -> Result<String> {
    let with_exact = rows.first().is_some_and(|r| r.exact_h2.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = SNAPSHOT_HEADER.split(',').collect();
    if with_exact {
        header.extend(["H2_exact", "err_H2"]);
    }
    let to_state = |e: csv::Error| Error::State(format!("CSV encoding failed: {e}"));
    w.write_record(&header).map_err(to_state)?;
    for r in rows {
        let mut vals = vec![r.t, r.x];
        vals.extend(r.fields.to_array());
        if let (true, Some((ex, err))) = (with_exact, r.exact_h2) {
            vals.extend([ex, err]);
        }
        w.write_record(vals.iter().map(|v| fmt_f64(*v))).map_err(to_state)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::State(format!("CSV encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::State(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Numeric CSV with a header row; parse errors carry the line and the
/// 1-based field number.
fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: u64, column: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line: line as usize,
        column,
        message,
    };
    let convert = |e: csv::Error| match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io {
            path: PathBuf::from(path),
            source: std::io::Error::other(e.to_string()),
        },
        _ => parse_err(e.position().map_or(0, |p| p.line()), 1, e.to_string()),
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(convert)?.iter().map(str::to_string).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(parse_err(1, 1, "empty CSV file".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(convert)?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(k, c)| c.parse::<f64>().map_err(|e| parse_err(line, k + 1, format!("`{c}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn column(table: &Table, name: &str) -> Option<usize> {
    table.header.iter().position(|h| h == name)
}

fn require(table: &Table, names: &[&str], path: &Path) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            column(table, n).ok_or_else(|| Error::Validation(format!("{} lacks column {n}", path.display())))
        })
        .collect()
}

fn fields_of(row: &[f64], idx: &[usize]) -> FieldPoint {
    FieldPoint::new(
        Vec3::new(row[idx[0]], row[idx[1]], row[idx[2]]),
        Vec3::new(row[idx[3]], row[idx[4]], row[idx[5]]),
    )
}

/// Reads a snapshot written by [`render_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<Vec<SnapshotRow>> {
    let table = read_table(path)?;
    let base = require(&table, &["t", "x"], path)?;
    let idx = require(&table, &FIELD_COLUMNS, path)?;
    let exact = match (column(&table, "H2_exact"), column(&table, "err_H2")) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok(table
        .rows
        .iter()
        .map(|r| SnapshotRow {
            t: r[base[0]],
            x: r[base[1]],
            fields: fields_of(r, &idx),
            exact_h2: exact.map(|(a, b)| (r[a], r[b])),
        })
        .collect())
}

/// Node samples of `(H, E)`, plus `(V, U, P, Q)` when all twelve auxiliary
/// columns are present.
#[allow(clippy::type_complexity)]
pub fn read_initial_condition(path: &Path) -> Result<(Vec<FieldPoint>, Option<Vec<[Vec3; 4]>>)> {
    let table = read_table(path)?;
    let idx = require(&table, &FIELD_COLUMNS, path)?;
    let aux: Option<Vec<usize>> = AUX_COLUMNS.iter().map(|n| column(&table, n)).collect();
    let fields = table.rows.iter().map(|r| fields_of(r, &idx)).collect();
    let aux = aux.map(|a| {
        table
            .rows
            .iter()
            .map(|r| [0, 3, 6, 9].map(|o| Vec3::new(r[a[o]], r[a[o + 1]], r[a[o + 2]])))
            .collect()
    });
    Ok((fields, aux))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn names_are_zero_padded() {
        assert_eq!(snapshot_name(7, 1000), "snapshot_000007.csv");
        assert_eq!(snapshot_name(12, 12_345_678), "snapshot_00000012.csv");
    }

    proptest! {
        #[test]
        fn snapshots_round_trip_bitwise(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 10)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("s.csv");
            let row = SnapshotRow {
                t: vals[0],
                x: vals[1],
                fields: FieldPoint::from_array([vals[2], vals[3], vals[4], vals[5], vals[6], vals[7]]),
                exact_h2: Some((vals[8], vals[9])),
            };
            write_text(&path, &render_snapshot(&[row, row]).unwrap()).unwrap();
            let back = read_snapshot(&path).unwrap();
            prop_assert_eq!(back.len(), 2);
            for (a, b) in back[0].fields.to_array().iter().zip(row.fields.to_array()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back[0].exact_h2, row.exact_h2);
            prop_assert_eq!((back[0].t, back[0].x), (row.t, row.x));
        }
    }

    #[test]
    fn bad_cells_report_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ic.csv");
        write_text(&path, "x,H1,H2,H3,E1,E2,E3\n0,1,2,3,4,5,6\n1,1,oops,3,4,5,6\n").unwrap();
        let err = read_initial_condition(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 3, .. }), "{err}");
        write_text(&path, "x,H1,H2\n0,1,2\n").unwrap();
        assert!(matches!(read_initial_condition(&path), Err(Error::Validation(_))));
        assert!(matches!(
            read_initial_condition(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }
}
