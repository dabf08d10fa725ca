//! Plain-text output formats: CSV tables and phase-field snapshots.
//!
//! Numbers are written in full-precision scientific notation with `.` as the
//! decimal separator, independent of locale.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::phase_space::{FieldKind, PhaseField, PhaseGrid};

pub const SNAPSHOT_MAGIC: &str = "# tcquench-field v1";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV table with a fixed header row.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads a numeric CSV table; returns the header and the rows.
pub fn read_csv<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>(),
        None => return Err(Error::Parse { line: 1, msg: "empty CSV".into() }),
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("bad number {s:?}: {e}") })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {} columns, found {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Snapshot file: `#`-prefixed header (grid, kind, τ) followed by one line per
/// x index holding the `np` values along p.
pub fn write_snapshot<W: Write>(mut w: W, field: &PhaseField) -> Result<()> {
    let g = &field.grid;
    writeln!(w, "{SNAPSHOT_MAGIC}")?;
    writeln!(w, "# kind = {}", field.kind.name())?;
    writeln!(w, "# tau = {}", fmt_f64(field.tau))?;
    writeln!(w, "# x_min = {}", fmt_f64(g.x_min))?;
    writeln!(w, "# x_max = {}", fmt_f64(g.x_max))?;
    writeln!(w, "# nx = {}", g.nx)?;
    writeln!(w, "# p_min = {}", fmt_f64(g.p_min))?;
    writeln!(w, "# p_max = {}", fmt_f64(g.p_max))?;
    writeln!(w, "# np = {}", g.np)?;
    for ix in 0..g.nx {
        let row: Vec<String> = field.row(ix).iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<PhaseField> {
    let mut header = std::collections::HashMap::new();
    let mut values = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != SNAPSHOT_MAGIC {
                return Err(Error::Parse { line: 1, msg: "missing snapshot header".into() });
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                header.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
            }
            continue;
        }
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("bad value {tok:?}: {e}") })?,
            );
        }
    }
    let get = |k: &str| -> Result<&(usize, String)> {
        header.get(k).ok_or_else(|| Error::Parse { line: 0, msg: format!("missing header key {k}") })
    };
    let num = |k: &str| -> Result<f64> {
        let (line, v) = get(k)?;
        v.parse().map_err(|e| Error::Parse { line: *line, msg: format!("{k}: {e}") })
    };
    let count = |k: &str| -> Result<usize> {
        let (line, v) = get(k)?;
        v.parse().map_err(|e| Error::Parse { line: *line, msg: format!("{k}: {e}") })
    };
    let grid = PhaseGrid::new(num("x_min")?, num("x_max")?, count("nx")?, num("p_min")?, num("p_max")?, count("np")?)?;
    let (kline, kname) = get("kind")?;
    let kind = FieldKind::from_name(kname)
        .ok_or_else(|| Error::Parse { line: *kline, msg: format!("unknown kind {kname}") })?;
    if values.len() != grid.len() {
        return Err(Error::Parse { line: 0, msg: format!("expected {} values, found {}", grid.len(), values.len()) });
    }
    let mut field = PhaseField::new(grid, values, kind);
    field.tau = num("tau")?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_header_and_precision() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["tau", "p_qm"], &[vec![0.0, 1.0], vec![0.1, 1.0 / 3.0]]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tau,p_qm\n"));
        let (h, rows) = read_csv(&buf[..]).unwrap();
        assert_eq!(h, vec!["tau", "p_qm"]);
        assert_eq!(rows[1][1], 1.0 / 3.0);
    }

    #[test]
    fn csv_reports_line_numbers() {
        let err = read_csv("a,b\n1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    proptest! {
        #[test]
        fn snapshot_roundtrip(nx in 2usize..6, np in 2usize..6, tau in -1e3f64..1e3, seed in 0u64..1000) {
            let grid = PhaseGrid::new(-1.5, 2.0, nx, -0.5, 0.75, np).unwrap();
            let values: Vec<f64> = (0..grid.len())
                .map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 7.0 - 50.0)
                .collect();
            let mut f = PhaseField::new(grid, values, FieldKind::Husimi);
            f.tau = tau;
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &f).unwrap();
            let g = read_snapshot(&buf[..]).unwrap();
            prop_assert_eq!(g.values, f.values);
            prop_assert_eq!(g.tau, f.tau);
            prop_assert_eq!(g.kind, f.kind);
            prop_assert_eq!(g.grid, f.grid);
        }
    }
}
