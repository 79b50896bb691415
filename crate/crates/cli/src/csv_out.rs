//! Deterministic CSV emission.
//!
//! All files are UTF-8 with `\n` line endings and error rates rendered at a
//! fixed six decimal places, so identical inputs produce byte-identical
//! output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Learning-curve layout: one row per agent, one column per diversity
/// level. `labels` are the diversity values exactly as given on the command
/// line; every column must cover the same agent count.
pub fn write_curve_csv<W: Write>(
    out: &mut W,
    labels: &[String],
    columns: &[Vec<f64>],
) -> io::Result<()> {
    assert_eq!(labels.len(), columns.len(), "one label per column");
    let rows = columns.first().map_or(0, Vec::len);
    assert!(
        columns.iter().all(|c| c.len() == rows),
        "curves must share the agent count"
    );
    write!(out, "agent")?;
    for label in labels {
        write!(out, ",{label}")?;
    }
    writeln!(out)?;
    for row in 0..rows {
        write!(out, "{}", row + 1)?;
        for column in columns {
            write!(out, ",{:.6}", column[row])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Sweep layout: one row per diversity level (first cell its value), one
/// column per selected agent index.
pub fn write_sweep_csv<W: Write>(
    out: &mut W,
    agents: &[usize],
    rows: &[(String, Vec<f64>)],
) -> io::Result<()> {
    write!(out, "agent")?;
    for a in agents {
        write!(out, ",{a}")?;
    }
    writeln!(out)?;
    for (label, errors) in rows {
        assert_eq!(errors.len(), agents.len(), "one error rate per agent column");
        write!(out, "{label}")?;
        for e in errors {
            write!(out, ",{:.6}", e)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_curve_csv_file(
    path: &Path,
    labels: &[String],
    columns: &[Vec<f64>],
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_curve_csv(&mut out, labels, columns)?;
    out.flush()
}

pub fn write_sweep_csv_file(
    path: &Path,
    agents: &[usize],
    rows: &[(String, Vec<f64>)],
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_sweep_csv(&mut out, agents, rows)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_layout() {
        let labels = vec!["0.01".to_string(), "0.1".to_string()];
        let columns = vec![vec![0.25, 0.2, 0.15], vec![0.3, 0.25, 0.2]];
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &labels, &columns).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "agent,0.01,0.1");
        assert_eq!(lines[1], "1,0.250000,0.300000");
        assert_eq!(lines[3], "3,0.150000,0.200000");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn fixed_precision_rendering() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &["d".to_string()], &[vec![0.25]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "agent,d\n1,0.250000\n");
    }

    #[test]
    fn identical_inputs_identical_bytes() {
        let labels = vec!["0.05".to_string()];
        let columns = vec![vec![0.123456789, 0.5]];
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_curve_csv(&mut a, &labels, &columns).unwrap();
        write_curve_csv(&mut b, &labels, &columns).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_layout() {
        let rows = vec![
            ("0.05".to_string(), vec![0.25, 0.2]),
            ("0.1".to_string(), vec![0.24, 0.19]),
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[10, 800], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "agent,10,800");
        assert_eq!(lines[1], "0.05,0.250000,0.200000");
        assert_eq!(lines.len(), 3);
    }
}
