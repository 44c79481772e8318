//! Numeric CSV datasets. Leading `#` lines carry provenance and are preserved, so a file
//! written here parses and re-serializes byte-identically.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
    pub header: Option<Vec<String>>,
    pub points: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

/// Parses comma-separated numeric rows. Errors name the 1-based row and column.
pub fn parse_csv(text: &str, has_header: bool) -> Result<Dataset> {
    let mut comments = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        match line.strip_prefix('#') {
            Some(c) => {
                comments.push(c.trim_end_matches(['\n', '\r']).to_string());
                body_start += line.len();
            }
            None => break,
        }
    }
    let body = &text[body_start..];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header = if has_header {
        Some(reader.headers()?.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };
    let row_offset = comments.len() + usize::from(has_header);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    for (r, rec) in reader.records().enumerate() {
        let row = r + 1 + row_offset;
        let rec = rec.with_context(|| format!("row {row}"))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            bail!("row {row}: expected {w} columns, found {}", rec.len());
        }
        let mut y = Vec::with_capacity(w);
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| anyhow::anyhow!("row {row}, column {}: not a number: {cell:?}", c + 1))?;
            if !v.is_finite() {
                bail!("row {row}, column {}: value is not finite", c + 1);
            }
            y.push(v);
        }
        points.push(y);
    }
    if points.is_empty() {
        bail!("no data rows");
    }
    if points[0].is_empty() {
        bail!("rows have no columns");
    }
    Ok(Dataset {
        comments,
        header,
        points,
    })
}

/// Shortest round-trip decimal form of every value.
pub fn to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    for c in &ds.comments {
        let _ = writeln!(out, "#{c}");
    }
    if let Some(h) = &ds.header {
        let _ = writeln!(out, "{}", h.join(","));
    }
    for y in &ds.points {
        let row: Vec<String> = y.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn read_dataset(path: &Path, has_header: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&text, has_header).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# seed=3\n1.5,-2.0\n0.1,3e-7\n";
        let ds = parse_csv(text, false).unwrap();
        assert_eq!(ds.points, vec![vec![1.5, -2.0], vec![0.1, 3e-7]]);
        assert_eq!(to_csv(&ds), text);
    }

    #[test]
    fn header_row() {
        let ds = parse_csv("x,y\n1,2\n", true).unwrap();
        assert_eq!(ds.header, Some(vec!["x".into(), "y".into()]));
        assert_eq!(ds.points, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn errors_name_position() {
        let e = parse_csv("1,2\n3\n", false).unwrap_err();
        assert!(format!("{e:#}").contains("row 2"), "{e:#}");
        let e = parse_csv("1,2\n3,abc\n", false).unwrap_err();
        let m = format!("{e:#}");
        assert!(m.contains("row 2") && m.contains("column 2"), "{m}");
        assert!(parse_csv("", false).is_err());
    }
}
