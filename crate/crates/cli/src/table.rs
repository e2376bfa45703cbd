use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::failure::Failure;

/// Full round-trip formatting: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::io(path, e))?;
    w.write_record(header).map_err(|e| Failure::io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Failure::io(path, e))?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

/// `index,value` rows.
pub fn write_indexed(path: &Path, header: [&str; 2], values: &[f64], first: usize) -> Result<(), Failure> {
    write_csv(
        path,
        &header,
        values.iter().enumerate().map(|(i, &v)| vec![(i + first).to_string(), num(v)]),
    )
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::runtime(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::io(path, e))
}

/// Numeric column of a CSV file: the column named `x`, else the last one.
/// A header row is detected by a non-numeric last field.
pub fn read_column(path: &Path) -> Result<Vec<f64>, Failure> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| Failure::io(path, e))?;
    let mut out = Vec::new();
    let mut col: Option<usize> = None;
    let mut first = true;
    for rec in r.records() {
        let rec = rec.map_err(|e| Failure::io(path, e))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize - 1);
        let last = rec.len() - 1;
        let header = first && rec.get(last).is_some_and(|f| f.parse::<f64>().is_err());
        first = false;
        if header {
            col = rec.iter().position(|f| f == "x").or(Some(last));
            continue;
        }
        let c = col.unwrap_or(last);
        let field = rec
            .get(c)
            .ok_or_else(|| Failure::usage(format!("{}:{}: missing column {}", path.display(), line + 1, c + 1)))?;
        let v: f64 = field
            .parse()
            .map_err(|e| Failure::usage(format!("{}:{}: {field:?}: {e}", path.display(), line + 1)))?;
        if !v.is_finite() {
            return Err(Failure::usage(format!("{}:{}: non-finite value", path.display(), line + 1)));
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn reads_headers_and_single_columns() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "t,x\n1,0.5\n2,-1.25\n").unwrap();
        assert_eq!(read_column(&a).unwrap(), vec![0.5, -1.25]);
        let b = dir.path().join("b.csv");
        fs::write(&b, "# comment\n3\n4\n\n").unwrap();
        assert_eq!(read_column(&b).unwrap(), vec![3.0, 4.0]);
        let c = dir.path().join("c.csv");
        fs::write(&c, "x\n1\nabc\n").unwrap();
        let e = read_column(&c).unwrap_err().to_string();
        assert!(e.contains(":3:"), "{e}");
    }
}
