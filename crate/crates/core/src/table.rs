//! Column tables written as CSV with `#` metadata lines before the header.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `key=value` pairs emitted as `# key=value` lines.
    pub metadata: Vec<(String, String)>,
}

impl CurveTable {
    /// Table whose first column is `t` (or another abscissa such as `n`).
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new(), metadata: Vec::new() }
    }

    /// Build from an abscissa and equally long value columns.
    pub fn from_columns(first: &str, abscissa: &[f64], columns: &[(String, Vec<f64>)]) -> Result<Self> {
        let mut table = Self::new(std::iter::once(first.to_string()).chain(columns.iter().map(|(n, _)| n.clone())));
        for (_, col) in columns {
            if col.len() != abscissa.len() {
                return Err(Error::Shape { expected: abscissa.len(), actual: col.len() });
            }
        }
        for (k, &t) in abscissa.iter().enumerate() {
            table.rows.push(std::iter::once(t).chain(columns.iter().map(|(_, c)| c[k])).collect());
        }
        Ok(table)
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Shape { expected: self.columns.len(), actual: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV text; numbers carry 17 significant digits so they parse back to
    /// the same doubles.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = loop {
            let line = lines.next().ok_or_else(|| Error::config("CSV has no header row"))?;
            match line.strip_prefix('#') {
                Some(meta) => {
                    let meta = meta.trim();
                    let (k, v) = meta.split_once('=').unwrap_or((meta, ""));
                    metadata.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        let mut table = Self::new(header.split(',').map(str::trim));
        table.metadata = metadata;
        for line in lines {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::config(format!("CSV: malformed number {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Write through a temporary file in the target directory and rename it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let t = CurveTable::from_columns("t", &[0.0, 0.5], &[("zbar".into(), vec![1.0, 1.25])])
            .unwrap()
            .with_meta("seed", 42);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("# seed=42"));
        assert_eq!(csv.lines().nth(1), Some("t,zbar"));
        let back = CurveTable::from_csv(&csv).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.meta("seed"), Some("42"));
        assert_eq!(back.column("zbar"), Some(vec![1.0, 1.25]));
    }

    #[test]
    fn ragged_columns_rejected() {
        assert!(CurveTable::from_columns("t", &[0.0, 1.0], &[("a".into(), vec![1.0])]).is_err());
        let mut t = CurveTable::new(["t", "a"]);
        assert!(t.push_row(vec![1.0]).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn round_trip_bit_identical(bits in proptest::collection::vec(any::<u64>(), 1..20)) {
            let values: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).filter(|x| x.is_finite()).collect();
            prop_assume!(!values.is_empty());
            let ts: Vec<f64> = (0..values.len()).map(|k| k as f64).collect();
            let t = CurveTable::from_columns("t", &ts, &[("v".into(), values.clone())]).unwrap();
            let back = CurveTable::from_csv(&t.to_csv()).unwrap();
            let got = back.column("v").unwrap();
            for (a, b) in values.iter().zip(&got) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
