//! CSV and manifest writers. Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cofrag_core::Trajectory;

pub const MANIFEST: &str = "manifest.json";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text starting with a comment line that cites the manifest.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config_hash: &str, columns: &[&str]) -> Self {
        let mut text = format!("# manifest={MANIFEST} config_hash={config_hash}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, &self.text)
    }
}

pub fn trajectory_csv(traj: &Trajectory, config_hash: &str) -> Csv {
    let mut csv = Csv::new(config_hash, &["t", "M_minus_omega", "M0", "M1", "M2", "mass_drift", "overflow_mass", "dt"]);
    for s in &traj.samples {
        let m = &s.moments;
        csv.row(&[
            num(s.t()),
            num(m[0]),
            num(m[1]),
            num(m[2]),
            num(m[3]),
            num(s.mass_drift),
            num(s.state.overflow_mass),
            num(s.dt),
        ]);
    }
    csv
}

/// Extra moment orders beyond the four standard columns, if any.
pub fn extra_moments_csv(traj: &Trajectory, config_hash: &str) -> Option<Csv> {
    if traj.moment_orders.len() <= 4 {
        return None;
    }
    let names: Vec<String> = traj.moment_orders[4..].iter().map(|xi| format!("M_{xi}")).collect();
    let mut columns = vec!["t"];
    columns.extend(names.iter().map(String::as_str));
    let mut csv = Csv::new(config_hash, &columns);
    for s in &traj.samples {
        let mut row = vec![num(s.t())];
        row.extend(s.moments[4..].iter().map(|&v| num(v)));
        csv.row(&row);
    }
    Some(csv)
}

pub fn snapshot_csv(traj: &Trajectory, index: usize, config_hash: &str) -> Csv {
    let mut csv = Csv::new(config_hash, &["cell_index", "pivot", "width", "density"]);
    let grid = &traj.grid;
    let state = &traj.samples[index].state;
    for (i, ((p, w), g)) in grid.pivots().iter().zip(grid.widths()).zip(&state.density).enumerate() {
        csv.row(&[i.to_string(), num(*p), num(*w), num(*g)]);
    }
    csv
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:04}.csv")
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Plain-text table for terminal output; the last column is left aligned.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let last = cells.len().saturating_sub(1);
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == last { c.to_string() } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, header.to_vec());
    for row in rows {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.0), "0.0000000000000000e0");
        let v = std::f64::consts::PI;
        assert_eq!(num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_cites_manifest() {
        let mut csv = Csv::new("abc", &["a", "b"]);
        csv.row(&["1".into(), "2".into()]);
        assert_eq!(csv.as_str(), "# manifest=manifest.json config_hash=abc\na,b\n1,2\n");
    }

    #[test]
    fn table_aligns_columns() {
        let t = table(&["x", "value"], &[vec!["10".into(), "1".into()]]);
        assert_eq!(t, " x  value\n10  1\n");
    }
}
