//! Plain-text summaries and plot-ready data files for run and sweep directories.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Parsed `series.csv` or `sweep.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Config(format!("{} row {}: {e}", path.display(), n + 1)))?;
            if row.len() != header.len() {
                return Err(Error::Config(format!(
                    "{} row {} has {} cells, header has {}",
                    path.display(),
                    n + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Writes `summary.txt` plus `energy.dat` (run) or `loglog.dat` (sweep) and
/// returns the files written.
pub fn cmd_report(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    if dir.join("sweep.csv").exists() {
        sweep_report(dir)
    } else {
        run_report(dir)
    }
}

fn run_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let table = Table::read(&dir.join("series.csv"))?;
    let wanted = ["t", "l2_state", "weighted_besov", "E_s", "E_s_lambda", "E1"];
    let cols: Vec<(usize, &str)> = wanted
        .iter()
        .filter_map(|n| table.column(n).map(|i| (i, *n)))
        .collect();
    let mut summary = String::new();
    for (_, name) in &cols {
        let _ = write!(summary, "{name:>24}");
    }
    summary.push('\n');
    for row in &table.rows {
        for (i, _) in &cols {
            let _ = write!(summary, "{:>24.12e}", row[*i]);
        }
        summary.push('\n');
    }

    // time against every energy term
    let energy: Vec<usize> = std::iter::once(0)
        .chain(
            table
                .header
                .iter()
                .enumerate()
                .filter(|(_, h)| h.starts_with("E_s") || h.starts_with("E1"))
                .map(|(i, _)| i),
        )
        .collect();
    let mut dat = format!(
        "# {}\n",
        energy.iter().map(|i| table.header[*i].as_str()).collect::<Vec<_>>().join(" ")
    );
    for row in &table.rows {
        let cells: Vec<String> = energy.iter().map(|i| format!("{:.16e}", row[*i])).collect();
        dat.push_str(&cells.join(" "));
        dat.push('\n');
    }
    let s = dir.join("summary.txt");
    let e = dir.join("energy.dat");
    std::fs::write(&s, summary)?;
    std::fs::write(&e, dat)?;
    Ok(vec![s, e])
}

fn sweep_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let table = Table::read(&dir.join("sweep.csv"))?;
    let eps = table.column("eps").ok_or_else(|| Error::Config("sweep.csv has no eps column".into()))?;
    let sup = table
        .column("sup_l2_error")
        .ok_or_else(|| Error::Config("sweep.csv has no sup_l2_error column".into()))?;
    let fin = table.column("final_l2_error");
    let e1 = table.column("E1_error");

    let mut loglog = String::from("# ln_eps ln_sup_l2_error\n");
    let mut summary = format!("{:>14}{:>24}{:>24}{:>24}\n", "eps", "sup_l2_error", "final_l2_error", "E1_error");
    for row in &table.rows {
        let _ = writeln!(loglog, "{:.16e} {:.16e}", row[eps].ln(), row[sup].ln());
        let _ = writeln!(
            summary,
            "{:>14.6e}{:>24.12e}{:>24.12e}{:>24.12e}",
            row[eps],
            row[sup],
            fin.map_or(f64::NAN, |i| row[i]),
            e1.map_or(f64::NAN, |i| row[i]),
        );
    }
    if let Ok(text) = std::fs::read_to_string(dir.join("sweep.json")) {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
            match v["slope"].as_f64() {
                Some(s) => {
                    let _ = writeln!(summary, "fitted slope: {s:.6}");
                }
                None => summary.push_str("fitted slope: skipped\n"),
            }
        }
    }
    let s = dir.join("summary.txt");
    let l = dir.join("loglog.dat");
    std::fs::write(&s, summary)?;
    std::fs::write(&l, loglog)?;
    Ok(vec![s, l])
}
