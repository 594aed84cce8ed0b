//! Scan records and the deterministic worker pool shared by all scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// One record of a parameter sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub inputs: Vec<(String, Cell)>,
    pub outputs: Vec<(String, Cell)>,
    /// Fock cutoff behind the outputs; `None` for closed-form tables.
    pub n_used: Option<usize>,
    pub converged: Option<bool>,
    pub warnings: Vec<String>,
}

impl ScanRow {
    pub fn new() -> Self {
        ScanRow::default()
    }

    pub fn input(mut self, key: &str, v: impl Into<Cell>) -> Self {
        self.inputs.push((key.to_string(), v.into()));
        self
    }

    pub fn output(mut self, key: &str, v: impl Into<Cell>) -> Self {
        self.outputs.push((key.to_string(), v.into()));
        self
    }

    /// Numeric output; missing or non-finite values become an empty cell
    /// plus a warning, never a silent zero.
    pub fn number(mut self, key: &str, v: Option<f64>) -> Self {
        let cell = match v {
            Some(x) if x.is_finite() => Cell::Num(x),
            Some(x) => {
                self.warnings.push(format!("{key}: non-finite value {x}"));
                Cell::Null
            }
            None => Cell::Null,
        };
        self.outputs.push((key.to_string(), cell));
        self
    }

    pub fn warn(mut self, msg: impl Into<String>) -> Self {
        self.warnings.push(msg.into());
        self
    }

    pub fn with_convergence(mut self, n_used: usize, converged: bool) -> Self {
        self.n_used = Some(n_used);
        self.converged = Some(converged);
        self
    }

    /// Column names in emission order.
    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<String> = self.inputs.iter().chain(&self.outputs).map(|(k, _)| k.clone()).collect();
        if self.n_used.is_some() {
            c.push("n_used".into());
        }
        if self.converged.is_some() {
            c.push("converged".into());
        }
        c
    }

    /// Cells aligned with [`ScanRow::columns`].
    pub fn cells(&self) -> Vec<Cell> {
        let mut c: Vec<Cell> = self.inputs.iter().chain(&self.outputs).map(|(_, v)| v.clone()).collect();
        if let Some(n) = self.n_used {
            c.push(Cell::Int(n as i64));
        }
        if let Some(b) = self.converged {
            c.push(Cell::Bool(b));
        }
        c
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.inputs.iter().chain(&self.outputs).find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(Cell::as_f64)
    }

    pub fn is_converged(&self) -> bool {
        self.converged.unwrap_or(true)
    }
}

/// Maps `f` over `items` on a pool of `workers` threads; results keep input order.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, num: usize) -> Vec<f64> {
    match num {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..num).map(|k| start + (stop - start) * k as f64 / (num - 1) as f64).collect(),
    }
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_follow_insertion_order() {
        let r = ScanRow::new()
            .input("g", 0.5)
            .number("x", Some(1.0))
            .number("y", Some(f64::NAN))
            .with_convergence(32, true);
        assert_eq!(r.columns(), ["g", "x", "y", "n_used", "converged"]);
        assert_eq!(r.cells()[2], Cell::Null);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn pool_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = par_map(&items, 4, |&i| i * i).unwrap();
        assert_eq!(out, items.iter().map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn slopes() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((log_log_slope(&x, &y) + 1.5).abs() < 1e-12);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
