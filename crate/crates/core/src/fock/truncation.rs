use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fock-cutoff doubling policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub n_start: usize,
    pub n_max: usize,
    pub rel_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n_start: 16, n_max: 512, rel_tol: 1e-9 }
    }
}

impl Truncation {
    pub fn new(n_start: usize, n_max: usize, rel_tol: f64) -> Result<Self> {
        let t = Truncation { n_start, n_max, rel_tol };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_start < 4 {
            return Err(Error::Domain { param: "n_start", value: self.n_start as f64, reason: "must be >= 4" });
        }
        if self.n_max < self.n_start {
            return Err(Error::Domain { param: "n_max", value: self.n_max as f64, reason: "must be >= n_start" });
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::Domain { param: "rel_tol", value: self.rel_tol, reason: "must be finite and > 0" });
        }
        Ok(())
    }

    /// Cutoffs visited: n_start, 2·n_start, … capped by a final n_max.
    pub fn ladder(&self) -> Vec<usize> {
        let mut v = vec![self.n_start];
        while *v.last().unwrap() < self.n_max {
            let next = (2 * v.last().unwrap()).min(self.n_max);
            v.push(next);
        }
        v
    }

    fn agrees(&self, prev: f64, last: f64) -> bool {
        let diff = (last - prev).abs();
        if last.abs() < 1e-8 {
            diff < 1e-12
        } else {
            diff < self.rel_tol * last.abs()
        }
    }
}

/// A value that passed the doubling test together with the cutoff used.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub n_used: usize,
}

/// Doubles the cutoff until two successive evaluations agree.
pub fn converge<F>(tr: &Truncation, mut f: F) -> Result<Converged<f64>>
where
    F: FnMut(usize) -> Result<f64>,
{
    let c = converge_many(tr, |n| Ok(vec![f(n)?]))?;
    Ok(Converged { value: c.value[0], n_used: c.n_used })
}

/// Vector form of [`converge`]: every component must pass.
pub fn converge_many<F>(tr: &Truncation, mut f: F) -> Result<Converged<Vec<f64>>>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    tr.validate()?;
    let ladder = tr.ladder();
    let (first, mut prev) = first_rung(&ladder, &mut f)?;
    let mut worst = (f64::NAN, f64::NAN);
    for &n in &ladder[first + 1..] {
        let cur = f(n)?;
        if cur.len() != prev.len() {
            return Err(Error::DimensionMismatch { left: prev.len(), right: cur.len() });
        }
        if prev.iter().zip(&cur).all(|(&a, &b)| tr.agrees(a, b)) {
            return Ok(Converged { value: cur, n_used: n });
        }
        let k = (0..cur.len())
            .max_by(|&a, &b| rel_change(prev[a], cur[a]).total_cmp(&rel_change(prev[b], cur[b])))
            .unwrap_or(0);
        worst = (prev.get(k).copied().unwrap_or(f64::NAN), cur.get(k).copied().unwrap_or(f64::NAN));
        prev = cur;
    }
    Err(Error::NonConvergence { n_max: tr.n_max, previous: worst.0, last: worst.1 })
}

/// Trace form of [`converge`]: each trace is compared in the sup norm,
/// relative to its own largest magnitude, so zero crossings do not stall
/// the doubling.
pub fn converge_traces<F>(tr: &Truncation, mut f: F) -> Result<Converged<Vec<Vec<f64>>>>
where
    F: FnMut(usize) -> Result<Vec<Vec<f64>>>,
{
    tr.validate()?;
    let ladder = tr.ladder();
    let (first, mut prev) = first_rung(&ladder, &mut f)?;
    let mut worst = (f64::NAN, f64::NAN);
    for &n in &ladder[first + 1..] {
        let cur = f(n)?;
        if cur.len() != prev.len() {
            return Err(Error::DimensionMismatch { left: prev.len(), right: cur.len() });
        }
        let mut ok = true;
        for (a, b) in prev.iter().zip(&cur) {
            let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let (k, diff) = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .enumerate()
                .fold((0, 0.0f64), |acc, (k, d)| if d > acc.1 || d.is_nan() { (k, d) } else { acc });
            let pass = if scale < 1e-8 { diff < 1e-12 } else { diff < tr.rel_tol * scale };
            if !pass {
                ok = false;
                worst = (a.get(k).copied().unwrap_or(f64::NAN), b.get(k).copied().unwrap_or(f64::NAN));
            }
        }
        if ok {
            return Ok(Converged { value: cur, n_used: n });
        }
        prev = cur;
    }
    Err(Error::NonConvergence { n_max: tr.n_max, previous: worst.0, last: worst.1 })
}

/// First rung at which the input can be represented at all; cutoffs below
/// it are skipped rather than reported.
fn first_rung<T, F>(ladder: &[usize], f: &mut F) -> Result<(usize, T)>
where
    F: FnMut(usize) -> Result<T>,
{
    for (i, &n) in ladder.iter().enumerate() {
        match f(n) {
            Err(Error::TruncationInsufficient { .. }) if i + 1 < ladder.len() => continue,
            r => return r.map(|v| (i, v)),
        }
    }
    unreachable!("ladder is never empty")
}

fn rel_change(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() / b.abs().max(1e-300);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}
