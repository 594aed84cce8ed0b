//! Central differences with a Richardson check over steps {h, h/2}.

use crate::error::{Error, Result};

/// Relative disagreement between the h and h/2 estimates above which the
/// Richardson-extrapolated value is reported.
pub const RICHARDSON_TRIGGER: f64 = 1e-7;

/// Disagreement beyond which the difference quotient is considered unusable
/// (step too large for the curvature, or too small for the arithmetic).
pub const UNSTABLE_TRIGGER: f64 = 1e-2;

/// Derivative estimate with its two raw quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    pub richardson: bool,
}

impl Derivative {
    /// Combines estimates from steps h and h/2 of a second-order scheme.
    pub fn combine(coarse: f64, fine: f64) -> Result<Self> {
        let scale = coarse.abs().max(fine.abs());
        if scale == 0.0 {
            return Ok(Derivative { value: 0.0, coarse, fine, richardson: false });
        }
        let gap = (coarse - fine).abs() / scale;
        if !gap.is_finite() {
            return Err(Error::Numerical("non-finite difference quotient".into()));
        }
        if gap > UNSTABLE_TRIGGER {
            return Err(Error::Numerical(format!(
                "difference quotients at h and h/2 disagree by {gap:e} (coarse {coarse}, fine {fine})"
            )));
        }
        if gap > RICHARDSON_TRIGGER {
            Ok(Derivative { value: (4.0 * fine - coarse) / 3.0, coarse, fine, richardson: true })
        } else {
            Ok(Derivative { value: fine, coarse, fine, richardson: false })
        }
    }
}

/// Step `rel·|x|`, floored so that x = 0 still gets a usable step.
pub fn relative_step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1e-3)
}

/// f'(x) by central differences at h and h/2.
pub fn central_difference<F>(mut f: F, x: f64, h: f64) -> Result<Derivative>
where
    F: FnMut(f64) -> Result<f64>,
{
    let d = central_difference_many(|y| Ok(vec![f(y)?]), x, h)?;
    Ok(d[0])
}

/// Component-wise derivative of a vector-valued function; each component is
/// checked independently.
pub fn central_difference_many<F>(mut f: F, x: f64, h: f64) -> Result<Vec<Derivative>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain { param: "step", value: h, reason: "must be finite and > 0" });
    }
    let (p1, m1) = (f(x + h)?, f(x - h)?);
    let (p2, m2) = (f(x + h / 2.0)?, f(x - h / 2.0)?);
    (0..p1.len())
        .map(|k| Derivative::combine((p1[k] - m1[k]) / (2.0 * h), (p2[k] - m2[k]) / h))
        .collect()
}

/// Derivative of a whole trace, with the Richardson decision taken on the
/// sup norm of the trace (components crossing zero do not trip the check).
pub fn central_difference_trace<F>(mut f: F, x: f64, h: f64) -> Result<(Vec<f64>, bool)>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain { param: "step", value: h, reason: "must be finite and > 0" });
    }
    let (p1, m1) = (f(x + h)?, f(x - h)?);
    let (p2, m2) = (f(x + h / 2.0)?, f(x - h / 2.0)?);
    let coarse: Vec<f64> = p1.iter().zip(&m1).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let fine: Vec<f64> = p2.iter().zip(&m2).map(|(a, b)| (a - b) / h).collect();
    let scale = fine.iter().chain(&coarse).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok((fine, false));
    }
    let gap = coarse.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
    if !gap.is_finite() || gap > UNSTABLE_TRIGGER {
        return Err(Error::Numerical(format!("trace difference quotients at h and h/2 disagree by {gap:e}")));
    }
    if gap > RICHARDSON_TRIGGER {
        Ok((coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect(), true))
    } else {
        Ok((fine, false))
    }
}
