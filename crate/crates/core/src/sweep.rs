//! Phase maps over one or two parameter axes and bisection for real/non-real
//! boundaries.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Model, ModelError};
use crate::hamparse::ParamBindings;
use crate::spectra::{classify_with, eigen, Phase, PhaseLabel, SpectraError};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("bad axis `{0}`: expected name=lo:hi:n with lo < hi and n >= 2")]
    BadAxis(String),
    #[error("a sweep needs one or two axes, got {0}")]
    AxisCount(usize),
    #[error("axis parameter `{0}` appears twice")]
    DuplicateAxis(String),
    #[error("model `{model}` has no parameter `{name}`")]
    UnknownParameter { model: String, name: String },
    #[error("invalid bracket [{lo}, {hi}]: both ends classify as {phase}")]
    InvalidBracket { lo: f64, hi: f64, phase: &'static str },
    #[error("bad bracket or tolerance: need finite lo < hi and tol > 0")]
    BadBracket,
    #[error("evaluation failed at {param} = {value}: {reason}")]
    Evaluation { param: String, value: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl SweepAxis {
    pub fn new(param: &str, lo: f64, hi: f64, n: usize) -> Result<Self, SweepError> {
        let axis = SweepAxis {
            param: param.to_string(),
            lo,
            hi,
            n,
        };
        if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) || param.is_empty() {
            return Err(SweepError::BadAxis(axis.to_string()));
        }
        Ok(axis)
    }

    /// `lo + (hi - lo) * i / (n - 1)`; the last sample is exactly `hi`.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.param, self.lo, self.hi, self.n)
    }
}

impl FromStr for SweepAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SweepError::BadAxis(s.to_string());
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        SweepAxis::new(name.trim(), lo, hi, n).map_err(|_| bad())
    }
}

/// Outcome at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    /// One value per axis, in axis order.
    pub values: Vec<f64>,
    /// Classification, or the instantiation / eigensolver failure message.
    pub outcome: Result<PhaseLabel, String>,
}

impl SweepCell {
    /// `real`, `broken`, `exceptional` or `error`.
    pub fn phase_str(&self) -> &'static str {
        match &self.outcome {
            Ok(l) => l.label.as_str(),
            Err(_) => "error",
        }
    }

    pub fn phase(&self) -> Option<Phase> {
        self.outcome.as_ref().ok().map(|l| l.label)
    }

    pub fn max_im(&self) -> f64 {
        self.outcome.as_ref().map_or(f64::NAN, |l| l.max_im)
    }

    pub fn min_pseudo_norm(&self) -> f64 {
        self.outcome.as_ref().map_or(f64::NAN, |l| l.min_pseudo_norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<SweepAxis>,
    /// Row-major: the last axis varies fastest.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    /// Cell at per-axis indices.
    pub fn cell(&self, idx: &[usize]) -> &SweepCell {
        let flat = idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.n + i);
        &self.cells[flat]
    }
}

/// Classifies one parameter point.
pub fn evaluate(model: &Model, params: &ParamBindings, tol: &Tolerances) -> Result<PhaseLabel, String> {
    let inst = model.instantiate(params).map_err(|e| e.to_string())?;
    let s = eigen(&inst.adjoint).map_err(|e: SpectraError| e.to_string())?;
    Ok(classify_with(&s, tol))
}

fn check_param(model: &Model, name: &str) -> Result<(), SweepError> {
    if model.defaults.get(name).is_none() {
        return Err(SweepError::UnknownParameter {
            model: model.name.clone(),
            name: name.to_string(),
        });
    }
    Ok(())
}

/// Evaluates every grid point. Cells run on the current rayon pool; output
/// order is row-major regardless of thread count.
pub fn sweep(model: &Model, params: &ParamBindings, axes: &[SweepAxis], tol: &Tolerances) -> Result<SweepGrid, SweepError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(SweepError::AxisCount(axes.len()));
    }
    for (i, a) in axes.iter().enumerate() {
        check_param(model, &a.param)?;
        if axes[..i].iter().any(|b| b.param == a.param) {
            return Err(SweepError::DuplicateAxis(a.param.clone()));
        }
    }
    // validate the fixed bindings once so that typos fail fast
    model.bind(params).map_err(|e| match e {
        ModelError::UnknownParameter { model, name } => SweepError::UnknownParameter { model, name },
        other => SweepError::Evaluation {
            param: String::new(),
            value: f64::NAN,
            reason: other.to_string(),
        },
    })?;

    let total: usize = axes.iter().map(|a| a.n).product();
    let points: Vec<Vec<f64>> = (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut vals = vec![0.0; axes.len()];
            for (d, a) in axes.iter().enumerate().rev() {
                vals[d] = a.value(rem % a.n);
                rem /= a.n;
            }
            vals
        })
        .collect();
    let cells = points
        .into_par_iter()
        .map(|values| {
            let mut p = params.clone();
            let outcome = axes
                .iter()
                .zip(&values)
                .try_for_each(|(a, &v)| p.set(&a.param, v).map_err(|e| e.to_string()))
                .and_then(|_| evaluate(model, &p, tol));
            SweepCell { values, outcome }
        })
        .collect();
    Ok(SweepGrid {
        axes: axes.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResult {
    pub param: String,
    /// Midpoint of the final bracket.
    pub critical_value: f64,
    pub bracket_width_final: f64,
    /// Phase at the final lower end.
    pub phase_lo: Phase,
    /// Phase at the final upper end.
    pub phase_hi: Phase,
    pub steps: usize,
}

/// Largest number of halvings needed to shrink `width` to `tol`.
pub fn max_bisection_steps(width: f64, tol: f64) -> usize {
    if width <= tol {
        0
    } else {
        (width / tol).log2().ceil() as usize
    }
}

/// Bisects on the indicator `phase != Real`; exceptional counts as non-real.
pub fn find_boundary(
    model: &Model,
    params: &ParamBindings,
    param: &str,
    bracket: (f64, f64),
    tol: f64,
    tols: &Tolerances,
) -> Result<BoundaryResult, SweepError> {
    check_param(model, param)?;
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && tol > 0.0) {
        return Err(SweepError::BadBracket);
    }
    let phase_at = |v: f64| -> Result<Phase, SweepError> {
        let mut p = params.clone();
        let fail = |reason: String| SweepError::Evaluation {
            param: param.to_string(),
            value: v,
            reason,
        };
        p.set(param, v).map_err(|e| fail(e.to_string()))?;
        evaluate(model, &p, tols).map(|l| l.label).map_err(fail)
    };
    let mut phase_lo = phase_at(lo)?;
    let mut phase_hi = phase_at(hi)?;
    let lo_real = phase_lo == Phase::Real;
    if lo_real == (phase_hi == Phase::Real) {
        return Err(SweepError::InvalidBracket {
            lo,
            hi,
            phase: if lo_real { "real" } else { "non-real" },
        });
    }
    let mut steps = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let ph = phase_at(mid)?;
        if (ph == Phase::Real) == lo_real {
            lo = mid;
            phase_lo = ph;
        } else {
            hi = mid;
            phase_hi = ph;
        }
        steps += 1;
    }
    Ok(BoundaryResult {
        param: param.to_string(),
        critical_value: 0.5 * (lo + hi),
        bracket_width_final: hi - lo,
        phase_lo,
        phase_hi,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ModelId;

    fn model(id: ModelId) -> Model {
        id.spec().to_model()
    }

    #[test]
    fn axis_parsing() {
        let a: SweepAxis = "beta=-3:3:61".parse().unwrap();
        assert_eq!((a.lo, a.hi, a.n), (-3.0, 3.0, 61));
        assert_eq!(a.value(30), 0.0);
        assert_eq!(a.value(60), 3.0);
        for bad in ["beta=3:-3:5", "beta=0:1:1", "beta=0:1", "=0:1:3", "beta"] {
            assert!(bad.parse::<SweepAxis>().is_err(), "{bad}");
        }
    }

    #[test]
    fn toy2d_line() {
        let axis = SweepAxis::new("beta", -3.0, 3.0, 61).unwrap();
        let g = sweep(&model(ModelId::Toy2d), &ParamBindings::new(), &[axis], &Tolerances::default()).unwrap();
        assert_eq!(g.cells.len(), 61);
        for c in &g.cells {
            let b = c.values[0];
            if (b.abs() - 2.0).abs() < 1e-9 {
                assert_eq!(c.phase(), Some(Phase::Exceptional), "beta={b}");
            } else {
                assert_eq!(c.phase() == Some(Phase::Real), b.abs() < 2.0, "beta={b}");
            }
        }
    }

    #[test]
    fn toy1d_line() {
        let axis = SweepAxis::new("beta", 0.0, 3.0, 31).unwrap();
        let g = sweep(&model(ModelId::Toy1d), &ParamBindings::new(), &[axis], &Tolerances::default()).unwrap();
        for c in &g.cells {
            let b = c.values[0];
            if b < 2.0 - 1e-9 {
                assert_eq!(c.phase(), Some(Phase::Real), "beta={b}");
            } else if b > 2.0 + 1e-9 {
                assert_eq!(c.phase(), Some(Phase::Broken), "beta={b}");
            }
        }
    }

    #[test]
    fn singular_cells_marked() {
        let axis = SweepAxis::new("mu", -1.0, 1.0, 5).unwrap();
        let g = sweep(&model(ModelId::Lrc), &ParamBindings::new(), &[axis], &Tolerances::default()).unwrap();
        assert_eq!(g.cells[0].phase_str(), "error");
        assert_eq!(g.cells[4].phase_str(), "error");
        assert!(g.cells[2].phase().is_some());
        assert!(g.cells[0].max_im().is_nan());
    }

    #[test]
    fn precondition_errors() {
        let m = model(ModelId::Toy2d);
        let a = SweepAxis::new("beta", 0.0, 1.0, 3).unwrap();
        let t = Tolerances::default();
        assert!(matches!(sweep(&m, &ParamBindings::new(), &[], &t), Err(SweepError::AxisCount(0))));
        assert!(matches!(
            sweep(&m, &ParamBindings::new(), &[a.clone(), a.clone()], &t),
            Err(SweepError::DuplicateAxis(_))
        ));
        let bad = SweepAxis::new("alpha", 0.0, 1.0, 3).unwrap();
        assert!(matches!(
            sweep(&m, &ParamBindings::new(), &[bad], &t),
            Err(SweepError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn two_axis_order() {
        let ax = [
            SweepAxis::new("gamma", 0.0, 1.0, 3).unwrap(),
            SweepAxis::new("epsilon", 0.0, 1.0, 4).unwrap(),
        ];
        let g = sweep(&model(ModelId::GainLoss), &ParamBindings::new(), &ax, &Tolerances::default()).unwrap();
        assert_eq!(g.cells.len(), 12);
        assert_eq!(g.cells[1].values, vec![0.0, 1.0 / 3.0]);
        assert_eq!(g.cells[4].values, vec![0.5, 0.0]);
        assert_eq!(g.cell(&[1, 0]).values, vec![0.5, 0.0]);
    }

    #[test]
    fn boundaries() {
        let t = Tolerances::default();
        let r = find_boundary(&model(ModelId::Toy2d), &ParamBindings::new(), "beta", (1.0, 3.0), 1e-6, &t).unwrap();
        assert!((r.critical_value - 2.0).abs() <= 1e-6);
        assert!(r.bracket_width_final <= 1e-6);
        assert!(r.steps <= max_bisection_steps(2.0, 1e-6));
        assert_eq!(r.phase_lo, Phase::Real);

        let err = find_boundary(&model(ModelId::Toy2d), &ParamBindings::new(), "beta", (0.0, 1.0), 1e-6, &t);
        assert!(matches!(err, Err(SweepError::InvalidBracket { .. })));
        let err = find_boundary(&model(ModelId::Toy2d), &ParamBindings::new(), "beta", (1.0, 0.0), 1e-6, &t);
        assert!(matches!(err, Err(SweepError::BadBracket)));
    }

    #[test]
    fn lrc_boundary_matches_root_reality() {
        let mu: f64 = 0.5;
        let a = (mu * mu - 1.0).abs();
        // discriminant of the ξ-polynomial vanishes at γ² a = 2 (1 - sqrt(1 - μ²))
        let want = (2.0 * (1.0 - (1.0 - mu * mu).sqrt()) / a).sqrt();
        let p = ParamBindings::new().with("mu", mu).unwrap();
        let r = find_boundary(&model(ModelId::Lrc), &p, "gamma", (0.3, 1.0), 1e-7, &Tolerances::default()).unwrap();
        assert!((r.critical_value - want).abs() <= 1e-6, "{} vs {want}", r.critical_value);
    }
}
