//! Eigen-decomposition of adjoint matrices, pseudo-norms, ± pairing, phase
//! classification, ladder operators and ground-state energies.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjrep::{build_u, AdjointMatrix, UMatrix};
use crate::eig;
use crate::opalg::{adjoint, commutator, AlgebraError, OpSymbol, OperatorPoly};
use crate::tolerances::Tolerances;
use crate::{max_norm, C64};

/// Largest matrix dimension accepted by [`eigen`].
pub const MAX_DIM: usize = 64;
/// Relative eigenpair residual bound.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Dimension up to which the characteristic-polynomial route cross-checks QR.
pub const CHARPOLY_CROSSCHECK_DIM: usize = 8;
/// Disagreement between the two characteristic-polynomial routes treated as
/// failure; coefficient `j` is measured against `max(1, ‖H‖)^j`.
pub const CROSSCHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("matrix dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge(usize),
    #[error("eigensolver failed: {reason}")]
    NumericalFailure { reason: String, partial: Vec<C64> },
    #[error("zero vector has no pseudo-norm")]
    ZeroVector,
    #[error("dimension mismatch: vector of length {got}, metric of size {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("eigenvalue {0} has no partner within tolerance")]
    PairingFailure(C64),
    #[error("spectrum is {0:?}, operation needs a real spectrum")]
    Phase(Phase),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Eigen-decomposition of an adjoint matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub k: usize,
    /// The decomposed matrix.
    pub matrix: DMatrix<C64>,
    /// Eigenvalues sorted by real part, then imaginary part.
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors as columns, aligned with `values`.
    pub vectors: DMatrix<C64>,
    /// `‖H C − λ C‖ / max(1, ‖H‖)` per pair.
    pub residuals: Vec<f64>,
    /// `C† U C` per pair.
    pub pseudo_norms: Vec<C64>,
    /// Largest scaled coefficient gap between `∏(λ − λ_i)` over the QR
    /// eigenvalues and the Faddeev–LeVerrier polynomial, when the cross-check ran.
    pub crosscheck: Option<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }

    pub fn ladder(&self, i: usize) -> LadderVector {
        LadderVector {
            coefficients: self.vector(i),
            eigenvalue: self.values[i],
        }
    }

    /// Gram-like matrix `G_ij = C_i† U C_j` over all eigenvectors.
    pub fn pseudo_gram(&self) -> DMatrix<C64> {
        let u = build_u(self.k).expect("K >= 1");
        self.vectors.adjoint() * u.entries * &self.vectors
    }

    pub fn matrix_scale(&self) -> f64 {
        max_norm(&self.matrix).max(1.0)
    }
}

/// Orders `idx` by real part, grouping real parts that agree to `tol`
/// relative and ordering each group by imaginary part.
fn sort_order(values: &[C64], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() {
            let (a, b) = (values[idx[end - 1]], values[idx[end]]);
            if (b.re - a.re) <= tol * a.norm().max(b.norm()).max(1.0) {
                end += 1;
            } else {
                break;
            }
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| values[a].im.total_cmp(&values[b].im));
        out.extend(group);
        start = end;
    }
    out
}

pub fn eigen(h: &AdjointMatrix) -> Result<Spectrum, SpectraError> {
    let n = h.dim();
    if n > MAX_DIM {
        return Err(SpectraError::TooLarge(n));
    }
    let a = &h.entries;
    let schur = eig::schur(a).map_err(|e| SpectraError::NumericalFailure {
        reason: format!("QR iteration did not converge after {} sweeps", e.iterations),
        partial: e.converged,
    })?;
    let raw_values: Vec<C64> = (0..n).map(|i| schur.t[(i, i)]).collect();
    let mut raw_vectors = &schur.z * eig::triangular_eigenvectors(&schur.t);
    for j in 0..n {
        let nrm = raw_vectors.column(j).norm();
        if nrm > 0.0 && nrm.is_finite() {
            raw_vectors.column_mut(j).unscale_mut(nrm);
        }
    }

    let order = sort_order(&raw_values, 1e-9);
    let values: Vec<C64> = order.iter().map(|&i| raw_values[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| raw_vectors[(r, order[c])]);

    let scale = max_norm(a).max(1.0);
    let mut residuals = Vec::with_capacity(n);
    for (j, &lambda) in values.iter().enumerate() {
        let col = vectors.column(j);
        let r = (a * col - col * lambda).norm() / scale;
        if !(r <= RESIDUAL_TOL) {
            return Err(SpectraError::NumericalFailure {
                reason: format!("eigenpair {j} residual {r:.3e} exceeds {RESIDUAL_TOL:.0e}"),
                partial: values.clone(),
            });
        }
        residuals.push(r);
    }

    let u = build_u(h.k).expect("K >= 1");
    let pseudo_norms = (0..n)
        .map(|j| {
            let c = vectors.column(j);
            (c.adjoint() * &u.entries * c)[(0, 0)]
        })
        .collect();

    let crosscheck = if n <= CHARPOLY_CROSSCHECK_DIM {
        let gap = crosscheck_gap(a, &values);
        if gap > CROSSCHECK_TOL {
            return Err(SpectraError::NumericalFailure {
                reason: format!("QR eigenvalues and characteristic polynomial disagree by {gap:.3e}"),
                partial: values,
            });
        }
        Some(gap)
    } else {
        None
    };

    Ok(Spectrum {
        k: h.k,
        matrix: a.clone(),
        values,
        vectors,
        residuals,
        pseudo_norms,
        crosscheck,
    })
}

/// Largest scaled coefficient gap between the polynomial with roots `values`
/// and the characteristic polynomial of `a`. Coefficients rather than roots,
/// since roots in a defective cluster move like the m-th root of a perturbation.
fn crosscheck_gap(a: &DMatrix<C64>, values: &[C64]) -> f64 {
    let want = eig::charpoly(a);
    let mut got = vec![C64::new(1.0, 0.0)];
    for v in values {
        got.push(C64::new(0.0, 0.0));
        for j in (1..got.len()).rev() {
            let prev = got[j - 1];
            got[j] -= prev * v;
        }
    }
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    let scale = max_norm(a).max(1.0);
    got.iter()
        .zip(&want)
        .enumerate()
        .map(|(j, (g, w))| (g - w).norm() / scale.powi(j as i32))
        .fold(0.0, f64::max)
}

/// Eigenvalues from the characteristic polynomial alone (no QR).
pub fn eigenvalues_via_charpoly(h: &AdjointMatrix) -> Vec<C64> {
    eig::poly_roots(&eig::charpoly(&h.entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Real,
    Broken,
    Exceptional,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Real => "real",
            Phase::Broken => "broken",
            Phase::Exceptional => "exceptional",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Phase::Real),
            "broken" => Ok(Phase::Broken),
            "exceptional" => Ok(Phase::Exceptional),
            other => Err(format!("unknown phase `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub label: Phase,
    pub max_im: f64,
    pub min_pseudo_norm: f64,
}

/// Single-linkage clusters of eigenvalues closer than `tol * max(1, |λ|)`.
pub fn clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = values[i].norm().max(values[j].norm()).max(1.0);
            if (values[i] - values[j]).norm() <= tol * s {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// True when the eigenvalue cluster `members` (centered at their mean) has
/// geometric multiplicity below its algebraic size.
pub fn is_defective(s: &Spectrum, members: &[usize], rank_tol: f64) -> bool {
    if members.len() < 2 {
        return false;
    }
    let n = s.dim();
    let mu = members.iter().map(|&i| s.values[i]).sum::<C64>() / members.len() as f64;
    let shifted = &s.matrix - DMatrix::<C64>::identity(n, n) * mu;
    let rank = eig::numerical_rank(&shifted, rank_tol * s.matrix_scale());
    n - rank < members.len()
}

/// Classification with default cluster and rank tolerances.
pub fn classify(s: &Spectrum, reality_tol: f64, ep_tol: f64) -> PhaseLabel {
    let tol = Tolerances {
        reality: reality_tol,
        ep: ep_tol,
        ..Tolerances::default()
    };
    classify_with(s, &tol)
}

/// Real, broken or exceptional.
///
/// Eigenvalues are clustered first so that a defective pair split by rounding
/// into `μ ± iδ` is judged by its (real) center. A cluster whose center is
/// off the real axis makes the spectrum broken. Otherwise the spectrum is
/// exceptional when a cluster is defective by the rank test, or a simple
/// eigenvalue has a vanishing pseudo-norm.
pub fn classify_with(s: &Spectrum, tol: &Tolerances) -> PhaseLabel {
    let max_im = s.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let min_pseudo_norm = s.pseudo_norms.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    let groups = clusters(&s.values, tol.cluster);

    let broken = groups.iter().any(|g| {
        let mu = g.iter().map(|&i| s.values[i]).sum::<C64>() / g.len() as f64;
        mu.im.abs() > tol.reality * mu.norm().max(1.0)
    });
    let label = if broken {
        Phase::Broken
    } else {
        let exceptional = groups.iter().any(|g| {
            if g.len() == 1 {
                s.pseudo_norms[g[0]].norm() <= tol.ep
            } else {
                is_defective(s, g, tol.rank)
            }
        });
        if exceptional {
            Phase::Exceptional
        } else {
            Phase::Real
        }
    };
    PhaseLabel {
        label,
        max_im,
        min_pseudo_norm,
    }
}

/// `C† U C` for a unit-normalized copy of `c`.
pub fn pseudo_norm(c: &DVector<C64>, u: &UMatrix) -> Result<C64, SpectraError> {
    if c.len() != u.entries.nrows() {
        return Err(SpectraError::DimensionMismatch {
            got: c.len(),
            want: u.entries.nrows(),
        });
    }
    let nrm = c.norm();
    if nrm == 0.0 {
        return Err(SpectraError::ZeroVector);
    }
    let cn = c.unscale(nrm);
    Ok((cn.adjoint() * &u.entries * &cn)[(0, 0)])
}

/// Eigenvalues grouped into `{-λ, +λ}` pairs and conjugate pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    /// `(negative member, positive member)`; "positive" has `Re > 0`, or
    /// `Im >= 0` when the real part vanishes.
    pub plus_minus: Vec<(C64, C64)>,
    /// `(λ, λ*)` with `Im λ > 0`, for non-real eigenvalues.
    pub conjugate: Vec<(C64, C64)>,
    /// All values in increasing order of real part, then imaginary part.
    pub ordered: Vec<C64>,
}

fn greedy_pairs(values: &[C64], partner: impl Fn(C64) -> C64, tol: f64) -> Result<Vec<(usize, usize)>, SpectraError> {
    let n = values.len();
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = partner(values[i]);
        let best = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (values[a] - target).norm().total_cmp(&(values[b] - target).norm()));
        match best {
            Some(j) if (values[j] - target).norm() <= tol * values[i].norm().max(1.0) => {
                used[j] = true;
                out.push((i, j));
            }
            _ => return Err(SpectraError::PairingFailure(values[i])),
        }
    }
    Ok(out)
}

fn is_positive_member(v: C64, tol: f64) -> bool {
    if v.re.abs() > tol * v.norm().max(1.0) {
        v.re > 0.0
    } else {
        v.im >= 0.0
    }
}

pub fn pair_spectrum(values: &[C64], tol: f64) -> Result<Pairing, SpectraError> {
    let order = sort_order(values, tol);
    let ordered: Vec<C64> = order.iter().map(|&i| values[i]).collect();

    let pm = greedy_pairs(&ordered, |v| -v, tol)?;
    let plus_minus = pm
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (ordered[i], ordered[j]);
            if is_positive_member(b, tol) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();

    let complex: Vec<C64> = ordered
        .iter()
        .copied()
        .filter(|v| v.im.abs() > tol * v.norm().max(1.0))
        .collect();
    let cj = greedy_pairs(&complex, |v| v.conj(), tol)?;
    let conjugate = cj
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (complex[i], complex[j]);
            if a.im >= b.im {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();

    Ok(Pairing {
        plus_minus,
        conjugate,
        ordered,
    })
}

/// Coefficients of `Z = Σ c_i O_i` with `[H, Z] = λ Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderVector {
    pub coefficients: DVector<C64>,
    pub eigenvalue: C64,
}

impl LadderVector {
    pub fn k(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn operator(&self) -> Result<OperatorPoly, SpectraError> {
        let k = self.k();
        let words = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| (vec![OpSymbol::from_basis(i, k)], *c));
        Ok(OperatorPoly::from_words(k, words)?)
    }
}

/// Largest coefficient of `[H, Z] − λZ` and of `[H, Z†] + λ* Z†`.
pub fn ladder_residual(h: &OperatorPoly, z: &LadderVector) -> Result<f64, SpectraError> {
    let zop = z.operator()?;
    let lambda = z.eigenvalue;
    let forward = commutator(h, &zop)?.sub(&zop.scale(lambda))?.max_abs_coeff();
    let zd = adjoint(&zop);
    let backward = commutator(h, &zd)?.add(&zd.scale(lambda.conj()))?.max_abs_coeff();
    Ok(forward.max(backward))
}

/// Largest coefficient of `[H, Z†Z]`; only defined for real `λ`.
pub fn constant_of_motion_residual(h: &OperatorPoly, z: &LadderVector, reality_tol: f64) -> Result<f64, SpectraError> {
    let lambda = z.eigenvalue;
    if lambda.im.abs() > reality_tol * lambda.norm().max(1.0) {
        return Err(SpectraError::NotApplicable(format!("eigenvalue {lambda} is not real")));
    }
    let zop = z.operator()?;
    let number = adjoint(&zop).mul(&zop)?;
    Ok(commutator(h, &number)?.max_abs_coeff())
}

/// Half the sum of the positive eigenvalues; requires a real spectrum.
pub fn ground_energy(s: &Spectrum) -> Result<f64, SpectraError> {
    ground_energy_with(s, &Tolerances::default())
}

pub fn ground_energy_with(s: &Spectrum, tol: &Tolerances) -> Result<f64, SpectraError> {
    let phase = classify_with(s, tol);
    if phase.label != Phase::Real {
        return Err(SpectraError::Phase(phase.label));
    }
    let p = pair_spectrum(&s.values, tol.pairing)?;
    Ok(0.5 * p.plus_minus.iter().map(|(_, pos)| pos.re).sum::<f64>())
}
