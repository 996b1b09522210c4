//! Adjoint (regular) matrix representation of a quadratic Hamiltonian.
//!
//! Column `i` of `H` holds the expansion of `[H, O_i]` over the basis
//! `(x_1..x_K, p_1..p_K)`. Two independent constructions are provided: the
//! closed form `H = (γ + γᵗ) U` and direct symbolic commutators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamparse::GammaMatrix;
use crate::opalg::{commutator, AlgebraError, Monomial, OpSymbol, OperatorPoly};
use crate::{max_norm, C64};

pub const DEFAULT_PSEUDO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdjRepError {
    #[error("basis size K must be at least 1")]
    EmptyBasis,
    #[error("matrix dimension {got} does not match the {want}x{want} metric")]
    DimensionMismatch { got: usize, want: usize },
    #[error("matrix must be square with even dimension, got {0}x{1}")]
    BadShape(usize, usize),
    #[error("[H, {op}] is not a linear combination of basis operators: {residue}")]
    NotClosed { op: String, residue: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The commutator table `[O_i, O_j] = U_ij` of the canonical basis,
/// `U = i [[0, I], [-I, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UMatrix {
    pub k: usize,
    pub entries: DMatrix<C64>,
}

pub fn build_u(k: usize) -> Result<UMatrix, AdjRepError> {
    if k == 0 {
        return Err(AdjRepError::EmptyBasis);
    }
    let n = 2 * k;
    let mut u = DMatrix::<C64>::zeros(n, n);
    for m in 0..k {
        u[(m, k + m)] = C64::new(0.0, 1.0);
        u[(k + m, m)] = C64::new(0.0, -1.0);
    }
    Ok(UMatrix { k, entries: u })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// `H = (γ + γᵗ) U`.
    Formula,
    /// Expansion of the symbolic commutators `[H, O_i]`.
    Commutator,
    /// Read from an external file.
    Supplied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix {
    pub k: usize,
    pub entries: DMatrix<C64>,
    pub provenance: Provenance,
}

impl AdjointMatrix {
    /// Wraps a user-supplied `2K x 2K` matrix.
    pub fn supplied(entries: DMatrix<C64>) -> Result<Self, AdjRepError> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(AdjRepError::BadShape(r, c));
        }
        Ok(AdjointMatrix {
            k: r / 2,
            entries,
            provenance: Provenance::Supplied,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_norm(&self) -> f64 {
        max_norm(&self.entries)
    }
}

pub fn adjoint_matrix(gamma: &GammaMatrix) -> AdjointMatrix {
    let u = build_u(gamma.k).expect("gamma has K >= 1");
    let sym = &gamma.entries + gamma.entries.transpose();
    AdjointMatrix {
        k: gamma.k,
        entries: sym * u.entries,
        provenance: Provenance::Formula,
    }
}

pub fn adjoint_matrix_via_commutators(h: &OperatorPoly) -> Result<AdjointMatrix, AdjRepError> {
    let k = h.k();
    let n = 2 * k;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let op = OpSymbol::from_basis(i, k);
        let c = commutator(h, &OperatorPoly::symbol(k, op)?)?;
        let stray: Vec<_> = c.terms().iter().filter(|(mono, _)| mono.degree() != 1).collect();
        if !stray.is_empty() {
            let residue = stray
                .iter()
                .map(|(mono, v)| format!("{v}*{mono}"))
                .collect::<Vec<_>>()
                .join(" + ");
            return Err(AdjRepError::NotClosed {
                op: op.to_string(),
                residue,
            });
        }
        for j in 0..n {
            m[(j, i)] = c.coeff(&Monomial(vec![OpSymbol::from_basis(j, k)]));
        }
    }
    Ok(AdjointMatrix {
        k,
        entries: m,
        provenance: Provenance::Commutator,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoHermReport {
    /// `‖H†U − UH‖_max / max(1, ‖H‖_max)`.
    pub residual_pseudo: f64,
    /// `‖H† + Hᵗ‖_max / max(1, ‖H‖_max)`.
    pub residual_antireal: f64,
    pub passed: bool,
}

pub fn verify_pseudo_hermiticity(h: &AdjointMatrix, u: &UMatrix, tol: f64) -> Result<PseudoHermReport, AdjRepError> {
    let n = u.entries.nrows();
    if h.entries.nrows() != n || h.entries.ncols() != n {
        return Err(AdjRepError::DimensionMismatch {
            got: h.entries.nrows(),
            want: n,
        });
    }
    let scale = h.max_norm().max(1.0);
    let hd = h.entries.adjoint();
    let residual_pseudo = max_norm(&(&hd * &u.entries - &u.entries * &h.entries)) / scale;
    let residual_antireal = max_norm(&(&hd + h.entries.transpose())) / scale;
    Ok(PseudoHermReport {
        residual_pseudo,
        residual_antireal,
        passed: residual_pseudo <= tol && residual_antireal <= tol,
    })
}
