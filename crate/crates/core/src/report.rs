//! Versioned JSON reports and matrix files.
//!
//! Floats are written with 17 significant digits so that every report
//! re-parses to identical values. Non-finite floats are written as `null`
//! and read back as NaN.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::adjrep::{adjoint_matrix_via_commutators, build_u, verify_pseudo_hermiticity, AdjRepError, AdjointMatrix, PseudoHermReport};
use crate::catalog::Instance;
use crate::spectra::{classify_with, eigen, ground_energy_with, PhaseLabel, SpectraError};
use crate::tolerances::Tolerances;
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;

/// `f64` serialized with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(F17(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

/// Complex number as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[F17; 2]", into = "[F17; 2]")]
pub struct Cx(pub C64);

impl From<[F17; 2]> for Cx {
    fn from(v: [F17; 2]) -> Self {
        Cx(C64::new(v[0].0, v[1].0))
    }
}

impl From<Cx> for [F17; 2] {
    fn from(c: Cx) -> Self {
        [F17(c.0.re), F17(c.0.im)]
    }
}

/// Complex matrix as a list of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix(pub DMatrix<C64>);

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Cx>> = self.0.row_iter().map(|r| r.iter().map(|&c| Cx(c)).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Cx>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("matrix rows have unequal lengths"));
        }
        Ok(CMatrix(DMatrix::from_fn(n, m, |i, j| rows[i][j].0)))
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported schema version {0}, expected {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("matrix is {rows}x{cols}, expected {want}x{want} for k = {k}")]
    Shape { rows: usize, cols: usize, k: usize, want: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    AdjRep(#[from] AdjRepError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Hand-supplied adjoint matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema: u32,
    pub k: usize,
    pub entries: CMatrix,
}

impl MatrixFile {
    pub fn new(h: &AdjointMatrix) -> Self {
        MatrixFile {
            schema: SCHEMA_VERSION,
            k: h.k,
            entries: CMatrix(h.entries.clone()),
        }
    }

    pub fn from_json(src: &str) -> Result<Self, ReportError> {
        let f: MatrixFile = serde_json::from_str(src)?;
        if f.schema != SCHEMA_VERSION {
            return Err(ReportError::Schema(f.schema));
        }
        let (rows, cols) = f.entries.0.shape();
        if rows != 2 * f.k || cols != 2 * f.k {
            return Err(ReportError::Shape { rows, cols, k: f.k, want: 2 * f.k });
        }
        Ok(f)
    }

    pub fn to_adjoint(&self) -> Result<AdjointMatrix, ReportError> {
        Ok(AdjointMatrix::supplied(self.entries.0.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub k: usize,
    pub hamiltonian: String,
    pub catalog: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaInfo {
    pub entries: CMatrix,
    pub scalar_remainder: Cx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointInfo {
    pub formula: CMatrix,
    pub commutator: CMatrix,
    /// Largest entrywise difference between the two routes.
    pub route_difference: F17,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualInfo {
    pub pseudo: F17,
    pub antireal: F17,
    pub passed: bool,
}

impl From<PseudoHermReport> for ResidualInfo {
    fn from(r: PseudoHermReport) -> Self {
        ResidualInfo {
            pseudo: F17(r.residual_pseudo),
            antireal: F17(r.residual_antireal),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenInfo {
    pub value: Cx,
    pub pseudo_norm: Cx,
    pub residual: F17,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseInfo {
    pub label: String,
    pub max_im: F17,
    pub min_pseudo_norm: F17,
}

impl From<PhaseLabel> for PhaseInfo {
    fn from(l: PhaseLabel) -> Self {
        PhaseInfo {
            label: l.label.to_string(),
            max_im: F17(l.max_im),
            min_pseudo_norm: F17(l.min_pseudo_norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub model: ModelInfo,
    pub parameters: BTreeMap<String, F17>,
    pub gamma: GammaInfo,
    pub adjoint: AdjointInfo,
    pub pseudo_hermiticity: ResidualInfo,
    pub eigenvalues: Vec<EigenInfo>,
    pub phase: PhaseInfo,
    /// Present only for a real spectrum.
    pub ground_energy: Option<F17>,
}

impl AnalysisReport {
    /// Runs the full analysis of one model instance.
    pub fn build(name: &str, expression: &str, catalog: Option<&str>, inst: &Instance, tol: &Tolerances) -> Result<Self, ReportError> {
        let k = inst.gamma.k;
        let via_comm = adjoint_matrix_via_commutators(&inst.hamiltonian)?;
        let diff = (&inst.adjoint.entries - &via_comm.entries).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let u = build_u(k)?;
        let ph = verify_pseudo_hermiticity(&inst.adjoint, &u, tol.pseudo)?;
        let s = eigen(&inst.adjoint)?;
        let label = classify_with(&s, tol);
        let ground_energy = ground_energy_with(&s, tol).ok().map(F17);
        Ok(AnalysisReport {
            schema: SCHEMA_VERSION,
            model: ModelInfo {
                name: name.to_string(),
                k,
                hamiltonian: expression.to_string(),
                catalog: catalog.map(str::to_string),
            },
            parameters: inst.params.iter().map(|(n, v)| (n.to_string(), F17(v))).collect(),
            gamma: GammaInfo {
                entries: CMatrix(inst.gamma.entries.clone()),
                scalar_remainder: Cx(inst.gamma.scalar_remainder),
            },
            adjoint: AdjointInfo {
                formula: CMatrix(inst.adjoint.entries.clone()),
                commutator: CMatrix(via_comm.entries),
                route_difference: F17(diff),
            },
            pseudo_hermiticity: ph.into(),
            eigenvalues: (0..s.dim())
                .map(|i| EigenInfo {
                    value: Cx(s.values[i]),
                    pseudo_norm: Cx(s.pseudo_norms[i]),
                    residual: F17(s.residuals[i]),
                })
                .collect(),
            phase: label.into(),
            ground_energy,
        })
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(src: &str) -> Result<Self, ReportError> {
        let r: AnalysisReport = serde_json::from_str(src)?;
        if r.schema != SCHEMA_VERSION {
            return Err(ReportError::Schema(r.schema));
        }
        Ok(r)
    }
}
