//! Built-in models with closed-form characteristic polynomials in `ξ = λ²`.
//!
//! | id          | K | parameters (defaults)                       |
//! |-------------|---|---------------------------------------------|
//! | `toy1d`     | 1 | `alpha` (1), `beta` (1)                     |
//! | `toy2d`     | 2 | `beta` (1)                                  |
//! | `gainloss`  | 2 | `omega` (1), `gamma` (0.1), `epsilon` (0.5) |
//! | `selfforce` | 4 | `m` (1), `tau` (1), `k` (1), `A` (0), `B` (0)|
//! | `lrc`       | 2 | `mu` (0.2), `gamma` (0.1)                   |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjrep::{adjoint_matrix, AdjointMatrix};
use crate::hamparse::{extract_gamma_with, parse, GammaError, GAMMA_TOL, GammaMatrix, ParamBindings, ParseError};
use crate::opalg::OperatorPoly;
use crate::C64;

/// `lrc` is singular where `1 - μ² = 0`.
pub const LRC_SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown model `{0}`; expected one of toy1d, toy2d, gainloss, selfforce, lrc")]
    UnknownModel(String),
    #[error("model `{model}` has no parameter `{name}`")]
    UnknownParameter { model: String, name: String },
    #[error("singular parameters: {0}")]
    Singular(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Toy1d,
    Toy2d,
    GainLoss,
    SelfForce,
    Lrc,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::Toy1d,
        ModelId::Toy2d,
        ModelId::GainLoss,
        ModelId::SelfForce,
        ModelId::Lrc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::Toy1d => "toy1d",
            ModelId::Toy2d => "toy2d",
            ModelId::GainLoss => "gainloss",
            ModelId::SelfForce => "selfforce",
            ModelId::Lrc => "lrc",
        }
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            ModelId::Toy1d => ModelSpec {
                id: *self,
                k: 1,
                expression: "p^2 + alpha*x^2 + (beta/2)*(x*p + p*x)",
                defaults: &[("alpha", 1.0), ("beta", 1.0)],
            },
            ModelId::Toy2d => ModelSpec {
                id: *self,
                k: 2,
                expression: "px^2 + py^2 + x^2 + y^2 + beta*x*y",
                defaults: &[("beta", 1.0)],
            },
            ModelId::GainLoss => ModelSpec {
                id: *self,
                k: 2,
                expression: "px*py + gamma*(y*py - x*px) + (omega^2 - gamma^2)*x*y + (epsilon/2)*(x^2 + y^2)",
                defaults: &[("omega", 1.0), ("gamma", 0.1), ("epsilon", 0.5)],
            },
            ModelId::SelfForce => ModelSpec {
                id: *self,
                k: 4,
                expression: "B*(w*pz - z*pw)/(m*tau) + 2*pz*pw/(m*tau^2) + (px*pw - py*pz)/(m*tau) \
                             - m*z*w/2 + (w*py + z*px)/2 + k*x*y + A*(x^2 + y^2)/2",
                defaults: &[("m", 1.0), ("tau", 1.0), ("k", 1.0), ("A", 0.0), ("B", 0.0)],
            },
            ModelId::Lrc => ModelSpec {
                id: *self,
                k: 2,
                expression: "px*py + (gamma/2)*(x*px - y*py) + (1/(1 - mu^2) - gamma^2/4)*x*y \
                             - mu/(2*(1 - mu^2))*(x^2 + y^2)",
                defaults: &[("mu", 0.2), ("gamma", 0.1)],
            },
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub k: usize,
    pub expression: &'static str,
    pub defaults: &'static [(&'static str, f64)],
}

impl ModelSpec {
    pub fn to_model(&self) -> Model {
        Model {
            name: self.id.as_str().to_string(),
            k: self.k,
            expression: self.expression.to_string(),
            defaults: self.defaults.iter().copied().collect(),
            catalog: Some(self.id),
        }
    }
}

/// A parameterized Hamiltonian: either a catalog entry or a user model file.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub k: usize,
    pub expression: String,
    pub defaults: ParamBindings,
    pub catalog: Option<ModelId>,
}

/// Everything built from one parameter point.
#[derive(Debug, Clone)]
pub struct Instance {
    pub params: ParamBindings,
    pub hamiltonian: OperatorPoly,
    pub gamma: GammaMatrix,
    pub adjoint: AdjointMatrix,
}

impl Model {
    /// Defaults overridden by `overrides`; unknown names are rejected.
    pub fn bind(&self, overrides: &ParamBindings) -> Result<ParamBindings, ModelError> {
        let mut out = self.defaults.clone();
        for (name, v) in overrides.iter() {
            if self.defaults.get(name).is_none() {
                return Err(ModelError::UnknownParameter {
                    model: self.name.clone(),
                    name: name.to_string(),
                });
            }
            out.set(name, v)?;
        }
        Ok(out)
    }

    pub fn instantiate(&self, overrides: &ParamBindings) -> Result<Instance, ModelError> {
        self.instantiate_with(overrides, false)
    }

    /// As [`Model::instantiate`]; `permissive` skips the Hermiticity check on γ.
    pub fn instantiate_with(&self, overrides: &ParamBindings, permissive: bool) -> Result<Instance, ModelError> {
        let params = self.bind(overrides)?;
        if self.catalog == Some(ModelId::Lrc) {
            let mu = params.get("mu").unwrap_or_default();
            if (1.0 - mu * mu).abs() < LRC_SINGULAR_TOL {
                return Err(ModelError::Singular(format!("lrc requires |mu| != 1, got mu = {mu}")));
            }
        }
        let hamiltonian = parse(&self.expression, &params, self.k)?;
        let gamma = extract_gamma_with(&hamiltonian, GAMMA_TOL, permissive)?;
        let adjoint = adjoint_matrix(&gamma);
        Ok(Instance {
            params,
            hamiltonian,
            gamma,
            adjoint,
        })
    }
}

/// Builds γ and the adjoint matrix of a catalog model.
pub fn instantiate(id: ModelId, params: &ParamBindings) -> Result<(GammaMatrix, AdjointMatrix), ModelError> {
    let inst = id.spec().to_model().instantiate(params)?;
    Ok((inst.gamma, inst.adjoint))
}

/// Polynomial in `ξ = λ²`, highest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolyXi {
    pub coeffs: Vec<f64>,
}

impl CharPolyXi {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, xi: C64) -> C64 {
        self.coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * xi + c)
    }

    /// `|p(ξ)| / Σ |c_k| |ξ|^k`.
    pub fn relative_residual(&self, xi: C64) -> f64 {
        let mag = self.coeffs.iter().fold(0.0, |acc, &c| acc * xi.norm() + c.abs());
        let v = self.eval(xi).norm();
        if mag == 0.0 {
            v
        } else {
            v / mag
        }
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn bound(id: ModelId, params: &ParamBindings) -> Result<ParamBindings, ModelError> {
    id.spec().to_model().bind(params)
}

/// Self-force factors: linear `m²τ²ξ − B² + m²` and the cubic.
fn selfforce_factors(p: &ParamBindings) -> ([f64; 2], [f64; 4]) {
    let g = |n: &str| p.get(n).unwrap_or_default();
    let (m, tau, k, a, b) = (g("m"), g("tau"), g("k"), g("A"), g("B"));
    let m2t2 = m * m * tau * tau;
    (
        [m2t2, m * m - b * b],
        [m2t2, m * m - b * b, 2.0 * (a * b - k * m), k * k - a * a],
    )
}

pub fn charpoly_xi(id: ModelId, params: &ParamBindings) -> Result<CharPolyXi, ModelError> {
    let p = bound(id, params)?;
    let g = |n: &str| p.get(n).unwrap_or_default();
    let coeffs = match id {
        ModelId::Toy1d => {
            let (a, b) = (g("alpha"), g("beta"));
            vec![1.0, -(4.0 * a - b * b)]
        }
        ModelId::Toy2d => {
            let b = g("beta");
            vec![1.0, -8.0, 16.0 - 4.0 * b * b]
        }
        ModelId::GainLoss => {
            let (w, gm, e) = (g("omega"), g("gamma"), g("epsilon"));
            vec![1.0, 2.0 * (2.0 * gm * gm - w * w), w.powi(4) - e * e]
        }
        ModelId::SelfForce => {
            let (lin, cubic) = selfforce_factors(&p);
            poly_mul(&lin, &cubic)
        }
        ModelId::Lrc => {
            let (mu, gm) = (g("mu"), g("gamma"));
            let a = mu * mu - 1.0;
            vec![a, gm * gm * a + 2.0, -1.0]
        }
    };
    Ok(CharPolyXi { coeffs })
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [C64; 2] {
    let disc = C64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    // avoid cancellation
    let q = if b >= 0.0 { -(C64::new(b, 0.0) + disc) * 0.5 } else { -(C64::new(b, 0.0) - disc) * 0.5 };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    [q / a, C64::new(c, 0.0) / q]
}

/// Roots of `a ξ³ + b ξ² + c ξ + d` from the depressed-cubic closed form,
/// each polished by guarded Newton steps.
pub fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> [C64; 3] {
    if d == 0.0 {
        let [r1, r2] = quadratic_roots(a, b, c);
        return [C64::new(0.0, 0.0), r1, r2];
    }
    let (a, b, c, d) = (C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0));
    let shift = b / (a * 3.0);
    let p = (a * c * 3.0 - b * b) / (a * a * 3.0);
    let q = (b * b * b * 2.0 - a * b * c * 9.0 + a * a * d * 27.0) / (a * a * a * 27.0);
    let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + s;
    if u3.norm() < (-q / 2.0 - s).norm() {
        u3 = -q / 2.0 - s;
    }
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [C64::new(0.0, 0.0); 3];
    if u3.norm() == 0.0 {
        roots = [-shift; 3];
    } else {
        let u = u3.powf(1.0 / 3.0);
        let mut w = C64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let uk = u * w;
            *r = uk - p / (uk * 3.0) - shift;
            w *= omega;
        }
    }
    let f = |x: C64| ((a * x + b) * x + c) * x + d;
    let df = |x: C64| (a * x * 3.0 + b * 2.0) * x + c;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let dv = df(*r);
            if dv.norm() == 0.0 {
                break;
            }
            let next = *r - f(*r) / dv;
            if next.is_finite() && f(next).norm() < f(*r).norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots
}

/// Closed-form roots in `ξ`.
pub fn closed_form_roots(id: ModelId, params: &ParamBindings) -> Result<Vec<C64>, ModelError> {
    let p = bound(id, params)?;
    let g = |n: &str| p.get(n).unwrap_or_default();
    let c = |x: f64| C64::new(x, 0.0);
    Ok(match id {
        ModelId::Toy1d => vec![c(4.0 * g("alpha") - g("beta").powi(2))],
        ModelId::Toy2d => {
            let b = g("beta");
            vec![c(2.0 * (2.0 - b)), c(2.0 * (2.0 + b))]
        }
        ModelId::GainLoss => {
            let (w, gm, e) = (g("omega"), g("gamma"), g("epsilon"));
            quadratic_roots(1.0, 2.0 * (2.0 * gm * gm - w * w), w.powi(4) - e * e).to_vec()
        }
        ModelId::SelfForce => {
            let (m, tau, b) = (g("m"), g("tau"), g("B"));
            let (_, cu) = selfforce_factors(&p);
            let mut out = vec![c((b * b - m * m) / (m * m * tau * tau))];
            out.extend(cubic_roots(cu[0], cu[1], cu[2], cu[3]));
            out
        }
        ModelId::Lrc => {
            let (mu, gm) = (g("mu"), g("gamma"));
            let a = mu * mu - 1.0;
            let g2 = gm * gm;
            let root = c(g2 * g2 * a * a + 4.0 * g2 * a + 4.0 * mu * mu).sqrt();
            let xi1 = (root + g2 * (1.0 - mu * mu) - 2.0) / (2.0 * a);
            let xi2 = (root + g2 * a + 2.0) / (2.0 * (1.0 - mu * mu));
            vec![xi1, xi2]
        }
    })
}
