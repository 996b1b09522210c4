//! Numerical tolerances shared by classification, verification and reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that overrides [`Tolerances::default`].
pub const TOL_ENV: &str = "QUADHAM_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `|Im λ|` above `reality * max(1, |λ|)` marks a broken spectrum.
    pub reality: f64,
    /// Normalized pseudo-norm at or below this marks an exceptional point.
    pub ep: f64,
    /// Relative tolerance for matching `λ` with `-λ` and `λ*`.
    pub pairing: f64,
    /// Relative distance under which eigenvalues are treated as one cluster.
    pub cluster: f64,
    /// Relative threshold of the numerical-rank test on clusters.
    pub rank: f64,
    /// Scaled residual bound for the pseudo-Hermiticity identities.
    pub pseudo: f64,
    /// Absolute bound for symbolic ladder and constant-of-motion residuals.
    pub ladder: f64,
    /// Bound on cross pseudo-norms `|C_i† U C_j|` with `λ_j ≠ λ_i*`.
    pub orthogonality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            reality: 1e-9,
            ep: 1e-7,
            pairing: 1e-8,
            cluster: 1e-6,
            rank: 1e-6,
            pseudo: 1e-10,
            ladder: 1e-10,
            orthogonality: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad tolerance spec `{0}`: expected a number or comma-separated key=value pairs")]
pub struct ToleranceSpecError(pub String);

impl Tolerances {
    /// Parses either a bare number, which sets `pseudo`, `ladder` and
    /// `orthogonality`, or `key=value` pairs such as `reality=1e-8,ep=1e-6`.
    pub fn apply_spec(mut self, spec: &str) -> Result<Self, ToleranceSpecError> {
        let err = || ToleranceSpecError(spec.to_string());
        let spec = spec.trim();
        if let Ok(v) = spec.parse::<f64>() {
            if !(v > 0.0) {
                return Err(err());
            }
            self.pseudo = v;
            self.ladder = v;
            self.orthogonality = v;
            return Ok(self);
        }
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(err)?;
            let v: f64 = val.trim().parse().map_err(|_| err())?;
            if !(v > 0.0) {
                return Err(err());
            }
            let slot = match key.trim() {
                "reality" => &mut self.reality,
                "ep" => &mut self.ep,
                "pairing" => &mut self.pairing,
                "cluster" => &mut self.cluster,
                "rank" => &mut self.rank,
                "pseudo" => &mut self.pseudo,
                "ladder" => &mut self.ladder,
                "orthogonality" => &mut self.orthogonality,
                _ => return Err(err()),
            };
            *slot = v;
        }
        Ok(self)
    }

    /// Defaults, overridden by `QUADHAM_TOL` when set.
    pub fn from_env() -> Result<Self, ToleranceSpecError> {
        match std::env::var(TOL_ENV) {
            Ok(s) => Tolerances::default().apply_spec(&s),
            Err(_) => Ok(Tolerances::default()),
        }
    }
}
