//! Structural checks behind `quadham verify`.

use std::fmt;

use quadham::adjrep::{adjoint_matrix_via_commutators, build_u, verify_pseudo_hermiticity, AdjointMatrix};
use quadham::opalg::OperatorPoly;
use quadham::spectra::{
    clusters, constant_of_motion_residual, eigen, ladder_residual, pair_spectrum, SpectraError, Spectrum,
};
use quadham::{max_norm, Tolerances};

/// Entrywise agreement required between the two adjoint-matrix routes,
/// relative to `max(1, ‖H‖)`.
pub const ROUTE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{tag}  {:<22} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, ok: bool, detail: String) -> Check {
    Check {
        name,
        outcome: if ok { Outcome::Pass } else { Outcome::Fail },
        detail,
    }
}

fn skip(name: &'static str, why: &str) -> Check {
    Check {
        name,
        outcome: Outcome::Skip,
        detail: why.to_string(),
    }
}

/// Runs every check. `hamiltonian` enables the checks that need the operator
/// itself; a bare matrix gets only the matrix-level ones.
pub fn run_checks(h: &AdjointMatrix, hamiltonian: Option<&OperatorPoly>, tol: &Tolerances) -> Result<Vec<Check>, SpectraError> {
    let scale = max_norm(&h.entries).max(1.0);
    let mut out = Vec::new();

    let u = build_u(h.k).map_err(|e| SpectraError::NotApplicable(e.to_string()))?;
    match verify_pseudo_hermiticity(h, &u, tol.pseudo) {
        Ok(r) => out.push(check(
            "pseudo-hermiticity",
            r.passed,
            format!("|H†U-UH| = {:.3e}, |H†+Hᵗ| = {:.3e} (tol {:.1e})", r.residual_pseudo, r.residual_antireal, tol.pseudo),
        )),
        Err(e) => out.push(check("pseudo-hermiticity", false, e.to_string())),
    }

    match hamiltonian {
        Some(op) => match adjoint_matrix_via_commutators(op) {
            Ok(c) => {
                let d = (&h.entries - &c.entries).iter().map(|v| v.norm()).fold(0.0, f64::max);
                out.push(check(
                    "two-route equality",
                    d <= ROUTE_TOL * scale,
                    format!("max |formula - commutator| = {d:.3e} (tol {:.1e})", ROUTE_TOL * scale),
                ));
            }
            Err(e) => out.push(check("two-route equality", false, e.to_string())),
        },
        None => out.push(skip("two-route equality", "no operator for a supplied matrix")),
    }

    let s = eigen(h)?;
    match pair_spectrum(&s.values, tol.pairing) {
        Ok(p) => out.push(check(
            "spectrum pairing",
            true,
            format!("{} ± pairs, {} conjugate pairs", p.plus_minus.len(), p.conjugate.len()),
        )),
        Err(e) => out.push(check("spectrum pairing", false, e.to_string())),
    }

    let worst = orthogonality_defect(&s, tol.cluster);
    out.push(check(
        "pseudo-orthogonality",
        worst <= tol.orthogonality,
        format!("max |C_i† U C_j| over λ_j ≠ λ_i* = {worst:.3e} (tol {:.1e})", tol.orthogonality),
    ));

    match hamiltonian {
        Some(op) => out.push(ladder_check(op, &s, tol, scale)?),
        None => out.push(skip("ladder residuals", "no operator for a supplied matrix")),
    }
    Ok(out)
}

/// Largest `|C_i† U C_j|` over pairs with `λ_j` away from `λ_i*`, including the
/// diagonal for non-real `λ_i`.
pub fn orthogonality_defect(s: &Spectrum, cluster_tol: f64) -> f64 {
    let g = s.pseudo_gram();
    let n = s.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (s.values[i], s.values[j]);
            let near = (lj - li.conj()).norm() <= cluster_tol * li.norm().max(lj.norm()).max(1.0);
            if !near {
                worst = worst.max(g[(i, j)].norm());
            }
        }
    }
    worst
}

fn ladder_check(op: &OperatorPoly, s: &Spectrum, tol: &Tolerances, scale: f64) -> Result<Check, SpectraError> {
    let bound = tol.ladder * scale;
    let (mut ladder, mut motion, mut simple, mut real) = (0.0f64, 0.0f64, 0, 0);
    for g in clusters(&s.values, tol.cluster) {
        let [i] = g[..] else { continue };
        let z = s.ladder(i);
        ladder = ladder.max(ladder_residual(op, &z)?);
        simple += 1;
        match constant_of_motion_residual(op, &z, tol.reality) {
            Ok(r) => {
                motion = motion.max(r);
                real += 1;
            }
            Err(SpectraError::NotApplicable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if simple == 0 {
        return Ok(skip("ladder residuals", "no simple eigenvalues"));
    }
    Ok(check(
        "ladder residuals",
        ladder <= bound && motion <= bound,
        format!(
            "|[H,Z]-λZ| = {ladder:.3e} over {simple} simple, |[H,Z†Z]| = {motion:.3e} over {real} real (tol {bound:.1e})"
        ),
    ))
}
