//! Small dense complex eigensolver.
//!
//! Householder reduction to upper Hessenberg form, then single-shift complex
//! QR iteration with Wilkinson shifts and deflation, yielding a complex Schur
//! form `A = Z T Z†`. Eigenvectors come from back substitution on `T`.
//!
//! [`charpoly`] and [`poly_roots`] give an independent route for tiny matrices.

use nalgebra::DMatrix;

use crate::C64;

const EPS: f64 = f64::EPSILON;

/// Iteration budget per eigenvalue.
const ITER_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct Schur {
    pub t: DMatrix<C64>,
    pub z: DMatrix<C64>,
}

/// Partial state handed back when QR iteration fails to converge.
#[derive(Debug, Clone)]
pub struct NoConvergence {
    pub converged: Vec<C64>,
    pub iterations: usize,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn hessenberg(a: &mut DMatrix<C64>, q: &mut DMatrix<C64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for col in 0..n - 2 {
        let x: Vec<C64> = (col + 1..n).map(|r| a[(r, col)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        let off = col + 1;
        // A <- (I - 2 v v†) A
        for j in 0..n {
            let mut s = zero();
            for (r, vr) in v.iter().enumerate() {
                s += vr.conj() * a[(off + r, j)];
            }
            for (r, vr) in v.iter().enumerate() {
                a[(off + r, j)] -= *vr * s * 2.0;
            }
        }
        // A <- A (I - 2 v v†), Q <- Q (I - 2 v v†)
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let mut s = zero();
                for (r, vr) in v.iter().enumerate() {
                    s += m[(i, off + r)] * *vr;
                }
                for (r, vr) in v.iter().enumerate() {
                    m[(i, off + r)] -= s * vr.conj() * 2.0;
                }
            }
        }
        for r in col + 2..n {
            a[(r, col)] = zero();
        }
    }
}

/// Unitary rotation `G = [[c, s], [-s̄, c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, zero());
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition `a = z t z†`.
pub fn schur(a: &DMatrix<C64>) -> Result<Schur, NoConvergence> {
    let n = a.nrows();
    let mut t = a.clone();
    let mut z = DMatrix::<C64>::identity(n, n);
    if n == 0 {
        return Ok(Schur { t, z });
    }
    hessenberg(&mut t, &mut z);

    let anorm = t.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let small = f64::MIN_POSITIVE / EPS;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = ITER_PER_EIGENVALUE * n.max(1);

    while hi > 0 {
        // find start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let diag = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            let thresh = if diag == 0.0 { EPS * anorm } else { EPS * diag };
            if sub <= thresh.max(small) {
                t[(lo, lo - 1)] = zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        if total >= budget {
            let converged = (hi + 1..n).map(|i| t[(i, i)]).collect();
            return Err(NoConvergence {
                converged,
                iterations: total,
            });
        }
        iter += 1;
        total += 1;

        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            t[(hi, hi)] + C64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };

        for i in lo..=hi {
            t[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (t[(k, j)], t[(k + 1, j)]);
                t[(k, j)] = x * c + s * y;
                t[(k + 1, j)] = -s.conj() * x + y * c;
            }
            t[(k + 1, k)] = zero();
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let rmax = (k + 2).min(hi);
            for i in 0..=rmax {
                let (x, y) = (t[(i, k)], t[(i, k + 1)]);
                t[(i, k)] = x * c + s.conj() * y;
                t[(i, k + 1)] = -s * x + y * c;
            }
            for i in 0..n {
                let (x, y) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = x * c + s.conj() * y;
                z[(i, k + 1)] = -s * x + y * c;
            }
        }
        for i in lo..=hi {
            t[(i, i)] += shift;
        }
    }
    // clean strictly lower part
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = zero();
        }
    }
    Ok(Schur { t, z })
}

/// Eigenvectors of an upper-triangular `t`, as columns, not yet normalized.
///
/// Near-zero pivots are replaced by `eps * ‖t‖` so defective blocks still
/// yield a usable (nearly parallel) vector.
pub fn triangular_eigenvectors(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let tnorm = t.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let smin = (EPS * tnorm).max(f64::MIN_POSITIVE * 1e10);
    let mut v = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![zero(); k + 1];
        x[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = zero();
            for (m, xm) in x.iter().enumerate().take(k + 1).skip(j + 1) {
                s += t[(j, m)] * *xm;
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            x[j] = -s / d;
            let big = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                for c in x.iter_mut() {
                    *c /= big;
                }
            }
        }
        for (j, xj) in x.into_iter().enumerate() {
            v[(j, k)] = xj;
        }
    }
    v
}

/// Coefficients of `det(λI − a)`, highest degree first (monic), by the
/// Faddeev–LeVerrier recursion. Intended for `n <= 8`.
pub fn charpoly(a: &DMatrix<C64>) -> Vec<C64> {
    let n = a.nrows();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut m = DMatrix::<C64>::zeros(n, n);
    let ident = DMatrix::<C64>::identity(n, n);
    let mut c_prev = C64::new(1.0, 0.0);
    for k in 1..=n {
        m = a * &m + &ident * c_prev;
        let am = a * &m;
        let c = -am.trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().fold(zero(), |acc, c| acc * x + c)
}

fn poly_deriv(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    coeffs[..n].iter().enumerate().map(|(i, c)| c * (n - i) as f64).collect()
}

/// All roots of a polynomial (highest degree first) by Aberth–Ehrlich
/// iteration followed by Newton polishing.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    // strip leading zeros
    let first = coeffs.iter().position(|c| c.norm() != 0.0).unwrap_or(coeffs.len());
    let p: Vec<C64> = coeffs[first..].to_vec();
    if p.len() <= 1 {
        return Vec::new();
    }
    let n = p.len() - 1;
    let lead = p[0];
    let p: Vec<C64> = p.iter().map(|c| c / lead).collect();
    let dp = poly_deriv(&p);
    // Cauchy bound for the initial circle
    let radius = 1.0 + p[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius * 0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let pv = poly_eval(&p, z[i]);
            let dv = poly_eval(&dp, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut s = zero();
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * s;
            let w = if denom.norm() == 0.0 || !denom.is_finite() { ratio } else { ratio / denom };
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dv = poly_eval(&dp, *zi);
            if dv.norm() == 0.0 {
                break;
            }
            let step = poly_eval(&p, *zi) / dv;
            if !step.is_finite() || step.norm() > 1e-6 * zi.norm().max(1.0) {
                break;
            }
            *zi -= step;
        }
    }
    z
}

/// Numerical rank of `a` from Householder QR with column pivoting: the count
/// of `|R_ii| > tol`.
pub fn numerical_rank(a: &DMatrix<C64>, tol: f64) -> usize {
    let mut r = a.clone();
    let (m, n) = r.shape();
    let steps = m.min(n);
    let mut rank = 0;
    for k in 0..steps {
        // pivot on the largest remaining column
        let (best, bnorm) = (k..n)
            .map(|j| (j, (k..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if bnorm.sqrt() <= tol {
            break;
        }
        r.swap_columns(k, best);
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let xnorm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for c in v.iter_mut() {
                *c /= vnorm;
            }
            for j in k..n {
                let mut s = zero();
                for (ri, vr) in v.iter().enumerate() {
                    s += vr.conj() * r[(k + ri, j)];
                }
                for (ri, vr) in v.iter().enumerate() {
                    r[(k + ri, j)] -= *vr * s * 2.0;
                }
            }
        }
        if r[(k, k)].norm() > tol {
            rank += 1;
        } else {
            break;
        }
    }
    rank
}
