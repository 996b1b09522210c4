//! Linear equations of motion generated by the adjoint matrix.
//!
//! Heisenberg evolution `dO_i/dt = i[H, O_i] = i Σ_j H_ji O_j` gives the real
//! linear system `dz/dt = M z` with `M = i Hᵗ` over the state
//! `z = (x_1..x_K, p_1..p_K)`. The same system drives the classical
//! coordinates, so trajectories oscillate at `|λ|` in the real phase and grow
//! at `max |Im λ|` in the broken phase.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use thiserror::Error;

use crate::adjrep::AdjointMatrix;
use crate::eig;
use crate::hamparse::GammaMatrix;
use crate::{max_norm, C64};

/// Bound on `max |Im(i Hᵗ)|`, relative to `max(1, ‖H‖)`.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-12;
/// State norm beyond which integration stops.
pub const OVERFLOW_NORM: f64 = 1e280;
/// Peaks below this fraction of the tallest amplitude are ignored.
pub const PEAK_FLOOR: f64 = 0.05;
/// Minimum transform length; zero-padding refines the peak grid.
pub const MIN_FFT_LEN: usize = 1 << 18;
/// Fewest samples the growth fit accepts.
pub const MIN_GROWTH_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("adjoint matrix does not generate real dynamics: max |Im(i Hᵗ)| = {0:e}")]
    InconsistentModel(f64),
    #[error("initial state has length {got}, expected {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("invalid time grid: need finite dt > 0 and T >= 100 dt (T = {t}, dt = {dt})")]
    BadTimeGrid { t: f64, dt: f64 },
    #[error("initial state is not finite")]
    NonFiniteState,
    #[error("trajectory has {0} usable samples in its final half, need at least {MIN_GROWTH_SAMPLES}")]
    TooShort(usize),
    #[error("trajectory does not grow (fitted rate {0:e}); growth rate needs a broken-phase trajectory")]
    NotGrowing(f64),
}

/// Real generator of the equations of motion.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub entries: DMatrix<f64>,
    /// `max |Im(i Hᵗ)|`; zero for matrices built from real coefficients.
    pub imag_residual: f64,
}

impl EvolutionMatrix {
    pub fn from_real(entries: DMatrix<f64>) -> Self {
        EvolutionMatrix {
            entries,
            imag_residual: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigenvalues of `M`, which equal `i λ` for the eigenvalues `λ` of `H`.
    pub fn eigenvalues(&self) -> Result<Vec<C64>, eig::NoConvergence> {
        let c = self.entries.map(|v| C64::new(v, 0.0));
        let s = eig::schur(&c)?;
        Ok((0..self.dim()).map(|i| s.t[(i, i)]).collect())
    }
}

pub fn evolution_matrix(h: &AdjointMatrix) -> Result<EvolutionMatrix, DynamicsError> {
    let m = h.entries.transpose() * C64::new(0.0, 1.0);
    let imag_residual = m.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag_residual > IMAG_RESIDUAL_TOL * max_norm(&h.entries).max(1.0) {
        return Err(DynamicsError::InconsistentModel(imag_residual));
    }
    Ok(EvolutionMatrix {
        entries: m.map(|c| c.re),
        imag_residual,
    })
}

/// Classical energy `zᵀ Re(γ) z`, conserved by the real-phase flow.
pub fn energy(gamma: &GammaMatrix, z: &DVector<f64>) -> f64 {
    let g = gamma.entries.map(|c| c.re);
    z.dot(&(g * z))
}

/// Unit-norm all-ones initial state.
pub fn default_initial_state(dim: usize) -> DVector<f64> {
    DVector::from_element(dim, 1.0 / (dim as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Time at which the state overflowed; the trajectory stops before it.
    pub overflow: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Samples on the grid `0, dt, .., floor(T/dt) dt`.
pub fn sample_count(t: f64, dt: f64) -> usize {
    (t / dt + 1e-9).floor() as usize + 1
}

/// One classical RK4 step of a linear system, as a matrix.
pub fn rk4_step_matrix(m: &DMatrix<f64>, dt: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let a = m * dt;
    let a2 = &a * &a;
    let a3 = &a2 * &a;
    let a4 = &a3 * &a;
    DMatrix::identity(n, n) + &a + a2 / 2.0 + a3 / 6.0 + a4 / 24.0
}

/// Fixed-step RK4 from `z0` over `[0, T]`.
pub fn integrate(m: &EvolutionMatrix, z0: &DVector<f64>, t: f64, dt: f64) -> Result<Trajectory, DynamicsError> {
    if z0.len() != m.dim() {
        return Err(DynamicsError::DimensionMismatch {
            got: z0.len(),
            want: m.dim(),
        });
    }
    if !(dt.is_finite() && t.is_finite() && dt > 0.0 && t >= 100.0 * dt) {
        return Err(DynamicsError::BadTimeGrid { t, dt });
    }
    if !z0.iter().all(|v| v.is_finite()) {
        return Err(DynamicsError::NonFiniteState);
    }
    let step = rk4_step_matrix(&m.entries, dt);
    let n = sample_count(t, dt);
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut z = z0.clone();
    let mut overflow = None;
    for i in 0..n {
        let ti = i as f64 * dt;
        if i > 0 {
            z = &step * &z;
            let nrm = z.norm();
            if !nrm.is_finite() || nrm > OVERFLOW_NORM {
                overflow = Some(ti);
                break;
            }
        }
        times.push(ti);
        states.push(z.clone());
    }
    Ok(Trajectory {
        dt,
        times,
        states,
        overflow,
    })
}

/// `exp(M t) z0` at each requested time.
pub fn reference_solution(m: &EvolutionMatrix, z0: &DVector<f64>, times: &[f64]) -> Vec<DVector<f64>> {
    times.iter().map(|&t| (&m.entries * t).exp() * z0).collect()
}

fn hann(i: usize, n: usize) -> f64 {
    if n < 2 {
        return 1.0;
    }
    0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
}

/// Dominant angular frequencies, ascending.
///
/// Each coordinate is de-meaned, Hann-windowed and zero-padded; the summed
/// power spectrum is searched for local maxima whose amplitude reaches
/// [`PEAK_FLOOR`] of the tallest one, and each peak is refined by a parabola
/// through the log-magnitudes of its three bins. Peaks closer than one main
/// lobe are merged and the lobe around zero frequency is skipped.
pub fn estimate_frequencies(tr: &Trajectory) -> Vec<f64> {
    let n = tr.len();
    if n < 8 {
        return Vec::new();
    }
    let dim = tr.states[0].len();
    let len = MIN_FFT_LEN.max((4 * n).next_power_of_two());
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(len);
    let mut power = vec![0.0; len / 2 + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for d in 0..dim {
        let mean = tr.states.iter().map(|s| s[d]).sum::<f64>() / n as f64;
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (i, s) in tr.states.iter().enumerate() {
            buf[i] = Complex::new((s[d] - mean) * hann(i, n), 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
    }
    let bin_omega = 2.0 * std::f64::consts::PI / (len as f64 * tr.dt);
    // Hann main-lobe half width is two resolution bins of the unpadded record
    let lobe = 2.0 * 2.0 * std::f64::consts::PI / (n as f64 * tr.dt);
    let first = ((lobe / bin_omega).ceil() as usize).max(1);
    let peak_max = power[first..].iter().cloned().fold(0.0, f64::max);
    if peak_max <= 0.0 {
        return Vec::new();
    }
    let floor = PEAK_FLOOR * PEAK_FLOOR * peak_max;
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for k in first.max(1)..power.len() - 1 {
        let (l, c, r) = (power[k - 1], power[k], power[k + 1]);
        if c < floor || c < l || c <= r {
            continue;
        }
        let (yl, yc, yr) = (l.max(f64::MIN_POSITIVE).ln(), c.ln(), r.max(f64::MIN_POSITIVE).ln());
        let denom = yl - 2.0 * yc + yr;
        let delta = if denom < 0.0 { 0.5 * (yl - yr) / denom } else { 0.0 };
        peaks.push(((k as f64 + delta.clamp(-0.5, 0.5)) * bin_omega, c));
    }
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (w, p) in peaks {
        match merged.last_mut() {
            Some(last) if w - last.0 < lobe => {
                if p > last.1 {
                    *last = (w, p);
                }
            }
            _ => merged.push((w, p)),
        }
    }
    merged.into_iter().map(|(w, _)| w).collect()
}

/// Exponential growth rate of `‖z(t)‖` over the final half of the trajectory.
///
/// The slope of `ln ‖z‖` is fitted by least squares with Hann weights so that
/// the bounded oscillation riding on the exponential does not bias it.
pub fn growth_rate(tr: &Trajectory) -> Result<f64, DynamicsError> {
    let n = tr.len();
    let start = n / 2;
    let pts: Vec<(f64, f64)> = (start..n)
        .filter_map(|i| {
            let nrm = tr.states[i].norm();
            (nrm > 0.0).then(|| (tr.times[i], nrm.ln()))
        })
        .collect();
    let m = pts.len();
    if m < MIN_GROWTH_SAMPLES {
        return Err(DynamicsError::TooShort(m));
    }
    let w: Vec<f64> = (0..m).map(|i| hann(i, m)).collect();
    let sw: f64 = w.iter().sum();
    let tbar = pts.iter().zip(&w).map(|((t, _), w)| w * t).sum::<f64>() / sw;
    let ybar = pts.iter().zip(&w).map(|((_, y), w)| w * y).sum::<f64>() / sw;
    let (mut num, mut den) = (0.0, 0.0);
    for ((t, y), w) in pts.iter().zip(&w) {
        num += w * (t - tbar) * (y - ybar);
        den += w * (t - tbar) * (t - tbar);
    }
    let rate = num / den;
    let span = pts[m - 1].0 - pts[0].0;
    // less than one e-fold over the window is not growth
    if !(rate * span > 1.0) {
        return Err(DynamicsError::NotGrowing(rate));
    }
    Ok(rate)
}

/// Kirchhoff system of the coupled LRC circuit in first-order form over
/// `(Q1, Q2, dQ1/dt, dQ2/dt)`.
pub fn lrc_kirchhoff_matrix(mu: f64, gamma: f64) -> DMatrix<f64> {
    let d = 1.0 - mu * mu;
    let (a, b) = (-1.0 / d, mu / d);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            a, b, gamma, 0.0, //
            b, a, 0.0, -gamma,
        ],
    )
}

/// Hamiltonian state `(x, y, p_x, p_y)` matching charges and currents of the
/// LRC circuit.
pub fn lrc_state_from_charges(gamma: f64, q: [f64; 2], qdot: [f64; 2]) -> DVector<f64> {
    let (x, y) = (q[0], q[1]);
    DVector::from_vec(vec![x, y, qdot[1] + 0.5 * gamma * y, qdot[0] - 0.5 * gamma * x])
}
