//! Acceptance runner. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Oracles here are written out independently of the
//! library's own closed forms.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadham::adjrep::{adjoint_matrix, adjoint_matrix_via_commutators, build_u};
use quadham::catalog::{instantiate, ModelId};
use quadham::dynamics::{
    estimate_frequencies, evolution_matrix, growth_rate, integrate, lrc_kirchhoff_matrix, lrc_state_from_charges,
    reference_solution, EvolutionMatrix,
};
use quadham::hamparse::{extract_gamma, ParamBindings};
use quadham::opalg::{adjoint, commutator, OpSymbol, OperatorPoly};
use quadham::spectra::{classify_with, clusters, eigen, ground_energy, Phase, Spectrum};
use quadham::sweep::find_boundary;
use quadham::{DMatrix, DVector, Tolerances, C64};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const SEED: u64 = 0x5eed_2015;

fn pb(kv: &[(&str, f64)]) -> ParamBindings {
    kv.iter().copied().collect()
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `i` times a real matrix given row by row.
fn i_times(n: usize, rows: &[f64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(n, n, rows).map(|v| C64::new(0.0, v))
}

fn printed_toy1d(alpha: f64, beta: f64) -> DMatrix<C64> {
    i_times(2, &[-beta, 2.0 * alpha, -2.0, beta])
}

fn printed_toy2d(beta: f64) -> DMatrix<C64> {
    #[rustfmt::skip]
    let rows = [
        0.0, 0.0, 2.0, beta,
        0.0, 0.0, beta, 2.0,
        -2.0, 0.0, 0.0, 0.0,
        0.0, -2.0, 0.0, 0.0,
    ];
    i_times(4, &rows)
}

fn printed_gainloss(w: f64, g: f64, e: f64) -> DMatrix<C64> {
    let q = w * w - g * g;
    #[rustfmt::skip]
    let rows = [
        g, 0.0, e, q,
        0.0, -g, q, e,
        0.0, -1.0, -g, 0.0,
        -1.0, 0.0, 0.0, g,
    ];
    i_times(4, &rows)
}

fn printed_selfforce(m: f64, tau: f64, k: f64, a: f64, b: f64) -> DMatrix<C64> {
    let s = 1.0 / (m * tau);
    let t = 2.0 / (m * tau * tau);
    #[rustfmt::skip]
    let rows = [
        0.0, 0.0, 0.0, 0.0, a, k, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, k, a, 0.0, 0.0,
        -0.5, 0.0, 0.0, b * s, 0.0, 0.0, 0.0, -m / 2.0,
        0.0, -0.5, -b * s, 0.0, 0.0, 0.0, -m / 2.0, 0.0,
        0.0, 0.0, 0.0, -s, 0.0, 0.0, 0.5, 0.0,
        0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0, 0.5,
        0.0, s, 0.0, -t, 0.0, 0.0, 0.0, b * s,
        -s, 0.0, -t, 0.0, 0.0, 0.0, -b * s, 0.0,
    ];
    i_times(8, &rows)
}

fn printed_lrc(mu: f64, g: f64) -> DMatrix<C64> {
    let d = mu * mu - 1.0;
    let diag = mu / d;
    let off = (g * g * d + 4.0) / (4.0 * (1.0 - mu * mu));
    #[rustfmt::skip]
    let rows = [
        -g / 2.0, 0.0, diag, off,
        0.0, g / 2.0, off, diag,
        0.0, -1.0, g / 2.0, 0.0,
        -1.0, 0.0, 0.0, -g / 2.0,
    ];
    i_times(4, &rows)
}

/// Random parameters for a catalog model, away from singular points.
fn draw(id: ModelId, rng: &mut ChaCha8Rng) -> ParamBindings {
    match id {
        ModelId::Toy1d => pb(&[("alpha", rng.gen_range(0.1..3.0)), ("beta", rng.gen_range(0.0..4.0))]),
        ModelId::Toy2d => pb(&[("beta", rng.gen_range(-4.0..4.0))]),
        ModelId::GainLoss => pb(&[
            ("omega", rng.gen_range(0.2..2.0)),
            ("gamma", rng.gen_range(0.0..1.5)),
            ("epsilon", rng.gen_range(0.0..1.5)),
        ]),
        ModelId::SelfForce => pb(&[
            ("m", rng.gen_range(0.2..2.0)),
            ("tau", rng.gen_range(0.2..2.0)),
            ("k", rng.gen_range(0.2..2.0)),
            ("A", rng.gen_range(-1.0..1.0)),
            ("B", rng.gen_range(-1.0..1.0)),
        ]),
        ModelId::Lrc => pb(&[("mu", rng.gen_range(-0.9..0.9)), ("gamma", rng.gen_range(0.0..1.5))]),
    }
}

fn printed(id: ModelId, p: &ParamBindings) -> DMatrix<C64> {
    let g = |n: &str| p.get(n).unwrap();
    match id {
        ModelId::Toy1d => printed_toy1d(g("alpha"), g("beta")),
        ModelId::Toy2d => printed_toy2d(g("beta")),
        ModelId::GainLoss => printed_gainloss(g("omega"), g("gamma"), g("epsilon")),
        ModelId::SelfForce => printed_selfforce(g("m"), g("tau"), g("k"), g("A"), g("B")),
        ModelId::Lrc => printed_lrc(g("mu"), g("gamma")),
    }
}

fn spectrum(id: ModelId, p: &ParamBindings) -> Result<Spectrum, String> {
    let (_, h) = instantiate(id, p).map_err(|e| e.to_string())?;
    eigen(&h).map_err(|e| format!("{id}: {e}"))
}

/// Random symmetric quadratic `(P + P†)/2` with a dense degree-2 `P`.
fn random_symmetric(k: usize, rng: &mut ChaCha8Rng) -> OperatorPoly {
    let n = 2 * k;
    let mut words = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let coeff = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            words.push((vec![OpSymbol::from_basis(a, k), OpSymbol::from_basis(b, k)], coeff));
        }
    }
    let p = OperatorPoly::from_words(k, words).unwrap();
    p.add(&adjoint(&p)).unwrap().scale(c(0.5))
}

/// Largest relative distance after greedy nearest matching of two multisets.
fn match_gap(got: &[C64], want: &[C64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; want.len()];
    let mut worst = 0.0f64;
    for g in got {
        let (j, d) = want
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (g - w).norm() / w.norm().max(1e-300)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn pm_sqrt(xis: &[C64]) -> Vec<C64> {
    xis.iter().flat_map(|x| [x.sqrt(), -x.sqrt()]).collect()
}

fn printed_matrices() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut draws = 0;
    for id in ModelId::ALL {
        for _ in 0..5 {
            let p = draw(id, &mut rng);
            let (_, h) = instantiate(id, &p).map_err(|e| e.to_string())?;
            let d = max_abs(&(&h.entries - printed(id, &p)));
            if d > 1e-12 {
                return Err(format!("{id} at {p:?}: entry gap {d:.3e}"));
            }
            worst = worst.max(d);
            draws += 1;
        }
    }
    Ok(format!("{draws} draws, max entry gap {worst:.1e}"))
}

fn random_corpus() -> Vec<OperatorPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    (0..1000).map(|i| random_symmetric(1 + i % 8, &mut rng)).collect()
}

fn two_routes(corpus: &[OperatorPoly]) -> Outcome {
    let mut worst = 0.0f64;
    for h in corpus {
        let f = adjoint_matrix(&extract_gamma(h).map_err(|e| e.to_string())?);
        let r = adjoint_matrix_via_commutators(h).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs(&(&f.entries - &r.entries)));
    }
    if worst <= 1e-12 {
        Ok(format!("{} models, max gap {worst:.1e}", corpus.len()))
    } else {
        Err(format!("max gap {worst:.3e}"))
    }
}

fn pseudo_hermiticity(corpus: &[OperatorPoly]) -> Outcome {
    let (mut worst_p, mut worst_a) = (0.0f64, 0.0f64);
    for h in corpus {
        let m = adjoint_matrix(&extract_gamma(h).map_err(|e| e.to_string())?).entries;
        let k = h.k();
        let n = 2 * k;
        // U = i [[0, I], [-I, 0]] written out directly
        let u = DMatrix::from_fn(n, n, |r, col| {
            if col == r + k {
                C64::new(0.0, 1.0)
            } else if r == col + k {
                C64::new(0.0, -1.0)
            } else {
                c(0.0)
            }
        });
        let scale = max_abs(&m).max(1.0);
        let md = m.adjoint();
        worst_p = worst_p.max(max_abs(&(&md * &u - &u * &m)) / scale);
        worst_a = worst_a.max(max_abs(&(&md + m.transpose())));
    }
    if worst_p <= 1e-10 && worst_a <= 1e-12 {
        Ok(format!("pseudo {worst_p:.1e}, antireal {worst_a:.1e}"))
    } else {
        Err(format!("pseudo {worst_p:.3e}, antireal {worst_a:.3e}"))
    }
}

/// `(value, Σ |term|)` of a polynomial in ξ, highest degree first.
fn poly_with_size(coeffs: &[f64], xi: C64) -> (C64, f64) {
    let mut v = c(0.0);
    let mut size = 0.0;
    let deg = coeffs.len() - 1;
    for (i, &a) in coeffs.iter().enumerate() {
        v = v * xi + a;
        size += a.abs() * xi.norm().powi((deg - i) as i32);
    }
    (v, size)
}

fn characteristic_polynomials() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut worst = 0.0f64;
    for id in [ModelId::GainLoss, ModelId::SelfForce, ModelId::Lrc] {
        for _ in 0..100 {
            let p = draw(id, &mut rng);
            let g = |n: &str| p.get(n).unwrap();
            let s = spectrum(id, &p)?;
            for l in &s.values {
                let xi = l * l;
                let (v, size) = match id {
                    ModelId::GainLoss => {
                        let (w, gm, e) = (g("omega"), g("gamma"), g("epsilon"));
                        poly_with_size(&[1.0, 2.0 * (2.0 * gm * gm - w * w), w.powi(4) - e * e], xi)
                    }
                    ModelId::SelfForce => {
                        let (m, t, k, a, b) = (g("m"), g("tau"), g("k"), g("A"), g("B"));
                        let lin = poly_with_size(&[m * m * t * t, m * m - b * b], xi);
                        let cub = poly_with_size(
                            &[m * m * t * t, m * m - b * b, 2.0 * a * b - 2.0 * k * m, k * k - a * a],
                            xi,
                        );
                        (lin.0 * cub.0, lin.1 * cub.1)
                    }
                    _ => {
                        let (mu, gm) = (g("mu"), g("gamma"));
                        let d = mu * mu - 1.0;
                        poly_with_size(&[d, gm * gm * d + 2.0, -1.0], xi)
                    }
                };
                let r = v.norm() / size.max(1e-300);
                if r > 1e-8 {
                    return Err(format!("{id} at {p:?}: residual {r:.3e} at xi = {xi}"));
                }
                worst = worst.max(r);
            }
        }
    }
    Ok(format!("300 draws, max relative residual {worst:.1e}"))
}

fn closed_form_roots() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(0.5..3.0), rng.gen_range(0.0..1.0));
        let s = spectrum(ModelId::Toy1d, &pb(&[("alpha", a), ("beta", b)]))?;
        worst = worst.max(match_gap(&s.values, &pm_sqrt(&[c(4.0 * a - b * b)])));

        let b = rng.gen_range(-1.8..1.8);
        let s = spectrum(ModelId::Toy2d, &pb(&[("beta", b)]))?;
        worst = worst.max(match_gap(&s.values, &pm_sqrt(&[c(2.0 * (2.0 - b)), c(2.0 * (2.0 + b))])));

        let (mu, g) = (rng.gen_range(-0.9..0.9), rng.gen_range(0.0..1.5));
        let s = spectrum(ModelId::Lrc, &pb(&[("mu", mu), ("gamma", g)]))?;
        let d = mu * mu - 1.0;
        let root = c(g.powi(4) * d * d + 4.0 * g * g * d + 4.0 * mu * mu).sqrt();
        let xi1 = (root + g * g * (1.0 - mu * mu) - 2.0) / (2.0 * d);
        let xi2 = (root + g * g * d + 2.0) / (2.0 * (1.0 - mu * mu));
        worst = worst.max(match_gap(&s.values, &pm_sqrt(&[xi1, xi2])));

        let (m, tau, b) = (rng.gen_range(1.0..2.0), rng.gen_range(0.3..2.0), rng.gen_range(-0.5..0.5));
        let p = pb(&[("m", m), ("tau", tau), ("k", rng.gen_range(0.2..2.0)), ("A", rng.gen_range(-1.0..1.0)), ("B", b)]);
        let s = spectrum(ModelId::SelfForce, &p)?;
        let xi = (b * b - m * m) / (m * m * tau * tau);
        let want = c(xi).sqrt();
        let best = s.values.iter().map(|l| (l - want).norm() / want.norm()).fold(f64::INFINITY, f64::min);
        let best_neg = s.values.iter().map(|l| (l + want).norm() / want.norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(best).max(best_neg);
    }
    if worst <= 1e-10 {
        Ok(format!("200 draws over four models, max relative gap {worst:.1e}"))
    } else {
        Err(format!("max relative gap {worst:.3e}"))
    }
}

fn boundaries() -> Outcome {
    let tols = Tolerances::default();
    let mut parts = Vec::new();
    for (id, fixed) in [(ModelId::Toy2d, pb(&[])), (ModelId::Toy1d, pb(&[("alpha", 1.0)]))] {
        let start = Instant::now();
        let r = find_boundary(&id.spec().to_model(), &fixed, "beta", (1.0, 3.0), 1e-6, &tols).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        let shown = format!("{:.6}", r.critical_value);
        if shown != "2.000000" || (r.critical_value - 2.0).abs() > 1e-6 || took >= Duration::from_secs(1) {
            return Err(format!("{id}: {} in {took:?}", r.critical_value));
        }
        parts.push(format!("{id} {shown} in {:.0} ms", took.as_secs_f64() * 1e3));
    }
    Ok(parts.join(", "))
}

fn pseudo_orthogonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let u_of = |k: usize| build_u(k).unwrap().entries;
    let (mut worst, mut complex_seen) = (0.0f64, 0);
    for i in 0..100 {
        let h = random_symmetric(1 + i % 4, &mut rng);
        let s = eigen(&adjoint_matrix(&extract_gamma(&h).map_err(|e| e.to_string())?)).map_err(|e| e.to_string())?;
        let u = u_of(h.k());
        let gram = s.vectors.adjoint() * &u * &s.vectors;
        let n = s.values.len();
        for a in 0..n {
            let la = s.values[a];
            let scale = la.norm().max(1.0);
            if la.im.abs() > 1e-6 * scale {
                complex_seen += 1;
                worst = worst.max(gram[(a, a)].norm());
            }
            for b in 0..n {
                if (s.values[b] - la.conj()).norm() > 1e-6 * scale {
                    worst = worst.max(gram[(a, b)].norm());
                }
            }
        }
    }
    if worst <= 1e-9 {
        Ok(format!("100 models ({complex_seen} complex eigenvalues), max {worst:.1e}"))
    } else {
        Err(format!("max pseudo-inner product {worst:.3e}"))
    }
}

fn ladder_operators() -> Outcome {
    let tols = Tolerances::default();
    let (mut worst_l, mut worst_c, mut checked) = (0.0f64, 0.0f64, 0);
    for id in ModelId::ALL {
        let model = id.spec().to_model();
        let defaults = model.defaults.clone();
        for scale in [1.0, 1.05, 0.95] {
            let p: ParamBindings = defaults.iter().map(|(n, v)| (n, v * scale)).collect();
            let inst = model.instantiate(&p).map_err(|e| e.to_string())?;
            let s = eigen(&inst.adjoint).map_err(|e| e.to_string())?;
            for group in clusters(&s.values, tols.cluster) {
                let [j] = group[..] else { continue };
                let lambda = s.values[j];
                if lambda.im.abs() > tols.reality * lambda.norm().max(1.0) {
                    continue;
                }
                let k = s.k;
                let z = OperatorPoly::from_words(
                    k,
                    (0..2 * k).map(|i| (vec![OpSymbol::from_basis(i, k)], s.vectors[(i, j)])),
                )
                .unwrap();
                let lhs = commutator(&inst.hamiltonian, &z).unwrap().sub(&z.scale(lambda)).unwrap();
                let number = adjoint(&z).mul(&z).unwrap();
                let com = commutator(&inst.hamiltonian, &number).unwrap();
                worst_l = worst_l.max(lhs.max_abs_coeff());
                worst_c = worst_c.max(com.max_abs_coeff());
                checked += 1;
            }
        }
    }
    if checked > 0 && worst_l <= 1e-10 && worst_c <= 1e-10 {
        Ok(format!("{checked} simple real eigenvalues, ladder {worst_l:.1e}, constant {worst_c:.1e}"))
    } else {
        Err(format!("{checked} checked, ladder {worst_l:.3e}, constant {worst_c:.3e}"))
    }
}

fn ground_energies() -> Outcome {
    let s = spectrum(ModelId::Toy1d, &pb(&[("alpha", 1.0), ("beta", 1.0)]))?;
    let e1 = ground_energy(&s).map_err(|e| e.to_string())?;
    let d1 = (e1 - 3f64.sqrt() / 2.0).abs();

    let beta: f64 = 1.0;
    let s = spectrum(ModelId::Toy2d, &pb(&[("beta", beta)]))?;
    let e2 = ground_energy(&s).map_err(|e| e.to_string())?;
    let r = (4.0 - beta * beta).sqrt();
    let a = (2.0 - r).sqrt() * (r + 2.0) / (4.0 * beta);
    let d2 = (e2 - 4.0 * a).abs();
    if d1 <= 1e-12 && d2 <= 1e-10 {
        Ok(format!("toy1d gap {d1:.1e}, toy2d gap {d2:.1e}"))
    } else {
        Err(format!("toy1d {e1} (gap {d1:.3e}), toy2d {e2} vs {} (gap {d2:.3e})", 4.0 * a))
    }
}

fn dynamics() -> Outcome {
    let z_generic = [0.9, -0.4, 0.3, 0.7];
    let mut parts = Vec::new();
    let cases: [(ModelId, ParamBindings, bool); 5] = [
        (ModelId::Toy1d, pb(&[("alpha", 1.0), ("beta", 1.0)]), true),
        (ModelId::Toy2d, pb(&[("beta", 1.0)]), true),
        (ModelId::Lrc, pb(&[("mu", 0.2), ("gamma", 0.1)]), true),
        (ModelId::Toy1d, pb(&[("alpha", 1.0), ("beta", 3.0)]), false),
        (ModelId::GainLoss, pb(&[("omega", 1.0), ("gamma", 0.5), ("epsilon", 0.1)]), false),
    ];
    for (id, p, real) in cases {
        let start = Instant::now();
        let (_, h) = instantiate(id, &p).map_err(|e| e.to_string())?;
        let s = eigen(&h).map_err(|e| e.to_string())?;
        let m = evolution_matrix(&h).map_err(|e| e.to_string())?;

        let want: Vec<C64> = s.values.iter().map(|l| l * C64::new(0.0, 1.0)).collect();
        let got = m.eigenvalues().map_err(|e| format!("{e:?}"))?;
        let eig_gap = match_gap(&got, &want);
        if eig_gap > 1e-10 {
            return Err(format!("{id}: eig(M) vs i eig(H) gap {eig_gap:.3e}"));
        }

        let z0 = DVector::from_row_slice(&z_generic[..m.dim()]);
        let tr = integrate(&m, &z0, 200.0, 0.01).map_err(|e| e.to_string())?;
        let label = if real {
            let mut expected: Vec<f64> = s.values.iter().filter(|l| l.re > 0.0).map(|l| l.re).collect();
            expected.sort_by(f64::total_cmp);
            expected.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let measured = estimate_frequencies(&tr);
            if measured.len() != expected.len() {
                return Err(format!("{id}: frequencies {measured:?}, expected {expected:?}"));
            }
            let gap = measured.iter().zip(&expected).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
            if gap > 1e-3 {
                return Err(format!("{id}: frequencies {measured:?}, expected {expected:?}"));
            }
            format!("{id} freq {gap:.0e}")
        } else {
            let expected = s.values.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
            let rate = growth_rate(&tr).map_err(|e| format!("{id}: {e}"))?;
            let gap = (rate - expected).abs() / expected;
            if gap > 1e-3 {
                return Err(format!("{id}: growth {rate}, expected {expected}"));
            }
            format!("{id} growth {gap:.0e}")
        };
        let took = start.elapsed();
        if took >= Duration::from_secs(5) {
            return Err(format!("{id}: took {took:?}"));
        }
        parts.push(format!("{label} ({:.1} s)", took.as_secs_f64()));
    }
    Ok(parts.join(", "))
}

fn lrc_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for (mu, gamma) in [(0.2, 0.1), (-0.5, 0.3), (0.6, 0.05)] {
        let (_, h) = instantiate(ModelId::Lrc, &pb(&[("mu", mu), ("gamma", gamma)])).map_err(|e| e.to_string())?;
        let m = evolution_matrix(&h).map_err(|e| e.to_string())?;
        let kirchhoff = EvolutionMatrix::from_real(lrc_kirchhoff_matrix(mu, gamma));
        let (q, qdot) = ([0.7, -0.2], [0.1, 0.4]);
        let charges = DVector::from_row_slice(&[q[0], q[1], qdot[0], qdot[1]]);
        let z0 = lrc_state_from_charges(gamma, q, qdot);

        let ham = integrate(&m, &z0, 50.0, 0.01).map_err(|e| e.to_string())?;
        let direct = integrate(&kirchhoff, &charges, 50.0, 0.01).map_err(|e| e.to_string())?;
        let exact = reference_solution(&kirchhoff, &charges, &ham.times);
        for ((zh, zd), ze) in ham.states.iter().zip(&direct.states).zip(&exact) {
            for w in [zd, ze] {
                let mapped = lrc_state_from_charges(gamma, [w[0], w[1]], [w[2], w[3]]);
                worst = worst.max((zh - mapped).amax());
            }
        }
    }
    if worst <= 1e-6 {
        Ok(format!("3 circuits over T = 50, max gap {worst:.1e}"))
    } else {
        Err(format!("max gap {worst:.3e}"))
    }
}

fn selfforce_never_real() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let tols = Tolerances::default();
    let mut min_im = f64::INFINITY;
    for _ in 0..100 {
        let p = pb(&[
            ("m", rng.gen_range(0.1..5.0)),
            ("tau", rng.gen_range(0.1..5.0)),
            ("k", rng.gen_range(0.1..5.0)),
            ("A", 0.0),
            ("B", 0.0),
        ]);
        let s = spectrum(ModelId::SelfForce, &p)?;
        let label = classify_with(&s, &tols);
        if label.label == Phase::Real {
            return Err(format!("real spectrum at {p:?}"));
        }
        min_im = min_im.min(label.max_im);
    }
    Ok(format!("100 draws, smallest max|Im| {min_im:.3}"))
}

fn main() -> ExitCode {
    let corpus = random_corpus();
    let criteria: Vec<Criterion> = vec![
        ("printed adjoint matrices", Box::new(printed_matrices)),
        ("formula and commutator routes agree", Box::new(|| two_routes(&corpus))),
        ("pseudo-hermiticity identities", Box::new(|| pseudo_hermiticity(&corpus))),
        ("characteristic polynomials in xi", Box::new(characteristic_polynomials)),
        ("closed-form roots", Box::new(closed_form_roots)),
        ("phase boundaries by bisection", Box::new(boundaries)),
        ("pseudo-orthogonality of eigenvectors", Box::new(pseudo_orthogonality)),
        ("ladder and constant-of-motion residuals", Box::new(ladder_operators)),
        ("ground energies", Box::new(ground_energies)),
        ("dynamics frequencies and growth", Box::new(dynamics)),
        ("lrc hamiltonian and kirchhoff trajectories", Box::new(lrc_equivalence)),
        ("selfforce without couplings is never real", Box::new(selfforce_never_real)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS  {:02} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:02} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
