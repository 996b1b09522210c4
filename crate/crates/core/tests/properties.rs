use proptest::prelude::*;

use quadham::adjrep::{adjoint_matrix, adjoint_matrix_via_commutators, build_u, verify_pseudo_hermiticity};
use quadham::catalog::{charpoly_xi, closed_form_roots, instantiate, ModelId};
use quadham::dynamics::{evolution_matrix, integrate, reference_solution};
use quadham::DVector;
use quadham::hamparse::{extract_gamma, parse, ParamBindings};
use quadham::opalg::{adjoint, commutator, is_symmetric, normal_order, OpSymbol, OperatorPoly};
use quadham::spectra::{eigen, pair_spectrum, Phase};
use quadham::sweep::{find_boundary, max_bisection_steps, sweep, SweepAxis};
use quadham::{Tolerances, C64};

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn word(k: usize, max_len: usize) -> impl Strategy<Value = Vec<OpSymbol>> {
    prop::collection::vec((0..2 * k).prop_map(move |b| OpSymbol::from_basis(b, k)), 0..=max_len)
}

fn poly(k: usize) -> impl Strategy<Value = OperatorPoly> {
    prop::collection::vec((word(k, 2), coeff()), 0..8)
        .prop_map(move |ws| OperatorPoly::from_words(k, ws).expect("degree <= 2"))
}

fn poly_of_degree(k: usize, d: usize) -> impl Strategy<Value = OperatorPoly> {
    prop::collection::vec((prop::collection::vec(0..2 * k, d), coeff()), 1..6).prop_map(move |ws| {
        let words = ws
            .into_iter()
            .map(|(w, c)| (w.into_iter().map(|b| OpSymbol::from_basis(b, k)).collect(), c));
        OperatorPoly::from_words(k, words).unwrap()
    })
}

fn triple() -> impl Strategy<Value = (OperatorPoly, OperatorPoly, OperatorPoly)> {
    (1usize..=3).prop_flat_map(|k| (poly(k), poly(k), poly(k)))
}

/// Symmetric quadratic `(P + P†)/2` from a random quadratic `P`.
fn symmetric_quadratic(k: usize) -> impl Strategy<Value = OperatorPoly> {
    poly_of_degree(k, 2).prop_map(|p| p.add(&adjoint(&p)).unwrap().scale(C64::new(0.5, 0.0)))
}

fn close(a: &OperatorPoly, b: &OperatorPoly, tol: f64) -> bool {
    a.distance(b).unwrap() <= tol
}

const BASIS: [&str; 6] = ["x1", "x2", "x3", "p1", "p2", "p3"];

/// Real-coefficient expression text over K = 3 made of symmetric terms.
fn symmetric_text() -> impl Strategy<Value = String> {
    prop::collection::vec((0..6usize, 0..6usize, -3.0..3.0f64), 1..8).prop_map(|ts| {
        ts.into_iter()
            .map(|(a, b, c)| format!("({c})*({}*{} + {}*{})/2", BASIS[a], BASIS[b], BASIS[b], BASIS[a]))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

/// Expression text that may or may not be symmetric.
fn mixed_text() -> impl Strategy<Value = String> {
    prop::collection::vec((0..6usize, 0..6usize, -3.0..3.0f64, any::<bool>()), 1..6).prop_map(|ts| {
        ts.into_iter()
            .map(|(a, b, c, imag)| {
                let unit = if imag { "i*" } else { "" };
                format!("{unit}({c})*{}*{}", BASIS[a], BASIS[b])
            })
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutator_antisymmetric((a, b, _) in triple()) {
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!(close(&ab, &ba.scale(C64::new(-1.0, 0.0)), 1e-12));
    }

    #[test]
    fn jacobi_identity((a, b, c) in triple()) {
        let t1 = commutator(&a, &commutator(&b, &c).unwrap()).unwrap();
        let t2 = commutator(&b, &commutator(&c, &a).unwrap()).unwrap();
        let t3 = commutator(&c, &commutator(&a, &b).unwrap()).unwrap();
        let sum = t1.add(&t2).unwrap().add(&t3).unwrap();
        prop_assert!(sum.max_abs_coeff() <= 1e-11, "{sum}");
    }

    #[test]
    fn adjoint_rule((a, b, _) in triple()) {
        let lhs = adjoint(&commutator(&a, &b).unwrap());
        let rhs = commutator(&adjoint(&a), &adjoint(&b)).unwrap().scale(C64::new(-1.0, 0.0));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn commutator_of_symmetric_is_antihermitian((a, b) in (1usize..=3).prop_flat_map(|k| (symmetric_quadratic(k), symmetric_quadratic(k)))) {
        let c = commutator(&a, &b).unwrap();
        prop_assert!(close(&adjoint(&c), &c.scale(C64::new(-1.0, 0.0)), 1e-12));
    }

    #[test]
    fn degree_closure((q1, q2, l1, l2) in (1usize..=3).prop_flat_map(|k| (poly_of_degree(k, 2), poly_of_degree(k, 2), poly_of_degree(k, 1), poly_of_degree(k, 1)))) {
        let k = q1.k();
        prop_assert!(commutator(&q1, &q2).unwrap().degree() <= 2);
        prop_assert!(commutator(&q1, &l1).unwrap().degree() <= 1);
        let c = commutator(&l1, &l2).unwrap();
        prop_assert!(c.degree() == 0);
        // [O_i, O_j] = U_ij
        let u = build_u(k).unwrap();
        for i in 0..2 * k {
            for j in 0..2 * k {
                let oi = OperatorPoly::symbol(k, OpSymbol::from_basis(i, k)).unwrap();
                let oj = OperatorPoly::symbol(k, OpSymbol::from_basis(j, k)).unwrap();
                let c = commutator(&oi, &oj).unwrap();
                let want = OperatorPoly::scalar(k, u.entries[(i, j)]);
                prop_assert!(close(&c, &want, 0.0));
            }
        }
    }

    #[test]
    fn normal_order_idempotent_and_linear(k in 1usize..=2, w in (1usize..=2).prop_flat_map(|k| word(k, 4)), c1 in coeff(), c2 in coeff()) {
        let w: Vec<OpSymbol> = w.into_iter().map(|s| OpSymbol::from_basis(s.basis_index(2) % (2 * k), k)).collect();
        let once = normal_order(k, &w, c1).unwrap();
        let mut twice = OperatorPoly::zero(k);
        for (m, c) in once.terms() {
            prop_assert!(m.is_normal());
            twice = twice.add(&normal_order(k, &m.0, *c).unwrap()).unwrap();
        }
        prop_assert!(close(&once, &twice, 0.0));
        let sum = normal_order(k, &w, c1).unwrap().add(&normal_order(k, &w, c2).unwrap()).unwrap();
        prop_assert!(close(&sum, &normal_order(k, &w, c1 + c2).unwrap(), 1e-12));
        let scaled = normal_order(k, &w, c1 * c2).unwrap();
        prop_assert!(close(&scaled, &normal_order(k, &w, c1).unwrap().scale(c2), 1e-12));
    }

    #[test]
    fn gamma_round_trip(src in symmetric_text()) {
        let h = parse(&src, &ParamBindings::new(), 3).unwrap();
        let g = extract_gamma(&h).unwrap();
        prop_assert!(close(&g.to_operator(), &h, 1e-12), "{src}");
    }

    #[test]
    fn parse_is_linear(a in mixed_text(), b in mixed_text()) {
        let p = ParamBindings::new();
        let sum = parse(&format!("{a} + {b}"), &p, 3).unwrap();
        let parts = parse(&a, &p, 3).unwrap().add(&parse(&b, &p, 3).unwrap()).unwrap();
        prop_assert!(close(&sum, &parts, 1e-12));
    }

    #[test]
    fn symmetry_matches_gamma(src in mixed_text()) {
        let h = parse(&src, &ParamBindings::new(), 3).unwrap();
        let sym = is_symmetric(&h, 1e-10);
        let g = quadham::hamparse::extract_gamma_with(&h, 1e-10, true).unwrap();
        let gamma_ok = g.hermiticity_defect() <= 1e-10 && g.scalar_remainder.im.abs() <= 1e-10;
        prop_assert_eq!(sym, gamma_ok, "{}", src);
        prop_assert_eq!(sym, extract_gamma(&h).is_ok());
    }

    #[test]
    fn two_routes_agree(h in (1usize..=4).prop_flat_map(symmetric_quadratic)) {
        let k = h.k();
        let f = adjoint_matrix(&extract_gamma(&h).unwrap());
        let c = adjoint_matrix_via_commutators(&h).unwrap();
        let d = (&f.entries - &c.entries).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(d <= 1e-12);
        let r = verify_pseudo_hermiticity(&f, &build_u(k).unwrap(), 1e-10).unwrap();
        prop_assert!(r.passed);
    }

    #[test]
    fn spectrum_is_symmetric(h in (1usize..=3).prop_flat_map(symmetric_quadratic)) {
        let s = eigen(&adjoint_matrix(&extract_gamma(&h).unwrap())).unwrap();
        prop_assert!(s.residuals.iter().all(|&r| r <= 1e-10));
        // ± and conjugate symmetry: det(λ − H) is real and even in λ. Stated on
        // the coefficients because random draws can be nilpotent.
        let scale = s.matrix.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for (j, c) in quadham::eig::charpoly(&s.matrix).iter().enumerate() {
            let bound = 1e-9 * scale.powi(j as i32);
            if j % 2 == 1 {
                prop_assert!(c.norm() <= bound, "odd coefficient {j}: {c}");
            } else {
                prop_assert!(c.im.abs() <= bound, "coefficient {j}: {c}");
            }
        }
        if s.values.iter().all(|v| v.norm() > 1e-3) {
            prop_assert!(pair_spectrum(&s.values, 1e-6).is_ok(), "{:?}", s.values);
        }
        let m = evolution_matrix(&adjoint_matrix(&extract_gamma(&h).unwrap()));
        // complex γ entries keep H off the i·real form; only real ones qualify
        // power traces stay well-conditioned at defective eigenvalues
        if let Ok(m) = m {
            let mc = m.entries.map(|v| C64::new(v, 0.0));
            let (mut pm, mut ph) = (mc.clone(), s.matrix.map(|v| v * C64::new(0.0, 1.0)));
            let ih = ph.clone();
            for _ in 0..m.dim() {
                let scale = pm.norm().max(1.0);
                prop_assert!((pm.trace() - ph.trace()).norm() <= 1e-10 * scale);
                pm = &pm * &mc;
                ph = &ph * &ih;
            }
        }
    }

    #[test]
    fn catalog_roots_match_eigenvalues(id in prop::sample::select(ModelId::ALL.to_vec()), a in 0.3..2.0f64, b in 0.0..1.5f64, c in 0.2..1.8f64) {
        let params: ParamBindings = match id {
            ModelId::Toy1d => [("alpha", a), ("beta", b)].into_iter().collect(),
            ModelId::Toy2d => [("beta", 3.0 * b - 2.0)].into_iter().collect(),
            ModelId::GainLoss => [("omega", a), ("gamma", b / 1.5), ("epsilon", c / 1.8)].into_iter().collect(),
            ModelId::SelfForce => [("m", a), ("tau", c), ("k", 0.5 + b), ("A", b - 0.7), ("B", c - 1.0)].into_iter().collect(),
            ModelId::Lrc => [("mu", (a - 1.15) / 1.0), ("gamma", b / 1.5)].into_iter().collect(),
        };
        let (g, h) = instantiate(id, &params).unwrap();
        // real γ gives H = i·(real matrix)
        prop_assert!(g.entries.iter().all(|v| v.im == 0.0));
        prop_assert!(h.entries.iter().all(|v| v.re.abs() <= 1e-14));
        let s = eigen(&h).unwrap();
        let poly = charpoly_xi(id, &params).unwrap();
        let roots = closed_form_roots(id, &params).unwrap();
        for l in &s.values {
            let xi = l * l;
            prop_assert!(poly.relative_residual(xi) <= 1e-8, "{id} {xi}");
            let d = roots.iter().map(|r| (r - xi).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= 1e-6 * xi.norm().max(1.0), "{id} {xi} vs {:?}", roots);
        }
    }

    #[test]
    fn rk4_is_fourth_order(id in prop::sample::select(vec![ModelId::Toy1d, ModelId::Toy2d, ModelId::Lrc]), z in prop::collection::vec(-1.0..1.0f64, 4)) {
        let (_, h) = instantiate(id, &ParamBindings::new()).unwrap();
        let m = evolution_matrix(&h).unwrap();
        let z0 = DVector::from_iterator(m.dim(), z.into_iter().take(m.dim()));
        prop_assume!(z0.norm() > 0.1);
        let err = |dt: f64| {
            let tr = integrate(&m, &z0, 20.0, dt).unwrap();
            let exact = reference_solution(&m, &z0, &tr.times[tr.times.len() - 1..]);
            (tr.states.last().unwrap() - &exact[0]).norm()
        };
        let (e1, e2) = (err(0.2), err(0.1));
        prop_assert!(e1 / e2 >= 8.0, "{e1} {e2}");
    }

    #[test]
    fn bisection_consistent_with_grid(beta_hi in 2.2..4.0f64, tol_exp in 3i32..8) {
        let tol = 10f64.powi(-tol_exp);
        let m = ModelId::Toy2d.spec().to_model();
        let t = Tolerances::default();
        let r = find_boundary(&m, &ParamBindings::new(), "beta", (0.5, beta_hi), tol, &t).unwrap();
        prop_assert!(r.bracket_width_final <= tol);
        prop_assert!(r.steps <= max_bisection_steps(beta_hi - 0.5, tol));
        let axis = SweepAxis::new("beta", 0.5, beta_hi, 41).unwrap();
        let g = sweep(&m, &ParamBindings::new(), std::slice::from_ref(&axis), &t).unwrap();
        let last_real = g.cells.iter().filter(|c| c.phase() == Some(Phase::Real)).map(|c| c.values[0]).fold(f64::MIN, f64::max);
        let first_non = g.cells.iter().filter(|c| c.phase() != Some(Phase::Real)).map(|c| c.values[0]).fold(f64::MAX, f64::min);
        prop_assert!(last_real - tol <= r.critical_value && r.critical_value <= first_non + tol);
    }
}

#[test]
fn sweeps_are_deterministic() {
    let m = ModelId::GainLoss.spec().to_model();
    let axes = [
        SweepAxis::new("gamma", 0.0, 1.0, 11).unwrap(),
        SweepAxis::new("epsilon", 0.0, 1.0, 11).unwrap(),
    ];
    let t = Tolerances::default();
    let a = sweep(&m, &ParamBindings::new(), &axes, &t).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| sweep(&m, &ParamBindings::new(), &axes, &t).unwrap());
    assert_eq!(a.cells.len(), 121);
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.values, y.values);
        assert_eq!(x.phase_str(), y.phase_str());
        assert_eq!(x.max_im().to_bits(), y.max_im().to_bits());
        assert_eq!(x.min_pseudo_norm().to_bits(), y.min_pseudo_norm().to_bits());
    }
}

#[test]
fn gainloss_grid_matches_quadratic_formula() {
    let omega = 1.0;
    let m = ModelId::GainLoss.spec().to_model();
    let axes = [
        SweepAxis::new("gamma", 0.0, 1.0, 21).unwrap(),
        SweepAxis::new("epsilon", 0.0, 1.0, 21).unwrap(),
    ];
    let g = sweep(&m, &ParamBindings::new(), &axes, &Tolerances::default()).unwrap();
    let mut checked = 0;
    for c in &g.cells {
        let (gm, eps) = (c.values[0], c.values[1]);
        let b = 2.0 * (2.0 * gm * gm - omega * omega);
        let cc = omega.powi(4) - eps * eps;
        let disc = b * b - 4.0 * cc;
        if disc.abs() < 1e-9 {
            continue;
        }
        let roots_real_positive = if disc > 0.0 {
            let r1 = (-b - disc.sqrt()) / 2.0;
            let r2 = (-b + disc.sqrt()) / 2.0;
            if r1.abs() < 1e-9 || r2.abs() < 1e-9 {
                continue;
            }
            r1 > 0.0 && r2 > 0.0
        } else {
            false
        };
        assert_eq!(c.phase() == Some(Phase::Real), roots_real_positive, "gamma={gm} eps={eps} {:?}", c.outcome);
        checked += 1;
    }
    assert!(checked > 400);
}
