use maslov_core::asymptotics::{
    hamiltonian_generator, induced_generator, infinity_data, j_matrix, sigma_ordering_check,
    unstable_frame,
};
use maslov_core::exterior::Frame;
use maslov_core::integrator::frame_action;
use maslov_core::kdv5::{WaveParams, WaveProfile};
use maslov_core::problems::{Definiteness, MaslovTable, PROBLEM_NAMES};
use maslov_core::{get_problem, MaslovError, Params, Problem};
use nalgebra::{DMatrix, DVector, Matrix2, Matrix4x2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn catalog() -> Vec<Problem> {
    vec![
        Problem::ScalarRd,
        Problem::Sech2Oracle,
        Problem::Lwsw2 { nu: 0.2 },
        Problem::CoupledRd { c: 1.0 },
        Problem::CoupledRd { c: -1.75 },
        Problem::Lwsw4 { c: 1.0, nu: 0.2 },
        Problem::LwswNonmonotone { c: 1.0, nu: 0.21 },
        Problem::kdv5(WaveProfile::explicit()),
    ]
}

/// A lambda strictly inside the hyperbolic domain.
fn sample_lambda(p: &Problem, rng: &mut StdRng) -> f64 {
    let (lo, hi) = p.hyperbolic_domain();
    let lo = if lo.is_finite() { lo } else { hi - 5.0 };
    let hi = if hi.is_finite() { hi } else { lo + 5.0 };
    let w = hi - lo;
    rng.gen_range(lo + 0.01 * w..hi - 0.01 * w)
}

#[test]
fn names_resolve() {
    for name in PROBLEM_NAMES {
        let p = match name {
            "coupled_rd" => get_problem(name, &params(&[("c", 1.0)])),
            "kdv5" => get_problem(name, &params(&[("P", 13.0 / 6.0), ("c", 1.0), ("q", 1.0)])),
            "lwsw4" | "lwsw_nonmonotone" => get_problem(name, &params(&[("c", 1.0), ("nu", 0.2)])),
            "lwsw2" => get_problem(name, &params(&[("nu", 0.2)])),
            _ => get_problem(name, &Params::new()),
        };
        assert_eq!(p.unwrap().name(), name);
    }
    assert!(matches!(
        get_problem("heat", &Params::new()),
        Err(MaslovError::UnknownProblem(_))
    ));
}

#[test]
fn parameter_domain_errors() {
    let lw = get_problem("lwsw4", &params(&[("c", 0.8), ("nu", 0.2)]));
    assert!(
        matches!(&lw, Err(MaslovError::InvalidParameter(m)) if m.contains("existence condition violated"))
    );
    assert!(get_problem("coupled_rd", &params(&[("c", -2.0)])).is_err());
    assert!(get_problem("coupled_rd", &Params::new()).is_err());
    assert!(get_problem("scalar_rd", &params(&[("c", 1.0)])).is_err());
}

#[test]
fn scalar_rd_catalog_entry() {
    let p = Problem::ScalarRd;
    assert_eq!(p.n(), 1);
    let binf = p.b_inf(0.3);
    assert!((binf[(0, 0)].abs() - 1.3).abs() < 1e-15 && binf[(1, 1)] == 1.0);
    assert!(p.in_essential_spectrum(-1.0) && p.in_essential_spectrum(-2.0));
    assert!(!p.in_essential_spectrum(-0.99));
    let a = p.analytic();
    assert_eq!(a.eigenvalues.unwrap(), vec![-0.75, 0.0, 1.25]);
    assert!(a.has_closed_form_evans);
}

#[test]
fn coupled_rd_eigenvalues_in_domain() {
    // the six eigenvalues at c = 1 are {-5, -3, -2, 0, 3, 5}; -5 lies below the edge -4
    let p = Problem::CoupledRd { c: 1.0 };
    let (lo, _) = p.hyperbolic_domain();
    assert_eq!(lo, -4.0);
    let all = [-5.0, -3.0, -2.0, 0.0, 3.0, 5.0];
    let inside: Vec<f64> = all
        .into_iter()
        .filter(|l| !p.in_essential_spectrum(*l))
        .collect();
    assert_eq!(p.analytic().eigenvalues.unwrap(), inside);
}

#[test]
fn coupled_rd_decouples() {
    // u = u~ - v~, v = u~ + v~ diagonalises the coupling block into f - c and f + c
    let c = 0.7;
    let p = Problem::CoupledRd { c };
    let t = Matrix2::new(1.0, -1.0, 1.0, 1.0);
    let t_inv = t.try_inverse().unwrap();
    for (x, l) in [(0.0, 0.5), (0.8, -1.0), (-2.5, 3.0)] {
        let b = p.b(x, l);
        let block = -Matrix2::new(b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]);
        let d = t_inv * block * t;
        let f = l + 4.0 + c - 12.0 / x.cosh().powi(2);
        assert!((d - Matrix2::new(f - c, 0.0, 0.0, f + c)).amax() < 1e-13);
    }
}

#[test]
fn lwsw_amplitude_and_tables() {
    let p = get_problem("lwsw4", &params(&[("c", 1.0), ("nu", 0.2)])).unwrap();
    assert!((p.lwsw_amplitude().unwrap() - 0.08f64.sqrt()).abs() < 1e-15);
    assert_eq!(
        p.analytic().maslov_table,
        Some(MaslovTable::Sequence(vec![0, -1, -2, -3]))
    );
    let l2 = Problem::Lwsw2 { nu: 0.2 };
    let t = l2.analytic().maslov_table.unwrap();
    assert_eq!((t.index_at(-0.1), t.index_at(0.1)), (Some(1), Some(0)));
    let cf = l2.closed_form_evans(-0.4).unwrap().value;
    assert!((cf - 0.4 / 0.2f64.sqrt() * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn sech2_oracle_wronskian_formula() {
    let p = Problem::Sech2Oracle;
    assert_eq!(p.analytic().eigenvalues.unwrap(), vec![1.0, 4.0, 9.0]);
    for k in [2.0f64, 6.0, 12.0] {
        let expected = 2.0 / 225.0 * k.sqrt() * (k - 1.0) * (k - 4.0) * (k - 9.0);
        let got = p.closed_form_evans(k).unwrap().value;
        assert!(
            (got - expected).abs() <= 1e-14 * expected.abs(),
            "{got} vs {expected}"
        );
    }
}

#[test]
fn nonmonotone_flags_indefinite() {
    let p = Problem::LwswNonmonotone { c: 1.0, nu: 0.21 };
    assert_eq!(p.d_lambda_b_definiteness(), Definiteness::Indefinite);
    assert!(p.in_essential_spectrum(-1.5));
    let mut ev: Vec<f64> = p
        .d_lambda_b()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    assert_eq!(ev, vec![-1.0, 0.0, 0.0, 1.0]);
    assert_ne!(
        Problem::Lwsw4 { c: 1.0, nu: 0.2 }.d_lambda_b_definiteness(),
        Definiteness::Indefinite
    );
}

#[test]
fn kdv5_edge_formula() {
    for (p, c) in [(13.0 / 6.0, 1.0), (-1.9, 1.0), (0.5, 2.0), (-2.5, 2.0)] {
        let w = WaveParams::new(p, c, 1.0).unwrap();
        let expected = c - 0.125 * p * (p - p.abs());
        assert!((w.lambda_edge() - expected).abs() < 1e-15);
    }
    let kdv = Problem::kdv5(WaveProfile::explicit());
    assert!(!kdv.in_essential_spectrum(0.5));
    assert!(kdv.in_essential_spectrum(1.0));
}

#[test]
fn symmetric_trace_free_and_decaying() {
    let mut rng = StdRng::seed_from_u64(3);
    for p in catalog() {
        let (gamma, f) = p.decay();
        let j = j_matrix(p.n());
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-15.0..15.0);
            let l = sample_lambda(&p, &mut rng);
            let b = p.b(x, l);
            assert!((&b - b.transpose()).amax() <= 1e-14, "{p}");
            let a = hamiltonian_generator(&b);
            assert!(a.trace().abs() < 1e-13, "{p}");
            assert!(((&j * &a) - (&j * &a).transpose()).amax() < 1e-13);
            let dev = (b - p.b_inf(l)).norm();
            assert!(
                dev <= f * (-gamma * x.abs()).exp() * (1.0 + 1e-9) + 1e-15,
                "{p} x={x} dev={dev}"
            );
        }
    }
}

/// phi = e^{+-gamma s} h(+-)(tanh s), s = x/2, and its second x-derivative.
fn scalar_closed_form(l: f64, x: f64, sign: f64) -> (f64, f64) {
    let g = 2.0 * (l + 1.0).sqrt();
    let a3 = 1.0;
    let (a0, a1, a2) = (
        g / 15.0 * (4.0 - g * g) * a3,
        (2.0 * g * g - 3.0) / 5.0 * a3,
        -g * a3,
    );
    let s = 0.5 * x;
    let t = s.tanh();
    let sech2 = 1.0 - t * t;
    let h = sign * a0 + a1 * t + sign * a2 * t * t + a3 * t.powi(3);
    let ht = a1 + 2.0 * sign * a2 * t + 3.0 * a3 * t * t;
    let htt = 2.0 * sign * a2 + 6.0 * a3 * t;
    let hs = ht * sech2;
    let hss = (htt * sech2 - 2.0 * t * ht) * sech2;
    let e = (sign * g * s).exp();
    (e * h, 0.25 * e * (hss + 2.0 * sign * g * hs + g * g * h))
}

#[test]
fn scalar_rd_closed_form_solutions_solve_ode() {
    let p = Problem::ScalarRd;
    for l in [-0.8, 0.5, 2.0] {
        for sign in [1.0, -1.0] {
            for k in -100..=100 {
                let x = k as f64 * 0.1;
                let (phi, phi_xx) = scalar_closed_form(l, x, sign);
                // J u' = B u with u = (phi, phi'): first row reads -phi'' = B11 phi
                let residual = -phi_xx - p.b(x, l)[(0, 0)] * phi;
                assert!(
                    residual.abs() <= 1e-8 * (1.0 + phi.abs()),
                    "lambda {l} x {x}: {residual}"
                );
            }
        }
    }
}

#[test]
fn infinity_data_examples() {
    let s = infinity_data(&Problem::ScalarRd, 0.0).unwrap();
    let mut re: Vec<f64> = s.eigenvalues.iter().map(|e| e.re).collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 1.0).abs() < 1e-14 && (re[1] - 1.0).abs() < 1e-14);
    assert!((s.sigma_plus - 1.0).abs() < 1e-14);

    let k = infinity_data(&Problem::kdv5(WaveProfile::explicit()), 0.0).unwrap();
    let mut mu: Vec<f64> = k.eigenvalues.iter().map(|e| e.re).collect();
    mu.sort_by(f64::total_cmp);
    let (f, s) = (1.5f64.sqrt(), (2.0 / 3.0f64).sqrt());
    for (got, want) in mu.iter().zip([-f, -s, s, f]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert!((k.sigma_plus - 5.0 / 6f64.sqrt()).abs() < 1e-12);

    let lw = Problem::Lwsw4 { c: 1.0, nu: 0.2 };
    assert!(matches!(
        infinity_data(&lw, 0.4),
        Err(MaslovError::EssentialSpectrum { .. })
    ));
}

#[test]
fn infinity_data_invariants() {
    let mut rng = StdRng::seed_from_u64(5);
    for p in catalog() {
        for _ in 0..10 {
            let l = sample_lambda(&p, &mut rng);
            let inf = infinity_data(&p, l).unwrap();
            assert!((inf.sigma_plus + inf.sigma_minus).abs() < 1e-12);
            let m = induced_generator(&inf.a_inf);
            let scale = 1.0 + inf.sigma_plus.abs();
            assert!(
                (&m * &inf.zeta_plus - &inf.zeta_plus * inf.sigma_plus).amax() < 1e-10 * scale,
                "{p} {l}"
            );
            assert!(
                (&m * &inf.zeta_minus - &inf.zeta_minus * inf.sigma_minus).amax() < 1e-10 * scale,
                "{p} {l}"
            );
            let j = j_matrix(p.n());
            assert!(
                (inf.k.transpose() * &j * &inf.k - &j).amax() < 1e-12,
                "{p} {l}"
            );
            // the minors matrix maps the first basis vector onto the unstable data
            let mut e1 = DVector::zeros(inf.zeta_plus.len());
            e1[0] = 1.0;
            let image = frame_action(&inf) * e1;
            let parallel = image.dot(&inf.zeta_plus) / image.norm();
            assert!((parallel.abs() - 1.0).abs() < 1e-12, "{p} {l}");
        }
    }
}

#[test]
fn zeta_has_no_sign_flips_along_lambda() {
    for p in catalog() {
        let (lo, hi) = p.hyperbolic_domain();
        let lo = if lo.is_finite() { lo } else { hi - 4.0 };
        let hi = if hi.is_finite() { hi } else { lo + 4.0 };
        let w = hi - lo;
        let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
        for i in 0..200 {
            let l = lo + 0.005 * w + 0.99 * w * i as f64 / 199.0;
            let inf = infinity_data(&p, l).unwrap();
            if let Some((zp, zm)) = &prev {
                assert!(zp.dot(&inf.zeta_plus) > 0.0, "{p} zeta_plus flips at {l}");
                assert!(zm.dot(&inf.zeta_minus) > 0.0, "{p} zeta_minus flips at {l}");
            }
            prev = Some((inf.zeta_plus, inf.zeta_minus));
        }
    }
}

fn frame_of(u: &DMatrix<f64>) -> Frame {
    Frame(Matrix4x2::from_iterator(u.iter().copied()))
}

#[test]
fn unstable_frames_are_lagrangian() {
    let f = unstable_frame(&Problem::CoupledRd { c: 1.0 }, 1.0).unwrap();
    assert!(frame_of(&f).symmetry_defect() < 1e-12);

    // kdv5 at P = -1.9 has a complex quartet at infinity
    let w = WaveParams::new(-1.9, 1.0, 1.0).unwrap();
    let p = Problem::kdv5(
        WaveProfile::from_nodes(w, vec![-2.0, -1.0, 0.0, 1.0, 2.0], vec![[0.0; 4]; 5]).unwrap(),
    );
    let inf = infinity_data(&p, 0.0).unwrap();
    assert!(inf
        .eigenvalues
        .iter()
        .all(|e| e.im.abs() > 1e-3 && e.re.abs() > 1e-3));
    assert!(frame_of(&inf.unstable).symmetry_defect() < 1e-12);

    // n = 1: the unstable line is spanned by (2, gamma) after scaling
    let s = unstable_frame(&Problem::ScalarRd, 0.0).unwrap();
    let gamma = 2.0;
    assert!((s[(1, 0)] / s[(0, 0)] - gamma / 2.0).abs() < 1e-14);
}

#[test]
fn sigma_ordering_examples() {
    let s = sigma_ordering_check(&Problem::ScalarRd, 0.0).unwrap();
    assert!((s.gap - 2.0).abs() < 1e-12 && !s.gap_warning);
    let k = sigma_ordering_check(&Problem::kdv5(WaveProfile::explicit()), 0.0).unwrap();
    let (f, sl) = (1.5f64.sqrt(), (2.0 / 3.0f64).sqrt());
    assert!((k.next_largest - (f - sl)).abs() < 1e-12);
    assert!((k.gap - 2.0 * sl).abs() < 1e-12 && !k.gap_warning);
    let c0 = sigma_ordering_check(&Problem::CoupledRd { c: 0.0 }, 0.0).unwrap();
    assert!(c0.repeated_eigenvalues);
}
