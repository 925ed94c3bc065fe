use maslov_core::exterior::Wedge2;
use maslov_core::integrator::SolverOptions;
use maslov_core::kdv5::WaveProfile;
use maslov_core::maslov::{
    crossing_sign, maslov_angle, maslov_homoclinic, maslov_index_2d, maslov_index_angle,
    maslov_index_intersection,
};
use maslov_core::scan::{lambda_grid, scan, Method};
use maslov_core::{MaslovError, Problem};
use nalgebra::{DVector, Vector4};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// The coupled system splits into two sech^2 wells:
/// coupled_rd(c, lambda) = sech2_oracle(lambda + 4) + sech2_oracle(lambda + 4 + 2c).
fn decoupled_shifts(c: f64, lambda: f64) -> [f64; 2] {
    [lambda + 4.0, lambda + 4.0 + 2.0 * c]
}

fn near_sech2_eigenvalue(mu: f64) -> bool {
    [1.0, 4.0, 9.0].iter().any(|e| (mu - e).abs() < 0.05) || mu < 0.05
}

#[test]
fn coupled_index_is_the_sum_of_decoupled_indices() {
    let mut rng = StdRng::seed_from_u64(20);
    let opts = SolverOptions::default();
    let mut checked = 0;
    while checked < 20 {
        let c: f64 = rng.gen_range(-2.0..3.5);
        let lambda: f64 = rng.gen_range(-4.0..6.0);
        let shifts = decoupled_shifts(c, lambda);
        if shifts.iter().any(|&m| near_sech2_eigenvalue(m)) {
            continue;
        }
        let coupled = maslov_index_angle(&Problem::CoupledRd { c }, lambda, &opts)
            .unwrap()
            .index;
        let parts: i64 = shifts
            .iter()
            .map(|&m| {
                maslov_index_angle(&Problem::Sech2Oracle, m, &opts)
                    .unwrap()
                    .index
            })
            .sum();
        assert_eq!(coupled, parts, "c = {c}, lambda = {lambda}");
        let crossings = maslov_index_intersection(&Problem::CoupledRd { c }, lambda, &opts)
            .unwrap_or_else(|e| panic!("c = {c}, lambda = {lambda}: {e}"))
            .index;
        assert_eq!(
            crossings, parts,
            "intersection count at c = {c}, lambda = {lambda}"
        );
        checked += 1;
    }
}

#[test]
fn sech2_index_counts_eigenvalues_above() {
    // index = number of eigenvalues of the well above lambda
    let opts = SolverOptions::default();
    for (lambda, expected) in [(0.5, 3), (2.0, 2), (6.0, 1), (12.0, 0)] {
        assert_eq!(
            maslov_index_angle(&Problem::Sech2Oracle, lambda, &opts)
                .unwrap()
                .index,
            expected
        );
        assert_eq!(
            maslov_index_2d(&Problem::Sech2Oracle, lambda, &opts)
                .unwrap()
                .index,
            expected
        );
    }
}

#[test]
fn coupled_homoclinic_indices() {
    let opts = SolverOptions::default();
    for (c, expected) in [(-1.75, 4), (-1.0, 3), (1.0, 2), (3.0, 1)] {
        assert_eq!(
            maslov_homoclinic(&Problem::CoupledRd { c }, &opts).unwrap(),
            expected,
            "c = {c}"
        );
    }
}

#[test]
fn crossings_in_the_scalar_problem_are_positive() {
    let r = maslov_index_2d(&Problem::ScalarRd, 0.5, &SolverOptions::default()).unwrap();
    assert_eq!(r.index, 1);
    assert_eq!(r.events.len(), 1);
    assert!(r.events.iter().all(|e| e.sign == 1 && e.form > 0.0));
}

#[test]
fn reversed_orientation_flips_crossing_signs() {
    let lw = Problem::Lwsw4 { c: 1.0, nu: 0.2 };
    let r = maslov_index_intersection(&lw, 0.3, &SolverOptions::default()).unwrap();
    assert_eq!(r.index, -3);
    assert!(r.events.iter().all(|e| e.sign == -1), "{:?}", r.events);
}

#[test]
fn non_regular_crossing_is_rejected() {
    // xi in the kernel of B at x far out: B_inf of kdv5 has the (1, 1) entry -1 only in q2;
    // pick xi with <B xi, xi> = 0 exactly
    let p = Problem::kdv5(WaveProfile::explicit());
    let lambda = 0.5;
    let b = p.b_inf(lambda);
    let a = b[(0, 0)];
    // a t^2 - s^2 = 0
    let xi = DVector::from_vec(vec![1.0, a.sqrt(), 0.0, 0.0]);
    let err = crossing_sign(&p, lambda, 1e6, &xi).unwrap_err();
    assert!(matches!(err, MaslovError::Geometry(_)), "{err}");
}

#[test]
fn identical_wells_give_a_vertex_crossing() {
    // c = 0: both branches meet the reference plane at the same x
    let err = maslov_index_intersection(
        &Problem::CoupledRd { c: 0.0 },
        0.5,
        &SolverOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, MaslovError::Geometry(_)), "{err}");
    assert_eq!(err.exit_code(), 4);
    // nearly identical wells are resolved by substep refinement
    let opts = SolverOptions::default();
    let r = maslov_index_intersection(&Problem::CoupledRd { c: -0.016 }, 0.62, &opts).unwrap();
    let parts: i64 = decoupled_shifts(-0.016, 0.62)
        .iter()
        .map(|&m| {
            maslov_index_angle(&Problem::Sech2Oracle, m, &opts)
                .unwrap()
                .index
        })
        .sum();
    assert_eq!(r.index, parts);
    assert_eq!(r.events.len(), 2);
}

#[test]
fn angle_and_intersection_agree_on_fifty_lambdas() {
    let cases = [
        (Problem::ScalarRd, -0.95, 2.5),
        (Problem::Sech2Oracle, 0.05, 12.0),
        (Problem::CoupledRd { c: 1.0 }, -2.95, 6.0),
        (Problem::Lwsw4 { c: 1.0, nu: 0.2 }, -1.5, 0.35),
        (Problem::Lwsw2 { nu: 0.2 }, -0.5, 0.35),
        (Problem::LwswNonmonotone { c: 1.0, nu: 0.21 }, -0.99, 0.4),
        (Problem::kdv5(WaveProfile::explicit()), -1.5, 0.95),
    ];
    for (problem, lo, hi) in cases {
        let lambdas = lambda_grid(lo, hi, 50).unwrap();
        let table = scan(&problem, &lambdas, Method::Both, &SolverOptions::default()).unwrap();
        assert!(
            table.disagreements.is_empty(),
            "{problem}: {:?}",
            table.disagreements
        );
        let indexed = table.rows.iter().filter(|r| r.maslov.is_some()).count();
        assert!(
            indexed >= 48,
            "{problem}: only {indexed} rows carry an index"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crossing_wedge_matches_bilinear_form(
        x in -5.0f64..5.0,
        lambda in -0.9f64..0.35,
        v in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let p = Problem::Lwsw4 { c: 1.0, nu: 0.2 };
        let xi = DVector::from_row_slice(&v);
        prop_assume!(xi.norm() > 0.1);
        match crossing_sign(&p, lambda, x, &xi) {
            Ok(cs) => {
                prop_assert!((cs.wedge - cs.bilinear).abs() <= 1e-12 * (1.0 + cs.bilinear.abs()));
                prop_assert_eq!(cs.form, -cs.bilinear);
                prop_assert_eq!(cs.sign, cs.form.signum() as i64);
            }
            Err(MaslovError::Geometry(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn scalar_crossing_wedge_matches_bilinear_form(x in -5.0f64..5.0, lambda in -0.9f64..3.0, t in 0.0f64..6.3) {
        let xi = DVector::from_vec(vec![t.cos(), t.sin()]);
        let cs = crossing_sign(&Problem::ScalarRd, lambda, x, &xi);
        if let Ok(cs) = cs {
            prop_assert!((cs.wedge - cs.bilinear).abs() <= 1e-12 * (1.0 + cs.bilinear.abs()));
        }
    }

    #[test]
    fn angle_of_a_graph_has_unit_modulus(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        // frame [I; S] with S = [[a, b], [b, c]]
        let x = Vector4::new(1.0, 0.0, a, b);
        let y = Vector4::new(0.0, 1.0, b, c);
        let u = Wedge2::from_vectors(&x, &y);
        let k = maslov_angle(&u).unwrap();
        prop_assert!((k.norm() - 1.0).abs() < 1e-12);
        // det(I - iS) / det(I + iS)
        let i = Complex64::new(0.0, 1.0);
        let det = |s: Complex64| (Complex64::from(1.0) + s * a) * (Complex64::from(1.0) + s * c) - s * s * b * b;
        prop_assert!((k - det(-i) / det(i)).norm() < 1e-12);
    }
}
