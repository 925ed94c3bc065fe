use maslov_core::evans::evans_roots;
use maslov_core::integrator::SolverOptions;
use maslov_core::kdv5::{
    energy, explicit_soliton, negative_eigenvalue_certificate, shoot_symmetric, Provenance,
    ShootOptions, WaveParams, WaveProfile,
};
use maslov_core::maslov::{maslov_homoclinic, maslov_index_angle};
use maslov_core::{MaslovError, Problem};
use proptest::prelude::*;

fn shoot(p: f64, c: f64, q: f64) -> WaveProfile {
    shoot_symmetric(&WaveParams::new(p, c, q).unwrap(), &ShootOptions::default()).unwrap()
}

/// sech^4 profile differentiated by central differences, as an oracle for the closed form.
#[test]
fn explicit_derivatives_match_finite_differences() {
    let f = |x: f64| 35.0 / 24.0 / (x / (2.0 * 6f64.sqrt())).cosh().powi(4);
    let h = 1e-3;
    for x in [-4.0, -1.0, 0.3, 2.5] {
        let d = explicit_soliton(x);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 =
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h.powi(3));
        assert!((d[0] - f(x)).abs() < 1e-15);
        assert!((d[1] - d1).abs() < 1e-6, "phi' at {x}");
        assert!((d[2] - d2).abs() < 1e-6, "phi'' at {x}");
        assert!((d[3] - d3).abs() < 1e-5, "phi''' at {x}");
    }
}

#[test]
fn explicit_soliton_basics() {
    assert!((explicit_soliton(0.0)[0] - 1.4583333333333333).abs() < 1e-15);
    let p = WaveParams::explicit();
    for x in [-3.0, 0.0, 3.0] {
        let d = explicit_soliton(x);
        assert!(energy(&[d[0], d[1], d[2], d[3]], &p).abs() < 1e-10);
    }
    // tail rate 4 / (2 sqrt 6) = sqrt(2/3), the slow root of mu^4 - (13/6) mu^2 + 1
    let rate = (explicit_soliton(60.0)[0] / explicit_soliton(61.0)[0]).ln();
    assert!((rate - 4.0 / (2.0 * 6f64.sqrt())).abs() < 1e-9, "{rate}");
    assert!((p.decay_rate() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
}

#[test]
fn energy_of_a_hand_state() {
    let p = WaveParams::new(2.0, 1.0, 1.0).unwrap();
    // 0.5 * 4 + 0.5 * 2 * 16 - 0.5 + 1/3 - 4 * 3, with (phi, phi', phi'', phi''') = (1, 4, 2, 3)
    assert!((energy(&[1.0, 4.0, 2.0, 3.0], &p) - 35.0 / 6.0).abs() < 1e-12);
    assert_eq!(energy(&[0.0; 4], &p), 0.0);
}

#[test]
fn shot_profile_matches_explicit_soliton() {
    let shot = shoot(13.0 / 6.0, 1.0, 1.0);
    assert_eq!(shot.provenance(), Provenance::Shot);
    let err = shot
        .nodes()
        .iter()
        .zip(shot.states())
        .map(|(&x, s)| (s[0] - explicit_soliton(x)[0]).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "max-norm error {err:e}");
    assert!(shot.residual() < 1e-6);
    assert!(shot.energy_drift() <= 1e-8 * (1.0 + shot.max_state_norm_sq()));
    assert!(shot.symmetry_defect() <= 1e-8);
}

#[test]
fn certificates_hold() {
    let explicit = negative_eigenvalue_certificate(&WaveProfile::explicit()).unwrap();
    assert!(explicit.holds(1e-5), "{explicit:?}");
    for (p, c) in [(13.0 / 6.0, 1.0), (2.0, 1.0)] {
        let cert = negative_eigenvalue_certificate(&shoot(p, c, 1.0)).unwrap();
        assert!(cert.quadratic_form < 0.0 && cert.rhs < 0.0, "{cert:?}");
        assert!(cert.holds(1e-5), "P = {p}: {cert:?}");
    }
}

#[test]
fn certificate_preconditions() {
    let violated = WaveParams::new(-0.5, 2.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..11).map(|k| k as f64 - 5.0).collect();
    let bump: Vec<[f64; 4]> = xs.iter().map(|x| [(-x * x).exp(), 0.0, 0.0, 0.0]).collect();
    let p = WaveProfile::from_nodes(violated, xs.clone(), bump).unwrap();
    let err = negative_eigenvalue_certificate(&p).unwrap_err();
    assert!(err.to_string().contains("c <= 1"), "{err}");
    let zero = WaveProfile::from_nodes(WaveParams::explicit(), xs, vec![[0.0; 4]; 11]).unwrap();
    assert!(matches!(
        negative_eigenvalue_certificate(&zero),
        Err(MaslovError::Precondition(_))
    ));
}

#[test]
fn unimodal_wave_has_homoclinic_index_two() {
    let problem = Problem::kdv5(shoot(2.0, 1.0, 1.0));
    assert_eq!(
        maslov_homoclinic(&problem, &SolverOptions::default()).unwrap(),
        2
    );
}

#[test]
fn shot_and_explicit_spectra_agree() {
    let opts = SolverOptions::default();
    let shot = Problem::kdv5(shoot(13.0 / 6.0, 1.0, 1.0));
    let explicit = Problem::kdv5(WaveProfile::explicit());
    let a = evans_roots(&shot, -1.5, 0.95, 40, &opts).unwrap().roots;
    let b = evans_roots(&explicit, -1.5, 0.95, 40, &opts).unwrap().roots;
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-5, "{a:?} vs {b:?}");
    }
    for l in [-1.4, -0.5, 0.5, 0.9] {
        assert_eq!(
            maslov_index_angle(&shot, l, &opts).unwrap().index,
            maslov_index_angle(&explicit, l, &opts).unwrap().index
        );
    }
}

#[test]
fn oscillatory_tail_profile() {
    let shot = shoot(-1.9, 1.0, 1.0);
    assert!(shot.residual() < 1e-6, "residual {:e}", shot.residual());
    assert!(shot.symmetry_defect() <= 1e-8);
    // complex leading rates: the tail changes sign
    assert!(shot.states().iter().any(|s| s[0] < -1e-3));
    let peak = shot
        .states()
        .iter()
        .map(|s| s[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let centre = shot.eval(0.0)[0];
    assert_eq!(peak, centre);
}

#[test]
fn refinement_is_fourth_order() {
    // profiles at dx and dx/2 differ by O(dx^4): halving again shrinks the gap ~16x
    let params = WaveParams::new(2.0, 1.0, 1.0).unwrap();
    let at = |dx: f64| {
        let p = shoot_symmetric(
            &params,
            &ShootOptions {
                dx,
                ..ShootOptions::default()
            },
        )
        .unwrap();
        [0.0, 1.0, 3.0].map(|x| p.eval(x)[0])
    };
    let (a, b, c) = (at(0.02), at(0.01), at(0.005));
    let gap = |u: [f64; 3], v: [f64; 3]| {
        u.iter()
            .zip(&v)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    };
    let ratio = gap(a, b) / gap(b, c);
    assert!(ratio > 8.0, "ratio {ratio}");
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wave.csv");
    let shot = shoot(2.0, 1.0, 1.0);
    shot.save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,phi,phi1,phi2,phi3\n"));
    let back = WaveProfile::load(&path, shot.params()).unwrap();
    assert_eq!(back.nodes(), shot.nodes());
    assert_eq!(back.states(), shot.states());
    let again = dir.path().join("again.csv");
    back.save(&again).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
    assert!(WaveProfile::read_csv("x,phi\n0,1\n".as_bytes(), shot.params()).is_err());
}

#[test]
fn invalid_parameters() {
    assert!(matches!(
        WaveParams::new(-3.0, 1.0, 1.0),
        Err(MaslovError::Precondition(_))
    ));
    assert!(matches!(
        WaveParams::new(2.0, 0.0, 1.0),
        Err(MaslovError::InvalidParameter(_))
    ));
    assert!(matches!(
        WaveParams::new(2.0, 1.0, 1.5),
        Err(MaslovError::InvalidParameter(_))
    ));
    assert!(WaveParams::new(2.0, 1.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn explicit_residual_is_tiny(x in -20.0f64..20.0) {
        let d = explicit_soliton(x);
        let p = WaveParams::explicit();
        let r = d[4] - p.p * d[2] + p.c * d[0] - d[0] * d[0];
        prop_assert!(r.abs() < 1e-10);
        prop_assert!((p.fourth_derivative(&[d[0], d[1], d[2], d[3]]) - d[4]).abs() < 1e-10);
    }

    #[test]
    fn hermite_interpolant_tracks_the_explicit_soliton(x in -10.0f64..10.0) {
        let xs: Vec<f64> = (0..=2000).map(|k| -10.0 + 0.01 * k as f64).collect();
        let states = xs.iter().map(|&x| { let d = explicit_soliton(x); [d[0], d[1], d[2], d[3]] }).collect();
        let p = WaveProfile::from_nodes(WaveParams::explicit(), xs, states).unwrap();
        prop_assert!((p.eval(x)[0] - explicit_soliton(x)[0]).abs() < 1e-9);
    }
}
