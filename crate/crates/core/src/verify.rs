//! Runtime property suites behind `maslov verify`.
//!
//! Each check compares a library routine against an independent oracle
//! (brute-force expansion, closed form, or a conserved quantity) and records
//! pass/fail with the worst deviation seen.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Matrix4, Matrix4x2, Matrix6, Vector4, Vector6};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::asymptotics::{
    hamiltonian_generator, induced_generator, infinity_data, invariant_subspaces,
};
use crate::error::{MaslovError, Result};
use crate::evans::{closed_form_comparison, evans_roots};
use crate::exterior::{induced_matrix_2, j4, Frame, Wedge2, BASIS};
use crate::integrator::{
    attractivity_violation, constraint_drift, integrate, integrate_from, rk4_step, solve,
    Coordinates, Grid, SolverOptions,
};
use crate::kdv5::WaveProfile;
use crate::maslov::{kappa_pair, maslov_angle, maslov_homoclinic, maslov_index_angle};
use crate::problems::Problem;

const SEED: u64 = 0x5eed_1234;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Exterior,
    Attractivity,
    Oracles,
    All,
}

impl FromStr for Suite {
    type Err = MaslovError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exterior" => Ok(Suite::Exterior),
            "attractivity" => Ok(Suite::Attractivity),
            "oracles" => Ok(Suite::Oracles),
            "all" => Ok(Suite::All),
            other => Err(MaslovError::InvalidParameter(format!(
                "unknown suite '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, suite: &'static str, name: &'static str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check {
            suite,
            name,
            passed,
            detail,
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}/{}: {}", c.suite, c.name, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn run(suite: Suite) -> Report {
    let mut report = Report::default();
    if matches!(suite, Suite::Exterior | Suite::All) {
        exterior_suite(&mut report);
    }
    if matches!(suite, Suite::Attractivity | Suite::All) {
        attractivity_suite(&mut report);
    }
    if matches!(suite, Suite::Oracles | Suite::All) {
        oracle_suite(&mut report);
    }
    report
}

fn verdict(worst: f64, tol: f64) -> (bool, String) {
    (worst <= tol, format!("worst {worst:.3e} (tol {tol:.0e})"))
}

fn random_matrix4(rng: &mut StdRng) -> Matrix4<f64> {
    Matrix4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

fn random_symmetric4(rng: &mut StdRng) -> Matrix4<f64> {
    let m = random_matrix4(rng);
    (m + m.transpose()) * 0.5
}

fn random_vector4(rng: &mut StdRng) -> Vector4<f64> {
    Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

fn random_symmetric2(rng: &mut StdRng) -> Matrix2<f64> {
    let (a, b, c) = (
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    Matrix2::new(a, b, b, c)
}

/// Product of symplectic shears [[I, S1], [0, I]] [[I, 0], [S2, I]].
fn random_symplectic(rng: &mut StdRng) -> Matrix4<f64> {
    let mut upper = Matrix4::identity();
    upper
        .fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&random_symmetric2(rng));
    let mut lower = Matrix4::identity();
    lower
        .fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&random_symmetric2(rng));
    upper * lower
}

/// Lagrangian frame: a symplectic image of the graph [I; S], times a random 2x2.
pub fn random_lagrangian_frame(rng: &mut StdRng) -> Frame {
    let mut z = Matrix4x2::zeros();
    z.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&Matrix2::identity());
    z.fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&random_symmetric2(rng));
    let m = Matrix2::from_fn(|_, _| rng.gen_range(-1.0..1.0)) + Matrix2::identity() * 2.0;
    Frame(random_symplectic(rng) * z * m)
}

/// Brute-force A^(2): apply A to each factor of every basis 2-form and re-expand.
fn derivation_oracle(a: &Matrix4<f64>) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for (col, &(i, j)) in BASIS.iter().enumerate() {
        let (ei, ej) = (Vector4::ith(i, 1.0), Vector4::ith(j, 1.0));
        let w = Wedge2::from_vectors(&(a * ei), &ej).0 + Wedge2::from_vectors(&ei, &(a * ej)).0;
        m.set_column(col, &w);
    }
    m
}

fn omega() -> Vector6<f64> {
    Wedge2::omega().0
}

fn exterior_suite(r: &mut Report) {
    let s = "exterior";
    let mut rng = StdRng::seed_from_u64(SEED);

    r.push(
        s,
        "derivation_rule",
        Ok({
            let worst = (0..100)
                .map(|_| {
                    let a = random_matrix4(&mut rng);
                    (induced_matrix_2(&a) - derivation_oracle(&a)).amax()
                })
                .fold(0.0, f64::max);
            verdict(worst, 1e-14)
        }),
    );

    r.push(
        s,
        "kernel_iff_hamiltonian",
        Ok({
            let j = j4();
            let ham = (0..100)
                .map(|_| (induced_matrix_2(&(-j * random_symmetric4(&mut rng))) * omega()).norm())
                .fold(0.0, f64::max);
            let non = (0..100)
                .map(|_| (induced_matrix_2(&random_matrix4(&mut rng)) * omega()).norm())
                .fold(f64::INFINITY, f64::min);
            let passed = ham <= 1e-13 && non > 1e-6;
            (
                passed,
                format!("max |A2 w| Hamiltonian {ham:.2e}, min non-Hamiltonian {non:.2e}"),
            )
        }),
    );

    r.push(
        s,
        "decomposition_identity",
        Ok({
            let j2 = induced_matrix_2(&j4());
            let w = omega();
            let worst = (0..100)
                .map(|_| {
                    let b = random_symmetric4(&mut rng);
                    let b2 = induced_matrix_2(&b);
                    let skew = induced_matrix_2(&(-j4() * b)) + j2 * b2;
                    [
                        (skew + skew.transpose()).amax(),
                        (skew * w).amax(),
                        (w.transpose() * skew).amax(),
                        (j2 * (b2 * w)).amax(),
                    ]
                    .into_iter()
                    .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            verdict(worst, 1e-14)
        }),
    );

    r.push(
        s,
        "kernel_of_j2",
        Ok({
            let j2 = induced_matrix_2(&j4());
            let e = |k: usize| Wedge2::basis(k).0;
            let kernel = [e(1), e(4), e(0) + e(5), e(2) + e(3)];
            let residual = kernel.iter().map(|v| (j2 * v).norm()).fold(0.0, f64::max);
            let rank = j2
                .svd(false, false)
                .singular_values
                .iter()
                .filter(|&&s| s > 1e-12)
                .count();
            (
                residual == 0.0 && rank == 2,
                format!("rank {rank}, kernel residual {residual:e}"),
            )
        }),
    );

    r.push(
        s,
        "frame_equivalence",
        Ok({
            let worst = (0..100)
                .map(|_| {
                    let z = Matrix4x2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                    let m = Matrix2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                    let lhs = Frame(z * m)
                        .wedge()
                        .map(|w| w.0)
                        .unwrap_or_else(|_| Vector6::zeros());
                    let rhs = Frame(z)
                        .wedge()
                        .map(|w| w.0 * m.determinant())
                        .unwrap_or_default();
                    (lhs - rhs).amax()
                })
                .fold(0.0, f64::max);
            verdict(worst, 1e-13)
        }),
    );

    r.push(
        s,
        "lagrangian_frames",
        (|| {
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let f = random_lagrangian_frame(&mut rng);
                let u = f.wedge()?;
                let scale = 1.0 + u.0.norm_squared();
                worst = worst.max(u.i1().abs() / scale).max(u.i2().abs() / scale);
                worst = worst.max(f.symmetry_defect() / scale);
            }
            Ok(verdict(worst, 1e-12))
        })(),
    );

    r.push(
        s,
        "branch_pair_oracle",
        (|| {
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let f = random_lagrangian_frame(&mut rng);
                let (x, y) = (f.x(), f.y());
                let i = Complex64::new(0.0, 1.0);
                let xm = x.map(Complex::from) - y.map(Complex::from) * i;
                let xp = x.map(Complex::from) + y.map(Complex::from) * i;
                let q = xm
                    * xp.try_inverse()
                        .ok_or_else(|| MaslovError::Geometry("X + iY singular".into()))?;
                // 2x2 eigenvalues by the quadratic formula
                let (tr, det) = (q.trace(), q.determinant());
                let disc = (tr * tr - det * 4.0).sqrt();
                let oracle = [(tr + disc) * 0.5, (tr - disc) * 0.5];
                let u = f.wedge()?;
                let pair = kappa_pair(&u)?;
                let matched = ((pair[0] - oracle[0]).norm() + (pair[1] - oracle[1]).norm())
                    .min((pair[0] - oracle[1]).norm() + (pair[1] - oracle[0]).norm());
                let angle = maslov_angle(&u)?;
                let det_ratio = xm.determinant() / xp.determinant();
                worst = worst
                    .max(matched)
                    .max((pair[0] * pair[1] - angle).norm())
                    .max((angle - det_ratio).norm());
            }
            Ok(verdict(worst, 1e-9))
        })(),
    );

    r.push(
        s,
        "gram_determinant",
        Ok({
            let worst = (0..100)
                .map(|_| {
                    let (a, b, c, d) = (
                        random_vector4(&mut rng),
                        random_vector4(&mut rng),
                        random_vector4(&mut rng),
                        random_vector4(&mut rng),
                    );
                    let lhs = Wedge2::from_vectors(&a, &b).inner(&Wedge2::from_vectors(&c, &d));
                    let gram =
                        Matrix2::new(a.dot(&c), a.dot(&d), b.dot(&c), b.dot(&d)).determinant();
                    (lhs - gram).abs()
                })
                .fold(0.0, f64::max);
            verdict(worst, 1e-13)
        }),
    );

    r.push(s, "hyperbolic_is_lagrangian", hyperbolic_frames());

    r.push(
        s,
        "krein_sign",
        Ok({
            let mut agree = 0;
            let trials = 50;
            for _ in 0..trials {
                if krein_trial(&mut rng).unwrap_or(false) {
                    agree += 1;
                }
            }
            (
                agree == trials,
                format!("{agree}/{trials} elliptic pairs agree"),
            )
        }),
    );

    r.push(
        s,
        "crossing_form_wedge",
        Ok({
            let worst = (0..100)
                .map(|_| {
                    let b = random_symmetric4(&mut rng);
                    let xi = random_vector4(&mut rng);
                    let a = -j4() * b;
                    let wedge = Wedge2::triple(&xi, &(a * xi));
                    let bilinear = xi.dot(&(b * xi));
                    (wedge - bilinear).abs() / (1e-300 + bilinear.abs().max(xi.norm_squared()))
                })
                .fold(0.0, f64::max);
            verdict(worst, 1e-10)
        }),
    );

    r.push(s, "omega_sign_invariance", omega_sign_invariance(&mut rng));
}

fn sample_problems() -> Vec<(Problem, Vec<f64>)> {
    vec![
        (Problem::ScalarRd, vec![-0.9, 0.5, 2.0]),
        (Problem::Sech2Oracle, vec![2.0, 6.0]),
        (Problem::Lwsw2 { nu: 0.2 }, vec![-0.4, 0.1]),
        (Problem::CoupledRd { c: 1.0 }, vec![-2.5, 1.0, 4.0]),
        (Problem::Lwsw4 { c: 1.0, nu: 0.2 }, vec![-0.4, 0.1, 0.3]),
        (
            Problem::LwswNonmonotone { c: 1.0, nu: 0.21 },
            vec![-0.5, 0.3],
        ),
        (Problem::kdv5(WaveProfile::explicit()), vec![-2.0, 0.5]),
    ]
}

fn hyperbolic_frames() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (p, lambdas) in sample_problems() {
        if p.n() != 2 {
            continue;
        }
        for l in lambdas {
            let inf = infinity_data(&p, l)?;
            let f = Frame(Matrix4x2::from_iterator(inf.unstable.iter().copied()));
            worst = worst.max(f.symmetry_defect());
            count += 1;
        }
    }
    // steady kdv5 linearization in the complex-quartet regime, P = -1.9
    let (p, c) = (-1.9, 1.0);
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, 0.0, 0.0,
        0.0, -1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, p,
    ]);
    let (u, _) = invariant_subspaces(&hamiltonian_generator(&b), 2)?;
    worst = worst.max(Frame(Matrix4x2::from_iterator(u.iter().copied())).symmetry_defect());
    count += 1;
    let (ok, d) = verdict(worst, 1e-12);
    Ok((ok, format!("{count} unstable frames, {d}")))
}

/// sign(omega ^ (xi1 ^ xi2)) against sign 2<J xi2, xi1> for an eigenvector
/// xi1 + i xi2 of A = J^{-1} B with eigenvalue i nu, nu > 0.
fn krein_trial(rng: &mut StdRng) -> Result<bool> {
    let nu = rng.gen_range(0.5..2.0);
    let beta = rng.gen_range(0.5..2.0);
    let flip = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    // elliptic block in (q1, p1), hyperbolic block in (q2, p2)
    let mut b0 = Matrix4::zeros();
    b0[(0, 0)] = flip * nu;
    b0[(2, 2)] = flip * nu;
    b0[(1, 3)] = beta;
    b0[(3, 1)] = beta;
    let m = random_symplectic(rng);
    let b = m.transpose() * b0 * m;
    let a = -j4() * b;
    let shifted = a.map(Complex::from) - Matrix4::<Complex64>::identity() * Complex64::new(0.0, nu);
    let svd = shifted.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| MaslovError::Solver("svd failed".into()))?;
    let k = svd.singular_values.imin();
    if svd.singular_values[k] > 1e-8 {
        return Err(MaslovError::Solver("eigenvalue i nu not found".into()));
    }
    let zeta: Vec<Complex64> = vt.row(k).iter().map(|z| z.conj()).collect();
    let xi1 = Vector4::from_fn(|i, _| zeta[i].re);
    let xi2 = Vector4::from_fn(|i, _| zeta[i].im);
    let u = Wedge2::from_vectors(&xi1, &xi2);
    let form = 2.0 * (j4() * xi2).dot(&xi1);
    let krein = Wedge2::omega().pair(&u);
    Ok(krein.signum() == form.signum() && u.omega_sign() == -(krein.signum() as i8))
}

/// Along the lifted flow, I2 = U2 + U5 keeps its sign and decays at rate sigma_plus.
///
/// RK4 preserves linear first integrals, so the discrete oracle is
/// I2(-L) R(-sigma h)^k with R the RK4 stability polynomial.
fn omega_sign_invariance(rng: &mut StdRng) -> Result<(bool, String)> {
    let mut flips = 0;
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    for (p, lambdas) in sample_problems() {
        if p.n() != 2 {
            continue;
        }
        let inf = infinity_data(&p, lambdas[0])?;
        let grid = Grid::new(10.0, 0.01)?;
        let z = -inf.sigma_plus * grid.dx;
        let factor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        for _ in 0..4 {
            let y0 = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
            let traj = integrate_from(&p, &inf, grid, y0)?;
            let i20 = traj.states[0][1] + traj.states[0][4];
            runs += 1;
            let mut flipped = false;
            let mut expected = i20;
            for s in &traj.states {
                let i2 = s[1] + s[4];
                let floor = 1e-12 * (1.0 + s.norm_squared());
                if expected.abs() > floor && i2.signum() != i20.signum() {
                    flipped = true;
                }
                worst = worst.max((i2 - expected).abs() / (1.0 + s.norm_squared()));
                expected *= factor;
            }
            if flipped {
                flips += 1;
            }
        }
    }
    Ok((
        flips == 0 && worst <= 1e-13,
        format!("{runs} runs, {flips} sign flips, worst |I2 - discrete decay| {worst:.2e}"),
    ))
}

fn attractivity_suite(r: &mut Report) {
    let s = "attractivity";
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let kdv5 = Problem::kdv5(WaveProfile::explicit());

    r.push(
        s,
        "constant_coefficient_decay",
        (|| {
            let inf = infinity_data(&kdv5, -1.0)?;
            let mut m = induced_generator(&inf.a_inf);
            for i in 0..6 {
                m[(i, i)] -= inf.sigma_plus;
            }
            let mut y = &inf.zeta_plus + DVector::from_fn(6, |_, _| rng.gen_range(-1e-3..1e-3));
            let (i10, i20) = (wedge_of(&y).i1(), wedge_of(&y).i2());
            let h = 0.01;
            let mut worst: f64 = 1.0;
            for k in 1..=1000 {
                y = rk4_step(|_, v: &DVector<f64>| &m * v, 0.0, &y, h);
                let t = k as f64 * h;
                let w = wedge_of(&y);
                for (now, start, rate) in [(w.i1(), i10, 2.0), (w.i2(), i20, 1.0)] {
                    let env = start.abs() * (-rate * inf.sigma_plus * t).exp();
                    if env > 1e-12 {
                        let ratio = now.abs() / env;
                        worst = worst.max(ratio).max(1.0 / ratio);
                    }
                }
            }
            Ok((worst <= 2.0, format!("worst envelope ratio {worst:.6}")))
        })(),
    );

    r.push(
        s,
        "kdv5_drift_lambda_minus_10",
        (|| {
            let (_, traj) = solve(
                &kdv5,
                -10.0,
                &SolverOptions::default(),
                Coordinates::Original,
            )?;
            let drift = constraint_drift(&traj);
            let envelope = attractivity_violation(&traj, 1e-8);
            Ok((
                drift.max_i1 < 1e-10 && envelope.is_none(),
                format!(
                    "max I1 {:.2e}, max I2 {:.2e}, envelope ok {}",
                    drift.max_i1,
                    drift.max_i2,
                    envelope.is_none()
                ),
            ))
        })(),
    );

    r.push(
        s,
        "perturbed_start_envelopes",
        (|| {
            let mut violations = Vec::new();
            for (p, lambdas) in sample_problems() {
                if p.n() != 2 {
                    continue;
                }
                let l = lambdas[0];
                let inf = infinity_data(&p, l)?;
                let grid = Grid::new(20.0, 0.01)?;
                let y0 = &inf.zeta_plus + DVector::from_fn(6, |_, _| rng.gen_range(-1e-3..1e-3));
                let traj = integrate_from(&p, &inf, grid, y0)?;
                if let Some((x, i1, i2)) = attractivity_violation(&traj, 1e-8) {
                    violations.push(format!("{p} at x = {x:.2} (I1 {i1:.2e}, I2 {i2:.2e})"));
                }
            }
            Ok((
                violations.is_empty(),
                if violations.is_empty() {
                    "all envelopes hold".into()
                } else {
                    violations.join("; ")
                },
            ))
        })(),
    );

    r.push(
        s,
        "i2_preservation",
        (|| {
            let mut worst: f64 = 0.0;
            let mut runs = 0;
            for (p, lambdas) in sample_problems() {
                if p.n() != 2 {
                    continue;
                }
                for l in lambdas {
                    let (_, traj) = solve(&p, l, &SolverOptions::default(), Coordinates::Original)?;
                    let w0 = wedge_of(&traj.states[0]);
                    if w0.i2().abs() < 1e-13 {
                        runs += 1;
                        worst = worst.max(constraint_drift(&traj).max_i2);
                    }
                }
            }
            let (ok, d) = verdict(worst, 1e-12);
            Ok((ok && runs > 0, format!("{runs} runs, {d}")))
        })(),
    );

    r.push(
        s,
        "scaling_invariance",
        (|| {
            let mut worst: f64 = 0.0;
            for (p, lambdas) in sample_problems() {
                let l = lambdas[0];
                let inf = infinity_data(&p, l)?;
                let mut unscaled_inf = inf.clone();
                unscaled_inf.sigma_plus = 0.0;
                let grid = Grid::new(5.0, 0.001)?;
                let scaled = integrate(&p, &inf, grid, Coordinates::Original)?;
                let unscaled = integrate(&p, &unscaled_inf, grid, Coordinates::Original)?;
                for k in 0..=grid.steps {
                    let t = scaled.x(k) + grid.half_length;
                    let rescaled = &unscaled.states[k] * (-inf.sigma_plus * t).exp();
                    worst =
                        worst.max((rescaled - &scaled.states[k]).norm() / scaled.states[k].norm());
                }
            }
            Ok(verdict(worst, 1e-8))
        })(),
    );

    r.push(
        s,
        "rk4_order",
        (|| {
            let p = Problem::ScalarRd;
            let mut ratios = Vec::new();
            for l in [-0.5, 0.5, 2.0] {
                let err = |dx: f64| -> Result<f64> {
                    let opts = SolverOptions {
                        half_length: Some(40.0),
                        dx,
                    };
                    let (num, closed) =
                        closed_form_comparison(&p, l, &opts)?.expect("scalar_rd has a closed form");
                    Ok((num - closed).abs())
                };
                let e = [err(0.04)?, err(0.02)?, err(0.01)?];
                ratios.push(e[0] / e[1]);
                ratios.push(e[1] / e[2]);
            }
            let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((
                worst >= 14.0,
                format!("smallest error ratio per halving {worst:.2}"),
            ))
        })(),
    );
}

fn wedge_of(y: &DVector<f64>) -> Wedge2 {
    Wedge2::new([y[0], y[1], y[2], y[3], y[4], y[5]])
}

fn roots_match(found: &[f64], expected: &[f64], tol: f64) -> (bool, String) {
    let ok = found.len() == expected.len()
        && found
            .iter()
            .zip(expected)
            .all(|(a, b)| (a - b).abs() <= tol);
    let worst = found
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (
        ok,
        format!("roots {found:.9?}, expected {expected:?}, worst {worst:.2e}"),
    )
}

/// Spread of numeric / closed-form Evans ratios, relative to their mean.
pub fn ratio_spread(
    problem: &Problem,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let mut ratios = Vec::new();
    for &l in lambdas {
        let (num, closed) = closed_form_comparison(problem, l, opts)?.ok_or_else(|| {
            MaslovError::Precondition(format!("{problem} has no closed-form Evans function"))
        })?;
        ratios.push(num / closed);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean.abs();
    Ok((mean, spread))
}

fn oracle_suite(r: &mut Report) {
    let s = "oracles";
    let opts = SolverOptions::default();

    r.push(
        s,
        "scalar_rd_roots",
        (|| {
            let rep = evans_roots(&Problem::ScalarRd, -0.95, 2.0, 200, &opts)?;
            Ok(roots_match(&rep.roots, &[-0.75, 0.0, 1.25], 1e-6))
        })(),
    );

    r.push(
        s,
        "scalar_rd_closed_form",
        (|| {
            let lambdas: Vec<f64> = (0..20).map(|i| -0.9 + 0.145 * i as f64).collect();
            let (mean, spread) = ratio_spread(&Problem::ScalarRd, &lambdas, &opts)?;
            let (ok, d) = verdict(spread, 1e-6);
            Ok((ok, format!("ratio {mean:.12}, {d}")))
        })(),
    );

    r.push(
        s,
        "scalar_rd_indices",
        (|| {
            let mut got = Vec::new();
            for l in [-0.9, -0.5, 0.5, 2.0] {
                got.push(maslov_index_angle(&Problem::ScalarRd, l, &opts)?.index);
            }
            Ok((got == [3, 2, 1, 0], format!("indices {got:?}")))
        })(),
    );

    r.push(
        s,
        "sech2_eigenvalues",
        (|| {
            let rep = evans_roots(&Problem::Sech2Oracle, 0.5, 12.0, 200, &opts)?;
            Ok(roots_match(&rep.roots, &[1.0, 4.0, 9.0], 1e-6))
        })(),
    );

    r.push(
        s,
        "sech2_wronskian",
        (|| {
            let fine = SolverOptions::with_dx(0.001);
            let mut worst: f64 = 0.0;
            for k in [2.0, 6.0, 12.0] {
                let (num, closed) =
                    closed_form_comparison(&Problem::Sech2Oracle, k, &fine)?.expect("closed form");
                worst = worst.max((num / closed - 1.0).abs());
            }
            Ok(verdict(worst, 1e-8))
        })(),
    );

    r.push(
        s,
        "coupled_rd_roots",
        (|| {
            let rep = evans_roots(
                &Problem::CoupledRd { c: 1.0 },
                -3.5,
                5.5,
                200,
                &SolverOptions::with_dx(0.005),
            )?;
            Ok(roots_match(&rep.roots, &[-3.0, -2.0, 0.0, 3.0, 5.0], 1e-6))
        })(),
    );

    r.push(
        s,
        "coupled_rd_homoclinic",
        (|| {
            let mut got = Vec::new();
            for c in [-1.75, -1.0, 1.0, 3.0] {
                got.push(maslov_homoclinic(&Problem::CoupledRd { c }, &opts)?);
            }
            Ok((got == [4, 3, 2, 1], format!("homoclinic indices {got:?}")))
        })(),
    );

    r.push(
        s,
        "lwsw2_closed_form",
        (|| {
            let p = Problem::Lwsw2 { nu: 0.2 };
            let value = p.closed_form_evans(-0.4).expect("closed form").value;
            let exact = 2.0 * 2f64.sqrt() * 0.2f64.sqrt();
            let lambdas: Vec<f64> = (0..20)
                .map(|i| -0.9 + 0.06 * i as f64)
                .filter(|l: &f64| l.abs() > 1e-3)
                .collect();
            let (mean, spread) = ratio_spread(&p, &lambdas, &opts)?;
            Ok((
                spread <= 1e-6 && (value - exact).abs() < 1e-12,
                format!("D(-0.4) = {value:.9}, ratio {mean:.12}, spread {spread:.2e}"),
            ))
        })(),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("exterior".parse::<Suite>().unwrap(), Suite::Exterior);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn random_frames_are_lagrangian() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let f = random_lagrangian_frame(&mut rng);
            assert!(f.symmetry_defect() < 1e-12);
        }
    }
}
