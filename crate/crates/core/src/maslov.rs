//! Maslov index by angle winding and by counting signed intersections.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector4};
use num_complex::Complex64;

use crate::asymptotics::hamiltonian_generator;
use crate::error::{MaslovError, Result};
use crate::evans::evans_from_trajectory;
use crate::exterior::Wedge2;
use crate::integrator::{
    constraint_drift, solve, Coordinates, DriftReport, Generator, SolverOptions, Trajectory,
};
use crate::linalg::kernel_basis;
use crate::problems::Problem;

/// Crossings with positive crossing form move the eigenangles of Q counterclockwise.
const CROSSING_DIRECTION: f64 = 1.0;
/// Winding residues above this mean the endpoint did not return to its plane.
pub const RESIDUE_TOL: f64 = 0.05;
/// Crossing forms below this (relative to |xi|^2) are non-regular.
pub const REGULARITY_TOL: f64 = 1e-10;

fn wedge(s: &DVector<f64>) -> Wedge2 {
    Wedge2::new([s[0], s[1], s[2], s[3], s[4], s[5]])
}

/// det(X - iY) for the plane with Plucker coordinates U (or the line (u1, u2)).
fn det_minus(s: &DVector<f64>) -> Complex64 {
    match s.len() {
        2 => Complex64::new(s[0], -s[1]),
        _ => Complex64::new(s[0] - s[5], s[3] - s[2]),
    }
}

/// e^{i kappa} = det(X - iY) / det(X + iY) from the Plucker coordinates.
pub fn maslov_angle(u: &Wedge2) -> Result<Complex64> {
    if !u.is_lagrangian() {
        return Err(MaslovError::Geometry(format!(
            "plane is not Lagrangian (I1 = {:e}, I2 = {:e})",
            u.i1(),
            u.i2()
        )));
    }
    let k = Complex64::new(u.0[0] - u.0[5], u.0[3] - u.0[2]);
    if k.norm() == 0.0 {
        return Err(MaslovError::Geometry("zero 2-form".into()));
    }
    Ok(k / k.conj())
}

/// e^{i kappa} for a Lagrangian line in R^2.
pub fn maslov_angle_2d(u: [f64; 2]) -> Result<Complex64> {
    let k = Complex64::new(u[0], -u[1]);
    if k.norm() == 0.0 {
        return Err(MaslovError::Geometry("zero vector".into()));
    }
    Ok(k / k.conj())
}

/// The eigenvalues e^{i kappa_1}, e^{i kappa_2} of Q = (X - iY)(X + iY)^{-1}.
pub fn kappa_pair(u: &Wedge2) -> Result<[Complex64; 2]> {
    if !u.is_lagrangian() {
        return Err(MaslovError::Geometry(format!(
            "plane is not Lagrangian (I1 = {:e}, I2 = {:e})",
            u.i1(),
            u.i2()
        )));
    }
    Ok(pair_unchecked(&u.0.iter().copied().collect::<Vec<_>>()))
}

fn pair_unchecked(c: &[f64]) -> [Complex64; 2] {
    let kbar = Complex64::new(c[0] - c[5], c[2] - c[3]);
    let s = (4.0 * c[4] * c[4] + (c[2] + c[3]).powi(2)).sqrt();
    let t = c[0] + c[5];
    let norm = |z: Complex64| z / z.norm();
    [
        norm(Complex64::new(t, s) / kbar),
        norm(Complex64::new(t, -s) / kbar),
    ]
}

/// Eigenvalues of Q for a lifted state of either dimension.
fn branches(s: &DVector<f64>) -> Vec<Complex64> {
    match s.len() {
        2 => {
            let k = Complex64::new(s[0], -s[1]);
            vec![k / k.conj()]
        }
        _ => pair_unchecked(s.as_slice()).to_vec(),
    }
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Lifted angle function along a trajectory.
#[derive(Debug, Clone)]
pub struct AngleTrace {
    pub xs: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Every step had |delta kappa| < pi.
    pub certified: bool,
}

impl AngleTrace {
    pub fn winding(&self) -> f64 {
        (self.kappa[self.kappa.len() - 1] - self.kappa[0]) / (2.0 * PI)
    }
}

/// kappa(x) = 2 arg det(X - iY), unwrapped.
pub fn angle_trace(traj: &Trajectory) -> AngleTrace {
    let mut kappa = Vec::with_capacity(traj.states.len());
    let mut certified = true;
    let mut prev = det_minus(&traj.states[0]).arg();
    let mut lifted = prev;
    kappa.push(2.0 * lifted);
    for s in &traj.states[1..] {
        let a = det_minus(s).arg();
        let d = wrap(a - prev);
        if d.abs() >= 0.5 * PI {
            certified = false;
        }
        lifted += d;
        prev = a;
        kappa.push(2.0 * lifted);
    }
    AngleTrace {
        xs: (0..traj.states.len()).map(|k| traj.x(k)).collect(),
        kappa,
        certified,
    }
}

#[derive(Debug, Clone)]
pub struct AngleIndex {
    pub index: i64,
    pub winding: f64,
    pub evans: f64,
    pub crossings: usize,
    pub drift: DriftReport,
    pub trace: AngleTrace,
}

/// Maslov index from the winding of kappa over [-L, L].
pub fn maslov_index_angle(
    problem: &Problem,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<AngleIndex> {
    let (inf, traj) = solve(problem, lambda, opts, Coordinates::Original)?;
    let trace = angle_trace(&traj);
    if !trace.certified {
        return Err(MaslovError::Solver(format!(
            "angle step not certified at lambda = {lambda}; reduce dx"
        )));
    }
    let evans = evans_from_trajectory(&inf, &traj).d;
    let winding = trace.winding();
    let residue = (winding - winding.round()).abs();
    if residue >= RESIDUE_TOL {
        return Err(MaslovError::NearEigenvalue { lambda, evans });
    }
    let crossings = traj
        .states
        .windows(2)
        .filter(|w| inf.stable_pairing(&w[0]).signum() != inf.stable_pairing(&w[1]).signum())
        .count();
    let index = (problem.orientation().sign() * CROSSING_DIRECTION * winding.round()) as i64;
    Ok(AngleIndex {
        index,
        winding,
        evans,
        crossings,
        drift: constraint_drift(&traj),
        trace,
    })
}

/// Sign data of the crossing form at one intersection.
#[derive(Debug, Clone, Copy)]
pub struct CrossingSign {
    pub sign: i64,
    /// orientation * <B xi, xi>
    pub form: f64,
    /// <B xi, xi>
    pub bilinear: f64,
    /// omega ^ xi ^ A xi (A xi ^ xi for n = 1)
    pub wedge: f64,
}

/// Evaluates the crossing form on a vector xi of the intersection.
pub fn crossing_sign(
    problem: &Problem,
    lambda: f64,
    x0: f64,
    xi: &DVector<f64>,
) -> Result<CrossingSign> {
    let b = problem.b(x0, lambda);
    if xi.len() != b.nrows() {
        return Err(MaslovError::InvalidParameter(
            "crossing vector has the wrong dimension".into(),
        ));
    }
    let bilinear = xi.dot(&(&b * xi));
    let axi = hamiltonian_generator(&b) * xi;
    let wedge = match xi.len() {
        2 => axi[0] * xi[1] - axi[1] * xi[0],
        _ => Wedge2::triple(
            &Vector4::new(xi[0], xi[1], xi[2], xi[3]),
            &Vector4::new(axi[0], axi[1], axi[2], axi[3]),
        ),
    };
    if bilinear.abs() < REGULARITY_TOL * xi.norm_squared() {
        return Err(MaslovError::Geometry(format!(
            "non-regular crossing at x = {x0} (form = {bilinear:e})"
        )));
    }
    let form = problem.orientation().sign() * bilinear;
    Ok(CrossingSign {
        sign: form.signum() as i64,
        form,
        bilinear,
        wedge,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CrossingEvent {
    pub x0: f64,
    pub branch: usize,
    pub sign: i64,
    pub form: f64,
}

#[derive(Debug, Clone)]
pub struct IntersectionIndex {
    pub index: i64,
    pub evans: f64,
    pub events: Vec<CrossingEvent>,
    pub drift: DriftReport,
}

fn match_branches(prev: &[Complex64], cur: Vec<Complex64>) -> Vec<Complex64> {
    if cur.len() == 2 {
        let keep = (prev[0] - cur[0]).norm() + (prev[1] - cur[1]).norm();
        let swap = (prev[0] - cur[1]).norm() + (prev[1] - cur[0]).norm();
        if swap < keep {
            return vec![cur[1], cur[0]];
        }
    }
    cur
}

/// arg(-mu), zero exactly when the branch meets the reference plane.
fn theta(mu: Complex64) -> f64 {
    (-mu).arg()
}

fn crossing_branch_angle(s: &DVector<f64>) -> f64 {
    let b = branches(s);
    let best = b
        .iter()
        .min_by(|p, q| (**p + 1.0).norm().total_cmp(&(**q + 1.0).norm()))
        .copied()
        .expect("at least one branch");
    theta(best)
}

/// Vector of the intersection with span(e3, e4) (or e2), in transformed coordinates.
fn kernel_vector(s: &DVector<f64>) -> DVector<f64> {
    if s.len() == 2 {
        return DVector::from_vec(vec![0.0, 1.0]);
    }
    let w = wedge(s);
    let c3 = w.wedge_vector(&Vector4::new(0.0, 0.0, 1.0, 0.0));
    let c4 = w.wedge_vector(&Vector4::new(0.0, 0.0, 0.0, 1.0));
    let m = nalgebra::Matrix4x2::from_columns(&[c3, c4]);
    let k = kernel_basis(&DMatrix::from_column_slice(4, 2, m.as_slice()), 1);
    DVector::from_vec(vec![0.0, 0.0, k[(0, 0)], k[(1, 0)]])
}

fn check_direction(cs: &CrossingSign, direction: f64, x0: f64) -> Result<()> {
    let expected = (CROSSING_DIRECTION * direction).signum();
    if cs.bilinear.signum() != expected {
        return Err(MaslovError::Solver(format!(
            "crossing at x = {x0:.6}: angle direction disagrees with the crossing form"
        )));
    }
    Ok(())
}

/// Largest eigenangle motion allowed in one detection substep.
const MAX_SUBSTEP_ROTATION: f64 = 0.25 * PI;
const MIN_SUBSTEP_FRACTION: f64 = 1.0 / 1024.0;

fn max_rotation(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| wrap(q.arg() - p.arg()).abs())
        .fold(0.0, f64::max)
}

/// A detected sign change of arg(-mu) on [x, x + h] starting from y.
struct Hit {
    x: f64,
    y: DVector<f64>,
    h: f64,
    branch: usize,
    dtheta: f64,
}

/// Scans [x, x + h], halving it until every branch moves by less than
/// MAX_SUBSTEP_ROTATION so that no crossing is stepped over. Substeps where
/// both branches cross are also halved, so only crossings closer than h_min
/// count as a vertex.
#[allow(clippy::too_many_arguments)]
fn scan_step(
    gen: &Generator<'_>,
    x: f64,
    y: &DVector<f64>,
    end: &DVector<f64>,
    h: f64,
    h_min: f64,
    prev: &[Complex64],
    hits: &mut Vec<Hit>,
) -> Vec<Complex64> {
    let cur = match_branches(prev, branches(end));
    let settled =
        max_rotation(prev, &cur) <= MAX_SUBSTEP_ROTATION && crossing_branches(prev, &cur) < 2;
    if settled || h <= h_min {
        push_hits(hits, x, y, h, prev, &cur);
        return cur;
    }
    let half = 0.5 * h;
    let mid = gen.step(x, y, half);
    let mid_br = scan_step(gen, x, y, &mid, half, h_min, prev, hits);
    let end_mid = gen.step(x + half, &mid, half);
    scan_step(gen, x + half, &mid, &end_mid, half, h_min, &mid_br, hits)
}

fn crosses(p: Complex64, q: Complex64) -> bool {
    let (t0, t1) = (theta(p), theta(q));
    (t0 < 0.0) != (t1 < 0.0) && (t1 - t0).abs() < PI
}

fn crossing_branches(prev: &[Complex64], cur: &[Complex64]) -> usize {
    prev.iter()
        .zip(cur)
        .filter(|(p, q)| crosses(**p, **q))
        .count()
}

fn push_hits(
    hits: &mut Vec<Hit>,
    x: f64,
    y: &DVector<f64>,
    h: f64,
    prev: &[Complex64],
    cur: &[Complex64],
) {
    for r in 0..cur.len() {
        if crosses(prev[r], cur[r]) {
            hits.push(Hit {
                x,
                y: y.clone(),
                h,
                branch: r,
                dtheta: theta(cur[r]) - theta(prev[r]),
            });
        }
    }
}

/// Maslov index as the signed count of intersections with the stable plane at infinity.
pub fn maslov_index_intersection(
    problem: &Problem,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<IntersectionIndex> {
    let (inf, traj) = solve(problem, lambda, opts, Coordinates::Transformed)?;
    let gen = Generator::new(problem, &inf, Coordinates::Transformed);
    let dx = traj.grid.dx;
    let mut prev = branches(&traj.states[0]);
    let mut events = Vec::new();
    for k in 0..traj.grid.steps {
        let mut hits = Vec::new();
        let x = traj.x(k);
        let h_min = dx * MIN_SUBSTEP_FRACTION;
        let walked = scan_step(
            &gen,
            x,
            &traj.states[k],
            &traj.states[k + 1],
            dx,
            h_min,
            &prev,
            &mut hits,
        );
        // re-anchor the labels on the grid state
        let cur = match_branches(&walked, branches(&traj.states[k + 1]));
        for pair in hits.windows(2) {
            if (pair[1].x - pair[0].x).abs() < 1e-15 && pair[0].branch != pair[1].branch {
                return Err(MaslovError::Geometry(format!(
                    "vertex crossing near x = {:.6} (both eigenangles cross in one step)",
                    pair[0].x
                )));
            }
        }
        for hit in hits {
            let Hit {
                x: x0,
                y,
                h,
                branch,
                dtheta,
            } = hit;
            let (mut lo, mut hi) = (0.0, h);
            let s0 = crossing_branch_angle(&y) < 0.0;
            while hi - lo > (dx / 16.0).min(0.5 * h) {
                let mid = 0.5 * (lo + hi);
                if (crossing_branch_angle(&gen.step(x0, &y, mid)) < 0.0) == s0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            let ut = gen.step(x0, &y, t);
            let xi = &inf.k * kernel_vector(&ut);
            let cs = crossing_sign(problem, lambda, x0 + t, &xi)?;
            check_direction(&cs, dtheta, x0 + t)?;
            events.push(CrossingEvent {
                x0: x0 + t,
                branch,
                sign: cs.sign,
                form: cs.form,
            });
        }
        prev = cur;
    }
    let index = events.iter().map(|e| e.sign).sum();
    let evans = traj.last()[0];
    Ok(IntersectionIndex {
        index,
        evans,
        events,
        drift: constraint_drift(&traj),
    })
}

/// Angle-based intersection count for n = 1 problems in original coordinates.
pub fn maslov_index_2d(
    problem: &Problem,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<IntersectionIndex> {
    if problem.n() != 1 {
        return Err(MaslovError::Precondition(format!(
            "{} is not a 2x2 problem",
            problem.name()
        )));
    }
    let (inf, traj) = solve(problem, lambda, opts, Coordinates::Original)?;
    let ks = branches(&inf.zeta_minus)[0].arg();
    let psi: Vec<f64> = traj
        .states
        .iter()
        .map(|s| wrap(branches(s)[0].arg() - ks))
        .collect();
    let mut events = Vec::new();
    for k in 0..traj.grid.steps {
        let (a, b) = (psi[k], psi[k + 1]);
        if (a < 0.0) != (b < 0.0) && (b - a).abs() < PI {
            let x0 = traj.x(k) + traj.grid.dx * a / (a - b);
            let cs = crossing_sign(problem, lambda, x0, &inf.zeta_minus)?;
            check_direction(&cs, b - a, x0)?;
            events.push(CrossingEvent {
                x0,
                branch: 0,
                sign: cs.sign,
                form: cs.form,
            });
        }
    }
    let index = events.iter().map(|e| e.sign).sum();
    let evans = evans_from_trajectory(&inf, &traj).d;
    Ok(IntersectionIndex {
        index,
        evans,
        events,
        drift: DriftReport::default(),
    })
}

/// Offsets used to approach lambda = 0 from above.
pub const HOMOCLINIC_OFFSETS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Limit of the Maslov index as lambda -> 0+.
pub fn maslov_homoclinic(problem: &Problem, opts: &SolverOptions) -> Result<i64> {
    let mut found: Option<i64> = None;
    for eps in HOMOCLINIC_OFFSETS {
        let idx = maslov_index_angle(problem, eps, opts)?.index;
        match found {
            Some(prev) if prev != idx => {
                return Err(MaslovError::Disagreement(format!(
                    "index not stable as lambda -> 0+ ({prev} vs {idx} at {eps})"
                )))
            }
            _ => found = Some(idx),
        }
    }
    Ok(found.expect("offsets are nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_of_reference_planes() {
        // X-plane: det(X - iY) = 1
        let e1 = Wedge2::basis(0);
        assert!((maslov_angle(&e1).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // Y-plane: det(-iI) / det(iI) = 1
        let e6 = Wedge2::basis(5);
        assert!((maslov_angle(&e6).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(maslov_angle(&Wedge2::omega()).is_err());
    }

    #[test]
    fn pair_multiplies_to_angle() {
        // graph of a symmetric matrix S: frame [I; S]
        let (a, b, c) = (0.3, -1.2, 0.7);
        let u = Wedge2::new([1.0, b, c, -a, -b, a * c - b * b]);
        assert!(u.is_lagrangian());
        let [m1, m2] = kappa_pair(&u).unwrap();
        assert!((m1 * m2 - maslov_angle(&u).unwrap()).norm() < 1e-12);
    }
}
