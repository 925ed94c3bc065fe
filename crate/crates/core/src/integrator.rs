//! Fixed-step RK4 for the scaled lifted system U' = (M(x) - sigma_plus) U.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector};

use crate::asymptotics::{hamiltonian_generator, induced_generator, infinity_data, InfinityData};
use crate::error::{MaslovError, Result};
use crate::exterior::{compound_matrix_2, Wedge2};
use crate::problems::Problem;

pub const DEFAULT_DX: f64 = 0.01;
pub const SETTLE_TOL: f64 = 1e-12;
pub const MIN_HALF_LENGTH: f64 = 10.0;
pub const MAX_HALF_LENGTH: f64 = 50.0;

/// One classical RK4 step.
pub fn rk4_step<V, F>(f: F, x: f64, y: &V, h: f64) -> V
where
    V: Clone + Add<Output = V> + Mul<f64, Output = V>,
    F: Fn(f64, &V) -> V,
{
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &(y.clone() + k1.clone() * (0.5 * h)));
    let k3 = f(x + 0.5 * h, &(y.clone() + k2.clone() * (0.5 * h)));
    let k4 = f(x + h, &(y.clone() + k3.clone() * h));
    y.clone() + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// User-facing integration controls; `half_length: None` selects L automatically.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub half_length: Option<f64>,
    pub dx: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            half_length: None,
            dx: DEFAULT_DX,
        }
    }
}

impl SolverOptions {
    pub fn with_dx(dx: f64) -> Self {
        SolverOptions {
            half_length: None,
            dx,
        }
    }
}

/// Uniform grid on [-L, L].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub half_length: f64,
    pub dx: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(half_length: f64, dx: f64) -> Result<Self> {
        if !(half_length > 0.0 && dx > 0.0 && half_length.is_finite()) {
            return Err(MaslovError::Precondition(format!(
                "need L > 0 and dx > 0 (L = {half_length}, dx = {dx})"
            )));
        }
        let ratio = 2.0 * half_length / dx;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(MaslovError::Precondition(format!(
                "2L/dx = {ratio} is not an integer"
            )));
        }
        Ok(Grid {
            half_length,
            dx,
            steps: steps as usize,
        })
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_length + k as f64 * self.dx
    }
}

/// L from the settling rule, clamped to [10, 50] and rounded up to a multiple of dx.
pub fn default_half_length(problem: &Problem, lambda: f64, dx: f64) -> f64 {
    let l = problem
        .settle_length(lambda, SETTLE_TOL, MAX_HALF_LENGTH)
        .clamp(MIN_HALF_LENGTH, MAX_HALF_LENGTH);
    (l / dx).ceil() * dx
}

pub fn resolve_grid(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<Grid> {
    let l = match opts.half_length {
        Some(l) => l,
        None => default_half_length(problem, lambda, opts.dx),
    };
    Grid::new(l, opts.dx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    Original,
    /// Coordinates adapted to the splitting at infinity, U = K^(2) U~.
    Transformed,
}

/// x -> generator of the scaled lifted system.
pub struct Generator<'a> {
    problem: &'a Problem,
    lambda: f64,
    sigma: f64,
    frame: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl<'a> Generator<'a> {
    pub fn new(problem: &'a Problem, inf: &InfinityData, coords: Coordinates) -> Self {
        let frame = match coords {
            Coordinates::Original => None,
            Coordinates::Transformed => Some((inf.k.clone(), inf.k_inv.clone())),
        };
        Generator {
            problem,
            lambda: inf.lambda,
            sigma: inf.sigma_plus,
            frame,
        }
    }

    pub fn at(&self, x: f64) -> DMatrix<f64> {
        let mut a = hamiltonian_generator(&self.problem.b(x, self.lambda));
        if let Some((k, k_inv)) = &self.frame {
            a = k_inv * a * k;
        }
        let mut m = induced_generator(&a);
        for i in 0..m.nrows() {
            m[(i, i)] -= self.sigma;
        }
        m
    }

    /// A single RK4 step of length h from (x, y).
    pub fn step(&self, x: f64, y: &DVector<f64>, h: f64) -> DVector<f64> {
        linear_rk4(&self.at(x), &self.at(x + 0.5 * h), &self.at(x + h), y, h)
    }
}

fn linear_rk4(
    m0: &DMatrix<f64>,
    mh: &DMatrix<f64>,
    m1: &DMatrix<f64>,
    y: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let k1 = m0 * y;
    let k2 = mh * (y + &k1 * (0.5 * h));
    let k3 = mh * (y + &k2 * (0.5 * h));
    let k4 = m1 * (y + &k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Sampled solution of the lifted system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub coordinates: Coordinates,
    pub states: Vec<DVector<f64>>,
    pub sigma_plus: f64,
}

impl Trajectory {
    pub fn x(&self, k: usize) -> f64 {
        self.grid.x(k)
    }

    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Runs the scaled system across the grid from the unstable data at -L.
///
/// Original coordinates start at zeta_plus; transformed ones at E1 (or e1).
pub fn integrate(
    problem: &Problem,
    inf: &InfinityData,
    grid: Grid,
    coords: Coordinates,
) -> Result<Trajectory> {
    let dx = grid.dx;
    if dx * inf.sigma_plus.abs() >= 1.0 {
        return Err(MaslovError::Precondition(format!(
            "dx * sigma_plus = {} must be below 1",
            dx * inf.sigma_plus.abs()
        )));
    }
    let dim = inf.zeta_plus.len();
    let y0 = match coords {
        Coordinates::Original => inf.zeta_plus.clone(),
        Coordinates::Transformed => {
            let mut e = DVector::zeros(dim);
            e[0] = 1.0;
            e
        }
    };
    let gen = Generator::new(problem, inf, coords);
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(y0);
    let mut m0 = gen.at(grid.x(0));
    for k in 0..grid.steps {
        let x = grid.x(k);
        let mh = gen.at(x + 0.5 * dx);
        let m1 = gen.at(x + dx);
        let next = linear_rk4(&m0, &mh, &m1, &states[k], dx);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(MaslovError::Solver(format!(
                "non-finite state at x = {}",
                x + dx
            )));
        }
        states.push(next);
        m0 = m1;
    }
    Ok(Trajectory {
        grid,
        coordinates: coords,
        states,
        sigma_plus: inf.sigma_plus,
    })
}

/// Convenience wrapper resolving infinity data and the grid.
pub fn solve(
    problem: &Problem,
    lambda: f64,
    opts: &SolverOptions,
    coords: Coordinates,
) -> Result<(InfinityData, Trajectory)> {
    let inf = infinity_data(problem, lambda)?;
    let grid = resolve_grid(problem, lambda, opts)?;
    let traj = integrate(problem, &inf, grid, coords)?;
    Ok((inf, traj))
}

/// Maps a transformed state back to original coordinates.
pub fn to_original(inf: &InfinityData, y: &DVector<f64>) -> DVector<f64> {
    match &inf.k_minors {
        Some(m) => {
            let v = nalgebra::Vector6::from_iterator(y.iter().copied());
            DVector::from_iterator(6, (m * v).iter().copied())
        }
        None => &inf.k * y,
    }
}

/// Compound matrix of K as a dynamic matrix (identity action for n = 1 is K itself).
pub fn frame_action(inf: &InfinityData) -> DMatrix<f64> {
    match inf.n {
        2 => {
            let k = nalgebra::Matrix4::from_iterator(inf.k.iter().copied());
            DMatrix::from_iterator(6, 6, compound_matrix_2(&k).iter().copied())
        }
        _ => inf.k.clone(),
    }
}

/// Pointwise invariant drift along a trajectory (n = 2 only; zero for n = 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct DriftReport {
    pub max_i1: f64,
    pub max_i2: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.max_i1.max(self.max_i2)
    }
}

pub fn constraint_drift(traj: &Trajectory) -> DriftReport {
    if traj.states[0].len() != 6 {
        return DriftReport::default();
    }
    let mut r = DriftReport::default();
    for s in &traj.states {
        let w = Wedge2::new([s[0], s[1], s[2], s[3], s[4], s[5]]);
        r.max_i1 = r.max_i1.max(w.i1().abs());
        r.max_i2 = r.max_i2.max(w.i2().abs());
    }
    r
}

/// Checks the decay envelope |I(x)| <= |I(-L)| e^{-rate (x+L)} + slack along a trajectory.
pub fn attractivity_violation(traj: &Trajectory, slack: f64) -> Option<(f64, f64, f64)> {
    let s0 = &traj.states[0];
    let w0 = Wedge2::new([s0[0], s0[1], s0[2], s0[3], s0[4], s0[5]]);
    let (i10, i20) = (w0.i1().abs(), w0.i2().abs());
    let sigma = traj.sigma_plus;
    for (k, s) in traj.states.iter().enumerate() {
        let w = Wedge2::new([s[0], s[1], s[2], s[3], s[4], s[5]]);
        let t = traj.x(k) + traj.grid.half_length;
        let tol = slack * (1.0 + s.norm_squared());
        let env1 = 2.0 * i10 * (-2.0 * sigma * t).exp() + tol;
        let env2 = 2.0 * i20 * (-sigma * t).exp() + tol;
        if w.i1().abs() > env1 || w.i2().abs() > env2 {
            return Some((traj.x(k), w.i1(), w.i2()));
        }
    }
    None
}

/// Integrates from an arbitrary lifted initial state in original coordinates.
pub fn integrate_from(
    problem: &Problem,
    inf: &InfinityData,
    grid: Grid,
    y0: DVector<f64>,
) -> Result<Trajectory> {
    let gen = Generator::new(problem, inf, Coordinates::Original);
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(y0);
    for k in 0..grid.steps {
        let next = gen.step(grid.x(k), &states[k], grid.dx);
        states.push(next);
    }
    Ok(Trajectory {
        grid,
        coordinates: Coordinates::Original,
        states,
        sigma_plus: inf.sigma_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_divisibility() {
        assert!(Grid::new(10.0, 0.01).is_ok());
        assert!(Grid::new(10.0, 0.03).is_err());
    }

    #[test]
    fn rk4_exponential() {
        let y = rk4_step(|_, v: &f64| *v, 0.0, &1.0, 0.1);
        assert!((y - 0.1f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn default_length_in_range() {
        let l = default_half_length(&Problem::ScalarRd, 0.5, 0.01);
        assert!((MIN_HALF_LENGTH..=MAX_HALF_LENGTH).contains(&l));
    }
}
