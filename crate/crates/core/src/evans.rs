//! Evans function D(lambda) from the scaled lifted system, plus root finding.

use rayon::prelude::*;

use crate::asymptotics::{pairing, InfinityData};
use crate::error::{MaslovError, Result};
use crate::integrator::{solve, Coordinates, SolverOptions, Trajectory};
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvansMethod {
    /// zeta_minus ^ U(L) against zeta_minus ^ zeta_plus.
    Pairing,
    /// First coordinate of the transformed state at +L.
    Transformed,
}

#[derive(Debug, Clone, Copy)]
pub struct EvansSample {
    pub lambda: f64,
    pub d: f64,
    /// <U(L), zeta_plus>, the projection onto the unstable data.
    pub d_proportional: f64,
    /// |U(L) - d_proportional zeta_plus|
    pub residual: f64,
    pub method: EvansMethod,
}

pub fn evans_from_trajectory(inf: &InfinityData, traj: &Trajectory) -> EvansSample {
    let u = traj.last();
    let d = pairing(&inf.zeta_minus, u) / pairing(&inf.zeta_minus, &inf.zeta_plus);
    let d_proportional = u.dot(&inf.zeta_plus);
    let residual = (u - &inf.zeta_plus * d_proportional).norm();
    EvansSample {
        lambda: inf.lambda,
        d,
        d_proportional,
        residual,
        method: EvansMethod::Pairing,
    }
}

/// D(lambda) in original coordinates.
pub fn evans_at(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<EvansSample> {
    let (inf, traj) = solve(problem, lambda, opts, Coordinates::Original)?;
    Ok(evans_from_trajectory(&inf, &traj))
}

/// D(lambda) in coordinates adapted to the splitting at infinity.
pub fn evans_transformed(
    problem: &Problem,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<EvansSample> {
    let (_, traj) = solve(problem, lambda, opts, Coordinates::Transformed)?;
    let u = traj.last();
    let d = u[0];
    let residual = u.rows(1, u.len() - 1).norm();
    Ok(EvansSample {
        lambda,
        d,
        d_proportional: d,
        residual,
        method: EvansMethod::Transformed,
    })
}

/// Evaluates D on many lambdas in parallel; output order follows the input.
pub fn evans_scan(
    problem: &Problem,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Vec<Result<EvansSample>> {
    lambdas
        .par_iter()
        .map(|&l| evans_at(problem, l, opts))
        .collect()
}

/// Numerical and closed-form Evans values with the same normalization, for n = 1 oracles.
///
/// The numerical D is rescaled by the asymptotic amplitudes of the closed-form
/// solutions along zeta_plus and zeta_minus, so the two agree up to discretization.
pub fn closed_form_comparison(
    problem: &Problem,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<Option<(f64, f64)>> {
    let Some(cf) = problem.closed_form_evans(lambda) else {
        return Ok(None);
    };
    let (inf, traj) = solve(problem, lambda, opts, Coordinates::Original)?;
    let d = evans_from_trajectory(&inf, &traj).d;
    let alpha = cf.plus_amplitude[0] * inf.zeta_plus[0] + cf.plus_amplitude[1] * inf.zeta_plus[1];
    let beta =
        cf.minus_amplitude[0] * inf.zeta_minus[0] + cf.minus_amplitude[1] * inf.zeta_minus[1];
    let numeric = cf.pairing * alpha * beta * pairing(&inf.zeta_minus, &inf.zeta_plus) * d;
    Ok(Some((numeric, cf.value)))
}

#[derive(Debug, Clone, Default)]
pub struct RootReport {
    pub roots: Vec<f64>,
    /// Grid points where |D| has a small local minimum without a sign change.
    pub even_candidates: Vec<f64>,
}

/// Local minima of |D| below this fraction of max |D| are reported as tangential-zero candidates.
pub const EVEN_ROOT_FRACTION: f64 = 1e-8;

/// Roots of D on [lo, hi] by a sign-change scan over `grid` points and bisection.
pub fn evans_roots(
    problem: &Problem,
    lo: f64,
    hi: f64,
    grid: usize,
    opts: &SolverOptions,
) -> Result<RootReport> {
    if lo.is_nan() || hi.is_nan() || lo >= hi || grid < 2 {
        return Err(MaslovError::Precondition(
            "need lo < hi and at least two grid points".into(),
        ));
    }
    problem.check_lambda(lo)?;
    problem.check_lambda(hi)?;
    let lambdas: Vec<f64> = (0..grid)
        .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
        .collect();
    let ds: Vec<f64> = evans_scan(problem, &lambdas, opts)
        .into_iter()
        .map(|r| r.map(|s| s.d))
        .collect::<Result<_>>()?;

    let mut brackets = Vec::new();
    let mut exact = Vec::new();
    for i in 0..grid - 1 {
        if ds[i] == 0.0 {
            exact.push(lambdas[i]);
        } else if ds[i].signum() != ds[i + 1].signum() && ds[i + 1] != 0.0 {
            brackets.push((lambdas[i], lambdas[i + 1], ds[i]));
        }
    }
    if ds[grid - 1] == 0.0 {
        exact.push(lambdas[grid - 1]);
    }
    let refined: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b, da)| bisect(problem, a, b, da, opts))
        .collect::<Result<_>>()?;
    let mut roots: Vec<f64> = refined.into_iter().chain(exact).collect();
    roots.sort_by(f64::total_cmp);

    let scale = ds.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut even_candidates = Vec::new();
    for i in 1..grid - 1 {
        let (a, b, c) = (ds[i - 1].abs(), ds[i].abs(), ds[i + 1].abs());
        let same_sign =
            ds[i - 1].signum() == ds[i].signum() && ds[i].signum() == ds[i + 1].signum();
        if same_sign && b < a && b < c && b < EVEN_ROOT_FRACTION * scale {
            even_candidates.push(lambdas[i]);
        }
    }
    Ok(RootReport {
        roots,
        even_candidates,
    })
}

fn bisect(problem: &Problem, mut a: f64, mut b: f64, da: f64, opts: &SolverOptions) -> Result<f64> {
    let sa = da.signum();
    while b - a > 1e-12 * (1.0 + a.abs()) {
        let m = 0.5 * (a + b);
        let dm = evans_at(problem, m, opts)?.d;
        if dm == 0.0 {
            return Ok(m);
        }
        if dm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sign of D on each interval between consecutive roots, sampled at midpoints.
pub fn sign_pattern(
    problem: &Problem,
    lo: f64,
    hi: f64,
    roots: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<i8>> {
    let mut cuts = vec![lo];
    cuts.extend_from_slice(roots);
    cuts.push(hi);
    cuts.windows(2)
        .map(|w| evans_at(problem, 0.5 * (w[0] + w[1]), opts).map(|s| s.d.signum() as i8))
        .collect()
}
