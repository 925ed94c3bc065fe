//! Built-in spectral problems J u' = B(x, lambda) u.
//!
//! Every B here is written so that A = J^{-1} B reproduces the underlying
//! linear ODE with J = [[0, -I], [I, 0]].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{MaslovError, Result};
use crate::kdv5::{WaveParams, WaveProfile};

pub type Params = BTreeMap<String, f64>;

pub const PROBLEM_NAMES: [&str; 7] = [
    "scalar_rd",
    "coupled_rd",
    "kdv5",
    "lwsw4",
    "lwsw_nonmonotone",
    "lwsw2",
    "sech2_oracle",
];

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Sign convention of the crossing form attached to a problem.
///
/// `Standard` counts sign <B xi, xi>; `Reversed` counts its negative. The
/// reversed problems are the ones whose reference index tables carry the
/// opposite orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Standard,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
}

/// Reference Maslov data for a problem.
#[derive(Debug, Clone, PartialEq)]
pub enum MaslovTable {
    /// (lo, hi, index) on intervals bounded by closed-form eigenvalues.
    Exact(Vec<(f64, f64, i64)>),
    /// Index on consecutive intervals between Evans roots, increasing lambda.
    Sequence(Vec<i64>),
}

impl MaslovTable {
    pub fn index_at(&self, lambda: f64) -> Option<i64> {
        match self {
            MaslovTable::Exact(rows) => rows
                .iter()
                .find(|(lo, hi, _)| lambda > *lo && lambda < *hi)
                .map(|r| r.2),
            MaslovTable::Sequence(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalyticData {
    pub eigenvalues: Option<Vec<f64>>,
    pub maslov_table: Option<MaslovTable>,
    /// Sign of D on consecutive root intervals (only where tabulated).
    pub evans_signs: Option<Vec<i8>>,
    pub maslov_homoclinic: Option<i64>,
    pub has_closed_form_evans: bool,
}

/// Closed-form Evans data for the n = 1 problems.
///
/// The closed-form solutions behave like u+ ~ e^{s x} plus_amplitude as
/// x -> -inf and u- ~ e^{-s x} minus_amplitude as x -> +inf, and
/// value = pairing * (u- ^ u+).
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormEvans {
    pub value: f64,
    pub plus_amplitude: [f64; 2],
    pub minus_amplitude: [f64; 2],
    pub pairing: f64,
}

#[derive(Debug, Clone)]
pub enum Problem {
    ScalarRd,
    CoupledRd { c: f64 },
    Kdv5 { profile: Arc<WaveProfile> },
    Lwsw4 { c: f64, nu: f64 },
    LwswNonmonotone { c: f64, nu: f64 },
    Lwsw2 { nu: f64 },
    Sech2Oracle,
}

fn require(params: &Params, key: &str, problem: &str) -> Result<f64> {
    let alias = if key == "nu" { Some("ν") } else { None };
    params
        .get(key)
        .or_else(|| alias.and_then(|a| params.get(a)))
        .copied()
        .ok_or_else(|| {
            MaslovError::InvalidParameter(format!("{problem} requires parameter '{key}'"))
        })
}

fn reject_unknown(params: &Params, allowed: &[&str], problem: &str) -> Result<()> {
    for k in params.keys() {
        let k = if k == "ν" { "nu" } else { k.as_str() };
        if !allowed.contains(&k) {
            return Err(MaslovError::InvalidParameter(format!(
                "{problem} does not take parameter '{k}'"
            )));
        }
    }
    Ok(())
}

fn lwsw_params(params: &Params, name: &str) -> Result<(f64, f64)> {
    reject_unknown(params, &["c", "nu"], name)?;
    let c = require(params, "c", name)?;
    let nu = require(params, "nu", name)?;
    if !(nu > 0.0 && c > 4.0 * nu) {
        return Err(MaslovError::InvalidParameter(format!(
            "existence condition violated: need c > 4 nu > 0 (c = {c}, nu = {nu})"
        )));
    }
    Ok((c, nu))
}

/// Parses "k=v" with v a float or a fraction such as 13/6.
pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| MaslovError::InvalidParameter(format!("expected key=value, got '{s}'")))?;
    Ok((k.trim().to_string(), parse_number(v.trim())?))
}

pub fn parse_number(v: &str) -> Result<f64> {
    let bad = || MaslovError::InvalidParameter(format!("not a number: '{v}'"));
    match v.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => v.parse().map_err(|_| bad()),
    }
}

/// Builds a catalog problem by name.
///
/// For kdv5 the profile is the explicit soliton when (P, c, q) = (13/6, 1, 1)
/// and a shot profile otherwise.
pub fn get_problem(name: &str, params: &Params) -> Result<Problem> {
    match name {
        "scalar_rd" => {
            reject_unknown(params, &[], name)?;
            Ok(Problem::ScalarRd)
        }
        "sech2_oracle" => {
            reject_unknown(params, &[], name)?;
            Ok(Problem::Sech2Oracle)
        }
        "coupled_rd" => {
            reject_unknown(params, &["c"], name)?;
            let c = require(params, "c", name)?;
            if c <= -2.0 {
                return Err(MaslovError::InvalidParameter(format!(
                    "coupled_rd needs c > -2 (got {c})"
                )));
            }
            Ok(Problem::CoupledRd { c })
        }
        "lwsw4" => {
            let (c, nu) = lwsw_params(params, name)?;
            Ok(Problem::Lwsw4 { c, nu })
        }
        "lwsw_nonmonotone" => {
            let (c, nu) = lwsw_params(params, name)?;
            Ok(Problem::LwswNonmonotone { c, nu })
        }
        "lwsw2" => {
            reject_unknown(params, &["c", "nu"], name)?;
            let nu = require(params, "nu", name)?;
            if let Some(&c) = params.get("c") {
                if c <= 4.0 * nu {
                    return Err(MaslovError::InvalidParameter(format!(
                        "existence condition violated: need c > 4 nu (c = {c}, nu = {nu})"
                    )));
                }
            }
            if nu <= 0.0 {
                return Err(MaslovError::InvalidParameter("lwsw2 needs nu > 0".into()));
            }
            Ok(Problem::Lwsw2 { nu })
        }
        "kdv5" => {
            reject_unknown(params, &["P", "c", "q"], name)?;
            let wp = WaveParams::new(
                require(params, "P", name)?,
                require(params, "c", name)?,
                require(params, "q", name)?,
            )?;
            let profile = if wp.is_explicit() {
                WaveProfile::explicit()
            } else {
                crate::kdv5::shoot_symmetric(&wp, &Default::default())?
            };
            Ok(Problem::kdv5(profile))
        }
        other => Err(MaslovError::UnknownProblem(other.to_string())),
    }
}

impl Problem {
    pub fn kdv5(profile: WaveProfile) -> Self {
        Problem::Kdv5 {
            profile: Arc::new(profile),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::ScalarRd => "scalar_rd",
            Problem::CoupledRd { .. } => "coupled_rd",
            Problem::Kdv5 { .. } => "kdv5",
            Problem::Lwsw4 { .. } => "lwsw4",
            Problem::LwswNonmonotone { .. } => "lwsw_nonmonotone",
            Problem::Lwsw2 { .. } => "lwsw2",
            Problem::Sech2Oracle => "sech2_oracle",
        }
    }

    /// Half the phase-space dimension.
    pub fn n(&self) -> usize {
        match self {
            Problem::ScalarRd | Problem::Lwsw2 { .. } | Problem::Sech2Oracle => 1,
            _ => 2,
        }
    }

    pub fn params(&self) -> Params {
        let mut p = Params::new();
        match self {
            Problem::CoupledRd { c } => {
                p.insert("c".into(), *c);
            }
            Problem::Kdv5 { profile } => {
                let w = profile.params();
                p.insert("P".into(), w.p);
                p.insert("c".into(), w.c);
                p.insert("q".into(), w.q as f64);
            }
            Problem::Lwsw4 { c, nu } | Problem::LwswNonmonotone { c, nu } => {
                p.insert("c".into(), *c);
                p.insert("nu".into(), *nu);
            }
            Problem::Lwsw2 { nu } => {
                p.insert("nu".into(), *nu);
            }
            Problem::ScalarRd | Problem::Sech2Oracle => {}
        }
        p
    }

    fn lwsw_wave(c: f64, nu: f64, x: f64) -> (f64, f64) {
        let amp = (2.0 * nu * (c - 4.0 * nu)).sqrt();
        let s = sech(nu.sqrt() * x);
        (amp * s, 2.0 * nu * s * s)
    }

    /// Amplitude of the LW-SW short-wave envelope.
    pub fn lwsw_amplitude(&self) -> Option<f64> {
        match self {
            Problem::Lwsw4 { c, nu } | Problem::LwswNonmonotone { c, nu } => {
                Some((2.0 * nu * (c - 4.0 * nu)).sqrt())
            }
            _ => None,
        }
    }

    /// B(x, lambda), symmetric of size 2n.
    pub fn b(&self, x: f64, lambda: f64) -> DMatrix<f64> {
        self.b_impl(Some(x), lambda)
    }

    /// Limit of B as |x| -> infinity.
    pub fn b_inf(&self, lambda: f64) -> DMatrix<f64> {
        self.b_impl(None, lambda)
    }

    fn b_impl(&self, x: Option<f64>, lambda: f64) -> DMatrix<f64> {
        let at = |f: &dyn Fn(f64) -> f64| x.map_or(0.0, f);
        match self {
            Problem::ScalarRd => {
                let v = at(&|x| 3.0 * sech(0.5 * x).powi(2));
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-(lambda + 1.0 - v), 1.0]))
            }
            Problem::Sech2Oracle => {
                let v = at(&|x| 12.0 * sech(x).powi(2));
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-(lambda - v), 1.0]))
            }
            Problem::Lwsw2 { nu } => {
                let w = at(&|x| 2.0 * nu * sech(nu.sqrt() * x).powi(2));
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    lambda - 2.0 * nu + 2.0 * w,
                    0.5,
                ]))
            }
            Problem::CoupledRd { c } => {
                let f = lambda + 4.0 + c - at(&|x| 12.0 * sech(x).powi(2));
                #[rustfmt::skip]
                let b = DMatrix::from_row_slice(4, 4, &[
                    -f, *c, 0.0, 0.0,
                    *c, -f, 0.0, 0.0,
                    0.0, 0.0, 1.0, 0.0,
                    0.0, 0.0, 0.0, 1.0,
                ]);
                b
            }
            Problem::Kdv5 { profile } => {
                let w = profile.params();
                let a = w.c - x.map_or(0.0, |x| profile.potential(x));
                #[rustfmt::skip]
                let b = DMatrix::from_row_slice(4, 4, &[
                    a - lambda, 0.0, 0.0, 0.0,
                    0.0, -1.0, 0.0, 0.0,
                    0.0, 0.0, 0.0, 1.0,
                    0.0, 0.0, 1.0, w.p,
                ]);
                b
            }
            Problem::Lwsw4 { c, nu } | Problem::LwswNonmonotone { c, nu } => {
                let (u, w) = x.map_or((0.0, 0.0), |x| Self::lwsw_wave(*c, *nu, x));
                let b22 = match self {
                    Problem::Lwsw4 { .. } => lambda - c + 6.0 * w,
                    _ => -lambda - c + 6.0 * w,
                };
                #[rustfmt::skip]
                let b = DMatrix::from_row_slice(4, 4, &[
                    lambda - 2.0 * nu + 2.0 * w, 2.0 * u, 0.0, 0.0,
                    2.0 * u, b22, 0.0, 0.0,
                    0.0, 0.0, 0.5, 0.0,
                    0.0, 0.0, 0.0, 1.0,
                ]);
                b
            }
        }
    }

    /// dB/dlambda (independent of x for every catalog entry).
    pub fn d_lambda_b(&self) -> DMatrix<f64> {
        let d: &[f64] = match self {
            Problem::ScalarRd | Problem::Sech2Oracle => &[-1.0, 0.0],
            Problem::Lwsw2 { .. } => &[1.0, 0.0],
            Problem::CoupledRd { .. } => &[-1.0, -1.0, 0.0, 0.0],
            Problem::Kdv5 { .. } => &[-1.0, 0.0, 0.0, 0.0],
            Problem::Lwsw4 { .. } => &[1.0, 1.0, 0.0, 0.0],
            Problem::LwswNonmonotone { .. } => &[1.0, -1.0, 0.0, 0.0],
        };
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(d))
    }

    pub fn d_lambda_b_definiteness(&self) -> Definiteness {
        let ev = SymmetricEigen::new(self.d_lambda_b()).eigenvalues;
        let pos = ev.iter().any(|&e| e > 1e-12);
        let neg = ev.iter().any(|&e| e < -1e-12);
        match (pos, neg) {
            (true, true) => Definiteness::Indefinite,
            (false, true) => Definiteness::NegativeSemidefinite,
            _ => Definiteness::PositiveSemidefinite,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            Problem::Kdv5 { .. } | Problem::Lwsw4 { .. } | Problem::LwswNonmonotone { .. } => {
                Orientation::Reversed
            }
            _ => Orientation::Standard,
        }
    }

    /// Open interval of hyperbolic lambda.
    pub fn hyperbolic_domain(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match self {
            Problem::ScalarRd => (-1.0, inf),
            Problem::Sech2Oracle => (0.0, inf),
            Problem::Lwsw2 { nu } | Problem::Lwsw4 { nu, .. } => (-inf, 2.0 * nu),
            Problem::CoupledRd { c } => ((-4.0f64).max(-4.0 - 2.0 * c), inf),
            Problem::Kdv5 { profile } => (-inf, profile.params().lambda_edge()),
            Problem::LwswNonmonotone { c, nu } => (-c, 2.0 * nu),
        }
    }

    pub fn in_essential_spectrum(&self, lambda: f64) -> bool {
        let (lo, hi) = self.hyperbolic_domain();
        !(lambda > lo && lambda < hi)
    }

    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() {
            return Err(MaslovError::Precondition(format!(
                "lambda = {lambda} is not finite"
            )));
        }
        if self.in_essential_spectrum(lambda) {
            let (lo, hi) = self.hyperbolic_domain();
            return Err(MaslovError::EssentialSpectrum {
                lambda,
                detail: format!("{} is hyperbolic only on ({lo}, {hi})", self.name()),
            });
        }
        Ok(())
    }

    /// (gamma, F) with |B(x) - B_inf| <= F exp(-gamma |x|) in the Frobenius norm.
    pub fn decay(&self) -> (f64, f64) {
        match self {
            Problem::ScalarRd => (1.0, 12.0),
            Problem::Sech2Oracle => (2.0, 48.0),
            Problem::Lwsw2 { nu } => (2.0 * nu.sqrt(), 16.0 * nu),
            Problem::CoupledRd { .. } => (2.0, 48.0 * 2f64.sqrt()),
            Problem::Lwsw4 { c, nu } | Problem::LwswNonmonotone { c, nu } => {
                let amp = (2.0 * nu * (c - 4.0 * nu)).sqrt();
                (nu.sqrt(), 64.0 * nu + 4.0 * 2f64.sqrt() * amp)
            }
            Problem::Kdv5 { profile } => profile.potential_decay(),
        }
    }

    /// Smallest x >= 0 with |B(+-y) - B_inf| < tol for all y >= x, scanned on a 0.5 grid.
    pub fn settle_length(&self, lambda: f64, tol: f64, x_max: f64) -> f64 {
        let binf = self.b_inf(lambda);
        let mut x = x_max;
        while x > 0.0 {
            let dev = (self.b(x, lambda) - &binf)
                .norm()
                .max((self.b(-x, lambda) - &binf).norm());
            if dev >= tol {
                return x + 0.5;
            }
            x -= 0.5;
        }
        0.0
    }

    pub fn analytic(&self) -> AnalyticData {
        let inf = f64::INFINITY;
        match self {
            Problem::ScalarRd => AnalyticData {
                eigenvalues: Some(vec![-0.75, 0.0, 1.25]),
                maslov_table: Some(MaslovTable::Exact(vec![
                    (-1.0, -0.75, 3),
                    (-0.75, 0.0, 2),
                    (0.0, 1.25, 1),
                    (1.25, inf, 0),
                ])),
                has_closed_form_evans: true,
                ..Default::default()
            },
            Problem::Sech2Oracle => AnalyticData {
                eigenvalues: Some(vec![1.0, 4.0, 9.0]),
                maslov_table: Some(MaslovTable::Exact(vec![
                    (0.0, 1.0, 3),
                    (1.0, 4.0, 2),
                    (4.0, 9.0, 1),
                    (9.0, inf, 0),
                ])),
                has_closed_form_evans: true,
                ..Default::default()
            },
            Problem::Lwsw2 { nu } => AnalyticData {
                eigenvalues: Some(vec![0.0]),
                maslov_table: Some(MaslovTable::Exact(vec![(-inf, 0.0, 1), (0.0, 2.0 * nu, 0)])),
                has_closed_form_evans: true,
                ..Default::default()
            },
            Problem::CoupledRd { c } => {
                let (lo, _) = self.hyperbolic_domain();
                let all = [-3.0 - 2.0 * c, -3.0, -2.0 * c, 0.0, 5.0 - 2.0 * c, 5.0];
                let mut inside: Vec<f64> = all.iter().copied().filter(|&e| e > lo).collect();
                inside.sort_by(f64::total_cmp);
                let mut cuts = inside.clone();
                cuts.dedup();
                let count = |l: f64| all.iter().filter(|&&e| e > l).count() as i64;
                let mut rows = Vec::new();
                let mut left = lo;
                for &e in cuts.iter().chain(std::iter::once(&inf)) {
                    let mid = if e.is_finite() {
                        0.5 * (left + e)
                    } else {
                        left + 1.0
                    };
                    rows.push((left, e, count(mid)));
                    left = e;
                }
                let homoclinic = if *c < -1.5 {
                    4
                } else if *c < 0.0 {
                    3
                } else if *c < 2.5 {
                    2
                } else {
                    1
                };
                AnalyticData {
                    eigenvalues: Some(inside),
                    maslov_table: Some(MaslovTable::Exact(rows)),
                    maslov_homoclinic: Some(homoclinic),
                    ..Default::default()
                }
            }
            Problem::Kdv5 { profile } => {
                let explicit = profile.is_explicit();
                AnalyticData {
                    eigenvalues: None,
                    maslov_table: explicit.then(|| MaslovTable::Sequence(vec![0, 1, 2, 3])),
                    maslov_homoclinic: Some(2),
                    ..Default::default()
                }
            }
            Problem::Lwsw4 { c, nu } => {
                let tabulated = close(*c, 1.0) && close(*nu, 0.2);
                AnalyticData {
                    maslov_table: tabulated.then(|| MaslovTable::Sequence(vec![0, -1, -2, -3])),
                    ..Default::default()
                }
            }
            Problem::LwswNonmonotone { c, nu } => {
                let tabulated = close(*c, 1.0) && close(*nu, 0.21);
                AnalyticData {
                    maslov_table: tabulated
                        .then(|| MaslovTable::Sequence(vec![-4, -3, -2, -1, -2, -3])),
                    evans_signs: tabulated.then(|| vec![1, -1, 1, -1, 1, -1]),
                    ..Default::default()
                }
            }
        }
    }

    /// Closed-form Evans data, where available.
    pub fn closed_form_evans(&self, lambda: f64) -> Option<ClosedFormEvans> {
        match self {
            Problem::ScalarRd => {
                let g = 2.0 * (lambda + 1.0).sqrt();
                let s = 0.5 * g;
                let h = (g + 1.0) * (g + 2.0) * (g + 3.0) / 15.0;
                Some(ClosedFormEvans {
                    value: -2.0
                        * (lambda + 1.0).sqrt()
                        * (2.0f64 / 15.0).powi(2)
                        * lambda
                        * (4.0 * lambda + 3.0)
                        * (4.0 * lambda - 5.0),
                    plus_amplitude: [-h, -h * s],
                    minus_amplitude: [h, -h * s],
                    pairing: 1.0,
                })
            }
            Problem::Sech2Oracle => {
                let r = lambda.sqrt();
                let h = (r + 1.0) * (r + 2.0) * (r + 3.0) / 15.0;
                Some(ClosedFormEvans {
                    value: 2.0 / 225.0 * r * (lambda - 1.0) * (lambda - 4.0) * (lambda - 9.0),
                    plus_amplitude: [-h, -h * r],
                    minus_amplitude: [h, -h * r],
                    pairing: -1.0,
                })
            }
            Problem::Lwsw2 { nu } => {
                let mu = (1.0 - lambda / (2.0 * nu)).sqrt();
                let k = 2.0 * mu * nu.sqrt();
                Some(ClosedFormEvans {
                    value: -(lambda / nu.sqrt()) * mu,
                    plus_amplitude: [-(mu + 1.0), -(mu + 1.0) * k],
                    minus_amplitude: [mu + 1.0, -(mu + 1.0) * k],
                    pairing: -0.5,
                })
            }
            _ => None,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        let p = self.params();
        if !p.is_empty() {
            let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}
