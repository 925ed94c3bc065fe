//! Solitary waves of phi'''' - P phi'' + c phi - phi^(q+1) = 0.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::asymptotics::invariant_subspaces;
use crate::error::{MaslovError, Result};
use crate::integrator::rk4_step;

/// Peak amplitude of the explicit soliton.
pub const EXPLICIT_AMPLITUDE: f64 = 35.0 / 24.0;
pub const EXPLICIT_P: f64 = 13.0 / 6.0;

/// Parameters (P, c, q) of the steady equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub p: f64,
    pub c: f64,
    pub q: u32,
}

impl WaveParams {
    /// Checks c > 0, integer q >= 1 and hyperbolicity of the origin (P + 2 sqrt(c) > 0).
    pub fn new(p: f64, c: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !c.is_finite() {
            return Err(MaslovError::InvalidParameter(
                "P and c must be finite".into(),
            ));
        }
        if !(q >= 1.0 && q.fract() == 0.0 && q < 64.0) {
            return Err(MaslovError::InvalidParameter(format!(
                "q must be an integer >= 1 (got {q})"
            )));
        }
        if c <= 0.0 {
            return Err(MaslovError::InvalidParameter(format!(
                "c must be positive (got {c})"
            )));
        }
        if p + 2.0 * c.sqrt() <= 0.0 {
            return Err(MaslovError::Precondition(format!(
                "P + 2 sqrt(c) = {} <= 0: origin is not hyperbolic",
                p + 2.0 * c.sqrt()
            )));
        }
        Ok(WaveParams { p, c, q: q as u32 })
    }

    pub fn explicit() -> Self {
        WaveParams {
            p: EXPLICIT_P,
            c: 1.0,
            q: 1,
        }
    }

    pub fn is_explicit(&self) -> bool {
        (self.p - EXPLICIT_P).abs() < 1e-12 && (self.c - 1.0).abs() < 1e-12 && self.q == 1
    }

    /// Left edge of the essential spectrum of the linearization.
    pub fn lambda_edge(&self) -> f64 {
        self.c - self.p * (self.p - self.p.abs()) / 8.0
    }

    /// Slowest spatial decay rate of the origin, min Re mu > 0 over mu^4 - P mu^2 + c = 0.
    pub fn decay_rate(&self) -> f64 {
        // mu^4 - P mu^2 + c = 0 in closed form; the generic Schur solver can stall
        // on this companion matrix
        let disc = Complex64::new(self.p * self.p - 4.0 * self.c, 0.0).sqrt();
        [0.5 * (self.p + disc), 0.5 * (self.p - disc)]
            .iter()
            .map(|m2| m2.sqrt().re.abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn linearization(&self) -> DMatrix<f64> {
        #[rustfmt::skip]
        let l = DMatrix::from_row_slice(4, 4, &[
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -self.c, 0.0, self.p, 0.0,
        ]);
        l
    }

    /// phi'''' from the steady equation.
    pub fn fourth_derivative(&self, s: &[f64; 4]) -> f64 {
        self.p * s[2] - self.c * s[0] + s[0].powi(self.q as i32 + 1)
    }
}

/// Conserved energy of the steady equation.
pub fn energy(state: &[f64; 4], params: &WaveParams) -> f64 {
    let [u, u1, u2, u3] = *state;
    let qq = params.q as f64 + 2.0;
    0.5 * u2 * u2 + 0.5 * params.p * u1 * u1 - 0.5 * params.c * u * u
        + u.powi(params.q as i32 + 2) / qq
        - u1 * u3
}

/// (35/24) sech^4(x / (2 sqrt 6)) and its first four derivatives.
pub fn explicit_soliton(x: f64) -> [f64; 5] {
    let k = 1.0 / (2.0 * 6f64.sqrt());
    let s = 1.0 / (k * x).cosh();
    let t = (k * x).tanh();
    let a = EXPLICIT_AMPLITUDE;
    let (s4, s6, s8) = (s.powi(4), s.powi(6), s.powi(8));
    [
        a * s4,
        -4.0 * a * s4 * t * k,
        a * (16.0 * s4 - 20.0 * s6) * k * k,
        a * (-64.0 * s4 + 120.0 * s6) * t * k.powi(3),
        a * (256.0 * s4 - 1040.0 * s6 + 840.0 * s8) * k.powi(4),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Shot,
}

/// A symmetric profile sampled on a uniform grid, zero outside it.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    params: WaveParams,
    provenance: Provenance,
    xs: Vec<f64>,
    states: Vec<[f64; 4]>,
    decay: (f64, f64),
}

impl WaveProfile {
    /// The explicit soliton sampled on [-40, 40] with step 0.01.
    pub fn explicit() -> Self {
        Self::explicit_on(40.0, 0.01)
    }

    pub fn explicit_on(half_length: f64, dx: f64) -> Self {
        let n = (half_length / dx).round() as i64;
        let xs: Vec<f64> = (-n..=n).map(|i| i as f64 * dx).collect();
        let states = xs
            .iter()
            .map(|&x| {
                let d = explicit_soliton(x);
                [d[0], d[1], d[2], d[3]]
            })
            .collect();
        let k = 1.0 / (2.0 * 6f64.sqrt());
        WaveProfile {
            params: WaveParams::explicit(),
            provenance: Provenance::Explicit,
            xs,
            states,
            decay: (4.0 * k, 2.0 * EXPLICIT_AMPLITUDE * 16.0),
        }
    }

    /// Builds a numerical profile from uniformly spaced nodes.
    pub fn from_nodes(params: WaveParams, xs: Vec<f64>, states: Vec<[f64; 4]>) -> Result<Self> {
        if xs.len() < 5 || xs.len() != states.len() {
            return Err(MaslovError::InvalidParameter(
                "profile needs at least 5 nodes".into(),
            ));
        }
        let h = xs[1] - xs[0];
        if h.is_nan()
            || h <= 0.0
            || xs
                .windows(2)
                .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0))
        {
            return Err(MaslovError::InvalidParameter(
                "profile grid must be uniform".into(),
            ));
        }
        let rho = params.decay_rate();
        let qf = params.q as f64;
        let f = xs
            .iter()
            .zip(&states)
            .map(|(&x, s)| {
                (qf + 1.0) * s[0].abs().powi(params.q as i32) * (qf * rho * x.abs()).exp()
            })
            .fold(0.0, f64::max);
        Ok(WaveProfile {
            params,
            provenance: Provenance::Shot,
            xs,
            states,
            decay: (qf * rho, 1.05 * f + 1e-300),
        })
    }

    pub fn params(&self) -> WaveParams {
        self.params
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_explicit(&self) -> bool {
        self.provenance == Provenance::Explicit
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn states(&self) -> &[[f64; 4]] {
        &self.states
    }

    pub fn step(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    /// (phi, phi', phi'', phi''') at x; zero beyond the grid for shot profiles.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        if self.is_explicit() {
            let d = explicit_soliton(x);
            return [d[0], d[1], d[2], d[3]];
        }
        let x0 = self.xs[0];
        let h = self.step();
        let last = self.xs.len() - 1;
        if x < x0 || x > self.xs[last] {
            return [0.0; 4];
        }
        let i = (((x - x0) / h).floor() as usize).min(last - 1);
        let t = (x - self.xs[i]) / h;
        let (a, b) = (&self.states[i], &self.states[i + 1]);
        let da = [a[1], a[2], a[3], self.params.fourth_derivative(a)];
        let db = [b[1], b[2], b[3], self.params.fourth_derivative(b)];
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = h00 * a[k] + h10 * h * da[k] + h01 * b[k] + h11 * h * db[k];
        }
        out
    }

    /// The spectral potential (q+1) phi^q.
    pub fn potential(&self, x: f64) -> f64 {
        (self.params.q as f64 + 1.0) * self.eval(x)[0].powi(self.params.q as i32)
    }

    /// (gamma, F) with |potential(x)| <= F exp(-gamma |x|).
    pub fn potential_decay(&self) -> (f64, f64) {
        self.decay
    }

    fn fd_derivative(&self, k: usize, i: usize) -> f64 {
        let h = self.step();
        let s = &self.states;
        (-s[i + 2][k] + 8.0 * s[i + 1][k] - 8.0 * s[i - 1][k] + s[i - 2][k]) / (12.0 * h)
    }

    /// Max-norm ODE residual on the interior, with phi'''' from fourth-order differences of phi'''.
    pub fn residual(&self) -> f64 {
        (2..self.xs.len() - 2)
            .map(|i| {
                (self.fd_derivative(3, i) - self.params.fourth_derivative(&self.states[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = energy(&self.states[0], &self.params);
        self.states
            .iter()
            .map(|s| (energy(s, &self.params) - e0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_state_norm_sq(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.xs.len();
        (0..n / 2)
            .map(|i| (self.states[i][0] - self.states[n - 1 - i][0]).abs())
            .fold(0.0, f64::max)
    }

    fn trapezoid(&self, f: impl Fn(usize) -> f64, range: std::ops::Range<usize>) -> f64 {
        let h = self.step();
        let (a, b) = (range.start, range.end - 1);
        let inner: f64 = (a + 1..b).map(&f).sum();
        h * (inner + 0.5 * (f(a) + f(b)))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "phi", "phi1", "phi2", "phi3"])?;
        for (x, s) in self.xs.iter().zip(&self.states) {
            let row = [*x, s[0], s[1], s[2], s[3]].map(|v| format!("{v:.16e}"));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, params: WaveParams) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["x", "phi", "phi1", "phi2", "phi3"] {
            return Err(MaslovError::InvalidParameter(
                "profile header must be x,phi,phi1,phi2,phi3".into(),
            ));
        }
        let mut xs = Vec::new();
        let mut states = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(crate::problems::parse_number)
                .collect::<Result<_>>()?;
            if v.len() != 5 {
                return Err(MaslovError::InvalidParameter(
                    "profile rows need 5 columns".into(),
                ));
            }
            xs.push(v[0]);
            states.push([v[1], v[2], v[3], v[4]]);
        }
        Self::from_nodes(params, xs, states)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path, params: WaveParams) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, params)
    }
}

/// Checks the sufficient conditions for the negative-eigenvalue certificate.
pub fn check_certificate_hypotheses(p: &WaveParams) -> Result<()> {
    let first = p.p + 2.0 * p.c >= 0.0 && p.c > 0.0 && p.c <= 1.0;
    let second = p.p > 0.0 && p.c > 0.0;
    if first || second {
        return Ok(());
    }
    let mut failed = Vec::new();
    if p.p + 2.0 * p.c < 0.0 {
        failed.push("P + 2c >= 0");
    }
    if p.c > 1.0 {
        failed.push("c <= 1");
    }
    if p.p <= 0.0 {
        failed.push("P > 0");
    }
    Err(MaslovError::Precondition(format!(
        "certificate hypotheses fail: {}",
        failed.join(", ")
    )))
}

#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    pub quadratic_form: f64,
    pub rhs: f64,
}

impl Certificate {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.quadratic_form < 0.0
            && self.rhs < 0.0
            && (self.quadratic_form - self.rhs).abs() <= rel_tol * self.rhs.abs()
    }
}

/// <phi, L phi> by trapezoid quadrature against -q int phi^(q+2).
pub fn negative_eigenvalue_certificate(profile: &WaveProfile) -> Result<Certificate> {
    let p = profile.params();
    check_certificate_hypotheses(&p)?;
    let s = profile.states();
    if s.iter().all(|v| v[0] == 0.0) {
        return Err(MaslovError::Precondition(
            "certificate needs a nonzero profile".into(),
        ));
    }
    let q = p.q as i32;
    let qf = p.q as f64;
    let range = 2..s.len() - 2;
    let quadratic_form = profile.trapezoid(
        |i| {
            let u = s[i];
            let a = p.c - (qf + 1.0) * u[0].powi(q);
            u[0] * (profile.fd_derivative(3, i) - p.p * u[2] + a * u[0])
        },
        range.clone(),
    );
    let rhs = -qf * profile.trapezoid(|i| s[i][0].powi(q + 2), range);
    Ok(Certificate {
        quadratic_form,
        rhs,
    })
}

/// Controls for [`shoot_symmetric`].
#[derive(Debug, Clone)]
pub struct ShootOptions {
    /// Step of the accepted profile.
    pub dx: f64,
    /// Step of the coarse scan and bisection.
    pub scan_dx: f64,
    /// Launch distance from the origin.
    pub delta: f64,
    /// Number of launch parameters per scanned segment.
    pub samples: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            dx: 0.001,
            scan_dx: 0.01,
            delta: 1e-9,
            samples: 480,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Shot {
    peak_x: f64,
    peak_phi: f64,
    g: f64,
    /// int phi^2 up to the peak
    mass: f64,
    /// No positive maximum; phi ran off to +infinity. Counted as g = +inf.
    escaped: bool,
}

/// How launch points on the unstable manifold are parameterized.
#[derive(Clone)]
enum Section {
    /// Distinct real rates mu_s < mu_f: orbits a e^{mu_s x} v_s + b e^{mu_f x} v_f
    /// are labelled by the shift-invariant b / |a|^(mu_f / mu_s), with b = sinh(t).
    Split { mu_s: f64, mu_f: f64 },
    /// Equal real parts (complex pair or Jordan block): a closed curve in the
    /// unstable plane crossed once by every linear orbit.
    Circle { basis: DMatrix<f64> },
}

/// Which maximum of phi serves as the candidate symmetric point.
#[derive(Debug, Clone, Copy)]
enum Event {
    /// Highest positive maximum before the orbit returns, escapes or times out.
    Highest,
    /// First maximum higher than the next one. With oscillatory tails the maxima
    /// grow until the primary pulse, after which the orbit wanders and later
    /// maxima are unrelated to it.
    FirstPeak,
}

/// Shots are integrated in modal coordinates y = V z. With distinct real rates V
/// diagonalizes the linear part, so rounding in the slow mode does not pollute
/// the much smaller fast mode during the launch.
#[derive(Clone)]
struct Launcher {
    params: WaveParams,
    event: Event,
    section: Section,
    delta: f64,
    x_cap: f64,
    modes: Matrix4<f64>,
    modes_inv: Matrix4<f64>,
    linear: Matrix4<f64>,
}

impl Launcher {
    fn new(params: WaveParams, delta: f64) -> Result<Self> {
        let (p, c) = (params.p, params.c);
        let disc = p * p - 4.0 * c;
        let section = if p > 0.0 && disc > 1e-8 * p * p {
            Section::Split {
                mu_s: (0.5 * (p - disc.sqrt())).sqrt(),
                mu_f: (0.5 * (p + disc.sqrt())).sqrt(),
            }
        } else {
            Section::Circle {
                basis: adapted_circle(&params)?,
            }
        };
        let rho = params.decay_rate();
        let x_cap = 2.0 * (10.0 / delta).ln() / rho + 60.0;
        let l =
            Matrix4::from_iterator(params.linearization().transpose().iter().copied()).transpose();
        let (modes, modes_inv, linear) = match section {
            Section::Split { mu_s, mu_f } => {
                let rates = [mu_s, mu_f, -mu_s, -mu_f];
                let v = Matrix4::from_fn(|i, j| rates[j].powi(i as i32));
                let v_inv = v
                    .try_inverse()
                    .ok_or_else(|| MaslovError::Solver("singular eigenbasis".into()))?;
                (v, v_inv, Matrix4::from_diagonal(&Vector4::from(rates)))
            }
            Section::Circle { .. } => (Matrix4::identity(), Matrix4::identity(), l),
        };
        Ok(Launcher {
            params,
            event: Event::Highest,
            section,
            delta,
            x_cap,
            modes,
            modes_inv,
            linear,
        })
    }

    fn physical(&self, z: &Vector4<f64>) -> Vector4<f64> {
        self.modes * z
    }

    fn rhs(&self, z: &Vector4<f64>) -> Vector4<f64> {
        let phi = self.modes.row(0).transpose().dot(z);
        self.linear * z + self.modes_inv.column(3) * phi.powi(self.params.q as i32 + 1)
    }

    /// Ordered parameter lists; brackets are searched within each list.
    fn segments(&self, samples: usize) -> Vec<(f64, Vec<f64>)> {
        match self.section {
            Section::Split { .. } => {
                let t_max = 12.0;
                let ts: Vec<f64> = (0..samples)
                    .map(|i| -t_max + 2.0 * t_max * i as f64 / (samples - 1) as f64)
                    .collect();
                vec![(1.0, ts.clone()), (-1.0, ts)]
            }
            Section::Circle { .. } => {
                let ts = (0..=samples)
                    .map(|i| 2.0 * PI * i as f64 / samples as f64)
                    .collect();
                vec![(1.0, ts)]
            }
        }
    }

    fn launch(&self, sigma: f64, t: f64) -> Vector4<f64> {
        match &self.section {
            Section::Split { mu_s, mu_f } => {
                let (a, b) = (sigma, t.sinh());
                let mut s = (self.delta / a.abs()).ln() / mu_s;
                if b != 0.0 {
                    s = s.min((self.delta / b.abs()).ln() / mu_f);
                }
                Vector4::new(a * (mu_s * s).exp(), b * (mu_f * s).exp(), 0.0, 0.0)
            }
            Section::Circle { basis } => {
                let z = basis * nalgebra::DVector::from_vec(vec![t.cos(), t.sin()]) * self.delta;
                Vector4::new(z[0], z[1], z[2], z[3])
            }
        }
    }

    fn step(&self, y: &Vector4<f64>, h: f64) -> Vector4<f64> {
        rk4_step(|_, v: &Vector4<f64>| self.rhs(v), 0.0, y, h)
    }

    /// Integrates from the launch point and returns the highest positive maximum of phi.
    fn shoot(&self, sigma: f64, t: f64, h: f64) -> Option<Shot> {
        let mut z = self.launch(sigma, t);
        let mut y = self.physical(&z);
        let mut x = 0.0;
        let mut mass = 0.0;
        let mut best: Option<Shot> = None;
        let start = y.norm();
        let mut peak_norm = start;
        while x < self.x_cap {
            let z_next = self.step(&z, h);
            let next = self.physical(&z_next);
            if y[1] > 0.0 && next[1] <= 0.0 && next[0] > 0.0 {
                let (dt, s) = self.locate(&z, h);
                let shot = Shot {
                    peak_x: x + dt,
                    peak_phi: s[0],
                    g: s[3],
                    mass: mass + dt * y[0] * y[0],
                    escaped: false,
                };
                match self.event {
                    Event::Highest if best.is_none_or(|b| s[0] > b.peak_phi) => best = Some(shot),
                    Event::FirstPeak => match best {
                        Some(prev) if s[0] < prev.peak_phi => return Some(prev),
                        _ => best = Some(shot),
                    },
                    _ => {}
                }
            }
            mass += 0.5 * h * (y[0] * y[0] + next[0] * next[0]);
            y = next;
            z = z_next;
            x += h;
            let nrm = y.norm();
            if !nrm.is_finite() || nrm > 1e4 {
                if best.is_none() && y[0] > 0.0 {
                    best = Some(Shot {
                        peak_x: x,
                        peak_phi: f64::INFINITY,
                        g: f64::INFINITY,
                        mass,
                        escaped: true,
                    });
                }
                break;
            }
            peak_norm = peak_norm.max(nrm);
            if peak_norm > 1e4 * start && nrm < 1e-3 * peak_norm {
                break;
            }
        }
        best
    }

    /// Sub-step in [0, h] where phi' vanishes, by bisection on single RK4 steps.
    /// Returns the physical state there.
    fn locate(&self, z: &Vector4<f64>, h: f64) -> (f64, Vector4<f64>) {
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.physical(&self.step(z, mid))[1] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        (t, self.physical(&self.step(z, t)))
    }

    /// Bisection on the launch parameter for phi''' = 0 at the peak.
    fn bisect(&self, sigma: f64, lo: f64, hi: f64, h: f64) -> Option<(f64, Shot)> {
        let (mut lo, mut hi) = (lo, hi);
        let a = self.shoot(sigma, lo, h)?;
        let b = self.shoot(sigma, hi, h)?;
        if a.g.signum() == b.g.signum() {
            return None;
        }
        let (mut sa, mut sb) = (a, b);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = self.shoot(sigma, mid, h)?;
            if s.g.signum() == a.g.signum() {
                lo = mid;
                sa = s;
            } else {
                hi = mid;
                sb = s;
            }
        }
        if !same_event(&sa, &sb) {
            return None;
        }
        // report the side that actually turned back
        if sa.escaped {
            Some((hi, sb))
        } else {
            Some((lo, sa))
        }
    }
}

/// Basis W Q^{-1/2} of the unstable plane with R^T Q + Q R = 2I, R the restricted flow.
fn adapted_circle(params: &WaveParams) -> Result<DMatrix<f64>> {
    let l = params.linearization();
    let (w, _) = invariant_subspaces(&l, 2)?;
    let r = w.transpose() * &l * &w;
    let r = Matrix2::new(r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]);
    let rt = r.transpose();
    // unknowns (q11, q12, q22)
    let rows = [(0usize, 0usize), (0, 1), (1, 1)];
    let mut sys = nalgebra::Matrix3::zeros();
    for (row, &(i, j)) in rows.iter().enumerate() {
        for (col, &(a, b)) in rows.iter().enumerate() {
            let mut e = Matrix2::zeros();
            e[(a, b)] = 1.0;
            e[(b, a)] = 1.0;
            sys[(row, col)] = (rt * e + e * r)[(i, j)];
        }
    }
    let sol = sys
        .lu()
        .solve(&nalgebra::Vector3::new(2.0, 0.0, 2.0))
        .ok_or_else(|| MaslovError::Solver("adapted norm is singular".into()))?;
    let eig = SymmetricEigen::new(Matrix2::new(sol[0], sol[1], sol[1], sol[2]));
    if eig.eigenvalues.iter().any(|&e| e <= 0.0) {
        return Err(MaslovError::Solver("adapted norm is not positive".into()));
    }
    let inv_sqrt = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()))
        * eig.eigenvectors.transpose();
    Ok(w * DMatrix::from_iterator(2, 2, inv_sqrt.iter().copied()))
}

fn same_event(a: &Shot, b: &Shot) -> bool {
    if a.escaped || b.escaped {
        return !(a.escaped && b.escaped);
    }
    (a.peak_x - b.peak_x).abs() < 2.0
        && (a.peak_phi - b.peak_phi).abs() < 0.25 * a.peak_phi.abs().max(b.peak_phi.abs())
}

/// Shoots for a symmetric homoclinic orbit of the steady equation.
///
/// Launch parameters are scanned for sign changes of phi''' at a maximum of
/// phi (where phi' = 0), either the highest one or the first one that exceeds its successor.
/// Each bracket is bisected at the coarse step, and candidates from both scans
/// are refined at the fine step in order of increasing mass until one passes
/// the residual and energy checks.
pub fn shoot_symmetric(params: &WaveParams, opts: &ShootOptions) -> Result<WaveProfile> {
    let params = WaveParams::new(params.p, params.c, params.q as f64)?;
    if !(opts.dx > 0.0 && opts.scan_dx > 0.0 && opts.delta > 0.0 && opts.samples >= 8) {
        return Err(MaslovError::InvalidParameter(
            "invalid shooting options".into(),
        ));
    }
    let base = Launcher::new(params, opts.delta)?;
    let launchers = [
        Launcher {
            event: Event::Highest,
            ..base.clone()
        },
        Launcher {
            event: Event::FirstPeak,
            ..base
        },
    ];
    let mut candidates = Vec::new();
    let mut scanned = 0;
    let mut spacing = 0.0;
    for launcher in &launchers {
        for (sigma, ts) in launcher.segments(opts.samples) {
            scanned += ts.len();
            spacing = ts[1] - ts[0];
            let shots: Vec<Option<Shot>> = ts
                .iter()
                .map(|&t| launcher.shoot(sigma, t, opts.scan_dx))
                .collect();
            for i in 0..ts.len() - 1 {
                if let (Some(a), Some(b)) = (shots[i], shots[i + 1]) {
                    if a.g.signum() != b.g.signum() && same_event(&a, &b) {
                        if let Some((t, shot)) =
                            launcher.bisect(sigma, ts[i], ts[i + 1], opts.scan_dx)
                        {
                            candidates.push((launcher, sigma, t, shot));
                        }
                    }
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(MaslovError::Solver(format!(
            "no symmetric orbit in bracket ({scanned} launch parameters, no sign change of phi''' at the peak)"
        )));
    }
    candidates.sort_by(|a, b| a.3.mass.total_cmp(&b.3.mass));
    let mut rejected = Vec::new();
    for (launcher, sigma, t, _) in candidates.into_iter().take(4) {
        match refine(launcher, sigma, t, spacing, opts.dx) {
            Ok(profile) => return Ok(profile),
            Err(e) => rejected.push(format!("t = {t:.6}: {e}")),
        }
    }
    Err(MaslovError::Solver(format!(
        "converged to spurious orbit: {}",
        rejected.join("; ")
    )))
}

/// Re-brackets a coarse root at the fine step, then builds the mirrored profile.
fn refine(launcher: &Launcher, sigma: f64, t0: f64, spacing: f64, h: f64) -> Result<WaveProfile> {
    let lost = || MaslovError::Solver("bracket lost at the fine step".into());
    let s0 = launcher.shoot(sigma, t0, h).ok_or_else(lost)?;
    let opposite = |t: f64| {
        launcher
            .shoot(sigma, t, h)
            .is_some_and(|s| s.g.signum() != s0.g.signum() && same_event(&s0, &s))
    };
    let mut w = 1e-12 * t0.abs().max(1.0);
    let mut bracket = None;
    while bracket.is_none() && w < spacing {
        for other in [t0 - w, t0 + w] {
            if opposite(other) {
                bracket = Some(if other < t0 { (other, t0) } else { (t0, other) });
                break;
            }
        }
        w *= 4.0;
    }
    if bracket.is_none() {
        // the fine trajectory may have moved the root; rescan the neighbourhood
        let ts: Vec<f64> = (0..=32)
            .map(|i| t0 - spacing + spacing * i as f64 / 16.0)
            .collect();
        let shots: Vec<Option<Shot>> = ts.iter().map(|&t| launcher.shoot(sigma, t, h)).collect();
        bracket = (0..ts.len() - 1)
            .filter(|&i| match (shots[i], shots[i + 1]) {
                (Some(a), Some(b)) => a.g.signum() != b.g.signum() && same_event(&a, &b),
                _ => false,
            })
            .map(|i| (ts[i], ts[i + 1]))
            .min_by(|a, b| (a.0 - t0).abs().total_cmp(&(b.0 - t0).abs()));
    }
    let (lo, hi) = bracket.ok_or_else(lost)?;
    let (t, shot) = launcher.bisect(sigma, lo, hi, h).ok_or_else(lost)?;

    // nodes at peak_x - k h, each one partial step from the shot's own trajectory
    let n = (shot.peak_x / h).floor() as usize;
    let tau = shot.peak_x - n as f64 * h;
    let mut z = launcher.launch(sigma, t);
    let mut left = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        left.push(launcher.physical(&launcher.step(&z, tau)));
        z = launcher.step(&z, h);
    }
    let center = left[n];
    let scale = center.norm().max(1.0);
    if center[1].abs() > 1e-6 * scale || center[3].abs() > 1e-6 * scale {
        return Err(MaslovError::Solver(format!(
            "symmetric point not reached (phi' = {:e}, phi''' = {:e})",
            center[1], center[3]
        )));
    }

    let mut xs = Vec::with_capacity(2 * n + 1);
    let mut states = Vec::with_capacity(2 * n + 1);
    for (k, s) in left.iter().enumerate() {
        xs.push((k as f64 - n as f64) * h);
        states.push([s[0], s[1], s[2], s[3]]);
    }
    states[n][1] = 0.0;
    states[n][3] = 0.0;
    for k in (0..n).rev() {
        let s = states[k];
        xs.push((n - k) as f64 * h);
        states.push([s[0], -s[1], s[2], -s[3]]);
    }
    let profile = WaveProfile::from_nodes(launcher.params, xs, states)?;

    let res = profile.residual();
    if res >= 1e-6 {
        return Err(MaslovError::Solver(format!(
            "converged to spurious orbit (residual {res:e})"
        )));
    }
    let drift = profile.energy_drift();
    if drift > 1e-8 * (1.0 + profile.max_state_norm_sq()) {
        return Err(MaslovError::Solver(format!(
            "converged to spurious orbit (energy drift {drift:e})"
        )));
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_energy() {
        let p = WaveParams::new(2.0, 1.0, 1.0).unwrap();
        let e = energy(&[1.0, 4.0, 2.0, 3.0], &p);
        assert!((e - 35.0 / 6.0).abs() < 1e-12, "{e}");
        assert_eq!(energy(&[0.0; 4], &p), 0.0);
    }

    #[test]
    fn explicit_residual_and_energy() {
        let p = WaveParams::explicit();
        for x in [0.0, 1.0, 5.0, -3.0, 3.0] {
            let d = explicit_soliton(x);
            let r = d[4] - p.p * d[2] + p.c * d[0] - d[0] * d[0];
            assert!(r.abs() < 1e-10, "x = {x}: {r}");
            assert!(energy(&[d[0], d[1], d[2], d[3]], &p).abs() < 1e-10);
        }
        assert!((explicit_soliton(0.0)[0] - 35.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolicity_precondition() {
        assert!(matches!(
            WaveParams::new(-3.0, 1.0, 1.0),
            Err(MaslovError::Precondition(_))
        ));
        assert!(WaveParams::new(2.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn certificate_hypotheses() {
        let bad = WaveParams {
            p: -3.0,
            c: 2.0,
            q: 1,
        };
        let msg = check_certificate_hypotheses(&bad).unwrap_err().to_string();
        assert!(msg.contains("c <= 1") && msg.contains("P > 0"), "{msg}");
    }

    #[test]
    fn explicit_certificate() {
        let c = negative_eigenvalue_certificate(&WaveProfile::explicit()).unwrap();
        assert!(c.holds(1e-5), "{c:?}");
    }
}
