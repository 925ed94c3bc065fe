//! Constant-coefficient data at |x| = infinity.

use nalgebra::{DMatrix, DVector, Matrix4, Matrix6};
use num_complex::Complex64;

use crate::error::{MaslovError, Result};
use crate::exterior::{compound_matrix_2, induced_matrix_2, Wedge2};
use crate::linalg::range_basis;
use crate::problems::Problem;

/// Eigenvalues with |Re| below this are treated as imaginary.
pub const HYPERBOLIC_TOL: f64 = 1e-10;
const GAP_WARN: f64 = 1e-6;

/// J on R^{2n}.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// A = J^{-1} B, using J^{-1} = -J.
pub fn hamiltonian_generator(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows() / 2;
    -j_matrix(n) * b
}

fn to_m4(a: &DMatrix<f64>) -> Matrix4<f64> {
    Matrix4::from_iterator(a.iter().copied())
}

fn from_m6(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(6, 6, m.iter().copied())
}

/// Generator of the lifted system: A itself for n = 1, A^(2) for n = 2.
pub fn induced_generator(a: &DMatrix<f64>) -> DMatrix<f64> {
    match a.nrows() {
        2 => a.clone(),
        4 => from_m6(&induced_matrix_2(&to_m4(a))),
        d => panic!("unsupported phase dimension {d}"),
    }
}

/// Lifted representative of the span of an n-column frame.
pub fn lift_frame(frame: &DMatrix<f64>) -> DVector<f64> {
    match frame.ncols() {
        1 => frame.column(0).into_owned(),
        2 => {
            let a = frame.column(0);
            let b = frame.column(1);
            let w = Wedge2::from_vectors(
                &nalgebra::Vector4::new(a[0], a[1], a[2], a[3]),
                &nalgebra::Vector4::new(b[0], b[1], b[2], b[3]),
            );
            DVector::from_iterator(6, w.0.iter().copied())
        }
        d => panic!("unsupported frame width {d}"),
    }
}

/// Unit norm, then the E1 coefficient (det of the top block) positive.
///
/// The E1 coefficient is continuous in lambda and never vanishes on the
/// catalog domains, so lambda grids see no sign flips. When it is zero the
/// rule falls back to the first coordinate of maximal magnitude, with ties
/// resolved by index rather than by rounding.
pub fn apply_sign_rule(v: &mut DVector<f64>) {
    let nrm = v.norm();
    *v /= nrm;
    let pivot = if v[0].abs() > 1e-12 {
        0
    } else {
        let big = v.amax();
        (0..v.len())
            .find(|&i| v[i].abs() >= big * (1.0 - 1e-9))
            .unwrap_or(0)
    };
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
}

/// Real polynomial prod (A - mu I) over `mus`, which must be closed under conjugation.
fn annihilator(a: &DMatrix<f64>, mus: &[Complex64]) -> DMatrix<f64> {
    let m = a.nrows();
    let id = DMatrix::<f64>::identity(m, m);
    match mus {
        [mu] => a - &id * mu.re,
        [m1, m2] => {
            let sum = (m1 + m2).re;
            let prod = (m1 * m2).re;
            a * a - a * sum + &id * prod
        }
        _ => panic!("unsupported block size {}", mus.len()),
    }
}

/// Orthonormal bases of the unstable and stable invariant subspaces of a
/// hyperbolic Hamiltonian matrix.
///
/// The unstable space is the range of prod (A - mu I) over the stable
/// eigenvalues, and vice versa. This also returns generalized eigenspaces
/// when an eigenvalue is defective.
pub fn invariant_subspaces(
    a: &DMatrix<f64>,
    n_unstable: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let ev = hamiltonian_eigenvalues(a);
    let (pos, neg): (Vec<Complex64>, Vec<Complex64>) = ev.iter().partition(|e| e.re > 0.0);
    if pos.len() != n_unstable || neg.len() != a.nrows() - n_unstable {
        return Err(MaslovError::Solver(format!(
            "eigenvalue split {}/{} instead of {n_unstable}/{}",
            pos.len(),
            neg.len(),
            a.nrows() - n_unstable
        )));
    }
    let unstable = range_basis(&annihilator(a, &neg), pos.len());
    let stable = range_basis(&annihilator(a, &pos), neg.len());
    Ok((unstable, stable))
}

/// Spectral data of A_inf(lambda).
#[derive(Debug, Clone)]
pub struct InfinityData {
    pub lambda: f64,
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    pub a_inf: DMatrix<f64>,
    pub unstable: DMatrix<f64>,
    pub stable: DMatrix<f64>,
    pub zeta_plus: DVector<f64>,
    pub zeta_minus: DVector<f64>,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// Symplectic K = [unstable | rescaled stable].
    pub k: DMatrix<f64>,
    pub k_inv: DMatrix<f64>,
    /// 2x2 minors of K (n = 2 only).
    pub k_minors: Option<Matrix6<f64>>,
}

impl InfinityData {
    /// zeta_minus ^ v as a scalar (coefficient against the volume form).
    pub fn stable_pairing(&self, v: &DVector<f64>) -> f64 {
        pairing(&self.zeta_minus, v)
    }
}

/// a ^ b for two lifted states (2-vectors or 2-forms on R^4).
pub fn pairing(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    match a.len() {
        2 => a[0] * b[1] - a[1] * b[0],
        6 => {
            let u = Wedge2::new([a[0], a[1], a[2], a[3], a[4], a[5]]);
            u.pair(&Wedge2::new([b[0], b[1], b[2], b[3], b[4], b[5]]))
        }
        d => panic!("unsupported lifted dimension {d}"),
    }
}

/// Eigenvalues of a traceless Hamiltonian matrix from its even characteristic
/// polynomial. The generic Schur iteration can stall on these matrices.
pub fn hamiltonian_eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    let squares = match a.nrows() {
        2 => vec![Complex64::new(-a.determinant(), 0.0)],
        4 => {
            // mu^4 + c2 mu^2 + c0 with c2 = -tr(A^2)/2, c0 = det A
            let c2 = -0.5 * (a * a).trace();
            let c0 = a.determinant();
            let disc = Complex64::new(c2 * c2 - 4.0 * c0, 0.0).sqrt();
            vec![0.5 * (-c2 + disc), 0.5 * (-c2 - disc)]
        }
        d => panic!("unsupported phase dimension {d}"),
    };
    squares
        .iter()
        .flat_map(|z| {
            let r = z.sqrt();
            [r, -r]
        })
        .collect()
}

pub fn infinity_data(problem: &Problem, lambda: f64) -> Result<InfinityData> {
    problem.check_lambda(lambda)?;
    let n = problem.n();
    let a = hamiltonian_generator(&problem.b_inf(lambda));
    let eigenvalues = hamiltonian_eigenvalues(&a);
    if eigenvalues.iter().any(|e| e.re.abs() <= HYPERBOLIC_TOL) {
        return Err(MaslovError::NonHyperbolic(lambda));
    }
    let n_pos = eigenvalues.iter().filter(|e| e.re > 0.0).count();
    if n_pos != n {
        return Err(MaslovError::Solver(format!(
            "eigenvalue split {n_pos}/{} instead of {n}/{n}",
            2 * n - n_pos
        )));
    }
    let (unstable, stable) = invariant_subspaces(&a, n)?;

    let mut zeta_plus = lift_frame(&unstable);
    let mut zeta_minus = lift_frame(&stable);
    apply_sign_rule(&mut zeta_plus);
    apply_sign_rule(&mut zeta_minus);
    let sigma_plus: f64 = eigenvalues
        .iter()
        .filter(|e| e.re > 0.0)
        .map(|e| e.re)
        .sum();
    let sigma_minus: f64 = eigenvalues
        .iter()
        .filter(|e| e.re < 0.0)
        .map(|e| e.re)
        .sum();

    let j = j_matrix(n);
    let c = unstable.transpose() * &j * &stable;
    let c_inv = c
        .try_inverse()
        .ok_or_else(|| MaslovError::Solver("stable and unstable spaces not transverse".into()))?;
    let s = -(&stable * c_inv);
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    k.view_mut((0, 0), (2 * n, n)).copy_from(&unstable);
    k.view_mut((0, n), (2 * n, n)).copy_from(&s);
    let k_inv = k
        .clone()
        .try_inverse()
        .ok_or_else(|| MaslovError::Solver("symplectic frame is singular".into()))?;
    let k_minors = (n == 2).then(|| compound_matrix_2(&to_m4(&k)));

    Ok(InfinityData {
        lambda,
        n,
        eigenvalues,
        a_inf: a,
        unstable,
        stable,
        zeta_plus,
        zeta_minus,
        sigma_plus,
        sigma_minus,
        k,
        k_inv,
        k_minors,
    })
}

/// Real basis of the unstable space at infinity.
pub fn unstable_frame(problem: &Problem, lambda: f64) -> Result<DMatrix<f64>> {
    Ok(infinity_data(problem, lambda)?.unstable)
}

#[derive(Debug, Clone)]
pub struct SigmaDiagnostic {
    pub sigma_plus: f64,
    pub next_largest: f64,
    pub gap: f64,
    pub gap_warning: bool,
    pub repeated_eigenvalues: bool,
}

/// Gap between sigma_plus and the next eigenvalue (real part) of the lifted generator.
pub fn sigma_ordering_check(problem: &Problem, lambda: f64) -> Result<SigmaDiagnostic> {
    let inf = infinity_data(problem, lambda)?;
    let ev = &inf.eigenvalues;
    let mut sums: Vec<f64> = if inf.n == 1 {
        ev.iter().map(|e| e.re).collect()
    } else {
        let mut v = Vec::new();
        for i in 0..ev.len() {
            for j in i + 1..ev.len() {
                v.push((ev[i] + ev[j]).re);
            }
        }
        v
    };
    sums.sort_by(|a, b| b.total_cmp(a));
    let next_largest = sums[1];
    let gap = inf.sigma_plus - next_largest;
    let mut repeated = false;
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            if (ev[i] - ev[j]).norm() < 1e-8 * (1.0 + ev[i].norm()) {
                repeated = true;
            }
        }
    }
    Ok(SigmaDiagnostic {
        sigma_plus: inf.sigma_plus,
        next_largest,
        gap,
        gap_warning: gap < GAP_WARN,
        repeated_eigenvalues: repeated,
    })
}

/// Flips entries so consecutive lifted vectors have positive inner product.
pub fn align_signs(vs: &mut [DVector<f64>]) {
    for i in 1..vs.len() {
        if vs[i - 1].dot(&vs[i]) < 0.0 {
            vs[i].neg_mut();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_rates() {
        let inf = infinity_data(&Problem::ScalarRd, 0.0).unwrap();
        assert!((inf.sigma_plus - 1.0).abs() < 1e-12);
        assert!((inf.sigma_plus + inf.sigma_minus).abs() < 1e-12);
    }

    #[test]
    fn essential_spectrum_rejected() {
        let p = Problem::Lwsw4 { c: 1.0, nu: 0.2 };
        assert!(matches!(
            infinity_data(&p, 0.4),
            Err(MaslovError::EssentialSpectrum { .. })
        ));
    }

    #[test]
    fn symplectic_frame() {
        let p = Problem::CoupledRd { c: 1.0 };
        let inf = infinity_data(&p, 1.0).unwrap();
        let j = j_matrix(2);
        let defect = (inf.k.transpose() * &j * &inf.k - &j).norm();
        assert!(defect < 1e-12, "{defect}");
    }
}
