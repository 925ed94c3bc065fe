//! Second exterior power of R^4 in the lexical basis
//! E1 = e1^e2, E2 = e1^e3, E3 = e1^e4, E4 = e2^e3, E5 = e2^e4, E6 = e3^e4.
//!
//! Everything here is real arithmetic on fixed-size nalgebra types.

use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix4x2, Matrix6, Vector4, Vector6};

use crate::error::{MaslovError, Result};
use crate::linalg::kernel_basis;

/// Scale factor of the membership tests: |I| <= TOL * (1 + |U|^2).
pub const LAGRANGIAN_TOL: f64 = 1e-9;

/// Index pairs (i, j), i < j, of the basis 2-forms.
pub const BASIS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Coordinates of a 2-form on R^4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge2(pub Vector6<f64>);

impl Wedge2 {
    pub fn new(c: [f64; 6]) -> Self {
        Wedge2(Vector6::from_row_slice(&c))
    }

    pub fn basis(k: usize) -> Self {
        let mut v = Vector6::zeros();
        v[k] = 1.0;
        Wedge2(v)
    }

    /// The symplectic form e1^e3 + e2^e4.
    pub fn omega() -> Self {
        Wedge2::new([0.0, 1.0, 0.0, 0.0, 1.0, 0.0])
    }

    /// a ^ b.
    pub fn from_vectors(a: &Vector4<f64>, b: &Vector4<f64>) -> Self {
        let mut v = Vector6::zeros();
        for (k, &(i, j)) in BASIS.iter().enumerate() {
            v[k] = a[i] * b[j] - a[j] * b[i];
        }
        Wedge2(v)
    }

    pub fn coords(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Induced inner product; equals the Gram determinant on decomposables.
    pub fn inner(&self, other: &Wedge2) -> f64 {
        self.0.dot(&other.0)
    }

    /// Coefficient of self ^ other against e1^e2^e3^e4.
    pub fn pair(&self, other: &Wedge2) -> f64 {
        let u = &self.0;
        let v = &other.0;
        u[0] * v[5] - u[1] * v[4] + u[2] * v[3] + u[3] * v[2] - u[4] * v[1] + u[5] * v[0]
    }

    /// Plucker invariant I1 = U1 U6 - U2 U5 + U3 U4.
    pub fn i1(&self) -> f64 {
        let u = &self.0;
        u[0] * u[5] - u[1] * u[4] + u[2] * u[3]
    }

    /// Lagrangian invariant I2 = U2 + U5.
    pub fn i2(&self) -> f64 {
        self.0[1] + self.0[4]
    }

    fn tol(&self) -> f64 {
        LAGRANGIAN_TOL * (1.0 + self.0.norm_squared())
    }

    pub fn is_decomposable(&self) -> bool {
        self.i1().abs() <= self.tol()
    }

    pub fn is_lagrangian(&self) -> bool {
        self.is_decomposable() && self.i2().abs() <= self.tol()
    }

    /// Sign of I2. On xi1 ^ xi2 for an eigenvector xi1 + i xi2 of an elliptic
    /// pair this is minus the Krein signature, since omega.pair(U) = -I2.
    pub fn omega_sign(&self) -> i8 {
        let s = self.i2();
        if s.abs() <= self.tol() {
            0
        } else if s > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Coefficients of U ^ v in the basis e123, e124, e134, e234.
    pub fn wedge_vector(&self, v: &Vector4<f64>) -> Vector4<f64> {
        let u = &self.0;
        Vector4::new(
            u[0] * v[2] - u[1] * v[1] + u[3] * v[0],
            u[0] * v[3] - u[2] * v[1] + u[4] * v[0],
            u[1] * v[3] - u[2] * v[2] + u[5] * v[0],
            u[3] * v[3] - u[4] * v[2] + u[5] * v[1],
        )
    }

    /// Recovers a frame [a | b] with a ^ b = U from a decomposable 2-form.
    pub fn frame(&self) -> Result<Matrix4x2<f64>> {
        if self.norm() == 0.0 || !self.is_decomposable() {
            return Err(MaslovError::Geometry(format!(
                "2-form is not decomposable (I1 = {:e})",
                self.i1()
            )));
        }
        let mut m = Matrix4::zeros();
        for k in 0..4 {
            let col = self.wedge_vector(&Vector4::ith(k, 1.0));
            m.set_column(k, &col);
        }
        // kernel of v -> U ^ v is the plane itself
        let k = kernel_basis(&DMatrix::from_column_slice(4, 4, m.as_slice()), 2);
        let a: Vector4<f64> = Vector4::from_column_slice(k.column(0).as_slice());
        let b: Vector4<f64> = Vector4::from_column_slice(k.column(1).as_slice());
        let w = Wedge2::from_vectors(&a, &b);
        let s = w.inner(self) / self.0.norm_squared();
        let mut z = Matrix4x2::zeros();
        z.set_column(0, &(a / s));
        z.set_column(1, &b);
        Ok(z)
    }

    /// omega ^ xi ^ eta, the triple-wedge coefficient.
    pub fn triple(xi: &Vector4<f64>, eta: &Vector4<f64>) -> f64 {
        Wedge2::omega().pair(&Wedge2::from_vectors(xi, eta))
    }
}

/// A 4x2 frame Z = [X; Y].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame(pub Matrix4x2<f64>);

impl Frame {
    pub fn x(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn y(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 0).into_owned()
    }

    /// Wedge of the two columns; errors on rank deficiency.
    pub fn wedge(&self) -> Result<Wedge2> {
        let a: Vector4<f64> = self.0.column(0).into_owned();
        let b: Vector4<f64> = self.0.column(1).into_owned();
        let u = Wedge2::from_vectors(&a, &b);
        if u.norm() <= 1e-14 * a.norm() * b.norm() || u.norm() == 0.0 {
            return Err(MaslovError::Geometry("degenerate frame".into()));
        }
        Ok(u)
    }

    /// Frobenius norm of Y^T X - X^T Y.
    pub fn symmetry_defect(&self) -> f64 {
        let (x, y) = (self.x(), self.y());
        (y.transpose() * x - x.transpose() * y).norm()
    }
}

/// The symplectic matrix J = [[0, -I], [I, 0]] on R^4.
pub fn j4() -> Matrix4<f64> {
    #[rustfmt::skip]
    let j = Matrix4::new(
        0.0, 0.0, -1.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
    );
    j
}

/// Induced derivation A^(2) with A^(2)(u^v) = Au^v + u^Av.
pub fn induced_matrix_2(a: &Matrix4<f64>) -> Matrix6<f64> {
    let e = |i: usize, j: usize| a[(i - 1, j - 1)];
    #[rustfmt::skip]
    let m = Matrix6::new(
        e(1,1) + e(2,2), e(2,3), e(2,4), -e(1,3), -e(1,4), 0.0,
        e(3,2), e(1,1) + e(3,3), e(3,4), e(1,2), 0.0, -e(1,4),
        e(4,2), e(4,3), e(1,1) + e(4,4), 0.0, e(1,2), e(1,3),
        -e(3,1), e(2,1), 0.0, e(2,2) + e(3,3), e(3,4), -e(2,4),
        -e(4,1), 0.0, e(2,1), e(4,3), e(2,2) + e(4,4), e(2,3),
        0.0, -e(4,1), e(3,1), -e(4,2), e(3,2), e(3,3) + e(4,4),
    );
    m
}

/// Matrix of 2x2 minors: compound_matrix_2(K) (u^v) = Ku ^ Kv.
pub fn compound_matrix_2(k: &Matrix4<f64>) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for (r, &(i, j)) in BASIS.iter().enumerate() {
        for (c, &(p, q)) in BASIS.iter().enumerate() {
            m[(r, c)] = k[(i, p)] * k[(j, q)] - k[(i, q)] * k[(j, p)];
        }
    }
    m
}

/// (I1, I2) of a 2-form.
pub fn plucker_invariants(u: &Wedge2) -> (f64, f64) {
    (u.i1(), u.i2())
}

/// a ^ b on R^2 as a coefficient of e1^e2.
pub fn wedge_2d(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}
