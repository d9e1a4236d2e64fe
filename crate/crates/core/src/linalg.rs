//! Matrices over ℝ, ℂ and ℍ stored as real component planes.
//!
//! An entry `p0 + p1 i + p2 j + p3 k` lives in plane `t` as coefficient `p_t`.
//! Products use the algebra's multiplication table directly; eigenvalues and
//! functions of Hermitian matrices go through the complex embedding
//! `Z1 + Z2 j ↦ [[Z1, Z2], [-conj Z2, conj Z1]]`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::algebra::AlgebraDim;
use crate::error::{Error, Result};
use crate::jack::Spectrum;

pub type ComplexMatrix = DMatrix<Complex64>;

const SELF_ADJOINT_TOL: f64 = 1e-12;

// (left plane, right plane, sign, result plane)
const REAL_TABLE: &[(usize, usize, f64, usize)] = &[(0, 0, 1.0, 0)];
const COMPLEX_TABLE: &[(usize, usize, f64, usize)] = &[(0, 0, 1.0, 0), (0, 1, 1.0, 1), (1, 0, 1.0, 1), (1, 1, -1.0, 0)];
const QUATERNION_TABLE: &[(usize, usize, f64, usize)] = &[
    (0, 0, 1.0, 0),
    (0, 1, 1.0, 1),
    (0, 2, 1.0, 2),
    (0, 3, 1.0, 3),
    (1, 0, 1.0, 1),
    (2, 0, 1.0, 2),
    (3, 0, 1.0, 3),
    (1, 1, -1.0, 0),
    (2, 2, -1.0, 0),
    (3, 3, -1.0, 0),
    (1, 2, 1.0, 3),
    (2, 1, -1.0, 3),
    (2, 3, 1.0, 1),
    (3, 2, -1.0, 1),
    (3, 1, 1.0, 2),
    (1, 3, -1.0, 2),
];

fn product_table(beta: AlgebraDim) -> Result<&'static [(usize, usize, f64, usize)]> {
    match beta {
        AlgebraDim::Real => Ok(REAL_TABLE),
        AlgebraDim::Complex => Ok(COMPLEX_TABLE),
        AlgebraDim::Quaternion => Ok(QUATERNION_TABLE),
        AlgebraDim::Octonion => Err(Error::UnsupportedAlgebra(8)),
    }
}

fn require_associative(beta: AlgebraDim) -> Result<()> {
    if beta.is_associative() {
        Ok(())
    } else {
        Err(Error::UnsupportedAlgebra(beta.beta()))
    }
}

/// A rectangular matrix over one of the division algebras.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraMatrix {
    beta: AlgebraDim,
    planes: Vec<DMatrix<f64>>,
}

impl AlgebraMatrix {
    pub fn from_planes(beta: AlgebraDim, planes: Vec<DMatrix<f64>>) -> Result<Self> {
        if planes.len() != beta.beta() as usize {
            return Err(Error::DimensionMismatch(format!(
                "planes: expected {} planes for beta={}, got {}",
                beta.beta(),
                beta,
                planes.len()
            )));
        }
        let shape = planes[0].shape();
        if let Some(bad) = planes.iter().position(|p| p.shape() != shape) {
            return Err(Error::DimensionMismatch(format!(
                "planes[{bad}] has shape {:?}, expected {shape:?}",
                planes[bad].shape()
            )));
        }
        if planes.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::Parameter("planes contain non-finite entries".into()));
        }
        Ok(AlgebraMatrix { beta, planes })
    }

    pub fn zeros(rows: usize, cols: usize, beta: AlgebraDim) -> Self {
        AlgebraMatrix { beta, planes: vec![DMatrix::zeros(rows, cols); beta.beta() as usize] }
    }

    pub fn identity(n: usize, beta: AlgebraDim) -> Self {
        Self::from_real(DMatrix::identity(n, n), beta)
    }

    /// Embeds a real matrix (all non-real planes zero).
    pub fn from_real(real: DMatrix<f64>, beta: AlgebraDim) -> Self {
        let mut out = Self::zeros(real.nrows(), real.ncols(), beta);
        out.planes[0] = real;
        out
    }

    pub fn rows(&self) -> usize {
        self.planes[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.planes[0].ncols()
    }

    pub fn beta(&self) -> AlgebraDim {
        self.beta
    }

    pub fn planes(&self) -> &[DMatrix<f64>] {
        &self.planes
    }

    pub fn plane(&self, t: usize) -> &DMatrix<f64> {
        &self.planes[t]
    }

    pub fn into_planes(self) -> Vec<DMatrix<f64>> {
        self.planes
    }

    pub fn conj_transpose(&self) -> Self {
        let planes =
            self.planes.iter().enumerate().map(|(t, p)| if t == 0 { p.transpose() } else { -p.transpose() }).collect();
        AlgebraMatrix { beta: self.beta, planes }
    }

    pub fn mul(&self, rhs: &AlgebraMatrix) -> Result<AlgebraMatrix> {
        if self.beta != rhs.beta {
            return Err(Error::DimensionMismatch(format!("cannot multiply beta={} by beta={}", self.beta, rhs.beta)));
        }
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let table = product_table(self.beta)?;
        let mut out = Self::zeros(self.rows(), rhs.cols(), self.beta);
        for &(p, q, sign, r) in table {
            out.planes[r].gemm(sign, &self.planes[p], &rhs.planes[q], 1.0);
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &AlgebraMatrix) -> Result<AlgebraMatrix> {
        if self.beta != rhs.beta || self.planes[0].shape() != rhs.planes[0].shape() {
            return Err(Error::DimensionMismatch("cannot add matrices of different shape or algebra".into()));
        }
        let planes = self.planes.iter().zip(&rhs.planes).map(|(a, b)| a + b).collect();
        Ok(AlgebraMatrix { beta: self.beta, planes })
    }

    pub fn scale(&self, c: f64) -> AlgebraMatrix {
        AlgebraMatrix { beta: self.beta, planes: self.planes.iter().map(|p| p * c).collect() }
    }

    /// Complex representation: the matrix itself for ℝ and ℂ, the `2n × 2m`
    /// block embedding for ℍ.
    pub fn to_complex(&self) -> Result<ComplexMatrix> {
        let (n, m) = (self.rows(), self.cols());
        let p = &self.planes;
        match self.beta {
            AlgebraDim::Real => Ok(p[0].map(|v| Complex64::new(v, 0.0))),
            AlgebraDim::Complex => Ok(ComplexMatrix::from_fn(n, m, |i, j| Complex64::new(p[0][(i, j)], p[1][(i, j)]))),
            AlgebraDim::Quaternion => Ok(ComplexMatrix::from_fn(2 * n, 2 * m, |i, j| {
                let (bi, i) = (i / n, i % n);
                let (bj, j) = (j / m, j % m);
                let z1 = Complex64::new(p[0][(i, j)], p[1][(i, j)]);
                let z2 = Complex64::new(p[2][(i, j)], p[3][(i, j)]);
                match (bi, bj) {
                    (0, 0) => z1,
                    (0, 1) => z2,
                    (1, 0) => -z2.conj(),
                    _ => z1.conj(),
                }
            })),
            AlgebraDim::Octonion => Err(Error::UnsupportedAlgebra(8)),
        }
    }

    /// Inverse of [`to_complex`](Self::to_complex). For ℍ the top block row
    /// is read; for ℝ the imaginary parts are dropped.
    pub fn from_complex(c: &ComplexMatrix, beta: AlgebraDim) -> Result<Self> {
        let planes = match beta {
            AlgebraDim::Real => vec![c.map(|z| z.re)],
            AlgebraDim::Complex => vec![c.map(|z| z.re), c.map(|z| z.im)],
            AlgebraDim::Quaternion => {
                if !c.nrows().is_multiple_of(2) || !c.ncols().is_multiple_of(2) {
                    return Err(Error::DimensionMismatch("quaternion embedding must have even dimensions".into()));
                }
                let (n, m) = (c.nrows() / 2, c.ncols() / 2);
                let z1 = c.view((0, 0), (n, m));
                let z2 = c.view((0, m), (n, m));
                vec![z1.map(|z| z.re), z1.map(|z| z.im), z2.map(|z| z.re), z2.map(|z| z.im)]
            }
            AlgebraDim::Octonion => return Err(Error::UnsupportedAlgebra(8)),
        };
        Ok(AlgebraMatrix { beta, planes })
    }
}

/// A self-adjoint square matrix over one of the division algebras.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: AlgebraMatrix,
}

impl HermitianMatrix {
    /// Validates self-adjointness (plane 0 symmetric, the others
    /// antisymmetric, to `1e-12` relative to the largest entry) and then
    /// symmetrizes exactly.
    pub fn new(beta: AlgebraDim, planes: Vec<DMatrix<f64>>) -> Result<Self> {
        let inner = AlgebraMatrix::from_planes(beta, planes)?;
        if inner.rows() != inner.cols() {
            return Err(Error::DimensionMismatch(format!(
                "planes must be square (got {}x{})",
                inner.rows(),
                inner.cols()
            )));
        }
        let scale = inner.planes.iter().flat_map(|p| p.iter()).fold(1.0f64, |a, v| a.max(v.abs()));
        for (t, p) in inner.planes.iter().enumerate() {
            let sign = if t == 0 { 1.0 } else { -1.0 };
            let defect = (p - p.transpose() * sign).amax();
            if defect > SELF_ADJOINT_TOL * scale {
                let kind = if t == 0 { "symmetric" } else { "antisymmetric" };
                return Err(Error::NotSelfAdjoint(format!("planes[{t}] is not {kind} (defect {defect:e})")));
            }
        }
        let planes = inner
            .planes
            .iter()
            .enumerate()
            .map(|(t, p)| if t == 0 { (p + p.transpose()) * 0.5 } else { (p - p.transpose()) * 0.5 })
            .collect();
        Ok(HermitianMatrix { inner: AlgebraMatrix { beta, planes } })
    }

    /// Builds a Hermitian matrix from the upper triangle of `a`, reflecting
    /// it into the lower triangle.
    pub fn from_upper(a: &AlgebraMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", a.rows(), a.cols())));
        }
        let m = a.rows();
        let mut planes = a.planes.clone();
        for (t, p) in planes.iter_mut().enumerate() {
            let sign = if t == 0 { 1.0 } else { -1.0 };
            for i in 0..m {
                if t > 0 {
                    p[(i, i)] = 0.0;
                }
                for j in i + 1..m {
                    p[(j, i)] = sign * p[(i, j)];
                }
            }
        }
        Ok(HermitianMatrix { inner: AlgebraMatrix { beta: a.beta, planes } })
    }

    pub fn from_real(real: DMatrix<f64>, beta: AlgebraDim) -> Result<Self> {
        let mut planes = vec![DMatrix::zeros(real.nrows(), real.ncols()); beta.beta() as usize];
        planes[0] = real;
        Self::new(beta, planes)
    }

    pub fn identity(m: usize, beta: AlgebraDim) -> Self {
        Self::diagonal(&vec![1.0; m], beta)
    }

    pub fn diagonal(values: &[f64], beta: AlgebraDim) -> Self {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
        HermitianMatrix { inner: AlgebraMatrix::from_real(d, beta) }
    }

    fn from_complex_hermitian(c: &ComplexMatrix, beta: AlgebraDim) -> Result<Self> {
        Self::from_upper(&AlgebraMatrix::from_complex(c, beta)?)
    }

    pub fn m(&self) -> usize {
        self.inner.rows()
    }

    pub fn beta(&self) -> AlgebraDim {
        self.inner.beta
    }

    pub fn planes(&self) -> &[DMatrix<f64>] {
        &self.inner.planes
    }

    pub fn as_algebra(&self) -> &AlgebraMatrix {
        &self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.planes[0].trace()
    }

    pub fn scaled(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix { inner: self.inner.scale(c) }
    }

    pub fn to_complex(&self) -> Result<ComplexMatrix> {
        self.inner.to_complex()
    }

    /// Real eigenvalues in decreasing order.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let values = match self.beta() {
            AlgebraDim::Real => self.inner.planes[0].clone().symmetric_eigenvalues().as_slice().to_vec(),
            AlgebraDim::Complex => self.to_complex()?.symmetric_eigenvalues().as_slice().to_vec(),
            AlgebraDim::Quaternion => {
                let mut all = self.to_complex()?.symmetric_eigenvalues().as_slice().to_vec();
                all.sort_by(|a, b| b.total_cmp(a));
                all.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
            }
            AlgebraDim::Octonion => return Err(Error::UnsupportedAlgebra(8)),
        };
        Spectrum::new(values)
    }

    /// Applies a scalar function to the eigenvalues, keeping the eigenvectors.
    pub fn map_spectrum<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix> {
        require_associative(self.beta())?;
        let eig = SymmetricEigen::new(self.to_complex()?);
        let v = &eig.eigenvectors;
        let d = eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0));
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[j];
        }
        let c = scaled * v.adjoint();
        Self::from_complex_hermitian(&c, self.beta())
    }

    /// The spectrum, failing unless every eigenvalue is positive.
    pub fn positive_definite_spectrum(&self) -> Result<Spectrum> {
        let s = self.spectrum()?;
        if !(s.smallest() > 0.0) {
            return Err(Error::NotPositiveDefinite(s.smallest()));
        }
        Ok(s)
    }

    pub fn log_det(&self) -> Result<f64> {
        Ok(self.positive_definite_spectrum()?.log_det())
    }

    pub fn inverse(&self) -> Result<HermitianMatrix> {
        self.positive_definite_spectrum()?;
        self.map_spectrum(|l| 1.0 / l)
    }

    /// Positive semidefinite square root.
    pub fn sqrt(&self) -> Result<HermitianMatrix> {
        let s = self.spectrum()?;
        let floor = -1e-12 * s.max_abs().max(1.0);
        if s.smallest() < floor {
            return Err(Error::NotPositiveDefinite(s.smallest()));
        }
        self.map_spectrum(|l| l.max(0.0).sqrt())
    }

    /// `B* A B`.
    pub fn congruence(&self, b: &AlgebraMatrix) -> Result<HermitianMatrix> {
        let full = b.conj_transpose().mul(&self.inner)?.mul(b)?;
        Self::from_upper(&full)
    }
}

/// Real eigenvalues of `S` in decreasing order. For ℍ each eigenvalue of the
/// complex embedding appears twice; the `m` pair means are returned.
pub fn spectrum_of(s: &HermitianMatrix) -> Result<Spectrum> {
    s.spectrum()
}

/// Eigenvalues of `A B` for positive semidefinite `A` and `B`, computed as
/// the spectrum of `B^{1/2} A B^{1/2}`.
pub fn product_spectrum(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Spectrum> {
    if a.m() != b.m() || a.beta() != b.beta() {
        return Err(Error::DimensionMismatch(format!(
            "product of {}x{} (beta={}) and {}x{} (beta={})",
            a.m(),
            a.m(),
            a.beta(),
            b.m(),
            b.m(),
            b.beta()
        )));
    }
    let root = b.sqrt()?;
    a.congruence(root.as_algebra())?.spectrum()
}

/// `X* Θ⁻¹ X`, exactly self-adjoint by construction.
pub fn gram(x: &AlgebraMatrix, theta: &HermitianMatrix) -> Result<HermitianMatrix> {
    if theta.m() != x.rows() || theta.beta() != x.beta() {
        return Err(Error::DimensionMismatch(format!(
            "Theta is {}x{} but X has {} rows",
            theta.m(),
            theta.m(),
            x.rows()
        )));
    }
    theta.inverse()?.congruence(x)
}

/// Largest gap within the eigenvalue pairs of the complex embedding of a
/// quaternion Hermitian matrix, relative to its spectral radius.
pub fn quaternion_pairing_defect(s: &HermitianMatrix) -> Result<f64> {
    if s.beta() != AlgebraDim::Quaternion {
        return Err(Error::Parameter(format!("pairing defect needs beta=4, got {}", s.beta())));
    }
    let mut all = s.to_complex()?.symmetric_eigenvalues().as_slice().to_vec();
    all.sort_by(|a, b| b.total_cmp(a));
    let radius = all.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    Ok(all.chunks(2).map(|p| (p[0] - p[1]).abs()).fold(0.0, f64::max) / radius)
}
