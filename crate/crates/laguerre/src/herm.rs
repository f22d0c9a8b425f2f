//! Hermitian matrices with a lazily computed, cached spectral decomposition.
//!
//! Every law and every hypergeometric function in this crate depends on its
//! matrix argument only through the spectrum, so the eigendecomposition is the
//! one expensive operation worth caching. The cache sits behind a `OnceLock`:
//! concurrent first access may duplicate the computation but can never tear.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative conjugate-symmetry tolerance accepted on construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues (descending) and the matching unitary eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// An `m x m` complex Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: DMatrix<Complex64>,
    spectrum: OnceLock<Spectrum>,
}

impl HermitianMatrix {
    /// Wrap a matrix, verifying conjugate symmetry to [`HERMITICITY_TOL`]
    /// relative to the largest entry; the stored matrix is re-Hermitized as
    /// `(A + A*)/2`.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        assert_eq!(mat.nrows(), mat.ncols(), "matrix must be square");
        let scale = mat.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        let adj = mat.adjoint();
        let dev = (&mat - &adj).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if dev > HERMITICITY_TOL * scale {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian (deviation {dev:e}, scale {scale:e})"
            )));
        }
        let sym = (&mat + &adj) * Complex64::new(0.5, 0.0);
        Ok(HermitianMatrix {
            mat: sym,
            spectrum: OnceLock::new(),
        })
    }

    /// Hermitian matrix from any complex matrix without a symmetry check,
    /// by explicit symmetrization. Used by the simulator where states are
    /// re-Hermitized every step.
    pub fn symmetrize(mat: DMatrix<Complex64>) -> Self {
        let adj = mat.adjoint();
        HermitianMatrix {
            mat: (&mat + adj) * Complex64::new(0.5, 0.0),
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let m = diag.len();
        let mat = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        HermitianMatrix {
            mat,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zero(m: usize) -> Self {
        HermitianMatrix {
            mat: DMatrix::zeros(m, m),
            spectrum: OnceLock::new(),
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::scaled_identity(m, 1.0)
    }

    pub fn scaled_identity(m: usize, c: f64) -> Self {
        Self::from_diag(&vec![c; m])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Eigendecomposition, computed on first use and cached.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let m = self.dim();
            if m == 0 {
                return Spectrum {
                    eigenvalues: Vec::new(),
                    vectors: DMatrix::zeros(0, 0),
                };
            }
            let eig = SymmetricEigen::new(self.mat.clone());
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
            let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
            Spectrum {
                eigenvalues,
                vectors,
            }
        })
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("empty matrix")
    }

    /// Determinant as a product of eigenvalues (real for Hermitian matrices).
    pub fn det(&self) -> f64 {
        self.eigenvalues().iter().product()
    }

    pub fn log_det(&self) -> Result<f64> {
        let mut s = 0.0;
        for &l in self.eigenvalues() {
            if l <= 0.0 {
                return Err(Error::NotPsd { min_eig: l });
            }
            s += l.ln();
        }
        Ok(s)
    }

    /// Trace of the inverse; errors if any eigenvalue is at or below `floor`.
    pub fn trace_inverse(&self, floor: f64) -> Result<f64> {
        let mut s = 0.0;
        for &l in self.eigenvalues() {
            if l <= floor {
                return Err(Error::SingularState {
                    step: 0,
                    min_eig: l,
                });
            }
            s += 1.0 / l;
        }
        Ok(s)
    }

    /// Apply `f` to every eigenvalue: `U diag(f(lambda)) U*`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let sp = self.spectrum();
        let m = self.dim();
        let d = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                Complex64::new(f(sp.eigenvalues[i]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let mat = &sp.vectors * d * sp.vectors.adjoint();
        HermitianMatrix::symmetrize(mat)
    }

    /// PSD square root of the eigenvalue-clamped matrix: negatives are set to
    /// zero before the root, matching the `X+` regularization of the SDE.
    pub fn sqrt_clamped(&self) -> HermitianMatrix {
        self.map_eigenvalues(|l| l.max(0.0).sqrt())
    }

    /// `U self U*` for unitary `U`.
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> HermitianMatrix {
        HermitianMatrix::symmetrize(u * &self.mat * u.adjoint())
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            mat: &self.mat + &other.mat,
            spectrum: OnceLock::new(),
        }
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix {
            mat: &self.mat * Complex64::new(c, 0.0),
            spectrum: OnceLock::new(),
        }
    }

    /// Hermitian symmetrization `sqrt(x) y sqrt(x)`; its spectrum equals that
    /// of the (generally non-Hermitian) product `x y` for PSD `x`.
    pub fn symmetric_product(x: &HermitianMatrix, y: &HermitianMatrix) -> HermitianMatrix {
        let sx = x.sqrt_clamped();
        HermitianMatrix::symmetrize(sx.matrix() * y.matrix() * sx.matrix())
    }

    /// `tr(self * other)` — real for Hermitian factors.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                s += self.mat[(i, k)] * other.mat[(k, i)];
            }
        }
        s.re
    }
}

/// Haar-ish random unitary via QR of a complex Ginibre matrix, with the phase
/// convention that makes R's diagonal positive.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Solve `(I + 2tu) w = u` and return `w` — the matrix the Laplace-transform
/// exponent needs, obtained by a linear solve rather than an explicit inverse.
pub fn laplace_weight_matrix(u: &HermitianMatrix, t: f64) -> Result<DMatrix<Complex64>> {
    let m = u.dim();
    let a = DMatrix::identity(m, m) + u.matrix() * Complex64::new(2.0 * t, 0.0);
    let lu = a.lu();
    lu.solve(u.matrix())
        .ok_or_else(|| Error::Domain("I + 2tu is singular".into()))
}

/// `det(I + 2tu)` computed from the eigenvalues of `u`.
pub fn det_i_plus_2tu(u: &HermitianMatrix, t: f64) -> f64 {
    u.eigenvalues().iter().map(|&l| 1.0 + 2.0 * t * l).product()
}

/// Convenience: real diagonal vector of a complex matrix.
pub fn real_diag(mat: &DMatrix<Complex64>) -> DVector<f64> {
    DVector::from_fn(mat.nrows(), |i, _| mat[(i, i)].re)
}
