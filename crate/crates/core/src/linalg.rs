//! Small dense complex linear algebra used by the simulator and the test oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];
pub type DenseMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// Largest entry of `|U U† - 1|` for a square matrix given row-major.
pub fn unitarity_deviation<const D: usize>(u: &[[C64; D]; D]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..D {
        for c in 0..D {
            let acc: C64 = u[r].iter().zip(&u[c]).map(|(a, b)| a * b.conj()).sum();
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn mat2_to_dense(a: &Mat2) -> DenseMatrix {
    DenseMatrix::from_fn(2, 2, |r, c| a[r][c])
}

pub fn mat4_to_dense(a: &Mat4) -> DenseMatrix {
    DenseMatrix::from_fn(4, 4, |r, c| a[r][c])
}

/// Kronecker product `a ⊗ b`; the left factor owns the most significant index bits.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DenseMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Trace distance `½ Σ |λ|` between two Hermitian matrices of equal size.
pub fn trace_distance(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let diff = a - b;
    // Symmetrize away round-off so the Hermitian solver sees an exact Hermitian input.
    let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigenvalues();
    0.5 * eig.iter().map(|v| v.abs()).sum::<f64>()
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}
