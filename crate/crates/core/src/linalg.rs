//! Dense complex linear algebra with bipartite index structure.
//!
//! Composite indices are A-major: basis vector `|i>|k>` of `C^dA (x) C^dB`
//! sits at position `i * dB + k`. Every constructor in the crate relies on
//! this ordering.
//!
//! Eigendecompositions and singular values come from `nalgebra`; the index
//! rearrangements (partial transpose, realignment, partial trace) are done
//! here directly on the dense storage.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default Hermiticity tolerance, relative to the largest entry magnitude.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Default lower limit on eigenvalues for a matrix to count as PSD.
pub const PSD_TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Local dimensions of a bipartite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct BipartiteDims {
    da: usize,
    db: usize,
}

impl BipartiteDims {
    pub fn new(da: usize, db: usize) -> Result<Self> {
        if da < 2 || db < 2 {
            return Err(Error::OutOfRange(format!(
                "subsystem dimensions must be >= 2, got ({da}, {db})"
            )));
        }
        Ok(Self { da, db })
    }

    pub fn square(m: usize) -> Result<Self> {
        Self::new(m, m)
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    /// Schmidt rank cap `min(dA, dB)`.
    pub fn m(&self) -> usize {
        self.da.min(self.db)
    }

    pub fn total(&self) -> usize {
        self.da * self.db
    }

    fn check_square(&self, rho: &ComplexMatrix) -> Result<()> {
        let n = self.total();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} for dims ({}, {}), got {}x{}",
                self.da,
                self.db,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(())
    }
}

impl TryFrom<[usize; 2]> for BipartiteDims {
    type Error = Error;

    fn try_from(v: [usize; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<BipartiteDims> for [usize; 2] {
    fn from(d: BipartiteDims) -> Self {
        [d.da, d.db]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(x: &ComplexVector, y: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(x.len() * y.len());
    for (i, xi) in x.iter().enumerate() {
        for (k, yk) in y.iter().enumerate() {
            out[i * y.len() + k] = xi * yk;
        }
    }
    out
}

/// Transposes the A factor: block `(i, j)` of the output is block `(j, i)`
/// of the input, blocks being `dB x dB`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    dims.check_square(rho)?;
    let (da, db) = (dims.da, dims.db);
    Ok(ComplexMatrix::from_fn(da * db, da * db, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        rho[(j * db + k, i * db + l)]
    }))
}

/// Realigned matrix `R[(i,k),(j,l)] = rho[(i,j),(k,l)]`, shape `dA^2 x dB^2`.
pub fn realign(rho: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    dims.check_square(rho)?;
    let (da, db) = (dims.da, dims.db);
    let mut out = ComplexMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out[(i * da + k, j * db + l)] = rho[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`realign`]: maps a `dA^2 x dB^2` matrix back to `dA dB x dA dB`.
pub fn unrealign(r: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    let (da, db) = (dims.da, dims.db);
    if r.nrows() != da * da || r.ncols() != db * db {
        return Err(Error::DimensionMismatch(format!(
            "expected {}x{} realigned matrix, got {}x{}",
            da * da,
            db * db,
            r.nrows(),
            r.ncols()
        )));
    }
    let n = da * db;
    Ok(ComplexMatrix::from_fn(n, n, |row, col| {
        let (i, j) = (row / db, row % db);
        let (k, l) = (col / db, col % db);
        r[(i * da + k, j * db + l)]
    }))
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: BipartiteDims,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    dims.check_square(rho)?;
    let (da, db) = (dims.da, dims.db);
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| rho[(i * db + k, i * db + l)]).sum()
        }),
    })
}

/// `F = sum_ij |i><j| (x) |j><i|` on `C^m (x) C^m`.
pub fn flip_operator(m: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(m * m, m * m);
    for i in 0..m {
        for j in 0..m {
            f[(i * m + j, j * m + i)] = ONE;
        }
    }
    f
}

/// Projector onto `(1/sqrt m) sum_i |ii>`.
pub fn max_entangled_projector(m: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(m * m, m * m);
    let w = re(1.0 / m as f64);
    for i in 0..m {
        for j in 0..m {
            p[(i * m + i, j * m + j)] = w;
        }
    }
    p
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
}

/// Largest entry magnitude, used to make tolerances relative.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |M - M^dagger|` divided by `max(1, max |M|)`.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev / max_abs(m).max(1.0)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_deviation(m) <= tol
}

pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    match hermitian_spectrum(m) {
        Ok(s) => s.values.last().is_none_or(|&v| v >= -tol),
        Err(_) => false,
    }
}

/// Eigenvalues (descending) and matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Spectrum> {
    hermitian_spectrum_tol(m, HERMITIAN_TOL)
}

pub fn hermitian_spectrum_tol(m: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    let dev = hermiticity_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(Spectrum { values, vectors })
}

/// Gram-Schmidt on the columns of `m`. Fails if the columns are (numerically)
/// linearly dependent.
pub(crate) fn orthonormalize_columns(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let mut q = m.clone();
    for c in 0..q.ncols() {
        for _ in 0..2 {
            for p in 0..c {
                let proj = q.column(p).dotc(&q.column(c));
                let col_p = q.column(p).clone_owned();
                let mut col_c = q.column_mut(c);
                col_c -= col_p * proj;
            }
        }
        let n = q.column(c).norm();
        if n < 1e-12 {
            return None;
        }
        q.column_mut(c).unscale_mut(n);
    }
    Some(q)
}

/// `max |G - I|` for the Gram matrix of the columns of `m`.
pub fn gram_deviation(m: &ComplexMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut dev: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    dev
}
