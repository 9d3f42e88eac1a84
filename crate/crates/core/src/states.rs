//! Pure states, density operators, the Schmidt decomposition and the state
//! families used throughout the crate.
//!
//! Family constructors use 0-based basis labels; cyclic shifts wrap modulo
//! the local dimension.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_spectrum, max_entangled_projector, re, trace, BipartiteDims, ComplexMatrix,
    ComplexVector, C64, HERMITIAN_TOL, PSD_TOL,
};

/// Tolerance on the trace of a density operator.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on the norm of a pure state.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    dims: BipartiteDims,
}

impl PureState {
    /// Wraps an already normalized amplitude vector.
    pub fn new(amplitudes: ComplexVector, dims: BipartiteDims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector of length {} for dims ({}, {})",
                amplitudes.len(),
                dims.da(),
                dims.db()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes `amplitudes` first; fails on the zero vector.
    pub fn from_unnormalized(amplitudes: ComplexVector, dims: BipartiteDims) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        Self::new(amplitudes.unscale(norm), dims)
    }

    /// Product state `|x> (x) |y>` (normalized).
    pub fn product(x: &ComplexVector, y: &ComplexVector) -> Result<Self> {
        let dims = BipartiteDims::new(x.len(), y.len())?;
        Self::from_unnormalized(linalg::kron_vec(x, y), dims)
    }

    /// `(1/sqrt m) sum_i |ii>`.
    pub fn max_entangled(m: usize) -> Result<Self> {
        let dims = BipartiteDims::square(m)?;
        let mut v = ComplexVector::zeros(m * m);
        for i in 0..m {
            v[i * m + i] = re(1.0);
        }
        Self::from_unnormalized(v, dims)
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// `|<psi|phi>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// The amplitudes reshaped as a `dA x dB` matrix, `M[i][k] = psi[i dB + k]`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        let db = self.dims.db();
        ComplexMatrix::from_fn(self.dims.da(), db, |i, k| self.amplitudes[i * db + k])
    }

    pub fn density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            matrix: m,
            dims: self.dims,
        }
    }
}

/// Trace-one positive semidefinite operator on `C^dA (x) C^dB`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: BipartiteDims,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, dims: BipartiteDims) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims ({}, {})",
                matrix.nrows(),
                matrix.ncols(),
                dims.da(),
                dims.db()
            )));
        }
        let spec = hermitian_spectrum(&matrix).map_err(|e| Error::InvalidState(e.to_string()))?;
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        if spec.min() < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {} is negative",
                spec.min()
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Normalizes by the trace before validating.
    pub fn from_unnormalized(matrix: ComplexMatrix, dims: BipartiteDims) -> Result<Self> {
        let tr = trace(&matrix).re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::InvalidState(format!(
                "cannot normalize matrix with trace {tr}"
            )));
        }
        Self::new(matrix.unscale(tr), dims)
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            matrix: ComplexMatrix::identity(n, n).unscale(n as f64),
            dims,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.matrix * &self.matrix)).re
    }

    /// Convex combination `p self + (1 - p) other`.
    pub fn mix(&self, other: &DensityOperator, p: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(
                "mixing states of different dimensions".into(),
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!(
                "mixing weight {p} outside [0, 1]"
            )));
        }
        Self::new(
            self.matrix.scale(p) + other.matrix.scale(1.0 - p),
            self.dims,
        )
    }
}

/// Schmidt coefficients with the two local bases (as matrix columns).
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub mu: Vec<f64>,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
}

impl SchmidtForm {
    /// `sum_i sqrt(mu_i) a_i (x) b_i`.
    pub fn reconstruct(&self) -> ComplexVector {
        let (da, db) = (self.basis_a.nrows(), self.basis_b.nrows());
        let mut v = ComplexVector::zeros(da * db);
        for (i, &mu) in self.mu.iter().enumerate() {
            let a = self.basis_a.column(i).clone_owned();
            let b = self.basis_b.column(i).clone_owned();
            v += linalg::kron_vec(&a, &b).scale(mu.max(0.0).sqrt());
        }
        v
    }
}

/// Schmidt decomposition through the SVD of the coefficient matrix.
pub fn schmidt(psi: &PureState) -> SchmidtForm {
    let m = psi.dims().m();
    let svd = psi.coefficient_matrix().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(m);
    let mu = order
        .iter()
        .map(|&i| svd.singular_values[i].powi(2))
        .collect();
    let basis_a = ComplexMatrix::from_fn(u.nrows(), m, |r, c| u[(r, order[c])]);
    // psi = sum s_i u_i (x) conj(v_i), and row i of V^T is v_i^dagger.
    let basis_b = ComplexMatrix::from_fn(v_t.ncols(), m, |r, c| v_t[(order[c], r)]);
    SchmidtForm {
        mu,
        basis_a,
        basis_b,
    }
}

/// `(1-f)/(m^2-1) (I - P) + f P`, with `P` the maximally entangled projector.
pub fn isotropic_state(m: usize, f: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange(format!(
            "isotropic fidelity {f} outside [0, 1]"
        )));
    }
    let dims = BipartiteDims::square(m)?;
    let n = m * m;
    let p = max_entangled_projector(m);
    let noise = (ComplexMatrix::identity(n, n) - &p).scale((1.0 - f) / (n as f64 - 1.0));
    DensityOperator::new(noise + p.scale(f), dims)
}

/// The two-parameter-free epsilon family on `C^3 (x) C^3`.
pub fn epsilon_state(eps: f64) -> Result<DensityOperator> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let dims = BipartiteDims::square(3)?;
    let mut m = max_entangled_projector(3);
    for i in 0..3 {
        m[(i * 3 + (i + 1) % 3, i * 3 + (i + 1) % 3)] += re(eps / 3.0);
        m[(i * 3 + (i + 2) % 3, i * 3 + (i + 2) % 3)] += re(1.0 / (3.0 * eps));
    }
    DensityOperator::new(m.scale(epsilon_normalization(eps)), dims)
}

/// `1 / (1 + eps + 1/eps)`.
pub fn epsilon_normalization(eps: f64) -> f64 {
    1.0 / (1.0 + eps + 1.0 / eps)
}

/// Horodecki PPT entangled states on `C^3 (x) C^3`.
pub fn horodecki_3x3(a: f64) -> Result<DensityOperator> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRange(format!(
            "Horodecki parameter a={a} outside (0, 1)"
        )));
    }
    let dims = BipartiteDims::square(3)?;
    let mut m = ComplexMatrix::from_diagonal_element(9, 9, re(a));
    for &i in &[0, 4, 8] {
        for &j in &[0, 4, 8] {
            m[(i, j)] = re(a);
        }
    }
    m[(6, 6)] = re(0.5 * (1.0 + a));
    m[(8, 8)] = re(0.5 * (1.0 + a));
    let off = 0.5 * (1.0 - a * a).sqrt();
    m[(6, 8)] = re(off);
    m[(8, 6)] = re(off);
    DensityOperator::new(m.unscale(8.0 * a + 1.0), dims)
}

/// Horodecki PPT entangled states on `C^2 (x) C^4` (A is the qubit).
pub fn horodecki_2x4(b: f64) -> Result<DensityOperator> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::OutOfRange(format!(
            "Horodecki parameter b={b} outside (0, 1)"
        )));
    }
    let dims = BipartiteDims::new(2, 4)?;
    let mut m = ComplexMatrix::from_diagonal_element(8, 8, re(b));
    for (i, j) in [(0, 5), (1, 6), (2, 7)] {
        m[(i, j)] = re(b);
        m[(j, i)] = re(b);
    }
    m[(4, 4)] = re(0.5 * (1.0 + b));
    m[(7, 7)] = re(0.5 * (1.0 + b));
    let off = 0.5 * (1.0 - b * b).sqrt();
    m[(4, 7)] = re(off);
    m[(7, 4)] = re(off);
    DensityOperator::new(m.unscale(7.0 * b + 1.0), dims)
}

/// Normalization `d^2 - 2 + gamma^2 + gamma^-2` of [`gamma_state`].
pub fn gamma_normalization(d: usize, gamma: f64) -> f64 {
    (d * d) as f64 - 2.0 + gamma * gamma + 1.0 / (gamma * gamma)
}

/// The `gamma` family on `C^d (x) C^d`, `d >= 3`.
pub fn gamma_state(d: usize, gamma: f64) -> Result<DensityOperator> {
    if d < 3 {
        return Err(Error::OutOfRange(format!(
            "gamma family needs d >= 3, got {d}"
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let dims = BipartiteDims::square(d)?;
    let df = d as f64;
    let a = (gamma * gamma + df - 1.0) / df;
    let b = (1.0 / (gamma * gamma) + df - 1.0) / df;
    let n = d * d;
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..d {
        // diagonal block S^j A_11 S^-j: 1 at j, a at j+1, b at j-1, 1 elsewhere
        for l in 0..d {
            let w = if l == (j + 1) % d {
                a
            } else if l == (j + d - 1) % d {
                b
            } else {
                1.0
            };
            m[(j * d + l, j * d + l)] = re(w);
        }
    }
    for i in 0..d {
        for j in 0..d {
            if i != j {
                m[(i * d + i, j * d + j)] = re(1.0);
            }
        }
    }
    DensityOperator::new(m.unscale(gamma_normalization(d, gamma)), dims)
}

fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Normalized complex-Gaussian vector; deterministic per seed.
pub fn random_pure(dims: BipartiteDims, seed: u64) -> PureState {
    let mut rng = seeded_rng(seed);
    let v = ComplexVector::from_fn(dims.total(), |_, _| complex_normal(&mut rng));
    PureState::from_unnormalized(v, dims).expect("gaussian vector is nonzero")
}

/// `G G^dagger / Tr(G G^dagger)` for a seeded Gaussian `G` with `rank` columns.
pub fn random_density(dims: BipartiteDims, rank: usize, seed: u64) -> Result<DensityOperator> {
    let n = dims.total();
    if rank == 0 || rank > n {
        return Err(Error::OutOfRange(format!("rank {rank} outside 1..={n}")));
    }
    let mut rng = seeded_rng(seed);
    let g = ComplexMatrix::from_fn(n, rank, |_, _| complex_normal(&mut rng));
    DensityOperator::from_unnormalized(&g * g.adjoint(), dims)
}

/// Checks every density-operator invariant at the given tolerance.
pub fn validate_density(rho: &DensityOperator, tol: f64) -> Result<()> {
    let dev = linalg::hermiticity_deviation(rho.matrix());
    if dev > tol.max(HERMITIAN_TOL) {
        return Err(Error::NotHermitian(dev));
    }
    let tr = trace(rho.matrix()).re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    let min = hermitian_spectrum(rho.matrix())?.min();
    if min < -tol {
        return Err(Error::InvalidState(format!("minimum eigenvalue {min}")));
    }
    Ok(())
}
