//! Entanglement witnesses: the [`Witness`] type, expectation values and the
//! witness families (flip, isotropic k-witnesses, Choi and its dual,
//! `W_{d,k}`, Sixia-Yu `W(a)` and the Tang family `W(u)`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{
    flip_operator, hermiticity_deviation, kron_vec, max_entangled_projector, re, BipartiteDims,
    ComplexMatrix, ComplexVector, C64, HERMITIAN_TOL,
};
use crate::states::DensityOperator;

/// Hermitian operator on a bipartite space, optionally carrying an
/// analytically (or numerically) known rescaling constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    matrix: ComplexMatrix,
    dims: BipartiteDims,
    known_lambda: Option<f64>,
    label: String,
}

impl Witness {
    pub fn new(
        matrix: ComplexMatrix,
        dims: BipartiteDims,
        known_lambda: Option<f64>,
    ) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} witness for dims ({}, {})",
                matrix.nrows(),
                matrix.ncols(),
                dims.da(),
                dims.db()
            )));
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        if let Some(l) = known_lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::OutOfRange(format!(
                    "rescaling constant must be positive, got {l}"
                )));
            }
        }
        Ok(Self {
            matrix,
            dims,
            known_lambda,
            label: "custom".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn known_lambda(&self) -> Option<f64> {
        self.known_lambda
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `<x (x) y| W |x (x) y>` for unnormalized local vectors.
    pub fn product_expectation(&self, x: &ComplexVector, y: &ComplexVector) -> f64 {
        let v = kron_vec(x, y);
        (v.adjoint() * &self.matrix * &v)[(0, 0)].re / v.norm_squared()
    }
}

/// `Re Tr(rho W)`. The imaginary part must vanish to 1e-10.
pub fn expectation(w: &Witness, rho: &DensityOperator) -> Result<f64> {
    if w.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "witness dims {:?} vs state dims {:?}",
            w.dims(),
            rho.dims()
        )));
    }
    let a = w.matrix();
    let b = rho.matrix();
    let n = a.nrows();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr += a[(i, j)] * b[(j, i)];
        }
    }
    if tr.im.abs() > 1e-10 * tr.re.abs().max(1.0) {
        return Err(Error::Invariant(format!(
            "Tr(rho W) has imaginary part {:.3e}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// True iff `Tr(rho W) < 0`.
pub fn detects(w: &Witness, rho: &DensityOperator) -> Result<bool> {
    Ok(expectation(w, rho)? < 0.0)
}

/// Minimum of `<a (x) b|W|a (x) b>` over `samples` seeded random product
/// vectors. Nonnegative for a genuine witness.
pub fn product_positivity_min(w: &Witness, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |d: usize| {
        ComplexVector::from_fn(d, |_, _| {
            C64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        })
    };
    let (da, db) = (w.dims().da(), w.dims().db());
    (0..samples)
        .map(|_| {
            let x = draw(da);
            let y = draw(db);
            w.product_expectation(&x, &y)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Flip operator as a witness, rescaling constant 1.
pub fn flip_witness(m: usize) -> Result<Witness> {
    let dims = BipartiteDims::square(m)?;
    Ok(Witness::new(flip_operator(m), dims, Some(1.0))?.with_label("flip"))
}

/// `(k/m) I - P_m^+`, rescaling constant `1/m`.
pub fn iso_witness(m: usize, k: usize) -> Result<Witness> {
    let dims = BipartiteDims::square(m)?;
    if k == 0 || k >= m {
        return Err(Error::OutOfRange(format!(
            "isotropic witness needs 1 <= k <= m-1, got k={k}, m={m}"
        )));
    }
    let n = m * m;
    let w = ComplexMatrix::identity(n, n).scale(k as f64 / m as f64) - max_entangled_projector(m);
    Ok(Witness::new(w, dims, Some(1.0 / m as f64))?.with_label(format!("iso:{k}")))
}

/// Choi witness (variant 1) or its dual (variant 2) on `C^3 (x) C^3`.
pub fn choi_witness(variant: u8) -> Result<Witness> {
    let diag: [f64; 9] = match variant {
        1 => [1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0],
        2 => [1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0],
        _ => {
            return Err(Error::OutOfRange(format!(
                "Choi witness variant must be 1 or 2, got {variant}"
            )))
        }
    };
    let mut w = ComplexMatrix::zeros(9, 9);
    for (i, d) in diag.iter().enumerate() {
        w[(i, i)] = re(*d);
    }
    for (i, j) in [(0, 4), (0, 8), (4, 8)] {
        w[(i, j)] = re(-1.0);
        w[(j, i)] = re(-1.0);
    }
    Ok(Witness::new(w, BipartiteDims::square(3)?, Some(1.0))?.with_label(format!("choi{variant}")))
}

/// Conjectured rescaling constant `C_{d,k}` of `W_{d,k}`; the `k = d-2`
/// case takes precedence.
pub fn conjectured_cdk(d: usize, k: usize) -> Result<f64> {
    if d < 3 || k == 0 || k > d - 2 {
        return Err(Error::OutOfRange(format!(
            "C_(d,k) needs d >= 3 and 1 <= k <= d-2, got d={d}, k={k}"
        )));
    }
    let half = (d - k) as f64 / 2.0;
    Ok(if k == d - 2 {
        1.0
    } else if d - 2 >= 2 * k {
        half
    } else {
        half - 0.25
    })
}

/// `W_{d,k} = sum_ij |i><j| (x) X_ij`, with `X_ii = (d-k-1)|i><i| + sum_{l=1..k} |i+l><i+l|`
/// and `X_ij = -|i><j|`, indices mod `d`.
pub fn wdk_witness(d: usize, k: usize) -> Result<Witness> {
    let c = conjectured_cdk(d, k)?;
    let dims = BipartiteDims::square(d)?;
    let mut w = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        w[(i * d + i, i * d + i)] += re((d - k - 1) as f64);
        for l in 1..=k {
            let s = (i + l) % d;
            w[(i * d + s, i * d + s)] += re(1.0);
        }
        for j in 0..d {
            if i != j {
                w[(i * d + i, j * d + j)] = re(-1.0);
            }
        }
    }
    Ok(Witness::new(w, dims, Some(c))?.with_label(format!("wdk:{d}:{k}")))
}

/// Prefactor `f(a) = 2 sqrt((a+2)[(1+8a)^2 + a^2 (1-a)])` of the Sixia-Yu witness.
pub fn sixia_yu_f(a: f64) -> f64 {
    2.0 * ((a + 2.0) * ((1.0 + 8.0 * a).powi(2) + a * a * (1.0 - a))).sqrt()
}

/// The real symmetric matrix `V(a)`.
pub fn sixia_yu_v(a: f64) -> Result<ComplexMatrix> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRange(format!(
            "Sixia-Yu parameter a={a} outside (0, 1)"
        )));
    }
    let q = (1.0 - a * a).sqrt();
    let s = 1.0 + 8.0 * a;
    let mut v = ComplexMatrix::zeros(9, 9);
    // 1-based (row, col) pairs, mirrored below
    let mut set = |i: usize, j: usize, x: f64| {
        v[(i - 1, j - 1)] = re(x);
        v[(j - 1, i - 1)] = re(x);
    };
    let v11 = -(1.0 + a) * s;
    set(1, 1, v11);
    set(6, 6, v11);
    let v13 = -(1.0 + 7.0 * a) * q;
    set(1, 3, v13);
    set(4, 6, v13);
    let v15 = 2.0 * (2.0 + a) * s;
    set(1, 5, v15);
    set(5, 9, v15);
    let v17 = -(1.0 + 9.0 * a) * q;
    set(1, 7, v17);
    set(3, 9, v17);
    set(1, 9, 3.0 * (1.0 + a) * s);
    let v22 = 2.0 + 19.0 * a + 15.0 * a * a;
    set(2, 2, v22);
    set(5, 5, v22);
    set(2, 8, (2.0 + 15.0 * a) * q);
    let v33 = (3.0 + a) * s;
    set(3, 3, v33);
    set(4, 4, v33);
    set(3, 7, -(1.0 - a) * s);
    let v77 = 2.0 + 17.0 * a + 17.0 * a * a;
    set(7, 7, v77);
    set(9, 9, v77);
    set(7, 9, (2.0 + 17.0 * a) * q);
    set(8, 8, -2.0 * a * s);
    Ok(v)
}

/// Closed form of `Tr(V(a) rho(a))` for the Horodecki 3x3 state.
pub fn sixia_yu_trace_closed_form(a: f64) -> f64 {
    2.0 * (2.0 + 33.0 * a + 145.0 * a * a + 63.0 * a.powi(3)) / (1.0 + 8.0 * a)
}

/// `W(a) = I - f(a) V(a)` with `f` exactly as stated. No rescaling constant
/// is attached.
pub fn sixia_yu_witness(a: f64) -> Result<Witness> {
    let v = sixia_yu_v(a)?;
    let w = ComplexMatrix::identity(9, 9) - v.scale(sixia_yu_f(a));
    Ok(Witness::new(w, BipartiteDims::square(3)?, None)?.with_label(format!("sixia-yu:{a}")))
}

/// Rescaling constant of the Tang witness, `sqrt(4 + u^2)`.
///
/// Attained by `a = (|0>, |1>)`, `b = (|2>, cos t |3> - sin t |0>)`, where
/// `A_12 = -2 cos t - u sin t`; multi-start optimization finds nothing lower.
pub fn tang_lambda(u: f64) -> f64 {
    (4.0 + u * u).sqrt()
}

/// Tang witness `W(u)` on `C^2 (x) C^4`.
pub fn tang_witness(u: f64) -> Result<Witness> {
    if !u.is_finite() {
        return Err(Error::OutOfRange(format!(
            "Tang parameter must be finite, got {u}"
        )));
    }
    let diag = [1.0 - u * u / 6.0, 1.0, 2.0, 1.0, u * u, 2.0, 2.0, 1.0];
    let mut w = ComplexMatrix::zeros(8, 8);
    for (i, d) in diag.iter().enumerate() {
        w[(i, i)] = re(*d);
    }
    for (i, j, x) in [
        (0, 5, -1.0),
        (1, 6, -2.0),
        (2, 4, u),
        (2, 7, -2.0),
        (4, 7, -u),
    ] {
        w[(i, j)] = re(x);
        w[(j, i)] = re(x);
    }
    Ok(
        Witness::new(w, BipartiteDims::new(2, 4)?, Some(tang_lambda(u)))?
            .with_label(format!("tang:{u}")),
    )
}

/// Closed form of `Tr[W(u) rho(b)]` for the Horodecki 2x4 state.
pub fn tang_trace_closed_form(b: f64, u: f64) -> f64 {
    (3.0 - 3.0 * b - 6.0 * u * (1.0 - b * b).sqrt() + 3.0 * u * u + 2.0 * b * u * u)
        / (6.0 + 42.0 * b)
}

/// Interval `[u1, u2]` of `u` for which `W(u)` detects the 2x4 Horodecki state `rho(b)`.
pub fn tang_detection_range(b: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::OutOfRange(format!(
            "Horodecki parameter b={b} outside (0, 1)"
        )));
    }
    let c = 3.0 * (1.0 - b * b).sqrt();
    let s = (3.0 * b * (1.0 - b)).sqrt();
    let u1 = (c - s) / (3.0 + 2.0 * b);
    let u2 = if b < 12.0 / 37.0 {
        1.0
    } else {
        (c + s) / (3.0 + 2.0 * b)
    };
    Ok((u1, u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_spectrum;
    use crate::states::{epsilon_state, horodecki_2x4, horodecki_3x3, isotropic_state};

    #[test]
    fn identity_expectation_is_one() {
        let dims = BipartiteDims::square(3).unwrap();
        let w = Witness::new(ComplexMatrix::identity(9, 9), dims, None).unwrap();
        let rho = epsilon_state(0.7).unwrap();
        assert!((expectation(&w, &rho).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expectation_checks_dimensions() {
        let w = iso_witness(2, 1).unwrap();
        let rho = isotropic_state(3, 0.5).unwrap();
        assert!(matches!(
            expectation(&w, &rho),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn iso_witness_detection_and_spectrum() {
        let w = iso_witness(3, 1).unwrap();
        let rho = isotropic_state(3, 2.0 / 3.0).unwrap();
        assert!((expectation(&w, &rho).unwrap() + 1.0 / 3.0).abs() < 1e-14);
        assert!(detects(&w, &isotropic_state(3, 0.5).unwrap()).unwrap());
        assert!(!detects(&w, &isotropic_state(3, 0.2).unwrap()).unwrap());

        for m in 2..=4 {
            for k in 1..m {
                let s = hermitian_spectrum(iso_witness(m, k).unwrap().matrix()).unwrap();
                let top = k as f64 / m as f64;
                assert!(s.values[..m * m - 1]
                    .iter()
                    .all(|v| (v - top).abs() < 1e-12));
                assert!((s.min() - (top - 1.0)).abs() < 1e-12);
            }
        }
        assert!(iso_witness(3, 0).is_err());
        assert!(iso_witness(3, 3).is_err());
        assert_eq!(iso_witness(4, 2).unwrap().known_lambda(), Some(0.25));
    }

    #[test]
    fn iso_witness_for_qubits() {
        let w = iso_witness(2, 1).unwrap();
        let expected = ComplexMatrix::identity(4, 4).scale(0.5) - max_entangled_projector(2);
        assert_eq!(w.matrix(), &expected);
    }

    #[test]
    fn choi_diagonals() {
        let d1: Vec<f64> = choi_witness(1)
            .unwrap()
            .matrix()
            .diagonal()
            .iter()
            .map(|z| z.re)
            .collect();
        assert_eq!(d1, vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0]);
        let d2: Vec<f64> = choi_witness(2)
            .unwrap()
            .matrix()
            .diagonal()
            .iter()
            .map(|z| z.re)
            .collect();
        assert_eq!(d2, vec![1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        assert!(choi_witness(3).is_err());
    }

    #[test]
    fn choi_does_not_detect_separable_epsilon_point() {
        let rho = epsilon_state(1.0).unwrap();
        assert!(!detects(&choi_witness(1).unwrap(), &rho).unwrap());
        assert!(!detects(&choi_witness(2).unwrap(), &rho).unwrap());
    }

    #[test]
    fn wdk_generalizes_choi() {
        assert_eq!(
            wdk_witness(3, 1).unwrap().matrix(),
            choi_witness(1).unwrap().matrix()
        );
        assert!(wdk_witness(4, 3).is_err());
        assert!(wdk_witness(4, 0).is_err());
        assert!(wdk_witness(2, 1).is_err());
    }

    #[test]
    fn conjectured_constants() {
        assert_eq!(conjectured_cdk(3, 1).unwrap(), 1.0);
        assert_eq!(conjectured_cdk(4, 1).unwrap(), 1.5);
        assert_eq!(conjectured_cdk(4, 2).unwrap(), 1.0);
        assert_eq!(conjectured_cdk(5, 1).unwrap(), 2.0);
        assert_eq!(conjectured_cdk(5, 2).unwrap(), 1.25);
        assert_eq!(conjectured_cdk(5, 3).unwrap(), 1.0);
        assert_eq!(conjectured_cdk(6, 2).unwrap(), 2.0);
        assert_eq!(conjectured_cdk(6, 3).unwrap(), 1.25);
        assert_eq!(wdk_witness(5, 2).unwrap().known_lambda(), Some(1.25));
    }

    #[test]
    fn sixia_yu_entries_at_half() {
        let v = sixia_yu_v(0.5).unwrap();
        assert_eq!(v[(0, 0)].re, -7.5);
        assert_eq!(v[(7, 7)].re, -5.0);
        assert_eq!(v, v.transpose());
        assert!(v.iter().all(|z| z.im == 0.0));
        assert!(sixia_yu_v(1.0).is_err());
    }

    #[test]
    fn sixia_yu_transcription_oracle() {
        for i in 1..10 {
            let a = i as f64 / 10.0;
            let v = sixia_yu_v(a).unwrap();
            let rho = horodecki_3x3(a).unwrap();
            let tr: f64 = (0..9)
                .flat_map(|r| (0..9).map(move |c| (r, c)))
                .map(|(r, c)| (v[(r, c)] * rho.matrix()[(c, r)]).re)
                .sum();
            assert!(
                (tr - sixia_yu_trace_closed_form(a)).abs() < 1e-10,
                "a = {a}"
            );
        }
        assert!((sixia_yu_trace_closed_form(0.5) - 25.05).abs() < 1e-12);
    }

    #[test]
    fn sixia_yu_as_defined_is_not_block_positive() {
        // The normalization f(a) as defined yields an operator with strongly
        // negative product expectations; kept as is, not corrected.
        let w = sixia_yu_witness(0.5).unwrap();
        assert!(product_positivity_min(&w, 200, 3) < -1.0);
    }

    #[test]
    fn tang_entries_and_trace_formula() {
        let w = tang_witness(0.7).unwrap();
        assert!((w.matrix()[(0, 0)].re - (1.0 - 0.49 / 6.0)).abs() < 1e-15);
        assert!((w.matrix()[(4, 4)].re - 0.49).abs() < 1e-15);
        assert_eq!(w.matrix(), &w.matrix().transpose());
        for bi in 1..=5 {
            for ui in 0..5 {
                let b = bi as f64 / 6.0;
                let u = ui as f64 / 4.0;
                let rho = horodecki_2x4(b).unwrap();
                let tr = expectation(&tang_witness(u).unwrap(), &rho).unwrap();
                assert!((tr - tang_trace_closed_form(b, u)).abs() < 1e-10);
            }
        }
        assert!(tang_trace_closed_form(0.5, 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((tang_trace_closed_form(0.5, 0.0) - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn tang_range_values() {
        let (u1, u2) = tang_detection_range(0.5).unwrap();
        assert!((u1 - 3f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((u2 - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(tang_detection_range(0.1).unwrap().1, 1.0);
        assert!(tang_detection_range(0.0).is_err());
    }

    #[test]
    fn tang_range_sign_scan() {
        for b in [0.2, 0.5, 0.8] {
            let (u1, u2) = tang_detection_range(b).unwrap();
            for i in 0..9 {
                let u = -0.2 + 1.4 * i as f64 / 8.0;
                let t = tang_trace_closed_form(b, u);
                if u > u1 && u < u2 {
                    assert!(t < 0.0, "b={b} u={u} t={t}");
                } else if u < u1 || u > u2 {
                    // b < 12/37 caps u2 at 1 while the trace is still negative above it
                    assert!(t >= 0.0 || (b < 12.0 / 37.0 && u > u2), "b={b} u={u} t={t}");
                }
            }
        }
    }

    #[test]
    fn genuine_witnesses_are_block_positive() {
        let ws = [
            flip_witness(3).unwrap(),
            iso_witness(3, 1).unwrap(),
            iso_witness(4, 2).unwrap(),
            choi_witness(1).unwrap(),
            choi_witness(2).unwrap(),
            wdk_witness(4, 1).unwrap(),
            wdk_witness(5, 3).unwrap(),
            tang_witness(0.5).unwrap(),
        ];
        for w in &ws {
            assert!(
                product_positivity_min(w, 1000, 17) >= -1e-9,
                "{}",
                w.label()
            );
        }
    }

    #[test]
    fn witness_rejects_non_hermitian() {
        let dims = BipartiteDims::square(2).unwrap();
        let mut m = ComplexMatrix::identity(4, 4);
        m[(0, 1)] = re(1.0);
        assert!(matches!(
            Witness::new(m, dims, None),
            Err(Error::NotHermitian(_))
        ));
        assert!(Witness::new(ComplexMatrix::identity(4, 4), dims, Some(-1.0)).is_err());
    }
}
