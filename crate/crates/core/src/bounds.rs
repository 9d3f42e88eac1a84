//! Concurrence of pure states and lower bounds for mixed states.
//!
//! Mixed-state bounds are returned unclamped: a negative value means the
//! criterion is silent for that state, and its size says by how much.
//! Clamping at zero only happens in [`BoundReport::best`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_spectrum, kron, partial_trace, partial_transpose, pauli_y, realign, singular_values,
    trace, trace_norm, ComplexMatrix, Subsystem, C64, ZERO,
};
use crate::states::{DensityOperator, PureState, SchmidtForm};
use crate::witnesses::{expectation, sixia_yu_f, sixia_yu_trace_closed_form, Witness};

/// `sqrt(2 / (m (m - 1)))`, the prefactor shared by the mixed-state bounds.
pub fn prefactor(m: usize) -> f64 {
    (2.0 / (m * (m - 1)) as f64).sqrt()
}

/// Largest pure-state concurrence on `C^m (x) C^m`: `sqrt(2 (m-1) / m)`.
pub fn concurrence_ceiling(m: usize) -> f64 {
    (2.0 * (m as f64 - 1.0) / m as f64).sqrt()
}

/// `C = sqrt(2 (1 - Tr rho_A^2))`.
pub fn concurrence_pure(psi: &PureState) -> f64 {
    let rho = psi.density();
    let rho_a = partial_trace(rho.matrix(), psi.dims(), Subsystem::A).expect("dims are consistent");
    let purity = trace(&(&rho_a * &rho_a)).re;
    (2.0 * (1.0 - purity)).max(0.0).sqrt()
}

/// `C = sqrt(2 sum_{k != l} mu_k mu_l)` from Schmidt coefficients.
pub fn concurrence_pure_schmidt(sf: &SchmidtForm) -> Result<f64> {
    let total: f64 = sf.mu.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "Schmidt coefficients sum to {total}"
        )));
    }
    let mut s = 0.0;
    for (k, mk) in sf.mu.iter().enumerate() {
        for (l, ml) in sf.mu.iter().enumerate() {
            if k != l {
                s += mk * ml;
            }
        }
    }
    Ok((2.0 * s).max(0.0).sqrt())
}

/// `C = 2 sqrt(<psi psi| P_-^{AA'} (x) P_-^{BB'} |psi psi>)`, with the
/// antisymmetric projectors acting across the two copies.
pub fn concurrence_pure_twocopy(psi: &PureState) -> f64 {
    let (da, db) = (psi.dims().da(), psi.dims().db());
    let amp = psi.amplitudes();
    let at = |a: usize, b: usize| amp[a * db + b];
    // two-copy tensor T[a,b,a',b'] = psi[a,b] psi[a',b']; Pi T is
    // (T - swap_A T - swap_B T + swap_AB T) / 4
    let mut value = C64::new(0.0, 0.0);
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    let t = at(a, b) * at(ap, bp);
                    let pi_t = (t - at(ap, b) * at(a, bp) - at(a, bp) * at(ap, b)
                        + at(ap, bp) * at(a, b))
                        * 0.25;
                    value += t.conj() * pi_t;
                }
            }
        }
    }
    2.0 * value.re.max(0.0).sqrt()
}

/// Eigenvector columns of `rho` scaled by the square roots of their
/// eigenvalues (negative round-off eigenvalues are clipped to zero).
fn subnormalized_eigenvectors(rho: &DensityOperator) -> Result<ComplexMatrix> {
    let spec = hermitian_spectrum(rho.matrix())?;
    let mut w = spec.vectors;
    for (c, &v) in spec.values.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        w.column_mut(c).scale_mut(s);
    }
    Ok(w)
}

/// `max{0, s1 - s2 - s3 - s4}` over the four largest singular values of
/// `T_ab = <w_a| op |w_b^*>`; missing singular values count as zero.
fn four_singular_value_term(w: &ComplexMatrix, op: &ComplexMatrix) -> f64 {
    let t = w.adjoint() * op * w.map(|z| z.conj());
    let mut s = singular_values(&t);
    s.resize(s.len().max(4), 0.0);
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

/// Wootters two-qubit concurrence.
pub fn wootters(rho: &DensityOperator) -> Result<f64> {
    let d = rho.dims();
    if d.da() != 2 || d.db() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Wootters formula needs a two-qubit state, got ({}, {})",
            d.da(),
            d.db()
        )));
    }
    let w = subnormalized_eigenvectors(rho)?;
    let yy = kron(&pauli_y(), &pauli_y());
    Ok(four_singular_value_term(&w, &yy))
}

/// Real antisymmetric generators `|j><k| - |k><j|`, `j < k`, in
/// lexicographic order.
pub fn so_generators(m: usize) -> Vec<ComplexMatrix> {
    let mut gens = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
    for j in 0..m {
        for k in j + 1..m {
            let mut l = ComplexMatrix::zeros(m, m);
            l[(j, k)] = C64::new(1.0, 0.0);
            l[(k, j)] = C64::new(-1.0, 0.0);
            gens.push(l);
        }
    }
    gens
}

fn embed(g: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::from_element(d, d, ZERO);
    out.view_mut((0, 0), (g.nrows(), g.ncols())).copy_from(g);
    out
}

/// Lower bound from the SO(m) generators. For `dA != dB` the `m = min(dA, dB)`
/// generators are zero-padded into the larger factor.
pub fn ou_bound(rho: &DensityOperator) -> Result<f64> {
    let d = rho.dims();
    let gens = so_generators(d.m());
    let ga: Vec<ComplexMatrix> = gens.iter().map(|g| embed(g, d.da())).collect();
    let gb: Vec<ComplexMatrix> = gens.iter().map(|g| embed(g, d.db())).collect();
    let w = subnormalized_eigenvectors(rho)?;
    let mut sum = 0.0;
    for lk in &ga {
        for ll in &gb {
            let term = four_singular_value_term(&w, &kron(lk, ll));
            sum += term * term;
        }
    }
    Ok(sum.sqrt())
}

/// Partial-transpose and realignment trace norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceNorms {
    pub partial_transpose: f64,
    pub realignment: f64,
}

pub fn trace_norms(rho: &DensityOperator) -> Result<TraceNorms> {
    Ok(TraceNorms {
        partial_transpose: trace_norm(&partial_transpose(rho.matrix(), rho.dims())?),
        realignment: trace_norm(&realign(rho.matrix(), rho.dims())?),
    })
}

/// `sqrt(2/(m(m-1))) (max{||rho^T_A||_1, ||R(rho)||_1} - 1)`; may be negative.
pub fn caf_bound(rho: &DensityOperator) -> Result<f64> {
    let n = trace_norms(rho)?;
    Ok(prefactor(rho.dims().m()) * (n.partial_transpose.max(n.realignment) - 1.0))
}

/// `sqrt(2/(m(m-1))) (-Tr(rho W)) / alpha`, without the detection check.
pub fn witness_bound_signed(rho: &DensityOperator, w: &Witness, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(-prefactor(rho.dims().m()) * expectation(w, rho)? / alpha)
}

/// Witness bound with the witness rescaled by `1/alpha`. Valid as a lower
/// bound when `alpha` is at least the witness's rescaling constant; that
/// is the caller's responsibility.
pub fn breuer_bound(rho: &DensityOperator, w: &Witness, alpha: f64) -> Result<f64> {
    let tr = expectation(w, rho)?;
    if tr >= 0.0 {
        return Err(Error::NotDetected(tr));
    }
    witness_bound_signed(rho, w, alpha)
}

/// One named bound inside a [`BoundReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub method: String,
    pub value: f64,
    pub params: BTreeMap<String, Value>,
}

impl BoundEntry {
    pub fn new(method: impl Into<String>, value: f64) -> Self {
        Self {
            method: method.into(),
            value,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub state: String,
    pub bounds: Vec<BoundEntry>,
    pub best: f64,
}

impl BoundReport {
    pub fn new(state: impl Into<String>, bounds: Vec<BoundEntry>) -> Self {
        let best = bounds.iter().map(|b| b.value).fold(0.0, f64::max);
        Self {
            state: state.into(),
            bounds,
            best,
        }
    }

    pub fn get(&self, method: &str) -> Option<&BoundEntry> {
        self.bounds.iter().find(|b| b.method == method)
    }
}

/// All applicable bounds for one state. Each witness is paired with the
/// `alpha` used to rescale it; witnesses that do not detect the state are
/// listed with `detected: false` and their (nonpositive) signed value.
pub fn full_report(
    label: &str,
    rho: &DensityOperator,
    witnesses: &[(Witness, f64)],
) -> Result<BoundReport> {
    let d = rho.dims();
    let norms = trace_norms(rho)?;
    let mut bounds = vec![BoundEntry::new(
        "caf",
        prefactor(d.m()) * (norms.partial_transpose.max(norms.realignment) - 1.0),
    )
    .param("pt_norm", norms.partial_transpose)
    .param("realign_norm", norms.realignment)];
    if d.da() == d.db() {
        bounds.push(BoundEntry::new("ou", ou_bound(rho)?));
    }
    if d.da() == 2 && d.db() == 2 {
        bounds.push(BoundEntry::new("wootters", wootters(rho)?).param("exact", true));
    }
    for (w, alpha) in witnesses {
        let tr = expectation(w, rho)?;
        let value = witness_bound_signed(rho, w, *alpha)?;
        bounds.push(
            BoundEntry::new("witness", if tr < 0.0 { value } else { value.min(0.0) })
                .param("witness", w.label())
                .param("alpha", *alpha)
                .param("trace", tr)
                .param("detected", tr < 0.0),
        );
    }
    Ok(BoundReport::new(label, bounds))
}

/// Outcome of the Sixia-Yu sanity check for one value of `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SixiaYuCheck {
    pub a: f64,
    pub f: f64,
    pub trace_v_rho: f64,
    pub trace_w_rho: f64,
    /// `-Tr[W(a) rho(a)] / sqrt(3)` with the stated `f(a)`.
    pub witness_value: f64,
    pub ceiling: f64,
    pub flagged: bool,
}

/// Evaluates the Sixia-Yu witness estimate with the stated `f(a)` and
/// flags it when it exceeds the largest possible concurrence on `C^3 (x) C^3`.
/// The value is reported as is; nothing is corrected.
pub fn sixia_yu_monitor(a: f64) -> Result<SixiaYuCheck> {
    let rho = crate::states::horodecki_3x3(a)?;
    let w = crate::witnesses::sixia_yu_witness(a)?;
    let trace_w_rho = expectation(&w, &rho)?;
    let witness_value = -trace_w_rho / 3f64.sqrt();
    let ceiling = concurrence_ceiling(3);
    Ok(SixiaYuCheck {
        a,
        f: sixia_yu_f(a),
        trace_v_rho: sixia_yu_trace_closed_form(a),
        trace_w_rho,
        witness_value,
        ceiling,
        flagged: witness_value > ceiling,
    })
}
