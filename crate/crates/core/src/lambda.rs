//! Optimal rescaling of a witness.
//!
//! For a pure state with Schmidt bases `{a_k}`, `{b_k}` the witness acts
//! through `A_kl = Re <a_k, b_k| W |a_l, b_l>`. The rescaling constant is
//! `lambda = -min A_kl` over all Schmidt bases and all `k != l`. Each
//! off-diagonal entry only involves the four vectors `a_k, a_l, b_k, b_l`,
//! so the minimum is taken over pairs of orthonormal 2-frames
//! `(a_1, a_2) in V_2(C^dA)`, `(b_1, b_2) in V_2(C^dB)` instead of full bases.
//!
//! The search is a seeded multi-start random local search on the two
//! Stiefel manifolds: every restart starts from a Gaussian frame pair and
//! keeps random tangent moves that lower the objective, halving the step
//! after `patience` consecutive rejections. Restarts are independent and
//! are merged in index order, so parallel and sequential runs agree exactly.
//!
//! Any frame pair is feasible, so the returned `lambda_hat` never exceeds
//! the true constant: it is a lower estimate.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{breuer_bound, BoundEntry};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::io::MatrixJson;
use crate::linalg::{gram_deviation, orthonormalize_columns, ComplexMatrix, C64};
use crate::states::DensityOperator;
use crate::witnesses::{conjectured_cdk, expectation, wdk_witness, Witness};

/// Orthonormality tolerance for frames and bases.
pub const FRAME_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub iters: usize,
    pub step0: f64,
    /// Convergence tolerance on the running best value.
    pub tol: f64,
    /// Number of trailing restarts over which the best value must not move.
    pub window: usize,
    /// Consecutive rejections before the step is halved.
    pub patience: usize,
    pub min_step: f64,
    pub seed: u64,
    /// Multiplier applied to an estimated rescaling constant.
    pub margin: f64,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            iters: 2000,
            step0: 0.3,
            tol: 1e-8,
            window: 16,
            patience: 8,
            min_step: 1e-7,
            seed: 0,
            margin: 1.0,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::OutOfRange("restarts must be at least 1".into()));
        }
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "step0 must be positive, got {}",
                self.step0
            )));
        }
        if self.patience == 0 {
            return Err(Error::OutOfRange("patience must be at least 1".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        Ok(())
    }
}

/// Two orthonormal vectors in each factor, stored as matrix columns.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePair {
    frame_a: ComplexMatrix,
    frame_b: ComplexMatrix,
}

impl FramePair {
    pub fn new(frame_a: ComplexMatrix, frame_b: ComplexMatrix) -> Result<Self> {
        if frame_a.ncols() != 2 || frame_b.ncols() != 2 {
            return Err(Error::DimensionMismatch(
                "frames must have exactly two columns".into(),
            ));
        }
        let dev = gram_deviation(&frame_a).max(gram_deviation(&frame_b));
        if dev > FRAME_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { frame_a, frame_b })
    }

    pub fn frame_a(&self) -> &ComplexMatrix {
        &self.frame_a
    }

    pub fn frame_b(&self) -> &ComplexMatrix {
        &self.frame_b
    }

    fn random(da: usize, db: usize, rng: &mut ChaCha8Rng) -> Self {
        loop {
            let a = gaussian(da, 2, rng);
            let b = gaussian(db, 2, rng);
            if let (Some(frame_a), Some(frame_b)) =
                (orthonormalize_columns(&a), orthonormalize_columns(&b))
            {
                return Self { frame_a, frame_b };
            }
        }
    }

    fn perturbed(&self, step: f64, rng: &mut ChaCha8Rng) -> Option<Self> {
        Some(Self {
            frame_a: tangent_step(&self.frame_a, step, rng)?,
            frame_b: tangent_step(&self.frame_b, step, rng)?,
        })
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// Random move along the tangent space of the Stiefel manifold at `x`,
/// retracted by Gram-Schmidt.
fn tangent_step(x: &ComplexMatrix, step: f64, rng: &mut ChaCha8Rng) -> Option<ComplexMatrix> {
    let g = gaussian(x.nrows(), x.ncols(), rng);
    let xg = x.adjoint() * &g;
    let sym = (&xg + xg.adjoint()).scale(0.5);
    let tangent = &g - x * sym;
    orthonormalize_columns(&(x + tangent.scale(step)))
}

/// `Re <a_k (x) b_k| W |a_l (x) b_l>` for columns `k`, `l` of the two bases.
fn a_entry(
    w: &ComplexMatrix,
    basis_a: &ComplexMatrix,
    basis_b: &ComplexMatrix,
    k: usize,
    l: usize,
) -> f64 {
    let (da, db) = (basis_a.nrows(), basis_b.nrows());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..da {
        let ak = basis_a[(i, k)].conj();
        if ak == C64::new(0.0, 0.0) {
            continue;
        }
        for p in 0..db {
            let left = ak * basis_b[(p, k)].conj();
            if left == C64::new(0.0, 0.0) {
                continue;
            }
            let row = i * db + p;
            let mut inner = C64::new(0.0, 0.0);
            for j in 0..da {
                let al = basis_a[(j, l)];
                for q in 0..db {
                    inner += w[(row, j * db + q)] * al * basis_b[(q, l)];
                }
            }
            acc += left * inner;
        }
    }
    acc.re
}

/// Value of the reduced objective `Re <a_1, b_1| W |a_2, b_2>`.
pub fn frame_value(w: &Witness, pair: &FramePair) -> Result<f64> {
    let d = w.dims();
    if pair.frame_a.nrows() != d.da() || pair.frame_b.nrows() != d.db() {
        return Err(Error::DimensionMismatch(
            "frame dimensions do not match the witness".into(),
        ));
    }
    Ok(a_entry(w.matrix(), &pair.frame_a, &pair.frame_b, 0, 1))
}

/// `A_kl = Re <a_k, b_k| W |a_l, b_l>` for `m` orthonormal columns per side.
pub fn a_matrix(
    w: &Witness,
    basis_a: &ComplexMatrix,
    basis_b: &ComplexMatrix,
) -> Result<DMatrix<f64>> {
    let d = w.dims();
    if basis_a.nrows() != d.da() || basis_b.nrows() != d.db() {
        return Err(Error::DimensionMismatch(
            "basis dimensions do not match the witness".into(),
        ));
    }
    let m = basis_a.ncols();
    if basis_b.ncols() != m || m > d.m() || m == 0 {
        return Err(Error::DimensionMismatch(format!(
            "need the same number (1..={}) of columns on both sides, got {} and {}",
            d.m(),
            m,
            basis_b.ncols()
        )));
    }
    let dev = gram_deviation(basis_a).max(gram_deviation(basis_b));
    if dev > FRAME_TOL {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(DMatrix::from_fn(m, m, |k, l| {
        a_entry(w.matrix(), basis_a, basis_b, k, l)
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEstimate {
    pub lambda_hat: f64,
    pub certificate: FramePair,
    pub restarts_used: usize,
    pub converged: bool,
    /// Restart index that produced the certificate.
    pub best_restart: usize,
}

#[derive(Clone, Debug)]
struct RestartResult {
    value: f64,
    pair: FramePair,
}

fn run_restart(w: &Witness, cfg: &OptimizerConfig, index: usize) -> RestartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let d = w.dims();
    let mut pair = FramePair::random(d.da(), d.db(), &mut rng);
    let mut value = a_entry(w.matrix(), &pair.frame_a, &pair.frame_b, 0, 1);
    let mut step = cfg.step0;
    let mut rejections = 0;
    for _ in 0..cfg.iters {
        if step < cfg.min_step {
            break;
        }
        let accepted = match pair.perturbed(step, &mut rng) {
            Some(cand) => {
                let v = a_entry(w.matrix(), &cand.frame_a, &cand.frame_b, 0, 1);
                if v < value {
                    pair = cand;
                    value = v;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if accepted {
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= cfg.patience {
                step *= 0.5;
                rejections = 0;
            }
        }
    }
    RestartResult { value, pair }
}

/// Estimates the rescaling constant of `w` by minimizing the reduced
/// objective. Non-convergence is reported through the flag.
pub fn lambda_estimate(w: &Witness, cfg: &OptimizerConfig) -> Result<LambdaEstimate> {
    cfg.validate()?;
    let results = map_indexed(cfg.restarts, cfg.execution, |i| run_restart(w, cfg, i));
    // in-order fold: strict improvement only, so the first minimum wins ties
    let mut best = 0;
    let mut running = Vec::with_capacity(results.len());
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best].value {
            best = i;
        }
        running.push(results[best].value);
    }
    let final_best = results[best].value;
    let converged = cfg.restarts > cfg.window
        && (running[cfg.restarts - 1 - cfg.window] - final_best).abs() < cfg.tol;
    let RestartResult { value, pair } =
        results.into_iter().nth(best).expect("at least one restart");
    Ok(LambdaEstimate {
        lambda_hat: -value,
        certificate: pair,
        restarts_used: cfg.restarts,
        converged,
        best_restart: best,
    })
}

/// Where the rescaling constant used in a bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaSource {
    Known,
    Estimated,
    Explicit,
}

impl AlphaSource {
    pub fn as_str(self) -> &'static str {
        match self {
            AlphaSource::Known => "known",
            AlphaSource::Estimated => "estimated",
            AlphaSource::Explicit => "explicit",
        }
    }
}

/// Resolves `alpha` for `w`: the attached constant when there is one,
/// otherwise `margin * lambda_hat`.
pub fn resolve_alpha(w: &Witness, cfg: &OptimizerConfig) -> Result<(f64, AlphaSource)> {
    match w.known_lambda() {
        Some(l) => Ok((l, AlphaSource::Known)),
        None => {
            let est = lambda_estimate(w, cfg)?;
            let alpha = est.lambda_hat * cfg.margin;
            if alpha.is_nan() || alpha <= 0.0 {
                return Err(Error::Invariant(format!(
                    "estimated rescaling constant {alpha} is not positive"
                )));
            }
            Ok((alpha, AlphaSource::Estimated))
        }
    }
}

/// Witness bound with the optimal rescaling. An estimated constant is only
/// a lower estimate of the true one, so such bounds are marked heuristic
/// unless a margin above 1 was applied.
pub fn rescaled_bound(
    rho: &DensityOperator,
    w: &Witness,
    cfg: &OptimizerConfig,
) -> Result<BoundEntry> {
    let tr = expectation(w, rho)?;
    if tr >= 0.0 {
        return Err(Error::NotDetected(tr));
    }
    let (alpha, source) = resolve_alpha(w, cfg)?;
    let value = breuer_bound(rho, w, alpha)?;
    let heuristic = source == AlphaSource::Estimated && cfg.margin <= 1.0;
    Ok(BoundEntry::new("witness", value)
        .param("witness", w.label())
        .param("alpha", alpha)
        .param("alpha_source", source.as_str())
        .param("heuristic", heuristic)
        .param("trace", tr))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdkCheck {
    pub d: usize,
    pub k: usize,
    pub lambda_hat: f64,
    pub conjectured: f64,
    pub abs_gap: f64,
    pub converged: bool,
}

/// Compares the optimizer's estimate for `W_{d,k}` with the conjectured `C_{d,k}`.
pub fn verify_cdk(d: usize, k: usize, cfg: &OptimizerConfig) -> Result<CdkCheck> {
    let conjectured = conjectured_cdk(d, k)?;
    let est = lambda_estimate(&wdk_witness(d, k)?, cfg)?;
    Ok(CdkCheck {
        d,
        k,
        lambda_hat: est.lambda_hat,
        conjectured,
        abs_gap: (est.lambda_hat - conjectured).abs(),
        converged: est.converged,
    })
}

/// JSON form of a [`LambdaEstimate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambdaEstimateJson {
    pub witness: String,
    pub lambda_hat: f64,
    pub certificate: CertificateJson,
    pub certificate_value: f64,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub converged: bool,
    pub config: OptimizerConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub frame_a: MatrixJson,
    pub frame_b: MatrixJson,
}

impl LambdaEstimateJson {
    pub fn new(w: &Witness, est: &LambdaEstimate, cfg: &OptimizerConfig) -> Result<Self> {
        Ok(Self {
            witness: w.label().to_string(),
            lambda_hat: est.lambda_hat,
            certificate: CertificateJson {
                frame_a: MatrixJson::from_matrix(&est.certificate.frame_a, None, None),
                frame_b: MatrixJson::from_matrix(&est.certificate.frame_b, None, None),
            },
            certificate_value: frame_value(w, &est.certificate)?,
            restarts_used: est.restarts_used,
            best_restart: est.best_restart,
            converged: est.converged,
            config: cfg.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{re, BipartiteDims};
    use crate::witnesses::{flip_witness, iso_witness, tang_lambda, tang_witness};

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 12,
            iters: 1500,
            window: 4,
            ..OptimizerConfig::default()
        }
    }

    fn random_basis(d: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        orthonormalize_columns(&gaussian(d, d, &mut rng)).unwrap()
    }

    #[test]
    fn flip_a_matrix_in_computational_basis_is_identity() {
        let w = flip_witness(3).unwrap();
        let id = ComplexMatrix::identity(3, 3);
        let a = a_matrix(&w, &id, &id).unwrap();
        assert_eq!(a, DMatrix::identity(3, 3));
    }

    #[test]
    fn tang_frame_pair_attains_its_lambda() {
        for u in [0.3, 0.5, 0.8] {
            let w = tang_witness(u).unwrap();
            let t = u.atan2(2.0);
            let a = ComplexMatrix::identity(2, 2);
            let mut b = ComplexMatrix::zeros(4, 2);
            b[(2, 0)] = re(1.0);
            b[(3, 1)] = re(t.cos());
            b[(0, 1)] = re(-t.sin());
            let pair = FramePair::new(a, b).unwrap();
            assert!((frame_value(&w, &pair).unwrap() + tang_lambda(u)).abs() < 1e-12);
            let est = lambda_estimate(&w, &OptimizerConfig::default()).unwrap();
            assert!(
                (est.lambda_hat - tang_lambda(u)).abs() < 1e-4,
                "{}",
                est.lambda_hat
            );
        }
    }

    #[test]
    fn flip_attains_minus_one() {
        // a_1 = b_2, a_2 = -b_1
        let w = flip_witness(2).unwrap();
        let b = ComplexMatrix::identity(2, 2);
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(1, 0)] = re(1.0);
        a[(0, 1)] = re(-1.0);
        let m = a_matrix(&w, &a, &b).unwrap();
        assert!((m[(0, 1)] + 1.0).abs() < 1e-15);
        let pair = FramePair::new(a, b).unwrap();
        assert!((frame_value(&w, &pair).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn flip_a_matrix_matches_inner_product_form() {
        let w = flip_witness(3).unwrap();
        let a = random_basis(3, 1);
        let b = random_basis(3, 2);
        let m = a_matrix(&w, &a, &b).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                let expected = (a.column(k).dotc(&b.column(l)) * b.column(k).dotc(&a.column(l))).re;
                assert!((m[(k, l)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iso_off_diagonal_entries_bounded() {
        let m = 3;
        let w = iso_witness(m, 1).unwrap();
        for seed in 0..20 {
            let a = a_matrix(&w, &random_basis(m, seed), &random_basis(m, seed + 100)).unwrap();
            for k in 0..m {
                assert!(a[(k, k)] >= -1e-9);
                for l in 0..m {
                    if k != l {
                        assert!(a[(k, l)] >= -1.0 / m as f64 - 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn a_matrix_rejects_bad_frames() {
        let w = flip_witness(2).unwrap();
        let bad = ComplexMatrix::from_element(2, 2, re(1.0));
        assert!(matches!(
            a_matrix(&w, &bad, &ComplexMatrix::identity(2, 2)),
            Err(Error::NotOrthonormal(_))
        ));
        assert!(FramePair::new(bad, ComplexMatrix::identity(2, 2)).is_err());
        assert!(a_matrix(
            &w,
            &ComplexMatrix::identity(3, 3),
            &ComplexMatrix::identity(2, 2)
        )
        .is_err());
    }

    #[test]
    fn estimate_recovers_flip_and_iso_constants() {
        let est = lambda_estimate(&flip_witness(2).unwrap(), &quick()).unwrap();
        assert!((est.lambda_hat - 1.0).abs() < 1e-3, "{}", est.lambda_hat);
        let est = lambda_estimate(&iso_witness(3, 1).unwrap(), &quick()).unwrap();
        assert!(
            (est.lambda_hat - 1.0 / 3.0).abs() < 1e-3,
            "{}",
            est.lambda_hat
        );
    }

    #[test]
    fn certificate_reproduces_estimate() {
        let w = iso_witness(3, 2).unwrap();
        let est = lambda_estimate(&w, &quick()).unwrap();
        let v = frame_value(&w, &est.certificate).unwrap();
        assert!((v + est.lambda_hat).abs() < 1e-9);
        assert!(gram_deviation(est.certificate.frame_a()) < FRAME_TOL);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let w = flip_witness(3).unwrap();
        let seq = lambda_estimate(
            &w,
            &OptimizerConfig {
                execution: Execution::Sequential,
                ..quick()
            },
        )
        .unwrap();
        let par = lambda_estimate(
            &w,
            &OptimizerConfig {
                execution: Execution::Parallel,
                ..quick()
            },
        )
        .unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn more_restarts_never_worsen_estimate() {
        let w = iso_witness(3, 1).unwrap();
        let mut last = f64::NEG_INFINITY;
        for restarts in [1, 2, 4, 8] {
            let cfg = OptimizerConfig {
                restarts,
                iters: 200,
                ..OptimizerConfig::default()
            };
            let est = lambda_estimate(&w, &cfg).unwrap();
            assert!(est.lambda_hat >= last);
            last = est.lambda_hat;
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig {
            restarts: 0,
            ..OptimizerConfig::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            margin: -1.0,
            ..OptimizerConfig::default()
        }
        .validate()
        .is_err());
        let cfg: OptimizerConfig = serde_json::from_str(r#"{"restarts": 5, "seed": 9}"#).unwrap();
        assert_eq!(cfg.restarts, 5);
        assert_eq!(cfg.iters, 2000);
        assert!(serde_json::from_str::<OptimizerConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn rescaled_bound_uses_known_constant() {
        let rho = crate::states::isotropic_state(3, 0.9).unwrap();
        let e = rescaled_bound(&rho, &iso_witness(3, 1).unwrap(), &quick()).unwrap();
        assert!((e.value - 3f64.sqrt() * (0.9 - 1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(e.params["alpha_source"], "known");
        assert_eq!(e.params["heuristic"], false);
    }

    #[test]
    fn rescaled_bound_estimates_when_unknown() {
        let base = iso_witness(2, 1).unwrap();
        let w = Witness::new(
            base.matrix().clone(),
            BipartiteDims::square(2).unwrap(),
            None,
        )
        .unwrap();
        let rho = crate::states::isotropic_state(2, 0.8).unwrap();
        let e = rescaled_bound(&rho, &w, &quick()).unwrap();
        assert_eq!(e.params["alpha_source"], "estimated");
        assert_eq!(e.params["heuristic"], true);
        // alpha_hat <= 1/2, so the heuristic value is at least the exact one
        assert!(e.value >= 0.6 - 1e-9);
        let low = crate::states::isotropic_state(2, 0.3).unwrap();
        assert!(matches!(
            rescaled_bound(&low, &w, &quick()),
            Err(Error::NotDetected(_))
        ));
    }
}
