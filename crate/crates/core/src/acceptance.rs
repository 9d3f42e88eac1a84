//! End-to-end reproduction checks.
//!
//! Each criterion recomputes a family's bounds through the public API and
//! compares against closed forms or against independently computable
//! quantities at a fixed tolerance. The same list backs the `acceptance`
//! integration test and the `selftest` CLI subcommand.

use std::time::{Duration, Instant};

use crate::bounds::{
    caf_bound, concurrence_pure, concurrence_pure_schmidt, concurrence_pure_twocopy, ou_bound,
    prefactor, sixia_yu_monitor, trace_norms, wootters,
};
use crate::error::{Error, Result};
use crate::lambda::{lambda_estimate, rescaled_bound, verify_cdk, OptimizerConfig};
use crate::linalg::{hermitian_spectrum, partial_transpose, BipartiteDims};
use crate::states::{
    epsilon_state, gamma_normalization, gamma_state, horodecki_2x4, horodecki_3x3, isotropic_state,
    random_density, random_pure, schmidt, DensityOperator, PureState,
};
use crate::witnesses::{
    choi_witness, conjectured_cdk, expectation, flip_witness, iso_witness,
    sixia_yu_trace_closed_form, sixia_yu_v, tang_detection_range, tang_lambda,
    tang_trace_closed_form, tang_witness, wdk_witness, Witness,
};

/// Tolerances and limits, one per criterion.
pub mod tol {
    use std::time::Duration;

    pub const ISOTROPIC_EXACT: f64 = 1e-9;
    pub const ISOTROPIC_RUNTIME: Duration = Duration::from_secs(1);
    pub const LAMBDA_ANCHOR: f64 = 1e-3;
    pub const TANG_LAMBDA_UPPER: f64 = 2.0 + 1e-3;
    pub const TANG_LAMBDA_LOWER: f64 = 1.0;
    pub const LAMBDA_RUNTIME: Duration = Duration::from_secs(120);
    pub const CDK_GAP: f64 = 5e-3;
    pub const CDK_RUNTIME: Duration = Duration::from_secs(600);
    pub const EPSILON_CLOSED_FORM: f64 = 1e-12;
    pub const SIXIA_YU_TRACE: f64 = 1e-10;
    pub const PPT_MIN_EIGENVALUE: f64 = -1e-9;
    pub const TANG_BOUNDARY: f64 = 1e-9;
    pub const TANG_CLOSED_FORM: f64 = 1e-10;
    pub const GAMMA_CLOSED_FORM: f64 = 1e-12;
    pub const PURE_ROUTES: f64 = 1e-10;
    pub const OU_WOOTTERS: f64 = 1e-9;
    pub const SOUNDNESS: f64 = 1e-6;
}

/// Criteria that cannot pass with correct numerics, with the reason.
pub const KNOWN_UNATTAINABLE: &[(u8, &str)] = &[(
    2,
    "Tang witness has lambda = sqrt(4+u^2) > 2 (attained by an explicit frame pair), outside [1, 2+1e-3]",
)];

pub fn known_unattainable(id: u8) -> Option<&'static str> {
    KNOWN_UNATTAINABLE
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, r)| *r)
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] C{:<2} {:<34} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Result of the body of a criterion: pass flag plus a one-line summary.
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Body = fn(&OptimizerConfig) -> Result<Check>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub time_limit: Option<Duration>,
    body: Body,
}

impl Criterion {
    pub fn run(&self, cfg: &OptimizerConfig) -> CriterionOutcome {
        let start = Instant::now();
        let result = (self.body)(cfg);
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(c) => (c.passed, c.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = self.time_limit {
            if elapsed > limit {
                passed = false;
                detail.push_str(&format!(" [exceeded time limit {:?}]", limit));
            }
        }
        CriterionOutcome {
            id: self.id,
            name: self.name,
            passed,
            detail,
            elapsed,
        }
    }
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            name: "isotropic exactness",
            time_limit: Some(tol::ISOTROPIC_RUNTIME),
            body: isotropic_exactness,
        },
        Criterion {
            id: 2,
            name: "lambda anchors",
            time_limit: Some(tol::LAMBDA_RUNTIME),
            body: lambda_anchors,
        },
        Criterion {
            id: 3,
            name: "C_(d,k) conjecture table",
            time_limit: Some(tol::CDK_RUNTIME),
            body: cdk_table,
        },
        Criterion {
            id: 4,
            name: "epsilon-family curves",
            time_limit: None,
            body: epsilon_curves,
        },
        Criterion {
            id: 5,
            name: "Horodecki 3x3",
            time_limit: None,
            body: horodecki_3x3_checks,
        },
        Criterion {
            id: 6,
            name: "Tang detection range",
            time_limit: None,
            body: tang_range,
        },
        Criterion {
            id: 7,
            name: "gamma-family curves",
            time_limit: None,
            body: gamma_curves,
        },
        Criterion {
            id: 8,
            name: "oracle equivalences",
            time_limit: None,
            body: oracle_equivalences,
        },
        Criterion {
            id: 9,
            name: "soundness on two qubits",
            time_limit: None,
            body: two_qubit_soundness,
        },
        Criterion {
            id: 10,
            name: "Sixia-Yu sanity monitor",
            time_limit: None,
            body: sixia_yu_sanity,
        },
    ]
}

pub fn run_all(cfg: &OptimizerConfig) -> Vec<CriterionOutcome> {
    criteria().iter().map(|c| c.run(cfg)).collect()
}

/// Witness bound when the witness detects the state, 0 otherwise.
fn pipeline_bound(rho: &DensityOperator, w: &Witness, cfg: &OptimizerConfig) -> Result<f64> {
    match rescaled_bound(rho, w, cfg) {
        Ok(entry) => Ok(entry.value),
        Err(Error::NotDetected(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn isotropic_exactness(cfg: &OptimizerConfig) -> Result<Check> {
    let w = iso_witness(2, 1)?;
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let f = 0.5 + 0.05 * i as f64;
        let rho = isotropic_state(2, f)?;
        let exact = 2.0 * f - 1.0;
        let pipeline = pipeline_bound(&rho, &w, cfg)?;
        let woot = wootters(&rho)?;
        worst = worst
            .max((pipeline - exact).abs())
            .max((woot - exact).abs());
    }
    Ok(Check::new(
        worst <= tol::ISOTROPIC_EXACT,
        format!("max |bound - (2f-1)| = {worst:.2e}"),
    ))
}

fn lambda_anchors(cfg: &OptimizerConfig) -> Result<Check> {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [2, 3] {
        let l = lambda_estimate(&flip_witness(m)?, cfg)?.lambda_hat;
        ok &= (l - 1.0).abs() <= tol::LAMBDA_ANCHOR;
        parts.push(format!("flip{m}={l:.6}"));
    }
    for m in [2, 3, 4] {
        let l = lambda_estimate(&iso_witness(m, 1)?, cfg)?.lambda_hat;
        ok &= (l - 1.0 / m as f64).abs() <= tol::LAMBDA_ANCHOR;
        parts.push(format!("iso{m}={l:.6}"));
    }
    for u in [0.3, 0.5, 0.8] {
        let l = lambda_estimate(&tang_witness(u)?, cfg)?.lambda_hat;
        ok &= (tol::TANG_LAMBDA_LOWER..=tol::TANG_LAMBDA_UPPER).contains(&l);
        parts.push(format!("tang{u}={l:.6} (exact {:.6})", tang_lambda(u)));
    }
    Ok(Check::new(ok, parts.join(" ")))
}

fn cdk_table(cfg: &OptimizerConfig) -> Result<Check> {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in 3..=5 {
        for k in 1..=d - 2 {
            let c = verify_cdk(d, k, cfg)?;
            ok &= c.abs_gap <= tol::CDK_GAP;
            parts.push(format!(
                "({d},{k}) {:.5}/{} gap {:.1e}",
                c.lambda_hat, c.conjectured, c.abs_gap
            ));
        }
    }
    Ok(Check::new(ok, parts.join("; ")))
}

/// Closed-form witness estimate for the epsilon family.
pub fn epsilon_closed_form(eps: f64) -> f64 {
    let den = 1.0 + eps + eps * eps;
    let inner = if eps < 1.0 {
        eps * (eps - 1.0) / den
    } else {
        (1.0 - eps) / den
    };
    -inner / 3f64.sqrt()
}

fn epsilon_curves(cfg: &OptimizerConfig) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut dominance_violations = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..50 {
        let eps = (0.1f64.ln() + (10f64.ln() - 0.1f64.ln()) * i as f64 / 49.0).exp();
        let rho = epsilon_state(eps)?;
        let w = choi_witness(if eps < 1.0 { 1 } else { 2 })?;
        let wit = pipeline_bound(&rho, &w, cfg)?;
        worst = worst.max((wit - epsilon_closed_form(eps)).abs());
        let caf = caf_bound(&rho)?;
        min_margin = min_margin.min(caf - wit);
        if caf < wit {
            dominance_violations += 1;
        }
    }
    Ok(Check::new(
        worst <= tol::EPSILON_CLOSED_FORM && dominance_violations == 0,
        format!("max |witness - closed form| = {worst:.2e}; min(caf - witness) = {min_margin:.4e}"),
    ))
}

fn horodecki_3x3_checks(_: &OptimizerConfig) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut min_realign = f64::INFINITY;
    for i in 1..=9 {
        let a = i as f64 / 10.0;
        let rho = horodecki_3x3(a)?;
        let v = sixia_yu_v(a)?;
        let tr = crate::linalg::trace(&(&v * rho.matrix())).re;
        worst = worst.max((tr - sixia_yu_trace_closed_form(a)).abs());
        let pt = partial_transpose(rho.matrix(), rho.dims())?;
        min_eig = min_eig.min(hermitian_spectrum(&pt)?.min());
        min_realign = min_realign.min(trace_norms(&rho)?.realignment);
    }
    Ok(Check::new(
        worst <= tol::SIXIA_YU_TRACE && min_eig >= tol::PPT_MIN_EIGENVALUE && min_realign > 1.0,
        format!("max |Tr(V rho) err| = {worst:.2e}; min eig(rho^TA) = {min_eig:.2e}; min ||R||_1 = {min_realign:.6}"),
    ))
}

fn tang_range(_: &OptimizerConfig) -> Result<Check> {
    let mut sign_mismatches = 0;
    let mut worst_closed: f64 = 0.0;
    let mut worst_boundary: f64 = 0.0;
    for i in 1..=21 {
        let b = i as f64 / 22.0;
        let rho = horodecki_2x4(b)?;
        let (u1, u2) = tang_detection_range(b)?;
        for j in 0..=20 {
            let u = j as f64 / 20.0;
            let tr = expectation(&tang_witness(u)?, &rho)?;
            worst_closed = worst_closed.max((tr - tang_trace_closed_form(b, u)).abs());
            if tr.abs() <= tol::TANG_BOUNDARY {
                continue;
            }
            let inside = u1 <= u && u <= u2;
            if inside != (tr < 0.0) {
                sign_mismatches += 1;
            }
        }
        // endpoints that are roots of the trace form
        let mut roots = vec![u1];
        if b >= 12.0 / 37.0 {
            roots.push(u2);
        }
        for u in roots {
            worst_boundary = worst_boundary.max(expectation(&tang_witness(u)?, &rho)?.abs());
        }
    }
    Ok(Check::new(
        sign_mismatches == 0 && worst_boundary <= tol::TANG_BOUNDARY && worst_closed <= tol::TANG_CLOSED_FORM,
        format!(
            "sign mismatches = {sign_mismatches}; max |Tr| at endpoints = {worst_boundary:.2e}; max |matrix - closed form| = {worst_closed:.2e}"
        ),
    ))
}

/// Closed-form witness estimate for the gamma family with `W_{d,k}`.
pub fn gamma_closed_form(d: usize, k: usize, gamma: f64) -> Result<f64> {
    Ok(prefactor(d) * (1.0 - gamma * gamma)
        / gamma_normalization(d, gamma)
        / conjectured_cdk(d, k)?)
}

fn gamma_curves(cfg: &OptimizerConfig) -> Result<Check> {
    let gammas: Vec<f64> = (1..=20).map(|j| j as f64 / 21.0).collect();
    let mut worst: f64 = 0.0;
    let mut values = std::collections::BTreeMap::new();
    for d in 3..=5 {
        for k in 1..=d - 2 {
            let w = wdk_witness(d, k)?;
            for (g_idx, &g) in gammas.iter().enumerate() {
                let v = pipeline_bound(&gamma_state(d, g)?, &w, cfg)?;
                worst = worst.max((v - gamma_closed_form(d, k, g)?).abs());
                values.insert((d, k, g_idx), v);
            }
        }
    }
    let mut order_violations = 0;
    for g_idx in 0..gammas.len() {
        if !(values[&(3, 1, g_idx)] >= values[&(4, 2, g_idx)]
            && values[&(4, 2, g_idx)] >= values[&(5, 3, g_idx)])
        {
            order_violations += 1;
        }
        if !(values[&(5, 1, g_idx)] <= values[&(5, 2, g_idx)]
            && values[&(5, 2, g_idx)] <= values[&(5, 3, g_idx)])
        {
            order_violations += 1;
        }
    }
    Ok(Check::new(
        worst <= tol::GAMMA_CLOSED_FORM && order_violations == 0,
        format!(
            "max |bound - closed form| = {worst:.2e}; ordering violations = {order_violations}"
        ),
    ))
}

fn oracle_equivalences(_: &OptimizerConfig) -> Result<Check> {
    let mut worst_routes: f64 = 0.0;
    for (da, db) in [(2, 2), (2, 4), (3, 3)] {
        let dims = BipartiteDims::new(da, db)?;
        for seed in 0..100 {
            let psi: PureState = random_pure(dims, 1000 * da as u64 + 100 * db as u64 + seed);
            let c1 = concurrence_pure(&psi);
            let c2 = concurrence_pure_schmidt(&schmidt(&psi))?;
            let c3 = concurrence_pure_twocopy(&psi);
            worst_routes = worst_routes.max((c1 - c2).abs()).max((c1 - c3).abs());
        }
    }
    let dims = BipartiteDims::square(2)?;
    let mut worst_ou: f64 = 0.0;
    for seed in 0..50u64 {
        let rho = random_density(dims, 1 + (seed as usize % 4), 5000 + seed)?;
        worst_ou = worst_ou.max((ou_bound(&rho)? - wootters(&rho)?).abs());
    }
    Ok(Check::new(
        worst_routes <= tol::PURE_ROUTES && worst_ou <= tol::OU_WOOTTERS,
        format!("max pure-route gap = {worst_routes:.2e}; max |ou - wootters| = {worst_ou:.2e}"),
    ))
}

/// Random two-qubit states detected by the isotropic witness: a Bell
/// projector mixed with a random state, keeping only detected ones.
pub fn detected_two_qubit_states(count: usize) -> Result<Vec<DensityOperator>> {
    let dims = BipartiteDims::square(2)?;
    let bell = PureState::max_entangled(2)?.density();
    let w = iso_witness(2, 1)?;
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        let noise = random_density(dims, 1 + (seed as usize % 4), 9000 + seed)?;
        let p = 0.3 + 0.7 * ((seed * 37) % 101) as f64 / 100.0;
        let rho = bell.mix(&noise, p)?;
        if expectation(&w, &rho)? < 0.0 {
            out.push(rho);
        }
        seed += 1;
    }
    Ok(out)
}

fn two_qubit_soundness(cfg: &OptimizerConfig) -> Result<Check> {
    let w = iso_witness(2, 1)?;
    let mut worst_witness = f64::NEG_INFINITY;
    let mut worst_caf = f64::NEG_INFINITY;
    for rho in detected_two_qubit_states(50)? {
        let exact = wootters(&rho)?;
        worst_witness = worst_witness.max(rescaled_bound(&rho, &w, cfg)?.value - exact);
        worst_caf = worst_caf.max(caf_bound(&rho)? - exact);
    }
    Ok(Check::new(
        worst_witness <= tol::SOUNDNESS && worst_caf <= tol::SOUNDNESS,
        format!(
            "max(witness - wootters) = {worst_witness:.3e}; max(caf - wootters) = {worst_caf:.3e}"
        ),
    ))
}

fn sixia_yu_sanity(_: &OptimizerConfig) -> Result<Check> {
    let mut flagged = 0;
    let mut consistent = true;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut ceiling = 0.0;
    for i in 1..=9 {
        let c = sixia_yu_monitor(i as f64 / 10.0)?;
        consistent &= c.flagged == (c.witness_value > c.ceiling);
        flagged += usize::from(c.flagged);
        lo = lo.min(c.witness_value);
        hi = hi.max(c.witness_value);
        ceiling = c.ceiling;
    }
    Ok(Check::new(
        consistent,
        format!("flagged {flagged}/9; estimate ranges {lo:.3}..{hi:.3} vs ceiling {ceiling:.4}"),
    ))
}
