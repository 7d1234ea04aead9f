//! Full-batch GLM-Tron for L-Lipschitz non-decreasing gates with L < 2:
//! unit-step updates `w_{t+1} = w_t + (1/S) sum_i (y_i - sigma(<w_t, x_i>)) x_i`
//! from `w_1 = 0`, under the data precondition `||x_i|| <= 1`.
//!
//! Alongside the trainer: the per-step decrease certificate
//! `||w_{t+1} - w||^2 <= ||w_t - w||^2 - (2/L - 1) Ltilde_S(h_t) + eta^2 + 2 eta W (L+1)`
//! (checked numerically along recorded traces) and the expected-risk
//! certificate for centered noise.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::data::{fmt_f64, Dataset};
use crate::error::{Result, TronError};
use crate::linalg::RealVector;

/// Slack accepted on inequality checks; covers float accumulation over
/// datasets up to ~1e4 samples.
pub const INEQ_SLACK: f64 = 1e-9;

/// Data-radius tolerance for the `||x_i|| <= 1` precondition.
const RADIUS_SLACK: f64 = 1e-9;

/// A gate with a declared Lipschitz constant. Built-ins carry exact values;
/// user-supplied activations must declare theirs.
#[derive(Clone)]
pub struct Activation {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz: f64,
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Activation({}, L={})", self.name, self.lipschitz)
    }
}

impl Activation {
    pub fn relu() -> Self {
        Activation {
            name: "relu".into(),
            f: Arc::new(crate::linalg::relu),
            lipschitz: 1.0,
        }
    }

    /// Leaky ReLU with slope `alpha in [0, 1]` below zero (L = 1).
    pub fn leaky_relu(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(TronError::InvalidParameter {
                name: "alpha",
                detail: format!("leaky slope must be in [0,1], got {alpha}"),
            });
        }
        Ok(Activation {
            name: format!("leaky_relu({alpha})"),
            f: Arc::new(move |z| crate::linalg::leaky_relu(z, alpha)),
            lipschitz: 1.0,
        })
    }

    /// Identity clipped to [0, 1] (L = 1).
    pub fn clipped_linear() -> Self {
        Activation {
            name: "clipped_linear".into(),
            f: Arc::new(|z| z.clamp(0.0, 1.0)),
            lipschitz: 1.0,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: f64,
    ) -> Self {
        Activation {
            name: name.into(),
            f,
            lipschitz,
        }
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        (self.f)(z)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Debug, Clone)]
pub struct GlmTronConfig {
    pub activation: Activation,
    pub max_iters: usize,
    /// Target accuracy epsilon driving the iteration budget T = ||w_ref||/eps.
    pub epsilon: f64,
}

impl GlmTronConfig {
    /// Validates 0 < L < 2 and spot-checks monotonicity of the gate on a grid.
    pub fn new(activation: Activation, max_iters: usize, epsilon: f64) -> Result<Self> {
        let l = activation.lipschitz;
        if !(l > 0.0 && l < 2.0) {
            return Err(TronError::InvalidParameter {
                name: "lipschitz",
                detail: format!("activation must have 0 < L < 2, got {l}"),
            });
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(TronError::InvalidParameter {
                name: "epsilon",
                detail: format!("must be finite and > 0, got {epsilon}"),
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=100 {
            let z = -5.0 + 0.1 * k as f64;
            let v = activation.eval(z);
            if v < prev - 1e-12 {
                return Err(TronError::InvalidParameter {
                    name: "activation",
                    detail: format!("not non-decreasing near z = {z}"),
                });
            }
            prev = v;
        }
        Ok(GlmTronConfig {
            activation,
            max_iters,
            epsilon,
        })
    }
}

/// Recorded run: iterates `w_1..w_{T+1}`, the empirical risks at every
/// iterate, and (when a reference weight was supplied) the two sides of the
/// per-step decrease inequality.
#[derive(Debug, Clone)]
pub struct GlmTronTrace {
    pub iterates: Vec<RealVector>,
    /// Gate-output gap to the reference weight, `(1/S) sum (sigma(<w_t,x>) - sigma(<w_ref,x>))^2`;
    /// empty when no reference weight was given.
    pub effective_erm: Vec<f64>,
    /// Label residual risk `(1/S) sum (sigma(<w_t,x>) - y)^2`.
    pub true_erm: Vec<f64>,
    /// `(lhs, rhs)` of the decrease inequality per step, with the exact
    /// residual bound and the tightest valid W for this run; empty without a
    /// reference weight.
    pub step_decrease_checks: Vec<(f64, f64)>,
    pub w_ref: Option<RealVector>,
    pub activation: Activation,
}

fn mean_update(d: &Dataset, act: &Activation, w: &RealVector) -> RealVector {
    let mut g = RealVector::zeros(d.dim());
    let inv = 1.0 / d.len() as f64;
    for s in d.iter() {
        let r = s.y - act.eval(w.dot(&s.x));
        g.axpy(inv * r, &s.x);
    }
    g
}

fn effective_erm(d: &Dataset, act: &Activation, w: &RealVector, w_ref: &RealVector) -> f64 {
    d.iter()
        .map(|s| {
            let gap = act.eval(w.dot(&s.x)) - act.eval(w_ref.dot(&s.x));
            gap * gap
        })
        .sum::<f64>()
        / d.len() as f64
}

fn true_erm(d: &Dataset, act: &Activation, w: &RealVector) -> f64 {
    d.iter()
        .map(|s| {
            let r = act.eval(w.dot(&s.x)) - s.y;
            r * r
        })
        .sum::<f64>()
        / d.len() as f64
}

/// Norm of the mean residual at a fixed weight, the quantity the
/// residual-bound hypothesis caps.
pub fn residual_norm(d: &Dataset, act: &Activation, w_ref: &RealVector) -> f64 {
    mean_update(d, act, w_ref).norm()
}

/// Run GLM-Tron from `w_1 = 0`.
///
/// With a reference weight the run lasts `min(max_iters, ceil(||w_ref||/eps))`
/// steps and records the gate-gap risk and decrease-inequality sides; without
/// one it lasts `max_iters` steps and records iterates and label risk only.
/// Rejects datasets with any `||x_i|| > 1`.
pub fn glm_tron_run(
    d: &Dataset,
    cfg: &GlmTronConfig,
    w_ref: Option<&RealVector>,
) -> Result<GlmTronTrace> {
    for (i, s) in d.iter().enumerate() {
        let norm = s.x.norm();
        if norm > 1.0 + RADIUS_SLACK {
            return Err(TronError::RadiusViolation { index: i, norm });
        }
    }
    if let Some(w) = w_ref {
        if w.dim() != d.dim() {
            return Err(TronError::DimensionMismatch {
                context: "glm_tron_run: w_ref",
                expected: d.dim(),
                got: w.dim(),
            });
        }
    }
    let act = &cfg.activation;
    let steps = match w_ref {
        Some(w) => {
            let t = (w.norm() / cfg.epsilon).ceil() as usize;
            t.min(cfg.max_iters)
        }
        None => cfg.max_iters,
    };

    let mut iterates = Vec::with_capacity(steps + 1);
    iterates.push(RealVector::zeros(d.dim()));
    for _ in 0..steps {
        let w = iterates.last().expect("non-empty");
        let g = mean_update(d, act, w);
        iterates.push(w.add(&g));
    }

    let true_erm_trace: Vec<f64> = iterates.iter().map(|w| true_erm(d, act, w)).collect();
    let (effective, checks) = match w_ref {
        Some(wr) => {
            let eff: Vec<f64> = iterates
                .iter()
                .map(|w| effective_erm(d, act, w, wr))
                .collect();
            let eta = residual_norm(d, act, wr);
            let w_cap = iterates
                .iter()
                .map(|w| w.sub(wr).norm())
                .fold(0.0f64, f64::max);
            let l = act.lipschitz;
            let allowance = eta * eta + 2.0 * eta * w_cap * (l + 1.0);
            let mut checks = Vec::with_capacity(steps);
            for t in 0..steps {
                let lhs = iterates[t + 1].distance_sq(wr);
                let rhs = iterates[t].distance_sq(wr) - (2.0 / l - 1.0) * eff[t] + allowance;
                checks.push((lhs, rhs));
            }
            (eff, checks)
        }
        None => (Vec::new(), Vec::new()),
    };

    Ok(GlmTronTrace {
        iterates,
        effective_erm: effective,
        true_erm: true_erm_trace,
        step_decrease_checks: checks,
        w_ref: w_ref.cloned(),
        activation: act.clone(),
    })
}

/// Verify the per-step decrease inequality along a recorded trace under
/// caller-supplied hypotheses: `eta` must dominate the mean residual norm at
/// `w_ref`, and `W` must dominate `||w_t - w_ref||` at every iterate. Either
/// violation errors with the failed hypothesis named. A single-iterate trace
/// yields an empty list.
pub fn check_step_decrease(
    trace: &GlmTronTrace,
    d: &Dataset,
    w_ref: &RealVector,
    eta: f64,
    w_bound: f64,
) -> Result<Vec<bool>> {
    let act = &trace.activation;
    let actual_residual = residual_norm(d, act, w_ref);
    if eta + 1e-12 < actual_residual {
        return Err(TronError::hypothesis(
            "eta >= ||(1/S) sum (y_i - sigma(<w_ref, x_i>)) x_i||",
            eta - actual_residual,
        ));
    }
    for (t, w) in trace.iterates.iter().enumerate() {
        let dist = w.sub(w_ref).norm();
        if dist > w_bound + 1e-12 {
            return Err(TronError::hypothesis(
                format!("||w_t - w_ref|| <= W along the trace (failed at t = {})", t + 1),
                w_bound - dist,
            ));
        }
    }
    let l = act.lipschitz;
    let allowance = eta * eta + 2.0 * eta * w_bound * (l + 1.0);
    let mut out = Vec::new();
    for t in 0..trace.iterates.len().saturating_sub(1) {
        let lhs = trace.iterates[t + 1].distance_sq(w_ref);
        let ltilde = effective_erm(d, act, &trace.iterates[t], w_ref);
        let rhs = trace.iterates[t].distance_sq(w_ref) - (2.0 / l - 1.0) * ltilde + allowance;
        out.push(lhs <= rhs + INEQ_SLACK);
    }
    Ok(out)
}

/// Expected-risk certificate for centered i.i.d. noise bounded by `theta`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RiskCertificate {
    /// `E[xi^2] + (L/(2-L)) (eps + theta^2 + 2 theta W (L+1))`.
    pub bound: f64,
    pub satisfied: bool,
    pub margin: f64,
}

/// Certificate comparing an observed average terminal risk against the
/// centered-noise bound. The caller supplies the Monte-Carlo average of the
/// terminal label risk over noise redraws as `est_true_erm`.
pub fn noise_risk_certificate(
    est_true_erm: f64,
    noise_second_moment: f64,
    l: f64,
    epsilon: f64,
    theta: f64,
    w_bound: f64,
) -> Result<RiskCertificate> {
    if !(l > 0.0 && l < 2.0) {
        return Err(TronError::InvalidParameter {
            name: "lipschitz",
            detail: format!("certificate needs 0 < L < 2, got {l}"),
        });
    }
    for (name, v) in [
        ("est_true_erm", est_true_erm),
        ("noise_second_moment", noise_second_moment),
        ("epsilon", epsilon),
        ("theta", theta),
        ("W", w_bound),
    ] {
        if !v.is_finite() {
            return Err(TronError::InvalidParameter {
                name: "noise_risk_certificate",
                detail: format!("{name} must be finite, got {v}"),
            });
        }
    }
    let bound = noise_second_moment
        + l / (2.0 - l) * (epsilon + theta * theta + 2.0 * theta * w_bound * (l + 1.0));
    Ok(RiskCertificate {
        bound,
        satisfied: est_true_erm <= bound,
        margin: bound - est_true_erm,
    })
}

/// CSV export with columns `t, w_norm_err, effective_erm, true_erm`; the
/// reference-dependent columns are blank when no reference weight was given.
pub fn export_trace_csv<W: Write>(trace: &GlmTronTrace, mut writer: W) -> Result<()> {
    writeln!(writer, "t,w_norm_err,effective_erm,true_erm")?;
    for (t, w) in trace.iterates.iter().enumerate() {
        let w_norm_err = trace
            .w_ref
            .as_ref()
            .map(|wr| fmt_f64(w.sub(wr).norm()))
            .unwrap_or_default();
        let eff = trace
            .effective_erm
            .get(t)
            .map(|v| fmt_f64(*v))
            .unwrap_or_default();
        writeln!(
            writer,
            "{},{},{},{}",
            t + 1,
            w_norm_err,
            eff,
            fmt_f64(trace.true_erm[t])
        )?;
    }
    Ok(())
}
