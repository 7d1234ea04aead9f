//! Width-w depth-2 nets with one shared filter and fixed patch matrices,
//! `f_w(x) = (1/w) sum_k sigma(w^T A_k x)` with leaky-ReLU `sigma`, trained
//! full-batch by the companion-matrix update
//!
//! ```text
//! g_t = M ((1/S) sum_i (y_i - f_{w_t}(x_i)) x_i),    w_{t+1} = w_t + eta g_t
//! ```
//!
//! on symmetric data. The structural requirement is consistency of the pair
//! `(Sigma, M)`: `lambda_min(A_bar Sigma M^T) > 0` with `A_bar` the average
//! patch. Schedules target the infinity-norm interpolation error
//! `theta_{w,T} = max_i |y_i - f_w(x_i)|` of any reference filter.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Result, TronError};
use crate::linalg::{lambda_min_symmetric, leaky_relu, spectral_norm, RealMatrix, RealVector};
use crate::recursion::{recurse2, RecursionParams};

/// Early-stop threshold on the update norm; exact fixed points exist in the
/// realizable case.
pub const GRAD_STOP: f64 = 1e-14;

/// Slack accepted on inequality checks along recorded traces.
pub const INEQ_SLACK: f64 = 1e-9;

/// A single-filter net class: leaky slope and the patch matrices `A_k`,
/// all of shape `r x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetClass {
    alpha: f64,
    patches: Vec<RealMatrix>,
}

impl NetClass {
    pub fn new(alpha: f64, patches: Vec<RealMatrix>) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(TronError::InvalidParameter {
                name: "alpha",
                detail: format!("leaky slope must be finite and >= 0, got {alpha}"),
            });
        }
        let first = patches.first().ok_or(TronError::InvalidParameter {
            name: "patches",
            detail: "net class needs at least one patch matrix".into(),
        })?;
        let (r, n) = (first.rows(), first.cols());
        for p in &patches {
            if p.rows() != r || p.cols() != n {
                return Err(TronError::DimensionMismatch {
                    context: "NetClass: patch shapes",
                    expected: r * n,
                    got: p.rows() * p.cols(),
                });
            }
        }
        Ok(NetClass { alpha, patches })
    }

    /// Single ReLU gate: width 1, `A_1 = I`, `alpha = 0`.
    pub fn relu_gate(n: usize) -> Self {
        NetClass {
            alpha: 0.0,
            patches: vec![RealMatrix::identity(n)],
        }
    }

    pub fn width(&self) -> usize {
        self.patches.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn patches(&self) -> &[RealMatrix] {
        &self.patches
    }

    /// Filter dimension `r`.
    pub fn filter_dim(&self) -> usize {
        self.patches[0].rows()
    }

    /// Input dimension `n`.
    pub fn input_dim(&self) -> usize {
        self.patches[0].cols()
    }

    /// Average patch `A_bar = (1/w) sum_k A_k`.
    pub fn patch_average(&self) -> RealMatrix {
        let mut acc = RealMatrix::zeros(self.filter_dim(), self.input_dim());
        for p in &self.patches {
            acc = acc.add(p);
        }
        acc.scale(1.0 / self.width() as f64)
    }

    /// `(1/w) sum_k ||A_k||` (spectral norms).
    pub fn mean_patch_norm(&self) -> f64 {
        self.patches.iter().map(spectral_norm).sum::<f64>() / self.width() as f64
    }

    /// `(1/w) sum_k ||A_k||^2`.
    pub fn mean_patch_norm_sq(&self) -> f64 {
        self.patches
            .iter()
            .map(|p| spectral_norm(p).powi(2))
            .sum::<f64>()
            / self.width() as f64
    }
}

#[derive(Serialize, Deserialize)]
struct NetClassJson {
    width: usize,
    alpha: f64,
    patches: Vec<Vec<Vec<f64>>>,
}

impl Serialize for NetClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetClassJson {
            width: self.width(),
            alpha: self.alpha,
            patches: self.patches.iter().map(|p| p.to_nested()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NetClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = NetClassJson::deserialize(d)?;
        if raw.width != raw.patches.len() {
            return Err(D::Error::custom(format!(
                "width {} does not match {} patches",
                raw.width,
                raw.patches.len()
            )));
        }
        let patches = raw
            .patches
            .into_iter()
            .map(|rows| RealMatrix::from_rows(&rows).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        NetClass::new(raw.alpha, patches).map_err(D::Error::custom)
    }
}

/// Net output `(1/w) sum_k sigma(w^T A_k x)`.
pub fn net_forward(nc: &NetClass, w_vec: &RealVector, x: &RealVector) -> Result<f64> {
    if w_vec.dim() != nc.filter_dim() {
        return Err(TronError::DimensionMismatch {
            context: "net_forward: filter",
            expected: nc.filter_dim(),
            got: w_vec.dim(),
        });
    }
    if x.dim() != nc.input_dim() {
        return Err(TronError::DimensionMismatch {
            context: "net_forward: input",
            expected: nc.input_dim(),
            got: x.dim(),
        });
    }
    let sum: f64 = nc
        .patches
        .iter()
        .map(|a| leaky_relu(w_vec.dot(&a.matvec(x)), nc.alpha))
        .sum();
    Ok(sum / nc.width() as f64)
}

/// Consistency of a pair `(P, M)` for this class: positivity of
/// `lambda_min(A_bar P M^T)` (symmetric part). Returns the flag and the value.
pub fn consistency_check(
    nc: &NetClass,
    p: &RealMatrix,
    m: &RealMatrix,
) -> Result<(bool, f64)> {
    let a_bar = nc.patch_average();
    if p.rows() != nc.input_dim() || p.cols() != nc.input_dim() {
        return Err(TronError::DimensionMismatch {
            context: "consistency_check: P",
            expected: nc.input_dim(),
            got: p.rows().max(p.cols()),
        });
    }
    if m.rows() != nc.filter_dim() || m.cols() != nc.input_dim() {
        return Err(TronError::DimensionMismatch {
            context: "consistency_check: M",
            expected: nc.filter_dim() * nc.input_dim(),
            got: m.rows() * m.cols(),
        });
    }
    let product = a_bar.matmul(p).matmul(&m.transpose());
    let lambda = lambda_min_symmetric(&product)?;
    Ok((lambda > 0.0, lambda))
}

/// Width-2k class `{M - kC, ..., M - C, M + C, ..., M + kC}`; the signed
/// coefficients cancel, so the patch average is exactly `M`.
pub fn sample_net_class(
    m: &RealMatrix,
    c: &RealMatrix,
    half_width: usize,
    alpha: f64,
) -> Result<NetClass> {
    if half_width == 0 {
        return Err(TronError::InvalidParameter {
            name: "half_width",
            detail: "must be >= 1".into(),
        });
    }
    if m.rows() != c.rows() || m.cols() != c.cols() {
        return Err(TronError::DimensionMismatch {
            context: "sample_net_class",
            expected: m.rows() * m.cols(),
            got: c.rows() * c.cols(),
        });
    }
    let mut patches = Vec::with_capacity(2 * half_width);
    for j in (1..=half_width).rev() {
        patches.push(m.sub(&c.scale(j as f64)));
    }
    for j in 1..=half_width {
        patches.push(m.add(&c.scale(j as f64)));
    }
    NetClass::new(alpha, patches)
}

/// Sample a full-rank `r x n` companion matrix: a Wishart-distributed
/// `G = sum_{i<=dof} g_i g_i^T` (standard normal columns) sits in the leading
/// `r x r` block, padded with zero columns (rank is already r; determinism
/// aids golden tests). Full rank holds with probability 1 for `dof >= r`;
/// the draw is retried up to 3 times against the measure-zero failure.
pub fn sample_full_rank_m(
    r: usize,
    n: usize,
    wishart_dof: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RealMatrix> {
    if r == 0 || r > n {
        return Err(TronError::InvalidParameter {
            name: "r",
            detail: format!("need 1 <= r <= n, got r={r}, n={n}"),
        });
    }
    if wishart_dof < r {
        return Err(TronError::InvalidParameter {
            name: "wishart_dof",
            detail: format!("need dof >= r for full rank, got dof={wishart_dof}, r={r}"),
        });
    }
    let mut last_sigma_min = 0.0;
    for _ in 0..3 {
        let mut g = RealMatrix::zeros(r, r);
        for _ in 0..wishart_dof {
            let col: Vec<f64> = (0..r).map(|_| StandardNormal.sample(rng)).collect();
            let col = RealVector::new(col).expect("finite normal draw");
            g.add_outer(1.0, &col);
        }
        let mut m = RealMatrix::zeros(r, n);
        for i in 0..r {
            for j in 0..r {
                m.set(i, j, g.get(i, j));
            }
        }
        let sigma_min = min_singular_value(&m);
        if sigma_min > 1e-10 {
            return Ok(m);
        }
        last_sigma_min = sigma_min;
    }
    Err(TronError::RankDeficient {
        attempts: 3,
        sigma_min: last_sigma_min,
    })
}

/// Smallest singular value (0 when the solver returns none).
pub fn min_singular_value(m: &RealMatrix) -> f64 {
    let nm = nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice());
    nm.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// The full-batch update direction `M ((1/S) sum_i (y_i - f_w(x_i)) x_i)`.
pub fn neurotron_gradient(
    d: &Dataset,
    nc: &NetClass,
    m: &RealMatrix,
    w: &RealVector,
) -> Result<RealVector> {
    let mut v = RealVector::zeros(d.dim());
    let inv = 1.0 / d.len() as f64;
    for s in d.iter() {
        let r = s.y - net_forward(nc, w, &s.x)?;
        v.axpy(inv * r, &s.x);
    }
    Ok(m.matvec(&v))
}

/// Run the iteration from `w_init` for up to `max_iters` steps, stopping
/// early when the update norm falls below [`GRAD_STOP`]. Fails upfront if
/// `(Sigma, M)` is inconsistent for the class or the input set is not
/// closed under negation (the update's contraction identity needs both).
pub fn neurotron_run(
    d: &Dataset,
    nc: &NetClass,
    m: &RealMatrix,
    eta: f64,
    max_iters: usize,
    w_init: &RealVector,
) -> Result<Vec<RealVector>> {
    if let Some(index) = d.asymmetric_index() {
        return Err(TronError::AsymmetricDataset { index });
    }
    let sigma = d.empirical_covariance();
    let (consistent, lambda_min) = consistency_check(nc, &sigma, m)?;
    if !consistent {
        return Err(TronError::InconsistentPair { lambda_min });
    }
    if w_init.dim() != nc.filter_dim() {
        return Err(TronError::DimensionMismatch {
            context: "neurotron_run: w_init",
            expected: nc.filter_dim(),
            got: w_init.dim(),
        });
    }
    let mut trace = Vec::with_capacity(max_iters + 1);
    trace.push(w_init.clone());
    for _ in 0..max_iters {
        let w = trace.last().expect("non-empty");
        let g = neurotron_gradient(d, nc, m, w)?;
        if g.norm() < GRAD_STOP {
            break;
        }
        let mut w_next = w.clone();
        w_next.axpy(eta, &g);
        trace.push(w_next);
    }
    Ok(trace)
}

/// Mean squared gate-output gap `(1/S) sum |f_{w_a}(x_i) - f_{w_b}(x_i)|^2`.
pub fn effective_risk(
    d: &Dataset,
    nc: &NetClass,
    w_a: &RealVector,
    w_b: &RealVector,
) -> Result<f64> {
    let mut acc = 0.0;
    for s in d.iter() {
        let gap = net_forward(nc, w_a, &s.x)? - net_forward(nc, w_b, &s.x)?;
        acc += gap * gap;
    }
    Ok(acc / d.len() as f64)
}

/// Verify the consecutive-iterate inequality along a recorded trace against a
/// fixed reference filter, with the residual bound computed exactly from the
/// data and the gate-gap risk evaluated exactly (not via its upper bound).
/// A single-iterate trace yields an empty list.
pub fn lemma2_check(
    trace: &[RealVector],
    d: &Dataset,
    nc: &NetClass,
    m: &RealMatrix,
    w_ref: &RealVector,
    eta: f64,
) -> Result<Vec<bool>> {
    let sigma = d.empirical_covariance();
    let (consistent, lambda1) = consistency_check(nc, &sigma, m)?;
    if !consistent {
        return Err(TronError::InconsistentPair {
            lambda_min: lambda1,
        });
    }
    let residual_bound = exact_residual_bound(d, nc, m, w_ref)?;
    let b_radius = d.radius();
    let m_norm = spectral_norm(m);
    let mean_patch = nc.mean_patch_norm();
    let one_plus_alpha = 1.0 + nc.alpha();
    let mut out = Vec::new();
    for pair in trace.windows(2) {
        let delta = pair[0].distance_sq(w_ref);
        let delta_next = pair[1].distance_sq(w_ref);
        let dist = delta.sqrt();
        let ltilde = effective_risk(d, nc, w_ref, &pair[0])?;
        let rhs = 2.0 * eta * residual_bound * dist - eta * one_plus_alpha * lambda1 * delta
            + eta * eta
                * (residual_bound * residual_bound
                    + residual_bound * one_plus_alpha * b_radius * b_radius * dist * m_norm * mean_patch
                    + b_radius * b_radius * m_norm * m_norm * ltilde);
        out.push(delta_next - delta <= rhs + INEQ_SLACK);
    }
    Ok(out)
}

/// `||(1/S) sum_i (y_i - f_{w_ref}(x_i)) M x_i||`, the exact residual bound
/// for a known reference filter. The a-priori bound for an unknown one is
/// `theta * B * ||M||` (see [`theorem5_schedule`]'s `residual_bound`).
pub fn exact_residual_bound(
    d: &Dataset,
    nc: &NetClass,
    m: &RealMatrix,
    w_ref: &RealVector,
) -> Result<f64> {
    let mut acc = RealVector::zeros(m.rows());
    let inv = 1.0 / d.len() as f64;
    for s in d.iter() {
        let r = s.y - net_forward(nc, w_ref, &s.x)?;
        acc.axpy(inv * r, &m.matvec(&s.x));
    }
    Ok(acc.norm())
}

/// Infinity-norm residual `max_i |y_i - f_w(x_i)|` of a filter on the data.
pub fn interpolation_error(d: &Dataset, nc: &NetClass, w_vec: &RealVector) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in d.iter() {
        worst = worst.max((s.y - net_forward(nc, w_vec, &s.x)?).abs());
    }
    Ok(worst)
}

/// Empirical surrogate risk for the width-1 ReLU case with `M = A_1`:
/// the average over the data of `int_0^{u} (-y + max(0, z)) dz` at
/// `u = w^T A_1 x`, in closed form `-y u + (u^2/2) 1{u > 0}`.
/// The update direction is exactly minus its gradient.
pub fn surrogate_risk(d: &Dataset, nc: &NetClass, w_vec: &RealVector) -> Result<f64> {
    if nc.width() != 1 {
        return Err(TronError::InvalidParameter {
            name: "net class",
            detail: format!("surrogate risk is defined for width 1, got {}", nc.width()),
        });
    }
    if nc.alpha() != 0.0 {
        return Err(TronError::InvalidParameter {
            name: "alpha",
            detail: format!("surrogate risk is defined for the ReLU gate, got alpha {}", nc.alpha()),
        });
    }
    let a1 = &nc.patches()[0];
    let mut acc = 0.0;
    for s in d.iter() {
        let u = w_vec.dot(&a1.matvec(&s.x));
        acc += -s.y * u + if u > 0.0 { u * u / 2.0 } else { 0.0 };
    }
    Ok(acc / d.len() as f64)
}

/// The solved schedule for a reference filter with interpolation error
/// `theta`: proof-level constants, step size, contraction factor, predicted
/// iteration count, and (for `theta > 0`) the error floor.
#[derive(Debug, Clone, Serialize)]
pub struct NeuroTronSchedule {
    pub lambda1: f64,
    pub b_radius: f64,
    pub m_norm: f64,
    pub eta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub predicted_t: usize,
    pub theta: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    /// A-priori residual bound `theta * B * ||M||`.
    pub residual_bound: f64,
    pub alpha_rate: f64,
    /// Squared-error asymptote for `theta > 0`; 0 otherwise.
    pub predicted_floor: f64,
    /// Recursion constants actually fed to the iteration-count solve
    /// (`theta > 0` only; zero in the realizable case).
    pub b1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub eps: f64,
    pub w_err0: f64,
}

/// Lower bound that `gamma` must strictly exceed for `theta > 0` given `mu`.
pub fn gamma_star(
    nc: &NetClass,
    m: &RealMatrix,
    b_radius: f64,
    lambda1: f64,
    theta: f64,
    mu: f64,
    eps: f64,
) -> Result<f64> {
    let k = proof_constants(nc, m, b_radius, lambda1);
    let (b1, c1, c2, c3) = mu_split(&k, theta, mu)?;
    let eps2 = eps * eps;
    let irreducible = c3 / b1;
    if eps2 <= irreducible {
        return Err(TronError::TargetBelowFloor {
            target: eps2,
            floor: irreducible,
        });
    }
    Ok((b1 * b1 / c1).max((eps2 + c2 / c1) / (eps2 - irreducible)))
}

struct ProofConstants {
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    a5: f64,
}

fn proof_constants(nc: &NetClass, m: &RealMatrix, b_radius: f64, lambda1: f64) -> ProofConstants {
    let one_plus_alpha = 1.0 + nc.alpha();
    let m_norm = spectral_norm(m);
    let mean_patch = nc.mean_patch_norm();
    let mean_patch_sq = nc.mean_patch_norm_sq();
    ProofConstants {
        a1: one_plus_alpha * lambda1,
        a2: b_radius.powi(4) * m_norm * m_norm * one_plus_alpha * one_plus_alpha * mean_patch_sq,
        a3: b_radius.powi(3) * m_norm * m_norm * one_plus_alpha * mean_patch,
        a4: 2.0 * b_radius * m_norm,
        a5: b_radius * b_radius * m_norm * m_norm,
    }
}

/// AM-GM split of the mixed `sqrt(Delta) theta` term with parameter `mu`,
/// producing the recursion constants. Requires `mu^2 > a4/(2 a1)`.
fn mu_split(k: &ProofConstants, theta: f64, mu: f64) -> Result<(f64, f64, f64, f64)> {
    let mu2 = mu * mu;
    let needed = k.a4 / (2.0 * k.a1);
    if !(mu2 > needed) {
        return Err(TronError::hypothesis(
            "mu^2 > B ||M|| / ((1+alpha) lambda1)",
            mu2 - needed,
        ));
    }
    let b1 = k.a1 - k.a4 / (2.0 * mu2);
    let c1 = k.a2 + k.a3 / (2.0 * mu2);
    let c2 = theta * theta * (k.a3 * mu2 / 2.0 + k.a5);
    let c3 = k.a4 * theta * theta * mu2 / 2.0;
    Ok((b1, c1, c2, c3))
}

/// Solve the schedule. For `theta = 0` the step is `eta = a1/(gamma a2)` with
/// `gamma > max(1, a1^2/a2)` and decay is geometric; for `theta > 0` the
/// mixed term is AM-GM split with parameter `mu` (strictly above its lower
/// bound), `gamma` must strictly exceed [`gamma_star`], and the iteration
/// count comes from the additive-recursion solve with floor
/// `(c2/c1 + gamma c3/b1)/(gamma - 1)`. Every violated hypothesis is named.
#[allow(clippy::too_many_arguments)]
pub fn theorem5_schedule(
    nc: &NetClass,
    m: &RealMatrix,
    b_radius: f64,
    lambda1: f64,
    theta: f64,
    mu: f64,
    gamma: f64,
    w_err0: f64,
    eps: f64,
) -> Result<NeuroTronSchedule> {
    if !(lambda1 > 0.0) {
        return Err(TronError::hypothesis("lambda1 > 0 (consistency)", lambda1));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "theta",
            detail: format!("must be finite and >= 0, got {theta}"),
        });
    }
    if !(w_err0 > 0.0) || !(eps > 0.0) {
        return Err(TronError::InvalidParameter {
            name: "theorem5_schedule",
            detail: format!("need w_err0 > 0 and eps > 0, got {w_err0}, {eps}"),
        });
    }
    let k = proof_constants(nc, m, b_radius, lambda1);
    let m_norm = spectral_norm(m);
    let eps2 = eps * eps;

    if theta == 0.0 {
        let lb = (k.a1 * k.a1 / k.a2).max(1.0);
        if gamma <= lb {
            return Err(TronError::hypothesis(
                "gamma > max(1, a1^2/a2)",
                gamma - lb,
            ));
        }
        let eta = k.a1 / (gamma * k.a2);
        let alpha = 1.0 - eta * k.a1 + eta * eta * k.a2;
        let predicted_t = if eps2 >= w_err0 {
            1
        } else {
            1 + ((w_err0 / eps2).ln() / (1.0 / alpha).ln()).ceil() as usize
        };
        return Ok(NeuroTronSchedule {
            lambda1,
            b_radius,
            m_norm,
            eta,
            mu,
            gamma,
            predicted_t,
            theta,
            a1: k.a1,
            a2: k.a2,
            a3: k.a3,
            a4: k.a4,
            a5: k.a5,
            residual_bound: 0.0,
            alpha_rate: alpha,
            predicted_floor: 0.0,
            b1: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            eps,
            w_err0,
        });
    }

    let (b1, c1, c2, c3) = mu_split(&k, theta, mu)?;
    let irreducible = c3 / b1;
    if !(eps2 > irreducible) {
        return Err(TronError::hypothesis(
            "eps^2 > theta^2 mu^2 / ((1+alpha) lambda1 / (B ||M||) - 1/mu^2)",
            eps2 - irreducible,
        ));
    }
    let gstar = (b1 * b1 / c1).max((eps2 + c2 / c1) / (eps2 - irreducible));
    if gamma <= gstar {
        return Err(TronError::hypothesis("gamma > gamma_star", gamma - gstar));
    }
    let bound = recurse2(&RecursionParams {
        b1,
        c1,
        c2,
        c3,
        eta_prime: 0.0,
        big_c: w_err0,
        eps_prime_sq: eps2,
        gamma,
        delta0: 0.0,
    })?;
    Ok(NeuroTronSchedule {
        lambda1,
        b_radius,
        m_norm,
        eta: bound.eta_prime,
        mu,
        gamma,
        predicted_t: bound.predicted_t,
        theta,
        a1: k.a1,
        a2: k.a2,
        a3: k.a3,
        a4: k.a4,
        a5: k.a5,
        residual_bound: theta * b_radius * m_norm,
        alpha_rate: bound.alpha,
        predicted_floor: bound.floor,
        b1,
        c1,
        c2,
        c3,
        eps,
        w_err0,
    })
}

/// Trace CSV export: `t, w0..w{r-1}, grad_norm, inf_norm_residual`.
pub fn export_trace_csv<W: std::io::Write>(
    trace: &[RealVector],
    d: &Dataset,
    nc: &NetClass,
    m: &RealMatrix,
    mut writer: W,
) -> Result<()> {
    use crate::data::fmt_f64;
    let r = nc.filter_dim();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..r).map(|i| format!("w{i}")))
        .chain(["grad_norm".to_string(), "inf_norm_residual".to_string()])
        .collect();
    writeln!(writer, "{}", header.join(","))?;
    for (t, w) in trace.iter().enumerate() {
        let g = neurotron_gradient(d, nc, m, w)?;
        let inf = interpolation_error(d, nc, w)?;
        let mut fields: Vec<String> = vec![(t + 1).to_string()];
        fields.extend(w.as_slice().iter().map(|v| fmt_f64(*v)));
        fields.push(fmt_f64(g.norm()));
        fields.push(fmt_f64(inf));
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}
