//! The adversarial label oracle: true ReLU labels plus probabilistic bounded
//! additive corruption. The coin deciding whether a query is attacked is
//! Bernoulli with data-dependent bias `beta(x)`; when it lands, the applied
//! perturbation `xi` satisfies `|xi| <= theta_star`.
//!
//! The corruption bound is the only constraint the guarantees need, so the
//! concrete strategies here are named instantiations spanning it: `Uniform`
//! (benign, `xi ~ Unif[-theta*, theta*]`, the default), `SignedMax`
//! (worst-magnitude, `xi = ±theta*` with equal probability), and
//! `Realization` (labels exactly realizable by an alternative filter, the
//! near-optimality attack).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Result, TronError};
use crate::linalg::{relu, RealVector};

/// Attack-probability function `beta : R^n -> [0,1]`.
///
/// Outputs are clamped to `[0,1]` at evaluation time. Only the named
/// built-ins serialize; `Custom` is for in-process experimentation.
#[derive(Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaFn {
    /// Constant bias `p`.
    Constant { p: f64 },
    /// `p * 1{v^T x > 0}`: attacks only one half-space.
    IndicatorHalfspace { v: RealVector, p: f64 },
    /// Arbitrary caller-supplied bias; not serializable.
    #[serde(skip)]
    Custom(#[serde(skip)] Arc<dyn Fn(&RealVector) -> f64 + Send + Sync>),
}

impl BetaFn {
    pub fn constant(p: f64) -> Self {
        BetaFn::Constant { p }
    }

    pub fn eval(&self, x: &RealVector) -> f64 {
        let raw = match self {
            BetaFn::Constant { p } => *p,
            BetaFn::IndicatorHalfspace { v, p } => {
                if v.dot(x) > 0.0 {
                    *p
                } else {
                    0.0
                }
            }
            BetaFn::Custom(f) => f(x),
        };
        raw.clamp(0.0, 1.0)
    }
}

impl Serialize for BetaFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(tag = "kind", rename_all = "snake_case")]
        enum Named<'a> {
            Constant { p: f64 },
            IndicatorHalfspace { v: &'a RealVector, p: f64 },
        }
        match self {
            BetaFn::Constant { p } => Named::Constant { p: *p }.serialize(serializer),
            BetaFn::IndicatorHalfspace { v, p } => {
                Named::IndicatorHalfspace { v, p: *p }.serialize(serializer)
            }
            BetaFn::Custom(_) => Err(S::Error::custom(
                "custom attack-probability functions are not serializable; use a named built-in",
            )),
        }
    }
}

impl fmt::Debug for BetaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaFn::Constant { p } => write!(f, "Constant({p})"),
            BetaFn::IndicatorHalfspace { v, p } => {
                write!(f, "IndicatorHalfspace(v={:?}, p={p})", v.as_slice())
            }
            BetaFn::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// How the perturbation `xi` is drawn once the attack coin lands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Perturbation {
    /// `xi ~ Unif[-theta_star, theta_star]`.
    Uniform,
    /// `xi = ±theta_star` with equal probability, by an independent coin.
    SignedMax,
    /// `xi = relu(w_adv^T x) - relu(w_star^T x)`: replies are exactly
    /// realizable by the alternative filter `w_adv`.
    Realization { w_adv: RealVector },
}

/// Ground truth plus attack model; immutable once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    pub w_star: RealVector,
    pub theta_star: f64,
    pub beta: BetaFn,
    pub perturbation: Perturbation,
}

impl OracleConfig {
    pub fn new(
        w_star: RealVector,
        theta_star: f64,
        beta: BetaFn,
        perturbation: Perturbation,
    ) -> Result<Self> {
        if !(theta_star >= 0.0 && theta_star.is_finite()) {
            return Err(TronError::InvalidParameter {
                name: "theta_star",
                detail: format!("must be finite and >= 0, got {theta_star}"),
            });
        }
        if let Perturbation::Realization { w_adv } = &perturbation {
            if w_adv.dim() != w_star.dim() {
                return Err(TronError::DimensionMismatch {
                    context: "OracleConfig: w_adv",
                    expected: w_star.dim(),
                    got: w_adv.dim(),
                });
            }
        }
        Ok(OracleConfig {
            w_star,
            theta_star,
            beta,
            perturbation,
        })
    }

    /// Honest oracle: labels are exactly `relu(w_star^T x)`.
    pub fn honest(w_star: RealVector) -> Self {
        OracleConfig {
            w_star,
            theta_star: 0.0,
            beta: BetaFn::constant(0.0),
            perturbation: Perturbation::Uniform,
        }
    }

    pub fn dim(&self) -> usize {
        self.w_star.dim()
    }
}

/// One oracle reply: the label, the attack coin, and the perturbation applied
/// (zero if not attacked). Always satisfies `y = xi_applied + relu(w_star^T x)`
/// and `|xi| <= theta_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReply {
    pub y: f64,
    pub attacked: bool,
    pub xi: f64,
}

/// Query the oracle at `x`.
///
/// The attack coin is drawn Bernoulli(beta(x)) independently of how `x` was
/// produced; the perturbation draw (when needed) is independent of the coin.
pub fn query<R: Rng + ?Sized>(cfg: &OracleConfig, x: &RealVector, rng: &mut R) -> Result<OracleReply> {
    if x.dim() != cfg.w_star.dim() {
        return Err(TronError::DimensionMismatch {
            context: "oracle query",
            expected: cfg.w_star.dim(),
            got: x.dim(),
        });
    }
    let clean = relu(cfg.w_star.dot(x));
    let p = cfg.beta.eval(x);
    let attacked = rng.random::<f64>() < p;
    if !attacked {
        return Ok(OracleReply {
            y: clean,
            attacked: false,
            xi: 0.0,
        });
    }
    let xi = match &cfg.perturbation {
        Perturbation::Uniform => {
            let u: f64 = rng.random();
            cfg.theta_star * (2.0 * u - 1.0)
        }
        Perturbation::SignedMax => {
            if rng.random::<bool>() {
                cfg.theta_star
            } else {
                -cfg.theta_star
            }
        }
        Perturbation::Realization { w_adv } => {
            let xi = relu(w_adv.dot(x)) - clean;
            if xi.abs() > cfg.theta_star + 1e-12 {
                return Err(TronError::PerturbationBoundExceeded {
                    xi: xi.abs(),
                    theta_star: cfg.theta_star,
                });
            }
            xi
        }
    };
    Ok(OracleReply {
        y: clean + xi,
        attacked: true,
        xi,
    })
}

/// Build the near-optimality attack: the oracle always acts (`beta = 1`) and
/// replies with labels exactly realizable by `w_adv`. The corruption bound is
/// `theta_star = r * ||w_adv - w_star||` for `r` an upper bound on `||x||`
/// over the support in use; queries outside that radius error out.
pub fn make_realization_attack(
    w_star: RealVector,
    w_adv: RealVector,
    dist_support_radius: f64,
) -> Result<OracleConfig> {
    if w_adv.dim() != w_star.dim() {
        return Err(TronError::DimensionMismatch {
            context: "make_realization_attack",
            expected: w_star.dim(),
            got: w_adv.dim(),
        });
    }
    if !(dist_support_radius >= 0.0 && dist_support_radius.is_finite()) {
        return Err(TronError::InvalidParameter {
            name: "dist_support_radius",
            detail: format!("must be finite and >= 0, got {dist_support_radius}"),
        });
    }
    let theta_star = dist_support_radius * w_adv.sub(&w_star).norm();
    OracleConfig::new(
        w_star,
        theta_star,
        BetaFn::constant(1.0),
        Perturbation::Realization { w_adv },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn vecf(v: &[f64]) -> RealVector {
        RealVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_corruption_bound_is_honest_regardless_of_beta() {
        let cfg = OracleConfig::new(
            vecf(&[1.0, -0.5]),
            0.0,
            BetaFn::constant(1.0),
            Perturbation::Uniform,
        )
        .unwrap();
        let mut r = rng(7);
        for _ in 0..200 {
            let x = vecf(&[r.random::<f64>() - 0.5, r.random::<f64>() - 0.5]);
            let reply = query(&cfg, &x, &mut r).unwrap();
            assert_eq!(reply.y, relu(cfg.w_star.dot(&x)));
            assert_eq!(reply.xi, 0.0);
        }
    }

    #[test]
    fn beta_zero_never_attacks() {
        let cfg = OracleConfig::new(
            vecf(&[1.0]),
            0.5,
            BetaFn::constant(0.0),
            Perturbation::Uniform,
        )
        .unwrap();
        let mut r = rng(11);
        for _ in 0..500 {
            let x = vecf(&[r.random::<f64>() * 4.0 - 2.0]);
            let reply = query(&cfg, &x, &mut r).unwrap();
            assert!(!reply.attacked);
            assert_eq!(reply.y, relu(x.get(0)));
        }
    }

    #[test]
    fn signed_max_hits_the_bound_exactly() {
        // w* = (1), x = (2), beta = 1: y = 2 ± theta* with |y - 2| = theta*.
        let theta = 0.3;
        let cfg = OracleConfig::new(
            vecf(&[1.0]),
            theta,
            BetaFn::constant(1.0),
            Perturbation::SignedMax,
        )
        .unwrap();
        let mut r = rng(3);
        let x = vecf(&[2.0]);
        let mut saw_plus = false;
        let mut saw_minus = false;
        for _ in 0..100 {
            let reply = query(&cfg, &x, &mut r).unwrap();
            assert!(reply.attacked);
            assert!(((reply.y - 2.0).abs() - theta).abs() < 1e-12);
            if reply.xi > 0.0 {
                saw_plus = true;
            } else {
                saw_minus = true;
            }
        }
        assert!(saw_plus && saw_minus);
    }

    #[test]
    fn replies_always_respect_corruption_bound() {
        let theta = 0.2;
        for pert in [Perturbation::Uniform, Perturbation::SignedMax] {
            let cfg = OracleConfig::new(
                vecf(&[0.3, -0.8]),
                theta,
                BetaFn::constant(0.7),
                pert,
            )
            .unwrap();
            let mut r = rng(19);
            for _ in 0..2000 {
                let x = vecf(&[r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0]);
                let reply = query(&cfg, &x, &mut r).unwrap();
                let clean = relu(cfg.w_star.dot(&x));
                assert!((reply.y - clean).abs() <= theta + 1e-15);
                assert!(reply.xi.abs() <= theta + 1e-15);
                assert_eq!(reply.y, clean + reply.xi);
            }
        }
    }

    #[test]
    fn realization_attack_identical_filters_is_honest() {
        let cfg = make_realization_attack(vecf(&[1.0]), vecf(&[1.0]), 2.0).unwrap();
        assert_eq!(cfg.theta_star, 0.0);
        let mut r = rng(2);
        let x = vecf(&[1.5]);
        let reply = query(&cfg, &x, &mut r).unwrap();
        assert_eq!(reply.y, 1.5);
        assert_eq!(reply.xi, 0.0);
    }

    #[test]
    fn realization_attack_hand_trace() {
        // w* = (1,0), w_adv = (0,1), r = 1: theta* = sqrt(2); at x = (1,0) the
        // reply is relu(w_adv^T x) = 0.
        let cfg =
            make_realization_attack(vecf(&[1.0, 0.0]), vecf(&[0.0, 1.0]), 1.0).unwrap();
        assert!((cfg.theta_star - 2.0_f64.sqrt()).abs() < 1e-15);
        let mut r = rng(5);
        let reply = query(&cfg, &vecf(&[1.0, 0.0]), &mut r).unwrap();
        assert_eq!(reply.y, 0.0);
        assert!(reply.attacked);
    }

    #[test]
    fn realization_attack_is_exactly_realizable_by_w_adv() {
        let w_star = vecf(&[0.6, -0.2]);
        let w_adv = vecf(&[0.1, 0.5]);
        let cfg = make_realization_attack(w_star, w_adv.clone(), 2.0f64.sqrt()).unwrap();
        let mut r = rng(23);
        for _ in 0..1000 {
            let x = vecf(&[r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0]);
            let reply = query(&cfg, &x, &mut r).unwrap();
            assert!((reply.y - relu(w_adv.dot(&x))).abs() <= 1e-12);
        }
    }

    #[test]
    fn realization_attack_rejects_out_of_support_query() {
        let cfg = make_realization_attack(vecf(&[1.0]), vecf(&[-1.0]), 1.0).unwrap();
        let mut r = rng(1);
        // |xi| at x = (-3) is 3 > theta* = 2.
        let err = query(&cfg, &vecf(&[-3.0]), &mut r).unwrap_err();
        assert!(matches!(err, TronError::PerturbationBoundExceeded { .. }));
    }

    #[test]
    fn empirical_attack_frequency_matches_beta() {
        let n_draws = 100_000usize;
        for p in [0.15, 0.5, 0.85] {
            let cfg = OracleConfig::new(
                vecf(&[1.0]),
                0.1,
                BetaFn::constant(p),
                Perturbation::Uniform,
            )
            .unwrap();
            let mut r = rng(101);
            let x = vecf(&[0.7]);
            let hits = (0..n_draws)
                .filter(|_| query(&cfg, &x, &mut r).unwrap().attacked)
                .count();
            let freq = hits as f64 / n_draws as f64;
            let se = (p * (1.0 - p) / n_draws as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * se,
                "freq {freq} vs p {p} (se {se})"
            );
        }
    }

    #[test]
    fn coin_uncorrelated_with_uniform_xi_magnitude() {
        // Sample correlation between the coin and |xi| of the *next* attacked
        // query; under independent draws it should vanish.
        let cfg = OracleConfig::new(
            vecf(&[1.0]),
            1.0,
            BetaFn::constant(0.5),
            Perturbation::Uniform,
        )
        .unwrap();
        let mut r = rng(77);
        let x = vecf(&[1.0]);
        let n = 100_000usize;
        let mut coins = Vec::with_capacity(n);
        let mut mags = Vec::with_capacity(n);
        let mut pending_coin: Option<f64> = None;
        for _ in 0..n {
            let reply = query(&cfg, &x, &mut r).unwrap();
            if let Some(c) = pending_coin.take() {
                if reply.attacked {
                    coins.push(c);
                    mags.push(reply.xi.abs());
                }
            }
            pending_coin = Some(if reply.attacked { 1.0 } else { 0.0 });
        }
        let m = coins.len() as f64;
        let mc = coins.iter().sum::<f64>() / m;
        let mm = mags.iter().sum::<f64>() / m;
        let mut cov = 0.0;
        let mut vc = 0.0;
        let mut vm = 0.0;
        for (c, g) in coins.iter().zip(&mags) {
            cov += (c - mc) * (g - mm);
            vc += (c - mc) * (c - mc);
            vm += (g - mm) * (g - mm);
        }
        let rho = cov / (vc.sqrt() * vm.sqrt());
        assert!(rho.abs() < 0.02, "correlation {rho}");
    }

    #[test]
    fn indicator_halfspace_attacks_only_one_side() {
        let beta = BetaFn::IndicatorHalfspace {
            v: vecf(&[1.0, 0.0]),
            p: 1.0,
        };
        assert_eq!(beta.eval(&vecf(&[0.5, 3.0])), 1.0);
        assert_eq!(beta.eval(&vecf(&[-0.5, 3.0])), 0.0);
        assert_eq!(beta.eval(&vecf(&[0.0, 3.0])), 0.0);
    }

    #[test]
    fn oracle_config_json_round_trip() {
        let cfg = OracleConfig::new(
            vecf(&[-1.0, 1.0]),
            0.05,
            BetaFn::IndicatorHalfspace {
                v: vecf(&[0.0, 1.0]),
                p: 0.25,
            },
            Perturbation::SignedMax,
        )
        .unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: OracleConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.w_star, cfg.w_star);
        assert_eq!(back.theta_star, cfg.theta_star);
        match back.beta {
            BetaFn::IndicatorHalfspace { p, .. } => assert_eq!(p, 0.25),
            other => panic!("wrong beta after round trip: {other:?}"),
        }
    }

    #[test]
    fn custom_beta_refuses_to_serialize() {
        let cfg = OracleConfig::new(
            vecf(&[1.0]),
            0.1,
            BetaFn::Custom(Arc::new(|_| 0.5)),
            Perturbation::Uniform,
        )
        .unwrap();
        assert!(serde_json::to_string(&cfg).is_err());
    }
}
