//! Gibbs-type vertex priors and the exact probability kernels built on them.

mod enumerate;
mod garp;

pub use enumerate::{enumerate_states, feppf, feppf_bruteforce, MAX_ENUMERATION_N};
pub use garp::{
    dm_urn_weights, limit_urn_weights, log_dm_marginal, log_garp_class_mass, log_garp_pmf,
    log_relaxed_class_mass, log_relaxed_pmf, ModelHyper,
};

use serde::{Deserialize, Serialize};

use crate::scalar::{ln_binomial, ln_factorial, log_sum_exp, Real};
use crate::GarpError;

/// Prior on the partition of vertex units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case")]
pub enum GibbsPrior<T> {
    /// Finite symmetric Dirichlet with `M_v` components.
    SymDirichlet { m_v: usize, rho: T },
    /// Mixture of symmetric Dirichlets (`ρ = 1`) over `M_v`, `γ ∈ (0, 1)`.
    Gnedin { gamma: T },
    Dp { alpha: T },
    Pyp { alpha: T, sigma: T },
}

impl<T: Real> GibbsPrior<T> {
    pub fn validate(&self) -> Result<(), GarpError> {
        let bad = |m: &str| Err(GarpError::InvalidParameter(m.to_string()));
        match *self {
            Self::SymDirichlet { m_v, rho } => {
                if m_v == 0 {
                    return bad("M_v must be positive");
                }
                if !(rho > T::zero()) {
                    return bad("rho must be positive");
                }
            }
            Self::Gnedin { gamma } => {
                if !(gamma > T::zero() && gamma < T::one()) {
                    return bad("gamma must lie in (0, 1)");
                }
            }
            Self::Dp { alpha } => {
                if !(alpha > T::zero()) {
                    return bad("alpha must be positive");
                }
            }
            Self::Pyp { alpha, sigma } => {
                if !(alpha > T::zero()) {
                    return bad("alpha must be positive");
                }
                if !(sigma >= T::zero() && sigma < T::one()) {
                    return bad("sigma must lie in [0, 1)");
                }
            }
        }
        Ok(())
    }

    /// Discount `σ` of the Gibbs-type representation `W_{n,k} Π (1 − σ)_{n_j − 1}`.
    pub fn gibbs_sigma(&self) -> T {
        match *self {
            Self::SymDirichlet { rho, .. } => -rho,
            Self::Gnedin { .. } => -T::one(),
            Self::Dp { .. } => T::zero(),
            Self::Pyp { sigma, .. } => sigma,
        }
    }

    /// Log probability of one set partition with block sizes `counts`.
    pub fn log_eppf(&self, counts: &[usize]) -> Result<T, GarpError> {
        if counts.is_empty() {
            return Err(GarpError::EmptyCounts);
        }
        if counts.contains(&0) {
            return Err(GarpError::InvalidParameter("zero block size".into()));
        }
        let k = counts.len();
        let n: usize = counts.iter().sum();
        let nt = T::of_usize(n);
        let kt = T::of_usize(k);
        let one = T::one();
        Ok(match *self {
            Self::SymDirichlet { m_v, rho } => {
                if k > m_v {
                    return Ok(T::neg_infinity());
                }
                let mt = T::of_usize(m_v);
                ln_factorial::<T>(m_v) - ln_factorial::<T>(m_v - k) + (rho * mt).lgamma()
                    - (nt + rho * mt).lgamma()
                    - kt * rho.lgamma()
                    + counts
                        .iter()
                        .map(|&c| (T::of_usize(c) + rho).lgamma())
                        .sum::<T>()
            }
            Self::Gnedin { gamma } => {
                ln_factorial::<T>(k - 1) + (one - gamma).ln_rising(k - 1)
                    + gamma.ln_rising(n - k)
                    - (one + gamma).ln_rising(n - 1)
                    - ln_factorial::<T>(n - 1)
                    + counts.iter().map(|&c| ln_factorial::<T>(c)).sum::<T>()
            }
            Self::Dp { alpha } => {
                kt * alpha.ln() + alpha.lgamma() - (alpha + nt).lgamma()
                    + counts.iter().map(|&c| ln_factorial::<T>(c - 1)).sum::<T>()
            }
            Self::Pyp { alpha, sigma } => {
                (alpha + one).lgamma() - (alpha + nt).lgamma()
                    + (1..k)
                        .map(|j| (alpha + T::of_usize(j) * sigma).ln())
                        .sum::<T>()
                    + counts
                        .iter()
                        .map(|&c| (one - sigma).ln_rising(c - 1))
                        .sum::<T>()
            }
        })
    }

    /// Unnormalized predictive weights: one per existing block, then one for a new block.
    pub fn gcrp_weights(&self, counts: &[usize]) -> Vec<T> {
        let k = counts.len();
        if k == 0 {
            return vec![T::one()];
        }
        let n: usize = counts.iter().sum();
        let kt = T::of_usize(k);
        let mut w: Vec<T> = Vec::with_capacity(k + 1);
        match *self {
            Self::SymDirichlet { m_v, rho } => {
                w.extend(counts.iter().map(|&c| T::of_usize(c) + rho));
                w.push(if k < m_v {
                    rho * T::of_usize(m_v - k)
                } else {
                    T::zero()
                });
            }
            Self::Gnedin { gamma } => {
                let f = T::of_usize(n - k) + gamma;
                w.extend(counts.iter().map(|&c| T::of_usize(c + 1) * f));
                w.push(kt * kt - kt * gamma);
            }
            Self::Dp { alpha } => {
                w.extend(counts.iter().map(|&c| T::of_usize(c)));
                w.push(alpha);
            }
            Self::Pyp { alpha, sigma } => {
                w.extend(counts.iter().map(|&c| T::of_usize(c) - sigma));
                w.push(alpha + kt * sigma);
            }
        }
        w
    }

    /// `ln g_n`: log probability that `n` vertex units form a single block.
    pub fn log_prob_single_cluster(&self, n: usize) -> Result<T, GarpError> {
        if n == 0 {
            return Err(GarpError::InvalidParameter("n_v must be positive".into()));
        }
        let nt = T::of_usize(n);
        let one = T::one();
        Ok(match *self {
            Self::SymDirichlet { m_v, rho } => {
                let mt = T::of_usize(m_v);
                rho.ln_rising(n) - (rho * mt).ln_rising(n) + mt.ln()
            }
            Self::Gnedin { gamma } => (gamma * nt).ln() - (gamma + nt - one).ln(),
            Self::Dp { alpha } => {
                (alpha + one).lgamma() + ln_factorial::<T>(n - 1) - (alpha + nt).lgamma()
            }
            Self::Pyp { alpha, sigma } => {
                (one - sigma).ln_rising(n - 1) - (alpha + one).ln_rising(n - 1)
            }
        })
    }

    pub fn prob_single_cluster(&self, n: usize) -> Result<T, GarpError> {
        self.log_prob_single_cluster(n).map(T::exp)
    }

    /// Leading-order behavior of `g_n` as `n → ∞`.
    pub fn single_cluster_rate(&self, n: usize) -> T {
        let nt = T::of_usize(n);
        let one = T::one();
        match *self {
            Self::SymDirichlet { m_v, rho } => {
                let mt = T::of_usize(m_v);
                ((rho * mt).lgamma() + mt.ln() - rho.lgamma() + rho * (one - mt) * nt.ln())
                    .exp()
            }
            Self::Gnedin { gamma } => gamma,
            Self::Dp { alpha } => ((alpha + one).lgamma() - alpha * nt.ln()).exp(),
            Self::Pyp { alpha, sigma } => ((alpha + one).lgamma() - (one - sigma).lgamma()
                - (alpha + sigma) * nt.ln())
            .exp(),
        }
    }

    /// Probability under the relaxed model that `N` units satisfy the truncation event.
    pub fn truncation_probability(&self, p_v: T, n: usize) -> Result<T, GarpError> {
        if n == 0 {
            return Err(GarpError::InvalidParameter("N must be positive".into()));
        }
        let one = T::one();
        let lp = p_v.ln();
        let lq = (one - p_v).ln();
        let mut terms = vec![T::of_usize(n) * lp];
        for nv in 2..n {
            let g = self.prob_single_cluster(nv)?;
            let rest = (-g).ln_1p();
            terms.push(
                ln_binomial::<T>(n, nv)
                    + T::of_usize(nv) * lp
                    + T::of_usize(n - nv) * lq
                    + rest,
            );
        }
        Ok(log_sum_exp(&terms).exp().min(one))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dp_small_eppf() {
        let p = GibbsPrior::Dp { alpha: 1.0f64 };
        assert!(close(p.log_eppf(&[2, 1]).unwrap(), (1.0f64 / 6.0).ln(), 1e-14));
    }

    #[test]
    fn single_unit_has_probability_one() {
        for p in [
            GibbsPrior::Dp { alpha: 2.3f64 },
            GibbsPrior::Pyp {
                alpha: 1.0,
                sigma: 0.4,
            },
            GibbsPrior::Gnedin { gamma: 0.3 },
            GibbsPrior::SymDirichlet { m_v: 4, rho: 0.7 },
        ] {
            assert!(close(p.log_eppf(&[1]).unwrap(), 0.0, 1e-14));
            assert!(close(p.prob_single_cluster(1).unwrap(), 1.0, 1e-14));
        }
    }

    #[test]
    fn symdir_excess_blocks() {
        let p = GibbsPrior::SymDirichlet { m_v: 2, rho: 1.0f64 };
        assert_eq!(p.log_eppf(&[1, 1, 1]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(p.gcrp_weights(&[3, 4])[2], 0.0);
    }

    #[test]
    fn empty_counts_rejected() {
        let p = GibbsPrior::Dp { alpha: 1.0f64 };
        assert_eq!(p.log_eppf(&[]), Err(GarpError::EmptyCounts));
    }

    #[test]
    fn gcrp_table_rows() {
        let dp = GibbsPrior::Dp { alpha: 1.5f64 };
        assert_eq!(dp.gcrp_weights(&[2, 1]), vec![2.0, 1.0, 1.5]);
        let g = GibbsPrior::Gnedin { gamma: 0.5f64 };
        assert_eq!(g.gcrp_weights(&[1]), vec![1.0, 0.5]);
    }

    #[test]
    fn single_cluster_values() {
        let g = GibbsPrior::Gnedin { gamma: 0.5f64 };
        assert!(close(g.prob_single_cluster(2).unwrap(), 2.0 / 3.0, 1e-14));
        let dp = GibbsPrior::Dp { alpha: 1.0f64 };
        assert!(close(dp.prob_single_cluster(4).unwrap(), 0.25, 1e-14));
        assert!(dp.prob_single_cluster(0).is_err());
    }

    #[test]
    fn truncation_trivial_cases() {
        let g = GibbsPrior::Gnedin { gamma: 0.5f64 };
        assert!(close(g.truncation_probability(1.0, 7).unwrap(), 1.0, 1e-14));
        assert!(close(g.truncation_probability(0.7, 1).unwrap(), 0.7, 1e-14));
    }

    #[test]
    fn validation() {
        assert!(GibbsPrior::Gnedin { gamma: 1.0f64 }.validate().is_err());
        assert!(GibbsPrior::Pyp {
            alpha: 1.0f64,
            sigma: 1.0
        }
        .validate()
        .is_err());
        assert!(GibbsPrior::SymDirichlet { m_v: 0, rho: 1.0f64 }
            .validate()
            .is_err());
        assert!(GibbsPrior::Dp { alpha: 0.5f64 }.validate().is_ok());
    }
}
