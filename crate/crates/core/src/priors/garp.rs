use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GibbsPrior;
use crate::partition::{n_pairs, vertex_pairs, Assignment, GraphAlignedState};
use crate::scalar::{ln_factorial, Real};
use crate::GarpError;

/// Vertex probability `p_v` and edge Dirichlet mass `β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModelHyper<T> {
    pub p_v: T,
    pub beta: T,
}

impl<T: Real> ModelHyper<T> {
    pub fn new(p_v: T, beta: T) -> Result<Self, GarpError> {
        let h = Self { p_v, beta };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), GarpError> {
        if !(self.p_v > T::zero() && self.p_v <= T::one()) {
            return Err(GarpError::InvalidParameter("p_v must lie in (0, 1]".into()));
        }
        if !(self.beta > T::zero()) {
            return Err(GarpError::InvalidParameter("beta must be positive".into()));
        }
        Ok(())
    }
}

/// Log marginal probability of an edge-label sequence with the given per-pair counts
/// under an `M_e`-category symmetric Dirichlet-multinomial with total mass `β`.
/// Zero counts may be omitted. Returns 0 when there are no edge units or no pairs.
pub fn log_dm_marginal<T: Real>(counts: impl IntoIterator<Item = usize>, beta: T, m_e: usize) -> T {
    if m_e == 0 {
        return T::zero();
    }
    let a = beta / T::of_usize(m_e);
    let la = a.lgamma();
    let mut n_e = 0usize;
    let mut acc = T::zero();
    for c in counts {
        if c > 0 {
            n_e += c;
            acc += (T::of_usize(c) + a).lgamma() - la;
        }
    }
    if n_e == 0 {
        return T::zero();
    }
    acc + beta.lgamma() - (T::of_usize(n_e) + beta).lgamma()
}

/// Unnormalized urn weights `n_{k,k'} + β/M_e` over all pairs `k < k' < K_v`, lexicographic.
pub fn dm_urn_weights<T: Real>(
    edge_counts: &BTreeMap<(usize, usize), usize>,
    beta: T,
    k_v: usize,
) -> Result<Vec<((usize, usize), T)>, GarpError> {
    if k_v < 2 {
        return Err(GarpError::TooFewVertices(k_v));
    }
    let a = beta / T::of_usize(n_pairs(k_v));
    Ok(vertex_pairs(k_v)
        .map(|p| {
            let c = edge_counts.get(&p).copied().unwrap_or(0);
            (p, T::of_usize(c) + a)
        })
        .collect())
}

fn log_pmf_core<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    state: &GraphAlignedState,
) -> T {
    let n_v = state.n_vertex_units();
    let n_e = state.n_edge_units();
    let mut lp = T::zero();
    if n_v > 0 {
        lp += T::of_usize(n_v) * hyper.p_v.ln();
        lp += prior
            .log_eppf(state.vertex_counts())
            .expect("nonempty vertex counts");
    }
    if n_e > 0 {
        lp += T::of_usize(n_e) * (T::one() - hyper.p_v).ln();
        lp += log_dm_marginal(
            state.edge_counts().values().copied(),
            hyper.beta,
            state.m_e(),
        );
    }
    lp
}

/// Unnormalized log pmf of a labeled graph-aligned state; `-inf` outside the support.
pub fn log_garp_pmf<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    state: &GraphAlignedState,
) -> T {
    if !state.truncation_event_holds() {
        return T::neg_infinity();
    }
    log_garp_class_mass(prior, hyper, state) - ln_factorial::<T>(state.k_v())
}

/// Log pmf summed over the `K_v!` relabelings of the vertices, i.e. the mass of the
/// graph-aligned partition itself.
pub fn log_garp_class_mass<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    state: &GraphAlignedState,
) -> T {
    if !state.truncation_event_holds() {
        return T::neg_infinity();
    }
    log_pmf_core(prior, hyper, state)
}

/// Relaxed-model log pmf: no support indicator, and with fewer than two vertices the
/// edge units carry the conventional label with probability one. Normalized over
/// labeled states.
pub fn log_relaxed_pmf<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    state: &GraphAlignedState,
) -> T {
    log_pmf_core(prior, hyper, state) - ln_factorial::<T>(state.k_v())
}

pub fn log_relaxed_class_mass<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    state: &GraphAlignedState,
) -> T {
    log_pmf_core(prior, hyper, state)
}

/// Predictive weights of the large-sample urn for a prior with a fixed number `M_v` of
/// vertex components. Vertex weights come first (`M_v` of them, labels beyond the
/// occupied ones have zero count), then edge weights over all `M_v(M_v − 1)/2` pairs.
/// The Gnedin prior requires `m_v` and then uses `ρ = 1`.
pub fn limit_urn_weights<T: Real>(
    prior: &GibbsPrior<T>,
    m_v: Option<usize>,
    hyper: &ModelHyper<T>,
    vertex_counts: &[usize],
    edge_counts: &BTreeMap<(usize, usize), usize>,
) -> Result<Vec<(Assignment, T)>, GarpError> {
    let (m_v, rho) = match (prior, m_v) {
        (GibbsPrior::SymDirichlet { m_v, rho }, _) => (*m_v, *rho),
        (GibbsPrior::Gnedin { .. }, Some(m)) => (m, T::one()),
        _ => {
            return Err(GarpError::InvalidParameter(
                "limiting urn needs a symmetric Dirichlet or a Gnedin prior with fixed M_v".into(),
            ))
        }
    };
    if vertex_counts.len() > m_v {
        return Err(GarpError::InvalidParameter(format!(
            "{} occupied vertices exceed M_v = {m_v}",
            vertex_counts.len()
        )));
    }
    let n_v: usize = vertex_counts.iter().sum();
    let n_e: usize = edge_counts.values().sum();
    let m_e = n_pairs(m_v);
    let pv = hyper.p_v;
    let pe = T::one() - pv;
    let vden = T::of_usize(n_v) + rho * T::of_usize(m_v);
    let mut out = Vec::with_capacity(m_v + m_e);
    for k in 0..m_v {
        let c = vertex_counts.get(k).copied().unwrap_or(0);
        out.push((Assignment::Vertex(k), pv * (T::of_usize(c) + rho) / vden));
    }
    if m_e > 0 {
        let a = hyper.beta / T::of_usize(m_e);
        let eden = hyper.beta + T::of_usize(n_e);
        for (x, y) in vertex_pairs(m_v) {
            let c = edge_counts.get(&(x, y)).copied().unwrap_or(0);
            out.push((Assignment::Edge(x, y), pe * (a + T::of_usize(c)) / eden));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Assignment::{Edge, Vertex};

    #[test]
    fn dm_values() {
        assert_eq!(log_dm_marginal(std::iter::empty(), 0.5f64, 3), 0.0);
        assert!(log_dm_marginal([7usize], 0.5f64, 1).abs() < 1e-13);
        let v = log_dm_marginal([1usize], 0.5f64, 3);
        assert!((v - (1.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn dm_urn_examples() {
        let mut c = BTreeMap::new();
        c.insert((0, 1), 4);
        assert_eq!(dm_urn_weights(&c, 0.5f64, 2).unwrap(), vec![((0, 1), 4.5)]);

        let w = dm_urn_weights(&BTreeMap::new(), 0.6f64, 3).unwrap();
        assert!(w.iter().all(|(_, v)| (v - 0.2).abs() < 1e-15));

        let mut c = BTreeMap::new();
        c.insert((0, 1), 2);
        let w = dm_urn_weights(&c, 0.6f64, 3).unwrap();
        assert!((w[0].1 - 2.2).abs() < 1e-15);
        assert!((w[1].1 - 0.2).abs() < 1e-15 && (w[2].1 - 0.2).abs() < 1e-15);

        assert_eq!(
            dm_urn_weights(&BTreeMap::new(), 0.6f64, 1),
            Err(GarpError::TooFewVertices(1))
        );
    }

    #[test]
    fn pmf_examples() {
        let prior = GibbsPrior::Dp { alpha: 1.0f64 };
        let h = ModelHyper::new(0.7, 1.0).unwrap();
        let s = GraphAlignedState::single_vertex(1);
        assert!((log_garp_pmf(&prior, &h, &s) - 0.7f64.ln()).abs() < 1e-15);

        let bad = GraphAlignedState::from_assignments(vec![Vertex(0), Edge(0, 1)]).unwrap();
        assert_eq!(log_garp_pmf(&prior, &h, &bad), f64::NEG_INFINITY);

        let h = ModelHyper::new(0.5, 1.0).unwrap();
        let s = GraphAlignedState::from_assignments(vec![Vertex(0), Vertex(1), Edge(0, 1)])
            .unwrap();
        let want = (0.25f64 * 0.5 * 0.5 * 0.5).ln();
        assert!((log_garp_pmf(&prior, &h, &s) - want).abs() < 1e-14);
    }

    #[test]
    fn limit_urn_empty() {
        let prior = GibbsPrior::SymDirichlet { m_v: 2, rho: 1.0f64 };
        let h = ModelHyper::new(0.5, 1.0).unwrap();
        let w = limit_urn_weights(&prior, None, &h, &[], &BTreeMap::new()).unwrap();
        assert_eq!(w.len(), 3);
        assert!((w[0].1 - 0.25).abs() < 1e-15);
        assert!((w[1].1 - 0.25).abs() < 1e-15);
        assert!((w[2].1 - 0.5).abs() < 1e-15);
        let dp = GibbsPrior::Dp { alpha: 1.0f64 };
        assert!(limit_urn_weights(&dp, Some(3), &h, &[], &BTreeMap::new()).is_err());
        let g = GibbsPrior::Gnedin { gamma: 0.5f64 };
        let w = limit_urn_weights(&g, Some(3), &h, &[2, 1], &BTreeMap::new()).unwrap();
        let total: f64 = w.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
