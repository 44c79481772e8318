//! Forward simulation from the prior and the built-in synthetic data sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::{default_edge_geometry, edge_params, orthonormal_frame, EdgeGeometry, VertexParams};
use crate::linalg::{norm, Matrix};
use crate::partition::{Assignment, GraphAlignedState};
use crate::priors::{dm_urn_weights, GibbsPrior, ModelHyper};
use crate::scalar::Real;
use crate::GarpError;

/// Index drawn with probability proportional to `weights` (nonnegative, finite).
pub fn sample_categorical<T: Real, R: Rng + ?Sized>(rng: &mut R, weights: &[T]) -> usize {
    let total: T = weights.iter().copied().sum();
    let u = T::unit_uniform(rng) * total;
    let mut acc = T::zero();
    let mut last = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w > T::zero() {
            acc += w;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

/// One draw from the relaxed model, together with the log probability of the draw.
/// Vertex labels come out in order of appearance, so the log probability is the mass of
/// the drawn graph-aligned partition.
pub fn sample_relaxed<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    n: usize,
) -> (GraphAlignedState, T) {
    let mut logp = T::zero();
    let lp = hyper.p_v.ln();
    let lq = (T::one() - hyper.p_v).ln();
    let is_vertex: Vec<bool> = (0..n)
        .map(|_| {
            let v = T::unit_uniform(rng) < hyper.p_v;
            logp += if v { lp } else { lq };
            v
        })
        .collect();

    let mut counts: Vec<usize> = Vec::new();
    let mut labels = vec![Assignment::Vertex(0); n];
    for i in (0..n).filter(|&i| is_vertex[i]) {
        let w = prior.gcrp_weights(&counts);
        let j = sample_categorical(rng, &w);
        logp += (w[j] / w.iter().copied().sum::<T>()).ln();
        if j == counts.len() {
            counts.push(1);
        } else {
            counts[j] += 1;
        }
        labels[i] = Assignment::Vertex(j);
    }

    let k_v = counts.len();
    let mut edge_counts = std::collections::BTreeMap::new();
    for i in (0..n).filter(|&i| !is_vertex[i]) {
        if k_v < 2 {
            labels[i] = Assignment::Edge(0, 1);
            continue;
        }
        let w = dm_urn_weights(&edge_counts, hyper.beta, k_v).expect("k_v >= 2");
        let vals: Vec<T> = w.iter().map(|x| x.1).collect();
        let j = sample_categorical(rng, &vals);
        logp += (vals[j] / vals.iter().copied().sum::<T>()).ln();
        let (a, b) = w[j].0;
        *edge_counts.entry((a, b)).or_insert(0usize) += 1;
        labels[i] = Assignment::Edge(a, b);
    }
    let state = GraphAlignedState::from_assignments(labels).expect("valid by construction");
    (state, logp)
}

/// Rejection sampler for the truncated prior. Returns the state and the number of
/// attempts used.
pub fn sample_garp_prior<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    n: usize,
    max_attempts: usize,
) -> Result<(GraphAlignedState, usize), GarpError> {
    if max_attempts == 0 {
        return Err(GarpError::InvalidParameter("max_attempts must be positive".into()));
    }
    if let Ok(p) = prior.truncation_probability(hyper.p_v, n) {
        log::debug!("prior acceptance probability {p}");
    }
    for attempt in 1..=max_attempts {
        let (s, _) = sample_relaxed(rng, prior, hyper, n);
        if s.truncation_event_holds() {
            return Ok((s, attempt));
        }
    }
    Err(GarpError::AttemptsExhausted(max_attempts))
}

/// Built-in synthetic data sets on five vertices in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Gaussian vertices and Gaussian edges from the model itself.
    WellSpecified,
    /// Wider vertices; edges are shifted uniform rectangles.
    Misspecified,
    /// Vertices only.
    NonConnected,
}

/// Points with their generating labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LabeledDataset<T> {
    pub points: Vec<Vec<T>>,
    pub true_assignments: Vec<Assignment>,
    pub true_vertex_params: Vec<VertexParams<T>>,
    /// Pairs that carry edge units.
    pub adjacency: Vec<(usize, usize)>,
}

pub const SCENARIO_MEANS: [[f64; 2]; 5] = [[-5.0, -4.0], [-4.0, 2.0], [0.0, 7.0], [5.0, 3.0], [6.0, -3.0]];
/// Ring over the vertices in listed order.
pub const SCENARIO_EDGES: [(usize, usize); 5] = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)];
pub const SCENARIO_VERTEX_SIZE: usize = 200;
pub const SCENARIO_EDGE_SIZE: usize = 100;
/// Misspecified edges: shift along the edge direction and along its first perpendicular.
pub const MISSPECIFIED_SHIFT: f64 = 0.25;
pub const MISSPECIFIED_CROSS_SIDE: f64 = 2.0;

/// Generates a scenario deterministically from `seed`. Rows are shuffled.
pub fn generate_scenario<T: Real>(scenario: Scenario, seed: u64) -> Result<LabeledDataset<T>, GarpError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let var = match scenario {
        Scenario::Misspecified => 0.5,
        _ => 0.25,
    };
    let sd = T::lit(var).sqrt();
    let means: Vec<Vec<T>> = SCENARIO_MEANS.iter().map(|m| m.iter().map(|&x| T::lit(x)).collect()).collect();
    let params: Vec<VertexParams<T>> = means
        .iter()
        .map(|m| VertexParams {
            mu: m.clone(),
            sigma: Matrix::scaled_identity(2, T::lit(var)),
        })
        .collect();

    let mut rows: Vec<(Vec<T>, Assignment)> = Vec::new();
    for (k, m) in means.iter().enumerate() {
        for _ in 0..SCENARIO_VERTEX_SIZE {
            let y = m.iter().map(|&c| c + sd * T::standard_normal(&mut rng)).collect();
            rows.push((y, Assignment::Vertex(k)));
        }
    }
    let adjacency = match scenario {
        Scenario::NonConnected => Vec::new(),
        _ => SCENARIO_EDGES.to_vec(),
    };
    let geom: EdgeGeometry<T> = default_edge_geometry(T::lit(0.01), 2)?;
    for &(a, b) in &adjacency {
        match scenario {
            Scenario::WellSpecified => {
                let (mu, sigma) = edge_params(&means[a], &means[b], &geom)?;
                let chol = sigma.cholesky()?;
                for _ in 0..SCENARIO_EDGE_SIZE {
                    let z: Vec<T> = (0..2).map(|_| T::standard_normal(&mut rng)).collect();
                    let y = mu.iter().zip(chol.mul_lower(&z)).map(|(&m, dz)| m + dz).collect();
                    rows.push((y, Assignment::Edge(a, b)));
                }
            }
            Scenario::Misspecified => {
                let delta: Vec<T> = means[a].iter().zip(&means[b]).map(|(&x, &y)| x - y).collect();
                let len = norm(&delta);
                let e: Vec<T> = delta.iter().map(|&x| x / len).collect();
                let q = orthonormal_frame(&e);
                let u: Vec<T> = (0..2).map(|i| q[(i, 1)]).collect();
                let shift = T::lit(MISSPECIFIED_SHIFT);
                let half = T::lit(0.5);
                let center: Vec<T> = (0..2)
                    .map(|i| (means[a][i] + means[b][i]) * half + shift * (e[i] + u[i]))
                    .collect();
                let along = len * half;
                let cross = T::lit(MISSPECIFIED_CROSS_SIDE);
                for _ in 0..SCENARIO_EDGE_SIZE {
                    let s = (T::unit_uniform(&mut rng) - half) * along;
                    let t = (T::unit_uniform(&mut rng) - half) * cross;
                    let y = (0..2).map(|i| center[i] + s * e[i] + t * u[i]).collect();
                    rows.push((y, Assignment::Edge(a, b)));
                }
            }
            Scenario::NonConnected => unreachable!(),
        }
    }
    rows.shuffle(&mut rng);
    let (points, true_assignments) = rows.into_iter().unzip();
    Ok(LabeledDataset {
        points,
        true_assignments,
        true_vertex_params: params,
        adjacency,
    })
}
