//! Marginal Gibbs sampler for graph-aligned Gaussian mixtures.
//!
//! Each sweep reassigns every unit (vertex or edge, existing or new vertex) from its
//! full conditional with new-vertex parameters integrated out, then refreshes each
//! vertex's mean and covariance: exactly from the conjugate posterior when the vertex
//! has no edge units, otherwise by an independence Metropolis-Hastings step that uses
//! that posterior as proposal.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::{
    edge_params, log_mvn, log_predictive_new_vertex, niw_posterior_from_stats, sample_niw,
    EdgeGeometry, Mvn, NiwParams, StudentT, SuffStats, VertexParams,
};
use crate::linalg::Matrix;
use crate::partition::{n_pairs, vertex_pairs, Assignment, Detach, GraphAlignedState};
use crate::priors::{log_garp_class_mass, GibbsPrior, ModelHyper, MAX_ENUMERATION_N};
use crate::scalar::{log_sum_exp, Real};
use crate::simulate::sample_categorical;
use crate::GarpError;

/// Everything the sampler needs to know about the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Model<T> {
    pub prior: GibbsPrior<T>,
    pub hyper: ModelHyper<T>,
    pub niw: NiwParams<T>,
    pub geom: EdgeGeometry<T>,
}

impl<T: Real> Model<T> {
    pub fn validate(&self) -> Result<(), GarpError> {
        self.prior.validate()?;
        self.hyper.validate()?;
        self.niw.validate()?;
        EdgeGeometry::new(self.geom.r0, self.geom.r1).map(|_| ())
    }
}

/// How the assignment full conditional is weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Ratio of joint probabilities; leaves the posterior invariant.
    Exact,
    /// The published per-option weights: no edge-normalizer change when a vertex is
    /// created, and `β/M_e + N_v` as the edge denominator.
    PaperFaithful,
}

/// Observation model. `Flat` replaces every density by 1 so the chain targets the prior;
/// it exists for testing the partition moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Likelihood {
    Gaussian,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    pub mode: WeightMode,
    pub likelihood: Likelihood,
    /// Extra pass that resamples each label while keeping its vertex/edge type.
    pub fixed_type_pass: bool,
    /// Number of vertices in the starting state; 1 puts every unit in one vertex,
    /// larger values seed vertices by k-means++.
    pub init_clusters: usize,
    /// Leading sweeps that use the printed weights regardless of `mode`; capped at
    /// `burnin` so retained draws always come from `mode`.
    pub warmup: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            burnin: 5_000,
            thin: 2,
            seed: 0,
            mode: WeightMode::Exact,
            likelihood: Likelihood::Gaussian,
            fixed_type_pass: false,
            init_clusters: 10,
            warmup: 2_500,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), GarpError> {
        if self.burnin >= self.n_iter {
            return Err(GarpError::InvalidParameter("burnin must be below n_iter".into()));
        }
        if self.thin == 0 {
            return Err(GarpError::InvalidParameter("thin must be at least 1".into()));
        }
        if self.init_clusters == 0 {
            return Err(GarpError::InvalidParameter("init_clusters must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether sweep `t` (1-based) is kept.
    pub fn retains(&self, t: usize) -> bool {
        t > self.burnin && (t - self.burnin) % self.thin == 0
    }

    pub fn n_retained(&self) -> usize {
        (self.n_iter - self.burnin) / self.thin
    }
}

/// Latent state: the partition and one parameter pair per vertex. Edge parameters are
/// always derived from the adjacent vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChainState<T> {
    pub partition: GraphAlignedState,
    pub vertex_params: Vec<VertexParams<T>>,
}

/// One retained draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChainSample<T> {
    pub iteration: usize,
    pub assignments: Vec<Assignment>,
    pub vertex_params: Vec<VertexParams<T>>,
}

/// Output of one chain.
#[derive(Clone, Debug)]
pub struct ChainRun<T> {
    pub samples: Vec<ChainSample<T>>,
    pub mh_acceptance: f64,
    pub elapsed_secs: f64,
}

/// Unnormalized log weights of every admissible label for a unit that has been detached
/// from `part`. `lik` returns the log density of the unit under an existing vertex or an
/// edge; `log_gnew` is its prior predictive density under a fresh vertex. `only_vertex`
/// restricts to vertex labels (`Some(true)`) or edge labels (`Some(false)`).
#[allow(clippy::too_many_arguments)]
fn log_weights_core<T: Real>(
    part: &GraphAlignedState,
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    mode: WeightMode,
    only_vertex: Option<bool>,
    log_gnew: T,
    mut lik: impl FnMut(Assignment) -> Result<T, GarpError>,
) -> Result<Vec<(Assignment, T)>, GarpError> {
    let counts = part.vertex_counts();
    let k = counts.len();
    let mut out = Vec::with_capacity(k + 1 + n_pairs(k));
    let lp = hyper.p_v.ln();
    let lq = (T::one() - hyper.p_v).ln();
    if only_vertex != Some(false) {
        let w = prior.gcrp_weights(counts);
        let lt = w.iter().copied().sum::<T>().ln();
        for (kk, &wk) in w[..k].iter().enumerate() {
            let a = Assignment::Vertex(kk);
            out.push((a, lp + wk.ln() - lt + lik(a)?));
        }
        if w[k] > T::zero() {
            let mut l = lp + w[k].ln() - lt + log_gnew;
            if mode == WeightMode::Exact && part.n_edge_units() > 0 {
                l += dm_growth(part, hyper.beta);
            }
            out.push((Assignment::Vertex(k), l));
        }
    }
    if only_vertex != Some(true) && k >= 2 && lq > T::neg_infinity() {
        let a = hyper.beta / T::of_usize(n_pairs(k));
        let den = match mode {
            WeightMode::Exact => T::of_usize(part.n_edge_units()) + hyper.beta,
            WeightMode::PaperFaithful => a + T::of_usize(part.n_vertex_units()),
        }
        .ln();
        for (x, y) in vertex_pairs(k) {
            let e = Assignment::Edge(x, y);
            let c = T::of_usize(part.edge_count(x, y));
            out.push((e, lq + (c + a).ln() - den + lik(e)?));
        }
    }
    Ok(out)
}

/// Change in the log edge marginal when one more vertex (hence more pairs) exists.
fn dm_growth<T: Real>(part: &GraphAlignedState, beta: T) -> T {
    let k = part.k_v();
    let a_old = beta / T::of_usize(n_pairs(k));
    let a_new = beta / T::of_usize(n_pairs(k + 1));
    let (la_old, la_new) = (a_old.lgamma(), a_new.lgamma());
    part.edge_counts()
        .values()
        .map(|&c| {
            let c = T::of_usize(c);
            (c + a_new).lgamma() - la_new - (c + a_old).lgamma() + la_old
        })
        .sum()
}

/// Unnormalized log weights for reassigning a unit with value `y` into the detached state.
pub fn log_assignment_weights<T: Real>(
    detached: &ChainState<T>,
    y: &[T],
    model: &Model<T>,
    mode: WeightMode,
) -> Result<Vec<(Assignment, T)>, GarpError> {
    let params = &detached.vertex_params;
    let log_gnew = log_predictive_new_vertex(y, &model.niw)?;
    log_weights_core(
        &detached.partition,
        &model.prior,
        &model.hyper,
        mode,
        None,
        log_gnew,
        |a| match a {
            Assignment::Vertex(k) => log_mvn(y, &params[k].mu, &params[k].sigma),
            Assignment::Edge(x, z) => {
                let (m, s) = edge_params(&params[x].mu, &params[z].mu, &model.geom)?;
                log_mvn(y, &m, &s)
            }
        },
    )
}

/// Normalized full conditional of unit `i` in the labeling of the detached state, or an
/// empty list when the unit is blocked. Also returns the detached state.
pub fn assignment_weights<T: Real>(
    state: &ChainState<T>,
    data: &[Vec<T>],
    i: usize,
    model: &Model<T>,
    mode: WeightMode,
) -> Result<(ChainState<T>, Vec<(Assignment, T)>), GarpError> {
    let mut detached = state.clone();
    match detached.partition.detach_unit(i)? {
        Detach::Blocked => return Ok((detached, Vec::new())),
        Detach::Removed {
            dropped_vertex: Some(k),
            ..
        } => {
            detached.vertex_params.remove(k);
        }
        Detach::Removed { .. } => {}
    }
    let lw = log_assignment_weights(&detached, &data[i], model, mode)?;
    Ok((detached, normalize(lw)))
}

fn normalize<T: Real>(lw: Vec<(Assignment, T)>) -> Vec<(Assignment, T)> {
    let vals: Vec<T> = lw.iter().map(|x| x.1).collect();
    let z = log_sum_exp(&vals);
    lw.into_iter().map(|(a, l)| (a, (l - z).exp())).collect()
}

/// Brute-force full conditional of detached unit `i`: for every admissible label, the
/// joint log probability of the partition and all observations, with a new vertex's
/// parameters integrated out; then normalized.
pub fn exact_full_conditional_oracle<T: Real>(
    detached: &ChainState<T>,
    data: &[Vec<T>],
    i: usize,
    model: &Model<T>,
) -> Result<Vec<(Assignment, T)>, GarpError> {
    let n = data.len();
    if n > MAX_ENUMERATION_N {
        return Err(GarpError::EnumerationGuard {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let k = detached.partition.k_v();
    let mut options: Vec<Assignment> = (0..=k).map(Assignment::Vertex).collect();
    options.extend(vertex_pairs(k).map(|(a, b)| Assignment::Edge(a, b)));
    let mut out = Vec::new();
    for opt in options {
        let mut part = detached.partition.clone();
        part.attach_unit(i, opt)?;
        let mut lj = log_garp_class_mass(&model.prior, &model.hyper, &part);
        if lj == T::neg_infinity() {
            out.push((opt, lj));
            continue;
        }
        for (j, y) in data.iter().enumerate() {
            lj += match part.assignment(j) {
                None => T::zero(),
                Some(Assignment::Vertex(v)) if v == k => log_predictive_new_vertex(y, &model.niw)?,
                Some(Assignment::Vertex(v)) => {
                    let p = &detached.vertex_params[v];
                    log_mvn(y, &p.mu, &p.sigma)?
                }
                Some(Assignment::Edge(a, b)) => {
                    let (pa, pb) = (&detached.vertex_params[a], &detached.vertex_params[b]);
                    let (m, s) = edge_params(&pa.mu, &pb.mu, &model.geom)?;
                    log_mvn(y, &m, &s)?
                }
            };
        }
        out.push((opt, lj));
    }
    Ok(normalize(out))
}

/// Per-vertex Gaussians plus lazily built edge Gaussians.
#[derive(Clone, Debug)]
struct DensityCache<T> {
    vertex: Vec<Mvn<T>>,
    edge: BTreeMap<(usize, usize), Mvn<T>>,
}

impl<T: Real> DensityCache<T> {
    fn new(params: &[VertexParams<T>]) -> Result<Self, GarpError> {
        let vertex = params
            .iter()
            .map(|p| Mvn::new(p.mu.clone(), &p.sigma))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            vertex,
            edge: BTreeMap::new(),
        })
    }

    fn edge(
        &mut self,
        a: usize,
        b: usize,
        params: &[VertexParams<T>],
        geom: &EdgeGeometry<T>,
    ) -> Result<&Mvn<T>, GarpError> {
        if !self.edge.contains_key(&(a, b)) {
            let (m, s) = edge_params(&params[a].mu, &params[b].mu, geom)?;
            self.edge.insert((a, b), Mvn::new(m, &s)?);
        }
        Ok(&self.edge[&(a, b)])
    }
}

/// Gaussian log likelihood of a set of points summarized by `stats`.
fn stats_loglik<T: Real>(stats: &SuffStats<T>, mu: &[T], sigma: &Matrix<T>) -> Result<T, GarpError> {
    if stats.n == 0 {
        return Ok(T::zero());
    }
    let chol = sigma.cholesky()?;
    let prec = chol.inverse();
    let n = T::of_usize(stats.n);
    let d = mu.len();
    // Σ_j (y_j − μ)(y_j − μ)ᵀ = O − s μᵀ − μ sᵀ + n μ μᵀ
    let mut scatter = stats.outer.clone();
    for r in 0..d {
        for c in 0..d {
            scatter[(r, c)] += n * mu[r] * mu[c] - stats.sum[r] * mu[c] - mu[r] * stats.sum[c];
        }
    }
    let quad = prec.matmul(&scatter).trace();
    let half = T::lit(0.5);
    Ok(-half * n * (T::of_usize(d) * T::TAU().ln() + chol.log_det()) - half * quad)
}

/// One chain's mutable sampler state with its caches.
pub struct Sampler<'a, T: Real> {
    data: &'a [Vec<T>],
    model: &'a Model<T>,
    config: ChainConfig,
    state: ChainState<T>,
    vstats: Vec<SuffStats<T>>,
    estats: BTreeMap<(usize, usize), SuffStats<T>>,
    cache: Option<DensityCache<T>>,
    log_gnew: Vec<T>,
    rng: ChaCha8Rng,
    mode: WeightMode,
    mh_proposed: u64,
    mh_accepted: u64,
}

impl<'a, T: Real> Sampler<'a, T> {
    /// Sampler started from the configured initialization. `stream` separates chains
    /// that share a seed.
    pub fn new(
        data: &'a [Vec<T>],
        model: &'a Model<T>,
        config: ChainConfig,
        stream: u64,
    ) -> Result<Self, GarpError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        if data.is_empty() {
            return Err(GarpError::InvalidParameter("no data".into()));
        }
        let labels = if config.init_clusters > 1 && config.likelihood == Likelihood::Gaussian {
            kmeans_pp_labels(&mut rng, data, config.init_clusters)
        } else {
            vec![0; data.len()]
        };
        let partition = GraphAlignedState::from_assignments(
            labels.into_iter().map(Assignment::Vertex).collect(),
        )?;
        let state = ChainState {
            partition,
            vertex_params: Vec::new(),
        };
        let mut s = Self::from_state(data, model, config, state, rng)?;
        for k in 0..s.state.partition.k_v() {
            let p = s.draw_vertex_params(k)?;
            s.state.vertex_params.push(p);
        }
        s.rebuild_cache()?;
        Ok(s)
    }

    /// Sampler started from an explicit state. With the Gaussian likelihood the state
    /// must carry one parameter pair per vertex; missing pairs are filled in otherwise.
    pub fn from_state(
        data: &'a [Vec<T>],
        model: &'a Model<T>,
        config: ChainConfig,
        mut state: ChainState<T>,
        rng: ChaCha8Rng,
    ) -> Result<Self, GarpError> {
        model.validate()?;
        config.validate()?;
        let d = model.niw.dim();
        if let Some(bad) = data.iter().position(|y| y.len() != d) {
            return Err(GarpError::DimensionMismatch(format!(
                "row {bad} has {} columns, expected {d}",
                data[bad].len()
            )));
        }
        if state.partition.n_units() != data.len() {
            return Err(GarpError::DimensionMismatch("state and data sizes differ".into()));
        }
        let flat = config.likelihood == Likelihood::Flat;
        let log_gnew = if flat {
            vec![T::zero(); data.len()]
        } else {
            let t = StudentT::from_niw(&model.niw)?;
            data.iter().map(|y| t.log_density(y)).collect()
        };
        let mut vstats = vec![SuffStats::new(d); state.partition.k_v()];
        let mut estats = BTreeMap::new();
        for (i, a) in state.partition.assignments().iter().enumerate() {
            match a {
                Some(Assignment::Vertex(k)) => vstats[*k].add(&data[i]),
                Some(Assignment::Edge(x, y)) => estats
                    .entry((*x, *y))
                    .or_insert_with(|| SuffStats::new(d))
                    .add(&data[i]),
                None => return Err(GarpError::Detached(i)),
            }
        }
        if flat {
            while state.vertex_params.len() < state.partition.k_v() {
                state.vertex_params.push(placeholder(&model.niw));
            }
        }
        let mut s = Self {
            data,
            model,
            config: config.clone(),
            state,
            vstats,
            estats,
            cache: None,
            log_gnew,
            rng,
            mode: config.mode,
            mh_proposed: 0,
            mh_accepted: 0,
        };
        if s.state.vertex_params.len() == s.state.partition.k_v() {
            s.rebuild_cache()?;
        }
        Ok(s)
    }

    pub fn state(&self) -> &ChainState<T> {
        &self.state
    }

    pub fn into_state(self) -> ChainState<T> {
        self.state
    }

    /// Fraction of accepted Metropolis-Hastings proposals so far.
    pub fn mh_acceptance(&self) -> f64 {
        if self.mh_proposed == 0 {
            1.0
        } else {
            self.mh_accepted as f64 / self.mh_proposed as f64
        }
    }

    fn flat(&self) -> bool {
        self.config.likelihood == Likelihood::Flat
    }

    fn rebuild_cache(&mut self) -> Result<(), GarpError> {
        self.cache = if self.flat() {
            None
        } else {
            Some(DensityCache::new(&self.state.vertex_params)?)
        };
        Ok(())
    }

    fn draw_vertex_params(&mut self, k: usize) -> Result<VertexParams<T>, GarpError> {
        let post = niw_posterior_from_stats(&self.model.niw, &self.vstats[k]);
        sample_niw(&mut self.rng, &post)
    }

    /// Resamples the label of unit `i` (no-op when blocked). With `keep_type` the unit
    /// stays a vertex unit or an edge unit.
    pub fn update_assignment(&mut self, i: usize, keep_type: bool) -> Result<(), GarpError> {
        let y = &self.data[i];
        let previous = match self.state.partition.detach_unit(i)? {
            Detach::Blocked => return Ok(()),
            Detach::Removed {
                previous,
                dropped_vertex,
            } => {
                match previous {
                    Assignment::Vertex(k) => self.vstats[k].remove(y),
                    Assignment::Edge(a, b) => {
                        let s = self.estats.get_mut(&(a, b)).expect("edge stats");
                        s.remove(y);
                        if s.n == 0 {
                            self.estats.remove(&(a, b));
                        }
                    }
                }
                if let Some(k) = dropped_vertex {
                    self.drop_vertex(k);
                }
                previous
            }
        };
        let only_vertex = keep_type.then(|| previous.is_vertex());
        let flat = self.flat();
        let params = &self.state.vertex_params;
        let geom = &self.model.geom;
        let cache = &mut self.cache;
        let lw = log_weights_core(
            &self.state.partition,
            &self.model.prior,
            &self.model.hyper,
            self.mode,
            only_vertex,
            self.log_gnew[i],
            |a| {
                if flat {
                    return Ok(T::zero());
                }
                let c = cache.as_mut().expect("density cache");
                match a {
                    Assignment::Vertex(k) => Ok(c.vertex[k].log_density(y)),
                    Assignment::Edge(x, z) => Ok(c.edge(x, z, params, geom)?.log_density(y)),
                }
            },
        )?;
        let vals: Vec<T> = lw.iter().map(|x| x.1).collect();
        let mx = vals.iter().copied().fold(T::neg_infinity(), T::max);
        let probs: Vec<T> = vals.iter().map(|&v| (v - mx).exp()).collect();
        let choice = lw[sample_categorical(&mut self.rng, &probs)].0;
        self.attach(i, choice)
    }

    fn drop_vertex(&mut self, k: usize) {
        self.state.vertex_params.remove(k);
        self.vstats.remove(k);
        let shift = |j: usize| if j > k { j - 1 } else { j };
        self.estats = std::mem::take(&mut self.estats)
            .into_iter()
            .map(|((a, b), s)| ((shift(a), shift(b)), s))
            .collect();
        if let Some(c) = self.cache.as_mut() {
            c.vertex.remove(k);
            c.edge = std::mem::take(&mut c.edge)
                .into_iter()
                .filter(|((a, b), _)| *a != k && *b != k)
                .map(|((a, b), m)| ((shift(a), shift(b)), m))
                .collect();
        }
    }

    fn attach(&mut self, i: usize, a: Assignment) -> Result<(), GarpError> {
        let y = &self.data[i];
        let k_before = self.state.partition.k_v();
        self.state.partition.attach_unit(i, a)?;
        match a {
            Assignment::Vertex(k) if k == k_before => {
                let mut s = SuffStats::new(y.len());
                s.add(y);
                self.vstats.push(s);
                let p = if self.flat() {
                    placeholder(&self.model.niw)
                } else {
                    self.draw_vertex_params(k)?
                };
                if let Some(c) = self.cache.as_mut() {
                    c.vertex.push(Mvn::new(p.mu.clone(), &p.sigma)?);
                }
                self.state.vertex_params.push(p);
            }
            Assignment::Vertex(k) => self.vstats[k].add(y),
            Assignment::Edge(x, z) => self
                .estats
                .entry((x, z))
                .or_insert_with(|| SuffStats::new(y.len()))
                .add(y),
        }
        Ok(())
    }

    /// Refreshes the parameters of vertex `k`.
    pub fn update_vertex_params(&mut self, k: usize) -> Result<(), GarpError> {
        if self.flat() {
            return Ok(());
        }
        let proposal = self.draw_vertex_params(k)?;
        if self.state.partition.edge_load(k) > 0 {
            self.mh_proposed += 1;
            let mut log_ratio = T::zero();
            for (&(a, b), stats) in self.estats.iter() {
                if a != k && b != k {
                    continue;
                }
                let other = &self.state.vertex_params[if a == k { b } else { a }].mu;
                let old = &self.state.vertex_params[k].mu;
                let (m_new, s_new) = edge_params(&proposal.mu, other, &self.model.geom)?;
                let (m_old, s_old) = edge_params(old, other, &self.model.geom)?;
                log_ratio += stats_loglik(stats, &m_new, &s_new)? - stats_loglik(stats, &m_old, &s_old)?;
            }
            if !(T::unit_uniform(&mut self.rng).ln() < log_ratio) {
                return Ok(());
            }
            self.mh_accepted += 1;
        }
        if let Some(c) = self.cache.as_mut() {
            c.vertex[k] = Mvn::new(proposal.mu.clone(), &proposal.sigma)?;
            c.edge.retain(|&(a, b), _| a != k && b != k);
        }
        self.state.vertex_params[k] = proposal;
        Ok(())
    }

    /// One pass over all units, an optional type-preserving pass, one pass over all
    /// vertices, then canonical relabeling.
    pub fn sweep(&mut self) -> Result<(), GarpError> {
        for i in 0..self.data.len() {
            self.update_assignment(i, false)?;
        }
        if self.config.fixed_type_pass {
            for i in 0..self.data.len() {
                self.update_assignment(i, true)?;
            }
        }
        for k in 0..self.state.partition.k_v() {
            self.update_vertex_params(k)?;
        }
        self.relabel();
        Ok(())
    }

    fn relabel(&mut self) {
        let order = self.state.partition.canonical_order();
        if order.iter().enumerate().all(|(a, &b)| a == b) {
            return;
        }
        let mut old_to_new = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            old_to_new[old] = new;
        }
        self.state.partition = self.state.partition.permute_vertices(&old_to_new);
        self.state.vertex_params = order.iter().map(|&o| self.state.vertex_params[o].clone()).collect();
        self.vstats = order.iter().map(|&o| self.vstats[o].clone()).collect();
        let remap = |(a, b): (usize, usize)| {
            let (x, y) = (old_to_new[a], old_to_new[b]);
            (x.min(y), x.max(y))
        };
        self.estats = std::mem::take(&mut self.estats)
            .into_iter()
            .map(|(p, s)| (remap(p), s))
            .collect();
        if let Some(c) = self.cache.as_mut() {
            c.vertex = order.iter().map(|&o| c.vertex[o].clone()).collect();
            c.edge = std::mem::take(&mut c.edge)
                .into_iter()
                .map(|(p, m)| (remap(p), m))
                .collect();
        }
    }

    /// Weight mode used by subsequent assignment updates.
    pub fn set_mode(&mut self, mode: WeightMode) {
        self.mode = mode;
    }

    pub fn snapshot(&self, iteration: usize) -> ChainSample<T> {
        ChainSample {
            iteration,
            assignments: self.state.partition.labels(),
            vertex_params: if self.flat() {
                Vec::new()
            } else {
                self.state.vertex_params.clone()
            },
        }
    }

    /// Runs the configured number of sweeps and returns the retained draws.
    pub fn run(&mut self) -> Result<Vec<ChainSample<T>>, GarpError> {
        let mut out = Vec::with_capacity(self.config.n_retained());
        let n_iter = self.config.n_iter;
        let step = (n_iter / 10).max(1);
        for t in 1..=n_iter {
            self.set_mode(if t <= self.config.warmup.min(self.config.burnin) {
                WeightMode::PaperFaithful
            } else {
                self.config.mode
            });
            self.sweep()?;
            if self.config.retains(t) {
                out.push(self.snapshot(t));
            }
            if t % step == 0 {
                log::info!(
                    "sweep {t}/{n_iter}: K_v = {}, N_e = {}",
                    self.state.partition.k_v(),
                    self.state.partition.n_edge_units()
                );
            }
        }
        Ok(out)
    }
}

fn placeholder<T: Real>(niw: &NiwParams<T>) -> VertexParams<T> {
    VertexParams {
        mu: niw.mu0.clone(),
        sigma: niw.sigma0.clone(),
    }
}

/// k-means++ seeding followed by a few Lloyd iterations; returns dense labels in order
/// of first appearance.
pub fn kmeans_pp_labels<T: Real, R: Rng + ?Sized>(rng: &mut R, data: &[Vec<T>], k: usize) -> Vec<usize> {
    let k = k.min(data.len());
    let dist2 = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>();
    let mut centers: Vec<Vec<T>> = vec![data[rng.random_range(0..data.len())].clone()];
    let mut best: Vec<T> = data.iter().map(|y| dist2(y, &centers[0])).collect();
    while centers.len() < k {
        let j = sample_categorical(rng, &best);
        centers.push(data[j].clone());
        for (b, y) in best.iter_mut().zip(data) {
            *b = b.min(dist2(y, centers.last().unwrap()));
        }
    }
    let mut labels = vec![0; data.len()];
    for _ in 0..10 {
        for (l, y) in labels.iter_mut().zip(data) {
            *l = (0..centers.len())
                .min_by(|&a, &b| dist2(y, &centers[a]).partial_cmp(&dist2(y, &centers[b])).unwrap())
                .unwrap();
        }
        let d = data[0].len();
        let mut sums = vec![vec![T::zero(); d]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (l, y) in labels.iter().zip(data) {
            counts[*l] += 1;
            for (s, &v) in sums[*l].iter_mut().zip(y) {
                *s += v;
            }
        }
        for c in 0..centers.len() {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|&s| s / T::of_usize(counts[c])).collect();
            }
        }
    }
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Runs one chain from the configured seed.
pub fn run_chain<T: Real>(
    config: &ChainConfig,
    data: &[Vec<T>],
    model: &Model<T>,
) -> Result<ChainRun<T>, GarpError> {
    run_stream(config, data, model, 0)
}

fn run_stream<T: Real>(
    config: &ChainConfig,
    data: &[Vec<T>],
    model: &Model<T>,
    stream: u64,
) -> Result<ChainRun<T>, GarpError> {
    let start = Instant::now();
    let mut s = Sampler::new(data, model, config.clone(), stream)?;
    let samples = s.run()?;
    Ok(ChainRun {
        samples,
        mh_acceptance: s.mh_acceptance(),
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Runs `n_chains` chains in parallel. Chain `c` uses the configured seed with rng
/// stream `c`, so results do not depend on scheduling.
pub fn run_chains<T: Real>(
    config: &ChainConfig,
    n_chains: usize,
    data: &[Vec<T>],
    model: &Model<T>,
) -> Result<Vec<ChainRun<T>>, GarpError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_chains as u64)
            .map(|c| scope.spawn(move || run_stream(config, data, model, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::default_edge_geometry;

    fn model() -> Model<f64> {
        Model {
            prior: GibbsPrior::Gnedin { gamma: 0.5 },
            hyper: ModelHyper::new(0.5, 0.5).unwrap(),
            niw: NiwParams::new(vec![0.0, 0.0], 0.01, 5.0, Matrix::identity(2)).unwrap(),
            geom: default_edge_geometry(0.01, 2).unwrap(),
        }
    }

    #[test]
    fn retention_schedule() {
        let c = ChainConfig::default();
        assert_eq!(c.n_retained(), 2500);
        assert_eq!((1..=c.n_iter).filter(|&t| c.retains(t)).count(), 2500);
        let bad = ChainConfig {
            burnin: 10,
            n_iter: 10,
            ..ChainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn no_edge_options_with_one_vertex() {
        let m = model();
        let data = vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.0, 0.2]];
        let state = ChainState {
            partition: GraphAlignedState::single_vertex(3),
            vertex_params: vec![VertexParams {
                mu: vec![0.0, 0.0],
                sigma: Matrix::identity(2),
            }],
        };
        let (_, w) = assignment_weights(&state, &data, 0, &m, WeightMode::Exact).unwrap();
        assert!(w.iter().all(|(a, _)| a.is_vertex()));
        let total: f64 = w.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blocked_unit_gets_no_weights() {
        let m = model();
        let data = vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![1.5, 0.0]];
        let part = GraphAlignedState::from_assignments(vec![
            Assignment::Vertex(0),
            Assignment::Vertex(1),
            Assignment::Edge(0, 1),
        ])
        .unwrap();
        let params = vec![
            VertexParams {
                mu: vec![0.0, 0.0],
                sigma: Matrix::identity(2),
            },
            VertexParams {
                mu: vec![3.0, 0.0],
                sigma: Matrix::identity(2),
            },
        ];
        let state = ChainState {
            partition: part,
            vertex_params: params,
        };
        let (_, w) = assignment_weights(&state, &data, 0, &m, WeightMode::Exact).unwrap();
        assert!(w.is_empty());
        let mut s = Sampler::from_state(
            &data,
            &m,
            ChainConfig::default(),
            state.clone(),
            ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        s.update_assignment(0, false).unwrap();
        assert_eq!(s.state(), &state);
    }

    #[test]
    fn stats_loglik_matches_pointwise() {
        let pts = [vec![0.3, -1.0], vec![2.0, 0.5], vec![-0.7, 0.1]];
        let mu = [0.2, 0.1];
        let sigma = Matrix::from_rows(&[vec![1.3, 0.4], vec![0.4, 0.8]]);
        let stats = SuffStats::from_points(2, pts.iter().map(|v| v.as_slice()));
        let direct: f64 = pts.iter().map(|y| log_mvn(y, &mu, &sigma).unwrap()).sum();
        assert!((stats_loglik(&stats, &mu, &sigma).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn kmeans_labels_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<Vec<f64>> = (0..30).map(|i| vec![(i / 10) as f64 * 10.0, 0.0]).collect();
        let l = kmeans_pp_labels(&mut rng, &data, 3);
        assert_eq!(l[0], 0);
        assert_eq!(*l.iter().max().unwrap(), 2);
    }
}
