//! Point estimates and uncertainty summaries from retained samples.
//!
//! The vertex/edge split is the per-unit posterior mode, the vertex partition minimizes
//! a variation-of-information criterion built from co-clustering frequencies, and edge
//! labels are Rao-Blackwellized full conditionals given the estimated vertices.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::{edge_params, niw_posterior, Mvn, NiwParams, VertexParams};
use crate::mcmc::{ChainSample, Model};
use crate::partition::{n_pairs, vertex_pairs, Assignment};
use crate::scalar::{log_sum_exp, Real};
use crate::GarpError;

/// Per-unit vertex frequency, mode and the posterior probability of the other type.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMode {
    pub v_bar: Vec<f64>,
    pub v_hat: Vec<bool>,
    pub uncertainty: Vec<f64>,
}

pub fn vhat<T>(samples: &[ChainSample<T>]) -> Result<VertexMode, GarpError> {
    let first = samples.first().ok_or(GarpError::EmptySamples)?;
    let n = first.assignments.len();
    let mut hits = vec![0usize; n];
    for s in samples {
        for (h, a) in hits.iter_mut().zip(&s.assignments) {
            *h += a.is_vertex() as usize;
        }
    }
    let t = samples.len() as f64;
    let v_bar: Vec<f64> = hits.iter().map(|&h| h as f64 / t).collect();
    let v_hat: Vec<bool> = v_bar.iter().map(|&v| v > 0.5).collect();
    let uncertainty = v_bar
        .iter()
        .zip(&v_hat)
        .map(|(&v, &h)| if h { 1.0 - v } else { v })
        .collect();
    Ok(VertexMode {
        v_bar,
        v_hat,
        uncertainty,
    })
}

/// Symmetric `|subset| × |subset|` matrix (row-major) of the fraction of samples in which
/// two units sit in the same vertex. The diagonal is 1.
pub fn coclustering<T>(samples: &[ChainSample<T>], subset: &[usize]) -> Vec<f64> {
    let m = subset.len();
    let mut p = vec![0.0; m * m];
    let mut labels = vec![usize::MAX; m];
    for s in samples {
        for (l, &i) in labels.iter_mut().zip(subset) {
            *l = match s.assignments[i] {
                Assignment::Vertex(k) => k,
                Assignment::Edge(..) => usize::MAX,
            };
        }
        for a in 0..m {
            if labels[a] == usize::MAX {
                continue;
            }
            for b in (a + 1)..m {
                if labels[a] == labels[b] {
                    p[a * m + b] += 1.0;
                }
            }
        }
    }
    let t = samples.len().max(1) as f64;
    for a in 0..m {
        p[a * m + a] = 1.0;
        for b in (a + 1)..m {
            p[a * m + b] /= t;
            p[b * m + a] = p[a * m + b];
        }
    }
    p
}

/// Variation of information in natural logs.
pub fn vi_loss(a: &[usize], b: &[usize]) -> Result<f64, GarpError> {
    if a.len() != b.len() {
        return Err(GarpError::DimensionMismatch("partitions of different sizes".into()));
    }
    let n = a.len() as f64;
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut ca: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cb: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cab: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
        *cab.entry((x, y)).or_default() += 1.0;
    }
    let h = |m: &BTreeMap<usize, f64>| -m.values().map(|&c| c / n * (c / n).ln()).sum::<f64>();
    let mi: f64 = cab
        .iter()
        .map(|(&(x, y), &c)| c / n * (c * n / (ca[&x] * cb[&y])).ln())
        .sum();
    Ok((h(&ca) + h(&cb) - 2.0 * mi).max(0.0))
}

/// Adjusted Rand index between two labelings of the same units.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, GarpError> {
    if a.len() != b.len() {
        return Err(GarpError::DimensionMismatch("partitions of different sizes".into()));
    }
    let c2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut ca: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cb: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cab: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
        *cab.entry((x, y)).or_default() += 1.0;
    }
    let index: f64 = cab.values().map(|&c| c2(c)).sum();
    let sa: f64 = ca.values().map(|&c| c2(c)).sum();
    let sb: f64 = cb.values().map(|&c| c2(c)).sum();
    let expected = sa * sb / c2(a.len() as f64);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Relabels to first-appearance order.
pub fn canonical_partition(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Lower-bound surrogate of the posterior expected VI of `labels` given the co-clustering
/// matrix `p` (row-major, `m × m`), in natural logs.
pub fn expected_vi_bound(labels: &[usize], p: &[f64]) -> f64 {
    let m = labels.len();
    if m == 0 {
        return 0.0;
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let mut total = 0.0;
    for i in 0..m {
        let row = &p[i * m..(i + 1) * m];
        let cl = &members[&labels[i]];
        let s: f64 = cl.iter().map(|&j| row[j]).sum();
        let r: f64 = row.iter().sum();
        total += (cl.len() as f64).log2() + r.log2() - 2.0 * s.log2();
    }
    // log2 terms keep the form familiar; convert to natural logs.
    total / m as f64 * std::f64::consts::LN_2
}

/// Greedy minimizer of [`expected_vi_bound`] state: cluster sizes and, for every unit, the
/// co-clustering mass towards each cluster.
struct Greedy<'a> {
    m: usize,
    p: &'a [f64],
    labels: Vec<usize>,
    sizes: Vec<usize>,
    mass: Vec<Vec<f64>>,
}

impl<'a> Greedy<'a> {
    fn new(p: &'a [f64], labels: &[usize]) -> Self {
        let m = labels.len();
        let labels = canonical_partition(labels);
        let k = labels.iter().max().map_or(0, |&x| x + 1);
        let mut sizes = vec![0; k];
        let mut mass = vec![vec![0.0; k]; m];
        for (j, &l) in labels.iter().enumerate() {
            sizes[l] += 1;
            for (i, row) in mass.iter_mut().enumerate() {
                row[l] += p[i * m + j];
            }
        }
        Self {
            m,
            p,
            labels,
            sizes,
            mass,
        }
    }

    fn term(size: usize, mass: f64) -> f64 {
        if size == 0 {
            0.0
        } else {
            (size as f64).ln() - 2.0 * mass.ln()
        }
    }

    /// Change in Σ_i [ln |c_i| − 2 ln Σ_{j ∈ c_i} p_ij] if unit `i` moves to cluster `b`
    /// (`b == sizes.len()` opens a new cluster).
    fn delta(&self, i: usize, b: usize, members: &[Vec<usize>]) -> f64 {
        let a = self.labels[i];
        if a == b {
            return 0.0;
        }
        let m = self.m;
        let mut d = 0.0;
        for &j in &members[a] {
            let pji = self.p[j * m + i];
            if j == i {
                d -= Self::term(self.sizes[a], self.mass[i][a]);
            } else {
                d += Self::term(self.sizes[a] - 1, self.mass[j][a] - pji) - Self::term(self.sizes[a], self.mass[j][a]);
            }
        }
        let (nb, mb) = if b < self.sizes.len() {
            (self.sizes[b], self.mass[i][b])
        } else {
            (0, 0.0)
        };
        if b < self.sizes.len() {
            for &j in &members[b] {
                let pji = self.p[j * m + i];
                d += Self::term(nb + 1, self.mass[j][b] + pji) - Self::term(nb, self.mass[j][b]);
            }
        }
        d + Self::term(nb + 1, mb + self.p[i * m + i])
    }

    fn apply(&mut self, i: usize, b: usize) {
        let a = self.labels[i];
        if b == self.sizes.len() {
            self.sizes.push(0);
            for row in self.mass.iter_mut() {
                row.push(0.0);
            }
        }
        for j in 0..self.m {
            let pji = self.p[j * self.m + i];
            self.mass[j][a] -= pji;
            self.mass[j][b] += pji;
        }
        self.sizes[a] -= 1;
        self.sizes[b] += 1;
        self.labels[i] = b;
    }

    fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Sweeps until no single move lowers the criterion.
    fn refine(&mut self, max_sweeps: usize) {
        for _ in 0..max_sweeps {
            let mut improved = false;
            for i in 0..self.m {
                let members = self.members();
                let k = self.sizes.len();
                let mut best = (self.labels[i], -1e-12);
                for b in 0..=k {
                    if b < k && self.sizes[b] == 0 {
                        continue;
                    }
                    let d = self.delta(i, b, &members);
                    if d < best.1 {
                        best = (b, d);
                    }
                }
                if best.0 != self.labels[i] {
                    self.apply(i, best.0);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// Vertex partition of `subset` minimizing the expected-VI surrogate over every sampled
/// partition plus greedy refinements from the best sample and from `n_starts` random
/// starts. Units that are edge units in a sample are singletons in that candidate.
pub fn point_estimate_partition<T>(
    samples: &[ChainSample<T>],
    subset: &[usize],
    seed: u64,
    n_starts: usize,
) -> Result<(Vec<usize>, f64), GarpError> {
    if samples.is_empty() {
        return Err(GarpError::EmptySamples);
    }
    let m = subset.len();
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let p = coclustering(samples, subset);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let consider = |labels: Vec<usize>, best: &mut Option<(Vec<usize>, f64)>| {
        let loss = expected_vi_bound(&labels, &p);
        if best.as_ref().is_none_or(|b| loss < b.1) {
            *best = Some((labels, loss));
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut max_k = 1;
    for s in samples {
        let raw: Vec<usize> = subset
            .iter()
            .enumerate()
            .map(|(a, &i)| match s.assignments[i] {
                Assignment::Vertex(k) => k,
                Assignment::Edge(..) => usize::MAX - a,
            })
            .collect();
        let labels = canonical_partition(&raw);
        max_k = max_k.max(labels.iter().max().map_or(0, |&x| x + 1));
        if seen.insert(labels.clone()) {
            consider(labels, &mut best);
        }
    }
    let mut starts = vec![best.as_ref().expect("at least one sample").0.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_starts {
        let k = rng.random_range(1..=max_k.min(m));
        let mut labels: Vec<usize> = (0..m).map(|a| a % k).collect();
        labels.shuffle(&mut rng);
        starts.push(labels);
    }
    for start in starts {
        let mut g = Greedy::new(&p, &start);
        g.refine(50);
        consider(canonical_partition(&g.labels), &mut best);
    }
    let (labels, loss) = best.expect("nonempty candidate set");
    Ok((canonical_partition(&labels), loss))
}

/// Rao-Blackwellized edge labels given the estimated vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    /// Sum over edge units of their probability on each pair.
    pub edge_prob_table: BTreeMap<(usize, usize), f64>,
    /// `(unit, pair, probability of that pair)` for every edge unit, by unit.
    pub edge_assignments: Vec<(usize, (usize, usize), f64)>,
}

/// Posterior-mean vertex parameters of each estimated cluster under the conjugate prior.
pub fn posterior_mean_params<T: Real>(
    data: &[Vec<T>],
    vertex_units: &[usize],
    labels: &[usize],
    niw: &NiwParams<T>,
) -> Vec<VertexParams<T>> {
    let k = labels.iter().max().map_or(0, |&x| x + 1);
    let d = niw.dim();
    (0..k)
        .map(|c| {
            let pts: Vec<Vec<T>> = vertex_units
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(&i, _)| data[i].clone())
                .collect();
            let post = niw_posterior(niw, &pts);
            let denom = post.nu0 - T::of_usize(d) - T::one();
            VertexParams {
                mu: post.mu0,
                sigma: post.sigma0.scale(T::one() / denom),
            }
        })
        .collect()
}

/// Per-sample map from sampled vertex labels to estimated clusters by majority overlap.
fn label_map<T>(sample: &ChainSample<T>, vertex_units: &[usize], labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut overlap: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&i, &c) in vertex_units.iter().zip(labels) {
        if let Assignment::Vertex(k) = sample.assignments[i] {
            *overlap.entry((k, c)).or_default() += 1;
        }
    }
    let mut best: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&(k, c), &n) in &overlap {
        let e = best.entry(k).or_insert((c, n));
        if n > e.1 {
            *e = (c, n);
        }
    }
    best.into_iter().map(|(k, (c, _))| (k, c)).collect()
}

/// Edge labels for `edge_units` averaged over samples: each sample contributes the full
/// conditional `∝ (n_{kk'}^{−i} + β/M_e) N(y_i | edge Gaussian)` with counts mapped onto
/// the estimated vertices and the edge Gaussians built from `params`.
pub fn edge_point_estimate<T: Real>(
    samples: &[ChainSample<T>],
    data: &[Vec<T>],
    vertex_units: &[usize],
    labels: &[usize],
    edge_units: &[usize],
    params: &[VertexParams<T>],
    model: &Model<T>,
) -> Result<EdgeEstimate, GarpError> {
    let k = params.len();
    if edge_units.is_empty() {
        return Ok(EdgeEstimate {
            edge_prob_table: BTreeMap::new(),
            edge_assignments: Vec::new(),
        });
    }
    if k < 2 {
        return Err(GarpError::TooFewVertices(k));
    }
    if samples.is_empty() {
        return Err(GarpError::EmptySamples);
    }
    let pairs: Vec<(usize, usize)> = vertex_pairs(k).collect();
    let mut dens = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let (m, s) = edge_params(&params[a].mu, &params[b].mu, &model.geom)?;
        dens.push(Mvn::new(m, &s)?);
    }
    let loglik: Vec<Vec<f64>> = edge_units
        .iter()
        .map(|&i| dens.iter().map(|g| g.log_density(&data[i]).to_f64().unwrap()).collect())
        .collect();
    let a = model.hyper.beta.to_f64().unwrap() / n_pairs(k) as f64;
    let pair_index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(j, &p)| (p, j)).collect();
    let mut probs = vec![vec![0.0; pairs.len()]; edge_units.len()];
    for s in samples {
        let map = label_map(s, vertex_units, labels);
        let mapped = |x: Assignment| -> Option<usize> {
            match x {
                Assignment::Edge(p, q) => {
                    let (u, v) = (*map.get(&p)?, *map.get(&q)?);
                    (u != v).then(|| pair_index[&(u.min(v), u.max(v))])
                }
                Assignment::Vertex(_) => None,
            }
        };
        let mut counts = vec![0.0; pairs.len()];
        for &x in &s.assignments {
            if let Some(j) = mapped(x) {
                counts[j] += 1.0;
            }
        }
        for (u, &i) in edge_units.iter().enumerate() {
            let own = mapped(s.assignments[i]);
            let lw: Vec<f64> = (0..pairs.len())
                .map(|j| {
                    let c = counts[j] - if own == Some(j) { 1.0 } else { 0.0 };
                    (c + a).ln() + loglik[u][j]
                })
                .collect();
            let z = log_sum_exp(&lw);
            for (pj, l) in probs[u].iter_mut().zip(&lw) {
                *pj += (l - z).exp();
            }
        }
    }
    let t = samples.len() as f64;
    let mut table: BTreeMap<(usize, usize), f64> = pairs.iter().map(|&p| (p, 0.0)).collect();
    let mut assignments = Vec::with_capacity(edge_units.len());
    for (u, &i) in edge_units.iter().enumerate() {
        let mut arg = 0;
        for j in 0..pairs.len() {
            probs[u][j] /= t;
            *table.get_mut(&pairs[j]).unwrap() += probs[u][j];
            if probs[u][j] > probs[u][arg] {
                arg = j;
            }
        }
        assignments.push((i, pairs[arg], probs[u][arg]));
    }
    Ok(EdgeEstimate {
        edge_prob_table: table,
        edge_assignments: assignments,
    })
}

/// Frequency of each number of vertices across samples.
pub fn kv_posterior<T>(samples: &[ChainSample<T>]) -> Result<BTreeMap<usize, f64>, GarpError> {
    if samples.is_empty() {
        return Err(GarpError::EmptySamples);
    }
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for s in samples {
        let k = s
            .assignments
            .iter()
            .filter_map(|a| match a {
                Assignment::Vertex(k) => Some(k + 1),
                Assignment::Edge(..) => None,
            })
            .max()
            .unwrap_or(0);
        *out.entry(k).or_default() += 1.0;
    }
    let t = samples.len() as f64;
    out.values_mut().for_each(|v| *v /= t);
    Ok(out)
}

/// Options for [`summarize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub seed: u64,
    pub n_starts: usize,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self { seed: 0, n_starts: 10 }
    }
}

/// Everything reported about a fit. The co-clustering matrix is kept out of the
/// serialized form because of its size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PosteriorSummary<T> {
    pub n_samples: usize,
    pub v_bar: Vec<f64>,
    pub v_hat: Vec<bool>,
    pub uncertainty: Vec<f64>,
    /// Point estimate for every unit: vertex labels for vertex units, argmax pairs for
    /// edge units.
    pub assignments: Vec<Assignment>,
    pub k_v: usize,
    pub expected_vi: f64,
    pub vertex_params: Vec<VertexParams<T>>,
    pub edge_prob_table: BTreeMap<(usize, usize), f64>,
    pub edge_unit_prob: Vec<f64>,
    pub kv_posterior: BTreeMap<usize, f64>,
    #[serde(skip)]
    pub vertex_units: Vec<usize>,
    #[serde(skip)]
    pub cocluster: Vec<f64>,
}

impl<T: Real> PosteriorSummary<T> {
    /// Pairs whose probability mass is at least `min_mass` units.
    pub fn adjacency(&self, min_mass: f64) -> Vec<(usize, usize)> {
        self.edge_prob_table
            .iter()
            .filter(|(_, &v)| v >= min_mass)
            .map(|(&p, _)| p)
            .collect()
    }

    /// Pairs that receive at least one edge unit in the point estimate.
    pub fn occupied_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .assignments
            .iter()
            .filter_map(|a| match *a {
                Assignment::Edge(x, y) => Some((x, y)),
                Assignment::Vertex(_) => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub fn summarize<T: Real>(
    samples: &[ChainSample<T>],
    data: &[Vec<T>],
    model: &Model<T>,
    options: &SummaryOptions,
) -> Result<PosteriorSummary<T>, GarpError> {
    let mode = vhat(samples)?;
    if data.len() != mode.v_bar.len() {
        return Err(GarpError::DimensionMismatch("samples and data sizes differ".into()));
    }
    let vertex_units: Vec<usize> = (0..data.len()).filter(|&i| mode.v_hat[i]).collect();
    let edge_units: Vec<usize> = (0..data.len()).filter(|&i| !mode.v_hat[i]).collect();
    let (labels, expected_vi) = point_estimate_partition(samples, &vertex_units, options.seed, options.n_starts)?;
    let params = posterior_mean_params(data, &vertex_units, &labels, &model.niw);
    let edges = edge_point_estimate(samples, data, &vertex_units, &labels, &edge_units, &params, model)?;
    let mut assignments = vec![Assignment::Vertex(0); data.len()];
    for (&i, &l) in vertex_units.iter().zip(&labels) {
        assignments[i] = Assignment::Vertex(l);
    }
    let mut edge_unit_prob = vec![0.0; data.len()];
    for &(i, (a, b), p) in &edges.edge_assignments {
        assignments[i] = Assignment::Edge(a, b);
        edge_unit_prob[i] = p;
    }
    let cocluster = coclustering(samples, &vertex_units);
    Ok(PosteriorSummary {
        n_samples: samples.len(),
        v_bar: mode.v_bar,
        v_hat: mode.v_hat,
        uncertainty: mode.uncertainty,
        assignments,
        k_v: params.len(),
        expected_vi,
        vertex_params: params,
        edge_prob_table: edges.edge_prob_table,
        edge_unit_prob,
        kv_posterior: kv_posterior(samples)?,
        vertex_units,
        cocluster,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(a: Vec<Assignment>) -> ChainSample<f64> {
        ChainSample {
            iteration: 0,
            assignments: a,
            vertex_params: Vec::new(),
        }
    }

    #[test]
    fn vhat_rules() {
        use Assignment::{Edge, Vertex};
        let s = vec![
            sample(vec![Vertex(0), Vertex(0), Vertex(0)]),
            sample(vec![Vertex(0), Edge(0, 1), Vertex(0)]),
        ];
        let m = vhat(&s).unwrap();
        assert_eq!(m.v_bar, vec![1.0, 0.5, 1.0]);
        assert_eq!(m.v_hat, vec![true, false, true]);
        assert_eq!(m.uncertainty, vec![0.0, 0.5, 0.0]);
        assert_eq!(vhat::<f64>(&[]), Err(GarpError::EmptySamples));
    }

    #[test]
    fn vi_values() {
        assert!((vi_loss(&[0, 0], &[0, 1]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(vi_loss(&[0, 1, 1], &[5, 3, 3]).unwrap(), 0.0);
        assert!(vi_loss(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn ari_values() {
        assert!((adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap() - 1.0).abs() < 1e-12);
        let v = adjusted_rand_index(&[0, 0, 1, 1, 2, 2], &[0, 0, 1, 1, 1, 1]).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn coclustering_half() {
        use Assignment::Vertex;
        let s = vec![sample(vec![Vertex(0), Vertex(0)]), sample(vec![Vertex(0), Vertex(1)])];
        assert_eq!(coclustering(&s, &[0, 1]), vec![1.0, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn kv_table() {
        use Assignment::{Edge, Vertex};
        let s = vec![
            sample(vec![Vertex(0), Vertex(1), Edge(0, 1)]),
            sample(vec![Vertex(0), Vertex(0), Vertex(0)]),
        ];
        let t = kv_posterior(&s).unwrap();
        assert_eq!(t[&1], 0.5);
        assert_eq!(t[&2], 0.5);
    }
}
