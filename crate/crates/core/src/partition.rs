//! Graph-aligned partitions: each unit sits either in a vertex-cluster or on an edge
//! between two vertex-clusters.
//!
//! Labels are 0-based. Vertex labels are always dense (`0..K_v`); they are in order of
//! first appearance after [`GraphAlignedState::canonical_relabel`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::GarpError;

/// Cluster label of one unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Assignment {
    Vertex(usize),
    /// Always `Edge(k, k')` with `k < k'`.
    Edge(usize, usize),
}

impl Assignment {
    /// Edge label with endpoints in canonical order. Errors on a self-loop.
    pub fn edge(a: usize, b: usize) -> Result<Self, GarpError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self::Edge(a, b)),
            std::cmp::Ordering::Greater => Ok(Self::Edge(b, a)),
            std::cmp::Ordering::Equal => {
                Err(GarpError::InadmissibleLabel(format!("self-loop ({a},{a})")))
            }
        }
    }

    #[inline]
    pub fn is_vertex(&self) -> bool {
        matches!(self, Self::Vertex(_))
    }

    fn map_vertices(self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            Self::Vertex(k) => Self::Vertex(f(k)),
            Self::Edge(a, b) => {
                let (x, y) = (f(a), f(b));
                Self::Edge(x.min(y), x.max(y))
            }
        }
    }
}

/// Result of removing one unit from a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detach {
    /// The unit is the last member of a vertex that still has edge units; nothing changed.
    Blocked,
    Removed {
        previous: Assignment,
        /// Label of the vertex that became empty and was dropped; higher labels shift down by one.
        dropped_vertex: Option<usize>,
    },
}

/// Assignments of `N` units plus incrementally maintained cluster counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphAlignedState {
    assignments: Vec<Option<Assignment>>,
    vertex_counts: Vec<usize>,
    edge_counts: BTreeMap<(usize, usize), usize>,
    edge_load: Vec<usize>,
    n_vertex_units: usize,
    n_edge_units: usize,
}

impl GraphAlignedState {
    /// State with `n` detached units.
    pub fn empty(n: usize) -> Self {
        Self {
            assignments: vec![None; n],
            vertex_counts: Vec::new(),
            edge_counts: BTreeMap::new(),
            edge_load: Vec::new(),
            n_vertex_units: 0,
            n_edge_units: 0,
        }
    }

    /// All units in vertex 0.
    pub fn single_vertex(n: usize) -> Self {
        Self::from_assignments(vec![Assignment::Vertex(0); n]).expect("single vertex is valid")
    }

    /// Builds a state from labels. Vertex labels must be dense. Edges must join existing
    /// vertices, except that with fewer than two vertices edge units may carry the
    /// conventional label `Edge(0, 1)`; such states fail [`Self::truncation_event_holds`].
    pub fn from_assignments(labels: Vec<Assignment>) -> Result<Self, GarpError> {
        let k_v = labels
            .iter()
            .filter_map(|a| match a {
                Assignment::Vertex(k) => Some(k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut s = Self::empty(labels.len());
        s.vertex_counts = vec![0; k_v];
        s.edge_load = vec![0; k_v];
        for (i, a) in labels.into_iter().enumerate() {
            match a {
                Assignment::Vertex(_) => {}
                Assignment::Edge(x, y) if x < y && y < k_v => {}
                Assignment::Edge(0, 1) if k_v < 2 => {}
                other => {
                    return Err(GarpError::InadmissibleLabel(format!(
                        "{other:?} with {k_v} vertices"
                    )))
                }
            }
            s.assignments[i] = Some(a);
        }
        s.recount_in_place();
        if s.vertex_counts.iter().any(|&c| c == 0) {
            return Err(GarpError::InadmissibleLabel(
                "vertex labels have gaps".to_string(),
            ));
        }
        Ok(s)
    }

    fn recount_in_place(&mut self) {
        let k_v = self.vertex_counts.len();
        self.vertex_counts = vec![0; k_v];
        self.edge_load = vec![0; k_v];
        self.edge_counts.clear();
        self.n_vertex_units = 0;
        self.n_edge_units = 0;
        for a in self.assignments.iter().flatten() {
            match *a {
                Assignment::Vertex(k) => {
                    self.vertex_counts[k] += 1;
                    self.n_vertex_units += 1;
                }
                Assignment::Edge(x, y) => {
                    *self.edge_counts.entry((x, y)).or_insert(0) += 1;
                    self.n_edge_units += 1;
                    if y < k_v {
                        self.edge_load[x] += 1;
                        self.edge_load[y] += 1;
                    }
                }
            }
        }
    }

    /// Same state with every count recomputed from the assignments.
    pub fn recount(&self) -> Self {
        let mut s = self.clone();
        s.recount_in_place();
        s
    }

    pub fn n_units(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignment(&self, i: usize) -> Option<Assignment> {
        self.assignments[i]
    }

    pub fn assignments(&self) -> &[Option<Assignment>] {
        &self.assignments
    }

    /// Labels of a fully attached state.
    pub fn labels(&self) -> Vec<Assignment> {
        self.assignments
            .iter()
            .map(|a| a.expect("all units attached"))
            .collect()
    }

    pub fn vertex_counts(&self) -> &[usize] {
        &self.vertex_counts
    }

    /// Nonzero edge counts keyed by `(k, k')`, `k < k'`.
    pub fn edge_counts(&self) -> &BTreeMap<(usize, usize), usize> {
        &self.edge_counts
    }

    pub fn edge_count(&self, k: usize, kp: usize) -> usize {
        self.edge_counts.get(&(k, kp)).copied().unwrap_or(0)
    }

    /// Number of edge units touching vertex `k`.
    pub fn edge_load(&self, k: usize) -> usize {
        self.edge_load[k]
    }

    pub fn n_vertex_units(&self) -> usize {
        self.n_vertex_units
    }

    pub fn n_edge_units(&self) -> usize {
        self.n_edge_units
    }

    pub fn k_v(&self) -> usize {
        self.vertex_counts.len()
    }

    pub fn m_e(&self) -> usize {
        n_pairs(self.k_v())
    }

    /// `{N_e = 0} ∪ {M_e > 0}`.
    pub fn truncation_event_holds(&self) -> bool {
        self.n_edge_units == 0 || self.m_e() > 0
    }

    /// Whether removing unit `i` would empty a vertex that still has adjacent edge units.
    pub fn is_blocked(&self, i: usize) -> Result<bool, GarpError> {
        match self.get(i)? {
            Some(Assignment::Vertex(k)) => {
                Ok(self.vertex_counts[k] == 1 && self.edge_load[k] > 0)
            }
            Some(Assignment::Edge(..)) => Ok(false),
            None => Err(GarpError::Detached(i)),
        }
    }

    fn get(&self, i: usize) -> Result<Option<Assignment>, GarpError> {
        self.assignments
            .get(i)
            .copied()
            .ok_or(GarpError::IndexOutOfRange {
                index: i,
                len: self.assignments.len(),
            })
    }

    /// Removes unit `i` unless it is blocked. An emptied vertex is dropped at once and
    /// the labels above it shift down by one.
    pub fn detach_unit(&mut self, i: usize) -> Result<Detach, GarpError> {
        if self.is_blocked(i)? {
            return Ok(Detach::Blocked);
        }
        let previous = self.assignments[i].take().expect("checked attached");
        let mut dropped_vertex = None;
        match previous {
            Assignment::Vertex(k) => {
                self.vertex_counts[k] -= 1;
                self.n_vertex_units -= 1;
                if self.vertex_counts[k] == 0 {
                    self.drop_vertex(k);
                    dropped_vertex = Some(k);
                }
            }
            Assignment::Edge(x, y) => {
                let c = self.edge_counts.get_mut(&(x, y)).expect("edge present");
                *c -= 1;
                if *c == 0 {
                    self.edge_counts.remove(&(x, y));
                }
                self.n_edge_units -= 1;
                if y < self.edge_load.len() {
                    self.edge_load[x] -= 1;
                    self.edge_load[y] -= 1;
                }
            }
        }
        Ok(Detach::Removed {
            previous,
            dropped_vertex,
        })
    }

    fn drop_vertex(&mut self, k: usize) {
        debug_assert_eq!(self.edge_load[k], 0);
        self.vertex_counts.remove(k);
        self.edge_load.remove(k);
        let shift = |j: usize| if j > k { j - 1 } else { j };
        for a in self.assignments.iter_mut().flatten() {
            *a = a.map_vertices(shift);
        }
        self.edge_counts = std::mem::take(&mut self.edge_counts)
            .into_iter()
            .map(|((x, y), c)| ((shift(x), shift(y)), c))
            .collect();
    }

    /// Places detached unit `i`. Admissible labels: an existing vertex, the new vertex
    /// `Vertex(K_v)`, or `Edge(k, k')` with `k < k' < K_v`.
    pub fn attach_unit(&mut self, i: usize, a: Assignment) -> Result<(), GarpError> {
        if self.get(i)?.is_some() {
            return Err(GarpError::AlreadyAttached(i));
        }
        let k_v = self.k_v();
        match a {
            Assignment::Vertex(k) if k < k_v => {
                self.vertex_counts[k] += 1;
            }
            Assignment::Vertex(k) if k == k_v => {
                self.vertex_counts.push(1);
                self.edge_load.push(0);
            }
            Assignment::Edge(x, y) if x < y && y < k_v => {
                *self.edge_counts.entry((x, y)).or_insert(0) += 1;
                self.edge_load[x] += 1;
                self.edge_load[y] += 1;
            }
            other => {
                return Err(GarpError::InadmissibleLabel(format!(
                    "{other:?} with {k_v} vertices"
                )))
            }
        }
        if a.is_vertex() {
            self.n_vertex_units += 1;
        } else {
            self.n_edge_units += 1;
        }
        self.assignments[i] = Some(a);
        Ok(())
    }

    /// `order[new] = old`: vertex labels sorted by first appearance among vertex units.
    pub fn canonical_order(&self) -> Vec<usize> {
        first_appearance(self.assignments.iter().flatten().copied(), self.k_v())
    }

    /// Relabels vertices with `old_to_new`, which must be a permutation of `0..K_v`.
    pub fn permute_vertices(&self, old_to_new: &[usize]) -> Self {
        assert_eq!(old_to_new.len(), self.k_v());
        let k_v = self.k_v();
        let f = |j: usize| if j < k_v { old_to_new[j] } else { j };
        let mut s = self.clone();
        for a in s.assignments.iter_mut().flatten() {
            *a = a.map_vertices(f);
        }
        s.recount_in_place();
        s
    }

    /// Vertex labels in order of first appearance over units `0..N`.
    pub fn canonical_relabel(&self) -> Self {
        let order = self.canonical_order();
        let mut old_to_new = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            old_to_new[old] = new;
        }
        self.permute_vertices(&old_to_new)
    }
}

fn first_appearance(labels: impl Iterator<Item = Assignment>, k_v: usize) -> Vec<usize> {
    let mut seen = vec![false; k_v];
    let mut order = Vec::with_capacity(k_v);
    for a in labels {
        if let Assignment::Vertex(k) = a {
            if !seen[k] {
                seen[k] = true;
                order.push(k);
            }
        }
    }
    order
}

/// Canonical relabeling of a raw label sequence whose vertex labels may be sparse.
/// Edge endpoints that never occur as a vertex label keep their value.
pub fn canonical_labels(labels: &[Assignment]) -> Vec<Assignment> {
    let mut map = BTreeMap::new();
    for a in labels {
        if let Assignment::Vertex(k) = *a {
            let next = map.len();
            map.entry(k).or_insert(next);
        }
    }
    labels
        .iter()
        .map(|a| a.map_vertices(|j| map.get(&j).copied().unwrap_or(j)))
        .collect()
}

/// `K (K − 1) / 2`.
#[inline]
pub fn n_pairs(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// All pairs `(k, k')` with `k < k' < K`, lexicographic.
pub fn vertex_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |a| ((a + 1)..k).map(move |b| (a, b)))
}
