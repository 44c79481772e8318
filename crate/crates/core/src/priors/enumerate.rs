//! Exhaustive enumeration of small state spaces and the finite EPPF of the marginal
//! partition (vertex and edge blocks pooled).

use super::garp::{log_dm_marginal, log_garp_class_mass, ModelHyper};
use super::GibbsPrior;
use crate::partition::{n_pairs, vertex_pairs, Assignment, GraphAlignedState};
use crate::scalar::{ln_factorial, log_sum_exp, Real};
use crate::GarpError;

/// Largest `N` accepted by the brute-force routines.
pub const MAX_ENUMERATION_N: usize = 10;

fn guard(n: usize) -> Result<(), GarpError> {
    if n > MAX_ENUMERATION_N {
        Err(GarpError::EnumerationGuard {
            n,
            max: MAX_ENUMERATION_N,
        })
    } else {
        Ok(())
    }
}

/// Calls `visit` once per canonically labeled state of `n` units. With `include_relaxed`
/// the states outside the truncation event (edge units with fewer than two vertices,
/// labeled `Edge(0, 1)`) are visited too.
pub fn enumerate_states(
    n: usize,
    include_relaxed: bool,
    mut visit: impl FnMut(&GraphAlignedState),
) -> Result<(), GarpError> {
    guard(n)?;
    for mask in 0u32..(1u32 << n) {
        let vertex_units: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let edge_units: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        let mut labels = vec![Assignment::Vertex(0); n];
        for_each_rgs(vertex_units.len(), |rgs, k_v| {
            for (&u, &z) in vertex_units.iter().zip(rgs) {
                labels[u] = Assignment::Vertex(z);
            }
            if edge_units.is_empty() {
                visit(&GraphAlignedState::from_assignments(labels.clone()).unwrap());
                return;
            }
            if k_v < 2 {
                if include_relaxed {
                    for &u in &edge_units {
                        labels[u] = Assignment::Edge(0, 1);
                    }
                    visit(&GraphAlignedState::from_assignments(labels.clone()).unwrap());
                }
                return;
            }
            let pairs: Vec<_> = vertex_pairs(k_v).collect();
            let mut digits = vec![0usize; edge_units.len()];
            loop {
                for (&u, &d) in edge_units.iter().zip(&digits) {
                    labels[u] = Assignment::Edge(pairs[d].0, pairs[d].1);
                }
                visit(&GraphAlignedState::from_assignments(labels.clone()).unwrap());
                if !odometer(&mut digits, pairs.len()) {
                    break;
                }
            }
        });
    }
    Ok(())
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Restricted growth strings of length `n` (set partitions in order of appearance).
fn for_each_rgs(n: usize, mut f: impl FnMut(&[usize], usize)) {
    fn rec(pos: usize, k: usize, buf: &mut Vec<usize>, n: usize, f: &mut dyn FnMut(&[usize], usize)) {
        if pos == n {
            f(buf, k);
            return;
        }
        for z in 0..=k {
            buf.push(z);
            rec(pos + 1, if z == k { k + 1 } else { k }, buf, n, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(n);
    rec(0, 0, &mut buf, n, &mut f);
}

/// Block ids in order of first appearance.
fn block_pattern(labels: impl Iterator<Item = Assignment>) -> Vec<usize> {
    let mut seen: Vec<Assignment> = Vec::new();
    labels
        .map(|a| match seen.iter().position(|&b| b == a) {
            Some(p) => p,
            None => {
                seen.push(a);
                seen.len() - 1
            }
        })
        .collect()
}

/// Probability that the pooled partition (vertex and edge blocks alike) equals one fixed
/// set partition with block sizes `sizes`. Sums over which blocks are vertices; edge
/// blocks occupy distinct pairs.
pub fn feppf<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    sizes: &[usize],
) -> Result<T, GarpError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(GarpError::InvalidParameter("block sizes must be positive".into()));
    }
    let b = sizes.len();
    if b > 24 {
        return Err(GarpError::InvalidParameter("too many blocks".into()));
    }
    let n: usize = sizes.iter().sum();
    let lp = hyper.p_v.ln();
    let lq = (T::one() - hyper.p_v).ln();
    let mut terms = Vec::new();
    for k_v in 1..=b {
        let k_e = b - k_v;
        let m_e = n_pairs(k_v);
        if k_e > m_e {
            continue;
        }
        for_each_subset(b, k_v, |chosen| {
            let mut vs = Vec::with_capacity(k_v);
            let mut es = Vec::with_capacity(k_e);
            for (j, &s) in sizes.iter().enumerate() {
                if chosen[j] {
                    vs.push(s)
                } else {
                    es.push(s)
                }
            }
            let n_v: usize = vs.iter().sum();
            let n_e = n - n_v;
            let mut t = T::of_usize(n_v) * lp + prior.log_eppf(&vs).expect("nonempty");
            if n_e > 0 {
                t += T::of_usize(n_e) * lq
                    + ln_factorial::<T>(m_e)
                    - ln_factorial::<T>(m_e - k_e)
                    + log_dm_marginal(es.iter().copied(), hyper.beta, m_e);
            }
            terms.push(t);
        });
    }
    let log_support = prior.truncation_probability(hyper.p_v, n)?.ln();
    Ok((log_sum_exp(&terms) - log_support).exp())
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[bool])) {
    fn rec(start: usize, left: usize, chosen: &mut Vec<bool>, f: &mut dyn FnMut(&[bool])) {
        if left == 0 {
            f(chosen);
            return;
        }
        let n = chosen.len();
        for j in start..=(n - left) {
            chosen[j] = true;
            rec(j + 1, left - 1, chosen, f);
            chosen[j] = false;
        }
    }
    let mut chosen = vec![false; n];
    rec(0, k, &mut chosen, &mut f);
}

/// Same quantity as [`feppf`], by summing the normalized pmf over every state whose
/// pooled partition is the contiguous partition with the given sizes.
pub fn feppf_bruteforce<T: Real>(
    prior: &GibbsPrior<T>,
    hyper: &ModelHyper<T>,
    sizes: &[usize],
) -> Result<T, GarpError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(GarpError::InvalidParameter("block sizes must be positive".into()));
    }
    let n: usize = sizes.iter().sum();
    guard(n)?;
    let target: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
        .collect();
    let mut all = Vec::new();
    let mut hit = Vec::new();
    enumerate_states(n, false, |s| {
        let lm = log_garp_class_mass(prior, hyper, s);
        all.push(lm);
        if block_pattern(s.assignments().iter().flatten().copied()) == target {
            hit.push(lm);
        }
    })?;
    Ok((log_sum_exp(&hit) - log_sum_exp(&all)).exp())
}
