use garp::scalar::log_sum_exp;
use garp::GibbsPrior;

fn four_priors() -> Vec<GibbsPrior<f64>> {
    vec![
        GibbsPrior::Dp { alpha: 1.0 },
        GibbsPrior::Pyp {
            alpha: 1.0,
            sigma: 0.3,
        },
        GibbsPrior::Gnedin { gamma: 0.5 },
        GibbsPrior::SymDirichlet { m_v: 3, rho: 1.0 },
    ]
}

/// Block sizes of every set partition of `n` items, via restricted growth strings.
fn set_partition_sizes(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, sizes: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(sizes.clone());
            return;
        }
        for b in 0..sizes.len() {
            sizes[b] += 1;
            rec(i + 1, n, sizes, out);
            sizes[b] -= 1;
        }
        sizes.push(1);
        rec(i + 1, n, sizes, out);
        sizes.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

#[test]
fn eppf_sums_to_one_over_set_partitions() {
    for prior in four_priors() {
        for n in 1..=7 {
            let total: f64 = set_partition_sizes(n)
                .iter()
                .map(|s| prior.log_eppf(s).unwrap().exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "{prior:?} n={n}: {total}");
        }
    }
}

/// Labels appear in order, so the product of predictive weights along a sequence is the
/// probability of the partition itself; spreading it uniformly over the `K!` labelings
/// gives `EPPF / K!` per labeled state.
#[test]
fn sequential_urn_matches_eppf() {
    fn rec(prior: &GibbsPrior<f64>, counts: &mut Vec<usize>, logp: f64, left: usize, worst: &mut f64) {
        if !counts.is_empty() {
            let k = counts.len() as i32;
            let ln_kfact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
            let lhs = (logp - ln_kfact).exp();
            let rhs = (prior.log_eppf(counts).unwrap() - ln_kfact).exp();
            *worst = worst.max((lhs - rhs).abs());
        }
        if left == 0 {
            return;
        }
        let w = prior.gcrp_weights(counts);
        let z: f64 = w.iter().sum();
        for j in 0..w.len() {
            if w[j] == 0.0 {
                continue;
            }
            let step = (w[j] / z).ln();
            if j == counts.len() {
                counts.push(1);
                rec(prior, counts, logp + step, left - 1, worst);
                counts.pop();
            } else {
                counts[j] += 1;
                rec(prior, counts, logp + step, left - 1, worst);
                counts[j] -= 1;
            }
        }
    }
    for prior in four_priors() {
        let mut worst = 0.0;
        rec(&prior, &mut Vec::new(), 0.0, 6, &mut worst);
        assert!(worst < 1e-12, "{prior:?}: {worst}");
    }
}

#[test]
fn pyp_without_discount_is_dp() {
    let dp: GibbsPrior<f64> = GibbsPrior::Dp { alpha: 1.7 };
    let pyp = GibbsPrior::Pyp {
        alpha: 1.7,
        sigma: 0.0,
    };
    for sizes in set_partition_sizes(6) {
        assert!((dp.log_eppf(&sizes).unwrap() - pyp.log_eppf(&sizes).unwrap()).abs() < 1e-12);
    }
    assert_eq!(dp.gcrp_weights(&[3, 1]), pyp.gcrp_weights(&[3, 1]));
}

/// `EPPF = W_{n,k} Π (1 − σ)_{n_j − 1}` with `W_{n,k} = (n − σk) W_{n+1,k} + W_{n+1,k+1}`.
#[test]
fn gibbs_weights_satisfy_recursion() {
    for prior in four_priors() {
        let sigma = prior.gibbs_sigma();
        let ln_rising = |x: f64, m: usize| (0..m).map(|j| (x + j as f64).ln()).sum::<f64>();
        let ln_w = |n: usize, k: usize| {
            // Partition with k − 1 singletons and one block holding the rest.
            let mut sizes = vec![1; k - 1];
            sizes.push(n - k + 1);
            let base: f64 = sizes.iter().map(|&s| ln_rising(1.0 - sigma, s - 1)).sum();
            prior.log_eppf(&sizes).unwrap() - base
        };
        for n in 1..=20 {
            for k in 1..=n {
                let lhs = ln_w(n, k);
                if lhs == f64::NEG_INFINITY {
                    continue;
                }
                let a = (n as f64 - sigma * k as f64).ln() + ln_w(n + 1, k);
                let b = ln_w(n + 1, k + 1);
                let rhs = log_sum_exp(&[a, b]);
                assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "{prior:?} n={n} k={k}");
            }
        }
    }
}

#[test]
fn single_cluster_probability_is_one_block_eppf() {
    for prior in four_priors() {
        let mut last = 1.0;
        for n in 1..=40 {
            let g = prior.prob_single_cluster(n).unwrap();
            assert!((g.ln() - prior.log_eppf(&[n]).unwrap()).abs() < 1e-10);
            assert!(g <= last * (1.0 + 1e-12), "{prior:?} n={n}: {g} > {last}");
            last = g;
        }
    }
}

#[test]
fn single_cluster_rates() {
    let n = 10_000;
    for prior in four_priors() {
        let ratio = prior.prob_single_cluster(n).unwrap() / prior.single_cluster_rate(n);
        assert!((ratio - 1.0).abs() < 0.05, "{prior:?}: {ratio}");
    }
    let g: GibbsPrior<f64> = GibbsPrior::Gnedin { gamma: 0.5 };
    for n in 10..500 {
        let v = g.prob_single_cluster(n).unwrap();
        assert!((v - 0.5).abs() <= 2.0 * 0.5 * 0.5 / n as f64);
    }
}

#[test]
fn gnedin_complement_tends_to_gamma() {
    let g: GibbsPrior<f64> = GibbsPrior::Gnedin { gamma: 0.5 };
    let c = |n: usize| 1.0 - g.truncation_probability(0.7, n).unwrap();
    let (c100, c500) = (c(100), c(500));
    assert!((c500 - 0.5).abs() < (c100 - 0.5).abs());
    assert!((c500 - 0.5).abs() < 0.02);
    let dp: GibbsPrior<f64> = GibbsPrior::Dp { alpha: 1.0 };
    assert!(dp.truncation_probability(0.7, 100).unwrap() >= 0.95);
}
