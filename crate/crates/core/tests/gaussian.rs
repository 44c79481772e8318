use garp::gaussian::{
    default_edge_geometry, edge_covariance_via_frame, edge_params, log_marginal_likelihood, log_mvn,
    log_predictive_new_vertex, niw_posterior, sample_niw, EdgeGeometry, StudentT,
};
use garp::{Matrix, NiwParams, Real};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |i, j| m[(i, j)])
}

fn na_log_mvn(y: &[f64], mu: &[f64], sigma: &DMatrix<f64>) -> f64 {
    let d = y.len();
    let r = DVector::from_iterator(d, y.iter().zip(mu).map(|(a, b)| a - b));
    let inv = sigma.clone().try_inverse().unwrap();
    let q = (r.transpose() * inv * &r)[(0, 0)];
    -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + sigma.determinant().ln() + q)
}

fn ln_multigamma(a: f64, d: usize) -> f64 {
    let mut s = (d * (d - 1)) as f64 / 4.0 * std::f64::consts::PI.ln();
    for j in 0..d {
        s += (a - j as f64 / 2.0).lgamma();
    }
    s
}

fn na_log_iw(sigma: &DMatrix<f64>, nu: f64, psi: &DMatrix<f64>) -> f64 {
    let d = sigma.nrows() as f64;
    let inv = sigma.clone().try_inverse().unwrap();
    0.5 * nu * psi.determinant().ln() - 0.5 * nu * d * 2f64.ln() - ln_multigamma(nu / 2.0, sigma.nrows())
        - 0.5 * (nu + d + 1.0) * sigma.determinant().ln()
        - 0.5 * (psi * inv).trace()
}

fn na_log_niw(mu: &[f64], sigma: &DMatrix<f64>, p: &NiwParams<f64>) -> f64 {
    na_log_mvn(mu, &p.mu0, &(sigma / p.kappa0)) + na_log_iw(sigma, p.nu0, &to_na(&p.sigma0))
}

fn prior2() -> NiwParams<f64> {
    NiwParams::new(
        vec![0.5, -1.0],
        0.7,
        5.0,
        Matrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]),
    )
    .unwrap()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect()
}

/// Bayes' rule: likelihood × prior / posterior does not depend on the parameter and
/// equals the marginal likelihood.
#[test]
fn niw_posterior_ratio_is_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let prior = prior2();
    let data = random_points(&mut rng, 7, 2);
    let post = niw_posterior(&prior, &data);
    let lml = log_marginal_likelihood(&data, &prior).unwrap();
    for _ in 0..20 {
        let vp = sample_niw(&mut rng, &prior).unwrap();
        let s = to_na(&vp.sigma);
        let ll: f64 = data.iter().map(|y| na_log_mvn(y, &vp.mu, &s)).sum();
        let ratio = ll + na_log_niw(&vp.mu, &s, &prior) - na_log_niw(&vp.mu, &s, &post);
        assert!((ratio - lml).abs() < 1e-8, "{ratio} vs {lml}");
    }
}

#[test]
fn student_t_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let prior = NiwParams::new(vec![0.0, 1.0], 1.0, 6.0, Matrix::identity(2)).unwrap();
    let points: [[f64; 2]; 5] = [[0.0, 1.0], [0.5, 0.5], [-1.0, 2.0], [1.5, 1.0], [0.0, -0.5]];
    let draws = 1_000_000;
    let mut acc = [0.0; 5];
    for _ in 0..draws {
        let vp = sample_niw(&mut rng, &prior).unwrap();
        for (a, y) in acc.iter_mut().zip(&points) {
            *a += log_mvn(y, &vp.mu, &vp.sigma).unwrap().exp();
        }
    }
    for (a, y) in acc.iter().zip(&points) {
        let mc = a / draws as f64;
        let exact = log_predictive_new_vertex(y, &prior).unwrap().exp();
        assert!((mc / exact - 1.0).abs() < 0.02, "{y:?}: {mc} vs {exact}");
    }
}

/// In one dimension the NIW law is normal-inverse-gamma; integrating μ out by hand
/// leaves a one-dimensional integral over σ².
#[test]
fn univariate_predictive_by_quadrature() {
    let (m0, k0, nu0, s0) = (0.3f64, 2.0f64, 4.0f64, 1.5f64);
    let prior = NiwParams::new(vec![m0], k0, nu0, Matrix::identity(1).scale(s0)).unwrap();
    let (a, b) = (nu0 / 2.0, s0 / 2.0);
    let log_ig = |v: f64| a * b.ln() - a.lgamma() - (a + 1.0) * v.ln() - b / v;
    for y in [-2.0, 0.0, 0.3, 1.0, 4.0] {
        // Substitute v = e^t and integrate over t with the trapezoid rule.
        let (lo, hi, steps) = (-15.0f64, 15.0f64, 200_000);
        let h = (hi - lo) / steps as f64;
        let mut total = 0.0;
        for j in 0..=steps {
            let t = lo + j as f64 * h;
            let v = t.exp();
            let var = v * (1.0 + 1.0 / k0);
            let f = (-0.5 * (2.0 * std::f64::consts::PI * var).ln() - (y - m0).powi(2) / (2.0 * var) + log_ig(v))
                .exp()
                * v;
            total += if j == 0 || j == steps { 0.5 * f } else { f };
        }
        let quad = total * h;
        let exact = log_predictive_new_vertex(&[y], &prior).unwrap().exp();
        assert!((quad - exact).abs() < 1e-4, "{y}: {quad} vs {exact}");
    }
}

#[test]
fn student_t_integrates_to_one() {
    let t = StudentT::new(vec![0.2], &Matrix::identity(1).scale(0.8), 3.0).unwrap();
    let (lo, hi, steps) = (-2000.0f64, 2000.0f64, 2_000_000);
    let h = (hi - lo) / steps as f64;
    let total: f64 = (0..=steps).map(|j| t.log_density(&[lo + j as f64 * h]).exp()).sum::<f64>() * h;
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn marginal_likelihood_ratio_is_predictive() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let prior = prior2();
    for n in [0, 1, 5] {
        let mut data = random_points(&mut rng, n, 2);
        let y = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let post = niw_posterior(&prior, &data);
        let pred = log_predictive_new_vertex(&y, &post).unwrap();
        let before = log_marginal_likelihood(&data, &prior).unwrap();
        data.push(y);
        let after = log_marginal_likelihood(&data, &prior).unwrap();
        assert!((after - before - pred).abs() < 1e-10);
    }
}

#[test]
fn inverse_wishart_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let prior = NiwParams::new(vec![0.0, 0.0], 1.0, 8.0, Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]])).unwrap();
    let draws = 100_000;
    let mut acc = Matrix::zeros(2);
    for _ in 0..draws {
        acc = acc.add(&sample_niw(&mut rng, &prior).unwrap().sigma);
    }
    let mean = acc.scale(1.0 / draws as f64);
    let want = prior.sigma0.scale(1.0 / (prior.nu0 - 3.0));
    for (i, j) in [(0, 0), (1, 1), (0, 1)] {
        assert!((mean[(i, j)] / want[(i, j)] - 1.0).abs() < 0.05, "{i}{j}");
    }
}

#[test]
fn log_mvn_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 1..=4 {
        for _ in 0..10 {
            let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let s = &a * a.transpose() + DMatrix::identity(d, d) * 0.3;
            let sigma = Matrix::from_rows(&(0..d).map(|i| (0..d).map(|j| s[(i, j)]).collect()).collect::<Vec<_>>());
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = log_mvn(&y, &mu, &sigma).unwrap();
            assert!((got - na_log_mvn(&y, &mu, &s)).abs() < 1e-10);
        }
    }
}

#[test]
fn edge_covariance_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let geom = EdgeGeometry::new(0.6, 0.25).unwrap();
    for d in 2..=4 {
        for _ in 0..10 {
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let (mid, s) = edge_params(&a, &b, &geom).unwrap();
            let len2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
            let mut ev: Vec<f64> = to_na(&s).symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(|x, y| y.total_cmp(x));
            let mut want = vec![0.0625; d];
            want[0] = 0.36 * len2;
            want.sort_by(|x, y| y.total_cmp(x));
            for (e, w) in ev.iter().zip(&want) {
                assert!((e - w).abs() < 1e-10, "{ev:?} vs {want:?}");
            }
            for i in 0..d {
                assert!((mid[i] - (a[i] + b[i]) / 2.0).abs() < 1e-14);
            }
            let via_frame = edge_covariance_via_frame(&a, &b, &geom).unwrap();
            assert!(via_frame.max_abs_diff(&s) < 1e-10);
        }
    }
}

#[test]
fn edge_covariance_rotates_with_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let geom = EdgeGeometry::new(0.5, 0.3).unwrap();
    let d = 3;
    for _ in 0..10 {
        let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
        let r = g.qr().q();
        let a = DVector::from_fn(d, |_, _| rng.random_range(-3.0..3.0));
        let b = DVector::from_fn(d, |_, _| rng.random_range(-3.0..3.0));
        let (_, s) = edge_params(a.as_slice(), b.as_slice(), &geom).unwrap();
        let ra = &r * &a;
        let rb = &r * &b;
        let (_, rs) = edge_params(ra.as_slice(), rb.as_slice(), &geom).unwrap();
        let want = &r * to_na(&s) * r.transpose();
        assert!((to_na(&rs) - want).abs().max() < 1e-10);
    }
}

#[test]
fn default_geometry_from_chi_square_quantile() {
    let g: EdgeGeometry<f64> = default_edge_geometry(0.01, 2).unwrap();
    assert!((g.r0 * g.r0 - 0.434294).abs() < 1e-6);
    assert!((g.r1 * g.r1 - 0.0542868).abs() < 1e-6);
}
