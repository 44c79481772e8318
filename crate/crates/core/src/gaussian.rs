//! Gaussian kernels: densities, the normal-inverse-Wishart family, and edge geometry.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm, Cholesky, Matrix};
use crate::scalar::Real;
use crate::GarpError;

/// Normal-inverse-Wishart hyperparameters: `Σ ~ IW(ν0, Σ0)`, `μ | Σ ~ N(μ0, Σ/κ0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NiwParams<T> {
    pub mu0: Vec<T>,
    pub kappa0: T,
    pub nu0: T,
    /// Inverse-Wishart scale matrix.
    pub sigma0: Matrix<T>,
}

impl<T: Real> NiwParams<T> {
    pub fn new(mu0: Vec<T>, kappa0: T, nu0: T, sigma0: Matrix<T>) -> Result<Self, GarpError> {
        let p = Self {
            mu0,
            kappa0,
            nu0,
            sigma0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    pub fn validate(&self) -> Result<(), GarpError> {
        let d = self.dim();
        if self.sigma0.dim() != d {
            return Err(GarpError::DimensionMismatch(format!(
                "mu0 has length {d}, sigma0 is {0}x{0}",
                self.sigma0.dim()
            )));
        }
        if !(self.kappa0 > T::zero()) {
            return Err(GarpError::InvalidParameter("kappa0 must be positive".into()));
        }
        if !(self.nu0 > T::of_usize(d) - T::one()) {
            return Err(GarpError::InvalidParameter("nu0 must exceed d - 1".into()));
        }
        self.sigma0.cholesky().map(|_| ())
    }
}

/// Mean and covariance of one vertex component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VertexParams<T> {
    pub mu: Vec<T>,
    pub sigma: Matrix<T>,
}

/// Edge spread factors: along-edge standard deviation `r0 ‖Δ‖`, orthogonal `r1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EdgeGeometry<T> {
    pub r0: T,
    pub r1: T,
}

impl<T: Real> EdgeGeometry<T> {
    pub fn new(r0: T, r1: T) -> Result<Self, GarpError> {
        if !(r0 > T::zero() && r1 > T::zero()) {
            return Err(GarpError::InvalidParameter("r0 and r1 must be positive".into()));
        }
        Ok(Self { r0, r1 })
    }
}

/// Bivariate defaults from the chi-square quantile of order `1 − α`:
/// `r0² = 4/χ²`, `r1² = 1/(2χ²)`.
pub fn default_edge_geometry<T: Real>(alpha_level: T, d: usize) -> Result<EdgeGeometry<T>, GarpError> {
    if d != 2 {
        return Err(GarpError::InvalidParameter(format!(
            "default edge geometry is defined for d = 2, got d = {d}"
        )));
    }
    if !(alpha_level > T::zero() && alpha_level < T::one()) {
        return Err(GarpError::InvalidParameter("alpha level must lie in (0, 1)".into()));
    }
    // Two degrees of freedom: the chi-square is exponential with mean 2.
    let q = -T::lit(2.0) * alpha_level.ln();
    EdgeGeometry::new((T::lit(4.0) / q).sqrt(), (T::one() / (T::lit(2.0) * q)).sqrt())
}

/// Householder reflection whose first column is the unit vector `e`; the remaining
/// columns complete an orthonormal basis.
pub fn orthonormal_frame<T: Real>(e: &[T]) -> Matrix<T> {
    let d = e.len();
    let sign = if e[0] >= T::zero() { T::one() } else { -T::one() };
    let mut v = e.to_vec();
    v[0] += sign;
    let vv = dot(&v, &v);
    // H = I − 2 v vᵀ / (vᵀv) maps e₁ to −sign·e; flip to get e exactly.
    let mut h = Matrix::identity(d);
    h.add_outer_mut(&v, -T::lit(2.0) / vv);
    h.scale(-sign)
}

/// Edge mean and covariance from the two adjacent vertex means.
pub fn edge_params<T: Real>(
    mu_k: &[T],
    mu_kp: &[T],
    geom: &EdgeGeometry<T>,
) -> Result<(Vec<T>, Matrix<T>), GarpError> {
    if mu_k.len() != mu_kp.len() {
        return Err(GarpError::DimensionMismatch("vertex means".into()));
    }
    let half = T::lit(0.5);
    let delta: Vec<T> = mu_k.iter().zip(mu_kp).map(|(&a, &b)| a - b).collect();
    let len = norm(&delta);
    if !(len > T::zero()) {
        return Err(GarpError::CoincidentMeans);
    }
    let mid = mu_k.iter().zip(mu_kp).map(|(&a, &b)| (a + b) * half).collect();
    let e: Vec<T> = delta.iter().map(|&x| x / len).collect();
    let r1sq = geom.r1 * geom.r1;
    let along = geom.r0 * geom.r0 * len * len;
    let mut sigma = Matrix::scaled_identity(e.len(), r1sq);
    sigma.add_outer_mut(&e, along - r1sq);
    Ok((mid, sigma.symmetrized()))
}

/// Same covariance as [`edge_params`], assembled as `Q diag(r0²‖Δ‖², r1², …) Qᵀ`.
pub fn edge_covariance_via_frame<T: Real>(
    mu_k: &[T],
    mu_kp: &[T],
    geom: &EdgeGeometry<T>,
) -> Result<Matrix<T>, GarpError> {
    let delta: Vec<T> = mu_k.iter().zip(mu_kp).map(|(&a, &b)| a - b).collect();
    let len = norm(&delta);
    if !(len > T::zero()) {
        return Err(GarpError::CoincidentMeans);
    }
    let e: Vec<T> = delta.iter().map(|&x| x / len).collect();
    let q = orthonormal_frame(&e);
    let mut s = vec![geom.r1 * geom.r1; e.len()];
    s[0] = geom.r0 * geom.r0 * len * len;
    Ok(q.matmul(&Matrix::diagonal(&s)).matmul(&q.transpose()).symmetrized())
}

/// Gaussian with a cached Cholesky factor for repeated density evaluation.
#[derive(Clone, Debug)]
pub struct Mvn<T> {
    mu: Vec<T>,
    chol: Cholesky<T>,
    log_norm: T,
}

impl<T: Real> Mvn<T> {
    pub fn new(mu: Vec<T>, sigma: &Matrix<T>) -> Result<Self, GarpError> {
        if mu.len() != sigma.dim() {
            return Err(GarpError::DimensionMismatch("mean and covariance".into()));
        }
        let chol = sigma.cholesky()?;
        let d = T::of_usize(mu.len());
        let log_norm = -T::lit(0.5) * (d * (T::TAU()).ln() + chol.log_det());
        Ok(Self { mu, chol, log_norm })
    }

    pub fn mean(&self) -> &[T] {
        &self.mu
    }

    pub fn log_density(&self, y: &[T]) -> T {
        let r: Vec<T> = y.iter().zip(&self.mu).map(|(&a, &b)| a - b).collect();
        self.log_norm - T::lit(0.5) * self.chol.mahalanobis_sq(&r)
    }
}

pub fn log_mvn<T: Real>(y: &[T], mu: &[T], sigma: &Matrix<T>) -> Result<T, GarpError> {
    if y.len() != mu.len() {
        return Err(GarpError::DimensionMismatch("observation and mean".into()));
    }
    Ok(Mvn::new(mu.to_vec(), sigma)?.log_density(y))
}

/// Count, sum and uncentered scatter of a set of observations.
#[derive(Clone, Debug, PartialEq)]
pub struct SuffStats<T> {
    pub n: usize,
    pub sum: Vec<T>,
    pub outer: Matrix<T>,
}

impl<T: Real> SuffStats<T> {
    pub fn new(d: usize) -> Self {
        Self {
            n: 0,
            sum: vec![T::zero(); d],
            outer: Matrix::zeros(d),
        }
    }

    pub fn from_points<'a>(d: usize, points: impl IntoIterator<Item = &'a [T]>) -> Self {
        let mut s = Self::new(d);
        for y in points {
            s.add(y);
        }
        s
    }

    pub fn add(&mut self, y: &[T]) {
        self.n += 1;
        for (s, &v) in self.sum.iter_mut().zip(y) {
            *s += v;
        }
        self.outer.add_outer_mut(y, T::one());
    }

    pub fn remove(&mut self, y: &[T]) {
        self.n -= 1;
        for (s, &v) in self.sum.iter_mut().zip(y) {
            *s -= v;
        }
        self.outer.add_outer_mut(y, -T::one());
    }
}

/// Conjugate update of the NIW hyperparameters.
pub fn niw_posterior_from_stats<T: Real>(prior: &NiwParams<T>, stats: &SuffStats<T>) -> NiwParams<T> {
    if stats.n == 0 {
        return prior.clone();
    }
    let n = T::of_usize(stats.n);
    let kappa = prior.kappa0 + n;
    let ybar: Vec<T> = stats.sum.iter().map(|&s| s / n).collect();
    let mu: Vec<T> = prior
        .mu0
        .iter()
        .zip(&ybar)
        .map(|(&m0, &yb)| (prior.kappa0 * m0 + n * yb) / kappa)
        .collect();
    // S = Σ y yᵀ − n ȳ ȳᵀ
    let mut scatter = stats.outer.clone();
    scatter.add_outer_mut(&ybar, -n);
    let dev: Vec<T> = ybar.iter().zip(&prior.mu0).map(|(&a, &b)| a - b).collect();
    let mut sigma = prior.sigma0.add(&scatter);
    sigma.add_outer_mut(&dev, prior.kappa0 * n / kappa);
    NiwParams {
        mu0: mu,
        kappa0: kappa,
        nu0: prior.nu0 + n,
        sigma0: sigma.symmetrized(),
    }
}

pub fn niw_posterior<T: Real>(prior: &NiwParams<T>, data: &[Vec<T>]) -> NiwParams<T> {
    let stats = SuffStats::from_points(prior.dim(), data.iter().map(|v| v.as_slice()));
    niw_posterior_from_stats(prior, &stats)
}

/// Draws `(μ, Σ)` from the NIW law. The inverse-Wishart draw uses the Bartlett
/// decomposition of the Wishart precision.
pub fn sample_niw<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    params: &NiwParams<T>,
) -> Result<VertexParams<T>, GarpError> {
    let d = params.dim();
    let l = params.sigma0.cholesky()?;
    // Lower-triangular Bartlett factor A of a standard Wishart(ν, I).
    let mut a = Matrix::zeros(d);
    for i in 0..d {
        a[(i, i)] = T::chi_squared(rng, params.nu0 - T::of_usize(i)).sqrt();
        for j in 0..i {
            a[(i, j)] = T::standard_normal(rng);
        }
    }
    // Σ = (L A⁻ᵀ)(L A⁻ᵀ)ᵀ with Σ0 = L Lᵀ.
    let a_inv_t = lower_inverse(&a).transpose();
    let b = l.factor().matmul(&a_inv_t);
    let sigma = b.matmul(&b.transpose()).symmetrized();
    let cov_mu = sigma.scale(T::one() / params.kappa0);
    let c = cov_mu.cholesky()?;
    let z: Vec<T> = (0..d).map(|_| T::standard_normal(rng)).collect();
    let mu = params
        .mu0
        .iter()
        .zip(c.mul_lower(&z))
        .map(|(&m, dz)| m + dz)
        .collect();
    Ok(VertexParams { mu, sigma })
}

fn lower_inverse<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let d = a.dim();
    let mut inv = Matrix::zeros(d);
    for j in 0..d {
        inv[(j, j)] = T::one() / a[(j, j)];
        for i in (j + 1)..d {
            let mut s = T::zero();
            for k in j..i {
                s += a[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / a[(i, i)];
        }
    }
    inv
}

/// `ln Γ_d(a)`.
fn ln_multigamma<T: Real>(a: T, d: usize) -> T {
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let mut s = T::of_usize(d * (d.saturating_sub(1))) * quarter * T::PI().ln();
    for j in 0..d {
        s += (a - half * T::of_usize(j)).lgamma();
    }
    s
}

/// Log prior predictive density of one observation: multivariate Student-T with
/// `ν0 − d + 1` degrees of freedom, location `μ0`, scale `Σ0 (κ0 + 1)/(κ0 (ν0 − d + 1))`.
pub fn log_predictive_new_vertex<T: Real>(y: &[T], prior: &NiwParams<T>) -> Result<T, GarpError> {
    Ok(StudentT::from_niw(prior)?.log_density(y))
}

/// Multivariate Student-T with cached scale factorization.
#[derive(Clone, Debug)]
pub struct StudentT<T> {
    loc: Vec<T>,
    chol: Cholesky<T>,
    df: T,
    log_norm: T,
}

impl<T: Real> StudentT<T> {
    pub fn from_niw(prior: &NiwParams<T>) -> Result<Self, GarpError> {
        let d = prior.dim();
        let df = prior.nu0 - T::of_usize(d) + T::one();
        let scale = prior
            .sigma0
            .scale((prior.kappa0 + T::one()) / (prior.kappa0 * df));
        Self::new(prior.mu0.clone(), &scale, df)
    }

    pub fn new(loc: Vec<T>, scale: &Matrix<T>, df: T) -> Result<Self, GarpError> {
        let chol = scale.cholesky()?;
        let d = T::of_usize(loc.len());
        let half = T::lit(0.5);
        let log_norm = ((df + d) * half).lgamma()
            - (df * half).lgamma()
            - half * d * (df * T::PI()).ln()
            - half * chol.log_det();
        Ok(Self {
            loc,
            chol,
            df,
            log_norm,
        })
    }

    pub fn log_density(&self, y: &[T]) -> T {
        let r: Vec<T> = y.iter().zip(&self.loc).map(|(&a, &b)| a - b).collect();
        let m = self.chol.mahalanobis_sq(&r);
        let d = T::of_usize(self.loc.len());
        self.log_norm - T::lit(0.5) * (self.df + d) * (m / self.df).ln_1p()
    }
}

/// Log marginal likelihood of a data set under the NIW prior, from the ratio of NIW
/// normalizing constants.
pub fn log_marginal_likelihood<T: Real>(data: &[Vec<T>], prior: &NiwParams<T>) -> Result<T, GarpError> {
    let post = niw_posterior(prior, data);
    let d = prior.dim();
    let half = T::lit(0.5);
    let n = T::of_usize(data.len());
    let dt = T::of_usize(d);
    Ok(-half * n * dt * T::PI().ln() + ln_multigamma(post.nu0 * half, d)
        - ln_multigamma(prior.nu0 * half, d)
        + half * prior.nu0 * prior.sigma0.cholesky()?.log_det()
        - half * post.nu0 * post.sigma0.cholesky()?.log_det()
        + half * dt * (prior.kappa0.ln() - post.kappa0.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom() -> EdgeGeometry<f64> {
        default_edge_geometry(0.01, 2).unwrap()
    }

    #[test]
    fn default_geometry_values() {
        let g = geom();
        assert!((g.r0 * g.r0 - 0.434294).abs() < 1e-6);
        assert!((g.r1 * g.r1 - 0.0542868).abs() < 1e-7);
        let g5 = default_edge_geometry(0.05f64, 2).unwrap();
        assert!((g5.r0 * g5.r0 - 0.667617).abs() < 1e-6);
        assert!(((g5.r0 / g5.r1).powi(2) - 8.0).abs() < 1e-12);
        assert!(default_edge_geometry(1.0f64, 2).is_err());
        assert!(default_edge_geometry(0.01f64, 3).is_err());
    }

    #[test]
    fn edge_midpoint_and_axis_case() {
        let g = geom();
        let (m, _) = edge_params(&[-2.0, -2.0], &[3.0, 3.0], &g).unwrap();
        assert_eq!(m, vec![0.5, 0.5]);
        let (_, s) = edge_params(&[0.0, 0.0], &[2.0, 0.0], &g).unwrap();
        let want = Matrix::diagonal(&[g.r0 * g.r0 * 4.0, g.r1 * g.r1]);
        assert!(s.max_abs_diff(&want) < 1e-15);
        assert_eq!(
            edge_params(&[1.0, 1.0], &[1.0, 1.0], &g),
            Err(GarpError::CoincidentMeans)
        );
    }

    #[test]
    fn frame_is_orthonormal_with_e_first() {
        for e in [vec![0.6f64, 0.8], vec![-0.6, 0.8], vec![0.0, 0.0, -1.0]] {
            let q = orthonormal_frame(&e);
            let qtq = q.transpose().matmul(&q);
            assert!(qtq.max_abs_diff(&Matrix::identity(e.len())) < 1e-14);
            for i in 0..e.len() {
                assert!((q[(i, 0)] - e[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn niw_posterior_single_point() {
        let prior = NiwParams::new(vec![1.0f64, -1.0], 0.5, 5.0, Matrix::identity(2)).unwrap();
        assert_eq!(niw_posterior(&prior, &[]), prior);
        let post = niw_posterior(&prior, &[vec![3.0, 1.0]]);
        let want_mu = [(0.5 + 3.0) / 1.5, (-0.5 + 1.0) / 1.5];
        assert!((post.mu0[0] - want_mu[0]).abs() < 1e-14);
        assert!((post.mu0[1] - want_mu[1]).abs() < 1e-14);
        // S = 0, so Σ̂ − Σ0 is the shrinkage term only.
        let dev = [2.0, 2.0];
        let mut want = Matrix::identity(2);
        want.add_outer_mut(&dev, 0.5 / 1.5);
        assert!(post.sigma0.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn mvn_at_mean() {
        let v = log_mvn(&[0.3f64, 0.2], &[0.3, 0.2], &Matrix::identity(2)).unwrap();
        assert!((v + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn sample_niw_deterministic() {
        let prior = NiwParams::new(vec![0.0f64, 0.0], 0.1, 6.0, Matrix::identity(2)).unwrap();
        let a = sample_niw(&mut ChaCha8Rng::seed_from_u64(9), &prior).unwrap();
        let b = sample_niw(&mut ChaCha8Rng::seed_from_u64(9), &prior).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn predictive_symmetric() {
        let prior = NiwParams::new(vec![1.0f64, 2.0], 0.2, 7.0, Matrix::identity(2)).unwrap();
        let a = log_predictive_new_vertex(&[1.5, 1.0], &prior).unwrap();
        let b = log_predictive_new_vertex(&[0.5, 3.0], &prior).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
