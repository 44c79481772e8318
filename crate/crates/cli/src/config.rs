//! Run configuration: TOML with dotted sections (`prior.kind`, `hyper.p_v`, `niw.xi2`,
//! `chain.seed`, ...). Every key is optional except the parameters of the chosen prior
//! that have no default. Unknown keys are rejected.

use anyhow::{anyhow, bail, Context, Result};
use garp::gaussian::default_edge_geometry;
use garp::{ChainConfig, EdgeGeometry, GibbsPrior, Likelihood, Matrix, Model, ModelHyper, NiwParams, SummaryOptions, WeightMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_P_V: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_KAPPA0: f64 = 0.001;
pub const DEFAULT_NU0: f64 = 100.0;
pub const DEFAULT_XI2: f64 = 15.0;
pub const DEFAULT_ALPHA_LEVEL: f64 = 0.01;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    prior: RawPrior,
    #[serde(default)]
    hyper: RawHyper,
    #[serde(default)]
    niw: RawNiw,
    #[serde(default)]
    geom: RawGeom,
    #[serde(default)]
    chain: RawChain,
    #[serde(default)]
    summary: RawSummary,
    #[serde(default)]
    data: RawData,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    kind: Option<String>,
    gamma: Option<f64>,
    alpha: Option<f64>,
    sigma: Option<f64>,
    m_v: Option<usize>,
    rho: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHyper {
    p_v: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNiw {
    kappa0: Option<f64>,
    nu0: Option<f64>,
    xi2: Option<f64>,
    mu0: Option<Vec<f64>>,
    sigma0: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeom {
    alpha_level: Option<f64>,
    r0: Option<f64>,
    r1: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    n_iter: Option<usize>,
    burnin: Option<usize>,
    thin: Option<usize>,
    seed: Option<u64>,
    mode: Option<String>,
    chains: Option<usize>,
    fixed_type_pass: Option<bool>,
    init_clusters: Option<usize>,
    warmup: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSummary {
    seed: Option<u64>,
    n_starts: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    header: Option<bool>,
}

/// Scale matrix of the inverse-Wishart: `ξ² I` unless given in full.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSpec {
    Xi2(f64),
    Matrix(Vec<Vec<f64>>),
}

/// NIW settings before the data are seen; `mu0` defaults to the data mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NiwSpec {
    pub kappa0: f64,
    pub nu0: f64,
    pub scale: ScaleSpec,
    pub mu0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeomSpec {
    AlphaLevel(f64),
    Radii { r0: f64, r1: f64 },
}

/// Fully resolved configuration. Its JSON form is what gets hashed and echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub prior: GibbsPrior<f64>,
    pub hyper: ModelHyper<f64>,
    pub niw: NiwSpec,
    pub geom: GeomSpec,
    pub chain: ChainConfig,
    pub chains: usize,
    pub summary: SummaryOptions,
    pub data_header: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty config is valid")
    }
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing config key `{key}`"))
}

fn reject(present: bool, key: &str, kind: &str) -> Result<()> {
    if present {
        bail!("config key `{key}` does not apply to prior.kind = \"{kind}\"");
    }
    Ok(())
}

fn resolve_prior(p: RawPrior) -> Result<GibbsPrior<f64>> {
    let kind = p.kind.unwrap_or_else(|| "gnedin".into());
    let prior = match kind.as_str() {
        "gnedin" => {
            reject(p.alpha.is_some(), "prior.alpha", &kind)?;
            reject(p.sigma.is_some(), "prior.sigma", &kind)?;
            reject(p.m_v.is_some(), "prior.m_v", &kind)?;
            reject(p.rho.is_some(), "prior.rho", &kind)?;
            GibbsPrior::Gnedin {
                gamma: p.gamma.unwrap_or(DEFAULT_GAMMA),
            }
        }
        "dp" => {
            reject(p.gamma.is_some(), "prior.gamma", &kind)?;
            reject(p.sigma.is_some(), "prior.sigma", &kind)?;
            reject(p.m_v.is_some(), "prior.m_v", &kind)?;
            reject(p.rho.is_some(), "prior.rho", &kind)?;
            GibbsPrior::Dp {
                alpha: required(p.alpha, "prior.alpha")?,
            }
        }
        "pyp" => {
            reject(p.gamma.is_some(), "prior.gamma", &kind)?;
            reject(p.m_v.is_some(), "prior.m_v", &kind)?;
            reject(p.rho.is_some(), "prior.rho", &kind)?;
            GibbsPrior::Pyp {
                alpha: required(p.alpha, "prior.alpha")?,
                sigma: required(p.sigma, "prior.sigma")?,
            }
        }
        "sym_dirichlet" => {
            reject(p.gamma.is_some(), "prior.gamma", &kind)?;
            reject(p.alpha.is_some(), "prior.alpha", &kind)?;
            reject(p.sigma.is_some(), "prior.sigma", &kind)?;
            GibbsPrior::SymDirichlet {
                m_v: required(p.m_v, "prior.m_v")?,
                rho: required(p.rho, "prior.rho")?,
            }
        }
        other => bail!("prior.kind must be one of gnedin, dp, pyp, sym_dirichlet; got \"{other}\""),
    };
    prior.validate().context("prior")?;
    Ok(prior)
}

pub fn parse_mode(s: &str) -> Result<WeightMode> {
    match s {
        "exact" => Ok(WeightMode::Exact),
        "paper" => Ok(WeightMode::PaperFaithful),
        other => bail!("mode must be \"exact\" or \"paper\", got \"{other}\""),
    }
}

/// Parses and validates a config. Data-dependent checks happen in [`RunConfig::model`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).context("malformed config")?;
    let prior = resolve_prior(raw.prior)?;
    let hyper = ModelHyper::new(
        raw.hyper.p_v.unwrap_or(DEFAULT_P_V),
        raw.hyper.beta.unwrap_or(DEFAULT_BETA),
    )
    .context("hyper")?;

    let n = raw.niw;
    let scale = match (n.xi2, n.sigma0) {
        (Some(_), Some(_)) => bail!("give at most one of `niw.xi2` and `niw.sigma0`"),
        (_, Some(m)) => ScaleSpec::Matrix(m),
        (x, None) => {
            let x = x.unwrap_or(DEFAULT_XI2);
            if !(x > 0.0) {
                bail!("niw.xi2 must be positive");
            }
            ScaleSpec::Xi2(x)
        }
    };
    let niw = NiwSpec {
        kappa0: n.kappa0.unwrap_or(DEFAULT_KAPPA0),
        nu0: n.nu0.unwrap_or(DEFAULT_NU0),
        scale,
        mu0: n.mu0,
    };

    let g = raw.geom;
    let geom = match (g.alpha_level, g.r0, g.r1) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            bail!("give either `geom.alpha_level` or `geom.r0`/`geom.r1`, not both")
        }
        (a, None, None) => GeomSpec::AlphaLevel(a.unwrap_or(DEFAULT_ALPHA_LEVEL)),
        (None, r0, r1) => {
            let (r0, r1) = (required(r0, "geom.r0")?, required(r1, "geom.r1")?);
            EdgeGeometry::new(r0, r1).context("geom")?;
            GeomSpec::Radii { r0, r1 }
        }
    };

    let c = raw.chain;
    let d = ChainConfig::default();
    let n_iter = c.n_iter.unwrap_or(d.n_iter);
    let chain = ChainConfig {
        n_iter,
        burnin: c.burnin.unwrap_or(d.burnin),
        thin: c.thin.unwrap_or(d.thin),
        seed: c.seed.unwrap_or(d.seed),
        mode: match c.mode {
            Some(m) => parse_mode(&m).context("chain.mode")?,
            None => d.mode,
        },
        likelihood: Likelihood::Gaussian,
        fixed_type_pass: c.fixed_type_pass.unwrap_or(d.fixed_type_pass),
        init_clusters: c.init_clusters.unwrap_or(d.init_clusters),
        warmup: c.warmup.unwrap_or(d.warmup),
    };
    chain.validate().context("chain")?;
    let chains = c.chains.unwrap_or(1);
    if chains == 0 {
        bail!("chain.chains must be at least 1");
    }
    let s = SummaryOptions::default();
    Ok(RunConfig {
        prior,
        hyper,
        niw,
        geom,
        chain,
        chains,
        summary: SummaryOptions {
            seed: raw.summary.seed.unwrap_or(s.seed),
            n_starts: raw.summary.n_starts.unwrap_or(s.n_starts),
        },
        data_header: raw.data.header.unwrap_or(false),
    })
}

pub fn load_config(path: Option<&std::path::Path>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text)
        }
        None => Ok(RunConfig::default()),
    }
}

impl RunConfig {
    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Builds the model for data of this shape.
    pub fn model(&self, data: &[Vec<f64>]) -> Result<Model<f64>> {
        let d = data.first().map(Vec::len).ok_or_else(|| anyhow!("no data rows"))?;
        let mu0 = match &self.niw.mu0 {
            Some(m) => m.clone(),
            None => {
                let n = data.len() as f64;
                (0..d).map(|j| data.iter().map(|y| y[j]).sum::<f64>() / n).collect()
            }
        };
        if mu0.len() != d {
            bail!("niw.mu0 has length {} but the data have {d} columns", mu0.len());
        }
        let sigma0 = match &self.niw.scale {
            ScaleSpec::Xi2(x) => Matrix::scaled_identity(d, *x),
            ScaleSpec::Matrix(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    bail!("niw.sigma0 must be {d}x{d}");
                }
                Matrix::from_rows(rows)
            }
        };
        let niw = NiwParams::new(mu0, self.niw.kappa0, self.niw.nu0, sigma0).context("niw")?;
        let geom = match self.geom {
            GeomSpec::AlphaLevel(a) => default_edge_geometry(a, d).context("geom.alpha_level")?,
            GeomSpec::Radii { r0, r1 } => EdgeGeometry::new(r0, r1)?,
        };
        let model = Model {
            prior: self.prior.clone(),
            hyper: self.hyper,
            niw,
            geom,
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.prior, GibbsPrior::Gnedin { gamma: 0.5 });
        assert_eq!(c.hyper.beta, 0.5);
        assert_eq!(c.niw.scale, ScaleSpec::Xi2(15.0));
        assert_eq!(c.chain.n_retained(), 2500);
        assert_eq!(c.geom, GeomSpec::AlphaLevel(0.01));
    }

    #[test]
    fn dotted_and_table_forms_agree() {
        let a = parse_config("prior.kind = \"dp\"\nprior.alpha = 2.0\nchain.seed = 4\n").unwrap();
        let b = parse_config("[prior]\nkind = \"dp\"\nalpha = 2.0\n[chain]\nseed = 4\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig::default().hash());
    }

    #[test]
    fn missing_key_is_named() {
        let e = parse_config("prior.kind = \"pyp\"\nprior.alpha = 1.0\n").unwrap_err();
        assert!(format!("{e:#}").contains("prior.sigma"), "{e:#}");
        let e = parse_config("geom.r0 = 0.5\n").unwrap_err();
        assert!(format!("{e:#}").contains("geom.r1"));
    }

    #[test]
    fn unknown_and_conflicting_keys() {
        assert!(parse_config("chain.sweeps = 10\n").is_err());
        assert!(parse_config("prior.kind = \"dp\"\nprior.alpha = 1.0\nprior.gamma = 0.5\n").is_err());
        assert!(parse_config("geom.alpha_level = 0.01\ngeom.r0 = 1.0\n").is_err());
        assert!(parse_config("chain.burnin = 20000\n").is_err());
        assert!(parse_config("chain.mode = \"fast\"\n").is_err());
    }
}
