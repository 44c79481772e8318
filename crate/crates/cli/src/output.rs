//! File formats: the JSONL sample stream, the summary JSON, the co-clustering CSV and the
//! SVG scatter. Every file carries the config hash and seed.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use anyhow::{anyhow, bail, Context, Result};
use garp::{Assignment, ChainSample, Matrix, PosteriorSummary, VertexParams};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SAMPLES_FORMAT: &str = "garp-samples/1";

/// `k` for a vertex, `[k, k']` for an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Vertex(usize),
    Edge([usize; 2]),
}

impl From<Assignment> for Label {
    fn from(a: Assignment) -> Self {
        match a {
            Assignment::Vertex(k) => Self::Vertex(k),
            Assignment::Edge(a, b) => Self::Edge([a, b]),
        }
    }
}

impl Label {
    pub fn to_assignment(self) -> Result<Assignment> {
        match self {
            Self::Vertex(k) => Ok(Assignment::Vertex(k)),
            Self::Edge([a, b]) => Assignment::edge(a, b).map_err(Into::into),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

impl From<&VertexParams<f64>> for ParamsRecord {
    fn from(p: &VertexParams<f64>) -> Self {
        Self {
            mu: p.mu.clone(),
            sigma: p.sigma.rows(),
        }
    }
}

impl ParamsRecord {
    fn to_params(&self) -> VertexParams<f64> {
        VertexParams {
            mu: self.mu.clone(),
            sigma: Matrix::from_rows(&self.sigma),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplesHeader {
    pub format: String,
    pub config_hash: String,
    pub seed: u64,
    pub n_units: usize,
    pub dim: usize,
    pub chains: usize,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub chain: usize,
    pub iteration: usize,
    /// 1 for vertex units, 0 for edge units.
    pub v: Vec<u8>,
    pub z: Vec<Label>,
    pub vertex_params: Vec<ParamsRecord>,
}

impl SampleRecord {
    pub fn new(chain: usize, s: &ChainSample<f64>) -> Self {
        Self {
            chain,
            iteration: s.iteration,
            v: s.assignments.iter().map(|a| u8::from(a.is_vertex())).collect(),
            z: s.assignments.iter().map(|&a| a.into()).collect(),
            vertex_params: s.vertex_params.iter().map(Into::into).collect(),
        }
    }

    pub fn to_sample(&self) -> Result<ChainSample<f64>> {
        let assignments = self
            .z
            .iter()
            .zip(&self.v)
            .map(|(z, &v)| {
                let a = z.to_assignment()?;
                if a.is_vertex() != (v == 1) {
                    bail!("v and z disagree");
                }
                Ok(a)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainSample {
            iteration: self.iteration,
            assignments,
            vertex_params: self.vertex_params.iter().map(ParamsRecord::to_params).collect(),
        })
    }
}

pub fn write_samples<W: Write>(out: &mut W, header: &SamplesHeader, chains: &[Vec<ChainSample<f64>>]) -> Result<()> {
    serde_json::to_writer(&mut *out, header)?;
    out.write_all(b"\n")?;
    for (c, samples) in chains.iter().enumerate() {
        for s in samples {
            serde_json::to_writer(&mut *out, &SampleRecord::new(c, s))?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a sample stream; draws from all chains are pooled in file order.
pub fn read_samples<R: BufRead>(input: R) -> Result<(SamplesHeader, Vec<ChainSample<f64>>)> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| anyhow!("empty sample file"))?;
    let header: SamplesHeader = serde_json::from_str(&first?).context("line 1: sample header")?;
    if header.format != SAMPLES_FORMAT {
        bail!("unsupported sample format {:?}", header.format);
    }
    let mut samples = Vec::new();
    for (j, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line).with_context(|| format!("line {}", j + 1))?;
        if rec.z.len() != header.n_units || rec.v.len() != header.n_units {
            bail!("line {}: record has {} units, header says {}", j + 1, rec.z.len(), header.n_units);
        }
        samples.push(rec.to_sample().with_context(|| format!("line {}", j + 1))?);
    }
    if samples.is_empty() {
        bail!("sample file has no draws");
    }
    Ok((header, samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KvRow {
    pub k_v: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub pair: [usize; 2],
    /// Expected number of edge units on the pair.
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub config_hash: String,
    pub seed: u64,
    pub n_samples: usize,
    pub n_units: usize,
    pub k_v: usize,
    pub n_edge_units: usize,
    pub expected_vi: f64,
    pub v_hat: Vec<u8>,
    pub v_bar: Vec<f64>,
    pub uncertainty: Vec<f64>,
    pub partition: Vec<Label>,
    /// Probability of the reported pair for edge units, 0 for vertex units.
    pub edge_unit_prob: Vec<f64>,
    pub kv_posterior: Vec<KvRow>,
    pub edge_table: Vec<EdgeRow>,
    pub vertex_params: Vec<ParamsRecord>,
}

impl SummaryFile {
    pub fn new(config_hash: &str, seed: u64, s: &PosteriorSummary<f64>) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            seed,
            n_samples: s.n_samples,
            n_units: s.assignments.len(),
            k_v: s.k_v,
            n_edge_units: s.assignments.iter().filter(|a| !a.is_vertex()).count(),
            expected_vi: s.expected_vi,
            v_hat: s.v_hat.iter().map(|&b| u8::from(b)).collect(),
            v_bar: s.v_bar.clone(),
            uncertainty: s.uncertainty.clone(),
            partition: s.assignments.iter().map(|&a| a.into()).collect(),
            edge_unit_prob: s.edge_unit_prob.clone(),
            kv_posterior: s
                .kv_posterior
                .iter()
                .map(|(&k_v, &frequency)| KvRow { k_v, frequency })
                .collect(),
            edge_table: s
                .edge_prob_table
                .iter()
                .map(|(&(a, b), &mass)| EdgeRow { pair: [a, b], mass })
                .collect(),
            vertex_params: s.vertex_params.iter().map(Into::into).collect(),
        }
    }
}

/// Posterior of the number of vertices as a two-row text table.
pub fn kv_table(rows: &[KvRow]) -> String {
    let mut top = String::from("K_v      ");
    let mut bottom = String::from("frequency");
    for r in rows {
        let _ = write!(top, " {:>7}", r.k_v);
        let _ = write!(bottom, " {:>7.4}", r.frequency);
    }
    format!("{top}\n{bottom}\n")
}

/// Square co-clustering matrix over the estimated vertex units, with unit indices as
/// the header row and first column.
pub fn coclustering_csv(config_hash: &str, seed: u64, units: &[usize], p: &[f64]) -> String {
    let m = units.len();
    let mut out = format!("# config_hash={config_hash} seed={seed}\nunit");
    for u in units {
        let _ = write!(out, ",{u}");
    }
    out.push('\n');
    for (a, u) in units.iter().enumerate() {
        let _ = write!(out, "{u}");
        for b in 0..m {
            let _ = write!(out, ",{:?}", p[a * m + b]);
        }
        out.push('\n');
    }
    out
}

pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

/// Scatter of the first two coordinates. Vertex units are triangles colored by vertex,
/// edge units are circles colored by pair; each pair with positive mass gets a segment
/// between its vertex means, with opacity proportional to the mass.
pub fn scatter_svg(config_hash: &str, seed: u64, data: &[Vec<f64>], s: &PosteriorSummary<f64>) -> String {
    const SIZE: f64 = 800.0;
    const PAD: f64 = 40.0;
    let coord = |y: &[f64], j: usize| y.get(j).copied().unwrap_or(0.0);
    let mut pts: Vec<[f64; 2]> = data.iter().map(|y| [coord(y, 0), coord(y, 1)]).collect();
    pts.extend(s.vertex_params.iter().map(|p| [coord(&p.mu, 0), coord(&p.mu, 1)]));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for j in 0..2 {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let span = (0..2).map(|j| hi[j] - lo[j]).fold(1e-12, f64::max);
    let sx = |x: f64| PAD + (x - lo[0]) / span * (SIZE - 2.0 * PAD);
    let sy = |y: f64| SIZE - PAD - (y - lo[1]) / span * (SIZE - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(out, "<!-- config_hash={config_hash} seed={seed} -->");
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    let max_mass = s.edge_prob_table.values().copied().fold(0.0, f64::max);
    let pairs: Vec<(usize, usize)> = s.edge_prob_table.keys().copied().collect();
    let _ = writeln!(out, "<g id=\"edges\">");
    for (&(a, b), &mass) in &s.edge_prob_table {
        if mass > 0.0 {
            let (pa, pb) = (&s.vertex_params[a].mu, &s.vertex_params[b].mu);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"3\" stroke-opacity=\"{:.4}\"/>",
                sx(coord(pa, 0)),
                sy(coord(pa, 1)),
                sx(coord(pb, 0)),
                sy(coord(pb, 1)),
                (mass / max_mass).max(0.02)
            );
        }
    }
    let _ = writeln!(out, "</g>\n<g id=\"units\">");
    let k = s.k_v;
    for (y, a) in data.iter().zip(&s.assignments) {
        let (x, yy) = (sx(coord(y, 0)), sy(coord(y, 1)));
        match *a {
            Assignment::Vertex(c) => {
                let _ = writeln!(
                    out,
                    "<polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"{}\"/>",
                    x,
                    yy - 3.5,
                    x - 3.0,
                    yy + 2.0,
                    x + 3.0,
                    yy + 2.0,
                    PALETTE[c % PALETTE.len()]
                );
            }
            Assignment::Edge(p, q) => {
                let j = pairs.iter().position(|&e| e == (p, q)).unwrap_or(0);
                let _ = writeln!(
                    out,
                    "<circle cx=\"{x:.2}\" cy=\"{yy:.2}\" r=\"2.5\" fill=\"{}\"/>",
                    PALETTE[(k + j) % PALETTE.len()]
                );
            }
        }
    }
    let _ = writeln!(out, "</g>\n</svg>");
    out
}
