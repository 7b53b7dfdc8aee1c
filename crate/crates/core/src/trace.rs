//! Population traces projected onto the first two principal components of
//! the initial population.
//!
//! The basis is fitted once, from generation 0, and reused for every later
//! generation so that positions are comparable across the run. Events are
//! written as JSON lines:
//!
//! ```text
//! {"gen":3,"idx":0,"x":0.12,"y":-0.4,"fit":0.75,"replaced":false}
//! {"gen":3,"idx":0,"x":0.12,"y":-0.4,"fit":0.75,"pbest":0.8}
//! ```

use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::Genome;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
    /// Set when the fitted data had no variance and canonical axes were used.
    pub degenerate: bool,
}

impl PcaBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn project(&self, genome: &[f64]) -> Result<(f64, f64)> {
        if genome.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "projected genome",
                expected: self.dim(),
                actual: genome.len(),
            });
        }
        let [c1, c2] = &self.components;
        let mut x = 0.0;
        let mut y = 0.0;
        for j in 0..genome.len() {
            let d = genome[j] - self.mean[j];
            x += d * c1[j];
            y += d * c2[j];
        }
        Ok((x, y))
    }
}

pub fn project(basis: &PcaBasis, genome: &[f64]) -> Result<(f64, f64)> {
    basis.project(genome)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Largest-magnitude entry is made positive; the first such entry wins ties.
fn fix_sign(v: &mut [f64]) {
    let mut lead = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[lead].abs() {
            lead = j;
        }
    }
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Completes `first` with a unit vector orthogonal to it, taken from the
/// canonical axes by Gram-Schmidt.
fn orthogonal_fill(first: &[f64]) -> Vec<f64> {
    let g = first.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for axis in 0..g {
        let mut v = vec![0.0; g];
        v[axis] = 1.0;
        let p = first[axis];
        v.iter_mut().zip(first).for_each(|(x, f)| *x -= p * f);
        let norm = dot(&v, &v).sqrt();
        if best.as_ref().is_none_or(|(n, _)| norm > *n + 1e-12) {
            best = Some((norm, v));
        }
    }
    let mut v = best.expect("dimension at least 2").1;
    normalize(&mut v);
    v
}

/// Top-2 principal components of the rows of `data` (one genome per row).
pub fn fit_pca(data: &[&[f64]]) -> Result<PcaBasis> {
    let n = data.len();
    if n < 3 {
        return Err(Error::InvalidConfig(vec![format!(
            "PCA needs at least 3 genomes, got {n}"
        )]));
    }
    let g = data[0].len();
    if g < 2 {
        return Err(Error::InvalidConfig(vec![format!(
            "PCA needs genomes of length at least 2, got {g}"
        )]));
    }
    if let Some(row) = data.iter().find(|r| r.len() != g) {
        return Err(Error::DimensionMismatch {
            what: "PCA row",
            expected: g,
            actual: row.len(),
        });
    }

    let mean: Vec<f64> = (0..g)
        .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, g, |i, j| data[i][j] - mean[j]);
    let scale = data
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let spread = centered.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if spread <= 4.0 * f64::EPSILON * scale {
        let mut e1 = vec![0.0; g];
        let mut e2 = vec![0.0; g];
        e1[0] = 1.0;
        e2[1] = 1.0;
        return Ok(PcaBasis {
            mean,
            components: [e1, e2],
            explained_variance: [0.0, 0.0],
            degenerate: true,
        });
    }

    let denom = (n - 1) as f64;
    let (values, mut vectors): (Vec<f64>, Vec<Vec<f64>>) = if g <= n {
        let cov = centered.transpose() * &centered / denom;
        let eig = SymmetricEigen::new(cov);
        top_two(&eig)
            .into_iter()
            .map(|k| {
                (
                    eig.eigenvalues[k],
                    eig.eigenvectors.column(k).iter().copied().collect(),
                )
            })
            .unzip()
    } else {
        // Gram trick: eigenvectors of X X^T / (n-1) map to X^T u.
        let gram = &centered * centered.transpose() / denom;
        let eig = SymmetricEigen::new(gram);
        top_two(&eig)
            .into_iter()
            .map(|k| {
                let u = eig.eigenvectors.column(k);
                let v = centered.transpose() * u;
                (eig.eigenvalues[k], v.iter().copied().collect())
            })
            .unzip()
    };

    let mut variance = [values[0].max(0.0), values[1].max(0.0)];
    normalize(&mut vectors[0]);
    // Remove any leakage of the first component, then renormalize; a
    // vanishing remainder means rank 1 and needs a synthetic second axis.
    let proj = dot(&vectors[0], &vectors[1]);
    let first = vectors[0].clone();
    vectors[1]
        .iter_mut()
        .zip(&first)
        .for_each(|(x, f)| *x -= proj * f);
    if normalize(&mut vectors[1]) <= 1e-9 * (1.0 + variance[0].sqrt()) || variance[1] == 0.0 {
        vectors[1] = orthogonal_fill(&vectors[0]);
        variance[1] = variance[1].min(variance[0]);
    }
    for v in vectors.iter_mut() {
        fix_sign(v);
    }
    let [c1, c2]: [Vec<f64>; 2] = vectors.try_into().expect("two components");
    Ok(PcaBasis {
        mean,
        components: [c1, c2],
        explained_variance: variance,
        degenerate: false,
    })
}

fn top_two(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> [usize; 2] {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    [order[0], order[1]]
}

/// One member at one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub gen: usize,
    pub idx: usize,
    pub x: f64,
    pub y: f64,
    pub fit: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replaced: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pbest: Option<f64>,
}

impl TraceEvent {
    pub fn candidate(gen: usize, idx: usize, x: f64, y: f64, fit: f64, replaced: bool) -> Self {
        TraceEvent {
            gen,
            idx,
            x,
            y,
            fit,
            replaced: Some(replaced),
            pbest: None,
        }
    }

    pub fn particle(gen: usize, idx: usize, x: f64, y: f64, fit: f64, pbest: f64) -> Self {
        TraceEvent {
            gen,
            idx,
            x,
            y,
            fit,
            replaced: None,
            pbest: Some(pbest),
        }
    }
}

/// Destination for trace events. Called only from the serial phase.
pub trait TraceSink {
    fn emit(&mut self, event: &TraceEvent) -> io::Result<()>;

    /// Called once all events of a generation have been emitted.
    fn end_generation(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl TraceSink for Vec<TraceEvent> {
    fn emit(&mut self, event: &TraceEvent) -> io::Result<()> {
        self.push(event.clone());
        Ok(())
    }
}

/// Writes one JSON object per line and flushes at generation boundaries.
pub struct JsonLinesSink<W: Write> {
    out: W,
}

impl<W: Write> JsonLinesSink<W> {
    pub fn new(out: W) -> Self {
        JsonLinesSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TraceSink for JsonLinesSink<W> {
    fn emit(&mut self, event: &TraceEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, event)?;
        self.out.write_all(b"\n")
    }

    fn end_generation(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn emit(sink: &mut dyn TraceSink, event: &TraceEvent) -> Result<()> {
    sink.emit(event).map_err(Error::Trace)
}

/// A sink paired with the basis fitted on generation 0.
pub struct Tracer<'s> {
    sink: &'s mut dyn TraceSink,
    basis: PcaBasis,
}

impl<'s> Tracer<'s> {
    pub fn new(sink: &'s mut dyn TraceSink, generation0: &[&Genome]) -> Result<Self> {
        let rows: Vec<&[f64]> = generation0.iter().map(|g| g.as_slice()).collect();
        let basis = fit_pca(&rows)?;
        Ok(Tracer { sink, basis })
    }

    pub fn basis(&self) -> &PcaBasis {
        &self.basis
    }

    pub fn record(&mut self, events: &[TraceEvent]) -> Result<()> {
        for event in events {
            emit(self.sink, event)?;
        }
        self.sink.end_generation().map_err(Error::Trace)
    }
}
