//! Histograms and distribution-overlap diagnostics.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{ensure, invalid, Result};

/// How histogram bins are chosen.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinPolicy {
    /// Width `2 IQR n^(-1/3)` over the sample range.
    #[default]
    FreedmanDiaconis,
    /// Fixed number of equal bins over the sample range.
    Count(usize),
    /// Explicit ascending edges; samples outside are dropped.
    Edges(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

fn equal_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let w = (hi - lo) / bins as f64;
    (0..=bins).map(|i| if i == bins { hi } else { lo + w * i as f64 }).collect()
}

impl Histogram {
    pub fn from_parts(edges: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        ensure(edges.len() >= 2, || "a histogram needs at least two edges".into())?;
        ensure(edges.len() == counts.len() + 1, || "edges must outnumber counts by one".into())?;
        ensure(edges.iter().all(|e| e.is_finite()), || "edges must be finite".into())?;
        ensure(edges.windows(2).all(|w| w[0] < w[1]), || "edges must be strictly increasing".into())?;
        let total = counts.iter().sum();
        Ok(Self { edges, counts, total })
    }

    pub fn build(samples: &[f64], policy: &BinPolicy) -> Result<Self> {
        ensure(!samples.is_empty(), || "cannot histogram an empty sample".into())?;
        ensure(samples.iter().all(|x| x.is_finite()), || "samples must be finite".into())?;
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let edges = match policy {
            BinPolicy::Edges(e) => e.clone(),
            _ if hi == lo => vec![lo - 0.5, lo + 0.5],
            BinPolicy::Count(n) => {
                ensure(*n >= 1, || "bin count must be >= 1".into())?;
                equal_edges(lo, hi, *n)
            }
            BinPolicy::FreedmanDiaconis => {
                let iqr = Data::new(samples.to_vec()).interquartile_range();
                let width = 2.0 * iqr / (samples.len() as f64).cbrt();
                let bins = if width > 0.0 { ((hi - lo) / width).ceil().max(1.0) as usize } else { 1 };
                equal_edges(lo, hi, bins)
            }
        };
        let mut counts = vec![0u64; edges.len().saturating_sub(1)];
        let mut h = Self::from_parts(edges, counts.clone())?;
        let last = h.edges.len() - 1;
        for &x in samples {
            if x < h.edges[0] || x > h.edges[last] {
                continue;
            }
            // Upper edge of the last bin is inclusive.
            let i = h.edges.partition_point(|&e| e <= x).saturating_sub(1).min(last - 1);
            counts[i] += 1;
        }
        h.total = counts.iter().sum();
        h.counts = counts;
        Ok(h)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.probabilities()
            .iter()
            .zip(self.edges.windows(2))
            .map(|(p, w)| p / (w[1] - w[0]))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, comments: &[String], mut out: W) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "bin_lo,bin_hi,count,density")?;
        for ((w, c), d) in self.edges.windows(2).zip(&self.counts).zip(self.densities()) {
            writeln!(out, "{:e},{:e},{},{:e}", w[0], w[1], c, d)?;
        }
        Ok(())
    }
}

fn clamp_unit(b: f64) -> f64 {
    b.clamp(0.0, 1.0)
}

/// `sum sqrt(p1 p2)` over histograms with identical edges.
pub fn bhattacharyya(a: &Histogram, b: &Histogram) -> Result<f64> {
    ensure(a.edges == b.edges, || "histograms must share bin edges".into())?;
    ensure(a.total > 0 && b.total > 0, || "histograms must be non-empty".into())?;
    let s = a
        .probabilities()
        .iter()
        .zip(b.probabilities())
        .map(|(p, q)| (p * q).sqrt())
        .sum();
    Ok(clamp_unit(s))
}

/// Closed-form overlap of `N(m1, v1)` and `N(m2, v2)`.
pub fn bhattacharyya_gaussian(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<f64> {
    ensure(v1 > 0.0 && v2 > 0.0, || "variances must be > 0".into())?;
    let s = v1 + v2;
    Ok(clamp_unit((2.0 * (v1 * v2).sqrt() / s).sqrt() * (-(m1 - m2).powi(2) / (4.0 * s)).exp()))
}

pub fn normal_cdf(x: f64, mean: f64, variance: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (2.0 * variance).sqrt())
}

/// Overlap between a histogram and `N(mean, variance)` integrated over each
/// bin.
pub fn bhattacharyya_vs_gaussian(h: &Histogram, mean: f64, variance: f64) -> Result<f64> {
    ensure(variance > 0.0, || "variance must be > 0".into())?;
    ensure(h.total > 0, || "histogram must be non-empty".into())?;
    let s = h
        .probabilities()
        .iter()
        .zip(h.edges.windows(2))
        .map(|(p, w)| (p * (normal_cdf(w[1], mean, variance) - normal_cdf(w[0], mean, variance))).sqrt())
        .sum();
    Ok(clamp_unit(s))
}

/// `sqrt(1 - B)`.
pub fn hellinger(b: f64) -> Result<f64> {
    ensure((0.0..=1.0).contains(&b), || format!("Bhattacharyya coefficient {b} outside [0, 1]"))?;
    Ok((1.0 - b).sqrt())
}

/// Sample Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    ensure(x.len() == y.len(), || "samples differ in length".into())?;
    ensure(x.len() >= 2, || "need at least two samples".into())?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(invalid("correlation undefined for a constant sample"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Gaussian mutual information estimate `-1/2 log2(1 - rho^2)` in bits.
pub fn gaussian_mi(x: &[f64], y: &[f64]) -> Result<f64> {
    let rho = correlation(x, y)?;
    Ok(-0.5 * (-rho * rho).ln_1p() / std::f64::consts::LN_2)
}

/// Bootstrap standard deviation of [`gaussian_mi`] over `reps` resamples.
pub fn bootstrap_mi_std(x: &[f64], y: &[f64], reps: usize, seed: u64) -> Result<f64> {
    ensure(reps >= 2, || "need at least two bootstrap resamples".into())?;
    ensure(x.len() == y.len() && x.len() >= 2, || "need paired samples".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    let mut stats = Vec::with_capacity(reps);
    for _ in 0..reps {
        for k in 0..n {
            let i = rng.random_range(0..n);
            bx[k] = x[i];
            by[k] = y[i];
        }
        stats.push(gaussian_mi(&bx, &by)?);
    }
    let m = stats.iter().sum::<f64>() / reps as f64;
    Ok((stats.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt())
}
