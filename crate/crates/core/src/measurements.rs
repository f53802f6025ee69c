//! Constraint-set sampling, noisy resistance measurements, and the
//! measurement file format.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index_unchecked, parse_header, Graph, PairIndex};
use crate::similarity::ResistanceOperator;

/// A single target value `rbar` for the unordered pair `(u, v)`, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub u: usize,
    pub v: usize,
    pub rbar: f64,
}

/// Target resistances on a duplicate-free set of node pairs.
///
/// Values may be any finite real; additive noise can push them to or below
/// zero and they are kept verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    n: usize,
    entries: Vec<Measurement>,
}

impl MeasurementSet {
    /// Validates and normalizes entries so that `u < v`.
    pub fn new(n: usize, entries: Vec<Measurement>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "measurements need at least 2 nodes, got {n}"
            )));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        let mut normalized = Vec::with_capacity(entries.len());
        for e in entries {
            let (u, v) = (e.u.min(e.v), e.u.max(e.v));
            if u == v || v >= n {
                return Err(Error::InvalidPair { u: e.u, v: e.v, n });
            }
            if !e.rbar.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "measurement for ({u}, {v}) is not finite"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate pair ({u}, {v})"
                )));
            }
            normalized.push(Measurement { u, v, rbar: e.rbar });
        }
        Ok(Self {
            n,
            entries: normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Measurement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pair indices of the measured pairs, in entry order.
    pub fn pair_indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .map(|e| pair_index_unchecked(e.u, e.v, self.n))
            .collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.rbar).collect()
    }

    /// True when every unordered pair is measured.
    pub fn is_complete(&self) -> bool {
        self.entries.len() == pair_count(self.n)
    }

    pub fn mean_target(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.rbar).sum::<f64>() / self.entries.len() as f64
    }

    /// Full table indexed by pair, when the set is complete.
    pub fn full_table(&self) -> Option<Vec<f64>> {
        if !self.is_complete() {
            return None;
        }
        let mut table = vec![0.0; pair_count(self.n)];
        for e in &self.entries {
            table[pair_index_unchecked(e.u, e.v, self.n)] = e.rbar;
        }
        Some(table)
    }

    /// Node `u` becomes `perm[u]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        let entries = self
            .entries
            .iter()
            .map(|e| Measurement {
                u: perm[e.u],
                v: perm[e.v],
                rbar: e.rbar,
            })
            .collect();
        Self::new(self.n, entries)
    }

    /// Header `n <count>`, then one `u,v,rbar` line per entry. `#` starts a
    /// comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for e in &self.entries {
            // `{}` on f64 prints the shortest representation that round-trips
            let _ = writeln!(out, "{},{},{}", e.u, e.v, e.rbar);
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some(n) = n else {
                let fields: Vec<&str> = line.split_whitespace().collect();
                let count = parse_header(&fields)
                    .filter(|&c| c >= 2)
                    .ok_or_else(|| Error::parse(path, lineno, "expected header `n <count>`"))?;
                n = Some(count);
                continue;
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(path, lineno, "expected `u,v,rbar`"));
            }
            let bad = |what: &str| Error::parse(path, lineno, format!("invalid {what}"));
            let u: usize = fields[0].parse().map_err(|_| bad("node"))?;
            let v: usize = fields[1].parse().map_err(|_| bad("node"))?;
            let rbar: f64 = fields[2].parse().map_err(|_| bad("value"))?;
            if !rbar.is_finite() {
                return Err(bad("value"));
            }
            if u == v || u >= n || v >= n {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("invalid pair ({u}, {v})"),
                ));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("duplicate pair ({}, {})", key.0, key.1),
                ));
            }
            entries.push(Measurement { u, v, rbar });
        }
        let n = n.ok_or_else(|| Error::parse(path, 1, "missing header `n <count>`"))?;
        Self::new(n, entries)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// How the relative noise level turns into the spread of the added noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseScale {
    /// Noise variance `σ² · mean r_G`.
    #[default]
    Variance,
    /// Noise standard deviation `σ² · mean r_G`.
    StdDev,
}

impl std::str::FromStr for NoiseScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(Self::Variance),
            "stddev" => Ok(Self::StdDev),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise scale {other:?} (expected variance or stddev)"
            ))),
        }
    }
}

/// Relative noise level `σ²` and the seed of the noise generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
    pub seed: u64,
    pub scale: NoiseScale,
}

impl NoiseSpec {
    pub fn new(sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be finite and nonnegative, got {sigma2}"
            )));
        }
        Ok(Self {
            sigma2,
            seed,
            scale: NoiseScale::Variance,
        })
    }

    pub fn noiseless() -> Self {
        Self {
            sigma2: 0.0,
            seed: 0,
            scale: NoiseScale::Variance,
        }
    }

    pub fn with_scale(self, scale: NoiseScale) -> Self {
        Self { scale, ..self }
    }

    /// Variance of the added noise for a graph with these resistances.
    pub fn variance(&self, resistances: &[f64]) -> f64 {
        let level = scaled_noise_variance(resistances, self.sigma2);
        match self.scale {
            NoiseScale::Variance => level,
            NoiseScale::StdDev => level * level,
        }
    }
}

/// Number of pairs sampled for fraction `f`: `⌊f·C(n,2) + ½⌋`.
pub fn sample_size(n: usize, f: f64) -> usize {
    (f * pair_count(n) as f64 + 0.5).floor() as usize
}

/// Draws `⌊f·C(n,2) + ½⌋` distinct pairs uniformly without replacement,
/// returned in pair order.
pub fn sample_pairs(n: usize, f: f64, seed: u64) -> Result<Vec<(usize, usize)>> {
    if !(f > 0.0 && f <= 1.0) {
        if f == 0.0 {
            return Err(Error::EmptySample);
        }
        return Err(Error::InvalidParameter(format!(
            "sampling fraction must lie in (0, 1], got {f}"
        )));
    }
    let m = pair_count(n);
    let k = sample_size(n, f).min(m);
    if k == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, m, k).into_vec();
    chosen.sort_unstable();
    let idx = PairIndex::new(n);
    Ok(chosen.into_iter().map(|i| idx.pair(i)).collect())
}

/// Noise variance `σ̄² = σ² · mean resistance over unordered pairs`.
pub fn scaled_noise_variance(resistances: &[f64], sigma2: f64) -> f64 {
    if resistances.is_empty() {
        return 0.0;
    }
    sigma2 * resistances.iter().sum::<f64>() / resistances.len() as f64
}

/// Measures `r_G` on `pairs` with additive `N(0, σ̄²)` noise.
pub fn measure(g: &Graph, pairs: &[(usize, usize)], noise: NoiseSpec) -> Result<MeasurementSet> {
    let op = ResistanceOperator::new(g)?;
    let table = op.resistance_table();
    measure_from_table(g.n(), &table, pairs, noise)
}

/// As [`measure`], given the all-pairs resistance table of the graph.
pub fn measure_from_table(
    n: usize,
    table: &[f64],
    pairs: &[(usize, usize)],
    noise: NoiseSpec,
) -> Result<MeasurementSet> {
    if table.len() != pair_count(n) {
        return Err(Error::SizeMismatch {
            expected: pair_count(n),
            found: table.len(),
        });
    }
    NoiseSpec::new(noise.sigma2, noise.seed)?;
    let variance = noise.variance(table);
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal =
        Normal::new(0.0, variance.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut entries = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        if u == v || u >= n || v >= n {
            return Err(Error::InvalidPair { u, v, n });
        }
        let exact = table[pair_index_unchecked(u, v, n)];
        let rbar = if variance > 0.0 {
            exact + normal.sample(&mut rng)
        } else {
            exact
        };
        entries.push(Measurement { u, v, rbar });
    }
    MeasurementSet::new(n, entries)
}
