//! Exact sampling of the `n`-point orthogonal polynomial ensemble as a
//! projection determinantal process.
//!
//! Step `k` draws from `‖Q_k^* f(θ)‖² dμ/(n − k)`, where
//! `f = (φ_0, …, φ_{n−1})` and the rows of `Q_k` are an orthonormal basis of
//! the complement of the features already chosen. Draws are by rejection
//! from a piecewise-constant envelope of `K_n(θ, θ)dμ` tabulated once per
//! `(measure, n, grid)`; the expected number of proposals at step `k` is
//! about `n/(n − k)`, each costing `O(n(n − k))`, so a sample costs `O(n³)`.
//! After an acceptance the basis is rotated by one Householder reflection
//! so that the new feature lies in its first row, which is then dropped.

use crate::cumulants::wrap_angle;
use crate::error::{Error, Result};
use crate::measures::{CircleMeasure, VerblunskySequence};
use crate::szego::Recurrence;
use num_complex::Complex64 as C64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_GRID: usize = 1 << 16;

/// Inflation of the tabulated envelope over the largest of the three
/// sampled values in a cell.
const ENVELOPE_MARGIN: f64 = 1.25;

/// Proposals allowed per sample before giving up.
const PROPOSAL_LIMIT: u64 = 1 << 40;

/// Word offset between RNG sub-streams of consecutive steps.
const STEP_WORDS: u128 = 1 << 36;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    /// Envelope cells per chart.
    pub grid: usize,
    pub proposals: u64,
    /// Proposals whose target density exceeded the envelope; zero for an
    /// exact draw.
    pub envelope_violations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    /// Sorted, in `[0, 2π)`.
    pub angles: Vec<f64>,
    pub seed: u64,
    pub sample_index: u64,
    pub diagnostics: SampleDiagnostics,
}

enum Cell {
    Arc { chart: usize, lo: f64, height: f64 },
    Atom { angle: f64 },
}

/// Precomputed proposal for one `(measure, sequence, n, grid)`.
pub struct OpeSampler {
    measure: CircleMeasure,
    rec: Recurrence,
    n: usize,
    grid: usize,
    cells: Vec<Cell>,
    picker: WeightedIndex<f64>,
}

impl OpeSampler {
    pub fn new(measure: &CircleMeasure, seq: &VerblunskySequence, n: usize, grid: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ensemble size must be at least 1"));
        }
        if grid < 16 {
            return Err(Error::invalid(format!("sampling grid must have at least 16 cells, got {grid}")));
        }
        if let Ok(expected) = CircleMeasure::for_sequence(seq) {
            if expected.id() != measure.id() {
                return Err(Error::invalid(format!(
                    "measure {} does not match coefficient sequence {}",
                    measure.id(),
                    seq.id()
                )));
            }
        }
        let rec = Recurrence::new(seq, n)?;
        let h = 1.0 / grid as f64;
        let mut cells = Vec::with_capacity(grid * measure.charts().len() + measure.atoms().len());
        let mut masses = Vec::with_capacity(cells.capacity());
        for (c, chart) in measure.charts().iter().enumerate() {
            let density = |s: f64| {
                let node = chart.node(s);
                rec.kernel_diag(node.theta) * measure.weight_on_chart(&node) * node.jacobian / (2.0 * PI)
            };
            let mut left = density(0.0);
            for j in 0..grid {
                let lo = j as f64 * h;
                let mid = density(lo + 0.5 * h);
                let right = density(lo + h);
                let height = ENVELOPE_MARGIN * left.max(mid).max(right);
                if !height.is_finite() {
                    return Err(Error::Degenerate(format!("proposal density is not finite near s = {lo}")));
                }
                cells.push(Cell::Arc { chart: c, lo, height });
                masses.push(height * h);
                left = right;
            }
        }
        for atom in measure.atoms() {
            let mass = atom.mass * rec.kernel_diag(atom.angle);
            cells.push(Cell::Atom { angle: atom.angle });
            masses.push(mass);
        }
        let picker = WeightedIndex::new(&masses)
            .map_err(|e| Error::Degenerate(format!("proposal weights are unusable: {e}")))?;
        Ok(OpeSampler { measure: measure.clone(), rec, n, grid, cells, picker })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One sample on the stream `(seed, sample_index)`; step `k` reads from
    /// word offset `k·2^36` of that stream.
    pub fn sample(&self, seed: u64, sample_index: u64) -> Result<PointSample> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample_index);
        // Rows `offset/n ..` of `basis` span the complement, each of length n.
        let mut basis = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            basis[i * n + i] = C64::new(1.0, 0.0);
        }
        let mut offset = 0;
        let mut features = vec![C64::new(0.0, 0.0); n];
        let mut coords = vec![C64::new(0.0, 0.0); n];
        let mut angles = Vec::with_capacity(n);
        let (mut proposals, mut violations) = (0u64, 0u64);
        for step in 0..n {
            rng.set_word_pos(step as u128 * STEP_WORDS);
            let rows = n - step;
            let live = &basis[offset..];
            let theta = loop {
                proposals += 1;
                if proposals > PROPOSAL_LIMIT {
                    return Err(Error::Degenerate("rejection sampler is not accepting proposals".into()));
                }
                let cell = &self.cells[self.picker.sample(&mut rng)];
                let u: f64 = rng.gen();
                let (theta, bound_ratio) = match *cell {
                    Cell::Arc { chart, lo, height } => {
                        let s = lo + rng.gen::<f64>() / self.grid as f64;
                        let node = self.measure.charts()[chart].node(s);
                        let theta = node.theta;
                        self.rec.features(C64::from_polar(1.0, theta), &mut features);
                        let full: f64 = features.iter().map(|f| f.norm_sqr()).sum();
                        let target = full * self.measure.weight_on_chart(&node) * node.jacobian / (2.0 * PI);
                        if target > height {
                            violations += 1;
                        }
                        (theta, target / height)
                    }
                    Cell::Atom { angle } => {
                        self.rec.features(C64::from_polar(1.0, angle), &mut features);
                        (angle, 1.0)
                    }
                };
                // The residual fraction is at most one, so this pre-test only
                // skips work.
                if u >= bound_ratio {
                    continue;
                }
                let full: f64 = features.iter().map(|f| f.norm_sqr()).sum();
                if step == 0 {
                    coords.copy_from_slice(&features);
                    break theta;
                }
                let mut residual = 0.0;
                for (j, slot) in coords[..rows].iter_mut().enumerate() {
                    let row = &live[j * n..(j + 1) * n];
                    let dot: C64 = row.iter().zip(&features).map(|(r, f)| r.conj() * f).sum();
                    *slot = dot;
                    residual += dot.norm_sqr();
                }
                if u * full < bound_ratio * residual {
                    break theta;
                }
            };
            angles.push(wrap_angle(theta));
            householder_drop(&mut basis[offset..], n, &coords[..rows]);
            offset += n;
        }
        angles.sort_by(f64::total_cmp);
        Ok(PointSample {
            angles,
            seed,
            sample_index,
            diagnostics: SampleDiagnostics { grid: self.grid, proposals, envelope_violations: violations },
        })
    }
}

/// Rotate the `rows = w.len()` basis rows so that the first one carries all
/// of the feature with coordinates `w` (`w_j = ⟨row_j, f⟩`); the caller then
/// drops that row.
fn householder_drop(rows: &mut [C64], n: usize, w: &[C64]) {
    let m = w.len();
    if m <= 1 {
        return;
    }
    let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let phase = if w[0].norm() > 0.0 { w[0] / w[0].norm() } else { C64::new(1.0, 0.0) };
    let mut u = w.to_vec();
    u[0] += phase * norm;
    let unorm2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    if unorm2 == 0.0 {
        return;
    }
    let beta = 2.0 / unorm2;
    // t = Σ_l u_l·row_l; row_j ← row_j − β·conj(u_j)·t.
    let mut t = vec![C64::new(0.0, 0.0); n];
    for (l, ul) in u.iter().enumerate() {
        for (ti, r) in t.iter_mut().zip(&rows[l * n..(l + 1) * n]) {
            *ti += ul * r;
        }
    }
    for (j, uj) in u.iter().enumerate() {
        let c = beta * uj.conj();
        for (r, ti) in rows[j * n..(j + 1) * n].iter_mut().zip(&t) {
            *r -= c * ti;
        }
    }
}

pub fn sample_ope(
    measure: &CircleMeasure,
    seq: &VerblunskySequence,
    n: usize,
    seed: u64,
    sample_index: u64,
    grid: usize,
) -> Result<PointSample> {
    OpeSampler::new(measure, seq, n, grid)?.sample(seed, sample_index)
}

/// `count` samples with indices `0..count`; the output does not depend on
/// `workers`.
pub fn batch_sample(
    measure: &CircleMeasure,
    seq: &VerblunskySequence,
    n: usize,
    seed: u64,
    count: usize,
    workers: usize,
    grid: usize,
) -> Result<Vec<PointSample>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let sampler = OpeSampler::new(measure, seq, n, grid)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| sampler.sample(seed, i as u64).map_err(|e| Error::Sample { index: i, source: Box::new(e) }))
            .collect()
    })
}
