//! Monte Carlo ground truth: matrix sampling for every ensemble family,
//! weighted spectral histograms with jackknife errors, and Haar-unitary
//! estimates of group integrals.
//!
//! Samples are drawn in fixed-size chunks; chunk `c` uses the ChaCha8 stream
//! `c` of the seed, so results do not depend on the thread count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{EnsembleSpec, Family};
use crate::linalg::CompensatedSum;
use crate::{Error, Result, C64};

/// Samples per RNG stream.
pub const CHUNK: usize = 4096;
/// Effective sample size below this fraction of the count raises a warning.
pub const ESS_WARNING_FRACTION: f64 = 0.01;

/// Worker threads for sampling; `0` runs serially on the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Threads(pub usize);

/// Runs `f` over chunk indices and concatenates the results in order.
fn over_chunks<T, F>(chunks: usize, threads: Threads, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    if threads.0 == 0 {
        return Ok((0..chunks).flat_map(&f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.0)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(&f)
            .collect::<Vec<Vec<T>>>()
            .into_iter()
            .flatten()
            .collect()
    }))
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `exp(-tr H²/scale)`: diagonal variance `s/2`, real and imaginary parts of
/// off-diagonal entries variance `s/4`.
fn gaussian_matrix<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<C64> {
    let diag = Normal::new(0.0, (0.5 * scale).sqrt()).expect("positive width");
    let off = Normal::new(0.0, 0.5 * scale.sqrt()).expect("positive width");
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(diag.sample(rng), 0.0);
        for j in i + 1..n {
            let z = C64::new(off.sample(rng), off.sample(rng));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Per-family sampling recipe.
enum Recipe {
    Gaussian { scale: f64 },
    Mixture { scales: Vec<f64>, pick: WeightedIndex<f64> },
    Weighted { m1: u32, m2: u32 },
}

impl Recipe {
    fn new(spec: &EnsembleSpec) -> Result<Self> {
        Ok(match spec.family() {
            Family::Gaussian { scale } => Recipe::Gaussian { scale: *scale },
            Family::NormDependent { spread } => {
                if spread.is_signed() {
                    return Err(Error::Config(
                        "spread function with negative or derivative terms cannot be sampled".into(),
                    ));
                }
                let atoms = spread.atoms();
                let pick = WeightedIndex::new(atoms.iter().map(|a| a.weight))
                    .map_err(|e| Error::Config(format!("spread weights: {e}")))?;
                Recipe::Mixture {
                    scales: atoms.iter().map(|a| 2.0 * a.t).collect(),
                    pick,
                }
            }
            Family::HigherTrace { m1, m2, .. } => Recipe::Weighted { m1: *m1, m2: *m2 },
        })
    }

    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (DMatrix<C64>, f64) {
        match self {
            Recipe::Gaussian { scale } => (gaussian_matrix(n, *scale, rng), 1.0),
            Recipe::Mixture { scales, pick } => {
                let s = scales[pick.sample(rng)];
                (gaussian_matrix(n, s, rng), 1.0)
            }
            Recipe::Weighted { m1, m2 } => {
                let h = gaussian_matrix(n, 1.0, rng);
                let p = h.pow(*m1);
                let tr: f64 = (0..n).map(|i| p[(i, i)].re).sum();
                (h, tr.powi(*m2 as i32))
            }
        }
    }
}

/// Eigenvalues of a sample of matrices with their importance weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub n: usize,
    pub seed: u64,
    /// `count × n` eigenvalues, ascending within each sample.
    pub eigenvalues: Vec<f64>,
    /// Nonnegative; all `1` for direct sampling.
    pub weights: Vec<f64>,
    pub effective_sample_size: f64,
    pub warnings: Vec<String>,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.weights.len()
    }

    pub fn spectrum(&self, i: usize) -> &[f64] {
        &self.eigenvalues[i * self.n..(i + 1) * self.n]
    }

    /// Self-normalized weighted mean of a per-sample statistic with its
    /// standard error.
    pub fn weighted_mean<F: Fn(&[f64]) -> f64>(&self, f: F) -> (f64, f64) {
        let total: f64 = self.weights.iter().sum();
        let values: Vec<f64> = (0..self.count()).map(|i| f(self.spectrum(i))).collect();
        let mut s = CompensatedSum::default();
        for (v, w) in values.iter().zip(&self.weights) {
            s.add(v * w);
        }
        let mean = s.value() / total;
        let mut var = CompensatedSum::default();
        for (v, w) in values.iter().zip(&self.weights) {
            var.add((w * (v - mean) / total).powi(2));
        }
        (mean, var.value().sqrt())
    }
}

fn sorted_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Draws `count` matrices; returns their spectra and weights.
pub fn sample_batch(spec: &EnsembleSpec, count: usize, seed: u64, threads: Threads) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::Config("sample count must be ≥ 1".into()));
    }
    let n = spec.n();
    let recipe = Recipe::new(spec)?;
    let chunks = count.div_ceil(CHUNK);
    let rows: Vec<(Vec<f64>, f64)> = over_chunks(chunks, threads, |c| {
        let mut rng = chunk_rng(seed, c);
        let len = CHUNK.min(count - c * CHUNK);
        (0..len)
            .map(|_| {
                let (m, w) = recipe.draw(n, &mut rng);
                (sorted_eigenvalues(m), w)
            })
            .collect()
    })?;
    let mut eigenvalues = Vec::with_capacity(count * n);
    let mut weights = Vec::with_capacity(count);
    for (ev, w) in rows {
        eigenvalues.extend(ev);
        weights.push(w);
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::Numerical("importance weight is negative or not finite".into()));
    }
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let ess = if sum_sq > 0.0 { sum * sum / sum_sq } else { 0.0 };
    let mut warnings = Vec::new();
    if ess < ESS_WARNING_FRACTION * count as f64 {
        warnings.push(format!(
            "effective sample size {ess:.1} is below {:.0}% of {count} samples",
            100.0 * ESS_WARNING_FRACTION
        ));
    }
    Ok(SampleBatch {
        n,
        seed,
        eigenvalues,
        weights,
        effective_sample_size: ess,
        warnings,
    })
}

/// The matrices behind the first `count` samples of [`sample_batch`] with the
/// same seed.
pub fn sample_matrices(spec: &EnsembleSpec, count: usize, seed: u64) -> Result<Vec<(DMatrix<C64>, f64)>> {
    let recipe = Recipe::new(spec)?;
    let n = spec.n();
    let chunks = count.div_ceil(CHUNK);
    over_chunks(chunks, Threads(0), |c| {
        let mut rng = chunk_rng(seed, c);
        let len = CHUNK.min(count - c * CHUNK);
        (0..len).map(|_| recipe.draw(n, &mut rng)).collect()
    })
}

/// Uniform bins on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(hi > lo) || count == 0 {
            return Err(Error::Config(format!("bins need lo < hi and count ≥ 1, got {lo}:{hi}:{count}")));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn center(&self, b: usize) -> f64 {
        self.lo + self.width() * (b as f64 + 0.5)
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if x < self.lo || x >= self.hi {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

/// Histogram estimate of a density with per-bin standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedDensity {
    pub bins: Bins,
    /// Row-major over `dims` bin axes.
    pub density: Vec<f64>,
    pub error: Vec<f64>,
    /// Bins without a single contribution.
    pub empty: Vec<usize>,
}

impl BinnedDensity {
    /// One row per bin: bin centres (one column per axis), density, error.
    pub fn write_csv<W: std::io::Write>(&self, seed: u64, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# seed={seed}")?;
        let two_d = self.density.len() == self.bins.count * self.bins.count && self.bins.count > 1;
        let mut w = csv::Writer::from_writer(out);
        if two_d {
            w.write_record(["x", "y", "density", "error"])?;
        } else {
            w.write_record(["x", "density", "error"])?;
        }
        for (i, (d, e)) in self.density.iter().zip(&self.error).enumerate() {
            let mut row = if two_d {
                vec![self.bins.center(i / self.bins.count), self.bins.center(i % self.bins.count)]
            } else {
                vec![self.bins.center(i)]
            };
            row.extend([*d, *e]);
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl SampleBatch {
    /// `key,value` summary of the batch.
    pub fn write_summary_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["key", "value"])?;
        let total: f64 = self.weights.iter().sum();
        for (k, v) in [
            ("n", self.n.to_string()),
            ("seed", self.seed.to_string()),
            ("count", self.count().to_string()),
            ("total_weight", format!("{total:.16e}")),
            ("effective_sample_size", format!("{:.16e}", self.effective_sample_size)),
            ("warnings", self.warnings.join("; ")),
        ] {
            w.write_record([k, v.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Ratio estimator `A_b / (W · volume)` with the exact delete-1 jackknife.
///
/// Leaving out sample `s` shifts the ratio by `d_s = w_s (A_b/W - c_sb) / (W - w_s)`;
/// only bins a sample touches need the `c_sb` term, the rest are summed once.
fn jackknife_histogram(
    weights: &[f64],
    hits: impl Fn(usize) -> Vec<(usize, f64)>,
    total_bins: usize,
    volume: f64,
) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = weights.len() as f64;
    let big_w: f64 = weights.iter().sum();
    let mut acc = vec![0.0; total_bins];
    let per_sample: Vec<Vec<(usize, f64)>> = (0..weights.len()).map(&hits).collect();
    for (s, list) in per_sample.iter().enumerate() {
        for &(b, c) in list {
            acc[b] += weights[s] * c;
        }
    }
    let ratio: Vec<f64> = acc.iter().map(|a| a / big_w).collect();
    // Σ_s w u and Σ_s (w u)² with u = 1/(W - w)
    let (mut s1, mut s2) = (0.0, 0.0);
    for &w in weights {
        let wu = if big_w > w { w / (big_w - w) } else { 0.0 };
        s1 += wu;
        s2 += wu * wu;
    }
    // sparse corrections
    let mut lin = vec![0.0; total_bins];
    let mut quad = vec![0.0; total_bins];
    let mut cross = vec![0.0; total_bins];
    for (s, list) in per_sample.iter().enumerate() {
        let w = weights[s];
        let wu = if big_w > w { w / (big_w - w) } else { 0.0 };
        for &(b, c) in list {
            lin[b] += wu * c;
            cross[b] += wu * wu * c;
            quad[b] += wu * wu * c * c;
        }
    }
    let mut density = Vec::with_capacity(total_bins);
    let mut error = Vec::with_capacity(total_bins);
    let mut empty = Vec::new();
    for b in 0..total_bins {
        let r = ratio[b];
        let sum_d = r * s1 - lin[b];
        let sum_d2 = r * r * s2 - 2.0 * r * cross[b] + quad[b];
        let var = ((n - 1.0) / n) * (sum_d2 - sum_d * sum_d / n).max(0.0);
        density.push(r / volume);
        error.push(var.sqrt() / volume);
        if acc[b] == 0.0 {
            empty.push(b);
        }
    }
    (density, error, empty)
}

fn collapse(mut idx: Vec<usize>) -> Vec<(usize, f64)> {
    idx.sort_unstable();
    let mut out: Vec<(usize, f64)> = Vec::new();
    for b in idx {
        match out.last_mut() {
            Some((last, c)) if *last == b => *c += 1.0,
            _ => out.push((b, 1.0)),
        }
    }
    out
}

/// Weighted eigenvalue histogram estimating `R₁`.
pub fn estimate_r1(batch: &SampleBatch, bins: Bins) -> Result<BinnedDensity> {
    if batch.count() == 0 {
        return Err(Error::Config("empty batch".into()));
    }
    let (density, error, empty) = jackknife_histogram(
        &batch.weights,
        |s| collapse(batch.spectrum(s).iter().filter_map(|&x| bins.index(x)).collect()),
        bins.count,
        bins.width(),
    );
    Ok(BinnedDensity {
        bins,
        density,
        error,
        empty,
    })
}

/// Weighted histogram of ordered eigenvalue pairs `(λ_i, λ_j)`, `i ≠ j`,
/// estimating `R₂` without contact terms; row-major `[b_x · count + b_y]`.
pub fn estimate_r2(batch: &SampleBatch, bins: Bins) -> Result<BinnedDensity> {
    if batch.count() == 0 {
        return Err(Error::Config("empty batch".into()));
    }
    let count = bins.count;
    let (density, error, empty) = jackknife_histogram(
        &batch.weights,
        |s| {
            let spec: Vec<Option<usize>> = batch.spectrum(s).iter().map(|&x| bins.index(x)).collect();
            let mut idx = Vec::new();
            for (i, bi) in spec.iter().enumerate() {
                for (j, bj) in spec.iter().enumerate() {
                    if let (true, Some(a), Some(b)) = (i != j, bi, bj) {
                        idx.push(a * count + b);
                    }
                }
            }
            collapse(idx)
        },
        count * count,
        bins.width() * bins.width(),
    );
    Ok(BinnedDensity {
        bins,
        density,
        error,
        empty,
    })
}

fn haar_from<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let scale = 0.5f64.sqrt();
    let z = DMatrix::<C64>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * scale
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed `N × N` unitary from QR of a complex Ginibre matrix with
/// the phases of `diag R` moved into `Q`.
pub fn haar_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    haar_from(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Complex mean with standard errors of both parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexEstimate {
    pub value: C64,
    pub error_re: f64,
    pub error_im: f64,
}

impl ComplexEstimate {
    /// `|z - value|` in units of the combined standard error.
    pub fn sigmas(&self, z: C64) -> f64 {
        let se = (self.error_re.powi(2) + self.error_im.powi(2)).sqrt();
        (z - self.value).norm() / se.max(f64::MIN_POSITIVE)
    }
}

/// Monte Carlo mean of `exp(i tr U E U† R)` over Haar `U`.
pub fn hciz_mc(e: &[f64], r: &[f64], samples: usize, seed: u64, threads: Threads) -> Result<ComplexEstimate> {
    let n = e.len();
    if r.len() != n || n == 0 || samples < 2 {
        return Err(Error::Config("hciz_mc needs equal-length spectra and ≥ 2 samples".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let values: Vec<C64> = over_chunks(chunks, threads, |c| {
        let mut rng = chunk_rng(seed, c);
        let len = CHUNK.min(samples - c * CHUNK);
        (0..len)
            .map(|_| {
                let u = haar_from(n, &mut rng);
                // tr U E U† R = Σ_jk |U_jk|² E_k R_j
                let mut phase = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        phase += u[(j, k)].norm_sqr() * e[k] * r[j];
                    }
                }
                C64::from_polar(1.0, phase)
            })
            .collect()
    })?;
    let m = values.len() as f64;
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    values.iter().for_each(|v| {
        re.add(v.re);
        im.add(v.im);
    });
    let mean = C64::new(re.value() / m, im.value() / m);
    let (mut vr, mut vi) = (CompensatedSum::default(), CompensatedSum::default());
    values.iter().for_each(|v| {
        vr.add((v.re - mean.re).powi(2));
        vi.add((v.im - mean.im).powi(2));
    });
    Ok(ComplexEstimate {
        value: mean,
        error_re: (vr.value() / (m - 1.0) / m).sqrt(),
        error_im: (vi.value() / (m - 1.0) / m).sqrt(),
    })
}
