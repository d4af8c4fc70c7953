//! Rotation-invariant ensembles: declarative specs, densities, reduced
//! densities of `2k` diagonal entries and characteristic functions.

mod mixture;
mod spread;
mod wick;

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::jet::MultiJet;
use crate::linalg::CompensatedSum;
use crate::poly::Poly;
use crate::{Error, Result, C64};

pub use mixture::{
    gaussian_fourier_jet, gaussian_fourier_moment, shifted_power_moment, GaussianMixture,
    MixtureComponent,
};
pub use spread::{variance_derivative_terms, Spread, SpreadAtom, NORMALIZATION_TOL};
pub use wick::{conditional_weight, full_expectation, superspace_weight, WICK_CAP};

/// Normalization constant of the higher-trace weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TraceNormalization {
    /// Computed exactly from the Gaussian expectation of the weight.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Family {
    /// `exp(-tr H²/scale)`.
    Gaussian { scale: f64 },
    /// `∫ f(t) exp(-tr H²/(2t)) dt`, each Gaussian normalized.
    NormDependent { spread: Spread },
    /// `b (tr H^{M1})^{M2} exp(-tr H²)`.
    HigherTrace {
        m1: u32,
        m2: u32,
        normalization: TraceNormalization,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    n: usize,
    family: Family,
}

/// The kept diagonal entries `(H_11, …, H_kk, H_{k+1,k+1}, …, H_2k,2k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSelection(Vec<f64>);

impl DiagonalSelection {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() || h.len() % 2 != 0 {
            return Err(Error::Config(format!(
                "diagonal selection needs 2k entries, got {}",
                h.len()
            )));
        }
        Ok(Self(h))
    }

    pub fn k(&self) -> usize {
        self.0.len() / 2
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// How to evaluate a reduced density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMethod {
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Value with a nonnegative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "N")]
    n: usize,
    family: String,
    scale: Option<f64>,
    spread: Option<RawSpread>,
    m1: Option<u32>,
    m2: Option<u32>,
    b: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpread {
    Tabulated { t: Vec<f64>, f: Vec<f64> },
    TabulatedCsv { path: String },
    Atoms { atoms: Vec<SpreadAtom> },
}

/// Gaussian normalization `2^{N(N-1)/2} (π s)^{-N²/2}` of `exp(-tr H²/s)`.
fn gaussian_norm(n: usize, scale: f64) -> f64 {
    let nf = n as f64;
    (0.5 * nf * (nf - 1.0) * 2f64.ln() - 0.5 * nf * nf * (PI * scale).ln()).exp()
}

impl EnsembleSpec {
    pub fn gaussian(n: usize, scale: f64) -> Result<Self> {
        Self::new(n, Family::Gaussian { scale })
    }

    pub fn norm_dependent(n: usize, spread: Spread) -> Result<Self> {
        Self::new(n, Family::NormDependent { spread })
    }

    pub fn higher_trace(n: usize, m1: u32, m2: u32, normalization: TraceNormalization) -> Result<Self> {
        Self::new(
            n,
            Family::HigherTrace {
                m1,
                m2,
                normalization,
            },
        )
    }

    pub fn new(n: usize, family: Family) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("ensemble needs N ≥ 1".into()));
        }
        match &family {
            Family::Gaussian { scale } if !(*scale > 0.0 && scale.is_finite()) => {
                return Err(Error::Config(format!("Gaussian scale must be positive, got {scale}")));
            }
            Family::HigherTrace { m1, m2, normalization } => {
                if *m1 == 1 && *m2 == 1 {
                    return Err(Error::Config(
                        "M1 = M2 = 1 makes the normalization integral vanish".into(),
                    ));
                }
                if m1 % 2 == 1 && m2 % 2 == 1 {
                    return Err(Error::Config(format!(
                        "(tr H^{m1})^{m2} changes sign; M1 or M2 must be even"
                    )));
                }
                if let TraceNormalization::Value(b) = normalization {
                    if !(*b > 0.0 && b.is_finite()) {
                        return Err(Error::Config(format!("normalization b must be positive, got {b}")));
                    }
                }
            }
            _ => {}
        }
        Ok(Self { n, family })
    }

    /// Parses the JSON form; relative CSV paths resolve against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text)?;
        let unexpected = |field: &str| {
            Error::Config(format!("field '{field}' does not apply to family '{}'", raw.family))
        };
        let family = match raw.family.as_str() {
            "gaussian" => {
                if raw.spread.is_some() {
                    return Err(unexpected("spread"));
                }
                if raw.m1.is_some() || raw.m2.is_some() || raw.b.is_some() {
                    return Err(unexpected("m1/m2/b"));
                }
                Family::Gaussian {
                    scale: raw.scale.unwrap_or(1.0),
                }
            }
            "norm_dependent" => {
                if raw.scale.is_some() {
                    return Err(unexpected("scale"));
                }
                if raw.m1.is_some() || raw.m2.is_some() || raw.b.is_some() {
                    return Err(unexpected("m1/m2/b"));
                }
                let spread = match raw.spread {
                    None => return Err(Error::Config("norm_dependent needs a 'spread'".into())),
                    Some(RawSpread::Tabulated { t, f }) => Spread::tabulated(&t, &f)?,
                    Some(RawSpread::Atoms { atoms }) => Spread::from_atoms(atoms)?,
                    Some(RawSpread::TabulatedCsv { path }) => {
                        let p = Path::new(&path);
                        let full = match base {
                            Some(dir) if p.is_relative() => dir.join(p),
                            _ => p.to_path_buf(),
                        };
                        Spread::from_csv(&full)?
                    }
                };
                Family::NormDependent { spread }
            }
            "higher_trace" => {
                if raw.scale.is_some() {
                    return Err(unexpected("scale"));
                }
                if raw.spread.is_some() {
                    return Err(unexpected("spread"));
                }
                let (Some(m1), Some(m2)) = (raw.m1, raw.m2) else {
                    return Err(Error::Config("higher_trace needs 'm1' and 'm2'".into()));
                };
                let normalization = match raw.b {
                    None => TraceNormalization::Auto,
                    Some(serde_json::Value::String(s)) if s == "auto" => TraceNormalization::Auto,
                    Some(serde_json::Value::Number(x)) => TraceNormalization::Value(
                        x.as_f64().ok_or_else(|| Error::Config("b must be a number".into()))?,
                    ),
                    Some(other) => {
                        return Err(Error::Config(format!("b must be a number or \"auto\", got {other}")))
                    }
                };
                Family::HigherTrace {
                    m1,
                    m2,
                    normalization,
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown family '{other}'; expected gaussian, norm_dependent or higher_trace"
                )))
            }
        };
        Self::new(raw.n, family)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Scale `s` if the ensemble is exactly `exp(-tr H²/s)`, normalized.
    pub fn gaussian_scale(&self) -> Option<f64> {
        match &self.family {
            Family::Gaussian { scale } => Some(*scale),
            Family::NormDependent { spread } => spread.as_spike().map(|t| 2.0 * t),
            Family::HigherTrace { .. } if self.is_trivial_trace() => {
                let total = self.trace_weight_factor().ok()? * self.trivial_trace_value();
                ((total - 1.0).abs() < 1e-12).then_some(1.0)
            }
            Family::HigherTrace { .. } => None,
        }
    }

    /// `(tr H^0)^{M2} = N^{M2}`, or `1` when `M2 = 0`.
    fn trivial_trace_value(&self) -> f64 {
        match self.family {
            Family::HigherTrace { m2, .. } => (self.n as f64).powi(m2 as i32),
            _ => 1.0,
        }
    }

    /// Higher-trace weight `(tr H^{M1})^{M2}` reduces to the Gaussian.
    fn is_trivial_trace(&self) -> bool {
        matches!(self.family, Family::HigherTrace { m1, m2, .. } if m1 == 0 || m2 == 0)
    }

    /// Ratio between the stated `b` and the value that normalizes the weight;
    /// `1` for `auto`.
    fn trace_weight_factor(&self) -> Result<f64> {
        match self.family {
            Family::HigherTrace {
                m1,
                m2,
                normalization,
            } => {
                let expect = if self.is_trivial_trace() {
                    self.trivial_trace_value()
                } else {
                    full_expectation(self.n, m1, m2)?
                };
                Ok(match normalization {
                    TraceNormalization::Auto => 1.0 / expect,
                    TraceNormalization::Value(b) => b / gaussian_norm(self.n, 1.0),
                })
            }
            _ => Ok(1.0),
        }
    }

    /// `b_{M1 M2}` as it appears in the density.
    pub fn trace_normalization(&self) -> Result<f64> {
        match self.family {
            Family::HigherTrace { normalization, .. } => match normalization {
                TraceNormalization::Value(b) => Ok(b),
                TraceNormalization::Auto => Ok(self.trace_weight_factor()? * gaussian_norm(self.n, 1.0)),
            },
            _ => Err(Error::Contract("normalization b belongs to higher-trace ensembles".into())),
        }
    }

    /// The reduced density of `2k` diagonal entries as a Gaussian mixture.
    pub fn mixture(&self, k: usize) -> Result<GaussianMixture> {
        let vars = 2 * k;
        if vars > self.n {
            return Err(Error::Config(format!(
                "reduced density needs 2k ≤ N, got k={k}, N={}",
                self.n
            )));
        }
        let components = match &self.family {
            Family::Gaussian { scale } => vec![MixtureComponent {
                weight: 1.0,
                scale: *scale,
                poly: Poly::constant(vars, 1.0),
            }],
            Family::NormDependent { spread } => spread
                .atoms()
                .iter()
                .map(|a| {
                    // (-1)^d ∂_t^d of (2πt)^{-k} e^{-S/2t}, written against (π·2t)^{-k} e^{-S/2t}
                    let sign = if a.derivative % 2 == 0 { 1.0 } else { -1.0 };
                    let poly = variance_derivative_terms(k as f64, a.derivative)
                        .into_iter()
                        .fold(Poly::zero(vars), |acc, (c, power, b)| {
                            acc.add(&mixture::square_norm_power(vars, b).scale(c * a.t.powf(k as f64 - power)))
                        });
                    MixtureComponent {
                        weight: sign * a.weight,
                        scale: 2.0 * a.t,
                        poly,
                    }
                })
                .collect(),
            Family::HigherTrace { m1, m2, .. } => {
                let poly = if self.is_trivial_trace() {
                    Poly::constant(vars, self.trivial_trace_value())
                } else {
                    conditional_weight(self.n, *m1, *m2, vars)?.as_ref().clone()
                };
                vec![MixtureComponent {
                    weight: self.trace_weight_factor()?,
                    scale: 1.0,
                    poly,
                }]
            }
        };
        Ok(GaussianMixture::new(vars, components))
    }

    /// The reduced density entering the convolution over `k` bosonic and `k`
    /// fermionic eigenvalues: the Fourier transform of `Φ` continued to
    /// supermatrix arguments. It equals [`Self::mixture`] whenever `Φ`
    /// depends on `tr K²` alone; for higher traces the fermionic half is
    /// returned in the rotated coordinate.
    pub fn superspace_mixture(&self, k: usize) -> Result<GaussianMixture> {
        match self.family {
            Family::HigherTrace { m1, m2, .. } if !self.is_trivial_trace() && m1 != 2 => {
                let mixture = self.mixture(k)?;
                let poly = superspace_weight(self.n, m1, m2, k)?.as_ref().clone();
                let components = vec![MixtureComponent {
                    weight: self.trace_weight_factor()?,
                    scale: 1.0,
                    poly,
                }];
                Ok(GaussianMixture::new(mixture.vars(), components).with_rotated_tail(k))
            }
            _ => self.mixture(k),
        }
    }

    /// Pointwise `P(H)`.
    pub fn evaluate_density(&self, h: &DMatrix<C64>) -> Result<f64> {
        let n = self.n;
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::Contract(format!("matrix must be {n}×{n}")));
        }
        let scale_ref = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-12 * scale_ref {
                    return Err(Error::Contract("matrix is not Hermitean".into()));
                }
            }
        }
        let tr2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        match &self.family {
            Family::Gaussian { scale } => Ok(gaussian_norm(n, *scale) * (-tr2 / scale).exp()),
            Family::NormDependent { spread } => {
                let nf = n as f64;
                let a0 = 0.5 * nf * nf;
                // c(t) = 2^{N(N-1)/2} (2πt)^{-N²/2}
                let pre = (0.5 * nf * (nf - 1.0) * 2f64.ln() - a0 * (2.0 * PI).ln()).exp();
                let mut acc = CompensatedSum::default();
                for a in spread.atoms() {
                    let sign = if a.derivative % 2 == 0 { 1.0 } else { -1.0 };
                    for (c, power, b) in variance_derivative_terms(a0, a.derivative) {
                        acc.add(
                            sign * a.weight
                                * pre
                                * c
                                * a.t.powf(-power)
                                * tr2.powi(b as i32)
                                * (-tr2 / (2.0 * a.t)).exp(),
                        );
                    }
                }
                Ok(acc.value())
            }
            Family::HigherTrace { m1, m2, .. } => {
                let power = h.pow(*m1);
                let trace: f64 = (0..n).map(|i| power[(i, i)].re).sum();
                Ok(self.trace_normalization()? * trace.powi(*m2 as i32) * (-tr2).exp())
            }
        }
    }

    /// `P^red(h)` of the given diagonal selection.
    pub fn reduced_density(&self, h: &DiagonalSelection, method: ReductionMethod) -> Result<Estimate> {
        let k = h.k();
        match method {
            ReductionMethod::ClosedForm => Ok(Estimate {
                value: self.mixture(k)?.density(h.values()),
                error: 0.0,
            }),
            ReductionMethod::MonteCarlo { samples, seed } => self.reduced_density_mc(h, samples, seed),
        }
    }

    fn reduced_density_mc(&self, h: &DiagonalSelection, samples: usize, seed: u64) -> Result<Estimate> {
        if samples < 1000 {
            return Err(Error::Config(format!(
                "Monte Carlo reduced density needs ≥ 1000 samples, got {samples}"
            )));
        }
        let kept = h.values();
        let vars = kept.len();
        if vars > self.n {
            return Err(Error::Config("reduced density needs 2k ≤ N".into()));
        }
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sq: f64 = kept.iter().map(|x| x * x).sum();
        match &self.family {
            Family::Gaussian { .. } => Ok(Estimate {
                value: self.mixture(vars / 2)?.density(kept),
                error: 0.0,
            }),
            Family::NormDependent { spread } => {
                if spread.is_signed() {
                    return Err(Error::Config(
                        "signed spread functions cannot be sampled".into(),
                    ));
                }
                let atoms = spread.atoms();
                let pick = rand_distr::weighted::WeightedIndex::new(atoms.iter().map(|a| a.weight))
                    .map_err(|e| Error::Config(format!("spread weights: {e}")))?;
                let values: Vec<f64> = (0..samples)
                    .map(|_| {
                        let t = atoms[pick.sample(&mut rng)].t;
                        (2.0 * PI * t).powf(-0.5 * vars as f64) * (-sq / (2.0 * t)).exp()
                    })
                    .collect();
                Ok(mean_and_error(&values))
            }
            Family::HigherTrace { m1, m2, .. } => {
                let diag = Normal::new(0.0, 0.5f64.sqrt()).expect("valid normal");
                let off = Normal::new(0.0, 0.5).expect("valid normal");
                let gauss = PI.powf(-0.5 * vars as f64) * (-sq).exp();
                let factor = self.trace_weight_factor()? * gauss;
                let values: Vec<f64> = (0..samples)
                    .map(|_| {
                        let mut m = DMatrix::<C64>::zeros(n, n);
                        for i in 0..n {
                            m[(i, i)] = C64::new(
                                if i < vars { kept[i] } else { diag.sample(&mut rng) },
                                0.0,
                            );
                            for j in i + 1..n {
                                let z = C64::new(off.sample(&mut rng), off.sample(&mut rng));
                                m[(i, j)] = z;
                                m[(j, i)] = z.conj();
                            }
                        }
                        let p = m.pow(*m1);
                        let tr: f64 = (0..n).map(|i| p[(i, i)].re).sum();
                        factor * tr.powi(*m2 as i32)
                    })
                    .collect();
                Ok(mean_and_error(&values))
            }
        }
    }

    /// Taylor series of `Φ(r₁, r₂)` in the `k` variables `r₂` at fixed `r₁`.
    pub fn characteristic_function(&self, r1: &[f64], order: usize) -> Result<MultiJet> {
        Ok(self.superspace_mixture(r1.len())?.characteristic_jet(r1, order))
    }

    /// `Φ` at a point of `2k` arguments.
    pub fn characteristic_value(&self, r: &[f64]) -> Result<C64> {
        if r.len() % 2 != 0 {
            return Err(Error::Config("characteristic function needs 2k arguments".into()));
        }
        Ok(self.mixture(r.len() / 2)?.characteristic(r))
    }

    /// `Q(s) = ∫ f(t) 2^{k(k-1)} exp(-trg s²/(2t)) dt` with
    /// `trg s² = Σ s_{p1}² + Σ s_{p2}²` after the Wick-type rotation.
    pub fn superspace_density(&self, s1: &[f64], s2: &[f64]) -> Result<f64> {
        let Family::NormDependent { spread } = &self.family else {
            return Err(Error::Contract("superspace density is defined for norm-dependent ensembles".into()));
        };
        if s1.len() != s2.len() || s1.is_empty() {
            return Err(Error::Config("superspace density needs k boson and k fermion eigenvalues".into()));
        }
        let k = s1.len() as i32;
        let trg: f64 = s1.iter().chain(s2).map(|x| x * x).sum();
        let mut acc = CompensatedSum::default();
        for a in spread.atoms() {
            let sign = if a.derivative % 2 == 0 { 1.0 } else { -1.0 };
            for (c, power, b) in variance_derivative_terms(0.0, a.derivative) {
                acc.add(sign * a.weight * c * a.t.powf(-power) * trg.powi(b as i32) * (-trg / (2.0 * a.t)).exp());
            }
        }
        Ok(2f64.powi(k * (k - 1)) * acc.value())
    }
}

fn mean_and_error(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mut s = CompensatedSum::default();
    values.iter().for_each(|&v| s.add(v));
    let mean = s.value() / n;
    let mut q = CompensatedSum::default();
    values.iter().for_each(|&v| q.add((v - mean).powi(2)));
    Estimate {
        value: mean,
        error: (q.value() / (n - 1.0) / n).sqrt(),
    }
}

#[cfg(test)]
mod tests;
