//! Spread functions `f(t)` over the variance of norm-dependent ensembles,
//! held as weighted atoms `w δ^{(d)}(t - t₀)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normalization tolerance for `∫ f(t) dt = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// `weight · δ^{(derivative)}(t - t)`. Pairing with a family `g(t)` gives
/// `weight · (-1)^d ∂_t^d g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadAtom {
    pub t: f64,
    pub weight: f64,
    #[serde(default)]
    pub derivative: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spread {
    atoms: Vec<SpreadAtom>,
}

impl Spread {
    pub fn from_atoms(atoms: Vec<SpreadAtom>) -> Result<Self> {
        let atoms: Vec<SpreadAtom> = atoms.into_iter().filter(|a| a.weight != 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::Config("spread function has no mass".into()));
        }
        for a in &atoms {
            if !(a.t > 0.0 && a.t.is_finite() && a.weight.is_finite()) {
                return Err(Error::Config(format!(
                    "spread atom at t={} with weight {} is invalid; t must be positive",
                    a.t, a.weight
                )));
            }
        }
        let mass: f64 = atoms
            .iter()
            .filter(|a| a.derivative == 0)
            .map(|a| a.weight)
            .sum();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Config(format!(
                "spread function integrates to {mass}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// Single variance `t₀`.
    pub fn spike(t0: f64) -> Result<Self> {
        Self::from_atoms(vec![SpreadAtom {
            t: t0,
            weight: 1.0,
            derivative: 0,
        }])
    }

    /// Tabulated nonnegative density, integrated with the trapezoidal rule.
    pub fn tabulated(t: &[f64], f: &[f64]) -> Result<Self> {
        if t.len() != f.len() || t.len() < 2 {
            return Err(Error::Config(
                "tabulated spread needs at least two (t, f) pairs of equal length".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t[0] < 0.0 {
            return Err(Error::Config(
                "tabulated spread needs strictly ascending t ≥ 0".into(),
            ));
        }
        if f.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config("tabulated spread values must be nonnegative".into()));
        }
        if t[0] == 0.0 && f[0] != 0.0 {
            return Err(Error::Config(
                "tabulated spread cannot put mass on zero variance".into(),
            ));
        }
        let atoms = (0..t.len())
            .map(|i| {
                let left = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
                let right = if i + 1 < t.len() { t[i + 1] - t[i] } else { 0.0 };
                SpreadAtom {
                    t: t[i],
                    weight: 0.5 * (left + right) * f[i],
                    derivative: 0,
                }
            })
            .collect();
        Self::from_atoms(atoms)
    }

    /// Samples `f` on `count` equidistant points of `[lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(Error::Config("spread grid needs lo < hi and count ≥ 2".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let t: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
        let v: Vec<f64> = t.iter().map(|&x| f(x)).collect();
        Self::tabulated(&t, &v)
    }

    /// Reads a `t,f` CSV file with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            f: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let rows: Vec<Row> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
        let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
        let f: Vec<f64> = rows.iter().map(|r| r.f).collect();
        Self::tabulated(&t, &f)
    }

    pub fn atoms(&self) -> &[SpreadAtom] {
        &self.atoms
    }

    /// Negative weights or derivative atoms; such spreads are not probability
    /// measures over `t` and cannot be sampled directly.
    pub fn is_signed(&self) -> bool {
        self.atoms.iter().any(|a| a.weight < 0.0 || a.derivative > 0)
    }

    /// The variance if the spread is a single plain atom.
    pub fn as_spike(&self) -> Option<f64> {
        match self.atoms.as_slice() {
            [a] if a.derivative == 0 => Some(a.t),
            _ => None,
        }
    }
}

/// Terms of `∂_t^d [t^{-a₀} e^{-S/(2t)}] = Σ c t^{-a} S^b e^{-S/(2t)}` as `(c, a, b)`.
pub fn variance_derivative_terms(a0: f64, d: u32) -> Vec<(f64, f64, u32)> {
    let mut terms = vec![(1.0, a0, 0u32)];
    for _ in 0..d {
        let mut next: Vec<(f64, f64, u32)> = Vec::new();
        for &(c, a, b) in &terms {
            // ∂_t t^{-a} = -a t^{-a-1};  ∂_t e^{-S/2t} = S/(2t²) e^{-S/2t}
            push_term(&mut next, -a * c, a + 1.0, b);
            push_term(&mut next, 0.5 * c, a + 2.0, b + 1);
        }
        terms = next;
    }
    terms
}

fn push_term(terms: &mut Vec<(f64, f64, u32)>, c: f64, a: f64, b: u32) {
    if c == 0.0 {
        return;
    }
    if let Some(slot) = terms.iter_mut().find(|(_, a2, b2)| *a2 == a && *b2 == b) {
        slot.0 += c;
    } else {
        terms.push((c, a, b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_normalize() {
        let s = Spread::from_fn(|t| 2.0 * t, 0.0, 1.0, 101).unwrap();
        let total: f64 = s.atoms().iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(!s.is_signed());
    }

    #[test]
    fn unnormalized_spread_rejected() {
        assert!(Spread::tabulated(&[0.5, 1.0], &[1.0, 1.0]).is_err());
        assert!(Spread::tabulated(&[0.5, 1.0], &[-1.0, 5.0]).is_err());
    }

    #[test]
    fn derivative_terms_match_finite_difference() {
        let (s, a0) = (1.7, 2.5);
        let g = |t: f64| t.powf(-a0) * (-s / (2.0 * t)).exp();
        let eval = |d: u32, t: f64| -> f64 {
            variance_derivative_terms(a0, d)
                .iter()
                .map(|&(c, a, b)| c * t.powf(-a) * s.powi(b as i32) * (-s / (2.0 * t)).exp())
                .sum()
        };
        let (t, h) = (0.8, 1e-4);
        let fd1 = (g(t + h) - g(t - h)) / (2.0 * h);
        let fd2 = (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h);
        assert!((eval(1, t) - fd1).abs() < 1e-6 * fd1.abs());
        assert!((eval(2, t) - fd2).abs() < 1e-5 * fd2.abs());
    }
}
