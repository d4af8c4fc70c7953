//! Harish-Chandra–Itzykson–Zuber integrals `∫ dμ(U) exp(i tr U E U† R)`
//! over the Haar-normalized unitary group.

use crate::linalg::{det, factorial, i_pow, vandermonde_real};
use crate::{Error, Result, C64};

/// Spectra closer than this are treated as confluent.
pub const CONFLUENCE: f64 = 1e-8;

/// Value with an error bound from the confluence treatment (zero otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HczValue {
    pub value: C64,
    pub error: f64,
}

fn min_gap(v: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            g = g.min((v[i] - v[j]).abs());
        }
    }
    g
}

fn determinant_formula(e: &[f64], r: &[f64]) -> C64 {
    let n = e.len();
    let m: Vec<Vec<C64>> = e
        .iter()
        .map(|&a| r.iter().map(|&b| C64::from_polar(1.0, a * b)).collect())
        .collect();
    let pref: f64 = (1..n).map(factorial).product();
    det(&m) * pref / (i_pow((n * (n - 1) / 2) as i64) * vandermonde_real(e) * vandermonde_real(r))
}

/// `det[e^{i E_n R_m}] ∏_{n<N} n! / (i^{N(N-1)/2} Δ(E) Δ(R))`.
///
/// Confluent spectra are split symmetrically by `±10·δ·j` and averaged; half
/// the difference of the two evaluations is the reported error.
pub fn hciz_exact(e: &[f64], r: &[f64]) -> Result<HczValue> {
    if e.len() != r.len() || e.is_empty() {
        return Err(Error::Config(format!(
            "HCIZ needs two spectra of equal nonzero length, got {} and {}",
            e.len(),
            r.len()
        )));
    }
    if min_gap(e) >= CONFLUENCE && min_gap(r) >= CONFLUENCE {
        return Ok(HczValue {
            value: determinant_formula(e, r),
            error: 0.0,
        });
    }
    let shift = |v: &[f64], sign: f64| -> Vec<f64> {
        if min_gap(v) >= CONFLUENCE {
            return v.to_vec();
        }
        v.iter()
            .enumerate()
            .map(|(j, &x)| x + sign * 10.0 * CONFLUENCE * j as f64)
            .collect()
    };
    let up = determinant_formula(&shift(e, 1.0), &shift(r, 1.0));
    let down = determinant_formula(&shift(e, -1.0), &shift(r, -1.0));
    Ok(HczValue {
        value: (up + down) * 0.5,
        error: 0.5 * (up - down).norm(),
    })
}

/// Rank-deficient limit with `R = (R̃₁, …, R̃_{2k}, 0, …, 0)`, `m = N - 2k` zeros:
/// `∏_{n=m}^{N-1} n! · i^{3m(m-1)/2 - N(N-1)/2} · det[e^{iE R̃_j} | E^j] / (Δ(E) Δ(R̃) ∏ R̃^m)`.
pub fn hciz_degenerate(e: &[f64], reduced: &[f64]) -> Result<C64> {
    let n = e.len();
    let nonzero = reduced.len();
    if nonzero == 0 || nonzero % 2 != 0 || nonzero >= n {
        return Err(Error::Config(format!(
            "degenerate HCIZ needs 2k nonzero entries with 2k < N, got {nonzero} for N={n}"
        )));
    }
    if let Some(z) = reduced.iter().find(|r| r.abs() < CONFLUENCE) {
        return Err(Error::Pole(format!(
            "reduced spectrum entry {z} vanishes; 1/R^(N-2k) is singular"
        )));
    }
    if min_gap(reduced) < CONFLUENCE || min_gap(e) < CONFLUENCE {
        return Err(Error::Config("degenerate HCIZ needs distinct spectra".into()));
    }
    let m = n - nonzero;
    let rows: Vec<Vec<C64>> = e
        .iter()
        .map(|&a| {
            reduced
                .iter()
                .map(|&b| C64::from_polar(1.0, a * b))
                .chain((0..m).map(|j| C64::new(a.powi(j as i32), 0.0)))
                .collect()
        })
        .collect();
    let pref: f64 = (m..n).map(factorial).product();
    let phase = i_pow((3 * m * (m.saturating_sub(1)) / 2) as i64 - (n * (n - 1) / 2) as i64);
    let den = vandermonde_real(e)
        * vandermonde_real(reduced)
        * reduced.iter().map(|r| r.powi(m as i32)).product::<f64>();
    Ok(det(&rows) * phase * pref / den)
}
