//! Closed forms: the GUE determinant of oscillator kernels, and the
//! higher-trace determinants whose row factors are finite sums of
//! generalized Hermite functions.

use crate::ensembles::{EnsembleSpec, Family};
use crate::linalg::{det, factorial, i_pow};
use crate::special::{
    gue_kernel, half_line_gaussian_moment, hermite_coefficients, GueKernelPart, OscillatorBasis,
    MAX_GENERALIZED_ORDER,
};
use crate::{Error, Result, Side, C64};

use super::mixture_det::{self, imaginary_row_table, mixture_determinant, RowKind};
use super::{EngineOptions, Evaluation, Method};

/// GUE kernel for `exp(-tr H²/scale)`: `s^{-1/2} K(x_p/√s, x_q/√s)` with the
/// row's part and side.
pub fn closed_form_gue_kernel(levels: usize, scale: f64, xp: f64, xq: f64, row: RowKind) -> Result<C64> {
    let basis = OscillatorBasis::new(levels)?;
    let root = scale.sqrt();
    let (a, b) = (xp / root, xq / root);
    let value = match row {
        RowKind::ImaginaryPart => gue_kernel(basis, a, b, GueKernelPart::ImaginaryPart)?,
        RowKind::Side(Side::Plus) => gue_kernel(basis, a, b, GueKernelPart::Full)?,
        RowKind::Side(Side::Minus) => {
            // conjugate the generalized factor only; φ_n(x_q) is real
            gue_kernel(basis, a, b, GueKernelPart::Full)?.conj()
        }
    };
    Ok(value / root)
}

pub(crate) fn gue(spec: &EnsembleSpec, x: &[f64], rows: &[RowKind]) -> Result<Evaluation> {
    let scale = spec.gaussian_scale().ok_or_else(|| {
        Error::Contract("closed_form_gue needs a Gaussian ensemble (or a single-variance spread)".into())
    })?;
    let levels = spec.n();
    let m: Vec<Vec<C64>> = x
        .iter()
        .zip(rows)
        .map(|(&xp, &row)| {
            x.iter()
                .map(|&xq| closed_form_gue_kernel(levels, scale, xp, xq, row))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let value = det(&m);
    Ok(Evaluation {
        value,
        error: 1e-14 * (1.0 + value.norm()),
        evaluated_by: Method::ClosedFormGue,
        notes: Vec::new(),
    })
}

/// Row factors `A[a][n] = ⟨u^a (x - iLε - u)^{-n-1}⟩` from half-line Gaussian
/// moments `J_m`: with `H_a(z) = Σ_l h_l z^l`,
/// `A = i^{n+1}/n! · s^{a/2} (i/2)^a Σ_l h_l (√s/2)^l (2/√s)^{n+l+1} J_{n+l}(x/√s)`.
/// The lower side is the complex conjugate.
pub fn higher_trace_row_table(x: f64, side: Side, scale: f64, top: usize, levels: usize) -> Result<Vec<Vec<C64>>> {
    let highest = levels + top - 1;
    if highest > MAX_GENERALIZED_ORDER {
        return Err(Error::Config(format!(
            "generalized Hermite order {highest} exceeds the cap {MAX_GENERALIZED_ORDER}"
        )));
    }
    let root = scale.sqrt();
    let moments: Vec<C64> = (0..=highest)
        .map(|m| half_line_gaussian_moment(m, x / root))
        .collect::<Result<_>>()?;
    let table = (0..=top)
        .map(|a| {
            let h = hermite_coefficients(a);
            let pre = C64::new(0.0, 0.5).powu(a as u32) * root.powi(a as i32);
            (0..levels)
                .map(|n| {
                    let sum: C64 = h
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0.0)
                        .map(|(l, &c)| {
                            let m = n + l;
                            moments[m] * (c * (0.5 * root).powi(l as i32) * (2.0 / root).powi(m as i32 + 1))
                        })
                        .sum();
                    let value = i_pow(n as i64 + 1) / factorial(n) * pre * sum;
                    match side {
                        Side::Plus => value,
                        Side::Minus => value.conj(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(table)
}

pub(crate) fn higher_trace(spec: &EnsembleSpec, x: &[f64], rows: &[RowKind], opts: &EngineOptions) -> Result<Evaluation> {
    if !matches!(spec.family(), Family::HigherTrace { .. }) {
        return Err(Error::Contract(
            "closed_form_higher_trace needs a higher_trace ensemble".into(),
        ));
    }
    let mixture = spec.superspace_mixture(x.len())?;
    let levels = spec.n();
    let top = mixture.components().iter().map(|c| c.poly.max_exponent()).max().unwrap_or(0);
    if levels + top - 1 > MAX_GENERALIZED_ORDER {
        let mut eval = mixture_det::convolution(spec, x, rows, opts)?;
        eval.notes.push(format!(
            "generalized Hermite order {} exceeds the cap {MAX_GENERALIZED_ORDER}; fell back to convolution",
            levels + top - 1
        ));
        return Ok(eval);
    }
    let (value, magnitude) = mixture_determinant(&mixture, levels, x, rows, |xp, row, s, top| match row {
        RowKind::Side(side) => higher_trace_row_table(xp, side, s, top, levels),
        RowKind::ImaginaryPart => Ok(imaginary_row_table(xp, s, top, levels)),
    })?;
    Ok(Evaluation {
        value,
        // J_m segments are converged to 1e-12 relative
        error: 1e-12 * magnitude,
        evaluated_by: Method::ClosedFormHigherTrace,
        notes: Vec::new(),
    })
}
