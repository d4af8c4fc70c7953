//! Routes through the characteristic function: the general eigenvalue
//! integral and the factorized determinant for Gaussian `Φ`.
//!
//! Per point `p` the resolvent power is written as
//! `(x - iLε - h)^{-n-1} = L i^{n+1}/n! ∫ Θ(L r) r^n e^{-i(x-h) r} dr`,
//! which turns `⟨…⟩` over the reduced density into `Φ` at `r`. The
//! `B`-side polynomial `(x - iv)^n` becomes a Taylor coefficient of
//! `e^{x t} Φ(…, -t)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::ensembles::{EnsembleSpec, GaussianMixture};
use crate::jet::TaylorJet;
use crate::kernels::HalfLineRule;
use crate::linalg::{det, factorial, permutations};
use crate::quad::composite_gl_nodes;
use crate::{Error, Result, Side, C64};

use super::{check_convergence, fourier_rule, EngineOptions, Evaluation, Method, RowKind};

/// Largest `k` of the eigenvalue-integral route.
pub const MAX_EIGENVALUE_K: usize = 2;

/// Quadrature nodes of one row and the row's constant:
/// `L i/π` on the half line `Θ(L r)`, or `1/(2π)` on the whole line.
fn row_nodes(row: RowKind, rule: HalfLineRule) -> (Vec<(f64, f64)>, C64) {
    match row {
        RowKind::Side(Side::Plus) => (
            composite_gl_nodes(0.0, rule.cutoff, rule.panels, rule.order),
            C64::new(0.0, 1.0 / PI),
        ),
        RowKind::Side(Side::Minus) => (
            composite_gl_nodes(-rule.cutoff, 0.0, rule.panels, rule.order),
            C64::new(0.0, -1.0 / PI),
        ),
        RowKind::ImaginaryPart => (
            composite_gl_nodes(-rule.cutoff, rule.cutoff, 2 * rule.panels, rule.order),
            C64::new(0.5 / PI, 0.0),
        ),
    }
}

/// Per node: `c w (ir)^n e^{-ixr}` for `n < levels`.
fn row_weights(x: f64, row: RowKind, levels: usize, rule: HalfLineRule) -> (Vec<f64>, Vec<Vec<C64>>) {
    let (nodes, factor) = row_nodes(row, rule);
    let radii = nodes.iter().map(|&(r, _)| r).collect();
    let weights = nodes
        .iter()
        .map(|&(r, w)| {
            let mut term = factor * C64::from_polar(w, -x * r);
            let ir = C64::new(0.0, r);
            (0..levels)
                .map(|_| {
                    let out = term;
                    term *= ir;
                    out
                })
                .collect()
        })
        .collect();
    (radii, weights)
}

/// Multi-indices of the box `[0, levels)^k`, first index slowest.
fn box_indices(k: usize, levels: usize) -> Vec<Vec<usize>> {
    let count = levels.pow(k as u32);
    (0..count)
        .map(|mut flat| {
            let mut idx = vec![0; k];
            for slot in idx.iter_mut().rev() {
                *slot = flat % levels;
                flat /= levels;
            }
            idx
        })
        .collect()
}

fn eigenvalue_sum(mixture: &GaussianMixture, levels: usize, x: &[f64], rows: &[RowKind], rule: HalfLineRule) -> (C64, f64) {
    let k = x.len();
    let per_row: Vec<(Vec<f64>, Vec<Vec<C64>>)> =
        x.iter().zip(rows).map(|(&xp, &row)| row_weights(xp, row, levels, rule)).collect();
    let sizes: Vec<usize> = per_row.iter().map(|(r, _)| r.len()).collect();
    let total: usize = sizes.iter().product();
    let perms = permutations(k);
    let multi = box_indices(k, levels);
    // x_q^j / j!
    let exp_coeffs: Vec<Vec<f64>> = x
        .iter()
        .map(|&xq| (0..levels).map(|j| xq.powi(j as i32) / factorial(j)).collect())
        .collect();
    let order = levels - 1;

    (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut node = vec![0; k];
            let mut rest = flat;
            for (slot, &size) in node.iter_mut().zip(&sizes).rev() {
                *slot = rest % size;
                rest /= size;
            }
            let r: Vec<f64> = node.iter().zip(&per_row).map(|(&i, (radii, _))| radii[i]).collect();
            let jet = mixture.characteristic_jet(&r, order);
            let mut acc = C64::default();
            let mut idx = vec![0; k];
            for (omega, sign) in &perms {
                for n in &multi {
                    // coefficient of t^n in ∏_p e^{x_{ω(p)} t_p} Φ(r, r₂[ω(p)] = -t_p)
                    let mut coef = C64::default();
                    for m in &multi {
                        if m.iter().zip(n).any(|(a, b)| a > b) {
                            continue;
                        }
                        let mut front = 1.0;
                        let mut parity = 0;
                        for p in 0..k {
                            front *= exp_coeffs[omega[p]][n[p] - m[p]];
                            idx[omega[p]] = m[p];
                            parity += m[p];
                        }
                        if parity % 2 == 1 {
                            front = -front;
                        }
                        coef += jet.coeff(&idx) * front;
                    }
                    let weight: C64 = (0..k).map(|p| per_row[p].1[node[p]][n[p]]).product();
                    acc += weight * coef * *sign;
                }
            }
            (acc, acc.norm())
        })
        .reduce(|| (C64::default(), 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

pub(crate) fn eigenvalue_integral(spec: &EnsembleSpec, x: &[f64], rows: &[RowKind], opts: &EngineOptions) -> Result<Evaluation> {
    if x.len() > MAX_EIGENVALUE_K {
        return Err(Error::Config(format!(
            "eigenvalue_integral supports k ≤ {MAX_EIGENVALUE_K}, got k={}",
            x.len()
        )));
    }
    let mixture = spec.superspace_mixture(x.len())?;
    let levels = spec.n();
    let rule = fourier_rule(mixture.min_scale(), mixture.max_degree() + 2 * levels, opts);
    let (coarse, _) = eigenvalue_sum(&mixture, levels, x, rows, rule);
    let fine_rule = HalfLineRule {
        panels: 2 * rule.panels,
        ..rule
    };
    let (fine, magnitude) = eigenvalue_sum(&mixture, levels, x, rows, fine_rule);
    let error = check_convergence("eigenvalue integral", coarse, fine, magnitude, opts.tolerance)?;
    Ok(Evaluation {
        value: fine,
        error: error + 1e-14 * magnitude,
        evaluated_by: Method::EigenvalueIntegral,
        notes: vec![format!(
            "half_line cutoff={:.3} panels={}/{} order={}",
            rule.cutoff, rule.panels, fine_rule.panels, rule.order
        )],
    })
}

/// Kernel entry and the summed size of its quadrature terms.
fn factorized_kernel_with(levels: usize, scale: f64, xp: f64, xq: f64, row: RowKind, rule: HalfLineRule) -> (C64, f64) {
    let order = levels - 1;
    let column = TaylorJet::exp_linear(C64::new(xq, 0.0), order).mul(&TaylorJet::gaussian(0.25 * scale, order));
    let (radii, weights) = row_weights(xp, row, levels, rule);
    radii
        .iter()
        .zip(&weights)
        .fold((C64::default(), 0.0), |(acc, size), (&r, w)| {
            let damp = (-0.25 * scale * r * r).exp();
            let (v, a) = w
                .iter()
                .zip(column.coeffs())
                .fold((C64::default(), 0.0), |(v, a), (x, c)| (v + x * c, a + (x * c).norm()));
            (acc + v * damp, size + a * damp)
        })
}

/// Kernel of the factorized determinant for `Φ^{ev}(r) = e^{-s r²/4}`:
/// `Ĉ(x_p, x_q) = c_p Σ_n [t^n](e^{x_q t} Φ^{ev}(t)) ∫ (ir)^n e^{-i x_p r} Φ^{ev}(r) dr`
/// over the row's support.
pub fn factorized_kernel(levels: usize, scale: f64, xp: f64, xq: f64, row: RowKind) -> Result<C64> {
    if levels == 0 || !(scale > 0.0) {
        return Err(Error::Config("factorized kernel needs N ≥ 1 and a positive scale".into()));
    }
    let rule = fourier_rule(scale, 2 * levels, &EngineOptions::default());
    Ok(factorized_kernel_with(levels, scale, xp, xq, row, HalfLineRule {
        panels: 2 * rule.panels,
        ..rule
    })
    .0)
}

pub(crate) fn factorized(spec: &EnsembleSpec, x: &[f64], rows: &[RowKind], opts: &EngineOptions) -> Result<Evaluation> {
    let scale = spec.gaussian_scale().ok_or_else(|| {
        Error::Contract("factorized method needs a characteristic function that factorizes (Gaussian or single-variance spread)".into())
    })?;
    let levels = spec.n();
    let rule = fourier_rule(scale, 2 * levels, opts);
    // magnitude bounds every determinant term by the row sums of term sizes
    let build = |rule: HalfLineRule| -> (C64, f64) {
        let mut magnitude = 1.0;
        let m: Vec<Vec<C64>> = x
            .iter()
            .zip(rows)
            .map(|(&xp, &row)| {
                let entries: Vec<(C64, f64)> = x
                    .iter()
                    .map(|&xq| factorized_kernel_with(levels, scale, xp, xq, row, rule))
                    .collect();
                magnitude *= entries.iter().map(|e| e.1).sum::<f64>();
                entries.into_iter().map(|e| e.0).collect()
            })
            .collect();
        (det(&m), magnitude)
    };
    let (coarse, _) = build(rule);
    let fine_rule = HalfLineRule {
        panels: 2 * rule.panels,
        ..rule
    };
    let (fine, magnitude) = build(fine_rule);
    let error = check_convergence("factorized kernel", coarse, fine, magnitude, opts.tolerance)?;
    Ok(Evaluation {
        value: fine,
        error: error + 1e-14 * magnitude,
        evaluated_by: Method::Factorized,
        notes: vec![format!("half_line cutoff={:.3} panels={}", rule.cutoff, fine_rule.panels)],
    })
}
