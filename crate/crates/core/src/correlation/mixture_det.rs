//! Convolution of the reduced density with the fundamental correlations.
//!
//! For one mixture component and one monomial `h^e` of its polynomial the
//! `2k`-fold integral factorizes into a `k × k` determinant
//! `M_pq = π⁻¹ Σ_n A_n^{(e_p)}(x_p) B_n^{(e_{k+q})}(x_q)` with
//! `A_n^{(a)} = ⟨u^a (x - iLε - u)^{-n-1}⟩` and `B_n^{(b)} = ⟨v^b (x - iv)^n⟩`.
//! `B` is a finite Gaussian moment; `A` is a contour-shifted Gauss–Hermite sum.

use std::f64::consts::{E, PI};

use crate::ensembles::{shifted_power_moment, EnsembleSpec, GaussianMixture};
use crate::linalg::{binomial, det, factorial, i_pow};
use crate::quad::gauss_hermite;
use crate::special::hermite_poly;
use crate::{Result, Side, C64};

use super::{check_convergence, EngineOptions, Evaluation, Method};

/// What one determinant row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Full resolvent with the increment on this side.
    Side(Side),
    /// Imaginary part only.
    ImaginaryPart,
}

/// `A[a][n] = ⟨u^a (x - iLε - u)^{-n-1}⟩` under `(πs)^{-1/2} e^{-u²/s}`,
/// with the contour moved to `u = √s (y + iL)`, away from the pole.
pub fn convolution_row_table(x: f64, side: Side, scale: f64, top: usize, levels: usize, nodes: usize) -> Vec<Vec<C64>> {
    let rule = gauss_hermite(nodes);
    let root = scale.sqrt();
    let shift = side.sign();
    let mut table = vec![vec![C64::default(); levels]; top + 1];
    for &(y, w) in rule.iter() {
        let u = C64::new(root * y, root * shift);
        let weight = C64::from_polar(w * E / PI.sqrt(), -2.0 * shift * y);
        let inv = (C64::new(x, 0.0) - u).inv();
        let mut ua = weight;
        for row in table.iter_mut() {
            let mut term = ua * inv;
            for slot in row.iter_mut() {
                *slot += term;
                term *= inv;
            }
            ua *= u;
        }
    }
    table
}

/// `⟨u^a Im (x - u - i0)^{-n-1}⟩ = π (-1)^n / n! · ∂_x^n [x^a g(x)]` with
/// `g` the Gaussian density of scale `s`; exact.
pub fn imaginary_row_table(x: f64, scale: f64, top: usize, levels: usize) -> Vec<Vec<C64>> {
    let root = scale.sqrt();
    let gauss = (PI * scale).powf(-0.5) * (-x * x / scale).exp();
    // g^{(j)}(x) = (-1)^j s^{-j/2} H_j(x/√s) g(x)
    let gd: Vec<f64> = (0..levels)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * root.powi(-(j as i32)) * hermite_poly(j, x / root) * gauss
        })
        .collect();
    (0..=top)
        .map(|a| {
            (0..levels)
                .map(|n| {
                    let deriv: f64 = (0..=n.min(a))
                        .map(|m| {
                            // m-th derivative of x^a
                            let falling = factorial(a) / factorial(a - m);
                            binomial(n, m) * falling * x.powi((a - m) as i32) * gd[n - m]
                        })
                        .sum();
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    C64::new(PI * sign / factorial(n) * deriv, 0.0)
                })
                .collect()
        })
        .collect()
}

/// `Σ_c w_c Σ_e coef_e det M^{(c,e)}`; also returns `Σ |w coef det|`.
pub(crate) fn mixture_determinant<F>(
    mixture: &GaussianMixture,
    levels: usize,
    x: &[f64],
    rows: &[RowKind],
    mut row_table: F,
) -> Result<(C64, f64)>
where
    F: FnMut(f64, RowKind, f64, usize) -> Result<Vec<Vec<C64>>>,
{
    let k = x.len();
    let mut total = C64::default();
    let mut magnitude = 0.0;
    for c in mixture.components() {
        let top = c.poly.max_exponent();
        let a: Vec<Vec<Vec<C64>>> = (0..k)
            .map(|p| row_table(x[p], rows[p], c.scale, top))
            .collect::<Result<_>>()?;
        let b: Vec<Vec<Vec<C64>>> = x
            .iter()
            .enumerate()
            .map(|(q, &xq)| {
                let rotated = mixture.is_rotated(k + q);
                (0..=top)
                    .map(|bb| {
                        // a rotated polynomial factor w^b stands for (iv)^b
                        let phase = if rotated { i_pow(bb as i64) } else { C64::new(1.0, 0.0) };
                        (0..levels)
                            .map(|n| shifted_power_moment(bb, n, xq, c.scale) * phase)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for (e, coef) in c.poly.terms() {
            let m: Vec<Vec<C64>> = (0..k)
                .map(|p| {
                    (0..k)
                        .map(|q| {
                            let ap = &a[p][e[p] as usize];
                            let bq = &b[q][e[k + q] as usize];
                            ap.iter().zip(bq).map(|(u, v)| u * v).sum::<C64>() / PI
                        })
                        .collect()
                })
                .collect();
            let term = det(&m) * (c.weight * coef);
            total += term;
            magnitude += term.norm();
        }
    }
    Ok((total, magnitude))
}

const MAX_NODE_DOUBLINGS: usize = 8;

pub(crate) fn convolution(spec: &EnsembleSpec, x: &[f64], rows: &[RowKind], opts: &EngineOptions) -> Result<Evaluation> {
    let mixture = spec.superspace_mixture(x.len())?;
    let levels = spec.n();
    let run = |nodes: usize| {
        mixture_determinant(&mixture, levels, x, rows, |xp, row, s, top| {
            Ok(match row {
                RowKind::Side(side) => convolution_row_table(xp, side, s, top, levels, nodes),
                RowKind::ImaginaryPart => imaginary_row_table(xp, s, top, levels),
            })
        })
    };
    // double the node count until two successive rules agree
    let mut nodes = opts.hermite_nodes;
    let (mut coarse, _) = run(nodes)?;
    let (fine, magnitude, error) = loop {
        let (fine, magnitude) = run(2 * nodes)?;
        match check_convergence("convolution Gauss–Hermite", coarse, fine, magnitude, opts.tolerance) {
            Ok(error) => break (fine, magnitude, error),
            Err(e) if nodes >= MAX_NODE_DOUBLINGS * opts.hermite_nodes => return Err(e),
            Err(_) => {
                coarse = fine;
                nodes *= 2;
            }
        }
    };
    Ok(Evaluation {
        value: fine,
        error: error + 1e-15 * magnitude,
        evaluated_by: Method::Convolution,
        notes: vec![format!(
            "gauss_hermite={}/{}",
            nodes,
            2 * nodes
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::composite_gl;

    #[test]
    fn row_table_matches_principal_value_quadrature() {
        // A_0 = PV⟨u^a/(x - u)⟩ + iπ x^a g(x); the PV integral uses subtraction of
        // the pole value, higher n follow from A_n = (-1)^n/n! ∂_x^n A_0
        let s = 1.3;
        let density = |u: f64| (-u * u / s).exp() / (PI * s).sqrt();
        let a0 = |a: usize, x: f64| -> C64 {
            let f = |u: f64| u.powi(a as i32) * density(u);
            let pv = composite_gl(x - 14.0, x + 14.0, 56, 16, |u| {
                let d = x - u;
                let v = if d.abs() < 1e-12 { 0.0 } else { (f(u) - f(x)) / d };
                C64::new(v, 0.0)
            });
            C64::new(pv.re, PI * f(x))
        };
        let h = 1e-2;
        for &x in &[0.4, -1.7] {
            let table = convolution_row_table(x, Side::Plus, s, 2, 3, 256);
            for a in 0..=2usize {
                let at = |k: f64| a0(a, x + k * h);
                let want = [
                    at(0.0),
                    -(at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h),
                    (-at(-2.0) + at(-1.0) * 16.0 - at(0.0) * 30.0 + at(1.0) * 16.0 - at(2.0)) / (24.0 * h * h),
                ];
                for (n, w) in want.iter().enumerate() {
                    assert!(
                        (w - table[a][n]).norm() < 1e-6 * (1.0 + w.norm()),
                        "x={x} a={a} n={n}: {w} vs {}",
                        table[a][n]
                    );
                }
            }
        }
    }

    #[test]
    fn imaginary_table_is_imaginary_part_of_both_sides() {
        let (x, s) = (-0.7, 1.6);
        let plus = convolution_row_table(x, Side::Plus, s, 3, 4, 160);
        let minus = convolution_row_table(x, Side::Minus, s, 3, 4, 160);
        let im = imaginary_row_table(x, s, 3, 4);
        for a in 0..=3 {
            for n in 0..4 {
                let want = (plus[a][n] - minus[a][n]) / C64::new(0.0, 2.0);
                assert!((want - im[a][n]).norm() < 1e-11, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn lower_side_is_conjugate() {
        let plus = convolution_row_table(1.1, Side::Plus, 0.8, 2, 3, 128);
        let minus = convolution_row_table(1.1, Side::Minus, 0.8, 2, 3, 128);
        for (rp, rm) in plus.iter().zip(&minus) {
            for (a, b) in rp.iter().zip(rm) {
                assert!((a.conj() - b).norm() < 1e-14);
            }
        }
    }
}
