//! Hermite polynomials, oscillator wave functions, the generalized Hermite
//! functions `Ĥ_n = H̃_n + i H_n` and the finite-N GUE kernel, all for the
//! weight `exp(-x²)`.

use std::f64::consts::PI;

use crate::linalg::{binomial, ln_factorial};
use crate::quad::gauss_legendre;
use crate::{Error, Result, C64};

/// Highest order of `Ĥ_n` evaluated in closed form.
pub const MAX_GENERALIZED_ORDER: usize = 64;

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite_poly(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficients of `H_n` in ascending powers.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    cur[0] = 1.0;
    for j in 0..n {
        let mut next = vec![0.0; n + 1];
        for l in 0..n {
            next[l + 1] += 2.0 * cur[l];
        }
        for l in 0..=n {
            next[l] -= 2.0 * j as f64 * prev[l];
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `φ_n(x) = (2ⁿ n! √π)^{-1/2} e^{-x²/2} H_n(x)`, evaluated by the
/// normalized recurrence so that large `n` does not overflow.
pub fn oscillator_wavefunction(n: usize, x: f64) -> f64 {
    oscillator_wavefunctions(n + 1, x)[n]
}

/// `φ_0(x), …, φ_{count-1}(x)`.
pub fn oscillator_wavefunctions(count: usize, x: f64) -> Vec<f64> {
    let gauss = (-0.5 * x * x).exp();
    let mut out = undamped_wavefunctions(count, x);
    out.iter_mut().for_each(|v| *v *= gauss);
    out
}

/// `e^{x²/2} φ_n(x)` for `n < count`.
fn undamped_wavefunctions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let (mut prev, mut cur) = (0.0, PI.powf(-0.25));
    for j in 0..count {
        out.push(cur);
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    out
}

/// `J_m(y) = ∫₀^∞ ξ^m exp(-ξ² - 2iyξ) dξ`, the half-line Gaussian moment
/// behind every generalized Hermite function.
///
/// For `y ≥ 0` the contour is moved onto the imaginary axis, leaving
/// `J_m(y) = (-i)^{m+1} ∫₀^y τ^m e^{τ²-2yτ} dτ + e^{-y²} Σ_j C(m,j) (-iy)^{m-j} Γ((j+1)/2)/2`.
/// The first integrand is positive and bounded, so no cancellation occurs.
/// Negative `y` follows from `J_m(-y) = conj J_m(y)`.
pub fn half_line_gaussian_moment(m: usize, y: f64) -> Result<C64> {
    if y < 0.0 {
        return half_line_gaussian_moment(m, -y).map(|v| v.conj());
    }
    let finite = finite_segment(m, y)?;
    let mut series = C64::default();
    let mut gamma_half = [PI.sqrt(), 1.0]; // Γ((j+1)/2) for j even / odd, advanced below
    for j in 0..=m {
        let g = if j % 2 == 0 { gamma_half[0] } else { gamma_half[1] };
        let power = C64::new(0.0, -y).powu((m - j) as u32);
        series += power * (binomial(m, j) * g * 0.5);
        // Γ((j+3)/2) = (j+1)/2 Γ((j+1)/2)
        if j % 2 == 0 {
            gamma_half[0] *= (j as f64 + 1.0) / 2.0;
        } else {
            gamma_half[1] *= (j as f64 + 1.0) / 2.0;
        }
    }
    Ok(crate::linalg::i_pow(-(m as i64) - 1) * finite + series * (-y * y).exp())
}

/// `∫₀^y τ^m e^{τ²-2yτ} dτ` by composite Gauss–Legendre, checked by panel doubling.
///
/// For large `y` the integrand lives within `~(m + 60)/y` of the origin, so
/// that head gets its own panels sized to the decay `e^{-2yτ}`.
fn finite_segment(m: usize, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let rule = gauss_legendre(24);
    let integrate = |lo: f64, hi: f64, panels: usize| -> f64 {
        let width = (hi - lo) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = lo + width * (p as f64 + 0.5);
            for &(x, w) in rule.iter() {
                let t = mid + 0.5 * width * x;
                acc += w * (m as f64 * t.ln() + t * t - 2.0 * y * t).exp();
            }
        }
        acc * 0.5 * width
    };
    let split = y.min((m as f64 + 60.0) / y);
    let head_panels = 4 + (y * split).ceil() as usize;
    let tail_panels = 4 + (2.0 * y * y + m as f64).sqrt().ceil() as usize;
    let total = |scale: usize| {
        let head = integrate(0.0, split, scale * head_panels);
        if split < y {
            head + integrate(split, y, scale * tail_panels)
        } else {
            head
        }
    };
    let coarse = total(1);
    let fine = total(2);
    if (fine - coarse).abs() > 1e-12 * fine.abs() + 1e-300 {
        return Err(Error::NonConvergence {
            context: format!("generalized Hermite segment m={m} y={y}"),
            coarse: C64::new(coarse, 0.0),
            fine: C64::new(fine, 0.0),
        });
    }
    Ok(fine)
}

/// `e^{-x²} Ĥ_n(x)`; the damped form stays bounded for large `|x|`.
pub fn generalized_hermite_damped(n: usize, x: f64) -> Result<C64> {
    check_order(n)?;
    let j = half_line_gaussian_moment(n, x)?;
    Ok(C64::new(0.0, 2.0).powu(n as u32 + 1) * j / PI.sqrt())
}

/// `Ĥ_n(x) = (2i)^{n+1} π^{-1/2} e^{x²} ∫₀^∞ exp(-ξ² - 2ixξ) ξⁿ dξ`.
pub fn generalized_hermite(n: usize, x: f64) -> Result<C64> {
    Ok(generalized_hermite_damped(n, x)? * (x * x).exp())
}

/// `φ̂_n(x) = (2ⁿ n! √π)^{-1/2} e^{-x²/2} Ĥ_n(x)`, with the normalization
/// applied in log space.
pub fn generalized_wavefunction(n: usize, x: f64) -> Result<C64> {
    let damped = generalized_hermite_damped(n, x)?;
    Ok(damped * (wavefunction_log_norm(n) + 0.5 * x * x).exp())
}

fn wavefunction_log_norm(n: usize) -> f64 {
    -0.5 * (n as f64 * 2f64.ln() + ln_factorial(n) + 0.5 * PI.ln())
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_GENERALIZED_ORDER {
        return Err(Error::Config(format!(
            "generalized Hermite order {n} exceeds the cap {MAX_GENERALIZED_ORDER}"
        )));
    }
    Ok(())
}

/// Oscillator basis of `N` levels for the weight `exp(-x²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OscillatorBasis {
    levels: usize,
}

impl OscillatorBasis {
    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("oscillator basis needs at least one level".into()));
        }
        if levels > MAX_GENERALIZED_ORDER {
            return Err(Error::Config(format!(
                "oscillator basis of {levels} levels exceeds the cap {MAX_GENERALIZED_ORDER}"
            )));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }
}

/// Which part of the GUE kernel to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GueKernelPart {
    /// `Σ φ̂_n(x_p) φ_n(x_q)`.
    Full,
    /// `Σ φ_n(x_p) φ_n(x_q)`.
    ImaginaryPart,
}

pub fn gue_kernel(basis: OscillatorBasis, xp: f64, xq: f64, part: GueKernelPart) -> Result<C64> {
    let n = basis.levels();
    match part {
        GueKernelPart::ImaginaryPart => {
            let right = oscillator_wavefunctions(n, xq);
            let left = oscillator_wavefunctions(n, xp);
            Ok(C64::new(left.iter().zip(&right).map(|(a, b)| a * b).sum(), 0.0))
        }
        GueKernelPart::Full => {
            // the Gaussians of both arguments are combined before exponentiating
            let right = undamped_wavefunctions(n, xq);
            let shift = 0.5 * (xp * xp - xq * xq);
            (0..n)
                .map(|j| {
                    let damped = generalized_hermite_damped(j, xp)?;
                    Ok(damped * (wavefunction_log_norm(j) + shift).exp() * right[j])
                })
                .sum()
        }
    }
}
