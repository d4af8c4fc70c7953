//! One-point correlations in the time domain.
//!
//! `r₁(t) = (2π)^{-1/2} ∫ R₁(x) e^{ixt} dx` and, for an increment on side
//! `L`, `r̂₁(t) = 2iL Θ(Lt) e^{-ε|t|} r₁(t)` is the transform of `R̂₁`.
//! Transforms of sampled data use the FFT; the slowly decaying resolvent
//! tail is removed analytically first.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::linalg::{binomial, factorial};
use crate::quad::composite_gl;
use crate::{Error, Result, Side, C64};

/// Fraction of the outermost bins that must be negligible after a transform.
const NYQUIST_BAND: f64 = 0.05;
/// Negligible relative to the peak.
const NYQUIST_LEVEL: f64 = 1e-6;

/// Samples `values[i]` at `start + i·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub values: Vec<C64>,
}

impl UniformGrid {
    pub fn sample<F: FnMut(f64) -> C64>(start: f64, step: f64, count: usize, mut f: F) -> Self {
        let values = (0..count).map(|i| f(start + step * i as f64)).collect();
        Self { start, step, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `f(x) ↦ (2π)^{-1/2} ∫ f(x) e^{ixt} dx`.
    ToTime,
    /// `g(t) ↦ (2π)^{-1/2} ∫ g(t) e^{-ixt} dt`.
    ToEnergy,
}

/// Discrete transform of a uniform grid of even length. The output has the
/// reciprocal step `2π/(M·step)` and starts at `out_start`; `None` centres
/// it on zero.
pub fn fourier(grid: &UniformGrid, direction: Direction, out_start: Option<f64>) -> Result<UniformGrid> {
    let m = grid.len();
    if m < 2 || m % 2 != 0 {
        return Err(Error::Config(format!("transform grid needs an even length ≥ 2, got {m}")));
    }
    let sigma = match direction {
        Direction::ToTime => 1.0,
        Direction::ToEnergy => -1.0,
    };
    let out_step = 2.0 * PI / (m as f64 * grid.step);
    let b = out_start.unwrap_or(-(m as f64 / 2.0) * out_step);
    let a = grid.start;
    let mut buf: Vec<C64> = grid
        .values
        .iter()
        .enumerate()
        .map(|(l, &f)| f * C64::from_polar(1.0, sigma * l as f64 * grid.step * b))
        .collect();
    let mut planner = FftPlanner::new();
    // rustfft's forward transform carries e^{-2πi lm/M}
    let fft = if sigma > 0.0 {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    fft.process(&mut buf);
    let norm = grid.step / (2.0 * PI).sqrt();
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(j, v)| v * C64::from_polar(norm, sigma * a * (b + j as f64 * out_step)))
        .collect();
    let out = UniformGrid {
        start: b,
        step: out_step,
        values,
    };
    check_nyquist(&out)?;
    Ok(out)
}

/// The outermost bins of a transform must be negligible; otherwise the
/// input grid does not resolve the fastest oscillation.
fn check_nyquist(out: &UniformGrid) -> Result<()> {
    let peak = out.max_norm();
    let band = ((out.len() as f64 * NYQUIST_BAND).ceil() as usize).max(1);
    let edge = out.values[..band]
        .iter()
        .chain(&out.values[out.len() - band..])
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if edge > NYQUIST_LEVEL * peak {
        return Err(Error::Config(format!(
            "grid step {} does not resolve the transform: edge bins reach {:.3e} of the peak",
            2.0 * PI / (out.len() as f64 * out.step),
            edge / peak
        )));
    }
    Ok(())
}

/// `r̂₁ = 2iL Θ(Lt) e^{-ε|t|} r₁` on the grid of `r1`.
pub fn resolvent_from_r1(r1: &UniformGrid, side: Side, epsilon: f64) -> UniformGrid {
    let l = side.sign();
    let values = r1
        .points()
        .zip(&r1.values)
        .map(|(t, &v)| {
            let theta = if l * t > 0.0 {
                1.0
            } else if t == 0.0 {
                0.5
            } else {
                0.0
            };
            C64::new(0.0, 2.0 * l * theta * (-epsilon * t.abs()).exp()) * v
        })
        .collect();
    UniformGrid {
        start: r1.start,
        step: r1.step,
        values,
    }
}

/// Transform of sampled `R̂₁` (increment on `side`) to `r̂₁(t)`.
///
/// The tail `Σ_j a_j / (π (x - iLγ)^{j+1})` with `j < tail_terms` is fitted to
/// the moments of `R₁ = L Im R̂₁`, subtracted, and added back through its
/// exact transform `L i √(2/π) (it)^j e^{-Lγt} Θ(Lt) / j!`.
pub fn resolvent_to_time(rhat: &UniformGrid, side: Side, tail_terms: usize) -> Result<UniformGrid> {
    let l = side.sign();
    let density: Vec<f64> = rhat.values.iter().map(|v| l * v.im).collect();
    let moment = |m: usize| -> f64 {
        let last = density.len() - 1;
        density
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                w * d * rhat.point(i).powi(m as i32)
            })
            .sum::<f64>()
            * rhat.step
    };
    let moments: Vec<f64> = (0..tail_terms).map(moment).collect();
    let gamma = if moments.len() > 2 && moments[0] > 0.0 {
        (moments[2] / moments[0]).sqrt().max(1.0)
    } else {
        1.0
    };
    let pole = C64::new(0.0, l * gamma);
    // μ_m = Σ_{j≤m} a_j C(m,j) (iLγ)^{m-j}
    let mut a: Vec<C64> = Vec::with_capacity(tail_terms);
    for m in 0..tail_terms {
        let lower: C64 = (0..m).map(|j| a[j] * binomial(m, j) * pole.powu((m - j) as u32)).sum();
        a.push(C64::new(moments[m], 0.0) - lower);
    }
    let tail = |x: f64| -> C64 {
        let inv = (C64::new(x, 0.0) - pole).inv();
        let mut p = inv;
        let mut s = C64::default();
        for aj in &a {
            s += aj * p;
            p *= inv;
        }
        s / PI
    };
    let residual = UniformGrid {
        start: rhat.start,
        step: rhat.step,
        values: rhat.points().zip(&rhat.values).map(|(x, &v)| v - tail(x)).collect(),
    };
    let mut out = fourier(&residual, Direction::ToTime, None)?;
    let front = (2.0 / PI).sqrt();
    for (i, slot) in out.values.iter_mut().enumerate() {
        let t = out.start + out.step * i as f64;
        let theta = if l * t > 0.0 {
            1.0
        } else if t == 0.0 {
            0.5
        } else {
            0.0
        };
        if theta == 0.0 {
            continue;
        }
        let decay = (-l * gamma * t).exp();
        let mut it_pow = C64::new(1.0, 0.0);
        for (j, aj) in a.iter().enumerate() {
            *slot += C64::new(0.0, l * front * theta * decay / factorial(j)) * it_pow * aj;
            it_pow *= C64::new(0.0, t);
        }
    }
    Ok(out)
}

/// `R̂₁(x)` on side `L` from an analytic `r₁` by quadrature of
/// `(2π)^{-1/2} ∫ r̂₁(t) e^{-ixt} dt` over `|t| ≤ cutoff`; returns the value and
/// the change under panel doubling.
pub fn synthesize_resolvent<F>(r1: F, x: f64, side: Side, cutoff: f64) -> (C64, f64)
where
    F: Fn(f64) -> C64,
{
    let l = side.sign();
    let (lo, hi) = if l > 0.0 { (0.0, cutoff) } else { (-cutoff, 0.0) };
    let integrand = |t: f64| r1(t) * C64::from_polar(1.0, -x * t);
    let panels = (4.0 * cutoff).ceil() as usize;
    let front = C64::new(0.0, 2.0 * l) / (2.0 * PI).sqrt();
    let coarse = composite_gl(lo, hi, panels, 16, integrand) * front;
    let fine = composite_gl(lo, hi, 2 * panels, 16, integrand) * front;
    (fine, (fine - coarse).norm())
}

/// Generalized Laguerre polynomial `L_n^{(α)}(y)`.
pub fn laguerre(n: usize, alpha: f64, y: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - y) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `r₁(t)` of `exp(-tr H²/s)`: `(2π)^{-1/2} e^{-st²/4} L_{N-1}^{(1)}(st²/2)`.
pub fn gaussian_r1(levels: usize, scale: f64, t: f64) -> f64 {
    let y = scale * t * t;
    (-0.25 * y).exp() * laguerre(levels - 1, 1.0, 0.5 * y) / (2.0 * PI).sqrt()
}
