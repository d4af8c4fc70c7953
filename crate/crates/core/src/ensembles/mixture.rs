//! Reduced densities written as finite sums of polynomial × Gaussian terms,
//! `P^red(h) = Σ_c w_c p_c(h) ∏_j (π s_c)^{-1/2} exp(-h_j²/s_c)`.
//! Every implemented family has this form, which also gives the
//! characteristic function in closed form.

use std::f64::consts::PI;

use crate::jet::{MultiJet, TaylorJet};
use crate::linalg::{binomial, factorial, gaussian_moment};
use crate::poly::Poly;
use crate::special::hermite_poly;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    /// Variance parameter `s` of `exp(-h²/s)`.
    pub scale: f64,
    pub poly: Poly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    vars: usize,
    components: Vec<MixtureComponent>,
    /// Trailing variables whose polynomial is written in `w = i v`.
    rotated: usize,
}

impl GaussianMixture {
    pub fn new(vars: usize, components: Vec<MixtureComponent>) -> Self {
        debug_assert!(components.iter().all(|c| c.poly.vars() == vars));
        Self {
            vars,
            components,
            rotated: 0,
        }
    }

    /// Marks the last `count` variables as rotated: the polynomial factor is
    /// a function of `w = i v` while the Gaussian stays in `v`.
    pub fn with_rotated_tail(mut self, count: usize) -> Self {
        assert!(count <= self.vars);
        self.rotated = count;
        self
    }

    pub fn rotated(&self) -> usize {
        self.rotated
    }

    /// Whether variable `j` carries the rotated coordinate.
    pub fn is_rotated(&self, j: usize) -> bool {
        j >= self.vars - self.rotated
    }

    /// `i^m` for rotated variables, `1` otherwise.
    fn phase(&self, j: usize, m: usize) -> C64 {
        if self.is_rotated(j) {
            crate::linalg::i_pow(m as i64)
        } else {
            C64::new(1.0, 0.0)
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Smallest Gaussian scale; sets the decay of every integrand.
    pub fn min_scale(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.scale)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_degree(&self) -> usize {
        self.components.iter().map(|c| c.poly.degree()).max().unwrap_or(0)
    }

    /// A single Gaussian with constant polynomial factors out per variable.
    pub fn single_gaussian_scale(&self) -> Option<f64> {
        match self.components.as_slice() {
            [c] if c.poly.is_constant() => {
                let total: f64 = c.poly.terms().map(|(_, v)| v).sum();
                ((c.weight * total - 1.0).abs() < 1e-12).then_some(c.scale)
            }
            _ => None,
        }
    }

    /// Pointwise value; only meaningful without rotated variables.
    pub fn density(&self, h: &[f64]) -> f64 {
        assert_eq!(h.len(), self.vars);
        debug_assert_eq!(self.rotated, 0, "rotated mixtures have no real density");
        let sq: f64 = h.iter().map(|x| x * x).sum();
        self.components
            .iter()
            .map(|c| {
                let gauss = (PI * c.scale).powf(-0.5 * self.vars as f64) * (-sq / c.scale).exp();
                c.weight * c.poly.eval(h) * gauss
            })
            .sum()
    }

    /// `Φ(r) = ⟨exp(i Σ h_j r_j)⟩`.
    pub fn characteristic(&self, r: &[f64]) -> C64 {
        assert_eq!(r.len(), self.vars);
        self.components
            .iter()
            .map(|c| {
                let per_var: Vec<Vec<C64>> = r
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        (0..=c.poly.max_exponent())
                            .map(|m| gaussian_fourier_moment(m, x, c.scale) * self.phase(j, m))
                            .collect()
                    })
                    .collect();
                c.poly
                    .terms()
                    .map(|(e, coef)| {
                        e.iter()
                            .enumerate()
                            .map(|(j, &m)| per_var[j][m as usize])
                            .product::<C64>()
                            * coef
                    })
                    .sum::<C64>()
                    * c.weight
            })
            .sum()
    }

    /// `Φ` with the first `split` variables fixed at `fixed` and the rest
    /// expanded as a Taylor series to the given order around zero.
    pub fn characteristic_jet(&self, fixed: &[f64], order: usize) -> MultiJet {
        let split = fixed.len();
        let expanded = self.vars - split;
        let orders = vec![order; expanded];
        let mut total = MultiJet::zero(&orders);
        for c in &self.components {
            let top = c.poly.max_exponent();
            let fixed_moments: Vec<Vec<C64>> = fixed
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    (0..=top)
                        .map(|m| gaussian_fourier_moment(m, x, c.scale) * self.phase(j, m))
                        .collect()
                })
                .collect();
            let jets: Vec<TaylorJet> = (0..=top).map(|m| gaussian_fourier_jet(m, c.scale, order)).collect();
            for (e, coef) in c.poly.terms() {
                let front: C64 = (0..split).map(|j| fixed_moments[j][e[j] as usize]).product();
                let factors: Vec<TaylorJet> = (split..self.vars)
                    .map(|j| {
                        let m = e[j] as usize;
                        if self.is_rotated(j) {
                            jets[m].scale(self.phase(j, m))
                        } else {
                            jets[m].clone()
                        }
                    })
                    .collect();
                total.add_scaled(&MultiJet::tensor(&factors), front * coef * c.weight);
            }
        }
        total
    }
}

/// `⟨h^m e^{ihr}⟩` for the density `(πs)^{-1/2} e^{-h²/s}`:
/// `s^{m/2} (i/2)^m H_m(√s r/2) e^{-s r²/4}`.
pub fn gaussian_fourier_moment(m: usize, r: f64, scale: f64) -> C64 {
    let z = 0.5 * scale.sqrt() * r;
    C64::new(0.0, 0.5).powu(m as u32)
        * (scale.powf(0.5 * m as f64) * hermite_poly(m, z) * (-scale * r * r / 4.0).exp())
}

/// Taylor series of `r ↦ ⟨h^m e^{ihr}⟩` at zero: coefficients `i^j ⟨h^{m+j}⟩ / j!`.
pub fn gaussian_fourier_jet(m: usize, scale: f64, order: usize) -> TaylorJet {
    TaylorJet::from_coeffs(
        (0..=order)
            .map(|j| crate::linalg::i_pow(j as i64) * (gaussian_moment(m + j, scale) / factorial(j)))
            .collect(),
    )
}

/// `(Σ_j h_j²)^b` in `vars` variables.
pub fn square_norm_power(vars: usize, b: u32) -> Poly {
    let mut s = Poly::zero(vars);
    for j in 0..vars {
        let mut e = vec![0u8; vars];
        e[j] = 2;
        s.add_term(e, 1.0);
    }
    s.pow(b as usize)
}

/// `⟨v^b (x - iv)^n⟩` under `(πs)^{-1/2} e^{-v²/s}`, exact.
pub fn shifted_power_moment(b: usize, n: usize, x: f64, scale: f64) -> C64 {
    (0..=n)
        .map(|j| {
            C64::new(x, 0.0).powu((n - j) as u32)
                * crate::linalg::i_pow(-(j as i64))
                * (binomial(n, j) * gaussian_moment(b + j, scale))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_hermite;

    #[test]
    fn fourier_moment_matches_quadrature() {
        let rule = gauss_hermite(80);
        for &(m, r, s) in &[(0usize, 0.7, 1.0f64), (3, -1.2, 2.0), (5, 0.4, 0.5)] {
            let direct: C64 = rule
                .iter()
                .map(|&(y, w)| {
                    let h = s.sqrt() * y;
                    C64::from_polar(w * h.powi(m as i32) / PI.sqrt(), h * r)
                })
                .sum();
            let v = gaussian_fourier_moment(m, r, s);
            assert!((v - direct).norm() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn jet_matches_direct_evaluation() {
        let jet = gaussian_fourier_jet(2, 1.5, 30);
        for &r in &[0.3, -0.8] {
            let direct = gaussian_fourier_moment(2, r, 1.5);
            assert!((jet.eval(C64::new(r, 0.0)) - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn shifted_moment_matches_quadrature() {
        let rule = gauss_hermite(40);
        let (b, n, x, s) = (2usize, 5usize, 0.6, 1.3f64);
        let direct: C64 = rule
            .iter()
            .map(|&(y, w)| {
                let v = s.sqrt() * y;
                C64::new(x, -v).powu(n as u32) * (w * v.powi(b as i32) / PI.sqrt())
            })
            .sum();
        assert!((shifted_power_moment(b, n, x, s) - direct).norm() < 1e-11);
    }
}
