//! The supersymmetric Ingham–Siegel distribution acting on test data.
//!
//! In eigenvalue coordinates the distribution is
//! `c_{Nk} ∏_p Θ(L_p r_{p1}) (i r_{p1})^N e^{-ε|r_{p1}|} ∂^{N-1} δ(r_{p2})`.
//! The δ-derivatives are never discretized: each test supplies, for every
//! `r₁` node, a truncated Taylor series in `r₂`.

use std::f64::consts::PI;

use crate::jet::TaylorJet;
use crate::kernels::KernelVariant;
use crate::linalg::factorial;
use crate::quad::composite_gl_nodes;
use crate::{Error, MetricSignature, Result, Side, C64};

/// Panelled Gauss–Legendre rule for the `r₁` integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineRule {
    /// Integrals are truncated at `|r₁| ≤ cutoff`.
    pub cutoff: f64,
    pub panels: usize,
    pub order: usize,
}

impl Default for HalfLineRule {
    fn default() -> Self {
        Self {
            cutoff: 16.0,
            panels: 48,
            order: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InghamSiegelFunctional {
    levels: usize,
    metric: MetricSignature,
    variant: KernelVariant,
    epsilon: f64,
}

impl InghamSiegelFunctional {
    pub fn new(levels: usize, metric: MetricSignature, variant: KernelVariant) -> Result<Self> {
        if levels == 0 || metric.is_empty() {
            return Err(Error::Config("Ingham–Siegel functional needs N ≥ 1 and k ≥ 1".into()));
        }
        Ok(Self {
            levels,
            metric,
            variant,
            epsilon: 0.0,
        })
    }

    /// Keeps a finite damping `e^{-ε|r₁|}` instead of the limit.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn k(&self) -> usize {
        self.metric.len()
    }

    /// `c_{Nk}`; for the imaginary-part variant the whole-line constant.
    pub fn constant(&self) -> C64 {
        let n = self.levels;
        let k = self.k() as i32;
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let base = match self.variant {
            KernelVariant::ImaginaryPart => C64::new(PI * sign / factorial(n - 1), 0.0),
            _ => C64::new(0.0, 2.0 * PI * sign / factorial(n - 1)),
        };
        base.powi(k) * 2f64.powi(-k * (k - 1))
    }

    /// `r₁` support of point `p`: `Some(side)` for a half line, `None` for the whole line.
    fn support(&self, p: usize) -> Option<Side> {
        match self.variant {
            KernelVariant::Full => Some(Side::Plus),
            KernelVariant::ArbitraryMetric => Some(self.metric.sides()[p]),
            KernelVariant::ImaginaryPart => None,
        }
    }

    fn nodes(&self, p: usize, rule: HalfLineRule) -> Vec<(f64, f64)> {
        match self.support(p) {
            Some(Side::Plus) => composite_gl_nodes(0.0, rule.cutoff, rule.panels, rule.order),
            Some(Side::Minus) => composite_gl_nodes(-rule.cutoff, 0.0, rule.panels, rule.order),
            None => composite_gl_nodes(-rule.cutoff, rule.cutoff, 2 * rule.panels, rule.order),
        }
    }

    /// Pairs the distribution with a product test `∏_p T_p(r_{p1}, r_{p2})`,
    /// each `T_p` given as `r₁ ↦` Taylor series in `r₂`. Returns the value and
    /// the change under panel doubling.
    pub fn pair<F>(&self, tests: &[F], rule: HalfLineRule) -> Result<(C64, f64)>
    where
        F: Fn(f64) -> TaylorJet,
    {
        if tests.len() != self.k() {
            return Err(Error::Config(format!(
                "pairing needs {} tests, got {}",
                self.k(),
                tests.len()
            )));
        }
        let coarse = self.pair_with(tests, rule)?;
        let fine = self.pair_with(
            tests,
            HalfLineRule {
                panels: 2 * rule.panels,
                ..rule
            },
        )?;
        Ok((fine, (fine - coarse).norm()))
    }

    fn pair_with<F>(&self, tests: &[F], rule: HalfLineRule) -> Result<C64>
    where
        F: Fn(f64) -> TaylorJet,
    {
        let n = self.levels;
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let delta_weight = sign * factorial(n - 1);
        let mut total = self.constant();
        for (p, test) in tests.iter().enumerate() {
            let mut acc = C64::default();
            for (r, w) in self.nodes(p, rule) {
                let jet = test(r);
                if jet.order() + 1 < n {
                    return Err(Error::Contract(format!(
                        "test jet of order {} cannot carry {} r₂-derivatives",
                        jet.order(),
                        n - 1
                    )));
                }
                let weight = C64::new(0.0, r).powu(n as u32) * (-self.epsilon * r.abs()).exp();
                acc += weight * jet.coeff(n - 1) * w;
            }
            total *= acc * delta_weight;
        }
        Ok(total)
    }
}

/// The `k = 1` test function whose pairing reproduces the normalized
/// superspace Gaussian `∫ d[σ] exp(-¼ trg σ²) detg^{-N} σ⁻`:
/// `T(r, s) = -(2π)^{-1} e^{-r²} [-2g + (N/r) g/(r+is) - i ∂_s (g/(r+is))]`
/// with `g = e^{-s²}`. The bracket collects the flat Gaussian, the
/// Berezinian-measure factor and the boundary contribution.
pub fn gaussian_normalization_test(levels: usize) -> impl Fn(f64) -> TaylorJet {
    move |r: f64| {
        let order = levels;
        let g = TaylorJet::gaussian(1.0, order);
        let denom = TaylorJet::polynomial(&[C64::new(r, 0.0), C64::new(0.0, 1.0)], order);
        let h = g.mul(&denom.recip());
        let dh = h.differentiate();
        let low = levels - 1;
        let bracket = g
            .truncate(low)
            .scale(C64::new(-2.0, 0.0))
            .add(&h.truncate(low).scale(C64::new(levels as f64 / r, 0.0)))
            .add(&dh.scale(C64::new(0.0, -1.0)));
        bracket.scale(C64::new(-(-r * r).exp() / (2.0 * PI), 0.0))
    }
}

/// Pairing of [`gaussian_normalization_test`] with the `k = 1` functional.
pub fn gaussian_normalization_pairing(levels: usize) -> Result<(C64, f64)> {
    let f = InghamSiegelFunctional::new(
        levels,
        MetricSignature::uniform(1, Side::Plus),
        KernelVariant::Full,
    )?;
    f.pair(&[gaussian_normalization_test(levels)], HalfLineRule::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_test_has_no_high_derivative() {
        let f = InghamSiegelFunctional::new(3, MetricSignature::uniform(1, Side::Plus), KernelVariant::Full)
            .unwrap();
        let test = |r: f64| TaylorJet::constant(C64::new((-r * r).exp(), 0.0), 2);
        let (v, _) = f.pair(&[test], HalfLineRule::default()).unwrap();
        assert_eq!(v, C64::default());
    }

    #[test]
    fn short_jet_is_a_contract_violation() {
        let f = InghamSiegelFunctional::new(4, MetricSignature::uniform(1, Side::Plus), KernelVariant::Full)
            .unwrap();
        let test = |_: f64| TaylorJet::zero(2);
        assert!(matches!(
            f.pair(&[test], HalfLineRule::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn polynomial_gaussian_test_matches_analytic_value() {
        // N = 3, T(r, s) = e^{-r²} (1 + r s + s²): the second s-derivative is 2,
        // so the pairing is c · ∫₀^∞ (ir)³ e^{-r²} dr · (+1)·2!·1 with
        // ∫₀^∞ r³ e^{-r²} dr = 1/2.
        let n = 3;
        let f = InghamSiegelFunctional::new(n, MetricSignature::uniform(1, Side::Plus), KernelVariant::Full)
            .unwrap();
        let test = |r: f64| {
            let e = (-r * r).exp();
            TaylorJet::polynomial(
                &[C64::new(e, 0.0), C64::new(r * e, 0.0), C64::new(e, 0.0)],
                2,
            )
        };
        let (v, err) = f.pair(&[test], HalfLineRule::default()).unwrap();
        let want = f.constant() * C64::new(0.0, -1.0) * 0.5 * 2.0;
        assert!((v - want).norm() < 1e-12, "{v} vs {want}");
        assert!(err < 1e-12);
    }

    #[test]
    fn lower_side_integrates_negative_half_line() {
        let n = 1;
        let f = InghamSiegelFunctional::new(
            n,
            MetricSignature::uniform(1, Side::Minus),
            KernelVariant::ArbitraryMetric,
        )
        .unwrap();
        let test = |r: f64| TaylorJet::constant(C64::new((-r * r).exp(), 0.0), 0);
        // ∫_{-∞}^0 (ir) e^{-r²} dr = -i/2
        let (v, _) = f.pair(&[test], HalfLineRule::default()).unwrap();
        let want = f.constant() * C64::new(0.0, -0.5);
        assert!((v - want).norm() < 1e-12);
    }
}
