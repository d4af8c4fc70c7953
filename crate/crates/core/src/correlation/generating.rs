//! The `k = 1` generating function from the superspace Fourier route:
//! the constant boundary term plus the Ingham–Siegel pairing of
//! `e^{-i r b} e^{f t} Φ(r, -t) / (r + i t)` with `b = x - J`, `f = x + J`.

use std::f64::consts::PI;

use crate::ensembles::EnsembleSpec;
use crate::jet::TaylorJet;
use crate::kernels::{HalfLineRule, InghamSiegelFunctional, KernelVariant};
use crate::{Error, MetricSignature, Result, Side, C64};

use super::{fourier_rule, EngineOptions};

/// `Z₁(x, J)` with the increment on `side`; returns the value and the change
/// under panel doubling.
pub fn generating_function_value(spec: &EnsembleSpec, x: f64, j: f64, side: Side) -> Result<(C64, f64)> {
    let levels = spec.n();
    let mixture = spec.superspace_mixture(1)?;
    if !(x.is_finite() && j.is_finite()) {
        return Err(Error::Config("generating function needs finite x and J".into()));
    }
    let (boson, fermion) = (x - j, x + j);
    let order = levels;
    let functional = InghamSiegelFunctional::new(
        levels,
        MetricSignature::uniform(1, side),
        KernelVariant::ArbitraryMetric,
    )?;
    let test = |r: f64| -> TaylorJet {
        let phi = mixture.characteristic_jet(&[r], order);
        // Φ(r, -t)
        let flipped = TaylorJet::from_coeffs(
            (0..=order)
                .map(|m| {
                    let c = phi.coeff(&[m]);
                    if m % 2 == 0 { c } else { -c }
                })
                .collect(),
        );
        let denom = TaylorJet::polynomial(&[C64::new(r, 0.0), C64::new(0.0, 1.0)], order);
        TaylorJet::exp_linear(C64::new(fermion, 0.0), order)
            .mul(&flipped)
            .mul(&denom.recip())
            .scale(C64::from_polar(1.0, -r * boson))
    };
    let rule: HalfLineRule = fourier_rule(mixture.min_scale(), mixture.max_degree() + 2 * levels, &EngineOptions::default());
    let (pairing, err) = functional.pair(&[test], rule)?;
    let front = C64::new(0.0, side.sign() / (2.0 * PI)) * (boson - fermion);
    Ok((C64::new(1.0, 0.0) + front * pairing, (front * err).norm()))
}
