//! The ensemble-independent fundamental kernel and its determinants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::det;
use crate::{Error, Result, Side, C64};

/// Relative distance below which `(aᴺ - bᴺ)/(a - b)` is summed term by term.
const CONFLUENCE: f64 = 1e-3;

/// Real energy with an imaginary increment `x - iLε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementedPoint {
    value: f64,
    side: Side,
    epsilon: f64,
}

impl IncrementedPoint {
    pub fn new(value: f64, side: Side, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !value.is_finite() {
            return Err(Error::Config(format!(
                "increment must be finite with ε ≥ 0, got x={value}, ε={epsilon}"
            )));
        }
        Ok(Self {
            value,
            side,
            epsilon,
        })
    }

    /// Point on the real axis; the side only selects the branch of limits.
    pub fn on_axis(value: f64, side: Side) -> Self {
        Self {
            value,
            side,
            epsilon: 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `x - iLε` for the given side.
    pub fn complex_on(&self, side: Side) -> C64 {
        C64::new(self.value, -side.sign() * self.epsilon)
    }

    pub fn with_side(self, side: Side) -> Self {
        Self { side, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    /// Increment below the axis regardless of the point's side.
    Full,
    /// Singularities replaced by their imaginary parts.
    ImaginaryPart,
    /// Increment side taken from each point.
    ArbitraryMetric,
}

/// `(1/π) Σ_{n<N} bⁿ / a^{n+1}` in closed geometric form.
fn geometric_kernel(levels: usize, a: C64, b: C64) -> Result<C64> {
    if a.norm() == 0.0 {
        return Err(Error::Pole("fundamental kernel at s1 = 0".into()));
    }
    let n = levels as u32;
    let v = if (a - b).norm() <= CONFLUENCE * a.norm() {
        // removable singularity: (aᴺ - bᴺ)/(a - b) = Σ a^j b^{N-1-j}
        let ratio = b / a;
        let mut term = C64::new(1.0, 0.0);
        let mut sum = C64::default();
        for _ in 0..n {
            sum += term;
            term *= ratio;
        }
        sum / a
    } else {
        let ratio = b / a;
        (C64::new(1.0, 0.0) - ratio.powu(n)) / (a - b)
    };
    Ok(v / PI)
}

/// The series `(1/π) Σ_{n<N} (i s₂)ⁿ / a^{n+1}`; kept as a cross-check.
pub fn fundamental_kernel_series(levels: usize, a: C64, s2: f64) -> C64 {
    let b = C64::new(0.0, s2);
    let inv = a.inv();
    let mut term = inv;
    let mut sum = C64::default();
    for _ in 0..levels {
        sum += term;
        term *= b * inv;
    }
    sum / PI
}

/// `Ĉ(s₁, i s₂)` for `N` levels.
pub fn fundamental_kernel(
    levels: usize,
    s1: IncrementedPoint,
    s2: f64,
    variant: KernelVariant,
) -> Result<C64> {
    if levels == 0 {
        return Err(Error::Config("kernel needs N ≥ 1".into()));
    }
    let b = C64::new(0.0, s2);
    match variant {
        KernelVariant::Full => geometric_kernel(levels, s1.complex_on(Side::Plus), b),
        KernelVariant::ArbitraryMetric => geometric_kernel(levels, s1.complex_on(s1.side()), b),
        KernelVariant::ImaginaryPart => {
            let a = s1.complex_on(Side::Plus);
            if a.norm() == 0.0 {
                return Err(Error::Pole("imaginary-part kernel at s1 = 0".into()));
            }
            let inv = a.inv();
            let mut power = inv;
            let mut bn = C64::new(1.0, 0.0);
            let mut sum = C64::default();
            for _ in 0..levels {
                sum += bn * power.im;
                power *= inv;
                bn *= b;
            }
            Ok(sum / PI)
        }
    }
}

/// `det[Ĉ(s_{p1}, i s_{q2})]` over the given row points and column arguments.
pub fn fundamental_correlations(
    levels: usize,
    rows: &[IncrementedPoint],
    cols: &[f64],
    variant: KernelVariant,
) -> Result<C64> {
    if rows.len() != cols.len() || rows.is_empty() {
        return Err(Error::Config(format!(
            "fundamental correlations need k ≥ 1 rows and columns, got {} and {}",
            rows.len(),
            cols.len()
        )));
    }
    let m = rows
        .iter()
        .map(|&p| {
            cols.iter()
                .map(|&s| fundamental_kernel(levels, p, s, variant))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(det(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn s2_zero_keeps_leading_term() {
        let p = IncrementedPoint::new(0.7, Side::Plus, 1e-3).unwrap();
        for n in [1, 5, 12] {
            let v = fundamental_kernel(n, p, 0.0, KernelVariant::Full).unwrap();
            let want = 1.0 / (PI * p.complex_on(Side::Plus));
            assert!((v - want).norm() < 1e-14 * want.norm(), "{v} vs {want}");
        }
    }

    #[test]
    fn closed_form_matches_series_at_example() {
        let p = IncrementedPoint::new(0.7, Side::Plus, 1e-8).unwrap();
        let v = fundamental_kernel(12, p, -0.4, KernelVariant::Full).unwrap();
        let s = fundamental_kernel_series(12, p.complex_on(Side::Plus), -0.4);
        assert!((v - s).norm() < 1e-12 * s.norm());
    }

    #[test]
    fn confluent_point_gives_level_count() {
        // x - iε = i s₂ exactly
        let eps = 0.25;
        let p = IncrementedPoint::new(0.0, Side::Plus, eps).unwrap();
        let a = p.complex_on(Side::Plus);
        let v = fundamental_kernel(7, p, -eps, KernelVariant::Full).unwrap();
        assert!((v - 7.0 / (PI * a)).norm() < 1e-14);
        let s = fundamental_kernel_series(7, a, -eps);
        assert!((v - s).norm() < 1e-13);
    }

    #[test]
    fn origin_is_a_pole() {
        let p = IncrementedPoint::on_axis(0.0, Side::Plus);
        assert!(matches!(
            fundamental_kernel(3, p, 0.0, KernelVariant::Full),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn side_flip_conjugates_with_reflected_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: f64 = rng.random_range(-3.0..3.0);
            let s2: f64 = rng.random_range(-3.0..3.0);
            let n = rng.random_range(1..15);
            let p = IncrementedPoint::new(x, Side::Plus, 1e-2).unwrap();
            let plus = fundamental_kernel(n, p, s2, KernelVariant::ArbitraryMetric).unwrap();
            let minus = fundamental_kernel(
                n,
                p.with_side(Side::Minus),
                -s2,
                KernelVariant::ArbitraryMetric,
            )
            .unwrap();
            assert!((plus.conj() - minus).norm() < 1e-12 * plus.norm());
        }
    }

    #[test]
    fn imaginary_part_variant_matches_definition() {
        let p = IncrementedPoint::new(0.3, Side::Plus, 0.1).unwrap();
        let a = p.complex_on(Side::Plus);
        let v = fundamental_kernel(4, p, 0.8, KernelVariant::ImaginaryPart).unwrap();
        let want: C64 = (0..4)
            .map(|n| C64::new(0.0, 0.8).powu(n) * a.powu(n + 1).inv().im)
            .sum::<C64>()
            / PI;
        assert!((v - want).norm() < 1e-14 * want.norm(), "{v} vs {want}");
    }

    #[test]
    fn identical_rows_give_zero_determinant() {
        let p = IncrementedPoint::new(0.4, Side::Plus, 1e-6).unwrap();
        let v = fundamental_correlations(5, &[p, p], &[0.1, -0.7], KernelVariant::Full).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn two_point_determinant_matches_cofactors() {
        let p = IncrementedPoint::new(0.4, Side::Plus, 1e-6).unwrap();
        let q = IncrementedPoint::new(-1.2, Side::Plus, 1e-6).unwrap();
        let k = |a, b| fundamental_kernel(4, a, b, KernelVariant::Full).unwrap();
        let want = k(p, 0.3) * k(q, 1.1) - k(p, 1.1) * k(q, 0.3);
        let v = fundamental_correlations(4, &[p, q], &[0.3, 1.1], KernelVariant::Full).unwrap();
        assert!((v - want).norm() < 1e-14 * want.norm());
    }
}
