//! The superspace counterpart of the Vandermonde determinant,
//! `B_k(r) = det[1/(r_{p1} - i r_{q2})]`.

use crate::linalg::{det, vandermonde};
use crate::{Error, Result, C64};

fn check(r1: &[f64], r2: &[f64]) -> Result<()> {
    if r1.len() != r2.len() || r1.is_empty() {
        return Err(Error::Config(format!(
            "Berezinian needs two nonempty argument lists of equal length, got {} and {}",
            r1.len(),
            r2.len()
        )));
    }
    Ok(())
}

/// Determinant form; the primary evaluation.
pub fn berezinian(r1: &[f64], r2: &[f64]) -> Result<C64> {
    check(r1, r2)?;
    let m = r1
        .iter()
        .map(|&a| {
            r2.iter()
                .map(|&b| {
                    let d = C64::new(a, -b);
                    if d.norm() == 0.0 {
                        Err(Error::Pole(format!("Berezinian entry r1={a}, r2={b}")))
                    } else {
                        Ok(d.inv())
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(det(&m))
}

/// Cauchy ratio form `(-1)^{k(k-1)/2} Δ(r₁) Δ(i r₂) / ∏_{p,q} (r_{p1} - i r_{q2})`.
pub fn berezinian_ratio(r1: &[f64], r2: &[f64]) -> Result<C64> {
    check(r1, r2)?;
    let k = r1.len();
    let a: Vec<C64> = r1.iter().map(|&x| C64::new(x, 0.0)).collect();
    let b: Vec<C64> = r2.iter().map(|&x| C64::new(0.0, x)).collect();
    let mut den = C64::new(1.0, 0.0);
    for &x in &a {
        for &y in &b {
            den *= x - y;
        }
    }
    if den.norm() == 0.0 {
        return Err(Error::Pole("Berezinian ratio denominator vanishes".into()));
    }
    let sign = if (k * (k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(vandermonde(&a) * vandermonde(&b) * sign / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_pair() {
        let v = berezinian(&[0.3], &[1.2]).unwrap();
        assert!((v - C64::new(0.3, -1.2).inv()).norm() < 1e-15);
    }

    #[test]
    fn coincident_entries_vanish() {
        let v = berezinian(&[0.5, 0.5], &[0.1, 0.9]).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=3 {
            for _ in 0..20 {
                let r1: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
                let r2: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
                let d = berezinian(&r1, &r2).unwrap();
                let r = berezinian_ratio(&r1, &r2).unwrap();
                // LU rounding is relative to the Hadamard bound, not to |det|
                let hadamard: f64 = r1
                    .iter()
                    .map(|&a| r2.iter().map(|&b| C64::new(a, -b).inv().norm_sqr()).sum::<f64>().sqrt())
                    .product();
                assert!((d - r).norm() < 1e-13 * hadamard, "k={k} {r1:?} {r2:?}: {d} vs {r}");
            }
        }
    }
}
