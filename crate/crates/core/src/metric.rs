//! Which side of the real axis an energy's imaginary increment sits on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Sign `L_p` of one bosonic metric entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `x - iε`, the retarded side.
    Plus,
    /// `x + iε`.
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    /// Branch of `L^{1/2}` used everywhere: `1` for `+1`, `+i` for `-1`.
    pub fn sqrt(self) -> C64 {
        match self {
            Side::Plus => C64::new(1.0, 0.0),
            Side::Minus => C64::new(0.0, 1.0),
        }
    }

    pub fn from_sign(s: i32) -> Result<Side> {
        match s {
            1 => Ok(Side::Plus),
            -1 => Ok(Side::Minus),
            other => Err(Error::Config(format!("metric entry must be ±1, got {other}"))),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Side::Plus => '+',
            Side::Minus => '-',
        }
    }
}

/// The bosonic part `(L_1, …, L_k)` of the metric; fermionic entries are all `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricSignature(Vec<Side>);

impl MetricSignature {
    pub fn new(sides: Vec<Side>) -> Self {
        Self(sides)
    }

    pub fn uniform(k: usize, side: Side) -> Self {
        Self(vec![side; k])
    }

    /// Parses strings such as `"+-"` or `"++"`.
    pub fn parse(text: &str) -> Result<Self> {
        text.trim()
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(Side::Plus),
                '-' => Ok(Side::Minus),
                other => Err(Error::Config(format!(
                    "metric must be a string of '+' and '-', found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn sides(&self) -> &[Side] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| s.flip()).collect())
    }

    /// All `2^k` signatures of length `k`, in lexicographic `+`-first order.
    pub fn all(k: usize) -> Vec<MetricSignature> {
        (0..1usize << k)
            .map(|bits| {
                Self(
                    (0..k)
                        .map(|p| if bits >> p & 1 == 0 { Side::Plus } else { Side::Minus })
                        .collect(),
                )
            })
            .collect()
    }

    pub fn product_sign(&self) -> f64 {
        self.0.iter().map(|s| s.sign()).product()
    }
}

impl std::fmt::Display for MetricSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.symbol()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let m = MetricSignature::parse("+-").unwrap();
        assert_eq!(m.sides(), &[Side::Plus, Side::Minus]);
        assert_eq!(m.to_string(), "+-");
        assert!(MetricSignature::parse("+x").is_err());
    }

    #[test]
    fn sqrt_branch_squares_to_sign() {
        for s in [Side::Plus, Side::Minus] {
            let r = s.sqrt();
            assert_eq!(r * r, C64::new(s.sign(), 0.0));
        }
    }

    #[test]
    fn all_signatures_enumerated() {
        let all = MetricSignature::all(2);
        assert_eq!(all.len(), 4);
        assert_eq!(all.iter().map(|m| m.product_sign()).sum::<f64>(), 0.0);
    }
}
