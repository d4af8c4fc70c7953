//! Truncated Taylor series around 0, used for the `r₂` derivative structure of
//! characteristic functions. Derivatives are never taken by finite differences.

use crate::linalg::factorial;
use crate::C64;

/// Univariate truncated series `Σ_{n ≤ order} c_n r^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    coeffs: Vec<C64>,
}

impl TaylorJet {
    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(vec![C64::default(); order + 1])
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = c;
        j
    }

    /// The identity series `r`.
    pub fn variable(order: usize) -> Self {
        let mut j = Self::zero(order);
        if order >= 1 {
            j.coeffs[1] = C64::new(1.0, 0.0);
        }
        j
    }

    /// `exp(α r)`.
    pub fn exp_linear(alpha: C64, order: usize) -> Self {
        let mut c = Vec::with_capacity(order + 1);
        let mut term = C64::new(1.0, 0.0);
        for n in 0..=order {
            c.push(term);
            term = term * alpha / (n + 1) as f64;
        }
        Self::from_coeffs(c)
    }

    /// `exp(-a r²)`.
    pub fn gaussian(a: f64, order: usize) -> Self {
        let mut j = Self::zero(order);
        let mut term = 1.0;
        let mut l = 0;
        while 2 * l <= order {
            j.coeffs[2 * l] = C64::new(term, 0.0);
            l += 1;
            term *= -a / l as f64;
        }
        j
    }

    /// Series of a polynomial given by ascending coefficients.
    pub fn polynomial(coeffs: &[C64], order: usize) -> Self {
        let mut j = Self::zero(order);
        for (n, &c) in coeffs.iter().enumerate().take(order + 1) {
            j.coeffs[n] = c;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `r^n`, zero beyond the order.
    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `n`-th derivative at 0.
    pub fn derivative_at_zero(&self, n: usize) -> C64 {
        self.coeff(n) * factorial(n)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, C64::default());
        Self::from_coeffs(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![C64::default(); order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            for (j, &b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::from_coeffs((0..=order).map(|n| self.coeffs[n] + other.coeffs[n]).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Series of `exp(self)`.
    pub fn exp(&self) -> Self {
        let order = self.order();
        let mut b = vec![C64::default(); order + 1];
        b[0] = self.coeffs[0].exp();
        for n in 1..=order {
            let mut s = C64::default();
            for j in 1..=n {
                s += self.coeffs[j] * b[n - j] * j as f64;
            }
            b[n] = s / n as f64;
        }
        Self::from_coeffs(b)
    }

    /// Series of `1/self`; the constant term must not vanish.
    pub fn recip(&self) -> Self {
        let order = self.order();
        let a0 = self.coeffs[0];
        assert!(a0.norm() > 0.0, "reciprocal of a jet with zero constant term");
        let mut b = vec![C64::default(); order + 1];
        b[0] = a0.inv();
        for n in 1..=order {
            let s: C64 = (1..=n).map(|j| self.coeffs[j] * b[n - j]).sum();
            b[n] = -s / a0;
        }
        Self::from_coeffs(b)
    }

    /// Series of the derivative; the order drops by one.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::from_coeffs(
            (1..=self.order())
                .map(|n| self.coeffs[n] * n as f64)
                .collect(),
        )
    }

    pub fn eval(&self, r: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::default(), |acc, &c| acc * r + c)
    }
}

/// Multivariate truncated series with a per-variable maximum order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiJet {
    orders: Vec<usize>,
    coeffs: Vec<C64>,
}

impl MultiJet {
    pub fn zero(orders: &[usize]) -> Self {
        let size = orders.iter().map(|o| o + 1).product();
        Self {
            orders: orders.to_vec(),
            coeffs: vec![C64::default(); size],
        }
    }

    /// Product of univariate jets in distinct variables.
    pub fn tensor(jets: &[TaylorJet]) -> Self {
        let orders: Vec<usize> = jets.iter().map(TaylorJet::order).collect();
        let mut out = Self::zero(&orders);
        for flat in 0..out.coeffs.len() {
            let idx = out.unflatten(flat);
            out.coeffs[flat] = jets
                .iter()
                .zip(&idx)
                .map(|(j, &n)| j.coeff(n))
                .product();
        }
        out
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn vars(&self) -> usize {
        self.orders.len()
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.orders)
            .fold(0, |acc, (&i, &o)| acc * (o + 1) + i)
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.orders.len()];
        for (slot, &o) in idx.iter_mut().zip(&self.orders).rev() {
            *slot = flat % (o + 1);
            flat /= o + 1;
        }
        idx
    }

    pub fn coeff(&self, idx: &[usize]) -> C64 {
        if idx.iter().zip(&self.orders).any(|(&i, &o)| i > o) {
            return C64::default();
        }
        self.coeffs[self.flatten(idx)]
    }

    pub fn add_scaled(&mut self, other: &Self, c: C64) {
        assert_eq!(self.orders, other.orders, "jet shapes differ");
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * c;
        }
    }

    /// Box-truncated product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.orders, other.orders, "jet shapes differ");
        let mut out = Self::zero(&self.orders);
        for fa in 0..self.coeffs.len() {
            let a = self.coeffs[fa];
            if a == C64::default() {
                continue;
            }
            let ia = self.unflatten(fa);
            for fb in 0..other.coeffs.len() {
                let ib = other.unflatten(fb);
                let sum: Vec<usize> = ia.iter().zip(&ib).map(|(x, y)| x + y).collect();
                if sum.iter().zip(&self.orders).all(|(&s, &o)| s <= o) {
                    let f = out.flatten(&sum);
                    out.coeffs[f] += a * other.coeffs[fb];
                }
            }
        }
        out
    }
}
