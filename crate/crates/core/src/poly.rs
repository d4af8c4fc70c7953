//! Sparse multivariate polynomials with real coefficients.

use std::collections::BTreeMap;

/// Exponent vector, one entry per variable.
pub type Exponents = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Exponents, f64>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn variable(vars: usize, index: usize) -> Self {
        let mut e = vec![0; vars];
        e[index] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, 1.0);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn add_term(&mut self, exps: Exponents, c: f64) {
        debug_assert_eq!(exps.len(), self.vars);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Largest exponent of any single variable.
    pub fn max_exponent(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0) as usize
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, v) in self.terms() {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "polynomial variable counts differ");
        let mut acc: BTreeMap<Exponents, f64> = BTreeMap::new();
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Self {
            vars: self.vars,
            terms: acc,
        }
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::constant(self.vars, 1.0), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, &v)| v.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Integrates out a set of variables monomial by monomial with the given
    /// moment function, keeping the listed variables in order.
    pub fn integrate_out<F>(&self, keep: &[usize], mut moment: F) -> Self
    where
        F: FnMut(&Exponents) -> f64,
    {
        let mut out = Self::zero(keep.len());
        for (e, c) in self.terms() {
            let m = moment(e);
            if m != 0.0 {
                out.add_term(keep.iter().map(|&j| e[j]).collect(), c * m);
            }
        }
        out
    }
}
