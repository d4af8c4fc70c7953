//! Exact arithmetic in a finite exterior algebra with complex coefficients,
//! graded supermatrices over it, and the trace duality between the ordinary
//! `N×N` matrix `K = A L A†` and the `2k×2k` supermatrix `B = L^{1/2} A† A L^{1/2}`.
//!
//! Generator order is fixed: first all `ζ_{p,n}` (`p` outer, `n` inner), then
//! all `ζ*_{p,n}` in the same order. A monomial is the bitmask of its
//! generators taken in ascending order.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, MetricSignature, Result, Side, C64};

/// Default cap on the number of generators `G = 2kN`.
pub const DEFAULT_GENERATOR_BUDGET: u32 = 24;
/// Hard cap imposed by the 64-bit monomial masks.
pub const MAX_GENERATORS: u32 = 64;

/// Position of one generator in the global order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorIndex(u32);

impl GeneratorIndex {
    pub fn get(self) -> u32 {
        self.0
    }
}

/// Layout of the generators for `k` anticommuting vectors of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorLayout {
    pub k: usize,
    pub n: usize,
}

impl GeneratorLayout {
    pub fn count(self) -> u32 {
        (2 * self.k * self.n) as u32
    }

    pub fn zeta(self, p: usize, i: usize) -> GeneratorIndex {
        GeneratorIndex((p * self.n + i) as u32)
    }

    pub fn zeta_star(self, p: usize, i: usize) -> GeneratorIndex {
        GeneratorIndex((self.k * self.n + p * self.n + i) as u32)
    }
}

/// Sign of the product of two ascending monomials, or `None` if they share a generator.
fn merge_sign(a: u64, b: u64) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // generators of `a` above j must be moved past this one
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        swaps += above.count_ones();
    }
    Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
}

/// Element of the exterior algebra over `G` generators in canonical sparse form.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannElement {
    generators: u32,
    terms: BTreeMap<u64, C64>,
}

impl GrassmannElement {
    pub fn zero(generators: u32) -> Self {
        Self {
            generators,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(generators: u32, c: C64) -> Self {
        let mut e = Self::zero(generators);
        e.add_term(0, c);
        e
    }

    pub fn one(generators: u32) -> Self {
        Self::scalar(generators, C64::new(1.0, 0.0))
    }

    pub fn generator(generators: u32, g: GeneratorIndex) -> Result<Self> {
        if g.0 >= generators {
            return Err(Error::Config(format!(
                "generator {} outside a universe of {generators}",
                g.0
            )));
        }
        let mut e = Self::zero(generators);
        e.add_term(1u64 << g.0, C64::new(1.0, 0.0));
        Ok(e)
    }

    /// Builds an element from `(generator list, coefficient)` pairs; each list is
    /// read as an ordered product and reordered with its permutation sign.
    pub fn from_products(generators: u32, products: &[(&[GeneratorIndex], C64)]) -> Result<Self> {
        let mut e = Self::zero(generators);
        for (gens, c) in products {
            let mut term = Self::scalar(generators, *c);
            for &g in gens.iter() {
                term = term.mul(&Self::generator(generators, g)?)?;
            }
            e = &e + &term;
        }
        Ok(e)
    }

    pub fn generator_count(&self) -> u32 {
        self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, C64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, monomial: u64) -> C64 {
        self.terms.get(&monomial).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn add_term(&mut self, monomial: u64, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(monomial).or_default();
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(&monomial);
        }
    }

    fn check_universe(&self, other: &Self) -> Result<()> {
        if self.generators != other.generators {
            return Err(Error::Config(format!(
                "generator universes differ: {} vs {}",
                self.generators, other.generators
            )));
        }
        Ok(())
    }

    /// Product with Koszul signs.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.generators);
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if let Some(sign) = merge_sign(ma, mb) {
                    out.add_term(ma | mb, ca * cb * sign);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.generators);
        for (&m, &v) in &self.terms {
            out.add_term(m, v * c);
        }
        out
    }

    /// Algebra conjugation: antilinear, reverses the order of every monomial and
    /// swaps `ζ ↔ ζ*`. Applying it twice returns the input.
    pub fn conjugate(&self) -> Self {
        let half = self.generators / 2;
        let swap = |g: u32| if g < half { g + half } else { g - half };
        let mut out = Self::zero(self.generators);
        for (&m, &c) in &self.terms {
            // reversed product of swapped generators, then sorted
            let mut seq: Vec<u32> = (0..64).filter(|g| m >> g & 1 == 1).map(swap).collect();
            seq.reverse();
            let mut inversions = 0usize;
            for i in 0..seq.len() {
                for j in i + 1..seq.len() {
                    if seq[i] > seq[j] {
                        inversions += 1;
                    }
                }
            }
            let mask = seq.iter().fold(0u64, |acc, g| acc | 1u64 << g);
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(mask, c.conj() * sign);
        }
        out
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: Self) -> GrassmannElement {
        assert_eq!(self.generators, rhs.generators, "generator universes differ");
        let mut out = self.clone();
        for (&m, &c) in &rhs.terms {
            out.add_term(m, c);
        }
        out
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: Self) -> GrassmannElement {
        assert_eq!(self.generators, rhs.generators, "generator universes differ");
        let mut out = self.clone();
        for (&m, &c) in &rhs.terms {
            out.add_term(m, -c);
        }
        out
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Product `a·b` with Koszul signs.
pub fn ge_mul(a: &GrassmannElement, b: &GrassmannElement) -> Result<GrassmannElement> {
    a.mul(b)
}

/// Algebra conjugation.
pub fn ge_conjugate(a: &GrassmannElement) -> GrassmannElement {
    a.conjugate()
}

/// Square matrix with algebra-valued entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraMatrix {
    dim: usize,
    entries: Vec<GrassmannElement>,
}

impl AlgebraMatrix {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> GrassmannElement) -> Self {
        let entries = (0..dim * dim).map(|ij| f(ij / dim, ij % dim)).collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &GrassmannElement {
        &self.entries[i * self.dim + j]
    }

    fn generators(&self) -> u32 {
        self.entries[0].generators
    }

    pub fn mul(&self, other: &Self) -> Self {
        let g = self.generators();
        Self::from_fn(self.dim, |i, j| {
            (0..self.dim).fold(GrassmannElement::zero(g), |acc, l| {
                &acc + &self.get(i, l).mul_unchecked(other.get(l, j))
            })
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.dim, |i, j| -self.get(i, j))
    }

    pub fn zero(dim: usize, generators: u32) -> Self {
        Self::from_fn(dim, |_, _| GrassmannElement::zero(generators))
    }

    /// Entrywise conjugation combined with transposition.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conjugate())
    }

    pub fn trace(&self) -> GrassmannElement {
        (0..self.dim).fold(GrassmannElement::zero(self.generators()), |acc, i| {
            &acc + self.get(i, i)
        })
    }

    pub fn power(&self, m: u32) -> Self {
        assert!(m >= 1, "matrix power must be positive");
        (1..m).fold(self.clone(), |acc, _| acc.mul(self))
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_deviation(b))
            .fold(0.0, f64::max)
    }

    pub fn all_even(&self) -> bool {
        self.entries.iter().all(GrassmannElement::is_even)
    }
}

/// Supermatrix in boson–fermion block order: `[[c1, a12], [a21, c2]]` with
/// even diagonal blocks and odd off-diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrixAlg {
    pub c1: AlgebraMatrix,
    pub a12: AlgebraMatrix,
    pub a21: AlgebraMatrix,
    pub c2: AlgebraMatrix,
}

impl SuperMatrixAlg {
    pub fn k(&self) -> usize {
        self.c1.dim()
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            c1: self.c1.mul(&o.c1).add(&self.a12.mul(&o.a21)),
            a12: self.c1.mul(&o.a12).add(&self.a12.mul(&o.c2)),
            a21: self.a21.mul(&o.c1).add(&self.c2.mul(&o.a21)),
            c2: self.a21.mul(&o.a12).add(&self.c2.mul(&o.c2)),
        }
    }

    pub fn power(&self, m: u32) -> Self {
        assert!(m >= 1, "supermatrix power must be positive");
        (1..m).fold(self.clone(), |acc, _| acc.mul(self))
    }

    /// `trg = tr c1 − tr c2`.
    pub fn supertrace(&self) -> GrassmannElement {
        &self.c1.trace() - &self.c2.trace()
    }

    /// Graded adjoint: blockwise conjugate transpose with a sign on the odd blocks.
    pub fn super_dagger(&self) -> Self {
        Self {
            c1: self.c1.dagger(),
            a12: self.a21.dagger().neg(),
            a21: self.a12.dagger().neg(),
            c2: self.c2.dagger(),
        }
    }

    /// `L B L` with `L = diag(L_1..L_k, 1..1)`.
    pub fn metric_sandwich(&self, metric: &MetricSignature) -> Self {
        let l = |p: usize| C64::new(metric.sides()[p].sign(), 0.0);
        let k = self.k();
        Self {
            c1: AlgebraMatrix::from_fn(k, |p, q| self.c1.get(p, q).scale(l(p) * l(q))),
            a12: AlgebraMatrix::from_fn(k, |p, q| self.a12.get(p, q).scale(l(p))),
            a21: AlgebraMatrix::from_fn(k, |p, q| self.a21.get(p, q).scale(l(q))),
            c2: self.c2.clone(),
        }
    }

    pub fn max_deviation(&self, o: &Self) -> f64 {
        [
            self.c1.max_deviation(&o.c1),
            self.a12.max_deviation(&o.a12),
            self.a21.max_deviation(&o.a21),
            self.c2.max_deviation(&o.c2),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Builds `K = A L A†` and `B = L^{1/2} A† A L^{1/2}` for `A = [z_1…z_k ζ_1…ζ_k]`
/// with concrete commuting vectors `z_p` and symbolic anticommuting `ζ_p`.
pub fn build_dual_pair(
    zvals: &[Vec<C64>],
    metric: &MetricSignature,
    generator_budget: u32,
) -> Result<(AlgebraMatrix, SuperMatrixAlg)> {
    let k = zvals.len();
    if k == 0 {
        return Err(Error::Config("need at least one vector".into()));
    }
    let n = zvals[0].len();
    if n == 0 || zvals.iter().any(|z| z.len() != n) {
        return Err(Error::Config("all vectors must share a positive length N".into()));
    }
    if metric.len() != k {
        return Err(Error::Config(format!(
            "metric has {} entries for k = {k}",
            metric.len()
        )));
    }
    let layout = GeneratorLayout { k, n };
    let g = layout.count();
    if g > generator_budget.min(MAX_GENERATORS) {
        return Err(Error::Resource(format!(
            "2kN = {g} generators exceed the budget of {}",
            generator_budget.min(MAX_GENERATORS)
        )));
    }
    let zeta = |p, i| GrassmannElement::generator(g, layout.zeta(p, i)).expect("in range");
    let zstar = |p, i| GrassmannElement::generator(g, layout.zeta_star(p, i)).expect("in range");
    let sides = metric.sides();
    let scalar = |c: C64| GrassmannElement::scalar(g, c);

    let kmat = AlgebraMatrix::from_fn(n, |i, j| {
        let bosonic: C64 = (0..k)
            .map(|p| zvals[p][i] * zvals[p][j].conj() * sides[p].sign())
            .sum();
        (0..k).fold(scalar(bosonic), |acc, p| {
            &acc - &zeta(p, i).mul_unchecked(&zstar(p, j))
        })
    });

    let c1 = AlgebraMatrix::from_fn(k, |p, q| {
        let dot: C64 = (0..n).map(|i| zvals[p][i].conj() * zvals[q][i]).sum();
        scalar(sides[p].sqrt() * dot * sides[q].sqrt())
    });
    let a12 = AlgebraMatrix::from_fn(k, |p, q| {
        (0..n).fold(GrassmannElement::zero(g), |acc, i| {
            &acc + &zeta(q, i).scale(sides[p].sqrt() * zvals[p][i].conj())
        })
    });
    let a21 = AlgebraMatrix::from_fn(k, |p, q| {
        (0..n).fold(GrassmannElement::zero(g), |acc, i| {
            &acc - &zstar(p, i).scale(zvals[q][i] * sides[q].sqrt())
        })
    });
    let c2 = AlgebraMatrix::from_fn(k, |p, q| {
        (0..n).fold(GrassmannElement::zero(g), |acc, i| {
            &acc - &zstar(p, i).mul_unchecked(&zeta(q, i))
        })
    });
    Ok((kmat, SuperMatrixAlg { c1, a12, a21, c2 }))
}

/// Ordinary trace of `K^m`.
pub fn tr_power(k: &AlgebraMatrix, m: u32) -> GrassmannElement {
    k.power(m).trace()
}

/// Supertrace of `B^m`.
pub fn strg_power(b: &SuperMatrixAlg, m: u32) -> GrassmannElement {
    b.power(m).supertrace()
}

/// Outcome of a duality check: the largest coefficient of
/// `tr K^m − trg B^m` for each `m = 1..=m_max`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DualityReport {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub metric: String,
    pub deviations: Vec<f64>,
}

impl DualityReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

/// Standard complex normal vectors (`E|z|² = 1`) and a random metric drawn from `seed`.
pub fn random_dual_input(k: usize, n: usize, seed: u64) -> (Vec<Vec<C64>>, MetricSignature) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 {
        let v: f64 = StandardNormal.sample(&mut rng);
        std::f64::consts::FRAC_1_SQRT_2 * v
    };
    let z = (0..k)
        .map(|_| (0..n).map(|_| C64::new(normal(), normal())).collect())
        .collect();
    let metric = MetricSignature::new(
        (0..k)
            .map(|_| if normal() >= 0.0 { Side::Plus } else { Side::Minus })
            .collect(),
    );
    (z, metric)
}

/// Compares `tr K^m` with `trg B^m` for a random dual pair.
pub fn verify_duality(k: usize, n: usize, m_max: u32, seed: u64) -> Result<DualityReport> {
    verify_duality_with_budget(k, n, m_max, seed, DEFAULT_GENERATOR_BUDGET)
}

pub fn verify_duality_with_budget(
    k: usize,
    n: usize,
    m_max: u32,
    seed: u64,
    budget: u32,
) -> Result<DualityReport> {
    let (z, metric) = random_dual_input(k, n, seed);
    let (kmat, bmat) = build_dual_pair(&z, &metric, budget)?;
    let mut kp = kmat.clone();
    let mut bp = bmat.clone();
    let mut deviations = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        if m > 1 {
            kp = kp.mul(&kmat);
            bp = bp.mul(&bmat);
        }
        deviations.push(kp.trace().max_deviation(&bp.supertrace()));
    }
    Ok(DualityReport {
        k,
        n,
        seed,
        metric: metric.to_string(),
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: u32 = 6;

    fn gen(i: u32) -> GrassmannElement {
        GrassmannElement::generator(G, GeneratorIndex(i)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn generators_anticommute() {
        let ab = gen(1).mul(&gen(2)).unwrap();
        let ba = gen(2).mul(&gen(1)).unwrap();
        assert_eq!(ab, -&ba);
        assert_eq!(ab.coefficient(0b110), c(1.0, 0.0));
    }

    #[test]
    fn generators_square_to_zero() {
        assert!(gen(3).mul(&gen(3)).unwrap().is_zero());
    }

    #[test]
    fn nilquadratic_pair_product() {
        let one = GrassmannElement::one(G);
        let pair = gen(0).mul(&gen(1)).unwrap();
        let x = &one + &pair;
        let sq = x.mul(&x).unwrap();
        let expected = &one + &pair.scale(c(2.0, 0.0));
        assert_eq!(sq, expected);
    }

    #[test]
    fn mismatched_universes_rejected() {
        let a = GrassmannElement::one(4);
        let b = GrassmannElement::one(6);
        assert!(matches!(a.mul(&b), Err(Error::Config(_))));
    }

    #[test]
    fn conjugate_of_scalar_is_complex_conjugate() {
        let a = GrassmannElement::scalar(G, c(1.5, -2.0));
        assert_eq!(a.conjugate(), GrassmannElement::scalar(G, c(1.5, 2.0)));
    }

    #[test]
    fn conjugate_reverses_order() {
        // universe of 6 generators: ζ0..ζ2 then ζ*0..ζ*2
        let prod = gen(0).mul(&gen(1)).unwrap();
        let expected = gen(4).mul(&gen(3)).unwrap();
        assert_eq!(prod.conjugate(), expected);
        assert_eq!(expected, -&gen(3).mul(&gen(4)).unwrap());
    }

    #[test]
    fn conjugate_is_antilinear_involution() {
        let a = gen(0).scale(c(0.3, 0.7));
        assert_eq!(a.conjugate().conjugate(), a);
        assert_eq!(a.conjugate(), gen(3).scale(c(0.3, -0.7)));
    }

    #[test]
    fn scalar_dual_pair_example() {
        let z = vec![vec![c(1.0, 0.0)]];
        let metric = MetricSignature::uniform(1, Side::Plus);
        let (k, b) = build_dual_pair(&z, &metric, 24).unwrap();
        let layout = GeneratorLayout { k: 1, n: 1 };
        let zeta = GrassmannElement::generator(2, layout.zeta(0, 0)).unwrap();
        let zstar = GrassmannElement::generator(2, layout.zeta_star(0, 0)).unwrap();
        let one = GrassmannElement::one(2);
        assert_eq!(*k.get(0, 0), &one - &zeta.mul(&zstar).unwrap());
        assert_eq!(*b.c1.get(0, 0), one);
        assert_eq!(*b.c2.get(0, 0), -&zstar.mul(&zeta).unwrap());
    }

    #[test]
    fn vanishing_commuting_sector() {
        let z = vec![vec![C64::default(); 2]; 2];
        let metric = MetricSignature::uniform(2, Side::Plus);
        let (k, b) = build_dual_pair(&z, &metric, 24).unwrap();
        assert!(b.c1.get(0, 1).is_zero() && b.c1.get(0, 0).is_zero());
        assert!(k.get(0, 0).terms().all(|(m, _)| m.count_ones() == 2));
    }

    #[test]
    fn budget_enforced() {
        let z = vec![vec![c(1.0, 0.0); 7]; 2];
        let metric = MetricSignature::uniform(2, Side::Plus);
        assert!(matches!(
            build_dual_pair(&z, &metric, 24),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn first_trace_matches_supertrace() {
        let (z, metric) = random_dual_input(2, 2, 11);
        let (k, b) = build_dual_pair(&z, &metric, 24).unwrap();
        assert!(tr_power(&k, 1).max_deviation(&strg_power(&b, 1)) < 1e-12);
        // and both equal Σ L_p z_p†z_p + Σ ζ_p†ζ_p
        let layout = GeneratorLayout { k: 2, n: 2 };
        let g = layout.count();
        let mut expected = GrassmannElement::zero(g);
        for p in 0..2 {
            let norm: f64 = z[p].iter().map(|v| v.norm_sqr()).sum();
            expected = &expected
                + &GrassmannElement::scalar(g, c(norm * metric.sides()[p].sign(), 0.0));
            for i in 0..2 {
                let zs = GrassmannElement::generator(g, layout.zeta_star(p, i)).unwrap();
                let ze = GrassmannElement::generator(g, layout.zeta(p, i)).unwrap();
                expected = &expected + &zs.mul(&ze).unwrap();
            }
        }
        assert!(tr_power(&k, 1).max_deviation(&expected) < 1e-12);
    }

    #[test]
    fn rank_one_bosonic_square() {
        let z = vec![vec![c(0.4, 0.3), c(-1.1, 0.2)]];
        let metric = MetricSignature::uniform(1, Side::Plus);
        let (k, _) = build_dual_pair(&z, &metric, 24).unwrap();
        let norm: f64 = z[0].iter().map(|v| v.norm_sqr()).sum();
        let t2 = tr_power(&k, 2);
        assert!((t2.coefficient(0) - c(norm * norm, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn block_diagonal_supertrace() {
        let (z, metric) = random_dual_input(1, 2, 5);
        let (_, b) = build_dual_pair(&z, &metric, 24).unwrap();
        let g = b.c1.get(0, 0).generator_count();
        let diag = SuperMatrixAlg {
            c1: b.c1.clone(),
            a12: AlgebraMatrix::zero(1, g),
            a21: AlgebraMatrix::zero(1, g),
            c2: b.c2.clone(),
        };
        let lhs = strg_power(&diag, 3);
        let rhs = &b.c1.power(3).trace() - &b.c2.power(3).trace();
        assert!(lhs.max_deviation(&rhs) < 1e-12);
    }

    #[test]
    fn duality_small_cases() {
        for (k, n) in [(1, 2), (2, 3)] {
            let report = verify_duality(k, n, 4, 3).unwrap();
            assert!(report.max_deviation() < 1e-10, "{report:?}");
        }
    }

    #[test]
    fn zero_vector_duality_is_exact() {
        let z = vec![vec![C64::default()]];
        let metric = MetricSignature::uniform(1, Side::Plus);
        let (k, b) = build_dual_pair(&z, &metric, 24).unwrap();
        assert_eq!(tr_power(&k, 2).max_deviation(&strg_power(&b, 2)), 0.0);
    }

    #[test]
    fn hermiticity_of_dual_pair() {
        for seed in 0..5 {
            let (z, metric) = random_dual_input(2, 2, seed);
            let (k, b) = build_dual_pair(&z, &metric, 24).unwrap();
            assert!(k.all_even());
            assert!(k.dagger().max_deviation(&k) < 1e-12);
            assert!(b.super_dagger().max_deviation(&b.metric_sandwich(&metric)) < 1e-12);
        }
    }

    fn arb_element() -> impl Strategy<Value = GrassmannElement> {
        prop::collection::vec((0u64..64, -2.0f64..2.0, -2.0f64..2.0), 0..6).prop_map(|terms| {
            let mut e = GrassmannElement::zero(G);
            for (m, re, im) in terms {
                e.add_term(m, C64::new(re, im));
            }
            e
        })
    }

    proptest! {
        #[test]
        fn conjugation_is_involution(a in arb_element()) {
            prop_assert!(a.conjugate().conjugate().max_deviation(&a) == 0.0);
        }

        #[test]
        fn product_is_associative(a in arb_element(), b in arb_element(), c in arb_element()) {
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(left.max_deviation(&right) < 1e-12);
        }

        #[test]
        fn conjugation_reverses_products(a in arb_element(), b in arb_element()) {
            let lhs = a.mul(&b).unwrap().conjugate();
            let rhs = b.conjugate().mul(&a.conjugate()).unwrap();
            prop_assert!(lhs.max_deviation(&rhs) < 1e-12);
        }

        #[test]
        fn random_dual_pairs_satisfy_duality(seed in 0u64..1000, k in 1usize..=2, n in 1usize..=2) {
            let report = verify_duality(k, n, 3, seed).unwrap();
            prop_assert!(report.max_deviation() < 1e-10);
        }
    }
}
