//! Gaussian expectation of `(tr H^{M1})^{M2}` over every matrix entry except
//! a set of kept diagonal entries, under `exp(-tr H²)`.
//!
//! Entries are treated as independent variables: diagonal ones with
//! `⟨H_ii²⟩ = ½`, off-diagonal pairs `u = H_ij`, `v = H_ji` with
//! `⟨u^a v^b⟩ = δ_ab a! 2^{-a}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::linalg::{factorial, gaussian_moment};
use crate::poly::{Exponents, Poly};
use crate::special::hermite_coefficients;
use crate::{Error, Result};

/// Largest `M1·M2` expanded exactly.
pub const WICK_CAP: u32 = 8;

/// `tr H^{M1}` as a polynomial in the `N²` entries, variable `i·N + j` for `H_ij`.
fn trace_power(n: usize, m1: u32) -> Poly {
    let vars = n * n;
    let mut out = Poly::zero(vars);
    if m1 == 0 {
        return Poly::constant(vars, n as f64);
    }
    let mut exps: Exponents = vec![0; vars];
    let mut path = vec![0usize; m1 as usize];
    fn walk(
        depth: usize,
        n: usize,
        path: &mut [usize],
        exps: &mut Exponents,
        out: &mut Poly,
    ) {
        let len = path.len();
        if depth == len {
            // close the loop back to the first index
            let var = path[len - 1] * n + path[0];
            exps[var] += 1;
            out.add_term(exps.clone(), 1.0);
            exps[var] -= 1;
            return;
        }
        for i in 0..n {
            path[depth] = i;
            if depth > 0 {
                let var = path[depth - 1] * n + i;
                exps[var] += 1;
                walk(depth + 1, n, path, exps, out);
                exps[var] -= 1;
            } else {
                walk(depth + 1, n, path, exps, out);
            }
        }
    }
    walk(0, n, &mut path, &mut exps, &mut out);
    out
}

/// Expectation of one monomial over the non-kept entries.
fn monomial_moment(n: usize, kept: usize, e: &Exponents) -> f64 {
    let mut m = 1.0;
    for i in kept..n {
        m *= gaussian_moment(e[i * n + i] as usize, 1.0);
        if m == 0.0 {
            return 0.0;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (e[i * n + j], e[j * n + i]);
            if a != b {
                return 0.0;
            }
            m *= factorial(a as usize) * 0.5f64.powi(a as i32);
        }
    }
    m
}

type CacheKey = (usize, u32, u32, usize);

/// `E[(tr H^{M1})^{M2} | H_00, …, H_{kept-1,kept-1}]` as a polynomial in the
/// kept diagonal entries.
pub fn conditional_weight(n: usize, m1: u32, m2: u32, kept: usize) -> Result<Arc<Poly>> {
    if m1 * m2 > WICK_CAP {
        return Err(Error::Resource(format!(
            "exact expansion of (tr H^{m1})^{m2} exceeds M1·M2 ≤ {WICK_CAP}"
        )));
    }
    if kept > n {
        return Err(Error::Config(format!("cannot keep {kept} of {n} diagonal entries")));
    }
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Poly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, m1, m2, kept);
    if let Some(p) = cache.lock().expect("expansion cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let full = trace_power(n, m1).pow(m2 as usize);
    let keep: Vec<usize> = (0..kept).map(|i| i * n + i).collect();
    let reduced = Arc::new(full.integrate_out(&keep, |e| monomial_moment(n, kept, e)));
    cache
        .lock()
        .expect("expansion cache poisoned")
        .insert(key, reduced.clone());
    Ok(reduced)
}

/// `⟨(tr H^{M1})^{M2}⟩` under the normalized `exp(-tr H²)`.
pub fn full_expectation(n: usize, m1: u32, m2: u32) -> Result<f64> {
    Ok(conditional_weight(n, m1, m2, 0)?.eval(&[]))
}

/// `E_G[(tr (G + C)^{M1})^{M2}]` for `G` drawn from `exp(-tr G²)` and a
/// diagonal `C`, as coefficients of products of power sums `tr C^j`. Keys
/// list the powers in ascending order.
fn trace_power_sums(n: usize, m1: u32, m2: u32) -> BTreeMap<Vec<u32>, f64> {
    let len = (m1 * m2) as usize;
    let m1 = m1 as usize;
    // letter l sits in word l / m1 and is followed by `next(l)` inside it
    let next = |l: usize| (l / m1) * m1 + (l % m1 + 1) % m1;
    let mut out = BTreeMap::new();
    for mask in 0u32..(1 << len) {
        let g: Vec<usize> = (0..len).filter(|&l| mask & (1 << l) != 0).collect();
        if g.len() % 2 == 1 {
            continue;
        }
        let mut pairs = Vec::with_capacity(g.len() / 2);
        for_each_matching(&g, &mut pairs, &mut |pairs| {
            // index slots i_l; G_{ab}G_{cd} ties a=d, b=c; C_{ab} ties a=b
            let mut classes = UnionFind::new(len);
            for &(a, b) in pairs.iter() {
                classes.union(a, next(b));
                classes.union(next(a), b);
            }
            for l in (0..len).filter(|&l| mask & (1 << l) == 0) {
                classes.union(l, next(l));
            }
            let mut c_count = vec![0u32; len];
            for l in (0..len).filter(|&l| mask & (1 << l) == 0) {
                c_count[classes.find(l)] += 1;
            }
            let mut free = 0;
            let mut powers = Vec::new();
            for root in (0..len).filter(|&l| classes.find(l) == l) {
                match c_count[root] {
                    0 => free += 1,
                    j => powers.push(j),
                }
            }
            powers.sort_unstable();
            let value = (n as f64).powi(free) * 0.5f64.powi(pairs.len() as i32);
            *out.entry(powers).or_insert(0.0) += value;
        });
    }
    out
}

fn for_each_matching(rest: &[usize], pairs: &mut Vec<(usize, usize)>, visit: &mut dyn FnMut(&[(usize, usize)])) {
    let Some((&first, tail)) = rest.split_first() else {
        visit(pairs);
        return;
    };
    for (i, &partner) in tail.iter().enumerate() {
        let remaining: Vec<usize> = tail.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
        pairs.push((first, partner));
        for_each_matching(&remaining, pairs, visit);
        pairs.pop();
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Reduced weight on `bosons + fermions` diagonal variables, obtained by
/// Fourier inversion of the power-sum form with `C = iK/2` and
/// `tr K^j = Σ_b r_b^j - Σ_f (i r_f)^j`.
///
/// Bosonic variables carry `H_a(u)`. Fermionic variables are written in
/// `w = i v`, the polynomial `i^b H_b(w / i)`, so the result stays real.
fn power_sum_weight(n: usize, m1: u32, m2: u32, bosons: usize, fermions: usize) -> Poly {
    let vars = bosons + fermions;
    let max_power = (m1 * m2) as usize;
    let sums: Vec<Poly> = (0..=max_power)
        .map(|j| {
            let mut p = Poly::zero(vars);
            for v in 0..vars {
                let mut e = vec![0u8; vars];
                e[v] = j as u8;
                p.add_term(e, if v < bosons { 1.0 } else { -1.0 });
            }
            p.scale(0.5f64.powi(j as i32))
        })
        .collect();
    let mut source = Poly::zero(vars);
    for (powers, coef) in trace_power_sums(n, m1, m2) {
        let term = powers
            .iter()
            .fold(Poly::constant(vars, coef), |acc, &j| acc.mul(&sums[j as usize]));
        source = source.add(&term);
    }
    let degree = source.max_exponent();
    let hermite: Vec<Vec<f64>> = (0..=degree).map(hermite_coefficients).collect();
    let rotated: Vec<Vec<f64>> = hermite
        .iter()
        .enumerate()
        .map(|(b, c)| {
            c.iter()
                .enumerate()
                .map(|(l, &v)| if (b - l) % 4 == 2 { -v } else { v })
                .collect()
        })
        .collect();
    let mut out = Poly::zero(vars);
    for (e, coef) in source.terms() {
        let mut term = Poly::constant(vars, coef);
        for (v, &a) in e.iter().enumerate() {
            let table = if v < bosons { &hermite } else { &rotated };
            let mut factor = Poly::zero(vars);
            for (l, &c) in table[a as usize].iter().enumerate() {
                let mut f = vec![0u8; vars];
                f[v] = l as u8;
                factor.add_term(f, c);
            }
            term = term.mul(&factor);
        }
        out = out.add(&term);
    }
    out
}

/// Reduced weight on `k` bosonic and `k` fermionic eigenvalues, fermionic
/// variables in the rotated coordinate `w = i v`.
pub fn superspace_weight(n: usize, m1: u32, m2: u32, k: usize) -> Result<Arc<Poly>> {
    if m1 * m2 > WICK_CAP {
        return Err(Error::Resource(format!(
            "exact expansion of (tr H^{m1})^{m2} exceeds M1·M2 ≤ {WICK_CAP}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Poly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, m1, m2, k);
    if let Some(p) = cache.lock().expect("expansion cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let weight = Arc::new(power_sum_weight(n, m1, m2, k, k));
    cache
        .lock()
        .expect("expansion cache poisoned")
        .insert(key, weight.clone());
    Ok(weight)
}
