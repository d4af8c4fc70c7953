//! Quadrature rules shared by the numerical paths.
//!
//! Gauss–Legendre nodes come from `gauss-quad`. Gauss–Hermite nodes are
//! computed here by Newton iteration on the orthonormal Hermite recurrence,
//! seeded from the Jacobi matrix, which keeps full relative accuracy in the
//! tiny tail weights.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

use crate::C64;

/// Node/weight pairs of a quadrature rule.
pub type Rule = Arc<Vec<(f64, f64)>>;

fn cached(
    cache: &'static OnceLock<Mutex<HashMap<usize, Rule>>>,
    n: usize,
    build: impl FnOnce(usize) -> Vec<(f64, f64)>,
) -> Rule {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = map.lock().expect("quadrature cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(build(n));
    map.lock()
        .expect("quadrature cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Gauss–Hermite rule for weight `exp(-x^2)` on the real line, nodes ascending.
pub fn gauss_hermite(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    cached(&CACHE, n, build_gauss_hermite)
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    cached(&CACHE, n, |n| {
        let n = NonZeroUsize::new(n).expect("Gauss-Legendre order must be positive");
        let mut pairs = GaussLegendre::new(n).into_node_weight_pairs().into_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

fn build_gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0, "Gauss-Hermite order must be positive");
    // eigenvalues of the Jacobi matrix seed Newton on the three-term recurrence
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut seeds: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    seeds.sort_by(f64::total_cmp);
    let half: Vec<(f64, f64)> = seeds[n / 2..]
        .iter()
        .map(|&seed| {
            let mut z = if n % 2 == 1 && seed.abs() < 1e-8 { 0.0 } else { seed };
            for _ in 0..20 {
                let step = orthonormal_hermite(n, z);
                let dz = step.value / step.slope;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    break;
                }
            }
            (z, orthonormal_hermite(n, z).weight())
        })
        .collect();
    let mut nodes: Vec<(f64, f64)> = half.iter().map(|&(x, w)| (-x, w)).collect();
    nodes.extend(half.iter().skip(n % 2));
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    if n % 2 == 1 {
        nodes[n / 2].0 = 0.0;
    }
    nodes
}

/// Degree-`n` orthonormal Hermite polynomial (without the Gaussian) and its
/// derivative, both carried with a common binary exponent so that large
/// nodes neither overflow nor lose the relative size of the weight.
struct HermiteStep {
    value: f64,
    slope: f64,
    exponent: i32,
}

impl HermiteStep {
    fn weight(&self) -> f64 {
        // 2 / p'^2 with p' = slope * 2^exponent
        2.0 / (self.slope * self.slope) * 2f64.powi(-2 * self.exponent)
    }
}

fn orthonormal_hermite(n: usize, x: f64) -> HermiteStep {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut exponent = 0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > 1e200 {
            p1 *= 2f64.powi(-600);
            p2 *= 2f64.powi(-600);
            exponent += 600;
        }
    }
    HermiteStep {
        value: p1,
        slope: (2.0 * n as f64).sqrt() * p2,
        exponent,
    }
}

/// Composite Gauss–Legendre integral of a complex integrand over `[a, b]`.
pub fn composite_gl<F>(a: f64, b: f64, panels: usize, order: usize, mut f: F) -> C64
where
    F: FnMut(f64) -> C64,
{
    let rule = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let mut panel = C64::new(0.0, 0.0);
        for &(x, w) in rule.iter() {
            panel += f(mid + 0.5 * width * x) * w;
        }
        acc += panel * (0.5 * width);
    }
    acc
}

/// Composite Gauss–Legendre nodes and weights over `[a, b]`.
pub fn composite_gl_nodes(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + width * (p as f64 + 0.5);
        out.extend(
            rule.iter()
                .map(|&(x, w)| (mid + 0.5 * width * x, 0.5 * width * w)),
        );
    }
    out
}

/// Adaptive Gauss–Legendre integration of a real integrand with bisection.
/// Returns the value and an error estimate.
pub fn adaptive_gl<F>(a: f64, b: f64, tol: f64, f: &F) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    fn rule(a: f64, b: f64, f: &dyn Fn(f64) -> f64, order: usize) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        gauss_legendre(order)
            .iter()
            .map(|&(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
    fn recurse(a: f64, b: f64, tol: f64, f: &dyn Fn(f64) -> f64, depth: usize) -> (f64, f64) {
        let coarse = rule(a, b, f, 15);
        let fine = rule(a, b, f, 30);
        let err = (fine - coarse).abs();
        if err <= tol || depth >= 40 {
            return (fine, err);
        }
        let mid = 0.5 * (a + b);
        let (l, el) = recurse(a, mid, 0.5 * tol, f, depth + 1);
        let (r, er) = recurse(mid, b, 0.5 * tol, f, depth + 1);
        (l + r, el + er)
    }
    if a == b {
        return (0.0, 0.0);
    }
    recurse(a, b, tol, f, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_integer_gamma(m: usize) -> f64 {
        (0..m).fold(std::f64::consts::PI.sqrt(), |g, j| g * (j as f64 + 0.5))
    }

    #[test]
    fn hermite_moments_keep_relative_accuracy() {
        for n in [20, 128, 256, 512] {
            let rule = gauss_hermite(n);
            assert_eq!(rule.len(), n);
            for m in 0..(n.min(60)) {
                let s: f64 = rule.iter().map(|(x, w)| w * x.powi(2 * m as i32)).sum();
                let exact = half_integer_gamma(m);
                assert!(
                    (s / exact - 1.0).abs() < 1e-11,
                    "n={n} m={m} rel={}",
                    s / exact - 1.0
                );
            }
        }
    }

    #[test]
    fn hermite_nodes_are_symmetric() {
        let rule = gauss_hermite(33);
        for (lo, hi) in rule.iter().zip(rule.iter().rev()) {
            assert!((lo.0 + hi.0).abs() < 1e-12);
            assert!((lo.1 / hi.1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let v = composite_gl(0.0, 2.0, 3, 10, |x| C64::new(x.powi(7), 0.0));
        assert!((v.re - 32.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let (v, _) = adaptive_gl(-10.0, 10.0, 1e-13, &|x: f64| (-(x * 30.0).powi(2)).exp());
        let exact = std::f64::consts::PI.sqrt() / 30.0;
        assert!((v - exact).abs() < 1e-12);
    }
}
