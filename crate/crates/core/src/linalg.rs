//! Small dense helpers: determinants, Vandermonde products, permutations,
//! combinatorial constants.

use nalgebra::DMatrix;

use crate::C64;

/// Determinant of a square complex matrix given row-major.
pub fn det(rows: &[Vec<C64>]) -> C64 {
    let n = rows.len();
    match n {
        0 => C64::new(1.0, 0.0),
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        _ => DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant(),
    }
}

/// `∏_{i<j} (v_i − v_j)`.
pub fn vandermonde(v: &[C64]) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            p *= v[i] - v[j];
        }
    }
    p
}

/// `∏_{i<j} (v_i − v_j)` for real entries.
pub fn vandermonde_real(v: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            p *= v[i] - v[j];
        }
    }
    p
}

/// All permutations of `0..k` with their signs, identity first.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn heap(n: usize, a: &mut Vec<usize>, sign: &mut f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if n <= 1 {
            out.push((a.clone(), *sign));
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, a, sign, out);
            let j = if n % 2 == 0 { i } else { 0 };
            a.swap(j, n - 1);
            *sign = -*sign;
        }
        heap(n - 1, a, sign, out);
    }
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..k).collect();
    let mut sign = 1.0;
    heap(k, &mut a, &mut sign, &mut out);
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// Moment `⟨v^m⟩` of the density `(π s)^{-1/2} exp(-v²/s)`.
pub fn gaussian_moment(m: usize, scale: f64) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    let l = m / 2;
    // (2l-1)!! (s/2)^l
    (0..l).fold(1.0, |acc, j| acc * (2 * j + 1) as f64 * 0.5 * scale)
}

/// `i^n`.
pub fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
