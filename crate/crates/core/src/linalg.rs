//! Dense vector helpers on plain slices.
//!
//! Points travel through the public API as `Vec<f64>`; nalgebra is used only
//! inside the solvers that need factorizations.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Weighted sum of vectors, all of dimension `n`.
pub fn combine(weights: &[f64], vectors: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (w, v) in weights.iter().zip(vectors) {
        axpy(&mut out, *w, v);
    }
    out
}

/// Row-major square matrix stored as `Vec<Vec<f64>>`.
pub type Matrix = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Matrix {
    vec![vec![0.0; n]; n]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// `m += s * other`
pub fn mat_axpy(m: &mut Matrix, s: f64, other: &Matrix) {
    for (row, orow) in m.iter_mut().zip(other) {
        axpy(row, s, orow);
    }
}

pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, x)).collect()
}

pub fn outer(a: &[f64], b: &[f64]) -> Matrix {
    a.iter()
        .map(|ai| b.iter().map(|bj| ai * bj).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = [3.0, 4.0];
        assert_eq!(norm(&a), 5.0);
        assert_eq!(dot(&a, &[1.0, 2.0]), 11.0);
        assert_eq!(sub(&a, &[1.0, 1.0]), vec![2.0, 3.0]);
        let mut y = vec![1.0, 1.0];
        axpy(&mut y, 2.0, &a);
        assert_eq!(y, vec![7.0, 9.0]);
        assert_eq!(combine(&[0.5, 0.5], &[vec![2.0, 0.0], vec![0.0, 2.0]], 2), vec![1.0, 1.0]);
        assert_eq!(mat_vec(&identity(2), &a), a.to_vec());
    }
}
