//! Dense points in R^n and the handful of vector helpers the solvers need.

use ndarray::Array1;

/// A point (or direction) in R^n.
pub type Point = Array1<f64>;

pub fn dot(a: &Point, b: &Point) -> f64 {
    a.dot(b)
}

pub fn norm_sq(a: &Point) -> f64 {
    a.dot(a)
}

pub fn norm(a: &Point) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_sq(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn is_finite(a: &Point) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// `a + s * b`
pub fn axpy(a: &Point, s: f64, b: &Point) -> Point {
    let mut out = a.clone();
    out.scaled_add(s, b);
    out
}
