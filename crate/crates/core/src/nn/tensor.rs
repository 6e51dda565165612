//! Dense row-major matrices and the few kernels the network needs.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::Float;

/// Floating-point types the network runs in: `f32` for training and
/// inference, `f64` for gradient checks.
pub trait Scalar: Float + AddAssign + SubAssign + MulAssign + Default + Debug + Send + Sync + Sum + 'static {
    fn of(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Tensor {
            name: name.into(),
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = W x + b` (`b` may be empty).
    pub fn affine(&self, x: &[T], b: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), x) + b.get(r).copied().unwrap_or_else(T::zero);
        }
    }

    /// `dx += Wᵀ dy`.
    pub fn backprop_input(&self, dy: &[T], dx: &mut [T]) {
        for (r, &g) in dy.iter().enumerate() {
            if g != T::zero() {
                axpy(g, self.row(r), dx);
            }
        }
    }

    /// `self += dy ⊗ x`.
    pub fn add_outer(&mut self, dy: &[T], x: &[T]) {
        for (r, &g) in dy.iter().enumerate() {
            if g != T::zero() {
                axpy(g, x, self.row_mut(r));
            }
        }
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|x| *x = T::zero());
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            name: self.name.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| U::of(x.as_f64())).collect(),
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += *x * *y;
    }
    s
}

/// `y += a x`.
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

pub fn add_into<T: Scalar>(x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += *xi;
    }
}

pub fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Softmax in place; returns log of the normalizer.
pub fn softmax<T: Scalar>(v: &mut [T]) -> T {
    let m = v.iter().copied().fold(T::neg_infinity(), T::max);
    let mut z = T::zero();
    for x in v.iter_mut() {
        *x = (*x - m).exp();
        z += *x;
    }
    for x in v.iter_mut() {
        *x = *x / z;
    }
    m + z.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..21).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..21).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-9);
    }

    #[test]
    fn affine_and_transpose() {
        let mut w = Tensor::<f64>::zeros("w", 2, 3);
        w.data = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut out = [0.0; 2];
        w.affine(&[1.0, 0.0, -1.0], &[0.5, 0.0], &mut out);
        assert_eq!(out, [-1.5, -2.0]);
        let mut dx = [0.0; 3];
        w.backprop_input(&[1.0, 1.0], &mut dx);
        assert_eq!(dx, [5.0, 7.0, 9.0]);
        w.add_outer(&[1.0, 0.0], &[1.0, 1.0, 1.0]);
        assert_eq!(w.row(0), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn softmax_is_a_distribution() {
        let mut v = [1000.0f64, 1000.0, 999.0];
        let lz = softmax(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((lz - (1000.0 + (2.0 + (-1.0f64).exp()).ln())).abs() < 1e-9);
        let mut u = [0.0f32; 4];
        softmax(&mut u);
        assert!(u.iter().all(|&p| (p - 0.25).abs() < 1e-7));
    }
}
