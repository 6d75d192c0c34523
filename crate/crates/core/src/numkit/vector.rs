use std::ops::{Deref, DerefMut};

use super::NumError;

/// Dense real vector of double-precision coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn from_elem(n: usize, value: f64) -> Self {
        Vector(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[f64]) -> Result<f64, NumError> {
        dot(self, other)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    /// Concatenates blocks into one vector (x-block first).
    pub fn concat(blocks: &[&[f64]]) -> Self {
        Vector(blocks.iter().flat_map(|b| b.iter().copied()).collect())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

fn check_len(left: usize, right: usize) -> Result<(), NumError> {
    if left == right {
        Ok(())
    } else {
        Err(NumError::Dimension {
            expected: left,
            found: right,
        })
    }
}

/// Inner product `Σ u_i v_i`.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64, NumError> {
    check_len(u.len(), v.len())?;
    Ok(kernels::dot(u, v))
}

/// Euclidean norm.
pub fn norm(u: &[f64]) -> f64 {
    kernels::dot(u, u).sqrt()
}

/// Returns `a·u + v`.
pub fn axpy(a: f64, u: &[f64], v: &[f64]) -> Result<Vector, NumError> {
    check_len(u.len(), v.len())?;
    Ok(u.iter().zip(v).map(|(ui, vi)| a * ui + vi).collect())
}

/// Unchecked slice kernels for the iteration loops. Lengths are asserted, not reported.
pub mod kernels {
    #[inline]
    pub fn dot(u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), v.len());
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn norm(u: &[f64]) -> f64 {
        dot(u, u).sqrt()
    }

    /// `‖u - v‖`
    #[inline]
    pub fn dist(u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), v.len());
        u.iter()
            .zip(v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖u + v‖`
    #[inline]
    pub fn norm_sum(u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), v.len());
        u.iter()
            .zip(v)
            .map(|(a, b)| (a + b) * (a + b))
            .sum::<f64>()
            .sqrt()
    }

    /// `out = u - v`
    #[inline]
    pub fn sub_into(u: &[f64], v: &[f64], out: &mut [f64]) {
        assert!(u.len() == v.len() && v.len() == out.len());
        for ((o, a), b) in out.iter_mut().zip(u).zip(v) {
            *o = a - b;
        }
    }

    /// `y += a·x`
    #[inline]
    pub fn axpy_in_place(a: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), y.len());
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += a * xi;
        }
    }

    #[inline]
    pub fn scale_in_place(a: f64, x: &mut [f64]) {
        for xi in x.iter_mut() {
            *xi *= a;
        }
    }

    #[inline]
    pub fn max_abs_diff(u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), v.len());
        u.iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
