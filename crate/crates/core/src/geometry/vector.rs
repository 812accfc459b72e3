//! Dense parameter-space vectors.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point or direction in parameter space.
///
/// Invariants, enforced at construction: dimension at least 1, every
/// entry finite.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct Vector<T> {
    data: Vec<T>,
}

impl<T: Real> Vector<T> {
    /// Wraps raw entries, rejecting empty or non-finite input.
    pub fn new(data: Vec<T>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidVector("dimension must be at least 1"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidVector("entries must be finite"));
        }
        Ok(Self { data })
    }

    /// Copies entries out of a slice; same checks as [`Vector::new`].
    pub fn from_slice(entries: &[T]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// All-zero vector of the given dimension.
    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![T::zero(); dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    /// Inner product. Dimensions must agree; this is a programmer error,
    /// not a data error, hence the panic.
    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim(), "dot of mismatched dimensions");
        self.data.iter().zip(&other.data).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim(), "distance of mismatched dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| {
                let d = *a - *b;
                acc + d * d
            })
            .sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "sub of mismatched dimensions");
        Self { data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect() }
    }

    /// `self + t * other`, allocating the result.
    pub fn add_scaled(&self, t: T, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "add_scaled of mismatched dimensions");
        Self { data: self.data.iter().zip(&other.data).map(|(a, b)| *a + t * *b).collect() }
    }

    /// `self += t * other`, in place for hot loops.
    #[inline]
    pub fn add_scaled_in_place(&mut self, t: T, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "add_scaled of mismatched dimensions");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + t * *b;
        }
    }

    /// Unit vector along `self`; zero vectors have no direction.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::InvalidVector("zero vector has no direction"));
        }
        Ok(Self { data: self.data.iter().map(|v| *v / n).collect() })
    }

    /// True when `other` is the exact entrywise negation of `self`.
    pub(crate) fn is_neg_of(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.data.iter().zip(&other.data).all(|(a, b)| *a == -*b)
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}
