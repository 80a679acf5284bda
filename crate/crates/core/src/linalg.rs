//! Dense real vectors.
//!
//! [`Point`] is the only vector type in the crate. Coordinates are checked for
//! finiteness on construction so that the branch predicates of the operators
//! (`d_Z(x) <= beta`) never see a NaN.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `R^n`, `n >= 1`, with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Point(coords))
    }

    /// The origin of `R^dim`.
    ///
    /// Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Point(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of `R^dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[i] = 1.0;
        p
    }

    /// Wraps coordinates produced by arithmetic on already valid points.
    /// Finiteness is rechecked by callers that iterate (see the solver).
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self - other`.
    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `alpha * self`.
    pub fn scale(&self, alpha: f64) -> Point {
        Point(self.0.iter().map(|a| alpha * a).collect())
    }

    /// `self + alpha * dir`.
    pub fn add_scaled(&self, alpha: f64, dir: &Point) -> Point {
        debug_assert_eq!(self.dim(), dir.dim());
        Point(
            self.0
                .iter()
                .zip(&dir.0)
                .map(|(x, d)| x + alpha * d)
                .collect(),
        )
    }

    /// Euclidean distance `‖self - other‖`.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inner product `Σ a_i b_i`.
pub fn inner(a: &Point, b: &Point) -> Result<f64> {
    b.check_dim(a.dim())?;
    Ok(dot(&a.0, &b.0))
}

/// Euclidean norm.
pub fn norm(a: &Point) -> f64 {
    dot(&a.0, &a.0).sqrt()
}

/// `alpha * a + b`.
pub fn axpy(alpha: f64, a: &Point, b: &Point) -> Result<Point> {
    b.check_dim(a.dim())?;
    Ok(b.add_scaled(alpha, a))
}
