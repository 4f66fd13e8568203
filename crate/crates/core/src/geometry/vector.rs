use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// A point of Rⁿ with finite coordinates, n ≥ 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyVector);
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite { index: i });
        }
        Ok(Vector(coords))
    }

    /// Builds a vector without validation. Callers guarantee finiteness.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim.max(1)])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * s).collect())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `(1 - t)·self + t·other`.
    pub fn lerp(&self, other: &Vector, t: f64) -> Vector {
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &Vector) -> Vector {
        self.lerp(other, 0.5)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = GeometryError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Shorthand used heavily in tests and generators.
#[macro_export]
macro_rules! vector {
    ($($x:expr),+ $(,)?) => {
        $crate::Vector::new(vec![$($x as f64),+]).expect("finite literal vector")
    };
}
