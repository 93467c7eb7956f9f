use std::ops::Index;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Point<T> = [T; 2];

#[inline]
pub fn distance<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    (dx * dx + dy * dy).sqrt()
}

/// A set of positions in the two-dimensional latent space, one row per
/// respondent or item.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentConfig<T> {
    coords: Vec<Point<T>>,
}

impl<T: Scalar> LatentConfig<T> {
    pub fn new(coords: Vec<Point<T>>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidParameter(format!("latent position {i} is not finite")));
        }
        Ok(Self { coords })
    }

    pub fn zeros(m: usize) -> Self {
        Self { coords: vec![[T::zero(); 2]; m] }
    }

    /// Independent draws from the standard bivariate normal.
    pub fn standard_normal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let coords = (0..m)
            .map(|_| [T::sample_standard_normal(rng), T::sample_standard_normal(rng)])
            .collect();
        Self { coords }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.coords
    }

    pub fn into_points(self) -> Vec<Point<T>> {
        self.coords
    }

    #[inline]
    pub fn dist(&self, i: usize, other: &LatentConfig<T>, j: usize) -> T {
        distance(self.coords[i], other.coords[j])
    }

    pub fn centroid(&self) -> Point<T> {
        let m = T::from_count(self.coords.len().max(1));
        let sx: T = self.coords.iter().map(|p| p[0]).sum();
        let sy: T = self.coords.iter().map(|p| p[1]).sum();
        [sx / m, sy / m]
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            coords: self.coords.iter().map(|p| [p[0] * factor, p[1] * factor]).collect(),
        }
    }

    /// Stacks two configurations row-wise.
    pub fn stacked(&self, other: &LatentConfig<T>) -> Self {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Self { coords }
    }

    pub fn check_len(&self, expected: usize, what: &str) -> Result<()> {
        if self.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{what} has {} rows, expected {expected}",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.coords.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidParameter(format!("latent position {i} is not finite")));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> T {
        self.coords
            .iter()
            .flat_map(|p| p.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<usize> for LatentConfig<T> {
    type Output = Point<T>;

    fn index(&self, i: usize) -> &Point<T> {
        &self.coords[i]
    }
}
