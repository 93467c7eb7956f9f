//! Procrustes matching of latent configurations.
//!
//! Latent positions are only identified up to translation, rotation and
//! reflection. Every retained draw is moved by the rigid motion that brings
//! it closest (in Frobenius norm) to a single reference configuration. No
//! scaling is applied, so all pairwise distances are untouched.

use crate::error::{Error, Result};
use crate::model::{LatentConfig, Point};
use crate::scalar::Scalar;

/// `x -> rotation * x + translation`. The rotation block may carry a
/// reflection (determinant -1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcrustesTransform<T> {
    pub rotation: [[T; 2]; 2],
    pub translation: Point<T>,
}

impl<T: Scalar> ProcrustesTransform<T> {
    pub fn identity() -> Self {
        Self {
            rotation: [[T::one(), T::zero()], [T::zero(), T::one()]],
            translation: [T::zero(); 2],
        }
    }

    #[inline]
    pub fn apply(&self, p: Point<T>) -> Point<T> {
        let r = &self.rotation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + self.translation[0],
            r[1][0] * p[0] + r[1][1] * p[1] + self.translation[1],
        ]
    }

    pub fn apply_config(&self, cfg: &LatentConfig<T>) -> LatentConfig<T> {
        let pts = cfg.points().iter().map(|&p| self.apply(p)).collect();
        LatentConfig::new(pts).expect("rigid motion keeps coordinates finite")
    }

    pub fn determinant(&self) -> T {
        let r = &self.rotation;
        r[0][0] * r[1][1] - r[0][1] * r[1][0]
    }

    pub fn is_reflection(&self) -> bool {
        self.determinant() < T::zero()
    }
}

fn centered_sums<T: Scalar>(target: &[Point<T>], reference: &[Point<T>], tc: Point<T>, rc: Point<T>) -> (T, T, T, T) {
    // a, b: rotation case; ar, br: after negating the second target axis.
    let (mut a, mut b, mut ar, mut br) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (x, y) in target.iter().zip(reference) {
        let (x0, x1) = (x[0] - tc[0], x[1] - tc[1]);
        let (y0, y1) = (y[0] - rc[0], y[1] - rc[1]);
        a += x0 * y0 + x1 * y1;
        b += x0 * y1 - x1 * y0;
        ar += x0 * y0 - x1 * y1;
        br += x0 * y1 + x1 * y0;
    }
    (a, b, ar, br)
}

/// Optimal rigid motion taking `target` onto `reference`.
///
/// For two dimensions the orthogonal factor of the cross-covariance has a
/// closed form: the best proper rotation has angle `atan2(b, a)` with score
/// `hypot(a, b)`, and the best improper one is the same construction applied
/// after a reflection. The larger score wins; ties keep the proper rotation.
pub fn procrustes_transform<T: Scalar>(
    target: &LatentConfig<T>,
    reference: &LatentConfig<T>,
) -> Result<ProcrustesTransform<T>> {
    if target.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} rows, reference has {}",
            target.len(),
            reference.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::DegenerateReference);
    }
    let rc = reference.centroid();
    let spread: T = reference
        .points()
        .iter()
        .map(|p| (p[0] - rc[0]) * (p[0] - rc[0]) + (p[1] - rc[1]) * (p[1] - rc[1]))
        .sum();
    if !(spread > T::zero()) {
        return Err(Error::DegenerateReference);
    }
    let tc = target.centroid();
    let (a, b, ar, br) = centered_sums(target.points(), reference.points(), tc, rc);
    let h = a.hypot(b);
    let hr = ar.hypot(br);

    let rotation = if hr > h {
        // rotation(phi) * diag(1, -1)
        let (c, s) = (ar / hr, br / hr);
        [[c, s], [s, -c]]
    } else if h > T::zero() {
        let (c, s) = (a / h, b / h);
        [[c, -s], [s, c]]
    } else {
        [[T::one(), T::zero()], [T::zero(), T::one()]]
    };
    let rotated_tc = [
        rotation[0][0] * tc[0] + rotation[0][1] * tc[1],
        rotation[1][0] * tc[0] + rotation[1][1] * tc[1],
    ];
    Ok(ProcrustesTransform {
        rotation,
        translation: [rc[0] - rotated_tc[0], rc[1] - rotated_tc[1]],
    })
}

pub fn procrustes_align<T: Scalar>(
    target: &LatentConfig<T>,
    reference: &LatentConfig<T>,
) -> Result<(LatentConfig<T>, ProcrustesTransform<T>)> {
    let t = procrustes_transform(target, reference)?;
    Ok((t.apply_config(target), t))
}

/// Sum of squared coordinate differences.
pub fn residual<T: Scalar>(a: &LatentConfig<T>, b: &LatentConfig<T>) -> T {
    a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]))
        .sum()
}

/// How the common reference configuration is picked.
#[derive(Debug, Clone)]
pub enum ReferenceRule<'a, T> {
    /// The draw with the largest log-posterior (first one on ties).
    MaxLogPosterior(&'a [T]),
    Index(usize),
    Fixed(&'a LatentConfig<T>),
}

fn pick_reference<'a, T: Scalar>(
    draws: &'a [LatentConfig<T>],
    rule: &ReferenceRule<'a, T>,
) -> Result<&'a LatentConfig<T>> {
    match rule {
        ReferenceRule::MaxLogPosterior(lp) => {
            if lp.len() != draws.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} log-posterior values for {} draws",
                    lp.len(),
                    draws.len()
                )));
            }
            let mut best = 0;
            for (i, v) in lp.iter().enumerate() {
                if *v > lp[best] {
                    best = i;
                }
            }
            Ok(&draws[best])
        }
        ReferenceRule::Index(i) => draws
            .get(*i)
            .ok_or_else(|| Error::InvalidParameter(format!("reference index {i} out of range"))),
        ReferenceRule::Fixed(cfg) => Ok(cfg),
    }
}

/// Aligns every draw to one reference chosen by `rule`.
pub fn align_draw_sequence<T: Scalar>(
    draws: &[LatentConfig<T>],
    rule: &ReferenceRule<'_, T>,
) -> Result<Vec<LatentConfig<T>>> {
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
    let reference = pick_reference(draws, rule)?.clone();
    draws
        .iter()
        .map(|d| procrustes_align(d, &reference).map(|(a, _)| a))
        .collect()
}

/// Aligns draws of a moving configuration that share the coordinate frame
/// of a fixed one.
///
/// Each draw is stacked under `fixed`, the stacked configuration is matched
/// to the stacked reference, and the same motion is applied to the draw.
/// Distances between fixed and moving points are therefore unchanged. For a
/// `Fixed` rule the supplied configuration is the moving part of the
/// reference. Returns the aligned draws together with the per-draw motions
/// (apply a motion to `fixed` to get that draw's aligned fixed positions).
pub fn align_joint_sequence<T: Scalar>(
    fixed: &LatentConfig<T>,
    draws: &[LatentConfig<T>],
    rule: &ReferenceRule<'_, T>,
) -> Result<(Vec<LatentConfig<T>>, Vec<ProcrustesTransform<T>>)> {
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
    let reference = fixed.stacked(pick_reference(draws, rule)?);
    let mut aligned = Vec::with_capacity(draws.len());
    let mut motions = Vec::with_capacity(draws.len());
    for d in draws {
        let t = procrustes_transform(&fixed.stacked(d), &reference)?;
        aligned.push(t.apply_config(d));
        motions.push(t);
    }
    Ok((aligned, motions))
}
