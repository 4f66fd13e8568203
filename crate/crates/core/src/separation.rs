//! Strict separation by hyperplanes.
//!
//! A point outside a polytope is separated using its projection `y`: with
//! `u = x − y`, every vertex `z` satisfies `⟨u,z⟩ ≤ ⟨u,y⟩ < ⟨u,x⟩` and the gap
//! equals `‖u‖²`. Two disjoint polytopes are separated by projecting the origin
//! onto their Minkowski difference.
//!
//! Normals are deliberately left unnormalized so that the margin identity
//! holds verbatim; normalize for display only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_dim, GeometryError};
use crate::geometry::{contains, minkowski_difference, project, Hyperplane, Polytope, Vector};
use crate::intersection::common_point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeparationError {
    #[error("point {point} lies in the set; strict separation is impossible")]
    PointInsideSet { point: Vector },
    #[error("the sets intersect at {witness}")]
    SetsIntersect { witness: Vector },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub hyperplane: Hyperplane,
    /// `y = P_C(x)` for a point, `P_{C−K}(0)` for two sets.
    pub witness_projection: Vector,
    /// `‖u‖²`.
    pub margin: f64,
    /// Set when `margin ≤ tol`: the separation holds but is numerically thin.
    pub weak: bool,
}

impl SeparationResult {
    pub fn normal(&self) -> &Vector {
        &self.hyperplane.normal
    }
}

/// Residuals of the point-separation inequality chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCertificate {
    /// `max_z ⟨u,z⟩ − ⟨u,y⟩` over vertices; must be `≤ tol`.
    pub max_vertex_excess: f64,
    /// `⟨u,x⟩ − ⟨u,y⟩`; must be `> 0`.
    pub gap: f64,
    /// `|gap − ‖u‖²|`.
    pub margin_defect: f64,
}

/// Residual of the two-set inequality `sup_C ⟨u,·⟩ + ‖u‖² ≤ min_K ⟨u,·⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetsCertificate {
    pub sup_c: f64,
    pub min_k: f64,
    /// `min_K − (sup_C + ‖u‖²)`; must be `≥ −tol`.
    pub slack: f64,
}

/// Separates `x` from `conv(C)` via the projection of `x` onto `C`.
pub fn separate_point(c: &Polytope, x: &Vector, tol: f64) -> Result<SeparationResult, SeparationError> {
    check_dim(c.dim(), x.dim())?;
    if contains(c, x, tol)? {
        return Err(SeparationError::PointInsideSet { point: x.clone() });
    }
    let y = project(c, x, tol)?.point;
    let u = x - &y;
    let margin = u.norm_squared();
    let offset = u.dot(&y);
    Ok(SeparationResult {
        hyperplane: Hyperplane::new(u, offset)?,
        witness_projection: y,
        margin,
        weak: margin <= tol,
    })
}

/// Separates two disjoint polytopes: with `u = −P_{C−K}(0)`,
/// `⟨u,x⟩ + ‖u‖² ≤ ⟨u,x′⟩` for all `x ∈ C`, `x′ ∈ K`.
///
/// The hyperplane sits halfway across the gap.
pub fn separate_sets(k: &Polytope, c: &Polytope, tol: f64) -> Result<SeparationResult, SeparationError> {
    check_dim(k.dim(), c.dim())?;
    let (residual, witness) = common_point(&[k.clone(), c.clone()])?;
    if residual <= tol {
        return Err(SeparationError::SetsIntersect { witness });
    }
    let diff = minkowski_difference(c, k)?;
    let origin = Vector::zeros(c.dim());
    let p = project(&diff, &origin, tol)?.point;
    let u = p.scale(-1.0);
    let margin = u.norm_squared();
    let sup_c = c.vertices().iter().map(|z| u.dot(z)).fold(f64::NEG_INFINITY, f64::max);
    Ok(SeparationResult {
        hyperplane: Hyperplane::new(u, sup_c + 0.5 * margin)?,
        witness_projection: p,
        margin,
        weak: margin <= tol,
    })
}

/// Evaluates the point-separation chain at every vertex of `c`.
pub fn certify_point(result: &SeparationResult, c: &Polytope, x: &Vector) -> PointCertificate {
    let u = result.normal();
    let uy = u.dot(&result.witness_projection);
    let max_vertex_excess = c
        .vertices()
        .iter()
        .map(|z| u.dot(z) - uy)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = u.dot(x) - uy;
    PointCertificate {
        max_vertex_excess,
        gap,
        margin_defect: (gap - u.norm_squared()).abs(),
    }
}

/// Evaluates the two-set inequality over all vertices.
pub fn certify_sets(result: &SeparationResult, k: &Polytope, c: &Polytope) -> SetsCertificate {
    let u = result.normal();
    let sup_c = c.vertices().iter().map(|z| u.dot(z)).fold(f64::NEG_INFINITY, f64::max);
    let min_k = k.vertices().iter().map(|z| u.dot(z)).fold(f64::INFINITY, f64::min);
    SetsCertificate {
        sup_c,
        min_k,
        slack: min_k - (sup_c + u.norm_squared()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    fn square(lo: f64, hi: f64) -> Polytope {
        Polytope::cube(2, lo, hi)
    }

    #[test]
    fn point_face_example() {
        let sq = square(0.0, 1.0);
        let x = vector![2, 0.5];
        let r = separate_point(&sq, &x, 1e-9).unwrap();
        assert!(r.normal().distance(&vector![1, 0]) < 1e-12);
        assert!(r.witness_projection.distance(&vector![1, 0.5]) < 1e-12);
        assert!((r.margin - 1.0).abs() < 1e-12);
        assert!(!r.weak);
        let cert = certify_point(&r, &sq, &x);
        assert!(cert.max_vertex_excess <= 1e-12);
        assert!(cert.gap > 0.0);
        assert!(cert.margin_defect < 1e-12);
    }

    #[test]
    fn single_point_set() {
        let r = separate_point(&Polytope::point(vector![0]), &vector![3], 1e-9).unwrap();
        assert_eq!(r.normal(), &vector![3]);
        assert_eq!(r.margin, 9.0);
    }

    #[test]
    fn interior_point_is_rejected() {
        let err = separate_point(&square(0.0, 1.0), &vector![0.5, 0.5], 1e-9).unwrap_err();
        assert!(matches!(err, SeparationError::PointInsideSet { .. }));
    }

    #[test]
    fn two_squares() {
        let k = square(2.0, 3.0);
        let c = square(0.0, 1.0);
        let r = separate_sets(&k, &c, 1e-9).unwrap();
        assert!(r.normal().distance(&vector![1, 1]) < 1e-12);
        assert!((r.margin - 2.0).abs() < 1e-12);
        let cert = certify_sets(&r, &k, &c);
        assert!(cert.slack >= -1e-12);
        // the hyperplane strictly separates
        assert!(c.vertices().iter().all(|z| r.hyperplane.evaluate(z) < 0.0));
        assert!(k.vertices().iter().all(|z| r.hyperplane.evaluate(z) > 0.0));
    }

    #[test]
    fn two_points() {
        let r = separate_sets(&Polytope::point(vector![0]), &Polytope::point(vector![5]), 1e-9).unwrap();
        assert_eq!(r.normal(), &vector![-5]);
        assert_eq!(r.margin, 25.0);
    }

    #[test]
    fn identical_sets_intersect() {
        let sq = square(0.0, 1.0);
        match separate_sets(&sq, &sq, 1e-9).unwrap_err() {
            SeparationError::SetsIntersect { witness } => {
                assert!(contains(&sq, &witness, 1e-9).unwrap());
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn swapping_arguments_negates_the_normal() {
        let k = Polytope::from_rows(vec![vec![3.0, 0.0], vec![4.0, 1.0], vec![3.5, -1.0]]).unwrap();
        let c = square(0.0, 1.0);
        let a = separate_sets(&k, &c, 1e-9).unwrap();
        let b = separate_sets(&c, &k, 1e-9).unwrap();
        assert!((a.normal() + b.normal()).norm() < 1e-9);
        assert!((a.margin - b.margin).abs() < 1e-12);
    }

    #[test]
    fn thin_gaps_are_flagged_weak() {
        let c = Polytope::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let r = separate_point(&c, &vector![1.00001], 1e-9).unwrap();
        assert!(r.weak);
        assert!(r.margin > 0.0);
    }
}
