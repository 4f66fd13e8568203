//! Finite KKM maps with polytope values.
//!
//! A map `Γ` from finitely many points `x₁, …, x_n` to convex sets is KKM when
//! `conv{xᵢ : i ∈ S} ⊆ ⋃_{i∈S} Γ(xᵢ)` for every nonempty subset `S`. Convex
//! KKM maps with closed values have the finite intersection property; for a
//! finite map this means a point common to every value, and in fact one inside
//! `conv{x₁, …, x_n}` as well.
//!
//! Also hosts the partition-of-unity selection built from a ball cover.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_dim, GeometryError};
use crate::geometry::{
    barycentric_grid, grid_size, polytope_grid, BarycentricCoords, MembershipOracle, Polytope, Vector,
};
use crate::intersection::common_point;

/// Exhaustive subset enumeration is capped at this many domain points.
pub const MAX_DOMAIN_POINTS: usize = 10;
/// Grid points per subset; coarser grids are used (and reported) beyond it.
const SUBSET_GRID_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KkmError {
    #[error("{points} domain points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("map needs at least one domain point")]
    EmptyDomain,
    #[error("vertex {vertex} of value {value} lies outside the ambient set")]
    ValueOutsideAmbient { value: usize, vertex: usize },
    #[error("{0} domain points exceed the exhaustive-subset budget of {MAX_DOMAIN_POINTS}")]
    TooManyPoints(usize),
    #[error("resolution must lie in (0, 1], got {0}")]
    BadResolution(f64),
    #[error("values have no common point in conv(domain) (residual {residual:.3e})")]
    InfeasibleIntersection { residual: f64 },
    #[error("ball {index} has nonpositive radius")]
    BadBall { index: usize },
    #[error("grid point {point} of the compact set lies in no ball")]
    CoverGap { point: Vector },
    #[error("point {point} lies outside every ball of the cover")]
    OutsideCover { point: Vector },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `Γ(xᵢ) = values[i]`, all contained in `ambient`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteKkmMap {
    domain_points: Vec<Vector>,
    values: Vec<Polytope>,
    ambient: Polytope,
}

impl FiniteKkmMap {
    pub fn new(
        domain_points: Vec<Vector>,
        values: Vec<Polytope>,
        ambient: Polytope,
        tol: f64,
    ) -> Result<Self, KkmError> {
        if domain_points.is_empty() {
            return Err(KkmError::EmptyDomain);
        }
        if domain_points.len() != values.len() {
            return Err(KkmError::LengthMismatch {
                points: domain_points.len(),
                values: values.len(),
            });
        }
        let d = ambient.dim();
        for x in &domain_points {
            check_dim(d, x.dim())?;
        }
        let oracle = MembershipOracle::new(&ambient);
        for (vi, value) in values.iter().enumerate() {
            check_dim(d, value.dim())?;
            for (k, v) in value.vertices().iter().enumerate() {
                if !oracle.contains(v, tol)? {
                    return Err(KkmError::ValueOutsideAmbient { value: vi, vertex: k });
                }
            }
        }
        Ok(FiniteKkmMap {
            domain_points,
            values,
            ambient,
        })
    }

    pub fn domain_points(&self) -> &[Vector] {
        &self.domain_points
    }

    pub fn values(&self) -> &[Polytope] {
        &self.values
    }

    pub fn ambient(&self) -> &Polytope {
        &self.ambient
    }

    pub fn len(&self) -> usize {
        self.domain_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain_points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KkmViolation {
    pub subset: Vec<usize>,
    pub point: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KkmCertificate {
    pub certified: bool,
    /// Requested grid resolution.
    pub resolution: f64,
    /// Coarsest resolution actually used (differs from `resolution` only when
    /// a subset grid hit the point cap).
    pub effective_resolution: f64,
    pub subsets_checked: usize,
    pub points_checked: usize,
    pub violation: Option<KkmViolation>,
}

/// Checks the KKM covering condition on every nonempty subset of the domain,
/// sampling `conv(S)` on its barycentric grid at `resolution`. The first
/// violation in subset-mask order is reported.
pub fn verify_kkm(map: &FiniteKkmMap, resolution: f64, tol: f64) -> Result<KkmCertificate, KkmError> {
    let n = map.len();
    if n > MAX_DOMAIN_POINTS {
        return Err(KkmError::TooManyPoints(n));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(KkmError::BadResolution(resolution));
    }
    let k = (1.0 / resolution - 1e-9).ceil().max(1.0) as usize;
    let oracles: Vec<MembershipOracle> = map.values.iter().map(MembershipOracle::new).collect();

    let results = (1..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut kk = k;
            while kk > 1 && grid_size(subset.len(), kk) > SUBSET_GRID_CAP {
                kk -= 1;
            }
            let grid = barycentric_grid(subset.len(), kk);
            let count = grid.len();
            for w in grid {
                let mut acc = vec![0.0; map.ambient.dim()];
                for (&wi, &i) in w.iter().zip(&subset) {
                    for (a, c) in acc.iter_mut().zip(map.domain_points[i].as_slice()) {
                        *a += wi * c;
                    }
                }
                let point = Vector::new(acc)?;
                let mut covered = false;
                for &i in &subset {
                    if oracles[i].contains(&point, tol)? {
                        covered = true;
                        break;
                    }
                }
                if !covered {
                    return Ok((kk, count, Some(KkmViolation { subset, point })));
                }
            }
            Ok((kk, count, None))
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;

    let mut points_checked = 0;
    let mut coarsest = k;
    let mut violation = None;
    let mut subsets_checked = 0;
    for (kk, count, v) in results {
        subsets_checked += 1;
        points_checked += count;
        coarsest = coarsest.min(kk);
        if v.is_some() {
            violation = v;
            break;
        }
    }
    Ok(KkmCertificate {
        certified: violation.is_none(),
        resolution,
        effective_resolution: 1.0 / coarsest as f64,
        subsets_checked,
        points_checked,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KkmIntersection {
    pub point: Vector,
    /// Largest max-norm distance from `point` to any value or to `conv(domain)`.
    pub residual: f64,
}

/// A point in every value and in `conv(domain)`, found by one joint LP.
pub fn kkm_intersection(map: &FiniteKkmMap, tol: f64) -> Result<KkmIntersection, KkmError> {
    let mut family = map.values.clone();
    family.push(Polytope::new(map.domain_points.clone())?);
    let (residual, point) = common_point(&family)?;
    if residual > tol {
        return Err(KkmError::InfeasibleIntersection { residual });
    }
    Ok(KkmIntersection { point, residual })
}

/// Open ball `{ x : ‖x − center‖ < radius }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    /// `max(0, radius − ‖x − center‖)`, the distance to the complement.
    pub fn depth(&self, x: &Vector) -> f64 {
        (self.radius - x.distance(&self.center)).max(0.0)
    }
}

/// Continuous selection `s(x) = Σ λᵢ(x) yᵢ` driven by a partition of unity
/// subordinated to a ball cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMap {
    cover_points: Vec<Vector>,
    balls: Vec<Ball>,
}

impl SelectionMap {
    pub fn cover_points(&self) -> &[Vector] {
        &self.cover_points
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    /// Partition-of-unity weights at `x` and the selected point `s(x)`.
    pub fn evaluate(&self, x: &Vector) -> Result<(BarycentricCoords, Vector), KkmError> {
        check_dim(self.balls[0].center.dim(), x.dim())?;
        let depths: Vec<f64> = self.balls.iter().map(|b| b.depth(x)).collect();
        let total: f64 = depths.iter().sum();
        if total <= 0.0 {
            return Err(KkmError::OutsideCover { point: x.clone() });
        }
        let weights: Vec<f64> = depths.iter().map(|d| d / total).collect();
        let mut acc = vec![0.0; self.cover_points[0].dim()];
        for (w, y) in weights.iter().zip(&self.cover_points) {
            if *w > 0.0 {
                for (a, c) in acc.iter_mut().zip(y.as_slice()) {
                    *a += w * c;
                }
            }
        }
        Ok((BarycentricCoords { weights }, Vector::new(acc)?))
    }
}

/// Builds the selection after certifying, on the grid of `k_set` at
/// `resolution`, that the balls cover it.
pub fn build_selection(
    cover_points: Vec<Vector>,
    balls: Vec<Ball>,
    k_set: &Polytope,
    resolution: f64,
) -> Result<SelectionMap, KkmError> {
    if cover_points.is_empty() {
        return Err(KkmError::EmptyDomain);
    }
    if cover_points.len() != balls.len() {
        return Err(KkmError::LengthMismatch {
            points: cover_points.len(),
            values: balls.len(),
        });
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(KkmError::BadResolution(resolution));
    }
    let dy = cover_points[0].dim();
    for y in &cover_points {
        check_dim(dy, y.dim())?;
    }
    for (i, b) in balls.iter().enumerate() {
        check_dim(k_set.dim(), b.center.dim())?;
        if !(b.radius > 0.0 && b.radius.is_finite()) {
            return Err(KkmError::BadBall { index: i });
        }
    }
    let k = (1.0 / resolution - 1e-9).ceil().max(1.0) as usize;
    for x in polytope_grid(k_set, k, 200_000, 0) {
        if balls.iter().all(|b| b.depth(&x) <= 0.0) {
            return Err(KkmError::CoverGap { point: x });
        }
    }
    Ok(SelectionMap { cover_points, balls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::contains;
    use crate::vector;

    /// Δ² in R³ with `Γ(vᵢ) = {λᵢ ≥ t}`.
    fn barycentric_cover(thresholds: [f64; 3]) -> FiniteKkmMap {
        let simplex = Polytope::standard_simplex(3);
        let values = (0..3)
            .map(|i| {
                let t = thresholds[i];
                let mut verts = vec![Vector::basis(3, i)];
                for j in 0..3 {
                    if j != i {
                        let mut c = vec![0.0; 3];
                        c[i] = t;
                        c[j] = 1.0 - t;
                        verts.push(Vector::new(c).unwrap());
                    }
                }
                Polytope::new(verts).unwrap()
            })
            .collect();
        FiniteKkmMap::new(simplex.vertices().to_vec(), values, simplex, 1e-9).unwrap()
    }

    #[test]
    fn barycentric_cover_is_kkm_with_barycenter_intersection() {
        let map = barycentric_cover([1.0 / 3.0; 3]);
        for r in [1.0, 0.5, 1.0 / 16.0, 1.0 / 30.0] {
            let cert = verify_kkm(&map, r, 1e-9).unwrap();
            assert!(cert.certified, "resolution {r}");
            assert_eq!(cert.subsets_checked, 7);
        }
        let hit = kkm_intersection(&map, 1e-7).unwrap();
        assert!(hit.point.max_abs_diff(&vector![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]) < 1e-6);
    }

    #[test]
    fn shrunk_value_is_caught() {
        let map = barycentric_cover([0.9, 1.0 / 3.0, 1.0 / 3.0]);
        let cert = verify_kkm(&map, 1.0 / 16.0, 1e-9).unwrap();
        assert!(!cert.certified);
        let v = cert.violation.unwrap();
        for &i in &v.subset {
            assert!(!contains(&map.values()[i], &v.point, 1e-9).unwrap());
        }
    }

    #[test]
    fn single_point_map() {
        let x = vector![0.3, 0.7];
        let value = Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let map = FiniteKkmMap::new(vec![x.clone()], vec![value.clone()], value, 1e-9).unwrap();
        assert!(verify_kkm(&map, 1.0 / 16.0, 1e-9).unwrap().certified);
        let hit = kkm_intersection(&map, 1e-9).unwrap();
        assert!(hit.point.distance(&x) < 1e-12);
    }

    #[test]
    fn malformed_maps_are_rejected() {
        let amb = Polytope::cube(1, 0.0, 1.0);
        assert!(matches!(
            FiniteKkmMap::new(vec![vector![0]], vec![], amb.clone(), 1e-9),
            Err(KkmError::LengthMismatch { .. })
        ));
        assert!(matches!(
            FiniteKkmMap::new(vec![vector![0]], vec![Polytope::point(vector![2])], amb.clone(), 1e-9),
            Err(KkmError::ValueOutsideAmbient { .. })
        ));
        let pts: Vec<Vector> = (0..11).map(|i| vector![i as f64 / 10.0]).collect();
        let vals = vec![amb.clone(); 11];
        let map = FiniteKkmMap::new(pts, vals, amb, 1e-9).unwrap();
        assert_eq!(verify_kkm(&map, 0.5, 1e-9).unwrap_err(), KkmError::TooManyPoints(11));
    }

    #[test]
    fn selection_single_ball_is_constant() {
        let k = Polytope::cube(2, 0.0, 1.0);
        let sel = build_selection(
            vec![vector![5, 5]],
            vec![Ball {
                center: vector![0.5, 0.5],
                radius: 1.0,
            }],
            &k,
            0.1,
        )
        .unwrap();
        for x in [vector![0, 0], vector![0.3, 0.9], vector![1, 1]] {
            let (w, s) = sel.evaluate(&x).unwrap();
            assert_eq!(w.weights, vec![1.0]);
            assert_eq!(s, vector![5, 5]);
        }
    }

    #[test]
    fn selection_on_interval_is_symmetric_and_lipschitz() {
        let k = Polytope::cube(1, 0.0, 1.0);
        let sel = build_selection(
            vec![vector![0], vector![1]],
            vec![
                Ball {
                    center: vector![0],
                    radius: 0.7,
                },
                Ball {
                    center: vector![1],
                    radius: 0.7,
                },
            ],
            &k,
            1e-3,
        )
        .unwrap();
        let (_, s) = sel.evaluate(&vector![0.5]).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15);

        // On [0.3, 0.7] both balls are active and s(x) = (x − 0.3)/0.4, so the
        // sharp Lipschitz constant is 2.5.
        let h = 1e-3;
        let mut lip: f64 = 0.0;
        let mut prev = sel.evaluate(&vector![0]).unwrap().1[0];
        for i in 1..=1000 {
            let cur = sel.evaluate(&vector![i as f64 * h]).unwrap().1[0];
            assert!((-1e-15..=1.0 + 1e-15).contains(&cur));
            lip = lip.max((cur - prev).abs() / h);
            prev = cur;
        }
        assert!(lip <= 2.5 + 1e-9, "{lip}");
        assert!(lip > 2.4);
    }

    #[test]
    fn cover_gap_is_reported() {
        let k = Polytope::cube(1, 0.0, 1.0);
        let err = build_selection(
            vec![vector![0], vector![1]],
            vec![
                Ball {
                    center: vector![0],
                    radius: 0.4,
                },
                Ball {
                    center: vector![1],
                    radius: 0.4,
                },
            ],
            &k,
            0.1,
        )
        .unwrap_err();
        match err {
            KkmError::CoverGap { point } => assert!((point[0] - 0.5).abs() < 0.11),
            e => panic!("{e:?}"),
        }
    }
}
