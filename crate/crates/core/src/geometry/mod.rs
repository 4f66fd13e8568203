//! V-representation polytopes and the primitives everything else is built on:
//! membership, Euclidean projection, Minkowski difference and linear
//! maximization.
//!
//! All comparisons use one absolute tolerance supplied by the caller
//! ([`DEFAULT_TOL`] unless configured otherwise); coordinates are assumed to
//! be of order one.

mod grid;
mod membership;
mod projection;
mod vector;

use serde::{Deserialize, Serialize};

pub use grid::{barycentric_grid, grid_size, homothety, polytope_grid, random_barycentric, Sampler};
pub use membership::{contains, linf_residual, MembershipOracle};
pub use projection::{project, Projection};
pub use vector::Vector;

use crate::error::{check_dim, GeometryError};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Convex hull of a nonempty finite vertex list of uniform dimension.
/// Redundant (non-extreme or repeated) vertices are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct Polytope {
    vertices: Vec<Vector>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    vertices: Vec<Vector>,
}

impl TryFrom<PolytopeRepr> for Polytope {
    type Error = GeometryError;

    fn try_from(r: PolytopeRepr) -> Result<Self, Self::Error> {
        Polytope::new(r.vertices)
    }
}

impl From<Polytope> for PolytopeRepr {
    fn from(p: Polytope) -> Self {
        PolytopeRepr { vertices: p.vertices }
    }
}

impl Polytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self, GeometryError> {
        let first = vertices.first().ok_or(GeometryError::EmptyPolytope)?;
        let dim = first.dim();
        for v in &vertices {
            check_dim(dim, v.dim())?;
        }
        Ok(Polytope { vertices })
    }

    /// Builds a polytope from raw coordinate rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let vertices = rows.into_iter().map(Vector::new).collect::<Result<Vec<_>, _>>()?;
        Polytope::new(vertices)
    }

    pub fn point(p: Vector) -> Self {
        Polytope { vertices: vec![p] }
    }

    pub fn segment(a: Vector, b: Vector) -> Result<Self, GeometryError> {
        Polytope::new(vec![a, b])
    }

    /// Standard simplex `conv{e_1, …, e_n}` in Rⁿ.
    pub fn standard_simplex(n: usize) -> Self {
        Polytope {
            vertices: (0..n.max(1)).map(|i| Vector::basis(n.max(1), i)).collect(),
        }
    }

    /// Axis-aligned box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        let dim = dim.max(1);
        let vertices = (0..1usize << dim)
            .map(|mask| Vector::from_raw((0..dim).map(|i| if mask >> i & 1 == 1 { hi } else { lo }).collect()))
            .collect();
        Polytope { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertex average; always a member.
    pub fn barycenter(&self) -> Vector {
        let n = self.vertices.len() as f64;
        let mut acc = vec![0.0; self.dim()];
        for v in &self.vertices {
            for (a, c) in acc.iter_mut().zip(v.as_slice()) {
                *a += c;
            }
        }
        Vector::from_raw(acc.into_iter().map(|a| a / n).collect())
    }

    /// Convex combination `Σ wᵢ vᵢ`; `weights` must match the vertex count.
    pub fn combine(&self, weights: &[f64]) -> Vector {
        debug_assert_eq!(weights.len(), self.vertices.len());
        let mut acc = vec![0.0; self.dim()];
        for (w, v) in weights.iter().zip(&self.vertices) {
            if *w != 0.0 {
                for (a, c) in acc.iter_mut().zip(v.as_slice()) {
                    *a += w * c;
                }
            }
        }
        Vector::from_raw(acc)
    }

    /// Per-coordinate `(min, max)` over the vertices.
    pub fn bounding_box(&self) -> (Vector, Vector) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for i in 0..d {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (Vector::from_raw(lo), Vector::from_raw(hi))
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }

    pub fn translate(&self, shift: &Vector) -> Polytope {
        Polytope {
            vertices: self.vertices.iter().map(|v| v + shift).collect(),
        }
    }

    /// Applies `f` to every vertex. The caller is responsible for `f` being
    /// affine when the result is read as the image polytope.
    pub fn map_vertices(&self, f: impl Fn(&Vector) -> Vector) -> Result<Polytope, GeometryError> {
        Polytope::new(self.vertices.iter().map(f).collect())
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool, GeometryError> {
        contains(self, x, tol)
    }

    pub fn project(&self, x: &Vector, tol: f64) -> Result<Projection, GeometryError> {
        project(self, x, tol)
    }
}

/// Affine hyperplane `{ z : ⟨normal, z⟩ = offset }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vector,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self, GeometryError> {
        if normal.norm() == 0.0 {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(Hyperplane { normal, offset })
    }

    /// Signed value `⟨normal, z⟩ − offset`.
    pub fn evaluate(&self, z: &Vector) -> f64 {
        self.normal.dot(z) - self.offset
    }
}

/// Convex-combination weights tied to the vertex list of some polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycentricCoords {
    pub weights: Vec<f64>,
}

impl BarycentricCoords {
    pub fn new(weights: Vec<f64>, tol: f64) -> Option<Self> {
        let sum: f64 = weights.iter().sum();
        let ok = !weights.is_empty() && weights.iter().all(|w| w.is_finite() && *w >= -tol) && (sum - 1.0).abs() <= tol;
        ok.then_some(BarycentricCoords { weights })
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        BarycentricCoords { weights }
    }

    pub fn uniform(n: usize) -> Self {
        BarycentricCoords {
            weights: vec![1.0 / n as f64; n],
        }
    }
}

/// `{ c − k : c ∈ vertices(C), k ∈ vertices(K) }`, whose hull is `conv C − conv K`.
pub fn minkowski_difference(c: &Polytope, k: &Polytope) -> Result<Polytope, GeometryError> {
    check_dim(c.dim(), k.dim())?;
    let mut vertices = Vec::with_capacity(c.len() * k.len());
    for a in c.vertices() {
        for b in k.vertices() {
            vertices.push(a - b);
        }
    }
    Polytope::new(vertices)
}

/// Vertex attaining `max ⟨u, v⟩`, lowest index on ties. The maximum over the
/// vertices equals the maximum over the hull.
pub fn linear_maximize(p: &Polytope, u: &Vector) -> Result<(usize, Vector, f64), GeometryError> {
    check_dim(p.dim(), u.dim())?;
    let mut best = 0;
    let mut best_val = u.dot(&p.vertices()[0]);
    for (i, v) in p.vertices().iter().enumerate().skip(1) {
        let val = u.dot(v);
        if val > best_val {
            best = i;
            best_val = val;
        }
    }
    Ok((best, p.vertices()[best].clone(), best_val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    fn unit_square() -> Polytope {
        Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert_eq!(Vector::new(vec![]), Err(GeometryError::EmptyVector));
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(GeometryError::NonFinite { index: 1 })
        );
        assert_eq!(Polytope::new(vec![]), Err(GeometryError::EmptyPolytope));
        assert!(matches!(
            Polytope::from_rows(vec![vec![0.0], vec![0.0, 1.0]]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
        assert_eq!(Hyperplane::new(vector![0, 0], 1.0), Err(GeometryError::ZeroNormal));
    }

    #[test]
    fn minkowski_difference_examples() {
        let c = Polytope::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let k = Polytope::point(vector![0]);
        let d = minkowski_difference(&c, &k).unwrap();
        assert_eq!(d.vertices(), &[vector![0], vector![1]]);

        let c = Polytope::from_rows(vec![vec![2.0], vec![3.0]]).unwrap();
        let k = Polytope::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let d = minkowski_difference(&c, &k).unwrap();
        let mut coords: Vec<f64> = d.vertices().iter().map(|v| v[0]).collect();
        coords.sort_by(f64::total_cmp);
        assert_eq!(coords, vec![1.0, 2.0, 2.0, 3.0]);
        let (lo, hi) = d.bounding_box();
        assert_eq!((lo[0], hi[0]), (1.0, 3.0));

        let sq = unit_square();
        let d = minkowski_difference(&sq, &sq).unwrap();
        let (lo, hi) = d.bounding_box();
        assert_eq!(lo, vector![-1, -1]);
        assert_eq!(hi, vector![1, 1]);
        assert!(d.contains(&vector![0, 0], DEFAULT_TOL).unwrap());
    }

    #[test]
    fn linear_maximize_examples() {
        let (_, v, val) = linear_maximize(&unit_square(), &vector![1, 1]).unwrap();
        assert_eq!(v, vector![1, 1]);
        assert_eq!(val, 2.0);

        let simplex = Polytope::standard_simplex(3);
        let (i, v, val) = linear_maximize(&simplex, &vector![0, 0, 1]).unwrap();
        assert_eq!((i, val), (2, 1.0));
        assert_eq!(v, vector![0, 0, 1]);

        // ties resolve to the lowest index
        let (i, _, _) = linear_maximize(&unit_square(), &vector![1, 0]).unwrap();
        assert_eq!(i, 1);
        assert!(linear_maximize(&unit_square(), &vector![1, 0, 0]).is_err());
    }

    #[test]
    fn cube_and_barycenter() {
        let c = Polytope::cube(3, -1.0, 1.0);
        assert_eq!(c.len(), 8);
        assert_eq!(c.barycenter(), vector![0, 0, 0]);
        assert!((c.diameter() - 12f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn serde_validates_on_the_way_in() {
        let p: Polytope = serde_json::from_str(r#"{"vertices": [[0, 1], [2, 3]]}"#).unwrap();
        assert_eq!(p.len(), 2);
        assert!(serde_json::from_str::<Polytope>(r#"{"vertices": []}"#).is_err());
        assert!(serde_json::from_str::<Polytope>(r#"{"vertices": [[0], [1, 2]]}"#).is_err());
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"vertices":[[0.0,1.0],[2.0,3.0]]}"#
        );
    }
}
