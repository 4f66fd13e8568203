//! Fixed points of affine self-maps of polytopes and common fixed points of
//! commuting affine families.
//!
//! `Fix(φ) ∩ X = {x ∈ X : (I − A)x = b}` is itself a polytope, and a map
//! commuting with `φ` sends it into itself. [`common_fixed_point`] follows that
//! induction literally: slice, re-vertexify, check invariance, repeat.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_dim, GeometryError};
use crate::geometry::{linf_residual, MembershipOracle, Polytope, Vector};
use crate::lp::{Bound, LinearProgram, LpError, Relation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixedPointError {
    #[error("matrix must be square with the offset's dimension")]
    MalformedMap,
    #[error("map {map} sends vertex {vertex} to {image}, outside the domain")]
    NotSelfMap { map: usize, vertex: usize, image: Vector },
    #[error("maps {i} and {j} do not commute (defect {defect:.3e})")]
    CommutativityViolated { i: usize, j: usize, defect: f64 },
    #[error("fixed-point slice after map {map} is empty")]
    EmptySlice { map: usize },
    #[error("no fixed point within tolerance after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("family must contain at least one map")]
    EmptyFamily,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `φ(x) = Ax + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(rename = "A")]
    matrix: Vec<Vec<f64>>,
    #[serde(rename = "b")]
    offset: Vector,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vector) -> Result<Self, FixedPointError> {
        let n = offset.dim();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n || r.iter().any(|v| !v.is_finite())) {
            return Err(FixedPointError::MalformedMap);
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn linear(matrix: Vec<Vec<f64>>) -> Result<Self, FixedPointError> {
        let n = matrix.len();
        AffineMap::new(matrix, Vector::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        AffineMap {
            matrix,
            offset: Vector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        let out = self
            .matrix
            .iter()
            .zip(self.offset.as_slice())
            .map(|(row, b)| row.iter().zip(x.as_slice()).map(|(a, c)| a * c).sum::<f64>() + b)
            .collect();
        Vector::new(out).expect("finite map of a finite point")
    }

    /// `‖φ(x) − x‖`.
    pub fn residual(&self, x: &Vector) -> f64 {
        self.apply(x).distance(x)
    }

    /// Composition `x ↦ other(self(x))`.
    pub fn then(&self, other: &AffineMap) -> AffineMap {
        let n = self.dim();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| other.matrix[i][k] * self.matrix[k][j]).sum())
                    .collect()
            })
            .collect();
        let offset = other.apply(&self.offset);
        AffineMap { matrix, offset }
    }

    /// Largest entry of `φψ − ψφ` (matrix and offset parts together).
    pub fn commutator_defect(&self, other: &AffineMap) -> f64 {
        let ab = other.then(self);
        let ba = self.then(other);
        let mut d = ab.offset.max_abs_diff(&ba.offset);
        for (r1, r2) in ab.matrix.iter().zip(&ba.matrix) {
            for (x, y) in r1.iter().zip(r2) {
                d = d.max((x - y).abs());
            }
        }
        d
    }

    fn fixed_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - self.matrix[i][j]);
        (m, DVector::from_column_slice(self.offset.as_slice()))
    }
}

/// Maps certified to send `domain` into itself and to commute pairwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFamily {
    maps: Vec<AffineMap>,
    domain: Polytope,
}

impl AffineFamily {
    pub fn new(maps: Vec<AffineMap>, domain: Polytope, tol: f64) -> Result<Self, FixedPointError> {
        if maps.is_empty() {
            return Err(FixedPointError::EmptyFamily);
        }
        for (i, phi) in maps.iter().enumerate() {
            check_self_map(phi, &domain, tol).map_err(|e| match e {
                FixedPointError::NotSelfMap { vertex, image, .. } => {
                    FixedPointError::NotSelfMap { map: i, vertex, image }
                }
                e => e,
            })?;
        }
        for i in 0..maps.len() {
            for j in i + 1..maps.len() {
                let defect = maps[i].commutator_defect(&maps[j]);
                if defect > tol {
                    return Err(FixedPointError::CommutativityViolated { i, j, defect });
                }
            }
        }
        Ok(AffineFamily { maps, domain })
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }
}

/// Vertex-image containment, which certifies `φ(X) ⊆ X` by affinity.
pub fn check_self_map(phi: &AffineMap, x_set: &Polytope, tol: f64) -> Result<(), FixedPointError> {
    check_dim(x_set.dim(), phi.dim())?;
    let oracle = MembershipOracle::new(x_set);
    for (k, v) in x_set.vertices().iter().enumerate() {
        let image = phi.apply(v);
        if !oracle.contains(&image, tol)? {
            return Err(FixedPointError::NotSelfMap {
                map: 0,
                vertex: k,
                image,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    LinearSolve,
    Averaging,
    LpRefinement,
    Slices,
    JointLp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x: Vector,
    /// `‖φ(x) − x‖` per map, by direct evaluation.
    pub residuals: Vec<f64>,
    pub method: FixedPointMethod,
    pub iterations: usize,
}

impl FixedPoint {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

const AVERAGING_BUDGET: usize = 4_096;
const CHECK_EVERY: usize = 64;
/// Largest condition number of `I − A` accepted by the direct solve.
const MAX_CONDITION: f64 = 1e8;

/// A fixed point of `φ` in `X`.
///
/// Tries, in order: a direct solve of `(I − A)x = b` when that system is well
/// conditioned; Cesàro averages of the orbit of the barycenter; and finally an
/// LP that finds the fixed point nearest the last average.
pub fn affine_fixed_point(phi: &AffineMap, x_set: &Polytope, tol: f64) -> Result<FixedPoint, FixedPointError> {
    check_self_map(phi, x_set, tol)?;
    let done = |x: Vector, method, iterations| FixedPoint {
        residuals: vec![phi.residual(&x)],
        x,
        method,
        iterations,
    };

    let (m, b) = phi.fixed_system();
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin > 0.0 && smax / smin < MAX_CONDITION {
        if let Ok(sol) = svd.solve(&b, 0.0) {
            let x = Vector::new(sol.iter().copied().collect())?;
            if phi.residual(&x) <= tol && linf_residual(x_set, &x)?.0 <= tol {
                return Ok(done(x, FixedPointMethod::LinearSolve, 0));
            }
        }
    }

    let mut orbit = x_set.barycenter();
    let n = phi.dim();
    let mut sum = vec![0.0; n];
    let mut mean = orbit.clone();
    for k in 1..=AVERAGING_BUDGET {
        for (s, c) in sum.iter_mut().zip(orbit.as_slice()) {
            *s += c;
        }
        orbit = phi.apply(&orbit);
        if k % CHECK_EVERY == 0 || k == 1 {
            mean = Vector::new(sum.iter().map(|s| s / k as f64).collect())?;
            if phi.residual(&mean) <= tol {
                return Ok(done(mean, FixedPointMethod::Averaging, k));
            }
        }
    }

    let x = nearest_common_fixed_point(std::slice::from_ref(phi), x_set, &mean)?;
    let fp = done(x, FixedPointMethod::LpRefinement, AVERAGING_BUDGET);
    if fp.max_residual() > tol {
        return Err(FixedPointError::NonConvergence {
            iterations: AVERAGING_BUDGET,
            residual: fp.max_residual(),
        });
    }
    Ok(fp)
}

/// Two LPs over `x = Vλ`: the smallest achievable max-norm residual of
/// `(I − Aᵢ)x = bᵢ` over all maps, then the point attaining it (up to a hair)
/// nearest to `anchor` in the max norm.
fn nearest_common_fixed_point(
    maps: &[AffineMap],
    x_set: &Polytope,
    anchor: &Vector,
) -> Result<Vector, FixedPointError> {
    let n = x_set.dim();
    let verts = x_set.vertices();
    // rows of (I − A)V per map
    let images: Vec<Vec<Vec<f64>>> = maps
        .iter()
        .map(|phi| {
            (0..n)
                .map(|i| {
                    verts
                        .iter()
                        .map(|v| v[i] - phi.matrix[i].iter().zip(v.as_slice()).map(|(a, c)| a * c).sum::<f64>())
                        .collect()
                })
                .collect()
        })
        .collect();

    let build = |lp: &mut LinearProgram, lambda: &[usize], t: usize| {
        lp.add_constraint(lambda.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
        for (phi, rows) in maps.iter().zip(&images) {
            for (i, row) in rows.iter().enumerate() {
                let coeffs: Vec<(usize, f64)> = lambda.iter().zip(row).map(|(&j, &a)| (j, a)).collect();
                let mut upper = coeffs.clone();
                upper.push((t, -1.0));
                lp.add_constraint(upper, Relation::Le, phi.offset[i]);
                let mut lower = coeffs;
                lower.push((t, 1.0));
                lp.add_constraint(lower, Relation::Ge, phi.offset[i]);
            }
        }
    };

    let mut lp = LinearProgram::new();
    let t = lp.add_var(1.0, Bound::NonNegative);
    let lambda: Vec<usize> = (0..verts.len()).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
    build(&mut lp, &lambda, t);
    let best = lp.minimize()?.objective.max(0.0);

    let scale = 1.0 + x_set.diameter();
    let mut lp = LinearProgram::new();
    let s = lp.add_var(1.0, Bound::NonNegative);
    let t = lp.add_var(0.0, Bound::NonNegative);
    let lambda: Vec<usize> = (0..verts.len()).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
    build(&mut lp, &lambda, t);
    lp.add_constraint(vec![(t, 1.0)], Relation::Le, best + 1e-12 * scale);
    for c in 0..n {
        let mut row: Vec<(usize, f64)> = lambda.iter().zip(verts).map(|(&j, v)| (j, v[c])).collect();
        let mut upper = row.clone();
        upper.push((s, -1.0));
        lp.add_constraint(upper, Relation::Le, anchor[c]);
        row.push((s, 1.0));
        lp.add_constraint(row, Relation::Ge, anchor[c]);
    }
    let sol = match lp.minimize() {
        Ok(sol) => sol,
        // The tightened residual bound can be lost to round-off; the first
        // program's solution is still a fixed point.
        Err(LpError::Infeasible { .. }) => {
            let mut lp = LinearProgram::new();
            let t = lp.add_var(1.0, Bound::NonNegative);
            let lambda: Vec<usize> = (0..verts.len()).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
            build(&mut lp, &lambda, t);
            let sol = lp.minimize()?;
            let w: Vec<f64> = lambda.iter().map(|&j| sol.x[j].max(0.0)).collect();
            return Ok(x_set.combine(&w));
        }
        Err(e) => return Err(e.into()),
    };
    let w: Vec<f64> = lambda.iter().map(|&j| sol.x[j].max(0.0)).collect();
    let total: f64 = w.iter().sum();
    Ok(x_set.combine(&w.iter().map(|x| x / total).collect::<Vec<_>>()))
}

/// Largest dimension and vertex count for exact slice re-vertexification.
const SLICE_MAX_DIM: usize = 6;
const SLICE_MAX_VERTICES: usize = 64;
const SLICE_MAX_SUPPORTS: usize = 250_000;

/// `{x ∈ conv(V) : (I − A)x = b}` as a vertex list, or `None` beyond the
/// enumeration caps.
///
/// Every vertex of the slice is `Vλ` for a basic solution of
/// `λ ≥ 0, Σλ = 1, (I − A)Vλ = b`, whose support has independent columns; the
/// supports are enumerated by increasing size.
pub fn fixed_slice(phi: &AffineMap, x_set: &Polytope, tol: f64) -> Result<Option<Vec<Vector>>, FixedPointError> {
    let n = x_set.dim();
    let m = x_set.len();
    if n > SLICE_MAX_DIM || m > SLICE_MAX_VERTICES {
        return Ok(None);
    }
    let (mat, b) = phi.fixed_system();
    let verts = DMatrix::from_fn(n, m, |i, j| x_set.vertices()[j][i]);
    let images = &mat * &verts;
    // The constraint system has n + 1 rows, so basic supports have at most
    // n + 1 columns.
    let max_support = (n + 1).min(m);
    let mut total = 0usize;
    for s in 1..=max_support {
        total = total.saturating_add(binomial(m, s));
    }
    if total > SLICE_MAX_SUPPORTS {
        return Ok(None);
    }
    let scale = 1.0 + images.abs().max() + b.abs().max();
    let supports: Vec<Vec<usize>> = (1..=max_support).flat_map(|s| combinations(m, s)).collect();
    let candidates: Vec<Option<Vector>> = supports
        .par_iter()
        .map(|support| {
            let s = support.len();
            let sys = DMatrix::from_fn(n + 1, s, |i, j| if i < n { images[(i, support[j])] } else { 1.0 });
            let mut rhs = DVector::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&b);
            rhs[n] = 1.0;
            let svd = sys.clone().svd(true, true);
            let smax = svd.singular_values.max();
            if svd.singular_values.min() <= 1e-10 * smax.max(1.0) {
                return None;
            }
            let lambda = svd.solve(&rhs, 0.0).ok()?;
            if (&sys * &lambda - &rhs).amax() > 1e-9 * scale || lambda.min() < -1e-10 {
                return None;
            }
            let mut x = vec![0.0; n];
            for (j, &col) in support.iter().enumerate() {
                let w = lambda[j].max(0.0);
                for (xi, v) in x.iter_mut().zip(x_set.vertices()[col].as_slice()) {
                    *xi += w * v;
                }
            }
            Vector::new(x).ok()
        })
        .collect();
    let mut out: Vec<Vector> = Vec::new();
    for c in candidates.into_iter().flatten() {
        if !out.iter().any(|p| p.max_abs_diff(&c) <= tol.max(1e-12)) {
            out.push(c);
        }
    }
    // Basic solutions can map to non-extreme points; drop those inside the
    // hull of the rest.
    let mut i = 0;
    while out.len() > 1 && i < out.len() {
        let others: Vec<Vector> = out
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        if linf_residual(&Polytope::new(others)?, &out[i])?.0 <= 1e-12 * scale {
            out.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(Some(out))
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

fn combinations(m: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        out.push(idx.clone());
        let mut i = s;
        while i > 0 && idx[i - 1] == m - s + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// A point fixed by every map of the family.
///
/// Slices `Q₀ = X`, `Q_k = Fix(φ_k) ∩ Q_{k−1}` are re-vertexified one map at a
/// time; before slicing by `φ_{k+1}` the code checks that it maps `Q_k` into
/// itself, as commutativity guarantees. The barycenter of the last slice is
/// returned. Beyond the enumeration caps the whole intersection is found by
/// one joint LP instead.
pub fn common_fixed_point(family: &AffineFamily, tol: f64) -> Result<FixedPoint, FixedPointError> {
    let maps = &family.maps;
    let mut slice = family.domain.clone();
    let mut sliced = true;
    for (k, phi) in maps.iter().enumerate() {
        if k > 0 {
            let oracle = MembershipOracle::new(&slice);
            for v in slice.vertices() {
                let image = phi.apply(v);
                if !oracle.contains(&image, tol)? {
                    let defect = linf_residual(&slice, &image)?.0;
                    return Err(FixedPointError::CommutativityViolated { i: k - 1, j: k, defect });
                }
            }
        }
        match fixed_slice(phi, &slice, tol)? {
            Some(verts) if verts.is_empty() => return Err(FixedPointError::EmptySlice { map: k }),
            Some(verts) => slice = Polytope::new(verts)?,
            None => {
                sliced = false;
                break;
            }
        }
    }

    let residuals_at = |x: &Vector| maps.iter().map(|phi| phi.residual(x)).collect::<Vec<_>>();
    if sliced {
        let x = slice.barycenter();
        let residuals = residuals_at(&x);
        if residuals.iter().all(|&r| r <= tol) {
            return Ok(FixedPoint {
                x,
                residuals,
                method: FixedPointMethod::Slices,
                iterations: maps.len(),
            });
        }
    }
    let anchor = family.domain.barycenter();
    let x = nearest_common_fixed_point(maps, &family.domain, &anchor)?;
    let residuals = residuals_at(&x);
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > tol {
        return Err(FixedPointError::NonConvergence {
            iterations: 0,
            residual: worst,
        });
    }
    Ok(FixedPoint {
        x,
        residuals,
        method: FixedPointMethod::JointLp,
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::contains;
    use crate::vector;

    fn stochastic_transpose(p: &[[f64; 3]; 3]) -> AffineMap {
        AffineMap::linear((0..3).map(|i| (0..3).map(|j| p[j][i]).collect()).collect()).unwrap()
    }

    #[test]
    fn rotation_fixes_the_center() {
        let rot = AffineMap::linear(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let fp = affine_fixed_point(&rot, &Polytope::cube(2, -1.0, 1.0), 1e-9).unwrap();
        assert!(fp.x.norm() < 1e-12);
        assert_eq!(fp.method, FixedPointMethod::LinearSolve);
    }

    #[test]
    fn identity_returns_the_barycenter() {
        let tri = Polytope::from_rows(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let fp = affine_fixed_point(&AffineMap::identity(2), &tri, 1e-9).unwrap();
        assert_eq!(fp.x, vector![1, 1]);
    }

    #[test]
    fn stationary_distribution() {
        let p = [[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]];
        let fp = affine_fixed_point(&stochastic_transpose(&p), &Polytope::standard_simplex(3), 1e-10).unwrap();
        assert!(fp.x.max_abs_diff(&vector![0.25, 0.5, 0.25]) < 1e-9, "{}", fp.x);
    }

    #[test]
    fn periodic_chain_needs_averaging() {
        // The orbit oscillates forever; its averages converge.
        let swap = AffineMap::linear(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let seg = Polytope::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let fp = affine_fixed_point(&swap, &seg, 1e-12).unwrap();
        assert!(fp.x.max_abs_diff(&vector![0.5, 0.5]) < 1e-12);
    }

    #[test]
    fn not_a_self_map() {
        let shift = AffineMap::new(vec![vec![1.0]], vector![0.5]).unwrap();
        match affine_fixed_point(&shift, &Polytope::cube(1, 0.0, 1.0), 1e-9).unwrap_err() {
            FixedPointError::NotSelfMap { vertex, image, .. } => {
                assert_eq!(vertex, 1);
                assert_eq!(image, vector![1.5]);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn doubly_stochastic_pair_fixes_uniform() {
        let cyc = stochastic_transpose(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]);
        let lazy = stochastic_transpose(&[[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]]);
        let fam = AffineFamily::new(vec![cyc, lazy], Polytope::standard_simplex(3), 1e-12).unwrap();
        let fp = common_fixed_point(&fam, 1e-10).unwrap();
        assert!(fp.x.max_abs_diff(&vector![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]) < 1e-12);
        assert_eq!(fp.method, FixedPointMethod::Slices);
    }

    #[test]
    fn identity_in_a_family_is_harmless() {
        let rot = AffineMap::new(vec![vec![0.0, -1.0], vec![1.0, 0.0]], vector![1, 1]).unwrap();
        let sq = Polytope::from_rows(vec![vec![-2.0, -1.0], vec![2.0, -1.0], vec![2.0, 3.0], vec![-2.0, 3.0]]).unwrap();
        let fam = AffineFamily::new(vec![AffineMap::identity(2), rot.clone()], sq, 1e-12).unwrap();
        let fp = common_fixed_point(&fam, 1e-10).unwrap();
        // center of rotation: (0, 1)
        assert!(fp.x.max_abs_diff(&vector![0, 1]) < 1e-10);
    }

    #[test]
    fn non_commuting_family_is_rejected() {
        let a = AffineMap::linear(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = AffineMap::linear(vec![vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let err = AffineFamily::new(vec![a, b], Polytope::cube(2, 0.0, 1.0), 1e-9).unwrap_err();
        assert!(matches!(err, FixedPointError::CommutativityViolated { i: 0, j: 1, .. }));
    }

    #[test]
    fn slice_of_a_square_by_a_projection() {
        // φ(x, y) = (x, 0.5): fixed set is the horizontal midline
        let phi = AffineMap::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vector![0, 0.5]).unwrap();
        let verts = fixed_slice(&phi, &Polytope::cube(2, 0.0, 1.0), 1e-12).unwrap().unwrap();
        assert_eq!(verts.len(), 2);
        for v in &verts {
            assert!((v[1] - 0.5).abs() < 1e-12);
        }
        let seg = Polytope::new(verts).unwrap();
        assert!(contains(&seg, &vector![0, 0.5], 1e-12).unwrap());
        assert!(contains(&seg, &vector![1, 0.5], 1e-12).unwrap());
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
        assert_eq!(binomial(64, 7), 621_216_192);
    }
}
