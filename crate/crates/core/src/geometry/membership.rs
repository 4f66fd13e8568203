use nalgebra::{DMatrix, DVector};

use super::{Polytope, Vector};
use crate::error::{check_dim, GeometryError};
use crate::lp::{Bound, LinearProgram, Relation};

/// Smallest `‖Σλᵢvᵢ − x‖_∞` over barycentric weights λ, with the minimizing
/// weights. Decided by one linear program.
pub fn linf_residual(p: &Polytope, x: &Vector) -> Result<(f64, Vec<f64>), GeometryError> {
    check_dim(p.dim(), x.dim())?;
    let m = p.len();
    let mut lp = LinearProgram::new();
    let lambda: Vec<usize> = (0..m).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
    let t = lp.add_var(1.0, Bound::NonNegative);
    lp.add_constraint(lambda.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    for c in 0..p.dim() {
        let row: Vec<(usize, f64)> = lambda.iter().zip(p.vertices()).map(|(&j, v)| (j, v[c])).collect();
        let mut upper = row.clone();
        upper.push((t, -1.0));
        lp.add_constraint(upper, Relation::Le, x[c]);
        let mut lower = row;
        lower.push((t, 1.0));
        lp.add_constraint(lower, Relation::Ge, x[c]);
    }
    let sol = lp.minimize()?;
    let weights = sol.x[..m].to_vec();
    // Report the residual of the returned weights rather than the LP's t.
    let point = p.combine(&weights);
    Ok((point.max_abs_diff(x), weights))
}

/// True iff some convex combination of the vertices is within `tol` of `x`
/// in the max norm.
pub fn contains(p: &Polytope, x: &Vector, tol: f64) -> Result<bool, GeometryError> {
    MembershipOracle::new(p).contains(x, tol)
}

/// Membership tester prepared once per polytope.
///
/// When the vertices are affinely independent, barycentric coordinates are
/// unique and membership is decided by a linear solve; only points inside
/// the ambiguity band around the boundary fall through to the LP.
#[derive(Debug, Clone)]
pub struct MembershipOracle<'a> {
    polytope: &'a Polytope,
    simplex: Option<SimplexChart>,
}

#[derive(Debug, Clone)]
struct SimplexChart {
    /// Pseudo-inverse of `[v₁−v₀ … v_m−v₀]`, `(m−1) × d`.
    pinv: DMatrix<f64>,
    /// ℓ₁ norms of the pseudo-inverse rows, plus their sum for λ₀.
    row_l1: Vec<f64>,
    /// Orthogonal projector defect `I − Q·pinv`, used for the affine-hull distance.
    defect: DMatrix<f64>,
}

impl<'a> MembershipOracle<'a> {
    pub fn new(polytope: &'a Polytope) -> Self {
        MembershipOracle {
            polytope,
            simplex: SimplexChart::build(polytope),
        }
    }

    pub fn polytope(&self) -> &Polytope {
        self.polytope
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool, GeometryError> {
        check_dim(self.polytope.dim(), x.dim())?;
        if let Some(chart) = &self.simplex {
            if let Some(answer) = chart.decide(self.polytope, x, tol) {
                return Ok(answer);
            }
        }
        let (residual, _) = linf_residual(self.polytope, x)?;
        Ok(residual <= tol)
    }
}

impl SimplexChart {
    fn build(p: &Polytope) -> Option<Self> {
        let d = p.dim();
        let m = p.len();
        if m == 1 || m > d + 1 {
            return None;
        }
        let v0 = &p.vertices()[0];
        let q = DMatrix::from_fn(d, m - 1, |r, c| p.vertices()[c + 1][r] - v0[r]);
        let svd = q.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax == 0.0 || smin <= 1e-10 * smax {
            return None;
        }
        let pinv = svd.pseudo_inverse(1e-12 * smax).ok()?;
        let mut row_l1: Vec<f64> = (0..m - 1).map(|r| pinv.row(r).iter().map(|a| a.abs()).sum()).collect();
        row_l1.insert(0, row_l1.iter().sum());
        let defect = DMatrix::identity(d, d) - &q * &pinv;
        Some(SimplexChart { pinv, row_l1, defect })
    }

    /// `Some(answer)` when the linear solve is conclusive.
    fn decide(&self, p: &Polytope, x: &Vector, tol: f64) -> Option<bool> {
        let d = p.dim();
        let v0 = &p.vertices()[0];
        let rel = DVector::from_fn(d, |r, _| x[r] - v0[r]);
        let beta = &self.pinv * &rel;
        let lambda0 = 1.0 - beta.sum();
        let off_hull = (&self.defect * &rel).norm();
        let mut lambda = Vec::with_capacity(beta.len() + 1);
        lambda.push(lambda0);
        lambda.extend(beta.iter().copied());

        if lambda.iter().all(|&l| l >= 0.0) {
            let point = p.combine(&lambda);
            if point.max_abs_diff(x) <= tol {
                return Some(true);
            }
        }
        // Any member within tol (max norm) lies within √d·tol of x in the
        // Euclidean norm and moves each λᵢ by at most row_l1[i]·√d·tol.
        let reach = (d as f64).sqrt() * tol;
        if off_hull > reach * (1.0 + 1e-9) {
            return Some(false);
        }
        if lambda.iter().zip(&self.row_l1).any(|(&l, &w)| l < -(w * reach) - 1e-12) {
            return Some(false);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    #[test]
    fn spec_examples() {
        let seg = Polytope::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(contains(&seg, &vector![0.5], 1e-9).unwrap());

        let square = Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(!contains(&square, &vector![2, 0], 1e-9).unwrap());

        let tri = Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(contains(&tri, &vector![0.25, 0.25], 1e-9).unwrap());
        let (res, w) = linf_residual(&tri, &vector![0.25, 0.25]).unwrap();
        assert!(res < 1e-15);
        for (a, b) in w.iter().zip([0.5, 0.25, 0.25]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let seg = Polytope::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            contains(&seg, &vector![0, 0], 1e-9),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fast_path_agrees_with_lp_near_the_boundary() {
        let tri = Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let oracle = MembershipOracle::new(&tri);
        assert!(oracle.simplex.is_some());
        for (x, y) in [
            (0.5, 0.5 + 5e-10),
            (0.5, 0.5 + 2e-9),
            (-5e-10, 0.3),
            (-3e-9, 0.3),
            (1.0, 0.0),
            (0.3, 0.3),
        ] {
            let p = vector![x, y];
            let (res, _) = linf_residual(&tri, &p).unwrap();
            assert_eq!(oracle.contains(&p, 1e-9).unwrap(), res <= 1e-9, "{p}");
        }
    }

    #[test]
    fn lower_dimensional_simplex_in_higher_space() {
        // a segment embedded in R³: points off the line are rejected
        let seg = Polytope::from_rows(vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(contains(&seg, &vector![0.5, 0.5, 0.5], 1e-9).unwrap());
        assert!(!contains(&seg, &vector![0.5, 0.5, 0.6], 1e-9).unwrap());
    }

    #[test]
    fn degenerate_polytopes() {
        let pt = Polytope::point(vector![1, 2]);
        assert!(contains(&pt, &vector![1, 2], 1e-9).unwrap());
        assert!(!contains(&pt, &vector![1, 2.1], 1e-9).unwrap());
        let collinear = Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(contains(&collinear, &vector![1.5, 1.5], 1e-9).unwrap());
        assert!(!contains(&collinear, &vector![1.5, 1.4], 1e-9).unwrap());
    }
}
