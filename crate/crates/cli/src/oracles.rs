//! Reference computations that share no code with the library routines they
//! check: a third-party LP solver, exhaustive face enumeration for distances,
//! projections and convex quadratics, and a direct linear solve for
//! stationary vectors.

use kkmkit_core::{Polytope, Vector};
use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};

fn solve(problem: &Problem) -> Option<microlp::Solution> {
    problem.solve().ok()?.into_solution().ok()
}

/// A point in every member of the family, by an LP feasibility problem.
pub fn lp_common_point(family: &[Polytope]) -> Option<Vector> {
    let d = family.first()?.dim();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let weights: Vec<Vec<Variable>> = family
        .iter()
        .map(|c| {
            c.vertices()
                .iter()
                .map(|_| p.add_var(0.0, (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for w in &weights {
        let terms: Vec<(Variable, f64)> = w.iter().map(|&v| (v, 1.0)).collect();
        p.add_constraint(terms.as_slice(), ComparisonOp::Eq, 1.0);
    }
    for (k, c) in family.iter().enumerate().skip(1) {
        for coord in 0..d {
            let mut terms: Vec<(Variable, f64)> = Vec::new();
            for (&v, vert) in weights[k].iter().zip(c.vertices()) {
                terms.push((v, vert[coord]));
            }
            for (&v, vert) in weights[0].iter().zip(family[0].vertices()) {
                terms.push((v, -vert[coord]));
            }
            p.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
        }
    }
    let sol = solve(&p)?;
    let w: Vec<f64> = weights[0].iter().map(|&v| sol.var_value(v)).collect();
    Some(family[0].combine(&w))
}

/// `min_λ ‖Σ λᵢvᵢ − x‖∞` over the simplex, i.e. the sup-norm distance from
/// `x` to the hull.
pub fn linf_distance(p: &Polytope, x: &Vector) -> Option<f64> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let lam: Vec<Variable> = p
        .vertices()
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let sum: Vec<(Variable, f64)> = lam.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(sum.as_slice(), ComparisonOp::Eq, 1.0);
    for coord in 0..p.dim() {
        let mut terms: Vec<(Variable, f64)> = lam.iter().zip(p.vertices()).map(|(&v, w)| (v, w[coord])).collect();
        terms.push((t, -1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Le, x[coord]);
        terms.pop();
        terms.push((t, 1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, x[coord]);
    }
    Some(solve(&lp)?.objective())
}

/// Value of the zero-sum game where the row player maximizes `xᵀMy`.
pub fn lp_game_value(m: &[Vec<f64>]) -> Option<f64> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let v = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let x: Vec<Variable> = m.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let sum: Vec<(Variable, f64)> = x.iter().map(|&xi| (xi, 1.0)).collect();
    lp.add_constraint(sum.as_slice(), ComparisonOp::Eq, 1.0);
    for j in 0..m.first()?.len() {
        let mut terms: Vec<(Variable, f64)> = x.iter().zip(m).map(|(&xi, row)| (xi, row[j])).collect();
        terms.push((v, -1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, 0.0);
    }
    Some(solve(&lp)?.objective())
}

/// `dist(conv K, conv C)²`, i.e. the product-simplex QP `min ‖Kα − Cβ‖²`,
/// solved exactly by enumerating faces of the product. Some
/// nearest pair lies in the relative interiors of simplices whose combined
/// edge directions are linearly independent (otherwise slide along the
/// dependency until a weight vanishes), and there it is the unique affine
/// least-squares solution; every candidate with nonnegative weights is a
/// feasible pair, so the smallest one is the distance.
pub fn polytope_distance_sq(k: &Polytope, c: &Polytope) -> f64 {
    let (kv, cv) = (k.vertices(), c.vertices());
    assert!(
        kv.len() <= 12 && cv.len() <= 12,
        "enumeration is exponential in the vertex count"
    );
    let d = k.dim();
    let mut best = f64::INFINITY;
    for mk in 1u32..(1 << kv.len()) {
        let sk: Vec<&Vector> = subset(kv, mk);
        if sk.len() > d + 1 {
            continue;
        }
        for mc in 1u32..(1 << cv.len()) {
            let sc: Vec<&Vector> = subset(cv, mc);
            if sk.len() + sc.len() > d + 2 {
                continue;
            }
            if let Some(v) = affine_pair_distance_sq(&sk, &sc) {
                best = best.min(v);
            }
        }
    }
    best
}

fn subset(verts: &[Vector], mask: u32) -> Vec<&Vector> {
    (0..verts.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| &verts[i])
        .collect()
}

fn affine_pair_distance_sq(sk: &[&Vector], sc: &[&Vector]) -> Option<f64> {
    let d = sk[0].dim();
    let (a, b) = (sk.len() - 1, sc.len() - 1);
    let base = DVector::from_fn(d, |r, _| sk[0][r] - sc[0][r]);
    if a + b == 0 {
        return Some(base.norm_squared());
    }
    let m = DMatrix::from_fn(d, a + b, |r, j| {
        if j < a {
            sk[j + 1][r] - sk[0][r]
        } else {
            sc[0][r] - sc[j - a + 1][r]
        }
    });
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-10 * sv.max().max(1e-300) {
        return None;
    }
    let coef = svd.solve(&(-&base), 0.0).ok()?;
    let (mu, nu) = (coef.rows(0, a), coef.rows(a, b));
    let tol = -1e-12;
    if mu.iter().any(|&x| x < tol) || nu.iter().any(|&x| x < tol) || 1.0 - mu.sum() < tol || 1.0 - nu.sum() < tol {
        return None;
    }
    Some((base + m * coef).norm_squared())
}

/// `argmin ½xᵀPx + qᵀx` over `conv X` for positive definite `P`, by
/// enumerating affinely independent vertex subsets: the minimizer lies in the
/// relative interior of some such simplex and minimizes over its affine hull,
/// so it is the best of the candidates whose affine minimizer lands inside
/// their own simplex. Exponential; small inputs only.
pub fn brute_force_quadratic(p: &[Vec<f64>], q: &[f64], x_set: &Polytope) -> Vector {
    let verts = x_set.vertices();
    let m = verts.len();
    assert!(m <= 16, "brute-force enumeration is exponential in the vertex count");
    let d = x_set.dim();
    let pm = DMatrix::from_fn(d, d, |i, j| 0.5 * (p[i][j] + p[j][i]));
    let qv = DVector::from_column_slice(q);
    let objective = |x: &DVector<f64>| 0.5 * x.dot(&(&pm * x)) + qv.dot(x);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 1u32..(1 << m) {
        let subset: Vec<&Vector> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &verts[i]).collect();
        if subset.len() > d + 1 {
            continue;
        }
        let Some(w) = affine_minimizer_weights(&pm, &qv, &subset) else {
            continue;
        };
        if w.iter().any(|&wi| wi < -1e-12) {
            continue;
        }
        let x = subset.iter().zip(&w).fold(DVector::zeros(d), |acc, (v, wi)| {
            acc + DVector::from_column_slice(v.as_slice()) * wi.max(0.0)
        });
        let val = objective(&x);
        if best.as_ref().map_or(true, |(b, _)| val < *b) {
            best = Some((val, x));
        }
    }
    let x = best.expect("singletons always qualify").1;
    Vector::new(x.iter().copied().collect()).expect("finite combination")
}

/// Euclidean projection: the quadratic `½‖z‖² − ⟨x, z⟩`.
pub fn brute_force_projection(p: &Polytope, x: &Vector) -> Vector {
    let d = p.dim();
    let eye: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let neg: Vec<f64> = x.as_slice().iter().map(|c| -c).collect();
    brute_force_quadratic(&eye, &neg, p)
}

/// Barycentric weights of the minimizer of the quadratic over the affine hull
/// of `pts`, or `None` when the points are affinely dependent.
fn affine_minimizer_weights(pm: &DMatrix<f64>, qv: &DVector<f64>, pts: &[&Vector]) -> Option<Vec<f64>> {
    let k = pts.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let d = qv.len();
    let base = DVector::from_column_slice(pts[0].as_slice());
    let e = DMatrix::from_fn(d, k - 1, |r, c| pts[c + 1][r] - base[r]);
    let edge_sv = e.clone().svd(false, false).singular_values;
    if edge_sv.min() <= 1e-10 * edge_sv.max().max(1e-300) {
        return None;
    }
    let h = e.transpose() * pm * &e;
    let rhs = -(e.transpose() * (pm * &base + qv));
    let mu = h.lu().solve(&rhs)?;
    let mut w = vec![1.0 - mu.sum()];
    w.extend(mu.iter());
    Some(w)
}

/// Stationary vector `π = πT` of a row-stochastic matrix with a single
/// recurrent class: one balance equation replaced by `Σπ = 1`.
pub fn stationary_vector(t: &[Vec<f64>]) -> Option<Vector> {
    let n = t.len();
    let mut a = DMatrix::from_fn(n, n, |i, j| t[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b)?;
    Vector::new(pi.iter().copied().collect()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use kkmkit_core::vector;

    #[test]
    fn lp_finds_the_overlap_of_two_segments() {
        let a = Polytope::segment(vector![0], vector![2]).unwrap();
        let b = Polytope::segment(vector![1.5], vector![3]).unwrap();
        let x = lp_common_point(&[a.clone(), b]).unwrap();
        assert!(x[0] >= 1.5 - 1e-12 && x[0] <= 2.0 + 1e-12);
        let far = Polytope::point(vector![5]);
        assert!(lp_common_point(&[a, far]).is_none());
    }

    #[test]
    fn game_values() {
        assert!(lp_game_value(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap().abs() < 1e-12);
        assert!((lp_game_value(&[vec![3.0, 1.0], vec![0.0, 2.0]]).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn distance_between_unit_squares() {
        let a = Polytope::cube(2, 0.0, 1.0);
        let b = Polytope::cube(2, 3.0, 4.0);
        assert!((polytope_distance_sq(&a, &b) - 8.0).abs() < 1e-12);
        let tri = Polytope::new(vec![vector![0, 0], vector![2, 0], vector![1, 1]]).unwrap();
        let seg = Polytope::segment(vector![-1, 3], vector![3, 3]).unwrap();
        assert!((polytope_distance_sq(&tri, &seg) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_a_triangle() {
        let t = Polytope::standard_simplex(3);
        let p = brute_force_projection(&t, &vector![1, 1, -1]);
        assert!(p.max_abs_diff(&vector![0.5, 0.5, 0]) < 1e-12);
        assert!(linf_distance(&t, &p).unwrap() < 1e-12);
    }

    #[test]
    fn quadratic_brute_force_inside_and_on_the_boundary() {
        let sq = Polytope::cube(2, -1.0, 1.0);
        let p = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let x = brute_force_quadratic(&p, &[-1.0, 0.0], &sq);
        assert!(x.max_abs_diff(&vector![0.5, 0]) < 1e-12);
        let x = brute_force_quadratic(&p, &[-4.0, 0.0], &sq);
        assert!(x.max_abs_diff(&vector![1, 0]) < 1e-12);
    }

    #[test]
    fn two_state_chain() {
        let pi = stationary_vector(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        assert!(pi.max_abs_diff(&vector![5.0 / 6.0, 1.0 / 6.0]) < 1e-14);
    }
}
