use nalgebra::{DMatrix, DVector};

use super::{BarycentricCoords, Polytope, Vector};
use crate::error::{check_dim, GeometryError};

/// Euclidean projection of a point onto a polytope.
#[derive(Debug, Clone)]
pub struct Projection {
    pub point: Vector,
    pub distance: f64,
    /// Weights over the polytope's vertices reproducing `point`.
    pub weights: BarycentricCoords,
    /// Final conditional-gradient gap `max_z ⟨x − y, z − y⟩` over vertices z.
    pub gap: f64,
    pub iterations: usize,
}

/// Projects `x` onto `conv(P)`.
///
/// Minimizes `‖x − Vλ‖²` over the standard simplex with a conditional-gradient
/// method whose steps are fully corrective: each linear-minimization vertex is
/// added to an active set, and the iterate moves to the affine minimizer of
/// the active set, shrinking the set whenever that minimizer leaves the
/// simplex (the minimum-norm-point scheme). Terminates when the gap drops
/// below `min(tol, 1e-12·scale²)` or the selected vertex is already active.
pub fn project(p: &Polytope, x: &Vector, tol: f64) -> Result<Projection, GeometryError> {
    check_dim(p.dim(), x.dim())?;
    let pts: Vec<Vec<f64>> = p
        .vertices()
        .iter()
        .map(|v| v.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect())
        .collect();
    let m = pts.len();
    let d = p.dim();
    let scale = pts.iter().map(|q| norm2(q)).fold(1.0_f64, f64::max);
    let gap_tol = tol.min(1e-12 * scale);
    let cap = iteration_cap(d, m, tol);

    let start = (0..m)
        .min_by(|&a, &b| norm2(&pts[a]).total_cmp(&norm2(&pts[b])))
        .expect("polytope is nonempty");
    let mut active = vec![start];
    let mut w = vec![1.0];
    let mut y = pts[start].clone();
    let mut iterations = 0;
    let mut gap;

    loop {
        let (j, min_dot) = (0..m)
            .map(|i| (i, dot(&y, &pts[i])))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        gap = norm2(&y) - min_dot;
        if gap <= gap_tol || active.contains(&j) {
            break;
        }
        if iterations >= cap {
            return Err(GeometryError::ProjectionNonConvergence { iterations, gap });
        }
        iterations += 1;
        active.push(j);
        w.push(0.0);

        // Corrective cycles: move toward the affine minimizer of the active set.
        loop {
            let alpha = affine_minimizer(&pts, &active);
            if alpha.iter().all(|&a| a > 1e-14) {
                w = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= 1e-14 && wi - ai > 0.0 {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = theta * ai + (1.0 - theta) * *wi;
            }
            // Drop the coordinates that reached the boundary (at least one).
            let min_idx = (0..w.len())
                .min_by(|&a, &b| w[a].total_cmp(&w[b]))
                .expect("active set is nonempty");
            let mut keep_active = Vec::with_capacity(active.len());
            let mut keep_w = Vec::with_capacity(w.len());
            for (k, (&idx, &wk)) in active.iter().zip(&w).enumerate() {
                if k != min_idx && wk > 1e-14 {
                    keep_active.push(idx);
                    keep_w.push(wk);
                }
            }
            if keep_active.is_empty() {
                keep_active.push(active[min_idx]);
                keep_w.push(1.0);
            }
            let s: f64 = keep_w.iter().sum();
            keep_w.iter_mut().for_each(|v| *v /= s);
            active = keep_active;
            w = keep_w;
            if active.len() == 1 {
                break;
            }
        }
        y = combine(&pts, &active, &w);
    }

    let mut weights = vec![0.0; m];
    for (&idx, &wk) in active.iter().zip(&w) {
        weights[idx] += wk;
    }
    let point = p.combine(&weights);
    let mut distance = point.distance(x);
    let point = if distance <= tol {
        distance = 0.0;
        x.clone()
    } else {
        point
    };
    Ok(Projection {
        point,
        distance,
        weights: BarycentricCoords { weights },
        gap: gap.max(0.0),
        iterations,
    })
}

/// `10 · dim · |V| · ln(1/tol)`, at least 100.
fn iteration_cap(dim: usize, m: usize, tol: f64) -> usize {
    let log = (1.0 / tol.clamp(1e-300, 0.5)).ln();
    ((10.0 * dim as f64 * m as f64 * log).ceil() as usize).max(100)
}

/// Weights (summing to one) of the point of minimum norm in the affine hull
/// of the active points.
fn affine_minimizer(pts: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let s = active.len();
    if s == 1 {
        return vec![1.0];
    }
    let d = pts[0].len();
    let base = &pts[active[0]];
    let q = DMatrix::from_fn(d, s - 1, |r, c| pts[active[c + 1]][r] - base[r]);
    let rhs = DVector::from_fn(d, |r, _| -base[r]);
    let svd = q.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1e-300);
    let beta = svd.solve(&rhs, eps).unwrap_or_else(|_| DVector::zeros(s - 1));
    let mut alpha = Vec::with_capacity(s);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    alpha
}

fn combine(pts: &[Vec<f64>], active: &[usize], w: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; pts[0].len()];
    for (&idx, &wk) in active.iter().zip(w) {
        for (yi, pi) in y.iter_mut().zip(&pts[idx]) {
            *yi += wk * pi;
        }
    }
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    fn unit_square() -> Polytope {
        Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn face_projection() {
        let pr = project(&unit_square(), &vector![2, 0.5], 1e-9).unwrap();
        assert!(pr.point.distance(&vector![1, 0.5]) < 1e-12);
        assert!((pr.distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_projection_matches_closed_form() {
        let seg = Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let pr = project(&seg, &vector![1, 0], 1e-9).unwrap();
        assert!(pr.point.distance(&vector![0.5, 0.5]) < 1e-12);
        assert!((pr.distance - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn members_project_to_themselves() {
        let sq = unit_square();
        for v in sq.vertices() {
            let pr = project(&sq, v, 1e-9).unwrap();
            assert_eq!(&pr.point, v);
            assert_eq!(pr.distance, 0.0);
        }
        let pr = project(&sq, &vector![0.3, 0.6], 1e-9).unwrap();
        assert_eq!(pr.point, vector![0.3, 0.6]);
    }

    #[test]
    fn degenerate_vertex_sets() {
        let collinear =
            Polytope::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let pr = project(&collinear, &vector![1.5, 3], 1e-9).unwrap();
        assert!(pr.point.distance(&vector![1.5, 0]) < 1e-12);
        let pt = Polytope::point(vector![1, 1]);
        let pr = project(&pt, &vector![4, 5], 1e-9).unwrap();
        assert_eq!(pr.point, vector![1, 1]);
        assert!((pr.distance - 5.0).abs() < 1e-12);
    }

    #[test]
    fn weights_reproduce_the_point() {
        let p = Polytope::from_rows(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.2],
            vec![0.0, 1.0, -0.3],
            vec![0.3, 0.2, 1.0],
            vec![0.1, 0.1, 0.1],
        ])
        .unwrap();
        let x = vector![2, -1, 0.5];
        let pr = project(&p, &x, 1e-9).unwrap();
        assert!(p.combine(&pr.weights.weights).distance(&pr.point) < 1e-14);
        assert!(BarycentricCoords::new(pr.weights.weights.clone(), 1e-12).is_some());
        let u = &x - &pr.point;
        for z in p.vertices() {
            assert!(u.dot(&(z - &pr.point)) <= 1e-12);
        }
    }
}
