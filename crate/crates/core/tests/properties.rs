use kkmkit_core::alternatives::solve_matrix_game;
use kkmkit_core::fixed_points::{affine_fixed_point, AffineMap};
use kkmkit_core::geometry::{contains, minkowski_difference, project, Polytope, Vector};
use kkmkit_core::intersection::find_common_point;
use kkmkit_core::separation::{certify_point, separate_point, separate_sets};
use proptest::prelude::*;

fn point(dim: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-5.0f64..5.0, dim).prop_map(|c| Vector::new(c).unwrap())
}

fn polytope(dim: usize) -> impl Strategy<Value = Polytope> {
    prop::collection::vec(point(dim), 1..8).prop_map(|v| Polytope::new(v).unwrap())
}

fn polytope_and_points(n: usize) -> impl Strategy<Value = (Polytope, Vec<Vector>)> {
    (1usize..5).prop_flat_map(move |d| (polytope(d), prop::collection::vec(point(d), n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn projection_is_nonexpansive((p, xs) in polytope_and_points(2)) {
        let a = project(&p, &xs[0], 1e-12).unwrap().point;
        let b = project(&p, &xs[1], 1e-12).unwrap().point;
        prop_assert!(a.distance(&b) <= xs[0].distance(&xs[1]) + 1e-8);
    }

    #[test]
    fn projection_satisfies_the_variational_inequality((p, xs) in polytope_and_points(1)) {
        let x = &xs[0];
        let y = project(&p, x, 1e-12).unwrap().point;
        let u = x - &y;
        let scale = 1.0 + x.norm() + p.diameter();
        for z in p.vertices() {
            prop_assert!(u.dot(&(z - &y)) <= 1e-9 * scale * scale);
        }
        prop_assert!(contains(&p, &y, 1e-9).unwrap());
    }

    #[test]
    fn minkowski_difference_contains_pairwise_differences(
        (c, k, wc, wk) in (1usize..4).prop_flat_map(|d| (polytope(d), polytope(d), any::<u64>(), any::<u64>()))
    ) {
        let diff = minkowski_difference(&c, &k).unwrap();
        let a = &c.vertices()[(wc % c.len() as u64) as usize];
        let b = &k.vertices()[(wk % k.len() as u64) as usize];
        let mid = c.barycenter();
        prop_assert!(contains(&diff, &(a - b), 1e-9).unwrap());
        prop_assert!(contains(&diff, &(&mid - b), 1e-9).unwrap());
    }

    #[test]
    fn point_separation_chain((p, xs) in polytope_and_points(1)) {
        let x = &xs[0];
        if let Ok(r) = separate_point(&p, x, 1e-9) {
            let cert = certify_point(&r, &p, x);
            let scale = 1.0 + x.norm() + p.diameter();
            prop_assert!(cert.max_vertex_excess <= 1e-9 * scale * scale);
            prop_assert!(cert.gap > 0.0);
            prop_assert!(cert.margin_defect <= 1e-7 * scale * scale);
        } else {
            prop_assert!(contains(&p, x, 1e-9).unwrap());
        }
    }

    #[test]
    fn swapped_sets_give_opposite_normals(
        (c, k) in (1usize..4).prop_flat_map(|d| (polytope(d), polytope(d)))
    ) {
        let shift = Vector::new(vec![20.0; c.dim()]).unwrap();
        let k = k.translate(&shift);
        let a = separate_sets(&k, &c, 1e-9).unwrap();
        let b = separate_sets(&c, &k, 1e-9).unwrap();
        prop_assert!((a.normal() + b.normal()).norm() <= 1e-6 * (1.0 + a.normal().norm()));
    }

    #[test]
    fn common_point_lies_in_every_member(
        (a, b) in (1usize..4).prop_flat_map(|d| (polytope(d), polytope(d)))
    ) {
        if let Some(x) = find_common_point(&[a.clone(), b.clone()], 1e-9).unwrap() {
            prop_assert!(contains(&a, &x, 1e-8).unwrap());
            prop_assert!(contains(&b, &x, 1e-8).unwrap());
        }
    }

    #[test]
    fn affine_maps_preserve_convex_combinations(
        (rows, offset, pts, w) in (1usize..5).prop_flat_map(|d| (
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), d),
            point(d),
            prop::collection::vec(point(d), 3),
            prop::collection::vec(0.01f64..1.0, 3),
        ))
    ) {
        let phi = AffineMap::new(rows, offset).unwrap();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / total).collect();
        let p = Polytope::new(pts).unwrap();
        let image = Polytope::new(p.vertices().iter().map(|v| phi.apply(v)).collect()).unwrap();
        let lhs = phi.apply(&p.combine(&w));
        let rhs = image.combine(&w);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn fixed_sets_are_convex(p in 0.05f64..0.95, q in 0.05f64..0.95, s in 0.0f64..1.0) {
        // Block-diagonal stochastic matrix with two closed classes: the fixed
        // set is a segment between the two class-stationary vectors.
        let t = [
            [1.0 - p, p, 0.0, 0.0],
            [q, 1.0 - q, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
            [0.0, 0.0, 0.5, 0.5],
        ];
        let a: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| t[j][i]).collect()).collect();
        let phi = AffineMap::linear(a).unwrap();
        let x1 = Vector::new(vec![q / (p + q), p / (p + q), 0.0, 0.0]).unwrap();
        let x2 = Vector::new(vec![0.0, 0.0, 0.5, 0.5]).unwrap();
        prop_assert!(phi.residual(&x1) <= 1e-12 && phi.residual(&x2) <= 1e-12);
        prop_assert!(phi.residual(&x1.lerp(&x2, s)) <= 1e-12);
        let fp = affine_fixed_point(&phi, &Polytope::standard_simplex(4), 1e-10).unwrap();
        prop_assert!(fp.max_residual() <= 1e-10);
    }

    #[test]
    fn matrix_game_primal_values_coincide(
        m in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3.0f64..3.0, c), r))
    ) {
        let g = solve_matrix_game(&m).unwrap();
        prop_assert!((g.row_value - g.col_value).abs() <= 1e-9);
        prop_assert!((g.value - g.row_value).abs() <= 1e-9);
    }
}
