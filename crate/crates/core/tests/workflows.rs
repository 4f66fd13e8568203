//! End-to-end uses of the public API across modules.

use kkmkit_core::alternatives::{saddle_point, BifunctionInstance, GridSchedule, StructureTags};
use kkmkit_core::fixed_points::{affine_fixed_point, AffineMap};
use kkmkit_core::geometry::{contains, Polytope, Vector};
use kkmkit_core::intersection::{check_ghouila_houri, simplex_facets, KleeStatus};
use kkmkit_core::kkm::{kkm_intersection, verify_kkm, FiniteKkmMap};
use kkmkit_core::vector;
use kkmkit_core::vi::{stampacchia_solve, BilinearForm, LinearFunctional};

#[test]
fn polytopes_round_trip_through_json() {
    let p = Polytope::from_rows(vec![vec![0.0, 1.5], vec![-2.0, 0.25]]).unwrap();
    let text = serde_json::to_string(&p).unwrap();
    assert_eq!(text, r#"{"vertices":[[0.0,1.5],[-2.0,0.25]]}"#);
    let back: Polytope = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p);
    assert!(serde_json::from_str::<Polytope>(r#"{"vertices":[]}"#).is_err());
    assert!(serde_json::from_str::<Polytope>(r#"{"vertices":[[0.0],[1.0,2.0]]}"#).is_err());
}

#[test]
fn simplex_faces_every_size() {
    for n in 1..=3 {
        let family = simplex_facets(n);
        assert_eq!(family.len(), n + 2);
        let report = check_ghouila_houri(&family, 1.0 / 8.0, 1e-9, 0).unwrap();
        assert_eq!(report.status, KleeStatus::ConvexityCounterWitness, "n = {n}");
        assert!(report.subfamilies_nonempty());
        let w = report.union_convexity.counter_witness.unwrap();
        for facet in &family {
            assert!(!contains(facet, &w.midpoint, 1e-9).unwrap());
        }
    }
}

#[test]
fn kkm_values_from_a_planted_point() {
    // Γ(eᵢ) = {y ∈ Δ : yᵢ ≥ zᵢ} meets exactly at z.
    let z = [0.2, 0.5, 0.3];
    let simplex = Polytope::standard_simplex(3);
    let values = (0..3)
        .map(|i| {
            let mut verts = vec![Vector::basis(3, i)];
            for j in (0..3).filter(|&j| j != i) {
                let mut c = vec![0.0; 3];
                c[i] = z[i];
                c[j] = 1.0 - z[i];
                verts.push(Vector::new(c).unwrap());
            }
            Polytope::new(verts).unwrap()
        })
        .collect();
    let map = FiniteKkmMap::new(simplex.vertices().to_vec(), values, simplex, 1e-9).unwrap();
    assert!(verify_kkm(&map, 1.0 / 16.0, 1e-9).unwrap().certified);
    let hit = kkm_intersection(&map, 1e-9).unwrap();
    assert!(hit.point.max_abs_diff(&Vector::new(z.to_vec()).unwrap()) < 1e-9);
}

#[test]
fn fixed_point_agrees_with_the_saddle_route() {
    let t = [[0.1, 0.6, 0.3], [0.4, 0.4, 0.2], [0.3, 0.3, 0.4]];
    let a: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| t[j][i]).collect()).collect();
    let phi = AffineMap::linear(a).unwrap();
    let simplex = Polytope::standard_simplex(3);
    let fp = affine_fixed_point(&phi, &simplex, 1e-10).unwrap();

    // ℓ ranges over conv{±eᵢ} and maximizes ℓ(φ(x) − x); x minimizes.
    let duals = Polytope::new(
        (0..3)
            .flat_map(|i| [Vector::basis(3, i), Vector::basis(3, i).scale(-1.0)])
            .collect(),
    )
    .unwrap();
    let phi2 = phi.clone();
    let inst = BifunctionInstance::new(duals.clone(), simplex, StructureTags::biaffine(), move |l, x| {
        l.dot(&(&phi2.apply(x) - x))
    });
    let s = saddle_point(&inst, &GridSchedule::default(), 1e-9).unwrap();
    assert!(s.value.abs() < 1e-9);
    for l in duals.vertices() {
        assert!(l.dot(&(&phi.apply(&fp.x) - &fp.x)) <= 1e-9);
    }
}

#[test]
fn vi_with_identity_is_projection() {
    let a = BilinearForm::from_matrix(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let simplex = Polytope::standard_simplex(3);
    let ell = LinearFunctional::new(vector![1, 0.2, -3]);
    let sol = stampacchia_solve(&a, &ell, &simplex, 1e-10).unwrap();
    let proj = simplex.project(ell.vector(), 1e-14).unwrap().point;
    assert!(sol.x.distance(&proj) < 1e-9);
}
