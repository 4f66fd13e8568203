//! Seeded random instances. Positive instances are built around a planted
//! witness so the expected answer is known without running the library.

use kkmkit_core::fixed_points::AffineMap;
use kkmkit_core::geometry::Sampler;
use kkmkit_core::{Polytope, Vector};

/// Per-trial seed from the run seed, the suite name and the trial index.
pub fn trial_seed(seed: u64, suite: &str, trial: usize) -> u64 {
    // FNV-1a over the name, then a SplitMix64 finalizer over the mix.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in suite.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h.rotate_left(17) ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn random_point(s: &mut Sampler, dim: usize, lo: f64, hi: f64) -> Vector {
    Vector::new((0..dim).map(|_| s.uniform(lo, hi)).collect()).expect("finite sample")
}

pub fn random_unit(s: &mut Sampler, dim: usize) -> Vector {
    loop {
        let v = random_point(s, dim, -1.0, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v.scale(1.0 / n);
        }
    }
}

/// `m` uniform points of `[lo, hi]^dim`.
pub fn random_polytope(s: &mut Sampler, dim: usize, m: usize, lo: f64, hi: f64) -> Polytope {
    Polytope::new((0..m).map(|_| random_point(s, dim, lo, hi)).collect()).expect("nonempty")
}

fn max_along(p: &Polytope, u: &Vector) -> f64 {
    p.vertices().iter().map(|v| u.dot(v)).fold(f64::NEG_INFINITY, f64::max)
}

fn min_along(p: &Polytope, u: &Vector) -> f64 {
    p.vertices().iter().map(|v| u.dot(v)).fold(f64::INFINITY, f64::min)
}

/// A polytope and a point strictly beyond its support in a planted direction.
pub fn exterior_point_instance(s: &mut Sampler, dim: usize) -> (Polytope, Vector) {
    let m = dim + 1 + s.index(6);
    let c = random_polytope(s, dim, m, -1.0, 1.0);
    let u = random_unit(s, dim);
    let gap = s.uniform(0.05, 2.0);
    let base = c.barycenter();
    let x = &base + &u.scale(max_along(&c, &u) - u.dot(&base) + gap);
    (c, x)
}

/// Disjoint `(K, C)` split by a planted slab of positive width.
pub fn disjoint_pair(s: &mut Sampler, dim: usize) -> (Polytope, Polytope) {
    let (mc, mk) = (1 + s.index(7), 1 + s.index(7));
    let c = random_polytope(s, dim, mc, -1.0, 1.0);
    let k = random_polytope(s, dim, mk, -1.0, 1.0);
    let u = random_unit(s, dim);
    let gap = s.uniform(0.05, 1.5);
    let shift = max_along(&c, &u) - min_along(&k, &u) + gap;
    (k.translate(&u.scale(shift)), c)
}

/// Vertices of a random simplex in `ℝ^dim` with volume bounded away from 0.
pub fn random_simplex(s: &mut Sampler, dim: usize) -> Vec<Vector> {
    loop {
        let pts: Vec<Vector> = (0..=dim).map(|_| random_point(s, dim, -1.0, 1.0)).collect();
        let edges = nalgebra::DMatrix::from_fn(dim, dim, |r, c| pts[c + 1][r] - pts[0][r]);
        let svd = edges.svd(false, false);
        if svd.singular_values.min() > 0.15 {
            return pts;
        }
    }
}

/// Star-shaped KKM map on `d + 1` affinely independent points with planted
/// common point `z` of barycentric coordinates `μ`:
/// `Γ(xᵢ) = conv{xᵢ, μᵢxᵢ + (1 − μᵢ)xⱼ : j ≠ i} = {y : μᵢ(y) ≥ μᵢ}`.
pub struct StarKkm {
    pub domain_points: Vec<Vector>,
    pub values: Vec<Polytope>,
    pub ambient: Polytope,
    pub planted: Vector,
}

pub fn star_kkm(s: &mut Sampler, dim: usize) -> StarKkm {
    let pts = random_simplex(s, dim);
    let n = pts.len();
    let mu: Vec<f64> = loop {
        let w = s.barycentric(n);
        if w.iter().all(|&x| x >= 0.05) {
            break w;
        }
    };
    let ambient = Polytope::new(pts.clone()).expect("nonempty");
    let planted = ambient.combine(&mu);
    let values = (0..n)
        .map(|i| {
            let mut verts = vec![pts[i].clone()];
            for j in (0..n).filter(|&j| j != i) {
                verts.push(pts[j].lerp(&pts[i], mu[i]));
            }
            Polytope::new(verts).expect("nonempty")
        })
        .collect();
    StarKkm {
        domain_points: pts,
        values,
        ambient,
        planted,
    }
}

/// `Γ(eᵢ) = {y ∈ Δ : yᵢ ≥ 1/3}` on the standard triangle in `ℝ³`.
pub fn barycentric_kkm() -> StarKkm {
    let simplex = Polytope::standard_simplex(3);
    let values = (0..3)
        .map(|i| {
            let mut verts = vec![Vector::basis(3, i)];
            for j in (0..3).filter(|&j| j != i) {
                verts.push(Vector::basis(3, j).lerp(&Vector::basis(3, i), 1.0 / 3.0));
            }
            Polytope::new(verts).expect("nonempty")
        })
        .collect();
    StarKkm {
        domain_points: simplex.vertices().to_vec(),
        values,
        planted: simplex.barycenter(),
        ambient: simplex,
    }
}

/// Ball cover of the box `[0, 1]^dim`: a jittered lattice of balls whose radii
/// exceed half the cell diagonal, plus a few random extra balls.
pub struct BallCover {
    pub k_set: Polytope,
    pub centers: Vec<Vector>,
    pub radii: Vec<f64>,
    pub cover_points: Vec<Vector>,
}

pub fn ball_cover(s: &mut Sampler, dim: usize) -> BallCover {
    let cells = 1 + s.index(3);
    let h = 1.0 / cells as f64;
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    let total = (cells + 1).pow(dim as u32);
    for idx in 0..total {
        let mut rem = idx;
        let c: Vec<f64> = (0..dim)
            .map(|_| {
                let i = rem % (cells + 1);
                rem /= cells + 1;
                i as f64 * h
            })
            .collect();
        centers.push(Vector::new(c).expect("finite"));
        // Lattice balls around every cell corner cover the cell when r > h√d/2.
        radii.push(h * (dim as f64).sqrt() * s.uniform(0.55, 0.9));
    }
    for _ in 0..s.index(3) {
        centers.push(random_point(s, dim, 0.0, 1.0));
        radii.push(s.uniform(0.05, 0.5));
    }
    let dy = 1 + s.index(3);
    let cover_points = centers.iter().map(|_| random_point(s, dy, -2.0, 2.0)).collect();
    BallCover {
        k_set: Polytope::cube(dim, 0.0, 1.0),
        centers,
        radii,
        cover_points,
    }
}

/// `a x ≤ b`.
#[derive(Debug, Clone)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

/// `conv(simplex) ∩ H` by clipping: vertices inside plus edge crossings.
/// Exact because every pair of simplex vertices spans an edge.
pub fn clip_simplex(verts: &[Vector], h: &Halfspace) -> Option<Polytope> {
    let vals: Vec<f64> = verts.iter().map(|v| h.normal.dot(v) - h.offset).collect();
    let mut out: Vec<Vector> = verts
        .iter()
        .zip(&vals)
        .filter(|(_, &f)| f <= 0.0)
        .map(|(v, _)| v.clone())
        .collect();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            if (vals[i] < 0.0 && vals[j] > 0.0) || (vals[i] > 0.0 && vals[j] < 0.0) {
                let t = vals[i] / (vals[i] - vals[j]);
                out.push(verts[i].lerp(&verts[j], t));
            }
        }
    }
    Polytope::new(out).ok()
}

/// Family `Cᵢ = B ∩ {aᵢ·x ≤ cᵢ}` over a simplex `B`, with positively dependent
/// normals (`Σ wᵢaᵢ = 0`, `w > 0`) and `cᵢ = aᵢ·p + sᵢ` for a planted `p`
/// inside `B` and slacks `sᵢ > 0`. Every point of `B` satisfies some
/// inequality, so the union is `B` (convex), and `p` is common to all members.
pub struct PositiveFamily {
    pub simplex: Polytope,
    pub members: Vec<Polytope>,
    pub planted: Vector,
}

pub fn positive_family(s: &mut Sampler, dim: usize, n: usize) -> PositiveFamily {
    let verts: Vec<Vector> = random_simplex(s, dim).into_iter().map(|v| v.scale(2.0)).collect();
    let simplex = Polytope::new(verts.clone()).expect("nonempty");
    let planted = loop {
        let w = s.barycentric(verts.len());
        if w.iter().all(|&x| x >= 0.1) {
            break simplex.combine(&w);
        }
    };
    let weights: Vec<f64> = (0..n).map(|_| s.uniform(0.5, 2.0)).collect();
    let mut normals: Vec<Vector> = (0..n - 1).map(|_| random_unit(s, dim)).collect();
    let mut last = Vector::zeros(dim);
    for (a, w) in normals.iter().zip(&weights) {
        last = &last - &a.scale(*w / weights[n - 1]);
    }
    if last.norm() < 1e-3 {
        last = normals[0].scale(-1.0);
    }
    normals.push(last);
    let members = normals
        .iter()
        .map(|a| {
            let slack = s.uniform(0.05, 0.6) * a.norm();
            let h = Halfspace {
                offset: a.dot(&planted) + slack,
                normal: a.clone(),
            };
            clip_simplex(&verts, &h).expect("planted point is inside")
        })
        .collect();
    PositiveFamily {
        simplex,
        members,
        planted,
    }
}

/// `αI + S + PᵀP` with `S` skew and a small PSD part; coercivity constant of
/// at least `α`.
pub fn coercive_matrix(s: &mut Sampler, dim: usize) -> Vec<Vec<f64>> {
    let alpha = s.uniform(0.5, 2.0);
    let skew_scale = s.uniform(0.0, 2.0);
    let psd_scale = s.uniform(0.0, 0.5);
    let raw: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| s.uniform(-1.0, 1.0)).collect())
        .collect();
    let p: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| s.uniform(-1.0, 1.0)).collect())
        .collect();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let skew = skew_scale * (raw[i][j] - raw[j][i]) / 2.0;
                    let psd: f64 = (0..dim).map(|k| p[k][i] * p[k][j]).sum::<f64>() * psd_scale;
                    skew + psd + if i == j { alpha } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

pub fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect())
        .collect()
}

/// Positive definite `QᵀQ + μI` and a linear term.
pub fn convex_quadratic(s: &mut Sampler, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mu = s.uniform(0.5, 1.5);
    let q: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| s.uniform(-1.0, 1.0)).collect())
        .collect();
    let p = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|k| q[k][i] * q[k][j]).sum::<f64>() + if i == j { mu } else { 0.0 })
                .collect()
        })
        .collect();
    let lin = (0..dim).map(|_| s.uniform(-3.0, 3.0)).collect();
    (p, lin)
}

/// Row-stochastic matrix with entries at least `floor / n`.
pub fn positive_stochastic(s: &mut Sampler, n: usize, floor: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let w = s.barycentric(n);
            w.iter().map(|x| floor / n as f64 + (1.0 - floor) * x).collect()
        })
        .collect()
}

/// The map `π ↦ πT` on column vectors, i.e. `x ↦ Tᵀx`.
pub fn transition_map(t: &[Vec<f64>]) -> AffineMap {
    let n = t.len();
    AffineMap::linear((0..n).map(|i| (0..n).map(|j| t[j][i]).collect()).collect()).expect("square matrix")
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// `Σ cⱼ Tʲ` with nonnegative coefficients summing to one; stochastic and
/// commuting with every other polynomial in `T`.
pub fn stochastic_polynomial(s: &mut Sampler, t: &[Vec<f64>], degree: usize) -> Vec<Vec<f64>> {
    let coeffs = s.barycentric(degree + 1);
    let n = t.len();
    let mut power = identity(n);
    let mut out = vec![vec![0.0; n]; n];
    for c in coeffs {
        for i in 0..n {
            for j in 0..n {
                out[i][j] += c * power[i][j];
            }
        }
        power = mat_mul(&power, t);
    }
    out
}

pub fn random_matrix(s: &mut Sampler, rows: usize, cols: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| s.uniform(-scale, scale)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use kkmkit_core::contains;

    #[test]
    fn trial_seeds_differ_by_suite_and_index() {
        assert_ne!(trial_seed(1, "a", 0), trial_seed(1, "b", 0));
        assert_ne!(trial_seed(1, "a", 0), trial_seed(1, "a", 1));
        assert_eq!(trial_seed(9, "lemma1", 4), trial_seed(9, "lemma1", 4));
    }

    #[test]
    fn planted_exterior_point_is_outside() {
        let mut s = Sampler::new(3);
        for dim in 1..=4 {
            let (c, x) = exterior_point_instance(&mut s, dim);
            assert!(!contains(&c, &x, 1e-9).unwrap());
        }
    }

    #[test]
    fn clipping_a_triangle() {
        let verts = Polytope::standard_simplex(3).vertices().to_vec();
        let h = Halfspace {
            normal: Vector::basis(3, 0),
            offset: 0.5,
        };
        let p = clip_simplex(&verts, &h).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.vertices().iter().all(|v| v[0] <= 0.5 + 1e-15));
    }

    #[test]
    fn positive_family_contains_the_planted_point() {
        let mut s = Sampler::new(11);
        for (dim, n) in [(1, 2), (2, 3), (3, 4)] {
            let fam = positive_family(&mut s, dim, n);
            for c in &fam.members {
                assert!(contains(c, &fam.planted, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn polynomials_in_a_stochastic_matrix_stay_stochastic() {
        let mut s = Sampler::new(5);
        let t = positive_stochastic(&mut s, 4, 0.2);
        let p = stochastic_polynomial(&mut s, &t, 3);
        for row in &p {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| x >= 0.0));
        }
    }
}
