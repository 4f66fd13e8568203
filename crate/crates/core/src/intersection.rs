//! Ghouila-Houri / Klee intersection checks for finite families of polytopes.
//!
//! For closed convex `C₁, …, C_n` whose union is convex and any `k < n` of
//! which meet, the whole family meets. [`check_ghouila_houri`] verifies both
//! hypotheses on a concrete family and either returns the common point or a
//! midpoint certifying that the union is not convex. Union convexity is only
//! checked on a finite sample, so reports always carry the resolution used.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_dim, GeometryError};
use crate::geometry::{polytope_grid, MembershipOracle, Polytope, Sampler, Vector};
use crate::lp::{Bound, LinearProgram, Relation};

pub const MAX_FAMILY: usize = 12;

/// Grid points sampled per member when testing union convexity.
const UNION_GRID_CAP: usize = 600;
/// Deterministic midpoint checks that need a membership test.
const GRID_PAIR_BUDGET: usize = 20_000;
const RANDOM_PAIRS: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntersectionError {
    #[error("family must contain at least {min} polytopes, got {got}")]
    TooFewMembers { min: usize, got: usize },
    #[error("family of {0} polytopes exceeds the subfamily budget of {MAX_FAMILY}")]
    BudgetExceeded(usize),
    #[error("resolution must lie in (0, 1], got {0}")]
    BadResolution(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Point minimizing the largest max-norm distance to every member, with that
/// distance. Zero residual means a genuine common point.
///
/// One joint LP: a barycentric block per member, a free point `x`, and a
/// bound `t` on `|Vᵢλⁱ − x|_∞` for every member.
pub fn common_point(family: &[Polytope]) -> Result<(f64, Vector), GeometryError> {
    let first = family.first().ok_or(GeometryError::EmptyPolytope)?;
    let d = first.dim();
    for p in family {
        check_dim(d, p.dim())?;
    }
    if family.len() == 1 {
        return Ok((0.0, first.barycenter()));
    }
    let mut lp = LinearProgram::new();
    let t = lp.add_var(1.0, Bound::NonNegative);
    let x: Vec<usize> = (0..d).map(|_| lp.add_var(0.0, Bound::Free)).collect();
    let mut blocks = Vec::with_capacity(family.len());
    for p in family {
        let lambda: Vec<usize> = (0..p.len()).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
        lp.add_constraint(lambda.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
        for c in 0..d {
            let mut row: Vec<(usize, f64)> = lambda.iter().zip(p.vertices()).map(|(&j, v)| (j, v[c])).collect();
            row.push((x[c], -1.0));
            let mut upper = row.clone();
            upper.push((t, -1.0));
            lp.add_constraint(upper, Relation::Le, 0.0);
            row.push((t, 1.0));
            lp.add_constraint(row, Relation::Ge, 0.0);
        }
        blocks.push(lambda);
    }
    let sol = lp.minimize()?;
    // Recenter on the member points so the reported residual is exact.
    let points: Vec<Vector> = family
        .iter()
        .zip(&blocks)
        .map(|(p, lambda)| {
            let w: Vec<f64> = lambda.iter().map(|&j| sol.x[j]).collect();
            p.combine(&w)
        })
        .collect();
    let candidate = Vector::new(x.iter().map(|&j| sol.x[j]).collect())?;
    let residual = points.iter().map(|q| q.max_abs_diff(&candidate)).fold(0.0, f64::max);
    Ok((residual, candidate))
}

/// A point in every member (within `tol`, max norm), or `None` when the joint
/// LP certifies the family has no common point.
pub fn find_common_point(family: &[Polytope], tol: f64) -> Result<Option<Vector>, GeometryError> {
    let (residual, x) = common_point(family)?;
    Ok((residual <= tol).then_some(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubfamilyCheck {
    pub members: Vec<usize>,
    pub witness: Option<Vector>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterWitness {
    /// Midpoint lying in no member.
    pub midpoint: Vector,
    pub endpoints: [Vector; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionConvexity {
    /// Grid resolution at which the sample was drawn.
    pub certified_at_resolution: f64,
    pub counter_witness: Option<CounterWitness>,
    pub pairs_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KleeStatus {
    /// The family has a common point.
    CommonPoint,
    /// Some proper subfamily has empty intersection: hypothesis (ii) fails.
    SubfamilyHypothesisFails,
    /// Every proper subfamily meets, the whole family does not, and the union
    /// is certifiably non-convex.
    ConvexityCounterWitness,
    /// Every proper subfamily meets, the whole family does not, but no
    /// counter-witness was found at this resolution.
    ResolutionInsufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub status: KleeStatus,
    pub subfamily_intersections: Vec<SubfamilyCheck>,
    pub union_convexity: UnionConvexity,
    pub full_intersection: Option<Vector>,
    pub full_residual: f64,
}

impl FamilyReport {
    pub fn subfamilies_nonempty(&self) -> bool {
        self.subfamily_intersections.iter().all(|s| s.witness.is_some())
    }
}

/// Checks the hypotheses of the Ghouila-Houri theorem on `family` and reports
/// a common point or a certificate explaining why none exists.
///
/// Every proper subfamily (all sizes `1..n`) is tested with one joint LP.
/// Union convexity is probed by midpoints of grid points drawn from the
/// members at `resolution` (deterministic order), then seeded random pairs.
pub fn check_ghouila_houri(
    family: &[Polytope],
    resolution: f64,
    tol: f64,
    seed: u64,
) -> Result<FamilyReport, IntersectionError> {
    let n = family.len();
    if n < 2 {
        return Err(IntersectionError::TooFewMembers { min: 2, got: n });
    }
    if n > MAX_FAMILY {
        return Err(IntersectionError::BudgetExceeded(n));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(IntersectionError::BadResolution(resolution));
    }
    let d = family[0].dim();
    for p in family {
        check_dim(d, p.dim())?;
    }

    let full_mask = (1usize << n) - 1;
    let subfamily_intersections = (1..full_mask)
        .into_par_iter()
        .map(|mask| {
            let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if members.len() == 1 {
                let p = &family[members[0]];
                return Ok(SubfamilyCheck {
                    members,
                    witness: Some(p.barycenter()),
                    residual: 0.0,
                });
            }
            let sub: Vec<Polytope> = members.iter().map(|&i| family[i].clone()).collect();
            let (residual, x) = common_point(&sub)?;
            Ok(SubfamilyCheck {
                members,
                witness: (residual <= tol).then_some(x),
                residual,
            })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;

    let (full_residual, full_point) = common_point(family)?;
    let full_intersection = (full_residual <= tol).then_some(full_point);
    let union_convexity = probe_union_convexity(family, resolution, tol, seed)?;

    let all_sub = subfamily_intersections.iter().all(|s| s.witness.is_some());
    let status = if full_intersection.is_some() {
        KleeStatus::CommonPoint
    } else if !all_sub {
        KleeStatus::SubfamilyHypothesisFails
    } else if union_convexity.counter_witness.is_some() {
        KleeStatus::ConvexityCounterWitness
    } else {
        KleeStatus::ResolutionInsufficient
    };
    Ok(FamilyReport {
        status,
        subfamily_intersections,
        union_convexity,
        full_intersection,
        full_residual,
    })
}

/// Searches for a midpoint of two union points lying outside every member.
pub(crate) fn probe_union_convexity(
    family: &[Polytope],
    resolution: f64,
    tol: f64,
    seed: u64,
) -> Result<UnionConvexity, GeometryError> {
    let k = (1.0 / resolution - 1e-9).ceil().max(1.0) as usize;
    let oracles: Vec<MembershipOracle> = family.iter().map(MembershipOracle::new).collect();
    let membership = |x: &Vector| -> Result<u32, GeometryError> {
        let mut mask = 0u32;
        for (i, o) in oracles.iter().enumerate() {
            if o.contains(x, tol)? {
                mask |= 1 << i;
            }
        }
        Ok(mask)
    };

    let mut points: Vec<(Vector, u32)> = Vec::new();
    for (i, p) in family.iter().enumerate() {
        for x in polytope_grid(p, k, UNION_GRID_CAP, seed ^ i as u64) {
            let mask = membership(&x)? | 1 << i;
            points.push((x, mask));
        }
    }

    let mut checked = 0usize;
    let witness_for = |a: &Vector, b: &Vector| -> Result<Option<CounterWitness>, GeometryError> {
        let mid = a.midpoint(b);
        Ok((membership(&mid)? == 0).then(|| CounterWitness {
            midpoint: mid,
            endpoints: [a.clone(), b.clone()],
        }))
    };

    'grid: for (ia, (a, ma)) in points.iter().enumerate() {
        for (b, mb) in &points[ia + 1..] {
            // a shared member contains the midpoint by convexity
            if ma & mb != 0 {
                continue;
            }
            if checked >= GRID_PAIR_BUDGET {
                break 'grid;
            }
            checked += 1;
            if let Some(w) = witness_for(a, b)? {
                return Ok(UnionConvexity {
                    certified_at_resolution: resolution,
                    counter_witness: Some(w),
                    pairs_checked: checked,
                });
            }
        }
    }

    let mut sampler = Sampler::new(seed);
    for _ in 0..RANDOM_PAIRS {
        let i = sampler.index(family.len());
        let j = sampler.index(family.len());
        if i == j {
            continue;
        }
        let a = sampler.point_in(&family[i]);
        let b = sampler.point_in(&family[j]);
        checked += 1;
        if let Some(w) = witness_for(&a, &b)? {
            return Ok(UnionConvexity {
                certified_at_resolution: resolution,
                counter_witness: Some(w),
                pairs_checked: checked,
            });
        }
    }
    Ok(UnionConvexity {
        certified_at_resolution: resolution,
        counter_witness: None,
        pairs_checked: checked,
    })
}

/// The `n + 2` facets of the standard simplex `Δⁿ⁺¹ ⊂ Rⁿ⁺²`: any `n + 1` of
/// them share a vertex, all of them share nothing.
pub fn simplex_facets(n: usize) -> Vec<Polytope> {
    let dim = n + 2;
    (0..dim)
        .map(|skip| {
            Polytope::new((0..dim).filter(|&i| i != skip).map(|i| Vector::basis(dim, i)).collect())
                .expect("facet vertices share the ambient dimension")
        })
        .collect()
}
