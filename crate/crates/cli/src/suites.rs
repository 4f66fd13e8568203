//! Randomized verification suites.
//!
//! Each suite draws seeded instances, runs the library on them and checks the
//! results against planted ground truth or an independent oracle from
//! [`crate::oracles`]. Trials run in parallel; results are collected in trial
//! order, so reports do not depend on scheduling.

use std::collections::BTreeMap;

use kkmkit_core::alternatives::{saddle_point, supinf_infsup_gap, BifunctionInstance, GridSchedule, StructureTags};
use kkmkit_core::fixed_points::{affine_fixed_point, common_fixed_point, AffineFamily, AffineMap};
use kkmkit_core::geometry::Sampler;
use kkmkit_core::intersection::{check_ghouila_houri, simplex_facets, KleeStatus};
use kkmkit_core::kkm::{build_selection, kkm_intersection, verify_kkm, Ball, FiniteKkmMap, KkmError};
use kkmkit_core::separation::{separate_point, separate_sets};
use kkmkit_core::vi::{
    coercivity_bound, mazur_schauder_minimize, stampacchia_solve, stampacchia_trace, vi_gap, BilinearForm,
    LinearFunctional, MinimizeDomain,
};
use kkmkit_core::{Polytope, Vector};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::generators as gen;
use crate::oracles;
use crate::registry::{BuiltinSpec, ObjectiveSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub claim: String,
    pub trials: usize,
    pub failures: usize,
    pub passed: bool,
    /// Worst values (maxima) and totals over all trials.
    pub metrics: BTreeMap<String, f64>,
    pub first_failure: Option<String>,
}

pub struct SuiteSpec {
    pub name: &'static str,
    pub claim: &'static str,
    /// Default trial count (per dimension where the suite sweeps dimensions).
    pub default_trials: usize,
    run: fn(&RunConfig, &Ctx) -> Vec<TrialResult>,
}

pub const SUITES: &[SuiteSpec] = &[
    SuiteSpec {
        name: "point-separation",
        claim: "projection separates an exterior point: <u,z> <= <u,y> < <u,x> at every vertex, margin = |u|^2",
        default_trials: 500,
        run: point_separation,
    },
    SuiteSpec {
        name: "set-separation",
        claim: "disjoint polytopes: sup_C <u,.> + |u|^2 <= min_K <u,.>, margin = enumerated distance^2",
        default_trials: 300,
        run: set_separation,
    },
    SuiteSpec {
        name: "simplex-faces",
        claim: "n+2 facet family: leave-one-out subfamilies meet, the whole family does not, union is not convex",
        default_trials: 4,
        run: simplex_faces,
    },
    SuiteSpec {
        name: "kkm-star",
        claim: "star-construction maps certify as KKM and their values meet inside conv(domain)",
        default_trials: 100,
        run: kkm_star,
    },
    SuiteSpec {
        name: "kkm-barycentric",
        claim: "threshold-1/3 cover of the triangle meets exactly at the barycenter",
        default_trials: 1,
        run: kkm_barycentric,
    },
    SuiteSpec {
        name: "selection",
        claim: "ball-cover selections are subordinated and land in conv(cover points)",
        default_trials: 50,
        run: selection,
    },
    SuiteSpec {
        name: "minimax",
        claim: "matrix-game saddle value matches an independent LP; sup inf = inf sup",
        default_trials: 100,
        run: minimax,
    },
    SuiteSpec {
        name: "supinf-infsup",
        claim: "for f <= g: sup_x inf_y g >= inf_y sup_x f",
        default_trials: 50,
        run: supinf_infsup,
    },
    SuiteSpec {
        name: "stampacchia",
        claim: "coercive variational inequalities: certified residual, unique solution, projection identity, a-priori bound",
        default_trials: 100,
        run: stampacchia,
    },
    SuiteSpec {
        name: "mazur-schauder",
        claim: "quasiconvex minimization matches an enumeration oracle; sqrt|x| attains 0",
        default_trials: 40,
        run: mazur_schauder,
    },
    SuiteSpec {
        name: "markov-kakutani",
        claim: "affine fixed points match stationary vectors; commuting families share fixed points; saddle cross-check",
        default_trials: 40,
        run: markov_kakutani,
    },
    SuiteSpec {
        name: "klee-to-kkm",
        claim: "families with convex union and common point convert to certified KKM maps",
        default_trials: 100,
        run: klee_to_kkm,
    },
];

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|s| s.name)
}

pub fn find_suite(name: &str) -> Option<&'static SuiteSpec> {
    SUITES.iter().find(|s| s.name == name)
}

pub fn run_suite(spec: &SuiteSpec, cfg: &RunConfig) -> SuiteOutcome {
    let ctx = Ctx {
        name: spec.name,
        trials: cfg.trials(spec.name, spec.default_trials),
    };
    let results = (spec.run)(cfg, &ctx);
    aggregate(spec, results)
}

pub fn run_all(cfg: &RunConfig) -> Vec<SuiteOutcome> {
    SUITES.iter().map(|s| run_suite(s, cfg)).collect()
}

struct Ctx {
    name: &'static str,
    trials: usize,
}

#[derive(Default)]
struct Trial {
    worst: Vec<(&'static str, f64)>,
    totals: Vec<(&'static str, f64)>,
}

impl Trial {
    fn worst(mut self, key: &'static str, v: f64) -> Self {
        self.worst.push((key, v));
        self
    }

    fn total(mut self, key: &'static str, v: f64) -> Self {
        self.totals.push((key, v));
        self
    }
}

type TrialResult = Result<Trial, String>;

// Written as `!cond` so a NaN metric fails the check.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn trials<F>(cfg: &RunConfig, ctx: &Ctx, count: usize, f: F) -> Vec<TrialResult>
where
    F: Fn(usize, &mut Sampler, u64) -> TrialResult + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|t| {
            let seed = gen::trial_seed(cfg.seed, ctx.name, t);
            let mut s = Sampler::new(seed);
            f(t, &mut s, seed).map_err(|e| format!("trial {t}: {e}"))
        })
        .collect()
}

fn aggregate(spec: &SuiteSpec, results: Vec<TrialResult>) -> SuiteOutcome {
    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = 0;
    let mut first_failure = None;
    for r in &results {
        match r {
            Ok(t) => {
                for (k, v) in &t.worst {
                    let e = metrics.entry(format!("max_{k}")).or_insert(f64::NEG_INFINITY);
                    *e = e.max(*v);
                }
                for (k, v) in &t.totals {
                    *metrics.entry(format!("total_{k}")).or_insert(0.0) += v;
                }
            }
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.clone());
            }
        }
    }
    SuiteOutcome {
        name: spec.name.to_string(),
        claim: spec.claim.to_string(),
        trials: results.len(),
        failures,
        passed: failures == 0 && !results.is_empty(),
        metrics,
        first_failure,
    }
}

fn point_separation(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    let per_dim = ctx.trials;
    trials(cfg, ctx, 6 * per_dim, |t, s, _| {
        let dim = 1 + t / per_dim.max(1);
        let (c, x) = gen::exterior_point_instance(s, dim);
        let r = separate_point(&c, &x, cfg.tol).map_err(err)?;
        let u = r.normal();
        let uy = u.dot(&r.witness_projection);
        let ux = u.dot(&x);
        let uu = u.norm_squared();
        let slack = c.vertices().iter().map(|z| uy - u.dot(z)).fold(f64::INFINITY, f64::min);
        ensure!(
            slack >= -1e-9,
            "dim {dim}: vertex beyond the projection by {:.3e}",
            -slack
        );
        ensure!(uy < ux, "dim {dim}: projection not strictly below the point");
        let defect = ((ux - uy) - uu).abs().max((r.margin - uu).abs());
        ensure!(defect <= 1e-7, "dim {dim}: margin differs from |u|^2 by {defect:.3e}");
        Ok(Trial::default()
            .worst("vertex_excess", -slack)
            .worst("margin_defect", defect))
    })
}

fn set_separation(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, s, _| {
        let dim = 1 + t % 4;
        let (k, c) = gen::disjoint_pair(s, dim);
        let r = separate_sets(&k, &c, cfg.tol).map_err(err)?;
        let u = r.normal();
        let uu = u.norm_squared();
        let sup_c = c.vertices().iter().map(|z| u.dot(z)).fold(f64::NEG_INFINITY, f64::max);
        let min_k = k.vertices().iter().map(|z| u.dot(z)).fold(f64::INFINITY, f64::min);
        let excess = sup_c + uu - min_k;
        ensure!(excess <= 1e-7, "dim {dim}: separation inequality fails by {excess:.3e}");
        let dist_sq = oracles::polytope_distance_sq(&k, &c);
        let diff = (r.margin - dist_sq).abs();
        ensure!(
            diff <= 1e-6,
            "dim {dim}: margin {:.12e} vs enumerated distance^2 {dist_sq:.12e}",
            r.margin
        );
        Ok(Trial::default()
            .worst("inequality_excess", excess)
            .worst("margin_vs_oracle", diff))
    })
}

fn simplex_faces(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, _, seed| {
        let n = 1 + t;
        let family = simplex_facets(n);
        ensure!(family.len() == n + 2, "n = {n}: {} sets", family.len());
        let report = check_ghouila_houri(&family, 1.0 / 8.0, cfg.tol, seed).map_err(err)?;
        ensure!(
            report.status == KleeStatus::ConvexityCounterWitness,
            "n = {n}: status {:?}",
            report.status
        );
        let loo: Vec<_> = report
            .subfamily_intersections
            .iter()
            .filter(|s| s.members.len() == n + 1)
            .collect();
        ensure!(loo.len() == n + 2, "n = {n}: {} leave-one-out subfamilies", loo.len());
        let mut worst_member = 0.0f64;
        for sub in &loo {
            let members: Vec<Polytope> = sub.members.iter().map(|&i| family[i].clone()).collect();
            let w = sub
                .witness
                .as_ref()
                .ok_or_else(|| format!("n = {n}: subfamily {:?} reported empty", sub.members))?;
            for p in &members {
                worst_member = worst_member.max(oracles::linf_distance(p, w).ok_or("oracle LP failed")?);
            }
            ensure!(
                oracles::lp_common_point(&members).is_some(),
                "n = {n}: oracle finds subfamily {:?} infeasible",
                sub.members
            );
        }
        ensure!(
            worst_member <= 1e-7,
            "n = {n}: witness off a member by {worst_member:.3e}"
        );
        ensure!(
            report.full_intersection.is_none(),
            "n = {n}: full family reported feasible"
        );
        ensure!(
            oracles::lp_common_point(&family).is_none(),
            "n = {n}: oracle finds the full family feasible"
        );
        let cw = report
            .union_convexity
            .counter_witness
            .as_ref()
            .ok_or_else(|| format!("n = {n}: no counter-witness"))?;
        let mut nearest = f64::INFINITY;
        for p in &family {
            nearest = nearest.min(oracles::linf_distance(p, &cw.midpoint).ok_or("oracle LP failed")?);
        }
        ensure!(nearest > cfg.tol, "n = {n}: midpoint lies in a member");
        for e in &cw.endpoints {
            let mut d = f64::INFINITY;
            for p in &family {
                d = d.min(oracles::linf_distance(p, e).ok_or("oracle LP failed")?);
            }
            ensure!(d <= 1e-7, "n = {n}: endpoint outside the union by {d:.3e}");
        }
        Ok(Trial::default()
            .worst("witness_distance", worst_member)
            .worst("sets", family.len() as f64)
            .total("counter_witnesses", 1.0)
            .worst("neg_midpoint_distance", -nearest))
    })
}

fn check_kkm_instance(inst: &gen::StarKkm, cfg: &RunConfig) -> TrialResult {
    let map = FiniteKkmMap::new(
        inst.domain_points.clone(),
        inst.values.clone(),
        inst.ambient.clone(),
        cfg.tol,
    )
    .map_err(err)?;
    let cert = verify_kkm(&map, cfg.resolution, cfg.tol).map_err(err)?;
    ensure!(cert.certified, "not certified KKM: {:?}", cert.violation);
    let hit = match kkm_intersection(&map, cfg.tol) {
        Ok(h) => h,
        Err(KkmError::InfeasibleIntersection { residual }) => {
            return Err(format!("infeasible intersection (residual {residual:.3e})"));
        }
        Err(e) => return Err(e.to_string()),
    };
    ensure!(hit.residual <= 1e-7, "intersection residual {:.3e}", hit.residual);
    let mut worst = 0.0f64;
    for v in inst.values.iter().chain(std::iter::once(&inst.ambient)) {
        worst = worst.max(oracles::linf_distance(v, &hit.point).ok_or("oracle LP failed")?);
    }
    ensure!(worst <= 1e-7, "intersection point off a value by {worst:.3e}");
    let planted = hit.point.max_abs_diff(&inst.planted);
    ensure!(
        planted <= 1e-6,
        "intersection point {:.3e} from the planted point",
        planted
    );
    Ok(Trial::default()
        .worst("intersection_residual", hit.residual)
        .worst("oracle_distance", worst)
        .worst("planted_distance", planted)
        .total("grid_points", cert.points_checked as f64)
        .total("infeasible_intersections", 0.0))
}

fn kkm_star(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    let per_dim = ctx.trials;
    trials(cfg, ctx, 4 * per_dim, |t, s, _| {
        let dim = 1 + t / per_dim.max(1);
        check_kkm_instance(&gen::star_kkm(s, dim), cfg).map_err(|e| format!("dim {dim}: {e}"))
    })
}

fn kkm_barycentric(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |_, _, _| {
        check_kkm_instance(&gen::barycentric_kkm(), cfg)
    })
}

fn tensor_grid(dim: usize, min_points: usize) -> Vec<Vector> {
    let per_axis = (min_points as f64).powf(1.0 / dim as f64).ceil() as usize;
    let per_axis = per_axis + usize::from(per_axis.pow(dim as u32) < min_points);
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|idx| {
            let mut rem = idx;
            let c = (0..dim)
                .map(|_| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    i as f64 / (per_axis - 1) as f64
                })
                .collect();
            Vector::new(c).expect("finite grid")
        })
        .collect()
}

fn selection(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, s, _| {
        let dim = 1 + t % 3;
        let cover = gen::ball_cover(s, dim);
        let balls: Vec<Ball> = cover
            .centers
            .iter()
            .zip(&cover.radii)
            .map(|(c, &r)| Ball {
                center: c.clone(),
                radius: r,
            })
            .collect();
        let sel = build_selection(cover.cover_points.clone(), balls, &cover.k_set, cfg.resolution).map_err(err)?;
        let grid = tensor_grid(dim, 1000);
        let mut combo_err = 0.0f64;
        let mut sum_err = 0.0f64;
        for x in &grid {
            let (w, sx) = sel.evaluate(x).map_err(err)?;
            for (i, &wi) in w.weights.iter().enumerate() {
                ensure!(wi >= 0.0, "negative weight at {x}");
                ensure!(
                    wi == 0.0 || x.distance(&cover.centers[i]) < cover.radii[i],
                    "weight {wi:.3e} of ball {i} at {x}, outside that ball"
                );
            }
            sum_err = sum_err.max((w.weights.iter().sum::<f64>() - 1.0).abs());
            // Σwᵢyᵢ with w on the simplex is a member of the hull by definition.
            let mut acc = vec![0.0; sx.dim()];
            for (wi, y) in w.weights.iter().zip(&cover.cover_points) {
                for (a, c) in acc.iter_mut().zip(y.as_slice()) {
                    *a += wi * c;
                }
            }
            combo_err = combo_err.max(sx.max_abs_diff(&Vector::new(acc).map_err(err)?));
        }
        ensure!(sum_err <= 1e-12, "weights sum off by {sum_err:.3e}");
        ensure!(combo_err <= 1e-9, "selection off the hull by {combo_err:.3e}");
        Ok(Trial::default()
            .worst("hull_distance", combo_err)
            .worst("weight_sum_error", sum_err)
            .total("grid_points", grid.len() as f64))
    })
}

fn minimax(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    let fixed: [(&str, Vec<Vec<f64>>); 2] = [
        ("matching pennies", vec![vec![1.0, -1.0], vec![-1.0, 1.0]]),
        (
            "rock-paper-scissors",
            vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]],
        ),
    ];
    trials(cfg, ctx, ctx.trials + fixed.len(), |t, s, seed| {
        let sched = GridSchedule {
            seed,
            ..Default::default()
        };
        if let Some((name, m)) = fixed.get(t) {
            let inst = BifunctionInstance::matrix_game(m.clone()).map_err(err)?;
            let sp = saddle_point(&inst, &sched, cfg.tol).map_err(err)?;
            ensure!(sp.value.abs() <= 1e-12, "{name}: value {:.3e}", sp.value);
            return Ok(Trial::default().worst("symmetric_game_value", sp.value.abs()));
        }
        let rows = 1 + s.index(10);
        let cols = 1 + s.index(10);
        let m = gen::random_matrix(s, rows, cols, 5.0);
        let inst = BifunctionInstance::matrix_game(m.clone()).map_err(err)?;
        let sp = saddle_point(&inst, &sched, cfg.tol).map_err(err)?;
        let oracle = oracles::lp_game_value(&m).ok_or("oracle LP failed")?;
        let diff = (sp.value - oracle).abs();
        ensure!(
            diff <= 1e-6,
            "{rows}x{cols}: value {:.12e} vs oracle {oracle:.12e}",
            sp.value
        );
        let gap = (sp.supinf - sp.infsup).abs();
        ensure!(gap <= 1e-6, "{rows}x{cols}: sup inf and inf sup differ by {gap:.3e}");
        Ok(Trial::default()
            .worst("value_vs_oracle", diff)
            .worst("minimax_gap", gap)
            .worst("saddle_violation", sp.max_violation))
    })
}

fn supinf_infsup(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, s, seed| {
        let (dx, dy) = (1 + s.index(3), 1 + s.index(3));
        let (mx, my) = (1 + s.index(5), 1 + s.index(5));
        let x = gen::random_polytope(s, dx, mx, -1.0, 1.0);
        let y = gen::random_polytope(s, dy, my, -1.0, 1.0);
        let matrix = gen::random_matrix(s, dx, dy, 3.0);
        let shift = if t % 5 == 0 { 0.0 } else { s.uniform(0.0, 2.0) };
        let f = BuiltinSpec::Bilinear {
            matrix: matrix.clone(),
            shift: 0.0,
        }
        .instance(x.clone(), y.clone());
        let g = BuiltinSpec::Bilinear { matrix, shift }.instance(x, y);
        let sched = GridSchedule {
            seed,
            ..Default::default()
        };
        let gap = supinf_infsup_gap(&f, &g, &sched, cfg.tol).map_err(err)?;
        ensure!(
            gap.alpha >= gap.beta - 1e-7,
            "alpha {:.12e} below beta {:.12e}",
            gap.alpha,
            gap.beta
        );
        let value = oracles::lp_game_value(&f.vertex_payoffs().map_err(err)?).ok_or("oracle LP failed")?;
        let diff = (gap.beta - value).abs().max((gap.alpha - value - shift).abs());
        ensure!(
            diff <= 1e-6,
            "one-sided values differ from the oracle game value by {diff:.3e}"
        );
        Ok(Trial::default()
            .worst("beta_minus_alpha", gap.beta - gap.alpha)
            .worst("oracle_difference", diff))
    })
}

/// `max_y xᵀA(x − y) − ℓ·(x − y)` over the vertices, straight from the matrix.
fn raw_vi_residual(a: &[Vec<f64>], ell: &Vector, x_set: &Polytope, x: &Vector) -> f64 {
    let xa: Vec<f64> = (0..x.dim())
        .map(|j| (0..x.dim()).map(|i| x[i] * a[i][j]).sum())
        .collect();
    x_set
        .vertices()
        .iter()
        .map(|y| {
            let d = x - y;
            xa.iter().zip(d.as_slice()).map(|(p, q)| p * q).sum::<f64>() - ell.dot(&d)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn stampacchia(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, s, _| {
        let dim = 1 + t % 6;
        let identity = t % 4 == 0;
        let matrix = if identity {
            gen::identity(dim)
        } else {
            gen::coercive_matrix(s, dim)
        };
        let m = dim + 1 + s.index(5);
        let x_set = gen::random_polytope(s, dim, m, -2.0, 2.0);
        let ell_v = gen::random_point(s, dim, -3.0, 3.0);
        let a = BilinearForm::from_matrix(matrix.clone()).map_err(err)?;
        let ell = LinearFunctional::new(ell_v.clone());
        let sol = stampacchia_solve(&a, &ell, &x_set, cfg.tol).map_err(err)?;
        let residual = raw_vi_residual(&matrix, &ell_v, &x_set, &sol.x);
        ensure!(residual <= 1e-8, "dim {dim}: VI residual {residual:.3e}");
        ensure!(
            sol.uniqueness_gap <= 1e-6,
            "dim {dim}: two starts differ by {:.3e}",
            sol.uniqueness_gap
        );
        let mut trial = Trial::default()
            .worst("vi_residual", residual)
            .worst("uniqueness_gap", sol.uniqueness_gap);
        if identity {
            let p = oracles::brute_force_projection(&x_set, &ell_v);
            let d = p.distance(&sol.x);
            ensure!(d <= 1e-8, "dim {dim}: A = I solution {d:.3e} from the projection");
            trial = trial.worst("projection_distance", d).total("identity_instances", 1.0);
        }
        let y0 = s.point_in(&x_set);
        let bound = coercivity_bound(a.continuity_c(), a.coercivity_alpha(), ell.norm(), y0.norm()).map_err(err)?;
        let (_, iterates) = stampacchia_trace(&a, &ell, &x_set, &y0, cfg.tol).map_err(err)?;
        let mut fired = 0usize;
        let mut excess = f64::NEG_INFINITY;
        for xk in &iterates {
            if vi_gap(&a, &ell, xk, &y0) <= 0.0 {
                fired += 1;
                excess = excess.max(xk.norm() - bound.m);
                ensure!(
                    xk.norm() <= bound.m + cfg.tol,
                    "dim {dim}: iterate norm {:.6e} exceeds M = {:.6e}",
                    xk.norm(),
                    bound.m
                );
            }
        }
        if fired > 0 {
            trial = trial.worst("norm_minus_m", excess);
        }
        Ok(trial.total("bound_triggers", fired as f64))
    })
}

fn mazur_schauder(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials + 1, |t, s, seed| {
        if t == 0 {
            let obj = ObjectiveSpec::NormPower {
                center: vec![0.0],
                power: 0.5,
            };
            let x_set = Polytope::segment(
                Vector::new(vec![-1.0]).map_err(err)?,
                Vector::new(vec![2.0]).map_err(err)?,
            )
            .map_err(err)?;
            let phi = obj.evaluator();
            let m =
                mazur_schauder_minimize(|x| phi(x), &MinimizeDomain::Polytope(x_set), cfg.tol, seed).map_err(err)?;
            ensure!(m.xbar[0].abs() <= 1e-6, "sqrt instance minimized at {}", m.xbar);
            return Ok(Trial::default().worst("sqrt_argmin", m.xbar[0].abs()));
        }
        let dim = 1 + t % 4;
        let (p, q) = gen::convex_quadratic(s, dim);
        let obj = ObjectiveSpec::Quadratic {
            p: p.clone(),
            q: q.clone(),
        };
        let phi = obj.evaluator();
        let unbounded = t % 5 == 0;
        let (domain, expected) = if unbounded {
            let pm = DMatrix::from_fn(dim, dim, |i, j| p[i][j]);
            let sol = pm.lu().solve(&-DVector::from_column_slice(&q)).ok_or("singular P")?;
            (
                obj.domain(&crate::input::MinimizeDomainSpec::Unbounded(dim)),
                Vector::new(sol.iter().copied().collect()).map_err(err)?,
            )
        } else {
            let m = dim + 1 + s.index(5);
            let x_set = gen::random_polytope(s, dim, m, -2.0, 2.0);
            let x = oracles::brute_force_quadratic(&p, &q, &x_set);
            (MinimizeDomain::Polytope(x_set), x)
        };
        let m = mazur_schauder_minimize(|x| phi(x), &domain, cfg.tol, seed).map_err(err)?;
        let d = m.xbar.distance(&expected);
        ensure!(
            d <= 1e-6,
            "dim {dim}{}: minimizer {d:.3e} from the oracle",
            if unbounded { ", unbounded" } else { "" }
        );
        let value_gap = m.value - phi(&expected);
        Ok(Trial::default()
            .worst("argmin_distance", d)
            .worst("value_above_oracle", value_gap)
            .total("unbounded_instances", f64::from(u8::from(unbounded))))
    })
}

fn dual_functionals(n: usize) -> Polytope {
    Polytope::new(
        (0..n)
            .flat_map(|i| [Vector::basis(n, i), Vector::basis(n, i).scale(-1.0)])
            .collect(),
    )
    .expect("nonempty")
}

fn markov_kakutani(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, s, seed| {
        let n = 2 + s.index(5);
        let simplex = Polytope::standard_simplex(n);
        let floor = s.uniform(0.05, 0.5);
        let t_mat = gen::positive_stochastic(s, n, floor);
        if t % 2 == 0 {
            let phi = gen::transition_map(&t_mat);
            let fp = affine_fixed_point(&phi, &simplex, cfg.tol).map_err(err)?;
            let pi = oracles::stationary_vector(&t_mat).ok_or("stationary solve failed")?;
            let d = fp.x.max_abs_diff(&pi);
            ensure!(d <= 1e-6, "n = {n}: fixed point {d:.3e} from the stationary vector");

            // ℓ over conv{±eᵢ} maximizes ℓ(φ(x) − x); x minimizes over Δ.
            let duals = dual_functionals(n);
            let phi2 = phi.clone();
            let inst = BifunctionInstance::new(duals.clone(), simplex, StructureTags::biaffine(), move |l, x| {
                l.dot(&(&phi2.apply(x) - x))
            });
            let sched = GridSchedule {
                seed,
                ..Default::default()
            };
            let sp = saddle_point(&inst, &sched, cfg.tol).map_err(err)?;
            ensure!(sp.value <= 1e-6, "n = {n}: saddle value {:.3e}", sp.value);
            let drift = &phi.apply(&fp.x) - &fp.x;
            let worst = duals
                .vertices()
                .iter()
                .map(|l| l.dot(&drift))
                .fold(f64::NEG_INFINITY, f64::max);
            ensure!(
                worst <= 1e-6,
                "n = {n}: functional value {worst:.3e} at the fixed point"
            );
            Ok(Trial::default()
                .worst("stationary_distance", d)
                .worst("saddle_value", sp.value)
                .worst("functional_at_fixed_point", worst)
                .total("stochastic_instances", 1.0))
        } else {
            let count = 2 + s.index(2);
            let maps: Vec<AffineMap> = (0..count)
                .map(|_| {
                    let degree = 1 + s.index(3);
                    gen::transition_map(&gen::stochastic_polynomial(s, &t_mat, degree))
                })
                .collect();
            let family = AffineFamily::new(maps.clone(), simplex.clone(), cfg.tol).map_err(err)?;
            let fp = common_fixed_point(&family, cfg.tol).map_err(err)?;
            let worst = maps.iter().map(|m| m.residual(&fp.x)).fold(0.0, f64::max);
            ensure!(worst <= 1e-8, "n = {n}: common fixed point residual {worst:.3e}");
            let outside = oracles::linf_distance(&simplex, &fp.x).ok_or("oracle LP failed")?;
            ensure!(
                outside <= 1e-8,
                "n = {n}: common fixed point {outside:.3e} outside the simplex"
            );
            Ok(Trial::default()
                .worst("family_residual", worst)
                .worst("domain_distance", outside)
                .total("families", 1.0))
        }
    })
}

fn klee_to_kkm(cfg: &RunConfig, ctx: &Ctx) -> Vec<TrialResult> {
    trials(cfg, ctx, ctx.trials, |t, s, seed| {
        let dim = 1 + t % 3;
        let n = 2 + (t / 3) % 3;
        let fam = gen::positive_family(s, dim, n);
        let report = check_ghouila_houri(&fam.members, cfg.resolution, cfg.tol, seed).map_err(err)?;
        ensure!(
            report.status == KleeStatus::CommonPoint,
            "dim {dim}, n = {n}: status {:?}",
            report.status
        );
        // wᵢ meets every member except possibly Cᵢ.
        let mut loo = vec![None; n];
        for sub in report
            .subfamily_intersections
            .iter()
            .filter(|s| s.members.len() == n - 1)
        {
            let missing = (0..n).find(|i| !sub.members.contains(i)).expect("one member left out");
            loo[missing] = sub.witness.clone();
        }
        let loo: Vec<Vector> = loo
            .into_iter()
            .enumerate()
            .map(|(i, w)| w.ok_or_else(|| format!("dim {dim}, n = {n}: no witness without member {i}")))
            .collect::<Result<_, _>>()?;
        // Cᵢ is paired with the witness that skips C_{i−1}, which lies in Cᵢ.
        let domain: Vec<Vector> = (0..n).map(|i| loo[(i + n - 1) % n].clone()).collect();
        let map = FiniteKkmMap::new(domain, fam.members.clone(), fam.simplex.clone(), cfg.tol).map_err(err)?;
        let cert = verify_kkm(&map, cfg.resolution, cfg.tol).map_err(err)?;
        ensure!(
            cert.certified,
            "dim {dim}, n = {n}: induced map not KKM: {:?}",
            cert.violation
        );
        Ok(Trial::default()
            .total("grid_points", cert.points_checked as f64)
            .total("converted_families", 1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = suite_names().collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
    }

    #[test]
    fn tensor_grids_reach_the_requested_size() {
        for d in 1..=3 {
            let g = tensor_grid(d, 1000);
            assert!(g.len() >= 1000);
            assert!(g.iter().all(|x| x.as_slice().iter().all(|&c| (0.0..=1.0).contains(&c))));
        }
    }

    #[test]
    fn small_runs_pass() {
        let mut cfg = RunConfig::default();
        for name in suite_names() {
            cfg.trial_counts.insert(name.to_string(), 2);
        }
        for out in run_all(&cfg) {
            assert!(out.passed, "{}: {:?}", out.name, out.first_failure);
        }
    }
}
