//! Nonlinear alternatives and minimax over polytopes.
//!
//! The theorems here are existential, so every operation searches grids (or,
//! for biaffine functions, solves the exact matrix game) and reports what it
//! certified along with the resolution used. A search that cannot certify
//! either branch says so instead of guessing.
//!
//! Sign conventions: in `f(x, y)` the first argument is the maximizing player
//! of a saddle problem (`f(x, y₀) ≤ f(x₀, y₀) ≤ f(x₀, y)`).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_dim, GeometryError};
use crate::geometry::{homothety, polytope_grid, MembershipOracle, Polytope, Sampler, Vector};
use crate::lp::{Bound, LinearProgram, LpError, Relation};

pub type Eval = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlternativeError {
    #[error("neither branch certified at resolution 1/{k} (best {best:.6e} vs threshold {lambda:.6e})")]
    ResolutionInsufficient { k: usize, best: f64, lambda: f64 },
    #[error("declared structure `{tag}` fails: {detail}")]
    StructureViolation { tag: &'static str, detail: String },
    #[error("f > g by {excess:.3e} at x = {x}, y = {y}")]
    PrecondViolated { x: Vector, y: Vector, excess: f64 },
    #[error("sup-inf estimate {alpha:.9e} fell below inf-sup estimate {beta:.9e}")]
    TheoremViolation { alpha: f64, beta: f64 },
    #[error("vertex {vertex} of Y lies outside X")]
    NotSubset { vertex: usize },
    #[error("the two functions must share X and Y")]
    DomainMismatch,
    #[error("payoff matrix must be nonempty and rectangular")]
    MalformedMatrix,
    #[error("function value is not finite at x = {x}, y = {y}")]
    NonFiniteValue { x: Vector, y: Vector },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Declared properties of a bifunction. Semicontinuity cannot be tested and is
/// trusted; the quasi-convexity and affinity tags are spot-checked along
/// seeded random segments before any operation relies on them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructureTags {
    pub lsc_in_x: bool,
    pub usc_in_x: bool,
    pub quasiconvex_in_x: bool,
    pub quasiconcave_in_x: bool,
    pub affine_in_x: bool,
    pub lsc_in_y: bool,
    pub usc_in_y: bool,
    pub quasiconvex_in_y: bool,
    pub quasiconcave_in_y: bool,
    pub affine_in_y: bool,
    /// Affine in each argument separately. Switches saddle computations to the
    /// exact matrix game on the vertex sets.
    #[serde(alias = "bilinear")]
    pub biaffine: bool,
}

impl StructureTags {
    pub fn biaffine() -> Self {
        StructureTags {
            biaffine: true,
            ..Default::default()
        }
        .closure()
    }

    /// Adds every tag implied by the declared ones.
    pub fn closure(mut self) -> Self {
        if self.biaffine {
            self.affine_in_x = true;
            self.affine_in_y = true;
        }
        if self.affine_in_x {
            self.lsc_in_x = true;
            self.usc_in_x = true;
            self.quasiconvex_in_x = true;
            self.quasiconcave_in_x = true;
        }
        if self.affine_in_y {
            self.lsc_in_y = true;
            self.usc_in_y = true;
            self.quasiconvex_in_y = true;
            self.quasiconcave_in_y = true;
        }
        self
    }
}

/// `f : X × Y → ℝ` with declared structure. `eval` must be reentrant.
#[derive(Clone)]
pub struct BifunctionInstance {
    x: Polytope,
    y: Polytope,
    eval: Eval,
    tags: StructureTags,
}

impl fmt::Debug for BifunctionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BifunctionInstance")
            .field("x", &self.x)
            .field("y", &self.y)
            .field("tags", &self.tags)
            .finish_non_exhaustive()
    }
}

impl BifunctionInstance {
    pub fn new(
        x: Polytope,
        y: Polytope,
        tags: StructureTags,
        eval: impl Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BifunctionInstance {
            x,
            y,
            eval: Arc::new(eval),
            tags: tags.closure(),
        }
    }

    /// `f(x, y) = ⟨x, My⟩` on the standard simplices of matching sizes.
    pub fn matrix_game(matrix: Vec<Vec<f64>>) -> Result<Self, AlternativeError> {
        let (rows, cols) = matrix_shape(&matrix)?;
        Ok(BifunctionInstance::new(
            Polytope::standard_simplex(rows),
            Polytope::standard_simplex(cols),
            StructureTags::biaffine(),
            move |x, y| {
                let mut s = 0.0;
                for (i, row) in matrix.iter().enumerate() {
                    s += x[i] * row.iter().zip(y.as_slice()).map(|(m, v)| m * v).sum::<f64>();
                }
                s
            },
        ))
    }

    pub fn x(&self) -> &Polytope {
        &self.x
    }

    pub fn y(&self) -> &Polytope {
        &self.y
    }

    pub fn tags(&self) -> StructureTags {
        self.tags
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        (self.eval)(x, y)
    }

    /// Pointwise `f + c`, keeping the tags.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        BifunctionInstance {
            x: self.x.clone(),
            y: self.y.clone(),
            eval: Arc::new(move |x, y| inner(x, y) + c),
            tags: self.tags,
        }
    }

    fn checked(&self, x: &Vector, y: &Vector) -> Result<f64, AlternativeError> {
        let v = self.eval(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(AlternativeError::NonFiniteValue {
                x: x.clone(),
                y: y.clone(),
            })
        }
    }

    /// Payoff table `M_ij = f(vᵢ, wⱼ)` over the vertex sets.
    pub fn vertex_payoffs(&self) -> Result<Vec<Vec<f64>>, AlternativeError> {
        self.x
            .vertices()
            .iter()
            .map(|v| self.y.vertices().iter().map(|w| self.checked(v, w)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeCertificate {
    pub checked_points: usize,
    /// Signed distance from the certified inequality; `≤ tol` when certified
    /// (negative means strict).
    pub max_violation: f64,
    /// Subdivisions per edge of the starting grid.
    pub grid_k: usize,
    pub refinement_rounds: usize,
    /// Lipschitz pad added to grid extrema over non-affine arguments.
    pub pad: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeOutcome {
    pub branch: Branch,
    pub witness: Vector,
    pub certificate: AlternativeCertificate,
}

/// Grid search schedule: start with `k` subdivisions per edge, then shrink the
/// search region by half around the incumbent `rounds` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSchedule {
    pub k: usize,
    pub rounds: usize,
    /// Grid points per set; larger grids are replaced by seeded samples.
    pub cap: usize,
    pub seed: u64,
}

impl Default for GridSchedule {
    fn default() -> Self {
        GridSchedule {
            k: 8,
            rounds: 5,
            cap: 1_500,
            seed: 0,
        }
    }
}

impl GridSchedule {
    pub fn from_resolution(resolution: f64) -> Self {
        GridSchedule {
            k: (1.0 / resolution - 1e-9).ceil().max(1.0) as usize,
            ..Default::default()
        }
    }
}

/// True when `f` passes the three-point quasiconvexity test on `samples`
/// equispaced points of the segment.
pub fn is_quasiconvex_1d(f: impl Fn(&Vector) -> f64, segment: (&Vector, &Vector), samples: usize) -> bool {
    quasiconvexity_witness(f, segment, samples).is_none()
}

/// Parameters `t₁ < t₂ < t₃` with `f(t₂) > max(f(t₁), f(t₃))`, choosing the
/// middle point with the largest excess. `O(samples)` via prefix and suffix
/// minima.
pub fn quasiconvexity_witness(
    f: impl Fn(&Vector) -> f64,
    segment: (&Vector, &Vector),
    samples: usize,
) -> Option<[f64; 3]> {
    let n = samples.max(3);
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(&segment.0.lerp(segment.1, t))).collect();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;

    let mut prefix = vec![0usize; n];
    for i in 1..n {
        prefix[i] = if vals[i - 1] < vals[prefix[i - 1]] || i == 1 {
            i - 1
        } else {
            prefix[i - 1]
        };
    }
    let mut suffix = vec![n - 1; n];
    for i in (0..n - 1).rev() {
        suffix[i] = if i == n - 2 || vals[i + 1] < vals[suffix[i + 1]] {
            i + 1
        } else {
            suffix[i + 1]
        };
    }
    let mut best: Option<(f64, usize)> = None;
    for j in 1..n - 1 {
        let excess = (vals[j] - vals[prefix[j]]).min(vals[j] - vals[suffix[j]]);
        if excess > tol && best.map_or(true, |(e, _)| excess > e) {
            best = Some((excess, j));
        }
    }
    best.map(|(_, j)| [ts[prefix[j]], ts[j], ts[suffix[j]]])
}

const TAG_SEGMENTS: usize = 8;
const TAG_SAMPLES: usize = 17;

fn structure_error(tag: &'static str, a: &Vector, b: &Vector, other: &Vector) -> AlternativeError {
    AlternativeError::StructureViolation {
        tag,
        detail: format!("along [{a}, {b}] with the other argument at {other}"),
    }
}

/// Spot-checks the requested tags, which must be declared.
fn validate(inst: &BifunctionInstance, required: &[&'static str], seed: u64) -> Result<(), AlternativeError> {
    let t = inst.tags;
    let mut rng = Sampler::new(seed ^ 0x5eed_7a65);
    for &tag in required {
        let declared = match tag {
            "lsc_in_x" => t.lsc_in_x,
            "usc_in_x" => t.usc_in_x,
            "lsc_in_y" => t.lsc_in_y,
            "usc_in_y" => t.usc_in_y,
            "quasiconvex_in_x" => t.quasiconvex_in_x,
            "quasiconcave_in_x" => t.quasiconcave_in_x,
            "quasiconvex_in_y" => t.quasiconvex_in_y,
            "quasiconcave_in_y" => t.quasiconcave_in_y,
            _ => unreachable!("unknown tag {tag}"),
        };
        if !declared {
            return Err(AlternativeError::StructureViolation {
                tag,
                detail: "required but not declared".into(),
            });
        }
        let (in_x, sign) = match tag {
            "quasiconvex_in_x" => (true, 1.0),
            "quasiconcave_in_x" => (true, -1.0),
            "quasiconvex_in_y" => (false, 1.0),
            "quasiconcave_in_y" => (false, -1.0),
            _ => continue,
        };
        for _ in 0..TAG_SEGMENTS {
            let (moving, fixed) = if in_x { (&inst.x, &inst.y) } else { (&inst.y, &inst.x) };
            let a = rng.point_in(moving);
            let b = rng.point_in(moving);
            let other = rng.point_in(fixed);
            let g = |p: &Vector| {
                if in_x {
                    sign * inst.eval(p, &other)
                } else {
                    sign * inst.eval(&other, p)
                }
            };
            if !is_quasiconvex_1d(g, (&a, &b), TAG_SAMPLES) {
                return Err(structure_error(tag, &a, &b, &other));
            }
        }
    }
    if t.biaffine {
        check_biaffine(inst, &mut rng)?;
    }
    Ok(())
}

fn check_biaffine(inst: &BifunctionInstance, rng: &mut Sampler) -> Result<(), AlternativeError> {
    let m = inst.vertex_payoffs()?;
    let scale = m.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
    for _ in 0..16 {
        let l = rng.barycentric(inst.x.len());
        let mu = rng.barycentric(inst.y.len());
        let x = inst.x.combine(&l);
        let y = inst.y.combine(&mu);
        let predicted: f64 = l
            .iter()
            .zip(&m)
            .map(|(li, row)| li * row.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        if (inst.checked(&x, &y)? - predicted).abs() > 1e-9 * scale {
            return Err(AlternativeError::StructureViolation {
                tag: "biaffine",
                detail: format!("value at ({x}, {y}) differs from the vertex interpolation"),
            });
        }
    }
    Ok(())
}

fn matrix_shape(m: &[Vec<f64>]) -> Result<(usize, usize), AlternativeError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols || r.iter().any(|v| !v.is_finite())) {
        return Err(AlternativeError::MalformedMatrix);
    }
    Ok((rows, cols))
}

/// Optimal mixed strategies of the zero-sum game where the row player
/// maximizes `pᵀMq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `pᵀMq` at the returned strategies.
    pub value: f64,
    /// Optimum of the row program `max_p min_j (pᵀM)ⱼ`.
    pub row_value: f64,
    /// Optimum of the column program `min_q max_i (Mq)ᵢ`.
    pub col_value: f64,
}

/// Solves the game with the two primal LPs, so both one-sided values are
/// available for comparison.
pub fn solve_matrix_game(m: &[Vec<f64>]) -> Result<GameSolution, AlternativeError> {
    let (rows, cols) = matrix_shape(m)?;

    let mut lp = LinearProgram::new();
    let v = lp.add_var(1.0, Bound::Free);
    let p: Vec<usize> = (0..rows).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
    lp.add_constraint(p.iter().map(|&i| (i, 1.0)).collect(), Relation::Eq, 1.0);
    for j in 0..cols {
        let mut row: Vec<(usize, f64)> = p.iter().enumerate().map(|(i, &pi)| (pi, m[i][j])).collect();
        row.push((v, -1.0));
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    let row_sol = lp.maximize()?;

    let mut lp = LinearProgram::new();
    let w = lp.add_var(1.0, Bound::Free);
    let q: Vec<usize> = (0..cols).map(|_| lp.add_var(0.0, Bound::NonNegative)).collect();
    lp.add_constraint(q.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    for mi in m {
        let mut row: Vec<(usize, f64)> = q.iter().enumerate().map(|(j, &qj)| (qj, mi[j])).collect();
        row.push((w, -1.0));
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    let col_sol = lp.minimize()?;

    let row_strategy = normalized(p.iter().map(|&i| row_sol.x[i]).collect());
    let col_strategy = normalized(q.iter().map(|&j| col_sol.x[j]).collect());
    let value = row_strategy
        .iter()
        .zip(m)
        .map(|(pi, mi)| pi * mi.iter().zip(&col_strategy).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    Ok(GameSolution {
        row_strategy,
        col_strategy,
        value,
        row_value: row_sol.objective,
        col_value: col_sol.objective,
    })
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    for x in &mut w {
        *x = x.max(0.0);
    }
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Best grid point of `domain` for `objective`, refining around the
/// incumbent. Ties keep the earliest point, so results are deterministic.
fn refine(
    domain: &Polytope,
    sched: &GridSchedule,
    maximize: bool,
    objective: impl Fn(&Vector) -> Result<f64, AlternativeError> + Sync,
) -> Result<(Vector, f64, usize), AlternativeError> {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut best: Option<(Vector, f64)> = None;
    let mut evaluated = 0;
    let mut region = domain.clone();
    for round in 0..=sched.rounds {
        let pts = polytope_grid(&region, sched.k, sched.cap, sched.seed.wrapping_add(round as u64));
        let vals = pts.par_iter().map(&objective).collect::<Result<Vec<f64>, _>>()?;
        evaluated += pts.len();
        for (p, v) in pts.into_iter().zip(vals) {
            if best.as_ref().map_or(true, |(_, b)| better(v, *b)) {
                best = Some((p, v));
            }
        }
        let center = &best.as_ref().expect("grids are nonempty").0;
        region = homothety(domain, center, 0.5f64.powi(round as i32 + 1));
    }
    let (p, v) = best.expect("grids are nonempty");
    Ok((p, v, evaluated))
}

/// Extremum of `y ↦ f(x, y)` over `Y` (or of `x ↦ f(x, y)` over `X`): exact on
/// the vertices when the function is affine in that argument, otherwise the
/// grid extremum padded outward by `pad`.
struct Inner {
    points: Vec<Vector>,
    pad: f64,
    exact: bool,
}

impl Inner {
    fn new(inst: &BifunctionInstance, over_y: bool, sched: &GridSchedule) -> Self {
        let (set, affine) = if over_y {
            (&inst.y, inst.tags.affine_in_y)
        } else {
            (&inst.x, inst.tags.affine_in_x)
        };
        if affine {
            return Inner {
                points: set.vertices().to_vec(),
                pad: 0.0,
                exact: true,
            };
        }
        let points = polytope_grid(set, sched.k, sched.cap, sched.seed ^ 0x1a2b);
        let lip = lipschitz_estimate(inst, over_y, sched.seed);
        Inner {
            points,
            pad: lip * set.diameter() / sched.k as f64,
            exact: false,
        }
    }

    fn max(&self, g: impl Fn(&Vector) -> Result<f64, AlternativeError>) -> Result<f64, AlternativeError> {
        let mut m = f64::NEG_INFINITY;
        for p in &self.points {
            m = m.max(g(p)?);
        }
        Ok(m + self.pad)
    }

    fn min(&self, g: impl Fn(&Vector) -> Result<f64, AlternativeError>) -> Result<f64, AlternativeError> {
        let mut m = f64::INFINITY;
        for p in &self.points {
            m = m.min(g(p)?);
        }
        Ok(m - self.pad)
    }
}

/// Largest difference quotient in one argument over seeded random pairs.
fn lipschitz_estimate(inst: &BifunctionInstance, over_y: bool, seed: u64) -> f64 {
    let mut rng = Sampler::new(seed ^ 0x11_95c4);
    let mut lip: f64 = 0.0;
    for _ in 0..256 {
        if over_y {
            let x = rng.point_in(&inst.x);
            let a = rng.point_in(&inst.y);
            let b = a.lerp(&rng.point_in(&inst.y), 0.05);
            let d = a.distance(&b);
            if d > 0.0 {
                lip = lip.max((inst.eval(&x, &a) - inst.eval(&x, &b)).abs() / d);
            }
        } else {
            let y = rng.point_in(&inst.y);
            let a = rng.point_in(&inst.x);
            let b = a.lerp(&rng.point_in(&inst.x), 0.05);
            let d = a.distance(&b);
            if d > 0.0 {
                lip = lip.max((inst.eval(&a, &y) - inst.eval(&b, &y)).abs() / d);
            }
        }
    }
    if lip.is_finite() {
        lip
    } else {
        f64::MAX
    }
}

/// Ky Fan alternative for `f` on `X × Y` with `Y ⊆ X`: either
/// **A** some `x₀ ∈ Y` has `f(x₀, x₀) > λ`, or
/// **B** some `x̄ ∈ X` has `f(x̄, y) ≤ λ` for all `y ∈ Y`.
pub fn infsup_alternative(
    inst: &BifunctionInstance,
    lambda: f64,
    sched: &GridSchedule,
    tol: f64,
) -> Result<AlternativeOutcome, AlternativeError> {
    check_dim(inst.x.dim(), inst.y.dim())?;
    let ox = MembershipOracle::new(&inst.x);
    for (i, v) in inst.y.vertices().iter().enumerate() {
        if !ox.contains(v, tol)? {
            return Err(AlternativeError::NotSubset { vertex: i });
        }
    }
    validate(inst, &["lsc_in_x", "quasiconvex_in_x", "quasiconcave_in_y"], sched.seed)?;

    let (x0, diag, n_diag) = refine(&inst.y, sched, true, |x| inst.checked(x, x))?;
    if diag > lambda + tol {
        // `x₀ ∈ {y : f(x₀, y) > λ}`: the relation has a fixed point.
        return Ok(AlternativeOutcome {
            branch: Branch::A,
            witness: x0,
            certificate: AlternativeCertificate {
                checked_points: n_diag,
                max_violation: lambda - diag,
                grid_k: sched.k,
                refinement_rounds: sched.rounds,
                pad: 0.0,
                exact: true,
            },
        });
    }

    let inner = Inner::new(inst, true, sched);
    let (xb, phi, n_outer) = refine(&inst.x, sched, false, |x| inner.max(|y| inst.checked(x, y)))?;
    if phi <= lambda + tol {
        return Ok(AlternativeOutcome {
            branch: Branch::B,
            witness: xb,
            certificate: AlternativeCertificate {
                checked_points: n_diag + n_outer * inner.points.len(),
                max_violation: phi - lambda,
                grid_k: sched.k,
                refinement_rounds: sched.rounds,
                pad: inner.pad,
                exact: inner.exact,
            },
        });
    }
    Err(AlternativeError::ResolutionInsufficient {
        k: sched.k,
        best: phi,
        lambda,
    })
}

fn same_domains(f: &BifunctionInstance, g: &BifunctionInstance) -> Result<(), AlternativeError> {
    if f.x != g.x || f.y != g.y {
        return Err(AlternativeError::DomainMismatch);
    }
    Ok(())
}

/// Checks `f ≤ g` on the product of the two grids.
fn check_dominated(
    f: &BifunctionInstance,
    g: &BifunctionInstance,
    sched: &GridSchedule,
    tol: f64,
) -> Result<(), AlternativeError> {
    let xs = polytope_grid(&f.x, sched.k, sched.cap.min(400), sched.seed);
    let ys = polytope_grid(&f.y, sched.k, sched.cap.min(400), sched.seed ^ 1);
    let worst = xs
        .par_iter()
        .map(|x| {
            let mut worst: Option<(f64, &Vector)> = None;
            for y in &ys {
                let e = f.checked(x, y)? - g.checked(x, y)?;
                if worst.map_or(true, |(w, _)| e > w) {
                    worst = Some((e, y));
                }
            }
            let (e, y) = worst.expect("grids are nonempty");
            Ok((e, x, y))
        })
        .collect::<Result<Vec<_>, AlternativeError>>()?
        .into_iter()
        .fold(None, |acc: Option<(f64, &Vector, &Vector)>, c| match acc {
            Some(a) if a.0 >= c.0 => Some(a),
            _ => Some(c),
        })
        .expect("grids are nonempty");
    if worst.0 > tol {
        return Err(AlternativeError::PrecondViolated {
            x: worst.1.clone(),
            y: worst.2.clone(),
            excess: worst.0,
        });
    }
    Ok(())
}

/// `α = sup_x inf_y g` and `β = inf_y sup_x f`, with witnesses.
struct TwoSided {
    alpha: f64,
    x_bar: Vector,
    beta: f64,
    y_bar: Vector,
    checked: usize,
    pad: f64,
    exact: bool,
}

fn two_sided(
    f: &BifunctionInstance,
    g: &BifunctionInstance,
    sched: &GridSchedule,
) -> Result<TwoSided, AlternativeError> {
    if f.tags.biaffine && g.tags.biaffine {
        let gs = solve_matrix_game(&g.vertex_payoffs()?)?;
        let fs = solve_matrix_game(&f.vertex_payoffs()?)?;
        return Ok(TwoSided {
            alpha: gs.row_value,
            x_bar: g.x.combine(&gs.row_strategy),
            beta: fs.col_value,
            y_bar: f.y.combine(&fs.col_strategy),
            checked: 0,
            pad: 0.0,
            exact: true,
        });
    }
    let inner_g = Inner::new(g, true, sched);
    let (x_bar, alpha, nx) = refine(&g.x, sched, true, |x| inner_g.min(|y| g.checked(x, y)))?;
    let inner_f = Inner::new(f, false, sched);
    let (y_bar, beta, ny) = refine(&f.y, sched, false, |y| inner_f.max(|x| f.checked(x, y)))?;
    Ok(TwoSided {
        alpha,
        x_bar,
        beta,
        y_bar,
        checked: nx * inner_g.points.len() + ny * inner_f.points.len(),
        pad: inner_g.pad.max(inner_f.pad),
        exact: inner_g.exact && inner_f.exact,
    })
}

/// Two-function alternative for `f ≤ g`: either
/// **A** some `x̄` has `g(x̄, y) ≥ λ` for all `y ∈ Y`, or
/// **B** some `ȳ` has `f(x, ȳ) ≤ λ` for all `x ∈ X`.
pub fn two_function_alternative(
    f: &BifunctionInstance,
    g: &BifunctionInstance,
    lambda: f64,
    sched: &GridSchedule,
    tol: f64,
) -> Result<AlternativeOutcome, AlternativeError> {
    same_domains(f, g)?;
    validate(g, &["lsc_in_x", "quasiconcave_in_x"], sched.seed)?;
    validate(f, &["usc_in_y", "quasiconvex_in_y"], sched.seed)?;
    check_dominated(f, g, sched, tol)?;
    let s = two_sided(f, g, sched)?;
    let certificate = |max_violation| AlternativeCertificate {
        checked_points: s.checked,
        max_violation,
        grid_k: sched.k,
        refinement_rounds: sched.rounds,
        pad: s.pad,
        exact: s.exact,
    };
    if s.alpha >= lambda - tol {
        Ok(AlternativeOutcome {
            branch: Branch::A,
            witness: s.x_bar.clone(),
            certificate: certificate(lambda - s.alpha),
        })
    } else if s.beta <= lambda + tol {
        Ok(AlternativeOutcome {
            branch: Branch::B,
            witness: s.y_bar.clone(),
            certificate: certificate(s.beta - lambda),
        })
    } else {
        Err(AlternativeError::ResolutionInsufficient {
            k: sched.k,
            best: s.alpha,
            lambda,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `sup_x inf_y g`.
    pub alpha: f64,
    /// `inf_y sup_x f`.
    pub beta: f64,
    pub exact: bool,
}

/// Estimates both sides of `sup_x inf_y g ≥ inf_y sup_x f` for `f ≤ g`. A
/// violation beyond `tol` means the inputs break the hypotheses.
pub fn supinf_infsup_gap(
    f: &BifunctionInstance,
    g: &BifunctionInstance,
    sched: &GridSchedule,
    tol: f64,
) -> Result<GapReport, AlternativeError> {
    same_domains(f, g)?;
    check_dominated(f, g, sched, tol)?;
    let s = two_sided(f, g, sched)?;
    if s.alpha < s.beta - tol {
        return Err(AlternativeError::TheoremViolation {
            alpha: s.alpha,
            beta: s.beta,
        });
    }
    Ok(GapReport {
        alpha: s.alpha,
        beta: s.beta,
        exact: s.exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub x0: Vector,
    pub y0: Vector,
    pub value: f64,
    /// `sup_x inf_y f` and `inf_y sup_x f` as computed.
    pub supinf: f64,
    pub infsup: f64,
    /// Largest violation of the two saddle inequalities over the checked set.
    pub max_violation: f64,
    pub exact: bool,
}

/// Saddle point with `f(x, y₀) ≤ f(x₀, y₀) ≤ f(x₀, y)`. Biaffine instances
/// are solved exactly as a matrix game on the vertex sets; others by grid
/// refinement, failing when the grid saddle check does not close.
pub fn saddle_point(
    inst: &BifunctionInstance,
    sched: &GridSchedule,
    tol: f64,
) -> Result<SaddlePoint, AlternativeError> {
    validate(
        inst,
        &["usc_in_x", "quasiconcave_in_x", "lsc_in_y", "quasiconvex_in_y"],
        sched.seed,
    )?;
    if inst.tags.biaffine {
        let game = solve_matrix_game(&inst.vertex_payoffs()?)?;
        let x0 = inst.x.combine(&game.row_strategy);
        let y0 = inst.y.combine(&game.col_strategy);
        let value = inst.checked(&x0, &y0)?;
        let mut viol: f64 = 0.0;
        for v in inst.x.vertices() {
            viol = viol.max(inst.checked(v, &y0)? - value);
        }
        for w in inst.y.vertices() {
            viol = viol.max(value - inst.checked(&x0, w)?);
        }
        return Ok(SaddlePoint {
            x0,
            y0,
            value,
            supinf: game.row_value,
            infsup: game.col_value,
            max_violation: viol,
            exact: true,
        });
    }

    let inner_y = Inner::new(inst, true, sched);
    let (x0, supinf, _) = refine(&inst.x, sched, true, |x| inner_y.min(|y| inst.checked(x, y)))?;
    let inner_x = Inner::new(inst, false, sched);
    let (y0, infsup, _) = refine(&inst.y, sched, false, |y| inner_x.max(|x| inst.checked(x, y)))?;
    let value = inst.checked(&x0, &y0)?;
    let xs = polytope_grid(&inst.x, sched.k, sched.cap, sched.seed ^ 2);
    let ys = polytope_grid(&inst.y, sched.k, sched.cap, sched.seed ^ 3);
    let mut viol: f64 = 0.0;
    for x in &xs {
        viol = viol.max(inst.checked(x, &y0)? - value);
    }
    for y in &ys {
        viol = viol.max(value - inst.checked(&x0, y)?);
    }
    if viol > tol {
        return Err(AlternativeError::ResolutionInsufficient {
            k: sched.k,
            best: viol,
            lambda: tol,
        });
    }
    Ok(SaddlePoint {
        x0,
        y0,
        value,
        supinf,
        infsup,
        max_violation: viol,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    fn inner_product_on_square() -> BifunctionInstance {
        let sq = Polytope::cube(2, -1.0, 1.0);
        BifunctionInstance::new(sq.clone(), sq, StructureTags::biaffine(), |x, y| x.dot(y))
    }

    #[test]
    fn quasiconvexity_examples() {
        let a = vector![-1, 3];
        let b = vector![2, -0.5];
        assert!(is_quasiconvex_1d(|x| x.norm_squared(), (&a, &b), 101));
        let (l, r) = (vector![-1], vector![2]);
        assert!(is_quasiconvex_1d(|x| x[0].abs().sqrt(), (&l, &r), 301));
        let (l, r) = (vector![0], vector![std::f64::consts::TAU]);
        let w = quasiconvexity_witness(|x| x[0].sin(), (&l, &r), 201).unwrap();
        assert!((w[1] * std::f64::consts::TAU - std::f64::consts::FRAC_PI_2).abs() < 0.05);
        assert!(w[0] < w[1] && w[1] < w[2]);
    }

    #[test]
    fn bounded_inner_product_gives_branch_b() {
        let out = infsup_alternative(&inner_product_on_square(), 2.0, &GridSchedule::default(), 1e-9).unwrap();
        assert_eq!(out.branch, Branch::B);
        assert!(out.certificate.max_violation <= 0.0);
        assert!(out.certificate.exact);
    }

    #[test]
    fn diagonal_search_gives_branch_a() {
        let iv = Polytope::cube(1, 0.0, 1.0);
        let tags = StructureTags {
            lsc_in_x: true,
            quasiconvex_in_x: true,
            affine_in_y: true,
            ..Default::default()
        };
        let inst = BifunctionInstance::new(iv.clone(), iv, tags, |x, _| x.norm_squared());
        let out = infsup_alternative(&inst, 0.5, &GridSchedule::default(), 1e-9).unwrap();
        assert_eq!(out.branch, Branch::A);
        assert_eq!(out.witness, vector![1]);
        // the fixed point of y ∈ {f(x, ·) > λ}
        assert!(inst.eval(&out.witness, &out.witness) > 0.5);
    }

    #[test]
    fn threshold_at_diagonal_sup_forces_branch_b() {
        let sq = Polytope::cube(2, -1.0, 1.0);
        let m = [[0.3, -1.2], [0.7, 0.4]];
        let inst = BifunctionInstance::new(sq.clone(), sq, StructureTags::biaffine(), move |x, y| {
            x[0] * (m[0][0] * y[0] + m[0][1] * y[1]) + x[1] * (m[1][0] * y[0] + m[1][1] * y[1])
        });
        let diag_sup = inst
            .x()
            .vertices()
            .iter()
            .map(|v| inst.eval(v, v))
            .fold(f64::NEG_INFINITY, f64::max);
        let out = infsup_alternative(&inst, diag_sup, &GridSchedule::default(), 1e-9).unwrap();
        assert_eq!(out.branch, Branch::B);
    }

    #[test]
    fn non_subset_is_rejected() {
        let x = Polytope::cube(1, 0.0, 1.0);
        let y = Polytope::cube(1, 0.0, 2.0);
        let inst = BifunctionInstance::new(x, y, StructureTags::biaffine(), |a, b| a[0] * b[0]);
        assert_eq!(
            infsup_alternative(&inst, 0.0, &GridSchedule::default(), 1e-9).unwrap_err(),
            AlternativeError::NotSubset { vertex: 1 }
        );
    }

    #[test]
    fn false_tags_are_caught() {
        let iv = Polytope::cube(1, -1.0, 1.0);
        let tags = StructureTags {
            lsc_in_x: true,
            quasiconvex_in_x: true,
            quasiconcave_in_y: true,
            ..Default::default()
        };
        let inst = BifunctionInstance::new(iv.clone(), iv, tags, |x, y| -(x[0] * x[0]) + y[0]);
        assert!(matches!(
            infsup_alternative(&inst, 0.0, &GridSchedule::default(), 1e-9),
            Err(AlternativeError::StructureViolation {
                tag: "quasiconvex_in_x",
                ..
            })
        ));
    }

    #[test]
    fn matching_pennies_and_rps() {
        let mp = solve_matrix_game(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(mp.value.abs() <= 1e-12);
        assert!((mp.row_strategy[0] - 0.5).abs() < 1e-12);
        assert!((mp.col_strategy[0] - 0.5).abs() < 1e-12);
        let rps = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
        let s = saddle_point(
            &BifunctionInstance::matrix_game(rps).unwrap(),
            &GridSchedule::default(),
            1e-9,
        )
        .unwrap();
        assert!(s.value.abs() <= 1e-12);
        for c in s.x0.as_slice().iter().chain(s.y0.as_slice()) {
            assert!((c - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(s.max_violation <= 1e-12);
    }

    #[test]
    fn game_with_pure_saddle() {
        let g = solve_matrix_game(&[vec![3.0, 5.0], vec![1.0, 2.0]]).unwrap();
        assert!((g.value - 3.0).abs() < 1e-12);
        assert_eq!(g.row_strategy, vec![1.0, 0.0]);
        assert_eq!(g.col_strategy, vec![1.0, 0.0]);
    }

    #[test]
    fn two_function_trivial_branches() {
        let iv = Polytope::cube(1, 0.0, 1.0);
        let f = BifunctionInstance::new(iv.clone(), iv.clone(), StructureTags::biaffine(), |_, _| 0.0);
        let g = f.shifted(1.0);
        let sched = GridSchedule::default();
        assert_eq!(
            two_function_alternative(&f, &g, 0.5, &sched, 1e-9).unwrap().branch,
            Branch::A
        );
        assert_eq!(
            two_function_alternative(&f, &g, 2.0, &sched, 1e-9).unwrap().branch,
            Branch::B
        );
        assert!(matches!(
            two_function_alternative(&g, &f, 0.5, &sched, 1e-9),
            Err(AlternativeError::PrecondViolated { .. })
        ));
    }

    #[test]
    fn two_function_branch_tracks_game_value() {
        let m = vec![vec![2.0, -1.0], vec![-1.0, 1.0]];
        let value = solve_matrix_game(&m).unwrap().value;
        let f = BifunctionInstance::matrix_game(m).unwrap();
        let sched = GridSchedule::default();
        let below = two_function_alternative(&f, &f, value - 0.1, &sched, 1e-9).unwrap();
        assert_eq!(below.branch, Branch::A);
        let above = two_function_alternative(&f, &f, value + 0.1, &sched, 1e-9).unwrap();
        assert_eq!(above.branch, Branch::B);
    }

    #[test]
    fn gap_examples() {
        let f = BifunctionInstance::matrix_game(vec![vec![1.0, 4.0, -2.0], vec![0.5, -1.0, 3.0]]).unwrap();
        let sched = GridSchedule::default();
        let same = supinf_infsup_gap(&f, &f, &sched, 1e-9).unwrap();
        assert!((same.alpha - same.beta).abs() < 1e-9);
        let shifted = supinf_infsup_gap(&f, &f.shifted(1.0), &sched, 1e-9).unwrap();
        assert!(shifted.alpha >= shifted.beta + 1.0 - 1e-9);
        let iv = Polytope::cube(1, 0.0, 1.0);
        let c = BifunctionInstance::new(iv.clone(), iv, StructureTags::default(), |_, _| 2.5);
        let r = supinf_infsup_gap(&c, &c, &sched, 1e-9).unwrap();
        assert_eq!((r.alpha, r.beta), (2.5, 2.5));
    }

    #[test]
    fn concave_convex_grid_saddle() {
        // f = −(x − 0.3)² + (y − 0.6)², saddle at (0.3, 0.6).
        let iv = Polytope::cube(1, 0.0, 1.0);
        let tags = StructureTags {
            usc_in_x: true,
            quasiconcave_in_x: true,
            lsc_in_y: true,
            quasiconvex_in_y: true,
            ..Default::default()
        };
        let inst = BifunctionInstance::new(iv.clone(), iv, tags, |x, y| {
            -(x[0] - 0.3).powi(2) + (y[0] - 0.6).powi(2)
        });
        let s = saddle_point(&inst, &GridSchedule::default(), 1e-3).unwrap();
        assert!((s.x0[0] - 0.3).abs() < 0.02, "{}", s.x0);
        assert!((s.y0[0] - 0.6).abs() < 0.02, "{}", s.y0);
        assert!(!s.exact);
    }
}
