//! Stampacchia variational inequalities and quasiconvex minimization.
//!
//! Bilinear forms follow `a(x, z) = xᵀAz`. The inequality solved is
//! `a(x̄, x̄ − y) ≤ ℓ(x̄) − ℓ(y)` for all `y ∈ X`, i.e. `⟨Aᵀx̄ − ℓ, y − x̄⟩ ≥ 0`,
//! so the associated operator is `F(x) = Aᵀx − ℓ`. With `A = I` the solution
//! is the projection of `ℓ` onto `X`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alternatives::quasiconvexity_witness;
use crate::error::{check_dim, GeometryError};
use crate::geometry::{polytope_grid, project, Polytope, Sampler, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViError {
    #[error("coercivity constant must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("matrix must be square and nonempty")]
    MalformedMatrix,
    #[error("declared constant {name} = {declared} is inconsistent with the matrix ({actual})")]
    InconsistentConstant {
        name: &'static str,
        declared: f64,
        actual: f64,
    },
    #[error("contraction did not converge after {iterations} iterations (VI residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("solutions from two starts differ by {distance:.3e}")]
    UniquenessViolated { distance: f64 },
    #[error("function fails quasiconvexity along [{from}, {to}] at parameters {params:?}")]
    QuasiconvexityViolated { from: Vector, to: Vector, params: [f64; 3] },
    #[error("unbounded domain needs a coercivity radius function")]
    CoercivityRadiusMissing,
    #[error("objective is not finite at {0}")]
    NonFiniteValue(Vector),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `a(x, z) = xᵀAz` with `|a(x, z)| ≤ C‖x‖‖z‖` and `a(x, x) ≥ α‖x‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearForm {
    matrix: Vec<Vec<f64>>,
    continuity_c: f64,
    coercivity_alpha: f64,
}

fn to_dmatrix(m: &[Vec<f64>]) -> Result<DMatrix<f64>, ViError> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n || r.iter().any(|v| !v.is_finite())) {
        return Err(ViError::MalformedMatrix);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
}

fn spectral_constants(a: &DMatrix<f64>) -> (f64, f64) {
    let c = a.clone().svd(false, false).singular_values.max();
    let sym = (a + a.transpose()) * 0.5;
    let alpha = sym.symmetric_eigen().eigenvalues.min();
    (c, alpha)
}

impl BilinearForm {
    /// Uses the sharp constants: `C = ‖A‖₂`, `α = λ_min((A + Aᵀ)/2)`.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self, ViError> {
        let (c, alpha) = spectral_constants(&to_dmatrix(&matrix)?);
        if alpha <= 0.0 {
            return Err(ViError::NonpositiveAlpha(alpha));
        }
        Ok(BilinearForm {
            matrix,
            continuity_c: c,
            coercivity_alpha: alpha,
        })
    }

    /// Declared constants, checked against the matrix within `tol`.
    pub fn with_constants(matrix: Vec<Vec<f64>>, c: f64, alpha: f64, tol: f64) -> Result<Self, ViError> {
        if alpha <= 0.0 {
            return Err(ViError::NonpositiveAlpha(alpha));
        }
        let (c_true, alpha_true) = spectral_constants(&to_dmatrix(&matrix)?);
        if c < c_true - tol {
            return Err(ViError::InconsistentConstant {
                name: "C",
                declared: c,
                actual: c_true,
            });
        }
        if alpha > alpha_true + tol {
            return Err(ViError::InconsistentConstant {
                name: "alpha",
                declared: alpha,
                actual: alpha_true,
            });
        }
        Ok(BilinearForm {
            matrix,
            continuity_c: c,
            coercivity_alpha: alpha,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn continuity_c(&self) -> f64 {
        self.continuity_c
    }

    pub fn coercivity_alpha(&self) -> f64 {
        self.coercivity_alpha
    }

    pub fn apply(&self, x: &Vector, z: &Vector) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            s += x[i] * row.iter().zip(z.as_slice()).map(|(a, b)| a * b).sum::<f64>();
        }
        s
    }

    /// `Aᵀx`.
    fn transpose_apply(&self, x: &Vector) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (i, row) in self.matrix.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(row) {
                *o += x[i] * a;
            }
        }
        out
    }

    /// Contraction factor `√(1 − α²/C²)` of the projected step with `ρ = α/C²`.
    pub fn contraction_factor(&self) -> f64 {
        let r = self.coercivity_alpha / self.continuity_c;
        (1.0 - r * r).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    vector: Vector,
    norm: f64,
}

impl LinearFunctional {
    pub fn new(vector: Vector) -> Self {
        let norm = vector.norm();
        LinearFunctional { vector, norm }
    }

    pub fn vector(&self) -> &Vector {
        &self.vector
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn apply(&self, x: &Vector) -> f64 {
        self.vector.dot(x)
    }
}

/// A-priori radius: any `x` with `a(x, x − y₀) ≤ ℓ(x) − ℓ(y₀)` has `‖x‖ ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityBound {
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

/// From `α‖x‖² ≤ (C‖y₀‖ + ‖ℓ‖)‖x‖ + ‖ℓ‖‖y₀‖`: `β = (C‖y₀‖ + ‖ℓ‖)/α`,
/// `γ = ‖ℓ‖‖y₀‖/α`, and `M` is the positive root of `t² − βt − γ`.
pub fn coercivity_bound(c: f64, alpha: f64, ell_norm: f64, y0_norm: f64) -> Result<CoercivityBound, ViError> {
    if !(alpha > 0.0) {
        return Err(ViError::NonpositiveAlpha(alpha));
    }
    let beta = (c * y0_norm + ell_norm) / alpha;
    let gamma = ell_norm * y0_norm / alpha;
    Ok(CoercivityBound {
        beta,
        gamma,
        m: (beta + (beta * beta + 4.0 * gamma).sqrt()) / 2.0,
    })
}

/// `f(x, y) = a(x, x − y) − ℓ(x − y)`; `x̄` solves the VI iff `f(x̄, ·) ≤ 0`.
pub fn vi_gap(a: &BilinearForm, ell: &LinearFunctional, x: &Vector, y: &Vector) -> f64 {
    let d = x - y;
    a.apply(x, &d) - ell.apply(&d)
}

/// `max_y f(x, y)` over the vertices of `X`; exact over `X` since `f(x, ·)`
/// is affine.
pub fn vi_residual(a: &BilinearForm, ell: &LinearFunctional, x_set: &Polytope, x: &Vector) -> f64 {
    x_set
        .vertices()
        .iter()
        .map(|y| vi_gap(a, ell, x, y))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViSolution {
    pub x: Vector,
    /// Vertex-certified residual `max_y a(x, x − y) − ℓ(x − y)`.
    pub residual: f64,
    pub iterations: usize,
    pub contraction_factor: f64,
    /// Distance between the solutions reached from two opposite starts.
    pub uniqueness_gap: f64,
}

const MAX_ITERATIONS: usize = 200_000;

fn check_instance(a: &BilinearForm, ell: &LinearFunctional, x_set: &Polytope) -> Result<(), ViError> {
    check_dim(a.dim(), ell.vector.dim())?;
    check_dim(a.dim(), x_set.dim())?;
    Ok(())
}

/// Projected contraction from `start`, recording every iterate.
pub fn stampacchia_trace(
    a: &BilinearForm,
    ell: &LinearFunctional,
    x_set: &Polytope,
    start: &Vector,
    tol: f64,
) -> Result<(ViSolution, Vec<Vector>), ViError> {
    check_instance(a, ell, x_set)?;
    check_dim(a.dim(), start.dim())?;
    let q = a.contraction_factor();
    let rho = a.coercivity_alpha / (a.continuity_c * a.continuity_c);
    let ptol = (tol * 1e-3).max(1e-15);
    let mut x = project(x_set, start, ptol)?.point;
    let mut trace = vec![x.clone()];
    // Step size at which the remaining distance to the fixed point is at most
    // `tol`; tightened whenever the vertex residual still exceeds `tol`.
    let mut target = tol;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = a.transpose_apply(&x);
        let step: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(&g)
            .zip(ell.vector.as_slice())
            .map(|((xi, gi), li)| xi - rho * (gi - li))
            .collect();
        let next = project(x_set, &Vector::new(step)?, ptol)?.point;
        let moved = next.distance(&x);
        x = next;
        trace.push(x.clone());
        let settled = q == 0.0 || moved <= target * (1.0 - q) / q;
        if settled {
            let residual = vi_residual(a, ell, x_set, &x);
            if residual <= tol || moved == 0.0 {
                return Ok((
                    ViSolution {
                        x,
                        residual,
                        iterations,
                        contraction_factor: q,
                        uniqueness_gap: 0.0,
                    },
                    trace,
                ));
            }
            target *= 0.1;
            if target < f64::EPSILON * (1.0 + x.norm()) {
                return Err(ViError::NonConvergence { iterations, residual });
            }
        }
    }
    Err(ViError::NonConvergence {
        iterations,
        residual: vi_residual(a, ell, x_set, &x),
    })
}

/// Solves the VI from the two opposite corners of the bounding box and
/// checks that both runs agree, as uniqueness demands.
pub fn stampacchia_solve(
    a: &BilinearForm,
    ell: &LinearFunctional,
    x_set: &Polytope,
    tol: f64,
) -> Result<ViSolution, ViError> {
    check_instance(a, ell, x_set)?;
    let (lo, hi) = x_set.bounding_box();
    let runs = [lo, hi]
        .par_iter()
        .map(|s| stampacchia_trace(a, ell, x_set, s, tol).map(|(sol, _)| sol))
        .collect::<Result<Vec<_>, _>>()?;
    let distance = runs[0].x.distance(&runs[1].x);
    let scale = 1.0 + runs[0].x.norm();
    if distance > 10.0 * tol * scale {
        return Err(ViError::UniquenessViolated { distance });
    }
    let mut sol = runs.into_iter().next().expect("two runs");
    sol.uniqueness_gap = distance;
    Ok(sol)
}

pub type Objective = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// Where to minimize: a polytope, or all of `ℝⁿ` together with a radius
/// function `R` such that `{φ ≤ c} ⊆ B(0, R(c))`.
#[derive(Clone)]
pub enum MinimizeDomain {
    Polytope(Polytope),
    Unbounded {
        dim: usize,
        radius: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    },
}

impl fmt::Debug for MinimizeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimizeDomain::Polytope(p) => f.debug_tuple("Polytope").field(p).finish(),
            MinimizeDomain::Unbounded { dim, radius } => f
                .debug_struct("Unbounded")
                .field("dim", dim)
                .field("radius", &radius.is_some())
                .finish(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub xbar: Vector,
    pub value: f64,
    /// Grid and refinement samples `x` checked for `φ(x̄) ≤ φ(x) + tol`.
    pub samples_checked: usize,
    /// Compact set actually searched (the truncation for unbounded domains).
    pub search_set: Polytope,
}

const STARTS: usize = 5;
const MAX_SWEEPS: usize = 400;
const VALIDATION_SEGMENTS: usize = 8;

/// Minimizes a quasiconvex `φ` by pairwise barycentric line searches: mass
/// moves between two vertices at a time, and `φ` restricted to such a segment
/// is quasiconvex, so a bracketing search finds its minimum. Five seeded
/// starts, then a grid check that restarts from any sample that beats the
/// incumbent.
pub fn mazur_schauder_minimize(
    phi: impl Fn(&Vector) -> f64 + Sync,
    domain: &MinimizeDomain,
    tol: f64,
    seed: u64,
) -> Result<Minimum, ViError> {
    let set = match domain {
        MinimizeDomain::Polytope(p) => p.clone(),
        MinimizeDomain::Unbounded { dim, radius } => {
            let radius = radius.as_ref().ok_or(ViError::CoercivityRadiusMissing)?;
            let origin = Vector::zeros(*dim);
            let level = checked(&phi, &origin)?;
            // The sublevel set at φ(0) is nonempty and inside the ball of
            // radius R; the cross-polytope of radius R√n contains that ball.
            let r = radius(level).max(0.0) * (*dim as f64).sqrt();
            let mut verts = Vec::with_capacity(2 * dim);
            for i in 0..*dim {
                verts.push(Vector::basis(*dim, i).scale(r.max(1e-12)));
                verts.push(Vector::basis(*dim, i).scale(-r.max(1e-12)));
            }
            Polytope::new(verts)?
        }
    };

    let mut rng = Sampler::new(seed);
    for _ in 0..VALIDATION_SEGMENTS {
        let a = rng.point_in(&set);
        let b = rng.point_in(&set);
        if let Some(params) = quasiconvexity_witness(&phi, (&a, &b), 33) {
            return Err(ViError::QuasiconvexityViolated { from: a, to: b, params });
        }
    }

    let m = set.len();
    let mut starts = vec![vec![1.0 / m as f64; m]];
    while starts.len() < STARTS {
        starts.push(rng.barycentric(m));
    }
    let runs = starts
        .into_par_iter()
        .map(|w| pairwise_descent(&phi, &set, w))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut weights, mut value) = best_of(runs);

    let grid = polytope_grid(&set, 16, 4_000, seed ^ 0x9e37);
    let mut samples_checked = grid.len();
    for _ in 0..3 {
        let mut beaten = None;
        for (i, x) in grid.iter().enumerate() {
            let v = checked(&phi, x)?;
            if v < value - tol && beaten.map_or(true, |(_, b)| v < b) {
                beaten = Some((i, v));
            }
        }
        let Some((i, _)) = beaten else { break };
        // Restart from the barycentric coordinates of the winning sample.
        let w = grid_weights(&set, i, &grid, seed);
        let (w2, v2) = pairwise_descent(&phi, &set, w)?;
        samples_checked += grid.len();
        if v2 < value {
            weights = w2;
            value = v2;
        } else {
            break;
        }
    }
    let xbar = set.combine(&weights);
    Ok(Minimum {
        value: checked(&phi, &xbar)?,
        xbar,
        samples_checked,
        search_set: set,
    })
}

fn checked(phi: &impl Fn(&Vector) -> f64, x: &Vector) -> Result<f64, ViError> {
    let v = phi(x);
    if v.is_nan() {
        return Err(ViError::NonFiniteValue(x.clone()));
    }
    Ok(v)
}

fn best_of(runs: Vec<(Vec<f64>, f64)>) -> (Vec<f64>, f64) {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (w, v) in runs {
        if best.as_ref().map_or(true, |(_, b)| v < *b) {
            best = Some((w, v));
        }
    }
    best.expect("at least one start")
}

/// Barycentric weights reproducing `grid[i]`, matching how `polytope_grid`
/// produced it.
fn grid_weights(set: &Polytope, i: usize, grid: &[Vector], seed: u64) -> Vec<f64> {
    use crate::geometry::{barycentric_grid, grid_size};
    let m = set.len();
    if grid_size(m, 16) <= 4_000 {
        return barycentric_grid(m, 16).swap_remove(i);
    }
    // Sampled grid: vertices, then the barycenter, then seeded draws.
    if i < m {
        let mut w = vec![0.0; m];
        w[i] = 1.0;
        return w;
    }
    if i == m {
        return vec![1.0 / m as f64; m];
    }
    let mut sampler = Sampler::new(seed ^ 0x9e37);
    let mut w = Vec::new();
    for _ in m + 1..=i {
        w = sampler.barycentric(m);
    }
    debug_assert!(set.combine(&w).max_abs_diff(&grid[i]) < 1e-12);
    w
}

fn pairwise_descent(
    phi: &(impl Fn(&Vector) -> f64 + Sync),
    set: &Polytope,
    mut w: Vec<f64>,
) -> Result<(Vec<f64>, f64), ViError> {
    let m = set.len();
    let mut value = checked(phi, &set.combine(&w))?;
    if m == 1 {
        return Ok((w, value));
    }
    for _ in 0..MAX_SWEEPS {
        let before = value;
        for i in 0..m {
            for j in i + 1..m {
                let total = w[i] + w[j];
                if total <= 0.0 {
                    continue;
                }
                let eval = |s: f64| {
                    let mut trial = w.clone();
                    trial[i] = s;
                    trial[j] = total - s;
                    phi(&set.combine(&trial))
                };
                let (s, v) = brent_min(eval, 0.0, total, w[i]);
                if v < value {
                    w[i] = s;
                    w[j] = total - s;
                    value = v;
                }
            }
        }
        if !(before - value > 1e-15 * (1.0 + value.abs())) {
            break;
        }
    }
    Ok((w, value))
}

/// Brent's minimizer on `[a, b]`; the endpoints and the current point are
/// also compared so that flat or kinked functions never lose ground.
fn brent_min(f: impl Fn(f64) -> f64, a: f64, b: f64, current: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a, b);
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = 1e-12 * x.abs() + 1e-15;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    let mut best = (x, fx);
    for s in [a, b, current] {
        let fs = f(s);
        if fs < best.1 {
            best = (s, fs);
        }
    }
    best
}
