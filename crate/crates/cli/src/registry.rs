//! Named bifunctions and objectives selectable from JSON.

use std::sync::Arc;

use kkmkit_core::alternatives::{BifunctionInstance, StructureTags};
use kkmkit_core::vi::MinimizeDomain;
use kkmkit_core::{Polytope, Vector};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::input::{InputError, MinimizeDomainSpec};

/// Built-in bifunctions `f(x, y)`, tagged by `"name"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinSpec {
    /// `xᵀMy + shift`.
    Bilinear {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        shift: f64,
    },
    /// `xᵀMy − a/2‖x‖² + b/2‖y‖² + shift` with `a, b ≥ 0`: concave in `x`,
    /// convex in `y`.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        a: f64,
        #[serde(default)]
        b: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `‖x − c‖ − w‖y − c‖ + shift` with `w ≥ 0`: convex in `x`, concave in `y`.
    ShiftedNorm {
        center: Vec<f64>,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default)]
        shift: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn bilinear_value(m: &[Vec<f64>], x: &Vector, y: &Vector) -> f64 {
    m.iter()
        .zip(x.as_slice())
        .map(|(row, xi)| xi * row.iter().zip(y.as_slice()).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

fn check_finite(values: &[f64], what: &str) -> Result<(), InputError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(InputError::Invalid(format!("{what} must be finite")))
    }
}

fn check_shape(m: &[Vec<f64>], rows: usize, cols: usize, what: &str) -> Result<(), InputError> {
    if m.len() != rows {
        return Err(InputError::DimensionMismatch(format!(
            "{what}: expected {rows} rows, found {}",
            m.len()
        )));
    }
    for (i, r) in m.iter().enumerate() {
        if r.len() != cols {
            return Err(InputError::DimensionMismatch(format!(
                "{what} row {i}: expected {cols} entries, found {}",
                r.len()
            )));
        }
        check_finite(r, what)?;
    }
    Ok(())
}

impl BuiltinSpec {
    pub fn check_dims(&self, nx: usize, ny: usize, what: &str) -> Result<(), InputError> {
        match self {
            BuiltinSpec::Bilinear { matrix, shift } => {
                check_shape(matrix, nx, ny, what)?;
                check_finite(&[*shift], what)
            }
            BuiltinSpec::Quadratic { matrix, a, b, shift } => {
                check_shape(matrix, nx, ny, what)?;
                check_finite(&[*a, *b, *shift], what)?;
                if *a < 0.0 || *b < 0.0 {
                    return Err(InputError::Invalid(format!("{what}: a and b must be nonnegative")));
                }
                Ok(())
            }
            BuiltinSpec::ShiftedNorm { center, weight, shift } => {
                if center.len() != nx || nx != ny {
                    return Err(InputError::DimensionMismatch(format!(
                        "{what}: center has {} coordinates, X has {nx}, Y has {ny}",
                        center.len()
                    )));
                }
                check_finite(center, what)?;
                check_finite(&[*weight, *shift], what)?;
                if *weight < 0.0 {
                    return Err(InputError::Invalid(format!("{what}: weight must be nonnegative")));
                }
                Ok(())
            }
        }
    }

    pub fn tags(&self) -> StructureTags {
        match self {
            BuiltinSpec::Bilinear { .. } => StructureTags::biaffine(),
            BuiltinSpec::Quadratic { a, b, .. } if *a == 0.0 && *b == 0.0 => StructureTags::biaffine(),
            BuiltinSpec::Quadratic { .. } => StructureTags {
                lsc_in_x: true,
                usc_in_x: true,
                quasiconcave_in_x: true,
                lsc_in_y: true,
                usc_in_y: true,
                quasiconvex_in_y: true,
                ..Default::default()
            },
            BuiltinSpec::ShiftedNorm { weight, .. } => StructureTags {
                lsc_in_x: true,
                usc_in_x: true,
                quasiconvex_in_x: true,
                lsc_in_y: true,
                usc_in_y: true,
                quasiconcave_in_y: true,
                affine_in_y: *weight == 0.0,
                ..Default::default()
            }
            .closure(),
        }
    }

    pub fn instance(&self, x: Polytope, y: Polytope) -> BifunctionInstance {
        let tags = self.tags();
        match self.clone() {
            BuiltinSpec::Bilinear { matrix, shift } => {
                BifunctionInstance::new(x, y, tags, move |x, y| bilinear_value(&matrix, x, y) + shift)
            }
            BuiltinSpec::Quadratic { matrix, a, b, shift } => BifunctionInstance::new(x, y, tags, move |x, y| {
                bilinear_value(&matrix, x, y) - 0.5 * a * x.norm_squared() + 0.5 * b * y.norm_squared() + shift
            }),
            BuiltinSpec::ShiftedNorm { center, weight, shift } => {
                let c = Vector::new(center).expect("validated center");
                BifunctionInstance::new(x, y, tags, move |x, y| x.distance(&c) - weight * y.distance(&c) + shift)
            }
        }
    }
}

/// Built-in objectives for `minimize`, tagged by `"name"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `½xᵀPx + qᵀx`.
    Quadratic {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
    /// `‖x − c‖^p`, `p > 0`.
    NormPower { center: Vec<f64>, power: f64 },
}

impl ObjectiveSpec {
    pub fn check_dims(&self, n: usize) -> Result<(), InputError> {
        match self {
            ObjectiveSpec::Quadratic { p, q } => {
                check_shape(p, n, n, "P")?;
                if q.len() != n {
                    return Err(InputError::DimensionMismatch(format!(
                        "q: expected {n}, found {}",
                        q.len()
                    )));
                }
                check_finite(q, "q")
            }
            ObjectiveSpec::NormPower { center, power } => {
                if center.len() != n {
                    return Err(InputError::DimensionMismatch(format!(
                        "center: expected {n}, found {}",
                        center.len()
                    )));
                }
                check_finite(center, "center")?;
                if !(*power > 0.0 && power.is_finite()) {
                    return Err(InputError::Invalid(format!("power must be positive, got {power}")));
                }
                Ok(())
            }
        }
    }

    pub fn evaluator(&self) -> Arc<dyn Fn(&Vector) -> f64 + Send + Sync> {
        match self.clone() {
            ObjectiveSpec::Quadratic { p, q } => Arc::new(move |x: &Vector| {
                let xs = x.as_slice();
                let quad: f64 = p
                    .iter()
                    .zip(xs)
                    .map(|(row, xi)| xi * row.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>())
                    .sum();
                0.5 * quad + q.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>()
            }),
            ObjectiveSpec::NormPower { center, power } => {
                let c = Vector::new(center).expect("validated center");
                Arc::new(move |x: &Vector| x.distance(&c).powf(power))
            }
        }
    }

    /// `R` with `{φ ≤ t} ⊆ B(0, R(t))`, when the objective is coercive.
    pub fn sublevel_radius(&self) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self.clone() {
            ObjectiveSpec::Quadratic { p, q } => {
                let n = q.len();
                let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (p[i][j] + p[j][i]));
                let mu = SymmetricEigen::new(sym).eigenvalues.min();
                if !(mu > 0.0) {
                    return None;
                }
                let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                // ½μr² − ‖q‖r ≤ φ(x) ≤ t on the sublevel set.
                Some(Arc::new(move |t: f64| {
                    (qn + (qn * qn + 2.0 * mu * t).max(0.0).sqrt()) / mu
                }))
            }
            ObjectiveSpec::NormPower { center, power } => {
                let cn = center.iter().map(|v| v * v).sum::<f64>().sqrt();
                Some(Arc::new(move |t: f64| cn + t.max(0.0).powf(1.0 / power)))
            }
        }
    }

    pub fn domain(&self, spec: &MinimizeDomainSpec) -> MinimizeDomain {
        match spec {
            MinimizeDomainSpec::Polytope(p) => MinimizeDomain::Polytope(p.clone()),
            MinimizeDomainSpec::Unbounded(dim) => MinimizeDomain::Unbounded {
                dim: *dim,
                radius: self.sublevel_radius(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kkmkit_core::vector;

    #[test]
    fn builtins_parse_by_name() {
        let f: BuiltinSpec = serde_json::from_str(r#"{"name": "bilinear", "matrix": [[1, 2]]}"#).unwrap();
        assert!(f.tags().biaffine);
        let g: BuiltinSpec =
            serde_json::from_str(r#"{"name": "shifted_norm", "center": [0, 0], "weight": 2}"#).unwrap();
        assert!(g.tags().quasiconvex_in_x && !g.tags().affine_in_x);
        assert!(serde_json::from_str::<BuiltinSpec>(r#"{"name": "cubic"}"#).is_err());
    }

    #[test]
    fn quadratic_radius_covers_the_sublevel_set() {
        let obj = ObjectiveSpec::Quadratic {
            p: vec![vec![2.0, 0.0], vec![0.0, 1.0]],
            q: vec![-2.0, 0.0],
        };
        let phi = obj.evaluator();
        let r = obj.sublevel_radius().unwrap();
        // Minimizer (1, 0), value −1; φ(0) = 0.
        assert!((phi(&vector![1, 0]) + 1.0).abs() < 1e-15);
        assert!(r(0.0) >= 1.0);
        assert!(obj.sublevel_radius().is_some_and(|r| r(phi(&vector![3, 4])) >= 5.0));
    }

    #[test]
    fn indefinite_quadratic_has_no_radius() {
        let obj = ObjectiveSpec::Quadratic {
            p: vec![vec![1.0, 0.0], vec![0.0, -1.0]],
            q: vec![0.0, 0.0],
        };
        assert!(obj.sublevel_radius().is_none());
    }
}
