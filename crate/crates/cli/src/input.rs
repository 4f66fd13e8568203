//! JSON instance files.
//!
//! Each format is first read into a plain serde shape and then checked for
//! dimensional consistency, so syntax problems (with a line and column) and
//! shape problems are reported separately.

use std::collections::BTreeMap;

use kkmkit_core::fixed_points::AffineMap;
use kkmkit_core::{GeometryError, Polytope, Vector};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

use crate::registry::{BuiltinSpec, ObjectiveSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl InputError {
    fn dims(what: &str, expected: usize, found: usize) -> Self {
        InputError::DimensionMismatch(format!("{what}: expected {expected}, found {found}"))
    }
}

fn from_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, InputError> {
    serde_json::from_slice(bytes).map_err(|e| InputError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn vector(coords: Vec<f64>, what: &str) -> Result<Vector, InputError> {
    Vector::new(coords).map_err(|e| InputError::Invalid(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolytope {
    vertices: Vec<Vec<f64>>,
}

impl RawPolytope {
    fn build(self, what: &str) -> Result<Polytope, InputError> {
        Polytope::from_rows(self.vertices).map_err(|e| match e {
            GeometryError::DimensionMismatch { expected, found } => InputError::dims(what, expected, found),
            e => InputError::Invalid(format!("{what}: {e}")),
        })
    }
}

fn same_dim(what: &str, expected: usize, found: usize) -> Result<(), InputError> {
    if expected != found {
        return Err(InputError::dims(what, expected, found));
    }
    Ok(())
}

/// `{"vertices": [[...], ...]}`.
pub fn parse_polytope(bytes: &[u8]) -> Result<Polytope, InputError> {
    from_json::<RawPolytope>(bytes)?.build("polytope")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPoint {
    Bare(Vec<f64>),
    Wrapped { point: Vec<f64> },
}

/// `[x₁, …]` or `{"point": [x₁, …]}`.
pub fn parse_point(bytes: &[u8]) -> Result<Vector, InputError> {
    let coords = match from_json::<RawPoint>(bytes)? {
        RawPoint::Bare(c) | RawPoint::Wrapped { point: c } => c,
    };
    vector(coords, "point")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    polytopes: Vec<RawPolytope>,
}

/// `{"polytopes": [Polytope, ...]}`.
pub fn parse_family(bytes: &[u8]) -> Result<Vec<Polytope>, InputError> {
    let raw: RawFamily = from_json(bytes)?;
    if raw.polytopes.is_empty() {
        return Err(InputError::Invalid("family has no polytopes".into()));
    }
    let family = raw
        .polytopes
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.build(&format!("polytope {i}")))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, p) in family.iter().enumerate() {
        same_dim(&format!("polytope {i}"), family[0].dim(), p.dim())?;
    }
    Ok(family)
}

#[derive(Debug, Clone)]
pub struct KkmInput {
    pub domain_points: Vec<Vector>,
    pub values: Vec<Polytope>,
    pub ambient: Polytope,
    pub resolution: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKkm {
    domain_points: Vec<Vec<f64>>,
    values: Vec<RawPolytope>,
    ambient: RawPolytope,
    #[serde(default)]
    resolution: Option<f64>,
}

/// `{"domain_points", "values", "ambient", "resolution"?}`.
pub fn parse_kkm(bytes: &[u8]) -> Result<KkmInput, InputError> {
    let raw: RawKkm = from_json(bytes)?;
    let ambient = raw.ambient.build("ambient")?;
    let d = ambient.dim();
    if raw.domain_points.len() != raw.values.len() {
        return Err(InputError::Invalid(format!(
            "{} domain points but {} values",
            raw.domain_points.len(),
            raw.values.len()
        )));
    }
    if raw.domain_points.is_empty() {
        return Err(InputError::Invalid("no domain points".into()));
    }
    let mut domain_points = Vec::with_capacity(raw.domain_points.len());
    for (i, c) in raw.domain_points.into_iter().enumerate() {
        let x = vector(c, &format!("domain point {i}"))?;
        same_dim(&format!("domain point {i}"), d, x.dim())?;
        domain_points.push(x);
    }
    let mut values = Vec::with_capacity(raw.values.len());
    for (i, v) in raw.values.into_iter().enumerate() {
        let p = v.build(&format!("value {i}"))?;
        same_dim(&format!("value {i}"), d, p.dim())?;
        values.push(p);
    }
    if let Some(r) = raw.resolution {
        check_resolution(r)?;
    }
    Ok(KkmInput {
        domain_points,
        values,
        ambient,
        resolution: raw.resolution,
    })
}

fn check_resolution(r: f64) -> Result<(), InputError> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(InputError::Invalid(format!("resolution must lie in (0, 1], got {r}")));
    }
    Ok(())
}

fn check_matrix(m: &[Vec<f64>], what: &str) -> Result<(usize, usize), InputError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(InputError::Invalid(format!("{what} is empty")));
    }
    for (i, r) in m.iter().enumerate() {
        same_dim(&format!("{what} row {i}"), cols, r.len())?;
    }
    Ok((rows, cols))
}

fn check_square(m: &[Vec<f64>], what: &str, n: usize) -> Result<(), InputError> {
    let (rows, cols) = check_matrix(m, what)?;
    same_dim(&format!("{what} rows"), n, rows)?;
    same_dim(&format!("{what} columns"), n, cols)
}

#[derive(Debug, Clone)]
pub struct GameInput {
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    matrix: Vec<Vec<f64>>,
    row_simplex: Option<usize>,
    col_simplex: Option<usize>,
}

/// `{"matrix": [[...]], "row_simplex": n, "col_simplex": m}`; the simplex
/// sizes are optional but must match the matrix when present.
pub fn parse_game(bytes: &[u8]) -> Result<GameInput, InputError> {
    let raw: RawGame = from_json(bytes)?;
    let (rows, cols) = check_matrix(&raw.matrix, "matrix")?;
    if let Some(n) = raw.row_simplex {
        same_dim("row_simplex", rows, n)?;
    }
    if let Some(m) = raw.col_simplex {
        same_dim("col_simplex", cols, m)?;
    }
    Ok(GameInput { matrix: raw.matrix })
}

#[derive(Debug, Clone)]
pub struct ViInput {
    pub a: Vec<Vec<f64>>,
    pub ell: Vector,
    pub x: Polytope,
    pub tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVi {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    ell: Vec<f64>,
    #[serde(rename = "X")]
    x: RawPolytope,
    tol: Option<f64>,
}

/// `{"A": [[...]], "ell": [...], "X": Polytope, "tol"?: t}`.
pub fn parse_vi(bytes: &[u8]) -> Result<ViInput, InputError> {
    let raw: RawVi = from_json(bytes)?;
    let x = raw.x.build("X")?;
    let n = x.dim();
    check_square(&raw.a, "A", n)?;
    let ell = vector(raw.ell, "ell")?;
    same_dim("ell", n, ell.dim())?;
    if let Some(t) = raw.tol {
        check_tol(t)?;
    }
    Ok(ViInput {
        a: raw.a,
        ell,
        x,
        tol: raw.tol,
    })
}

fn check_tol(t: f64) -> Result<(), InputError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(InputError::Invalid(format!("tolerance must be positive, got {t}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FixedPointInput {
    pub maps: Vec<AffineMap>,
    pub x: Polytope,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixedPoint {
    maps: Vec<RawMap>,
    #[serde(rename = "X")]
    x: RawPolytope,
}

/// `{"maps": [{"A": [[...]], "b": [...]}, ...], "X": Polytope}`.
pub fn parse_fixed_point(bytes: &[u8]) -> Result<FixedPointInput, InputError> {
    let raw: RawFixedPoint = from_json(bytes)?;
    let x = raw.x.build("X")?;
    let n = x.dim();
    if raw.maps.is_empty() {
        return Err(InputError::Invalid("no maps".into()));
    }
    let mut maps = Vec::with_capacity(raw.maps.len());
    for (i, m) in raw.maps.into_iter().enumerate() {
        check_square(&m.a, &format!("map {i} A"), n)?;
        let b = vector(m.b, &format!("map {i} b"))?;
        same_dim(&format!("map {i} b"), n, b.dim())?;
        maps.push(AffineMap::new(m.a, b).map_err(|e| InputError::Invalid(format!("map {i}: {e}")))?);
    }
    Ok(FixedPointInput { maps, x })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternativeKind {
    /// Single-function alternative; `f` on `X × Y`, `Y ⊆ X`.
    Infsup,
    /// Two-function alternative for `f ≤ g`.
    TwoFunction,
    /// `sup inf g` against `inf sup f`.
    Gap,
}

#[derive(Debug, Clone)]
pub struct AlternativeInput {
    pub kind: AlternativeKind,
    pub f: BuiltinSpec,
    pub g: Option<BuiltinSpec>,
    pub lambda: Option<f64>,
    pub x: Polytope,
    pub y: Polytope,
    pub resolution: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlternative {
    kind: AlternativeKind,
    f: BuiltinSpec,
    g: Option<BuiltinSpec>,
    lambda: Option<f64>,
    #[serde(rename = "X")]
    x: RawPolytope,
    #[serde(rename = "Y")]
    y: RawPolytope,
    resolution: Option<f64>,
}

/// `{"kind", "f", "g"?, "lambda"?, "X", "Y", "resolution"?}` with `f`, `g`
/// drawn from the built-in registry.
pub fn parse_alternative(bytes: &[u8]) -> Result<AlternativeInput, InputError> {
    let raw: RawAlternative = from_json(bytes)?;
    let x = raw.x.build("X")?;
    let y = raw.y.build("Y")?;
    raw.f.check_dims(x.dim(), y.dim(), "f")?;
    if let Some(g) = &raw.g {
        g.check_dims(x.dim(), y.dim(), "g")?;
    }
    match raw.kind {
        AlternativeKind::Infsup => {
            same_dim("Y", x.dim(), y.dim())?;
        }
        AlternativeKind::TwoFunction | AlternativeKind::Gap => {}
    }
    if raw.kind != AlternativeKind::Gap && raw.lambda.is_none() {
        return Err(InputError::Invalid("lambda is required for this kind".into()));
    }
    if let Some(l) = raw.lambda {
        if !l.is_finite() {
            return Err(InputError::Invalid("lambda must be finite".into()));
        }
    }
    if let Some(r) = raw.resolution {
        check_resolution(r)?;
    }
    Ok(AlternativeInput {
        kind: raw.kind,
        f: raw.f,
        g: raw.g,
        lambda: raw.lambda,
        x,
        y,
        resolution: raw.resolution,
    })
}

#[derive(Debug, Clone)]
pub enum MinimizeDomainSpec {
    Polytope(Polytope),
    /// All of `ℝⁿ`; the objective supplies its own coercivity radius.
    Unbounded(usize),
}

#[derive(Debug, Clone)]
pub struct MinimizeInput {
    pub objective: ObjectiveSpec,
    pub domain: MinimizeDomainSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnbounded {
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMinimize {
    objective: ObjectiveSpec,
    #[serde(rename = "X")]
    x: Option<RawPolytope>,
    unbounded: Option<RawUnbounded>,
}

/// `{"objective": {...}, "X": Polytope}` or `{"objective", "unbounded": {"dim": n}}`.
pub fn parse_minimize(bytes: &[u8]) -> Result<MinimizeInput, InputError> {
    let raw: RawMinimize = from_json(bytes)?;
    let domain = match (raw.x, raw.unbounded) {
        (Some(p), None) => MinimizeDomainSpec::Polytope(p.build("X")?),
        (None, Some(u)) if u.dim > 0 => MinimizeDomainSpec::Unbounded(u.dim),
        (None, Some(_)) => return Err(InputError::Invalid("unbounded domain needs dim ≥ 1".into())),
        _ => return Err(InputError::Invalid("give exactly one of X and unbounded".into())),
    };
    let n = match &domain {
        MinimizeDomainSpec::Polytope(p) => p.dim(),
        MinimizeDomainSpec::Unbounded(n) => *n,
    };
    raw.objective.check_dims(n)?;
    Ok(MinimizeInput {
        objective: raw.objective,
        domain,
    })
}

/// Optional run settings; explicit flags override every field.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub resolution: Option<f64>,
    #[serde(default)]
    pub trial_counts: BTreeMap<String, usize>,
    pub output_path: Option<String>,
}

pub fn parse_config(bytes: &[u8]) -> Result<ConfigFile, InputError> {
    let cfg: ConfigFile = from_json(bytes)?;
    if let Some(t) = cfg.tol {
        check_tol(t)?;
    }
    if let Some(r) = cfg.resolution {
        check_resolution(r)?;
    }
    Ok(cfg)
}
