//! Dense two-phase simplex for the small linear programs used throughout the
//! crate: membership, joint intersection, matrix games and fixed-point slices.
//!
//! Problems are posed as `minimize cᵀx` subject to rows of the form
//! `aᵀx {≤, ≥, =} b` with each variable either nonnegative or free. Sizes are
//! desk scale (a few hundred columns at most), so a dense tableau is fine.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible (phase-one residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// A linear program under construction.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    costs: Vec<f64>,
    bounds: Vec<Bound>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-11;

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with objective coefficient `cost`; returns its index.
    pub fn add_var(&mut self, cost: f64, bound: Bound) -> usize {
        self.costs.push(cost);
        self.bounds.push(bound);
        self.costs.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.costs.len()));
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn minimize(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(self)
    }

    pub fn maximize(&self) -> Result<LpSolution, LpError> {
        let mut negated = self.clone();
        for c in &mut negated.costs {
            *c = -*c;
        }
        let mut sol = negated.minimize()?;
        sol.objective = -sol.objective;
        Ok(sol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural { var: usize, negative: bool },
    Slack,
    Artificial,
}

struct Tableau {
    /// `rows × (cols + 1)`, the last entry of each row is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut kinds = Vec::new();
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(lp.costs.len());
        for (var, bound) in lp.bounds.iter().enumerate() {
            let pos = kinds.len();
            kinds.push(ColKind::Structural { var, negative: false });
            let neg = if *bound == Bound::Free {
                kinds.push(ColKind::Structural { var, negative: true });
                Some(pos + 1)
            } else {
                None
            };
            var_cols.push((pos, neg));
        }

        // Normalize every row to a nonnegative right-hand side.
        let normalized: Vec<(Vec<(usize, f64)>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|row| {
                if row.rhs < 0.0 {
                    let rel = match row.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    let coeffs = row.coeffs.iter().map(|&(j, a)| (j, -a)).collect();
                    (coeffs, rel, -row.rhs)
                } else {
                    (row.coeffs.clone(), row.relation, row.rhs)
                }
            })
            .collect();

        let mut slack_col = Vec::with_capacity(normalized.len());
        for (_, rel, _) in &normalized {
            if *rel != Relation::Eq {
                slack_col.push(Some(kinds.len()));
                kinds.push(ColKind::Slack);
            } else {
                slack_col.push(None);
            }
        }
        let mut art_col = Vec::with_capacity(normalized.len());
        for (_, rel, _) in &normalized {
            if *rel != Relation::Le {
                art_col.push(Some(kinds.len()));
                kinds.push(ColKind::Artificial);
            } else {
                art_col.push(None);
            }
        }

        let width = kinds.len();
        let mut t = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        for (i, (coeffs, rel, rhs)) in normalized.iter().enumerate() {
            let mut row = vec![0.0; width + 1];
            for &(var, a) in coeffs {
                let (pos, neg) = var_cols[var];
                row[pos] += a;
                if let Some(neg) = neg {
                    row[neg] -= a;
                }
            }
            if let Some(s) = slack_col[i] {
                row[s] = if *rel == Relation::Le { 1.0 } else { -1.0 };
            }
            if let Some(a) = art_col[i] {
                row[a] = 1.0;
                basis.push(a);
            } else {
                basis.push(slack_col[i].expect("le rows carry a slack"));
            }
            row[width] = *rhs;
            t.push(row);
        }
        Tableau { t, basis, kinds, width }
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut z = costs.to_vec();
        z.push(0.0);
        for (r, row) in self.t.iter().enumerate() {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for (zj, &a) in z.iter_mut().zip(row.iter()) {
                    *zj -= cb * a;
                }
            }
        }
        z
    }

    fn pivot(&mut self, z: &mut [f64], r: usize, j: usize) {
        let p = self.t[r][j];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][j] = 1.0;
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = z[j];
        if f != 0.0 {
            for (v, &pv) in z.iter_mut().zip(pivot_row.iter()) {
                *v -= f * pv;
            }
            z[j] = 0.0;
        }
        self.basis[r] = j;
    }

    /// Runs primal simplex iterations on reduced-cost row `z` over the
    /// columns allowed by `eligible`.
    fn iterate(&mut self, z: &mut [f64], eligible: &[bool], limit: usize) -> Result<(), LpError> {
        let mut degenerate_streak = 0usize;
        for _ in 0..limit {
            let bland = degenerate_streak > 40;
            let mut enter = None;
            let mut best = -COST_EPS;
            for j in 0..self.width {
                if !eligible[j] || z[j] >= -COST_EPS {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if z[j] < best {
                    best = z[j];
                    enter = Some(j);
                }
            }
            let Some(j) = enter else {
                return Ok(());
            };

            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for (r, row) in self.t.iter().enumerate() {
                let a = row[j];
                if a > PIVOT_EPS {
                    let ratio = row[self.width].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if ratio < best_ratio - 1e-12 {
                                true
                            } else if ratio <= best_ratio + 1e-12 {
                                if bland {
                                    self.basis[r] < self.basis[l]
                                } else {
                                    a > self.t[l][j]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(LpError::Unbounded);
            };
            if best_ratio <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(z, r, j);
        }
        Err(LpError::IterationLimit(limit))
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let limit = 200 * (self.t.len() + self.width) + 1000;
        let scale = lp.rows.iter().map(|r| r.rhs.abs()).fold(1.0_f64, f64::max);

        // Phase one: minimize the sum of artificials.
        if self.kinds.contains(&ColKind::Artificial) {
            let costs: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            let mut z = self.reduced_costs(&costs);
            let eligible = vec![true; self.width];
            self.iterate(&mut z, &eligible, limit)?;
            let residual = -z[self.width];
            if residual > 1e-9 * scale {
                return Err(LpError::Infeasible { residual });
            }
            // Drive zero-level artificials out of the basis, dropping redundant rows.
            let mut r = 0;
            while r < self.t.len() {
                if self.kinds[self.basis[r]] == ColKind::Artificial {
                    let candidate = (0..self.width)
                        .filter(|&j| self.kinds[j] != ColKind::Artificial)
                        .max_by(|&a, &b| self.t[r][a].abs().total_cmp(&self.t[r][b].abs()))
                        .filter(|&j| self.t[r][j].abs() > 1e-9);
                    match candidate {
                        Some(j) => {
                            let mut dummy = vec![0.0; self.width + 1];
                            self.pivot(&mut dummy, r, j);
                            r += 1;
                        }
                        None => {
                            self.t.remove(r);
                            self.basis.remove(r);
                        }
                    }
                } else {
                    r += 1;
                }
            }
        }

        // Phase two on the original objective.
        let costs: Vec<f64> = self
            .kinds
            .iter()
            .map(|k| match *k {
                ColKind::Structural { var, negative } => {
                    if negative {
                        -lp.costs[var]
                    } else {
                        lp.costs[var]
                    }
                }
                _ => 0.0,
            })
            .collect();
        let eligible: Vec<bool> = self.kinds.iter().map(|k| *k != ColKind::Artificial).collect();
        let mut z = self.reduced_costs(&costs);
        self.iterate(&mut z, &eligible, limit)?;

        let mut x = vec![0.0; lp.costs.len()];
        for (r, &col) in self.basis.iter().enumerate() {
            if let ColKind::Structural { var, negative } = self.kinds[col] {
                let v = self.t[r][self.width];
                if negative {
                    x[var] -= v;
                } else {
                    x[var] += v;
                }
            }
        }
        for (xi, b) in x.iter_mut().zip(&lp.bounds) {
            if *b == Bound::NonNegative && *xi < 0.0 {
                *xi = 0.0;
            }
        }
        let objective = x.iter().zip(&lp.costs).map(|(a, c)| a * c).sum();
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_var(3.0, Bound::NonNegative);
        let y = lp.add_var(5.0, Bound::NonNegative);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 4.0);
        lp.add_constraint(vec![(y, 2.0)], Relation::Le, 12.0);
        lp.add_constraint(vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
        let sol = lp.maximize().unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!((sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x s.t. x = y - 3, y ≥ 1, x free → x = -2
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, Bound::Free);
        let y = lp.add_var(0.0, Bound::NonNegative);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Eq, -3.0);
        lp.add_constraint(vec![(y, 1.0)], Relation::Ge, 1.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.x[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, Bound::NonNegative);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 2.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 1.0);
        assert!(matches!(lp.minimize(), Err(LpError::Infeasible { .. })));
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, Bound::NonNegative);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 0.0);
        assert_eq!(lp.minimize().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        // x + y = 1 stated twice, min x - y → (0, 1)
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, Bound::NonNegative);
        let y = lp.add_var(-1.0, Bound::NonNegative);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
        lp.add_constraint(vec![(x, 2.0), (y, 2.0)], Relation::Eq, 2.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Chvátal's instance that cycles under the textbook largest-coefficient
        // rule: max 10x₁ − 57x₂ − 9x₃ − 24x₄, optimum 1 at x₁ = x₃ = 1.
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = [10.0, -57.0, -9.0, -24.0]
            .iter()
            .map(|&c| lp.add_var(c, Bound::NonNegative))
            .collect();
        lp.add_constraint(
            vec![(v[0], 0.5), (v[1], -5.5), (v[2], -2.5), (v[3], 9.0)],
            Relation::Le,
            0.0,
        );
        lp.add_constraint(
            vec![(v[0], 0.5), (v[1], -1.5), (v[2], -0.5), (v[3], 1.0)],
            Relation::Le,
            0.0,
        );
        lp.add_constraint(vec![(v[0], 1.0)], Relation::Le, 1.0);
        let sol = lp.maximize().unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }
}
