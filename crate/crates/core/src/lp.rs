//! Dense linear programming kernel.
//!
//! Problems are stated with general bounds and `<=`, `=`, `>=` rows, brought
//! to standard form `A x = b, x >= 0`, and solved by a two-phase revised
//! simplex method that keeps an explicit dense basis inverse. The entering
//! variable is chosen by Bland's rule. The leaving variable comes from a
//! two-pass (Harris) ratio test that prefers large pivots; during long runs
//! of degenerate pivots the test falls back to Bland's smallest-index rule,
//! which guarantees termination.
//!
//! Every result carries a certificate: optimal solutions come with dual
//! multipliers, unbounded problems with an improving ray and infeasible
//! problems with a Farkas row combination.

use std::fmt::Write as _;

use thiserror::Error;

/// Absolute tolerance on primal constraint residuals.
pub const FEAS_TOL: f64 = 1e-9;
/// Smallest column entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-10;
/// Pivots below this fraction of the largest column entry are refused.
const RELATIVE_PIVOT_TOL: f64 = 1e-9;
/// Bound violation tolerated by the Harris ratio test.
const HARRIS_TOL: f64 = 1e-11;

const REDUCED_COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const MAX_ITERATIONS: usize = 200_000;

/// Tolerance on `|primal value - dual value|` for an optimal solution.
pub fn gap_tol(value: f64) -> f64 {
    1e-7 * (1.0 + value.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over `objective.len()` variables.
///
/// Bounds default to `[0, +inf)`; use `f64::NEG_INFINITY` / `f64::INFINITY`
/// for missing bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("simplex did not terminate within {0} iterations")]
    IterationLimit(usize),
    #[error("basis matrix became singular")]
    SingularBasis,
}

impl LpProblem {
    pub fn new(sense: Sense, num_vars: usize) -> Self {
        LpProblem {
            sense,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        let mut lp = Self::new(Sense::Minimize, objective.len());
        lp.objective = objective;
        lp
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        let mut lp = Self::new(Sense::Maximize, objective.len());
        lp.objective = objective;
        lp
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds a row given as `(variable, coefficient)` pairs. Repeated
    /// variables accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::MalformedProblem(format!(
                "bounds have length {}/{} but the objective has {n} entries",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::MalformedProblem(format!(
                "objective coefficient {j} is not finite"
            )));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(LpError::MalformedProblem(format!(
                    "variable {j} has invalid bounds [{l}, {u}]"
                )));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::MalformedProblem(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::MalformedProblem(format!(
                    "constraint {i} has non-finite data"
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Plain-text dump: one objective line, one line per constraint, one
    /// line per non-default bound. Meant for debugging only.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        };
        let _ = writeln!(out, "{sense} {}", format_terms(&self.objective));
        for (i, row) in self.constraints.iter().enumerate() {
            let _ = writeln!(
                out,
                "c{i}: {} {} {}",
                format_terms(&row.coeffs),
                row.relation.symbol(),
                row.rhs
            );
        }
        for j in 0..self.num_vars() {
            if self.lower[j] != 0.0 || self.upper[j] != f64::INFINITY {
                let _ = writeln!(out, "bound x{j} in [{}, {}]", self.lower[j], self.upper[j]);
            }
        }
        out
    }
}

fn format_terms(coeffs: &[f64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(j, a)| format!("{a:+} x{j}"))
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub x: Vec<f64>,
    /// One multiplier per constraint, equal to the derivative of the optimal
    /// value with respect to the row's right-hand side. For a minimization,
    /// `>=` rows get nonnegative and `<=` rows nonpositive multipliers; signs
    /// flip for a maximization.
    pub duals: Vec<f64>,
    /// `c - A^T y` in the original variables.
    pub reduced_costs: Vec<f64>,
    /// Value of the dual objective built from `duals` and the active bounds.
    pub dual_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal(Optimum),
    /// `farkas` has one entry per constraint with `<=` rows nonpositive and
    /// `>=` rows nonnegative; every feasible `x` would satisfy
    /// `farkas^T A x >= farkas^T b`, yet the supremum of the left side over
    /// the variable box is strictly below the right side.
    Infeasible {
        farkas: Vec<f64>,
    },
    /// Direction `d` keeping every row and bound feasible and strictly
    /// improving the objective.
    Unbounded {
        ray: Vec<f64>,
    },
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal(_) => LpStatus::Optimal,
            LpSolution::Infeasible { .. } => LpStatus::Infeasible,
            LpSolution::Unbounded { .. } => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.optimum().map(|o| o.value)
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + s`
    Shift { col: usize, offset: f64 },
    /// `x = offset - s`
    Negated { col: usize, offset: f64 },
    /// `x = s_pos - s_neg`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    /// Column-major constraint matrix, `m` entries per column.
    cols: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    /// Columns that may start basic in their row (coefficient `+1` there and
    /// zero elsewhere).
    slack_of_row: Vec<Option<usize>>,
    row_sign: Vec<f64>,
    n_orig_rows: usize,
    map: Vec<VarMap>,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut map = Vec::with_capacity(n);
        let mut cost = Vec::new();
        let mut ub_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let (l, u, c) = (p.lower[j], p.upper[j], sign * p.objective[j]);
            if l.is_finite() {
                let col = cost.len();
                cost.push(c);
                map.push(VarMap::Shift { col, offset: l });
                if u.is_finite() {
                    ub_rows.push((col, u - l));
                }
            } else if u.is_finite() {
                let col = cost.len();
                cost.push(-c);
                map.push(VarMap::Negated { col, offset: u });
            } else {
                let pos = cost.len();
                cost.push(c);
                cost.push(-c);
                map.push(VarMap::Split { pos, neg: pos + 1 });
            }
        }
        let n_orig_rows = p.constraints.len();
        let m = n_orig_rows + ub_rows.len();
        let mut cols = vec![vec![0.0; m]; cost.len()];
        let mut b = vec![0.0; m];
        for (i, row) in p.constraints.iter().enumerate() {
            let mut rhs = row.rhs;
            for (j, &a) in row.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match map[j] {
                    VarMap::Shift { col, offset } => {
                        cols[col][i] = a;
                        rhs -= a * offset;
                    }
                    VarMap::Negated { col, offset } => {
                        cols[col][i] = -a;
                        rhs -= a * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        cols[pos][i] = a;
                        cols[neg][i] = -a;
                    }
                }
            }
            b[i] = rhs;
        }
        for (k, &(col, width)) in ub_rows.iter().enumerate() {
            cols[col][n_orig_rows + k] = 1.0;
            b[n_orig_rows + k] = width;
        }

        let mut slack_of_row = vec![None; m];
        let mut slack_coef = vec![0.0; m];
        for (i, row) in p.constraints.iter().enumerate() {
            slack_coef[i] = match row.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => 0.0,
            };
        }
        for s in slack_coef.iter_mut().skip(n_orig_rows) {
            *s = 1.0;
        }
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            if b[i] < 0.0 {
                row_sign[i] = -1.0;
                b[i] = -b[i];
                for col in cols.iter_mut() {
                    col[i] = -col[i];
                }
                slack_coef[i] = -slack_coef[i];
            }
            if slack_coef[i] != 0.0 {
                let mut col = vec![0.0; m];
                col[i] = slack_coef[i];
                if slack_coef[i] > 0.0 {
                    slack_of_row[i] = Some(cols.len());
                }
                cols.push(col);
                cost.push(0.0);
            }
        }
        StandardForm {
            cols,
            b,
            cost,
            slack_of_row,
            row_sign,
            n_orig_rows,
            map,
        }
    }

    fn rows(&self) -> usize {
        self.b.len()
    }

    fn to_original(&self, v: &[f64], homogeneous: bool) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, offset } => v[col] + if homogeneous { 0.0 } else { offset },
                VarMap::Negated { col, offset } => {
                    (if homogeneous { 0.0 } else { offset }) - v[col]
                }
                VarMap::Split { pos, neg } => v[pos] - v[neg],
            })
            .collect()
    }
}

struct Simplex {
    cols: Vec<Vec<f64>>,
    b: Vec<f64>,
    m: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major dense inverse of the basis matrix.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_streak: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded {
        entering: usize,
        direction: Vec<f64>,
    },
}

impl Simplex {
    fn column_image(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let a = &self.cols[j];
        let mut out = vec![0.0; m];
        for (k, &ak) in a.iter().enumerate() {
            if ak == 0.0 {
                continue;
            }
            for i in 0..m {
                out[i] += self.binv[i * m + k] * ak;
            }
        }
        out
    }

    fn prices(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = cost[bi];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for k in 0..m {
                y[k] += cb * row[k];
            }
        }
        y
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &bk) in self.basis.iter().enumerate() {
            for i in 0..m {
                a[i * m + k] = self.cols[bk][i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&r, &s| a[r * m + c].abs().total_cmp(&a[s * m + c].abs()))
                .ok_or(LpError::SingularBasis)?;
            if a[piv * m + c].abs() < 1e-13 {
                return Err(LpError::SingularBasis);
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        let mut xb = vec![0.0; m];
        for i in 0..m {
            xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.b[k]).sum();
        }
        self.xb = xb;
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= ar;
        }
        let theta = self.xb[r] / ar;
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[r * m + k];
            }
            self.xb[i] -= f * theta;
        }
        self.xb[r] = theta;
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Runs Bland-rule simplex iterations minimizing `cost` over columns
    /// for which `allowed` holds.
    fn run(&mut self, cost: &[f64], allowed: &[bool]) -> Result<PhaseEnd, LpError> {
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.prices(cost);
            let entering = (0..self.cols.len()).find(|&j| {
                if self.is_basic[j] || !allowed[j] {
                    return false;
                }
                let d = cost[j] - dot(&y, &self.cols[j]);
                d < -REDUCED_COST_TOL
            });
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let alpha = self.column_image(q);
            let leave = self.ratio_test(&alpha);
            match leave {
                None => {
                    return Ok(PhaseEnd::Unbounded {
                        entering: q,
                        direction: alpha,
                    })
                }
                Some(r) => {
                    if self.xb[r] <= HARRIS_TOL {
                        self.degenerate_streak += 1;
                    } else {
                        self.degenerate_streak = 0;
                    }
                    self.pivot(r, q, &alpha)
                }
            }
        }
    }

    /// Leaving row for entering column image `alpha`, or `None` if the
    /// column is unbounded.
    fn ratio_test(&self, alpha: &[f64]) -> Option<usize> {
        let amax = alpha.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = PIVOT_TOL.max(RELATIVE_PIVOT_TOL * amax);
        let rows = || (0..self.m).filter(move |&i| alpha[i] > tol);
        let theta_max = rows()
            .map(|i| (self.xb[i].max(0.0) + HARRIS_TOL) / alpha[i])
            .fold(f64::INFINITY, f64::min);
        if theta_max.is_infinite() {
            return None;
        }
        let ratio = |i: usize| self.xb[i].max(0.0) / alpha[i];
        if self.degenerate_streak > 2 * self.m + 50 {
            // stalling: Bland's smallest basis index among the exact minimizers
            let best = rows().map(ratio).fold(f64::INFINITY, f64::min);
            rows()
                .filter(|&i| ratio(i) <= best + 1e-12 * (1.0 + best))
                .min_by_key(|&i| self.basis[i])
        } else {
            rows().filter(|&i| ratio(i) <= theta_max).max_by(|&i, &j| {
                alpha[i]
                    .total_cmp(&alpha[j])
                    .then(self.basis[j].cmp(&self.basis[i]))
            })
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `problem` to optimality or returns a certificate of infeasibility
/// or unboundedness.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.check()?;
    let sf = StandardForm::build(problem);
    let m = sf.rows();
    let n_struct = sf.cols.len();

    let mut cols = sf.cols.clone();
    let mut basis = Vec::with_capacity(m);
    let mut phase1_cost = vec![0.0; n_struct];
    for i in 0..m {
        match sf.slack_of_row[i] {
            Some(s) => basis.push(s),
            None => {
                let mut col = vec![0.0; m];
                col[i] = 1.0;
                basis.push(cols.len());
                cols.push(col);
                phase1_cost.push(1.0);
            }
        }
    }
    let n_total = cols.len();
    let mut is_basic = vec![false; n_total];
    for &j in &basis {
        is_basic[j] = true;
    }
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut sx = Simplex {
        cols,
        b: sf.b.clone(),
        m,
        basis,
        is_basic,
        binv,
        xb: sf.b.clone(),
        iterations: 0,
        since_refactor: 0,
        degenerate_streak: 0,
    };

    if n_total > n_struct {
        let all = vec![true; n_total];
        // Phase one cannot be unbounded: its objective is bounded below by 0.
        sx.run(&phase1_cost, &all)?;
        sx.refactor()?;
        let infeas: f64 = sx
            .basis
            .iter()
            .zip(&sx.xb)
            .filter(|(&j, _)| j >= n_struct)
            .map(|(_, &v)| v)
            .sum();
        let scale = 1.0 + sf.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeas > FEAS_TOL * scale {
            let y = sx.prices(&phase1_cost);
            let farkas = (0..sf.n_orig_rows).map(|i| y[i] * sf.row_sign[i]).collect();
            return Ok(LpSolution::Infeasible { farkas });
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if sx.basis[r] < n_struct {
                continue;
            }
            let row: Vec<f64> = sx.binv[r * m..(r + 1) * m].to_vec();
            let candidate =
                (0..n_struct).find(|&j| !sx.is_basic[j] && dot(&row, &sx.cols[j]).abs() > 1e-9);
            if let Some(q) = candidate {
                let alpha = sx.column_image(q);
                sx.pivot(r, q, &alpha);
            }
        }
        sx.refactor()?;
    }

    let mut cost = sf.cost.clone();
    cost.resize(n_total, 0.0);
    let allowed: Vec<bool> = (0..n_total).map(|j| j < n_struct).collect();
    match sx.run(&cost, &allowed)? {
        PhaseEnd::Unbounded {
            entering,
            direction,
        } => {
            let mut v = vec![0.0; n_total];
            v[entering] = 1.0;
            for (i, &bi) in sx.basis.iter().enumerate() {
                v[bi] -= direction[i];
            }
            let ray = sf.to_original(&v, true);
            Ok(LpSolution::Unbounded { ray })
        }
        PhaseEnd::Optimal => {
            sx.refactor()?;
            let mut v = vec![0.0; n_total];
            for (i, &bi) in sx.basis.iter().enumerate() {
                v[bi] = sx.xb[i].max(0.0);
            }
            let x = sf.to_original(&v, false);
            let y = sx.prices(&cost);
            let sense_sign = match problem.sense {
                Sense::Minimize => 1.0,
                Sense::Maximize => -1.0,
            };
            let duals: Vec<f64> = (0..sf.n_orig_rows)
                .map(|i| sense_sign * y[i] * sf.row_sign[i])
                .collect();
            let reduced_costs: Vec<f64> = (0..problem.num_vars())
                .map(|j| {
                    problem.objective[j]
                        - problem
                            .constraints
                            .iter()
                            .zip(&duals)
                            .map(|(row, yi)| row.coeffs[j] * yi)
                            .sum::<f64>()
                })
                .collect();
            let mut dual_value: f64 = problem
                .constraints
                .iter()
                .zip(&duals)
                .map(|(row, yi)| row.rhs * yi)
                .sum();
            for (j, &d) in reduced_costs.iter().enumerate() {
                if d.abs() <= 1e-12 {
                    continue;
                }
                let at_lower = (d > 0.0) == (problem.sense == Sense::Minimize);
                let bound = if at_lower {
                    problem.lower[j]
                } else {
                    problem.upper[j]
                };
                dual_value += d * if bound.is_finite() { bound } else { x[j] };
            }
            Ok(LpSolution::Optimal(Optimum {
                value: problem.objective_value(&x),
                x,
                duals,
                reduced_costs,
                dual_value,
                iterations: sx.iterations,
            }))
        }
    }
}
