//! Solvency cones of the two-asset (cash, fuel) market with bid-ask quotes.
//!
//! `pi12` is the cash paid for one unit of fuel, `1 / pi21` the cash received
//! when selling one unit. The solvency cone is generated by
//! `e1, e2, pi12 e1 - e2, pi21 e2 - e1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_lp, LpProblem, LpSolution, Relation, FEAS_TOL};

pub type Vec2 = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("quotes must be positive and finite (pi12 = {pi12}, pi21 = {pi21})")]
    NonPositiveQuote { pi12: f64, pi21: f64 },
    #[error("efficient frictions violated: pi12 * pi21 = {product} is not > 1")]
    FrictionViolation { product: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvencyCone {
    pi12: f64,
    pi21: f64,
}

pub fn make_solvency_cone(pi12: f64, pi21: f64) -> Result<SolvencyCone, ConeError> {
    if !(pi12.is_finite() && pi21.is_finite() && pi12 > 0.0 && pi21 > 0.0) {
        return Err(ConeError::NonPositiveQuote { pi12, pi21 });
    }
    let product = pi12 * pi21;
    if product <= 1.0 {
        return Err(ConeError::FrictionViolation { product });
    }
    Ok(SolvencyCone { pi12, pi21 })
}

impl SolvencyCone {
    pub fn pi12(&self) -> f64 {
        self.pi12
    }

    pub fn pi21(&self) -> f64 {
        self.pi21
    }

    /// Cash per fuel unit when selling fuel.
    pub fn bid(&self) -> f64 {
        1.0 / self.pi21
    }

    /// Cash per fuel unit when buying fuel.
    pub fn ask(&self) -> f64 {
        self.pi12
    }

    /// The four generators in the fixed order `e1, e2, pi12 e1 - e2, pi21 e2 - e1`.
    pub fn generators(&self) -> [Vec2; 4] {
        [[1.0, 0.0], [0.0, 1.0], [self.pi12, -1.0], [-1.0, self.pi21]]
    }

    /// Membership by LP feasibility over nonnegative generator weights.
    pub fn contains(&self, v: Vec2) -> bool {
        let mut lp = LpProblem::minimize(vec![0.0; 4]);
        let g = self.generators();
        for k in 0..2 {
            lp.add_constraint(
                g.iter().map(|gen| gen[k]).collect(),
                Relation::Le,
                v[k] + FEAS_TOL,
            );
            lp.add_constraint(
                g.iter().map(|gen| gen[k]).collect(),
                Relation::Ge,
                v[k] - FEAS_TOL,
            );
        }
        matches!(solve_lp(&lp), Ok(LpSolution::Optimal(_)))
    }

    /// Closed-form membership: a position is solvent iff its liquidation
    /// value in cash is nonnegative.
    pub fn liquidation_value(&self, v: Vec2) -> f64 {
        if v[1] >= 0.0 {
            v[0] + v[1] * self.bid()
        } else {
            v[0] + v[1] * self.ask()
        }
    }

    /// Generator weights `w >= 0` with `sum w_k g_k = v`, if `v` is solvent.
    ///
    /// Uses the cheapest decomposition: free disposal on the surplus asset and
    /// at most one exchange direction.
    pub fn decompose(&self, v: Vec2) -> Option<[f64; 4]> {
        if self.liquidation_value(v) < -FEAS_TOL {
            return None;
        }
        let [a, b] = v;
        let w = if a >= 0.0 && b >= 0.0 {
            [a, b, 0.0, 0.0]
        } else if b < 0.0 {
            // a + pi12 * b >= 0: buy the missing fuel with cash
            let k = -b;
            [(a - self.pi12 * k).max(0.0), 0.0, k, 0.0]
        } else {
            // a < 0: sell fuel to cover cash
            let k = -a;
            [0.0, (b - self.pi21 * k).max(0.0), 0.0, k]
        };
        Some(w)
    }

    /// `v ⪰ w`, i.e. `v - w` lies in the cone.
    pub fn dominates(&self, v: Vec2, w: Vec2) -> bool {
        self.contains([v[0] - w[0], v[1] - w[1]])
    }

    /// Dual cone membership by inner products with the generators.
    pub fn dual_contains(&self, y: Vec2) -> bool {
        dual_contains(self.pi12, self.pi21, y)
    }
}

pub fn dual_contains(pi12: f64, pi21: f64, y: Vec2) -> bool {
    let tol = 1e-12 * (1.0 + y[0].abs() + y[1].abs());
    y[0] >= -tol && y[1] >= -tol && pi12 * y[0] - y[1] >= -tol && pi21 * y[1] - y[0] >= -tol
}

/// Ratio form of dual membership for `y` with positive components: the fuel
/// shadow price `y2 / y1` lies between bid `1 / pi21` and ask `pi12`.
pub fn dual_contains_ratio(pi12: f64, pi21: f64, y: Vec2) -> bool {
    let ratio = y[1] / y[0];
    let tol = 1e-12 * (1.0 + ratio.abs());
    1.0 / pi21 - tol <= ratio && ratio <= pi12 + tol
}
