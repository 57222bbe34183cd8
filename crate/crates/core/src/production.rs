//! Production functions: the thermal plant and generic regularity checks.
//!
//! A production step receives `beta2` units of fuel at the parent node and
//! returns a (cash, fuel) position at the child node. The cash leg sells
//! `q * min(beta2, capacity)` MWh at the spot price and pays the fixed cost;
//! the fuel leg applies the maintenance function up to capacity and sends any
//! overflow back to storage.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::Vec2;

/// Tolerance used by the sampling checks.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductionError {
    #[error("production regime must be nonnegative, got {0}")]
    NegativeRegime(f64),
    #[error("maintenance breakpoints: {0}")]
    BadBreakpoints(String),
}

/// A line `slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Piecewise-linear maintenance cost `c` on `[0, capacity]`, given by its
/// breakpoints. Construction only checks the breakpoint layout; the shape
/// requirements (concave, non-positive, increasing, final slope at least 1)
/// are reported by [`PiecewiseConcave::shape_violations`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseConcave {
    points: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseConcave {
    type Error = ProductionError;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        PiecewiseConcave::new(points)
    }
}

impl From<PiecewiseConcave> for Vec<(f64, f64)> {
    fn from(p: PiecewiseConcave) -> Self {
        p.points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeViolation {
    /// Slope increases at breakpoint `at`.
    NotConcave {
        at: f64,
        left_slope: f64,
        right_slope: f64,
    },
    Positive {
        at: f64,
        value: f64,
    },
    NotIncreasing {
        from: f64,
        slope: f64,
    },
    FinalSlopeBelowOne {
        slope: f64,
    },
}

impl std::fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShapeViolation::NotConcave {
                at,
                left_slope,
                right_slope,
            } => write!(
                f,
                "maintenance not concave at {at}: slope {left_slope} then {right_slope}"
            ),
            ShapeViolation::Positive { at, value } => {
                write!(f, "maintenance positive at {at}: {value}")
            }
            ShapeViolation::NotIncreasing { from, slope } => {
                write!(f, "maintenance not increasing after {from}: slope {slope}")
            }
            ShapeViolation::FinalSlopeBelowOne { slope } => {
                write!(f, "maintenance left derivative at capacity is {slope} < 1")
            }
        }
    }
}

impl PiecewiseConcave {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ProductionError> {
        if points.is_empty() {
            return Err(ProductionError::BadBreakpoints("no breakpoints".into()));
        }
        if points.iter().any(|(z, v)| !z.is_finite() || !v.is_finite()) {
            return Err(ProductionError::BadBreakpoints("non-finite value".into()));
        }
        if points[0].0 != 0.0 {
            return Err(ProductionError::BadBreakpoints(format!(
                "first breakpoint must be at 0, got {}",
                points[0].0
            )));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ProductionError::BadBreakpoints(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(PiecewiseConcave { points })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Right end of the domain.
    pub fn domain_end(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn at_zero(&self) -> f64 {
        self.points[0].1
    }

    pub fn at_end(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// Linear interpolation, clamped to the domain.
    pub fn eval(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, self.domain_end());
        let i = self.points.partition_point(|p| p.0 <= z);
        if i == 0 {
            return self.points[0].1;
        }
        if i == self.points.len() {
            return self.at_end();
        }
        let (z0, v0) = self.points[i - 1];
        let (z1, v1) = self.points[i];
        v0 + (v1 - v0) * (z - z0) / (z1 - z0)
    }

    /// One line per linear piece.
    pub fn pieces(&self) -> Vec<Line> {
        self.points
            .windows(2)
            .map(|w| {
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                Line {
                    slope,
                    intercept: w[0].1 - slope * w[0].0,
                }
            })
            .collect()
    }

    pub fn shape_violations(&self) -> Vec<ShapeViolation> {
        let mut out = Vec::new();
        for &(z, v) in &self.points {
            if v > 0.0 {
                out.push(ShapeViolation::Positive { at: z, value: v });
            }
        }
        let slopes = self.slopes();
        for (i, &s) in slopes.iter().enumerate() {
            if s <= 0.0 {
                out.push(ShapeViolation::NotIncreasing {
                    from: self.points[i].0,
                    slope: s,
                });
            }
        }
        for (i, w) in slopes.windows(2).enumerate() {
            if w[1] > w[0] + 1e-12 * (1.0 + w[0].abs()) {
                out.push(ShapeViolation::NotConcave {
                    at: self.points[i + 1].0,
                    left_slope: w[0],
                    right_slope: w[1],
                });
            }
        }
        if let Some(&last) = slopes.last() {
            if last < 1.0 {
                out.push(ShapeViolation::FinalSlopeBelowOne { slope: last });
            }
        }
        out
    }
}

/// Plant data attached to the child node of a production step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantStepData {
    /// MWh of electricity per fuel unit.
    pub heat_rate: f64,
    /// Fuel injection capacity.
    pub capacity: f64,
    /// Fixed cost in cash.
    pub fixed_cost: f64,
    pub maintenance: PiecewiseConcave,
}

impl PlantStepData {
    /// Violated invariants as human-readable records.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.heat_rate.is_finite() && self.heat_rate >= 0.0) {
            out.push(format!("heat rate must be >= 0, got {}", self.heat_rate));
        }
        if !(self.capacity.is_finite() && self.capacity >= 0.0) {
            out.push(format!("capacity must be >= 0, got {}", self.capacity));
        }
        if !self.fixed_cost.is_finite() {
            out.push("fixed cost must be finite".to_string());
        }
        let end = self.maintenance.domain_end();
        if self.capacity.is_finite() && self.capacity >= 0.0 && end != self.capacity {
            out.push(format!(
                "maintenance must be defined exactly on [0, capacity]: ends at {end}, capacity {}",
                self.capacity
            ));
        }
        out.extend(
            self.maintenance
                .shape_violations()
                .iter()
                .map(|v| v.to_string()),
        );
        out
    }
}

/// Output of one production step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductionOutcome {
    /// (cash, fuel) delivered at the child node.
    pub r: Vec2,
}

/// A production map from injected fuel to the child position. The cash
/// injection is always zero.
pub trait ProductionFunction {
    fn output(&self, beta2: f64) -> Vec2;

    /// Points at which the map may fail to be smooth.
    fn kinks(&self) -> Vec<f64>;

    /// Typical regime size, used to scale random samples.
    fn scale(&self) -> f64;
}

/// Thermal plant at one child node: plant data plus the spot price there.
#[derive(Debug, Clone, Copy)]
pub struct ThermalStep<'a> {
    pub spot: f64,
    pub plant: &'a PlantStepData,
}

impl<'a> ThermalStep<'a> {
    pub fn new(plant: &'a PlantStepData, spot: f64) -> Self {
        ThermalStep { spot, plant }
    }

    fn revenue_rate(&self) -> f64 {
        self.spot * self.plant.heat_rate
    }

    /// Hypograph lines `(cash, fuel)` whose pointwise minima reproduce the
    /// two output legs on `[0, inf)`. `None` if a leg is not concave.
    pub fn hypograph_lines(&self) -> Option<(Vec<Line>, Vec<Line>)> {
        if self.revenue_rate() < 0.0 || !self.plant.maintenance.shape_violations().is_empty() {
            return None;
        }
        let p = self.plant;
        let cash = vec![
            Line {
                slope: self.revenue_rate(),
                intercept: -p.fixed_cost,
            },
            Line {
                slope: 0.0,
                intercept: self.revenue_rate() * p.capacity - p.fixed_cost,
            },
        ];
        let mut fuel = p.maintenance.pieces();
        fuel.push(Line {
            slope: 1.0,
            intercept: p.maintenance.at_end() - p.capacity,
        });
        Some((cash, fuel))
    }
}

impl ProductionFunction for ThermalStep<'_> {
    fn output(&self, beta2: f64) -> Vec2 {
        let p = self.plant;
        let used = beta2.min(p.capacity);
        [
            self.revenue_rate() * used - p.fixed_cost,
            p.maintenance.eval(used) + (beta2 - p.capacity).max(0.0),
        ]
    }

    fn kinks(&self) -> Vec<f64> {
        self.plant
            .maintenance
            .breakpoints()
            .iter()
            .map(|b| b.0)
            .collect()
    }

    fn scale(&self) -> f64 {
        self.plant.capacity.max(1.0)
    }
}

pub fn thermal_output(
    plant: &PlantStepData,
    spot: f64,
    beta2: f64,
) -> Result<ProductionOutcome, ProductionError> {
    if !(beta2 >= 0.0) {
        return Err(ProductionError::NegativeRegime(beta2));
    }
    Ok(ProductionOutcome {
        r: ThermalStep::new(plant, spot).output(beta2),
    })
}

/// Componentwise bound on `|R(beta) - beta|` over all regimes.
pub fn production_bound(plant: &PlantStepData, spot: f64) -> Vec2 {
    let c = &plant.maintenance;
    [
        (spot * plant.heat_rate * plant.capacity).abs() + plant.fixed_cost.abs(),
        c.at_zero().abs().max((c.at_end() - plant.capacity).abs()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub violations: usize,
    /// First offending regime(s), if any.
    pub witness: Option<Vec<f64>>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            passed: true,
            violations: 0,
            witness: None,
        }
    }

    fn record(&mut self, witness: Vec<f64>) {
        self.passed = false;
        self.violations += 1;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub concavity: Verdict,
    pub boundedness: Verdict,
    pub continuity: Verdict,
    /// Largest sampled `|R(beta) - beta|` per component.
    pub max_deviation: Vec2,
    /// Breakpoint-based verdicts for the thermal plant (concavity,
    /// boundedness), when available.
    pub symbolic: Option<[bool; 2]>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.concavity.passed
            && self.boundedness.passed
            && self.continuity.passed
            && self.symbolic.map_or(true, |s| s[0] && s[1])
    }
}

fn sample_regime<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    match rng.gen_range(0..10) {
        0 => rng.gen_range(0.0..1e6),
        1 => 0.0,
        _ => rng.gen_range(0.0..2.0 * scale),
    }
}

/// Sampling checks of concavity, boundedness by `bound` and continuity at
/// the kinks of `f`.
pub fn check_assumptions_with<F: ProductionFunction + ?Sized, R: Rng>(
    f: &F,
    bound: Vec2,
    samples: usize,
    rng: &mut R,
) -> AssumptionReport {
    let scale = f.scale();
    let mut concavity = Verdict::new();
    let mut boundedness = Verdict::new();
    let mut continuity = Verdict::new();
    let mut max_deviation = [0.0f64; 2];

    for _ in 0..samples {
        let a = sample_regime(rng, scale);
        let b = sample_regime(rng, scale);
        let lambda: f64 = rng.gen();
        let mix = f.output(lambda * a + (1.0 - lambda) * b);
        let (ra, rb) = (f.output(a), f.output(b));
        let gap0 = mix[0] - lambda * ra[0] - (1.0 - lambda) * rb[0];
        let gap1 = mix[1] - lambda * ra[1] - (1.0 - lambda) * rb[1];
        if gap0 < -CHECK_TOL || gap1 < -CHECK_TOL {
            concavity.record(vec![a, b, lambda]);
        }
    }

    let mut probes: Vec<f64> = f.kinks();
    probes.extend([0.0, 1e6]);
    probes.extend((0..samples).map(|_| sample_regime(rng, scale)));
    for beta in probes {
        let r = f.output(beta);
        let dev = [r[0].abs(), (r[1] - beta).abs()];
        max_deviation = [max_deviation[0].max(dev[0]), max_deviation[1].max(dev[1])];
        if dev[0] > bound[0] + CHECK_TOL || dev[1] > bound[1] + CHECK_TOL {
            boundedness.record(vec![beta]);
        }
    }

    for k in f.kinks() {
        let h = 1e-12 * k.abs().max(1.0);
        let right = f.output(k + h);
        let left = if k - h >= 0.0 {
            f.output(k - h)
        } else {
            f.output(k)
        };
        let centre = f.output(k);
        let gap = (right[0] - left[0])
            .abs()
            .max((right[1] - left[1]).abs())
            .max((centre[0] - left[0]).abs())
            .max((centre[1] - left[1]).abs());
        if gap > CHECK_TOL {
            continuity.record(vec![k]);
        }
    }

    AssumptionReport {
        concavity,
        boundedness,
        continuity,
        max_deviation,
        symbolic: None,
    }
}

/// Regularity checks for a thermal plant step: sampling plus breakpoint
/// enumeration.
pub fn check_assumptions<R: Rng>(
    plant: &PlantStepData,
    spot: f64,
    samples: usize,
    rng: &mut R,
) -> AssumptionReport {
    let step = ThermalStep::new(plant, spot);
    let bound = production_bound(plant, spot);
    let mut report = check_assumptions_with(&step, bound, samples, rng);

    let concave = step.hypograph_lines().is_some();
    // |R - beta| is piecewise linear in beta and constant past capacity, so
    // its maximum sits on a breakpoint.
    let bounded = step.kinks().iter().all(|&z| {
        let r = step.output(z);
        r[0].abs() <= bound[0] + CHECK_TOL && (r[1] - z).abs() <= bound[1] + CHECK_TOL
    });
    report.symbolic = Some([concave, bounded]);
    report
}
