//! Hopf–Lax formula for `u_t + m(|∇_H u|) = 0` with convex coercive `m`:
//! `u(p, t) = inf_q { t·m*(d_CC(q, p)/t) + u0(q) }`.
//!
//! The infimum is searched over displacements `v` with `q = p·v`, so that
//! `d_CC(q, p) = |v|_CC`. A uniform grid over the bounding box of the CC ball
//! seeds a few starts, which coordinate descent then polishes.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccmetric::{dcc_from_origin, GeodesicSolveConfig};
use crate::hcalc::{FnField, ScalarField};
use crate::hgroup::Point;
use crate::regularity::{lip_modulus, LipReport, Metric};
use crate::sampling::SampleSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopfLaxError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    /// The best candidate sits on the rim of the search ball, so the true
    /// infimum may lie outside; `upper_bound` is still a valid upper bound.
    #[error("search budget exceeded; best value {upper_bound} is not certified")]
    SearchBudgetExceeded { upper_bound: f64, minimizer: Point },
}

type Conjugate = dyn Fn(f64) -> f64 + Send + Sync;

/// Initial datum, Hamiltonian (through its conjugate) and declared constants.
#[derive(Clone)]
pub struct HopfLaxProblem {
    pub u0: Arc<dyn ScalarField>,
    /// Convex conjugate of `r ↦ m(r)` on `r ≥ 0`.
    pub m_conjugate: Arc<Conjugate>,
    pub horizon: f64,
    /// Declared Lipschitz constant of `u0` with respect to `d_CC`; it bounds
    /// the search radius.
    pub lip: f64,
}

impl fmt::Debug for HopfLaxProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HopfLaxProblem").field("horizon", &self.horizon).field("lip", &self.lip).finish()
    }
}

impl HopfLaxProblem {
    /// `m(r) = r²/2`, which is its own conjugate.
    pub fn quadratic(u0: Arc<dyn ScalarField>, lip: f64, horizon: f64) -> Self {
        HopfLaxProblem { u0, m_conjugate: Arc::new(|r| 0.5 * r * r), horizon, lip }
    }

    pub fn with_conjugate(mut self, m_conjugate: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.m_conjugate = Arc::new(m_conjugate);
        self
    }

    fn kernel(&self, dist: f64, t: f64) -> f64 {
        t * (self.m_conjugate)(dist / t)
    }

    /// Radius beyond which `t·m*(s/t) ≥ L·s`, so no minimizer lies further out.
    pub fn search_radius(&self, t: f64) -> f64 {
        if self.lip <= 0.0 {
            return 0.0;
        }
        let mut r = self.lip;
        for _ in 0..200 {
            if (self.m_conjugate)(r) >= self.lip * r {
                break;
            }
            r *= 2.0;
        }
        let (mut lo, mut hi) = (0.0f64, r);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid > 0.0 && (self.m_conjugate)(mid) >= self.lip * mid {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi * t
    }
}

/// `−min(d_CC(0, q), cap)`: bounded, and 1-Lipschitz for `d_CC`.
pub fn truncated_cone(cap: f64) -> FnField {
    let cfg = GeodesicSolveConfig::default();
    FnField::stationary(move |q| -dcc_from_origin(q, &cfg).unwrap_or(f64::NAN).min(cap))
}

/// Result of one Hopf–Lax evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfLaxValue {
    pub value: f64,
    pub minimizer: Point,
}

const STARTS: usize = 3;
const RIM: f64 = 1.1;
const POLISH_BUDGET: usize = 1_500;

/// Solution value at `(p, t)`; `search.count` is the size of the seeding grid.
pub fn evaluate(prob: &HopfLaxProblem, p: Point, t: f64, search: &SampleSpec) -> Result<HopfLaxValue, HopfLaxError> {
    if !(t > 0.0) {
        return Err(HopfLaxError::NonPositiveTime(t));
    }
    let cfg = GeodesicSolveConfig::default();
    let radius = prob.search_radius(t);
    let limit = RIM * radius;
    let objective = |v: Point| -> f64 {
        let d = dcc_from_origin(v, &cfg).unwrap_or(f64::INFINITY);
        if d > limit {
            return f64::INFINITY;
        }
        prob.kernel(d, t) + prob.u0.value(p * v, 0.0)
    };
    if radius == 0.0 {
        return Ok(HopfLaxValue { value: objective(Point::ORIGIN), minimizer: p });
    }

    // the CC ball of radius R fits in |x|, |y| ≤ R, |z| ≤ R²/(4π)
    let zr = limit * limit / (4.0 * std::f64::consts::PI);
    let n = ((search.count.max(8) as f64).cbrt().ceil() as usize).max(2) | 1;
    let axis = |i: usize, half: f64| -half + 2.0 * half * i as f64 / (n - 1) as f64;
    let mut seeds: Vec<(f64, Point)> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let v = Point::new(axis(idx % n, limit), axis((idx / n) % n, limit), axis(idx / (n * n), zr));
            (objective(v), v)
        })
        .chain(rayon::iter::once((objective(Point::ORIGIN), Point::ORIGIN)))
        .filter(|(f, _)| f.is_finite())
        .collect();
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(STARTS);

    let steps0 = [2.0 * limit / (n - 1) as f64, 2.0 * limit / (n - 1) as f64, 2.0 * zr / (n - 1) as f64];
    let (value, v) = seeds
        .into_iter()
        .map(|(f, v)| polish(&objective, f, v, steps0))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((objective(Point::ORIGIN), Point::ORIGIN));

    let minimizer = p * v;
    let reach = dcc_from_origin(v, &cfg).unwrap_or(f64::INFINITY);
    if reach > radius * (1.0 + 1e-6) && reach >= 0.99 * limit {
        return Err(HopfLaxError::SearchBudgetExceeded { upper_bound: value, minimizer });
    }
    Ok(HopfLaxValue { value, minimizer })
}

/// Coordinate descent with step halving, capped at `POLISH_BUDGET`
/// evaluations; flat valleys otherwise invite endless tiny moves.
fn polish(objective: &impl Fn(Point) -> f64, mut best: f64, mut v: Point, mut steps: [f64; 3]) -> (f64, Point) {
    let floor = 1e-8 * steps[0].max(1e-300);
    let mut budget = POLISH_BUDGET;
    while steps[0] > floor && budget > 0 {
        let mut moved = false;
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut cand = v;
                match axis {
                    0 => cand.x += sign * steps[0],
                    1 => cand.y += sign * steps[1],
                    _ => cand.z += sign * steps[2],
                }
                budget = budget.saturating_sub(1);
                let f = objective(cand);
                if f < best - 1e-13 * (1.0 + best.abs()) {
                    best = f;
                    v = cand;
                    moved = true;
                }
            }
        }
        if !moved {
            steps = steps.map(|s| 0.5 * s);
        }
    }
    (best, v)
}

/// Solution as a field: `value(p, t)` is the Hopf–Lax value, or the
/// uncertified upper bound when the search budget was exceeded.
#[derive(Debug, Clone)]
pub struct HopfLaxField {
    pub problem: HopfLaxProblem,
    pub search: SampleSpec,
}

impl ScalarField for HopfLaxField {
    fn value(&self, p: Point, t: f64) -> f64 {
        if t <= 0.0 {
            return self.problem.u0.value(p, 0.0);
        }
        match evaluate(&self.problem, p, t, &self.search) {
            Ok(v) => v.value,
            Err(HopfLaxError::SearchBudgetExceeded { upper_bound, .. }) => upper_bound,
            Err(HopfLaxError::NonPositiveTime(_)) => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipCheckReport {
    pub modulus: LipReport,
    pub bound: f64,
    pub passes: bool,
}

/// Relative slack granted to the sampled modulus for search error.
pub const LIP_SLACK: f64 = 0.05;

/// Sampled left-invariant Lipschitz modulus of the solution at time `t`,
/// checked against `L·(1 + LIP_SLACK)`.
pub fn lip_check(prob: &HopfLaxProblem, t: f64, s: &SampleSpec, search: &SampleSpec) -> LipCheckReport {
    let field = HopfLaxField { problem: prob.clone(), search: *search };
    let modulus = lip_modulus(&field, t, Metric::Left, s);
    let bound = prob.lip * (1.0 + LIP_SLACK);
    LipCheckReport { passes: modulus.value <= bound, bound, modulus }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn search() -> SampleSpec {
        SampleSpec::new(0, 2000, 1.0, 1.0)
    }

    fn cone_problem() -> HopfLaxProblem {
        HopfLaxProblem::quadratic(Arc::new(truncated_cone(1.0)), 1.0, 1.0)
    }

    #[test]
    fn zero_datum_stays_zero() {
        let prob = HopfLaxProblem::quadratic(Arc::new(FnField::stationary(|_| 0.0)), 1.0, 1.0);
        let v = evaluate(&prob, Point::new(0.3, -0.2, 0.1), 0.7, &search()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn truncated_cone_at_origin() {
        let v = evaluate(&cone_problem(), Point::ORIGIN, 0.5, &search()).unwrap();
        assert!((v.value + 0.25).abs() < 1e-6, "{v:?}");
        let reach = dcc_from_origin(v.minimizer, &GeodesicSolveConfig::default()).unwrap();
        assert!((reach - 0.5).abs() < 1e-3);
    }

    #[test]
    fn nonincreasing_in_time_for_nonpositive_data() {
        let prob = cone_problem();
        let p = Point::new(0.2, 0.1, -0.05);
        let vals: Vec<f64> = [0.1, 0.3, 0.6].iter().map(|&t| evaluate(&prob, p, t, &search()).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{vals:?}");
    }

    #[test]
    fn dilation_identity_for_homogeneous_data() {
        let cfg = GeodesicSolveConfig::default();
        let u0 = FnField::stationary(move |q| -dcc_from_origin(q, &cfg).unwrap());
        let prob = HopfLaxProblem::quadratic(Arc::new(u0), 1.0, 1.0);
        let p = Point::new(0.3, -0.1, 0.05);
        let lam = 2.0;
        let a = evaluate(&prob, p.dilate(lam), lam * 0.4, &search()).unwrap().value;
        let b = evaluate(&prob, p, 0.4, &search()).unwrap().value;
        assert!((a - lam * b).abs() < 1e-6, "{a} vs {}", lam * b);
    }

    #[test]
    fn general_conjugate_kernel() {
        // m(r) = r⁴/4 has conjugate (3/4) s^{4/3}
        let prob = cone_problem().with_conjugate(|s| 0.75 * s.powf(4.0 / 3.0));
        assert!((prob.search_radius(1.0) - (4.0f64 / 3.0).powi(3)).abs() < 1e-9);
        // along a geodesic from p = 0 the objective is t·(3/4)(s/t)^{4/3} − s, minimized at s = t
        let v = evaluate(&prob, Point::ORIGIN, 0.5, &search()).unwrap();
        assert!((v.value - (0.75 * 0.5 - 0.5)).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(matches!(
            evaluate(&cone_problem(), Point::ORIGIN, 0.0, &search()),
            Err(HopfLaxError::NonPositiveTime(_))
        ));
    }

    #[test]
    fn vertical_pairs_exceed_unit_left_modulus() {
        // −d_CC is 1-Lipschitz for d_CC but only √π-Lipschitz for the gauge distance
        let u = truncated_cone(1.0);
        let q = Point::new(0.0, 0.0, 0.01);
        let ratio = (u.value(q, 0.0) - u.value(Point::ORIGIN, 0.0)).abs() / q.gauge();
        assert!((ratio - std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }
}
