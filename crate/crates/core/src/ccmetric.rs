//! Carnot–Carathéodory distance.
//!
//! Length-minimizing horizontal curves from the origin project to circular
//! arcs in the `(x, y)` plane, and the `z` coordinate they reach equals the
//! signed area swept between arc and chord. Writing `r` for the chord length
//! and `θ ∈ [0, 2π)` for the turning angle of the arc,
//!
//! ```text
//! |z| / r² = (θ − sin θ) / (8 sin²(θ/2)),     length = r θ / (2 sin(θ/2)).
//! ```
//!
//! The left side is strictly increasing in `θ`, so bisection finds the arc.
//! Points on the vertical axis are reached by full circles of area `|z|`,
//! giving length `2√(π|z|)`.
//!
//! [`dcc_oracle`] is an independent check: it minimizes length directly over
//! polygonal horizontal paths with a fixed number of segments.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hgroup::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CcError {
    #[error("geodesic root-finder did not converge in {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("endpoint constraint residual {residual:e} above tolerance")]
    OptimizationFailure { residual: f64 },
    #[error("invalid geodesic solver configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSolveConfig {
    /// Bisection stops once the turning-angle bracket is narrower than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Segment count used when the polygonal oracle is requested.
    pub oracle_segments: usize,
}

impl Default for GeodesicSolveConfig {
    fn default() -> Self {
        GeodesicSolveConfig { tol: 1e-14, max_iter: 200, oracle_segments: 256 }
    }
}

impl GeodesicSolveConfig {
    fn validate(&self) -> Result<(), CcError> {
        if !(self.tol > 0.0) {
            return Err(CcError::InvalidConfig("tol must be positive"));
        }
        if self.oracle_segments < 8 {
            return Err(CcError::InvalidConfig("oracle_segments must be at least 8"));
        }
        Ok(())
    }
}

/// Below this ratio `r²/|z|` the point is treated as lying on the vertical axis.
const AXIS_RATIO: f64 = 1e-8;

/// `(θ − sin θ) / (8 sin²(θ/2))` written in the half angle `φ = θ/2`.
fn area_ratio(phi: f64) -> f64 {
    let s = phi.sin();
    let num = if phi < 1e-2 {
        // 2φ − sin 2φ, series avoids cancellation
        let t = 2.0 * phi;
        let t2 = t * t;
        t * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)))
    } else {
        2.0 * phi - (2.0 * phi).sin()
    };
    num / (8.0 * s * s)
}

/// `d_CC(0, p)`.
pub fn dcc_from_origin(p: Point, cfg: &GeodesicSolveConfig) -> Result<f64, CcError> {
    cfg.validate()?;
    let r = p.x.hypot(p.y);
    let z = p.z.abs();
    if z == 0.0 {
        return Ok(r);
    }
    if r * r <= AXIS_RATIO * z {
        return Ok(2.0 * (std::f64::consts::PI * z).sqrt());
    }
    let target = z / (r * r);
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::PI);
    let mut iterations = 0;
    while hi - lo > cfg.tol * hi.max(1.0) {
        if iterations >= cfg.max_iter {
            return Err(CcError::NonConvergence { iterations });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if area_ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    let scale = if phi < 1e-8 { 1.0 + phi * phi / 6.0 } else { phi / phi.sin() };
    Ok(r * scale)
}

/// `d_CC(p, q) = d_CC(0, p⁻¹·q)`.
pub fn dcc(p: Point, q: Point, cfg: &GeodesicSolveConfig) -> Result<f64, CcError> {
    dcc_from_origin(p.inverse() * q, cfg)
}

/// Upper bound on `d_CC(0, p)` from a polygonal horizontal path with
/// `segments` pieces.
///
/// Optimization starts from an 8-segment path, minimizes its length under
/// the three endpoint constraints by projected gradient descent, then
/// repeatedly bisects every segment and refines. Bisection keeps the path
/// feasible and descent only accepts improvements, so the result never
/// increases when `segments` doubles.
pub fn dcc_oracle(p: Point, segments: usize) -> Result<f64, CcError> {
    if segments < 8 {
        return Err(CcError::InvalidConfig("oracle_segments must be at least 8"));
    }
    if p.x == 0.0 && p.y == 0.0 && p.z == 0.0 {
        return Ok(0.0);
    }
    let mut path = PolygonPath::initial(p, 8);
    path.project()?;
    path.descend()?;
    while path.len() < segments {
        let next = (2 * path.len()).min(segments);
        path = path.refined(next);
        path.project()?;
        path.descend()?;
    }
    Ok(path.length())
}

/// Piecewise-constant horizontal control, stored as segment displacements.
#[derive(Debug, Clone)]
struct PolygonPath {
    target: Point,
    d: Vec<[f64; 2]>,
}

const FEASIBLE_TOL: f64 = 1e-11;

impl PolygonPath {
    fn initial(target: Point, n: usize) -> Self {
        // chord plus a loop whose area is the target height
        let radius = (target.z.abs() / std::f64::consts::PI).sqrt();
        let orient = if target.z < 0.0 { -1.0 } else { 1.0 };
        let d = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
                let arc = radius * std::f64::consts::TAU / n as f64;
                [target.x / n as f64 - arc * a.sin(), target.y / n as f64 + orient * arc * a.cos()]
            })
            .collect();
        PolygonPath { target, d }
    }

    fn len(&self) -> usize {
        self.d.len()
    }

    fn refined(&self, n: usize) -> Self {
        let mut d = Vec::with_capacity(n);
        let extra = n - self.len();
        for (i, seg) in self.d.iter().enumerate() {
            if i < extra {
                d.push([0.5 * seg[0], 0.5 * seg[1]]);
                d.push([0.5 * seg[0], 0.5 * seg[1]]);
            } else {
                d.push(*seg);
            }
        }
        PolygonPath { target: self.target, d }
    }

    fn length(&self) -> f64 {
        self.d.iter().map(|s| s[0].hypot(s[1])).sum()
    }

    fn endpoint(d: &[[f64; 2]]) -> Point {
        let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
        for s in d {
            z += 0.5 * (x * s[1] - y * s[0]);
            x += s[0];
            y += s[1];
        }
        Point::new(x, y, z)
    }

    fn residual_of(&self, d: &[[f64; 2]]) -> Vector3<f64> {
        let e = Self::endpoint(d);
        Vector3::new(e.x - self.target.x, e.y - self.target.y, e.z - self.target.z)
    }

    /// Gradient of the height constraint with respect to each segment.
    fn height_gradient(d: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = d.len();
        let mut prefix = vec![[0.0; 2]; n];
        let mut acc = [0.0, 0.0];
        for i in 0..n {
            prefix[i] = acc;
            acc[0] += d[i][0];
            acc[1] += d[i][1];
        }
        let mut suffix = [0.0, 0.0];
        let mut g = vec![[0.0; 2]; n];
        for k in (0..n).rev() {
            g[k] = [0.5 * (suffix[1] - prefix[k][1]), 0.5 * (prefix[k][0] - suffix[0])];
            suffix[0] += d[k][0];
            suffix[1] += d[k][1];
        }
        g
    }

    /// Gram matrix `J Jᵀ` of the constraint Jacobian.
    fn gram(n: usize, hg: &[[f64; 2]]) -> Matrix3<f64> {
        let sx: f64 = hg.iter().map(|g| g[0]).sum();
        let sy: f64 = hg.iter().map(|g| g[1]).sum();
        let ss: f64 = hg.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum();
        let n = n as f64;
        Matrix3::new(n, 0.0, sx, 0.0, n, sy, sx, sy, ss) + Matrix3::identity() * 1e-14
    }

    /// Minimum-norm correction `−Jᵀ (J Jᵀ)⁻¹ rhs` added to `d`.
    fn apply_min_norm(d: &mut [[f64; 2]], hg: &[[f64; 2]], lam: Vector3<f64>) {
        for (s, g) in d.iter_mut().zip(hg) {
            s[0] -= lam[0] + lam[2] * g[0];
            s[1] -= lam[1] + lam[2] * g[1];
        }
    }

    fn project_slice(&self, d: &mut [[f64; 2]]) -> Result<(), CcError> {
        let scale = 1.0 + self.target.gauge();
        for _ in 0..50 {
            let c = self.residual_of(d);
            if c.norm() <= FEASIBLE_TOL * scale * scale {
                return Ok(());
            }
            let hg = Self::height_gradient(d);
            let lam =
                Self::gram(d.len(), &hg).lu().solve(&c).ok_or(CcError::OptimizationFailure { residual: c.norm() })?;
            Self::apply_min_norm(d, &hg, lam);
        }
        let residual = self.residual_of(d).norm();
        if residual <= FEASIBLE_TOL * scale * scale {
            Ok(())
        } else {
            Err(CcError::OptimizationFailure { residual })
        }
    }

    fn project(&mut self) -> Result<(), CcError> {
        let mut d = std::mem::take(&mut self.d);
        let out = self.project_slice(&mut d);
        self.d = d;
        out
    }

    fn descend(&mut self) -> Result<(), CcError> {
        let n = self.len();
        let mut eta = self.length() / n as f64;
        let mut current = self.length();
        let min_eta = 1e-14 * (1.0 + current);
        let mut trial = self.d.clone();
        let mut stalls = 0;
        for _ in 0..20_000 {
            // length gradient projected onto the constraint tangent space
            let hg = Self::height_gradient(&self.d);
            let mut grad: Vec<[f64; 2]> = self
                .d
                .iter()
                .map(|s| {
                    let l = s[0].hypot(s[1]);
                    if l > 1e-300 {
                        [s[0] / l, s[1] / l]
                    } else {
                        [0.0, 0.0]
                    }
                })
                .collect();
            let jg = Vector3::new(
                grad.iter().map(|g| g[0]).sum(),
                grad.iter().map(|g| g[1]).sum(),
                grad.iter().zip(&hg).map(|(g, h)| g[0] * h[0] + g[1] * h[1]).sum(),
            );
            if let Some(lam) = Self::gram(n, &hg).lu().solve(&jg) {
                Self::apply_min_norm(&mut grad, &hg, lam);
            }
            let gnorm: f64 = grad.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum::<f64>().sqrt();
            if gnorm < 1e-12 {
                break;
            }
            let mut accepted = false;
            while eta > min_eta {
                for ((t, s), g) in trial.iter_mut().zip(&self.d).zip(&grad) {
                    t[0] = s[0] - eta * g[0];
                    t[1] = s[1] - eta * g[1];
                }
                if self.project_slice(&mut trial).is_ok() {
                    let len: f64 = trial.iter().map(|s| s[0].hypot(s[1])).sum();
                    if len < current {
                        let gain = current - len;
                        std::mem::swap(&mut self.d, &mut trial);
                        current = len;
                        eta *= 1.5;
                        accepted = true;
                        stalls = if gain < 1e-15 * current { stalls + 1 } else { 0 };
                        break;
                    }
                }
                eta *= 0.5;
            }
            if !accepted || stalls > 20 {
                break;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;
    use std::f64::consts::PI;

    fn cfg() -> GeodesicSolveConfig {
        GeodesicSolveConfig::default()
    }

    #[test]
    fn horizontal_targets_are_straight() {
        assert_eq!(dcc_from_origin(Point::new(3.0, 4.0, 0.0), &cfg()).unwrap(), 5.0);
        assert_eq!(dcc(Point::ORIGIN, Point::new(3.0, 4.0, 0.0), &cfg()).unwrap(), 5.0);
        let p = Point::new(0.2, -1.0, 3.0);
        assert_eq!(dcc(p, p, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn vertical_anchor() {
        let d = dcc_from_origin(Point::new(0.0, 0.0, 1.0), &cfg()).unwrap();
        assert!((d - 2.0 * PI.sqrt()).abs() < 1e-15);
        assert!((d - 3.544908).abs() < 1e-6);
    }

    #[test]
    fn axis_branch_is_continuous() {
        let z = 1.0;
        let inside = Point::new((0.5e-8f64).sqrt(), 0.0, z);
        let outside = Point::new((2e-8f64).sqrt(), 0.0, z);
        let a = dcc_from_origin(inside, &cfg()).unwrap();
        let b = dcc_from_origin(outside, &cfg()).unwrap();
        assert!((a - b).abs() < 1e-3, "{a} {b}");
    }

    #[test]
    fn semicircle_target() {
        // half circle of radius 1: chord 2, area π/2, length π
        let d = dcc_from_origin(Point::new(2.0, 0.0, PI / 2.0), &cfg()).unwrap();
        assert!((d - PI).abs() < 1e-10, "{d}");
    }

    #[test]
    fn homogeneity_rotation_symmetry() {
        let mut rng = Sampler::new(7);
        for _ in 0..100 {
            let p = rng.point_in_gauge_ball(3.0);
            let lam = rng.uniform(0.1, 5.0);
            let d = dcc_from_origin(p, &cfg()).unwrap();
            let dl = dcc_from_origin(p.dilate(lam), &cfg()).unwrap();
            assert!((dl - lam * d).abs() <= 1e-10 * dl);
            let a = rng.uniform(0.0, 6.0);
            let rot = Point::new(p.x * a.cos() - p.y * a.sin(), p.x * a.sin() + p.y * a.cos(), p.z);
            let dr = dcc_from_origin(rot, &cfg()).unwrap();
            assert!((dr - d).abs() <= 1e-10 * d.max(1e-300));
            let q = rng.point_in_gauge_ball(3.0);
            let a = dcc(p, q, &cfg()).unwrap();
            let b = dcc(q, p, &cfg()).unwrap();
            assert!((a - b).abs() <= 1e-8 * a);
        }
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let tight = GeodesicSolveConfig { max_iter: 3, ..cfg() };
        let err = dcc_from_origin(Point::new(1.0, 0.0, 0.3), &tight).unwrap_err();
        assert!(matches!(err, CcError::NonConvergence { .. }));
        let bad = GeodesicSolveConfig { oracle_segments: 4, ..cfg() };
        assert!(dcc_from_origin(Point::new(1.0, 0.0, 0.0), &bad).is_err());
    }

    #[test]
    fn oracle_straight_line() {
        let d = dcc_oracle(Point::new(1.0, 0.0, 0.0), 8).unwrap();
        assert!((1.0..=1.0 + 1e-6).contains(&d), "{d}");
    }

    #[test]
    fn oracle_vertical_anchor() {
        let d = dcc_oracle(Point::new(0.0, 0.0, 1.0), 256).unwrap();
        let exact = 2.0 * PI.sqrt();
        assert!(d >= exact - 1e-9 && d <= exact * 1.01, "{d}");
    }

    #[test]
    fn oracle_bounds_and_monotone() {
        let mut rng = Sampler::new(29);
        for _ in 0..6 {
            let p = rng.point_in_gauge_ball(2.0);
            let exact = dcc_from_origin(p, &cfg()).unwrap();
            let mut prev = f64::INFINITY;
            for n in [16, 32, 64, 128, 256] {
                let d = dcc_oracle(p, n).unwrap();
                assert!(d <= prev + 1e-12, "{p:?} {n} {d} {prev}");
                assert!(exact <= d + 1e-8, "{p:?} {exact} {d}");
                prev = d;
            }
            assert!(prev <= exact * 1.01, "{p:?} {exact} {prev}");
        }
    }
}
