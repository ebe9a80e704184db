//! Matrix algebra behind the doubling-of-variables argument.
//!
//! The penalization `Φ(p, r) = |p·r⁻¹|⁴` is invariant under
//! `(p, r) ↦ (p·g, r·g)`. Its Euclidean Hessian therefore annihilates, as a
//! quadratic form, the twisted lifts `(w1, w2, (w2 x − w1 y)/2)` of one
//! horizontal vector taken at each base point: those lifts are the velocity
//! of `s ↦ (p·exp(sw), r·exp(sw))`, a straight line along which `Φ` is
//! constant. The squared Hessian gives `512 m² |w|²` with `m` the height of
//! `p·r⁻¹`.
//!
//! Everything is computed at penalization weight `ε = 1`; the `1/ε` factor
//! scales out exactly.

use std::io::{self, Write};

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hgroup::Point;
use crate::sampling::SampleSpec;

pub type Mat3 = SMatrix<f64, 3, 3>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat9 = SMatrix<f64, 9, 9>;
pub type Vec6 = SVector<f64, 6>;
pub type Vec9 = SVector<f64, 9>;

/// Constant of the squared identity.
pub const SQUARED_CONSTANT: f64 = 512.0;
/// Constant of the cross identity.
pub const CROSS_CONSTANT: f64 = 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingConfig {
    pub eps: f64,
    pub beta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub horizon: f64,
    /// Times attached to `p`, `q` and `r`.
    pub time_points: (f64, f64, f64),
}

impl Default for DoublingConfig {
    fn default() -> Self {
        DoublingConfig {
            eps: 1.0,
            beta: 1.0,
            alpha: 1.0,
            lambda: 0.5,
            sigma: 1.0,
            horizon: 1.0,
            time_points: (0.5, 0.5, 0.5),
        }
    }
}

/// Horizontal vector `w` lifted to the tangent space at `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistedVector {
    pub w: [f64; 2],
    pub base: Point,
}

impl TwistedVector {
    pub fn new(w: [f64; 2], base: Point) -> Self {
        TwistedVector { w, base }
    }

    /// `(w1, w2, w2 x/2 − w1 y/2)`.
    pub fn lift(&self) -> [f64; 3] {
        let [w1, w2] = self.w;
        [w1, w2, 0.5 * w2 * self.base.x - 0.5 * w1 * self.base.y]
    }
}

/// Height of `p·r⁻¹`: `z_p − z_r + (y_p x_r − x_p y_r)/2`.
pub fn height(p: Point, r: Point) -> f64 {
    p.z - r.z + 0.5 * (p.y * r.x - p.x * r.y)
}

/// Euclidean Hessian of `(p, r) ↦ |p·r⁻¹|⁴` in the coordinates
/// `(x_p, y_p, z_p, x_r, y_r, z_r)`.
pub fn phi_hessian(p: Point, r: Point) -> Mat6 {
    let a = p.x - r.x;
    let b = p.y - r.y;
    let c = height(p, r);
    let rho2 = a * a + b * b;
    // derivative of (a, b, c) with respect to the six coordinates
    let jac = SMatrix::<f64, 3, 6>::from_row_slice(&[
        1.0,
        0.0,
        0.0,
        -1.0,
        0.0,
        0.0, //
        0.0,
        1.0,
        0.0,
        0.0,
        -1.0,
        0.0, //
        -0.5 * r.y,
        0.5 * r.x,
        1.0,
        0.5 * p.y,
        -0.5 * p.x,
        -1.0,
    ]);
    let outer = Mat3::new(
        4.0 * rho2 + 8.0 * a * a,
        8.0 * a * b,
        0.0, //
        8.0 * a * b,
        4.0 * rho2 + 8.0 * b * b,
        0.0, //
        0.0,
        0.0,
        32.0,
    );
    let mut h = jac.transpose() * outer * jac;
    // c is bilinear in (x_p, y_r) and (x_r, y_p)
    let gc = 32.0 * c;
    h[(0, 4)] -= 0.5 * gc;
    h[(4, 0)] -= 0.5 * gc;
    h[(3, 1)] += 0.5 * gc;
    h[(1, 3)] += 0.5 * gc;
    h
}

fn embed(h: &Mat6, a: usize, b: usize) -> Mat9 {
    let mut m = Mat9::zeros();
    let slots = [a, b];
    for (bi, &si) in slots.iter().enumerate() {
        for (bj, &sj) in slots.iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    m[(3 * si + i, 3 * sj + j)] = h[(3 * bi + i, 3 * bj + j)];
                }
            }
        }
    }
    m
}

/// Hessian of `|p·r⁻¹|⁴` placed on the `(p, r)` slots of `(p, q, r)`.
pub fn three_point_first(p: Point, r: Point) -> Mat9 {
    embed(&phi_hessian(p, r), 0, 2)
}

/// Hessian of `|q·r⁻¹|⁴` placed on the `(q, r)` slots of `(p, q, r)`.
pub fn three_point_second(q: Point, r: Point) -> Mat9 {
    embed(&phi_hessian(q, r), 1, 2)
}

/// `w_p ⊕ w_q ⊕ w_r`.
pub fn lift_three(p: Point, q: Point, r: Point, w: [f64; 2]) -> Vec9 {
    let mut v = Vec9::zeros();
    for (k, base) in [p, q, r].into_iter().enumerate() {
        let l = TwistedVector::new(w, base).lift();
        v[3 * k] = l[0];
        v[3 * k + 1] = l[1];
        v[3 * k + 2] = l[2];
    }
    v
}

/// `w_p ⊕ w_q`.
pub fn lift_two(p: Point, q: Point, w: [f64; 2]) -> Vec6 {
    let a = TwistedVector::new(w, p).lift();
    let b = TwistedVector::new(w, q).lift();
    Vec6::from_column_slice(&[a[0], a[1], a[2], b[0], b[1], b[2]])
}

/// Scale for tolerances: the natural size of the quadratic form.
pub fn form_scale(p: Point, q: Point, r: Point, w: [f64; 2]) -> f64 {
    let s = 1.0 + p.gauge().max(q.gauge()).max(r.gauge());
    s.powi(4) * (w[0] * w[0] + w[1] * w[1]).max(1e-300)
}

/// `⟨M W, W⟩` for the `(p, r)` penalization Hessian on the three-point lift.
pub fn identity_vanishing(p: Point, q: Point, r: Point, w: [f64; 2]) -> f64 {
    let v = lift_three(p, q, r, w);
    v.dot(&(three_point_first(p, r) * v))
}

/// Two-point analogue: `⟨∇²|p·q⁻¹|⁴ (w_p ⊕ w_q), w_p ⊕ w_q⟩`.
pub fn identity_vanishing_two(p: Point, q: Point, w: [f64; 2]) -> f64 {
    let v = lift_two(p, q, w);
    v.dot(&(phi_hessian(p, q) * v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquaredIdentity {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / (m² |w|²)`; `None` when that denominator vanishes.
    pub ratio: Option<f64>,
}

fn squared(lhs: f64, m: f64, w: [f64; 2], constant: f64) -> SquaredIdentity {
    let denom = m * m * (w[0] * w[0] + w[1] * w[1]);
    SquaredIdentity { lhs, rhs: constant * denom, ratio: (denom > 1e-200).then(|| lhs / denom) }
}

/// `⟨M² W, W⟩` against `512 m² |w|²` with `m = height(p, r)`.
pub fn identity_squared(p: Point, q: Point, r: Point, w: [f64; 2]) -> SquaredIdentity {
    let v = lift_three(p, q, r, w);
    let mv = three_point_first(p, r) * v;
    squared(mv.dot(&mv), height(p, r), w, SQUARED_CONSTANT)
}

/// Two-point analogue of [`identity_squared`].
pub fn identity_squared_two(p: Point, q: Point, w: [f64; 2]) -> SquaredIdentity {
    let v = lift_two(p, q, w);
    let mv = phi_hessian(p, q) * v;
    squared(mv.dot(&mv), height(p, q), w, SQUARED_CONSTANT)
}

/// `⟨M' M'' W, W⟩` against `256 m1 m2 |w|²`.
pub fn identity_cross(p: Point, q: Point, r: Point, w: [f64; 2]) -> SquaredIdentity {
    let v = lift_three(p, q, r, w);
    let a = three_point_first(p, r) * v;
    let b = three_point_second(q, r) * v;
    let lhs = a.dot(&b);
    let m1 = height(p, r);
    let m2 = height(q, r);
    let denom = m1 * m2 * (w[0] * w[0] + w[1] * w[1]);
    SquaredIdentity { lhs, rhs: CROSS_CONSTANT * denom, ratio: (denom.abs() > 1e-200).then(|| lhs / denom) }
}

/// Euclidean Hessian of `g(p, t) = exp(αt + β⟨p⟩)`.
pub fn weight_hessian(p: Point, t: f64, alpha: f64, beta: f64) -> Mat3 {
    let g = (alpha * t + beta * p.bracket()).exp();
    let d = p.euclid_grad_bracket();
    let h = p.euclid_hess_bracket();
    Mat3::from_fn(|i, j| beta * g * (h[i][j] + beta * d[i] * d[j]))
}

fn weight(p: Point, t: f64, alpha: f64, beta: f64) -> f64 {
    (alpha * t + beta * p.bracket()).exp()
}

/// One sampled configuration with its quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenalizationSample {
    pub p: Point,
    pub q: Point,
    pub r: Point,
    pub w: [f64; 2],
    /// Two-point `⟨M2 W,W⟩`, `⟨M1 M2 W,W⟩`, `⟨M2² W,W⟩`, then the three-point ones.
    pub forms: [f64; 6],
    /// Each form divided by its normalizer (`|w|² K`, `|w|² K |m|`, `|w|² K²`).
    pub ratios: [f64; 6],
}

pub const FORM_NAMES: [&str; 6] =
    ["two_point_m2", "two_point_m1m2", "two_point_m2sq", "three_point_m2", "three_point_m1m2", "three_point_m2sq"];

/// Sampled constant for one displayed inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormBound {
    pub name: String,
    /// Largest sampled ratio: the empirical constant.
    pub c_hat: f64,
    pub witness: Option<Point>,
    /// Largest ratio per gauge shell `[k R/4, (k+1) R/4)`.
    pub shell_sups: Vec<f64>,
    /// Set when the outermost shell dominates the inner ones by more than 1.5×.
    pub diverging: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenalizationReport {
    pub config: DoublingConfig,
    pub samples: usize,
    pub radius: f64,
    pub bounds: Vec<FormBound>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 1e-300 {
        num / den
    } else {
        0.0
    }
}

fn evaluate_sample(cfg: &DoublingConfig, p: Point, q: Point, r: Point, w: [f64; 2]) -> PenalizationSample {
    let (t, s, tau) = cfg.time_points;
    let (a, b) = (cfg.alpha, cfg.beta);
    let w2 = w[0] * w[0] + w[1] * w[1];
    let inv_eps = 1.0 / cfg.eps;

    // two points: K = g(p,t) + g(q,s), M1 = ∇²|p·q⁻¹|⁴ / ε
    let k2 = weight(p, t, a, b) + weight(q, s, a, b);
    let mut m2 = Mat6::zeros();
    m2.fixed_view_mut::<3, 3>(0, 0).copy_from(&weight_hessian(p, t, a, b));
    m2.fixed_view_mut::<3, 3>(3, 3).copy_from(&weight_hessian(q, s, a, b));
    let m1 = phi_hessian(p, q) * inv_eps;
    let v = lift_two(p, q, w);
    let m2v = m2 * v;
    let f0 = v.dot(&m2v);
    let f1 = (m1 * v).dot(&m2v);
    let f2 = m2v.dot(&m2v);
    let h = height(p, q).abs();

    // three points: K = g(p,t) + g(q,s) + g(r,τ)
    let k3 = k2 + weight(r, tau, a, b);
    let mut n2 = Mat9::zeros();
    n2.fixed_view_mut::<3, 3>(0, 0).copy_from(&weight_hessian(p, t, a, b));
    n2.fixed_view_mut::<3, 3>(3, 3).copy_from(&weight_hessian(q, s, a, b));
    n2.fixed_view_mut::<3, 3>(6, 6).copy_from(&weight_hessian(r, tau, a, b));
    let n1 = (three_point_first(p, r) + three_point_second(q, r)) * inv_eps;
    let u = lift_three(p, q, r, w);
    let n2u = n2 * u;
    let g0 = u.dot(&n2u);
    let g1 = (n1 * u).dot(&n2u);
    let g2 = n2u.dot(&n2u);
    let h3 = height(p, r).abs() + height(q, r).abs();

    let forms = [f0, f1, f2, g0, g1, g2];
    let ratios = [
        ratio(f0, w2 * k2),
        ratio(f1 * cfg.eps, w2 * k2 * h),
        ratio(f2, w2 * k2 * k2),
        ratio(g0, w2 * k3),
        ratio(g1 * cfg.eps, w2 * k3 * h3),
        ratio(g2, w2 * k3 * k3),
    ];
    PenalizationSample { p, q, r, w, forms, ratios }
}

/// Draws `(p, q, r, w)` with points in the gauge ball of `s.radius` and
/// `|w| ≤ 1`, and evaluates every form.
pub fn penalization_samples(cfg: &DoublingConfig, s: &SampleSpec) -> Vec<PenalizationSample> {
    let mut rng = s.sampler();
    let inputs: Vec<_> = (0..s.count)
        .map(|_| {
            let p = rng.point_in_gauge_ball(s.radius);
            let q = rng.point_in_gauge_ball(s.radius);
            let r = rng.point_in_gauge_ball(s.radius);
            let h = rng.horizontal(1e-3, 1.0);
            (p, q, r, [h.h1, h.h2])
        })
        .collect();
    inputs.par_iter().map(|&(p, q, r, w)| evaluate_sample(cfg, p, q, r, w)).collect()
}

/// Sampled constants, each sharpened by a local random search started from
/// the best few samples of its form.
pub fn penalization_bounds(cfg: &DoublingConfig, s: &SampleSpec) -> PenalizationReport {
    let mut rows = penalization_samples(cfg, s);
    let polished: Vec<PenalizationSample> = (0..6)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.sort_by(|&a, &b| rows[b].ratios[k].total_cmp(&rows[a].ratios[k]));
            order.truncate(POLISH_STARTS);
            let starts: Vec<PenalizationSample> = order.iter().map(|&i| rows[i]).collect();
            starts.into_iter().enumerate().map(move |(j, row)| polish(cfg, s, row, k, (k * POLISH_STARTS + j) as u64))
        })
        .collect();
    rows.extend(polished);
    summarize(cfg, s, &rows)
}

const POLISH_STARTS: usize = 8;
const POLISH_ROUNDS: usize = 1500;

fn polish(
    cfg: &DoublingConfig,
    s: &SampleSpec,
    start: PenalizationSample,
    k: usize,
    stream: u64,
) -> PenalizationSample {
    let mut rng = crate::sampling::Sampler::new(s.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(stream + 1)));
    let mut best = start;
    let mut step = 0.1 * s.radius;
    let jitter = |rng: &mut crate::sampling::Sampler, p: Point, step: f64| {
        let q = p * rng.gauge_sphere_point().dilate(step * rng.unit());
        if q.gauge() <= s.radius {
            q
        } else {
            p
        }
    };
    for round in 0..POLISH_ROUNDS {
        let p = jitter(&mut rng, best.p, step);
        let q = jitter(&mut rng, best.q, step);
        let r = jitter(&mut rng, best.r, step);
        let a = rng.uniform(0.0, std::f64::consts::TAU);
        let n = best.w[0].hypot(best.w[1]);
        let w = [n * a.cos(), n * a.sin()];
        let cand = evaluate_sample(cfg, p, q, r, w);
        if cand.ratios[k] > best.ratios[k] {
            best = cand;
        }
        if round % 150 == 149 {
            step *= 0.6;
        }
    }
    best
}

pub fn summarize(cfg: &DoublingConfig, s: &SampleSpec, rows: &[PenalizationSample]) -> PenalizationReport {
    let bounds = (0..6)
        .map(|k| {
            let mut c_hat = 0.0f64;
            let mut witness = None;
            let mut shell_sups = vec![0.0f64; 4];
            for row in rows {
                let v = row.ratios[k];
                let outer = row.p.gauge().max(row.q.gauge()).max(row.r.gauge());
                let shell = ((4.0 * outer / s.radius) as usize).min(3);
                shell_sups[shell] = shell_sups[shell].max(v);
                if v > c_hat {
                    c_hat = v;
                    witness = Some(row.p);
                }
            }
            let inner = shell_sups[..3].iter().copied().fold(0.0, f64::max);
            FormBound {
                name: FORM_NAMES[k].to_string(),
                c_hat,
                witness,
                diverging: shell_sups[3] > 1.5 * inner && inner > 0.0,
                shell_sups,
            }
        })
        .collect();
    PenalizationReport { config: *cfg, samples: rows.len(), radius: s.radius, bounds }
}

/// Writes one CSV row per sample: coordinates, the six forms and their ratios.
pub fn write_csv<W: Write>(rows: &[PenalizationSample], mut out: W) -> io::Result<()> {
    write!(out, "xp,yp,zp,xq,yq,zq,xr,yr,zr,w1,w2")?;
    for name in FORM_NAMES {
        write!(out, ",{name}")?;
    }
    for name in FORM_NAMES {
        write!(out, ",{name}_ratio")?;
    }
    writeln!(out)?;
    for row in rows {
        let coords =
            [row.p.x, row.p.y, row.p.z, row.q.x, row.q.y, row.q.z, row.r.x, row.r.y, row.r.z, row.w[0], row.w[1]];
        let cells: Vec<String> = coords.iter().chain(&row.forms).chain(&row.ratios).map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    fn phi(v: &[f64; 6]) -> f64 {
        let p = Point::new(v[0], v[1], v[2]);
        let r = Point::new(v[3], v[4], v[5]);
        (p * r.inverse()).gauge4()
    }

    #[test]
    fn hessian_at_origin_is_vertical_only() {
        // the quartic horizontal part is flat there; 16 z² is not
        let mut want = Mat6::zeros();
        want[(2, 2)] = 32.0;
        want[(5, 5)] = 32.0;
        want[(2, 5)] = -32.0;
        want[(5, 2)] = -32.0;
        assert_eq!(phi_hessian(Point::ORIGIN, Point::ORIGIN), want);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let mut rng = Sampler::new(61);
        let s = 1e-4;
        for _ in 0..50 {
            let p = rng.point_in_gauge_ball(2.0);
            let r = rng.point_in_gauge_ball(2.0);
            let h = phi_hessian(p, r);
            let base = [p.x, p.y, p.z, r.x, r.y, r.z];
            let scale = h.abs().max().max(1.0);
            for i in 0..6 {
                for j in 0..6 {
                    let shift = |di: f64, dj: f64| {
                        let mut v = base;
                        v[i] += di;
                        v[j] += dj;
                        phi(&v)
                    };
                    let fd = (shift(s, s) - shift(s, -s) - shift(-s, s) + shift(-s, -s)) / (4.0 * s * s);
                    assert!((fd - h[(i, j)]).abs() <= 1e-6 * scale, "{i}{j} {fd} {}", h[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn swap_symmetry() {
        let mut rng = Sampler::new(67);
        let perm = Mat6::from_fn(|i, j| if j == (i + 3) % 6 { 1.0 } else { 0.0 });
        for _ in 0..50 {
            let p = rng.point_in_gauge_ball(2.0);
            let r = rng.point_in_gauge_ball(2.0);
            let d = phi_hessian(r, p) - perm * phi_hessian(p, r) * perm;
            assert!(d.abs().max() < 1e-12);
        }
    }

    #[test]
    fn vanishing_identity() {
        let mut rng = Sampler::new(71);
        for _ in 0..1000 {
            let p = rng.point_in_gauge_ball(3.0);
            let q = rng.point_in_gauge_ball(3.0);
            let r = rng.point_in_gauge_ball(3.0);
            let w = [rng.normal(), rng.normal()];
            let scale = form_scale(p, q, r, w);
            assert!(identity_vanishing(p, q, r, w).abs() <= 1e-10 * scale);
            assert!(identity_vanishing_two(p, q, w).abs() <= 1e-10 * scale);
        }
        assert_eq!(identity_vanishing(Point::new(1.0, 2.0, 3.0), Point::ORIGIN, Point::ORIGIN, [0.0, 0.0]), 0.0);
    }

    #[test]
    fn squared_identity_example() {
        let p = Point::new(1.0, 0.0, 0.0);
        let r = Point::new(0.0, 0.0, 1.0);
        let s = identity_squared(p, r, r, [1.0, 0.0]);
        assert_eq!(height(p, r), -1.0);
        assert_eq!(s.rhs, 512.0);
        assert!((s.lhs - 512.0).abs() < 1e-10, "{s:?}");
        let zero = identity_squared(p, r, r, [0.0, 0.0]);
        assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
    }

    #[test]
    fn squared_and_cross_ratios_are_constant() {
        let mut rng = Sampler::new(73);
        for _ in 0..500 {
            let p = rng.point_in_gauge_ball(3.0);
            let q = rng.point_in_gauge_ball(3.0);
            let r = rng.point_in_gauge_ball(3.0);
            let w = [rng.normal(), rng.normal()];
            let s = identity_squared(p, q, r, w);
            assert!((s.ratio.unwrap() / SQUARED_CONSTANT - 1.0).abs() < 1e-8, "{s:?}");
            let s2 = identity_squared_two(p, q, w);
            assert!((s2.ratio.unwrap() / SQUARED_CONSTANT - 1.0).abs() < 1e-8);
            let c = identity_cross(p, q, r, w);
            assert!((c.ratio.unwrap() / CROSS_CONSTANT - 1.0).abs() < 1e-8, "{c:?}");
        }
    }

    #[test]
    fn weight_hessian_matches_fd() {
        let mut rng = Sampler::new(79);
        let s = 1e-5;
        for _ in 0..20 {
            let p = rng.point_in_gauge_ball(2.0);
            let h = weight_hessian(p, 0.3, 0.7, 1.3);
            let g = |q: Point| weight(q, 0.3, 0.7, 1.3);
            let e = [Point::new(s, 0.0, 0.0), Point::new(0.0, s, 0.0), Point::new(0.0, 0.0, s)];
            let add = |a: Point, b: Point| Point::new(a.x + b.x, a.y + b.y, a.z + b.z);
            let sub = |a: Point, b: Point| Point::new(a.x - b.x, a.y - b.y, a.z - b.z);
            for i in 0..3 {
                let fd = (g(add(p, e[i])) - 2.0 * g(p) + g(sub(p, e[i]))) / (s * s);
                assert!((fd - h[(i, i)]).abs() < 1e-4 * (1.0 + h[(i, i)].abs()), "{fd} {}", h[(i, i)]);
            }
        }
    }

    #[test]
    fn penalization_degenerate_cases() {
        let cfg = DoublingConfig { beta: 0.0, ..DoublingConfig::default() };
        let rows = penalization_samples(&cfg, &SampleSpec::new(1, 200, 3.0, 1.0));
        assert!(rows.iter().all(|r| r.forms.iter().all(|f| *f == 0.0)));
        let cfg = DoublingConfig::default();
        let row = evaluate_sample(&cfg, Point::new(1.0, 0.5, 0.2), Point::ORIGIN, Point::ORIGIN, [0.0, 0.0]);
        assert!(row.forms.iter().all(|f| *f == 0.0));
    }

    #[test]
    fn penalization_constants_are_stable() {
        let cfg = DoublingConfig::default();
        let small = penalization_bounds(&cfg, &SampleSpec::new(2, 10_000, 5.0, 1.0));
        let large = penalization_bounds(&cfg, &SampleSpec::new(2, 10_000, 10.0, 1.0));
        for (a, b) in small.bounds.iter().zip(&large.bounds) {
            assert!(a.c_hat.is_finite() && a.c_hat > 0.0, "{a:?}");
            assert!(b.c_hat.is_finite(), "{b:?}");
        }
        let mut buf = Vec::new();
        write_csv(&penalization_samples(&cfg, &SampleSpec::new(2, 3, 5.0, 1.0)), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 23);
    }
}
