//! Algebra of the first Heisenberg group.
//!
//! Points are `(x, y, z)` with the product
//! `(x, y, z)·(x', y', z') = (x + x', y + y', z + z' + (x y' - x' y) / 2)`.
//! The Korányi gauge `((x² + y²)² + 16 z²)^{1/4}` induces the left-invariant
//! metric `d_L(p, q) = |p⁻¹·q|` and the right-invariant metric
//! `d_R(p, q) = |p·q⁻¹|`.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::sampling::Sampler;

/// An element of the Heisenberg group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A horizontal element `(h1, h2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HorizontalElement {
    pub h1: f64,
    pub h2: f64,
}

/// Exponential growth envelope `c·exp(k⟨p⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEnvelope {
    pub k: f64,
    pub c: f64,
}

impl GrowthEnvelope {
    pub fn eval(&self, p: Point) -> f64 {
        self.c * (self.k * p.bracket()).exp()
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Group product `self · q`.
    #[inline]
    pub fn compose(self, q: Point) -> Point {
        Point { x: self.x + q.x, y: self.y + q.y, z: self.z + q.z + 0.5 * (self.x * q.y - q.x * self.y) }
    }

    #[inline]
    pub fn inverse(self) -> Point {
        Point { x: -self.x, y: -self.y, z: -self.z }
    }

    /// Fourth power of the Korányi gauge; exact polynomial, no roots.
    #[inline]
    pub fn gauge4(self) -> f64 {
        let r2 = self.x * self.x + self.y * self.y;
        r2 * r2 + 16.0 * self.z * self.z
    }

    /// Korányi gauge `|p|_G`.
    #[inline]
    pub fn gauge(self) -> f64 {
        self.gauge4().sqrt().sqrt()
    }

    /// Parabolic dilation `(λx, λy, λ²z)`.
    #[inline]
    pub fn dilate(self, lam: f64) -> Point {
        Point { x: lam * self.x, y: lam * self.y, z: lam * lam * self.z }
    }

    /// Reflection through the horizontal plane, `(x, y, -z)`.
    #[inline]
    pub fn reflect_vertical(self) -> Point {
        Point { x: self.x, y: self.y, z: -self.z }
    }

    /// Growth weight `⟨p⟩ = (1 + x⁴ + y⁴ + 16 z²)^{1/4}`.
    #[inline]
    pub fn bracket(self) -> f64 {
        bracket_base(self).sqrt().sqrt()
    }

    /// Horizontal gradient of `⟨p⟩`:
    /// `((x³ - 4yz), (y³ + 4xz)) / (1 + x⁴ + y⁴ + 16z²)^{3/4}`.
    pub fn grad_bracket(self) -> [f64; 2] {
        let Point { x, y, z } = self;
        let d = bracket_base(self).powf(0.75);
        [(x * x * x - 4.0 * y * z) / d, (y * y * y + 4.0 * x * z) / d]
    }

    /// Symmetrized horizontal Hessian of `⟨p⟩`, as `[a11, a12, a22]`.
    pub fn hess_bracket(self) -> [f64; 3] {
        let Point { x, y, z } = self;
        let s = bracket_base(self);
        let c1 = 0.25 * s.powf(-0.75);
        let c2 = 3.0 / 16.0 * s.powf(-1.75);
        // horizontal derivatives of s = 1 + x⁴ + y⁴ + 16z²
        let s1 = 4.0 * x * x * x - 16.0 * y * z;
        let s2 = 4.0 * y * y * y + 16.0 * x * z;
        let s11 = 12.0 * x * x + 8.0 * y * y;
        let s22 = 12.0 * y * y + 8.0 * x * x;
        let s12 = -8.0 * x * y;
        [c1 * s11 - c2 * s1 * s1, c1 * s12 - c2 * s1 * s2, c1 * s22 - c2 * s2 * s2]
    }

    /// Euclidean gradient of `⟨p⟩` in `(x, y, z)`.
    pub fn euclid_grad_bracket(self) -> [f64; 3] {
        let Point { x, y, z } = self;
        let c = 0.25 * bracket_base(self).powf(-0.75);
        [c * 4.0 * x * x * x, c * 4.0 * y * y * y, c * 32.0 * z]
    }

    /// Euclidean Hessian of `⟨p⟩`, row-major 3×3.
    pub fn euclid_hess_bracket(self) -> [[f64; 3]; 3] {
        let Point { x, y, z } = self;
        let s = bracket_base(self);
        let c1 = 0.25 * s.powf(-0.75);
        let c2 = 3.0 / 16.0 * s.powf(-1.75);
        let ds = [4.0 * x * x * x, 4.0 * y * y * y, 32.0 * z];
        let dds = [12.0 * x * x, 12.0 * y * y, 32.0];
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let diag = if i == j { dds[i] } else { 0.0 };
                h[i][j] = c1 * diag - c2 * ds[i] * ds[j];
            }
        }
        h
    }
}

#[inline]
fn bracket_base(p: Point) -> f64 {
    1.0 + p.x.powi(4) + p.y.powi(4) + 16.0 * p.z * p.z
}

impl Mul for Point {
    type Output = Point;

    fn mul(self, rhs: Point) -> Point {
        self.compose(rhs)
    }
}

impl From<HorizontalElement> for Point {
    fn from(h: HorizontalElement) -> Point {
        Point { x: h.h1, y: h.h2, z: 0.0 }
    }
}

impl HorizontalElement {
    pub const fn new(h1: f64, h2: f64) -> Self {
        HorizontalElement { h1, h2 }
    }

    pub fn to_point(self) -> Point {
        self.into()
    }

    pub fn inverse(self) -> Self {
        HorizontalElement { h1: -self.h1, h2: -self.h2 }
    }

    pub fn norm(self) -> f64 {
        self.h1.hypot(self.h2)
    }
}

/// `d_L(p, q) = |p⁻¹·q|_G`.
pub fn dist_left(p: Point, q: Point) -> f64 {
    (p.inverse() * q).gauge()
}

/// `d_R(p, q) = |p·q⁻¹|_G`.
pub fn dist_right(p: Point, q: Point) -> f64 {
    (p * q.inverse()).gauge()
}

/// Horizontal-gradient norms of `p ↦ d_L(p, q)⁴` and `q ↦ d_L(p, q)⁴`.
///
/// With `δ1 = x_p - x_q`, `δ2 = y_p - y_q`, `δ3 = z_p - z_q + (x_p y_q - x_q y_p)/2`
/// the two gradients differ but share the norm `4 d_L² (δ1² + δ2²)^{1/2}`.
pub fn dist_left4_hgrads(p: Point, q: Point) -> ([f64; 2], [f64; 2]) {
    let d1 = p.x - q.x;
    let d2 = p.y - q.y;
    let d3 = p.z - q.z + 0.5 * (p.x * q.y - q.x * p.y);
    let r2 = d1 * d1 + d2 * d2;
    let gp = [4.0 * (d1 * r2 - 4.0 * d2 * d3), 4.0 * (d2 * r2 + 4.0 * d1 * d3)];
    let gq = [4.0 * (-d1 * r2 - 4.0 * d2 * d3), 4.0 * (-d2 * r2 + 4.0 * d1 * d3)];
    (gp, gq)
}

/// Sampled estimate of `μ = sup |∇_H⟨p⟩|`.
///
/// Sample 0 is the origin; the rest alternate between the gauge ball of the
/// given radius and far-field probes at gauge up to `10⁴·radius`. The sample
/// sequence is prefix-stable, so the estimate is nondecreasing in `samples`.
pub fn mu_bound(samples: usize, radius: f64) -> f64 {
    sup_over_bracket_samples(samples, radius, |p| {
        let g = p.grad_bracket();
        g[0].hypot(g[1])
    })
}

/// Sampled estimate of `sup ‖(∇²_H⟨p⟩)*‖` (spectral norm), same sample
/// sequence as [`mu_bound`].
pub fn hess_bracket_bound(samples: usize, radius: f64) -> f64 {
    sup_over_bracket_samples(samples, radius, |p| {
        let [a, b, c] = p.hess_bracket();
        let m = 0.5 * (a + c);
        let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (m + r).abs().max((m - r).abs())
    })
}

const MU_SEED: u64 = 0x6d75;

fn sup_over_bracket_samples(samples: usize, radius: f64, f: impl Fn(Point) -> f64) -> f64 {
    let mut rng = Sampler::new(MU_SEED);
    let mut best = 0.0f64;
    for i in 0..samples {
        let p = if i == 0 {
            Point::ORIGIN
        } else if i % 2 == 1 {
            rng.point_in_gauge_ball(radius)
        } else {
            let r = radius * 10f64.powf(4.0 * rng.unit());
            rng.gauge_sphere_point().dilate(r)
        };
        best = best.max(f(p));
    }
    best
}
