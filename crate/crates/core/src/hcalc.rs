//! Horizontal derivatives of scalar fields.
//!
//! Finite differences follow the group flows of the frame: `X_i u(p)` is
//! approximated through `u(p·(±s e_i))`, so the stencils are exactly left
//! invariant and no chain rule through Euclidean coordinates is needed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hgroup::{GrowthEnvelope, Point};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum HcalcError {
    #[error("finite-difference step {step:e} is below 1e-8")]
    StepTooSmall { step: f64 },
}

/// Smallest step accepted before cancellation dominates.
pub const MIN_STEP: f64 = 1e-8;
pub const DEFAULT_STEP: f64 = 1e-3;

/// 2×2 symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { a11: 1.0, a12: 0.0, a22: 1.0 };
    pub const ZERO: Sym2 = Sym2 { a11: 0.0, a12: 0.0, a22: 0.0 };

    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Sym2 { a11, a12, a22 }
    }

    pub fn scaled(self, s: f64) -> Self {
        Sym2::new(s * self.a11, s * self.a12, s * self.a22)
    }

    pub fn trace(self) -> f64 {
        self.a11 + self.a22
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(self) -> [f64; 2] {
        let m = 0.5 * (self.a11 + self.a22);
        let r = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        [m - r, m + r]
    }

    pub fn min_eig(self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Spectral norm.
    pub fn norm(self) -> f64 {
        let [lo, hi] = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    /// Eigenpairs `(λ, angle of unit eigenvector)`, ascending in `λ`.
    pub fn eigen(self) -> [(f64, f64); 2] {
        let [lo, hi] = self.eigenvalues();
        // angle of the top eigenvector; any angle works for multiples of I
        let phi = 0.5 * (2.0 * self.a12).atan2(self.a11 - self.a22);
        [(lo, phi + std::f64::consts::FRAC_PI_2), (hi, phi)]
    }

    /// `tr(self · other)`.
    pub fn frobenius(self, other: Sym2) -> f64 {
        self.a11 * other.a11 + 2.0 * self.a12 * other.a12 + self.a22 * other.a22
    }

    /// `⟨self v, v⟩`.
    pub fn quad(self, v: [f64; 2]) -> f64 {
        self.a11 * v[0] * v[0] + 2.0 * self.a12 * v[0] * v[1] + self.a22 * v[1] * v[1]
    }

    pub fn apply(self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1]]
    }
}

impl std::ops::Add for Sym2 {
    type Output = Sym2;

    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }
}

/// Time-dependent scalar function on the group, optionally carrying
/// closed-form derivatives.
pub trait ScalarField: Send + Sync {
    fn value(&self, p: Point, t: f64) -> f64;

    fn analytic_hgrad(&self, _p: Point, _t: f64) -> Option<[f64; 2]> {
        None
    }

    fn analytic_hhess(&self, _p: Point, _t: f64) -> Option<Sym2> {
        None
    }

    fn analytic_dt(&self, _p: Point, _t: f64) -> Option<f64> {
        None
    }

    fn envelope(&self) -> GrowthEnvelope {
        GrowthEnvelope { k: 1.0, c: 1.0 }
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value(&self, p: Point, t: f64) -> f64 {
        (**self).value(p, t)
    }
    fn analytic_hgrad(&self, p: Point, t: f64) -> Option<[f64; 2]> {
        (**self).analytic_hgrad(p, t)
    }
    fn analytic_hhess(&self, p: Point, t: f64) -> Option<Sym2> {
        (**self).analytic_hhess(p, t)
    }
    fn analytic_dt(&self, p: Point, t: f64) -> Option<f64> {
        (**self).analytic_dt(p, t)
    }
    fn envelope(&self) -> GrowthEnvelope {
        (**self).envelope()
    }
}

impl<F: ScalarField + ?Sized> ScalarField for Arc<F> {
    fn value(&self, p: Point, t: f64) -> f64 {
        (**self).value(p, t)
    }
    fn analytic_hgrad(&self, p: Point, t: f64) -> Option<[f64; 2]> {
        (**self).analytic_hgrad(p, t)
    }
    fn analytic_hhess(&self, p: Point, t: f64) -> Option<Sym2> {
        (**self).analytic_hhess(p, t)
    }
    fn analytic_dt(&self, p: Point, t: f64) -> Option<f64> {
        (**self).analytic_dt(p, t)
    }
    fn envelope(&self) -> GrowthEnvelope {
        (**self).envelope()
    }
}

type ValueFn = dyn Fn(Point, f64) -> f64 + Send + Sync;
type GradFn = dyn Fn(Point, f64) -> [f64; 2] + Send + Sync;
type HessFn = dyn Fn(Point, f64) -> Sym2 + Send + Sync;

/// Closure-backed [`ScalarField`].
#[derive(Clone)]
pub struct FnField {
    value: Arc<ValueFn>,
    hgrad: Option<Arc<GradFn>>,
    hhess: Option<Arc<HessFn>>,
    dt: Option<Arc<ValueFn>>,
    envelope: GrowthEnvelope,
}

impl std::fmt::Debug for FnField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnField")
            .field("hgrad", &self.hgrad.is_some())
            .field("hhess", &self.hhess.is_some())
            .field("dt", &self.dt.is_some())
            .field("envelope", &self.envelope)
            .finish()
    }
}

impl FnField {
    pub fn new(value: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        FnField {
            value: Arc::new(value),
            hgrad: None,
            hhess: None,
            dt: None,
            envelope: GrowthEnvelope { k: 1.0, c: 1.0 },
        }
    }

    /// Time-independent field.
    pub fn stationary(value: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        FnField::new(move |p, _| value(p))
    }

    pub fn with_hgrad(mut self, g: impl Fn(Point, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.hgrad = Some(Arc::new(g));
        self
    }

    pub fn with_hhess(mut self, h: impl Fn(Point, f64) -> Sym2 + Send + Sync + 'static) -> Self {
        self.hhess = Some(Arc::new(h));
        self
    }

    pub fn with_dt(mut self, d: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dt = Some(Arc::new(d));
        self
    }

    pub fn with_envelope(mut self, envelope: GrowthEnvelope) -> Self {
        self.envelope = envelope;
        self
    }
}

impl ScalarField for FnField {
    fn value(&self, p: Point, t: f64) -> f64 {
        (self.value)(p, t)
    }
    fn analytic_hgrad(&self, p: Point, t: f64) -> Option<[f64; 2]> {
        self.hgrad.as_ref().map(|g| g(p, t))
    }
    fn analytic_hhess(&self, p: Point, t: f64) -> Option<Sym2> {
        self.hhess.as_ref().map(|h| h(p, t))
    }
    fn analytic_dt(&self, p: Point, t: f64) -> Option<f64> {
        self.dt.as_ref().map(|d| d(p, t))
    }
    fn envelope(&self) -> GrowthEnvelope {
        self.envelope
    }
}

fn check_step(step: f64) -> Result<(), HcalcError> {
    if step < MIN_STEP || !step.is_finite() {
        Err(HcalcError::StepTooSmall { step })
    } else {
        Ok(())
    }
}

/// Horizontal direction `(s cos φ, s sin φ, 0)` as a group element.
#[inline]
pub fn horizontal_step(phi: f64, s: f64) -> Point {
    Point::new(s * phi.cos(), s * phi.sin(), 0.0)
}

/// `[u(p·e) − 2u(p) + u(p·e⁻¹)] / s²` with `e = (s cos φ, s sin φ, 0)`.
pub fn directional_second_difference<F: ScalarField + ?Sized>(
    u: &F,
    p: Point,
    t: f64,
    phi: f64,
    step: f64,
) -> Result<f64, HcalcError> {
    check_step(step)?;
    let e = horizontal_step(phi, step);
    let c = u.value(p, t);
    Ok((u.value(p * e, t) - 2.0 * c + u.value(p * e.inverse(), t)) / (step * step))
}

/// Horizontal gradient by central group-flow differences, ignoring any
/// analytic form.
pub fn fd_hgrad<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<[f64; 2], HcalcError> {
    check_step(step)?;
    let e1 = Point::new(step, 0.0, 0.0);
    let e2 = Point::new(0.0, step, 0.0);
    let d = |e: Point| (u.value(p * e, t) - u.value(p * e.inverse(), t)) / (2.0 * step);
    Ok([d(e1), d(e2)])
}

/// Symmetrized horizontal Hessian by directional second differences,
/// ignoring any analytic form.
pub fn fd_hhess<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<Sym2, HcalcError> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    let a11 = directional_second_difference(u, p, t, 0.0, step)?;
    let a22 = directional_second_difference(u, p, t, FRAC_PI_2, step)?;
    let diag = directional_second_difference(u, p, t, FRAC_PI_4, step)?;
    Ok(Sym2::new(a11, diag - 0.5 * (a11 + a22), a22))
}

/// Time derivative by central differences.
pub fn fd_dt<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<f64, HcalcError> {
    check_step(step)?;
    Ok((u.value(p, t + step) - u.value(p, t - step)) / (2.0 * step))
}

pub fn hgrad<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<[f64; 2], HcalcError> {
    check_step(step)?;
    match u.analytic_hgrad(p, t) {
        Some(g) => Ok(g),
        None => fd_hgrad(u, p, t, step),
    }
}

pub fn hhess<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<Sym2, HcalcError> {
    check_step(step)?;
    match u.analytic_hhess(p, t) {
        Some(h) => Ok(h),
        None => fd_hhess(u, p, t, step),
    }
}

pub fn hlaplacian<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<f64, HcalcError> {
    hhess(u, p, t, step).map(Sym2::trace)
}

pub fn time_derivative<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<f64, HcalcError> {
    check_step(step)?;
    match u.analytic_dt(p, t) {
        Some(d) => Ok(d),
        None => fd_dt(u, p, t, step),
    }
}

/// Largest entry change of the finite-difference Hessian between `step` and
/// `2·step`; large values flag points where the field is not smooth.
pub fn richardson_gap<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64, step: f64) -> Result<f64, HcalcError> {
    let a = fd_hhess(u, p, t, step)?;
    let b = fd_hhess(u, p, t, 2.0 * step)?;
    Ok((a.a11 - b.a11).abs().max((a.a12 - b.a12).abs()).max((a.a22 - b.a22).abs()))
}
