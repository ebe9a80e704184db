//! Explicit solutions with closed-form derivatives, PDE residuals and the
//! exponential barrier check.
//!
//! Equations have the form `u_t − tr(A (∇²_H u)*) + f(p, ∇_H u) = 0` with a
//! constant positive semidefinite diffusion matrix `A`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hcalc::{self, HcalcError, ScalarField, Sym2, DEFAULT_STEP};
use crate::hgroup::{GrowthEnvelope, Point};
use crate::sampling::SampleSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("unknown catalog field `{0}`")]
    UnknownName(String),
    #[error("horizontal gradient {grad_norm:e} below the characteristic threshold")]
    CharacteristicPoint { grad_norm: f64 },
    #[error("diffusion matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPositiveSemidefinite(f64),
    #[error(transparent)]
    Hcalc(#[from] HcalcError),
}

type Hamiltonian = dyn Fn(Point, [f64; 2]) -> f64 + Send + Sync;
type RadiusFn = dyn Fn(f64) -> f64 + Send + Sync;

/// One equation instance: diffusion matrix, Hamiltonian and the constants
/// it is declared to satisfy.
#[derive(Clone)]
pub struct EquationSpec {
    pub diffusion: Sym2,
    pub hamiltonian: Arc<Hamiltonian>,
    /// Lipschitz constant of `f` in the gradient slot.
    pub lip_w: f64,
    /// Local Lipschitz constant of `f` in the point slot, as a function of radius.
    pub lip_p: Arc<RadiusFn>,
    /// Linear growth constant: `|f(p, w)| ≤ growth_c (1 + |w|)`.
    pub growth_c: f64,
    pub label: String,
}

impl fmt::Debug for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquationSpec")
            .field("label", &self.label)
            .field("diffusion", &self.diffusion)
            .field("lip_w", &self.lip_w)
            .field("growth_c", &self.growth_c)
            .finish()
    }
}

impl EquationSpec {
    pub fn new(
        label: impl Into<String>,
        diffusion: Sym2,
        hamiltonian: impl Fn(Point, [f64; 2]) -> f64 + Send + Sync + 'static,
        lip_w: f64,
        growth_c: f64,
    ) -> Result<Self, OracleError> {
        let lo = diffusion.min_eig();
        if lo < -1e-14 {
            return Err(OracleError::NotPositiveSemidefinite(lo));
        }
        Ok(EquationSpec {
            diffusion,
            hamiltonian: Arc::new(hamiltonian),
            lip_w,
            lip_p: Arc::new(|_| 0.0),
            growth_c,
            label: label.into(),
        })
    }

    pub fn with_lip_p(mut self, lip_p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lip_p = Arc::new(lip_p);
        self
    }

    /// `u_t − Δ_H u = 0`.
    pub fn heat() -> Self {
        Self::new("heat", Sym2::IDENTITY, |_, _| 0.0, 0.0, 0.0).expect("identity is PSD")
    }

    /// `u_t − ⟨h0, ∇_H u⟩ = 0`.
    pub fn transport(h0: [f64; 2]) -> Self {
        let n = h0[0].hypot(h0[1]);
        Self::new("transport", Sym2::ZERO, move |_, w| -(h0[0] * w[0] + h0[1] * w[1]), n, n).expect("zero is PSD")
    }

    /// `u_t + |∇_H u|²/2 = 0` for gradients up to `grad_bound`, continued
    /// linearly beyond it so that `grad_bound` is a global Lipschitz constant
    /// in `w`. Solutions whose gradients stay in range are unaffected.
    pub fn quadratic_hamilton_jacobi(grad_bound: f64) -> Self {
        let f = move |_: Point, w: [f64; 2]| {
            let n = w[0].hypot(w[1]);
            if n <= grad_bound {
                0.5 * n * n
            } else {
                grad_bound * n - 0.5 * grad_bound * grad_bound
            }
        };
        Self::new("quadratic-hj", Sym2::ZERO, f, grad_bound, grad_bound).expect("zero is PSD")
    }

    /// `u_t + c0 = 0`.
    pub fn constant_source(c0: f64) -> Self {
        Self::new("constant-source", Sym2::ZERO, move |_, _| c0, 0.0, c0.abs()).expect("zero is PSD")
    }

    pub fn hamiltonian_at(&self, p: Point, w: [f64; 2]) -> f64 {
        (self.hamiltonian)(p, w)
    }
}

/// Parameters of the barrier `c·exp(αt + β⟨p⟩) + cf·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub cf: f64,
}

/// Initial datum transported by `u(p, t) = u0(p·(t h0))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransportDatum {
    /// Korányi gauge.
    Gauge,
    /// `x² y² + 2 z²`.
    Quartic,
    /// `(x² + y²)² − 8 z²`.
    HeatQuartic,
}

impl TransportDatum {
    pub fn value(self, q: Point) -> f64 {
        let Point { x, y, z } = q;
        match self {
            TransportDatum::Gauge => q.gauge(),
            TransportDatum::Quartic => x * x * y * y + 2.0 * z * z,
            TransportDatum::HeatQuartic => (x * x + y * y).powi(2) - 8.0 * z * z,
        }
    }

    /// Euclidean gradient and Hessian in `(x, y, z)`.
    fn euclid_derivatives(self, q: Point) -> ([f64; 3], [[f64; 3]; 3]) {
        let Point { x, y, z } = q;
        match self {
            TransportDatum::Quartic => (
                [2.0 * x * y * y, 2.0 * x * x * y, 4.0 * z],
                [[2.0 * y * y, 4.0 * x * y, 0.0], [4.0 * x * y, 2.0 * x * x, 0.0], [0.0, 0.0, 4.0]],
            ),
            TransportDatum::HeatQuartic => {
                let r2 = x * x + y * y;
                (
                    [4.0 * x * r2, 4.0 * y * r2, -16.0 * z],
                    [
                        [4.0 * r2 + 8.0 * x * x, 8.0 * x * y, 0.0],
                        [8.0 * x * y, 4.0 * r2 + 8.0 * y * y, 0.0],
                        [0.0, 0.0, -16.0],
                    ],
                )
            }
            TransportDatum::Gauge => {
                let r2 = x * x + y * y;
                let q4 = q.gauge4();
                if q4 == 0.0 {
                    return ([0.0; 3], [[0.0; 3]; 3]);
                }
                let dq = [4.0 * x * r2, 4.0 * y * r2, 32.0 * z];
                let ddq = [
                    [4.0 * r2 + 8.0 * x * x, 8.0 * x * y, 0.0],
                    [8.0 * x * y, 4.0 * r2 + 8.0 * y * y, 0.0],
                    [0.0, 0.0, 32.0],
                ];
                let c1 = 0.25 * q4.powf(-0.75);
                let c2 = 3.0 / 16.0 * q4.powf(-1.75);
                let mut h = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        h[i][j] = c1 * ddq[i][j] - c2 * dq[i] * dq[j];
                    }
                }
                (dq.map(|d| c1 * d), h)
            }
        }
    }
}

/// Closed-form solution of a catalog equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CatalogField {
    Transport {
        h0: [f64; 2],
        datum: TransportDatum,
    },
    Heat1,
    Heat2,
    Mcf,
    /// `sign·(c·exp(αt + β⟨p⟩) + cf·t)`.
    Barrier {
        params: BarrierParams,
        sign: f64,
    },
}

/// Catalog keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CatalogName {
    Transport { h0: [f64; 2], datum: TransportDatum },
    Heat1,
    Heat2,
    Mcf,
    Barrier(BarrierParams),
}

pub fn catalog(name: CatalogName) -> CatalogField {
    match name {
        CatalogName::Transport { h0, datum } => CatalogField::Transport { h0, datum },
        CatalogName::Heat1 => CatalogField::Heat1,
        CatalogName::Heat2 => CatalogField::Heat2,
        CatalogName::Mcf => CatalogField::Mcf,
        CatalogName::Barrier(params) => CatalogField::Barrier { params, sign: 1.0 },
    }
}

/// Catalog lookup by string key, with default parameters: transport fields
/// use `h0 = (1, 1)`, the barrier uses `α = β = c = 1, cf = 0`.
pub fn catalog_by_name(name: &str) -> Result<CatalogField, OracleError> {
    let h0 = [1.0, 1.0];
    let key = match name.to_ascii_lowercase().as_str() {
        "transport" => CatalogName::Transport { h0, datum: TransportDatum::Quartic },
        "transport-gauge" => CatalogName::Transport { h0, datum: TransportDatum::Gauge },
        "transport-heat-quartic" => CatalogName::Transport { h0, datum: TransportDatum::HeatQuartic },
        "heat1" => CatalogName::Heat1,
        "heat2" => CatalogName::Heat2,
        "mcf" => CatalogName::Mcf,
        "barrier" => CatalogName::Barrier(BarrierParams { alpha: 1.0, beta: 1.0, c: 1.0, cf: 0.0 }),
        _ => return Err(OracleError::UnknownName(name.to_string())),
    };
    Ok(catalog(key))
}

impl CatalogField {
    /// Translation applied at time `t` and the transported point.
    fn transport_point(h0: [f64; 2], p: Point, t: f64) -> (Point, Point) {
        let g = Point::new(h0[0] * t, h0[1] * t, 0.0);
        (g, p * g)
    }
}

impl ScalarField for CatalogField {
    fn value(&self, p: Point, t: f64) -> f64 {
        let Point { x, y, z } = p;
        let r2 = x * x + y * y;
        match *self {
            CatalogField::Transport { h0, datum } => datum.value(Self::transport_point(h0, p, t).1),
            CatalogField::Heat1 => r2 * r2 - 8.0 * z * z + 12.0 * r2 * t + 24.0 * t * t,
            CatalogField::Heat2 => {
                r2 * z * z
                    + r2 * r2 * r2 / 24.0
                    + (4.0 * z * z + 2.0 * r2 * r2) * t
                    + 17.0 * r2 * t * t
                    + 68.0 / 3.0 * t * t * t
            }
            CatalogField::Mcf => r2 * r2 + 16.0 * z * z + 12.0 * r2 * t + 12.0 * t * t,
            CatalogField::Barrier { params, sign } => {
                let BarrierParams { alpha, beta, c, cf } = params;
                sign * (c * (alpha * t + beta * p.bracket()).exp() + cf * t)
            }
        }
    }

    fn analytic_hgrad(&self, p: Point, t: f64) -> Option<[f64; 2]> {
        let Point { x, y, z } = p;
        let r2 = x * x + y * y;
        Some(match *self {
            CatalogField::Transport { h0, datum } => {
                let (g, q) = Self::transport_point(h0, p, t);
                let (d, _) = datum.euclid_derivatives(q);
                let [v1, v2] = transported_frame(g, q);
                [dot3(v1, d), dot3(v2, d)]
            }
            CatalogField::Heat1 => {
                [4.0 * x * r2 + 24.0 * x * t + 8.0 * y * z, 4.0 * y * r2 + 24.0 * y * t - 8.0 * x * z]
            }
            CatalogField::Heat2 => [
                2.0 * x * z * z + 0.25 * x * r2 * r2 + 8.0 * x * r2 * t + 34.0 * x * t * t
                    - y * r2 * z
                    - 4.0 * y * z * t,
                2.0 * y * z * z
                    + 0.25 * y * r2 * r2
                    + 8.0 * y * r2 * t
                    + 34.0 * y * t * t
                    + x * r2 * z
                    + 4.0 * x * z * t,
            ],
            CatalogField::Mcf => {
                [24.0 * t * x + 4.0 * x * r2 - 16.0 * y * z, 24.0 * t * y + 16.0 * x * z + 4.0 * y * r2]
            }
            CatalogField::Barrier { params, sign } => {
                let g = sign * params.c * (params.alpha * t + params.beta * p.bracket()).exp();
                let gb = p.grad_bracket();
                [params.beta * g * gb[0], params.beta * g * gb[1]]
            }
        })
    }

    fn analytic_hhess(&self, p: Point, t: f64) -> Option<Sym2> {
        let Point { x, y, z } = p;
        let r2 = x * x + y * y;
        Some(match *self {
            CatalogField::Transport { h0, datum } => {
                let (g, q) = Self::transport_point(h0, p, t);
                let (_, h) = datum.euclid_derivatives(q);
                let [v1, v2] = transported_frame(g, q);
                Sym2::new(quad3(&h, v1, v1), quad3(&h, v1, v2), quad3(&h, v2, v2))
            }
            CatalogField::Heat1 => Sym2::new(24.0 * t + 12.0 * x * x, 12.0 * x * y, 24.0 * t + 12.0 * y * y),
            CatalogField::Heat2 => {
                let (x2, y2) = (x * x, y * y);
                Sym2::new(
                    34.0 * t * t + 24.0 * t * x2 + 10.0 * t * y2 + 1.25 * x2 * x2 + 2.0 * x2 * y2 - 4.0 * x * y * z
                        + 0.75 * y2 * y2
                        + 2.0 * z * z,
                    14.0 * t * x * y + 0.5 * x2 * x * y + 2.0 * x2 * z + 0.5 * x * y2 * y - 2.0 * y2 * z,
                    34.0 * t * t
                        + 10.0 * t * x2
                        + 24.0 * t * y2
                        + 0.75 * x2 * x2
                        + 2.0 * x2 * y2
                        + 4.0 * x * y * z
                        + 1.25 * y2 * y2
                        + 2.0 * z * z,
                )
            }
            CatalogField::Mcf => Sym2::new(24.0 * t + 12.0 * r2, 0.0, 24.0 * t + 12.0 * r2),
            CatalogField::Barrier { params, sign } => {
                let beta = params.beta;
                let g = sign * params.c * (params.alpha * t + beta * p.bracket()).exp();
                let gb = p.grad_bracket();
                let [h11, h12, h22] = p.hess_bracket();
                Sym2::new(
                    beta * g * (h11 + beta * gb[0] * gb[0]),
                    beta * g * (h12 + beta * gb[0] * gb[1]),
                    beta * g * (h22 + beta * gb[1] * gb[1]),
                )
            }
        })
    }

    fn analytic_dt(&self, p: Point, t: f64) -> Option<f64> {
        let Point { z, .. } = p;
        let r2 = p.x * p.x + p.y * p.y;
        Some(match *self {
            CatalogField::Transport { h0, .. } => {
                let g = self.analytic_hgrad(p, t)?;
                h0[0] * g[0] + h0[1] * g[1]
            }
            CatalogField::Heat1 => 12.0 * r2 + 48.0 * t,
            CatalogField::Heat2 => 4.0 * z * z + 2.0 * r2 * r2 + 34.0 * r2 * t + 68.0 * t * t,
            CatalogField::Mcf => 12.0 * r2 + 24.0 * t,
            CatalogField::Barrier { params, sign } => {
                sign * (params.c * params.alpha * (params.alpha * t + params.beta * p.bracket()).exp() + params.cf)
            }
        })
    }

    fn envelope(&self) -> GrowthEnvelope {
        match *self {
            CatalogField::Barrier { params, .. } => GrowthEnvelope { k: params.beta, c: params.c.max(1.0) },
            _ => GrowthEnvelope { k: 1.0, c: 1.0 },
        }
    }
}

/// Horizontal frame pulled through the right translation `p ↦ p·g`:
/// `X_i[u0(p·g)] = (v_i · ∇u0)(p·g)`.
fn transported_frame(g: Point, q: Point) -> [[f64; 3]; 2] {
    [[1.0, 0.0, g.y - 0.5 * q.y], [0.0, 1.0, 0.5 * q.x - g.x]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn quad3(h: &[[f64; 3]; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * h[i][j] * b[j];
        }
    }
    s
}

/// `u_t − tr(A (∇²_H u)*) + f(p, ∇_H u)`, analytic derivatives when present.
pub fn residual<F: ScalarField + ?Sized>(eq: &EquationSpec, u: &F, p: Point, t: f64) -> Result<f64, OracleError> {
    let ut = hcalc::time_derivative(u, p, t, DEFAULT_STEP)?;
    let h = hcalc::hhess(u, p, t, DEFAULT_STEP)?;
    let g = hcalc::hgrad(u, p, t, DEFAULT_STEP)?;
    Ok(ut - eq.diffusion.frobenius(h) + eq.hamiltonian_at(p, g))
}

/// Threshold on `|∇_H u|` below which the curvature operator is undefined.
pub const CHARACTERISTIC_THRESHOLD: f64 = 1e-6;

/// Residual of the level-set horizontal mean curvature flow,
/// `u_t − (tr H − ⟨H ∇_H u, ∇_H u⟩ / |∇_H u|²)` with `H = (∇²_H u)*`.
pub fn mcf_residual<F: ScalarField + ?Sized>(u: &F, p: Point, t: f64) -> Result<f64, OracleError> {
    let g = hcalc::hgrad(u, p, t, DEFAULT_STEP)?;
    let n2 = g[0] * g[0] + g[1] * g[1];
    if n2.sqrt() < CHARACTERISTIC_THRESHOLD {
        return Err(OracleError::CharacteristicPoint { grad_norm: n2.sqrt() });
    }
    let h = hcalc::hhess(u, p, t, DEFAULT_STEP)?;
    let ut = hcalc::time_derivative(u, p, t, DEFAULT_STEP)?;
    Ok(ut - (h.trace() - h.quad(g) / n2))
}

/// Outcome of sampling the barrier residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    /// `‖A‖ β² μ² + C_f β μ`.
    pub threshold: f64,
    pub alpha_above_threshold: bool,
    pub samples: usize,
    /// Minimum residual of the upper barrier; nonnegative for a supersolution.
    pub min_super_residual: f64,
    pub super_witness: (Point, f64),
    /// Maximum residual of the lower barrier; nonpositive for a subsolution.
    pub max_sub_residual: f64,
    pub sub_witness: (Point, f64),
    /// Samples where either barrier fails.
    pub violations: usize,
}

impl BarrierReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Barrier threshold on `α` as stated for the comparison argument.
pub fn barrier_threshold(eq: &EquationSpec, beta: f64, mu: f64) -> f64 {
    eq.diffusion.norm() * beta * beta * mu * mu + eq.growth_c * beta * mu
}

/// Sufficient threshold that also accounts for the horizontal Hessian of
/// `⟨p⟩`; `mu2` bounds its spectral norm.
pub fn barrier_threshold_with_hessian(eq: &EquationSpec, beta: f64, mu: f64, mu2: f64) -> f64 {
    barrier_threshold(eq, beta, mu) + eq.diffusion.trace() * beta * mu2
}

/// Samples the residuals of `±(c·exp(αt + β⟨p⟩) + cf·t)` over the gauge ball
/// of `s.radius`, with times uniform in `[0, 1]`.
pub fn check_barrier(eq: &EquationSpec, bp: BarrierParams, mu: f64, s: &SampleSpec) -> BarrierReport {
    let upper = CatalogField::Barrier { params: bp, sign: 1.0 };
    let lower = CatalogField::Barrier { params: bp, sign: -1.0 };
    let mut rng = s.sampler();
    let pts: Vec<(Point, f64)> = (0..s.count).map(|_| (rng.point_in_gauge_ball(s.radius), rng.unit())).collect();
    let rows: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|&(p, t)| {
            let sup = residual(eq, &upper, p, t).unwrap_or(f64::NAN);
            let sub = residual(eq, &lower, p, t).unwrap_or(f64::NAN);
            (sup, sub)
        })
        .collect();
    let threshold = barrier_threshold(eq, bp.beta, mu);
    let mut report = BarrierReport {
        threshold,
        alpha_above_threshold: bp.alpha > threshold,
        samples: pts.len(),
        min_super_residual: f64::INFINITY,
        super_witness: (Point::ORIGIN, 0.0),
        max_sub_residual: f64::NEG_INFINITY,
        sub_witness: (Point::ORIGIN, 0.0),
        violations: 0,
    };
    for (&pt, &(sup, sub)) in pts.iter().zip(&rows) {
        if sup < report.min_super_residual || sup.is_nan() {
            report.min_super_residual = sup;
            report.super_witness = pt;
        }
        if sub > report.max_sub_residual || sub.is_nan() {
            report.max_sub_residual = sub;
            report.sub_witness = pt;
        }
        if !(sup >= 0.0 && sub <= 0.0) {
            report.violations += 1;
        }
    }
    report
}
