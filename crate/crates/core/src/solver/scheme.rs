use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridFunction, GridSpec, Lattice};
use super::SolverError;
use crate::hcalc::{horizontal_step, ScalarField};
use crate::hgroup::Point;
use crate::oracles::EquationSpec;
use crate::sampling::Sampler;

/// Time step and stencil parameters of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    /// Lax–Friedrichs coefficient; must dominate the Hamiltonian's `lip_w`.
    pub lf_dissipation: f64,
    /// Second differences use step `max(δ, √(stencil_scale·δ))`. Zero gives
    /// the compact step `δ`; positive values keep the interpolation error
    /// of the wide stencil at order `δ`.
    pub stencil_scale: f64,
}

impl SchemeConfig {
    /// Largest step the CFL bound allows on `spec` for `eq`, times `safety`.
    pub fn stable(eq: &EquationSpec, delta: f64, lf_dissipation: f64, stencil_scale: f64, safety: f64) -> Self {
        let mut cfg = SchemeConfig { dt: 0.0, lf_dissipation, stencil_scale };
        cfg.dt = safety / cfg.cfl_rate(eq, delta);
        cfg
    }

    pub fn diffusion_step(&self, delta: f64) -> f64 {
        delta.max((self.stencil_scale * delta).sqrt())
    }

    /// Stencil reach in the horizontal plane, for sizing the halo.
    pub fn reach(&self, delta: f64) -> f64 {
        self.diffusion_step(delta)
    }

    fn cfl_rate(&self, eq: &EquationSpec, delta: f64) -> f64 {
        let ell = self.diffusion_step(delta);
        let [l1, l2] = eq.diffusion.eigenvalues();
        2.0 * (l1.max(0.0) + l2.max(0.0)) / (ell * ell) + 2.0 * self.lf_dissipation / delta
    }

    /// `dt·(2(λ₁+λ₂)/ℓ² + 2σ/δ)`; the scheme is monotone when this is at most one.
    pub fn cfl_number(&self, eq: &EquationSpec, delta: f64) -> f64 {
        self.dt * self.cfl_rate(eq, delta)
    }

    pub fn validate(&self, eq: &EquationSpec, delta: f64) -> Result<(), SolverError> {
        if !(self.dt > 0.0) || !(self.stencil_scale >= 0.0) {
            return Err(SolverError::InvalidConfig("dt must be positive and stencil_scale nonnegative"));
        }
        if self.lf_dissipation < eq.lip_w {
            return Err(SolverError::InsufficientDissipation { sigma: self.lf_dissipation, lip_w: eq.lip_w });
        }
        let cfl = self.cfl_number(eq, delta);
        if cfl > 1.0 + 1e-12 {
            return Err(SolverError::CflViolation { cfl });
        }
        Ok(())
    }
}

struct Stencil {
    delta: f64,
    ell: f64,
    /// `(weight λ/ℓ², unit direction)` for each nonzero eigenvalue of `A`.
    diffusion: Vec<(f64, f64)>,
    half_sigma_over_delta: f64,
}

impl Stencil {
    fn new(eq: &EquationSpec, cfg: &SchemeConfig, delta: f64) -> Self {
        let ell = cfg.diffusion_step(delta);
        let diffusion = eq
            .diffusion
            .eigen()
            .into_iter()
            .filter(|(l, _)| *l > 1e-15)
            .map(|(l, phi)| (l / (ell * ell), phi))
            .collect();
        Stencil { delta, ell, diffusion, half_sigma_over_delta: 0.5 * cfg.lf_dissipation / delta }
    }

    /// Explicit update of the interior node at `p` holding `c`.
    #[inline]
    fn update(
        &self,
        lat: &Lattice,
        v: &[f64],
        eq: &EquationSpec,
        p: Point,
        c: f64,
        dt: f64,
    ) -> Result<f64, SolverError> {
        let at = |q: Point| lat.interpolate(v, q).ok_or(SolverError::OutOfDomain { point: q });
        let mut rate = 0.0;
        for &(w, phi) in &self.diffusion {
            let e = horizontal_step(phi, self.ell);
            rate += w * (at(p * e)? - 2.0 * c + at(p * e.inverse())?);
        }
        let (d, half) = (self.delta, 0.5 * self.delta);
        // p·(±δ, 0, 0) and p·(0, ±δ, 0)
        let xf = at(Point::new(p.x + d, p.y, p.z - half * p.y))?;
        let xb = at(Point::new(p.x - d, p.y, p.z + half * p.y))?;
        let yf = at(Point::new(p.x, p.y + d, p.z + half * p.x))?;
        let yb = at(Point::new(p.x, p.y - d, p.z - half * p.x))?;
        let grad = [(xf - xb) / (2.0 * d), (yf - yb) / (2.0 * d)];
        rate += self.half_sigma_over_delta * (xf + xb + yf + yb - 4.0 * c) - eq.hamiltonian_at(p, grad);
        Ok(c + dt * rate)
    }
}

fn refresh_halo(g: &mut GridFunction, t: f64) {
    if let Some(src) = g.boundary_source.clone() {
        let spec = g.spec;
        g.values.par_iter_mut().enumerate().for_each(|(i, v)| {
            if !spec.is_interior(i) {
                *v = src.value(spec.node(i), t);
            }
        });
    }
}

fn advance(g: &GridFunction, eq: &EquationSpec, stencil: &Stencil, dt: f64) -> Result<GridFunction, SolverError> {
    let spec = g.spec;
    let lat = spec.lattice();
    let [nx, ny, _] = lat.dims;
    let o = spec.origin();
    let (h, cells) = (spec.halo, spec.cells);
    let inside = |a: usize, v: usize| v >= h[a] && v <= h[a] + cells[a];
    let mut values = g.values.clone();
    values.par_chunks_mut(nx).enumerate().try_for_each(|(row, out)| {
        let (j, k) = (row % ny, row / ny);
        if !inside(1, j) || !inside(2, k) {
            return Ok(());
        }
        let y = o.y + j as f64 * spec.dx;
        let z = o.z + k as f64 * spec.dz;
        let src = &g.values[row * nx..(row + 1) * nx];
        for i in h[0]..=h[0] + cells[0] {
            let p = Point::new(o.x + i as f64 * spec.dx, y, z);
            out[i] = stencil.update(&lat, &g.values, eq, p, src[i], dt)?;
        }
        Ok::<(), SolverError>(())
    })?;
    let mut next = GridFunction { spec, values, time: g.time + dt, boundary_source: g.boundary_source.clone() };
    let t = next.time;
    refresh_halo(&mut next, t);
    if let Some(i) = next.values.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NanDetected { point: spec.node(i), time: next.time });
    }
    Ok(next)
}

/// One explicit step of size `dt` (at most `cfg.dt`).
pub fn step(g: &GridFunction, eq: &EquationSpec, cfg: &SchemeConfig, dt: f64) -> Result<GridFunction, SolverError> {
    cfg.validate(eq, g.spec.dx)?;
    if !(dt > 0.0 && dt <= cfg.dt * (1.0 + 1e-12)) {
        return Err(SolverError::InvalidConfig("step must lie in (0, cfg.dt]"));
    }
    advance(g, eq, &Stencil::new(eq, cfg, g.spec.dx), dt)
}

/// Grid snapshots of one run, in the order requested.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<GridFunction>,
    pub steps: usize,
}

/// Samples `u0` on `spec` and integrates up to each time in `times`
/// (nondecreasing), landing on them exactly.
pub fn run<F: ScalarField + ?Sized>(
    u0: &F,
    eq: &EquationSpec,
    cfg: &SchemeConfig,
    spec: GridSpec,
    boundary: Option<std::sync::Arc<dyn ScalarField>>,
    times: &[f64],
) -> Result<Trajectory, SolverError> {
    cfg.validate(eq, spec.dx)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(SolverError::InvalidConfig("snapshot times must be nonnegative and nondecreasing"));
    }
    let stencil = Stencil::new(eq, cfg, spec.dx);
    let mut g = GridFunction::sample(spec, u0, 0.0);
    g.boundary_source = boundary;
    refresh_halo(&mut g, 0.0);
    let mut snapshots = Vec::with_capacity(times.len());
    let mut steps = 0;
    for &target in times {
        while g.time < target - 1e-14 {
            let dt = cfg.dt.min(target - g.time);
            g = advance(&g, eq, &stencil, dt)?;
            steps += 1;
        }
        g.time = target.max(g.time);
        snapshots.push(g.clone());
    }
    Ok(Trajectory { snapshots, steps })
}

/// Outcome of comparing one step applied to `g` and to `g + η` with `η ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    /// Most negative entry of `step(g + η) − step(g)` seen; zero when none is negative.
    pub worst_violation: f64,
    pub violations: usize,
    pub witness: Option<Point>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Probes monotonicity of one step with `cfg.dt`, without checking the CFL
/// bound, so that unstable steps can be exhibited.
///
/// Even trials perturb a single interior node, odd trials every node.
pub fn monotonicity_probe(
    g: &GridFunction,
    eq: &EquationSpec,
    cfg: &SchemeConfig,
    trials: usize,
    seed: u64,
) -> Result<MonotonicityReport, SolverError> {
    const TOL: f64 = 1e-12;
    let stencil = Stencil::new(eq, cfg, g.spec.dx);
    let base = advance(g, eq, &stencil, cfg.dt)?;
    let interior: Vec<usize> = (0..g.spec.len()).filter(|&i| g.spec.is_interior(i)).collect();
    let mut rng = Sampler::new(seed);
    let mut report = MonotonicityReport { trials, worst_violation: 0.0, violations: 0, witness: None };
    for trial in 0..trials {
        let mut bumped = g.clone();
        if trial % 2 == 0 {
            let i = interior[rng.index(interior.len())];
            bumped.values[i] += 0.1 + rng.unit();
        } else {
            for v in bumped.values.iter_mut() {
                *v += 1e-3 * rng.unit();
            }
        }
        let next = advance(&bumped, eq, &stencil, cfg.dt)?;
        let (worst, at) = interior
            .iter()
            .map(|&i| (next.values[i] - base.values[i], i))
            .fold((0.0, None), |acc, (d, i)| if d < acc.0 { (d, Some(i)) } else { acc });
        if worst < -TOL {
            report.violations += 1;
            if worst < report.worst_violation {
                report.worst_violation = worst;
                report.witness = at.map(|i| g.spec.node(i));
            }
        }
    }
    Ok(report)
}
