//! Solver runs against closed-form solutions and the Hopf–Lax formula.
//!
//! Solver measurements without exact boundary data are restricted to the
//! inner half-box, as every summary notes.

use std::sync::Arc;

use hvisc_core::hcalc::ScalarField;
use hvisc_core::hopflax::{evaluate, lip_check, truncated_cone, HopfLaxField, HopfLaxProblem, LIP_SLACK};
use hvisc_core::oracles::{CatalogField, EquationSpec, TransportDatum};
use hvisc_core::regularity::{
    hconvexity_defect, hconvexity_defect_on, lip_modulus_on, sample_displacements, sample_pairs, Metric, Side,
};
use hvisc_core::sampling::{SampleSpec, Sampler};
use hvisc_core::solver::{monotonicity_probe, run, GridField, GridFunction, GridSpec, SchemeConfig, SolverError};
use hvisc_core::Point;

use super::{nonzero, positive, require, Experiment};
use crate::params::{ParamSpec, Params};
use crate::report::{Bound, Check, Outcome, Table};

const H0: [f64; 2] = [1.0, 1.0];
const INNER_HALF: &str = "measured on the inner half-box of the grid";

fn cube() -> (Point, Point) {
    (Point::new(-1.0, -1.0, -1.0), Point::new(1.0, 1.0, 1.0))
}

/// Grid on the box; spacing that does not divide it is a parameter error.
fn grid(lo: Point, hi: Point, delta: f64, reach: f64) -> anyhow::Result<GridSpec> {
    match GridSpec::new(lo, hi, delta, reach) {
        Err(SolverError::InvalidGrid(why)) => Err(crate::OutOfRange(format!("--delta {delta}: {why}")).into()),
        other => Ok(other?),
    }
}

struct TransportRun {
    exact: CatalogField,
    solution: Arc<GridFunction>,
    steps: usize,
}

impl TransportRun {
    fn new(datum: TransportDatum, delta: f64, t: f64, safety: f64) -> anyhow::Result<Self> {
        let eq = EquationSpec::transport(H0);
        let exact = CatalogField::Transport { h0: H0, datum };
        let cfg = SchemeConfig::stable(&eq, delta, eq.lip_w, 0.0, safety);
        let (lo, hi) = cube();
        let spec = grid(lo, hi, delta, cfg.reach(delta))?;
        let mut tr = run(&exact, &eq, &cfg, spec, Some(Arc::new(exact)), &[t])?;
        let solution = Arc::new(tr.snapshots.pop().expect("one snapshot requested"));
        Ok(TransportRun { exact, solution, steps: tr.steps })
    }

    fn spec(&self) -> &GridSpec {
        &self.solution.spec
    }

    fn field(&self) -> GridField {
        GridField(self.solution.clone())
    }

    fn interior_error(&self) -> f64 {
        let spec = *self.spec();
        self.solution.max_error(&self.exact, |i| spec.is_interior(i))
    }

    /// Sampled pairs with both points in the inner half-box.
    fn inner_pairs(&self, seed: u64, count: usize) -> Vec<(Point, Point)> {
        let spec = self.spec();
        sample_pairs(&SampleSpec::new(seed, count, 0.5, 0.2))
            .into_iter()
            .filter(|(p, q)| spec.inner_half_contains(*p) && spec.inner_half_contains(*q))
            .collect()
    }
}

const fn transport_params(delta: &'static str) -> [ParamSpec; 3] {
    [
        ParamSpec::real("delta", delta, "horizontal grid spacing (must divide 2)"),
        ParamSpec::real("t", "0.25", "final time"),
        ParamSpec::real("safety", "0.9", "time step as a fraction of the CFL limit"),
    ]
}

fn transport_checks(params: &Params) -> anyhow::Result<()> {
    positive(params, &["delta", "t"])?;
    let safety = params.real("safety");
    require(safety > 0.0 && safety <= 1.0, "--safety must lie in (0, 1]")
}

pub(super) const LIP_PRESERVE_RIGHT: Experiment = Experiment {
    name: "lip-preserve-right",
    about: "numerical transport of the gauge stays 1-Lipschitz for the right-invariant distance",
    params: &{
        let [a, b, c] = transport_params("0.025");
        [a, b, c, ParamSpec::count("pairs", "20000", "sampled pairs before restriction to the inner half-box")]
    },
    run: lip_preserve_right,
};

fn lip_preserve_right(params: &Params) -> anyhow::Result<Outcome> {
    transport_checks(params)?;
    nonzero(params, &["pairs"])?;
    let t = params.real("t");
    let sol = TransportRun::new(TransportDatum::Gauge, params.real("delta"), t, params.real("safety"))?;
    let pairs = sol.inner_pairs(params.seed(), params.count("pairs"));
    let right = lip_modulus_on(&sol.field(), t, Metric::Right, &pairs);
    let exact = lip_modulus_on(&sol.exact, t, Metric::Right, &pairs);
    let mut out = Outcome::default();
    let w = right.witness.map(|(p, q)| vec![p, q]).unwrap_or_default();
    out.check(
        Check::new("right_modulus", right.value, Bound::AtMost { limit: 1.1 })
            .witness(&w)
            .note(format!("{} pairs {INNER_HALF}", pairs.len())),
    );
    out.note(format!("closed-form right modulus on the same pairs: {}", exact.value));
    out.note(format!("interior error against the closed form: {}, {} steps", sol.interior_error(), sol.steps));
    out.grids.push(("solution".into(), (*sol.solution).clone()));
    Ok(out)
}

pub(super) const LIP_FAIL_LEFT: Experiment = Experiment {
    name: "lip-fail-left",
    about: "transport of the gauge is not Lipschitz for the left-invariant distance",
    params: &{
        let [a, b, c] = transport_params("0.025");
        [
            a,
            b,
            c,
            ParamSpec::count("pairs", "20000", "sampled pairs before restriction to the inner half-box"),
            ParamSpec::reals("eps", "0.05", "offsets of the witness pairs"),
        ]
    },
    run: lip_fail_left,
};

/// Witness pair `p1 = p2·(−ε, ε, 0)` with `p2 = (−t h0, 0)`.
fn left_witness(t: f64, eps: f64) -> (Point, Point) {
    let p2 = Point::new(-t * H0[0], -t * H0[1], 0.0);
    (p2 * Point::new(-eps, eps, 0.0), p2)
}

fn lip_fail_left(params: &Params) -> anyhow::Result<Outcome> {
    transport_checks(params)?;
    nonzero(params, &["pairs"])?;
    let eps = params.reals("eps");
    require(eps.iter().all(|&e| e > 0.0), "--eps values must be positive")?;
    let t = params.real("t");
    let mut out = Outcome::default();

    let exact = CatalogField::Transport { h0: H0, datum: TransportDatum::Gauge };
    let (e, tw) = (0.1f64, 1.0);
    let ratio = lip_modulus_on(&exact, tw, Metric::Left, &[left_witness(tw, e)]).value;
    let formula = (4.0 * e.powi(4) + 64.0 * e * e).powf(0.25) / (2f64.sqrt() * e);
    out.check(Check::new("closed_form_witness[eps=0.1,t=1]", ratio, Bound::Near { target: formula, tol: 1e-10 }));

    let sol = TransportRun::new(TransportDatum::Gauge, params.real("delta"), t, params.real("safety"))?;
    let field = sol.field();
    let mut pairs = sol.inner_pairs(params.seed(), params.count("pairs"));
    let mut table = Table::new("witness", &["eps", "u_p1", "u_p2", "exact_p1", "exact_p2", "ratio", "exact_ratio"]);
    for &e in eps {
        let pair = left_witness(t, e);
        let exact_ratio = lip_modulus_on(&exact, t, Metric::Left, &[pair]).value;
        out.check(Check::new(format!("closed_form_left[eps={e}]"), exact_ratio, Bound::Above { limit: 3.0 }));
        let num_ratio = lip_modulus_on(&field, t, Metric::Left, &[pair]).value;
        let (p1, p2) = pair;
        table.push(vec![
            e,
            field.value(p1, t),
            field.value(p2, t),
            exact.value(p1, t),
            exact.value(p2, t),
            num_ratio,
            exact_ratio,
        ]);
        pairs.push(pair);
    }
    let left = lip_modulus_on(&field, t, Metric::Left, &pairs);
    let w = left.witness.map(|(p, q)| vec![p, q]).unwrap_or_default();
    out.check(
        Check::new("left_modulus", left.value, Bound::Above { limit: 3.0 })
            .witness(&w)
            .note(format!("{} pairs including the witnesses, {INNER_HALF}", pairs.len())),
    );
    out.note(format!("interior error against the closed form: {}", sol.interior_error()));
    out.tables.push(table);
    Ok(out)
}

pub(super) const RIGHT_HCONVEX_PRESERVE: Experiment = Experiment {
    name: "right-hconvex-preserve",
    about: "transport preserves right-invariant h-convexity of x^2 y^2 + 2 z^2",
    params: &{
        let [a, b, c] = transport_params("0.05");
        [
            a,
            b,
            c,
            ParamSpec::reals("times", "0.5,1,2", "times checked on the closed form"),
            ParamSpec::count("samples", "5000", "closed-form displacement samples"),
            ParamSpec::count("displacements", "20000", "numerical samples before restriction to the inner half-box"),
        ]
    },
    run: right_hconvex_preserve,
};

fn right_hconvex_preserve(params: &Params) -> anyhow::Result<Outcome> {
    transport_checks(params)?;
    nonzero(params, &["samples", "displacements"])?;
    let times = params.reals("times");
    require(times.iter().all(|&t| t >= 0.0), "--times must be nonnegative")?;
    let mut out = Outcome::default();
    let exact = CatalogField::Transport { h0: H0, datum: TransportDatum::Quartic };
    let s = SampleSpec::new(params.seed(), params.count("samples"), 2.0, 1.0);
    let mut table = Table::new("defects", &["t", "right_defect", "left_defect"]);
    for &t in times {
        let right = hconvexity_defect(&exact, t, Side::RightInvariant, &s);
        let left = hconvexity_defect(&exact, t, Side::LeftTranslate, &s);
        out.check(Check::new(format!("closed_form[t={t}]"), right.value, Bound::AtLeast { limit: -1e-10 }));
        table.push(vec![t, right.value, left.value]);
    }

    let (delta, t) = (params.real("delta"), params.real("t"));
    let sol = TransportRun::new(TransportDatum::Quartic, delta, t, params.real("safety"))?;
    let spec = *sol.spec();
    let inside = |p: Point| spec.inner_half_contains(p);
    let samples: Vec<_> =
        sample_displacements(&SampleSpec::new(params.seed(), params.count("displacements"), 0.5, 0.3))
            .into_iter()
            .filter(|&(p, h)| {
                let h = h.to_point();
                inside(p) && inside(h * p) && inside(h.inverse() * p)
            })
            .collect();
    let right = hconvexity_defect_on(&sol.field(), t, Side::RightInvariant, &samples);
    let w = right.witness.map(|(p, _)| vec![p]).unwrap_or_default();
    out.check(
        Check::new("numerical", right.value, Bound::AtLeast { limit: -10.0 * delta * delta })
            .witness(&w)
            .note(format!("{} samples {INNER_HALF}", samples.len())),
    );
    let left = hconvexity_defect_on(&sol.field(), t, Side::LeftTranslate, &samples);
    out.note(format!("left-translate defect of the numerical solution: {}", left.value));
    out.note(format!("interior error against the closed form: {}", sol.interior_error()));
    table.push(vec![t, right.value, left.value]);
    out.tables.push(table);
    out.grids.push(("solution".into(), (*sol.solution).clone()));
    Ok(out)
}

pub(super) const TRANSPORT_CONVERGENCE: Experiment = Experiment {
    name: "transport-convergence",
    about: "numerical transport of x^2 y^2 + 2 z^2 against the closed form",
    params: &transport_params("0.025"),
    run: transport_convergence,
};

fn transport_convergence(params: &Params) -> anyhow::Result<Outcome> {
    transport_checks(params)?;
    let delta = params.real("delta");
    let sol = TransportRun::new(TransportDatum::Quartic, delta, params.real("t"), params.real("safety"))?;
    let err = sol.interior_error();
    let mut out = Outcome::default();
    out.check(Check::new("interior_error", err, Bound::AtMost { limit: 5e-2 }).note(format!(
        "error / delta = {}, {} steps",
        err / delta,
        sol.steps
    )));
    out.grids.push(("solution".into(), (*sol.solution).clone()));
    Ok(out)
}

pub(super) const HEAT_CONVERGENCE: Experiment = Experiment {
    name: "heat-convergence",
    about: "heat equation against the closed form (x^2+y^2)^2 - 8z^2 + 12(x^2+y^2)t + 24t^2",
    params: &[
        ParamSpec::reals("deltas", "0.05,0.025", "decreasing grid spacings (each must divide 2)"),
        ParamSpec::real("t", "0.1", "final time"),
        ParamSpec::real("kappa", "4", "diffusion stencil width parameter"),
        ParamSpec::real("safety", "0.3", "time step as a fraction of the CFL limit"),
        ParamSpec::count("probe-trials", "10", "monotonicity probe trials on the coarsest grid"),
    ],
    run: heat_convergence,
};

fn heat_convergence(params: &Params) -> anyhow::Result<Outcome> {
    let deltas = params.reals("deltas");
    require(deltas.iter().all(|&d| d > 0.0), "--deltas must be positive")?;
    require(deltas.windows(2).all(|w| w[1] < w[0]), "--deltas must be decreasing")?;
    positive(params, &["t", "kappa"])?;
    let safety = params.real("safety");
    require(safety > 0.0 && safety <= 1.0, "--safety must lie in (0, 1]")?;
    let (t, kappa) = (params.real("t"), params.real("kappa"));
    let eq = EquationSpec::heat();
    let exact = CatalogField::Heat1;
    let (lo, hi) = cube();
    let mut out = Outcome::default();
    let mut table = Table::new("errors", &["delta", "error", "steps"]);
    let mut last: Option<(f64, f64)> = None;
    for (k, &delta) in deltas.iter().enumerate() {
        let cfg = SchemeConfig::stable(&eq, delta, 0.0, kappa, safety);
        let spec = grid(lo, hi, delta, cfg.reach(delta))?;
        let source: Arc<dyn ScalarField> = Arc::new(exact);
        if k == 0 && params.count("probe-trials") > 0 {
            let g0 = GridFunction::sample(spec, &exact, 0.0).with_boundary(source.clone());
            let probe = monotonicity_probe(&g0, &eq, &cfg, params.count("probe-trials"), params.seed())?;
            out.check(Check::new("monotonicity_violations", probe.violations as f64, Bound::AtMost { limit: 0.0 }));
        }
        let mut tr = run(&exact, &eq, &cfg, spec, Some(source), &[t])?;
        let g = tr.snapshots.pop().expect("one snapshot requested");
        let err = g.max_error(&exact, |i| spec.is_interior(i));
        out.check(
            Check::new(format!("error[delta={delta}]"), err, Bound::Finite)
                .note(format!("error / 0.05 = {}", err / 0.05)),
        );
        table.push(vec![delta, err, tr.steps as f64]);
        if let Some((d0, e0)) = last {
            let factor = e0 / err;
            let order = factor.ln() / (d0 / delta).ln();
            if ((d0 / delta) - 2.0).abs() < 1e-9 {
                out.check(Check::new(format!("reduction[{d0}->{delta}]"), factor, Bound::Between { lo: 1.6, hi: 2.6 }));
            }
            out.check(Check::new(format!("order[{d0}->{delta}]"), order, Bound::AtLeast { limit: 0.8 }));
        }
        last = Some((delta, err));
        if k + 1 == deltas.len() {
            out.grids.push(("solution".into(), g));
        }
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const HOPFLAX_LIP: Experiment = Experiment {
    name: "hopflax-lip",
    about: "Hopf-Lax solution of u_t + |grad_H u|^2/2 = 0 from -min(d_CC(0, .), 1)",
    params: &[
        ParamSpec::real("t", "0.5", "evaluation time (at most 1)"),
        ParamSpec::real("delta", "0.00625", "solver grid spacing"),
        ParamSpec::real("half-width", "0.35", "solver box half-width in x and y"),
        ParamSpec::real("half-height", "0.1", "solver box half-height in z"),
        ParamSpec::count("points", "200", "random comparison points in the inner half-box"),
        ParamSpec::count("search", "2000", "grid seeds of each Hopf-Lax minimization"),
        ParamSpec::count("lip-pairs", "200", "sampled pairs for the Lipschitz check"),
        ParamSpec::real("lip-radius", "0.5", "gauge radius of the Lipschitz pairs"),
        ParamSpec::count("lip-search", "1000", "grid seeds per evaluation in the Lipschitz check"),
    ],
    run: hopflax_lip,
};

fn hopflax_lip(params: &Params) -> anyhow::Result<Outcome> {
    positive(params, &["t", "delta", "half-width", "half-height", "lip-radius"])?;
    nonzero(params, &["search", "lip-pairs", "lip-search"])?;
    let t = params.real("t");
    require(t <= 1.0, "--t must be at most 1")?;
    let seed = params.seed();
    let prob = HopfLaxProblem::quadratic(Arc::new(truncated_cone(1.0)), 1.0, 1.0);
    let search = SampleSpec::new(seed, params.count("search"), 1.0, 1.0);
    let mut out = Outcome::default();

    let origin = evaluate(&prob, Point::ORIGIN, t, &search)?;
    out.check(Check::new("origin_value", origin.value, Bound::Near { target: -0.5 * t, tol: 1e-3 }));

    let lip_pairs = SampleSpec::new(seed, params.count("lip-pairs"), params.real("lip-radius"), 0.1);
    let lip_search = SampleSpec::new(seed, params.count("lip-search"), 1.0, 1.0);
    let lip = lip_check(&prob, t, &lip_pairs, &lip_search);
    let w = lip.modulus.witness.map(|(p, q)| vec![p, q]).unwrap_or_default();
    out.check(
        Check::new("left_modulus", lip.modulus.value, Bound::AtMost { limit: lip.bound * (1.0 + LIP_SLACK) })
            .witness(&w),
    );

    let (hw, hh, delta) = (params.real("half-width"), params.real("half-height"), params.real("delta"));
    let eq = EquationSpec::quadratic_hamilton_jacobi(1.0);
    let cfg = SchemeConfig::stable(&eq, delta, eq.lip_w, 0.0, 0.9);
    let spec = grid(Point::new(-hw, -hw, -hh), Point::new(hw, hw, hh), delta, cfg.reach(delta))?;
    let mut tr = run(&truncated_cone(1.0), &eq, &cfg, spec, None, &[t])?;
    let field = GridField(Arc::new(tr.snapshots.pop().expect("one snapshot requested")));
    let hopf_lax = HopfLaxField { problem: prob, search };
    let mut rng = Sampler::new(seed);
    let half = Point::new(0.5 * hw, 0.5 * hw, 0.5 * hh);
    let mut points = vec![Point::ORIGIN];
    points.extend((0..params.count("points")).map(|_| rng.point_in_box(Point::new(-half.x, -half.y, -half.z), half)));
    let mut table = Table::new("comparison", &["x", "y", "z", "solver", "hopf_lax"]);
    let mut worst = (0.0f64, Point::ORIGIN);
    for p in points {
        let (a, b) = (field.value(p, t), hopf_lax.value(p, t));
        if (a - b).abs() > worst.0 || a.is_nan() {
            worst = ((a - b).abs(), p);
        }
        table.push(vec![p.x, p.y, p.z, a, b]);
    }
    out.check(
        Check::new("solver_agreement", worst.0, Bound::AtMost { limit: 5e-2 })
            .witness(&[worst.1])
            .note(format!("{INNER_HALF}; the halo is frozen at the initial datum")),
    );
    out.tables.push(table);
    out.grids.push(("solution".into(), (*field.0).clone()));
    Ok(out)
}
