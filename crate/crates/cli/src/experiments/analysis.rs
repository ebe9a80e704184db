//! Closed-form solutions, barriers and the doubling-of-variables algebra.

use hvisc_core::doubling::{self, DoublingConfig, CROSS_CONSTANT, FORM_NAMES, SQUARED_CONSTANT};
use hvisc_core::hcalc::{fd_hhess, hhess, DEFAULT_STEP};
use hvisc_core::hgroup::{hess_bracket_bound, mu_bound};
use hvisc_core::oracles::{
    barrier_threshold, barrier_threshold_with_hessian, check_barrier, mcf_residual, residual, BarrierParams,
    CatalogField, EquationSpec, OracleError, TransportDatum,
};
use hvisc_core::regularity::{hconvexity_defect, second_difference, Side};
use hvisc_core::sampling::{SampleSpec, Sampler};
use hvisc_core::{HorizontalElement, Point};
use rayon::prelude::*;

use super::{nonzero, positive, require, Experiment};
use crate::params::{ParamSpec, Params};
use crate::report::{Bound, Check, Outcome, Table};

const H0: [f64; 2] = [1.0, 1.0];

pub(super) const HCONVEX_COUNTEREXAMPLE: Experiment = Experiment {
    name: "hconvex-counterexample",
    about: "transport of the h-convex datum x^2 y^2 + 2 z^2 loses h-convexity",
    params: &[
        ParamSpec::count("samples", "5000", "sampled base points and displacements"),
        ParamSpec::real("radius", "2", "gauge radius of the base points"),
    ],
    run: hconvex_counterexample,
};

fn hconvex_counterexample(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["radius"])?;
    let u = CatalogField::Transport { h0: H0, datum: TransportDatum::Quartic };
    let (p, t) = (Point::new(1.0, 1.0, 0.0), 1.0);
    let mut out = Outcome::default();

    let h = hhess(&u, p, t, DEFAULT_STEP)?;
    let dev = (h.a11 - 8.0).abs().max((h.a12 - 16.0).abs()).max((h.a22 - 8.0).abs());
    out.check(
        Check::new("hessian_entries", dev, Bound::AtMost { limit: 1e-8 })
            .note(format!("(a11, a12, a22) = ({}, {}, {})", h.a11, h.a12, h.a22)),
    );
    out.check(Check::new("min_eigenvalue", h.min_eig(), Bound::Near { target: -8.0, tol: 1e-8 }));
    let fd = fd_hhess(&u, p, t, DEFAULT_STEP)?;
    let fd_gap = (fd.a11 - h.a11).abs().max((fd.a12 - h.a12).abs()).max((fd.a22 - h.a22).abs());
    out.check(Check::new("finite_difference_agreement", fd_gap, Bound::AtMost { limit: 1e-4 }));

    // (1, −1) spans the negative eigendirection
    let along = second_difference(&u, t, Side::LeftTranslate, p, HorizontalElement::new(0.1, -0.1));
    out.check(Check::new("witness_second_difference", along, Bound::Below { limit: 0.0 }).witness(&[p]));

    let s = SampleSpec::new(params.seed(), params.count("samples"), params.real("radius"), 1.0);
    let datum = hconvexity_defect(&u, 0.0, Side::LeftTranslate, &s);
    out.check(Check::new("datum_defect", datum.value, Bound::AtLeast { limit: 0.0 }));
    let later = hconvexity_defect(&u, t, Side::LeftTranslate, &s);
    let w = later.witness.map(|(q, _)| vec![q]).unwrap_or_default();
    out.check(Check::new("sampled_defect", later.value, Bound::Below { limit: 0.0 }).witness(&w));

    let mut table = Table::new("hessian", &["t", "a11", "a12", "a22", "min_eig"]);
    for k in 0..=20 {
        let tk = 0.1 * k as f64;
        let hk = hhess(&u, p, tk, DEFAULT_STEP)?;
        table.push(vec![tk, hk.a11, hk.a12, hk.a22, hk.min_eig()]);
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const ORACLE_RESIDUALS: Experiment = Experiment {
    name: "oracle-residuals",
    about: "PDE residuals of the closed-form solutions with analytic derivatives",
    params: &[
        ParamSpec::count("samples", "100", "random (point, time) samples"),
        ParamSpec::real("radius", "2", "gauge radius of the sampled points"),
    ],
    run: oracle_residuals,
};

fn oracle_residuals(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["radius"])?;
    let mut rng = Sampler::new(params.seed());
    let r = params.real("radius");
    let pts: Vec<(Point, f64)> =
        (0..params.count("samples")).map(|_| (rng.point_in_gauge_ball(r), rng.uniform(0.01, 1.0))).collect();
    let heat = EquationSpec::heat();
    let transport = EquationSpec::transport(H0);
    let cases = [
        ("heat1", CatalogField::Heat1, &heat),
        ("heat2", CatalogField::Heat2, &heat),
        ("transport", CatalogField::Transport { h0: H0, datum: TransportDatum::Quartic }, &transport),
        ("transport-heat-quartic", CatalogField::Transport { h0: H0, datum: TransportDatum::HeatQuartic }, &transport),
    ];
    let mut out = Outcome::default();
    let mut table =
        Table::new("residuals", &["x", "y", "z", "t", "heat1", "heat2", "transport", "transport_hq", "mcf"]);
    let mut columns = Vec::new();
    for (name, u, eq) in cases {
        let res = pts.iter().map(|&(p, t)| residual(eq, &u, p, t)).collect::<Result<Vec<f64>, _>>()?;
        let (i, worst) = argmax_abs(&res);
        out.check(Check::new(name, worst, Bound::AtMost { limit: 1e-9 }).witness(&[pts[i].0]));
        columns.push(res);
    }
    let mut mcf = Vec::with_capacity(pts.len());
    let mut skipped = 0;
    for &(p, t) in &pts {
        match mcf_residual(&CatalogField::Mcf, p, t) {
            Ok(v) => mcf.push(v),
            Err(OracleError::CharacteristicPoint { .. }) => {
                skipped += 1;
                mcf.push(f64::NAN);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let finite: Vec<f64> = mcf.iter().copied().filter(|v| v.is_finite()).collect();
    out.check(
        Check::new("mcf", argmax_abs(&finite).1, Bound::AtMost { limit: 1e-7 })
            .note(format!("{skipped} samples on the characteristic set skipped")),
    );
    columns.push(mcf);
    for (k, &(p, t)) in pts.iter().enumerate() {
        let mut row = vec![p.x, p.y, p.z, t];
        row.extend(columns.iter().map(|c| c[k]));
        table.push(row);
    }
    out.tables.push(table);
    Ok(out)
}

fn argmax_abs(v: &[f64]) -> (usize, f64) {
    v.iter().enumerate().fold((0, 0.0), |a, (i, x)| if x.abs() > a.1 { (i, x.abs()) } else { a })
}

pub(super) const BARRIER_CHECK: Experiment = Experiment {
    name: "barrier-check",
    about: "exp(alpha t + beta <p>) as a supersolution of the heat equation for alpha above threshold",
    params: &[
        ParamSpec::count("samples", "10000", "sampled (point, time) pairs"),
        ParamSpec::real("radius", "2", "gauge radius of the sampled points"),
        ParamSpec::real("beta", "1", "exponent weight of <p>"),
        ParamSpec::real("margin", "1.01", "alpha as a multiple of the threshold (> 1)"),
        ParamSpec::count("mu-samples", "20000", "samples for the sup of |grad_H <p>|"),
        ParamSpec::real("mu-radius", "10", "radius for the sup of |grad_H <p>|"),
    ],
    run: barrier_check,
};

fn barrier_check(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples", "mu-samples"])?;
    positive(params, &["radius", "beta", "mu-radius"])?;
    let margin = params.real("margin");
    require(margin > 1.0, "--margin must exceed 1")?;
    let beta = params.real("beta");
    let eq = EquationSpec::heat();
    let mu = mu_bound(params.count("mu-samples"), params.real("mu-radius"));
    let mu2 = hess_bracket_bound(params.count("mu-samples"), params.real("mu-radius"));
    let s = SampleSpec::new(params.seed(), params.count("samples"), params.real("radius"), 1.0);
    let at = |alpha: f64| check_barrier(&eq, BarrierParams { alpha, beta, c: 1.0, cf: 0.0 }, mu, &s);

    let mut out = Outcome::default();
    out.note(format!("mu = {mu}, sup of the horizontal Hessian norm of <p> = {mu2}"));
    let stated = barrier_threshold(&eq, beta, mu);
    let none = Bound::AtMost { limit: 0.0 };
    let cases = [
        ("violations_above_threshold", margin * stated, none),
        // twice the diffusion term plus one, as in the worked example
        ("violations_doubled_threshold", 2.0 * eq.diffusion.norm() * beta * beta * mu * mu + 1.0, none),
        ("violations_at_zero_alpha", 0.0, Bound::AtLeast { limit: 1.0 }),
        ("violations_with_hessian_term", margin * barrier_threshold_with_hessian(&eq, beta, mu, mu2), none),
    ];
    let mut table = Table::new("residuals", &["alpha", "min_super_residual", "max_sub_residual", "violations"]);
    for (name, alpha, bound) in cases {
        let r = at(alpha);
        table.push(vec![alpha, r.min_super_residual, r.max_sub_residual, r.violations as f64]);
        out.check(
            Check::new(name, r.violations as f64, bound)
                .witness(&[r.super_witness.0])
                .note(format!("alpha = {alpha}, min supersolution residual {}", r.min_super_residual)),
        );
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const DOUBLING_IDENTITIES: Experiment = Experiment {
    name: "doubling-identities",
    about: "vanishing and constant-ratio identities of the penalization Hessians",
    params: &[
        ParamSpec::count("trials", "10000", "random (p, q, r, w) inputs"),
        ParamSpec::real("radius", "3", "gauge radius of the sampled points"),
    ],
    run: doubling_identities,
};

fn doubling_identities(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["trials"])?;
    positive(params, &["radius"])?;
    let mut rng = Sampler::new(params.seed());
    let r = params.real("radius");
    let inputs: Vec<(Point, Point, Point, [f64; 2])> = (0..params.count("trials"))
        .map(|_| {
            let p = rng.point_in_gauge_ball(r);
            let q = rng.point_in_gauge_ball(r);
            let c = rng.point_in_gauge_ball(r);
            (p, q, c, [rng.normal(), rng.normal()])
        })
        .collect();
    // relative vanishing value, then deviations of the three constant ratios
    let rows: Vec<[f64; 4]> = inputs
        .par_iter()
        .map(|&(p, q, c, w)| {
            let scale = doubling::form_scale(p, q, c, w);
            let vanish = (doubling::identity_vanishing(p, q, c, w).abs())
                .max(doubling::identity_vanishing_two(p, q, w).abs())
                / scale;
            let dev = |ratio: Option<f64>, k: f64| ratio.map_or(0.0, |v| (v / k - 1.0).abs());
            [
                vanish,
                dev(doubling::identity_squared(p, q, c, w).ratio, SQUARED_CONSTANT),
                dev(doubling::identity_squared_two(p, q, w).ratio, SQUARED_CONSTANT),
                dev(doubling::identity_cross(p, q, c, w).ratio, CROSS_CONSTANT),
            ]
        })
        .collect();
    let worst =
        |k: usize| rows.iter().enumerate().fold((0usize, 0.0f64), |a, (i, r)| if r[k] > a.1 { (i, r[k]) } else { a });
    let mut out = Outcome::default();
    let names = ["vanishing", "squared_ratio", "squared_ratio_two_point", "cross_ratio"];
    let limits = [1e-10, 1e-8, 1e-8, 1e-8];
    for k in 0..4 {
        let (i, v) = worst(k);
        let (p, q, c, _) = inputs[i];
        out.check(Check::new(names[k], v, Bound::AtMost { limit: limits[k] }).witness(&[p, q, c]));
    }
    out.note(format!("squared constant {SQUARED_CONSTANT}, cross constant {CROSS_CONSTANT}, at eps = 1"));
    let mut table = Table::new("identities", &names);
    for r in rows.iter().take(1000) {
        table.push(r.to_vec());
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const PENALIZATION_BOUNDS: Experiment = Experiment {
    name: "penalization-bounds",
    about: "sampled constants of the penalization quadratic-form bounds, at beta and 2 beta",
    params: &[
        ParamSpec::count("samples", "2000", "random configurations before local search"),
        ParamSpec::real("radius", "5", "gauge radius of the sampled points"),
        ParamSpec::real("eps", "1", "penalization parameter"),
        ParamSpec::real("beta", "1", "weight exponent"),
    ],
    run: penalization_bounds,
};

fn penalization_bounds(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["radius", "eps", "beta"])?;
    let s = SampleSpec::new(params.seed(), params.count("samples"), params.real("radius"), 1.0);
    let beta = params.real("beta");
    let cfg = |b: f64| DoublingConfig { eps: params.real("eps"), beta: b, ..DoublingConfig::default() };
    let base = doubling::penalization_bounds(&cfg(beta), &s);
    let doubled = doubling::penalization_bounds(&cfg(2.0 * beta), &s);
    let mut out = Outcome::default();
    let mut table = Table::new("constants", &["form", "beta", "c_hat", "shell0", "shell1", "shell2", "shell3"]);
    for (k, (a, b)) in base.bounds.iter().zip(&doubled.bounds).enumerate() {
        let w = a.witness.map(|p| vec![p]).unwrap_or_default();
        out.check(Check::new(format!("c_hat[{}]", a.name), a.c_hat, Bound::Finite).witness(&w));
        out.check(Check::new(format!("beta_doubling_ratio[{}]", a.name), b.c_hat / a.c_hat, Bound::Finite));
        if a.diverging {
            out.note(format!("{}: outermost shell dominates", a.name));
        }
        for (bb, bound) in [(beta, a), (2.0 * beta, b)] {
            let mut row = vec![k as f64, bb, bound.c_hat];
            row.extend(&bound.shell_sups);
            table.push(row);
        }
    }
    out.note(format!("forms in order: {}", FORM_NAMES.join(", ")));
    out.note("constants are sampled suprema with local search; compare shells rather than radii");
    out.tables.push(table);
    Ok(out)
}
