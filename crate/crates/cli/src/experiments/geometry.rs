//! Metrics, the sub-Riemannian distance and symmetry properties.

use hvisc_core::ccmetric::{dcc_from_origin, dcc_oracle, GeodesicSolveConfig};
use hvisc_core::hcalc::FnField;
use hvisc_core::hgroup::{dist_left, dist_left4_hgrads, dist_right};
use hvisc_core::regularity::{evenness_defect, lip_modulus_on, sample_pairs_symmetric, separability_defect};
use hvisc_core::regularity::{EvenMode, Metric};
use hvisc_core::sampling::{SampleSpec, Sampler};
use hvisc_core::Point;
use rayon::prelude::*;

use super::{nonzero, positive, require, Experiment};
use crate::params::{ParamSpec, Params};
use crate::report::{Bound, Check, Outcome, Table};

pub(super) const METRIC_GAP: Experiment = Experiment {
    name: "metric-gap",
    about: "left and right gauge distances of the pair (1-e, 1+e, e), (1, 1, 0)",
    params: &[ParamSpec::reals("eps", "0.1,0.05,0.01", "comma-separated offsets")],
    run: metric_gap,
};

/// Offsets at or below this must show a right/left ratio of at least 5.
const GAP_EPS: f64 = 0.01;

fn metric_gap(params: &Params) -> anyhow::Result<Outcome> {
    let eps = params.reals("eps");
    require(eps.iter().all(|&e| e > 0.0), "--eps values must be positive")?;
    let mut out = Outcome::default();
    let mut table = Table::new("distances", &["eps", "d_left", "d_right", "d_left4", "d_right4", "ratio"]);
    for &e in eps {
        let p = Point::new(1.0 - e, 1.0 + e, e);
        let q = Point::new(1.0, 1.0, 0.0);
        let (dl, dr) = (dist_left(p, q), dist_right(p, q));
        let (dl4, dr4) = (dl.powi(4), dr.powi(4));
        let e2 = e * e;
        out.check(Check::new(format!("d_left4[eps={e}]"), dl4, Bound::Near { target: 4.0 * e2 * e2, tol: 1e-12 }));
        out.check(Check::new(
            format!("d_right4[eps={e}]"),
            dr4,
            Bound::Near { target: 4.0 * e2 * e2 + 64.0 * e2, tol: 1e-12 },
        ));
        if e <= GAP_EPS {
            out.check(Check::new(format!("ratio[eps={e}]"), dr / dl, Bound::AtLeast { limit: 5.0 }));
        }
        table.push(vec![e, dl, dr, dl4, dr4, dr / dl]);
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const HOLDER_BRIDGE: Experiment = Experiment {
    name: "holder-bridge",
    about: "d_L <= C d_R^(1/2) on the gauge ball, C = (1 + 16 (1/4 + rho)^2)^(1/4)",
    params: &[
        ParamSpec::count("samples", "100000", "number of pairs"),
        ParamSpec::real("rho", "2", "gauge radius holding both points"),
    ],
    run: holder_bridge,
};

pub fn holder_constant(rho: f64) -> f64 {
    (1.0 + 16.0 * (0.25 + rho).powi(2)).powf(0.25)
}

/// Rows written to the CSV; the check uses every sample.
const TABLE_ROWS: usize = 2000;

fn holder_bridge(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["rho"])?;
    let (n, rho) = (params.count("samples"), params.real("rho"));
    let c = holder_constant(rho);
    // q = h·p has d_R(p, q) = |h|, so |h| <= 1 covers the whole constraint set
    let mut rng = Sampler::new(params.seed());
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let p = rng.point_in_gauge_ball(rho);
        let q = rng.point_in_gauge_ball(1.0) * p;
        if q.gauge() <= rho {
            pairs.push((p, q));
        }
    }
    let rows: Vec<[f64; 3]> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let (dl, dr) = (dist_left(p, q), dist_right(p, q));
            [dr, dl, c * dr.sqrt()]
        })
        .collect();
    let mut worst = (0.0f64, 0usize);
    let mut violations = 0usize;
    for (i, [dr, dl, bound]) in rows.iter().enumerate() {
        if *dr > 0.0 && dl / bound > worst.0 {
            worst = (dl / bound, i);
        }
        if *dl > bound + 1e-12 {
            violations += 1;
        }
    }
    let (p, q) = pairs[worst.1];
    let mut out = Outcome::default();
    out.check(Check::new("violations", violations as f64, Bound::AtMost { limit: 0.0 }).note(format!("C = {c}")));
    out.check(Check::new("max_ratio", worst.0, Bound::AtMost { limit: 1.0 }).witness(&[p, q]));
    let mut table = Table::new("pairs", &["d_right", "d_left", "bound"]);
    for r in rows.iter().take(TABLE_ROWS) {
        table.push(r.to_vec());
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const CC_ANCHORS: Experiment = Experiment {
    name: "cc-anchors",
    about: "closed-form sub-Riemannian distance against exact values, the polygonal oracle and dilations",
    params: &[
        ParamSpec::count("segments", "256", "segments of the polygonal oracle"),
        ParamSpec::count("samples", "100", "random points for the dilation check"),
    ],
    run: cc_anchors,
};

fn cc_anchors(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    let segments = params.count("segments");
    require(segments >= 8, "--segments must be at least 8")?;
    let cfg = GeodesicSolveConfig { oracle_segments: segments, ..Default::default() };
    let mut out = Outcome::default();

    let planar = dcc_from_origin(Point::new(3.0, 4.0, 0.0), &cfg)?;
    out.check(Check::new("planar", planar, Bound::Near { target: 5.0, tol: 0.0 }));

    let axis = Point::new(0.0, 0.0, 1.0);
    let closed = dcc_from_origin(axis, &cfg)?;
    let mut table = Table::new("oracle", &["segments", "oracle", "closed_form"]);
    let mut k = 8;
    let mut oracle = f64::NAN;
    while k <= segments {
        oracle = dcc_oracle(axis, k)?;
        table.push(vec![k as f64, oracle, closed]);
        k *= 2;
    }
    if (k / 2) != segments {
        oracle = dcc_oracle(axis, segments)?;
        table.push(vec![segments as f64, oracle, closed]);
    }
    out.check(
        Check::new("vertical_vs_oracle", (closed - oracle).abs() / oracle, Bound::AtMost { limit: 5e-3 })
            .note(format!("closed form {closed}, oracle {oracle}, 2 sqrt(pi) = {}", 2.0 * std::f64::consts::PI.sqrt())),
    );
    out.tables.push(table);

    let mut rng = Sampler::new(params.seed());
    let inputs: Vec<(Point, f64)> = (0..params.count("samples"))
        .map(|_| (rng.point_in_gauge_ball(2.0), rng.uniform(0.1f64.ln(), 10f64.ln()).exp()))
        .collect();
    let errs = inputs
        .par_iter()
        .map(|&(p, lam)| {
            let base = dcc_from_origin(p, &cfg)?;
            let scaled = dcc_from_origin(p.dilate(lam), &cfg)?;
            Ok(if base > 0.0 { (scaled - lam * base).abs() / (lam * base) } else { scaled.abs() })
        })
        .collect::<Result<Vec<f64>, hvisc_core::ccmetric::CcError>>()?;
    let (i, worst) = errs.iter().copied().enumerate().fold((0, 0.0), |a, (i, e)| if e > a.1 { (i, e) } else { a });
    out.check(Check::new("dilation", worst, Bound::AtMost { limit: 1e-6 }).witness(&[inputs[i].0]));
    Ok(out)
}

pub(super) const GRADIENT_NORM: Experiment = Experiment {
    name: "gradient-norm",
    about: "both horizontal gradients of d_L^4 have norm 4 d_L^2 |(dx, dy)|",
    params: &[
        ParamSpec::count("samples", "1000", "random pairs"),
        ParamSpec::real("radius", "2", "gauge radius of the sampled points"),
    ],
    run: gradient_norm,
};

fn gradient_norm(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["radius"])?;
    let mut rng = Sampler::new(params.seed());
    let r = params.real("radius");
    let pairs: Vec<(Point, Point)> =
        (0..params.count("samples")).map(|_| (rng.point_in_gauge_ball(r), rng.point_in_gauge_ball(r))).collect();
    let mut worst = (0.0f64, Point::ORIGIN, Point::ORIGIN);
    let mut table = Table::new("norms", &["d_left", "grad_p", "grad_q", "expected"]);
    for &(p, q) in &pairs {
        let (gp, gq) = dist_left4_hgrads(p, q);
        let d = dist_left(p, q);
        let expected = 4.0 * d * d * (p.x - q.x).hypot(p.y - q.y);
        let (np, nq) = (gp[0].hypot(gp[1]), gq[0].hypot(gq[1]));
        if expected > 0.0 {
            let e = ((np - expected).abs().max((nq - expected).abs())) / expected;
            if e > worst.0 {
                worst = (e, p, q);
            }
        }
        table.push(vec![d, np, nq, expected]);
    }
    let mut out = Outcome::default();
    out.check(Check::new("relative_error", worst.0, Bound::AtMost { limit: 1e-10 }).witness(&[worst.1, worst.2]));
    out.tables.push(table);
    Ok(out)
}

pub(super) const EVENNESS_EQUIVALENCE: Experiment = Experiment {
    name: "evenness-equivalence",
    about: "for an even function the left and right Lipschitz moduli coincide",
    params: &[
        ParamSpec::count("samples", "10000", "base pairs, mirrored through inversion"),
        ParamSpec::real("radius", "2", "gauge radius of the sampled points"),
    ],
    run: evenness_equivalence,
};

fn evenness_equivalence(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["radius"])?;
    let s = SampleSpec::new(params.seed(), params.count("samples"), params.real("radius"), 1.0);
    let pairs = sample_pairs_symmetric(&s);
    let mut out = Outcome::default();
    let mut table = Table::new("moduli", &["field", "left", "right", "origin_evenness", "vertical_evenness"]);
    let fields: [(&str, FnField); 2] =
        [("gauge", FnField::stationary(|p| p.gauge())), ("control", FnField::stationary(|p| p.x + p.z))];
    for (k, (name, u)) in fields.iter().enumerate() {
        let left = lip_modulus_on(u, 0.0, Metric::Left, &pairs).value;
        let right = lip_modulus_on(u, 0.0, Metric::Right, &pairs).value;
        let origin = evenness_defect(u, 0.0, EvenMode::Origin, &s);
        let vertical = evenness_defect(u, 0.0, EvenMode::Vertical, &s);
        let gap = (left - right).abs() / left.max(right);
        if *name == "gauge" {
            out.check(Check::new("gauge_modulus_gap", gap, Bound::AtMost { limit: 0.02 }));
            out.check(Check::new("gauge_origin_evenness", origin.value, Bound::AtMost { limit: 1e-12 }));
            out.check(Check::new("gauge_vertical_evenness", vertical.value, Bound::AtMost { limit: 1e-12 }));
        } else {
            out.note(format!("control x + z: left {left}, right {right}, evenness defect {}", origin.value));
        }
        table.push(vec![k as f64, left, right, origin.value, vertical.value]);
    }
    out.tables.push(table);
    Ok(out)
}

pub(super) const SEPARABILITY_IDENTITY: Experiment = Experiment {
    name: "separability-identity",
    about: "left and right second differences agree for f(x, y) + g(z)",
    params: &[
        ParamSpec::count("samples", "5000", "base points with horizontal displacements"),
        ParamSpec::real("radius", "1.5", "gauge radius of the base points"),
    ],
    run: separability_identity,
};

fn separability_identity(params: &Params) -> anyhow::Result<Outcome> {
    nonzero(params, &["samples"])?;
    positive(params, &["radius"])?;
    let s = SampleSpec::new(params.seed(), params.count("samples"), params.real("radius"), 1.0);
    let mut out = Outcome::default();
    let mut table = Table::new("defects", &["field", "defect"]);
    let separable: [(&str, FnField); 2] = [
        ("sin(x)cos(y)+z^3", FnField::stationary(|p| p.x.sin() * p.y.cos() + p.z.powi(3))),
        ("x^2y+exp(z)", FnField::stationary(|p| p.x * p.x * p.y + p.z.exp())),
    ];
    for (k, (name, u)) in separable.iter().enumerate() {
        let d = separability_defect(u, 0.0, &s);
        let w = d.witness.map(|(p, _)| vec![p]).unwrap_or_default();
        out.check(Check::new(format!("defect[{name}]"), d.value, Bound::AtMost { limit: 1e-12 }).witness(&w));
        table.push(vec![k as f64, d.value]);
    }
    let control = separability_defect(&FnField::stationary(|p| p.x * p.z), 0.0, &s);
    out.check(Check::new("control_detected[xz]", control.value, Bound::Above { limit: 1e-6 }));
    table.push(vec![separable.len() as f64, control.value]);
    out.tables.push(table);
    Ok(out)
}
