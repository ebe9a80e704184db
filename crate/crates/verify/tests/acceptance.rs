//! Acceptance suite: every criterion runs its experiment with explicit
//! parameters and re-judges the measured values against tolerances pinned
//! here. Prints one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use hvisc::{run_experiment, ExperimentConfig, Summary};

/// Collects the sub-checks of one criterion.
#[derive(Default)]
struct Judge {
    passed: bool,
    parts: Vec<String>,
    errors: Vec<String>,
}

impl Judge {
    fn new() -> Self {
        Judge { passed: true, ..Default::default() }
    }

    fn record(&mut self, label: &str, v: f64, ok: bool, bound: String) {
        self.passed &= ok;
        let mark = if ok { "" } else { " !!" };
        self.parts.push(format!("{label}={v:.6e} ({bound}){mark}"));
    }

    fn at_most(&mut self, label: &str, v: f64, limit: f64) {
        self.record(label, v, v <= limit, format!("<= {limit:e}"));
    }

    fn at_least(&mut self, label: &str, v: f64, limit: f64) {
        self.record(label, v, v >= limit, format!(">= {limit:e}"));
    }

    fn above(&mut self, label: &str, v: f64, limit: f64) {
        self.record(label, v, v > limit, format!("> {limit:e}"));
    }

    fn below(&mut self, label: &str, v: f64, limit: f64) {
        self.record(label, v, v < limit, format!("< {limit:e}"));
    }

    fn near(&mut self, label: &str, v: f64, target: f64, tol: f64) {
        self.record(label, v, (v - target).abs() <= tol, format!("{target} ± {tol:e}"));
    }

    fn within(&mut self, label: &str, v: f64, lo: f64, hi: f64) {
        self.record(label, v, (lo..=hi).contains(&v), format!("in [{lo}, {hi}]"));
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        self.errors.push(msg);
    }

    /// Runs an experiment; failures to run count against the criterion.
    fn run(&mut self, name: &str, params: &[(&str, &str)]) -> Option<Summary> {
        let cfg = params.iter().fold(ExperimentConfig::new(name), |c, (k, v)| c.param(*k, v));
        match run_experiment(&cfg) {
            Ok(s) => Some(s),
            Err(e) => {
                self.fail(format!("{name}: {e:#}"));
                None
            }
        }
    }

    fn value(&mut self, s: &Summary, check: &str) -> f64 {
        match s.check(check) {
            Some(c) => c.measured,
            None => {
                self.fail(format!("{}: no check `{check}`", s.experiment));
                f64::NAN
            }
        }
    }
}

fn metric_gap(j: &mut Judge) {
    let Some(s) = j.run("metric-gap", &[("eps", "0.1")]) else { return };
    let (l, r) = (j.value(&s, "d_left4[eps=0.1]"), j.value(&s, "d_right4[eps=0.1]"));
    j.near("d_L^4", l, 4.0e-4, 1e-12);
    j.near("d_R^4", r, 0.6404, 1e-12);
}

fn holder_bridge(j: &mut Judge) {
    let rho = 2.0f64;
    let c = (1.0 + 16.0 * (0.25 + rho).powi(2)).powf(0.25);
    let Some(s) = j.run("holder-bridge", &[("samples", "100000"), ("rho", "2")]) else { return };
    if s.check("violations").and_then(|v| v.note.as_deref()) != Some(format!("C = {c}").as_str()) {
        j.fail(format!("holder constant differs from {c}"));
    }
    let (viol, worst) = (j.value(&s, "violations"), j.value(&s, "max_ratio"));
    j.at_most("violations", viol, 0.0);
    j.at_most("max d_L/(C d_R^1/2)", worst, 1.0);
}

fn cc_anchors(j: &mut Judge) {
    let Some(s) = j.run("cc-anchors", &[("segments", "256"), ("samples", "100")]) else { return };
    let (planar, vertical, dil) = (j.value(&s, "planar"), j.value(&s, "vertical_vs_oracle"), j.value(&s, "dilation"));
    j.near("d_CC(0,(3,4,0))", planar, 5.0, 0.0);
    j.at_most("vertical rel", vertical, 5e-3);
    j.at_most("dilation rel", dil, 1e-6);
}

fn gradient_norm(j: &mut Judge) {
    let Some(s) = j.run("gradient-norm", &[("samples", "1000")]) else { return };
    let v = j.value(&s, "relative_error");
    j.at_most("rel", v, 1e-10);
}

fn doubling(j: &mut Judge) {
    let Some(s) = j.run("doubling-identities", &[("trials", "10000")]) else { return };
    let v = j.value(&s, "vanishing");
    j.at_most("vanishing/scale", v, 1e-10);
    for name in ["squared_ratio", "squared_ratio_two_point", "cross_ratio"] {
        let v = j.value(&s, name);
        j.at_most(name, v, 1e-8);
    }
}

fn oracle_residuals(j: &mut Judge) {
    let Some(s) = j.run("oracle-residuals", &[("samples", "100")]) else { return };
    for name in ["heat1", "heat2", "transport"] {
        let v = j.value(&s, name);
        j.at_most(name, v, 1e-9);
    }
    let v = j.value(&s, "mcf");
    j.at_most("mcf", v, 1e-7);
}

fn heat_convergence(j: &mut Judge) {
    let Some(s) = j.run("heat-convergence", &[("deltas", "0.05,0.025"), ("t", "0.1")]) else { return };
    let (coarse, fine) = (j.value(&s, "error[delta=0.05]"), j.value(&s, "error[delta=0.025]"));
    j.record("error(0.05)", coarse, coarse.is_finite(), "finite".into());
    j.record("error(0.025)", fine, fine.is_finite(), "finite".into());
    j.within("reduction", coarse / fine, 1.6, 2.6);
}

fn lipschitz_pair(j: &mut Judge) {
    if let Some(s) = j.run("lip-preserve-right", &[("delta", "0.025"), ("t", "0.25")]) {
        let v = j.value(&s, "right_modulus");
        j.at_most("RIGHT modulus", v, 1.1);
    }
    if let Some(s) = j.run("lip-fail-left", &[("delta", "0.025"), ("t", "0.25")]) {
        let v = j.value(&s, "left_modulus");
        j.above("LEFT witness modulus", v, 3.0);
        let eps = 0.1f64;
        let formula = (4.0 * eps.powi(4) + 64.0 * eps * eps).powf(0.25) / (2f64.sqrt() * eps);
        let v = j.value(&s, "closed_form_witness[eps=0.1,t=1]");
        j.near("closed-form ratio", v, formula, 1e-10);
    }
}

fn hconvex_counterexample(j: &mut Judge) {
    let Some(s) = j.run("hconvex-counterexample", &[]) else { return };
    let (dev, eig, defect) =
        (j.value(&s, "hessian_entries"), j.value(&s, "min_eigenvalue"), j.value(&s, "sampled_defect"));
    j.at_most("|H - Sym2(8,16,8)|", dev, 1e-8);
    j.near("min eigenvalue", eig, -8.0, 1e-8);
    j.below("LEFT_TRANSLATE defect", defect, 0.0);
}

fn right_hconvex(j: &mut Judge) {
    let delta = 0.05;
    let Some(s) = j.run("right-hconvex-preserve", &[("delta", "0.05"), ("times", "0.5,1,2")]) else { return };
    for t in ["0.5", "1", "2"] {
        let v = j.value(&s, &format!("closed_form[t={t}]"));
        j.at_least(&format!("closed form t={t}"), v, -1e-10);
    }
    let v = j.value(&s, "numerical");
    j.at_least("numerical t=0.25", v, -10.0 * delta * delta);
}

fn barrier(j: &mut Judge) {
    let Some(s) = j.run("barrier-check", &[("samples", "10000")]) else { return };
    for name in ["violations_above_threshold", "violations_doubled_threshold"] {
        let v = j.value(&s, name);
        j.at_most(name, v, 0.0);
    }
    let v = j.value(&s, "violations_at_zero_alpha");
    j.at_least("violations_at_zero_alpha", v, 1.0);
}

fn hopf_lax(j: &mut Judge) {
    let Some(s) = j.run("hopflax-lip", &[("t", "0.5")]) else { return };
    let origin = j.value(&s, "origin_value");
    j.near("u(0,0.5)", origin, -0.25, 1e-3);
    let lip = j.value(&s, "left_modulus");
    j.at_most("LEFT modulus", lip, 1.05);
    let agree = j.value(&s, "solver_agreement");
    j.at_most("solver agreement", agree, 5e-2);
}

fn equivalences(j: &mut Judge) {
    if let Some(s) = j.run("evenness-equivalence", &[]) {
        let v = j.value(&s, "gauge_modulus_gap");
        j.at_most("LEFT/RIGHT gap", v, 0.02);
    }
    if let Some(s) = j.run("separability-identity", &[]) {
        for name in ["defect[sin(x)cos(y)+z^3]", "defect[x^2y+exp(z)]"] {
            let v = j.value(&s, name);
            j.at_most(name, v, 1e-12);
        }
    }
}

type Criterion = (&'static str, fn(&mut Judge));

const CRITERIA: &[Criterion] = &[
    ("metric gap", metric_gap),
    ("holder bridge", holder_bridge),
    ("cc anchors", cc_anchors),
    ("gradient norm identity", gradient_norm),
    ("doubling identities", doubling),
    ("oracle residuals", oracle_residuals),
    ("solver convergence", heat_convergence),
    ("lipschitz preservation and failure", lipschitz_pair),
    ("h-convexity counterexample", hconvex_counterexample),
    ("right-invariant h-convexity", right_hconvex),
    ("barrier", barrier),
    ("hopf-lax", hopf_lax),
    ("evenness and separability", equivalences),
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (title, criterion)) in CRITERIA.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| title.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let mut judge = Judge::new();
        criterion(&mut judge);
        let status = if judge.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!judge.passed);
        println!(
            "{status} {:>2} {title} [{:.1}s]: {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            judge.parts.iter().chain(&judge.errors).cloned().collect::<Vec<_>>().join("; ")
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
