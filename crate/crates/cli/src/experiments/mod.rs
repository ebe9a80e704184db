//! The experiment catalog.

mod analysis;
mod geometry;
mod pde;

use crate::params::{ParamSpec, Params};
use crate::report::Outcome;
use crate::OutOfRange;

pub type Runner = fn(&Params) -> anyhow::Result<Outcome>;

/// A named experiment with its declared parameters.
pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [ParamSpec],
    pub run: Runner,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment").field("name", &self.name).finish_non_exhaustive()
    }
}

static CATALOG: &[Experiment] = &[
    geometry::METRIC_GAP,
    geometry::HOLDER_BRIDGE,
    geometry::CC_ANCHORS,
    geometry::GRADIENT_NORM,
    pde::LIP_PRESERVE_RIGHT,
    pde::LIP_FAIL_LEFT,
    analysis::HCONVEX_COUNTEREXAMPLE,
    pde::RIGHT_HCONVEX_PRESERVE,
    pde::HEAT_CONVERGENCE,
    pde::TRANSPORT_CONVERGENCE,
    pde::HOPFLAX_LIP,
    analysis::ORACLE_RESIDUALS,
    analysis::BARRIER_CHECK,
    analysis::DOUBLING_IDENTITIES,
    analysis::PENALIZATION_BOUNDS,
    geometry::EVENNESS_EQUIVALENCE,
    geometry::SEPARABILITY_IDENTITY,
];

pub fn catalog() -> &'static [Experiment] {
    CATALOG
}

pub fn find(name: &str) -> Option<&'static Experiment> {
    CATALOG.iter().find(|e| e.name == name)
}

fn require(ok: bool, reason: impl Into<String>) -> anyhow::Result<()> {
    if ok {
        Ok(())
    } else {
        Err(OutOfRange(reason.into()).into())
    }
}

fn positive(params: &Params, names: &[&str]) -> anyhow::Result<()> {
    for name in names {
        require(params.real(name) > 0.0, format!("--{name} must be positive"))?;
    }
    Ok(())
}

fn nonzero(params: &Params, names: &[&str]) -> anyhow::Result<()> {
    for name in names {
        require(params.count(name) > 0, format!("--{name} must be at least 1"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_defaults_parse() {
        for (i, e) in CATALOG.iter().enumerate() {
            assert!(CATALOG[..i].iter().all(|o| o.name != e.name), "duplicate {}", e.name);
            Params::resolve(e.params, &Default::default()).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
        assert_eq!(CATALOG.len(), 17);
    }
}
