//! Typed experiment parameters parsed from `key = value` strings.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    Count,
    /// Comma-separated reals.
    Reals,
}

/// One declared parameter of an experiment.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub help: &'static str,
}

impl ParamSpec {
    pub const fn real(name: &'static str, default: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: ParamKind::Real, default, help }
    }

    pub const fn count(name: &'static str, default: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: ParamKind::Count, default, help }
    }

    pub const fn reals(name: &'static str, default: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: ParamKind::Reals, default, help }
    }
}

/// Every experiment accepts a seed.
pub const SEED: ParamSpec = ParamSpec::count("seed", "0", "seed of every sampled quantity");

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Real(f64),
    Count(u64),
    Reals(Vec<f64>),
}

impl Value {
    fn parse(kind: ParamKind, raw: &str) -> Result<Self, String> {
        let real = |s: &str| {
            let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{s}` is not finite"))
            }
        };
        match kind {
            ParamKind::Real => real(raw).map(Value::Real),
            ParamKind::Count => {
                raw.trim().parse().map(Value::Count).map_err(|_| format!("`{raw}` is not a nonnegative integer"))
            }
            ParamKind::Reals => {
                let v = raw.split(',').map(real).collect::<Result<Vec<_>, _>>()?;
                if v.is_empty() {
                    Err("empty list".into())
                } else {
                    Ok(Value::Reals(v))
                }
            }
        }
    }

    fn canonical(&self) -> String {
        match self {
            Value::Real(v) => v.to_string(),
            Value::Count(n) => n.to_string(),
            Value::Reals(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        }
    }
}

/// Resolved parameters: every declared key has a parsed value.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<&'static str, Value>,
}

impl Params {
    /// Parses `raw` against `specs` (plus the seed), filling in defaults.
    pub fn resolve(specs: &[ParamSpec], raw: &BTreeMap<String, String>) -> Result<Self, String> {
        let all = || specs.iter().chain(std::iter::once(&SEED));
        if let Some(unknown) = raw.keys().find(|k| !all().any(|s| s.name == k.as_str())) {
            return Err(format!("unknown parameter `{unknown}`"));
        }
        let mut values = BTreeMap::new();
        for spec in all() {
            let text = raw.get(spec.name).map_or(spec.default, String::as_str);
            let v = Value::parse(spec.kind, text).map_err(|e| format!("--{}: {e}", spec.name))?;
            values.insert(spec.name, v);
        }
        Ok(Params { values })
    }

    fn get(&self, name: &str) -> &Value {
        self.values.get(name).unwrap_or_else(|| panic!("parameter `{name}` is not declared"))
    }

    pub fn real(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Real(v) => *v,
            other => panic!("parameter `{name}` is {other:?}, not a real"),
        }
    }

    pub fn count(&self, name: &str) -> usize {
        match self.get(name) {
            Value::Count(n) => *n as usize,
            other => panic!("parameter `{name}` is {other:?}, not a count"),
        }
    }

    pub fn reals(&self, name: &str) -> &[f64] {
        match self.get(name) {
            Value::Reals(v) => v,
            other => panic!("parameter `{name}` is {other:?}, not a list"),
        }
    }

    pub fn seed(&self) -> u64 {
        match self.get(SEED.name) {
            Value::Count(n) => *n,
            _ => unreachable!("the seed is a count"),
        }
    }

    /// Canonical string form of every value, as recorded in summaries.
    pub fn canonical(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(k, v)| (k.to_string(), v.canonical())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: &[ParamSpec] = &[
        ParamSpec::real("eps", "0.1", ""),
        ParamSpec::count("samples", "10", ""),
        ParamSpec::reals("deltas", "0.05,0.025", ""),
    ];

    fn raw(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_overrides() {
        let p = Params::resolve(SPECS, &raw(&[("samples", "42"), ("seed", "7")])).unwrap();
        assert_eq!(p.real("eps"), 0.1);
        assert_eq!(p.count("samples"), 42);
        assert_eq!(p.reals("deltas"), &[0.05, 0.025]);
        assert_eq!(p.seed(), 7);
        assert_eq!(p.canonical()["deltas"], "0.05,0.025");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Params::resolve(SPECS, &raw(&[("nope", "1")])).unwrap_err().contains("unknown"));
        assert!(Params::resolve(SPECS, &raw(&[("eps", "abc")])).is_err());
        assert!(Params::resolve(SPECS, &raw(&[("eps", "inf")])).is_err());
        assert!(Params::resolve(SPECS, &raw(&[("samples", "-3")])).is_err());
        assert!(Params::resolve(SPECS, &raw(&[("deltas", "0.1,,0.2")])).is_err());
    }
}
