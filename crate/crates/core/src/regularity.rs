//! Sampled estimators of Lipschitz moduli, convexity defects, evenness and
//! separability.
//!
//! Every estimator returns the extreme value together with the sample that
//! attains it. Sample lists are generated up front from the seed, then
//! evaluated in parallel, so results do not depend on the thread schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hcalc::{self, HcalcError, ScalarField};
use crate::hgroup::{dist_left, dist_right, HorizontalElement, Point};
use crate::sampling::{SampleSpec, H_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Left,
    Right,
}

impl Metric {
    pub fn dist(self, p: Point, q: Point) -> f64 {
        match self {
            Metric::Left => dist_left(p, q),
            Metric::Right => dist_right(p, q),
        }
    }
}

/// Which side the horizontal displacement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `u(p·h) + u(p·h⁻¹) − 2u(p)`.
    LeftTranslate,
    /// `u(h·p) + u(h⁻¹·p) − 2u(p)`.
    RightInvariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvenMode {
    /// Compare `u(p)` with `u(p⁻¹)`.
    Origin,
    /// Compare `u(x, y, z)` with `u(x, y, −z)`.
    Vertical,
}

/// Extreme sampled value and where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum<W> {
    pub value: f64,
    pub witness: Option<W>,
    pub samples: usize,
    /// Samples discarded as degenerate.
    pub skipped: usize,
}

pub type LipReport = Extremum<(Point, Point)>;
pub type DefectReport = Extremum<(Point, HorizontalElement)>;
pub type PointReport = Extremum<Point>;

/// Pairs closer than this are skipped by the Lipschitz estimator.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

fn reduce<W: Copy>(samples: &[W], values: &[Option<f64>], maximize: bool) -> Extremum<W> {
    let mut best = Extremum {
        value: if maximize { f64::NEG_INFINITY } else { f64::INFINITY },
        witness: None,
        samples: samples.len(),
        skipped: 0,
    };
    for (w, v) in samples.iter().zip(values) {
        match v {
            None => best.skipped += 1,
            Some(v) => {
                let better = if maximize { *v > best.value } else { *v < best.value };
                if better || v.is_nan() && !best.value.is_nan() {
                    best.value = *v;
                    best.witness = Some(*w);
                }
            }
        }
    }
    best
}

/// Pairs for Lipschitz sampling: a prefix-stable mix of independent pairs,
/// near pairs offset by horizontal elements on either side, and pairs with
/// one point close to the origin.
pub fn sample_pairs(s: &SampleSpec) -> Vec<(Point, Point)> {
    let mut rng = s.sampler();
    (0..s.count)
        .map(|i| {
            let p = rng.point_in_gauge_ball(s.radius);
            match i % 4 {
                0 => (p, rng.point_in_gauge_ball(s.radius)),
                1 => (p, p * rng.horizontal(H_MIN, s.h_radius).to_point()),
                2 => (p, rng.horizontal(H_MIN, s.h_radius).to_point() * p),
                _ => (p, rng.small_element(1e-6 * s.radius, 1e-2 * s.radius)),
            }
        })
        .collect()
}

/// [`sample_pairs`] together with the pointwise inverses of every pair.
pub fn sample_pairs_symmetric(s: &SampleSpec) -> Vec<(Point, Point)> {
    let base = sample_pairs(s);
    let mirrored: Vec<_> = base.iter().map(|(p, q)| (p.inverse(), q.inverse())).collect();
    base.into_iter().chain(mirrored).collect()
}

/// Base points and horizontal displacements for convexity sampling.
pub fn sample_displacements(s: &SampleSpec) -> Vec<(Point, HorizontalElement)> {
    let mut rng = s.sampler();
    (0..s.count).map(|_| (rng.point_in_gauge_ball(s.radius), rng.horizontal(H_MIN, s.h_radius))).collect()
}

/// Adds `(p⁻¹, h)` for every `(p, h)`.
pub fn mirror_displacements(samples: &[(Point, HorizontalElement)]) -> Vec<(Point, HorizontalElement)> {
    samples.iter().copied().chain(samples.iter().map(|&(p, h)| (p.inverse(), h))).collect()
}

pub fn sample_points(s: &SampleSpec) -> Vec<Point> {
    let mut rng = s.sampler();
    (0..s.count).map(|_| rng.point_in_gauge_ball(s.radius)).collect()
}

pub fn lip_modulus<F: ScalarField + ?Sized>(u: &F, t: f64, metric: Metric, s: &SampleSpec) -> LipReport {
    lip_modulus_on(u, t, metric, &sample_pairs(s))
}

/// Largest `|u(p) − u(q)| / d(p, q)` over the given pairs.
pub fn lip_modulus_on<F: ScalarField + ?Sized>(u: &F, t: f64, metric: Metric, pairs: &[(Point, Point)]) -> LipReport {
    let values: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let d = metric.dist(p, q);
            (d >= DEGENERATE_DISTANCE).then(|| (u.value(p, t) - u.value(q, t)).abs() / d)
        })
        .collect();
    let mut r = reduce(pairs, &values, true);
    if r.witness.is_none() {
        r.value = 0.0;
    }
    r
}

pub fn second_difference<F: ScalarField + ?Sized>(u: &F, t: f64, side: Side, p: Point, h: HorizontalElement) -> f64 {
    let h = h.to_point();
    let (a, b) = match side {
        Side::LeftTranslate => (p * h, p * h.inverse()),
        Side::RightInvariant => (h * p, h.inverse() * p),
    };
    u.value(a, t) + u.value(b, t) - 2.0 * u.value(p, t)
}

pub fn hconvexity_defect<F: ScalarField + ?Sized>(u: &F, t: f64, side: Side, s: &SampleSpec) -> DefectReport {
    hconvexity_defect_on(u, t, side, &sample_displacements(s))
}

/// Smallest second difference over the given samples; negative values are
/// convexity violations.
pub fn hconvexity_defect_on<F: ScalarField + ?Sized>(
    u: &F,
    t: f64,
    side: Side,
    samples: &[(Point, HorizontalElement)],
) -> DefectReport {
    let values: Vec<Option<f64>> =
        samples.par_iter().map(|&(p, h)| Some(second_difference(u, t, side, p, h))).collect();
    reduce(samples, &values, false)
}

pub fn vconvexity_min_eig<F: ScalarField + ?Sized>(
    u: &F,
    t: f64,
    s: &SampleSpec,
    step: f64,
) -> Result<PointReport, HcalcError> {
    vconvexity_min_eig_on(u, t, &sample_points(s), step)
}

/// Smallest eigenvalue of the symmetrized horizontal Hessian over the points.
pub fn vconvexity_min_eig_on<F: ScalarField + ?Sized>(
    u: &F,
    t: f64,
    points: &[Point],
    step: f64,
) -> Result<PointReport, HcalcError> {
    let values: Result<Vec<Option<f64>>, HcalcError> =
        points.par_iter().map(|&p| hcalc::hhess(u, p, t, step).map(|h| Some(h.min_eig()))).collect();
    Ok(reduce(points, &values?, false))
}

pub fn evenness_defect<F: ScalarField + ?Sized>(u: &F, t: f64, mode: EvenMode, s: &SampleSpec) -> PointReport {
    let points = sample_points(s);
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|&p| {
            let mirror = match mode {
                EvenMode::Origin => p.inverse(),
                EvenMode::Vertical => p.reflect_vertical(),
            };
            Some((u.value(p, t) - u.value(mirror, t)).abs())
        })
        .collect();
    reduce(&points, &values, true)
}

pub fn separability_defect<F: ScalarField + ?Sized>(u: &F, t: f64, s: &SampleSpec) -> DefectReport {
    separability_defect_on(u, t, &sample_displacements(s))
}

/// Largest gap between left- and right-translated second differences.
pub fn separability_defect_on<F: ScalarField + ?Sized>(
    u: &F,
    t: f64,
    samples: &[(Point, HorizontalElement)],
) -> DefectReport {
    let values: Vec<Option<f64>> = samples
        .par_iter()
        .map(|&(p, h)| {
            let h = h.to_point();
            let left = u.value(p * h, t) + u.value(p * h.inverse(), t);
            let right = u.value(h * p, t) + u.value(h.inverse() * p, t);
            Some((left - right).abs())
        })
        .collect();
    reduce(samples, &values, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcalc::FnField;
    use crate::oracles::{CatalogField, TransportDatum};

    fn spec(count: usize) -> SampleSpec {
        SampleSpec::new(77, count, 2.0, 1.0)
    }

    #[test]
    fn gauge_is_right_one_lipschitz() {
        let u = FnField::stationary(|p| p.gauge());
        let r = lip_modulus(&u, 0.0, Metric::Right, &spec(10_000));
        assert!(r.value <= 1.0 + 1e-12 && r.value >= 0.99, "{r:?}");
    }

    #[test]
    fn constant_has_zero_modulus() {
        let u = FnField::stationary(|_| 4.0);
        assert_eq!(lip_modulus(&u, 0.0, Metric::Left, &spec(100)).value, 0.0);
    }

    #[test]
    fn modulus_grows_with_count() {
        let u = FnField::stationary(|p| p.x * p.z + p.y);
        let a = lip_modulus(&u, 0.0, Metric::Left, &spec(100)).value;
        let b = lip_modulus(&u, 0.0, Metric::Left, &spec(1000)).value;
        assert!(b >= a);
    }

    #[test]
    fn transported_gauge_left_witness() {
        let u = CatalogField::Transport { h0: [1.0, 1.0], datum: TransportDatum::Gauge };
        let eps: f64 = 0.1;
        let pair = (Point::new(-1.0 - eps, -1.0 + eps, -eps), Point::new(-1.0, -1.0, 0.0));
        let r = lip_modulus_on(&u, 1.0, Metric::Left, &[pair]);
        let want = (4.0 * eps.powi(4) + 64.0 * eps * eps).powf(0.25) / (2f64.sqrt() * eps);
        assert!((r.value - want).abs() < 1e-10, "{} {want}", r.value);
        assert!((want - 6.33).abs() < 5e-3);
    }

    #[test]
    fn quartic_convexity_examples() {
        let u = FnField::stationary(|p| p.x * p.x * p.y * p.y + 2.0 * p.z * p.z);
        let r = hconvexity_defect(&u, 0.0, Side::LeftTranslate, &spec(5000));
        assert!(r.value >= 0.0, "{r:?}");
        let d = second_difference(
            &u,
            0.0,
            Side::LeftTranslate,
            Point::new(1.0, 1.0, 0.0),
            HorizontalElement::new(1.0, 0.0),
        );
        assert_eq!(d, 3.0);
        let affine = FnField::stationary(|p| 2.0 * p.x - 3.0 * p.y + 1.0);
        let r = hconvexity_defect(&affine, 0.0, Side::LeftTranslate, &spec(1000));
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn transport_left_violation_right_preservation() {
        let u = CatalogField::Transport { h0: [1.0, 1.0], datum: TransportDatum::Quartic };
        let left = hconvexity_defect(&u, 1.0, Side::LeftTranslate, &spec(5000));
        assert!(left.value < 0.0);
        for t in [0.5, 1.0, 2.0] {
            let right = hconvexity_defect(&u, t, Side::RightInvariant, &spec(5000));
            assert!(right.value >= -1e-10, "{t} {right:?}");
        }
    }

    #[test]
    fn vconvexity_examples() {
        let r2 = FnField::stationary(|p| p.x * p.x + p.y * p.y);
        let r = vconvexity_min_eig(&r2, 0.0, &spec(200), 1e-3).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
        let heat = CatalogField::Heat1;
        assert!(vconvexity_min_eig(&heat, 0.5, &spec(2000), 1e-3).unwrap().value >= -1e-6);
        let tr = CatalogField::Transport { h0: [1.0, 1.0], datum: TransportDatum::Quartic };
        let mut pts = sample_points(&spec(100));
        pts.push(Point::new(1.0, 1.0, 0.0));
        assert!(vconvexity_min_eig_on(&tr, 1.0, &pts, 1e-3).unwrap().value <= -8.0 + 1e-3);
    }

    #[test]
    fn evenness_examples() {
        let g = FnField::stationary(|p| p.gauge());
        assert_eq!(evenness_defect(&g, 0.0, EvenMode::Origin, &spec(500)).value, 0.0);
        assert_eq!(evenness_defect(&g, 0.0, EvenMode::Vertical, &spec(500)).value, 0.0);
        let z = FnField::stationary(|p| p.z);
        let r = evenness_defect(&z, 0.0, EvenMode::Origin, &spec(500));
        let zmax = sample_points(&spec(500)).iter().map(|p| p.z.abs()).fold(0.0, f64::max);
        assert!((r.value - 2.0 * zmax).abs() < 1e-15);
        for mode in [EvenMode::Origin, EvenMode::Vertical] {
            assert_eq!(evenness_defect(&CatalogField::Heat1, 0.3, mode, &spec(500)).value, 0.0);
        }
    }

    #[test]
    fn separability_examples() {
        let a = FnField::stationary(|p| p.x * p.x + p.z * p.z);
        assert!(separability_defect(&a, 0.0, &spec(1000)).value < 1e-12);
        let b = FnField::stationary(|p| p.x * p.x * p.y * p.y + 2.0 * p.z * p.z);
        assert!(separability_defect(&b, 0.0, &spec(1000)).value < 1e-12);
        assert!(separability_defect(&CatalogField::Heat1, 0.0, &spec(1000)).value < 1e-12);
        let c = FnField::stationary(|p| p.x * p.z);
        assert!(separability_defect(&c, 0.0, &spec(1000)).value > 1e-3);
    }

    #[test]
    fn parallel_results_are_schedule_independent() {
        let u = FnField::stationary(|p| (p.x * 3.0).sin() + p.z);
        let a = lip_modulus(&u, 0.0, Metric::Left, &spec(3000));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| lip_modulus(&u, 0.0, Metric::Left, &spec(3000)));
        assert_eq!(a, b);
    }
}
