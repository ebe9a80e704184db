use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::hcalc::ScalarField;
use crate::hgroup::Point;

/// Uniform Cartesian box with a halo of extra nodes on every side.
///
/// Interior nodes cover `[lo, hi]`; halo nodes extend it by `halo[axis]`
/// cells and receive boundary data instead of scheme updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Point,
    pub hi: Point,
    /// Horizontal spacing, shared by `x` and `y`.
    pub dx: f64,
    pub dz: f64,
    /// Interior cell counts per axis.
    pub cells: [usize; 3],
    pub halo: [usize; 3],
}

impl GridSpec {
    /// Grid with horizontal spacing `delta` whose halo is wide enough for
    /// group-flow stencils of length up to `reach`.
    ///
    /// The vertical spacing is `delta · max(|x|, |y|) / 2` over the box,
    /// shrunk so that it divides the box height.
    pub fn new(lo: Point, hi: Point, delta: f64, reach: f64) -> Result<Self, SolverError> {
        if !(delta > 0.0) || !(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z) {
            return Err(SolverError::InvalidGrid("box must be nonempty and delta positive"));
        }
        let cells_x = ((hi.x - lo.x) / delta).round() as usize;
        let cells_y = ((hi.y - lo.y) / delta).round() as usize;
        if cells_x == 0 || cells_y == 0 {
            return Err(SolverError::InvalidGrid("delta larger than the box"));
        }
        if ((hi.x - lo.x) - cells_x as f64 * delta).abs() > 1e-9 * delta
            || ((hi.y - lo.y) - cells_y as f64 * delta).abs() > 1e-9 * delta
        {
            return Err(SolverError::InvalidGrid("delta must divide the horizontal box"));
        }
        let m = lo.x.abs().max(hi.x.abs()).max(lo.y.abs()).max(hi.y.abs()).max(delta);
        let dz_target = 0.5 * delta * m;
        let cells_z = ((hi.z - lo.z) / dz_target).ceil().max(1.0) as usize;
        let dz = (hi.z - lo.z) / cells_z as f64;
        let reach = reach.max(delta);
        let halo_xy = ((reach / delta).ceil() as usize + 1).max(2);
        // the flows shear z by at most reach·|(x, y)|/2 at the edge of the halo
        let mh = m + halo_xy as f64 * delta;
        let shear = 0.5 * reach * std::f64::consts::SQRT_2 * mh;
        let halo_z = ((shear / dz).ceil() as usize + 1).max(2);
        Ok(GridSpec { lo, hi, dx: delta, dz, cells: [cells_x, cells_y, cells_z], halo: [halo_xy, halo_xy, halo_z] })
    }

    /// Total node counts per axis, halo included.
    pub fn dims(&self) -> [usize; 3] {
        [
            self.cells[0] + 1 + 2 * self.halo[0],
            self.cells[1] + 1 + 2 * self.halo[1],
            self.cells[2] + 1 + 2 * self.halo[2],
        ]
    }

    pub fn len(&self) -> usize {
        let [a, b, c] = self.dims();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the first halo node.
    pub fn origin(&self) -> Point {
        Point::new(
            self.lo.x - self.halo[0] as f64 * self.dx,
            self.lo.y - self.halo[1] as f64 * self.dx,
            self.lo.z - self.halo[2] as f64 * self.dz,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [nx, ny, _] = self.dims();
        i + nx * (j + ny * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims();
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Point {
        let [i, j, k] = self.coords(idx);
        let o = self.origin();
        Point::new(o.x + i as f64 * self.dx, o.y + j as f64 * self.dx, o.z + k as f64 * self.dz)
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..3).all(|a| c[a] >= self.halo[a] && c[a] <= self.halo[a] + self.cells[a])
    }

    /// Interior node lying in the middle half of the box on every axis.
    pub fn is_inner_half(&self, idx: usize) -> bool {
        let p = self.node(idx);
        let mid = |lo: f64, hi: f64, v: f64| {
            let q = 0.25 * (hi - lo);
            v >= lo + q - 1e-12 && v <= hi - q + 1e-12
        };
        mid(self.lo.x, self.hi.x, p.x) && mid(self.lo.y, self.hi.y, p.y) && mid(self.lo.z, self.hi.z, p.z)
    }

    /// Whether `p` lies in the middle half of the box.
    pub fn inner_half_contains(&self, p: Point) -> bool {
        let mid = |lo: f64, hi: f64, v: f64| {
            let q = 0.25 * (hi - lo);
            v >= lo + q && v <= hi - q
        };
        mid(self.lo.x, self.hi.x, p.x) && mid(self.lo.y, self.hi.y, p.y) && mid(self.lo.z, self.hi.z, p.z)
    }

    pub(crate) fn lattice(&self) -> Lattice {
        let o = self.origin();
        let dims = self.dims();
        Lattice {
            origin: [o.x, o.y, o.z],
            inv: [1.0 / self.dx, 1.0 / self.dx, 1.0 / self.dz],
            top: dims.map(|d| (d - 1) as f64),
            dims,
        }
    }
}

/// Precomputed geometry for fast trilinear lookups.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lattice {
    origin: [f64; 3],
    inv: [f64; 3],
    top: [f64; 3],
    pub(crate) dims: [usize; 3],
}

impl Lattice {
    /// Trilinear interpolation of `values` at `p`, or `None` off the grid.
    #[inline]
    pub(crate) fn interpolate(&self, values: &[f64], p: Point) -> Option<f64> {
        let c = [p.x, p.y, p.z];
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let f = (c[a] - self.origin[a]) * self.inv[a];
            if !(f >= -1e-9 && f <= self.top[a] + 1e-9) {
                return None;
            }
            let v = f.clamp(0.0, self.top[a]);
            let b = (v as usize).min(self.dims[a] - 2);
            base[a] = b;
            frac[a] = v - b as f64;
        }
        let (sy, sz) = (self.dims[0], self.dims[0] * self.dims[1]);
        let i0 = base[0] + sy * base[1] + sz * base[2];
        let [fx, fy, fz] = frac;
        let lerp = |i: usize| values[i] + fx * (values[i + 1] - values[i]);
        let c0 = lerp(i0) + fy * (lerp(i0 + sy) - lerp(i0));
        let c1 = lerp(i0 + sz) + fy * (lerp(i0 + sz + sy) - lerp(i0 + sz));
        Some(c0 + fz * (c1 - c0))
    }
}

type BoundarySource = Arc<dyn ScalarField>;

/// Grid values plus the data needed to refresh the halo.
#[derive(Clone)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub time: f64,
    /// Dirichlet data for halo nodes; `None` keeps the halo frozen.
    pub boundary_source: Option<BoundarySource>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("spec", &self.spec)
            .field("time", &self.time)
            .field("nodes", &self.values.len())
            .field("boundary_source", &self.boundary_source.is_some())
            .finish()
    }
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.time == other.time && self.values == other.values
    }
}

impl GridFunction {
    /// Samples `u(·, t)` at every node, halo included.
    pub fn sample<F: ScalarField + ?Sized>(spec: GridSpec, u: &F, t: f64) -> Self {
        use rayon::prelude::*;
        let values = (0..spec.len()).into_par_iter().map(|i| u.value(spec.node(i), t)).collect();
        GridFunction { spec, values, time: t, boundary_source: None }
    }

    pub fn with_boundary(mut self, source: BoundarySource) -> Self {
        self.boundary_source = Some(source);
        self
    }

    /// Trilinear interpolation at an arbitrary point of the box plus halo.
    pub fn interpolate(&self, p: Point) -> Result<f64, SolverError> {
        self.spec.lattice().interpolate(&self.values, p).ok_or(SolverError::OutOfDomain { point: p })
    }

    /// Largest `|value − u(node, time)|` over nodes selected by `keep`.
    pub fn max_error<F: ScalarField + ?Sized>(&self, u: &F, keep: impl Fn(usize) -> bool + Sync) -> f64 {
        use rayon::prelude::*;
        (0..self.values.len())
            .into_par_iter()
            .filter(|&i| keep(i))
            .map(|i| (self.values[i] - u.value(self.spec.node(i), self.time)).abs())
            .reduce(|| 0.0, f64::max)
    }
}

/// Interpolated view of a grid function, usable wherever a field is expected.
/// Points outside the grid evaluate to NaN.
#[derive(Debug, Clone)]
pub struct GridField(pub Arc<GridFunction>);

impl ScalarField for GridField {
    fn value(&self, p: Point, _t: f64) -> f64 {
        self.0.interpolate(p).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcalc::FnField;

    fn unit_box() -> (Point, Point) {
        (Point::new(-1.0, -1.0, -1.0), Point::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn spacing_rule() {
        let (lo, hi) = unit_box();
        let g = GridSpec::new(lo, hi, 0.05, 0.05).unwrap();
        assert_eq!(g.cells, [40, 40, 80]);
        assert!((g.dz - 0.025).abs() < 1e-15);
        assert!(g.halo.iter().all(|&h| h >= 2));
        assert!(GridSpec::new(lo, hi, 0.3, 0.3).is_err());
    }

    #[test]
    fn trilinear_reproduces_affine_fields() {
        let (lo, hi) = unit_box();
        let spec = GridSpec::new(lo, hi, 0.1, 0.1).unwrap();
        let u = FnField::stationary(|p| 1.0 + 2.0 * p.x - 3.0 * p.y + 0.5 * p.z);
        let g = GridFunction::sample(spec, &u, 0.0);
        for p in [Point::new(0.123, -0.456, 0.789), Point::new(1.05, 0.999, -1.01), lo, hi] {
            assert!((g.interpolate(p).unwrap() - u.value(p, 0.0)).abs() < 1e-12);
        }
        assert!(matches!(g.interpolate(Point::new(5.0, 0.0, 0.0)), Err(SolverError::OutOfDomain { .. })));
    }

    #[test]
    fn interior_and_inner_half() {
        let (lo, hi) = unit_box();
        let spec = GridSpec::new(lo, hi, 0.25, 0.25).unwrap();
        let interior = (0..spec.len()).filter(|&i| spec.is_interior(i)).count();
        assert_eq!(interior, 9 * 9 * (spec.cells[2] + 1));
        let idx = spec.index(spec.halo[0] + 4, spec.halo[1] + 4, spec.halo[2] + spec.cells[2] / 2);
        assert!(spec.is_inner_half(idx));
        assert_eq!(spec.node(idx), Point::new(0.0, 0.0, 0.0));
    }
}
