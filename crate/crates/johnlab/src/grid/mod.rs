//! Voxel-domain core: occupancy grids with physical spacing, exact Euclidean
//! distance transform, ball/window set operations and connected components.
//!
//! Open-set semantics: a cell belongs to the domain iff its center does; the
//! closure is modeled as the one-cell dilation. A finite analysis window with
//! per-face "open at infinity" flags stands in for the one-point
//! compactification: an open face is treated as interior (not boundary) by the
//! distance transform and as an escape route toward infinity by connectivity
//! checks.

mod components;
mod edt;
mod io;

pub use components::{components, Adjacency, Labeling};
pub use edt::distance_transform;
pub use io::{read_vxg, write_vxg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell index, always length 3; axis 2 is fixed to 0 for 2D grids.
pub type Cell = [usize; 3];

/// Physical point, axis 2 fixed to 0.0 in 2D.
pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub shape: [usize; 3],
    pub spacing: f64,
    pub origin: [f64; 3],
}

impl GridSpec {
    pub fn new(dim: usize, shape: [usize; 3], spacing: f64, origin: [f64; 3]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Precondition(format!("dim must be 2 or 3, got {dim}")));
        }
        if spacing <= 0.0 {
            return Err(Error::Precondition("spacing must be positive".into()));
        }
        let mut shape = shape;
        if dim == 2 {
            shape[2] = 1;
        }
        if shape.iter().any(|&s| s == 0) {
            return Err(Error::Precondition("every shape entry must be >= 1".into()));
        }
        Ok(GridSpec { dim, shape, spacing, origin })
    }

    /// Cube window `[lo, hi]^dim` with `res` cells per axis.
    pub fn cube(dim: usize, res: usize, lo: f64, hi: f64) -> Result<Self> {
        let spacing = (hi - lo) / res as f64;
        let mut shape = [res, res, res];
        if dim == 2 {
            shape[2] = 1;
        }
        GridSpec::new(dim, shape, spacing, [lo, lo, if dim == 2 { 0.0 } else { lo }])
    }

    pub fn cell_count(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    /// Row-major linear index with axis 0 fastest.
    #[inline]
    pub fn linear(&self, c: Cell) -> usize {
        c[0] + self.shape[0] * (c[1] + self.shape[1] * c[2])
    }

    #[inline]
    pub fn unlinear(&self, i: usize) -> Cell {
        let x = i % self.shape[0];
        let r = i / self.shape[0];
        [x, r % self.shape[1], r / self.shape[1]]
    }

    /// Physical coordinate of the cell center.
    #[inline]
    pub fn center(&self, c: Cell) -> Point {
        let mut p = [0.0; 3];
        for a in 0..3 {
            p[a] = self.origin[a] + (c[a] as f64 + 0.5) * self.spacing;
        }
        if self.dim == 2 {
            p[2] = 0.0;
        }
        p
    }

    /// Cell whose center is nearest to a physical point (clamped to window).
    pub fn nearest_cell(&self, p: Point) -> Cell {
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            let f = (p[a] - self.origin[a]) / self.spacing - 0.5;
            let i = f.round().max(0.0) as usize;
            c[a] = i.min(self.shape[a] - 1);
        }
        c
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cell_count()).map(move |i| self.unlinear(i))
    }
}

pub fn dist2(a: Point, b: Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

pub fn dist(a: Point, b: Point) -> f64 {
    dist2(a, b).sqrt()
}

/// Binary occupancy grid with per-face openness flags.
///
/// `open_faces[axis][side]` (side 0 = low coordinate face) set means that
/// window face is NOT boundary of the domain: the set continues toward
/// infinity on that side.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelDomain {
    pub spec: GridSpec,
    pub occ: Vec<bool>,
    pub open_faces: [[bool; 2]; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictMode {
    /// Keep cells with center strictly inside the open ball.
    KeepInside,
    /// Drop cells with center inside the closed ball (models A \ closure(B)).
    KeepOutside,
    /// Drop cells with center strictly inside the open ball (models A \ B).
    KeepOutsideClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallMetric {
    Euclidean,
    Intrinsic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
    pub metric: BallMetric,
}

impl BallSpec {
    pub fn euclidean(center: Point, radius: f64) -> Self {
        BallSpec { center, radius, metric: BallMetric::Euclidean }
    }
}

impl VoxelDomain {
    pub fn empty(spec: GridSpec) -> Self {
        let n = spec.cell_count();
        VoxelDomain { spec, occ: vec![false; n], open_faces: [[false; 2]; 3] }
    }

    pub fn full(spec: GridSpec) -> Self {
        let n = spec.cell_count();
        VoxelDomain { spec, occ: vec![true; n], open_faces: [[false; 2]; 3] }
    }

    #[inline]
    pub fn occupied(&self, c: Cell) -> bool {
        self.occ[self.spec.linear(c)]
    }

    pub fn occupied_count(&self) -> usize {
        self.occ.iter().filter(|&&o| o).count()
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.spec.cells().filter(move |&c| self.occupied(c))
    }

    pub fn set(&mut self, c: Cell, v: bool) {
        let i = self.spec.linear(c);
        self.occ[i] = v;
    }

    /// True when the cell touches the given window face.
    #[inline]
    pub fn on_face(&self, c: Cell, axis: usize, side: usize) -> bool {
        if side == 0 {
            c[axis] == 0
        } else {
            c[axis] == self.spec.shape[axis] - 1
        }
    }

    /// True when the cell touches any open window face.
    pub fn on_open_face(&self, c: Cell) -> bool {
        for axis in 0..self.spec.dim {
            for side in 0..2 {
                if self.open_faces[axis][side] && self.on_face(c, axis, side) {
                    return true;
                }
            }
        }
        false
    }

    /// Restrict the domain by a Euclidean ball.
    pub fn restrict(&self, ball: &BallSpec, mode: RestrictMode) -> Result<VoxelDomain> {
        if ball.metric != BallMetric::Euclidean {
            return Err(Error::Precondition(
                "restrict takes Euclidean balls; intrinsic balls live in the metrics module".into(),
            ));
        }
        let r2 = ball.radius * ball.radius;
        let mut out = self.clone();
        for (i, o) in out.occ.iter_mut().enumerate() {
            if !*o {
                continue;
            }
            let d2 = dist2(self.spec.center(self.spec.unlinear(i)), ball.center);
            let keep = match mode {
                RestrictMode::KeepInside => d2 < r2,
                RestrictMode::KeepOutside => d2 > r2,
                RestrictMode::KeepOutsideClosed => d2 >= r2,
            };
            if !keep {
                *o = false;
            }
        }
        Ok(out)
    }

    /// Window minus the one-cell (Chebyshev) dilation of the occupied set;
    /// models the complementary domain of the closure. Open faces flip:
    /// the point at infinity is reachable through faces open on the input.
    pub fn complement_in_window(&self) -> VoxelDomain {
        let spec = self.spec.clone();
        let mut out = VoxelDomain::full(spec.clone());
        for axis in 0..3 {
            for side in 0..2 {
                out.open_faces[axis][side] = !self.open_faces[axis][side];
            }
        }
        if self.spec.dim == 2 {
            out.open_faces[2] = [false; 2];
        }
        let rng = |i: usize, s: usize| i.saturating_sub(1)..=(i + 1).min(s - 1);
        for c in self.spec.cells() {
            if !self.occupied(c) {
                continue;
            }
            for x in rng(c[0], spec.shape[0]) {
                for y in rng(c[1], spec.shape[1]) {
                    for z in rng(c[2], spec.shape[2]) {
                        out.set([x, y, z], false);
                    }
                }
            }
        }
        out
    }

    /// One-cell (Chebyshev) dilation of the occupied set: the rasterized
    /// closure. Open faces are kept as-is.
    pub fn dilate(&self) -> VoxelDomain {
        let mut out = self.complement_in_window();
        for o in out.occ.iter_mut() {
            *o = !*o;
        }
        out.open_faces = self.open_faces;
        out
    }
}

/// A non-negative scalar per cell in physical length units (holds d(x, dOmega)).
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    #[inline]
    pub fn at(&self, c: Cell) -> f64 {
        self.values[self.spec.linear(c)]
    }
}
