//! Scene construction: a small CSG language over implicit solids, a
//! rasterizer onto voxel grids, preset scenes, and snapping of marker
//! polylines onto cubical 1-skeletons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dist, GridSpec, Point, VoxelDomain};
use crate::homology::{pack, ChainVector, CubicalComplex};

mod presets;

pub use presets::{
    scene_blob, scene_comb, scene_cusp, scene_cusp_profile, scene_disk, scene_horseshoe,
    scene_mushroom, scene_mushroom_ball, scene_pinched_torus, scene_slit_disk, scene_trumpet,
    scene_trumpet_wall, scene_truncated_at, trumpet_truncation, MushroomParams,
    PinchedTorusParams,
};

pub const SCENE_SCHEMA: &str = "scene/1";

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn scale3(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: Point) -> Point {
    let n = norm(a);
    scale3(a, 1.0 / n)
}

/// Solid CSG node with exact pointwise membership.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneNode {
    Ball {
        center: Point,
        radius: f64,
    },
    Box {
        lo: Point,
        hi: Point,
    },
    /// Points with normal . p > offset.
    HalfSpace {
        normal: Point,
        offset: f64,
    },
    SolidTorus {
        center: Point,
        axis: Point,
        major: f64,
        minor: f64,
    },
    /// Shell of thickness tau around the torus surface; an optional angular
    /// sector (measured in the plane normal to `axis` from the reference
    /// direction `sector_from`) keeps only part of the ring.
    TorusShell {
        center: Point,
        axis: Point,
        major: f64,
        minor: f64,
        thickness: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sector: Option<Sector>,
    },
    /// Open tapered tube wall around the segment a-b: distance to the
    /// centerline within thickness/2 of the linearly interpolated radius.
    /// No end caps, so a full tube is an annular cylinder (a ring class).
    ConeTube {
        a: Point,
        b: Point,
        r_a: f64,
        r_b: f64,
        thickness: f64,
    },
    /// Cusp of revolution about the y axis: rho = sqrt(x^2 + z^2) <= 1 and
    /// |y| < (1 - rho)^2.
    Cusp,
    /// Planar profile of the cusp: 0 <= x <= 1 and |y| < (1 - x)^2.
    CuspProfile,
    Union {
        children: Vec<SceneNode>,
    },
    Difference {
        base: Box<SceneNode>,
        cut: Box<SceneNode>,
    },
    /// child evaluated in a frame moved by `translate`, scaled by `scale`
    /// and rotated/reflected by a signed axis permutation: world axis a
    /// carries child axis |perm[a]|-1 with the sign of perm[a].
    Transform {
        child: Box<SceneNode>,
        translate: Point,
        scale: f64,
        perm: [i8; 3],
    },
}

/// Angular restriction of a torus shell: keep angles in [from, to]
/// (radians, measured from `reference` toward axis x reference).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sector {
    pub reference: Point,
    pub from: f64,
    pub to: f64,
}

impl SceneNode {
    pub fn member(&self, p: Point) -> bool {
        match self {
            SceneNode::Ball { center, radius } => dist(p, *center) <= *radius,
            SceneNode::Box { lo, hi } => {
                (0..3).all(|a| lo[a] <= p[a] && p[a] <= hi[a])
            }
            SceneNode::HalfSpace { normal, offset } => dot(*normal, p) > *offset,
            SceneNode::SolidTorus { center, axis, major, minor } => {
                torus_profile(p, *center, *axis, *major).0 <= *minor
            }
            SceneNode::TorusShell { center, axis, major, minor, thickness, sector } => {
                let (d, ang) = torus_profile_angle(p, *center, *axis, *major, sector);
                if (d - minor).abs() > thickness / 2.0 {
                    return false;
                }
                match sector {
                    None => true,
                    Some(s) => {
                        let (mut lo, mut hi) = (s.from, s.to);
                        if hi < lo {
                            std::mem::swap(&mut lo, &mut hi);
                        }
                        ang >= lo && ang <= hi
                    }
                }
            }
            SceneNode::ConeTube { a, b, r_a, r_b, thickness } => {
                let ab = sub(*b, *a);
                let len2 = dot(ab, ab);
                if len2 == 0.0 {
                    return false;
                }
                let t = dot(sub(p, *a), ab) / len2;
                if !(0.0..=1.0).contains(&t) {
                    return false;
                }
                let c = add(*a, scale3(ab, t));
                let r = r_a + t * (r_b - r_a);
                (dist(p, c) - r).abs() < thickness / 2.0
            }
            SceneNode::Cusp => {
                let rho = (p[0] * p[0] + p[2] * p[2]).sqrt();
                rho <= 1.0 && p[1].abs() < (1.0 - rho) * (1.0 - rho)
            }
            SceneNode::CuspProfile => {
                (0.0..=1.0).contains(&p[0]) && p[1].abs() < (1.0 - p[0]) * (1.0 - p[0])
            }
            SceneNode::Union { children } => children.iter().any(|c| c.member(p)),
            SceneNode::Difference { base, cut } => base.member(p) && !cut.member(p),
            SceneNode::Transform { child, translate, scale, perm } => {
                let q = scale3(sub(p, *translate), 1.0 / scale);
                // invert the signed permutation: child axis |perm[a]|-1
                // receives world component a (with the sign)
                let mut r = [0.0; 3];
                for a in 0..3 {
                    let s = perm[a];
                    let ca = (s.unsigned_abs() as usize) - 1;
                    r[ca] = if s < 0 { -q[a] } else { q[a] };
                }
                child.member(r)
            }
        }
    }

    pub fn union(children: Vec<SceneNode>) -> SceneNode {
        SceneNode::Union { children }
    }

    pub fn difference(base: SceneNode, cut: SceneNode) -> SceneNode {
        SceneNode::Difference { base: Box::new(base), cut: Box::new(cut) }
    }

    pub fn translated(self, translate: Point) -> SceneNode {
        SceneNode::Transform {
            child: Box::new(self),
            translate,
            scale: 1.0,
            perm: [1, 2, 3],
        }
    }

    pub fn placed(self, translate: Point, scale: f64, perm: [i8; 3]) -> SceneNode {
        SceneNode::Transform { child: Box::new(self), translate, scale, perm }
    }
}

/// (distance to the core circle, signed height) of p in the torus frame.
fn torus_profile(p: Point, center: Point, axis: Point, major: f64) -> (f64, f64) {
    let n = normalize(axis);
    let v = sub(p, center);
    let h = dot(v, n);
    let radial = sub(v, scale3(n, h));
    let rho = norm(radial);
    (((rho - major) * (rho - major) + h * h).sqrt(), h)
}

/// As torus_profile, plus the ring angle when a sector frame is given.
fn torus_profile_angle(
    p: Point,
    center: Point,
    axis: Point,
    major: f64,
    sector: &Option<Sector>,
) -> (f64, f64) {
    let (d, _) = torus_profile(p, center, axis, major);
    let ang = match sector {
        None => 0.0,
        Some(s) => {
            let n = normalize(axis);
            let u = normalize(s.reference);
            let w = cross(n, u);
            let v = sub(p, center);
            let x = dot(v, u);
            let y = dot(v, w);
            y.atan2(x)
        }
    };
    (d, ang)
}

/// Physical placement record: an axis-aligned bounding box used by the
/// multi-body presets to assert separation between components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Placement {
    pub lo: Point,
    pub hi: Point,
}

impl Placement {
    /// Smallest axis-gap between two boxes, negative when they overlap.
    pub fn gap(&self, other: &Placement) -> f64 {
        let mut g = f64::NEG_INFINITY;
        for a in 0..3 {
            let d = (other.lo[a] - self.hi[a]).max(self.lo[a] - other.hi[a]);
            g = g.max(d);
        }
        g
    }
}

/// Scene metadata: the rasterization window, open faces, and the physical
/// markers (loops, points, truncation radii, placements) that downstream
/// analyses refer to by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneMeta {
    pub dim: usize,
    pub window_lo: Point,
    pub window_hi: Point,
    pub default_res: usize,
    pub open_faces: [[bool; 2]; 3],
    #[serde(default)]
    pub markers: BTreeMap<String, Vec<Point>>,
    #[serde(default)]
    pub points: BTreeMap<String, Point>,
    #[serde(default)]
    pub radii: BTreeMap<String, f64>,
    #[serde(default)]
    pub placements: BTreeMap<String, Placement>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    pub schema: String,
    pub name: String,
    pub root: SceneNode,
    pub meta: SceneMeta,
}

impl Scene {
    pub fn new(name: &str, root: SceneNode, meta: SceneMeta) -> Scene {
        Scene { schema: SCENE_SCHEMA.to_string(), name: name.to_string(), root, meta }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scene serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Scene> {
        let s: Scene = serde_json::from_value(v.clone())
            .map_err(|e| Error::Parse(format!("scene: {e}")))?;
        if s.schema != SCENE_SCHEMA {
            return Err(Error::Parse(format!("unknown scene schema {}", s.schema)));
        }
        Ok(s)
    }

    /// Grid covering the window with `res` cells along the longest axis
    /// (2D scenes always get one cell of depth).
    pub fn grid(&self, res: usize) -> Result<GridSpec> {
        let m = &self.meta;
        let axes = if m.dim == 2 { 2 } else { 3 };
        let mut extent = 0.0f64;
        for a in 0..axes {
            extent = extent.max(m.window_hi[a] - m.window_lo[a]);
        }
        let spacing = extent / res as f64;
        let mut shape = [1usize; 3];
        for a in 0..axes {
            shape[a] = (((m.window_hi[a] - m.window_lo[a]) / spacing).round() as usize).max(1);
        }
        GridSpec::new(m.dim, shape, spacing, m.window_lo)
    }
}

/// Rasterize by center membership. Returns the domain plus warning flags
/// (currently only "scene-outside-window" when nothing is occupied).
pub fn rasterize(scene: &Scene, spec: &GridSpec) -> Result<(VoxelDomain, Vec<String>)> {
    if spec.dim != scene.meta.dim {
        return Err(Error::Precondition(format!(
            "scene is {}d, grid is {}d",
            scene.meta.dim, spec.dim
        )));
    }
    let mut d = VoxelDomain::empty(spec.clone());
    d.open_faces = scene.meta.open_faces;
    let mut any = false;
    for c in spec.cells() {
        if scene.root.member(spec.center(c)) {
            d.set(c, true);
            any = true;
        }
    }
    let mut flags = Vec::new();
    if !any {
        flags.push("scene-outside-window".to_string());
    }
    Ok((d, flags))
}

/// Rasterize at the scene's default resolution.
pub fn rasterize_default(scene: &Scene) -> Result<(VoxelDomain, Vec<String>)> {
    let spec = scene.grid(scene.meta.default_res)?;
    rasterize(scene, &spec)
}

/// Apply a rigid placement (translate + scale + signed axis permutation)
/// to a physical point, matching SceneNode::Transform's frame convention.
pub fn place_point(p: Point, translate: Point, scale: f64, perm: [i8; 3]) -> Point {
    let mut q = [0.0; 3];
    for a in 0..3 {
        let s = perm[a];
        let ca = (s.unsigned_abs() as usize) - 1;
        q[a] = if s < 0 { -p[ca] } else { p[ca] };
    }
    add(scale3(q, scale), translate)
}

/// Snap a closed physical polyline onto the complex's 1-skeleton as an
/// integer 1-cycle. Each segment is sampled finer than the grid spacing,
/// samples map to nearest lattice vertices, and consecutive vertices are
/// joined by axis-ordered staircases; both axis orders are tried when edges
/// are missing from the complex. Fails if the result is not a cycle.
pub fn snap_loop(cx: &CubicalComplex, polyline: &[Point]) -> Result<ChainVector> {
    if polyline.len() < 3 {
        return Err(Error::Precondition("marker polyline needs >= 3 points".into()));
    }
    let spec = &cx.spec;
    let mut pts: Vec<Point> = polyline.to_vec();
    if dist(pts[0], *pts.last().unwrap()) > 1e-12 {
        pts.push(pts[0]);
    }
    // dense samples, then nearest grid vertices (doubled even coords)
    let mut verts: Vec<[u64; 3]> = Vec::new();
    for w in pts.windows(2) {
        let steps = ((dist(w[0], w[1]) / (0.5 * spec.spacing)).ceil() as usize).max(1);
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            let p = add(scale3(w[0], 1.0 - t), scale3(w[1], t));
            let v = nearest_vertex(spec, p);
            if verts.last() != Some(&v) {
                verts.push(v);
            }
        }
    }
    let first = verts[0];
    verts.push(first);
    let mut terms: Vec<(u64, i64)> = Vec::new();
    for w in verts.windows(2) {
        staircase_edges(cx, w[0], w[1], &mut terms)?;
    }
    let z = ChainVector::from_terms(1, terms);
    if !z.boundary().is_zero() {
        return Err(Error::Invariant("snapped marker is not a cycle".into()));
    }
    for &(k, _) in &z.coeffs {
        if !cx.has_cell(k) {
            return Err(Error::Invariant("snapped marker leaves the complex".into()));
        }
    }
    Ok(z)
}

fn nearest_vertex(spec: &GridSpec, p: Point) -> [u64; 3] {
    let mut v = [0u64; 3];
    for a in 0..spec.dim {
        let idx = ((p[a] - spec.origin[a]) / spec.spacing).round();
        let idx = idx.clamp(0.0, spec.shape[a] as f64) as u64;
        v[a] = 2 * idx;
    }
    v
}

/// Walk from vertex u to vertex v one axis at a time, accumulating signed
/// edge terms. Tries ascending then descending axis order so the staircase
/// can route around missing cells near curved walls.
fn staircase_edges(
    cx: &CubicalComplex,
    u: [u64; 3],
    v: [u64; 3],
    terms: &mut Vec<(u64, i64)>,
) -> Result<()> {
    for order in [[0usize, 1, 2], [2, 1, 0], [1, 0, 2], [1, 2, 0], [0, 2, 1], [2, 0, 1]] {
        if let Some(mut path) = try_staircase(cx, u, v, order) {
            terms.append(&mut path);
            return Ok(());
        }
    }
    Err(Error::Invariant(format!(
        "no skeleton staircase between vertices {u:?} and {v:?}"
    )))
}

fn try_staircase(
    cx: &CubicalComplex,
    u: [u64; 3],
    v: [u64; 3],
    order: [usize; 3],
) -> Option<Vec<(u64, i64)>> {
    let mut cur = u;
    let mut out = Vec::new();
    for &a in &order {
        while cur[a] != v[a] {
            let up = v[a] > cur[a];
            let mut edge = cur;
            edge[a] = if up { cur[a] + 1 } else { cur[a] - 1 };
            if !cx.has_cell(pack(edge)) {
                return None;
            }
            // edge boundary is upper vertex minus lower vertex, so a
            // forward step carries +1 and a backward step -1
            out.push((pack(edge), if up { 1 } else { -1 }));
            cur[a] = if up { cur[a] + 2 } else { cur[a] - 2 };
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::homology::{betti, build_complex, Ring};

    fn meta_cube(dim: usize, lo: f64, hi: f64, res: usize) -> SceneMeta {
        SceneMeta {
            dim,
            window_lo: [lo; 3],
            window_hi: [hi; 3],
            default_res: res,
            open_faces: [[false; 2]; 3],
            markers: BTreeMap::new(),
            points: BTreeMap::new(),
            radii: BTreeMap::new(),
            placements: BTreeMap::new(),
        }
    }

    #[test]
    fn ball_volume_within_two_percent() {
        let node = SceneNode::Ball { center: [0.0; 3], radius: 0.4 };
        let scene = Scene::new("ball", node, meta_cube(3, -0.5, 0.5, 64));
        let spec = scene.grid(64).unwrap();
        let (d, flags) = rasterize(&scene, &spec).unwrap();
        assert!(flags.is_empty());
        let vol = d.occupied_count() as f64 * spec.spacing.powi(3);
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.4f64.powi(3);
        assert!(
            (vol - exact).abs() < 0.02 * exact,
            "rasterized {vol} vs exact {exact}"
        );
    }

    #[test]
    fn union_is_pointwise_or() {
        let a = SceneNode::Ball { center: [-0.2, 0.0, 0.0], radius: 0.3 };
        let b = SceneNode::Ball { center: [0.25, 0.0, 0.0], radius: 0.25 };
        let u = SceneNode::union(vec![a.clone(), b.clone()]);
        let spec = GridSpec::cube(3, 24, -0.6, 0.6).unwrap();
        for c in spec.cells() {
            let p = spec.center(c);
            assert_eq!(u.member(p), a.member(p) || b.member(p));
        }
    }

    #[test]
    fn difference_of_identical_boxes_is_empty() {
        let b = SceneNode::Box { lo: [-0.3; 3], hi: [0.3; 3] };
        let dnode = SceneNode::difference(b.clone(), b);
        let scene = Scene::new("empty", dnode, meta_cube(3, -0.5, 0.5, 16));
        let (d, flags) = rasterize_default(&scene).unwrap();
        assert_eq!(d.occupied_count(), 0);
        assert!(flags.iter().any(|f| f == "scene-outside-window"));
    }

    #[test]
    fn transform_round_trip_membership() {
        let child = SceneNode::Box { lo: [0.0, -0.1, -0.2], hi: [0.5, 0.1, 0.2] };
        let perm = [2i8, -1, 3]; // world x <- child y, world y <- -child x
        let t = child.clone().placed([0.3, 0.4, 0.0], 2.0, perm);
        // the image of a child point under the same placement must be a member
        for p in [[0.1, 0.0, 0.0], [0.45, 0.09, -0.15], [0.0, -0.05, 0.1]] {
            assert!(child.member(p));
            let q = place_point(p, [0.3, 0.4, 0.0], 2.0, perm);
            assert!(t.member(q), "placed image of {p:?} at {q:?}");
        }
        assert!(!t.member([5.0, 5.0, 5.0]));
    }

    #[test]
    fn cusp_contains_paper_sample_point() {
        // rho = 0.9, y = 0.005: (1 - 0.9)^2 = 0.01 > 0.005
        assert!(SceneNode::Cusp.member([0.9, 0.005, 0.0]));
        assert!(!SceneNode::Cusp.member([0.9, 0.02, 0.0]));
        assert!(SceneNode::CuspProfile.member([0.9, 0.005, 0.0]));
    }

    #[test]
    fn cone_tube_is_a_ring_cylinder() {
        // straight open tube along x: an annular cylinder, one ring class
        let node = SceneNode::ConeTube {
            a: [-0.4, 0.0, 0.0],
            b: [0.4, 0.0, 0.0],
            r_a: 0.25,
            r_b: 0.25,
            thickness: 0.12,
        };
        let scene = Scene::new("tube", node, meta_cube(3, -0.6, 0.6, 40));
        let (d, _) = rasterize_default(&scene).unwrap();
        let cx = build_complex(&d);
        assert_eq!(betti(&cx, 0, Ring::Mod2).unwrap().0, 0); // reduced: connected
        assert_eq!(betti(&cx, 1, Ring::Mod2).unwrap().0, 1);
        assert_eq!(betti(&cx, 2, Ring::Mod2).unwrap().0, 0);
    }

    #[test]
    fn snap_circle_marker_to_cycle() {
        let node = SceneNode::Difference {
            base: Box::new(SceneNode::Ball { center: [0.0; 3], radius: 0.45 }),
            cut: Box::new(SceneNode::Ball { center: [0.0; 3], radius: 0.2 }),
        };
        let mut meta = meta_cube(2, -0.5, 0.5, 48);
        meta.dim = 2;
        let scene = Scene::new("annulus", node, meta);
        let (d, _) = rasterize_default(&scene).unwrap();
        let cx = build_complex(&d);
        let n = 64;
        let circle: Vec<Point> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [0.32 * t.cos(), 0.32 * t.sin(), 0.0]
            })
            .collect();
        let z = snap_loop(&cx, &circle).unwrap();
        assert!(!z.is_zero());
        assert!(z.boundary().is_zero());
        // the snapped circle generates the annulus hole
        use crate::homology::bounds_in;
        assert!(bounds_in(&cx, &z, Ring::Rational).unwrap().is_none());
    }

    #[test]
    fn scene_json_round_trip() {
        let node = SceneNode::union(vec![
            SceneNode::Ball { center: [0.1, 0.0, 0.0], radius: 0.2 },
            SceneNode::TorusShell {
                center: [0.0; 3],
                axis: [0.0, 0.0, 1.0],
                major: 0.3,
                minor: 0.1,
                thickness: 0.04,
                sector: Some(Sector { reference: [1.0, 0.0, 0.0], from: 0.0, to: 1.5 }),
            },
        ]);
        let mut meta = meta_cube(3, -0.5, 0.5, 32);
        meta.markers.insert("alpha".into(), vec![[0.0; 3], [0.1, 0.0, 0.0], [0.0, 0.1, 0.0]]);
        meta.points.insert("z".into(), [0.2, 0.0, 0.0]);
        meta.radii.insert("r1".into(), 0.33);
        let scene = Scene::new("round-trip", node, meta);
        let v = scene.to_json();
        let back = Scene::from_json(&v).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&scene).unwrap());
    }
}
