//! Preset scenes: the cusp of revolution, pinched tori, mushroom and
//! trumpet chains, the trumpet wall, mushrooms on a ball, and the small 2D
//! shapes used by the planar estimator comparisons.
//!
//! The mushroom/trumpet stages follow one construction: a thickened torus
//! surface with a small disk removed from its back face, a tapered tube
//! ("sack") glued along the inner equator carrying the longitude class
//! toward the next stage's removed disk (so the longitude becomes the
//! boundary of the next punctured surface), and a glove finger glued along
//! a meridian circle, ending in a solid ball cap that fills the meridian.
//! The last stage's sack is plugged by a solid ball. Cutting tentacles
//! re-exposes the classes they carry; keeping a stage with all its killers
//! trivializes them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Point;

use super::{cross, place_point, Placement, Scene, SceneMeta, SceneNode, Sector};

// unit-stage proportions (stage diameter ~ 1)
const MAJOR: f64 = 0.35;
const MINOR: f64 = 0.13;
const HOLE_R: f64 = 0.1;
const SACK_R: f64 = MAJOR - MINOR; // inner equator radius
const SACK_OVERSHOOT: f64 = 0.05;
const FINGER_DROP: f64 = 0.53;
const ELBOW_R: f64 = 0.15;
const RUN_Y: f64 = FINGER_DROP + ELBOW_R; // 0.68
const CAP_R: f64 = 0.19;
const PLUG_TAPER: f64 = 0.12;
const PLUG_R: f64 = 0.2;

fn circle(center: Point, u: Point, v: Point, radius: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [
                center[0] + radius * (t.cos() * u[0] + t.sin() * v[0]),
                center[1] + radius * (t.cos() * u[1] + t.sin() * v[1]),
                center[2] + radius * (t.cos() * u[2] + t.sin() * v[2]),
            ]
        })
        .collect()
}

fn meta2(lo: [f64; 2], hi: [f64; 2], res: usize) -> SceneMeta {
    SceneMeta {
        dim: 2,
        window_lo: [lo[0], lo[1], 0.0],
        window_hi: [hi[0], hi[1], 0.0],
        default_res: res,
        open_faces: [[false; 2]; 3],
        markers: BTreeMap::new(),
        points: BTreeMap::new(),
        radii: BTreeMap::new(),
        placements: BTreeMap::new(),
    }
}

fn meta3(lo: Point, hi: Point, res: usize) -> SceneMeta {
    SceneMeta {
        dim: 3,
        window_lo: lo,
        window_hi: hi,
        default_res: res,
        open_faces: [[false; 2]; 3],
        markers: BTreeMap::new(),
        points: BTreeMap::new(),
        radii: BTreeMap::new(),
        placements: BTreeMap::new(),
    }
}

/// Cusp of revolution about the y axis; the boundary pinches to a
/// polynomial cusp at the rim circle rho = 1.
pub fn scene_cusp() -> Scene {
    let meta = meta3([-1.05, -1.05, -1.05], [1.05, 1.05, 1.05], 96);
    Scene::new("cusp", SceneNode::Cusp, meta)
}

/// Planar profile of the cusp (half cross-section through the axis).
pub fn scene_cusp_profile() -> Scene {
    let meta = meta2([-0.05, -1.05], [1.05, 1.05], 96);
    Scene::new("cusp-profile", SceneNode::CuspProfile, meta)
}

#[derive(Debug, Clone)]
pub struct PinchedTorusParams {
    pub major: f64,
    pub minor: f64,
    pub thickness: f64,
    pub cap_radius: f64,
    /// keep the surface closed (no removed disk)
    pub closed: bool,
}

impl Default for PinchedTorusParams {
    fn default() -> Self {
        PinchedTorusParams {
            major: 0.3,
            minor: 0.12,
            thickness: 0.06,
            cap_radius: 0.08,
            closed: false,
        }
    }
}

/// Thickened torus surface (axis z) with a small disk removed around a
/// point of the top circle; markers carry the meridian (alpha) and
/// longitude (beta) mid-surface circles away from the removed disk.
pub fn scene_pinched_torus(p: &PinchedTorusParams) -> Result<Scene> {
    let (big_r, r, tau, cap) = (p.major, p.minor, p.thickness, p.cap_radius);
    if !(tau > 0.0 && tau < r && r < big_r) {
        return Err(Error::Precondition(format!(
            "need 0 < thickness < minor < major, got {tau} / {r} / {big_r}"
        )));
    }
    if !(cap > tau / 2.0 && cap < r) {
        return Err(Error::Precondition(format!(
            "cap radius {cap} must lie in (thickness/2, minor)"
        )));
    }
    let shell = SceneNode::TorusShell {
        center: [0.0; 3],
        axis: [0.0, 0.0, 1.0],
        major: big_r,
        minor: r,
        thickness: tau,
        sector: None,
    };
    let root = if p.closed {
        shell
    } else {
        SceneNode::difference(
            shell,
            SceneNode::Ball { center: [big_r, 0.0, r], radius: cap },
        )
    };
    let pad = big_r + r + tau;
    let mut meta = meta3([-1.2 * pad; 3], [1.2 * pad; 3], 64);
    meta.markers.insert(
        "alpha".into(),
        (0..96)
            .map(|i| {
                let m = 2.0 * PI * i as f64 / 96.0;
                [-(big_r + r * m.cos()), 0.0, r * m.sin()]
            })
            .collect(),
    );
    meta.markers.insert(
        "beta".into(),
        circle([0.0, 0.0, -r], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], big_r, 96),
    );
    Ok(Scene::new(if p.closed { "torus-shell" } else { "pinched-torus" }, root, meta))
}

/// One stage of a mushroom/trumpet chain in world coordinates.
struct StageSpec {
    cx: f64,
    scale: f64,
    /// finger side: the meridian glove exits at +z or -z
    eps: f64,
}

struct ChainParts {
    /// torus shells; the hole list is subtracted from these only
    shells: Vec<SceneNode>,
    /// tentacles and caps, unioned in after the holes are cut
    attach: Vec<SceneNode>,
    holes: Vec<SceneNode>,
    markers: BTreeMap<String, Vec<Point>>,
    bbox: Placement,
}

/// deep_caps: run each non-final finger past the next stage's torus and
/// bend it back toward the axis before capping (mushroom layout, so a
/// truncation sphere at the limit point can shave the cap off without
/// touching the next torus). Otherwise cap in the next stage's band.
fn chain_parts(stages: &[StageSpec], tau: f64, deep_caps: bool) -> ChainParts {
    let k = stages.len();
    let mut shells = Vec::new();
    let mut nodes = Vec::new();
    let mut holes = Vec::new();
    let mut markers = BTreeMap::new();
    let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    let mut grow = |p: Point, r: f64| {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a] - r);
            hi[a] = hi[a].max(p[a] + r);
        }
    };
    for (j, st) in stages.iter().enumerate() {
        let s = st.scale;
        let c = [st.cx, 0.0, 0.0];
        let eps = st.eps;
        let last = j + 1 == k;
        shells.push(SceneNode::TorusShell {
            center: c,
            axis: [1.0, 0.0, 0.0],
            major: MAJOR * s,
            minor: MINOR * s,
            thickness: tau * s,
            sector: None,
        });
        grow(c, (MAJOR + MINOR + tau) * s);
        // removed disk on the back face; the previous sack lands on its rim
        holes.push(SceneNode::Ball {
            center: [st.cx - MINOR * s, MAJOR * s, 0.0],
            radius: HOLE_R * s,
        });
        // bore for the finger: the tube launches tangent to the ring, so
        // the curved wall would sweep through its channel and seal the
        // glove's hollow; drilling the channel clear opens the hollow into
        // the tube interior, which vents through the removed back disk
        let (z_lo, z_hi) = if eps > 0.0 {
            ((MAJOR - 0.1) * s, (MAJOR + 0.1) * s)
        } else {
            (-(MAJOR + 0.1) * s, -(MAJOR - 0.1) * s)
        };
        holes.push(SceneNode::Box {
            lo: [st.cx - 0.1 * s, -0.38 * s, z_lo],
            hi: [st.cx + 0.1 * s, 0.0, z_hi],
        });
        // longitude sack glued along the inner equator
        let sack_a = c;
        if last {
            let b = [st.cx + 0.9 * s, 0.0, 0.0];
            nodes.push(SceneNode::ConeTube {
                a: sack_a,
                b,
                r_a: SACK_R * s,
                r_b: PLUG_TAPER * s,
                thickness: tau * s,
            });
            nodes.push(SceneNode::Ball { center: b, radius: PLUG_R * s });
            grow(b, PLUG_R * s);
        } else {
            let nx = &stages[j + 1];
            let sn = nx.scale;
            let b = [
                nx.cx - MINOR * sn + SACK_OVERSHOOT * sn,
                MAJOR * sn,
                0.0,
            ];
            nodes.push(SceneNode::ConeTube {
                a: sack_a,
                b,
                r_a: SACK_R * s,
                r_b: HOLE_R * sn,
                thickness: tau * sn,
            });
        }
        // meridian glove finger: side tube, quarter elbow, forward run, cap
        let q = [st.cx, 0.0, MAJOR * s * eps];
        let b1 = [st.cx, -FINGER_DROP * s, MAJOR * s * eps];
        nodes.push(SceneNode::ConeTube {
            a: q,
            b: b1,
            r_a: MINOR * s,
            r_b: MINOR * s,
            thickness: tau * s,
        });
        let e = [st.cx + ELBOW_R * s, -FINGER_DROP * s, MAJOR * s * eps];
        nodes.push(SceneNode::TorusShell {
            center: e,
            axis: [0.0, 0.0, 1.0],
            major: ELBOW_R * s,
            minor: MINOR * s,
            thickness: tau * s,
            sector: Some(Sector {
                reference: [-1.0, 0.0, 0.0],
                from: 0.0,
                to: PI / 2.0,
            }),
        });
        let b2 = [st.cx + ELBOW_R * s, -RUN_Y * s, MAJOR * s * eps];
        let f = if deep_caps && !last {
            // straight run past the next torus, then bend toward the axis
            let b3 = [stages[j + 1].cx + 0.35 * s, b2[1], b2[2]];
            nodes.push(SceneNode::ConeTube {
                a: b2,
                b: b3,
                r_a: MINOR * s,
                r_b: MINOR * s,
                thickness: tau * s,
            });
            let wlen = (RUN_Y * RUN_Y + MAJOR * MAJOR).sqrt();
            let w = [0.0, RUN_Y / wlen, -MAJOR * eps / wlen];
            let e2 = [
                b3[0] + ELBOW_R * s * w[0],
                b3[1] + ELBOW_R * s * w[1],
                b3[2] + ELBOW_R * s * w[2],
            ];
            nodes.push(SceneNode::TorusShell {
                center: e2,
                axis: cross([1.0, 0.0, 0.0], w),
                major: ELBOW_R * s,
                minor: MINOR * s,
                thickness: tau * s,
                sector: Some(Sector {
                    reference: [-w[0], -w[1], -w[2]],
                    from: 0.0,
                    to: PI / 2.0,
                }),
            });
            let b4 = [e2[0] + ELBOW_R * s, e2[1], e2[2]];
            let f = [
                b4[0] + 0.3 * s * w[0],
                b4[1] + 0.3 * s * w[1],
                b4[2] + 0.3 * s * w[2],
            ];
            nodes.push(SceneNode::ConeTube {
                a: b4,
                b: f,
                r_a: MINOR * s,
                r_b: MINOR * s,
                thickness: tau * s,
            });
            f
        } else {
            let fx = if last {
                st.cx + (if deep_caps { 0.9 } else { 0.75 }) * s
            } else {
                st.cx + 0.75 * s
            };
            let f = [fx, b2[1], b2[2]];
            nodes.push(SceneNode::ConeTube {
                a: b2,
                b: f,
                r_a: MINOR * s,
                r_b: MINOR * s,
                thickness: tau * s,
            });
            f
        };
        nodes.push(SceneNode::Ball { center: f, radius: CAP_R * s });
        grow(f, CAP_R * s);
        grow(b2, (MINOR + tau) * s);
        grow([st.cx, -RUN_Y * s, -MAJOR * s * eps], (MINOR + tau) * s);
        let tag = j + 1;
        markers.insert(
            format!("alpha{tag}"),
            (0..96)
                .map(|i| {
                    let m = 2.0 * PI * i as f64 / 96.0;
                    [
                        st.cx + MINOR * s * m.sin(),
                        0.0,
                        (MAJOR + MINOR * m.cos()) * s * eps,
                    ]
                })
                .collect(),
        );
        markers.insert(
            format!("beta{tag}"),
            circle(c, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], SACK_R * s, 96),
        );
    }
    ChainParts {
        shells,
        attach: nodes,
        holes,
        markers,
        bbox: Placement { lo, hi },
    }
}

fn chain_root(parts: &ChainParts) -> SceneNode {
    let mut children = vec![SceneNode::difference(
        SceneNode::union(parts.shells.clone()),
        SceneNode::union(parts.holes.clone()),
    )];
    children.extend(parts.attach.iter().cloned());
    SceneNode::union(children)
}

#[derive(Debug, Clone)]
pub struct MushroomParams {
    pub stages: usize,
    pub base_diameter: f64,
    pub thickness_ratio: f64,
    pub scale_ratio: f64,
    pub tentacle_ratio: f64,
}

impl Default for MushroomParams {
    fn default() -> Self {
        MushroomParams {
            stages: 2,
            base_diameter: 1.0,
            thickness_ratio: 0.08,
            scale_ratio: 0.5,
            tentacle_ratio: 1.0,
        }
    }
}

/// Shrinking stage chain converging toward the limit point z. Truncation
/// radii around z are stored in the metadata: "trunc_stage1" keeps stage 1
/// with its killers removed (so its classes plus the next stage's cut
/// tentacles survive), "trunc_all" keeps every stage and every killer.
pub fn scene_mushroom(p: &MushroomParams) -> Result<Scene> {
    if !(1..=3).contains(&p.stages) {
        return Err(Error::Precondition(format!("stages must be 1..=3, got {}", p.stages)));
    }
    if !(p.thickness_ratio > 0.0 && p.thickness_ratio <= 0.2) {
        return Err(Error::Precondition(format!(
            "thickness ratio {} outside (0, 0.2]",
            p.thickness_ratio
        )));
    }
    if !(p.scale_ratio > 0.0 && p.scale_ratio < 1.0) {
        return Err(Error::Precondition(format!(
            "scale ratio {} outside (0, 1)",
            p.scale_ratio
        )));
    }
    if !(1.0..=2.0).contains(&p.tentacle_ratio) {
        return Err(Error::Precondition(format!(
            "tentacle ratio {} outside [1, 2]",
            p.tentacle_ratio
        )));
    }
    let b = p.base_diameter;
    let lam = p.tentacle_ratio;
    let mut stages = Vec::new();
    let mut cx = 0.0;
    let mut s = b;
    for j in 0..p.stages {
        stages.push(StageSpec {
            cx,
            scale: s,
            eps: if j % 2 == 0 { 1.0 } else { -1.0 },
        });
        cx += lam * s;
        s *= p.scale_ratio;
    }
    let z = [lam * b / (1.0 - p.scale_ratio), 0.0, 0.0];
    let parts = chain_parts(&stages, p.thickness_ratio, true);
    let root = chain_root(&parts);
    // truncation radii: the sphere around z must swallow the last kept
    // stage's finger cap entirely while leaving the next torus untouched
    let mut radii = BTreeMap::new();
    if p.stages >= 2 {
        let st = &stages[0];
        let nx = &stages[1];
        // deep finger cap center of stage 1 (mirrors chain_parts)
        let wlen = (RUN_Y * RUN_Y + MAJOR * MAJOR).sqrt();
        let w = [0.0, RUN_Y / wlen, -MAJOR * st.eps / wlen];
        let b3x = nx.cx + 0.35 * st.scale;
        let f = [
            b3x + (ELBOW_R + 0.3) * st.scale * w[0] + ELBOW_R * st.scale,
            -RUN_Y * st.scale + (ELBOW_R + 0.3) * st.scale * w[1],
            MAJOR * st.scale * st.eps + (ELBOW_R + 0.3) * st.scale * w[2],
        ];
        let df = ((z[0] - f[0]).powi(2) + f[1] * f[1] + f[2] * f[2]).sqrt();
        let cap_far = df + CAP_R * st.scale;
        // nearest point of the next torus shell to z
        let front = nx.cx + (MINOR + p.thickness_ratio / 2.0) * nx.scale;
        let rho = (MAJOR - MINOR - p.thickness_ratio / 2.0) * nx.scale;
        let torus_near = ((z[0] - front).powi(2) + rho * rho).sqrt();
        if cap_far >= torus_near {
            return Err(Error::Invariant(format!(
                "no truncation gap: cap reaches {cap_far}, torus at {torus_near}"
            )));
        }
        radii.insert("trunc_stage1".to_string(), 0.5 * (cap_far + torus_near));
    }
    radii.insert("trunc_all".to_string(), 0.35 * b);
    let pad = 0.15 * b;
    let meta_lo = [
        parts.bbox.lo[0] - pad,
        parts.bbox.lo[1] - pad,
        parts.bbox.lo[2] - pad,
    ];
    let meta_hi = [
        z[0].max(parts.bbox.hi[0]) + pad,
        parts.bbox.hi[1] + pad,
        parts.bbox.hi[2] + pad,
    ];
    let mut meta = meta3(meta_lo, meta_hi, 160);
    meta.markers = parts.markers;
    meta.points.insert("z".into(), z);
    meta.radii = radii;
    meta.placements.insert("body".into(), parts.bbox);
    Ok(Scene::new("mushroom", root, meta))
}

/// Constant-size stage chain ending in a plugged mouthpiece inside
/// {-1 < x < 0}. Stage j sits in the band (j - k - 2, j - k - 1); the
/// gamma marker is stage 1's longitude (the class that survives a cut
/// behind stage 1 and dies two stages later). Half-space cut offsets for
/// the one-stage and all-but-mouthpiece regions are stored as
/// "ell_small" / "ell_large".
pub fn scene_trumpet(k: usize) -> Result<Scene> {
    if !(1..=3).contains(&k) {
        return Err(Error::Precondition(format!("stages must be 1..=3, got {k}")));
    }
    let stages: Vec<StageSpec> = (0..k)
        .map(|j| StageSpec {
            cx: (j as f64) - (k as f64) - 0.5,
            scale: 1.0,
            eps: if j % 2 == 0 { 1.0 } else { -1.0 },
        })
        .collect();
    let parts = chain_parts(&stages, 0.08, false);
    let root = chain_root(&parts);
    let mut meta = meta3(
        [stages[0].cx - 0.7, -0.95, -0.6],
        [0.3, 0.95, 0.6],
        180,
    );
    meta.markers = parts.markers.clone();
    if let Some(beta1) = parts.markers.get("beta1") {
        meta.markers.insert("gamma".into(), beta1.clone());
    }
    meta.radii.insert("ell_small".into(), stages[0].cx + 0.5);
    meta.radii.insert("ell_large".into(), -1.0);
    meta.placements.insert("body".into(), parts.bbox);
    Ok(Scene::new("trumpet", root, meta))
}

/// Scene root restricted to the half-space {x <= ell}.
pub fn trumpet_truncation(scene: &Scene, ell: f64) -> Scene {
    let root = SceneNode::difference(
        scene.root.clone(),
        SceneNode::HalfSpace { normal: [1.0, 0.0, 0.0], offset: ell },
    );
    let mut out = scene.clone();
    out.name = format!("{}-cut", scene.name);
    out.root = root;
    out
}

/// Scene root with a ball around the named point removed.
pub fn scene_truncated_at(scene: &Scene, point: &str, radius: f64) -> Result<Scene> {
    let z = *scene
        .meta
        .points
        .get(point)
        .ok_or_else(|| Error::Precondition(format!("no point {point} in scene")))?;
    let root = SceneNode::difference(
        scene.root.clone(),
        SceneNode::Ball { center: z, radius },
    );
    let mut out = scene.clone();
    out.name = format!("{}-trunc", scene.name);
    out.root = root;
    Ok(out)
}

/// Trumpets hanging from the solid wall {x > 0}, joined to it by square
/// stems through their mouthpieces. Lateral spacing between trumpet axes
/// is spacing_factor times the lateral half-width; bounding boxes are
/// recorded and overlap is an error. The domain of interest is the
/// complement of this union within the window.
pub fn scene_trumpet_wall(ks: &[usize], spacing_factor: f64) -> Result<Scene> {
    if ks.is_empty() {
        return Err(Error::Precondition("need at least one trumpet".into()));
    }
    let half_width = 0.95;
    let spacing = spacing_factor * half_width;
    let n = ks.len();
    let mut nodes = vec![SceneNode::HalfSpace { normal: [1.0, 0.0, 0.0], offset: 0.0 }];
    let mut markers = BTreeMap::new();
    let mut placements: BTreeMap<String, Placement> = BTreeMap::new();
    let mut x_lo = f64::INFINITY;
    for (i, &k) in ks.iter().enumerate() {
        let t = scene_trumpet(k)?;
        let dy = (i as f64 - (n as f64 - 1.0) / 2.0) * spacing;
        let shift = [0.0, dy, 0.0];
        nodes.push(t.root.clone().translated(shift));
        // stem from the mouthpiece plug into the wall
        nodes.push(SceneNode::Box {
            lo: [-0.5, dy - 0.15, -0.15],
            hi: [0.05, dy + 0.15, 0.15],
        });
        for (name, poly) in &t.meta.markers {
            markers.insert(
                format!("{name}_{i}"),
                poly.iter().map(|&p| place_point(p, shift, 1.0, [1, 2, 3])).collect(),
            );
        }
        let body = &t.meta.placements["body"];
        let placed = Placement {
            lo: [body.lo[0], body.lo[1] + dy, body.lo[2]],
            hi: [body.hi[0], body.hi[1] + dy, body.hi[2]],
        };
        x_lo = x_lo.min(placed.lo[0]);
        for (_, other) in placements.iter() {
            if placed.gap(other) <= 0.0 {
                return Err(Error::Precondition(format!(
                    "trumpet {i} overlaps a neighbor at spacing factor {spacing_factor}"
                )));
            }
        }
        placements.insert(format!("trumpet{i}"), placed);
    }
    let root = SceneNode::union(nodes);
    let y_span = (n as f64 - 1.0) / 2.0 * spacing + half_width + 0.3;
    let mut meta = meta3([x_lo - 0.3, -y_span, -0.75], [0.3, y_span, 0.75], 180);
    meta.open_faces = [[true, true], [true, true], [true, true]];
    meta.markers = markers;
    meta.placements = placements;
    Ok(Scene::new("trumpet-wall", root, meta))
}

/// Mushrooms planted outward along coordinate axes on a solid ball.
/// Attachment points must be separated by more than twice the larger
/// lateral footprint; violations are an error. Empty input is the plain
/// ball.
pub fn scene_mushroom_ball(ks: &[usize], scales: &[f64]) -> Result<Scene> {
    if ks.len() != scales.len() {
        return Err(Error::Precondition(format!(
            "{} stage counts vs {} scales",
            ks.len(),
            scales.len()
        )));
    }
    if ks.len() > 6 {
        return Err(Error::Precondition("at most 6 axis directions available".into()));
    }
    let ball_r = 1.0;
    let dirs: [([f64; 3], [i8; 3]); 6] = [
        ([1.0, 0.0, 0.0], [1, 2, 3]),
        ([0.0, 1.0, 0.0], [2, 1, 3]),
        ([0.0, 0.0, 1.0], [3, 2, 1]),
        ([-1.0, 0.0, 0.0], [-1, -2, 3]),
        ([0.0, -1.0, 0.0], [2, -1, 3]),
        ([0.0, 0.0, -1.0], [3, 2, -1]),
    ];
    let mut nodes = vec![SceneNode::Ball { center: [0.0; 3], radius: ball_r }];
    let mut markers = BTreeMap::new();
    let mut points = BTreeMap::new();
    let mut placements = BTreeMap::new();
    let mut reach = ball_r;
    let mut attach: Vec<(Point, f64)> = Vec::new();
    let half_width = 0.95;
    for (i, (&k, &s)) in ks.iter().zip(scales).enumerate() {
        if !(s > 0.0) {
            return Err(Error::Precondition(format!("scale {s} must be positive")));
        }
        let m = scene_mushroom(&MushroomParams {
            stages: k,
            base_diameter: s,
            ..MushroomParams::default()
        })?;
        let (d, perm) = dirs[i];
        let t = ball_r + 0.1 * s;
        let shift = [t * d[0], t * d[1], t * d[2]];
        for &(p, w) in &attach {
            let dist = super::dist(p, shift);
            let lim = 2.0 * half_width * s.max(w);
            if dist <= lim {
                return Err(Error::Precondition(format!(
                    "mushroom {i} too close to a neighbor: {dist} <= {lim}"
                )));
            }
        }
        attach.push((shift, s));
        nodes.push(m.root.clone().placed(shift, 1.0, perm));
        for (name, poly) in &m.meta.markers {
            markers.insert(
                format!("{name}_{i}"),
                poly.iter().map(|&p| place_point(p, shift, 1.0, perm)).collect(),
            );
        }
        let z = m.meta.points["z"];
        points.insert(format!("z_{i}"), place_point(z, shift, 1.0, perm));
        let body = &m.meta.placements["body"];
        let corners = [body.lo, body.hi];
        let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
        for cx in 0..2 {
            for cy in 0..2 {
                for cz in 0..2 {
                    let p = place_point(
                        [corners[cx][0], corners[cy][1], corners[cz][2]],
                        shift,
                        1.0,
                        perm,
                    );
                    for a in 0..3 {
                        lo[a] = lo[a].min(p[a]);
                        hi[a] = hi[a].max(p[a]);
                    }
                }
            }
        }
        placements.insert(format!("mushroom{i}"), Placement { lo, hi });
        for a in 0..3 {
            reach = reach.max(hi[a].abs()).max(lo[a].abs());
        }
    }
    let pad = reach + 0.15;
    let mut meta = meta3([-pad; 3], [pad; 3], 96);
    meta.markers = markers;
    meta.points = points;
    meta.placements = placements;
    Ok(Scene::new("mushroom-ball", SceneNode::union(nodes), meta))
}

pub fn scene_disk() -> Scene {
    let meta = meta2([-0.5, -0.5], [0.5, 0.5], 48);
    Scene::new("disk", SceneNode::Ball { center: [0.0; 3], radius: 0.4 }, meta)
}

/// Rectangle with deep slits from the top edge.
pub fn scene_comb() -> Scene {
    let base = SceneNode::Box { lo: [0.0, 0.0, 0.0], hi: [1.0, 1.0, 0.0] };
    let teeth: Vec<SceneNode> = (1..5)
        .map(|i| {
            let x = i as f64 / 5.0;
            SceneNode::Box { lo: [x - 0.02, 0.2, 0.0], hi: [x + 0.02, 1.1, 0.0] }
        })
        .collect();
    let meta = meta2([-0.1, -0.1], [1.1, 1.1], 48);
    Scene::new("comb", SceneNode::difference(base, SceneNode::union(teeth)), meta)
}

/// Annulus with its top cut away.
pub fn scene_horseshoe() -> Scene {
    let annulus = SceneNode::difference(
        SceneNode::Ball { center: [0.0; 3], radius: 0.45 },
        SceneNode::Ball { center: [0.0; 3], radius: 0.2 },
    );
    let root = SceneNode::difference(
        annulus,
        SceneNode::HalfSpace { normal: [0.0, 1.0, 0.0], offset: 0.1 },
    );
    let meta = meta2([-0.55, -0.55], [0.55, 0.55], 48);
    Scene::new("horseshoe", root, meta)
}

/// Disk with a thin radial slit.
pub fn scene_slit_disk() -> Scene {
    let root = SceneNode::difference(
        SceneNode::Ball { center: [0.0; 3], radius: 0.45 },
        SceneNode::Box { lo: [0.0, -0.025, 0.0], hi: [0.5, 0.025, 0.0] },
    );
    let meta = meta2([-0.55, -0.55], [0.55, 0.55], 64);
    Scene::new("slit-disk", root, meta)
}

/// Union of seeded random balls, guaranteed connected by overlapping each
/// new ball with an earlier one.
pub fn scene_blob(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut balls: Vec<(Point, f64)> = vec![([0.0, 0.0, 0.0], 0.2)];
    for _ in 0..7 {
        let &(anchor, ar) = &balls[rng.gen_range(0..balls.len())];
        let r = rng.gen_range(0.08..0.18);
        let ang: f64 = rng.gen_range(0.0..2.0 * PI);
        // keep a generous overlap with the anchor so the union is connected
        let d = rng.gen_range(0.25..0.6) * (ar + r);
        let c = [anchor[0] + d * ang.cos(), anchor[1] + d * ang.sin(), 0.0];
        balls.push((c, r));
    }
    let nodes = balls
        .into_iter()
        .map(|(c, r)| SceneNode::Ball { center: c, radius: r })
        .collect();
    let meta = meta2([-2.1, -2.1], [2.1, 2.1], 84);
    Scene::new("blob", SceneNode::union(nodes), meta)
}

// Decomposition check for one cut chain stage: the bare twice-punctured
// shell carries three classes (meridian, longitude, bore rim), the sack
// adds nothing new, and the finger weld cancels the bore rim, leaving
// exactly the meridian and longitude.
#[test]
fn cut_stage_piece_ranks() {
    use crate::generators::*;
    use crate::homology::{betti, build_complex, Ring};
    use std::f64::consts::PI;
    let cx1 = -2.5f64;
    let torus = SceneNode::TorusShell {
        center: [cx1, 0.0, 0.0], axis: [1.0, 0.0, 0.0],
        major: 0.35, minor: 0.13, thickness: 0.08, sector: None,
    };
    let pinch = SceneNode::Ball { center: [cx1 - 0.13, 0.35, 0.0], radius: 0.1 };
    let drill = SceneNode::Box {
        lo: [cx1 - 0.1, -0.38, 0.25], hi: [cx1 + 0.1, 0.0, 0.45],
    };
    let sack = SceneNode::ConeTube {
        a: [cx1, 0.0, 0.0], b: [cx1 + 0.92, 0.35, 0.0],
        r_a: 0.22, r_b: 0.1, thickness: 0.08,
    };
    let s1 = SceneNode::ConeTube {
        a: [cx1, 0.0, 0.35], b: [cx1, -0.53, 0.35],
        r_a: 0.13, r_b: 0.13, thickness: 0.08,
    };
    let elbow = SceneNode::TorusShell {
        center: [cx1 + 0.15, -0.53, 0.35], axis: [0.0, 0.0, 1.0],
        major: 0.15, minor: 0.13, thickness: 0.08,
        sector: Some(Sector { reference: [-1.0, 0.0, 0.0], from: 0.0, to: PI / 2.0 }),
    };
    let s2 = SceneNode::ConeTube {
        a: [cx1 + 0.15, -0.68, 0.35], b: [cx1 + 0.75, -0.68, 0.35],
        r_a: 0.13, r_b: 0.13, thickness: 0.08,
    };
    let cut = SceneNode::HalfSpace { normal: [1.0, 0.0, 0.0], offset: -2.0 };
    let mk = |attach: Vec<SceneNode>| {
        let shell = SceneNode::difference(
            torus.clone(),
            SceneNode::union(vec![pinch.clone(), drill.clone()]),
        );
        let mut children = vec![shell];
        children.extend(attach);
        let root = SceneNode::difference(SceneNode::union(children), cut.clone());
        let meta = SceneMeta {
            dim: 3,
            window_lo: [-3.2, -0.95, -0.6],
            window_hi: [-1.9, 0.95, 0.6],
            default_res: 52,
            open_faces: [[false; 2]; 3],
            markers: Default::default(),
            points: Default::default(),
            radii: Default::default(),
            placements: Default::default(),
        };
        Scene::new("stage-pieces", root, meta)
    };
    for (label, attach, want) in [
        ("shell", vec![], 3usize),
        ("shell+sack", vec![sack.clone()], 3),
        ("shell+finger", vec![s1.clone(), elbow.clone(), s2.clone()], 2),
        ("all", vec![sack, s1, elbow, s2], 2),
    ] {
        let scene = mk(attach);
        let (d, _) = rasterize_default(&scene).unwrap();
        let cxp = build_complex(&d);
        assert_eq!(betti(&cxp, 0, Ring::Mod2).unwrap().0, 0, "{label} connected");
        assert_eq!(betti(&cxp, 1, Ring::Mod2).unwrap().0, want, "{label} loops");
    }
}
