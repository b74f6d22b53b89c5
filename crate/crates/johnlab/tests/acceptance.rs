//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line. All tolerances are pinned as constants next to the
//! criterion they govern.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use johnlab::conditions::{
    check_ball_separation, check_john, estimate_bounded_turning, estimate_llc1, estimate_llc2,
    estimate_uniformity, eta_from_phi, relative_from_absolute, DistortionFunction, JohnVariant,
    Role,
};
use johnlab::generators::{
    rasterize, scene_blob, scene_comb, scene_cusp, scene_disk, scene_horseshoe, scene_mushroom,
    scene_pinched_torus, scene_slit_disk, scene_trumpet, scene_trumpet_wall, scene_truncated_at,
    snap_loop, trumpet_truncation, MushroomParams, PinchedTorusParams, Scene, SceneNode,
};
use johnlab::grid::{
    components, distance_transform, Adjacency, BallSpec, Cell, GridSpec, Point, RestrictMode,
    ScalarField, VoxelDomain,
};
use johnlab::homology::{
    betti, bounds_in, build_complex, check_dd_zero, estimate_hlog_bt, estimate_hlog_joinability,
    fast_sequence_check, h1_basis, JoinMode, Ring,
};
use johnlab::metrics::{bottleneck_path, inner_geodesic, quasihyperbolic_geodesic};

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(n: usize, name: &str, f: F) {
    let t0 = Instant::now();
    match std::panic::catch_unwind(f) {
        Ok(()) => println!("criterion {n:2} ({name}): pass [{:.2?}]", t0.elapsed()),
        Err(e) => {
            println!("criterion {n:2} ({name}): fail [{:.2?}]", t0.elapsed());
            std::panic::resume_unwind(e);
        }
    }
}

// ------------------------------------------------------- shared helpers

fn moore_neighbors(d: &VoxelDomain, i: usize) -> Vec<usize> {
    let spec = &d.spec;
    let c = spec.unlinear(i);
    let zr: Vec<isize> = if spec.dim == 2 { vec![0] } else { vec![-1, 0, 1] };
    let mut out = Vec::new();
    for &dz in &zr {
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                if (dx, dy, dz) == (0, 0, 0) {
                    continue;
                }
                let o = [dx, dy, dz];
                let mut nb = [0usize; 3];
                let mut ok = true;
                for a in 0..3 {
                    let v = c[a] as isize + o[a];
                    if v < 0 || v >= spec.shape[a] as isize {
                        ok = false;
                        break;
                    }
                    nb[a] = v as usize;
                }
                if ok {
                    let j = spec.linear(nb);
                    if d.occ[j] {
                        out.push(j);
                    }
                }
            }
        }
    }
    out
}

fn euclid_w(d: &VoxelDomain, u: usize, v: usize) -> f64 {
    let (a, b) = (d.spec.center(d.spec.unlinear(u)), d.spec.center(d.spec.unlinear(v)));
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Exhaustive shortest-path values by relaxation to a fixpoint: the least
/// fixpoint of dist[v] = min(dist[v], dist[u] + w) equals the minimum over
/// all paths of the left-folded sum, the same arithmetic the geodesic
/// solver folds along its optimal path.
fn oracle_shortest(d: &VoxelDomain, src: usize, w: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let n = d.spec.cell_count();
    let occ: Vec<usize> = (0..n).filter(|&i| d.occ[i]).collect();
    let mut dist = vec![f64::INFINITY; n];
    dist[src] = 0.0;
    loop {
        let mut changed = false;
        for &u in &occ {
            if dist[u].is_infinite() {
                continue;
            }
            for v in moore_neighbors(d, u) {
                let cand = dist[u] + w(u, v);
                if cand < dist[v] {
                    dist[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

/// Exhaustive maximin bottleneck widths by relaxation to a fixpoint.
fn oracle_width(d: &VoxelDomain, df: &ScalarField, src: usize) -> Vec<f64> {
    let n = d.spec.cell_count();
    let occ: Vec<usize> = (0..n).filter(|&i| d.occ[i]).collect();
    let mut width = vec![f64::NEG_INFINITY; n];
    width[src] = df.values[src];
    loop {
        let mut changed = false;
        for &u in &occ {
            if width[u] == f64::NEG_INFINITY {
                continue;
            }
            for v in moore_neighbors(d, u) {
                let cand = width[u].min(df.values[v]);
                if cand > width[v] {
                    width[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return width;
        }
    }
}

/// Seeded random occupied pairs from the largest full-adjacency component.
fn sample_pairs(d: &VoxelDomain, n: usize, seed: u64) -> Vec<(Cell, Cell)> {
    let lab = components(d, Adjacency::Full);
    let mut sizes = vec![0usize; lab.count];
    for (i, &l) in lab.labels.iter().enumerate() {
        if d.occ[i] {
            sizes[l] += 1;
        }
    }
    let big = sizes.iter().enumerate().max_by_key(|&(_, &s)| s).map(|(l, _)| l).unwrap();
    let cells: Vec<usize> =
        (0..d.spec.cell_count()).filter(|&i| d.occ[i] && lab.labels[i] == big).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let i = cells[rng.gen_range(0..cells.len())];
        let j = cells[rng.gen_range(0..cells.len())];
        if i != j {
            out.push((d.spec.unlinear(i), d.spec.unlinear(j)));
        }
    }
    out
}

fn raster(scene: &Scene, res: usize) -> VoxelDomain {
    let spec = scene.grid(res).unwrap();
    rasterize(scene, &spec).unwrap().0
}

fn drift(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi / lo - 1.0
}

// ---------------------------------------------------------- criterion 1

const ORACLE_BUDGET: Duration = Duration::from_secs(60);

#[test]
fn c01_path_metric_oracles() {
    criterion(1, "path metric oracles", || {
        let t0 = Instant::now();
        let mut compared = 0usize;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = if seed % 2 == 0 { 2 } else { 3 };
            let mut shape = [1usize; 3];
            for a in 0..dim {
                shape[a] = rng.gen_range(5..=12);
            }
            let spacing = rng.gen_range(0.05..0.25);
            let origin = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0];
            let spec = GridSpec::new(dim, shape, spacing, origin).unwrap();
            let mut d = VoxelDomain::empty(spec.clone());
            for c in spec.cells() {
                if rng.gen_bool(0.78) {
                    d.set(c, true);
                }
            }
            if d.occupied_count() < 4 {
                continue;
            }
            let df = distance_transform(&d).unwrap();
            for (x, y) in sample_pairs(&d, 3, seed + 100) {
                let (ix, iy) = (spec.linear(x), spec.linear(y));
                let inner = inner_geodesic(&d, &df, x, y).unwrap();
                let oe = oracle_shortest(&d, ix, |u, v| euclid_w(&d, u, v));
                assert_eq!(inner.euclid_length, oe[iy], "inner geodesic length, seed {seed}");
                let qh = quasihyperbolic_geodesic(&d, &df, x, y).unwrap();
                let oq = oracle_shortest(&d, ix, |u, v| {
                    euclid_w(&d, u, v) * 0.5 * (1.0 / df.values[u] + 1.0 / df.values[v])
                });
                assert_eq!(qh.qh_length, oq[iy], "quasihyperbolic length, seed {seed}");
                let bp = bottleneck_path(&d, &df, x, y).unwrap();
                let ow = oracle_width(&d, &df, ix);
                assert_eq!(bp.bottleneck, ow[iy], "bottleneck width, seed {seed}");
                compared += 1;
            }
        }
        assert!(compared >= 50, "only {compared} oracle comparisons ran");
        assert!(t0.elapsed() < ORACLE_BUDGET, "oracle suite took {:?}", t0.elapsed());
    });
}

// ---------------------------------------------------------- criterion 2

const HALF_PLANE_REL_TOL: f64 = 0.05;

#[test]
fn c02_half_plane_quasihyperbolic() {
    criterion(2, "half-plane quasihyperbolic oracle", || {
        let exact = 3.0f64.ln();
        let mut errors = Vec::new();
        for res in [64usize, 128] {
            let spacing = 1.0 / res as f64;
            let spec = GridSpec::new(2, [res, res, 1], spacing, [-0.5, 0.0, 0.0]).unwrap();
            let mut d = VoxelDomain::full(spec.clone());
            // boundary only at y = 0: all other window faces are open
            d.open_faces = [[true, true], [false, true], [false, false]];
            let df = distance_transform(&d).unwrap();
            let x = spec.nearest_cell([0.0, 0.25, 0.0]);
            let y = spec.nearest_cell([0.0, 0.75, 0.0]);
            let k = quasihyperbolic_geodesic(&d, &df, x, y).unwrap().qh_length;
            errors.push((k - exact).abs() / exact);
        }
        assert!(errors[0] < HALF_PLANE_REL_TOL, "coarse relative error {}", errors[0]);
        assert!(errors[1] < errors[0], "no refinement: {} -> {}", errors[0], errors[1]);
    });
}

// ---------------------------------------------------------- criterion 3

const BALL_JOHN_RANGE: (f64, f64) = (1.0, 1.3);

#[test]
fn c03_ball_john() {
    criterion(3, "unit ball john", || {
        let spec = GridSpec::cube(3, 64, -1.05, 1.05).unwrap();
        let d = VoxelDomain::full(spec.clone())
            .restrict(&BallSpec::euclidean([0.0; 3], 1.0), RestrictMode::KeepInside)
            .unwrap();
        let df = distance_transform(&d).unwrap();
        let x0 = spec.nearest_cell([0.0; 3]);
        let mut samples: Vec<Cell> = (0..8)
            .map(|k| {
                let th = k as f64 * std::f64::consts::TAU / 8.0;
                spec.nearest_cell([0.85 * th.cos(), 0.85 * th.sin(), 0.0])
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let occ: Vec<usize> = (0..spec.cell_count()).filter(|&i| d.occ[i]).collect();
        for _ in 0..10 {
            samples.push(spec.unlinear(occ[rng.gen_range(0..occ.len())]));
        }
        samples.retain(|&s| s != x0);
        let rep = check_john(&d, &df, x0, &samples, JohnVariant::Diam, None).unwrap();
        let sup = rep.sup.unwrap();
        assert!(
            (BALL_JOHN_RANGE.0..=BALL_JOHN_RANGE.1).contains(&sup),
            "ball diam constant {sup}"
        );
        for &s in &samples {
            let one = [s];
            let dist = check_john(&d, &df, x0, &one, JohnVariant::Dist, None).unwrap();
            let diam = check_john(&d, &df, x0, &one, JohnVariant::Diam, None).unwrap();
            let len = check_john(&d, &df, x0, &one, JohnVariant::Length, None).unwrap();
            assert!(
                dist.sup <= diam.sup && diam.sup <= len.sup,
                "variant ordering broken at {s:?}: {:?} {:?} {:?}",
                dist.sup,
                diam.sup,
                len.sup
            );
        }
    });
}

// ---------------------------------------------------------- criterion 4

const CUSP_RESOLUTIONS: [usize; 3] = [64, 96, 128];
const CUSP_LLC2_DRIFT: f64 = 0.15;
const CUSP_SQRT_JOHN_DRIFT: f64 = 0.20;
// The linear-gauge lower bound at rim samples diverges, but its rate is
// capped by rasterization: the quadratic cusp profile admits occupied
// cells only to depth ~ sqrt(spacing) from the rim, so the bound grows
// like the square root of the resolution ratio (1.22x / 1.15x for the
// steps below), not linearly in it. The thresholds pin that rate with a
// small margin; measured: 2.24 -> 2.83 -> 3.16.
const CUSP_JOHN_STEP_GROWTH: [f64; 2] = [1.20, 1.08];
const CUSP_BALLSEP_STEP_GROWTH: [f64; 2] = [1.25, 1.10];
const CUSP_BUDGET: Duration = Duration::from_secs(600);

#[test]
fn c04_cusp_separation() {
    criterion(4, "cusp llc2 vs john/ball separation", || {
        let t0 = Instant::now();
        let scene = scene_cusp();
        let mut llc2 = Vec::new();
        let mut john_lb = Vec::new();
        let mut sqrt_k = Vec::new();
        let mut ballsep = Vec::new();
        for &res in &CUSP_RESOLUTIONS {
            let spec = scene.grid(res).unwrap();
            let (d, _) = rasterize(&scene, &spec).unwrap();
            let df = distance_transform(&d).unwrap();
            // rim-approaching sample: the occupied cell deepest into the rim
            let mut rim = None;
            let mut brho = 0.0f64;
            for c in spec.cells() {
                if d.occupied(c) {
                    let p = spec.center(c);
                    let rho = (p[0] * p[0] + p[2] * p[2]).sqrt();
                    if rho > brho {
                        brho = rho;
                        rim = Some(c);
                    }
                }
            }
            let rim = rim.unwrap();
            let x0 = spec.nearest_cell([0.0; 3]);
            let rj = check_john(&d, &df, x0, &[rim], JohnVariant::Diam, None).unwrap();
            john_lb.push(rj.lattice["lower_bound"].as_f64().unwrap());
            let phi = DistortionFunction::power(1.0, 0.5, Role::Down).unwrap();
            let rk = check_john(&d, &df, x0, &[rim], JohnVariant::Diam, Some(&phi)).unwrap();
            sqrt_k.push(rk.sup.unwrap());
            let centers = [
                [0.0, 0.0, 0.0],
                [0.9, 0.0, 0.0],
                [0.0, 0.9, 0.0],
                [0.5, 0.5, 0.0],
                [0.95, 0.0, 0.3],
            ];
            let cg: Vec<f64> = (0..28).map(|i| 1.15f64.powi(i)).collect();
            let rl = estimate_llc2(&d, &centers, &[0.15, 0.3, 0.6], &cg).unwrap();
            assert!(rl.is_finite(), "llc2 infinite at res {res}");
            llc2.push(rl.sup.unwrap());
            let cg: Vec<f64> = (0..60).map(|i| 1.08f64.powi(i)).collect();
            let rb = check_ball_separation(&d, &df, &[(rim, x0)], &cg, 6).unwrap();
            ballsep.push(rb.sup.unwrap());
        }
        assert!(drift(&llc2) < CUSP_LLC2_DRIFT, "llc2 drift {:?}", llc2);
        assert!(drift(&sqrt_k) < CUSP_SQRT_JOHN_DRIFT, "sqrt john drift {:?}", sqrt_k);
        for step in 0..2 {
            let g = john_lb[step + 1] / john_lb[step];
            assert!(
                g >= CUSP_JOHN_STEP_GROWTH[step],
                "john lower bound growth {g} at step {step}: {john_lb:?}"
            );
            let g = ballsep[step + 1] / ballsep[step];
            assert!(
                g >= CUSP_BALLSEP_STEP_GROWTH[step],
                "ball separation growth {g} at step {step}: {ballsep:?}"
            );
        }
        assert!(t0.elapsed() < CUSP_BUDGET, "cusp suite took {:?}", t0.elapsed());
    });
}

// ---------------------------------------------------------- criterion 5

#[test]
fn c05_betti_suite() {
    criterion(5, "betti suite", || {
        let check = |d: &VoxelDomain, expect: &[usize]| {
            let cx = build_complex(d);
            assert!(check_dd_zero(&cx), "boundary of boundary nonzero");
            let top = if d.spec.dim == 2 { 1 } else { 2 };
            let mut got = Vec::new();
            for p in 0..=top {
                let (r, torsion) = betti(&cx, p, Ring::Integer).unwrap();
                assert!(torsion.is_empty(), "unexpected torsion in H_{p}");
                got.push(r);
            }
            assert_eq!(got, expect, "betti mismatch");
            // Euler characteristic from cell counts vs from ranks
            // (degree 0 is reduced, so add the dropped component back)
            let mut chi = (got[0] + 1) as i64;
            for p in 1..=top {
                chi += if p % 2 == 0 { got[p] as i64 } else { -(got[p] as i64) };
            }
            assert_eq!(cx.euler_characteristic(), chi, "euler identity");
        };

        let box3 = VoxelDomain::full(GridSpec::cube(3, 20, 0.0, 1.0).unwrap());
        check(&box3, &[0, 0, 0]);

        let spec = GridSpec::cube(2, 48, -1.0, 1.0).unwrap();
        let annulus = VoxelDomain::full(spec)
            .restrict(&BallSpec::euclidean([0.0; 3], 0.9), RestrictMode::KeepInside)
            .unwrap()
            .restrict(&BallSpec::euclidean([0.0; 3], 0.4), RestrictMode::KeepOutside)
            .unwrap();
        check(&annulus, &[0, 1]);

        let spec = GridSpec::cube(3, 48, -1.0, 1.0).unwrap();
        let solid = SceneNode::SolidTorus {
            center: [0.0; 3],
            axis: [0.0, 0.0, 1.0],
            major: 0.55,
            minor: 0.25,
        };
        let mut d = VoxelDomain::empty(spec.clone());
        for c in spec.cells() {
            if solid.member(spec.center(c)) {
                d.set(c, true);
            }
        }
        check(&d, &[0, 1, 0]);

        let shell = SceneNode::TorusShell {
            center: [0.0; 3],
            axis: [0.0, 0.0, 1.0],
            major: 0.55,
            minor: 0.25,
            thickness: 0.12,
            sector: None,
        };
        let spec = GridSpec::cube(3, 56, -1.0, 1.0).unwrap();
        let mut d = VoxelDomain::empty(spec.clone());
        for c in spec.cells() {
            if shell.member(spec.center(c)) {
                d.set(c, true);
            }
        }
        check(&d, &[0, 2, 1]);

        let pt = scene_pinched_torus(&PinchedTorusParams::default()).unwrap();
        let d = raster(&pt, pt.meta.default_res);
        let cx = build_complex(&d);
        assert!(check_dd_zero(&cx));
        let (b1, t1) = betti(&cx, 1, Ring::Integer).unwrap();
        assert_eq!(b1, 2, "pinched torus shell rank");
        assert!(t1.is_empty());
    });
}

// ---------------------------------------------------------- criterion 6

const MUSHROOM_BUDGET: Duration = Duration::from_secs(1200);

#[test]
fn c06_mushroom_zero_map() {
    criterion(6, "mushroom zero map", || {
        let t0 = Instant::now();
        let scene = scene_mushroom(&MushroomParams::default()).unwrap();
        let spec = scene.grid(scene.meta.default_res).unwrap();
        let r1 = scene.meta.radii["trunc_stage1"];
        let r2 = scene.meta.radii["trunc_all"];
        let a_scene = scene_truncated_at(&scene, "z", r1).unwrap();
        let b_scene = scene_truncated_at(&scene, "z", r2).unwrap();
        let (x_dom, _) = rasterize(&scene, &spec).unwrap();
        let (a_dom, _) = rasterize(&a_scene, &spec).unwrap();
        let (b_dom, _) = rasterize(&b_scene, &spec).unwrap();
        let a_cx = build_complex(&a_dom);
        let b_cx = build_complex(&b_dom);
        let x_cx = build_complex(&x_dom);
        let basis = h1_basis(&a_cx).unwrap();
        assert_eq!(basis.rank, 3, "stage-1 region rank");
        let rep = fast_sequence_check(&a_cx, &b_cx, &x_cx, 1).unwrap();
        assert!(rep.fast, "sequence not fast: {:?}", rep.flags);
        for z in &basis.reps {
            assert!(
                bounds_in(&b_cx, z, Ring::Integer).unwrap().is_some(),
                "kernel generator does not bound over the integers"
            );
        }
        assert!(t0.elapsed() < MUSHROOM_BUDGET, "mushroom took {:?}", t0.elapsed());
    });
}

// ---------------------------------------------------------- criterion 7

#[test]
fn c07_trumpet_slab_zero_map() {
    criterion(7, "trumpet slab zero map", || {
        let scene = scene_trumpet(3).unwrap();
        let spec = scene.grid(scene.meta.default_res).unwrap();
        let ell = scene.meta.radii["ell_small"];
        let ell2 = scene.meta.radii["ell_large"];
        let a_scene = trumpet_truncation(&scene, ell);
        let b_scene = trumpet_truncation(&scene, ell2);
        let (a_dom, _) = rasterize(&a_scene, &spec).unwrap();
        let (b_dom, _) = rasterize(&b_scene, &spec).unwrap();
        let a_cx = build_complex(&a_dom);
        let b_cx = build_complex(&b_dom);
        let basis = h1_basis(&a_cx).unwrap();
        assert!(basis.rank > 0, "cut trumpet has trivial H1, map is vacuous");
        for z in &basis.reps {
            assert!(
                bounds_in(&b_cx, z, Ring::Integer).unwrap().is_some(),
                "induced map is not zero"
            );
        }
        // the marked loop is a nonzero class behind the cut and dies two
        // stages later
        let gamma = snap_loop(&a_cx, &scene.meta.markers["gamma"]).unwrap();
        assert!(
            bounds_in(&a_cx, &gamma, Ring::Rational).unwrap().is_none(),
            "marker loop already bounds in the cut region"
        );
        assert!(
            bounds_in(&b_cx, &gamma, Ring::Integer).unwrap().is_some(),
            "marker loop survives in the larger region"
        );
    });
}

// ---------------------------------------------------------- criterion 8

const WALL_RESOLUTIONS: [usize; 2] = [170, 180];
const WALL_SPACING_FACTOR: f64 = 2.2;
const WALL_UNIFORMITY_DRIFT: f64 = 0.25;
const WALL_BALLSEP_DRIFT: f64 = 0.25;
const WALL_HLOG_BT_DRIFT: f64 = 0.25;

/// Nearest occupied cell to a physical point, searching a small window
/// around the geometric nearest cell.
fn snap_occupied(d: &VoxelDomain, p: Point) -> Cell {
    let c = d.spec.nearest_cell(p);
    if d.occupied(c) {
        return c;
    }
    let mut best = None;
    let mut bd = f64::INFINITY;
    for dz in -3isize..=3 {
        for dy in -3isize..=3 {
            for dx in -3isize..=3 {
                let o = [dx, dy, dz];
                let mut nb = [0usize; 3];
                let mut ok = true;
                for a in 0..3 {
                    let v = c[a] as isize + o[a];
                    if v < 0 || v >= d.spec.shape[a] as isize {
                        ok = false;
                        break;
                    }
                    nb[a] = v as usize;
                }
                if ok && d.occupied(nb) {
                    let q = d.spec.center(nb);
                    let dist =
                        (0..3).map(|a| (q[a] - p[a]).powi(2)).sum::<f64>();
                    if dist < bd {
                        bd = dist;
                        best = Some(nb);
                    }
                }
            }
        }
    }
    best.expect("no occupied cell near sample point")
}

#[test]
fn c08_trumpet_wall_conditions() {
    criterion(8, "trumpet wall conditions", || {
        let scene = scene_trumpet_wall(&[2, 2], WALL_SPACING_FACTOR).unwrap();
        let mut uniformity = Vec::new();
        let mut ballsep = Vec::new();
        let mut hlogbt = Vec::new();
        // pair endpoints are fixed physical points, sampled once at the
        // coarse resolution, so the drift compares like with like
        let mut phys_pairs: Vec<(Point, Point)> = Vec::new();
        for (k, &res) in WALL_RESOLUTIONS.iter().enumerate() {
            let u = raster(&scene, res);
            let omega = u.complement_in_window();
            if k == 0 {
                let ocx = build_complex(&omega);
                let (b1, _) = betti(&ocx, 1, Ring::Mod2).unwrap();
                assert_eq!(b1, 0, "complement has nontrivial H1");
                phys_pairs = sample_pairs(&omega, 10, 11)
                    .into_iter()
                    .map(|(a, b)| (omega.spec.center(a), omega.spec.center(b)))
                    .collect();
            }
            let df = distance_transform(&omega).unwrap();
            let pairs: Vec<(Cell, Cell)> = phys_pairs
                .iter()
                .map(|&(a, b)| (snap_occupied(&omega, a), snap_occupied(&omega, b)))
                .collect();
            let ru = estimate_uniformity(&omega, &df, &pairs).unwrap();
            assert!(ru.is_finite(), "uniformity infinite at res {res}");
            uniformity.push(ru.sup.unwrap());
            let cg: Vec<f64> = (0..40).map(|i| 1.1f64.powi(i)).collect();
            let rb = check_ball_separation(&omega, &df, &pairs[..3], &cg, 30).unwrap();
            assert!(rb.is_finite(), "ball separation infinite at res {res}");
            ballsep.push(rb.sup.unwrap());
            let rh = estimate_hlog_bt(&u, 1, 50, 23).unwrap();
            assert!(rh.is_finite(), "hlog bounded turning infinite at res {res}");
            hlogbt.push(rh.sup.unwrap());
        }
        assert!(drift(&uniformity) < WALL_UNIFORMITY_DRIFT, "uniformity {uniformity:?}");
        assert!(drift(&ballsep) < WALL_BALLSEP_DRIFT, "ball separation {ballsep:?}");
        assert!(drift(&hlogbt) < WALL_HLOG_BT_DRIFT, "hlog bt {hlogbt:?}");
    });
}

// ---------------------------------------------------------- criterion 9

#[test]
fn c09_p0_crosscheck() {
    criterion(9, "llc vs p0 joinability", || {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let spec = GridSpec::cube(2, 40, -1.0, 1.0).unwrap();
            let mut d = VoxelDomain::empty(spec.clone());
            let balls = rng.gen_range(3..=6);
            let node = SceneNode::Union {
                children: (0..balls)
                    .map(|_| SceneNode::Ball {
                        center: [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), 0.0],
                        radius: rng.gen_range(0.15..0.4),
                    })
                    .collect(),
            };
            for c in spec.cells() {
                if node.member(spec.center(c)) {
                    d.set(c, true);
                }
            }
            let mut centers = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    centers.push([
                        -1.0 + (i as f64 + 0.5) * 2.0 / 3.0,
                        -1.0 + (j as f64 + 0.5) * 2.0 / 3.0,
                        spec.center([0, 0, 0])[2],
                    ]);
                }
            }
            let radii = [0.12, 0.25];
            let cg = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];
            let l1 = estimate_llc1(&d, &centers, &radii, &cg).unwrap();
            let j1 = estimate_hlog_joinability(&d, 0, JoinMode::Outer, &centers, &radii, &cg)
                .unwrap();
            assert_eq!(l1.sup, j1.sup, "llc1 vs outer p0, seed {seed}");
            let l2 = estimate_llc2(&d, &centers, &radii, &cg).unwrap();
            let j2 = estimate_hlog_joinability(&d, 0, JoinMode::Inner, &centers, &radii, &cg)
                .unwrap();
            assert_eq!(l2.sup, j2.sup, "llc2 vs inner p0, seed {seed}");
        }
    });
}

// --------------------------------------------------------- criterion 10

const DUALITY_FACTOR: f64 = 4.0;

fn planar_suite() -> Vec<Scene> {
    vec![scene_disk(), scene_comb(), scene_horseshoe(), scene_slit_disk(), scene_blob(5)]
}

#[test]
fn c10_plane_duality() {
    criterion(10, "plane duality", || {
        for scene in planar_suite() {
            let spec = scene.grid(scene.meta.default_res).unwrap();
            let (d, _) = rasterize(&scene, &spec).unwrap();
            let dilated = d.dilate();
            let lo = scene.meta.window_lo;
            let hi = scene.meta.window_hi;
            let mut centers = Vec::new();
            for i in 0..5 {
                for j in 0..5 {
                    centers.push([
                        lo[0] + (i as f64 + 0.5) / 5.0 * (hi[0] - lo[0]),
                        lo[1] + (j as f64 + 0.5) / 5.0 * (hi[1] - lo[1]),
                        spec.center([0, 0, 0])[2],
                    ]);
                }
            }
            let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]);
            let radii = [0.04 * ext, 0.08 * ext, 0.16 * ext];
            let cg: Vec<f64> = (0..40).map(|i| 1.12f64.powi(i)).collect();
            let rl = estimate_llc2(&dilated, &centers, &radii, &cg).unwrap();
            let comp = d.complement_in_window();
            let pairs = sample_pairs(&comp, 40, 3);
            let rb = estimate_bounded_turning(&comp, &pairs).unwrap();
            assert_eq!(
                rl.is_finite(),
                rb.is_finite(),
                "finiteness verdicts differ on {}",
                scene.name
            );
            if let (Some(a), Some(b)) = (rl.sup, rb.sup) {
                let ratio = a / b;
                assert!(
                    (1.0 / DUALITY_FACTOR..=DUALITY_FACTOR).contains(&ratio),
                    "constants {a} vs {b} on {}",
                    scene.name
                );
            }
        }
    });
}

// --------------------------------------------------------- criterion 11

#[test]
fn c11_relative_joinability_bound() {
    criterion(11, "relative joinability bound", || {
        // symbolic form first: the relative gauge is 2 phi + id
        for c in [1.0, 2.0, 3.5] {
            let phi = DistortionFunction::linear(c, Role::Up).unwrap();
            let rel = relative_from_absolute(&phi).unwrap();
            for t in [0.1, 1.0, 7.0] {
                assert!((rel.eval(t) - (2.0 * phi.eval(t) + t)).abs() < 1e-12);
            }
        }
        for scene in planar_suite() {
            let spec = scene.grid(scene.meta.default_res).unwrap();
            let (d, _) = rasterize(&scene, &spec).unwrap();
            let occ: Vec<usize> = (0..spec.cell_count()).filter(|&i| d.occ[i]).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let abs_centers: Vec<Point> = (0..10)
                .map(|_| spec.center(spec.unlinear(occ[rng.gen_range(0..occ.len())])))
                .collect();
            let lo = scene.meta.window_lo;
            let hi = scene.meta.window_hi;
            let mut arb_centers = abs_centers.clone();
            for i in 0..4 {
                for j in 0..4 {
                    arb_centers.push([
                        lo[0] + (i as f64 + 0.5) / 4.0 * (hi[0] - lo[0]),
                        lo[1] + (j as f64 + 0.5) / 4.0 * (hi[1] - lo[1]),
                        spec.center([0, 0, 0])[2],
                    ]);
                }
            }
            let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]);
            let radii = [0.08 * ext, 0.16 * ext];
            let cg: Vec<f64> = (0..39).map(|i| 1.0 + 0.5 * i as f64).collect();
            for p in [0usize, 1] {
                let abs =
                    estimate_hlog_joinability(&d, p, JoinMode::Outer, &abs_centers, &radii, &cg)
                        .unwrap();
                let rel =
                    estimate_hlog_joinability(&d, p, JoinMode::Outer, &arb_centers, &radii, &cg)
                        .unwrap();
                match (abs.sup, rel.sup) {
                    (Some(a), Some(r)) => assert!(
                        r <= 2.0 * a + 1.0 + 1e-9,
                        "p={p} {}: relative {r} vs absolute {a}",
                        scene.name
                    ),
                    (Some(a), None) => {
                        panic!("p={p} {}: absolute {a} finite, relative infinite", scene.name)
                    }
                    (None, _) => {}
                }
            }
        }
    });
}

// --------------------------------------------------------- criterion 12

const ETA_REL_TOL: f64 = 1e-9;

#[test]
fn c12_eta_quadrature() {
    criterion(12, "eta quadrature", || {
        let id = DistortionFunction::identity();
        for n in [2usize, 3] {
            for (c, t) in [(1.0, 0.5), (2.5, 1.7)] {
                let (v, div) = eta_from_phi(&id, c, n, t).unwrap();
                assert!(!div);
                let exact = c * c * t;
                assert!((v - exact).abs() <= ETA_REL_TOL * exact, "id n={n}: {v} vs {exact}");
            }
        }
        let double = DistortionFunction::linear(2.0, Role::Up).unwrap();
        for (c, t) in [(1.0, 1.0), (3.0, 0.7)] {
            let (v, div) = eta_from_phi(&double, c, 3, t).unwrap();
            assert!(!div);
            let exact = 8.0 * c * c * t;
            assert!((v - exact).abs() <= ETA_REL_TOL * exact, "2t: {v} vs {exact}");
        }
        // sqrt-like table: phi^{-1}(s) ~ s^2, so the n = 3 integrand ~ s^{-2}
        let ts: Vec<f64> = (1..=60).map(|i| (i as f64 / 60.0).powi(2)).collect();
        let vs: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
        let phi = DistortionFunction::table(ts, vs, Role::Up).unwrap();
        let (v, div) = eta_from_phi(&phi, 1.0, 3, 0.5).unwrap();
        assert!(div, "divergent table not flagged");
        assert!(v.is_infinite());
    });
}

// --------------------------------------------------------- criterion 13

#[test]
fn c13_determinism() {
    criterion(13, "byte-identical reruns", || {
        let bin = env!("CARGO_BIN_EXE_johnlab");
        let dir = tempfile::tempdir().unwrap();
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin)
                .args(args)
                .current_dir(dir.path())
                .env("JOHNLAB_THREADS", "2")
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "command {args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        let snapshot = |names: &[&str]| -> Vec<Vec<u8>> {
            names.iter().map(|n| std::fs::read(dir.path().join(n)).unwrap()).collect()
        };
        let gen = ["generate", "--preset", "blob", "--seed", "3", "--res", "48", "--out", "blob.vxg"];
        run(&gen);
        let first = snapshot(&["blob.vxg", "blob.meta.json"]);
        run(&gen);
        assert_eq!(first, snapshot(&["blob.vxg", "blob.meta.json"]), "generate not stable");
        let analyze = [
            "analyze", "--grid", "blob.vxg", "--cond", "llc2", "--centers", "lattice:3",
            "--seed", "5", "--out", "llc2.json",
        ];
        run(&analyze);
        let first = snapshot(&["llc2.json"]);
        run(&analyze);
        assert_eq!(first, snapshot(&["llc2.json"]), "analyze not stable");
        let hom = ["homology", "--grid", "blob.vxg", "--betti", "--out", "betti.json"];
        run(&hom);
        let first = snapshot(&["betti.json"]);
        run(&hom);
        assert_eq!(first, snapshot(&["betti.json"]), "homology not stable");
        let eta = ["eta", "--phi", "linear:2", "--c", "1.5", "--n", "3", "--t-grid",
            "0.1:2:10", "--out", "eta.json"];
        run(&eta);
        let first = snapshot(&["eta.json"]);
        run(&eta);
        assert_eq!(first, snapshot(&["eta.json"]), "eta not stable");
        let rep = ["report", "--inputs", "llc2.json", "--out", "sum.json", "--csv", "sum.csv"];
        run(&rep);
        let first = snapshot(&["sum.json", "sum.csv"]);
        run(&rep);
        assert_eq!(first, snapshot(&["sum.json", "sum.csv"]), "report not stable");
    });
}
