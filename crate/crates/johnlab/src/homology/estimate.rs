//! Sweep estimators for homological joinability and homological bounded
//! turning.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};
use crate::grid::{dist, BallSpec, Point, RestrictMode, VoxelDomain};
use crate::homology::{
    betti, build_complex, fast_sequence_check, h1_basis, int_reduce_boundary, pack,
    skeleton_components, unpack, ChainVector, CubicalComplex, Mod2Reducer, Ring,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinMode {
    /// Sequence H_p(A cap B(a,r)) -> H_p(A cap B(a,cr)) -> H_p(A).
    Outer,
    /// Sequence H_p(A minus closed B(a,cr)) -> H_p(A minus closed B(a,r)) -> H_p(A).
    Inner,
}

impl JoinMode {
    fn name(self) -> &'static str {
        match self {
            JoinMode::Outer => "outer",
            JoinMode::Inner => "inner",
        }
    }
}

/// Vertices of a complex lying on an open window face of the domain.
fn open_face_vertices(cx: &CubicalComplex, domain: &VoxelDomain) -> Vec<usize> {
    let spec = &domain.spec;
    let mut out = Vec::new();
    for (i, &k) in cx.cells[0].iter().enumerate() {
        let c = unpack(k);
        for axis in 0..spec.dim {
            for side in 0..2 {
                if !domain.open_faces[axis][side] {
                    continue;
                }
                let lim = if side == 0 { 0 } else { 2 * spec.shape[axis] as u64 };
                if c[axis] == lim {
                    out.push(i);
                    break;
                }
            }
        }
    }
    out
}

/// Component labels on a complex's vertex set, with every component that
/// touches an open window face merged into one class (the point at
/// infinity of the compactified space).
fn labels_with_escape(cx: &CubicalComplex, domain: &VoxelDomain, escape: bool) -> Vec<usize> {
    let (mut labels, count) = skeleton_components(cx);
    if !escape {
        return labels;
    }
    let escapees = open_face_vertices(cx, domain);
    if escapees.is_empty() {
        return labels;
    }
    let mut to_inf = vec![false; count];
    for v in escapees {
        to_inf[labels[v]] = true;
    }
    // remap: all escaping components share the label of the first one
    let target = to_inf.iter().position(|&b| b).unwrap();
    for l in labels.iter_mut() {
        if to_inf[*l] {
            *l = target;
        }
    }
    labels
}

/// p = 0 fast-sequence verdict on complexes with optional escape to
/// infinity: A-classes merging in X must already merge in B.
fn p0_fast_with_escape(
    a_cx: &CubicalComplex,
    b_cx: &CubicalComplex,
    x_cx: &CubicalComplex,
    a_dom: &VoxelDomain,
    b_dom: &VoxelDomain,
    x_dom: &VoxelDomain,
    escape: bool,
) -> bool {
    if a_cx.cell_count(0) == 0 {
        return true;
    }
    let la = labels_with_escape(a_cx, a_dom, escape);
    let lb = labels_with_escape(b_cx, b_dom, escape);
    let lx = labels_with_escape(x_cx, x_dom, escape);
    let na = la.iter().max().map_or(0, |&m| m + 1);
    let mut rep_of = vec![usize::MAX; na];
    for (v, &l) in la.iter().enumerate() {
        if rep_of[l] == usize::MAX {
            rep_of[l] = v;
        }
    }
    let mut by_x: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for &v in rep_of.iter().filter(|&&v| v != usize::MAX) {
        let key = a_cx.cells[0][v];
        by_x.entry(lx[x_cx.index[0][&key] as usize]).or_default().push(v);
    }
    for members in by_x.values() {
        if members.len() < 2 {
            continue;
        }
        let b_of = |v: usize| lb[b_cx.index[0][&a_cx.cells[0][v]] as usize];
        let first = b_of(members[0]);
        if members[1..].iter().any(|&v| b_of(v) != first) {
            return false;
        }
    }
    true
}

/// Smallest c in the grid making the (a, r) sequence fast over a sweep of
/// window centers and radii; the sup of those minima is the joinability
/// constant estimate.
pub fn estimate_hlog_joinability(
    domain: &VoxelDomain,
    p: usize,
    mode: JoinMode,
    centers: &[Point],
    radii: &[f64],
    c_grid: &[f64],
) -> Result<ConditionReport> {
    if p > 1 {
        return Err(Error::Precondition(format!("joinability estimator supports p in {{0,1}}, got {p}")));
    }
    let mut report = ConditionReport::new(&format!("hlog-joinability-p{}-{}", p, mode.name()));
    report.lattice = json!({
        "centers": centers,
        "radii": radii,
        "c_grid": c_grid,
    });
    report.tolerances = json!({});
    let x_cx = build_complex(domain);
    let escape = mode == JoinMode::Inner;
    let mut cs = c_grid.to_vec();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sup: f64 = 0.0;
    let mut any_inf = false;
    let mut witness = serde_json::Value::Null;
    let mut worst: f64 = -1.0;
    let mut minima: Vec<Option<f64>> = Vec::new();
    for &a in centers {
        for &r in radii {
            if r <= 0.0 {
                report.flag("zero-radius-skipped");
                minima.push(None);
                continue;
            }
            let mut min_c: Option<f64> = None;
            let mut last_fast_report = serde_json::Value::Null;
            for &c in &cs {
                if c < 1.0 {
                    report.flag("c-below-1-skipped");
                    continue;
                }
                let (a_dom, b_dom) = match mode {
                    JoinMode::Outer => (
                        domain.restrict(&BallSpec::euclidean(a, r), RestrictMode::KeepInside)?,
                        domain.restrict(&BallSpec::euclidean(a, c * r), RestrictMode::KeepInside)?,
                    ),
                    JoinMode::Inner => (
                        domain.restrict(&BallSpec::euclidean(a, c * r), RestrictMode::KeepOutside)?,
                        domain.restrict(&BallSpec::euclidean(a, r), RestrictMode::KeepOutside)?,
                    ),
                };
                let a_cx = build_complex(&a_dom);
                let b_cx = build_complex(&b_dom);
                let fast = if p == 0 {
                    p0_fast_with_escape(&a_cx, &b_cx, &x_cx, &a_dom, &b_dom, domain, escape)
                } else {
                    let rep = fast_sequence_check(&a_cx, &b_cx, &x_cx, p)?;
                    if !rep.fast {
                        last_fast_report = rep.to_json();
                    }
                    rep.fast
                };
                if fast {
                    min_c = Some(c);
                    break;
                }
            }
            minima.push(min_c);
            let score = min_c.unwrap_or(f64::INFINITY);
            if score > worst {
                worst = score;
                witness = json!({
                    "center": a,
                    "radius": r,
                    "min_c": min_c,
                    "detail": last_fast_report,
                });
            }
            match min_c {
                Some(c) => sup = sup.max(c),
                None => any_inf = true,
            }
        }
    }
    report.lattice["minima"] = json!(minima);
    if any_inf {
        report.set_sup(f64::INFINITY);
        report.linear_parameterization(None);
    } else {
        report.set_sup(sup);
        report.linear_parameterization(Some(sup));
    }
    report.witness = witness;
    Ok(report)
}

/// Axis pairs spanning the coordinate planes of the grid.
fn plane_axes(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &[(0, 1)]
    } else {
        &[(0, 1), (0, 2), (1, 2)]
    }
}

/// Rectangle edge loop in a coordinate plane, all corners at even doubled
/// coordinates; None when any edge is missing from the complex.
fn rectangle_cycle(
    cx: &CubicalComplex,
    base: [u64; 3],
    axes: (usize, usize),
    len0: u64,
    len1: u64,
) -> Option<ChainVector> {
    let mut terms: Vec<(u64, i64)> = Vec::new();
    let mut push_edge = |at: [u64; 3], axis: usize, sign: i64| -> bool {
        let mut c = at;
        c[axis] += 1;
        let key = pack(c);
        if !cx.has_cell(key) {
            return false;
        }
        terms.push((key, sign));
        true
    };
    let (u, v) = axes;
    let mut cur = base;
    for _ in 0..len0 {
        if !push_edge(cur, u, 1) {
            return None;
        }
        cur[u] += 2;
    }
    for _ in 0..len1 {
        if !push_edge(cur, v, 1) {
            return None;
        }
        cur[v] += 2;
    }
    for _ in 0..len0 {
        cur[u] -= 2;
        if !push_edge(cur, u, -1) {
            return None;
        }
    }
    for _ in 0..len1 {
        cur[v] -= 2;
        if !push_edge(cur, v, -1) {
            return None;
        }
    }
    let z = ChainVector::from_terms(1, terms);
    debug_assert!(z.boundary().is_zero());
    Some(z)
}

/// Does `z` bound (mod 2) in the complex of `domain` restricted to the open
/// ball B(center, radius)? None when some cell of z is missing there.
fn bounds_locally(
    domain: &VoxelDomain,
    z: &ChainVector,
    center: Point,
    radius: f64,
) -> Result<Option<bool>> {
    let sub = domain.restrict(&BallSpec::euclidean(center, radius), RestrictMode::KeepInside)?;
    let cx = build_complex(&sub);
    if z.coeffs.iter().any(|&(k, _)| !cx.has_cell(k)) {
        return Ok(None);
    }
    let rows = cx.rows_of(z)?;
    let odd: Vec<u32> = rows.iter().filter(|&&(_, c)| c % 2 != 0).map(|&(r, _)| r).collect();
    let mut red = Mod2Reducer::new(false);
    for col in &cx.boundary[2] {
        red.insert(col.iter().map(|&(r, _)| r).collect(), None);
    }
    if red.probe(odd).is_none() {
        return Ok(Some(false));
    }
    // integer certification of the bound
    let red_int = int_reduce_boundary(&cx, 2, false)?;
    Ok(Some(red_int.probe(&rows)?.is_some()))
}

/// Homological bounded turning: sampled 1-cycles must bound within a ball
/// comparable to their own diameter. Requires H_1(set) = 0.
pub fn estimate_hlog_bt(
    set: &VoxelDomain,
    p: usize,
    cycle_samples: usize,
    seed: u64,
) -> Result<ConditionReport> {
    if p != 1 {
        return Err(Error::Precondition(format!("hlog bounded turning supports p = 1, got {p}")));
    }
    let x_cx = build_complex(set);
    let (rank, _) = betti(&x_cx, 1, Ring::Rational)?;
    if rank != 0 {
        return Err(Error::NotBtEligible { p: 1, rank });
    }
    let spec = &set.spec;
    let mut report = ConditionReport::new("hlog-bounded-turning-p1");
    report.lattice = json!({
        "cycle_samples": cycle_samples,
        "seed": seed,
    });
    report.tolerances = json!({"radius_bisection_rel": 0.02});
    let occupied: Vec<usize> =
        (0..spec.cell_count()).filter(|&i| set.occ[i]).collect();
    if occupied.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let extent = (0..spec.dim)
        .map(|a| spec.shape[a] as f64 * spec.spacing)
        .fold(0.0f64, f64::max);
    let rmax_global = 2.0 * extent * (spec.dim as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cycles: Vec<ChainVector> = Vec::new();
    let mut attempts = 0usize;
    // lasso sampling: H1 generators of random ball windows (deduplicated by
    // class within each window by construction)
    while cycles.len() < cycle_samples && attempts < cycle_samples * 30 {
        attempts += 1;
        let i = occupied[rng.gen_range(0..occupied.len())];
        let a = spec.center(spec.unlinear(i));
        let rho = spec.spacing * rng.gen_range(3.0..(extent / spec.spacing / 2.0).max(4.0));
        let local =
            set.restrict(&BallSpec::euclidean(a, rho), RestrictMode::KeepInside)?;
        if local.occupied_count() == 0 {
            continue;
        }
        let lcx = build_complex(&local);
        let basis = h1_basis(&lcx)?;
        for z in basis.reps {
            if cycles.len() < cycle_samples {
                cycles.push(z);
            }
        }
        // random rectangle walk in the same window, for profile coverage
        if cycles.len() < cycle_samples {
            let c = spec.unlinear(i);
            let base = [2 * c[0] as u64, 2 * c[1] as u64, 2 * c[2] as u64];
            let &axes = &plane_axes(spec.dim)[rng.gen_range(0..plane_axes(spec.dim).len())];
            let l0 = rng.gen_range(1..=4);
            let l1 = rng.gen_range(1..=4);
            if let Some(z) = rectangle_cycle(&x_cx, base, axes, l0, l1) {
                cycles.push(z);
            }
        }
    }
    let mut sup: f64 = 0.0;
    let mut any_inf = false;
    let mut witness = serde_json::Value::Null;
    let mut worst = -1.0f64;
    let mut profile = Vec::with_capacity(cycles.len());
    for z in &cycles {
        let diam = z.support_diameter(spec);
        if diam <= 0.0 {
            report.flag("degenerate-cycle-skipped");
            continue;
        }
        let m = z.support_barycenter(spec);
        let r0 = z
            .coeffs
            .iter()
            .map(|&(k, _)| dist(crate::homology::cell_center(spec, k), m))
            .fold(0.0f64, f64::max)
            + 2.0 * spec.spacing;
        // bracket the minimal bounding radius
        let mut hi = r0;
        let mut hi_ok = matches!(bounds_locally(set, z, m, hi)?, Some(true));
        while !hi_ok && hi < rmax_global {
            hi *= 2.0;
            hi_ok = matches!(bounds_locally(set, z, m, hi)?, Some(true));
        }
        if !hi_ok {
            any_inf = true;
            report.flag("cycle-never-bounds-in-window");
            continue;
        }
        let mut lo = diam / 2.0 * 0.5;
        while hi / lo > 1.02 {
            let mid = (lo * hi).sqrt();
            if matches!(bounds_locally(set, z, m, mid)?, Some(true)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let c = 2.0 * hi / diam;
        profile.push(c);
        if c > worst {
            worst = c;
            witness = json!({
                "cycle": z.to_json(),
                "diameter": diam,
                "radius": hi,
                "profile": c,
            });
        }
        sup = sup.max(c);
    }
    report.lattice["cycles_sampled"] = json!(profile.len());
    if any_inf {
        report.set_sup(f64::INFINITY);
        report.linear_parameterization(None);
    } else {
        report.set_sup(sup);
        report.linear_parameterization(Some(sup));
    }
    report.witness = witness;
    Ok(report)
}
