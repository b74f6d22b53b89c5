//! Linear local connectivity estimators.
//!
//! LLC-1: cells of E inside B(a,r) must be joinable inside B(a,cr).
//! LLC-2: cells of E outside B(a,cr) must be joinable outside B(a,r).
//! Joinability is required only for pairs already joinable in E itself
//! (per ambient component), and LLC-2 counts escape through open window
//! faces as joinability toward infinity. Components use full adjacency,
//! which coincides with the connectivity of closed cubical complexes, so
//! these estimators agree exactly with the p = 0 homological joinability
//! sweeps computed on complexes.

use serde_json::json;

use crate::conditions::ConditionReport;
use crate::error::Result;
use crate::grid::{components, Adjacency, BallSpec, Point, RestrictMode, VoxelDomain};

/// Per-cell component labels, with every component that touches an open
/// window face merged into one class when `escape` is set.
fn labels(domain: &VoxelDomain, escape: bool) -> Vec<usize> {
    let lab = components(domain, Adjacency::Full);
    let mut out = lab.labels;
    if !escape || lab.count == 0 {
        return out;
    }
    let mut to_inf = vec![false; lab.count];
    for c in domain.spec.cells() {
        if domain.occupied(c) && domain.on_open_face(c) {
            to_inf[out[domain.spec.linear(c)]] = true;
        }
    }
    if let Some(target) = to_inf.iter().position(|&b| b) {
        for l in out.iter_mut() {
            if *l != usize::MAX && to_inf[*l] {
                *l = target;
            }
        }
    }
    out
}

/// All A-cells within one ambient component must share a B-component.
fn joined(a: &VoxelDomain, b_labels: &[usize], x_labels: &[usize]) -> bool {
    // x-label -> b-label of the first A cell seen there
    let mut seen: std::collections::HashMap<usize, usize> = Default::default();
    for (i, &occ) in a.occ.iter().enumerate() {
        if !occ {
            continue;
        }
        let (xl, bl) = (x_labels[i], b_labels[i]);
        debug_assert!(xl != usize::MAX && bl != usize::MAX);
        match seen.get(&xl) {
            None => {
                seen.insert(xl, bl);
            }
            Some(&first) if first != bl => return false,
            _ => {}
        }
    }
    true
}

fn sweep(
    domain: &VoxelDomain,
    centers: &[Point],
    radii: &[f64],
    c_grid: &[f64],
    inner: bool,
) -> Result<ConditionReport> {
    let name = if inner { "llc-2" } else { "llc-1" };
    let mut report = ConditionReport::new(name);
    report.lattice = json!({"centers": centers, "radii": radii, "c_grid": c_grid});
    report.tolerances = json!({});
    let escape = inner;
    let x_labels = labels(domain, escape);
    let mut cs = c_grid.to_vec();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut minima = Vec::new();
    let mut sup = 0.0f64;
    let mut any_inf = false;
    let mut witness = serde_json::Value::Null;
    let mut worst = -1.0f64;
    for &a in centers {
        for &r in radii {
            if r <= 0.0 {
                report.flag("zero-radius-skipped");
                minima.push(None);
                continue;
            }
            let mut min_c = None;
            for &c in &cs {
                if c < 1.0 {
                    report.flag("c-below-1-skipped");
                    continue;
                }
                let (a_dom, b_dom) = if inner {
                    (
                        domain.restrict(&BallSpec::euclidean(a, c * r), RestrictMode::KeepOutside)?,
                        domain.restrict(&BallSpec::euclidean(a, r), RestrictMode::KeepOutside)?,
                    )
                } else {
                    (
                        domain.restrict(&BallSpec::euclidean(a, r), RestrictMode::KeepInside)?,
                        domain.restrict(&BallSpec::euclidean(a, c * r), RestrictMode::KeepInside)?,
                    )
                };
                let b_labels = labels(&b_dom, escape);
                if joined(&a_dom, &b_labels, &x_labels) {
                    min_c = Some(c);
                    break;
                }
            }
            minima.push(min_c);
            let score = min_c.unwrap_or(f64::INFINITY);
            if score > worst {
                worst = score;
                witness = json!({"center": a, "radius": r, "min_c": min_c});
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
        if inner {
            // canonical up form phi(r) = c r; the down gauge is psi = phi^{-1}
            report.parameterization =
                json!({"kind": "linear", "constant": sup, "psi_constant": 1.0 / sup});
        } else {
            report.linear_parameterization(Some(sup));
        }
    }
    report.witness = witness;
    Ok(report)
}

pub fn estimate_llc1(
    domain: &VoxelDomain,
    centers: &[Point],
    radii: &[f64],
    c_grid: &[f64],
) -> Result<ConditionReport> {
    sweep(domain, centers, radii, c_grid, false)
}

pub fn estimate_llc2(
    domain: &VoxelDomain,
    centers: &[Point],
    radii: &[f64],
    c_grid: &[f64],
) -> Result<ConditionReport> {
    sweep(domain, centers, radii, c_grid, true)
}
