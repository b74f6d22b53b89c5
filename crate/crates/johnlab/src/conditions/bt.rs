//! Bounded-turning estimator: each sampled pair must connect inside a ball
//! whose size is comparable to the pair's distance. The minimal radius R
//! around the pair midpoint with both endpoints in one component of
//! set intersected with B(m, R) bounds the connecting continuum's diameter
//! by 2R, giving the profile c = 2R / |x - y|.

use serde_json::json;

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};
use crate::grid::{components, dist, Adjacency, BallSpec, Cell, Point, RestrictMode, VoxelDomain};

/// relative bisection tolerance on the minimal radius
const R_REL_TOL: f64 = 1.01;

fn connected_in_ball(set: &VoxelDomain, m: Point, r: f64, x: Cell, y: Cell) -> Result<bool> {
    let sub = set.restrict(&BallSpec::euclidean(m, r), RestrictMode::KeepInside)?;
    if !sub.occupied(x) || !sub.occupied(y) {
        return Ok(false);
    }
    let lab = components(&sub, Adjacency::Full);
    Ok(lab.labels[sub.spec.linear(x)] == lab.labels[sub.spec.linear(y)])
}

pub fn estimate_bounded_turning(
    set: &VoxelDomain,
    pairs: &[(Cell, Cell)],
) -> Result<ConditionReport> {
    let spec = &set.spec;
    for &(x, y) in pairs {
        if !set.occupied(x) || !set.occupied(y) {
            return Err(Error::Precondition(format!("pair not occupied: {x:?} / {y:?}")));
        }
    }
    let lab = components(set, Adjacency::Full);
    let mut report = ConditionReport::new("bounded-turning");
    report.lattice = json!({"pairs": pairs});
    report.tolerances = json!({"radius_bisection_rel": R_REL_TOL - 1.0});
    let window_diag = (0..spec.dim)
        .map(|a| spec.shape[a] as f64 * spec.spacing)
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt();
    let mut sup = 0.0f64;
    let mut witness = serde_json::Value::Null;
    let mut profile = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        if lab.labels[spec.linear(x)] != lab.labels[spec.linear(y)] {
            return Err(Error::NotJoinable(format!(
                "pair {x:?} / {y:?} lies in different components"
            )));
        }
        let (px, py) = (spec.center(x), spec.center(y));
        let sep = dist(px, py);
        if sep <= 0.0 {
            report.flag("coincident-pair-unit-profile");
            profile.push(1.0);
            sup = sup.max(1.0);
            continue;
        }
        let m = [0.5 * (px[0] + py[0]), 0.5 * (px[1] + py[1]), 0.5 * (px[2] + py[2])];
        // bracket: below sep/2 the ball misses an endpoint; grow until joined
        let mut lo = sep / 2.0;
        let mut hi = sep / 2.0 + spec.spacing;
        while !connected_in_ball(set, m, hi, x, y)? {
            hi *= 2.0;
            if hi > 2.0 * window_diag {
                return Err(Error::Invariant(format!(
                    "pair {x:?} / {y:?} joined globally but not in any window ball"
                )));
            }
        }
        while hi / lo > R_REL_TOL {
            let mid = (lo * hi).sqrt();
            if connected_in_ball(set, m, mid, x, y)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let c = 2.0 * hi / sep;
        profile.push(c);
        if c > sup {
            sup = c;
            witness = json!({"pair": [x, y], "radius": hi, "separation": sep, "profile": c});
        }
    }
    report.lattice["profile"] = json!(profile);
    report.set_sup(sup);
    report.linear_parameterization(Some(sup));
    report.witness = witness;
    Ok(report)
}
