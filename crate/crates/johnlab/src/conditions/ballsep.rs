//! Ball separation: along a quasihyperbolic geodesic from x to y, every
//! point z should be "seen" by the pair in the sense that the intrinsic
//! ball B_inner(z, C d(z)) either swallows an endpoint or separates x from
//! y when removed. The smallest such C per z, supped over pairs and z, is
//! the ball-separation constant estimate.

use serde_json::json;

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};
use crate::grid::{components, Adjacency, Cell, ScalarField, VoxelDomain};
use crate::metrics::{intrinsic_ball, quasihyperbolic_geodesic};

/// Are x and y still connected after dropping `removed` cells?
fn connected_without(
    domain: &VoxelDomain,
    removed: &[usize],
    ix: usize,
    iy: usize,
) -> bool {
    let mut cut = domain.clone();
    for &i in removed {
        cut.occ[i] = false;
    }
    if !cut.occ[ix] || !cut.occ[iy] {
        return false;
    }
    let lab = components(&cut, Adjacency::Full);
    lab.labels[ix] == lab.labels[iy]
}

pub fn check_ball_separation(
    domain: &VoxelDomain,
    df: &ScalarField,
    pairs: &[(Cell, Cell)],
    c_grid: &[f64],
    z_stride: usize,
) -> Result<ConditionReport> {
    let spec = &domain.spec;
    let mut cs: Vec<f64> = c_grid.iter().copied().filter(|&c| c > 0.0).collect();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if cs.is_empty() {
        return Err(Error::Precondition("ball separation needs a positive c grid".into()));
    }
    let stride = z_stride.max(1);
    let mut report = ConditionReport::new("ball-separation");
    report.lattice = json!({"pairs": pairs, "c_grid": c_grid, "z_stride": stride});
    report.tolerances = json!({});
    let mut sup = 0.0f64;
    let mut any_inf = false;
    let mut witness = serde_json::Value::Null;
    let mut worst = -1.0f64;
    for &(x, y) in pairs {
        if x == y {
            report.flag("coincident-pair-excluded");
            continue;
        }
        let geo = quasihyperbolic_geodesic(domain, df, x, y)?;
        let (ix, iy) = (geo.path[0], *geo.path.last().unwrap());
        for (k, &iz) in geo.path.iter().enumerate() {
            if k % stride != 0 {
                continue;
            }
            let d = df.values[iz];
            if d <= 0.0 {
                continue;
            }
            let z = spec.unlinear(iz);
            let mut min_c = None;
            for &c in &cs {
                let ball = intrinsic_ball(domain, z, c * d)?;
                let swallows =
                    ball.members.binary_search(&ix).is_ok() || ball.members.binary_search(&iy).is_ok();
                if swallows || !connected_without(domain, &ball.members, ix, iy) {
                    min_c = Some(c);
                    break;
                }
            }
            let score = min_c.unwrap_or(f64::INFINITY);
            if score > worst {
                worst = score;
                witness = json!({"pair": [x, y], "z": z, "boundary_distance": d, "min_c": min_c});
            }
            match min_c {
                Some(c) => sup = sup.max(c),
                None => any_inf = true,
            }
        }
    }
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
