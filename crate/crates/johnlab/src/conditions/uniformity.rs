//! Uniformity estimators. A pair is A-uniformly joined by a curve whose
//! every point has boundary clearance comparable to the shorter of the two
//! arcs it splits off (the double cigar) and whose length is comparable to
//! the endpoint distance. The inner variants replace the arc gauge by the
//! displacement, diameter or length of the arcs and compare the whole-curve
//! gauge against the inner (length-metric) distance of the endpoints.
//!
//! The candidate curve is the quasihyperbolic geodesic.

use serde_json::json;

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};
use crate::grid::{components, dist, Adjacency, Cell, ScalarField, VoxelDomain};
use crate::metrics::{inner_geodesic, quasihyperbolic_geodesic};

/// S(prefix arc) and S(suffix arc) at each path vertex for the three inner
/// gauges: endpoint displacement, diameter, length.
struct ArcGauges {
    dist: Vec<[f64; 2]>,
    diam: Vec<[f64; 2]>,
    length: Vec<[f64; 2]>,
}

fn arc_gauges(pts: &[[f64; 3]], prefix: &[f64]) -> ArcGauges {
    let n = pts.len();
    let total = prefix[n - 1];
    let mut diam_fwd = vec![0.0f64; n];
    let mut diam_bwd = vec![0.0f64; n];
    let mut d = 0.0f64;
    for t in 1..n {
        for j in 0..t {
            d = d.max(dist(pts[t], pts[j]));
        }
        diam_fwd[t] = d;
    }
    d = 0.0;
    for t in (0..n - 1).rev() {
        for j in t + 1..n {
            d = d.max(dist(pts[t], pts[j]));
        }
        diam_bwd[t] = d;
    }
    ArcGauges {
        dist: (0..n)
            .map(|t| [dist(pts[t], pts[0]), dist(pts[t], pts[n - 1])])
            .collect(),
        diam: (0..n).map(|t| [diam_fwd[t], diam_bwd[t]]).collect(),
        length: (0..n).map(|t| [prefix[t], total - prefix[t]]).collect(),
    }
}

/// max over the path of min(S(prefix), S(suffix)) / d(., boundary)
fn cigar_ratio(arcs: &[[f64; 2]], ds: &[f64]) -> f64 {
    arcs.iter()
        .zip(ds)
        .filter(|&(_, &d)| d > 0.0)
        .map(|(&[a, b], &d)| a.min(b) / d)
        .fold(0.0f64, f64::max)
}

pub fn estimate_uniformity(
    domain: &VoxelDomain,
    df: &ScalarField,
    pairs: &[(Cell, Cell)],
) -> Result<ConditionReport> {
    let spec = &domain.spec;
    let lab = components(domain, Adjacency::Full);
    let mut report = ConditionReport::new("uniformity");
    report.lattice = json!({"pairs": pairs});
    report.tolerances = json!({});
    let mut sup = 0.0f64;
    let mut inner_sup = [0.0f64; 3]; // dist, diam, length gauges
    let mut witness = serde_json::Value::Null;
    for &(x, y) in pairs {
        if !domain.occupied(x) || !domain.occupied(y) {
            return Err(Error::Precondition(format!("pair not occupied: {x:?} / {y:?}")));
        }
        if lab.labels[spec.linear(x)] != lab.labels[spec.linear(y)] {
            return Err(Error::NotJoinable(format!(
                "pair {x:?} / {y:?} lies in different components"
            )));
        }
        if x == y {
            report.flag("coincident-pair-excluded");
            continue;
        }
        let geo = quasihyperbolic_geodesic(domain, df, x, y)?;
        let pts: Vec<[f64; 3]> =
            geo.path.iter().map(|&i| spec.center(spec.unlinear(i))).collect();
        let ds: Vec<f64> = geo.path.iter().map(|&i| df.values[i]).collect();
        let arcs = arc_gauges(&pts, &geo.prefix_lengths);
        let sep = dist(pts[0], *pts.last().unwrap());
        let cigar = cigar_ratio(&arcs.length, &ds);
        let stretch = if sep > 0.0 { geo.euclid_length / sep } else { 0.0 };
        let a = cigar.max(stretch);
        if a > sup {
            sup = a;
            witness = json!({
                "pair": [x, y],
                "cigar": cigar,
                "length_over_distance": stretch,
            });
        }
        // inner variants: double cigar per gauge, whole-curve gauge against
        // the inner distance of the endpoints
        let d_inner = inner_geodesic(domain, df, x, y)?.euclid_length;
        let n = pts.len();
        let whole = [
            sep,
            arcs.diam[0][1].max(arcs.diam[n - 1][0]),
            geo.euclid_length,
        ];
        for (k, arc) in [&arcs.dist, &arcs.diam, &arcs.length].into_iter().enumerate() {
            let mut c = cigar_ratio(arc, &ds);
            if d_inner > 0.0 {
                c = c.max(whole[k] / d_inner);
            }
            inner_sup[k] = inner_sup[k].max(c);
        }
    }
    report.set_sup(sup);
    report.lattice["inner"] = json!({
        "dist": inner_sup[0],
        "diam": inner_sup[1],
        "length": inner_sup[2],
    });
    report.linear_parameterization(Some(sup));
    report.witness = witness;
    Ok(report)
}
