//! John-condition estimators. A domain is C-John with center x0 when every
//! point connects to x0 by a curve along which the boundary distance
//! dominates the traversed gauge: C d(g(t)) >= gauge(g([0,t])). The gauge is
//! the traversed length, the traversed diameter, or the displacement from
//! the start, giving the length/diam/dist variants.
//!
//! Upper estimates evaluate the quasihyperbolic geodesic toward x0 as the
//! candidate curve; lower estimates use the bottleneck path, which bounds
//! every curve's boundary clearance from above.

use serde_json::json;

use crate::conditions::distortion::DistortionFunction;
use crate::conditions::ConditionReport;
use crate::error::{Error, Result};
use crate::grid::{components, dist, Adjacency, Cell, ScalarField, VoxelDomain};
use crate::metrics::quasihyperbolic_geodesic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JohnVariant {
    /// gauge(t) = |g(t) - g(0)|.
    Dist,
    /// gauge(t) = diam(g([0,t])).
    Diam,
    /// gauge(t) = l(g([0,t])).
    Length,
}

impl JohnVariant {
    pub fn name(self) -> &'static str {
        match self {
            JohnVariant::Dist => "dist",
            JohnVariant::Diam => "diam",
            JohnVariant::Length => "length",
        }
    }
}

/// gauge value at every path vertex, traversing from the sample (index 0).
fn gauges(
    variant: JohnVariant,
    pts: &[[f64; 3]],
    prefix_lengths: &[f64],
) -> Vec<f64> {
    match variant {
        JohnVariant::Length => prefix_lengths.to_vec(),
        JohnVariant::Dist => pts.iter().map(|&p| dist(p, pts[0])).collect(),
        JohnVariant::Diam => {
            // running diameter of the traversed prefix
            let mut out = Vec::with_capacity(pts.len());
            let mut d = 0.0f64;
            for t in 0..pts.len() {
                for j in 0..t {
                    d = d.max(dist(pts[t], pts[j]));
                }
                out.push(d);
            }
            out
        }
    }
}

/// Least-squares power law gauge ~ k * d^alpha on log-log data; returns
/// (k, alpha, r_squared). Needs two distinct abscissae.
fn power_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(d, g)| d > 0.0 && g > 0.0)
        .map(|&(d, g)| (d.ln(), g.ln()))
        .collect();
    if data.len() < 2 {
        return None;
    }
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|p| p.0).sum();
    let sy: f64 = data.iter().map(|p| p.1).sum();
    let sxx: f64 = data.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = data.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let alpha = (n * sxy - sx * sy) / denom;
    let b = (sy - alpha * sx) / n;
    let my = sy / n;
    let ss_tot: f64 = data.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 =
        data.iter().map(|p| (p.1 - (alpha * p.0 + b)) * (p.1 - (alpha * p.0 + b))).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some((b.exp(), alpha, r2))
}

/// Smallest achievable value, over all paths from x to x0, of the path's
/// worst displacement-to-clearance ratio max_t |g(t) - x| / d(g(t)). Every
/// curve in the domain is at least this bad, so the value lower-bounds the
/// dist-variant John constant and hence all three variants.
fn minimax_ratio(domain: &VoxelDomain, df: &ScalarField, x: Cell, x0: Cell) -> f64 {
    let spec = &domain.spec;
    let n = spec.cell_count();
    let px = spec.center(x);
    let ratio = |i: usize| -> f64 {
        let d = df.values[i];
        if d <= 0.0 {
            return f64::INFINITY;
        }
        dist(spec.center(spec.unlinear(i)), px) / d
    };
    let offs = crate::metrics::moore_offsets(spec.dim);
    let mut best = vec![f64::INFINITY; n];
    let (ix, iy) = (spec.linear(x), spec.linear(x0));
    let mut heap = std::collections::BinaryHeap::new();
    best[ix] = 0.0;
    heap.push((std::cmp::Reverse(ordered_float(0.0)), ix));
    while let Some((std::cmp::Reverse(key), node)) = heap.pop() {
        let key = key.0;
        if key > best[node] {
            continue;
        }
        if node == iy {
            return key;
        }
        for v in crate::metrics::neighbors_of(domain, node, &offs) {
            let nk = key.max(ratio(v));
            if nk < best[v] {
                best[v] = nk;
                heap.push((std::cmp::Reverse(ordered_float(nk)), v));
            }
        }
    }
    f64::INFINITY
}

/// Total-order wrapper for non-NaN heap keys.
fn ordered_float(v: f64) -> OrdF64 {
    OrdF64(v)
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}

pub fn check_john(
    domain: &VoxelDomain,
    df: &ScalarField,
    x0: Cell,
    samples: &[Cell],
    variant: JohnVariant,
    phi: Option<&DistortionFunction>,
) -> Result<ConditionReport> {
    if !domain.occupied(x0) {
        return Err(Error::Precondition(format!("John center {x0:?} not occupied")));
    }
    let lab = components(domain, Adjacency::Full);
    let l0 = lab.labels[domain.spec.linear(x0)];
    for &s in samples {
        if !domain.occupied(s) {
            return Err(Error::Precondition(format!("John sample {s:?} not occupied")));
        }
        if lab.labels[domain.spec.linear(s)] != l0 {
            return Err(Error::NotJoinable(format!(
                "sample {s:?} lies in a different component than the center"
            )));
        }
    }
    let mut report = ConditionReport::new(&format!("john-{}", variant.name()));
    report.lattice = json!({"x0": x0, "samples": samples});
    report.tolerances = json!({});
    let spec = &domain.spec;
    let mut sup = 0.0f64;
    let mut lower = 0.0f64;
    let mut witness = serde_json::Value::Null;
    let mut cloud: Vec<(f64, f64)> = Vec::new();
    for &x in samples {
        if x == x0 {
            report.flag("degenerate-sample-excluded");
            continue;
        }
        let geo = quasihyperbolic_geodesic(domain, df, x, x0)?;
        let pts: Vec<[f64; 3]> =
            geo.path.iter().map(|&i| spec.center(spec.unlinear(i))).collect();
        let gs = gauges(variant, &pts, &geo.prefix_lengths);
        for (t, (&i, &g)) in geo.path.iter().zip(&gs).enumerate() {
            let d = df.values[i];
            if d <= 0.0 || g <= 0.0 {
                continue;
            }
            cloud.push((d, g));
            let c = match phi {
                None => g / d,
                // smallest K with gauge <= phi(K d)
                Some(f) => f.inverse(g)? / d,
            };
            if c > sup {
                sup = c;
                witness = json!({
                    "sample": x,
                    "path_index": t,
                    "point": pts[t],
                    "boundary_distance": d,
                    "gauge": g,
                    "ratio": c,
                });
            }
        }
        lower = lower.max(minimax_ratio(domain, df, x, x0));
    }
    report.set_sup(sup);
    report.lattice["lower_bound"] = json!(lower);
    match phi {
        Some(f) => {
            report.parameterization = json!({
                "kind": "distortion-multiple",
                "phi": serde_json::to_value(f).map_err(Error::Json)?,
                "constant": sup,
            });
        }
        None => {
            report.linear_parameterization(Some(sup));
            if let Some((k, alpha, r2)) = power_fit(&cloud) {
                report.parameterization["fit"] =
                    json!({"kind": "affine_power", "k": k, "alpha": alpha, "r2": r2});
            }
        }
    }
    report.witness = witness;
    Ok(report)
}
