//! Exact squared-Euclidean distance transform by per-axis lower-envelope
//! sweeps (Felzenszwalb-Huttenlocher), plus the window-face term.
//!
//! Distances are computed in index units on exact small integers squared, so
//! the result is bitwise identical to a brute-force all-pairs minimum. Closed
//! window faces act as boundary planes at (i + 0.5) cells from the nearest
//! cell center; open faces contribute nothing.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VoxelDomain};

const INF: f64 = f64::INFINITY;

/// 1D squared-distance transform of `f` into `out` (lower envelope of
/// parabolas y = f[q] + (x - q)^2).
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        if f[q] == INF {
            continue;
        }
        loop {
            let p = v[k];
            if f[p] == INF {
                // only possible for the initial vertex; replace it
                v[k] = q;
                z[k + 1] = INF;
                break;
            }
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = INF;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        out[q] = if f[p] == INF {
            INF
        } else {
            let d = q as f64 - p as f64;
            f[p] + d * d
        };
    }
}

/// Exact Euclidean distance (physical units) from each occupied cell center
/// to the nearest unoccupied cell center or closed window face plane.
pub fn distance_transform(domain: &VoxelDomain) -> Result<ScalarField> {
    let spec = &domain.spec;
    let n = spec.cell_count();
    if domain.occupied_count() == 0 {
        return Err(Error::EmptyDomain);
    }
    let any_closed = (0..spec.dim).any(|a| !domain.open_faces[a][0] || !domain.open_faces[a][1]);
    if domain.occupied_count() == n && !any_closed {
        return Err(Error::UnboundedNoBoundary);
    }

    // squared distance in index units to the nearest unoccupied cell
    let mut d2: Vec<f64> =
        domain.occ.iter().map(|&o| if o { INF } else { 0.0 }).collect();
    let max_axis = *spec.shape.iter().max().unwrap();
    let mut f = vec![0.0f64; max_axis];
    let mut out = vec![0.0f64; max_axis];
    let mut v = vec![0usize; max_axis];
    let mut z = vec![0.0f64; max_axis + 1];
    for axis in 0..spec.dim {
        let len = spec.shape[axis];
        if len == 1 {
            continue;
        }
        let stride = match axis {
            0 => 1,
            1 => spec.shape[0],
            _ => spec.shape[0] * spec.shape[1],
        };
        let lines = n / len;
        for line in 0..lines {
            // base index of this line: distribute `line` over the other axes
            let base = {
                let mut rem = line;
                let mut idx = 0usize;
                let mut mult = 1usize;
                for a in 0..3 {
                    if a == axis {
                        mult *= spec.shape[a];
                        continue;
                    }
                    let s = spec.shape[a];
                    idx += (rem % s) * mult;
                    rem /= s;
                    mult *= s;
                }
                idx
            };
            for q in 0..len {
                f[q] = d2[base + q * stride];
            }
            if f[..len].iter().all(|&x| x == INF) {
                continue;
            }
            envelope_1d(&f[..len], &mut out[..len], &mut v, &mut z);
            for q in 0..len {
                d2[base + q * stride] = out[q];
            }
        }
    }

    // min with closed window-face plane distances, then scale to physical units
    let mut values = vec![0.0f64; n];
    for i in 0..n {
        if !domain.occ[i] {
            continue;
        }
        let c = spec.unlinear(i);
        let mut d = d2[i].sqrt();
        for axis in 0..spec.dim {
            if !domain.open_faces[axis][0] {
                d = d.min(c[axis] as f64 + 0.5);
            }
            if !domain.open_faces[axis][1] {
                d = d.min((spec.shape[axis] - 1 - c[axis]) as f64 + 0.5);
            }
        }
        if d == INF {
            return Err(Error::UnboundedNoBoundary);
        }
        values[i] = d * spec.spacing;
    }
    Ok(ScalarField { spec: spec.clone(), values })
}
