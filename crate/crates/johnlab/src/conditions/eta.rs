//! The distortion-transfer integral
//! eta(t) = C * integral_0^{phi(Ct)} (s / phi^{-1}(s))^{n-1} ds,
//! with divergence detection at the lower limit.

use crate::conditions::distortion::{DistortionFunction, Role};
use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-9;
/// Ratio-test threshold: dyadic panels toward s = 0 must decay by at least
/// this factor, three panels in a row, or the integral is declared divergent.
const DIVERGENCE_RATIO: f64 = 1.01;

/// Adaptive Simpson on a closed panel (integrand finite there).
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1)
    }
}

fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    let m = 0.5 * (a + b);
    simpson(f, a, b, f(a), f(m), f(b), eps, 40)
}

/// Evaluate eta(t); +infinity when the integral diverges at the lower limit
/// (the second element of the pair flags divergence).
pub fn eta_from_phi(
    phi: &DistortionFunction,
    c: f64,
    n: usize,
    t: f64,
) -> Result<(f64, bool)> {
    if phi.role != Role::Up {
        return Err(Error::Precondition("eta needs a role-up distortion".into()));
    }
    if c <= 0.0 {
        return Err(Error::Precondition("eta needs C > 0".into()));
    }
    if !(2..=3).contains(&n) {
        return Err(Error::Precondition(format!("eta supports n in {{2,3}}, got {n}")));
    }
    if t <= 0.0 {
        return Ok((0.0, false));
    }
    let upper = phi.eval(c * t);
    if upper <= 0.0 {
        return Ok((0.0, false));
    }
    let pow = (n - 1) as i32;
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let inv = phi.inverse(s).unwrap_or(f64::INFINITY);
        if inv <= 0.0 {
            return f64::INFINITY;
        }
        (s / inv).powi(pow)
    };
    // dyadic panels shrinking toward the lower limit; the ratio of
    // consecutive panel integrals decides convergence there
    let mut total = 0.0f64;
    let mut hi = upper;
    let mut prev: Option<f64> = None;
    let mut growing_streak = 0u32;
    for _ in 0..200 {
        let lo = hi / 2.0;
        let panel = integrate(&integrand, lo, hi, REL_TOL * upper.max(1.0) / 64.0);
        if !panel.is_finite() {
            return Ok((f64::INFINITY, true));
        }
        if let Some(p) = prev {
            if panel * DIVERGENCE_RATIO >= p {
                growing_streak += 1;
                if growing_streak >= 3 {
                    return Ok((f64::INFINITY, true));
                }
            } else {
                growing_streak = 0;
            }
        }
        total += panel;
        prev = Some(panel);
        hi = lo;
        // with geometric panel decay the untouched tail is at most one panel
        if panel <= 0.2 * REL_TOL * total && total > 0.0 {
            break;
        }
    }
    Ok((c * total, false))
}
