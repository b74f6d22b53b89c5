//! Distortion functions: increasing gauges with phi(0) = 0, invertible by
//! bisection, in three families (linear, power with exponent >= 1 for the
//! "up" role, monotone sample tables).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionKind {
    Linear { c: f64 },
    AffinePower { k: f64, alpha: f64 },
    Table { ts: Vec<f64>, vs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// phi(t) >= t, phi(t)/t non-decreasing.
    Up,
    /// psi(t) <= t.
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionFunction {
    pub kind: DistortionKind,
    pub role: Role,
}

const INV_REL_TOL: f64 = 1e-12;

impl DistortionFunction {
    pub fn linear(c: f64, role: Role) -> Result<Self> {
        let f = DistortionFunction { kind: DistortionKind::Linear { c }, role };
        f.validate()?;
        Ok(f)
    }

    pub fn power(k: f64, alpha: f64, role: Role) -> Result<Self> {
        let f = DistortionFunction { kind: DistortionKind::AffinePower { k, alpha }, role };
        f.validate()?;
        Ok(f)
    }

    pub fn table(ts: Vec<f64>, vs: Vec<f64>, role: Role) -> Result<Self> {
        let f = DistortionFunction { kind: DistortionKind::Table { ts, vs }, role };
        f.validate()?;
        Ok(f)
    }

    pub fn identity() -> Self {
        DistortionFunction { kind: DistortionKind::Linear { c: 1.0 }, role: Role::Up }
    }

    /// Structural checks plus the role inequality on a sample lattice.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DistortionKind::Linear { c } => {
                if *c <= 0.0 {
                    return Err(Error::Precondition("linear distortion needs c > 0".into()));
                }
                if self.role == Role::Up && *c < 1.0 {
                    return Err(Error::Precondition("role up needs c >= 1".into()));
                }
                if self.role == Role::Down && *c > 1.0 {
                    return Err(Error::Precondition("role down needs c <= 1".into()));
                }
            }
            DistortionKind::AffinePower { k, alpha } => {
                if *k <= 0.0 || *alpha <= 0.0 {
                    return Err(Error::Precondition("power distortion needs k, alpha > 0".into()));
                }
                if self.role == Role::Up && *alpha < 1.0 {
                    return Err(Error::Precondition(
                        "role up needs exponent >= 1 (phi(t)/t non-decreasing)".into(),
                    ));
                }
            }
            DistortionKind::Table { ts, vs } => {
                if ts.len() != vs.len() || ts.len() < 2 {
                    return Err(Error::Precondition("table needs >= 2 aligned samples".into()));
                }
                if ts[0] <= 0.0 {
                    return Err(Error::Precondition("table abscissae must be positive".into()));
                }
                for w in ts.windows(2) {
                    if w[1] <= w[0] {
                        return Err(Error::Precondition("table abscissae must increase".into()));
                    }
                }
                for w in vs.windows(2) {
                    if w[1] <= w[0] {
                        return Err(Error::Precondition("table values must increase".into()));
                    }
                }
                if vs[0] <= 0.0 {
                    return Err(Error::Precondition("table values must be positive".into()));
                }
                if self.role == Role::Up {
                    for (t, v) in ts.iter().zip(vs) {
                        if v < t {
                            return Err(Error::Precondition(format!(
                                "role up violated at t={t}: value {v} < t"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            DistortionKind::Linear { c } => c * t,
            DistortionKind::AffinePower { k, alpha } => k * t.powf(*alpha),
            DistortionKind::Table { ts, vs } => {
                // linear interpolation; proportional below the first sample,
                // last-segment slope above the final one
                if t <= ts[0] {
                    return vs[0] * t / ts[0];
                }
                let n = ts.len();
                if t >= ts[n - 1] {
                    let slope = (vs[n - 1] - vs[n - 2]) / (ts[n - 1] - ts[n - 2]);
                    return vs[n - 1] + slope * (t - ts[n - 1]);
                }
                let i = ts.partition_point(|&x| x < t);
                let (t0, t1) = (ts[i - 1], ts[i]);
                let (v0, v1) = (vs[i - 1], vs[i]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Inverse by bisection to 1e-12 relative tolerance.
    pub fn inverse(&self, v: f64) -> Result<f64> {
        if v <= 0.0 {
            return Ok(0.0);
        }
        // closed forms where available
        match &self.kind {
            DistortionKind::Linear { c } => return Ok(v / c),
            DistortionKind::AffinePower { k, alpha } => return Ok((v / k).powf(1.0 / alpha)),
            DistortionKind::Table { .. } => {}
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut guard = 0;
        while self.eval(hi) < v {
            hi *= 2.0;
            guard += 1;
            if guard > 2100 {
                return Err(Error::Precondition(format!("distortion not invertible at {v}")));
            }
        }
        while (hi - lo) > INV_REL_TOL * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// The relative gauge phi'(r) = 2 phi(r) + r, kept symbolic for the linear
/// family and tabulated otherwise.
pub fn relative_from_absolute(phi: &DistortionFunction) -> Result<DistortionFunction> {
    if phi.role != Role::Up {
        return Err(Error::Precondition("relative gauge needs a role-up distortion".into()));
    }
    match &phi.kind {
        DistortionKind::Linear { c } => DistortionFunction::linear(2.0 * c + 1.0, Role::Up),
        DistortionKind::Table { ts, vs } => {
            let vs2 = ts.iter().zip(vs).map(|(t, v)| 2.0 * v + t).collect();
            DistortionFunction::table(ts.clone(), vs2, Role::Up)
        }
        DistortionKind::AffinePower { .. } => {
            // no closed form in the power family; tabulate on a geometric lattice
            let ts: Vec<f64> = (0..64).map(|i| 1e-6 * 1.5f64.powi(i)).collect();
            let vs = ts.iter().map(|&t| 2.0 * phi.eval(t) + t).collect();
            DistortionFunction::table(ts, vs, Role::Up)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_eval_inverse() {
        let f = DistortionFunction::linear(3.0, Role::Up).unwrap();
        assert_eq!(f.eval(2.0), 6.0);
        assert_eq!(f.inverse(6.0).unwrap(), 2.0);
        assert_eq!(f.eval(0.0), 0.0);
    }

    #[test]
    fn power_roundtrip() {
        let f = DistortionFunction::power(2.0, 1.5, Role::Up).unwrap();
        let v = f.eval(0.7);
        assert!((f.inverse(v).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn table_interpolation_and_inverse() {
        let f = DistortionFunction::table(
            vec![1.0, 2.0, 4.0],
            vec![1.5, 4.0, 10.0],
            Role::Up,
        )
        .unwrap();
        assert_eq!(f.eval(1.0), 1.5);
        assert_eq!(f.eval(3.0), 7.0);
        assert_eq!(f.eval(0.5), 0.75);
        assert_eq!(f.eval(5.0), 13.0);
        let v = f.eval(2.7);
        assert!((f.inverse(v).unwrap() - 2.7).abs() < 1e-9);
    }

    #[test]
    fn role_up_rejected_when_below_identity() {
        assert!(DistortionFunction::linear(0.5, Role::Up).is_err());
        assert!(DistortionFunction::power(1.0, 0.5, Role::Up).is_err());
        assert!(DistortionFunction::linear(0.5, Role::Down).is_ok());
    }

    #[test]
    fn relative_gauge() {
        let f = DistortionFunction::identity();
        let r = relative_from_absolute(&f).unwrap();
        assert_eq!(r.eval(2.0), 6.0);
        let f = DistortionFunction::linear(2.0, Role::Up).unwrap();
        let r = relative_from_absolute(&f).unwrap();
        assert_eq!(r.eval(1.0), 5.0);
        let t = DistortionFunction::table(vec![1.0, 2.0], vec![2.0, 5.0], Role::Up).unwrap();
        let r = relative_from_absolute(&t).unwrap();
        assert_eq!(r.eval(1.0), 5.0);
        assert_eq!(r.eval(2.0), 12.0);
    }
}
