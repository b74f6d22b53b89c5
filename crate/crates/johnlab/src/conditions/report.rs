//! Uniform report container shared by every estimator.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const REPORT_SCHEMA: &str = "condreport/1";

/// Outcome of one condition estimate: the fitted parameterization, the exact
/// sweep lattice, the sup statistic with its worst-case witness, and any
/// flags (degenerate samples excluded, infinite sup, unverified torsion...).
///
/// `sup = None` encodes +infinity; JSON has no literal for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub schema: String,
    pub condition: String,
    pub parameterization: Value,
    pub lattice: Value,
    pub sup: Option<f64>,
    pub witness: Value,
    pub flags: Vec<String>,
    pub tolerances: Value,
}

impl ConditionReport {
    pub fn new(condition: &str) -> Self {
        ConditionReport {
            schema: REPORT_SCHEMA.into(),
            condition: condition.into(),
            parameterization: Value::Null,
            lattice: Value::Null,
            sup: None,
            witness: Value::Null,
            flags: Vec::new(),
            tolerances: Value::Null,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.sup.is_some() && !self.flags.iter().any(|f| f == "infinite-sup")
    }

    pub fn set_sup(&mut self, v: f64) {
        if v.is_finite() {
            self.sup = Some(v);
        } else {
            self.sup = None;
            self.flag("infinite-sup");
        }
    }

    pub fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.into());
        }
    }

    pub fn linear_parameterization(&mut self, c: Option<f64>) {
        self.parameterization = match c {
            Some(c) => json!({"kind": "linear", "constant": c}),
            None => json!({"kind": "linear", "constant": null}),
        };
    }
}
