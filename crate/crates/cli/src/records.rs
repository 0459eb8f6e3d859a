use serde::Serialize;

/// Direction of a check: residuals must stay below the tolerance, lower
/// bounds must exceed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

/// One verified identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub id: String,
    /// The identity as a formula string.
    pub anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub bound: Bound,
}

impl IdentityRecord {
    pub fn upper(id: impl Into<String>, anchor: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        // NaN never passes
        let pass = max_residual <= tolerance;
        Self { id: id.into(), anchor: anchor.into(), max_residual, tolerance, pass, bound: Bound::Upper }
    }

    pub fn lower(id: impl Into<String>, anchor: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let pass = measured > threshold;
        Self { id: id.into(), anchor: anchor.into(), max_residual: measured, tolerance: threshold, pass, bound: Bound::Lower }
    }

    /// Replace the tolerance of an upper-bound record.
    pub fn with_tolerance(mut self, tol: Option<f64>) -> Self {
        if let (Some(t), Bound::Upper) = (tol, self.bound) {
            self.tolerance = t;
            self.pass = self.max_residual <= t;
        }
        self
    }
}

/// A verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub epsilon: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub all_pass: bool,
    pub records: Vec<IdentityRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails() {
        assert!(!IdentityRecord::upper("x", "x", f64::NAN, 1.0).pass);
        assert!(!IdentityRecord::lower("x", "x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn tolerance_override_only_touches_upper_bounds() {
        let r = IdentityRecord::upper("a", "a", 1e-6, 1e-9).with_tolerance(Some(1e-5));
        assert!(r.pass && r.tolerance == 1e-5);
        let l = IdentityRecord::lower("b", "b", 0.5, 1e-3).with_tolerance(Some(1.0));
        assert!(l.pass && l.tolerance == 1e-3);
    }
}
