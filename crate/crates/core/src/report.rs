//! Verification records shared by every checker.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::{GridFunction, GridSpec};
use crate::scalar::Scalar;

/// One evaluated inequality `lhs <= C * rhs_core`.
///
/// `ratio = lhs / rhs_core` is the empirical surrogate for `C`. Where the
/// constant is known, `constant` carries it and [`InequalityReport::scaled_ratio`]
/// must stay at or below one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InequalityReport<T> {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: T,
    pub rhs_core: T,
    pub ratio: T,
    pub constant: Option<T>,
    pub function: Option<String>,
    pub spec: Option<GridSpec<T>>,
    pub scaling_drift: Option<T>,
    /// Both sides vanish; the ratio is reported as zero.
    pub degenerate: bool,
    pub extras: BTreeMap<String, T>,
    pub violations: Vec<String>,
    /// Why the input could not be evaluated, for inline sweep failures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<T: Scalar> InequalityReport<T> {
    pub fn new(name: &str, lhs: T, rhs_core: T) -> Self {
        let mut violations = Vec::new();
        let (ratio, degenerate) = if rhs_core > T::zero() {
            (lhs / rhs_core, false)
        } else if lhs == T::zero() {
            (T::zero(), true)
        } else {
            violations.push(format!("right-hand side vanishes while lhs = {lhs}"));
            (T::infinity(), false)
        };
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
            lhs,
            rhs_core,
            ratio,
            constant: None,
            function: None,
            spec: None,
            scaling_drift: None,
            degenerate,
            extras: BTreeMap::new(),
            violations,
            note: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_extra(mut self, key: &str, value: T) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    /// Records which function and grid the report was computed on.
    pub fn on(mut self, f: &GridFunction<T>) -> Self {
        self.function = f.generator.as_ref().map(|g| g.id.to_string());
        self.spec = Some(f.spec);
        self
    }

    /// Attaches a known constant and flags `ratio > constant * (1 + slack)`.
    pub fn with_bound(mut self, constant: T, slack: T) -> Self {
        self.constant = Some(constant);
        if self.ratio > constant * (T::one() + slack) {
            self.violations.push(format!(
                "ratio {} exceeds constant {} (slack {})",
                self.ratio, constant, slack
            ));
        }
        self
    }

    /// Ratio divided by the known constant (or the raw ratio when none).
    pub fn scaled_ratio(&self) -> T {
        match self.constant {
            Some(c) if c > T::zero() => self.ratio / c,
            _ => self.ratio,
        }
    }

    pub fn violate(&mut self, msg: String) {
        self.violations.push(msg);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Sort key that keeps aggregation order-independent.
    pub fn identity_key(&self) -> String {
        let grid = self
            .spec
            .map(|s| format!("n{}-L{}-N{}", s.n, s.half_width, s.points))
            .unwrap_or_default();
        format!(
            "{}|{}|{}",
            self.name,
            self.function.as_deref().unwrap_or("-"),
            grid
        )
    }
}
