use std::fmt;

use std::f64::consts::LN_10;

/// Base-10 logarithm of a probability or of a number of false alarms.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(pub f64);

impl LogProb {
    pub const ONE: LogProb = LogProb(0.0);
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);

    pub fn new(log10: f64) -> Self {
        LogProb(log10)
    }

    /// From a natural-log value.
    pub fn from_ln(ln: f64) -> Self {
        LogProb(ln / LN_10)
    }

    pub fn from_prob(p: f64) -> Self {
        LogProb(p.log10())
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn ln(self) -> f64 {
        self.0 * LN_10
    }

    /// Back to the linear domain. Underflows to 0 below ~1e-308.
    pub fn to_prob(self) -> f64 {
        10f64.powf(self.0)
    }

    /// Multiplies the represented quantity by `factor` (adds its log).
    pub fn scaled_by(self, factor: f64) -> Self {
        LogProb(self.0 + factor.log10())
    }

    pub fn min(self, other: LogProb) -> LogProb {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "10^{}", self.0)
    }
}
