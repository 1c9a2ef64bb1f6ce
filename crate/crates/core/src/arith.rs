//! LLR and path-metric arithmetic.
//!
//! Decoders are generic over an [`LlrDomain`], which supplies the min-sum
//! F kernel, the G kernel, the hard decision and the path-metric update.
//! [`FixedPoint`] saturates every result to its bit widths; [`FloatingPoint`]
//! is the unquantized reference.

use std::cmp::Ordering;
use std::fmt::Debug;

use crate::channel::{fixed_range, quantize_llr};
use crate::codec::Bit;
use crate::error::{invalid, Result};

pub trait LlrDomain: Clone + Debug + Send + Sync + 'static {
    type Llr: Copy + Default + PartialEq + Debug + Send + Sync + 'static;
    type Metric: Copy + Default + PartialEq + PartialOrd + Debug + Send + Sync + 'static;

    /// Converts a real-valued channel LLR into this domain.
    fn from_channel(&self, llr: f64) -> Self::Llr;

    /// LLR of maximal confidence in `bit`.
    fn certain(&self, bit: Bit) -> Self::Llr;

    /// `(sgn a XOR sgn b) * min(|a|, |b|)`.
    fn f(&self, a: Self::Llr, b: Self::Llr) -> Self::Llr;

    /// `(-1)^s * a + b`.
    fn g(&self, s: Bit, a: Self::Llr, b: Self::Llr) -> Self::Llr;

    /// 1 iff the LLR is strictly negative.
    fn hard_decision(&self, a: Self::Llr) -> Bit;

    /// `pm + |llr|`.
    fn penalize(&self, pm: Self::Metric, llr: Self::Llr) -> Self::Metric;

    /// Path-metric update for deciding `bit` on a leaf with LLR `llr`.
    #[inline]
    fn pmu(&self, pm: Self::Metric, llr: Self::Llr, bit: Bit) -> Self::Metric {
        if bit == self.hard_decision(llr) {
            pm
        } else {
            self.penalize(pm, llr)
        }
    }

    fn cmp_metric(&self, a: Self::Metric, b: Self::Metric) -> Ordering;

    /// Re-expresses `pm` relative to `floor`, the smallest metric of the
    /// surviving list. Domains that keep absolute metrics return `pm`.
    #[inline]
    fn rebase(&self, pm: Self::Metric, _floor: Self::Metric) -> Self::Metric {
        pm
    }

    fn metric_to_f64(&self, m: Self::Metric) -> f64;

    fn llr_to_f64(&self, a: Self::Llr) -> f64;
}

/// Saturating two's-complement LLRs of `q` bits and unsigned path metrics of
/// `q_pm` bits.
///
/// A `q_pm`-bit register overflows within a few hundred leaves, so by default
/// the list decoder subtracts the best survivor's metric from every survivor
/// after each list-management step. This keeps the ordering and lets only
/// paths far behind the best one saturate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    q: u32,
    q_pm: u32,
    scale: f64,
    llr_min: i32,
    llr_max: i32,
    pm_max: u32,
    normalize: bool,
}

impl FixedPoint {
    pub fn new(q: u32, q_pm: u32, scale: f64) -> Result<Self> {
        if !(2..=24).contains(&q) {
            return Err(invalid(format!("LLR width Q={q} must lie in [2, 24]")));
        }
        if !(1..=31).contains(&q_pm) {
            return Err(invalid(format!("path-metric width Q_PM={q_pm} must lie in [1, 31]")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("LLR scale {scale} must be positive")));
        }
        let (llr_min, llr_max) = fixed_range(q);
        Ok(Self {
            q,
            q_pm,
            scale,
            llr_min,
            llr_max,
            pm_max: (1u32 << q_pm) - 1,
            normalize: true,
        })
    }

    /// Keeps absolute, saturating path metrics when `on` is false.
    pub fn with_normalization(mut self, on: bool) -> Self {
        self.normalize = on;
        self
    }

    pub fn normalizes(&self) -> bool {
        self.normalize
    }

    /// Q = 8, Q_PM = 9, scale = 4.
    pub fn hardware_default() -> Self {
        Self::new(8, 9, 4.0).expect("valid defaults")
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn q_pm(&self) -> u32 {
        self.q_pm
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pm_max(&self) -> u32 {
        self.pm_max
    }

    #[inline]
    fn sat(&self, v: i32) -> i32 {
        v.clamp(self.llr_min, self.llr_max)
    }
}

impl LlrDomain for FixedPoint {
    type Llr = i32;
    type Metric = u32;

    fn from_channel(&self, llr: f64) -> i32 {
        quantize_llr(llr, self.q, self.scale)
    }

    fn certain(&self, bit: Bit) -> i32 {
        if bit == 0 {
            self.llr_max
        } else {
            self.llr_min
        }
    }

    #[inline]
    fn f(&self, a: i32, b: i32) -> i32 {
        let mag = a.abs().min(b.abs());
        self.sat(if (a < 0) != (b < 0) { -mag } else { mag })
    }

    #[inline]
    fn g(&self, s: Bit, a: i32, b: i32) -> i32 {
        self.sat(if s == 0 { b + a } else { b - a })
    }

    #[inline]
    fn hard_decision(&self, a: i32) -> Bit {
        Bit::from(a < 0)
    }

    #[inline]
    fn penalize(&self, pm: u32, llr: i32) -> u32 {
        pm.saturating_add(llr.unsigned_abs()).min(self.pm_max)
    }

    #[inline]
    fn cmp_metric(&self, a: u32, b: u32) -> Ordering {
        a.cmp(&b)
    }

    #[inline]
    fn rebase(&self, pm: u32, floor: u32) -> u32 {
        if self.normalize {
            pm - floor.min(pm)
        } else {
            pm
        }
    }

    fn metric_to_f64(&self, m: u32) -> f64 {
        f64::from(m)
    }

    fn llr_to_f64(&self, a: i32) -> f64 {
        f64::from(a)
    }
}

/// Unquantized min-sum arithmetic in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FloatingPoint;

impl LlrDomain for FloatingPoint {
    type Llr = f64;
    type Metric = f64;

    fn from_channel(&self, llr: f64) -> f64 {
        llr
    }

    fn certain(&self, bit: Bit) -> f64 {
        if bit == 0 {
            1e6
        } else {
            -1e6
        }
    }

    #[inline]
    fn f(&self, a: f64, b: f64) -> f64 {
        let mag = a.abs().min(b.abs());
        if (a < 0.0) != (b < 0.0) {
            -mag
        } else {
            mag
        }
    }

    #[inline]
    fn g(&self, s: Bit, a: f64, b: f64) -> f64 {
        if s == 0 {
            b + a
        } else {
            b - a
        }
    }

    #[inline]
    fn hard_decision(&self, a: f64) -> Bit {
        Bit::from(a < 0.0)
    }

    #[inline]
    fn penalize(&self, pm: f64, llr: f64) -> f64 {
        pm + llr.abs()
    }

    #[inline]
    fn cmp_metric(&self, a: f64, b: f64) -> Ordering {
        a.total_cmp(&b)
    }

    fn metric_to_f64(&self, m: f64) -> f64 {
        m
    }

    fn llr_to_f64(&self, a: f64) -> f64 {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q8() -> FixedPoint {
        FixedPoint::hardware_default()
    }

    #[test]
    fn f_examples() {
        let d = q8();
        assert_eq!(d.f(2, 3), 2);
        assert_eq!(d.f(2, -3), -2);
        assert_eq!(d.f(0, 5), 0);
        assert_eq!(d.f(-128, -128), 127);
        assert_eq!(FloatingPoint.f(2.0, -3.0), -2.0);
    }

    #[test]
    fn g_examples() {
        let d = q8();
        assert_eq!(d.g(0, 2, 3), 5);
        assert_eq!(d.g(1, 2, 3), 1);
        assert_eq!(d.g(1, -4, 1), 5);
        assert_eq!(d.g(0, 100, 100), 127);
        assert_eq!(d.g(1, 100, -100), -128);
        assert_eq!(FloatingPoint.g(1, -4.0, 1.0), 5.0);
    }

    #[test]
    fn hard_decision_examples() {
        let d = q8();
        assert_eq!(d.hard_decision(-1), 1);
        assert_eq!(d.hard_decision(0), 0);
        assert_eq!(d.hard_decision(7), 0);
        assert_eq!(FloatingPoint.hard_decision(-0.0), 0);
    }

    #[test]
    fn pmu_examples() {
        let d = q8();
        assert_eq!(d.pmu(5, -3, 1), 5);
        assert_eq!(d.pmu(5, -3, 0), 8);
        assert_eq!(d.pmu(0, 0, 1), 0);
        assert_eq!(d.pmu(510, -128, 0), 511);
        assert_eq!(FloatingPoint.pmu(5.0, -3.0, 0), 8.0);
    }

    #[test]
    fn rebase_examples() {
        let d = q8();
        assert_eq!(d.rebase(40, 15), 25);
        assert_eq!(d.rebase(511, 100), 411);
        assert_eq!(d.with_normalization(false).rebase(40, 15), 40);
        assert_eq!(FloatingPoint.rebase(4.0, 1.0), 4.0);
    }

    #[test]
    fn rejects_bad_widths() {
        assert!(FixedPoint::new(1, 9, 4.0).is_err());
        assert!(FixedPoint::new(8, 0, 4.0).is_err());
        assert!(FixedPoint::new(8, 9, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn kernels_stay_in_range(a in -128i32..=127, b in -128i32..=127, s in 0u8..=1) {
            let d = q8();
            let f = d.f(a, b);
            let g = d.g(s, a, b);
            prop_assert!((-128..=127).contains(&f));
            prop_assert!((-128..=127).contains(&g));
            prop_assert!(f.abs() <= a.abs().max(b.abs()));
        }

        #[test]
        fn f_is_symmetric_and_odd(a in -127i32..=127, b in -127i32..=127) {
            let d = q8();
            prop_assert_eq!(d.f(a, b), d.f(b, a));
            if a != 0 && b != 0 {
                prop_assert_eq!(d.f(-a, b), -d.f(a, b));
            }
        }

        #[test]
        fn metric_never_decreases(pm in 0u32..=511, l in -128i32..=127, bit in 0u8..=1) {
            let d = q8();
            let next = d.pmu(pm, l, bit);
            prop_assert!(next >= pm);
            prop_assert!(next <= d.pm_max());
        }
    }
}
