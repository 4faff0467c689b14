//! Smoothing profiles: the step `mu`, the pairwise soft minimum, and the
//! norm-saturation profile `psi`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `x^2 (3 - 2x)` clamped to `[0, 1]`.
pub fn smoothstep<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if x >= T::one() {
        T::one()
    } else {
        x * x * (T::c(3.0) - T::c(2.0) * x)
    }
}

pub fn smoothstep_prime<T: Real>(x: T) -> T {
    if x <= T::zero() || x >= T::one() {
        T::zero()
    } else {
        T::c(6.0) * x * (T::one() - x)
    }
}

pub fn smoothstep_second<T: Real>(x: T) -> T {
    if x <= T::zero() || x >= T::one() {
        T::zero()
    } else {
        T::c(6.0) - T::c(12.0) * x
    }
}

/// The partition profile: increasing, 0 for `x <= 0`, 1 for `x >= 1`.
pub fn mu<T: Real>(x: T) -> T {
    smoothstep(x)
}

/// Even `C^2` function with `s(d) = |d|` for `|d| >= 1` and `s(d) > |d|`
/// inside.
fn soft_abs<T: Real>(d: T) -> T {
    let d = d.abs();
    if d >= T::one() {
        d
    } else {
        let d2 = d * d;
        T::c(0.375) + T::c(0.75) * d2 - T::c(0.125) * d2 * d2
    }
}

/// Smoothed `min(x, y)`; exact when `|x - y| >= 1`, never above the minimum.
pub fn min2<T: Real>(x: T, y: T) -> T {
    (x + y - soft_abs(x - y)) / T::c(2.0)
}

/// Left-associative fold of [`min2`]; exact when all pairwise gaps are at
/// least one.
pub fn soft_min<T: Real>(xs: &[T]) -> Option<T> {
    let (first, rest) = xs.split_first()?;
    Some(rest.iter().fold(*first, |acc, &x| min2(acc, x)))
}

/// Norm-saturation profile applied to `x = log|s|^2`: identity below `x0`,
/// zero above `x1`, so `log||s||^2 = psi(log|s|^2) <= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianModel<T> {
    pub x0: T,
    pub x1: T,
}

impl<T: Real> Default for HermitianModel<T> {
    fn default() -> Self {
        HermitianModel { x0: T::c(-4.0), x1: T::c(-1.0) }
    }
}

impl<T: Real> HermitianModel<T> {
    pub fn new(x0: T, x1: T) -> Result<Self> {
        if !(x0 < x1 && x1 <= T::zero()) {
            return Err(Error::InvalidParameter("need x0 < x1 <= 0".into()));
        }
        Ok(HermitianModel { x0, x1 })
    }

    fn ramp(&self, x: T) -> T {
        (x - self.x0) / (self.x1 - self.x0)
    }

    pub fn psi(&self, x: T) -> T {
        x * (T::one() - smoothstep(self.ramp(x)))
    }

    pub fn psi_prime(&self, x: T) -> T {
        T::one() - smoothstep(self.ramp(x)) - x * smoothstep_prime(self.ramp(x)) / (self.x1 - self.x0)
    }

    pub fn psi_second(&self, x: T) -> T {
        let l = self.x1 - self.x0;
        let u = self.ramp(x);
        -T::c(2.0) * smoothstep_prime(u) / l - x * smoothstep_second(u) / (l * l)
    }

    /// Bound on `|psi'|` over the real line.
    pub fn psi_prime_bound(&self) -> T {
        // |1 - s| <= 1 and |x s'| <= max(|x0|,|x1|) * 1.5 / (x1 - x0)
        T::one() + self.x0.abs().max(self.x1.abs()) * T::c(1.5) / (self.x1 - self.x0)
    }

    /// Shifted coordinate `eta - log||s||^2` from the raw `-log|s|^2`.
    pub fn shifted(&self, eta: T, raw: T) -> T {
        eta - self.psi(-raw)
    }

    /// Derivative of [`Self::shifted`] with respect to `raw`.
    pub fn shifted_prime(&self, raw: T) -> T {
        self.psi_prime(-raw)
    }

    /// Second derivative of [`Self::shifted`] with respect to `raw`.
    pub fn shifted_second(&self, raw: T) -> T {
        -self.psi_second(-raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shifted_derivatives_match_differences() {
        let m = HermitianModel::<f64>::default();
        for &r in &[0.3, 1.2, 2.5, 3.7, 6.0] {
            let h = 1e-5;
            let d1 = (m.shifted(10.0, r + h) - m.shifted(10.0, r - h)) / (2.0 * h);
            let d2 = (m.shifted_prime(r + h) - m.shifted_prime(r - h)) / (2.0 * h);
            assert!((d1 - m.shifted_prime(r)).abs() < 1e-8);
            assert!((d2 - m.shifted_second(r)).abs() < 1e-6, "{r} {d2} {}", m.shifted_second(r));
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(mu(-0.5f64), 0.0);
        assert_eq!(mu(1.5f64), 1.0);
        assert!((mu(0.5f64) - 0.5).abs() < 1e-15);
        let h = HermitianModel::<f64>::default();
        assert_eq!(h.psi(-10.0), -10.0);
        assert_eq!(h.psi(-0.5), 0.0);
        assert_eq!(h.shifted(10.0, 0.5), 10.0);
        assert_eq!(h.shifted(10.0, 7.0), 17.0);
        assert_eq!(min2(0.0f64, 3.0), 0.0);
        assert_eq!(soft_min(&[5.0f64, 1.0, 3.0]), Some(1.0));
        assert_eq!(soft_min::<f64>(&[]), None);
        assert!(HermitianModel::new(-1.0f64, -4.0).is_err());
    }

    proptest! {
        #[test]
        fn soft_min_below_min(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let m = min2(x, y);
            prop_assert!(m <= x.min(y) + 1e-15);
            prop_assert!(m >= x.min(y) - 0.1875 - 1e-15);
        }

        #[test]
        fn psi_nonpositive_and_derivative(x in -8.0f64..1.0) {
            let h = HermitianModel::<f64>::default();
            prop_assert!(h.psi(x) <= 0.0);
            let e = 1e-6;
            let fd = (h.psi(x + e) - h.psi(x - e)) / (2.0 * e);
            prop_assert!((fd - h.psi_prime(x)).abs() < 1e-6);
            prop_assert!(h.psi_prime(x).abs() <= h.psi_prime_bound());
        }

        #[test]
        fn soft_abs_c1(d in -2.0f64..2.0) {
            let e = 1e-6;
            let fd = (soft_abs(d + e) - soft_abs(d - e)) / (2.0 * e);
            let exact = if d.abs() >= 1.0 { d.signum() } else { 1.5 * d - 0.5 * d * d * d };
            prop_assert!((fd - exact).abs() < 1e-5);
        }
    }
}
