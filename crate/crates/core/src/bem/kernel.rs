//! The fundamental solution of `−Δ + s²` in the plane, `Φ(r; s) = K₀(sr)/2π`.

use crate::special::bessel_k01;
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// `Φ(r; s)` for `r > 0`, `Re s > 0`.
pub fn fundamental_solution(r: f64, s: C64) -> Result<C64> {
    check(r, s)?;
    Ok(kernel_and_derivative(r, s).0)
}

/// `dΦ/dr (r; s) = −s K₁(sr)/2π`.
pub fn fundamental_solution_dr(r: f64, s: C64) -> Result<C64> {
    check(r, s)?;
    Ok(kernel_and_derivative(r, s).1)
}

fn check(r: f64, s: C64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("kernel distance must be positive, got {r}")));
    }
    if !(s.re > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must satisfy Re s > 0, got {s}")));
    }
    Ok(())
}

/// `(Φ(r), Φ'(r))` without argument checks.
#[inline]
pub(crate) fn kernel_and_derivative(r: f64, s: C64) -> (C64, C64) {
    let (k0, k1) = bessel_k01(s * r);
    (k0 / (2.0 * PI), -s * k1 / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(fundamental_solution(0.0, C64::new(1.0, 0.0)).is_err());
        assert!(fundamental_solution(1.0, C64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn value_at_unit_arguments() {
        let v = fundamental_solution(1.0, C64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.421_024_438_240_708_23 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = C64::new(1.5, -2.0);
        let r = 0.7;
        let e = 1e-5;
        let fd = (fundamental_solution(r + e, s).unwrap() - fundamental_solution(r - e, s).unwrap()) / (2.0 * e);
        assert!((fd - fundamental_solution_dr(r, s).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn conjugation_symmetry() {
        let s = C64::new(0.4, 7.0);
        let a = fundamental_solution(0.3, s).unwrap();
        let b = fundamental_solution(0.3, s.conj()).unwrap();
        assert!((a.conj() - b).norm() < 1e-16);
    }
}
