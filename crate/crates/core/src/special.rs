//! Modified Bessel functions of the second kind, orders 0 and 1, for complex
//! argument in the right half plane.
//!
//! Three regimes: power series for `|z| <= 2`, Steed's continued fraction
//! (Temme's CF2) for `2 < |z| < 18`, and the Hankel asymptotic series beyond.

use crate::C64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 18.0;

/// Returns `(K₀(z), K₁(z))` for `Re z > 0`.
///
/// For `Re z > 700` both values underflow and zero is returned.
pub fn bessel_k01(z: C64) -> (C64, C64) {
    debug_assert!(z.re > 0.0, "K0/K1 evaluated outside Re z > 0: {z}");
    if z.re > 700.0 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    let r = z.norm();
    if r <= SERIES_RADIUS {
        k01_series(z)
    } else if r < ASYMPTOTIC_RADIUS {
        k01_continued_fraction(z)
    } else {
        k01_asymptotic(z)
    }
}

pub fn bessel_k0(z: C64) -> C64 {
    bessel_k01(z).0
}

pub fn bessel_k1(z: C64) -> C64 {
    bessel_k01(z).1
}

/// `I₀(z)`, `I₁(z)` by their power series; accurate for moderate `|z|`.
pub fn bessel_i01(z: C64) -> (C64, C64) {
    let q = z * z * 0.25;
    let mut t0 = C64::new(1.0, 0.0);
    let mut t1 = z * 0.5;
    let mut i0 = t0;
    let mut i1 = t1;
    for k in 1..500 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        i0 += t0;
        i1 += t1;
        if t0.norm() <= 1e-17 * i0.norm() && t1.norm() <= 1e-17 * i1.norm() {
            break;
        }
    }
    (i0, i1)
}

pub(crate) fn k01_series(z: C64) -> (C64, C64) {
    let q = z * z * 0.25;
    let log_half = (z * 0.5).ln();
    // K₀ = −(ln(z/2) + γ) I₀ + Σ H_k q^k/(k!)²
    // K₁ = 1/z + ln(z/2) I₁ − (z/4) Σ (ψ(k+1) + ψ(k+2)) q^k/(k!(k+1)!)
    let mut term0 = C64::new(1.0, 0.0); // q^k/(k!)^2
    let mut term1 = C64::new(1.0, 0.0); // q^k/(k!(k+1)!)
    let mut i0 = term0;
    let mut i1_over_half_z = term1;
    let mut sum0 = C64::new(0.0, 0.0);
    let mut harmonic = 0.0;
    let mut sum1 = term1 * (-2.0 * EULER_GAMMA + 1.0);
    for k in 1..200 {
        let kf = k as f64;
        harmonic += 1.0 / kf;
        term0 *= q / (kf * kf);
        term1 *= q / (kf * (kf + 1.0));
        i0 += term0;
        i1_over_half_z += term1;
        sum0 += term0 * harmonic;
        sum1 += term1 * (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0));
        if term0.norm() * (1.0 + harmonic) < 1e-17 * sum0.norm().max(i0.norm()) && k > 2 {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + sum0;
    let i1 = i1_over_half_z * z * 0.5;
    let k1 = z.inv() + log_half * i1 - z * 0.25 * sum1;
    (k0, k1)
}

pub(crate) fn k01_continued_fraction(z: C64) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    let a1 = 0.25;
    let mut b = (one + z) * 2.0;
    let mut d = b.inv();
    let mut delh = d;
    let mut h = d;
    let mut q1 = C64::new(0.0, 0.0);
    let mut q2 = one;
    let mut q = C64::new(a1, 0.0);
    let mut c = C64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..20_000 {
        a -= 2.0 * (i - 1) as f64;
        c = c * (-a / i as f64);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + a * d).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    let h = h * a1;
    let k0 = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

pub(crate) fn k01_asymptotic(z: C64) -> (C64, C64) {
    let pref = (PI / (2.0 * z)).sqrt() * (-z).exp();
    let inv8z = (8.0 * z).inv();
    let mut t0 = C64::new(1.0, 0.0);
    let mut t1 = C64::new(1.0, 0.0);
    let mut s0 = t0;
    let mut s1 = t1;
    let mut last0 = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let kf = k as f64;
        let n0 = t0 * (-(odd * odd)) * inv8z / kf;
        let n1 = t1 * (4.0 - odd * odd) * inv8z / kf;
        // Stop before the divergent tail.
        if n0.norm() > last0 {
            break;
        }
        last0 = n0.norm();
        t0 = n0;
        t1 = n1;
        s0 += t0;
        s1 += t1;
        if t0.norm() < 1e-17 && t1.norm() < 1e-17 {
            break;
        }
    }
    (pref * s0, pref * s1)
}
