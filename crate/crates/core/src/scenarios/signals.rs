use crate::{Error, Result};

/// Value and first two derivatives of a function of one variable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, d: 0.0, dd: 0.0 };

    pub fn new(v: f64, d: f64, dd: f64) -> Self {
        Jet { v, d, dd }
    }

    pub fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        }
    }

    /// `t ↦ f(a t + b)` from the jet of `f` at `a t + b`.
    pub fn chain_affine(self, a: f64) -> Jet {
        Jet {
            v: self.v,
            d: a * self.d,
            dd: a * a * self.dd,
        }
    }
}

/// `ψ(x) = e^{−1/x}` for `x > 0`, else 0, with derivatives.
fn psi(x: f64) -> Jet {
    if x <= 0.0 {
        return Jet::ZERO;
    }
    let e = (-1.0 / x).exp();
    let x2 = x * x;
    Jet::new(e, e / x2, e * (1.0 - 2.0 * x) / (x2 * x2))
}

/// Smooth ramp `χ(t) = ψ(t/τ)/(ψ(t/τ) + ψ(1 − t/τ))`: zero for `t ≤ 0`, one
/// for `t ≥ τ`, `C^∞` in between.
pub fn smooth_ramp(t: f64, tau: f64) -> Jet {
    let u = t / tau;
    if u <= 0.0 {
        return Jet::ZERO;
    }
    if u >= 1.0 {
        return Jet::new(1.0, 0.0, 0.0);
    }
    let a = psi(u);
    let pb = psi(1.0 - u);
    // B(u) = ψ(1 − u).
    let b = Jet::new(pb.v, -pb.d, pb.dd);
    let s = a.v + b.v;
    let n = a.d * b.v - a.v * b.d;
    let dn = a.dd * b.v - a.v * b.dd;
    let ds = a.d + b.d;
    let v = a.v / s;
    let d = n / (s * s);
    let dd = (dn * s - 2.0 * n * ds) / (s * s * s);
    Jet::new(v, d, dd).chain_affine(1.0 / tau)
}

/// Causal time signals `s(t)`, zero for `t ≤ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CausalSignal {
    /// `sin(ω t) χ(t)` with a ramp of width `ramp`.
    RampedSine { omega: f64, ramp: f64 },
    /// `sin^power(ω t) H(t)`.
    SinePower { omega: f64, power: i32 },
    /// `sin(ω t) χ(t) χ(duration − t)`: compactly supported on `[0, duration]`.
    Pulse { omega: f64, ramp: f64, duration: f64 },
}

impl CausalSignal {
    /// `sin(2t) χ(t)` with `τ = 0.5`.
    pub fn interior_default() -> Self {
        CausalSignal::RampedSine { omega: 2.0, ramp: 0.5 }
    }

    /// `sin⁶(4t) H(t)`.
    pub fn exterior_default() -> Self {
        CausalSignal::SinePower { omega: 4.0, power: 6 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CausalSignal::RampedSine { omega, ramp } => omega.is_finite() && ramp > 0.0,
            CausalSignal::SinePower { omega, power } => omega.is_finite() && power >= 3,
            CausalSignal::Pulse { omega, ramp, duration } => omega.is_finite() && ramp > 0.0 && duration >= 2.0 * ramp,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid signal parameters: {self:?}")))
        }
    }

    /// `(s, s', s'')` at `t`.
    pub fn jet(&self, t: f64) -> Jet {
        if t <= 0.0 {
            return Jet::ZERO;
        }
        match *self {
            CausalSignal::RampedSine { omega, ramp } => sine(omega, t).mul(smooth_ramp(t, ramp)),
            CausalSignal::SinePower { omega, power } => {
                let (s, c) = (omega * t).sin_cos();
                let p = power as f64;
                let sp2 = s.powi(power - 2);
                Jet::new(
                    sp2 * s * s,
                    p * omega * sp2 * s * c,
                    p * omega * omega * sp2 * ((p - 1.0) * c * c - s * s),
                )
            }
            CausalSignal::Pulse { omega, ramp, duration } => {
                if t >= duration {
                    return Jet::ZERO;
                }
                let end = smooth_ramp(duration - t, ramp).chain_affine(-1.0);
                sine(omega, t).mul(smooth_ramp(t, ramp)).mul(end)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).v
    }

    /// End of the support, if compact.
    pub fn support_end(&self) -> Option<f64> {
        match *self {
            CausalSignal::Pulse { duration, .. } => Some(duration),
            _ => None,
        }
    }
}

fn sine(omega: f64, t: f64) -> Jet {
    let (s, c) = (omega * t).sin_cos();
    Jet::new(s, omega * c, -omega * omega * s)
}
