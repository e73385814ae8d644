//! Modified Bessel functions of the second kind, orders 0, 1 and 2.
//!
//! For `s <= 2` the functions come from their convergent power series (the
//! logarithmic series built on `I_0`, `I_1` and harmonic numbers). For `s > 2`
//! the leading asymptotic form `sqrt(pi / 2s) e^{-s}` is multiplied by a
//! correction obtained from Temme's continued fraction, evaluated with Steed's
//! algorithm. `K_2` always comes from the recurrence `K_2 = K_0 + (2/s) K_1`.
//!
//! Exponentially scaled values `e^s K_nu(s)` are exposed as well; the kernels
//! in [`crate::explicit_front`] multiply them by `e^{-y-r}` factors that would
//! overflow if formed separately.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments above this return an exact zero with the underflow flag set.
pub const UNDERFLOW_CUTOFF: f64 = 700.0;

const SERIES_LIMIT: f64 = 2.0;
const MAX_CF_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselOrder {
    Zero,
    One,
    Two,
}

impl BesselOrder {
    pub fn as_u32(self) -> u32 {
        match self {
            BesselOrder::Zero => 0,
            BesselOrder::One => 1,
            BesselOrder::Two => 2,
        }
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            2 => Ok(BesselOrder::Two),
            _ => Err(Error::Domain(format!("Bessel order {order} not in {{0, 1, 2}}"))),
        }
    }
}

/// Value of `K_nu(s)`, with `underflow` set when `s` exceeds [`UNDERFLOW_CUTOFF`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KValue {
    pub value: f64,
    pub underflow: bool,
}

fn check_arg(s: f64) -> Result<()> {
    if s.is_nan() || s <= 0.0 {
        Err(Error::Domain(format!("Bessel K requires s > 0, got {s}")))
    } else {
        Ok(())
    }
}

/// `K_order(s)`.
pub fn bessel_k(order: BesselOrder, s: f64) -> Result<KValue> {
    check_arg(s)?;
    if s > UNDERFLOW_CUTOFF {
        return Ok(KValue { value: 0.0, underflow: true });
    }
    let scaled = scaled_unchecked(order, s);
    Ok(KValue { value: scaled * (-s).exp(), underflow: false })
}

/// `e^s K_order(s)`, finite for every positive argument.
pub fn bessel_k_scaled(order: BesselOrder, s: f64) -> Result<f64> {
    check_arg(s)?;
    Ok(scaled_unchecked(order, s))
}

/// Leading large-argument form `sqrt(pi/2) s^{-1/2} e^{-s}`, the same for every order.
pub fn bessel_k_asymptotic(_order: BesselOrder, s: f64) -> Result<f64> {
    check_arg(s)?;
    Ok((PI / 2.0).sqrt() / s.sqrt() * (-s).exp())
}

/// `(K_0(s) + K_2(s)) / (2 K_1(s))`.
pub fn half_sum_ratio(s: f64) -> Result<f64> {
    check_arg(s)?;
    let (k0, k1) = k01_scaled(s);
    let k2 = k0 + 2.0 / s * k1;
    Ok((k0 + k2) / (2.0 * k1))
}

fn scaled_unchecked(order: BesselOrder, s: f64) -> f64 {
    let (k0, k1) = k01_scaled(s);
    match order {
        BesselOrder::Zero => k0,
        BesselOrder::One => k1,
        BesselOrder::Two => k0 + 2.0 / s * k1,
    }
}

/// Scaled pair `(e^s K_0(s), e^s K_1(s))` for `s > 0`. No argument checking.
pub fn k01_scaled(s: f64) -> (f64, f64) {
    if s <= SERIES_LIMIT {
        let (k0, k1) = k01_series(s);
        let e = s.exp();
        (k0 * e, k1 * e)
    } else {
        k01_scaled_continued_fraction(s)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // term_k = t^k / (k!)^2 and term1_k = t^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut term1 = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut i1_sum = 1.0;
    let mut k0_sum = 0.0;
    let mut k1_sum = 1.0; // H_0 + H_1 for k = 0
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        term *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        let harmonic_next = harmonic + 1.0 / (kf + 1.0);
        i0 += term;
        i1_sum += term1;
        k0_sum += harmonic * term;
        k1_sum += (harmonic + harmonic_next) * term1;
        if term < 1e-18 * i0 && term1 < 1e-18 * i1_sum {
            break;
        }
        if k > 200 {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -log_term * i0 + k0_sum;
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

// Temme's method for x >= 2: K_0 = sqrt(pi/2x) e^{-x} / S with S from a
// continued fraction summed by Steed's algorithm; K_1 follows from the
// logarithmic derivative carried along in the same recurrence.
fn k01_scaled_continued_fraction(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_CF_TERMS {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Trapezoid rule on the integral representation; the integrand decays
    // doubly exponentially so the rule converges geometrically.
    fn k_oracle(nu: f64, s: f64) -> f64 {
        let h: f64 = 1e-3;
        let mut sum = 0.5 * (-s).exp();
        let mut t = h;
        loop {
            let v = (-s * t.cosh()).exp() * (nu * t).cosh();
            sum += v;
            if v < 1e-300 || (v < 1e-22 * sum && s * t.cosh() > 50.0) {
                break;
            }
            t += h;
        }
        sum * h
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pinned_values_at_one() {
        let k0 = bessel_k(BesselOrder::Zero, 1.0).unwrap().value;
        let k1 = bessel_k(BesselOrder::One, 1.0).unwrap().value;
        let k2 = bessel_k(BesselOrder::Two, 1.0).unwrap().value;
        assert!((k0 - 0.421_024_438_2).abs() < 1e-10);
        assert!((k1 - 0.601_907_230_2).abs() < 1e-10);
        assert!((k2 - (k0 + 2.0 * k1)).abs() < 1e-15);
        assert!((k2 - 1.624_838_9).abs() < 1e-7);
    }

    #[test]
    fn matches_integral_oracle() {
        for &s in &[1e-3, 0.05, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 5.0, 10.0, 30.0, 100.0, 400.0] {
            for (nu, order) in [(0.0, BesselOrder::Zero), (1.0, BesselOrder::One), (2.0, BesselOrder::Two)] {
                let got = bessel_k_scaled(order, s).unwrap() * (-s).exp();
                let want = k_oracle(nu, s);
                assert!(rel(got, want) < 1e-10, "K_{nu}({s}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn small_argument_behaviour() {
        let s = 1e-6;
        let k0 = bessel_k(BesselOrder::Zero, s).unwrap().value;
        assert!(rel(k0, -(0.5 * s).ln() - EULER_GAMMA) < 1e-10);
        let k1 = bessel_k(BesselOrder::One, s).unwrap().value;
        assert!(rel(k1, 1.0 / s) < 1e-10);
    }

    #[test]
    fn domain_and_underflow() {
        assert!(matches!(bessel_k(BesselOrder::Zero, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(BesselOrder::One, -1.0), Err(Error::Domain(_))));
        assert!(bessel_k(BesselOrder::Two, f64::NAN).is_err());
        let v = bessel_k(BesselOrder::Zero, 750.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.underflow);
        assert!(!bessel_k(BesselOrder::Zero, 650.0).unwrap().underflow);
        assert!(BesselOrder::try_from(3).is_err());
    }

    #[test]
    fn asymptotic_form() {
        let ratio = bessel_k_asymptotic(BesselOrder::Zero, 100.0).unwrap()
            / bessel_k(BesselOrder::Zero, 100.0).unwrap().value;
        assert!((ratio - 1.0).abs() < 1e-2);
        assert_eq!(
            bessel_k_asymptotic(BesselOrder::One, 3.3).unwrap(),
            bessel_k_asymptotic(BesselOrder::Two, 3.3).unwrap()
        );
        let v = bessel_k_asymptotic(BesselOrder::Zero, 1.0).unwrap();
        assert!((v - 0.461_069).abs() < 1e-6);
    }

    #[test]
    fn recurrence_and_derivative_identities() {
        let mut s = 0.01_f64;
        while s <= 100.0 {
            let (k0, k1) = k01_scaled(s);
            let k2 = scaled_unchecked(BesselOrder::Two, s);
            assert!((k2 - k0 - 2.0 / s * k1).abs() <= 1e-9 * k2);

            let h = 1e-5 * s;
            let kp = bessel_k_scaled(BesselOrder::One, s + h).unwrap() * (-(s + h)).exp();
            let km = bessel_k_scaled(BesselOrder::One, s - h).unwrap() * (-(s - h)).exp();
            let fd = (kp - km) / (2.0 * h);
            let exact = -0.5 * (k0 + k2) * (-s).exp();
            assert!(rel(fd, exact) < 1e-6, "s = {s}");
            s *= 1.37;
        }
    }

    #[test]
    fn half_sum_ratio_limits() {
        let mut prev = f64::INFINITY;
        let mut s = 1e-3;
        while s < 1e3 {
            let r = half_sum_ratio(s).unwrap();
            assert!(r < prev);
            prev = r;
            s *= 1.5;
        }
        let big = 1e3;
        assert!(((half_sum_ratio(big).unwrap() - 1.0) * 2.0 * big - 1.0).abs() < 1e-2);
        let small = 1e-5;
        assert!((half_sum_ratio(small).unwrap() * small - 1.0).abs() < 1e-3);
    }
}
