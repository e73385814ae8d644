//! Boundary reaction laws `f` of bistable and combustion type, their
//! potentials `G(s) = -∫_0^s f` and the structural checks they must pass.
//!
//! Every [`Nonlinearity`] is evaluated through its linear extension: outside
//! `[0, 1]` the law continues with the one-sided slopes at the endpoints.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const SIMPSON_TOL: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-10;
const CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    Bistable,
    Combustion,
    Custom,
}

/// Serializable description of a built-in family.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityDescriptor {
    /// `s (1 - s)(s - alpha)`.
    Cubic { alpha: f64 },
    /// `amplitude (s - beta)(1 - s)` above the ignition temperature, zero below.
    Combustion { beta: f64, amplitude: f64 },
    /// The implicit law of the Bessel-kernel front with parameters `(t, c)`.
    Explicit { t: f64, c: f64 },
    /// `s -> -g(1 - s)` for the inner law `g`.
    Reflected(Box<NonlinearityDescriptor>),
}

impl fmt::Display for NonlinearityDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearityDescriptor::Cubic { alpha } => write!(f, "cubic(alpha={alpha})"),
            NonlinearityDescriptor::Combustion { beta, amplitude } => {
                write!(f, "combustion(beta={beta}, amplitude={amplitude})")
            }
            NonlinearityDescriptor::Explicit { t, c } => write!(f, "explicit(t={t}, c={c})"),
            NonlinearityDescriptor::Reflected(inner) => write!(f, "reflect({inner})"),
        }
    }
}

/// A reaction law together with its claimed structural constants.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    f: ScalarFn,
    f_prime: ScalarFn,
    antiderivative: Option<ScalarFn>,
    delta: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
    slopes: (f64, f64),
    descriptor: Option<NonlinearityDescriptor>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("kind", &self.kind)
            .field("delta", &self.delta)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("extension_slopes", &self.slopes)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl Nonlinearity {
    /// A law given by callables on `[0, 1]` plus claimed constants. The
    /// extension slopes are read from `f_prime` at the endpoints.
    pub fn custom(
        f: ScalarFn,
        f_prime: ScalarFn,
        delta: f64,
        alpha: Option<f64>,
        beta: Option<f64>,
    ) -> Self {
        let slopes = (f_prime(0.0), f_prime(1.0));
        Nonlinearity {
            kind: NonlinearityKind::Custom,
            f,
            f_prime,
            antiderivative: None,
            delta,
            alpha,
            beta,
            slopes,
            descriptor: None,
        }
    }

    /// Supplies `s -> ∫_0^s f` on `[0, 1]`, replacing adaptive quadrature.
    pub fn with_antiderivative(mut self, antiderivative: ScalarFn) -> Self {
        self.antiderivative = Some(antiderivative);
        self
    }

    pub fn with_kind(mut self, kind: NonlinearityKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_descriptor(mut self, descriptor: NonlinearityDescriptor) -> Self {
        self.descriptor = Some(descriptor);
        self
    }

    /// Records a known ignition temperature.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    /// Overrides the slopes used outside `[0, 1]`.
    pub fn with_extension_slopes(mut self, below: f64, above: f64) -> Self {
        self.slopes = (below, above);
        self
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// Stored ignition temperature, if any. See [`ignition_point`] for the
    /// computed value.
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn extension_slopes(&self) -> (f64, f64) {
        self.slopes
    }

    pub fn descriptor(&self) -> Option<&NonlinearityDescriptor> {
        self.descriptor.as_ref()
    }

    /// `f(s)` with the linear extension outside `[0, 1]`.
    pub fn f(&self, s: f64) -> f64 {
        if s < 0.0 {
            self.slopes.0 * s
        } else if s > 1.0 {
            self.slopes.1 * (s - 1.0)
        } else {
            (self.f)(s)
        }
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        if s < 0.0 {
            self.slopes.0
        } else if s > 1.0 {
            self.slopes.1
        } else {
            (self.f_prime)(s)
        }
    }

    fn primitive_unit(&self, s: f64) -> f64 {
        match &self.antiderivative {
            Some(anti) => anti(s),
            None => {
                let f = &self.f;
                quad::simpson(|x| f(x), 0.0, s, SIMPSON_TOL)
            }
        }
    }

    /// `∫_0^s f` for any real `s`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s < 0.0 {
            0.5 * self.slopes.0 * s * s
        } else if s > 1.0 {
            let d = s - 1.0;
            self.primitive_unit(1.0) + 0.5 * self.slopes.1 * d * d
        } else {
            self.primitive_unit(s)
        }
    }

    /// `G(s) = -∫_0^s f`.
    pub fn potential(&self, s: f64) -> f64 {
        -self.primitive(s)
    }

    /// `∫_0^1 f`.
    pub fn integral(&self) -> f64 {
        self.primitive_unit(1.0)
    }
}

/// `G(s) = -∫_0^s f(σ) dσ`.
pub fn potential(nl: &Nonlinearity, s: f64) -> f64 {
    nl.potential(s)
}

/// `f(s) = s (1 - s)(s - alpha)` for `alpha` in `(0, 1/2)`.
pub fn make_bistable_cubic(alpha: f64) -> Result<Nonlinearity> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidNonlinearity(format!(
            "cubic requires 0 < alpha < 1/2 for a positive integral, got {alpha}"
        )));
    }
    let f: ScalarFn = Arc::new(move |s: f64| {
        if s == 0.0 || s == 1.0 {
            0.0
        } else {
            s * (1.0 - s) * (s - alpha)
        }
    });
    let fp: ScalarFn = Arc::new(move |s: f64| -3.0 * s * s + 2.0 * (1.0 + alpha) * s - alpha);
    let anti: ScalarFn = Arc::new(move |s: f64| {
        let s2 = s * s;
        -0.25 * s2 * s2 + (1.0 + alpha) / 3.0 * s2 * s - 0.5 * alpha * s2
    });
    // f' vanishes at ((1 + alpha) ± sqrt(1 - alpha + alpha^2)) / 3
    let disc = (1.0 - alpha + alpha * alpha).sqrt();
    let lo = (1.0 + alpha - disc) / 3.0;
    let hi = (1.0 + alpha + disc) / 3.0;
    let delta = 0.9 * lo.min(1.0 - hi);
    let mut nl = Nonlinearity::custom(f, fp, delta, Some(alpha), None)
        .with_antiderivative(anti)
        .with_kind(NonlinearityKind::Bistable)
        .with_descriptor(NonlinearityDescriptor::Cubic { alpha });
    nl.beta = Some(ignition_point(&nl)?);
    Ok(nl)
}

/// `f(s) = amplitude (s - beta)(1 - s)` on `(beta, 1)`, zero below `beta`.
pub fn make_combustion(beta: f64, amplitude: f64) -> Result<Nonlinearity> {
    if !(beta > 0.0 && beta < 1.0) || !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidNonlinearity(format!(
            "combustion requires 0 < beta < 1 and amplitude > 0, got beta={beta}, amplitude={amplitude}"
        )));
    }
    let f: ScalarFn = Arc::new(move |s: f64| {
        if s <= beta || s >= 1.0 {
            0.0
        } else {
            amplitude * (s - beta) * (1.0 - s)
        }
    });
    let fp: ScalarFn = Arc::new(move |s: f64| {
        if s <= beta {
            0.0
        } else {
            amplitude * (1.0 + beta - 2.0 * s)
        }
    });
    let anti: ScalarFn = Arc::new(move |s: f64| {
        if s <= beta {
            0.0
        } else {
            let w = s - beta;
            let l = 1.0 - beta;
            amplitude * (0.5 * l * w * w - w * w * w / 3.0)
        }
    });
    let delta = 0.9 * beta.min(0.5 * (1.0 - beta));
    let nl = Nonlinearity::custom(f, fp, delta, None, Some(beta))
        .with_antiderivative(anti)
        .with_kind(NonlinearityKind::Combustion)
        .with_descriptor(NonlinearityDescriptor::Combustion { beta, amplitude });
    Ok(nl)
}

/// `s -> -f(1 - s)`.
pub fn reflect(nl: &Nonlinearity) -> Nonlinearity {
    let inner = nl.clone();
    let inner_p = nl.clone();
    let f: ScalarFn = Arc::new(move |s: f64| -inner.f(1.0 - s));
    let fp: ScalarFn = Arc::new(move |s: f64| inner_p.f_prime(1.0 - s));
    let inner_a = nl.clone();
    let total = nl.integral();
    let anti: ScalarFn = Arc::new(move |s: f64| inner_a.primitive(1.0 - s) - total);
    let kind = match nl.kind {
        NonlinearityKind::Bistable => NonlinearityKind::Bistable,
        _ => NonlinearityKind::Custom,
    };
    let mut out = Nonlinearity::custom(f, fp, nl.delta, nl.alpha.map(|a| 1.0 - a), None)
        .with_antiderivative(anti)
        .with_kind(kind)
        .with_extension_slopes(nl.slopes.1, nl.slopes.0);
    if let Some(d) = &nl.descriptor {
        out = out.with_descriptor(match d {
            NonlinearityDescriptor::Reflected(inner) => (**inner).clone(),
            other => NonlinearityDescriptor::Reflected(Box::new(other.clone())),
        });
    }
    if kind == NonlinearityKind::Bistable {
        out.beta = ignition_point(&out).ok();
    }
    out
}

/// The threshold `beta` of the five structural conditions: the stored value
/// for combustion laws, otherwise the root in `(alpha, 1)` of `∫_0^beta f = 0`.
pub fn ignition_point(nl: &Nonlinearity) -> Result<f64> {
    match (nl.kind, nl.alpha, nl.beta) {
        (NonlinearityKind::Combustion, _, Some(b)) => Ok(b),
        (_, Some(alpha), _) => {
            let mut lo = alpha;
            let mut hi = 1.0;
            let flo = nl.primitive(lo);
            let fhi = nl.primitive(hi);
            if !(flo < 0.0 && fhi > 0.0) {
                return Err(Error::InconsistentNonlinearity(format!(
                    "no sign change of the primitive on (alpha, 1): F(alpha)={flo:e}, F(1)={fhi:e}"
                )));
            }
            while hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                if nl.primitive(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
        (_, None, Some(b)) => Ok(b),
        _ => Err(Error::InconsistentNonlinearity(
            "neither an interior zero nor an ignition temperature is known".into(),
        )),
    }
}

/// One of the structural requirements checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `f(0) = f(1) = 0`
    ZeroEndpoints,
    /// `f' <= 0` on `(0, delta)` and `(1 - delta, 1)`
    MonotoneEnds,
    /// `∫_0^1 f > 0`
    PositiveIntegral,
    /// `f > 0` on `(beta, 1)`
    PositiveAboveBeta,
    /// `∫_0^s f <= 0` for `s` in `(0, beta)`
    NonpositiveBelowBeta,
    /// linear continuation outside `[0, 1]`
    LinearExtension,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::ZeroEndpoints => "f(0)=f(1)=0",
            Condition::MonotoneEnds => "f'<=0 in (0,delta)u(1-delta,1)",
            Condition::PositiveIntegral => "int_0^1 f(s)ds > 0",
            Condition::PositiveAboveBeta => "f>0 in (beta,1)",
            Condition::NonpositiveBelowBeta => "int_0^s f <= 0 on (0,beta)",
            Condition::LinearExtension => "linear extension outside [0,1]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    /// Sample point where the condition failed.
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn violates(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Checks the structural conditions on a uniform grid of `samples + 1` points.
pub fn validate(nl: &Nonlinearity, samples: usize) -> ValidationReport {
    let samples = samples.max(100);
    let mut violations = Vec::new();
    let mut push = |condition, at, value| violations.push(Violation { condition, at, value });

    for s in [0.0, 1.0] {
        let v = nl.f(s);
        if v.abs() > CHECK_TOL || !v.is_finite() {
            push(Condition::ZeroEndpoints, s, v);
        }
    }

    let delta = nl.delta();
    if !(delta > 0.0 && delta < 0.5) {
        push(Condition::MonotoneEnds, delta, delta);
    } else {
        for k in 1..samples {
            let s = delta * k as f64 / samples as f64;
            for point in [s, 1.0 - s] {
                let d = nl.f_prime(point);
                if d > CHECK_TOL {
                    push(Condition::MonotoneEnds, point, d);
                    break;
                }
            }
        }
    }

    let total = nl.integral();
    if !(total > 0.0) {
        push(Condition::PositiveIntegral, 1.0, total);
    }

    match ignition_point(nl) {
        Ok(beta) if beta > 0.0 && beta < 1.0 => {
            for k in 1..samples {
                let s = k as f64 / samples as f64;
                if s > beta {
                    let v = nl.f(s);
                    if v <= 0.0 {
                        push(Condition::PositiveAboveBeta, s, v);
                    }
                } else if s < beta {
                    let p = nl.primitive(s);
                    if p > CHECK_TOL {
                        push(Condition::NonpositiveBelowBeta, s, p);
                    }
                }
            }
        }
        Ok(beta) => push(Condition::PositiveAboveBeta, beta, f64::NAN),
        Err(_) => {
            push(Condition::PositiveAboveBeta, f64::NAN, f64::NAN);
            push(Condition::NonpositiveBelowBeta, f64::NAN, f64::NAN);
        }
    }

    // One-sided quotients at the smallest representable step; laws such as
    // the explicit one approach their endpoint slope only logarithmically.
    let (k0, k1) = nl.extension_slopes();
    let h0 = 1e-100;
    let h1 = 1.0 - (1.0 - 1e-12);
    let d0 = (nl.f(h0) - nl.f(0.0)) / h0;
    let d1 = (nl.f(1.0) - nl.f(1.0 - h1)) / h1;
    if (d0 - k0).abs() > 1e-2 * (1.0 + k0.abs()) {
        push(Condition::LinearExtension, 0.0, d0 - k0);
    }
    if (d1 - k1).abs() > 1e-2 * (1.0 + k1.abs()) {
        push(Condition::LinearExtension, 1.0, d1 - k1);
    }
    for s in [-2.0, -0.5, 1.5, 3.0] {
        let expected = if s < 0.0 { k0 * s } else { k1 * (s - 1.0) };
        if (nl.f(s) - expected).abs() > CHECK_TOL * (1.0 + expected.abs()) {
            push(Condition::LinearExtension, s, nl.f(s));
        }
    }

    ValidationReport { passed: violations.is_empty(), violations }
}

/// `f1 >= f2` on a uniform grid with strict inequality somewhere.
pub fn dominates(f1: &Nonlinearity, f2: &Nonlinearity, samples: usize) -> bool {
    let mut strict = false;
    for k in 0..=samples {
        let s = k as f64 / samples as f64;
        let d = f1.f(s) - f2.f(s);
        if d < -CHECK_TOL {
            return false;
        }
        if d > CHECK_TOL {
            strict = true;
        }
    }
    strict
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_integral_and_roots() {
        let nl = make_bistable_cubic(0.25).unwrap();
        assert!((nl.integral() - (1.0 - 0.5) / 12.0).abs() < 1e-15);
        // composite quadrature cross-check of the closed-form primitive
        let q = quad::simpson(|s| s * (1.0 - s) * (s - 0.25), 0.0, 1.0, 1e-13);
        assert!((q - nl.integral()).abs() < 1e-12);
        assert_eq!(nl.f(0.0), 0.0);
        assert_eq!(nl.f(1.0), 0.0);
        assert_eq!(nl.f(0.25), 0.0);
        assert_eq!(nl.extension_slopes(), (-0.25, -0.75));
    }

    #[test]
    fn cubic_rejects_balanced_or_negative() {
        assert!(make_bistable_cubic(0.5).is_err());
        assert!(make_bistable_cubic(0.7).is_err());
        assert!(make_bistable_cubic(0.0).is_err());
    }

    #[test]
    fn cubic_ignition_point() {
        // closed form: F(b) = -b^4/4 + (1+a) b^3/3 - a b^2/2 = 0 reduces to
        // 3 b^2 - 4 (1+a) b + 6 a = 0 with the root in (a, 1)
        let a: f64 = 0.25;
        let root = (4.0 * (1.0 + a) - (16.0 * (1.0 + a) * (1.0 + a) - 72.0 * a).sqrt()) / 6.0;
        let nl = make_bistable_cubic(a).unwrap();
        let beta = ignition_point(&nl).unwrap();
        assert!((beta - root).abs() < 1e-9, "{beta} vs {root}");
        let near_balanced = make_bistable_cubic(0.4999).unwrap();
        assert!(ignition_point(&near_balanced).unwrap() > 0.99);
    }

    #[test]
    fn combustion_values() {
        let nl = make_combustion(0.3, 1.0).unwrap();
        assert_eq!(nl.f(0.15), 0.0);
        assert!((nl.f(0.65) - 0.1225).abs() < 1e-15);
        assert!((nl.integral() - 0.7f64.powi(3) / 6.0).abs() < 1e-15);
        assert_eq!(potential(&nl, 0.3), 0.0);
        assert_eq!(ignition_point(&nl).unwrap(), 0.3);
        assert!(make_combustion(1.2, 1.0).is_err());
        assert!(make_combustion(0.3, -1.0).is_err());
    }

    #[test]
    fn potential_shape() {
        let nl = make_bistable_cubic(0.25).unwrap();
        assert_eq!(potential(&nl, 0.0), 0.0);
        assert!((potential(&nl, 1.0) + 0.5 / 12.0).abs() < 1e-15);
        let beta = ignition_point(&nl).unwrap();
        for k in 0..=100 {
            let s = beta * k as f64 / 100.0;
            assert!(potential(&nl, s) >= -1e-10);
        }
        for s in [-3.0, -1.0, -0.1] {
            assert!(potential(&nl, s) >= 0.0);
        }
        for s in [1.1, 2.0, 5.0] {
            assert!(potential(&nl, s) >= potential(&nl, 1.0));
        }
    }

    #[test]
    fn quadratic_potential_bound() {
        for nl in [make_bistable_cubic(0.25).unwrap(), make_combustion(0.3, 1.0).unwrap()] {
            let mut c: f64 = 0.0;
            let pts: Vec<f64> = (-1000..=1000).map(|k| k as f64 / 100.0).filter(|s| *s != 0.0).collect();
            for &s in &pts {
                c = c.max(potential(&nl, s).abs() / (s * s));
            }
            assert!(c.is_finite());
            for &s in &pts {
                let g = potential(&nl, s);
                assert!(g.abs() <= c * s * s * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn validation_outcomes() {
        assert!(validate(&make_bistable_cubic(0.25).unwrap(), 1000).passed);
        assert!(validate(&make_combustion(0.3, 1.0).unwrap(), 1000).passed);

        let constant = Nonlinearity::custom(Arc::new(|_| 0.1), Arc::new(|_| 0.0), 0.1, None, Some(0.5));
        let report = validate(&constant, 1000);
        assert!(!report.passed);
        assert!(report.violates(Condition::ZeroEndpoints));

        let reflected = reflect(&make_bistable_cubic(0.25).unwrap());
        let report = validate(&reflected, 1000);
        assert!(report.violates(Condition::PositiveIntegral));
    }

    #[test]
    fn reflection() {
        let nl = make_bistable_cubic(0.25).unwrap();
        let r = reflect(&nl);
        let rr = reflect(&r);
        for k in 0..=50 {
            let s = k as f64 / 50.0;
            assert!((rr.f(s) - nl.f(s)).abs() < 1e-15);
            assert!((r.f(s) + nl.f(1.0 - s)).abs() < 1e-15);
        }
        assert!(r.f(0.75).abs() < 1e-15);
        assert_eq!(r.alpha(), Some(0.75));
        assert!((r.integral() + nl.integral()).abs() < 1e-15);
        assert_eq!(rr.descriptor(), nl.descriptor());
        assert!(ignition_point(&r).is_err());
    }

    #[test]
    fn custom_uses_simpson_primitive() {
        let nl = Nonlinearity::custom(
            Arc::new(|s: f64| s * (1.0 - s) * (s - 0.3)),
            Arc::new(|s: f64| -3.0 * s * s + 2.6 * s - 0.3),
            0.1,
            Some(0.3),
            None,
        );
        assert!((nl.integral() - 0.4 / 12.0).abs() < 1e-12);
        assert!(validate(&nl, 200).passed);
    }
}
