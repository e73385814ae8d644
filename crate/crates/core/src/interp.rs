//! Piecewise cubic Hermite interpolation with an exact running antiderivative.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    x: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
    cum: Vec<f64>,
}

impl HermiteTable {
    /// Knots `x` strictly increasing, values `v` and slopes `d` at the knots.
    pub fn new(x: Vec<f64>, v: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || v.len() != x.len() || d.len() != x.len() {
            return Err(Error::Domain("Hermite table needs matching arrays of length >= 2".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("Hermite knots must be strictly increasing".into()));
        }
        let mut cum = Vec::with_capacity(x.len());
        cum.push(0.0);
        for k in 0..x.len() - 1 {
            let h = x[k + 1] - x[k];
            let seg = h * (0.5 * (v[k] + v[k + 1]) + h * (d[k] - d[k + 1]) / 12.0);
            cum.push(cum[k] + seg);
        }
        Ok(HermiteTable { x, v, d, cum })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    fn locate(&self, s: f64) -> usize {
        let n = self.x.len();
        let k = self.x.partition_point(|&xk| xk <= s);
        k.clamp(1, n - 1) - 1
    }

    /// Interpolant at `s`, clamped to the table range.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(self.x[0], *self.x.last().unwrap());
        let k = self.locate(s);
        let h = self.x[k + 1] - self.x[k];
        let tau = (s - self.x[k]) / h;
        let t2 = tau * tau;
        let t3 = t2 * tau;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.v[k]
            + (t3 - 2.0 * t2 + tau) * h * self.d[k]
            + (-2.0 * t3 + 3.0 * t2) * self.v[k + 1]
            + (t3 - t2) * h * self.d[k + 1]
    }

    /// Derivative of the interpolant.
    pub fn deriv(&self, s: f64) -> f64 {
        let s = s.clamp(self.x[0], *self.x.last().unwrap());
        let k = self.locate(s);
        let h = self.x[k + 1] - self.x[k];
        let tau = (s - self.x[k]) / h;
        let t2 = tau * tau;
        ((6.0 * t2 - 6.0 * tau) * self.v[k] + (-6.0 * t2 + 6.0 * tau) * self.v[k + 1]) / h
            + (3.0 * t2 - 4.0 * tau + 1.0) * self.d[k]
            + (3.0 * t2 - 2.0 * tau) * self.d[k + 1]
    }

    /// `∫_{x_0}^s` of the interpolant.
    pub fn integral(&self, s: f64) -> f64 {
        let s = s.clamp(self.x[0], *self.x.last().unwrap());
        let k = self.locate(s);
        let h = self.x[k + 1] - self.x[k];
        let tau = (s - self.x[k]) / h;
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let t4 = t3 * tau;
        self.cum[k]
            + h * ((0.5 * t4 - t3 + tau) * self.v[k]
                + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * h * self.d[k]
                + (-0.5 * t4 + t3) * self.v[k + 1]
                + (0.25 * t4 - t3 / 3.0) * h * self.d[k + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let p = |x: f64| 2.0 * x * x * x - x * x + 3.0 * x - 1.0;
        let dp = |x: f64| 6.0 * x * x - 2.0 * x + 3.0;
        let ip = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 1.5 * x * x - x;
        let xs: Vec<f64> = vec![-1.0, -0.3, 0.2, 0.25, 1.1, 2.0];
        let t = HermiteTable::new(xs.clone(), xs.iter().map(|&x| p(x)).collect(), xs.iter().map(|&x| dp(x)).collect())
            .unwrap();
        for k in 0..=60 {
            let x = -1.0 + 3.0 * k as f64 / 60.0;
            assert!((t.eval(x) - p(x)).abs() < 1e-12);
            assert!((t.deriv(x) - dp(x)).abs() < 1e-11);
            assert!((t.integral(x) - (ip(x) - ip(-1.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(HermiteTable::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(HermiteTable::new(vec![0.0], vec![1.0], vec![0.0]).is_err());
    }
}
