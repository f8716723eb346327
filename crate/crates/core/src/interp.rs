//! Monotone piecewise-cubic Hermite interpolation (Fritsch-Butland slopes).

use crate::error::{arg_err, Result};

#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return arg_err("interpolation needs at least two knots and matching lengths");
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return arg_err("interpolation knots must be strictly increasing");
        }
        if y.iter().any(|v| !v.is_finite()) {
            return arg_err("non-finite interpolation value");
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let k = self.x.partition_point(|&v| v <= t);
        Some(k.clamp(1, self.x.len() - 1) - 1)
    }

    /// Value at `t`, or `None` outside the knot range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let k = self.locate(t)?;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1])
    }

    /// Derivative of the interpolant at `t`, or `None` outside the knot range.
    pub fn derivative(&self, t: f64) -> Option<f64> {
        let k = self.locate(t)?;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        Some(d00 * self.y[k] + d10 * self.slopes[k] + d01 * self.y[k + 1] + d11 * self.slopes[k + 1])
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots_and_stays_monotone() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| v.tanh()).collect();
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a).unwrap() - b).abs() < 1e-15);
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let v = p.eval(9.5 * i as f64 / 1000.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(p.eval(-0.1).is_none());
        assert!(p.eval(9.6).is_none());
    }

    #[test]
    fn derivative_matches_smooth_function() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let p = Pchip::new(x, y).unwrap();
        assert!((p.derivative(1.005).unwrap() - 1.005f64.exp()).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
    }
}
