use crate::error::{Error, Result};

/// A named function of one argument given by piecewise cubic Hermite data.
///
/// Nodes may repeat an abscissa only through distinct one-sided slopes:
/// `left[i]` is the slope arriving at node `i`, `right[i]` the slope leaving it.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Table {
    pub fn new(name: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || left.len() != n || right.len() != n {
            return Err(Error::Config("table needs at least two consistent nodes".into()));
        }
        if let Some(w) = xs.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!("table abscissae not increasing near {}", w[0])));
        }
        if xs.iter().chain(&ys).chain(&left).chain(&right).any(|v| !v.is_finite()) {
            return Err(Error::Config("table holds non-finite values".into()));
        }
        Ok(Self { name: name.into(), xs, ys, left, right })
    }

    /// Smooth table with one slope per node.
    pub fn smooth(name: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        Self::new(name, xs, ys, slopes.clone(), slopes)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value, first and second derivative at `x`; NaN outside the table.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        let i = self.xs.partition_point(|&v| v <= x).saturating_sub(1).min(self.xs.len() - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.right[i] * h, self.left[i + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
        let dv = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * d1;
        let ddv = (12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * d0 + (6.0 - 12.0 * t) * y1 + (6.0 * t - 2.0) * d1;
        (v, dv / h, ddv / (h * h))
    }
}
