//! Functions of one variable known through samples or integrator output.

use crate::error::{Error, Result};
use serde::Serialize;

/// A scalar function `y(x)` with derivative, defined on a closed interval.
pub trait Trajectory {
    /// Interval on which `eval` is defined.
    fn range(&self) -> (f64, f64);

    /// Where the delay equation starts to hold; left of it lies initial data.
    fn start(&self) -> f64;

    /// Points where the derivative may jump, ascending.
    fn kinks(&self) -> Vec<f64>;

    /// `(y, ydot)`; at a kink the derivative is taken from the right.
    fn eval(&self, x: f64) -> Result<(f64, f64)>;

    /// Left and right derivatives at `x`.
    fn one_sided(&self, x: f64) -> Result<(f64, f64)>;
}

pub(crate) fn out_of_range(x: f64, (lo, hi): (f64, f64)) -> Error {
    Error::OutOfRange { x, lo, hi }
}

/// Cubic Hermite basis on `[0, 1]`: value and `t`-derivative weights.
#[inline]
pub fn hermite(t: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let y = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let d = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (y, d)
}

/// Monotone table with one-sided slopes at every node.
#[derive(Debug, Clone, Serialize)]
pub struct HermiteTable {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Derivative approaching each node from the left.
    pub left: Vec<f64>,
    /// Derivative leaving each node to the right.
    pub right: Vec<f64>,
    pub start: f64,
    pub kinks: Vec<f64>,
}

impl HermiteTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, left: Vec<f64>, right: Vec<f64>, start: f64, kinks: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() != xs.len() || left.len() != xs.len() || right.len() != xs.len() {
            return Err(Error::Config("table needs at least two consistent nodes".into()));
        }
        if let Some(w) = xs.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::NonGraph(w[0]));
        }
        Ok(Self { xs, ys, left, right, start, kinks })
    }

    fn locate(&self, x: f64) -> Result<usize> {
        let r = self.range();
        if !(x >= r.0 && x <= r.1) {
            return Err(out_of_range(x, r));
        }
        let i = self.xs.partition_point(|&v| v <= x);
        Ok(i.saturating_sub(1).min(self.xs.len() - 2))
    }
}

impl Trajectory for HermiteTable {
    fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("non-empty"))
    }

    fn start(&self) -> f64 {
        self.start
    }

    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        Ok(hermite(t, h, self.ys[i], self.right[i], self.ys[i + 1], self.left[i + 1]))
    }

    fn one_sided(&self, x: f64) -> Result<(f64, f64)> {
        let i = self.locate(x)?;
        if x == self.xs[i] {
            return Ok((self.left[i], self.right[i]));
        }
        let d = self.eval(x)?.1;
        Ok((d, d))
    }
}
