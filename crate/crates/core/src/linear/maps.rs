use crate::error::{Error, Result};
use crate::expr::Table;
use serde::Serialize;

/// Strictly increasing map known at nodes with exact slopes, interpolated
/// by cubic Hermite pieces in both directions.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneMap {
    pub xs: Vec<f64>,
    pub image: Vec<f64>,
    pub slopes: Vec<f64>,
    #[serde(skip)]
    forward: Table,
    #[serde(skip)]
    inverse: Table,
}

impl MonotoneMap {
    pub fn new(xs: Vec<f64>, image: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if let Some(i) = (0..xs.len()).find(|&i| !(slopes[i] > 0.0 && slopes[i].is_finite())) {
            return Err(Error::NonMonotoneTransform(xs[i]));
        }
        if let Some(i) = (1..xs.len()).find(|&i| !(image[i] > image[i - 1])) {
            return Err(Error::NonMonotoneTransform(xs[i]));
        }
        let forward = Table::smooth("map", xs.clone(), image.clone(), slopes.clone())?;
        let inv: Vec<f64> = slopes.iter().map(|s| 1.0 / s).collect();
        let inverse = Table::smooth("inverse", image.clone(), xs.clone(), inv)?;
        Ok(Self { xs, image, slopes, forward, inverse })
    }

    fn value(t: &Table, x: f64) -> Result<(f64, f64)> {
        let (v, d, _) = t.eval3(x);
        if !v.is_finite() {
            let (lo, hi) = t.range();
            return Err(Error::OutOfRange { x, lo, hi });
        }
        Ok((v, d))
    }

    pub fn forward(&self, x: f64) -> Result<f64> {
        Ok(Self::value(&self.forward, x)?.0)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(Self::value(&self.forward, x)?.1)
    }

    pub fn inverse(&self, u: f64) -> Result<f64> {
        Ok(Self::value(&self.inverse, u)?.0)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.forward.range()
    }
}
