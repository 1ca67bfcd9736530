use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Estimate, GridRef};

/// A radial function sampled on a [`RadialGrid`](crate::RadialGrid).
///
/// `tail_exponent` is a decay rate `beta` with `|f(r)| = O(r^-beta)`; the
/// zero function carries `beta = inf`.
#[derive(Debug, Clone)]
pub struct RadialFn {
    grid: GridRef,
    values: Vec<f64>,
    tail_exponent: f64,
}

impl RadialFn {
    pub fn new(grid: GridRef, values: Vec<f64>, tail_exponent: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(tail_exponent > 0.0) {
            return Err(Error::Parameter(format!("tail exponent must be positive, got {tail_exponent}")));
        }
        let tail_exponent = if values.iter().all(|&v| v == 0.0) { f64::INFINITY } else { tail_exponent };
        Ok(RadialFn { grid, values, tail_exponent })
    }

    pub fn from_fn(grid: &GridRef, tail_exponent: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.radii().iter().map(|&r| f(r)).collect();
        RadialFn::new(Arc::clone(grid), values, tail_exponent)
    }

    pub fn zero(grid: &GridRef) -> Self {
        RadialFn { grid: Arc::clone(grid), values: vec![0.0; grid.len()], tail_exponent: f64::INFINITY }
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn with_tail_exponent(mut self, beta: f64) -> Self {
        if !self.is_zero() {
            self.tail_exponent = beta;
        }
        self
    }

    pub fn same_grid(&self, other: &RadialFn) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &RadialFn, tail: f64, op: impl Fn(f64, f64) -> f64) -> Result<RadialFn> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        RadialFn::new(Arc::clone(&self.grid), values, tail)
    }

    pub fn add(&self, other: &RadialFn) -> Result<RadialFn> {
        self.zip_with(other, self.tail_exponent.min(other.tail_exponent), |a, b| a + b)
    }

    pub fn sub(&self, other: &RadialFn) -> Result<RadialFn> {
        self.zip_with(other, self.tail_exponent.min(other.tail_exponent), |a, b| a - b)
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &RadialFn, b: f64) -> Result<RadialFn> {
        let tail = match (a == 0.0, b == 0.0) {
            (true, true) => f64::INFINITY,
            (true, false) => other.tail_exponent,
            (false, true) => self.tail_exponent,
            _ => self.tail_exponent.min(other.tail_exponent),
        };
        self.zip_with(other, tail, |x, y| a * x + b * y)
    }

    pub fn mul(&self, other: &RadialFn) -> Result<RadialFn> {
        self.zip_with(other, self.tail_exponent + other.tail_exponent, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> RadialFn {
        let values = self.values.iter().map(|v| c * v).collect();
        let tail = if c == 0.0 { f64::INFINITY } else { self.tail_exponent };
        RadialFn { grid: Arc::clone(&self.grid), values, tail_exponent: tail }
    }

    pub fn abs(&self) -> RadialFn {
        self.map(f64::abs, self.tail_exponent)
    }

    /// `|f|^a` pointwise, for `a > 0`.
    pub fn abs_powf(&self, a: f64) -> RadialFn {
        self.map(|v| v.abs().powf(a), a * self.tail_exponent)
    }

    /// Pointwise image under `op`, with the caller supplying the new tail.
    pub fn map(&self, op: impl Fn(f64) -> f64, tail_exponent: f64) -> RadialFn {
        let values: Vec<f64> = self.values.iter().map(|&v| op(v)).collect();
        let tail = if values.iter().all(|&v| v == 0.0) { f64::INFINITY } else { tail_exponent };
        RadialFn { grid: Arc::clone(&self.grid), values, tail_exponent: tail }
    }

    /// Multiplies by `w(r)`, where `w` decays like `r^-decay`.
    pub fn weighted(&self, decay: f64, w: impl Fn(f64) -> f64) -> RadialFn {
        let values: Vec<f64> = self.values.iter().zip(self.grid.radii()).map(|(&v, &r)| v * w(r)).collect();
        let tail = if values.iter().all(|&v| v == 0.0) { f64::INFINITY } else { self.tail_exponent + decay };
        RadialFn { grid: Arc::clone(&self.grid), values, tail_exponent: tail }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `int_{R^n} f dx`. The declared tail must make `f` integrable.
    pub fn integral(&self) -> Result<Estimate> {
        self.grid.integrate_decaying(&self.values, self.tail_exponent)
    }

    pub fn derivative(&self) -> RadialFn {
        let v = self.grid.d_dr(&self.values, self.tail_exponent);
        RadialFn::new(Arc::clone(&self.grid), v, self.tail_exponent + 1.0)
            .unwrap_or_else(|_| RadialFn::zero(&self.grid))
    }

    pub fn laplacian(&self) -> RadialFn {
        let v = self.grid.laplacian(&self.values, self.tail_exponent);
        RadialFn::new(Arc::clone(&self.grid), v, self.tail_exponent + 2.0)
            .unwrap_or_else(|_| RadialFn::zero(&self.grid))
    }
}
