//! Reference profiles: the HLS optimizer, the Sobolev basis functions and
//! the Gagliardo-Nirenberg optimizers.

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::grid::GridRef;
use crate::radial::RadialFn;

fn check_grid(n: Dim, grid: &GridRef) -> Result<()> {
    if grid.n() != n {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `u_star(r) = (1+r^2)^{-(n+2)/2}`.
pub fn ustar(n: Dim, grid: &GridRef) -> Result<RadialFn> {
    scaled_ustar(n, grid, 1.0, 1.0)
}

/// `mu * u_star(sigma r)`.
pub fn scaled_ustar(n: Dim, grid: &GridRef, mu: f64, sigma: f64) -> Result<RadialFn> {
    check_grid(n, grid)?;
    let e = -(n.as_f64() + 2.0) / 2.0;
    RadialFn::from_fn(grid, n.as_f64() + 2.0, |r| {
        let s = sigma * r;
        mu * (1.0 + s * s).powf(e)
    })
}

/// Radial members of the family `f_0, ..., f_{n+1}`:
/// `f_0 = (1+r^2)^{-(n-2)/2}` and `f_{n+1} = (1-r^2)/(1+r^2) f_0`.
pub fn basis_f(n: Dim, grid: &GridRef, index: usize) -> Result<RadialFn> {
    check_grid(n, grid)?;
    let e = -(n.as_f64() - 2.0) / 2.0;
    let beta = n.as_f64() - 2.0;
    if index == 0 {
        RadialFn::from_fn(grid, beta, |r| (1.0 + r * r).powf(e))
    } else if index == n.get() + 1 {
        RadialFn::from_fn(grid, beta, |r| (1.0 - r * r) / (1.0 + r * r) * (1.0 + r * r).powf(e))
    } else if index <= n.get() {
        Err(Error::NonRadialIndex(index))
    } else {
        Err(Error::Parameter(format!("basis index {index} exceeds n + 1 = {}", n.get() + 1)))
    }
}

/// Sobolev optimizer `mu f_0(sigma r)`.
pub fn scaled_f0(n: Dim, grid: &GridRef, mu: f64, sigma: f64) -> Result<RadialFn> {
    check_grid(n, grid)?;
    let e = -(n.as_f64() - 2.0) / 2.0;
    RadialFn::from_fn(grid, n.as_f64() - 2.0, |r| {
        let s = sigma * r;
        mu * (1.0 + s * s).powf(e)
    })
}

/// Interpolation exponent `theta = 2n(q-p) / (q(2n - p(n-2)))` for
/// `2 <= p < q <= 2n/(n-2)`.
pub fn gns_theta(n: Dim, p: f64, q: f64) -> Result<f64> {
    let nf = n.as_f64();
    let crit = n.sobolev_exponent();
    let tol = 1e-12 * crit;
    if !(p >= 2.0) || !(q > p) || q > crit + tol {
        return Err(Error::Parameter(format!(
            "need 2 <= p < q <= {crit} for n = {n}, got p = {p}, q = {q}"
        )));
    }
    Ok(2.0 * nf * (q - p) / (q * (2.0 * nf - p * (nf - 2.0))))
}

/// Gagliardo-Nirenberg optimizer `(1+r^2)^{-1/(q-1)}`.
pub fn gns_optimizer(n: Dim, grid: &GridRef, q: f64) -> Result<RadialFn> {
    check_grid(n, grid)?;
    if !(q > 1.0) {
        return Err(Error::Parameter(format!("need q > 1, got {q}")));
    }
    let e = -1.0 / (q - 1.0);
    RadialFn::from_fn(grid, 2.0 / (q - 1.0), |r| (1.0 + r * r).powf(e))
}

/// Conformal weight `(1+r^2)^-2` as a radial function.
pub fn conformal_weight(grid: &GridRef) -> RadialFn {
    RadialFn::from_fn(grid, 4.0, |r| (1.0 + r * r).powi(-2)).expect("finite samples")
}
