//! Lebesgue norms, the weighted star norm and the conformal inner product.

use crate::error::{Error, Result};
use crate::grid::Estimate;
use crate::radial::RadialFn;

/// `||f||_p` for `p >= 1`.
pub fn lp_norm(f: &RadialFn, p: f64) -> Result<f64> {
    lp_norm_estimate(f, p).map(|e| e.value)
}

/// `||f||_p^p` with its quadrature error.
pub fn lp_integral(f: &RadialFn, p: f64) -> Result<Estimate> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("Lebesgue exponent must be at least 1, got {p}")));
    }
    if f.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let samples: Vec<f64> = f.values().iter().map(|v| v.abs().powf(p)).collect();
    f.grid().integrate_decaying(&samples, p * f.tail_exponent())
}

pub fn lp_norm_estimate(f: &RadialFn, p: f64) -> Result<Estimate> {
    Ok(lp_integral(f, p)?.powf(1.0 / p))
}

/// `||v||_*^2 = int v^2 (1+|x|^2)^2 dx`.
pub fn star_norm_squared(v: &RadialFn) -> Result<Estimate> {
    if v.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let samples: Vec<f64> = v
        .values()
        .iter()
        .zip(v.grid().radii())
        .map(|(&x, &r)| {
            let w = 1.0 + r * r;
            x * x * w * w
        })
        .collect();
    v.grid().integrate_decaying(&samples, 2.0 * v.tail_exponent() - 4.0)
}

pub fn star_norm(v: &RadialFn) -> Result<f64> {
    Ok(star_norm_squared(v)?.value.sqrt())
}

/// `<u, v>_w = int u v (1+|x|^2)^-2 dx`.
pub fn weighted_inner(u: &RadialFn, v: &RadialFn) -> Result<Estimate> {
    u.same_grid(v)?;
    if u.is_zero() || v.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let samples: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .zip(u.grid().radii())
        .map(|((&a, &b), &r)| {
            let w = 1.0 + r * r;
            a * b / (w * w)
        })
        .collect();
    u.grid().integrate_decaying(&samples, u.tail_exponent() + v.tail_exponent() + 4.0)
}

pub fn weighted_norm(u: &RadialFn) -> Result<f64> {
    Ok(weighted_inner(u, u)?.value.max(0.0).sqrt())
}

/// `(sum_i w_i rho(r_i) v_i^2)^{1/2}` without any tail continuation; used
/// for residuals, which carry discretisation noise near `r_max`.
pub fn discrete_weighted_norm(v: &RadialFn, rho: impl Fn(f64) -> f64) -> f64 {
    let g = v.grid();
    v.values()
        .iter()
        .zip(g.weights())
        .zip(g.radii())
        .map(|((x, w), &r)| w * rho(r) * x * x)
        .sum::<f64>()
        .sqrt()
}

/// `int u v dx`.
pub fn l2_inner(u: &RadialFn, v: &RadialFn) -> Result<Estimate> {
    u.mul(v)?.integral()
}

/// `||grad g||_2^2` from finite differences; the error includes the change
/// against a lower-order stencil.
pub fn dirichlet_energy(g: &RadialFn) -> Result<Estimate> {
    if g.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let grid = g.grid();
    let beta = g.tail_exponent();
    let fine = grid.d_dr(g.values(), beta);
    let coarse = grid.d_dr_stencil(g.values(), beta, 3);
    let energy = |d: Vec<f64>| -> Result<Estimate> {
        let samples: Vec<f64> = d.iter().map(|v| v * v).collect();
        grid.integrate_decaying(&samples, 2.0 * (beta + 1.0))
    };
    let mut est = energy(fine)?;
    let low = energy(coarse)?;
    est.error += (est.value - low.value).abs();
    Ok(est)
}
