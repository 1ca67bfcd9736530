//! The Newton potential `(-Delta)^{-1}` on radial data, the HLS quadratic
//! form and an independent double-integral oracle.
//!
//! For radial `f` the potential is the superposition of spherical shells,
//!
//! ```text
//! Phi(r) = 1/(n-2) * [ r^{2-n} int_0^r f(s) s^{n-1} ds + int_r^inf f(s) s ds ],
//! ```
//!
//! evaluated with cumulative integrals in the stretched grid coordinate.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::grid::{Estimate, GridRef};
use crate::norms::{discrete_weighted_norm, lp_integral};
use crate::quad;
use crate::radial::RadialFn;

#[derive(Debug, Clone)]
pub struct PotentialResult {
    pub phi: RadialFn,
    /// `dPhi/dr = -r^{1-n} int_0^r f s^{n-1} ds`, exact for the shell formula.
    pub dphi: RadialFn,
    pub quad_error: f64,
}

fn check_potential_tail(f: &RadialFn) -> Result<()> {
    if !(f.tail_exponent() > 2.0) {
        return Err(Error::NonIntegrable(format!(
            "potential needs tail exponent > 2, got {}",
            f.tail_exponent()
        )));
    }
    Ok(())
}

pub fn inverse_laplacian(f: &RadialFn) -> Result<PotentialResult> {
    let grid = f.grid();
    if f.is_zero() {
        return Ok(PotentialResult { phi: RadialFn::zero(grid), dphi: RadialFn::zero(grid), quad_error: 0.0 });
    }
    check_potential_tail(f)?;
    let n = grid.n().as_f64();
    let sa = grid.surface_area();
    let mass = grid.cumulative_ball(f.values());
    let (tail, total) = grid.cumulative_shell_tail(f.values(), f.tail_exponent())?;
    let mut phi = Vec::with_capacity(grid.len());
    let mut dphi = Vec::with_capacity(grid.len());
    for ((&r, m), t) in grid.radii().iter().zip(&mass).zip(&tail) {
        let inner = m / sa;
        phi.push((r.powf(2.0 - n) * inner + t) / (n - 2.0));
        dphi.push(-inner * r.powf(1.0 - n));
    }
    let beta = f.tail_exponent();
    let phi_tail = (n - 2.0).min(beta - 2.0);
    let dphi_tail = (n - 1.0).min(beta - 1.0);
    Ok(PotentialResult {
        phi: RadialFn::new(Arc::clone(grid), phi, phi_tail)?,
        dphi: RadialFn::new(Arc::clone(grid), dphi, dphi_tail)?,
        quad_error: total.error / (n - 2.0),
    })
}

/// `int f (-Delta)^{-1} g dx`.
pub fn hls_bilinear_form(f: &RadialFn, g: &RadialFn) -> Result<Estimate> {
    f.same_grid(g)?;
    if f.is_zero() || g.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let pot = inverse_laplacian(g)?;
    let prod = f.mul(&pot.phi)?;
    let mut est = prod.integral()?;
    est.error += pot.quad_error * lp_integral(f, 1.0).map(|e| e.value).unwrap_or(0.0);
    Ok(est)
}

/// `int f (-Delta)^{-1} f dx`, the square of the `H^{-1}` norm.
pub fn hls_quadratic_form(f: &RadialFn) -> Result<Estimate> {
    let mut est = hls_bilinear_form(f, f)?;
    est.value = est.value.max(0.0);
    Ok(est)
}

/// `|||f||| = sqrt(int f (-Delta)^{-1} f)`.
pub fn h_minus_one_norm(f: &RadialFn) -> Result<f64> {
    Ok(hls_quadratic_form(f)?.value.sqrt())
}

/// Relative `L^2` residual `||-Delta_h Phi - f|| / ||f||` of a computed
/// potential under the grid's finite-difference Laplacian.
pub fn potential_residual(f: &RadialFn, pot: &PotentialResult) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let residual = pot.phi.laplacian().add(f)?;
    Ok(discrete_weighted_norm(&residual, |_| 1.0) / discrete_weighted_norm(f, |_| 1.0))
}

/// `int_{S^{n-1}} |r e - s w|^{-lambda} dw` for unit `e`, by adaptive
/// quadrature of the polar-angle integral.
pub fn angular_riesz_kernel(n: Dim, r: f64, s: f64, lambda: f64) -> f64 {
    let nf = n.as_f64();
    let lower_sphere = 2.0 * PI.powf((nf - 1.0) / 2.0) / gamma((nf - 1.0) / 2.0);
    let d2 = (r - s) * (r - s);
    let rs4 = 4.0 * r * s;
    let integrand = |phi: f64| {
        let half = (0.5 * phi).sin();
        (d2 + rs4 * half * half).powf(-0.5 * lambda) * phi.sin().powf(nf - 2.0)
    };
    let (v, _) = quad::integrate(integrand, 0.0, PI, 1e-10, 0.0, 400);
    lower_sphere * v
}

/// Precomputed quadrature matrix for `int int f(x) |x-y|^{-lambda} g(y) dx dy`.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: GridRef,
    lambda: f64,
    matrix: Vec<f64>,
}

impl RieszKernel {
    pub fn new(grid: &GridRef, lambda: f64) -> Result<Self> {
        let n = grid.n();
        let nf = n.as_f64();
        if !(lambda > 0.0 && lambda < nf) {
            return Err(Error::Parameter(format!("need 0 < lambda < {nf}, got {lambda}")));
        }
        let len = grid.len();
        let radii = grid.radii();
        let singular = lambda >= nf - 1.0;
        let rows: Vec<Vec<f64>> = (0..len)
            .into_par_iter()
            .map(|i| {
                (i..len)
                    .map(|j| {
                        if i == j && singular {
                            diagonal_average(grid, i, lambda)
                        } else {
                            angular_riesz_kernel(n, radii[i], radii[j], lambda)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut a = vec![0.0; len * len];
        for (i, row) in rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                a[i * len + i + k] = v;
                a[(i + k) * len + i] = v;
            }
        }
        let w = grid.weights();
        let mut q: Vec<f64> = (0..len * len).map(|k| w[k / len] * w[k % len] * a[k]).collect();
        if !singular {
            q = gregory_corrected(&q, len, n);
        }
        let sa = grid.surface_area();
        q.iter_mut().for_each(|v| *v /= sa);
        Ok(RieszKernel { grid: Arc::clone(grid), lambda, matrix: q })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bilinear(&self, f: &RadialFn, g: &RadialFn) -> Result<f64> {
        if !Arc::ptr_eq(f.grid(), &self.grid) || !Arc::ptr_eq(g.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        let len = self.grid.len();
        let (fv, gv) = (f.values(), g.values());
        let sum: f64 = (0..len)
            .map(|i| {
                let row = &self.matrix[i * len..(i + 1) * len];
                fv[i] * row.iter().zip(gv).map(|(q, g)| q * g).sum::<f64>()
            })
            .sum();
        Ok(sum)
    }
}

/// End corrections of Gregory type applied to both one-sided pieces of every
/// row, where the kernel has a kink across the diagonal; the two orientations
/// are averaged so that the rule stays symmetric.
fn gregory_corrected(q: &[f64], len: usize, n: Dim) -> Vec<f64> {
    // Column weights of -(1/12)D - (1/24)D^2 - (19/720)D^3 for backward
    // differences, and +(1/12)D - (1/24)D^2 + (19/720)D^3 for forward ones.
    let left = nodal_weights([-1.0 / 12.0, -1.0 / 24.0, -19.0 / 720.0], true);
    let right = nodal_weights([1.0 / 12.0, -1.0 / 24.0, 19.0 / 720.0], false);
    // density parity across the origin: r^{n-1} dr/dx is (-1)^{n-1}-symmetric
    let parity = if n.get() % 2 == 0 { -1.0 } else { 1.0 };
    let mut corr = vec![0.0; len * len];
    for i in 0..len {
        // 1-based position of node i is i + 1; position 0 is the origin
        let pos = i as i64 + 1;
        for (m, c) in left.iter().enumerate() {
            let j = pos - m as i64;
            if j >= 1 {
                let col = (j - 1) as usize;
                corr[i * len + col] += c * q[i * len + col];
            } else if j < 0 {
                let col = (-j - 1) as usize;
                corr[i * len + col] += parity * c * q[i * len + col];
            }
        }
        if i + 3 < len {
            for (m, c) in right.iter().enumerate() {
                let col = i + m;
                corr[i * len + col] += c * q[i * len + col];
            }
        }
    }
    (0..len * len)
        .map(|k| {
            let (i, j) = (k / len, k % len);
            q[k] + 0.5 * (corr[k] + corr[j * len + i])
        })
        .collect()
}

/// Nodal weights on offsets `0, 1, 2, 3` (backward or forward) of
/// `c_1 D + c_2 D^2 + c_3 D^3`.
fn nodal_weights(c: [f64; 3], backward: bool) -> [f64; 4] {
    const BINOM: [[f64; 4]; 3] = [[1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    let mut out = [0.0; 4];
    for (k, row) in BINOM.iter().enumerate() {
        let order = k + 1;
        for m in 0..=order {
            let exponent = if backward { m } else { order - m };
            let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
            out[m] += c[k] * sign * row[m];
        }
    }
    out
}

/// Average of the kernel over the grid cell around node `i`, used on the
/// diagonal when the kernel is not bounded there.
fn diagonal_average(grid: &GridRef, i: usize, lambda: f64) -> f64 {
    let n = grid.n();
    let h = grid.step();
    let x = (i + 1) as f64 * h;
    let r = grid.radii()[i];
    let side = |sign: f64| {
        let f = |d: f64| angular_riesz_kernel(n, r, grid.radius_at(x + sign * d), lambda);
        quad::integrate(f, 0.0, 0.5 * h, 1e-8, 0.0, 200).0
    };
    (side(-1.0) + side(1.0)) / h
}

/// `int int f(x) |x-y|^{-lambda} g(y) dx dy` by direct two-dimensional
/// quadrature after reducing the angular part.
pub fn hls_double_integral_oracle(f: &RadialFn, g: &RadialFn, lambda: f64) -> Result<f64> {
    f.same_grid(g)?;
    let nf = f.grid().n().as_f64();
    if !(lambda > 0.0 && lambda < nf) {
        return Err(Error::Parameter(format!("need 0 < lambda < {nf}, got {lambda}")));
    }
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    RieszKernel::new(f.grid(), lambda)?.bilinear(f, g)
}
