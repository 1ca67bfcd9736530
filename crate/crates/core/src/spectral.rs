//! Zonal eigenfunctions of the conformal Laplacian pulled back to `R^n`.
//!
//! With `t = (1-r^2)/(1+r^2)` and `f_0 = (1+r^2)^{-(n-2)/2}`, the functions
//! `g_k = f_0 C_k^{((n-1)/2)}(t)` solve `-Delta g_k = mu_k (1+r^2)^{-2} g_k`
//! with `mu_k = 4k(k+n-1) + n(n-2)`. They are orthogonal in
//! `<u, v>_w = int u v (1+|x|^2)^{-2} dx`.

use std::sync::Arc;

use crate::constants::conformal_eigenvalue;
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::grid::{Estimate, GridRef};
use crate::norms::{discrete_weighted_norm, weighted_inner, weighted_norm};
use crate::potential::hls_quadratic_form;
use crate::profiles::conformal_weight;
use crate::radial::RadialFn;
use crate::verdict::{Relation, StabilityVerdict};

#[derive(Debug, Clone)]
pub struct ZonalBasis {
    n: Dim,
    grid: GridRef,
    functions: Vec<RadialFn>,
    eigenvalues: Vec<u64>,
    eigen_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    pub coeffs: Vec<f64>,
    /// `||g - sum a_k g_k||_w / ||g||_w`, or 0 for synthesized input.
    pub reconstruction_residual: f64,
}

impl SpectralCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SpectralCoeffs { coeffs, reconstruction_residual: 0.0 }
    }

    /// Unit vector `e_k` in a basis with highest index `k_max`.
    pub fn unit(k: usize, k_max: usize) -> Self {
        let mut coeffs = vec![0.0; k_max + 1];
        coeffs[k] = 1.0;
        SpectralCoeffs::new(coeffs)
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }
}

/// Gegenbauer polynomials `C_0^alpha(t), ..., C_K^alpha(t)`.
pub fn gegenbauer(alpha: f64, k_max: usize, t: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(k_max + 1);
    c.push(1.0);
    if k_max >= 1 {
        c.push(2.0 * alpha * t);
    }
    for k in 2..=k_max {
        let kf = k as f64;
        let next = (2.0 * (kf + alpha - 1.0) * t * c[k - 1] - (kf + 2.0 * alpha - 2.0) * c[k - 2]) / kf;
        c.push(next);
    }
    c
}

pub fn build_zonal_basis(n: Dim, grid: &GridRef, k_max: usize) -> Result<ZonalBasis> {
    if k_max < 2 {
        return Err(Error::Parameter(format!("zonal basis needs K >= 2, got {k_max}")));
    }
    if grid.n() != n {
        return Err(Error::GridMismatch);
    }
    let nf = n.as_f64();
    let alpha = (nf - 1.0) / 2.0;
    let mut columns = vec![Vec::with_capacity(grid.len()); k_max + 1];
    for &r in grid.radii() {
        let s = 1.0 + r * r;
        let f0 = s.powf(-(nf - 2.0) / 2.0);
        let t = (1.0 - r * r) / s;
        for (k, c) in gegenbauer(alpha, k_max, t).into_iter().enumerate() {
            columns[k].push(f0 * c);
        }
    }
    let raw: Vec<RadialFn> = columns
        .into_iter()
        .map(|v| RadialFn::new(Arc::clone(grid), v, nf - 2.0))
        .collect::<Result<_>>()?;
    let mut functions: Vec<RadialFn> = Vec::with_capacity(raw.len());
    for g in raw {
        let mut v = g;
        for _ in 0..2 {
            for q in &functions {
                let c = weighted_inner(&v, q)?.value;
                v = v.axpby(1.0, q, -c)?;
            }
        }
        let norm = weighted_norm(&v)?;
        if norm == 0.0 {
            return Err(Error::Degenerate("zonal mode vanished on the grid".into()));
        }
        // fix the sign so that g_k(0) > 0, matching C_k(1) > 0
        let sign = if v.values()[0] < 0.0 { -1.0 } else { 1.0 };
        functions.push(v.scale(sign / norm));
    }
    let eigenvalues: Vec<u64> = (0..=k_max).map(|k| conformal_eigenvalue(n, k)).collect();
    let w = conformal_weight(grid);
    let mut eigen_residuals = Vec::with_capacity(k_max + 1);
    for (g, &mu) in functions.iter().zip(&eigenvalues) {
        let lap = g.laplacian();
        let res = lap.axpby(1.0, &g.mul(&w)?, mu as f64)?;
        eigen_residuals.push(discrete_weighted_norm(&res, |r| (1.0 + r * r).powi(-2)));
    }
    Ok(ZonalBasis { n, grid: Arc::clone(grid), functions, eigenvalues, eigen_residuals })
}

impl ZonalBasis {
    pub fn n(&self) -> Dim {
        self.n
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.functions.len() - 1
    }

    pub fn functions(&self) -> &[RadialFn] {
        &self.functions
    }

    pub fn mode(&self, k: usize) -> &RadialFn {
        &self.functions[k]
    }

    pub fn eigenvalues(&self) -> &[u64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k] as f64
    }

    /// `||Delta g_k + mu_k g_k (1+r^2)^{-2}||_w / ||g_k||_w` per mode.
    pub fn eigen_residuals(&self) -> &[f64] {
        &self.eigen_residuals
    }

    /// Gram matrix of the stored modes in the weighted inner product.
    pub fn gram(&self) -> Result<Vec<Vec<f64>>> {
        self.functions
            .iter()
            .map(|a| self.functions.iter().map(|b| weighted_inner(a, b).map(|e| e.value)).collect())
            .collect()
    }
}

pub fn project(g: &RadialFn, basis: &ZonalBasis) -> Result<SpectralCoeffs> {
    if !Arc::ptr_eq(g.grid(), &basis.grid) {
        return Err(Error::GridMismatch);
    }
    let coeffs: Vec<f64> = basis
        .functions
        .iter()
        .map(|q| weighted_inner(g, q).map(|e| e.value))
        .collect::<Result<_>>()?;
    let norm = weighted_norm(g)?;
    let reconstruction_residual = if norm == 0.0 {
        0.0
    } else {
        let rebuilt = synthesize(&SpectralCoeffs::new(coeffs.clone()), basis)?;
        weighted_norm(&g.sub(&rebuilt)?)? / norm
    };
    Ok(SpectralCoeffs { coeffs, reconstruction_residual })
}

pub fn synthesize(coeffs: &SpectralCoeffs, basis: &ZonalBasis) -> Result<RadialFn> {
    if coeffs.coeffs.len() > basis.functions.len() {
        return Err(Error::Parameter(format!(
            "{} coefficients for a basis of {} modes",
            coeffs.coeffs.len(),
            basis.functions.len()
        )));
    }
    let mut out = RadialFn::zero(&basis.grid);
    for (a, q) in coeffs.coeffs.iter().zip(&basis.functions) {
        if *a != 0.0 {
            out = out.axpby(1.0, q, *a)?;
        }
    }
    Ok(out)
}

/// Removes the components along `g_0` and `g_1`.
pub fn enforce_orthogonality(g: &RadialFn, basis: &ZonalBasis) -> Result<RadialFn> {
    let scale = weighted_norm(g)?;
    let mut v = g.clone();
    for _ in 0..2 {
        for q in &basis.functions[..2] {
            let c = weighted_inner(&v, q)?.value;
            v = v.axpby(1.0, q, -c)?;
        }
    }
    if weighted_norm(&v)? <= 1e-12 * scale {
        return Ok(RadialFn::zero(g.grid()));
    }
    Ok(v)
}

/// `D[g] = int (g w) (-Delta)^{-1} (g w)` with `w = (1+|x|^2)^{-2}`.
pub fn conformal_dirichlet(g: &RadialFn) -> Result<Estimate> {
    let gw = g.mul(&conformal_weight(g.grid()))?;
    hls_quadratic_form(&gw)
}

/// Largest of `|<g, g_0>_w|`, `|<g, g_1>_w|` relative to `||g||_w`.
pub fn orthogonality_defect(g: &RadialFn, basis: &ZonalBasis) -> Result<f64> {
    let norm = weighted_norm(g)?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let a0 = weighted_inner(g, &basis.functions[0])?.value.abs();
    let a1 = weighted_inner(g, &basis.functions[1])?.value.abs();
    Ok(a0.max(a1) / norm)
}

/// Checks `D[g] / ||g||_w^2 <= 1/mu_2` for `g` orthogonal to modes 0 and 1.
pub fn spectral_gap_check(g: &RadialFn, basis: &ZonalBasis) -> Result<StabilityVerdict> {
    let defect = orthogonality_defect(g, basis)?;
    if defect > 1e-6 {
        return Err(Error::Inadmissible(format!(
            "input is not orthogonal to modes 0 and 1 (relative defect {defect:.3e})"
        )));
    }
    let norm2 = weighted_inner(g, g)?;
    if norm2.value == 0.0 {
        return Err(Error::Degenerate("spectral gap quotient of the zero function".into()));
    }
    let d = conformal_dirichlet(g)?;
    let quotient = d.value / norm2.value;
    let err = d.error / norm2.value + quotient * norm2.error / norm2.value + 64.0 * f64::EPSILON * quotient;
    let mu2 = basis.eigenvalue(2);
    Ok(StabilityVerdict::check("spectral_gap", quotient, Relation::AtMost, 1.0 / mu2, err)
        .with_param("mu_2", mu2)
        .with_param("orthogonality_defect", defect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::profiles::basis_f;

    fn basis(n: usize, k: usize) -> ZonalBasis {
        let d = Dim::new(n).unwrap();
        let g = make_grid(d, 2048, 1e4).unwrap();
        build_zonal_basis(d, &g, k).unwrap()
    }

    #[test]
    fn gegenbauer_recurrence_matches_closed_forms() {
        let a = 1.5;
        let t = 0.3;
        let c = gegenbauer(a, 3, t);
        assert!((c[2] - (2.0 * a * (a + 1.0) * t * t - a)).abs() < 1e-15);
        let c3 = 4.0 / 3.0 * a * (a + 1.0) * (a + 2.0) * t.powi(3) - 2.0 * a * (a + 1.0) * t;
        assert!((c[3] - c3).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_and_residuals() {
        let b = basis(3, 8);
        assert_eq!(&b.eigenvalues()[..3], &[3, 15, 35]);
        assert!(b.eigenvalues().windows(2).all(|w| w[1] > w[0]));
        for (k, r) in b.eigen_residuals().iter().enumerate() {
            assert!(*r < 1e-4, "k={k}: {r}");
        }
        let gram = b.gram().unwrap();
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn first_modes_are_the_radial_f_family() {
        let b = basis(4, 4);
        let d = b.n();
        for (k, idx) in [(0usize, 0usize), (1, 5)] {
            let f = basis_f(d, b.grid(), idx).unwrap();
            let c = project(&f, &b).unwrap();
            let norm = weighted_norm(&f).unwrap();
            assert!((c.coeffs[k].abs() - norm).abs() < 1e-10 * norm);
            assert!(c.reconstruction_residual < 1e-10);
        }
        assert!(matches!(build_zonal_basis(d, b.grid(), 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn orthogonality_enforcement() {
        let b = basis(3, 6);
        assert!(enforce_orthogonality(b.mode(0), &b).unwrap().is_zero());
        let g2 = enforce_orthogonality(b.mode(2), &b).unwrap();
        assert!(weighted_norm(&g2.sub(b.mode(2)).unwrap()).unwrap() < 1e-12);
        let mixed = b.mode(0).add(b.mode(3)).unwrap();
        let out = enforce_orthogonality(&mixed, &b).unwrap();
        assert!(weighted_norm(&out.sub(b.mode(3)).unwrap()).unwrap() < 1e-8);
        assert!(orthogonality_defect(&out, &b).unwrap() < 1e-10);
    }

    #[test]
    fn gap_quotients() {
        let b = basis(3, 8);
        let v = spectral_gap_check(b.mode(2), &b).unwrap();
        assert!((v.lhs - 1.0 / 35.0).abs() < 1e-6 / 35.0 && v.passed(), "{v:?}");
        let v = spectral_gap_check(b.mode(5), &b).unwrap();
        assert!((v.lhs - 1.0 / 143.0).abs() < 1e-6 / 143.0 && v.passed());
        let g = b.mode(2).add(b.mode(3)).unwrap();
        let v = spectral_gap_check(&g, &b).unwrap();
        let expect = (1.0 / 35.0 + 1.0 / 63.0) / 2.0;
        assert!((v.lhs - expect).abs() < 1e-8 && v.margin > 0.0);
        assert!(matches!(spectral_gap_check(b.mode(1), &b), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn parseval() {
        let b = basis(3, 6);
        let c = SpectralCoeffs::new(vec![0.0, 0.0, 3.0, 0.0, 0.0, -4.0]);
        let g = synthesize(&c, &b).unwrap();
        let p = project(&g, &b).unwrap();
        assert!((p.energy() - 25.0).abs() < 1e-6 * 25.0);
        assert!((p.coeffs[2] - 3.0).abs() < 1e-10 && (p.coeffs[5] + 4.0).abs() < 1e-10);
    }
}
