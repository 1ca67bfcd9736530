//! Deficit functionals of the sharp HLS, Sobolev and Gagliardo-Nirenberg
//! inequalities and the auxiliary bounds used in the stability arguments.
//!
//! Throughout, `p = 2n/(n+2)`, `q = 2n/(n-2)` and `u_star = (1+r^2)^{-(n+2)/2}`.

use crate::constants::sharp_constants;
use crate::error::{Error, Result};
use crate::grid::Estimate;
use crate::norms::{dirichlet_energy, lp_integral, star_norm_squared};
use crate::potential::{hls_quadratic_form, inverse_laplacian};
use crate::profiles::ustar;
use crate::radial::RadialFn;
use crate::verdict::{DeficitReport, Relation, StabilityVerdict};

/// Error of `x^e` given `x = value +- error`.
fn pow_error(x: Estimate, e: f64) -> f64 {
    x.powf(e).error
}

/// HLS deficit in its centred form around `u_star`,
///
/// `H[u] = C_n (||u||_p^2 - ||u_star||_p^2 - 2 ||u_star||_p^{4/(n+2)} int u_star^{p-1} (u - u_star))
///        - int (u - u_star) (-Delta)^{-1} (u - u_star)`,
///
/// which equals `C_n ||u||_p^2 - int u (-Delta)^{-1} u` identically. The
/// latter is reported as `raw_deficit`.
pub fn hls_deficit(u: &RadialFn) -> Result<DeficitReport> {
    let grid = u.grid();
    let n = grid.n();
    let nf = n.as_f64();
    let consts = sharp_constants(n);
    let p = n.hls_exponent();
    let star = ustar(n, grid)?;
    if !(p * u.tail_exponent() > nf) {
        return Err(Error::NonIntegrable(format!(
            "u is not in L^p: tail exponent {} <= n/p",
            u.tail_exponent()
        )));
    }
    let h = u.sub(&star)?;
    let big_p = lp_integral(&star, p)?;
    // delta = int (|u|^p - u_star^p), delta1 = p int u_star^{p-1} h; the
    // difference delta - delta1 is second order and summed pointwise.
    let decay = p * u.tail_exponent().min(nf + 2.0);
    let pointwise = |op: &dyn Fn(f64, f64) -> f64| -> Result<Estimate> {
        let samples: Vec<f64> = u.values().iter().zip(star.values()).map(|(&a, &b)| op(a, b)).collect();
        grid.integrate_decaying(&samples, decay)
    };
    let delta = pointwise(&|a, b| a.abs().powf(p) - b.powf(p))?;
    let delta1 = pointwise(&|a, b| p * b.powf(p - 1.0) * (a - b))?;
    let delta2 = pointwise(&|a, b| a.abs().powf(p) - b.powf(p) - p * b.powf(p - 1.0) * (a - b))?;
    let s = 2.0 / p;
    let a = delta.value / big_p.value;
    let bracket = (s * a.ln_1p()).exp_m1() - s * a;
    let lp_part = big_p.value.powf(s) * (bracket + s * delta2.value / big_p.value);
    let lp_part_err = big_p.value.powf(s) * s * (delta.error + delta2.error) / big_p.value
        + pow_error(big_p, s) * (bracket.abs() + s * (delta2.value / big_p.value).abs())
        + 16.0 * f64::EPSILON * big_p.value.powf(s) * (a.abs() + delta1.value.abs() / big_p.value);
    let lhs = consts.c_n * lp_part;
    let quad = hls_quadratic_form(&h)?;
    let lp_u = (big_p.value + delta.value).max(0.0).powf(1.0 / p);
    let full_quad = hls_quadratic_form(u)?;
    let raw = consts.c_n * lp_u * lp_u - full_quad.value;
    let quad_error = consts.c_n * lp_part_err + quad.error;
    Ok(DeficitReport::new(lhs, quad.value, quad_error)
        .with_norm("lp_norm", lp_u)
        .with_norm("ustar_lp_norm", big_p.value.powf(1.0 / p))
        .with_norm("hls_quadratic_form", full_quad.value)
        .with_norm("perturbation_quadratic_form", quad.value)
        .with_norm("raw_deficit", raw)
        .with_norm("raw_deficit_error", consts.c_n * pow_error(big_p, s) + full_quad.error + 1e-15 * raw.abs())
        .with_norm("C_n", consts.c_n))
}

/// `||grad g||_2^2 - S_n ||g||_q^2`.
pub fn sobolev_deficit(g: &RadialFn) -> Result<DeficitReport> {
    let grid = g.grid();
    let n = grid.n();
    let consts = sharp_constants(n);
    let q = n.sobolev_exponent();
    if g.is_zero() {
        return Ok(DeficitReport::new(0.0, 0.0, 0.0));
    }
    if !(g.tail_exponent() > (n.as_f64() - 2.0) / 2.0) {
        return Err(Error::NonIntegrable(format!(
            "Sobolev deficit needs tail exponent > (n-2)/2, got {}",
            g.tail_exponent()
        )));
    }
    let grad = dirichlet_energy(g)?;
    let lq = lp_integral(g, q)?;
    let lq2 = lq.powf(2.0 / q);
    let rhs = consts.s_n * lq2.value;
    let err = grad.error + consts.s_n * lq2.error + 16.0 * f64::EPSILON * grad.value;
    Ok(DeficitReport::new(grad.value, rhs, err)
        .with_norm("grad_l2_sq", grad.value)
        .with_norm("lq_norm", lq2.value.sqrt())
        .with_norm("S_n", consts.s_n))
}

/// Gagliardo-Nirenberg deficit with exponent `p = (n+1)/(n-1)`:
/// `C_n n(n-2)/(n-1)^2 ||grad g||_2^2 ||g||_{p+1}^{2(p-1)} - ||g||_{2p}^{2p}`.
pub fn ccl_gns_deficit(g: &RadialFn) -> Result<DeficitReport> {
    let grid = g.grid();
    let n = grid.n();
    let nf = n.as_f64();
    if g.is_zero() {
        return Ok(DeficitReport::new(0.0, 0.0, 0.0));
    }
    let consts = sharp_constants(n);
    let p = (nf + 1.0) / (nf - 1.0);
    let factor = consts.c_n * nf * (nf - 2.0) / ((nf - 1.0) * (nf - 1.0));
    let grad = dirichlet_energy(g)?;
    let mid = lp_integral(g, p + 1.0)?.powf(2.0 * (p - 1.0) / (p + 1.0));
    let top = lp_integral(g, 2.0 * p)?;
    let lhs = factor * grad.value * mid.value;
    let err = factor * (grad.error * mid.value + grad.value * mid.error) + top.error + 16.0 * f64::EPSILON * lhs;
    Ok(DeficitReport::new(lhs, top.value, err)
        .with_norm("grad_l2_sq", grad.value)
        .with_norm("l_p_plus_1_power", mid.value)
        .with_norm("l_2p_pow_2p", top.value)
        .with_norm("p", p))
}

/// Stability quotients of `f` relative to `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientReport {
    /// `(||f||_p^2 - S_n |||f|||^2) / |||f - h|||^2`.
    pub quotient: f64,
    /// `(C_n ||f||_p^2 - |||f|||^2) / |||f - h|||^2 = quotient / S_n`.
    pub centered_quotient: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub quad_error: f64,
}

pub fn stability_quotient_report(f: &RadialFn, h: &RadialFn) -> Result<QuotientReport> {
    let n = f.grid().n();
    let consts = sharp_constants(n);
    let diff = f.sub(h)?;
    let den = hls_quadratic_form(&diff)?;
    let lp = lp_integral(f, n.hls_exponent())?.powf(1.0 / n.hls_exponent());
    if den.value.sqrt() < 1e-12 * lp.value {
        return Err(Error::Degenerate("|||f - h||| vanishes; quotient undefined".into()));
    }
    let deficit = hls_deficit(f)?;
    let numerator = consts.s_n * deficit.value;
    let quotient = numerator / den.value;
    let quad_error = consts.s_n * deficit.quad_error / den.value + quotient.abs() * den.error / den.value;
    Ok(QuotientReport {
        quotient,
        centered_quotient: quotient / consts.s_n,
        numerator,
        denominator: den.value,
        quad_error,
    })
}

pub fn stability_quotient(f: &RadialFn, h: &RadialFn) -> Result<f64> {
    Ok(stability_quotient_report(f, h)?.quotient)
}

/// `||f||_p^2 <= ||u_star||_p^{4/(n+2)} ||f||_*^2`.
pub fn holder_upper_bound(f: &RadialFn) -> Result<StabilityVerdict> {
    let grid = f.grid();
    let n = grid.n();
    let nf = n.as_f64();
    let p = n.hls_exponent();
    let star = ustar(n, grid)?;
    let lp2 = lp_integral(f, p)?.powf(2.0 / p);
    let sp = lp_integral(&star, p)?.powf((4.0 / (nf + 2.0)) / p);
    let st = star_norm_squared(f)?;
    let rhs = sp.value * st.value;
    let err = lp2.error + sp.error * st.value + sp.value * st.error + 16.0 * f64::EPSILON * rhs;
    let ratio = if rhs > 0.0 { lp2.value / rhs } else { 1.0 };
    Ok(StabilityVerdict::check("holder", lp2.value, Relation::AtMost, rhs, err).with_param("ratio", ratio))
}

/// Chain `||f||_p^2 - ||u_star||_p^2 >= (2/p) ||u_star||_p^{2-p} (int |f|^p - int u_star^p)
/// >= 2^{1-2/p} (p-1) || |f| - u_star ||_p^2`, stated for `||f||_p >= ||u_star||_p`.
pub fn pck_lower_bound(f: &RadialFn) -> Result<StabilityVerdict> {
    let grid = f.grid();
    let n = grid.n();
    let p = n.hls_exponent();
    let star = ustar(n, grid)?;
    let fp = lp_integral(f, p)?;
    let sp = lp_integral(&star, p)?;
    if fp.value < sp.value - (fp.error + sp.error) {
        return Ok(StabilityVerdict::not_applicable("pck", "requires ||f||_p >= ||u_star||_p"));
    }
    let excess = {
        let samples: Vec<f64> = f.values().iter().zip(star.values()).map(|(a, b)| a.abs().powf(p) - b.powf(p)).collect();
        grid.integrate_decaying(&samples, p * f.tail_exponent().min(star.tail_exponent()))?
    };
    let s = 2.0 / p;
    let a = excess.value / sp.value;
    let first = sp.value.powf(s) * (s * a.ln_1p()).exp_m1();
    let first_err = sp.value.powf(s) * s * excess.error / sp.value + pow_error(sp, s) * (a * s).abs();
    let middle = s * sp.value.powf((2.0 - p) / p) * excess.value;
    let middle_err = s * sp.value.powf((2.0 - p) / p) * excess.error + pow_error(sp, (2.0 - p) / p) * s * excess.value.abs();
    let dist = f.abs().sub(&star)?;
    let dist_p = lp_integral(&dist, p)?.powf(2.0 / p);
    let last = 2f64.powf(1.0 - s) * (p - 1.0) * dist_p.value;
    let last_err = 2f64.powf(1.0 - s) * (p - 1.0) * dist_p.error;
    let link1 = StabilityVerdict::check("pck_bernoulli", first, Relation::AtLeast, middle, first_err + middle_err + 16.0 * f64::EPSILON * first.abs());
    let link2 = StabilityVerdict::check("pck_distance", middle, Relation::AtLeast, last, middle_err + last_err + 16.0 * f64::EPSILON * middle.abs());
    Ok(StabilityVerdict::chain("pck", vec![link1, link2]))
}

/// Duality bound obtained by expanding a square: for `g > 0`, `f = g^{(n-2)/(n+2)}`,
///
/// `S_n (||g||_p^2 - S_n |||g|||^2) <= ||f||_q^{8/(n-2)} (||grad f||_2^2 - S_n ||f||_q^2)`.
///
/// The margin equals `int | ||f||_q^{4/(n-2)} grad f - S_n grad (-Delta)^{-1} g |^2`,
/// reported as `completed_square`.
pub fn duality_square_bound(g: &RadialFn) -> Result<StabilityVerdict> {
    let grid = g.grid();
    let n = grid.n();
    let nf = n.as_f64();
    let consts = sharp_constants(n);
    if let Some(i) = g.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Inadmissible(format!("g must be positive; g(r_{i}) = {}", g.values()[i])));
    }
    let r = (nf - 2.0) / (nf + 2.0);
    let q = n.sobolev_exponent();
    let f = g.map(|v| v.powf(r), r * g.tail_exponent());
    let hls = hls_deficit(g)?;
    let lhs = consts.s_n * consts.s_n * hls.value;
    let lhs_err = consts.s_n * consts.s_n * hls.quad_error;
    let sob = sobolev_deficit(&f)?;
    let fq = lp_integral(&f, q)?.powf(1.0 / q);
    let prefactor = fq.value.powf(8.0 / (nf - 2.0));
    let rhs = prefactor * sob.value;
    let rhs_err = prefactor * sob.quad_error + pow_error(fq, 8.0 / (nf - 2.0)) * sob.value.abs();
    let pot = inverse_laplacian(g)?;
    let df = f.derivative();
    let a = fq.value.powf(4.0 / (nf - 2.0));
    let integrand: Vec<f64> = df
        .values()
        .iter()
        .zip(pot.dphi.values())
        .map(|(x, y)| (a * x - consts.s_n * y).powi(2))
        .collect();
    let sq_tail = 2.0 * (f.tail_exponent() + 1.0).min(nf - 1.0);
    let square = grid.integrate_decaying(&integrand, sq_tail)?;
    Ok(StabilityVerdict::check("duality", lhs, Relation::AtMost, rhs, lhs_err + rhs_err + 16.0 * f64::EPSILON * rhs.abs())
        .with_param("completed_square", square.value)
        .with_param("completed_square_error", square.error)
        .with_param("ratio", if rhs != 0.0 { lhs / rhs } else { f64::NAN }))
}
