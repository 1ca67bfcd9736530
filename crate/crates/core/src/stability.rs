//! Verifiers for the local stability theorems around `u_star` and the
//! projection onto the manifold of optimizers `mu u_star(sigma x)`.

use std::sync::Arc;

use crate::constants::{kappa, sharp_constants};
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::functionals::{hls_deficit, stability_quotient_report};
use crate::grid::{Estimate, GridRef};
use crate::norms::{lp_integral, star_norm_squared, weighted_inner, weighted_norm};
use crate::potential::{hls_bilinear_form, hls_quadratic_form};
use crate::profiles::{basis_f, scaled_ustar, ustar};
use crate::radial::RadialFn;
use crate::spectral::{synthesize, SpectralCoeffs, ZonalBasis};
use crate::verdict::{Relation, StabilityVerdict};

/// `u_eps = u_star + eps u_star^{4/(n+2)} g`.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub g: RadialFn,
    pub epsilon: f64,
    pub u_eps: RadialFn,
}

/// `u_star^{4/(n+2)} = (1+r^2)^{-2}` times `g`.
fn lift(g: &RadialFn) -> Result<RadialFn> {
    Ok(g.weighted(4.0, |r| (1.0 + r * r).powi(-2)))
}

/// `sup |u_star^{-(n-2)/(n+2)} g|` over the nodes.
pub fn ruc_ratio(g: &RadialFn) -> f64 {
    let n = g.grid().n().as_f64();
    g.values()
        .iter()
        .zip(g.grid().radii())
        .fold(0.0, |m, (&v, &r)| m.max((v * (1.0 + r * r).powf((n - 2.0) / 2.0)).abs()))
}

/// Largest `|<g, f_i>_w| / (||g||_w ||f_i||_w)` over the radial indices
/// `i = 0, n+1`.
pub fn radial_orthogonality_defect(g: &RadialFn) -> Result<f64> {
    let grid = g.grid();
    let n = grid.n();
    let gn = weighted_norm(g)?;
    if gn == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for idx in [0, n.get() + 1] {
        let f = basis_f(n, grid, idx)?;
        let c = weighted_inner(g, &f)?.value.abs() / (gn * weighted_norm(&f)?);
        worst = worst.max(c);
    }
    Ok(worst)
}

pub fn make_admissible_perturbation(coeffs: &SpectralCoeffs, epsilon: f64, basis: &ZonalBasis) -> Result<Perturbation> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if coeffs.coeffs.iter().take(2).any(|&a| a != 0.0) {
        return Err(Error::Inadmissible("coefficients of modes 0 and 1 must vanish".into()));
    }
    if coeffs.coeffs.iter().all(|&a| a == 0.0) {
        return Err(Error::Degenerate("all coefficients are zero".into()));
    }
    let raw = synthesize(coeffs, basis)?;
    let ratio = ruc_ratio(&raw);
    let g = raw.scale(1.0 / ratio);
    let grid = basis.grid();
    let star = ustar(basis.n(), grid)?;
    let u_eps = star.axpby(1.0, &lift(&g)?, epsilon)?;
    Ok(Perturbation { g, epsilon, u_eps })
}

impl Perturbation {
    /// Builds `u_eps` from a caller-supplied direction without rescaling.
    pub fn from_direction(g: RadialFn, epsilon: f64) -> Result<Self> {
        let grid = Arc::clone(g.grid());
        let star = ustar(grid.n(), &grid)?;
        let u_eps = star.axpby(1.0, &lift(&g)?, epsilon)?;
        Ok(Perturbation { g, epsilon, u_eps })
    }

    fn check_admissible(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Inadmissible(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        if self.g.is_zero() {
            return Err(Error::Inadmissible("zero perturbation direction".into()));
        }
        let ratio = ruc_ratio(&self.g);
        if ratio > 1.0 + 1e-12 {
            return Err(Error::Inadmissible(format!("relative uniform bound violated: sup ratio {ratio}")));
        }
        let defect = radial_orthogonality_defect(&self.g)?;
        if defect > 1e-10 {
            return Err(Error::Inadmissible(format!("orthogonality violated: relative defect {defect:.3e}")));
        }
        Ok(())
    }
}

/// Lower-bound factor `1/(n+4) - eps/(3(n+2))` from the proof of the
/// uniform-convergence theorem.
pub fn ruc_bound_factor(n: Dim, epsilon: f64) -> f64 {
    let nf = n.as_f64();
    1.0 / (nf + 4.0) - epsilon / (3.0 * (nf + 2.0))
}

/// Checks `H[u_eps] >= kappa_n ||u_eps - u_star||_*^2`.
pub fn verify_theorem_ruc(pert: &Perturbation) -> Result<StabilityVerdict> {
    pert.check_admissible()?;
    let grid = pert.g.grid();
    let n = grid.n();
    let nf = n.as_f64();
    let k = kappa(n);
    let deficit = hls_deficit(&pert.u_eps)?;
    let lifted = lift(&pert.g)?;
    let st = star_norm_squared(&lifted)?;
    let eps2 = pert.epsilon * pert.epsilon;
    let rhs = k * eps2 * st.value;
    let err = deficit.quad_error + k * eps2 * st.error;
    let m = weighted_inner(&pert.g, &pert.g)?.value;
    let proof_bound = 4.0 * eps2 / (nf * (nf + 2.0)) * ruc_bound_factor(n, pert.epsilon) * m;
    Ok(StabilityVerdict::check("theorem_ruc", deficit.value, Relation::AtLeast, rhs, err)
        .with_param("epsilon", pert.epsilon)
        .with_param("kappa_n", k)
        .with_param("quad_error", err)
        .with_param("ratio", deficit.value / rhs)
        .with_param("proof_bound", proof_bound)
        .with_param("weighted_norm_sq", m))
}

/// Quantities of the weighted-norm theorem for `h = f - u_star`:
/// `X = int u_star^{p-2} h^2`, `Y = int u_star^{p-3} |h|^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionKData {
    pub x: Estimate,
    pub y: Estimate,
    /// Largest `eta` for which the condition holds.
    pub eta_star: f64,
}

pub fn condition_k_data(h: &RadialFn) -> Result<ConditionKData> {
    let grid = h.grid();
    let nf = grid.n().as_f64();
    let x = star_norm_squared(h)?;
    let y = moment_y(h)?;
    let eta_star = if y.value > 0.0 { 3.0 * (nf + 2.0) * x.value / ((nf + 4.0) * y.value) - 1.0 } else { f64::INFINITY };
    Ok(ConditionKData { x, y, eta_star })
}

/// `int u_star^{p-3} |h|^3 = int (1+r^2)^{(n+6)/2} |h|^3`.
pub fn moment_y(h: &RadialFn) -> Result<Estimate> {
    if h.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let grid = h.grid();
    let nf = grid.n().as_f64();
    let samples: Vec<f64> = h
        .values()
        .iter()
        .zip(grid.radii())
        .map(|(&v, &r)| (1.0 + r * r).powf((nf + 6.0) / 2.0) * v.abs().powi(3))
        .collect();
    grid.integrate_decaying(&samples, 3.0 * h.tail_exponent() - (nf + 6.0))
}

/// Largest admissible `eta` for `f`, or an error if the perturbation vanishes.
pub fn max_admissible_eta(f: &RadialFn) -> Result<f64> {
    let star = ustar(f.grid().n(), f.grid())?;
    let h = f.sub(&star)?;
    if h.is_zero() {
        return Err(Error::Degenerate("f equals u_star".into()));
    }
    Ok(condition_k_data(&h)?.eta_star)
}

/// Checks `Q[f, u_star] >= 4 eta / (n (1 + eta))` under the cubic-moment
/// condition on `f - u_star`. The stronger bound for the centred quotient
/// `H[f] / |||f - u_star|||^2` is reported as the part `theorem_star_centered`.
pub fn verify_theorem_star(f: &RadialFn, eta: f64) -> Result<StabilityVerdict> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!("eta must be positive, got {eta}")));
    }
    let grid = f.grid();
    let n = grid.n();
    let nf = n.as_f64();
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Inadmissible("f must be nonnegative".into()));
    }
    let star = ustar(n, grid)?;
    let h = f.sub(&star)?;
    if h.is_zero() {
        return Err(Error::Inadmissible("f equals u_star; the quotient is undefined".into()));
    }
    let g = h.weighted(-4.0, |r| (1.0 + r * r).powi(2));
    let defect = radial_orthogonality_defect(&g)?;
    if defect > 1e-8 {
        return Err(Error::Inadmissible(format!("orthogonality violated: relative defect {defect:.3e}")));
    }
    let data = condition_k_data(&h)?;
    let tol = (data.x.error + data.y.error) / data.x.value.max(f64::MIN_POSITIVE);
    if eta > data.eta_star + tol {
        return Err(Error::ConditionK { eta, eta_star: data.eta_star });
    }
    let q = stability_quotient_report(f, &star)?;
    let bound = 4.0 * eta / (nf * (1.0 + eta));
    let eps = q.denominator.sqrt();
    let spec_form = StabilityVerdict::check("theorem_star", q.quotient, Relation::AtLeast, bound, q.quad_error);
    let centered = StabilityVerdict::check(
        "theorem_star_centered",
        q.centered_quotient,
        Relation::AtLeast,
        bound,
        q.quad_error / sharp_constants(n).s_n,
    );
    let mut v = StabilityVerdict::chain("theorem_star", vec![spec_form, centered]);
    let first = &v.parts[0];
    v.lhs = first.lhs;
    v.rhs = first.rhs;
    v.margin = first.margin;
    v.quad_error = first.quad_error;
    Ok(v.with_param("eta", eta)
        .with_param("eta_star", data.eta_star)
        .with_param("epsilon", eps)
        .with_param("kappa", bound)
        .with_param("centered_quotient", q.centered_quotient)
        .with_param("X", data.x.value / (eps * eps))
        .with_param("Y", data.y.value / (eps * eps * eps))
        .with_param("quad_error", q.quad_error))
}

/// Checks the three conclusions of the cubic-moment proposition for `h` and
/// `K > 0`; not applicable when `X - K Y < 0`.
pub fn verify_proposition(h: &RadialFn, k: f64) -> Result<StabilityVerdict> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Parameter(format!("K must be positive, got {k}")));
    }
    let grid = h.grid();
    let n = grid.n();
    let p = n.hls_exponent();
    let x = star_norm_squared(h)?;
    let y = moment_y(h)?;
    let hyp_err = x.error + k * y.error + 16.0 * f64::EPSILON * x.value;
    let hyp = x.value - k * y.value;
    if hyp < -hyp_err {
        return Ok(StabilityVerdict::not_applicable("proposition", "hypothesis X - K Y >= 0 fails")
            .with_param("X", x.value)
            .with_param("Y", y.value)
            .with_param("K", k));
    }
    let hp = lp_integral(h, p)?;
    let a = hp.powf(1.0 / (2.0 - p));
    let ak = Estimate::new(a.value / k, a.error / k).powf(2.0 - p);
    let b = lp_integral(&ustar(n, grid)?, p)?.powf(1.0 / p);
    let cap = Estimate::new(b.value / k, b.error / k).powf(p / (2.0 - p));
    let slack = 64.0 * f64::EPSILON;
    let stab2x = StabilityVerdict::check("stab2X", x.value, Relation::AtMost, ak.value, x.error + ak.error + slack * x.value);
    let stab2y = StabilityVerdict::check(
        "stab2Y",
        y.value,
        Relation::AtMost,
        ak.value / k,
        y.error + ak.error / k + slack * y.value,
    );
    let stab3 = StabilityVerdict::check("stab3", a.value, Relation::AtMost, cap.value, a.error + cap.error + slack * a.value);
    Ok(StabilityVerdict::chain("proposition", vec![stab2x, stab2y, stab3])
        .with_param("X", x.value)
        .with_param("Y", y.value)
        .with_param("K", k)
        .with_param("a", a.value)
        .with_param("hypothesis_margin", hyp))
}

/// Point `mu u_star(sigma x)` of the optimizer manifold (centred at 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldPoint {
    pub mu: f64,
    pub sigma: f64,
}

impl ManifoldPoint {
    pub fn profile(&self, grid: &GridRef) -> Result<RadialFn> {
        scaled_ustar(grid.n(), grid, self.mu, self.sigma)
    }
}

struct Projector<'a> {
    f: &'a RadialFn,
    grid: &'a GridRef,
}

impl Projector<'_> {
    /// Best amplitude at scale `sigma` and the resulting squared distance.
    fn at(&self, sigma: f64) -> Result<(f64, f64)> {
        let u = scaled_ustar(self.grid.n(), self.grid, 1.0, sigma)?;
        let num = hls_bilinear_form(self.f, &u)?.value;
        let den = hls_quadratic_form(&u)?.value;
        let mu = num / den;
        Ok((mu, self.distance_sq(mu, sigma)?))
    }

    fn distance_sq(&self, mu: f64, sigma: f64) -> Result<f64> {
        let u = scaled_ustar(self.grid.n(), self.grid, mu, sigma)?;
        Ok(hls_quadratic_form(&self.f.sub(&u)?)?.value)
    }

    /// Golden-section search for the minimum of the squared distance in
    /// `log sigma` on `[lo, hi]`.
    fn golden(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        let mut fc = self.at(c.exp())?.1;
        let mut fd = self.at(d.exp())?.1;
        for _ in 0..80 {
            if (hi - lo).abs() < 1e-10 {
                break;
            }
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - phi * (hi - lo);
                fc = self.at(c.exp())?.1;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + phi * (hi - lo);
                fd = self.at(d.exp())?.1;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Brackets a local minimum in `log sigma` moving downhill from `start`.
    fn bracket(&self, start: f64) -> Result<Option<(f64, f64)>> {
        let step = 0.25;
        let f0 = self.at(start.exp())?.1;
        let fl = self.at((start - step).exp())?.1;
        let fr = self.at((start + step).exp())?.1;
        if f0 <= fl && f0 <= fr {
            return Ok(Some((start - step, start + step)));
        }
        let dir = if fl < fr { -1.0 } else { 1.0 };
        let (mut prev, mut cur) = (start, start + dir * step);
        let mut fcur = fl.min(fr);
        let mut h = step;
        for _ in 0..40 {
            h *= 1.5;
            let next = cur + dir * h;
            if next.abs() > 20.0 {
                return Ok(None);
            }
            let fnext = self.at(next.exp())?.1;
            if fnext >= fcur {
                let (a, b) = if dir > 0.0 { (prev, next) } else { (next, prev) };
                return Ok(Some((a, b)));
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
        Ok(None)
    }

    /// Gauss-Newton refinement of `(mu, sigma)` in the `H^{-1}` inner product.
    fn polish(&self, mut mu: f64, mut sigma: f64) -> Result<(f64, f64, f64)> {
        let n = self.grid.n();
        let nf = n.as_f64();
        let mut best = self.distance_sq(mu, sigma)?;
        for _ in 0..8 {
            let u = scaled_ustar(n, self.grid, 1.0, sigma)?;
            // d/dsigma of u_star(sigma r) = r u_star'(sigma r)
            let du = RadialFn::from_fn(self.grid, nf + 2.0, |r| {
                let s = sigma * r;
                -(nf + 2.0) * r * s * (1.0 + s * s).powf(-(nf + 4.0) / 2.0)
            })?;
            let resid = self.f.axpby(1.0, &u, -mu)?;
            let ju = u.clone();
            let js = du.scale(mu);
            let a11 = hls_quadratic_form(&ju)?.value;
            let a22 = hls_quadratic_form(&js)?.value;
            let a12 = hls_bilinear_form(&ju, &js)?.value;
            let b1 = hls_bilinear_form(&ju, &resid)?.value;
            let b2 = hls_bilinear_form(&js, &resid)?.value;
            let det = a11 * a22 - a12 * a12;
            if !(det > 0.0) {
                break;
            }
            let dmu = (a22 * b1 - a12 * b2) / det;
            let dsig = (a11 * b2 - a12 * b1) / det;
            let (nmu, nsig) = (mu + dmu, sigma + dsig);
            if !(nmu > 0.0 && nsig > 0.0) {
                break;
            }
            let d = self.distance_sq(nmu, nsig)?;
            if d < best {
                best = d;
                mu = nmu;
                sigma = nsig;
            } else {
                break;
            }
        }
        Ok((mu, sigma, best))
    }
}

/// Minimises `|||f - mu u_star(sigma .)|||` over `mu, sigma > 0` and returns
/// the minimiser with the minimal distance.
pub fn project_to_manifold(f: &RadialFn) -> Result<(ManifoldPoint, f64)> {
    if f.is_zero() {
        return Err(Error::Degenerate("cannot project the zero function".into()));
    }
    let proj = Projector { f, grid: f.grid() };
    let mut best: Option<(f64, f64, f64)> = None;
    for start in [0.25f64, 1.0, 4.0] {
        if let Some((lo, hi)) = proj.bracket(start.ln())? {
            let s = proj.golden(lo, hi)?.exp();
            let (mu, d) = proj.at(s)?;
            if best.is_none_or(|b| d < b.2) {
                best = Some((mu, s, d));
            }
        }
    }
    let (mu, sigma, d) = match best {
        Some(b) => b,
        None => {
            let (mu, d) = proj.at(1.0)?;
            return Err(Error::Projection { mu, sigma: 1.0, distance: d.max(0.0).sqrt() });
        }
    };
    let (mu, sigma, d) = if mu > 0.0 { proj.polish(mu, sigma)? } else { (mu, sigma, d) };
    if !(mu > 0.0 && sigma > 0.0 && mu.is_finite() && sigma.is_finite()) {
        return Err(Error::Projection { mu, sigma, distance: d.max(0.0).sqrt() });
    }
    Ok((ManifoldPoint { mu, sigma }, d.max(0.0).sqrt()))
}

/// `|||f - mu u_star(sigma .)|||`.
pub fn manifold_distance(f: &RadialFn, point: ManifoldPoint) -> Result<f64> {
    let u = point.profile(f.grid())?;
    Ok(hls_quadratic_form(&f.sub(&u)?)?.value.sqrt())
}
