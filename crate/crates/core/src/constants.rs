//! Closed-form sharp constants for the HLS / Sobolev pair at `alpha = 1`.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::dim::Dim;

/// Sharp constants attached to a dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpConstants {
    pub n: Dim,
    /// Sharp Sobolev constant `S_n = pi n (n-2) (Gamma(n/2)/Gamma(n))^(2/n)`.
    pub s_n: f64,
    /// Sharp HLS constant, evaluated from its own closed form
    /// `(1/(pi n (n-2))) (Gamma(n)/Gamma(n/2))^(2/n)`.
    pub c_n: f64,
    /// Local stability constant `8(n+1) / (3 n (n+2)^2 (n+4))`.
    pub kappa_n: f64,
    /// `||u_star||_p^p = 2^(1-n) pi^((n+1)/2) / Gamma((n+1)/2)`, `p = 2n/(n+2)`.
    pub ustar_p_norm_p: f64,
    /// `|S^(n-1)| = 2 pi^(n/2) / Gamma(n/2)`.
    pub surface_area: f64,
}

pub fn sharp_constants(n: Dim) -> SharpConstants {
    let nf = n.as_f64();
    // Gamma ratios through ln_gamma so that n up to a few hundred stays finite.
    let ln_ratio = ln_gamma(nf / 2.0) - ln_gamma(nf);
    let s_n = PI * nf * (nf - 2.0) * (2.0 / nf * ln_ratio).exp();
    let c_n = (-2.0 / nf * ln_ratio).exp() / (PI * nf * (nf - 2.0));
    let ustar_p_norm_p = ((1.0 - nf) * 2f64.ln() + (nf + 1.0) / 2.0 * PI.ln()
        - ln_gamma((nf + 1.0) / 2.0))
        .exp();
    SharpConstants {
        n,
        s_n,
        c_n,
        kappa_n: kappa(n),
        ustar_p_norm_p,
        surface_area: surface_area(n),
    }
}

pub fn kappa(n: Dim) -> f64 {
    let (num, den) = kappa_rational(n);
    num as f64 / den as f64
}

/// `kappa_n` as a reduced fraction `(numerator, denominator)`.
pub fn kappa_rational(n: Dim) -> (u64, u64) {
    let n = n.get() as u64;
    let num = 8 * (n + 1);
    let den = 3 * n * (n + 2) * (n + 2) * (n + 4);
    let g = gcd(num, den);
    (num / g, den / g)
}

/// Constant obtained from `kappa_n` through the spectral gap:
/// `(n+2)(n+4) kappa_n`.
pub fn kappa_local(n: Dim) -> f64 {
    let nf = n.as_f64();
    (nf + 2.0) * (nf + 4.0) * kappa(n)
}

pub fn surface_area(n: Dim) -> f64 {
    let nf = n.as_f64();
    2.0 * PI.powf(nf / 2.0) / gamma(nf / 2.0)
}

/// Normalisation of the Newton kernel: `(-Delta)^{-1} f = G * f` with
/// `G(x) = c |x|^{2-n}` and `c = Gamma(n/2 - 1) / (4 pi^(n/2))`.
pub fn newton_kernel_constant(n: Dim) -> f64 {
    let nf = n.as_f64();
    gamma(nf / 2.0 - 1.0) / (4.0 * PI.powf(nf / 2.0))
}

/// `int_{R^n} (1+|x|^2)^{-n} dx = pi^(n/2) Gamma(n/2) / Gamma(n)`.
pub fn beta_integral(n: Dim) -> f64 {
    let nf = n.as_f64();
    (nf / 2.0 * PI.ln() + ln_gamma(nf / 2.0) - ln_gamma(nf)).exp()
}

/// Eigenvalue `mu_k = 4k(k+n-1) + n(n-2)` of the conformal zonal mode `g_k`.
pub fn conformal_eigenvalue(n: Dim, k: usize) -> u64 {
    let n = n.get() as u64;
    let k = k as u64;
    4 * k * (k + n - 1) + n * (n - 2)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
