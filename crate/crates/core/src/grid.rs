//! Radial quadrature on `R^n`.
//!
//! Nodes sit at `r_i = c sinh(i h)`, `i = 1..=N`, with `c = 1` and
//! `h = asinh(r_max / c) / N`. Near the origin the spacing is uniform in `r`;
//! beyond `r ~ 1` it is uniform in `log r`. A radial integrand
//! `phi(|x|) dx = |S^{n-1}| phi(r) r^{n-1} dr` becomes, in the stretched
//! coordinate `x`, an analytic function that is even or odd about `x = 0`
//! and decays geometrically as `x -> inf` for power-law tails. The
//! trapezoid rule on such integrands converges spectrally once the tail past
//! `r_max` is continued as a geometric series fitted to the last two nodes.

use std::sync::Arc;

use crate::constants::{beta_integral, surface_area};
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::stencil;

/// Value with an attached absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error: error.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    /// `self^e` with first-order error propagation.
    pub fn powf(self, e: f64) -> Self {
        let value = self.value.powf(e);
        let error = if self.value == 0.0 {
            if e >= 1.0 { 0.0 } else { self.error.powf(e) }
        } else {
            (e * value / self.value).abs() * self.error
        };
        Estimate { value, error }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate { value: c * self.value, error: c.abs() * self.error }
    }
}

pub type GridRef = Arc<RadialGrid>;

/// Half-width of the centred finite-difference stencils (8th order).
pub(crate) const FD_HALF_WIDTH: usize = 4;
const GHOSTS: usize = 5;
/// Offsets used to integrate over `[x_i, x_{i+1}]` (8-point rule).
const INTERVAL_OFFSETS: [i64; 8] = [-3, -2, -1, 0, 1, 2, 3, 4];

#[derive(Debug, Clone)]
pub struct RadialGrid {
    n: Dim,
    scale: f64,
    step: f64,
    r_max: f64,
    radii: Vec<f64>,
    /// `dr/dx` at every node.
    jacobian: Vec<f64>,
    /// `h |S^{n-1}| r^{n-1} dr/dx`; sum against samples to integrate over `R^n`.
    weights: Vec<f64>,
    surface: f64,
    calibration_residual: f64,
    interval: Vec<f64>,
    origin_even: Vec<f64>,
}

pub fn make_grid(n: Dim, node_count: usize, r_max: f64) -> Result<GridRef> {
    if node_count < 16 {
        return Err(Error::TooFewNodes(node_count));
    }
    if !(r_max > 1.0) || !r_max.is_finite() {
        return Err(Error::RadiusTooSmall(r_max));
    }
    let scale = 1.0;
    let step = (r_max / scale).asinh() / node_count as f64;
    let surface = surface_area(n);
    let nf = n.as_f64();
    let mut radii = Vec::with_capacity(node_count);
    let mut jacobian = Vec::with_capacity(node_count);
    let mut weights = Vec::with_capacity(node_count);
    for i in 1..=node_count {
        let x = i as f64 * step;
        let r = if i == node_count { r_max } else { scale * x.sinh() };
        let j = scale * x.cosh();
        radii.push(r);
        jacobian.push(j);
        weights.push(step * surface * r.powf(nf - 1.0) * j);
    }
    let mut grid = RadialGrid {
        n,
        scale,
        step,
        r_max,
        radii,
        jacobian,
        weights,
        surface,
        calibration_residual: f64::NAN,
        interval: stencil::interval_weights(&INTERVAL_OFFSETS),
        origin_even: stencil::even_origin_weights(4),
    };
    let samples: Vec<f64> = grid.radii.iter().map(|r| (1.0 + r * r).powf(-nf)).collect();
    let exact = beta_integral(n);
    let approx = grid.integrate(&samples)?;
    grid.calibration_residual = (approx.value - exact).abs() / exact;
    Ok(Arc::new(grid))
}

impl RadialGrid {
    pub fn n(&self) -> Dim {
        self.n
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Spacing in the stretched coordinate.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn surface_area(&self) -> f64 {
        self.surface
    }

    /// Relative error of the grid on `int (1+|x|^2)^{-n} dx`.
    pub fn calibration_residual(&self) -> f64 {
        self.calibration_residual
    }

    /// Radius at stretched coordinate `x` (valid past `r_max` for ghost nodes).
    pub(crate) fn radius_at(&self, x: f64) -> f64 {
        self.scale * x.sinh()
    }

    /// Integrates a radial function given by its samples over `R^n`.
    pub fn integrate(&self, samples: &[f64]) -> Result<Estimate> {
        debug_assert_eq!(samples.len(), self.len());
        self.integrate_with(samples, None)
    }

    /// Integrates samples that decay like `r^-decay`. The fitted geometric
    /// continuation past `r_max` is compared with the closed-form power-law
    /// tail and the difference is added to the error; if no geometric fit
    /// exists the closed form is used instead.
    pub fn integrate_decaying(&self, samples: &[f64], decay: f64) -> Result<Estimate> {
        if samples.iter().all(|&s| s == 0.0) {
            return Ok(Estimate::exact(0.0));
        }
        let nf = self.n.as_f64();
        if !(decay > nf) {
            return Err(Error::NonIntegrable(format!(
                "decay exponent {decay} does not exceed the dimension {nf}"
            )));
        }
        let last = samples.len() - 1;
        let analytic = if decay.is_finite() {
            self.surface * samples[last] * self.r_max.powf(nf) / (decay - nf)
        } else {
            0.0
        };
        self.integrate_with(samples, Some(analytic))
    }

    fn integrate_with(&self, samples: &[f64], analytic: Option<f64>) -> Result<Estimate> {
        let unit: Vec<f64> = samples.iter().zip(&self.weights).map(|(s, w)| s * w / self.step).collect();
        let parity = self.ball_parity();
        let (fine, extra) = self.rule_total(&unit, self.step, parity, analytic)?;
        let coarse_nodes: Vec<f64> = unit.iter().skip(1).step_by(2).copied().collect();
        let coarse = self
            .rule_total(&coarse_nodes, 2.0 * self.step, parity, analytic)
            .map(|c| c.0)
            .unwrap_or(fine);
        let abs_sum: f64 = unit.iter().map(|d| d.abs()).sum::<f64>() * self.step;
        Ok(Estimate::new(fine, (fine - coarse).abs() + extra + 16.0 * f64::EPSILON * abs_sum))
    }

    /// Parity of `r^{n-1} dr/dx` under `x -> -x`.
    fn ball_parity(&self) -> f64 {
        if self.n.get() % 2 == 0 { -1.0 } else { 1.0 }
    }

    /// Integral over `x > 0` of a density `F` sampled with spacing `step`.
    /// Even densities use the trapezoid sum, odd ones the end-corrected
    /// interval rule. Returns the value and an additional error term from the
    /// tail treatment.
    fn rule_total(&self, unit: &[f64], step: f64, parity: f64, analytic: Option<f64>) -> Result<(f64, f64)> {
        let trapezoid = parity > 0.0;
        let body = if trapezoid {
            unit.iter().sum::<f64>() * step
        } else {
            interval_pieces(unit, -1.0, step, &self.interval).iter().sum()
        };
        let last = unit[unit.len() - 1];
        // closed-form tail expressed in the convention of the rule
        let closed = analytic.map(|a| if trapezoid { a - 0.5 * step * last } else { a });
        let fit = TailFit::of(unit);
        let (tail, extra) = match fit {
            TailFit::Zero => (0.0, closed.map_or(0.0, f64::abs)),
            TailFit::Geometric(_) => {
                let t = step * if trapezoid { fit.discrete(last) } else { fit.continuous(last) };
                (t, closed.map_or(0.0, |c| (t - c).abs()))
            }
            TailFit::Irregular => match closed {
                Some(c) => (c, c.abs() + step * last.abs()),
                None => {
                    let prev = unit[unit.len() - 2];
                    if prev != 0.0 && last / prev >= 1.0 {
                        return Err(Error::NonIntegrable(format!(
                            "integrand does not decay at r_max (ratio {:.3})",
                            last / prev
                        )));
                    }
                    (0.0, step * last.abs())
                }
            },
        };
        Ok((body + tail, extra))
    }

    /// Prefix integrals `int_{|x| < r_i} phi dx` at every node.
    pub(crate) fn cumulative_ball(&self, samples: &[f64]) -> Vec<f64> {
        let nf = self.n.as_f64();
        let dens: Vec<f64> = samples
            .iter()
            .zip(&self.radii)
            .zip(&self.jacobian)
            .map(|((s, r), j)| self.surface * s * r.powf(nf - 1.0) * j)
            .collect();
        let pieces = interval_pieces(&dens, self.ball_parity(), self.step, &self.interval);
        pieces
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// Suffix integrals `int_{r_i}^inf phi(s) s ds` at every node, and the
    /// full integral from the origin with its error estimate. `decay` is the
    /// declared decay exponent of `phi`.
    pub(crate) fn cumulative_shell_tail(&self, samples: &[f64], decay: f64) -> Result<(Vec<f64>, Estimate)> {
        let dens: Vec<f64> = samples
            .iter()
            .zip(&self.radii)
            .zip(&self.jacobian)
            .map(|((s, r), j)| s * r * j)
            .collect();
        let last = samples[samples.len() - 1];
        let analytic = if decay.is_finite() { last * self.r_max * self.r_max / (decay - 2.0) } else { 0.0 };
        let (fine, extra) = self.rule_total(&dens, self.step, -1.0, Some(analytic))?;
        let coarse_nodes: Vec<f64> = dens.iter().skip(1).step_by(2).copied().collect();
        let coarse = self
            .rule_total(&coarse_nodes, 2.0 * self.step, -1.0, Some(analytic))
            .map(|c| c.0)
            .unwrap_or(fine);
        let pieces = interval_pieces(&dens, -1.0, self.step, &self.interval);
        let len = dens.len();
        let mut suffix = vec![0.0; len];
        let mut acc = fine - pieces.iter().sum::<f64>();
        for i in (0..len).rev() {
            suffix[i] = acc;
            acc += pieces[i];
        }
        let abs_sum: f64 = dens.iter().map(|d| d.abs()).sum::<f64>() * self.step;
        let total = Estimate::new(acc, (fine - coarse).abs() + extra + 16.0 * f64::EPSILON * abs_sum);
        Ok((suffix, total))
    }

    /// Linear finite-difference operator `d/dr` (`order = 1`) or the radial
    /// Laplacian (`order = 2`) with an even closure at the origin and ghost
    /// values `v_{N+j} = rho_j v_N` past `r_max`.
    pub(crate) fn operator_rows(
        &self,
        order: usize,
        half_width: usize,
        rho: &[f64],
    ) -> Vec<Vec<(usize, f64)>> {
        assert!(rho.len() >= half_width);
        let (d1, d2) = stencil::centered(half_width);
        let h = self.step;
        let nf = self.n.as_f64();
        let len = self.len() as i64;
        let s = half_width as i64;
        let mut rows = Vec::with_capacity(self.len());
        for i in 1..=len {
            let x = i as f64 * h;
            let jac = self.jacobian[i as usize - 1];
            let (a1, a2) = if order == 1 {
                (1.0 / (h * jac), 0.0)
            } else {
                let c2 = self.scale * self.scale * x.cosh() * x.cosh();
                let b = (nf - 1.0) / x.tanh() - x.tanh();
                (b / (h * c2), 1.0 / (h * h * c2))
            };
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * half_width + 5);
            let mut push = |col: usize, c: f64| {
                if let Some(e) = row.iter_mut().find(|e| e.0 == col) {
                    e.1 += c;
                } else {
                    row.push((col, c));
                }
            };
            for k in -s..=s {
                let w = a1 * d1[(k + s) as usize] + a2 * d2[(k + s) as usize];
                if w == 0.0 {
                    continue;
                }
                let j = i + k;
                if j >= 1 && j <= len {
                    push(j as usize - 1, w);
                } else if j < 0 {
                    push((-j) as usize - 1, w);
                } else if j == 0 {
                    for (m, e) in self.origin_even.iter().enumerate() {
                        push(m, w * e);
                    }
                } else {
                    push(len as usize - 1, w * rho[(j - len - 1) as usize]);
                }
            }
            rows.push(row);
        }
        rows
    }

    /// Ghost ratios `v_{N+j}/v_N` for a tail behaving like `r^{-beta}`.
    pub(crate) fn power_tail_ratios(&self, beta: f64, count: usize) -> Vec<f64> {
        let xn = self.len() as f64 * self.step;
        let rn = self.radius_at(xn);
        (1..=count)
            .map(|j| {
                if beta.is_infinite() {
                    0.0
                } else {
                    (self.radius_at(xn + j as f64 * self.step) / rn).powf(-beta)
                }
            })
            .collect()
    }

    /// Ghost ratios fitted to the last two samples, falling back to the
    /// declared power law.
    pub(crate) fn fitted_tail_ratios(&self, values: &[f64], beta: f64, count: usize) -> Vec<f64> {
        let len = values.len();
        let (a, b) = (values[len - 2], values[len - 1]);
        if b == 0.0 {
            return vec![0.0; count];
        }
        if a != 0.0 && (b / a) > 0.0 && (b / a) < 1.0 {
            let q = b / a;
            return (1..=count).map(|j| q.powi(j as i32)).collect();
        }
        self.power_tail_ratios(beta, count)
    }

    pub(crate) fn apply(rows: &[Vec<(usize, f64)>], v: &[f64]) -> Vec<f64> {
        rows.iter().map(|row| row.iter().map(|&(j, c)| c * v[j]).sum()).collect()
    }

    /// `df/dr` at the nodes.
    pub fn d_dr(&self, values: &[f64], tail_exponent: f64) -> Vec<f64> {
        self.d_dr_stencil(values, tail_exponent, FD_HALF_WIDTH)
    }

    /// `df/dr` with a centred stencil of the given half-width.
    pub fn d_dr_stencil(&self, values: &[f64], tail_exponent: f64, half_width: usize) -> Vec<f64> {
        let rho = self.fitted_tail_ratios(values, tail_exponent, half_width);
        let rows = self.operator_rows(1, half_width, &rho);
        Self::apply(&rows, values)
    }

    /// Radial Laplacian `f'' + (n-1) f'/r` at the nodes.
    pub fn laplacian(&self, values: &[f64], tail_exponent: f64) -> Vec<f64> {
        let rho = self.fitted_tail_ratios(values, tail_exponent, FD_HALF_WIDTH);
        let rows = self.operator_rows(2, FD_HALF_WIDTH, &rho);
        Self::apply(&rows, values)
    }
}

/// Density samples padded with ghost values on both sides.
struct Extended {
    data: Vec<f64>,
}

impl Extended {
    fn density(dens: &[f64], sign: f64) -> Self {
        let n = dens.len();
        let mut data = vec![0.0; n + 2 * GHOSTS + 1];
        // index GHOSTS corresponds to x_0 = 0, where the density vanishes
        for j in 1..=GHOSTS {
            data[GHOSTS - j] = sign * dens[j - 1];
        }
        data[GHOSTS + 1..GHOSTS + 1 + n].copy_from_slice(dens);
        let q = TailFit::of(dens).ratio();
        let mut g = dens[n - 1];
        for j in 1..=GHOSTS {
            g *= q;
            data[GHOSTS + n + j] = g;
        }
        Extended { data }
    }

    #[inline]
    fn at(&self, i: i64) -> f64 {
        self.data[(i + GHOSTS as i64) as usize]
    }
}

/// `int_{x_i}^{x_{i+1}} F dx` for `i = 0..N-1` (with `x_0 = 0`), where the
/// density vanishes at the origin and satisfies `F(-x) = sign F(x)`.
fn interval_pieces(dens: &[f64], sign: f64, step: f64, weights: &[f64]) -> Vec<f64> {
    let ext = Extended::density(dens, sign);
    (0..dens.len() as i64)
        .map(|i| {
            let piece: f64 = INTERVAL_OFFSETS.iter().zip(weights).map(|(&o, w)| w * ext.at(i + o)).sum();
            piece * step
        })
        .collect()
}

/// Continuation of a density past the last node, fitted to the last two
/// samples.
#[derive(Debug, Clone, Copy)]
enum TailFit {
    Zero,
    Geometric(f64),
    Irregular,
}

impl TailFit {
    fn of(dens: &[f64]) -> Self {
        let n = dens.len();
        let (a, b) = (dens[n - 2], dens[n - 1]);
        if b == 0.0 {
            return TailFit::Zero;
        }
        let q = b / a;
        if a != 0.0 && q > 0.0 && q < 1.0 {
            TailFit::Geometric(q)
        } else {
            TailFit::Irregular
        }
    }

    fn ratio(self) -> f64 {
        match self {
            TailFit::Geometric(q) => q,
            _ => 0.0,
        }
    }

    /// `F_{N+1} + F_{N+2} + ...` in units of `F_N = last`.
    fn discrete(self, last: f64) -> f64 {
        let q = self.ratio();
        last * q / (1.0 - q)
    }

    /// `int_{x_N}^inf F dx / h`.
    fn continuous(self, last: f64) -> f64 {
        let q = self.ratio();
        if q == 0.0 { 0.0 } else { last / -q.ln() }
    }
}
