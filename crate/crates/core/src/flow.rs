//! Radial fast-diffusion flow `u_t = Delta u^m` and the deficit identities
//! it carries.
//!
//! Time stepping is backward Euler in the variable `v = u^m`: each step solves
//! `v^{1/m} - dt Delta v = u_old` by damped Newton. Past `r_max` the iterate
//! is continued by its power-law tail `v ~ r^{-m beta}`, `beta` being the tail
//! exponent of `u`.

use std::sync::Arc;

use crate::band::BandMatrix;
use crate::constants::sharp_constants;
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::functionals::{ccl_gns_deficit, hls_deficit, sobolev_deficit};
use crate::grid::Estimate;
use crate::norms::lp_integral;
use crate::radial::RadialFn;
use crate::verdict::{Outcome, Relation, StabilityVerdict};

const LAPLACIAN_HALF_WIDTH: usize = 2;
const MAX_HALVINGS: u32 = 8;
const MAX_NEWTON: usize = 60;

/// `m = (n-2)/(n+2)`, the exponent of the Sobolev flow.
pub fn critical_exponent(n: Dim) -> f64 {
    let nf = n.as_f64();
    (nf - 2.0) / (nf + 2.0)
}

/// `m = n/(n+2)`, the exponent of the GNS flow.
pub fn ccl_exponent(n: Dim) -> f64 {
    let nf = n.as_f64();
    nf / (nf + 2.0)
}

/// Extinction time of the separable solution `a(t) u_star` for the critical
/// exponent.
pub fn separable_extinction_time(n: Dim) -> f64 {
    let nf = n.as_f64();
    1.0 / ((1.0 - critical_exponent(n)) * nf * (nf - 2.0))
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub u: RadialFn,
    pub m: f64,
    pub dt: f64,
}

impl FlowState {
    pub fn new(u: RadialFn, m: f64, dt: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::Parameter(format!("fast diffusion needs m in (0, 1), got {m}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        if let Some(i) = u.values().iter().position(|&x| x < 0.0) {
            return Err(Error::Inadmissible(format!("negative initial value at node {i}")));
        }
        let n = u.grid().n().as_f64();
        let beta = u.tail_exponent().min(n + 2.0);
        Ok(FlowState { t: 0.0, u: u.with_tail_exponent(beta), m, dt })
    }

    /// Whether `m` is one of the two exponents with a known deficit identity.
    pub fn is_standard_exponent(&self) -> bool {
        let n = self.u.grid().n();
        (self.m - critical_exponent(n)).abs() < 1e-14 || (self.m - ccl_exponent(n)).abs() < 1e-14
    }

    pub fn pressure(&self) -> RadialFn {
        let m = self.m;
        self.u.map(|x| x.powf(m), m * self.u.tail_exponent())
    }

    pub fn mass(&self) -> Result<Estimate> {
        self.u.integral()
    }
}

/// Backward-Euler solve `v^{1/m} - dt Delta v = u`, or `None` if Newton stalls.
fn implicit_solve(u: &RadialFn, m: f64, dt: f64) -> Option<RadialFn> {
    let grid = u.grid();
    let beta_v = m * u.tail_exponent();
    let rho = grid.power_tail_ratios(beta_v, LAPLACIAN_HALF_WIDTH);
    let lap = grid.operator_rows(2, LAPLACIAN_HALF_WIDTH, &rho);
    let inv_m = 1.0 / m;
    let floor = f64::MIN_POSITIVE * 1e10;
    let mut v: Vec<f64> = u.values().iter().map(|&x| x.max(floor).powf(m)).collect();
    let residual = |v: &[f64]| -> (Vec<f64>, f64) {
        let mut worst: f64 = 0.0;
        let f: Vec<f64> = lap
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let (lv, mag) = row.iter().fold((0.0, 0.0), |(s, a), &(j, c)| (s + c * v[j], a + (c * v[j]).abs()));
                let p = v[i].powf(inv_m);
                let r = p - dt * lv - u.values()[i];
                worst = worst.max(r.abs() / (p + u.values()[i] + dt * mag + floor));
                r
            })
            .collect();
        (f, worst)
    };
    let (mut f, mut norm) = residual(&v);
    for _ in 0..MAX_NEWTON {
        if norm < 1e-13 {
            break;
        }
        let diag: Vec<f64> = v.iter().map(|&x| inv_m * x.powf(inv_m - 1.0)).collect();
        let mut delta: Vec<f64> = f.iter().map(|x| -x).collect();
        BandMatrix::from_rows(&lap, -dt, &diag).solve(&mut delta)?;
        // fraction to the boundary keeps v positive
        let mut alpha: f64 = 1.0;
        for (x, d) in v.iter().zip(&delta) {
            if *d < 0.0 {
                alpha = alpha.min(0.9 * x / -d);
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = v.iter().zip(&delta).map(|(x, d)| x + alpha * d).collect();
            let (tf, tn) = residual(&trial);
            if tn.is_finite() && (tn < norm || tn < 1e-13) {
                let step: f64 = delta.iter().zip(&v).fold(0.0, |a, (d, x)| a.max((alpha * d / x).abs()));
                v = trial;
                f = tf;
                norm = tn;
                accepted = true;
                if step < 1e-14 {
                    norm = 0.0;
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm >= 1e-11 {
        return None;
    }
    let values: Vec<f64> = v.iter().map(|x| x.powf(inv_m)).collect();
    RadialFn::new(Arc::clone(grid), values, u.tail_exponent()).ok()
}

/// One backward-Euler step of length `dt`, halving the substep on Newton
/// failure.
pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if state.u.is_zero() {
        return Ok(FlowState { t: state.t + dt, ..state.clone() });
    }
    for halvings in 0..=MAX_HALVINGS {
        let pieces = 1u32 << halvings;
        let sub = dt / pieces as f64;
        let mut u = state.u.clone();
        let mut ok = true;
        for _ in 0..pieces {
            match implicit_solve(&u, state.m, sub) {
                Some(next) => u = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(FlowState { t: state.t + dt, u, m: state.m, dt: state.dt });
        }
    }
    Err(Error::Newton { t: state.t, dt: dt / (1u32 << MAX_HALVINGS) as f64 })
}

/// Advances to `t_end` with steps `state.dt`, shortening the last one.
pub fn advance(state: &FlowState, t_end: f64) -> Result<FlowState> {
    let mut s = state.clone();
    while s.t < t_end - 1e-12 * t_end.abs().max(1.0) {
        let dt = s.dt.min(t_end - s.t);
        s = step(&s, dt)?;
    }
    Ok(s)
}

/// Runs `count` steps of `dt` and calls `visit` on every state, including
/// the initial one.
fn trajectory(u0: &RadialFn, m: f64, dt: f64, count: usize, mut visit: impl FnMut(&FlowState) -> Result<()>) -> Result<FlowState> {
    let mut s = FlowState::new(u0.clone(), m, dt)?;
    visit(&s)?;
    for _ in 0..count {
        s = step(&s, dt)?;
        visit(&s)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub dt: f64,
    pub samples: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { dt: 2e-3, samples: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionEstimate {
    pub t_estimate: f64,
    pub dt: f64,
}

/// Extinction time for the critical flow, extrapolating `(max u)^{1-m}`
/// linearly once it has dropped below `0.3` of its initial value.
pub fn estimate_extinction(u0: &RadialFn, dt: f64) -> Result<ExtinctionEstimate> {
    if u0.is_zero() {
        return Ok(ExtinctionEstimate { t_estimate: 0.0, dt });
    }
    let m = critical_exponent(u0.grid().n());
    let mut s = FlowState::new(u0.clone(), m, dt)?;
    let y = |s: &FlowState| s.u.max_abs().powf(1.0 - m);
    let y0 = y(&s);
    let (mut t_prev, mut y_prev) = (0.0, y0);
    for _ in 0..1_000_000 {
        s = step(&s, dt)?;
        let yc = y(&s);
        if yc < 0.3 * y0 {
            let slope = (y_prev - yc) / (s.t - t_prev);
            return Ok(ExtinctionEstimate { t_estimate: s.t + yc / slope, dt });
        }
        t_prev = s.t;
        y_prev = yc;
    }
    Err(Error::Newton { t: s.t, dt })
}

/// `J[u] = C_n ||u||_p^2 - int u (-Delta)^{-1} u` with its error.
fn hls_functional(u: &RadialFn) -> Result<Estimate> {
    if u.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let d = hls_deficit(u)?;
    Ok(Estimate::new(d.value, d.quad_error))
}

/// `-2 C_n ||u||_p^{4/(n+2)} D[u^m]`, the time derivative of `J` along the
/// critical flow.
fn critical_rate(s: &FlowState) -> Result<Estimate> {
    if s.u.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let n = s.u.grid().n();
    let nf = n.as_f64();
    let c = sharp_constants(n).c_n;
    let p = n.hls_exponent();
    let w = lp_integral(&s.u, p)?.powf(4.0 / ((nf + 2.0) * p));
    let d = sobolev_deficit(&s.pressure())?;
    let value = -2.0 * c * w.value * d.value;
    Ok(Estimate::new(value, 2.0 * c * (w.value * d.quad_error + w.error * d.value.abs())))
}

struct IdentityRun {
    fd: f64,
    rate: f64,
    err: f64,
    drop: f64,
    integral: f64,
    integral_err: f64,
}

fn identity_run(u0: &RadialFn, horizon: f64, dt: f64, t_mid: f64) -> Result<IdentityRun> {
    let m = critical_exponent(u0.grid().n());
    let count = (horizon / dt).round() as usize;
    let k_mid = (t_mid / dt).round() as usize;
    let mut j = Vec::with_capacity(count + 1);
    let mut rates = Vec::with_capacity(count + 1);
    trajectory(u0, m, dt, count, |s| {
        j.push(hls_functional(&s.u)?);
        rates.push(critical_rate(s)?);
        Ok(())
    })?;
    let fd = (j[k_mid + 1].value - j[k_mid - 1].value) / (2.0 * dt);
    let err = (j[k_mid + 1].error + j[k_mid - 1].error) / (2.0 * dt) + rates[k_mid].error;
    let drop = j[0].value - j[count].value;
    let integral = -dt * (0.5 * (rates[0].value + rates[count].value) + rates[1..count].iter().map(|r| r.value).sum::<f64>());
    let integral_err =
        j[0].error + j[count].error + dt * rates.iter().map(|r| r.error).sum::<f64>();
    Ok(IdentityRun { fd, rate: rates[k_mid].value, err, drop, integral, integral_err })
}

fn check_horizon(u0: &RadialFn, horizon: f64, dt: f64) -> Result<(f64, Option<f64>)> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("horizon must be nonnegative, got {horizon}")));
    }
    if u0.is_zero() || horizon == 0.0 {
        return Ok((horizon, None));
    }
    let t = estimate_extinction(u0, dt)?.t_estimate;
    if horizon > 0.9 * t {
        Ok((0.9 * t, Some(t)))
    } else {
        Ok((horizon, None))
    }
}

/// Checks along the critical flow (a) `dJ/dt = -2 C_n ||u||_p^{4/(n+2)} D[u^m]`
/// at the mid-horizon time, within 1% after Richardson extrapolation in `dt`,
/// and (b) `J(0) - J(horizon) = int_0^horizon 2 C_n ||u||_p^{4/(n+2)} D[u^m] dt`
/// within 2%.
pub fn deficit_identity_check_critical(u0: &RadialFn, horizon: f64) -> Result<StabilityVerdict> {
    deficit_identity_check_critical_with(u0, horizon, FlowOptions::default())
}

pub fn deficit_identity_check_critical_with(u0: &RadialFn, horizon: f64, opts: FlowOptions) -> Result<StabilityVerdict> {
    let (horizon, extinct) = check_horizon(u0, horizon, opts.dt)?;
    if u0.is_zero() {
        let a = StabilityVerdict::check("derivative_identity", 0.0, Relation::AtMost, 0.0, 0.0);
        let b = StabilityVerdict::check("integral_identity", 0.0, Relation::AtMost, 0.0, 0.0);
        return Ok(StabilityVerdict::chain("flow_identity", vec![a, b]).with_note("zero datum"));
    }
    // the coarsest step must resolve the mid point and the horizon
    let dt = (horizon / 8.0).min(opts.dt);
    let steps = (horizon / dt).floor().max(4.0);
    let dt = horizon / steps;
    let k_mid = (steps / 2.0).floor();
    let t_mid = k_mid * dt;
    let runs = [identity_run(u0, horizon, dt, t_mid)?, identity_run(u0, horizon, dt / 2.0, t_mid)?, identity_run(u0, horizon, dt / 4.0, t_mid)?];
    let rich = |a: f64, b: f64| 2.0 * b - a;
    let gap = |r: &IdentityRun| r.fd - r.rate;
    let gap_coarse = rich(gap(&runs[0]), gap(&runs[1]));
    let gap_fine = rich(gap(&runs[1]), gap(&runs[2]));
    let rate = rich(runs[1].rate, runs[2].rate);
    let fd = rich(runs[1].fd, runs[2].fd);
    let err_a = 3.0 * runs[2].err + 1.5 * runs[1].err;
    let a = StabilityVerdict::check("derivative_identity", gap_fine.abs(), Relation::AtMost, 0.01 * rate.abs(), err_a)
        .with_param("fd_derivative", fd)
        .with_param("rate", rate)
        .with_param("t", t_mid);
    let drop = rich(runs[1].drop, runs[2].drop);
    let integral = rich(runs[1].integral, runs[2].integral);
    let err_b = 3.0 * runs[2].integral_err + 1.5 * runs[1].integral_err;
    let b = StabilityVerdict::check("integral_identity", (drop - integral).abs(), Relation::AtMost, 0.02 * integral.abs(), err_b)
        .with_param("deficit_drop", drop)
        .with_param("rate_integral", integral);
    let mut v = StabilityVerdict::chain("flow_identity", vec![a, b])
        .with_param("horizon", horizon)
        .with_param("dt", dt)
        .with_param("richardson_order_ratio", gap_coarse.abs() / gap_fine.abs())
        .with_param("quad_error", err_a);
    if let Some(t) = extinct {
        v = v.with_param("t_estimate", t).with_note("horizon reduced to 0.9 of the estimated extinction time");
    }
    Ok(v)
}

/// Sobolev deficit of `u^m` sampled along the critical flow at times
/// `t_j = j horizon/(samples-1)`, with errors.
pub fn sobolev_deficit_trajectory(u0: &RadialFn, horizon: f64, opts: FlowOptions) -> Result<Vec<(f64, Estimate)>> {
    let m = critical_exponent(u0.grid().n());
    let mut out = Vec::with_capacity(opts.samples);
    let sample = |s: &FlowState| -> Result<(f64, Estimate)> {
        let d = sobolev_deficit(&s.pressure())?;
        Ok((s.t, Estimate::new(d.value, d.quad_error)))
    };
    let mut s = FlowState::new(u0.clone(), m, opts.dt)?;
    out.push(sample(&s)?);
    if horizon == 0.0 || opts.samples < 2 {
        return Ok(out);
    }
    for j in 1..opts.samples {
        let t = horizon * j as f64 / (opts.samples - 1) as f64;
        s = advance(&s, t)?;
        out.push(sample(&s)?);
    }
    Ok(out)
}

/// Checks that `D[u^m(t_j)]` is non-increasing along the critical flow.
pub fn deficit_monotonicity_check(u0: &RadialFn, horizon: f64) -> Result<StabilityVerdict> {
    deficit_monotonicity_check_with(u0, horizon, FlowOptions::default())
}

pub fn deficit_monotonicity_check_with(u0: &RadialFn, horizon: f64, opts: FlowOptions) -> Result<StabilityVerdict> {
    let (horizon, extinct) = check_horizon(u0, horizon, opts.dt)?;
    let traj = sobolev_deficit_trajectory(u0, horizon, opts)?;
    let parts: Vec<StabilityVerdict> = traj
        .windows(2)
        .enumerate()
        .map(|(j, w)| {
            StabilityVerdict::check(format!("step_{j}"), w[1].1.value, Relation::AtMost, w[0].1.value, w[0].1.error + w[1].1.error)
        })
        .collect();
    let first = traj[0].1.value;
    let last = traj[traj.len() - 1].1.value;
    let mut v = if parts.is_empty() {
        StabilityVerdict::check("monotonicity", first, Relation::AtMost, first, traj[0].1.error)
    } else {
        StabilityVerdict::chain("monotonicity", parts)
    };
    v.name = "monotonicity".into();
    v = v
        .with_param("first", first)
        .with_param("last", last)
        .with_param("samples", traj.len() as f64)
        .with_param("horizon", horizon);
    if let Some(t) = extinct {
        v = v.with_param("t_estimate", t).with_note("horizon reduced to 0.9 of the estimated extinction time");
    }
    Ok(v)
}

/// Exploratory probe of the exponential-time representation of the HLS
/// deficit along the GNS flow (`m = n/(n+2)`):
/// `(8/(n+2)) int_0^horizon e^{beta t} D[u^{(n-1)/(n+2)}(e^{beta t})] dt`,
/// evaluated in flow time `s = e^{beta t}` as
/// `(8/((n+2) beta)) int_1^{e^{beta horizon}} D[u^{(n-1)/(n+2)}(s)] ds`.
/// The gradient-flow balance `J(0) - J(s) = 2 int_0^s D ds` on the same run
/// is reported alongside.
pub fn ccl_identity_probe(u0: &RadialFn, beta: f64, horizon: f64) -> Result<StabilityVerdict> {
    ccl_identity_probe_with(u0, beta, horizon, FlowOptions { dt: 5e-3, samples: 0 })
}

pub fn ccl_identity_probe_with(u0: &RadialFn, beta: f64, horizon: f64, opts: FlowOptions) -> Result<StabilityVerdict> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("horizon must be nonnegative, got {horizon}")));
    }
    let n = u0.grid().n();
    let nf = n.as_f64();
    let lhs = hls_functional(u0)?;
    let s_end = (beta * horizon).exp();
    let factor = 8.0 / ((nf + 2.0) * beta);
    let (mut rhs, mut rhs_err, mut full, mut tail, mut j_end) = (0.0, 0.0, 0.0, 0.0, lhs.value);
    if !u0.is_zero() && horizon > 0.0 {
        let m = ccl_exponent(n);
        let e = (nf - 1.0) / (nf + 2.0);
        let sample = |s: &FlowState| -> Result<Estimate> {
            let g = s.u.map(|x| x.powf(e), e * s.u.tail_exponent());
            let d = ccl_gns_deficit(&g)?;
            Ok(Estimate::new(d.value, d.quad_error))
        };
        let mut st = FlowState::new(u0.clone(), m, opts.dt)?;
        let mut prev = sample(&st)?;
        let mut dt = (opts.dt * 1e-3).min(1e-4);
        let mut late = Vec::new();
        while st.t < s_end - 1e-12 {
            let mut h = dt.min(s_end - st.t);
            if st.t < 1.0 && st.t + h > 1.0 {
                h = 1.0 - st.t;
            }
            let t0 = st.t;
            st = step(&st, h)?;
            let cur = sample(&st)?;
            let piece = 0.5 * h * (prev.value + cur.value);
            full += piece;
            if t0 >= 1.0 - 1e-12 {
                rhs += piece;
                rhs_err += 0.5 * h * (prev.error + cur.error);
            }
            late.push((st.t, cur.value));
            prev = cur;
            dt = (dt * 1.02).min(opts.dt);
        }
        j_end = hls_functional(&st.u)?.value;
        // power-law extrapolation of the integrand past the last time
        if let (Some(&(t1, d1)), Some(&(t2, d2))) = (late.get(late.len() / 2), late.last()) {
            if d1 > 0.0 && d2 > 0.0 && t2 > t1 {
                let alpha = -(d2 / d1).ln() / (t2 / t1).ln();
                tail = if alpha > 1.0 { d2 * t2 / (alpha - 1.0) } else { f64::INFINITY };
            }
        }
    }
    let rhs_val = factor * rhs;
    let residual = lhs.value - rhs_val;
    let mut v = StabilityVerdict::check("ccl_probe", lhs.value, Relation::AtLeast, rhs_val, lhs.error + factor * rhs_err);
    v.outcome = Outcome::NotApplicable;
    Ok(v.with_param("beta", beta)
        .with_param("flow_time_end", s_end)
        .with_param("truncation_tail", factor * tail)
        .with_param("residual", residual)
        .with_param("residual_with_tail", residual - factor * tail)
        .with_param("gradient_flow_residual", lhs.value - j_end - 2.0 * full)
        .with_note("exploratory: residuals reported, no pass/fail asserted"))
}

/// Runs [`ccl_identity_probe`] over `betas` and returns the value of `beta`
/// with the smallest tail-corrected residual, with all verdicts.
pub fn ccl_beta_sweep(u0: &RadialFn, betas: &[f64], horizon: f64) -> Result<(f64, Vec<StabilityVerdict>)> {
    let verdicts: Vec<StabilityVerdict> =
        betas.iter().map(|&b| ccl_identity_probe(u0, b, horizon)).collect::<Result<_>>()?;
    let best = verdicts
        .iter()
        .min_by(|a, b| {
            let ra = a.param("residual_with_tail").unwrap_or(f64::INFINITY).abs();
            let rb = b.param("residual_with_tail").unwrap_or(f64::INFINITY).abs();
            ra.total_cmp(&rb)
        })
        .and_then(|v| v.param("beta"))
        .unwrap_or(f64::NAN);
    Ok((best, verdicts))
}

/// Runs paired flows from `u0 <= v0` and checks `u(t) <= v(t)` node-wise.
pub fn comparison_check(u0: &RadialFn, v0: &RadialFn, m: f64, horizon: f64, dt: f64) -> Result<StabilityVerdict> {
    u0.same_grid(v0)?;
    if u0.values().iter().zip(v0.values()).any(|(a, b)| a > b) {
        return Err(Error::Inadmissible("initial data are not ordered".into()));
    }
    let scale = v0.max_abs();
    let mut a = FlowState::new(u0.clone(), m, dt)?;
    let mut b = FlowState::new(v0.clone(), m, dt)?;
    let mut worst = f64::NEG_INFINITY;
    while a.t < horizon - 1e-12 {
        let h = dt.min(horizon - a.t);
        a = step(&a, h)?;
        b = step(&b, h)?;
        let excess = a.u.values().iter().zip(b.u.values()).fold(f64::NEG_INFINITY, |w, (x, y)| w.max(x - y));
        worst = worst.max(excess);
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    Ok(StabilityVerdict::check("comparison", worst, Relation::AtMost, 0.0, 1e-8 * scale).with_param("horizon", horizon))
}

/// Checks that the estimated extinction time is stable within 5% when the
/// step is halved.
pub fn extinction_check(u0: &RadialFn, dt: f64) -> Result<StabilityVerdict> {
    let a = estimate_extinction(u0, dt)?;
    let b = estimate_extinction(u0, dt / 2.0)?;
    let rel = (a.t_estimate - b.t_estimate).abs() / b.t_estimate;
    Ok(StabilityVerdict::check("extinction", rel, Relation::AtMost, 0.05, 0.0)
        .with_param("t_estimate", b.t_estimate)
        .with_param("t_estimate_coarse", a.t_estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridRef};
    use crate::profiles::ustar;
    use crate::spectral::{build_zonal_basis, SpectralCoeffs};
    use crate::stability::make_admissible_perturbation;

    fn setup() -> (Dim, GridRef, RadialFn) {
        let d = Dim::new(3).unwrap();
        let g = make_grid(d, 2048, 1e4).unwrap();
        let b = build_zonal_basis(d, &g, 6).unwrap();
        let p = make_admissible_perturbation(&SpectralCoeffs::unit(2, 6), 0.3, &b).unwrap();
        (d, g, p.u_eps)
    }

    fn max_rel(a: &RadialFn, b: &RadialFn) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0, |w, (x, y)| w.max((x - y).abs() / y.abs()))
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let (d, g, _) = setup();
        let s = FlowState::new(RadialFn::zero(&g), critical_exponent(d), 1e-2).unwrap();
        let s = advance(&s, 0.05).unwrap();
        assert!(s.u.is_zero());
        assert!((s.t - 0.05).abs() < 1e-15);
    }

    #[test]
    fn plateau_interior_is_stationary() {
        let (d, g, _) = setup();
        let nf = d.as_f64();
        let u = RadialFn::from_fn(&g, nf + 2.0, |r| 1.0 / (1.0 + (r / 50.0).powi(40)).powf((nf + 2.0) / 40.0)).unwrap();
        let s = step(&FlowState::new(u.clone(), critical_exponent(d), 1e-3).unwrap(), 1e-3).unwrap();
        for (i, &r) in g.radii().iter().enumerate() {
            if r < 5.0 {
                assert!((s.u.values()[i] - u.values()[i]).abs() < 1e-8, "r = {r}");
            }
        }
    }

    #[test]
    fn separable_solution_and_extinction() {
        let (d, g, _) = setup();
        let m = critical_exponent(d);
        let t_ext = separable_extinction_time(d);
        assert!((t_ext - 5.0 / 12.0).abs() < 1e-15);
        let star = ustar(d, &g).unwrap();
        let s = advance(&FlowState::new(star.clone(), m, 1e-3).unwrap(), 0.1).unwrap();
        let a = (1.0 - 0.1 / t_ext).powf(1.0 / (1.0 - m));
        assert!(max_rel(&s.u, &star.scale(a)) < 5e-4);
        let e = estimate_extinction(&star, 2e-3).unwrap();
        assert!((e.t_estimate - t_ext).abs() < 0.01 * t_ext);
    }

    #[test]
    fn step_halving_is_first_order() {
        let (d, _, u0) = setup();
        let m = critical_exponent(d);
        let run = |dt: f64| advance(&FlowState::new(u0.clone(), m, dt).unwrap(), 0.04).unwrap().u;
        let (a, b, c) = (run(4e-3), run(2e-3), run(1e-3));
        let diff = |x: &RadialFn, y: &RadialFn| x.values().iter().zip(y.values()).fold(0.0f64, |w, (p, q)| w.max((p - q).abs()));
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn critical_identity_holds() {
        let (d, g, u0) = setup();
        let v = deficit_identity_check_critical(&u0, 0.2).unwrap();
        assert!(v.passed(), "{v:?}");
        let order = v.param("richardson_order_ratio").unwrap();
        assert!(order > 3.0 && order < 5.0, "{order}");
        let a = &v.parts[0];
        assert!(a.lhs < 1e-3 * a.param("rate").unwrap().abs());
        let star = ustar(d, &g).unwrap();
        assert!(deficit_identity_check_critical(&star, 0.2).unwrap().passed());
        assert!(deficit_identity_check_critical(&RadialFn::zero(&g), 0.2).unwrap().passed());
    }

    #[test]
    fn identity_past_extinction_is_truncated() {
        let (d, g, _) = setup();
        let star = ustar(d, &g).unwrap();
        let v = deficit_identity_check_critical(&star, 1.0).unwrap();
        assert!(v.passed());
        assert!(v.param("t_estimate").is_some() && v.param("horizon").unwrap() < 0.4);
    }

    #[test]
    fn sobolev_deficit_decreases() {
        let (d, g, u0) = setup();
        let v = deficit_monotonicity_check(&u0, 0.3).unwrap();
        assert!(v.passed(), "{v:?}");
        assert_eq!(v.parts.len(), 31);
        assert!(v.parts.iter().all(|p| p.lhs < p.rhs));
        let star = ustar(d, &g).unwrap();
        let w = deficit_monotonicity_check(&star, 0.3).unwrap();
        assert!(w.passed());
        assert!(w.param("first").unwrap().abs() < 1e-8);
        assert!(deficit_monotonicity_check(&u0, 0.0).unwrap().passed());
    }

    #[test]
    fn lp_norm_decreases_and_order_is_kept() {
        let (d, _, u0) = setup();
        let m = critical_exponent(d);
        let p = d.hls_exponent();
        let mut s = FlowState::new(u0.clone(), m, 5e-3).unwrap();
        let mut prev = lp_integral(&s.u, p).unwrap().value;
        for _ in 0..10 {
            s = step(&s, 5e-3).unwrap();
            assert!(s.u.values().iter().all(|&x| x >= 0.0));
            let cur = lp_integral(&s.u, p).unwrap().value;
            assert!(cur < prev);
            prev = cur;
        }
        let v = comparison_check(&u0, &u0.scale(1.2), m, 0.05, 5e-3).unwrap();
        assert!(v.passed(), "{v:?}");
        assert!(comparison_check(&u0.scale(1.2), &u0, m, 0.05, 5e-3).is_err());
    }

    #[test]
    fn extinction_time_is_stable() {
        let (d, g, _) = setup();
        let nf = d.as_f64();
        let u0 = RadialFn::from_fn(&g, nf + 2.0, |r| (1.0 + r * r).powf(-(nf + 2.0) / 2.0) + 4.0 * (-4.0 * r * r).exp()).unwrap();
        let v = extinction_check(&u0, 2e-3).unwrap();
        assert!(v.passed(), "{v:?}");
    }

    #[test]
    fn ccl_probe_equality_case() {
        let (d, g, _) = setup();
        let star = ustar(d, &g).unwrap();
        let v = ccl_identity_probe(&star, 1.0, 0.5).unwrap();
        assert_eq!(v.outcome, Outcome::NotApplicable);
        assert!(v.lhs.abs() < 1e-9 && v.rhs.abs() < 1e-5, "{v:?}");
        let z = ccl_identity_probe(&RadialFn::zero(&g), 1.0, 0.5).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        assert!(ccl_identity_probe(&star, 0.0, 0.5).is_err());
    }

    #[test]
    fn rejects_bad_state() {
        let (d, _, u0) = setup();
        assert!(FlowState::new(u0.clone(), 1.0, 1e-3).is_err());
        assert!(FlowState::new(u0.clone(), 0.5, 0.0).is_err());
        assert!(FlowState::new(u0.scale(-1.0), 0.5, 1e-3).is_err());
        assert!(FlowState::new(u0.clone(), critical_exponent(d), 1e-3).unwrap().is_standard_exponent());
        assert!(!FlowState::new(u0, 0.5, 1e-3).unwrap().is_standard_exponent());
    }
}
