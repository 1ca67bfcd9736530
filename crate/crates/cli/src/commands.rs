//! One function per command; each returns a filled [`Report`].

use rayon::prelude::*;
use sharp_hls::flow::{self, FlowOptions};
use sharp_hls::functionals::{ccl_gns_deficit, duality_square_bound, hls_deficit, sobolev_deficit};
use sharp_hls::potential::hls_quadratic_form;
use sharp_hls::profiles::{basis_f, gns_optimizer, ustar};
use sharp_hls::spectral::{conformal_dirichlet, ZonalBasis};
use sharp_hls::stability::project_to_manifold;
use sharp_hls::suites::{self, random_direction, saturated_shape, trial_rng, SuiteConfig};
use sharp_hls::verdict::{Outcome, StabilityVerdict};
use sharp_hls::{sharp_constants, weighted_inner, Dim, RadialFn};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{real, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Constants,
    Deficit,
    Gap,
    VerifyRuc,
    VerifyStar,
    VerifyProp,
    Project,
    FlowIdentity,
    FlowMonotone,
    CclProbe,
    Duality,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Deficit => "deficit",
            Command::Gap => "gap",
            Command::VerifyRuc => "verify-ruc",
            Command::VerifyStar => "verify-star",
            Command::VerifyProp => "verify-prop",
            Command::Project => "project",
            Command::FlowIdentity => "flow-identity",
            Command::FlowMonotone => "flow-monotone",
            Command::CclProbe => "ccl-probe",
            Command::Duality => "duality",
        }
    }
}

fn flag(b: bool) -> String {
    b.to_string()
}

fn tally(report: &mut Report, v: &StabilityVerdict) {
    match v.outcome {
        Outcome::Fail => report.failures += 1,
        Outcome::NotApplicable => report.not_applicable += 1,
        Outcome::Pass => {}
    }
}

fn suite_config(cfg: &RunConfig) -> Result<SuiteConfig, CliError> {
    Ok(SuiteConfig { n: Dim::new(cfg.n)?, nodes: cfg.nodes, r_max: cfg.r_max, k_max: cfg.k_max, seed: cfg.seed })
}

/// `u_star + eps u_star^{4/(n+2)} g` with the direction of trial `t`.
fn perturbed_input(basis: &ZonalBasis, seed: u64, trial: usize, eps: f64) -> Result<RadialFn, CliError> {
    let mut rng = trial_rng(seed, trial);
    let shape = saturated_shape(&random_direction(&mut rng, basis.k_max()), basis)?;
    Ok(ustar(basis.n(), basis.grid())?.axpby(1.0, &shape, eps)?)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match cmd {
        Command::Constants => constants(cfg),
        Command::Deficit => deficit(cfg),
        Command::Gap => gap(cfg),
        Command::VerifyRuc => verify_ruc(cfg),
        Command::VerifyStar => verify_star(cfg),
        Command::VerifyProp => verify_prop(cfg),
        Command::Project => project(cfg),
        Command::FlowIdentity => flow_identity(cfg),
        Command::FlowMonotone => flow_monotone(cfg),
        Command::CclProbe => ccl_probe(cfg),
        Command::Duality => duality(cfg),
    }
}

fn constants(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = sharp_constants(Dim::new(cfg.n)?);
    let mut r = Report::new(vec!["n", "S_n", "C_n", "kappa_n", "ustar_p_norm_p"]);
    r.row(vec![cfg.n.to_string(), real(c.s_n), real(c.c_n), real(c.kappa_n), real(c.ustar_p_norm_p)]);
    r.note(format!("S_n * C_n - 1 = {:.3e}", c.s_n * c.c_n - 1.0));
    Ok(r)
}

fn deficit(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = suite_config(cfg)?;
    let basis = sc.basis()?;
    let n = sc.n;
    let nf = n.as_f64();
    let grid = basis.grid();
    let mut r = Report::new(vec!["functional", "input", "value", "lhs", "rhs", "quad_error", "pass"]);
    let push = |r: &mut Report, name: &str, input: String, rep: sharp_hls::DeficitReport| {
        let ok = rep.is_nonnegative();
        if !ok {
            r.failures += 1;
        }
        r.row(vec![name.into(), input, real(rep.value), real(rep.lhs), real(rep.rhs), real(rep.quad_error), flag(ok)]);
    };
    let gns = gns_optimizer(n, grid, (nf + 1.0) / (nf - 1.0))?;
    push(&mut r, "hls", "optimizer".into(), hls_deficit(&ustar(n, grid)?)?);
    push(&mut r, "sobolev", "optimizer".into(), sobolev_deficit(&basis_f(n, grid, 0)?)?);
    push(&mut r, "ccl_gns", "optimizer".into(), ccl_gns_deficit(&gns)?);
    let inputs: Vec<RadialFn> = (0..cfg.trials)
        .map(|t| suites::random_ustar_perturbation(&mut trial_rng(cfg.seed, t), &basis))
        .collect::<Result<_, _>>()?;
    let reports: Vec<[sharp_hls::DeficitReport; 3]> = inputs
        .par_iter()
        .map(|u| -> Result<_, CliError> {
            let a = (nf - 2.0) / (nf + 2.0);
            let b = (nf - 1.0) / (nf + 2.0);
            Ok([
                hls_deficit(u)?,
                sobolev_deficit(&u.map(|x| x.powf(a), a * u.tail_exponent()))?,
                ccl_gns_deficit(&u.map(|x| x.powf(b), b * u.tail_exponent()))?,
            ])
        })
        .collect::<Result<_, _>>()?;
    for (t, [h, s, c]) in reports.into_iter().enumerate() {
        push(&mut r, "hls", format!("trial_{t}"), h);
        push(&mut r, "sobolev", format!("trial_{t}"), s);
        push(&mut r, "ccl_gns", format!("trial_{t}"), c);
    }
    r.note("inputs trial_t: mu (u_star + delta u_star^{4/(n+2)} g); Sobolev on u^{(n-2)/(n+2)}, GNS on u^{(n-1)/(n+2)}");
    Ok(r)
}

fn gap(cfg: &RunConfig) -> Result<Report, CliError> {
    let basis = suite_config(cfg)?.basis()?;
    let mu2 = basis.eigenvalue(2);
    let mut r = Report::new(vec!["k", "mu_k", "quotient", "bound", "pass"]);
    for k in 2..=basis.k_max() {
        let g = basis.mode(k);
        let d = conformal_dirichlet(g)?;
        let w = weighted_inner(g, g)?;
        let q = d.value / w.value;
        let err = d.error / w.value + q * w.error / w.value;
        let ok = q <= 1.0 / mu2 + err;
        if !ok {
            r.failures += 1;
        }
        r.row(vec![k.to_string(), basis.eigenvalue(k).to_string(), real(q), real(1.0 / mu2), flag(ok)]);
        r.note(format!("k = {k}: quotient * mu_k - 1 = {:.3e}", q * basis.eigenvalue(k) - 1.0));
    }
    Ok(r)
}

fn verify_ruc(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = suite_config(cfg)?;
    let mut r = Report::new(vec!["trial", "epsilon", "lhs", "rhs", "margin", "quad_error", "ratio", "pass"]);
    let mut min_ratio = f64::INFINITY;
    for &eps in &cfg.eps {
        for v in suites::ruc_suite(&sc, eps, cfg.trials)? {
            tally(&mut r, &v);
            min_ratio = min_ratio.min(v.ratio());
            r.row(vec![
                (v.param("trial").unwrap_or(0.0) as usize).to_string(),
                real(eps),
                real(v.lhs),
                real(v.rhs),
                real(v.margin),
                real(v.quad_error),
                real(v.ratio()),
                flag(v.passed()),
            ]);
        }
    }
    r.note(format!("smallest lhs/rhs: {min_ratio:.6}"));
    Ok(r)
}

fn verify_star(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = suite_config(cfg)?;
    let basis = sc.basis()?;
    let mut r = Report::new(vec!["trial", "epsilon", "eta_star", "eta", "lhs", "rhs", "margin", "quad_error", "outcome"]);
    let rows: Vec<StabilityVerdict> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<StabilityVerdict, CliError> {
            let mut rng = trial_rng(cfg.seed, t);
            let eps = cfg.eps[t % cfg.eps.len()];
            let shape = saturated_shape(&random_direction(&mut rng, basis.k_max()), &basis)?;
            let f = ustar(basis.n(), basis.grid())?.axpby(1.0, &shape, eps)?;
            let eta_star = sharp_hls::stability::max_admissible_eta(&f)?;
            let v = if eta_star > 0.0 {
                sharp_hls::verify_theorem_star(&f, cfg.eta_fraction * eta_star)?
            } else {
                StabilityVerdict::not_applicable("theorem_star", "condition K fails for every eta > 0")
                    .with_param("eta_star", eta_star)
            };
            Ok(v.with_param("trial", t as f64).with_param("epsilon_input", eps))
        })
        .collect::<Result<_, _>>()?;
    for v in rows {
        tally(&mut r, &v);
        r.row(vec![
            (v.param("trial").unwrap_or(0.0) as usize).to_string(),
            real(v.param("epsilon_input").unwrap_or(f64::NAN)),
            real(v.param("eta_star").unwrap_or(f64::NAN)),
            real(v.param("eta").unwrap_or(f64::NAN)),
            real(v.lhs),
            real(v.rhs),
            real(v.margin),
            real(v.quad_error),
            v.outcome.to_string(),
        ]);
    }
    r.note(format!("eta = {} * eta_star", cfg.eta_fraction));
    Ok(r)
}

fn verify_prop(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = suite_config(cfg)?;
    let mut r = Report::new(vec!["trial", "K", "X", "Y", "outcome", "stab2X_margin", "stab2Y_margin", "stab3_margin"]);
    for v in suites::proposition_suite(&sc, cfg.trials)? {
        tally(&mut r, &v);
        let part = |name: &str| v.parts.iter().find(|p| p.name == name).map_or(f64::NAN, |p| p.margin);
        r.row(vec![
            (v.param("trial").unwrap_or(0.0) as usize).to_string(),
            real(v.param("K").unwrap_or(f64::NAN)),
            real(v.param("X").unwrap_or(f64::NAN)),
            real(v.param("Y").unwrap_or(f64::NAN)),
            v.outcome.to_string(),
            real(part("stab2X")),
            real(part("stab2Y")),
            real(part("stab3")),
        ]);
    }
    Ok(r)
}

fn project(cfg: &RunConfig) -> Result<Report, CliError> {
    let basis = suite_config(cfg)?.basis()?;
    let star = ustar(basis.n(), basis.grid())?;
    let mut r = Report::new(vec!["trial", "epsilon", "mu", "sigma", "distance", "naive_distance", "pass"]);
    let rows: Vec<(usize, f64, f64, f64, f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<_, CliError> {
            let eps = cfg.eps[t % cfg.eps.len()];
            let f = perturbed_input(&basis, cfg.seed, t, eps)?;
            let (pt, d) = project_to_manifold(&f)?;
            let naive = hls_quadratic_form(&f.sub(&star)?)?.value.sqrt();
            Ok((t, eps, pt.mu, pt.sigma, d, naive))
        })
        .collect::<Result<_, _>>()?;
    for (t, eps, mu, sigma, d, naive) in rows {
        let ok = d <= naive * (1.0 + 1e-10);
        if !ok {
            r.failures += 1;
        }
        r.row(vec![t.to_string(), real(eps), real(mu), real(sigma), real(d), real(naive), flag(ok)]);
    }
    r.note("pass: projected distance does not exceed |||f - u_star|||");
    Ok(r)
}

fn flow_inputs(cfg: &RunConfig) -> Result<Vec<(usize, f64, RadialFn)>, CliError> {
    let basis = suite_config(cfg)?.basis()?;
    (0..cfg.trials.max(1))
        .map(|t| {
            let eps = cfg.eps[t % cfg.eps.len()];
            Ok((t, eps, perturbed_input(&basis, cfg.seed, t, eps)?))
        })
        .collect()
}

fn flow_identity(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = FlowOptions { dt: cfg.dt, samples: cfg.samples };
    let mut r = Report::new(vec!["trial", "epsilon", "check", "lhs", "rhs", "margin", "quad_error", "pass"]);
    let inputs = flow_inputs(cfg)?;
    let verdicts: Vec<(usize, f64, StabilityVerdict)> = inputs
        .par_iter()
        .map(|(t, eps, u0)| -> Result<_, CliError> {
            Ok((*t, *eps, flow::deficit_identity_check_critical_with(u0, cfg.horizon, opts)?))
        })
        .collect::<Result<_, _>>()?;
    for (t, eps, v) in verdicts {
        tally(&mut r, &v);
        for p in &v.parts {
            r.row(vec![
                t.to_string(),
                real(eps),
                p.name.clone(),
                real(p.lhs),
                real(p.rhs),
                real(p.margin),
                real(p.quad_error),
                flag(p.passed()),
            ]);
        }
        r.note(format!(
            "trial {t}: horizon {}, Richardson order ratio {:.3}{}",
            v.param("horizon").unwrap_or(f64::NAN),
            v.param("richardson_order_ratio").unwrap_or(f64::NAN),
            v.note.as_deref().map(|s| format!(" ({s})")).unwrap_or_default()
        ));
    }
    r.note("lhs = |fd - rate| (derivative) or |drop - integral| (integral); rhs = 1% resp. 2% of the rate side");
    Ok(r)
}

fn flow_monotone(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = FlowOptions { dt: cfg.dt, samples: cfg.samples };
    let mut r = Report::new(vec!["trial", "epsilon", "sample", "t", "deficit", "quad_error", "pass"]);
    let inputs = flow_inputs(cfg)?;
    let runs: Vec<(usize, f64, Vec<(f64, sharp_hls::Estimate)>, StabilityVerdict)> = inputs
        .par_iter()
        .map(|(t, eps, u0)| -> Result<_, CliError> {
            let v = flow::deficit_monotonicity_check_with(u0, cfg.horizon, opts)?;
            let horizon = v.param("horizon").unwrap_or(cfg.horizon);
            let traj = flow::sobolev_deficit_trajectory(u0, horizon, opts)?;
            Ok((*t, *eps, traj, v))
        })
        .collect::<Result<_, _>>()?;
    for (t, eps, traj, v) in runs {
        tally(&mut r, &v);
        for (j, (time, d)) in traj.iter().enumerate() {
            let ok = j == 0 || v.parts.get(j - 1).is_none_or(|p| p.passed());
            r.row(vec![t.to_string(), real(eps), j.to_string(), real(*time), real(d.value), real(d.error), flag(ok)]);
        }
    }
    Ok(r)
}

fn ccl_probe(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut r = Report::new(vec![
        "trial",
        "beta",
        "lhs",
        "rhs",
        "residual",
        "residual_with_tail",
        "truncation_tail",
        "gradient_flow_residual",
    ]);
    let inputs = flow_inputs(cfg)?;
    let opts = FlowOptions { dt: cfg.dt, samples: cfg.samples };
    for (t, _, u0) in &inputs {
        let verdicts: Vec<StabilityVerdict> = cfg
            .beta
            .par_iter()
            .map(|&b| flow::ccl_identity_probe_with(u0, b, cfg.horizon, opts))
            .collect::<Result<_, _>>()?;
        let mut best = (f64::NAN, f64::INFINITY);
        for v in &verdicts {
            tally(&mut r, v);
            let p = |k: &str| v.param(k).unwrap_or(f64::NAN);
            if p("residual_with_tail").abs() < best.1 {
                best = (p("beta"), p("residual_with_tail").abs());
            }
            r.row(vec![
                t.to_string(),
                real(p("beta")),
                real(v.lhs),
                real(v.rhs),
                real(p("residual")),
                real(p("residual_with_tail")),
                real(p("truncation_tail")),
                real(p("gradient_flow_residual")),
            ]);
        }
        r.note(format!("trial {t}: beta_hat = {} with |residual| {:.6e} (exploratory, not gated)", best.0, best.1));
    }
    Ok(r)
}

fn duality(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = suite_config(cfg)?;
    let basis = sc.basis()?;
    let mut r = Report::new(vec!["trial", "lhs", "rhs", "margin", "quad_error", "completed_square", "pass"]);
    let push = |r: &mut Report, label: String, v: &StabilityVerdict| {
        tally(r, v);
        r.row(vec![
            label,
            real(v.lhs),
            real(v.rhs),
            real(v.margin),
            real(v.quad_error),
            real(v.param("completed_square").unwrap_or(f64::NAN)),
            flag(v.passed()),
        ]);
    };
    push(&mut r, "optimizer".into(), &duality_square_bound(&ustar(sc.n, basis.grid())?)?);
    for v in suites::duality_suite(&sc, cfg.trials)? {
        push(&mut r, (v.param("trial").unwrap_or(0.0) as usize).to_string(), &v);
    }
    Ok(r)
}
