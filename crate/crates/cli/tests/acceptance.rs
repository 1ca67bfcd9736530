//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use sharp_hls::constants::{kappa_rational, newton_kernel_constant};
use sharp_hls::flow::{self, critical_exponent, separable_extinction_time};
use sharp_hls::functionals::{duality_square_bound, hls_deficit, sobolev_deficit};
use sharp_hls::grid::make_grid;
use sharp_hls::norms::lp_integral;
use sharp_hls::potential::{hls_quadratic_form, RieszKernel};
use sharp_hls::profiles::{basis_f, ustar};
use sharp_hls::spectral::{build_zonal_basis, conformal_dirichlet};
use sharp_hls::suites::{self, random_direction, saturated_shape, trial_rng, SuiteConfig};
use sharp_hls::verdict::Outcome;
use sharp_hls::{sharp_constants, weighted_inner, Dim, RadialFn};

type Check = Result<String, String>;

fn dim(n: usize) -> Dim {
    Dim::new(n).expect("supported dimension")
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn constants() -> Check {
    let start = Instant::now();
    let c3 = sharp_constants(dim(3));
    let closed = 3.0 * (PI / 2.0).powf(4.0 / 3.0);
    let s_err = (c3.s_n - closed).abs();
    let kappa_ok = kappa_rational(dim(3)) == (32, 1575);
    let d3 = dim(3);
    let g = make_grid(d3, 2048, 1e4).map_err(|e| e.to_string())?;
    let pnorm = lp_integral(&ustar(d3, &g).map_err(|e| e.to_string())?, d3.hls_exponent()).map_err(|e| e.to_string())?;
    let quarter = PI * PI / 4.0;
    let p_closed = (c3.ustar_p_norm_p - quarter).abs();
    let p_num = (pnorm.value - quarter).abs();
    let sc = (3..=20).map(|n| (sharp_constants(dim(n)).s_n * sharp_constants(dim(n)).c_n - 1.0).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    ensure(
        s_err < 1e-12 && kappa_ok && p_closed < 1e-12 && p_num < 1e-12 && sc < 1e-12 && secs < 1.0,
        format!(
            "|S_3 - 3(pi/2)^(4/3)| = {s_err:.1e}, kappa_3 = 32/1575: {kappa_ok}, ||u*||_p^p - pi^2/4: closed {p_closed:.1e}, \
             quadrature {p_num:.1e}, max |S_n C_n - 1| (n <= 20) = {sc:.1e}, {secs:.2} s"
        ),
    )
}

fn optimizer_identities() -> Check {
    let d = dim(3);
    let g = make_grid(d, 2048, 1e4).map_err(|e| e.to_string())?;
    let u = ustar(d, &g).map_err(|e| e.to_string())?;
    let q = hls_quadratic_form(&u).map_err(|e| e.to_string())?.value;
    let q_rel = (q - PI * PI / 12.0).abs() / (PI * PI / 12.0);
    let h = hls_deficit(&u).map_err(|e| e.to_string())?;
    let raw = h.norm("raw_deficit").unwrap_or(f64::NAN);
    let lp2 = h.norm("lp_norm").unwrap_or(f64::NAN).powi(2);
    let s = sobolev_deficit(&basis_f(d, &g, 0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let s_rel = s.value.abs() / s.lhs;
    ensure(
        q_rel < 1e-8 && raw.abs() < 1e-8 * lp2 && h.value.abs() < 1e-8 * lp2 && s_rel < 1e-6,
        format!(
            "Q(u*) rel err {q_rel:.1e}, H[u*] = {:.1e} (raw {raw:.1e}) vs 1e-8 ||u*||_p^2, sobolev(f_0) rel {s_rel:.1e}",
            h.value
        ),
    )
}

fn oracle_profiles(n: usize) -> Vec<(f64, Box<dyn Fn(f64) -> f64>)> {
    let nf = n as f64;
    vec![
        (nf + 2.0, Box::new(move |r: f64| (1.0 + r * r).powf(-(nf + 2.0) / 2.0))),
        (f64::INFINITY, Box::new(|r: f64| (-r * r).exp())),
        (f64::INFINITY, Box::new(|r: f64| (-r * r / 9.0).exp())),
        (f64::INFINITY, Box::new(|r: f64| (-4.0 * r * r).exp())),
        (f64::INFINITY, Box::new(|r: f64| r * r * (-r * r).exp())),
        (2.0 * nf, Box::new(move |r: f64| (1.0 + r * r).powf(-nf))),
        (nf + 1.0, Box::new(move |r: f64| (1.0 + r * r).powf(-(nf + 1.0) / 2.0))),
        (f64::INFINITY, Box::new(|r: f64| 1.0 / r.cosh())),
        (nf + 4.0, Box::new(move |r: f64| (1.0 - r * r) * (1.0 + r * r).powf(-(nf + 6.0) / 2.0))),
        (f64::INFINITY, Box::new(|r: f64| (-r * r).exp() * (1.0 + 0.5 * (3.0 * r).cos()))),
    ]
}

fn oracle_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    for n in [3, 4] {
        let d = dim(n);
        let g = make_grid(d, 512, 1e4).map_err(|e| e.to_string())?;
        let kernel = RieszKernel::new(&g, n as f64 - 2.0).map_err(|e| e.to_string())?;
        for (beta, f) in oracle_profiles(n) {
            let u = RadialFn::from_fn(&g, beta, f).map_err(|e| e.to_string())?;
            let shell = hls_quadratic_form(&u).map_err(|e| e.to_string())?.value;
            let direct = kernel.bilinear(&u, &u).map_err(|e| e.to_string())? * newton_kernel_constant(d);
            worst = worst.max((shell - direct).abs() / shell.abs());
        }
    }
    ensure(worst < 1e-4, format!("max relative gap over 10 profiles, n in {{3,4}}: {worst:.2e}"))
}

fn spectral_gap() -> Check {
    let mut worst: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut fails = 0;
    for n in [3, 4, 5] {
        let d = dim(n);
        let g = make_grid(d, 2048, 1e4).map_err(|e| e.to_string())?;
        let basis = build_zonal_basis(d, &g, 8).map_err(|e| e.to_string())?;
        for k in 2..=8 {
            let gk = basis.mode(k);
            let q = conformal_dirichlet(gk).map_err(|e| e.to_string())?.value
                / weighted_inner(gk, gk).map_err(|e| e.to_string())?.value;
            worst = worst.max((q * basis.eigenvalue(k) - 1.0).abs());
        }
        let cfg = SuiteConfig::new(d, 2024);
        for v in suites::gap_suite(&cfg, 100).map_err(|e| e.to_string())? {
            min_margin = min_margin.min(v.margin);
            if !v.passed() || v.margin < 0.0 {
                fails += 1;
            }
        }
    }
    ensure(
        worst < 1e-6 && fails == 0,
        format!("max |D[g_k] mu_k/||g_k||^2 - 1| = {worst:.1e}; (D) on 3 x 100 random: {fails} violations, min margin {min_margin:.3e}"),
    )
}

fn ruc_suite() -> Check {
    let mut total = 0;
    let mut fails = 0;
    let mut min_net = f64::INFINITY;
    for n in [3, 4, 5] {
        for eps in [0.1, 0.5, 0.9] {
            let cfg = SuiteConfig::new(dim(n), 51);
            for v in suites::ruc_suite(&cfg, eps, 50).map_err(|e| e.to_string())? {
                total += 1;
                min_net = min_net.min((v.margin - v.quad_error) / v.rhs);
                if !v.passed() {
                    fails += 1;
                }
            }
        }
    }
    ensure(fails == 0 && total == 450, format!("{fails} violations in {total} cases; min (margin - quad_error)/rhs = {min_net:.4}"))
}

fn star_suite() -> Check {
    let (mut pass, mut fail, mut na) = (0, 0, 0);
    let mut min_ratio = f64::INFINITY;
    for n in [3, 4, 5] {
        let cfg = SuiteConfig::new(dim(n), 52);
        for v in suites::star_suite(&cfg, 50).map_err(|e| e.to_string())? {
            match v.outcome {
                Outcome::Pass => {
                    pass += 1;
                    min_ratio = min_ratio.min(v.ratio());
                }
                Outcome::Fail => fail += 1,
                Outcome::NotApplicable => na += 1,
            }
        }
    }
    ensure(fail == 0, format!("pass {pass}, fail {fail}, n/a {na} over 3 x 50 inputs; min Q/kappa = {min_ratio:.3}"))
}

fn proposition_suite() -> Check {
    let cfg = SuiteConfig::new(dim(3), 53);
    let verdicts = suites::proposition_suite(&cfg, 400).map_err(|e| e.to_string())?;
    let applicable: Vec<_> = verdicts.iter().filter(|v| v.outcome != Outcome::NotApplicable).take(100).collect();
    let spurious_na = verdicts
        .iter()
        .filter(|v| v.outcome == Outcome::NotApplicable)
        .any(|v| v.param("X").unwrap_or(0.0) - v.param("K").unwrap_or(0.0) * v.param("Y").unwrap_or(0.0) >= 0.0);
    let bad = applicable.iter().filter(|v| !v.passed() || v.parts.iter().any(|p| p.margin < 0.0)).count();
    let min_margin = applicable.iter().flat_map(|v| v.parts.iter().map(|p| p.margin)).fold(f64::INFINITY, f64::min);
    ensure(
        applicable.len() == 100 && bad == 0 && !spurious_na,
        format!("{} applicable pairs, {bad} with a negative margin, min margin {min_margin:.3e}", applicable.len()),
    )
}

fn flow_identity() -> Check {
    let d = dim(3);
    let g = make_grid(d, 2048, 1e4).map_err(|e| e.to_string())?;
    let basis = build_zonal_basis(d, &g, 8).map_err(|e| e.to_string())?;
    let shape = saturated_shape(&random_direction(&mut trial_rng(8, 0), 8), &basis).map_err(|e| e.to_string())?;
    let u0 = ustar(d, &g).and_then(|u| u.axpby(1.0, &shape, 0.3)).map_err(|e| e.to_string())?;
    let horizon = 0.5 * separable_extinction_time(d);
    let v = flow::deficit_identity_check_critical(&u0, horizon).map_err(|e| e.to_string())?;
    let a = &v.parts[0];
    let b = &v.parts[1];
    let rel_a = a.lhs / a.param("rate").unwrap_or(f64::NAN).abs();
    let rel_b = b.lhs / b.param("rate_integral").unwrap_or(f64::NAN).abs();
    ensure(
        v.passed() && a.passed() && b.passed(),
        format!(
            "m = {:.3}, horizon {horizon:.4}: derivative rel gap {rel_a:.2e} (gate 1e-2), integral rel gap {rel_b:.2e} (gate 2e-2)",
            critical_exponent(d)
        ),
    )
}

fn flow_monotonicity() -> Check {
    let mut runs = 0;
    let mut fails = 0;
    for (n, horizon) in [(3, 0.3), (4, 0.12)] {
        let d = dim(n);
        let g = make_grid(d, 2048, 1e4).map_err(|e| e.to_string())?;
        let basis = build_zonal_basis(d, &g, 8).map_err(|e| e.to_string())?;
        for (t, eps) in [(0, 0.1), (1, 0.3), (2, 0.6)] {
            let shape = saturated_shape(&random_direction(&mut trial_rng(9, t), 8), &basis).map_err(|e| e.to_string())?;
            let u0 = ustar(d, &g).and_then(|u| u.axpby(1.0, &shape, eps)).map_err(|e| e.to_string())?;
            let v = flow::deficit_monotonicity_check(&u0, horizon).map_err(|e| e.to_string())?;
            runs += 1;
            if !v.passed() {
                fails += 1;
            }
        }
    }
    ensure(fails == 0, format!("{runs} runs of 32 samples, {fails} with an increase beyond the sample errors"))
}

fn duality() -> Check {
    let d = dim(3);
    let cfg = SuiteConfig::new(d, 54);
    let verdicts = suites::duality_suite(&cfg, 100).map_err(|e| e.to_string())?;
    let fails = verdicts.iter().filter(|v| !v.passed()).count();
    let basis = cfg.basis().map_err(|e| e.to_string())?;
    let at = duality_square_bound(&ustar(d, basis.grid()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let vanish = at.lhs.abs() <= at.quad_error && at.rhs.abs() <= at.quad_error;
    ensure(
        fails == 0 && vanish,
        format!("{fails} failures in 100 inputs; at u*: lhs {:.1e}, rhs {:.1e}, quad_error {:.1e}", at.lhs, at.rhs, at.quad_error),
    )
}

fn cli_determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_sharp-hls");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [
        vec!["verify-ruc", "--n", "4", "--eps", "0.5", "--trials", "50", "--seed", "7"],
        vec!["verify-prop", "--n", "3", "--trials", "40", "--seed", "7"],
        vec!["duality", "--n", "3", "--trials", "20", "--seed", "7"],
    ];
    let mut compared = 0;
    for args in runs {
        let mut bodies = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("run{rep}"));
            let status = Command::new(exe)
                .args(&args)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if status.code() != Some(0) {
                return Err(format!("{} exited with {status}", args[0]));
            }
            bodies.push(std::fs::read(out.join(format!("{}.csv", args[0]))).map_err(|e| e.to_string())?);
        }
        if bodies[0] != bodies[1] || bodies[0].is_empty() {
            return Err(format!("{} CSV differs between runs", args[0]));
        }
        compared += 1;
    }
    Ok(format!("{compared} commands, CSV bodies byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("constants", constants),
        ("optimizer identities", optimizer_identities),
        ("potential oracle", oracle_equivalence),
        ("spectral gap", spectral_gap),
        ("uniform-convergence theorem", ruc_suite),
        ("weighted-norm theorem", star_suite),
        ("proposition", proposition_suite),
        ("flow identity", flow_identity),
        ("flow monotonicity", flow_monotonicity),
        ("duality bound", duality),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, msg) = match f() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {name}: {tag} ({msg}; {:.1} s)", i + 1, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
