use std::sync::OnceLock;

use proptest::prelude::*;
use sharp_hls::functionals::{hls_deficit, holder_upper_bound, stability_quotient_report};
use sharp_hls::grid::Estimate;
use sharp_hls::norms::lp_norm_estimate;
use sharp_hls::potential::{hls_bilinear_form, potential_residual, RieszKernel};
use sharp_hls::profiles::scaled_ustar;
use sharp_hls::stability::manifold_distance;
use sharp_hls::*;

struct Fixture {
    grid: GridRef,
    basis: ZonalBasis,
}

fn fixture(n: usize) -> &'static Fixture {
    static CACHE: [OnceLock<Fixture>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[n - 3].get_or_init(|| {
        let d = Dim::new(n).unwrap();
        let grid = make_grid(d, 1024, 1e4).unwrap();
        let basis = build_zonal_basis(d, &grid, 8).unwrap();
        Fixture { grid, basis }
    })
}

fn kernel(n: usize) -> &'static (GridRef, RieszKernel) {
    static CACHE: [OnceLock<(GridRef, RieszKernel)>; 2] = [OnceLock::new(), OnceLock::new()];
    CACHE[n - 3].get_or_init(|| {
        let grid = make_grid(Dim::new(n).unwrap(), 256, 1e4).unwrap();
        let k = RieszKernel::new(&grid, n as f64 - 2.0).unwrap();
        (grid, k)
    })
}

/// Gaussian mixture plus an optional `u_star`-like algebraic tail.
#[derive(Debug, Clone)]
struct Mix {
    gauss: Vec<(f64, f64)>,
    tail: f64,
}

impl Mix {
    fn eval(&self, n: usize, r: f64) -> f64 {
        let g: f64 = self.gauss.iter().map(|&(a, s)| a * (-(r / s).powi(2)).exp()).sum();
        g + self.tail * (1.0 + r * r).powf(-(n as f64 + 2.0) / 2.0)
    }

    fn build(&self, grid: &GridRef) -> RadialFn {
        let n = grid.n().get();
        let beta = if self.tail != 0.0 { n as f64 + 2.0 } else { f64::INFINITY };
        RadialFn::from_fn(grid, beta, |r| self.eval(n, r)).unwrap()
    }
}

fn mix(signed: bool) -> impl Strategy<Value = Mix> {
    let amp = if signed { -1.0..1.0 } else { 0.05..1.0 };
    (prop::collection::vec((amp.clone(), 0.3f64..3.0), 1..4), amp).prop_map(|(gauss, tail)| Mix { gauss, tail })
}

fn dims() -> impl Strategy<Value = usize> {
    3usize..=5
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_norm_is_a_norm(n in dims(), f in mix(true), g in mix(true), c in -5.0f64..5.0) {
        let grid = &fixture(n).grid;
        let (f, g) = (f.build(grid), g.build(grid));
        for p in [Dim::new(n).unwrap().hls_exponent(), 2.0, 3.0] {
            let nf = lp_norm(&f, p).unwrap();
            prop_assert!(rel(lp_norm(&f.scale(c), p).unwrap(), c.abs() * nf) < 1e-12);
            let sum = lp_norm(&f.add(&g).unwrap(), p).unwrap();
            prop_assert!(sum <= (nf + lp_norm(&g, p).unwrap()) * (1.0 + 1e-10));
        }
        let sf = star_norm(&f).unwrap();
        prop_assert!(rel(star_norm(&f.scale(c)).unwrap(), c.abs() * sf) < 1e-10);
        prop_assert!(star_norm(&f.add(&g).unwrap()).unwrap() <= (sf + star_norm(&g).unwrap()) * (1.0 + 1e-10));
    }

    #[test]
    fn quadratic_form_positive_definite(n in dims(), f in mix(true)) {
        let f = f.build(&fixture(n).grid);
        prop_assume!(f.max_abs() > 1e-3);
        let q = hls_quadratic_form(&f).unwrap();
        prop_assert!(q.value > q.error, "Q = {} +- {}", q.value, q.error);
    }

    #[test]
    fn quadratic_form_dilation_law(n in dims(), f in mix(false), sigma in 0.5f64..2.0) {
        let grid = &fixture(n).grid;
        let base = f.build(grid);
        let dilated = RadialFn::from_fn(grid, base.tail_exponent(), |r| f.eval(n, sigma * r)).unwrap();
        let q = hls_quadratic_form(&base).unwrap().value;
        let qs = hls_quadratic_form(&dilated).unwrap().value;
        prop_assert!(rel(qs, q * sigma.powf(-(n as f64 + 2.0))) < 1e-8);
    }

    #[test]
    fn potential_residual_small(n in dims(), f in mix(true)) {
        let f = f.build(&fixture(n).grid);
        prop_assume!(f.max_abs() > 1e-3);
        let pot = inverse_laplacian(&f).unwrap();
        prop_assert!(potential_residual(&f, &pot).unwrap() < 1e-4);
    }

    #[test]
    fn potential_is_linear(n in dims(), f in mix(true), g in mix(true), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let grid = &fixture(n).grid;
        let (f, g) = (f.build(grid), g.build(grid));
        let combo = inverse_laplacian(&f.axpby(a, &g, b).unwrap()).unwrap().phi;
        let separate = inverse_laplacian(&f).unwrap().phi.axpby(a, &inverse_laplacian(&g).unwrap().phi, b).unwrap();
        let scale = combo.max_abs().max(separate.max_abs());
        let gap = combo.sub(&separate).unwrap().max_abs();
        prop_assert!(gap <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn sobolev_deficit_scaling(n in dims(), f in mix(false), c in 0.1f64..10.0, sigma in 0.5f64..2.0) {
        let grid = &fixture(n).grid;
        let base = f.build(grid);
        let d = sobolev_deficit(&base).unwrap();
        let scaled = sobolev_deficit(&base.scale(c)).unwrap();
        prop_assert!((scaled.value - c * c * d.value).abs() <= 1e-10 * c * c * d.lhs);
        let dilated = RadialFn::from_fn(grid, base.tail_exponent(), |r| f.eval(n, sigma * r)).unwrap();
        let dd = sobolev_deficit(&dilated).unwrap();
        let expect = sigma.powf(2.0 - n as f64);
        prop_assert!((dd.value - expect * d.value).abs() <= 1e-7 * expect * d.lhs + dd.quad_error + expect * d.quad_error);
    }

    #[test]
    fn homogeneous_verdicts_scale_invariant(n in dims(), f in mix(false), h in mix(false), c in 0.1f64..10.0) {
        let grid = &fixture(n).grid;
        let (f, h) = (f.build(grid), h.build(grid));
        let a = holder_upper_bound(&f).unwrap();
        let b = holder_upper_bound(&f.scale(c)).unwrap();
        prop_assert_eq!(a.outcome, b.outcome);
        prop_assert!(rel(a.ratio(), b.ratio()) < 1e-8);
        let diff = f.sub(&h).unwrap();
        prop_assume!(hls_quadratic_form(&diff).unwrap().value.sqrt() > 1e-6 * lp_norm(&f, 2.0).unwrap());
        let q1 = stability_quotient_report(&f, &h).unwrap();
        let q2 = stability_quotient_report(&f.scale(c), &h.scale(c)).unwrap();
        prop_assert!((q1.quotient - q2.quotient).abs() <= 1e-8 * q1.quotient.abs() + q1.quad_error + q2.quad_error);
    }

    #[test]
    fn duality_bound_is_a_completed_square(n in dims(), g in mix(false)) {
        let g = g.build(&fixture(n).grid);
        prop_assume!(g.values().iter().all(|&v| v > 0.0));
        let v = duality_square_bound(&g).unwrap();
        prop_assert!(v.passed(), "margin {} quad {}", v.margin, v.quad_error);
        let square = v.param("completed_square").unwrap();
        let err = v.param("completed_square_error").unwrap();
        prop_assert!(square >= -err);
        prop_assert!((v.margin - square).abs() <= 1e-6 * v.rhs.abs() + v.quad_error + err);
    }

    #[test]
    fn spectral_gap_inequality(n in dims(), coeffs in prop::collection::vec(-1.0f64..1.0, 7)) {
        let fx = fixture(n);
        let mut c = vec![0.0, 0.0];
        c.extend(coeffs);
        prop_assume!(c.iter().any(|&a| a.abs() > 1e-3));
        let g = synthesize(&SpectralCoeffs::new(c), &fx.basis).unwrap();
        let v = spectral_gap_check(&g, &fx.basis).unwrap();
        prop_assert!(v.passed(), "margin {} quad {}", v.margin, v.quad_error);
        let d = sharp_hls::spectral::conformal_dirichlet(&g).unwrap().value;
        let w = weighted_inner(&g, &g).unwrap().value;
        prop_assert!(d * fx.basis.eigenvalue(2) <= w * (1.0 + 1e-6));
    }

    #[test]
    fn spectral_projection_idempotent(n in dims(), coeffs in prop::collection::vec(-1.0f64..1.0, 3), f in mix(true)) {
        let fx = fixture(n);
        let base = synthesize(&SpectralCoeffs::new(coeffs), &fx.basis).unwrap();
        let g = base.axpby(1.0, &f.build(&fx.grid).weighted(4.0, |r| (1.0 + r * r).powi(-2)), 0.1).unwrap();
        let once = project(&g, &fx.basis).unwrap();
        let twice = project(&synthesize(&once, &fx.basis).unwrap(), &fx.basis).unwrap();
        let scale = once.energy().sqrt().max(1e-300);
        for (a, b) in once.coeffs.iter().zip(&twice.coeffs) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn deficits_nonnegative(inputs in prop::array::uniform3(mix(false))) {
        for (n, f) in (3..=5).zip(&inputs) {
            let f = f.build(&fixture(n).grid);
            let h = hls_deficit(&f).unwrap();
            prop_assert!(h.is_nonnegative(), "n={n} hls {} +- {}", h.value, h.quad_error);
            let s = sobolev_deficit(&f).unwrap();
            prop_assert!(s.is_nonnegative(), "n={n} sobolev {} +- {}", s.value, s.quad_error);
            let g = ccl_gns_deficit(&f).unwrap();
            prop_assert!(g.is_nonnegative(), "n={n} gns {} +- {}", g.value, g.quad_error);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_oracle_symmetric(n in 3usize..=4, f in mix(true), g in mix(true)) {
        let (grid, k) = kernel(n);
        let (f, g) = (f.build(grid), g.build(grid));
        let fg = k.bilinear(&f, &g).unwrap();
        let gf = k.bilinear(&g, &f).unwrap();
        prop_assert!((fg - gf).abs() <= 1e-12 * (k.bilinear(&f, &f).unwrap() * k.bilinear(&g, &g).unwrap()).sqrt());
        let shell = hls_bilinear_form(&f, &g).unwrap().value;
        let scale = (hls_quadratic_form(&f).unwrap().value * hls_quadratic_form(&g).unwrap().value).sqrt();
        let direct = fg * sharp_hls::constants::newton_kernel_constant(grid.n());
        prop_assert!((shell - direct).abs() <= 1e-4 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn projection_idempotent(n in dims(), mu in 0.3f64..3.0, ls in -0.7f64..0.7, f in mix(true), eps in 0.0f64..0.05) {
        let grid = &fixture(n).grid;
        let sigma = ls.exp();
        let member = scaled_ustar(grid.n(), grid, mu, sigma).unwrap();
        let bump = f.build(grid);
        let size = (hls_quadratic_form(&member).unwrap().value / hls_quadratic_form(&bump).unwrap().value).sqrt();
        let target = member.axpby(1.0, &bump, eps * size).unwrap();
        let (first, d1) = project_to_manifold(&target).unwrap();
        let (again, d2) = project_to_manifold(&first.profile(grid).unwrap()).unwrap();
        prop_assert!(rel(first.mu, again.mu) < 1e-6 && rel(first.sigma, again.sigma) < 1e-6,
            "{first:?} vs {again:?}");
        prop_assert!(d2 <= 1e-6 * d1.max(hls_quadratic_form(&target).unwrap().value.sqrt()));
        let naive = manifold_distance(&target, ManifoldPoint { mu, sigma }).unwrap();
        prop_assert!(d1 <= naive * (1.0 + 1e-12));
    }
}

#[test]
fn grid_calibration_and_refinement() {
    for n in 3..=5 {
        let d = Dim::new(n).unwrap();
        let coarse = make_grid(d, 2048, 1e4).unwrap();
        assert!(coarse.calibration_residual() < 1e-8, "n={n}: {}", coarse.calibration_residual());
        let fine = make_grid(d, 4096, 1e4).unwrap();
        let norm = |g: &GridRef| -> Estimate { lp_norm_estimate(&ustar(d, g).unwrap(), d.hls_exponent()).unwrap() };
        let (a, b) = (norm(&coarse), norm(&fine));
        assert!((a.value - b.value).abs() <= a.error, "n={n}: {} vs {} (error {})", a.value, b.value, a.error);
    }
}

#[test]
fn eigenvalues_strictly_increase() {
    for n in 3..=5 {
        let mu = fixture(n).basis.eigenvalues();
        assert!(mu.windows(2).all(|w| w[0] < w[1]));
    }
}
