use std::f64::consts::PI;

use approx::assert_relative_eq;
use sharp_hls::flow::separable_extinction_time;
use sharp_hls::norms::dirichlet_energy;
use sharp_hls::potential::RieszKernel;
use sharp_hls::*;

/// `(Gamma(n/2 - 1), Gamma(n/2 + 1), |S^{n-1}|)` for n = 3, 4, 5.
fn gamma_table(n: usize) -> (f64, f64, f64) {
    let sp = PI.sqrt();
    match n {
        3 => (sp, 0.75 * sp, 4.0 * PI),
        4 => (1.0, 2.0, 2.0 * PI * PI),
        5 => (0.5 * sp, 1.875 * sp, 8.0 * PI * PI / 3.0),
        _ => unreachable!(),
    }
}

/// `int e^{-r^2} (-Delta)^{-1} e^{-r^2}` from the Fourier side.
fn gaussian_q(n: usize) -> f64 {
    let (g, _, area) = gamma_table(n);
    let nf = n as f64;
    PI.powf(nf - 2.0) / 4.0 * area * 0.5 * g * (2.0 * PI * PI).powf(-(nf - 2.0) / 2.0)
}

fn gaussian_grad(n: usize) -> f64 {
    let (_, g, area) = gamma_table(n);
    area * 2.0 * g * 2f64.powf(-(n as f64 + 2.0) / 2.0)
}

#[test]
fn gaussian_quadratic_form_and_energy() {
    for n in 3..=5 {
        let grid = make_grid(Dim::new(n).unwrap(), 2048, 1e4).unwrap();
        let f = RadialFn::from_fn(&grid, f64::INFINITY, |r| (-r * r).exp()).unwrap();
        assert_relative_eq!(hls_quadratic_form(&f).unwrap().value, gaussian_q(n), max_relative = 1e-10);
        assert_relative_eq!(dirichlet_energy(&f).unwrap().value, gaussian_grad(n), max_relative = 1e-10);
    }
}

#[test]
fn frozen_three_dimensional_values() {
    assert_relative_eq!(gaussian_q(3), PI.powf(1.5) / (2.0 * 2f64.sqrt()), max_relative = 1e-15);
    assert_relative_eq!(gaussian_grad(3), 3.0 * PI.powf(1.5) / (2.0 * 2f64.sqrt()), max_relative = 1e-15);
    assert_relative_eq!(separable_extinction_time(Dim::new(3).unwrap()), 5.0 / 12.0, max_relative = 1e-15);
    let grid = make_grid(Dim::new(3).unwrap(), 2048, 1e4).unwrap();
    let basis = build_zonal_basis(grid.n(), &grid, 4).unwrap();
    assert_eq!(basis.eigenvalues(), &[3, 15, 35, 63, 99]);
}

#[test]
fn riesz_oracle_on_gaussians() {
    for n in [3, 4] {
        let grid = make_grid(Dim::new(n).unwrap(), 512, 1e4).unwrap();
        let kernel = RieszKernel::new(&grid, n as f64 - 2.0).unwrap();
        let f = RadialFn::from_fn(&grid, f64::INFINITY, |r| (-r * r).exp()).unwrap();
        let direct = kernel.bilinear(&f, &f).unwrap() * sharp_hls::constants::newton_kernel_constant(grid.n());
        assert_relative_eq!(direct, gaussian_q(n), max_relative = 1e-4);
    }
}
