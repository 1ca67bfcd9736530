//! Shared inputs for the benchmarks.

use sharp_hls::suites::{random_direction, saturated_shape, trial_rng};
use sharp_hls::{build_zonal_basis, make_grid, ustar, Dim, GridRef, RadialFn};

pub fn grid(n: usize, nodes: usize) -> GridRef {
    make_grid(Dim::new(n).expect("dimension"), nodes, 1e4).expect("grid")
}

/// `u_star` plus a saturated spectral perturbation of size `eps`.
pub fn perturbed_ustar(grid: &GridRef, eps: f64, seed: u64) -> RadialFn {
    let basis = build_zonal_basis(grid.n(), grid, 8).expect("basis");
    let shape = saturated_shape(&random_direction(&mut trial_rng(seed, 0), 8), &basis).expect("shape");
    ustar(grid.n(), grid).and_then(|u| u.axpby(1.0, &shape, eps)).expect("profile")
}
