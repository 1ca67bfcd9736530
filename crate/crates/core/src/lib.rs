//! Numerical verification of the sharp Hardy-Littlewood-Sobolev and Sobolev
//! inequalities on radial data.

pub mod constants;
pub mod dim;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod norms;
pub mod potential;
pub mod profiles;
pub mod radial;
pub mod spectral;
pub mod stability;
pub mod suites;
mod band;
mod quad;
mod stencil;
pub mod verdict;

pub use constants::{sharp_constants, SharpConstants};
pub use dim::Dim;
pub use error::{Error, Result};
pub use grid::{make_grid, Estimate, GridRef, RadialGrid};
pub use norms::{lp_norm, star_norm, weighted_inner};
pub use profiles::{basis_f, gns_optimizer, gns_theta, ustar};
pub use radial::RadialFn;
pub use potential::{hls_double_integral_oracle, hls_quadratic_form, inverse_laplacian, PotentialResult};
pub use spectral::{build_zonal_basis, enforce_orthogonality, project, spectral_gap_check, synthesize, SpectralCoeffs, ZonalBasis};
pub use verdict::{DeficitReport, Outcome, Relation, StabilityVerdict};
pub use functionals::{ccl_gns_deficit, duality_square_bound, hls_deficit, holder_upper_bound, pck_lower_bound, sobolev_deficit, stability_quotient};
pub use suites::SuiteConfig;
pub use stability::{make_admissible_perturbation, project_to_manifold, verify_proposition, verify_theorem_ruc, verify_theorem_star, ManifoldPoint, Perturbation};
pub use flow::{ccl_identity_probe, deficit_identity_check_critical, deficit_monotonicity_check, step, FlowState};
