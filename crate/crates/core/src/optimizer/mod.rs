//! Pilot reuse, antenna and UE-count steps, and the alternating scheme.

pub mod alternating;
pub mod lemma;
pub mod pilot;

pub use alternating::{
    alternating_optimize, brute_force, integerize, IterationRecord, OptimResult,
};
pub use lemma::{
    cbar_star, cbar_star_for, k_star_coefficients, ee_along_ray, k_star_approx,
    k_star_numeric, lemma_coefficients, lemma_coefficients_for, reduced_objective, CbarBound,
    CbarStar, LemmaCoefficients,
};
pub use pilot::{
    feasibility, reuse_coefficients, target_reachable, zeta_bound, zeta_star, zeta_star_for,
    zeta_star_mr, Feasibility,
};
