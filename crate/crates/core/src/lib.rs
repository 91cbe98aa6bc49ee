//! Verification workbench for perturbative moving-media electrodynamics.
//!
//! * [`expr`]: exact symbolic engine for 3-vector field algebra and β-graded series.
//! * [`derivation`]: the constitutive inversion, energy density and stress
//!   decompositions through (v/c)³, each checked against its closed form.
//! * [`ensemble`]: seeded Gaussian field ensembles for equilibrium averages.
//! * [`kubo`]: finite-dimensional linear-response laboratory.
//! * [`cli`]: configuration, orchestration and reports.

pub mod cli;
pub mod derivation;
pub mod ensemble;
pub mod expr;
pub mod kubo;
