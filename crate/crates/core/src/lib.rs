//! Two-dimensional finite-element simulation of coupled heat and moisture
//! transport in layered porous structures.
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: axis-aligned rectangular layers, admissibility checks and
//!   conforming structured triangulation.
//! - [`materials`]: coefficient models (Kiessl, Künzel, constant linear),
//!   tabulated material functions and structure-condition validators.
//! - [`assembly`]: the per-time-step linear system of the weak form, plus
//!   discrete diagnostics (interface flux jump, energy functional, totals).
//! - [`linsolve`]: block-Jacobi preconditioned BiCGStab on CSR matrices.
//! - [`stepper`]: backward-Euler time marching with semi-implicit or Picard
//!   treatment of the nonlinearity, full runs and manufactured-solution
//!   convergence studies.
//! - [`pencil`]: characteristic determinant of the corner transmission
//!   pencil, root search in the critical strip, regularity verdicts.
//! - [`appio`]: configuration, climate/material tables, VTK and CSV output.
//!
//! Data-parallel loops (element assembly, matrix-vector products, parameter
//! sweeps) go through [`exec::Exec`]. With the default `parallel` feature
//! they run on rayon; without it every policy falls back to sequential
//! iteration. Results do not depend on the policy: parallel work is only
//! ever a map whose outputs are reduced in a fixed order.

pub mod appio;
pub mod assembly;
pub mod domain;
pub mod exec;
pub mod linsolve;
pub mod materials;
pub mod pencil;
pub mod stepper;

pub use exec::Exec;
