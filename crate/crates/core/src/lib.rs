//! Numerical Krichever-Novikov algebras on genus 0 and 1 and their q-deformation.
//!
//! Basis elements are Laurent expansions at the two marked points; structure
//! constants, cocycles and the deformed bracket are residues of products of
//! those expansions.

pub mod algebra;
pub mod basis;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod index;
pub mod numfmt;
pub mod qcalc;
pub mod series;
pub mod tables;
pub mod verify;

pub use config::{ConfigLayer, OutputFormat, RunConfig};
pub use tables::{cmd_expand_basis, cmd_table, TableKind};
pub use verify::{cmd_verify, CheckStatus, Suite, VerificationReport};
pub use basis::{BasisElement, BasisFamily, IndexSet, Point, SurfaceSpec};
pub use elliptic::{Lattice, SigmaEvaluator};
pub use error::{KnError, Result};
pub use index::HalfInt;
pub use qcalc::DeformationParams;
pub use series::{LaurentSeries, Tolerance};
