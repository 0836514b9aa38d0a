//! A symbolic workbench for operads, bimodules and infinitesimal bimodules
//! over finite sets.
//!
//! Every "space" is a finite set of named atoms, every "continuous map" a
//! function, and every construction — free (i)bimodules on decorated trees,
//! colored operads, pushouts, coskeleta, matching objects, internal hom,
//! Boardman–Vogt resolutions and discretized fibrant coresolutions — is
//! computed exactly and its algebraic laws brute-force verified at desk
//! scale. The unit interval is modeled by the finite chain `0, 1/N, …, 1`.

pub mod bimodules;
pub mod colored;
pub mod error;
pub mod inj;
pub mod monoidal;
pub mod operads;
pub mod perm;
pub mod report;
pub mod resolutions;
pub mod seq;
pub mod sexp;
pub mod space;
pub mod trees;

pub use error::WbError;
pub use report::LawReport;
