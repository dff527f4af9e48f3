//! Conserved surface layer integrals for causal variational principles on the
//! 2D lattice model `Z^2 x S^1`.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`] lattice points, windows, regions and the Lagrangian stencil
//! * [`lagrangian`] the lattice Lagrangian, its fiber derivatives and `ell`
//! * [`jets`] jets, dual jets, jet derivatives and the operators `Delta_l`
//! * [`linear`] linearized solutions and Green's operators
//! * [`perturb`] the perturbation hierarchy and the two `I_{m,(p)}` evaluators
//! * [`slayer`] the surface layer integrals `I_1`, `sigma`, `(.,.)` and `I_m`
//!
//! All sums run in a fixed lexicographic order, so results are bit-reproducible.

pub mod error;
pub mod jets;
pub mod lagrangian;
pub mod linear;
pub mod perturb;
pub mod series;
pub mod slayer;
pub mod space;

pub use error::{Error, Result};
pub use jets::{DualJet, DualValue, Field, Jet, PointDeriv, Slot};
pub use lagrangian::ModelParams;
pub use linear::{GreensChoice, KernelModifier, Profile, ScalarKind, VectorKind};
pub use perturb::{BiPoly, Hierarchy};
pub use slayer::{SlayerReport, SliceRow, SurfaceVolume, SymmBilinear};
pub use space::{LatticePoint, Region, Site, StencilOffset, Window};
