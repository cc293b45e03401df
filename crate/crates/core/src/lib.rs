//! Algebraic Coulomb Green operator toolkit.
//!
//! The symbolic layer ([`coeff`], [`wick`], [`hydrogenic`]) manipulates
//! normal-ordered expressions in the four oscillator modes of the
//! Kustaanheimo–Stiefel representation of hydrogen with exact coefficients.
//! The numeric layer ([`su11`], [`fock`], [`mcgf`], [`vdw`], [`quad`])
//! disentangles the Green-operator exponential, checks it against truncated
//! Fock-space linear algebra, and assembles the dispersion coefficient of two
//! ground-state hydrogen atoms.

pub mod coeff;
pub mod error;
pub mod fock;
pub mod hydrogenic;
pub mod mcgf;
pub mod quad;
pub mod su11;
pub mod verify;
pub mod vdw;
pub mod wick;

pub use coeff::{Coefficient, GaussRational, Symbol, SymbolValues};
pub use error::{Error, Result};
pub use fock::FockTruncation;
pub use mcgf::{ConvolutionPlan, ParticleSpec, ProductExpr};
pub use su11::{Branch, DisentangledExp, ExponentFactor};
pub use vdw::{C6Result, VdwConfig};
pub use wick::{KetState, ModeOp, NormalMonomial, OperatorExpr};
