//! Periodic spectra of Zakharov–Shabat operators with band-limited
//! potentials, NLS action variables, NLS hierarchy Hamiltonians and the
//! two-sided estimates linking them.
//!
//! ```
//! use birkhoff::prelude::*;
//!
//! let phi = FourierPotential::constant(0.5);
//! let ev = DiscriminantEvaluator::new(phi.clone());
//! let sp = locate_spectrum(&ev, 8).unwrap();
//! assert!((sp.entry(0).unwrap().gamma - 1.0).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod config;
pub mod discriminant;
pub mod error;
pub mod estimates;
pub mod family;
pub mod hierarchy;
pub mod lyapunov_schmidt;
pub mod potentials;
pub mod quadrature;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::actions::*;
    pub use crate::discriminant::*;
    pub use crate::error::{Error, Result};
    pub use crate::hierarchy::*;
    pub use crate::potentials::*;
    pub use crate::spectrum::*;
    pub use num_complex::Complex64;
}

// The guide's snippets run as doctests of these modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/discriminant.md")]
    mod discriminant {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/actions.md")]
    mod actions {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/estimates.md")]
    mod estimates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
