//! Exact finite-space engine for enlargement of filtrations: Azéma
//! supermartingales, the optional decomposition, the jump-to-zero time `η`,
//! initial enlargement by a finite signal and NA1 checks.

pub mod calculus;
pub mod error;
#[doc(hidden)]
pub mod fixtures;
pub mod gmarket;
pub mod identities;
pub mod initial;
pub mod market;
pub mod martingale;
pub mod na1;
pub mod process;
pub mod progressive;
pub mod random;
pub mod rational;
pub mod space;

pub use error::{Error, Result};
pub use rational::Q;
