//! Two-qubit entanglement, local filtering, and advantage-distillation key
//! agreement against individual attacks.
//!
//! - [`qlin`]: small dense complex linear algebra.
//! - [`states`]: two-qubit states, Bell-diagonal forms, purifications and
//!   Eve's conditional states.
//! - [`filter`]: local filtering to Bell-diagonal normal form.
//! - [`adsim`]: advantage distillation, Eve's measurements and error bounds.
//! - [`channel`]: qubit channels for prepare-and-measure schemes.
//! - [`random`]: seeded random instances.

pub mod adsim;
pub mod channel;
pub mod filter;
pub mod qlin;
pub mod random;
pub mod states;
