//! Self-similar blow-up profiles for `u_t = (u^m)_xx + |x|^sigma u^m`.

pub mod acceptance;
pub mod analysis;
pub mod error;
pub mod integrate;
pub mod model;
pub mod phase;
pub mod scaling;
pub mod shooting;

pub use error::{Error, Result};
pub use model::{Params, Profile, ProfileState};
