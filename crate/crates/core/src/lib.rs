//! Arithmetic kernel for multivariable (phi, Gamma)-modules over Lubin-Tate
//! style coefficient rings.

pub mod coeff;
pub mod embed;
pub mod error;
pub mod iwasawa;
pub mod json;
pub mod laurent;
pub mod mvring;
pub mod perfd;
pub mod phimod;
pub mod suites;
pub mod witt;

pub use error::{Error, Result};
