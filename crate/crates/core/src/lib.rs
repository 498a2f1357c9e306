//! Product and staircase codes with BCH components, the soft-aided decoder
//! family built on bounded-distance decoding, and density-evolution tooling
//! to derive combining tables and thresholds.

pub mod bch;
pub mod channel;
pub mod codes;
pub mod de;
pub mod decoder;
pub mod error;
pub mod gf;
pub mod lut;
pub mod pc;
pub mod rng;
pub mod scc;
pub mod sim;
pub mod soft;

pub use bch::{BchCode, DecodeStatus, TernaryWord};
pub use error::{Error, Result};
