//! Polar-code based 1-out-of-2 oblivious transfer over the BI-AWGN channel.
//!
//! Indices are 0-based throughout the library; reports and the wire format
//! convert to 1-based indices at the boundary.

pub mod aut;
pub mod channel;
pub mod construct;
pub mod error;
pub mod optimize;
pub mod polar;
pub mod privacy;
pub mod proto;
pub mod reliability;
pub mod rng;
pub mod scdec;

pub use aut::{BitPermutation, IndexPermutation};
pub use channel::ChannelParams;
pub use construct::{GoodBadSets, HalfSplit, MiProfile, RelabelMap};
pub use error::{Error, Result};
pub use optimize::{OtSelection, Pairing, SelectionFile};
pub use polar::{BitMatrix, PolarTransform};
pub use privacy::{HashSeed, KeyBudget};
pub use proto::{SessionConfig, SessionPlan, SplitRule};
pub use reliability::{CpQuery, McOutcome, ReliabilityQuery};
pub use rng::SplitMix64;
pub use scdec::{DecodeResult, FrozenSpec};
