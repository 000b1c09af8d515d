//! Sum-of-squares and sos-convexity certification with exact rational certificates.

pub mod convexcert;
pub mod discover;
pub mod grambasis;
pub mod polycore;
pub mod sosprog;
