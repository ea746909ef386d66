//! Registry-free discovery of web services hosted on mobile peers.
//!
//! Services are described by module specification advertisements that embed
//! their WSDL, published with a lifetime to rendezvous peers, cached and
//! indexed there, and found by ranked keyword search flooded across the
//! rendezvous overlay. [`simnet`] runs the whole protocol in a deterministic
//! discrete-event simulation with churn.

pub mod adverts;
pub mod cache;
pub mod groups;
pub mod index;
pub mod overlay;
pub mod scenario;
pub mod simnet;

/// Simulated time in milliseconds.
pub type Millis = u64;
