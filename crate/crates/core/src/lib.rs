//! Privacy-preserving profile matching for opportunistic networks.
//!
//! A request is sealed under a key derived from the initiator's profile.
//! Anyone can screen it cheaply with the remainder vector; only users who
//! hold enough of the requested attributes can rebuild the key and open it.
//! `sim` runs whole protocols over a deterministic simulated network.
//!
//! The crate is `no_std` with `alloc`.

#![no_std]
extern crate alloc;

pub mod channel;
pub mod digest;
pub mod field;
pub mod geo;
pub mod matching;
pub mod profile;
pub mod protocol;
pub mod sim;

pub use digest::Digest;
