//! Independent brute-force oracles used by the test suites. Everything in
//! this crate is deliberately written from first principles, on different
//! algorithms than the production paths it checks, and stays out of the
//! shipped library.

pub mod assignment;
pub mod fps;
pub mod rects;
pub mod transport;
