#![allow(dead_code)]

//! Shared test oracles, independent of the production simulation path.

pub mod oracle;
