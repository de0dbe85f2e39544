//! Command-line front end for `modal-core`.

pub mod commands;
pub mod error;
pub mod fsutil;
pub mod plot;
pub mod preset;
pub mod table;
pub mod wav;
