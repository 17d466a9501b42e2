//! File formats, structure parsers and the command implementations behind
//! the `qcph` binary.

pub mod cif;
pub mod commands;
pub mod config;
pub mod formats;
pub mod native;

pub use cif::{parse_cif, CifError};
pub use commands::{CommandError, InputFormat};
pub use config::RunConfig;
pub use native::{parse_native, serialize_native, NativeError};
