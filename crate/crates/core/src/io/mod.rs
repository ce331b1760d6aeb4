//! Configuration files, initial-condition presets, output formats and the
//! simulation driver.

mod config;
mod diagnostics;
mod init;
mod run;
mod snapshot;

pub use config::{
    load_config, parse_config, DomainConfig, OutputConfig, RunConfig, OUTPUT_ROOT_ENV,
};
pub use diagnostics::{
    format_row, header_line, parse_row, read_diagnostics, write_diagnostics, DiagnosticsWriter,
};
pub use init::{InitPreset, DEFAULT_Z_LEVEL};
pub use run::{simulate, RunSummary};
pub use snapshot::{
    read_state, sibling_paths, snapshot_path, write_state, SnapshotFile, SnapshotFormat,
    SNAPSHOT_VERSION,
};
