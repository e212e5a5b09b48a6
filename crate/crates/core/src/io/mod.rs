//! Config files, result tables, field snapshots and presets.

pub mod config;
pub mod presets;
pub mod snapshot;
pub mod table;

pub use config::{RunConfig, SnapshotFormat};
pub use presets::{Pipeline, Preset};
pub use snapshot::{read_any, read_binary, read_text, write_binary, write_phase, write_text, Snapshot};
pub use table::{read_scan_csv, write_scan_csv, CsvRow};
