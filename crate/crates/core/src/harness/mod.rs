//! Experiment orchestration and file formats: phase-transition sweeps, the
//! MRI benchmark, grayscale image IO, plot data and TOML configuration.

mod benchmark;
mod image_io;
mod phantom;
mod phase;
mod plot;

pub use benchmark::{benchmark_csv, benchmark_table, finite_or_label, mask_for, mask_seed, run_mri_benchmark, BenchmarkRow};
pub use image_io::{decode_pgm, decode_png, encode_pgm, encode_png, read_image, write_image, Image};
pub use phantom::{piecewise_smooth, shepp_logan};
pub use phase::{
    input_hash, patch_signals, point_seed, run_phase_transition, run_phase_transition_with, Arm, DictSource,
    ExperimentRecord, PhasePoint, PhaseTransitionConfig, SparseSignalSpec, WallClock,
};
pub use plot::{emit_plot_data, parse_phase_csv, phase_csv, phase_svg, PhaseRow, PHASE_CSV_HEADER};

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Parses a TOML file into a configuration type; unknown keys and type
/// mismatches are configuration errors.
pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
