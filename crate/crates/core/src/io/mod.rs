//! Dataset, model and report persistence.

mod csv;
mod dataset;
mod fs;
mod model_file;
mod report;

pub use csv::{read_dataset, read_truth, write_dataset, write_psd, write_truth};
pub use dataset::Dataset;
pub use fs::{read_text, sidecar, write_atomic, write_json};
pub use model_file::{load_model, save_model, GroupEntry, ModelFile, MODEL_FORMAT, MODEL_VERSION};
pub use report::{percent, render_report, scorecards_csv, write_scorecards, ReportLayout, ScoreCard};
