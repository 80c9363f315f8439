//! Recommendation pages, pipeline orchestration and synthetic data.

pub mod page;
pub mod pipeline;
pub mod synth;

pub use page::{generate_page, page_file_name, PageOptions, PageSpec};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutcome};
pub use synth::{generate_synthetic, SynthConfig, SynthData};
