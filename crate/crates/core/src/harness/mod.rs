//! Experiment runner: configuration, sweep execution and result files.

mod config;
mod run;
mod sim;

pub use config::{
    CombSection, DspSection, ExperimentConfig, FrameSection, ImpairmentSection, Mode, PlanSection, ReceiverSection, SweepPoint,
    SweepSection,
};
pub use run::{
    batch_stream, emit_results, load_results, parse_csv, parse_json_lines, run_experiment, write_results, OutputFormat, ResultRow,
    ResultTable, RunOptions, COLUMNS,
};
pub use sim::{simulate, LinkSetup, Realization, DEFAULT_LINEWIDTH};
