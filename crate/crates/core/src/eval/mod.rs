//! Sequence metrics, cross-validation and report writers.

mod cv;
mod metrics;
mod report;

pub use cv::{assign_folds, cross_validate, CvConfig, CvResult, EvalReport, SweepPoint};
pub use metrics::{diversity, displacement, ordered_pairs, pairs_f1, Displacement, Diversity, PairScore};
pub use report::{
    display_name, read_report_csv, read_sweep_csv, render_tables, write_report, write_sweep, ReportFiles, DISPLACEMENT_PLOT_CSV,
    DIVERSITY_PLOT_CSV, REPORT_CSV, REPORT_TXT, SWEEP_CSV, TIMINGS_CSV,
};
