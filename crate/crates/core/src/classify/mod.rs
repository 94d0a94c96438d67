//! Orchestration: system files, configuration, the analysis pipeline and reports.

mod analyze;
mod config;
mod corpus;
mod fixtures;
mod report;
mod system;

pub use analyze::{
    analyze, analyze_field, AnalysisReport, AngleRecord, BranchRecord, CofactorRecord, CurveRecord, DeterminingRecord,
    EtaValue, Evidence, IntegralRow, MonodromyRecord, Relation, ReturnRow, RootRecord, Rule, Stability, Supports,
    SystemEcho, TermRecord, Verdict, VerdictKind, WeightReport, NUMERIC_ETA1_LABEL, SCHEMA_VERSION,
};
pub use config::{AnalysisConfig, ConfigError, ConfigOverrides, Rho0Grid};
pub use corpus::{corpus_names, corpus_system, CORPUS};
pub use fixtures::{format_table, run_corpus, Check, FixtureError, FixtureOutcome};
pub use report::{emit_report, to_json_value, ReportFormat};
pub use system::{SystemFile, SystemFileError, Terms};
