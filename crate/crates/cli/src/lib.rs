//! Library side of the `nli` command: link analysis runs, randomized test
//! systems and batch comparisons against the numerical reference.

pub mod analysis;
pub mod compare;
pub mod error;
pub mod output;
pub mod testset;

pub use analysis::{run_analysis, AnalysisFiles, AnalyzeRequest, CutSelection, OracleChoice};
pub use compare::{compare_links, run_compare, Aggregate, CompareRequest, ModelChoice, SystemResult};
pub use error::CliError;
pub use testset::{generate_testset, CutPolicy, GeneratedSystem, TestSystemSpec};
