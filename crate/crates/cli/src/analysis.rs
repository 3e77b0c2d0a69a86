//! `nli analyze`: per-channel NLI of one link, optionally next to the
//! numerical reference.

use std::path::Path;
use std::str::FromStr;

use nli_core::engine::{g_nli_total, osnr_nl, CorrectionCoefficients, EngineSwitches};
use nli_core::model::NliRow;
use nli_core::{ingest_link_config, Link};
use nli_oracle::gn::{ISLAND_TOLERANCE, SQUARE_TOLERANCE};
use nli_oracle::{gn_total, Domain};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{num, opt_num, sha256_hex, write_all, TOOL_VERSION};

/// Which channels are evaluated as channel under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutSelection {
    #[default]
    All,
    /// The link's own CUT (from the config, `"center"` by default).
    Config,
    Index(usize),
}

impl FromStr for CutSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(CutSelection::All),
            "config" => Ok(CutSelection::Config),
            _ => s.parse().map(CutSelection::Index).map_err(|_| format!("`{s}` is not a channel index, `all` or `config`")),
        }
    }
}

impl std::fmt::Display for CutSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CutSelection::All => f.write_str("all"),
            CutSelection::Config => f.write_str("config"),
            CutSelection::Index(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleChoice {
    #[default]
    None,
    Square,
    Island,
}

impl OracleChoice {
    pub fn domain(self) -> Option<(Domain, f64)> {
        match self {
            OracleChoice::None => None,
            OracleChoice::Square => Some((Domain::Square, SQUARE_TOLERANCE)),
            OracleChoice::Island => Some((Domain::Island, ISLAND_TOLERANCE)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeRequest {
    pub config_text: String,
    pub cut: CutSelection,
    pub switches: EngineSwitches,
    pub coefficients: CorrectionCoefficients,
    pub oracle: OracleChoice,
    pub strict: bool,
}

/// Rendered output of one run; nothing is on disk yet.
#[derive(Debug, Clone)]
pub struct AnalysisFiles {
    pub rows: Vec<AnalysisRow>,
    pub csv: String,
    pub manifest: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisRow {
    pub nli: NliRow,
    /// Quadrature total and whether every triple converged.
    pub oracle: Option<(f64, bool)>,
}

pub const CSV_NAME: &str = "nli.csv";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_sha256: String,
    coefficients_sha256: String,
    switches: &'a EngineSwitches,
    cut: String,
    oracle: OracleChoice,
    seed: Option<u64>,
    outputs: Vec<(&'static str, String)>,
    warnings: &'a [String],
}

fn push_unique(list: &mut Vec<String>, w: String) {
    if !list.contains(&w) {
        list.push(w);
    }
}

fn evaluate(link: &Link, cut: usize, req: &AnalyzeRequest) -> Result<(AnalysisRow, Vec<String>), CliError> {
    let l = link.with_cut(cut)?;
    let (mut nli, mut warnings) = g_nli_total(&l, &req.switches, Some(&req.coefficients))?;
    nli.osnr_nl_db = osnr_nl(&l, None, nli.g_total).ok();
    let oracle = req.oracle.domain().map(|(domain, tol)| {
        let t = gn_total(&l, nli.f_cut, domain, tol);
        if t.unconverged > 0 {
            warnings.push(format!("channel {cut}: {} oracle integrals missed their tolerance", t.unconverged));
        }
        (t.total(), t.unconverged == 0)
    });
    Ok((AnalysisRow { nli, oracle }, warnings))
}

fn render_csv(rows: &[AnalysisRow], with_oracle: bool) -> String {
    let mut out = String::from("channel,f_cut_thz,g_sci_w_hz,g_xci_w_hz,g_mci_w_hz,g_coh_w_hz,g_total_w_hz,osnr_nl_db");
    if with_oracle {
        out.push_str(",oracle_g_w_hz,oracle_err_db");
    }
    out.push('\n');
    for r in rows {
        let n = &r.nli;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            n.channel,
            n.f_cut / 1e12,
            num(n.g_sci),
            num(n.g_xci),
            num(n.g_mci),
            num(n.g_coherence),
            num(n.g_total),
            opt_num(n.osnr_nl_db)
        ));
        if let Some((g, _)) = r.oracle {
            let err = (g > 0.0 && n.g_total > 0.0).then(|| 10.0 * (n.g_total / g).log10());
            out.push_str(&format!(",{},{}", num(g), opt_num(err)));
        }
        out.push('\n');
    }
    out
}

/// Evaluates the request. Config errors and, under `strict`, model warnings
/// are returned before anything is rendered.
pub fn run_analysis(req: &AnalyzeRequest) -> Result<AnalysisFiles, CliError> {
    let link = ingest_link_config(&req.config_text)?;
    if link.comb.is_empty() {
        return Err(CliError::Config("the comb has no channels".into()));
    }
    let cuts: Vec<usize> = match req.cut {
        CutSelection::All => (0..link.n_channels()).collect(),
        CutSelection::Config => vec![link.cut_index],
        CutSelection::Index(i) if i < link.n_channels() => vec![i],
        CutSelection::Index(i) => {
            return Err(CliError::Config(format!("--cut {i} is out of range for {} channels", link.n_channels())))
        }
    };
    let evaluated = cuts.par_iter().map(|&c| evaluate(&link, c, req)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(evaluated.len());
    let mut warnings = Vec::new();
    for (row, ws) in evaluated {
        rows.push(row);
        for w in ws {
            push_unique(&mut warnings, w);
        }
    }
    if req.strict && !warnings.is_empty() {
        return Err(CliError::Strict(warnings));
    }
    let csv = render_csv(&rows, req.oracle != OracleChoice::None);
    let manifest = Manifest {
        tool: "nli",
        version: TOOL_VERSION,
        command: "analyze",
        config_sha256: sha256_hex(req.config_text.as_bytes()),
        coefficients_sha256: sha256_hex(req.coefficients.to_text().as_bytes()),
        switches: &req.switches,
        cut: req.cut.to_string(),
        oracle: req.oracle,
        seed: None,
        outputs: vec![(CSV_NAME, sha256_hex(csv.as_bytes()))],
        warnings: &warnings,
    };
    let manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    Ok(AnalysisFiles { rows, csv, manifest, warnings })
}

/// Runs the analysis and writes `nli.csv` and `manifest.json` into `out`.
pub fn run_analysis_to_dir(req: &AnalyzeRequest, out: &Path) -> Result<AnalysisFiles, CliError> {
    let files = run_analysis(req)?;
    write_all(
        out,
        &[(CSV_NAME.to_string(), files.csv.clone().into_bytes()), (MANIFEST_NAME.to_string(), files.manifest.clone().into_bytes())],
    )?;
    Ok(files)
}
