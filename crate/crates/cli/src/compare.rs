//! `nli compare`: closed form against the quadrature reference over a
//! directory of link configs.
//!
//! `ERR = 10 log10(G_closed / G_reference)` per system at the CUT center.
//! Systems whose reference integrals missed their tolerance are listed but
//! left out of the aggregate.

use std::fs;
use std::path::{Path, PathBuf};

use nli_core::engine::{g_nli_generic, g_nli_total, CorrectionCoefficients, EngineSwitches};
use nli_core::{ingest_link_config, FintMode, G0Convention, Link};
use nli_oracle::gn_total;
use rayon::prelude::*;

use crate::analysis::OracleChoice;
use crate::error::CliError;
use crate::output::{num, opt_num, read_text, write_all};

/// Which closed form is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ModelChoice {
    /// SCI + XCI + MCI over every triple's equivalent square, no corrections.
    #[default]
    Generic,
    /// The corrected total with the given switches.
    Corrected,
}

#[derive(Debug, Clone)]
pub struct CompareRequest {
    pub oracle: OracleChoice,
    pub model: ModelChoice,
    pub fint: FintMode,
    /// Used by [`ModelChoice::Corrected`] only.
    pub switches: EngineSwitches,
    pub coefficients: CorrectionCoefficients,
    /// Overrides the reference's default tolerance.
    pub rel_tol: Option<f64>,
}

impl Default for CompareRequest {
    fn default() -> Self {
        CompareRequest {
            oracle: OracleChoice::Island,
            model: ModelChoice::Generic,
            fint: FintMode::Dilog,
            switches: EngineSwitches::default(),
            coefficients: CorrectionCoefficients::default(),
            rel_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemResult {
    pub name: String,
    pub channels: usize,
    pub spans: usize,
    pub cut: usize,
    pub closed: [f64; 3],
    pub reference: [f64; 3],
    pub g_closed: f64,
    pub g_reference: f64,
    pub err_db: f64,
    pub converged: bool,
}

fn db_ratio(a: f64, b: f64) -> Option<f64> {
    (a > 0.0 && b > 0.0).then(|| 10.0 * (a / b).log10())
}

/// One system; `name` only labels the row.
pub fn compare_link(name: &str, link: &Link, req: &CompareRequest) -> Result<SystemResult, CliError> {
    let (domain, default_tol) = req
        .oracle
        .domain()
        .ok_or_else(|| CliError::Config("compare needs a reference: square or island".into()))?;
    let f = link.cut().center();
    let (closed, g_closed) = match req.model {
        ModelChoice::Generic => {
            let c = g_nli_generic(link, f, req.fint, G0Convention::default())?;
            ([c.sci, c.xci, c.mci], c.total())
        }
        ModelChoice::Corrected => {
            let sw = EngineSwitches { fint: req.fint, ..req.switches };
            let (row, _) = g_nli_total(link, &sw, Some(&req.coefficients))?;
            ([row.g_sci, row.g_xci, row.g_mci], row.g_total)
        }
    };
    let r = gn_total(link, f, domain, req.rel_tol.unwrap_or(default_tol));
    let err_db = db_ratio(g_closed, r.total()).unwrap_or(f64::NAN);
    Ok(SystemResult {
        name: name.to_string(),
        channels: link.n_channels(),
        spans: link.n_spans(),
        cut: link.cut_index,
        closed,
        reference: [r.sci, r.xci, r.mci],
        g_closed,
        g_reference: r.total(),
        err_db,
        converged: r.unconverged == 0 && err_db.is_finite(),
    })
}

/// All systems in parallel; results stay in input order.
pub fn compare_links(links: &[(String, Link)], req: &CompareRequest) -> Result<Vec<SystemResult>, CliError> {
    links.par_iter().map(|(name, link)| compare_link(name, link, req)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub count: usize,
    pub excluded: usize,
    pub mean_db: f64,
    /// Sample standard deviation; 0 for a single system.
    pub std_db: f64,
    pub min_db: f64,
    pub max_db: f64,
    pub max_abs_db: f64,
}

pub fn aggregate(results: &[SystemResult]) -> Aggregate {
    let errs: Vec<f64> = results.iter().filter(|r| r.converged).map(|r| r.err_db).collect();
    let excluded = results.len() - errs.len();
    if errs.is_empty() {
        return Aggregate { excluded, ..Aggregate::default() };
    }
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let var = if errs.len() > 1 { errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Aggregate {
        count: errs.len(),
        excluded,
        mean_db: mean,
        std_db: var.sqrt(),
        min_db: errs.iter().copied().fold(f64::INFINITY, f64::min),
        max_db: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        max_abs_db: errs.iter().map(|e| e.abs()).fold(0.0, f64::max),
    }
}

pub const HISTOGRAM_BIN_DB: f64 = 0.05;

/// `(lower edge, upper edge, count)` for every bin between the extremes.
pub fn histogram(results: &[SystemResult], bin_db: f64) -> Vec<(f64, f64, usize)> {
    let bins: Vec<i64> = results.iter().filter(|r| r.converged).map(|r| (r.err_db / bin_db).floor() as i64).collect();
    let (Some(&lo), Some(&hi)) = (bins.iter().min(), bins.iter().max()) else { return Vec::new() };
    (lo..=hi)
        .map(|b| (b as f64 * bin_db, (b + 1) as f64 * bin_db, bins.iter().filter(|&&x| x == b).count()))
        .collect()
}

pub fn render_rows(results: &[SystemResult]) -> String {
    let mut out = String::from(
        "system,channels,spans,cut,g_closed_w_hz,g_reference_w_hz,err_db,sci_err_db,xci_err_db,mci_err_db,converged\n",
    );
    for r in results {
        let parts: Vec<String> = (0..3).map(|i| opt_num(db_ratio(r.closed[i], r.reference[i]))).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.channels,
            r.spans,
            r.cut,
            num(r.g_closed),
            num(r.g_reference),
            if r.err_db.is_finite() { format!("{}", r.err_db) } else { String::new() },
            parts[0],
            parts[1],
            parts[2],
            u8::from(r.converged)
        ));
    }
    out
}

pub fn render_aggregate(a: &Aggregate) -> String {
    format!(
        "systems,excluded,mean_err_db,std_err_db,min_err_db,max_err_db,max_abs_err_db\n{},{},{},{},{},{},{}\n",
        a.count, a.excluded, a.mean_db, a.std_db, a.min_db, a.max_db, a.max_abs_db
    )
}

pub fn render_histogram(bins: &[(f64, f64, usize)]) -> String {
    let mut out = String::from("bin_low_db,bin_high_db,count\n");
    for (lo, hi, c) in bins {
        out.push_str(&format!("{lo:.2},{hi:.2},{c}\n"));
    }
    out
}

/// Link configs in `dir` (`*.toml`, sorted by file name).
pub fn load_configs(dir: &Path) -> Result<Vec<(String, Link)>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let link = ingest_link_config(&read_text(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, link))
        })
        .collect()
}

/// Sibling path `<stem>_<suffix>.csv` of `out`.
pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "summary".into());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Writes the per-system CSV to `out`, plus `<stem>_aggregate.csv` and
/// `<stem>_histogram.csv` beside it.
pub fn run_compare(input: &Path, out: &Path, req: &CompareRequest) -> Result<(Vec<SystemResult>, Aggregate), CliError> {
    let links = load_configs(input)?;
    let results = compare_links(&links, req)?;
    let agg = aggregate(&results);
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    write_all(
        dir,
        &[
            (name(out), render_rows(&results).into_bytes()),
            (name(&companion_path(out, "aggregate")), render_aggregate(&agg).into_bytes()),
            (name(&companion_path(out, "histogram")), render_histogram(&histogram(&results, HISTOGRAM_BIN_DB)).into_bytes()),
        ],
    )?;
    Ok((results, agg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(err: f64, converged: bool) -> SystemResult {
        SystemResult {
            name: String::new(),
            channels: 1,
            spans: 1,
            cut: 0,
            closed: [1.0; 3],
            reference: [1.0; 3],
            g_closed: 1.0,
            g_reference: 1.0,
            err_db: err,
            converged,
        }
    }

    #[test]
    fn aggregate_skips_unconverged() {
        let rs = [result(0.1, true), result(-0.3, true), result(9.0, false)];
        let a = aggregate(&rs);
        assert_eq!((a.count, a.excluded), (2, 1));
        assert!((a.mean_db + 0.1).abs() < 1e-15);
        assert!((a.std_db - 0.08f64.sqrt()).abs() < 1e-15);
        assert_eq!(a.max_abs_db, 0.3);
    }

    #[test]
    fn histogram_covers_range() {
        let rs = [result(0.01, true), result(0.12, true), result(0.13, true)];
        let h = histogram(&rs, 0.05);
        assert_eq!(h.iter().map(|b| b.2).collect::<Vec<_>>(), vec![1, 0, 2]);
        assert!(histogram(&[], 0.05).is_empty());
    }
}
