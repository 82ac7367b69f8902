//! Flat CSV and JSON records for rates, thresholds, sweeps and checks.
//!
//! CSV floats are written with 17 significant digits, JSON floats in
//! shortest round-trip form; both parse back to the same bits.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{Bound, RateBreakdown, SecurityBudget};
use crate::error::{QkdError, Result};
use crate::protocol::{Family, PeKind, ProtocolSpec};

/// A record with a fixed CSV column layout.
pub trait Record: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];

    /// Cells in `HEADER` order.
    fn cells(&self) -> Vec<String>;
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn tag<S: Serialize>(x: &S) -> String {
    match serde_json::to_value(x) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn io_error(e: impl std::fmt::Display) -> QkdError {
    QkdError::Io(e.to_string())
}

pub fn write_csv<R: Record, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::HEADER).map_err(io_error)?;
    for r in rows {
        let cells = r.cells();
        debug_assert_eq!(cells.len(), R::HEADER.len());
        w.write_record(&cells).map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn read_csv<R: Record, I: Read>(input: I) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(io_error)?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(QkdError::Io(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(io_error)).collect()
}

pub fn to_csv_string<R: Record>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(io_error)
}

pub fn write_json<R: Record, W: Write>(rows: &[R], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(io_error)?;
    out.write_all(b"\n").map_err(io_error)
}

pub fn read_json<R: Record, I: Read>(input: I) -> Result<Vec<R>> {
    serde_json::from_reader(input).map_err(io_error)
}

pub fn to_json_string<R: Record>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_json(rows, &mut buf)?;
    String::from_utf8(buf).map_err(io_error)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

pub fn write_rows<R: Record, W: Write>(rows: &[R], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

/// One evaluated key rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub family: Family,
    pub dimension: usize,
    pub pe_scheme: PeKind,
    pub bound: Bound,
    pub q_err: f64,
    pub n_total: f64,
    pub rate: f64,
    pub rate_clamped: f64,
    pub n: f64,
    pub m: f64,
    pub q_key: f64,
    pub xi: f64,
    pub q_eff: f64,
    pub q_eff_clamped: bool,
    pub entropy_term: f64,
    pub entropy_clamped: bool,
    pub delta: f64,
    pub leak: f64,
    pub pa_term: f64,
    pub eps_total: f64,
    pub eps_ec: f64,
    pub eps_pe: f64,
    pub eps_pa: f64,
    pub eps_bar: f64,
}

impl RateRecord {
    pub fn new(protocol: &ProtocolSpec, b: &RateBreakdown<f64>) -> Self {
        Self {
            family: protocol.family,
            dimension: protocol.dimension,
            pe_scheme: protocol.pe_scheme,
            bound: b.bound,
            q_err: b.q_err,
            n_total: b.n_total,
            rate: b.rate,
            rate_clamped: b.rate.max(0.0),
            n: b.n,
            m: b.m,
            q_key: b.q_key,
            xi: b.xi,
            q_eff: b.q_eff,
            q_eff_clamped: b.q_eff_clamped,
            entropy_term: b.entropy_term,
            entropy_clamped: b.entropy_clamped,
            delta: b.delta,
            leak: b.leak,
            pa_term: b.pa_term,
            eps_total: b.budget.eps_total,
            eps_ec: b.budget.eps_ec,
            eps_pe: b.budget.eps_pe,
            eps_pa: b.budget.eps_pa,
            eps_bar: b.budget.eps_bar,
        }
    }

    pub fn breakdown(&self) -> RateBreakdown<f64> {
        RateBreakdown {
            bound: self.bound,
            rate: self.rate,
            n_total: self.n_total,
            n: self.n,
            m: self.m,
            q_key: self.q_key,
            q_err: self.q_err,
            xi: self.xi,
            q_eff: self.q_eff,
            q_eff_clamped: self.q_eff_clamped,
            entropy_term: self.entropy_term,
            entropy_clamped: self.entropy_clamped,
            delta: self.delta,
            leak: self.leak,
            pa_term: self.pa_term,
            budget: SecurityBudget {
                eps_total: self.eps_total,
                eps_ec: self.eps_ec,
                eps_pe: self.eps_pe,
                eps_pa: self.eps_pa,
                eps_bar: self.eps_bar,
            },
        }
    }
}

impl Record for RateRecord {
    const HEADER: &'static [&'static str] = &[
        "family",
        "dimension",
        "pe_scheme",
        "bound",
        "q_err",
        "n_total",
        "rate",
        "rate_clamped",
        "n",
        "m",
        "q_key",
        "xi",
        "q_eff",
        "q_eff_clamped",
        "entropy_term",
        "entropy_clamped",
        "delta",
        "leak",
        "pa_term",
        "eps_total",
        "eps_ec",
        "eps_pe",
        "eps_pa",
        "eps_bar",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            tag(&self.family),
            self.dimension.to_string(),
            tag(&self.pe_scheme),
            tag(&self.bound),
            num(self.q_err),
            num(self.n_total),
            num(self.rate),
            num(self.rate_clamped),
            num(self.n),
            num(self.m),
            num(self.q_key),
            num(self.xi),
            num(self.q_eff),
            self.q_eff_clamped.to_string(),
            num(self.entropy_term),
            self.entropy_clamped.to_string(),
            num(self.delta),
            num(self.leak),
            num(self.pa_term),
            num(self.eps_total),
            num(self.eps_ec),
            num(self.eps_pe),
            num(self.eps_pa),
            num(self.eps_bar),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub family: Family,
    pub dimension: usize,
    pub pe_scheme: PeKind,
    pub bound: Bound,
    pub q_err: f64,
    pub n0: f64,
    pub n0_scaled: f64,
}

impl Record for ThresholdRecord {
    const HEADER: &'static [&'static str] = &[
        "family",
        "dimension",
        "pe_scheme",
        "bound",
        "q_err",
        "n0",
        "n0_scaled",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            tag(&self.family),
            self.dimension.to_string(),
            tag(&self.pe_scheme),
            tag(&self.bound),
            num(self.q_err),
            num(self.n0),
            num(self.n0_scaled),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family: Family,
    pub dimension: usize,
    pub pe_scheme: PeKind,
    pub bound: Bound,
    pub q_err: f64,
    pub n_total: f64,
    /// `N·log₂d`.
    pub n_scaled: f64,
    pub rate: f64,
    pub rate_clamped: f64,
    pub q_key: f64,
}

impl Record for SweepRecord {
    const HEADER: &'static [&'static str] = &[
        "family",
        "dimension",
        "pe_scheme",
        "bound",
        "q_err",
        "n_total",
        "n_scaled",
        "rate",
        "rate_clamped",
        "q_key",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            tag(&self.family),
            self.dimension.to_string(),
            tag(&self.pe_scheme),
            tag(&self.bound),
            num(self.q_err),
            num(self.n_total),
            num(self.n_scaled),
            num(self.rate),
            num(self.rate_clamped),
            num(self.q_key),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparePeRecord {
    pub family: Family,
    pub dimension: usize,
    pub bound: Bound,
    pub q_err: f64,
    pub n_total: f64,
    pub rate_ipovm: f64,
    pub rate_cpovm: f64,
    /// `100·(rate_cpovm/rate_ipovm - 1)`, present when both rates are
    /// positive.
    pub improvement_pct: Option<f64>,
}

impl Record for ComparePeRecord {
    const HEADER: &'static [&'static str] = &[
        "family",
        "dimension",
        "bound",
        "q_err",
        "n_total",
        "rate_ipovm",
        "rate_cpovm",
        "improvement_pct",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            tag(&self.family),
            self.dimension.to_string(),
            tag(&self.bound),
            num(self.q_err),
            num(self.n_total),
            num(self.rate_ipovm),
            num(self.rate_cpovm),
            self.improvement_pct.map(num).unwrap_or_default(),
        ]
    }
}

/// Outcome of one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl Record for CheckRecord {
    const HEADER: &'static [&'static str] =
        &["check", "passed", "max_residual", "tolerance", "cases"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.check.clone(),
            self.passed.to_string(),
            num(self.max_residual),
            num(self.tolerance),
            self.cases.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_row() -> ThresholdRecord {
        ThresholdRecord {
            family: Family::DPlusOneBases,
            dimension: 3,
            pe_scheme: PeKind::Cpovm,
            bound: Bound::MinEntropy,
            q_err: 0.1 + 0.2,
            n0: 12345.678901234567,
            n0_scaled: 12345.678901234567 * 3f64.log2(),
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let s = to_csv_string::<ThresholdRecord>(&[]).unwrap();
        assert_eq!(s, "family,dimension,pe_scheme,bound,q_err,n0,n0_scaled\n");
        assert!(read_csv::<ThresholdRecord, _>(s.as_bytes())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn csv_layout() {
        let s = to_csv_string(&[threshold_row()]).unwrap();
        let line = s.lines().nth(1).unwrap();
        assert!(line.starts_with("d-plus-one-bases,3,cpovm,min-entropy,3.0000000000000004e-1,"));
        assert_eq!(line.split(',').count(), ThresholdRecord::HEADER.len());
    }

    #[test]
    fn round_trips() {
        let rows = vec![threshold_row(), threshold_row()];
        let back: Vec<ThresholdRecord> =
            read_csv(to_csv_string(&rows).unwrap().as_bytes()).unwrap();
        assert_eq!(back, rows);
        let back: Vec<ThresholdRecord> =
            read_json(to_json_string(&rows).unwrap().as_bytes()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn missing_improvement_round_trips() {
        let rows = vec![ComparePeRecord {
            family: Family::TwoBases,
            dimension: 2,
            bound: Bound::VonNeumann,
            q_err: 0.05,
            n_total: 1e3,
            rate_ipovm: -0.5,
            rate_cpovm: -0.25,
            improvement_pct: None,
        }];
        let csv = to_csv_string(&rows).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
        let back: Vec<ComparePeRecord> = read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back, rows);
        let back: Vec<ComparePeRecord> =
            read_json(to_json_string(&rows).unwrap().as_bytes()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let s = to_csv_string(&[threshold_row()]).unwrap();
        assert!(read_csv::<SweepRecord, _>(s.as_bytes()).is_err());
    }

    #[test]
    fn json_keys_follow_declaration_order() {
        let s = to_json_string(&[threshold_row()]).unwrap();
        let keys: Vec<usize> = ThresholdRecord::HEADER
            .iter()
            .map(|k| s.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
