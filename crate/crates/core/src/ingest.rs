//! Loading case records from CSV with per-row validation.
//!
//! A malformed row is rejected on its own and the load carries on; the
//! [`IngestReport`] lists every rejected row with its line number and the
//! offending field. Only a missing header column aborts the load.

use crate::model::{CaseRecord, Urgency};
use chrono::{DateTime, NaiveDate, Utc};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::cell::RefCell;
use std::io::{Read, Write};
use std::rc::Rc;
use thiserror::Error;

/// Column names, in the order written by [`write_cases`].
pub const CSV_COLUMNS: [&str; 21] = [
    "case_id",
    "patient_id",
    "surgeon_id",
    "anesth_id",
    "date",
    "urgency",
    "procedures",
    "prbc_units",
    "ffp_units",
    "plt_units",
    "cryo_units",
    "cell_salvage_ml",
    "preop_hgb",
    "postop_hgb",
    "drg_weight",
    "death",
    "vent_over_24h",
    "ecmo",
    "b12",
    "amicar",
    "txa",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing required column '{0}'")]
    MissingColumn(&'static str),
    #[error("unreadable header: {0}")]
    Header(#[source] csv::Error),
    #[error("duplicate case_id '{0}'")]
    DuplicateCaseId(String),
    #[error("case {case_id}: {reason}")]
    InvalidRecord { case_id: String, reason: String },
    #[error("write failed: {0}")]
    Write(#[from] csv::Error),
}

/// An immutable set of cases with unique ids.
#[derive(Debug, Clone)]
pub struct CaseSet {
    cases: Vec<CaseRecord>,
    index: HashMap<String, usize>,
    source: String,
    loaded_at: DateTime<Utc>,
}

impl CaseSet {
    /// Builds a set from already-parsed records, checking every record
    /// invariant and id uniqueness.
    pub fn new(cases: Vec<CaseRecord>, source: impl Into<String>) -> Result<Self, IngestError> {
        let mut index = HashMap::with_capacity(cases.len());
        for (i, case) in cases.iter().enumerate() {
            case.check().map_err(|reason| IngestError::InvalidRecord {
                case_id: case.case_id.clone(),
                reason,
            })?;
            if index.insert(case.case_id.clone(), i).is_some() {
                return Err(IngestError::DuplicateCaseId(case.case_id.clone()));
            }
        }
        Ok(Self {
            cases,
            index,
            source: source.into(),
            loaded_at: Utc::now(),
        })
    }

    pub fn empty(source: impl Into<String>) -> Self {
        Self {
            cases: Vec::new(),
            index: HashMap::new(),
            source: source.into(),
            loaded_at: Utc::now(),
        }
    }

    pub fn cases(&self) -> &[CaseRecord] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn get(&self, case_id: &str) -> Option<&CaseRecord> {
        self.index.get(case_id).map(|&i| &self.cases[i])
    }

    pub fn position(&self, case_id: &str) -> Option<usize> {
        self.index.get(case_id).copied()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn loaded_at(&self) -> DateTime<Utc> {
        self.loaded_at
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: u64,
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub rejections: Vec<Rejection>,
}

struct Columns([usize; 21]);

impl Columns {
    fn resolve(headers: &csv::StringRecord) -> Result<Self, IngestError> {
        let mut idx = [0usize; 21];
        for (slot, name) in idx.iter_mut().zip(CSV_COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or(IngestError::MissingColumn(name))?;
        }
        Ok(Self(idx))
    }
}

type FieldError = (&'static str, String);

struct Row<'a> {
    record: &'a csv::StringRecord,
    columns: &'a Columns,
}

impl Row<'_> {
    fn raw(&self, col: usize) -> Result<&str, FieldError> {
        let name = CSV_COLUMNS[col];
        self.record
            .get(self.columns.0[col])
            .map(str::trim)
            .ok_or((name, "missing field".to_string()))
    }

    fn text(&self, col: usize) -> Result<String, FieldError> {
        let v = self.raw(col)?;
        if v.is_empty() {
            return Err((CSV_COLUMNS[col], "empty value".into()));
        }
        Ok(v.to_string())
    }

    fn units(&self, col: usize) -> Result<u32, FieldError> {
        let name = CSV_COLUMNS[col];
        let v = self.raw(col)?;
        let n: i64 = v
            .parse()
            .map_err(|_| (name, format!("'{v}' is not an integer")))?;
        if n < 0 {
            return Err((name, "negative unit count".into()));
        }
        u32::try_from(n).map_err(|_| (name, "unit count out of range".into()))
    }

    fn real(&self, col: usize) -> Result<Option<f64>, FieldError> {
        let name = CSV_COLUMNS[col];
        let v = self.raw(col)?;
        if v.is_empty() {
            return Ok(None);
        }
        let x: f64 = v
            .parse()
            .map_err(|_| (name, format!("'{v}' is not a number")))?;
        if !x.is_finite() {
            return Err((name, "non-finite value".into()));
        }
        Ok(Some(x))
    }

    fn non_negative(&self, col: usize) -> Result<Option<f64>, FieldError> {
        match self.real(col)? {
            Some(x) if x < 0.0 => Err((CSV_COLUMNS[col], "negative value".into())),
            other => Ok(other),
        }
    }

    fn lab(&self, col: usize) -> Result<Option<f64>, FieldError> {
        match self.real(col)? {
            Some(x) if x <= 0.0 => Err((CSV_COLUMNS[col], "hemoglobin must be positive".into())),
            other => Ok(other),
        }
    }

    fn flag(&self, col: usize) -> Result<bool, FieldError> {
        match self.raw(col)? {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err((CSV_COLUMNS[col], format!("'{other}' is not 0 or 1"))),
        }
    }

    fn parse(&self) -> Result<CaseRecord, FieldError> {
        let date_raw = self.raw(4)?;
        let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d")
            .map_err(|_| ("date", format!("'{date_raw}' is not an ISO-8601 date")))?;
        let urgency: Urgency = self.raw(5)?.parse().map_err(|e| ("urgency", e))?;
        let procedures: Vec<String> = self
            .raw(6)?
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect();
        if procedures.is_empty() {
            return Err(("procedures", "no procedure codes".into()));
        }
        Ok(CaseRecord {
            case_id: self.text(0)?,
            patient_id: self.text(1)?,
            surgeon_id: self.text(2)?,
            anesthesiologist_id: self.text(3)?,
            date,
            urgency,
            procedures,
            prbc_units: self.units(7)?,
            ffp_units: self.units(8)?,
            platelet_units: self.units(9)?,
            cryo_units: self.units(10)?,
            cell_salvage_ml: self.non_negative(11)?.unwrap_or(0.0),
            preop_hgb: self.lab(12)?,
            postop_hgb: self.lab(13)?,
            drg_weight: self.non_negative(14)?,
            death: self.flag(15)?,
            vent_over_24h: self.flag(16)?,
            ecmo: self.flag(17)?,
            b12: self.flag(18)?,
            amicar: self.flag(19)?,
            txa: self.flag(20)?,
        })
    }
}

/// Records the byte offset of every newline read through it. The csv
/// crate's own line counter drifts on CRLF input, so rejection line
/// numbers are derived from record byte offsets instead.
struct LineIndex<R> {
    inner: R,
    offset: u64,
    newlines: Rc<RefCell<Vec<u64>>>,
}

impl<R: Read> Read for LineIndex<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        let mut newlines = self.newlines.borrow_mut();
        for (i, b) in buf[..n].iter().enumerate() {
            if *b == b'\n' {
                newlines.push(self.offset + i as u64);
            }
        }
        self.offset += n as u64;
        Ok(n)
    }
}

/// 1-based line of a record starting at `offset`. After a `\r` terminator
/// the reported start is the trailing `\n`, which still ends the line before.
fn line_at(newlines: &[u64], offset: u64) -> u64 {
    newlines.partition_point(|&nl| nl <= offset) as u64 + 1
}

/// Reads cases from CSV. Bad rows are rejected individually; a duplicate
/// `case_id` rejects the later row.
pub fn load_cases<R: Read>(
    input: R,
    source: impl Into<String>,
) -> Result<(CaseSet, IngestReport), IngestError> {
    let source = source.into();
    let newlines = Rc::new(RefCell::new(Vec::new()));
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(LineIndex {
            inner: input,
            offset: 0,
            newlines: Rc::clone(&newlines),
        });
    let line_of = |pos: Option<&csv::Position>, fallback: u64| {
        pos.map_or(fallback, |p| line_at(&newlines.borrow(), p.byte()))
    };

    let headers = reader.headers().map_err(IngestError::Header)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Ok((CaseSet::empty(source), IngestReport::default()));
    }
    let columns = Columns::resolve(&headers)?;

    let mut cases = Vec::new();
    let mut seen = HashSet::new();
    let mut report = IngestReport::default();
    let mut record = csv::StringRecord::new();

    loop {
        let line_hint = reader.position().line();
        let outcome = match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = line_of(record.position(), line_hint);
                let row = Row {
                    record: &record,
                    columns: &columns,
                };
                match row.parse() {
                    Ok(case) if !seen.insert(case.case_id.clone()) => Err(Rejection {
                        line,
                        field: "case_id".into(),
                        reason: "duplicate case_id".into(),
                    }),
                    Ok(case) => Ok(case),
                    Err((field, reason)) => Err(Rejection {
                        line,
                        field: field.into(),
                        reason,
                    }),
                }
            }
            Err(err) => Err(Rejection {
                line: line_of(err.position(), line_hint),
                field: String::new(),
                reason: err.to_string(),
            }),
        };
        match outcome {
            Ok(case) => {
                report.accepted += 1;
                cases.push(case);
            }
            Err(rejection) => {
                report.rejected += 1;
                report.rejections.push(rejection);
            }
        }
    }

    let set = CaseSet::new(cases, source)?;
    Ok((set, report))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes cases in the ingest CSV schema.
pub fn write_cases<W: Write>(cases: &[CaseRecord], out: W) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for c in cases {
        writer.write_record([
            c.case_id.clone(),
            c.patient_id.clone(),
            c.surgeon_id.clone(),
            c.anesthesiologist_id.clone(),
            c.date.format("%Y-%m-%d").to_string(),
            c.urgency.to_string(),
            c.procedures.join(";"),
            c.prbc_units.to_string(),
            c.ffp_units.to_string(),
            c.platelet_units.to_string(),
            c.cryo_units.to_string(),
            c.cell_salvage_ml.to_string(),
            fmt_opt(c.preop_hgb),
            fmt_opt(c.postop_hgb),
            fmt_opt(c.drg_weight),
            fmt_flag(c.death).into(),
            fmt_flag(c.vent_over_24h).into(),
            fmt_flag(c.ecmo).into(),
            fmt_flag(c.b12).into(),
            fmt_flag(c.amicar).into(),
            fmt_flag(c.txa).into(),
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcedureCount {
    pub code: String,
    pub cases: usize,
}

/// Distinct procedure codes with the number of cases carrying each, busiest
/// first, ties by code.
pub fn list_procedures(cs: &CaseSet) -> Vec<ProcedureCount> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for case in cs.cases() {
        let distinct: HashSet<&str> = case.procedures.iter().map(String::as_str).collect();
        for code in distinct {
            *counts.entry(code).or_default() += 1;
        }
    }
    let mut out: Vec<ProcedureCount> = counts
        .into_iter()
        .map(|(code, cases)| ProcedureCount {
            code: code.to_string(),
            cases,
        })
        .collect();
    // BTreeMap order is by code, and the sort is stable.
    out.sort_by(|a, b| b.cases.cmp(&a.cases));
    out
}
