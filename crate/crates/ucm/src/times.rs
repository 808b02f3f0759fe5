//! Timing CSV input for the statistics report.
//!
//! Header must contain `participant`, `condition` and `minutes`; other
//! columns (such as `requirements`) are ignored. Conditions are `manual` or
//! `llm`. Rows are paired by participant in order of first appearance.

use std::collections::HashMap;
use std::io::Read;

#[derive(Debug, thiserror::Error)]
pub enum TimesError {
    #[error("E-CSV: {0}")]
    Csv(String),
    #[error("E-CSV: missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("E-CSV: line {line}: unknown condition `{value}` (expected manual or llm)")]
    Condition { line: u64, value: String },
    #[error("E-CSV: line {line}: `{value}` is not a number of minutes")]
    Minutes { line: u64, value: String },
    #[error("E-DUPLICATE: participant {0} has two {1} rows")]
    Duplicate(String, &'static str),
    #[error("E-UNPAIRED: participant {0} lacks a {1} row")]
    Unpaired(String, &'static str),
}

impl TimesError {
    pub fn code(&self) -> &'static str {
        match self {
            TimesError::Csv(_)
            | TimesError::MissingColumn(_)
            | TimesError::Condition { .. }
            | TimesError::Minutes { .. } => "E-CSV",
            TimesError::Duplicate(..) => "E-DUPLICATE",
            TimesError::Unpaired(..) => "E-UNPAIRED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedTimes {
    pub participants: Vec<String>,
    pub manual: Vec<f64>,
    pub assisted: Vec<f64>,
}

fn condition(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "manual" => Some(true),
        "llm" | "llm-based" | "assisted" => Some(false),
        _ => None,
    }
}

pub fn read_times<R: Read>(input: R) -> Result<PairedTimes, TimesError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| TimesError::Csv(e.to_string()))?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(TimesError::MissingColumn(name))
    };
    let (pc, cc, mc) = (col("participant")?, col("condition")?, col("minutes")?);

    let mut order: Vec<String> = Vec::new();
    let mut slots: HashMap<String, (Option<f64>, Option<f64>)> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| TimesError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let who = field(pc).to_string();
        let manual = condition(field(cc)).ok_or_else(|| TimesError::Condition {
            line,
            value: field(cc).into(),
        })?;
        let minutes: f64 = field(mc)
            .parse()
            .ok()
            .filter(|m: &f64| m.is_finite())
            .ok_or_else(|| TimesError::Minutes {
                line,
                value: field(mc).into(),
            })?;
        let slot = slots.entry(who.clone()).or_insert_with(|| {
            order.push(who.clone());
            (None, None)
        });
        let (target, label) = if manual {
            (&mut slot.0, "manual")
        } else {
            (&mut slot.1, "llm")
        };
        if target.replace(minutes).is_some() {
            return Err(TimesError::Duplicate(who, label));
        }
    }

    let mut out = PairedTimes {
        participants: Vec::new(),
        manual: Vec::new(),
        assisted: Vec::new(),
    };
    for who in order {
        match slots[&who] {
            (Some(m), Some(a)) => {
                out.manual.push(m);
                out.assisted.push(a);
                out.participants.push(who);
            }
            (None, _) => return Err(TimesError::Unpaired(who, "manual")),
            (_, None) => return Err(TimesError::Unpaired(who, "llm")),
        }
    }
    Ok(out)
}
