use serde::{Deserialize, Serialize};
use serde_json::json;

use super::pareto::ScatterPoint;
use super::run::{ResultRow, ResultsTable};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const TABLE_COLUMNS: [&str; 6] = ["dataset", "method", "metric", "mean", "std", "n"];
const SCATTER_COLUMNS: [&str; 7] = [
    "seed",
    "label",
    "alpha",
    "task_metric",
    "task_loss",
    "gf",
    "dominated",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// `%g`-style rendering with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (5 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round6(x: f64) -> f64 {
    format_sig6(x).parse().unwrap_or(x)
}

fn csv_string(header: &[&str], records: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in records {
        w.write_record(&r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Renders the table with a fixed column order and six significant digits.
pub fn emit_report(table: &ResultsTable, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => csv_string(
            &TABLE_COLUMNS,
            table
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.dataset.clone(),
                        r.method.clone(),
                        r.metric.clone(),
                        format_sig6(r.mean),
                        r.std.map(format_sig6).unwrap_or_default(),
                        r.n.to_string(),
                    ]
                })
                .collect(),
        ),
        ReportFormat::Json => {
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "dataset": r.dataset,
                        "method": r.method,
                        "metric": r.metric,
                        "mean": round6(r.mean),
                        "std": r.std.map(round6),
                        "n": r.n,
                    })
                })
                .collect();
            let doc = json!({ "schema_version": REPORT_SCHEMA_VERSION, "rows": rows });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

/// Parses a table previously written by [`emit_report`] in CSV form.
pub fn parse_csv_report(text: &str) -> Result<ResultsTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Format(e.to_string()))?;
    if header.iter().ne(TABLE_COLUMNS) {
        return Err(Error::Format(format!(
            "unexpected report header {header:?}"
        )));
    }
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad {what} value {s:?}")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        rows.push(ResultRow {
            dataset: rec[0].to_string(),
            method: rec[1].to_string(),
            metric: rec[2].to_string(),
            mean: num(&rec[3], "mean")?,
            std: if rec[4].is_empty() {
                None
            } else {
                Some(num(&rec[4], "std")?)
            },
            n: rec[5]
                .parse()
                .map_err(|_| Error::Format(format!("bad n value {:?}", &rec[5])))?,
        });
    }
    Ok(ResultsTable { rows })
}

/// Scatter records of a Pareto scan.
pub fn emit_scatter(points: &[ScatterPoint], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => csv_string(
            &SCATTER_COLUMNS,
            points
                .iter()
                .map(|p| {
                    vec![
                        p.seed.to_string(),
                        p.label.clone(),
                        p.alpha.map(format_sig6).unwrap_or_default(),
                        format_sig6(p.task_metric),
                        format_sig6(p.task_loss),
                        format_sig6(p.gf),
                        p.dominated.to_string(),
                    ]
                })
                .collect(),
        ),
        ReportFormat::Json => {
            let rows: Vec<_> = points
                .iter()
                .map(|p| {
                    json!({
                        "seed": p.seed,
                        "label": p.label,
                        "alpha": p.alpha.map(round6),
                        "task_metric": round6(p.task_metric),
                        "task_loss": round6(p.task_loss),
                        "gf": round6(p.gf),
                        "dominated": p.dominated,
                    })
                })
                .collect();
            let doc = json!({ "schema_version": REPORT_SCHEMA_VERSION, "points": rows });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1234567, "0.123457"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001234567, "0.000123457"),
            (0.00001234567, "1.23457e-05"),
            (-2.5, "-2.5"),
            (9.9999996, "10"),
            (999999.6, "1e+06"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig6(x), want, "{x}");
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let s = emit_report(&ResultsTable::default(), ReportFormat::Csv).unwrap();
        assert_eq!(s, "dataset,method,metric,mean,std,n\n");
    }
}
