//! Serialization of classification results.
//!
//! The structured format is JSON with object keys sorted, so emitting,
//! parsing and emitting again reproduces the same bytes. Percentages are
//! derived from counts and rounded half-up to two decimals.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::{ClassificationReport, OrbitRecord};
use crate::error::{Error, Result};
use crate::fixture::{Audit, Discrepancy};
use crate::strata::Rank;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Structured,
    Tabular,
    Markdown,
    Latex,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "structured" | "json" => Ok(Format::Structured),
            "tabular" | "csv" => Ok(Format::Tabular),
            "markdown" | "md" => Ok(Format::Markdown),
            "latex" | "tex" => Ok(Format::Latex),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub p: u32,
    pub k: usize,
    pub group_order: u64,
    pub symmetric_tensors: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRow {
    pub rank: Rank,
    pub count: u64,
    /// Share of all symmetric tensors, two decimals.
    pub percent: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

/// Everything a classification run emits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub parameters: Parameters,
    /// Ranked strata, then the undecomposable residue when it is non-empty.
    pub strata: Vec<StratumRow>,
    pub records: Vec<OrbitRecord>,
    pub undecomposable_records: Vec<OrbitRecord>,
    #[serde(default)]
    pub errata: Vec<Discrepancy>,
    pub provenance: Provenance,
}

/// `100 · count / total`, rounded half-up to two decimals.
pub fn percent(count: u64, total: u64) -> String {
    let hundredths = (u128::from(count) * 20_000 + u128::from(total)) / (2 * u128::from(total));
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

impl ReportDocument {
    /// Builds the document. Wall time is left out unless asked for, since it
    /// differs between runs.
    pub fn from_report(report: &ClassificationReport, include_timing: bool) -> Self {
        let total = report.total();
        let mut strata: Vec<StratumRow> = report
            .stratum_counts
            .iter()
            .enumerate()
            .map(|(r, &count)| StratumRow {
                rank: Rank::Finite(r as u32),
                count,
                percent: percent(count, total),
            })
            .collect();
        if report.undecomposable_count > 0 {
            strata.push(StratumRow {
                rank: Rank::Undecomposable,
                count: report.undecomposable_count,
                percent: percent(report.undecomposable_count, total),
            });
        }
        let wall = report.timing.strata + report.timing.orbits;
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            parameters: Parameters {
                p: report.p,
                k: report.order,
                group_order: report.group_order,
                symmetric_tensors: total,
            },
            strata,
            records: report.records.clone(),
            undecomposable_records: report.undecomposable_records.clone(),
            errata: Vec::new(),
            provenance: Provenance {
                artifact: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms: include_timing.then_some(wall.as_millis() as u64),
            },
        }
    }

    /// Attaches the discrepancies of an audit.
    pub fn with_audit(mut self, audit: &Audit) -> Self {
        self.errata = audit.discrepancies.clone();
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    /// Checks that derived fields agree with the counts they come from.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!("unsupported schema version {}", self.schema_version));
        }
        let total = self.parameters.symmetric_tensors;
        let mut sum = 0;
        for row in &self.strata {
            if row.percent != percent(row.count, total) {
                return fail(format!("percent {} does not match count {}", row.percent, row.count));
            }
            let covered: u64 = self
                .records
                .iter()
                .chain(&self.undecomposable_records)
                .filter(|rec| rec.rank == row.rank)
                .map(|rec| rec.orbit_size)
                .sum();
            if covered != row.count {
                return fail(format!("orbits of rank {} cover {covered} of {}", row.rank, row.count));
            }
            sum += row.count;
        }
        if sum != total {
            return fail(format!("strata cover {sum} of {total} tensors"));
        }
        for rec in self.records.iter().chain(&self.undecomposable_records) {
            if rec.orbit_size * rec.stabilizer_size != self.parameters.group_order {
                return fail(format!("orbit of {} breaks orbit-stabilizer", rec.code));
            }
        }
        Ok(())
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Structured => self.to_structured(),
            Format::Tabular => self.to_tabular(),
            Format::Markdown => self.to_markdown(),
            Format::Latex => self.to_latex(),
        }
    }

    fn to_structured(&self) -> String {
        // Value keeps object keys in a sorted map.
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    fn to_tabular(&self) -> String {
        let mut out = String::from("section,rank,count,percent,orbit_size,stabilizer_size,canonical\n");
        for row in &self.strata {
            writeln!(out, "stratum,{},{},{},,,", row.rank, row.count, row.percent).unwrap();
        }
        for rec in self.records.iter().chain(&self.undecomposable_records) {
            writeln!(
                out,
                "orbit,{},,,{},{},{}",
                rec.rank,
                rec.orbit_size,
                rec.stabilizer_size,
                digits(&rec.canonical)
            )
            .unwrap();
        }
        out
    }

    fn title(&self) -> String {
        let shape = vec!["2"; self.parameters.k].join("×");
        format!("Symmetric {shape} tensors over F_{}", self.parameters.p)
    }

    fn to_markdown(&self) -> String {
        let mut out = format!("# {}\n\n", self.title());
        writeln!(
            out,
            "{} symmetric tensors, |GL₂(F_{})| = {}.\n",
            self.parameters.symmetric_tensors, self.parameters.p, self.parameters.group_order
        )
        .unwrap();
        out.push_str("| rank | number | ≈ % |\n|---:|---:|---:|\n");
        for row in &self.strata {
            writeln!(out, "| {} | {} | {}% |", row.rank, row.count, row.percent).unwrap();
        }
        out.push_str("\n| symmetric rank | orbit size | canonical form (flattened) |\n");
        out.push_str("|---:|---:|:---|\n");
        for rec in &self.records {
            writeln!(
                out,
                "| {} | {} | {} |",
                rec.rank,
                rec.orbit_size,
                digits(&rec.canonical)
            )
            .unwrap();
        }
        if !self.undecomposable_records.is_empty() {
            out.push_str("\n## Undecomposable orbits\n\n");
            out.push_str("| orbit size | canonical form (flattened) |\n|---:|:---|\n");
            for rec in &self.undecomposable_records {
                writeln!(out, "| {} | {} |", rec.orbit_size, digits(&rec.canonical)).unwrap();
            }
        }
        if !self.errata.is_empty() {
            out.push_str("\n## Discrepancies\n\n");
            out.push_str("| class | id | reference | kind | printed | computed |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for d in &self.errata {
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    d.classification,
                    d.errata_id.as_deref().unwrap_or(""),
                    d.reference,
                    d.kind,
                    d.printed,
                    d.computed
                )
                .unwrap();
            }
        }
        out
    }

    fn to_latex(&self) -> String {
        let mut out = format!("% {}\n", self.title());
        let n = self.strata.len();
        writeln!(out, "\\[\n\\begin{{array}}{{l{}}}", "r".repeat(n)).unwrap();
        let rank: Vec<String> = self.strata.iter().map(|r| latex_rank(r.rank)).collect();
        let count: Vec<String> = self.strata.iter().map(|r| r.count.to_string()).collect();
        let pct: Vec<String> = self.strata.iter().map(|r| format!("{}\\%", r.percent)).collect();
        writeln!(out, "\\text{{rank}} & {} \\\\", rank.join(" & ")).unwrap();
        writeln!(out, "\\text{{number}} & {} \\\\", count.join(" & ")).unwrap();
        writeln!(out, "\\text{{$\\approx$ $\\%$}} & {}", pct.join(" & ")).unwrap();
        out.push_str("\\end{array}\n\\]\n\n");
        out.push_str("\\begin{tabular}{ccl}\n");
        out.push_str("symmetric rank & orbit size & canonical form (flattened) \\\\\n\\hline\n");
        for rec in self.records.iter().chain(&self.undecomposable_records) {
            writeln!(
                out,
                "{} & {} & {} \\\\",
                latex_rank(rec.rank),
                rec.orbit_size,
                digits(&rec.canonical)
            )
            .unwrap();
        }
        out.push_str("\\end{tabular}\n");
        out
    }
}

fn latex_rank(r: Rank) -> String {
    match r {
        Rank::Finite(r) => r.to_string(),
        Rank::Undecomposable => "\\text{U}".into(),
    }
}

fn digits(d: &[u32]) -> String {
    d.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Renders `report` in `format`.
pub fn emit(report: &ClassificationReport, format: Format) -> String {
    ReportDocument::from_report(report, false).emit(format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::gfp::FieldSpec;
    use crate::strata::Budget;

    fn doc(p: u32, k: usize) -> ReportDocument {
        let r = classify(FieldSpec::new(p).unwrap(), k, Budget::default()).unwrap();
        ReportDocument::from_report(&r, false)
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(percent(3, 16), "18.75");
        assert_eq!(percent(1, 81), "1.23");
        assert_eq!(percent(8, 81), "9.88");
        assert_eq!(percent(1, 32), "3.13");
        assert_eq!(percent(1, 28561), "0.00");
        assert_eq!(percent(16, 16), "100.00");
    }

    #[test]
    fn percentages_over_f3() {
        let d = doc(3, 3);
        let pcts: Vec<&str> = d.strata.iter().map(|r| r.percent.as_str()).collect();
        assert_eq!(pcts, ["1.23", "9.88", "29.63", "39.51", "19.75"]);
    }

    #[test]
    fn markdown_over_f2() {
        let md = doc(2, 3).emit(Format::Markdown);
        let ranked = md.lines().filter(|l| l.starts_with("| ") && l.ends_with(" |")).count();
        // three headers, 5 count rows, 4 ranked orbits, 2 undecomposable orbits
        assert!(md.contains("| 3 | 1 | 0 1 1 1 1 1 1 0 |"));
        assert!(md.contains("## Undecomposable orbits"));
        assert!(md.contains("| undecomposable | 8 | 50.00% |"));
        assert_eq!(ranked, 3 + 5 + 4 + 2);
    }

    #[test]
    fn structured_round_trip_is_byte_identical() {
        for (p, k) in [(2, 3), (7, 3), (3, 4)] {
            let text = doc(p, k).emit(Format::Structured);
            let again = ReportDocument::parse(&text).unwrap().emit(Format::Structured);
            assert_eq!(text, again);
        }
    }

    #[test]
    fn structured_keys_are_sorted() {
        let text = doc(2, 3).emit(Format::Structured);
        let params = text.find("\"parameters\"").unwrap();
        let records = text.find("\"records\"").unwrap();
        let strata = text.find("\"strata\"").unwrap();
        assert!(params < records && records < strata);
        assert!(!text.contains("wall_time_ms"));
    }

    #[test]
    fn tampered_documents_are_rejected() {
        let mut d = doc(3, 3);
        d.strata[1].percent = "9.87".into();
        assert!(ReportDocument::parse(&d.emit(Format::Structured)).is_err());
        let mut d = doc(3, 3);
        d.records[2].orbit_size += 1;
        assert!(d.validate().is_err());
    }

    #[test]
    fn formats_parse() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Structured);
        assert_eq!("tex".parse::<Format>().unwrap(), Format::Latex);
        assert!(matches!("xml".parse::<Format>(), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn tabular_and_latex_shapes() {
        let d = doc(5, 3);
        let csv = d.emit(Format::Tabular);
        assert_eq!(csv.lines().count(), 1 + 4 + 6);
        assert!(csv.contains("orbit,3,,,160,3,1 0 0 1 0 1 1 2"));
        let tex = d.emit(Format::Latex);
        assert!(tex.contains("3 & 160 & 1 0 0 1 0 1 1 2 \\\\"));
        assert!(tex.contains("38.40\\%"));
    }
}
