//! Published result tables, stored verbatim, and the audit that compares
//! them with a computed classification.
//!
//! A fixture is one table per file:
//!
//! ```text
//! # comment
//! p=13
//! k=3
//! counts=1,56,1568,16016,10920
//! stated_orbits=14
//! 2,14 56,0,1,1,0,1,0,0,3
//! ```
//!
//! Header keys other than `p` and `k` are optional and record numbers
//! printed alongside the table. Data rows are `rank,orbit_size,digits…` in
//! flatten order; the size column is kept as printed text. Rows starting
//! with `U` list tensors printed as having no symmetric decomposition.
//!
//! A sidecar `<fixture>.errata` annotates known problems, one per line:
//! `id,reference,classification,note` where reference is `row:N` (1-based
//! data row) or `key:NAME`.
//!
//! The audit never trusts the annotations. It first finds rows and header
//! values that contradict the table's own arithmetic (faults). A
//! discrepancy against the computed classification on a faulted reference
//! is ERRATUM-SUSPECTED; on anything else it is a MISMATCH.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::ClassificationReport;
use crate::error::{Error, Result};
use crate::gfp::FieldSpec;
use crate::tensor::{SymTensor, Tensor};

macro_rules! embedded {
    ($(($p:literal, $k:literal)),* $(,)?) => {
        &[$((
            $p,
            $k,
            include_str!(concat!("../fixtures/v1/order", $k, "_p", $p, ".tbl")),
            include_str!(concat!("../fixtures/v1/order", $k, "_p", $p, ".tbl.errata")),
        )),*]
    };
}

static EMBEDDED: &[(u32, usize, &str, &str)] = embedded![
    (2, 3),
    (3, 3),
    (5, 3),
    (7, 3),
    (11, 3),
    (13, 3),
    (17, 3),
    (2, 4),
    (3, 4),
    (5, 4),
    (7, 4),
];

const HEADER_KEYS: [&str; 10] = [
    "counts",
    "layout",
    "stated_decomposable",
    "stated_field",
    "stated_max_rank",
    "stated_orbits",
    "stated_symmetric",
    "stated_total",
    "stated_undecomposable",
    "source",
];

/// File name of the fixture for `(p, k)`.
pub fn fixture_name(p: u32, k: usize) -> String {
    format!("order{k}_p{p}.tbl")
}

/// `(p, k)` pairs with an embedded fixture.
pub fn available() -> Vec<(u32, usize)> {
    EMBEDDED.iter().map(|&(p, k, _, _)| (p, k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "ERRATUM-SUSPECTED")]
    ErratumSuspected,
    #[serde(rename = "MISMATCH")]
    Mismatch,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::ErratumSuspected => "ERRATUM-SUSPECTED",
            Classification::Mismatch => "MISMATCH",
        })
    }
}

impl std::str::FromStr for Classification {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ERRATUM-SUSPECTED" => Ok(Classification::ErratumSuspected),
            "MISMATCH" => Ok(Classification::Mismatch),
            _ => Err(format!("unknown classification {s:?}")),
        }
    }
}

/// Where in a fixture something was found.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ref {
    /// 1-based data row.
    Row(usize),
    Key(String),
    /// A computed orbit of the given rank with no printed row.
    Rank(u32),
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ref::Row(n) => write!(f, "row:{n}"),
            Ref::Key(k) => write!(f, "key:{k}"),
            Ref::Rank(r) => write!(f, "rank:{r}"),
        }
    }
}

impl std::str::FromStr for Ref {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("bad reference {s:?}");
        match s.split_once(':').ok_or_else(bad)? {
            ("row", n) => n.parse().map(Ref::Row).map_err(|_| bad()),
            ("key", k) if !k.is_empty() => Ok(Ref::Key(k.to_string())),
            ("rank", r) => r.parse().map(Ref::Rank).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureRow {
    /// Line in the fixture file.
    pub line: usize,
    pub rank: u32,
    /// Orbit size exactly as printed.
    pub size_text: String,
    pub canonical: Vec<u32>,
}

impl FixtureRow {
    pub fn size(&self) -> Option<u64> {
        self.size_text.trim().parse().ok()
    }

    /// The size with internal whitespace removed, for numbers printed with
    /// a stray space.
    pub fn joined_size(&self) -> Option<u64> {
        self.size_text.split_whitespace().collect::<String>().parse().ok()
    }
}

/// One line of an errata sidecar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrataNote {
    pub id: String,
    pub reference: Ref,
    pub classification: Classification,
    pub note: String,
}

/// A published table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub p: u32,
    pub k: usize,
    pub header: BTreeMap<String, String>,
    pub rows: Vec<FixtureRow>,
    pub listed_undecomposable: Vec<Vec<u32>>,
    pub errata: Vec<ErrataNote>,
}

impl Fixture {
    pub fn parse(name: &str, text: &str, errata: Option<&str>) -> Result<Self> {
        let malformed = |line: usize, msg: String| Error::MalformedFixture {
            name: name.to_string(),
            line,
            msg,
        };
        let mut header = BTreeMap::new();
        let mut raw_rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let key = key.trim();
                if key != "p" && key != "k" && !HEADER_KEYS.contains(&key) {
                    return Err(malformed(n, format!("unknown header key {key:?}")));
                }
                if header.insert(key.to_string(), value.trim().to_string()).is_some() {
                    return Err(malformed(n, format!("duplicate header key {key:?}")));
                }
            } else {
                raw_rows.push((n, line));
            }
        }
        let number = |key: &str| -> Result<u64> {
            let v = header.get(key).ok_or_else(|| malformed(0, format!("missing {key}=")))?;
            v.parse()
                .map_err(|_| malformed(0, format!("{key}={v} is not an integer")))
        };
        let p = number("p")? as u32;
        let k = number("k")? as usize;
        FieldSpec::new(p).map_err(|e| malformed(0, e.to_string()))?;
        if !(3..=4).contains(&k) {
            return Err(malformed(0, format!("unsupported order {k}")));
        }
        for key in header.keys() {
            if key.starts_with("stated_") {
                number(key)?;
            }
        }
        if let Some(counts) = header.get("counts") {
            for c in counts.split(',') {
                c.trim()
                    .parse::<u64>()
                    .map_err(|_| malformed(0, format!("bad count {c:?}")))?;
            }
        }

        let width = 1usize << k;
        let mut rows = Vec::new();
        let mut listed_undecomposable = Vec::new();
        for (n, line) in raw_rows {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let digits = |cells: &[&str]| -> Result<Vec<u32>> {
                if cells.len() != width {
                    return Err(malformed(n, format!("expected {width} digits, found {}", cells.len())));
                }
                cells
                    .iter()
                    .map(|d| d.parse::<u32>().map_err(|_| malformed(n, format!("bad digit {d:?}"))))
                    .collect()
            };
            if fields[0] == "U" {
                listed_undecomposable.push(digits(&fields[1..])?);
                continue;
            }
            if fields.len() < 2 {
                return Err(malformed(n, "row needs rank and orbit size".into()));
            }
            let rank = fields[0]
                .parse()
                .map_err(|_| malformed(n, format!("bad rank {:?}", fields[0])))?;
            rows.push(FixtureRow {
                line: n,
                rank,
                size_text: fields[1].to_string(),
                canonical: digits(&fields[2..])?,
            });
        }

        let mut notes = Vec::new();
        for (i, line) in errata.unwrap_or("").lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let errata_name = format!("{name}.errata");
            let bad = |msg: String| Error::MalformedFixture {
                name: errata_name.clone(),
                line: i + 1,
                msg,
            };
            let parts: Vec<&str> = line.splitn(4, ',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(bad("expected id,reference,classification,note".into()));
            }
            let reference: Ref = parts[1].parse().map_err(bad)?;
            if let Ref::Row(r) = reference {
                if r == 0 || r > rows.len() {
                    return Err(bad(format!("row {r} does not exist")));
                }
            }
            notes.push(ErrataNote {
                id: parts[0].to_string(),
                reference,
                classification: parts[2].parse().map_err(bad)?,
                note: parts[3].to_string(),
            });
        }

        Ok(Fixture {
            name: name.to_string(),
            p,
            k,
            header,
            rows,
            listed_undecomposable,
            errata: notes,
        })
    }

    /// The fixture shipped with the library.
    pub fn embedded(p: u32, k: usize) -> Result<Self> {
        let &(_, _, text, errata) = EMBEDDED
            .iter()
            .find(|&&(fp, fk, _, _)| fp == p && fk == k)
            .ok_or(Error::MissingFixture { p, k })?;
        Fixture::parse(&fixture_name(p, k), text, Some(errata))
    }

    /// Reads `<dir>/order{k}_p{p}.tbl` and its sidecar, if present.
    pub fn load(dir: &Path, p: u32, k: usize) -> Result<Self> {
        let name = fixture_name(p, k);
        let path = dir.join(&name);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFixture { p, k }),
            Err(source) => return Err(Error::Io { path, source }),
        };
        let errata_path = dir.join(format!("{name}.errata"));
        let errata = match std::fs::read_to_string(&errata_path) {
            Ok(t) => Some(t),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(source) => {
                return Err(Error::Io {
                    path: errata_path,
                    source,
                })
            }
        };
        Fixture::parse(&name, &text, errata.as_deref())
    }

    pub fn stated(&self, key: &str) -> Option<u64> {
        self.header.get(key).and_then(|v| v.parse().ok())
    }

    /// Printed stratum counts.
    pub fn counts(&self) -> Option<Vec<u64>> {
        self.header
            .get("counts")
            .map(|c| c.split(',').map(|x| x.trim().parse().unwrap()).collect())
    }

    /// Places where the printed table contradicts its own arithmetic.
    ///
    /// With `join_split_sizes`, a size printed with a stray space (such as
    /// "14 56") is read with the space removed.
    pub fn faults(&self, join_split_sizes: bool) -> Vec<Fault> {
        let field = FieldSpec::new(self.p).expect("validated at parse");
        let group_order = field.gl2_order();
        let mut faults = Vec::new();
        let size_of = |row: &FixtureRow| {
            if join_split_sizes {
                row.joined_size()
            } else {
                row.size()
            }
        };

        let mut row_faulted = vec![false; self.rows.len()];
        let mut seen: HashMap<&[u32], usize> = HashMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            let mut reasons = Vec::new();
            if row.canonical.iter().any(|&d| d >= self.p) {
                reasons.push("digit out of range".to_string());
            } else if !Tensor::unflatten(field, self.k, row.canonical.clone())
                .map(|t| t.is_symmetric())
                .unwrap_or(false)
            {
                reasons.push("canonical form is not symmetric".to_string());
            }
            match size_of(row) {
                None => reasons.push(format!("orbit size {:?} is not an integer", row.size_text)),
                Some(s) if s == 0 || !group_order.is_multiple_of(s) => {
                    reasons.push(format!("orbit size {s} does not divide {group_order}"))
                }
                _ => {}
            }
            if let Some(&j) = seen.get(row.canonical.as_slice()) {
                reasons.push(format!("canonical form repeats row {}", j + 1));
                faults.push(Fault {
                    reference: Ref::Row(j + 1),
                    reason: format!("canonical form repeats on row {}", i + 1),
                });
                row_faulted[j] = true;
            } else {
                seen.insert(&row.canonical, i);
            }
            for reason in reasons {
                row_faulted[i] = true;
                faults.push(Fault {
                    reference: Ref::Row(i + 1),
                    reason,
                });
            }
        }

        let counts = self.counts();
        if let Some(counts) = &counts {
            let max_row_rank = self.rows.iter().map(|r| r.rank).max().unwrap_or(0) as usize;
            for r in 0..counts.len().max(max_row_rank + 1) {
                let in_rank: Vec<usize> = (0..self.rows.len())
                    .filter(|&i| self.rows[i].rank as usize == r)
                    .collect();
                let sum: Option<u64> = in_rank.iter().map(|&i| size_of(&self.rows[i])).sum();
                let expected = counts.get(r).copied();
                if sum.is_some() && sum == expected {
                    continue;
                }
                let reason = format!(
                    "orbit sizes of rank {r} sum to {}, printed count is {}",
                    sum.map_or("?".into(), |s| s.to_string()),
                    expected.map_or("absent".into(), |c| c.to_string())
                );
                faults.push(Fault {
                    reference: Ref::Key("counts".into()),
                    reason: reason.clone(),
                });
                // A row already at fault explains the failed sum; otherwise
                // every row of the rank is suspect.
                if in_rank.iter().all(|&i| !row_faulted[i]) {
                    for &i in &in_rank {
                        faults.push(Fault {
                            reference: Ref::Row(i + 1),
                            reason: reason.clone(),
                        });
                    }
                }
            }
        }

        let mut key_fault = |key: &str, reason: String| {
            faults.push(Fault {
                reference: Ref::Key(key.into()),
                reason,
            })
        };
        let p = u64::from(self.p);
        if let Some(f) = self.stated("stated_field") {
            if f != p {
                key_fault("stated_field", format!("field F_{f} named in a table over F_{p}"));
            }
        }
        let total = p.pow(1 << self.k);
        if let Some(t) = self.stated("stated_total") {
            if t != total {
                key_fault("stated_total", format!("{t} tensors stated, p^(2^k) = {total}"));
            }
        }
        let symmetric = p.pow(self.k as u32 + 1);
        if let Some(s) = self.stated("stated_symmetric") {
            if s != symmetric {
                key_fault(
                    "stated_symmetric",
                    format!("{s} symmetric stated, p^(k+1) = {symmetric}"),
                );
            }
        }
        let decomposable = self.stated("stated_decomposable").or_else(|| {
            let s = self.stated("stated_symmetric").unwrap_or(symmetric);
            Some(s - self.stated("stated_undecomposable").unwrap_or(0))
        });
        if let (Some(counts), Some(d)) = (&counts, decomposable) {
            let sum: u64 = counts.iter().sum();
            if sum != d {
                key_fault("counts", format!("counts sum to {sum}, {d} decomposable stated"));
            }
        }
        if let Some(u) = self.stated("stated_undecomposable") {
            if let Some(d) = self.stated("stated_decomposable") {
                if d + u != symmetric {
                    key_fault("stated_undecomposable", format!("{d} + {u} != {symmetric}"));
                }
            }
            if !self.listed_undecomposable.is_empty() && self.listed_undecomposable.len() as u64 != u {
                key_fault(
                    "undecomposable",
                    format!("{} tensors listed, {u} stated", self.listed_undecomposable.len()),
                );
            }
        }
        if self.listed_undecomposable.iter().any(|d| {
            d.iter().any(|&x| x >= self.p)
                || !Tensor::unflatten(field, self.k, d.clone())
                    .map(|t| t.is_symmetric())
                    .unwrap_or(false)
        }) {
            key_fault("undecomposable", "listed tensor is not symmetric".into());
        }
        if let (Some(counts), Some(m)) = (&counts, self.stated("stated_max_rank")) {
            if m + 1 != counts.len() as u64 {
                key_fault(
                    "stated_max_rank",
                    format!("max rank {m} stated, {} counts printed", counts.len()),
                );
            }
        }
        if let Some(o) = self.stated("stated_orbits") {
            if o != self.rows.len() as u64 {
                key_fault(
                    "stated_orbits",
                    format!("{o} orbits stated, {} rows printed", self.rows.len()),
                );
            }
        }
        faults
    }
}

/// Where fixtures come from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum FixtureSource {
    #[default]
    Embedded,
    Directory(PathBuf),
}

impl FixtureSource {
    pub fn load(&self, p: u32, k: usize) -> Result<Fixture> {
        match self {
            FixtureSource::Embedded => Fixture::embedded(p, k),
            FixtureSource::Directory(dir) => Fixture::load(dir, p, k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fault {
    pub reference: Ref,
    pub reason: String,
}

/// A difference between a printed value and the computed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub fixture: String,
    pub reference: String,
    pub kind: String,
    pub printed: String,
    pub computed: String,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errata_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faults: Vec<String>,
}

impl Discrepancy {
    /// Key grouping discrepancies that describe the same erratum.
    pub fn erratum_key(&self) -> String {
        match &self.errata_id {
            Some(id) => id.clone(),
            None => format!("{}:{}", self.fixture, self.reference),
        }
    }
}

/// Result of comparing one fixture with a computed classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Audit {
    pub fixture: String,
    pub p: u32,
    pub k: usize,
    pub faults: Vec<Fault>,
    pub discrepancies: Vec<Discrepancy>,
    /// Sidecar entries that no discrepancy confirms, or that disagree with
    /// the computed classification.
    pub stale_errata: Vec<String>,
}

impl Audit {
    pub fn has_mismatch(&self) -> bool {
        self.discrepancies
            .iter()
            .any(|d| d.classification == Classification::Mismatch)
    }

    /// Distinct suspected errata, keyed by sidecar id where one applies.
    pub fn suspected_errata(&self) -> BTreeSet<String> {
        self.discrepancies
            .iter()
            .filter(|d| d.classification == Classification::ErratumSuspected)
            .map(Discrepancy::erratum_key)
            .collect()
    }
}

fn digits(d: &[u32]) -> String {
    d.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Compares `report` with the published `fixture`.
pub fn verify_against_paper(report: &ClassificationReport, fixture: &Fixture) -> Result<Audit> {
    if report.p != fixture.p || report.order != fixture.k {
        return Err(Error::FieldMismatch {
            expected_p: fixture.p,
            expected_k: fixture.k,
            p: report.p,
            k: report.order,
        });
    }
    let faults = fixture.faults(false);
    let fault_map: BTreeMap<String, Vec<String>> = faults.iter().fold(BTreeMap::new(), |mut m, f| {
        m.entry(f.reference.to_string())
            .or_insert_with(Vec::new)
            .push(f.reason.clone());
        m
    });
    let mut found: Vec<(Ref, &str, String, String)> = Vec::new();

    let p = u64::from(report.p);
    let mut key = |name: &'static str, computed: u64| {
        if let Some(printed) = fixture.stated(name) {
            if printed != computed {
                found.push((Ref::Key(name.into()), name, printed.to_string(), computed.to_string()));
            }
        }
    };
    key("stated_field", p);
    key("stated_total", p.pow(1 << report.order));
    key("stated_symmetric", report.total());
    key("stated_decomposable", report.stratum_counts.iter().sum());
    key("stated_undecomposable", report.undecomposable_count);
    key("stated_max_rank", u64::from(report.max_rank()));
    key("stated_orbits", report.orbit_count() as u64);
    if let Some(counts) = fixture.counts() {
        if counts != report.stratum_counts {
            let show = |c: &[u64]| c.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
            found.push((
                Ref::Key("counts".into()),
                "stratum counts",
                show(&counts),
                show(&report.stratum_counts),
            ));
        }
    }
    if !fixture.listed_undecomposable.is_empty() {
        let mut listed: Vec<Vec<u32>> = fixture.listed_undecomposable.clone();
        listed.sort();
        let field = report.field();
        let mut computed: Vec<Vec<u32>> = Vec::new();
        for rec in &report.undecomposable_records {
            let x = SymTensor::decode(rec.code, field, report.order)?;
            for member in crate::group::orbit(&x)?.members() {
                computed.push(SymTensor::decode(*member, field, report.order)?.flatten());
            }
        }
        computed.sort();
        if listed != computed {
            let show = |v: &[Vec<u32>]| {
                v.iter()
                    .map(|d| d.iter().map(u32::to_string).collect::<String>())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            found.push((
                Ref::Key("undecomposable".into()),
                "undecomposable tensors",
                show(&listed),
                show(&computed),
            ));
        }
    }

    // Row matching, from strictest to loosest.
    let computed = &report.records;
    let mut used = vec![false; computed.len()];
    let mut matched: Vec<Option<usize>> = vec![None; fixture.rows.len()];
    type Pred = fn(&FixtureRow, &crate::classify::OrbitRecord) -> bool;
    let passes: [Pred; 4] = [
        |row, rec| row.size() == Some(rec.orbit_size) && row.canonical == rec.canonical,
        |row, rec| row.canonical == rec.canonical,
        |row, rec| row.size() == Some(rec.orbit_size),
        |_, _| true,
    ];
    for (pass, pred) in passes.iter().enumerate() {
        for (i, row) in fixture.rows.iter().enumerate() {
            if matched[i].is_some() {
                continue;
            }
            let hit = (0..computed.len())
                .find(|&j| !used[j] && computed[j].rank.finite() == Some(row.rank) && pred(row, &computed[j]));
            if let Some(j) = hit {
                used[j] = true;
                matched[i] = Some(j);
                let rec = &computed[j];
                let size_ok = row.size() == Some(rec.orbit_size);
                let canon_ok = row.canonical == rec.canonical;
                let (kind, printed, computed_text) = match (size_ok, canon_ok) {
                    (true, true) => continue,
                    (false, true) => ("orbit size", row.size_text.clone(), rec.orbit_size.to_string()),
                    (true, false) => ("canonical form", digits(&row.canonical), digits(&rec.canonical)),
                    (false, false) => (
                        "orbit size and canonical form",
                        format!("{} / {}", row.size_text, digits(&row.canonical)),
                        format!("{} / {}", rec.orbit_size, digits(&rec.canonical)),
                    ),
                };
                debug_assert!(pass > 0);
                found.push((Ref::Row(i + 1), kind, printed, computed_text));
            }
        }
    }
    for (i, row) in fixture.rows.iter().enumerate() {
        if matched[i].is_none() {
            found.push((
                Ref::Row(i + 1),
                "row without a computed orbit",
                format!("{} / {} / {}", row.rank, row.size_text, digits(&row.canonical)),
                "-".into(),
            ));
        }
    }
    for (j, rec) in computed.iter().enumerate() {
        if !used[j] {
            let r = rec.rank.finite().expect("ranked record");
            found.push((
                Ref::Rank(r),
                "computed orbit without a printed row",
                "-".into(),
                format!("{} / {}", rec.orbit_size, digits(&rec.canonical)),
            ));
        }
    }

    let faulted_ranks: BTreeSet<u32> = faults
        .iter()
        .filter_map(|f| match f.reference {
            Ref::Row(n) => Some(fixture.rows[n - 1].rank),
            _ => None,
        })
        .collect();
    let mut discrepancies = Vec::new();
    for (reference, kind, printed, computed_text) in found {
        let ref_text = reference.to_string();
        let mut reasons = fault_map.get(&ref_text).cloned().unwrap_or_default();
        if let Ref::Rank(r) = reference {
            // An unprinted orbit is explained by a faulty row of the same rank.
            if faulted_ranks.contains(&r) {
                reasons.push(format!("rank {r} has a faulty printed row"));
            }
        }
        let classification = if reasons.is_empty() {
            Classification::Mismatch
        } else {
            Classification::ErratumSuspected
        };
        let errata_id = fixture
            .errata
            .iter()
            .find(|n| n.reference == reference)
            .map(|n| n.id.clone());
        discrepancies.push(Discrepancy {
            fixture: fixture.name.clone(),
            reference: ref_text,
            kind: kind.to_string(),
            printed,
            computed: computed_text,
            classification,
            errata_id,
            faults: reasons,
        });
    }

    let mut stale_errata = Vec::new();
    for note in &fixture.errata {
        let ref_text = note.reference.to_string();
        match discrepancies.iter().find(|d| d.reference == ref_text) {
            None => stale_errata.push(format!("{} ({ref_text}): no discrepancy", note.id)),
            Some(d) if d.classification != note.classification => stale_errata.push(format!(
                "{} ({ref_text}): annotated {}, computed {}",
                note.id, note.classification, d.classification
            )),
            _ => {}
        }
    }

    Ok(Audit {
        fixture: fixture.name.clone(),
        p: fixture.p,
        k: fixture.k,
        faults,
        discrepancies,
        stale_errata,
    })
}
