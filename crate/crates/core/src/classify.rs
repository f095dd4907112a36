//! Orbit decomposition of every rank stratum.
//!
//! Within a stratum the smallest code not yet covered is taken as the next
//! canonical form, its orbit is computed and removed, and the loop repeats.
//! Undecomposable tensors are split into orbits the same way.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfp::FieldSpec;
use crate::group::Gl2;
use crate::strata::{symmetric_rank_strata, Budget, Rank, RankStratification};
use crate::tensor::{SymTensor, TensorCode};

/// One orbit: its canonical form, size and stabilizer size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub rank: Rank,
    pub canonical: Vec<u32>,
    pub code: TensorCode,
    pub orbit_size: u64,
    pub stabilizer_size: u64,
}

/// Wall-clock cost of each phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Timing {
    pub strata: Duration,
    pub orbits: Duration,
}

/// Complete orbit inventory for one `(p, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationReport {
    pub p: u32,
    pub order: usize,
    pub group_order: u64,
    pub stratum_counts: Vec<u64>,
    pub undecomposable_count: u64,
    /// Sorted by (rank, canonical code).
    pub records: Vec<OrbitRecord>,
    /// Sorted by canonical code.
    pub undecomposable_records: Vec<OrbitRecord>,
    pub timing: Timing,
}

impl ClassificationReport {
    pub fn field(&self) -> FieldSpec {
        FieldSpec::new(self.p).expect("report built from a valid field")
    }

    /// Number of symmetric tensors, `p^(k+1)`.
    pub fn total(&self) -> u64 {
        u64::from(self.p).pow(self.order as u32 + 1)
    }

    pub fn max_rank(&self) -> u32 {
        self.stratum_counts.len() as u32 - 1
    }

    /// Number of orbits with a finite rank.
    pub fn orbit_count(&self) -> usize {
        self.records.len()
    }

    pub fn records_of_rank(&self, r: u32) -> impl Iterator<Item = &OrbitRecord> {
        self.records.iter().filter(move |rec| rec.rank == Rank::Finite(r))
    }

    /// Checks the counting identities every classification must satisfy.
    pub fn check_identities(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        for (r, &count) in self.stratum_counts.iter().enumerate() {
            let sum: u64 = self.records_of_rank(r as u32).map(|rec| rec.orbit_size).sum();
            if sum != count {
                return fail(format!("rank {r}: orbit sizes sum to {sum}, stratum has {count}"));
            }
        }
        let undecomposable: u64 = self.undecomposable_records.iter().map(|r| r.orbit_size).sum();
        if undecomposable != self.undecomposable_count {
            return fail(format!(
                "undecomposable orbits cover {undecomposable}, expected {}",
                self.undecomposable_count
            ));
        }
        let covered: u64 = self.stratum_counts.iter().sum::<u64>() + self.undecomposable_count;
        if covered != self.total() {
            return fail(format!("strata cover {covered} of {} tensors", self.total()));
        }
        for rec in self.records.iter().chain(&self.undecomposable_records) {
            if rec.orbit_size * rec.stabilizer_size != self.group_order {
                return fail(format!("orbit of {} breaks orbit-stabilizer", rec.code));
            }
        }
        Ok(())
    }
}

/// Classifies all symmetric tensors of order `order` over `field`.
pub fn classify(field: FieldSpec, order: usize, budget: Budget) -> Result<ClassificationReport> {
    let start = Instant::now();
    let strata = symmetric_rank_strata(field, order, budget)?;
    let strata_time = start.elapsed();

    let start = Instant::now();
    let group = Gl2::new(field);
    let mut records = Vec::new();
    for r in 0..=strata.max_rank() {
        records.extend(split_into_orbits(&group, &strata, Rank::Finite(r), strata.stratum(r))?);
    }
    let undecomposable_records = split_into_orbits(&group, &strata, Rank::Undecomposable, strata.undecomposable())?;
    let orbits_time = start.elapsed();

    let report = ClassificationReport {
        p: field.p(),
        order,
        group_order: group.order(),
        stratum_counts: strata.stratum_sizes().to_vec(),
        undecomposable_count: strata.undecomposable_count(),
        records,
        undecomposable_records,
        timing: Timing {
            strata: strata_time,
            orbits: orbits_time,
        },
    };
    report.check_identities()?;
    Ok(report)
}

/// Repeatedly takes the smallest uncovered code of `codes` (ascending) and
/// removes its orbit.
fn split_into_orbits(
    group: &Gl2,
    strata: &RankStratification,
    rank: Rank,
    codes: Vec<TensorCode>,
) -> Result<Vec<OrbitRecord>> {
    let field = strata.field();
    let order = strata.order();
    let mut covered = HashSet::new();
    let mut out = Vec::new();
    for code in codes {
        if covered.contains(&code) {
            continue;
        }
        let x = SymTensor::decode(code, field, order)?;
        let orbit = group.orbit(&x)?;
        if orbit.canonical() != code {
            return Err(Error::Invariant(format!("{code} is not minimal in its orbit")));
        }
        for &member in orbit.members() {
            if strata.rank_of_code(member)? != rank {
                return Err(Error::Invariant(format!(
                    "orbit of {code} leaves the {rank} stratum at {member}"
                )));
            }
            covered.insert(member);
        }
        out.push(OrbitRecord {
            rank,
            canonical: x.flatten(),
            code,
            orbit_size: orbit.size(),
            stabilizer_size: orbit.stabilizer_size(),
        });
    }
    Ok(out)
}
