//! Exhaustive classification of symmetric 2×2×2 and 2×2×2×2 tensors over
//! prime fields: symmetric-rank strata, diagonal GL₂(F_p) orbits, canonical
//! forms, stabilizers and explicit decompositions.

pub mod classify;
pub mod error;
pub mod fixture;
pub mod forms;
pub mod gfp;
pub mod group;
pub mod report;
pub mod strata;
pub mod tensor;

pub use classify::{classify, ClassificationReport, OrbitRecord, Timing};
pub use error::{Error, Result};
pub use fixture::{verify_against_paper, Audit, Classification, Discrepancy, Fixture, FixtureSource};
pub use forms::{eval_form, tensor_to_form, waring_rank_check, BinaryForm};
pub use gfp::FieldSpec;
pub use group::{act, act_diagonal, canonical_form, enumerate_gl2, orbit, stabilizer_size, Gl2, GroupElement, Orbit};
pub use report::{emit, Format, ReportDocument};
pub use strata::{
    decompose, general_rank_strata, max_symmetric_rank, symmetric_rank, symmetric_rank_strata, Budget, Rank,
    RankStratification, Witness,
};
pub use tensor::{parse_literal, CompactSym, SliceMode, SymTensor, Tensor, TensorCode};

/// Runs `f` on a dedicated pool of `threads` workers. Every parallel phase
/// merges its results in a fixed order, so the output does not depend on
/// `threads`.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}
