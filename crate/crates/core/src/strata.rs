//! Layered breadth-first computation of rank strata.
//!
//! Layer `r + 1` is every sum `X + Y` with `X` in layer `r` and `Y` a rank-1
//! generator that has not appeared in an earlier layer. The search stops at
//! the first empty layer; whatever was never reached has no decomposition
//! over F_p at all.
//!
//! Two spaces are searched:
//!
//! * symmetric tensors, indexed by their compact coordinates (`p^(k+1)`
//!   points), with generators `a^{⊗k}`. Every reached tensor records the
//!   predecessor and generator that first produced it, which is enough to
//!   rebuild an explicit decomposition.
//! * all tensors, indexed by [`TensorCode`] (`p^(2^k)` points), with
//!   generators `a_1 ⊗ … ⊗ a_k`. Only ranks are kept.

use std::sync::atomic::{AtomicU8, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfp::FieldSpec;
use crate::tensor::{space_size, symmetric_space_size, CompactSym, SymTensor, Tensor, TensorCode, Vec2};

/// Default ceiling on the number of points a stratification may index.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

const UNREACHED: u8 = u8::MAX;

/// Ceiling on the number of codes a stratification may hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    fn check(self, needed: u64) -> Result<()> {
        if needed > self.0 {
            Err(Error::BudgetExceeded { needed, budget: self.0 })
        } else {
            Ok(())
        }
    }
}

/// A (symmetric or general) rank, or the absence of any decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Finite(u32),
    Undecomposable,
}

impl Rank {
    pub fn finite(self) -> Option<u32> {
        match self {
            Rank::Finite(r) => Some(r),
            Rank::Undecomposable => None,
        }
    }
}

impl std::fmt::Display for Rank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rank::Finite(r) => r.fmt(f),
            Rank::Undecomposable => f.write_str("undecomposable"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rank::Finite(r) => s.serialize_u32(*r),
            Rank::Undecomposable => s.serialize_str("undecomposable"),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(r) => Ok(Rank::Finite(r)),
            Raw::S(s) if s == "undecomposable" => Ok(Rank::Undecomposable),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad rank {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrataKind {
    Symmetric,
    General,
}

/// A rank-1 tensor used to extend layers, with the first vectors (in
/// lexicographic order) that produce it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub vectors: Vec<Vec2>,
    index: u64,
}

impl Generator {
    /// Position of the generator in the searched space.
    pub fn index(&self) -> u64 {
        self.index
    }
}

#[derive(Clone, Copy, Debug)]
struct Parent {
    pred: u32,
    generator: u32,
}

/// A symmetric decomposition `X = Σ v_i^{⊗k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub vectors: Vec<Vec2>,
}

impl Witness {
    /// `Σ v_i^{⊗k}`.
    pub fn evaluate(&self, field: FieldSpec, order: usize) -> Result<SymTensor> {
        let mut acc = SymTensor::zeros(field, order)?;
        for &v in &self.vectors {
            acc = acc.add(&SymTensor::outer_power(field, v, order)?)?;
        }
        Ok(acc)
    }
}

/// Partition of a space of tensors into rank layers plus the unreachable
/// residue.
#[derive(Debug)]
pub struct RankStratification {
    field: FieldSpec,
    order: usize,
    kind: StrataKind,
    ranks: Vec<u8>,
    parents: Option<Vec<Parent>>,
    generators: Vec<Generator>,
    sizes: Vec<u64>,
    undecomposable: u64,
}

impl RankStratification {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> StrataKind {
        self.kind
    }

    /// Number of tensors in the searched space.
    pub fn total(&self) -> u64 {
        self.ranks.len() as u64
    }

    /// Sizes of layers `0..=max_rank`.
    pub fn stratum_sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Index of the last non-empty layer.
    pub fn max_rank(&self) -> u32 {
        self.sizes.len() as u32 - 1
    }

    pub fn undecomposable_count(&self) -> u64 {
        self.undecomposable
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// Codes of layer `r`, ascending.
    pub fn stratum(&self, r: u32) -> Vec<TensorCode> {
        self.codes_where(|rank| u32::from(rank) == r)
    }

    /// Codes with no decomposition, ascending.
    pub fn undecomposable(&self) -> Vec<TensorCode> {
        self.codes_where(|rank| rank == UNREACHED)
    }

    fn codes_where(&self, pred: impl Fn(u8) -> bool) -> Vec<TensorCode> {
        self.ranks
            .iter()
            .enumerate()
            .filter(|(_, &r)| pred(r))
            .map(|(i, _)| self.code_of_index(i as u64))
            .collect()
    }

    fn code_of_index(&self, index: u64) -> TensorCode {
        match self.kind {
            StrataKind::General => TensorCode(index),
            StrataKind::Symmetric => SymTensor::from_compact(
                &CompactSym::from_index(index, self.field, self.order).expect("index within symmetric space"),
            )
            .encode(),
        }
    }

    fn index_of(&self, x: &Tensor) -> Result<u64> {
        if x.field() != self.field || x.order() != self.order {
            return Err(Error::FieldMismatch {
                expected_p: self.field.p(),
                expected_k: self.order,
                p: x.field().p(),
                k: x.order(),
            });
        }
        match self.kind {
            StrataKind::General => Ok(x.encode().0),
            StrataKind::Symmetric => Ok(SymTensor::try_from(x.clone())?.compact().index()),
        }
    }

    /// Rank of `x` in this stratification.
    pub fn rank_of(&self, x: &Tensor) -> Result<Rank> {
        let r = self.ranks[self.index_of(x)? as usize];
        Ok(if r == UNREACHED {
            Rank::Undecomposable
        } else {
            Rank::Finite(u32::from(r))
        })
    }

    pub fn rank_of_code(&self, code: TensorCode) -> Result<Rank> {
        self.rank_of(&Tensor::decode(code, self.field, self.order)?)
    }

    /// Walks the recorded derivation of `x` back to zero and checks the
    /// result by re-summing.
    pub fn decompose(&self, x: &SymTensor) -> Result<Witness> {
        let parents = self.parents.as_ref().ok_or(Error::NoWitnesses)?;
        let mut idx = self.index_of(x)?;
        let rank = self.ranks[idx as usize];
        if rank == UNREACHED {
            return Err(Error::Undecomposable(self.field.p()));
        }
        let mut vectors = Vec::with_capacity(usize::from(rank));
        while idx != 0 {
            let parent = parents[idx as usize];
            vectors.push(self.generators[parent.generator as usize].vectors[0]);
            idx = u64::from(parent.pred);
        }
        vectors.reverse();
        let witness = Witness { vectors };
        if witness.vectors.len() != usize::from(rank) || witness.evaluate(self.field, self.order)? != *x {
            return Err(Error::Invariant(format!(
                "witness for {} does not re-sum to it",
                x.to_literal()
            )));
        }
        Ok(witness)
    }
}

/// Symmetric rank of `x`.
pub fn symmetric_rank(x: &SymTensor, strata: &RankStratification) -> Result<Rank> {
    strata.rank_of(x)
}

pub fn decompose(x: &SymTensor, strata: &RankStratification) -> Result<Witness> {
    strata.decompose(x)
}

pub fn max_symmetric_rank(strata: &RankStratification) -> u32 {
    strata.max_rank()
}

/// Digit-wise addition of radix-p codes through lookup tables on blocks of
/// digits, so the inner loops avoid per-digit division.
struct BlockAdder {
    base: u64,
    blocks: usize,
    table: Vec<u32>,
}

type Split = [u32; 16];

impl BlockAdder {
    fn new(field: FieldSpec, len: usize) -> Self {
        let p = u64::from(field.p());
        let mut width = 1;
        while width < len && p.pow(width as u32 + 1) <= 1024 {
            width += 1;
        }
        let base = p.pow(width as u32);
        let blocks = len.div_ceil(width);
        assert!(blocks <= 16);
        let mut table = vec![0u32; (base * base) as usize];
        let digits = |mut v: u64| {
            let mut d = vec![0u64; width];
            for slot in d.iter_mut() {
                *slot = v % p;
                v /= p;
            }
            d
        };
        for a in 0..base {
            let da = digits(a);
            for b in 0..base {
                let db = digits(b);
                let mut sum = 0;
                for i in (0..width).rev() {
                    sum = sum * p + (da[i] + db[i]) % p;
                }
                table[(a * base + b) as usize] = sum as u32;
            }
        }
        BlockAdder { base, blocks, table }
    }

    #[inline]
    fn split(&self, mut code: u64) -> Split {
        let mut out = [0u32; 16];
        for slot in out.iter_mut().take(self.blocks) {
            *slot = (code % self.base) as u32;
            code /= self.base;
        }
        out
    }

    #[inline]
    fn add(&self, a: &Split, b: &Split) -> u64 {
        let mut acc = 0u64;
        for i in (0..self.blocks).rev() {
            let s = self.table[(u64::from(a[i]) * self.base + u64::from(b[i])) as usize];
            acc = acc * self.base + u64::from(s);
        }
        acc
    }
}

/// All non-zero 2-vectors in lexicographic order.
fn nonzero_vectors(field: FieldSpec) -> Vec<Vec2> {
    let mut out = Vec::new();
    for i in field.elements() {
        for j in field.elements() {
            if (i, j) != (0, 0) {
                out.push([i, j]);
            }
        }
    }
    out
}

fn symmetric_generators(field: FieldSpec, order: usize) -> Result<Vec<Generator>> {
    let mut seen = std::collections::HashSet::new();
    let mut gens = Vec::new();
    for a in nonzero_vectors(field) {
        let index = SymTensor::outer_power(field, a, order)?.compact().index();
        if seen.insert(index) {
            gens.push(Generator {
                vectors: vec![a],
                index,
            });
        }
    }
    Ok(gens)
}

fn general_generators(field: FieldSpec, order: usize) -> Result<Vec<Generator>> {
    let vectors = nonzero_vectors(field);
    let mut seen = std::collections::HashSet::new();
    let mut gens = Vec::new();
    let mut choice = vec![0usize; order];
    loop {
        let factors: Vec<Vec2> = choice.iter().map(|&i| vectors[i]).collect();
        let index = Tensor::outer(field, &factors)?.encode().0;
        if seen.insert(index) {
            gens.push(Generator {
                vectors: factors,
                index,
            });
        }
        // odometer over factor choices, last factor fastest
        let mut m = order;
        loop {
            if m == 0 {
                return Ok(gens);
            }
            m -= 1;
            choice[m] += 1;
            if choice[m] < vectors.len() {
                break;
            }
            choice[m] = 0;
        }
    }
}

/// Symmetric-rank strata over the `p^(k+1)` symmetric tensors, with one
/// recorded derivation per tensor.
///
/// Derivations are taken in a fixed order (predecessors ascending, then
/// generators ascending) so witnesses are reproducible.
pub fn symmetric_rank_strata(field: FieldSpec, order: usize, budget: Budget) -> Result<RankStratification> {
    let n = symmetric_space_size(field, order)?;
    budget.check(n)?;
    if n > u64::from(u32::MAX) {
        return Err(Error::BudgetExceeded {
            needed: n,
            budget: u64::from(u32::MAX),
        });
    }
    let generators = symmetric_generators(field, order)?;
    let adder = BlockAdder::new(field, order + 1);
    let gen_split: Vec<Split> = generators.iter().map(|g| adder.split(g.index)).collect();

    let mut ranks = vec![UNREACHED; n as usize];
    let mut parents = vec![
        Parent {
            pred: u32::MAX,
            generator: u32::MAX,
        };
        n as usize
    ];
    ranks[0] = 0;
    let mut sizes = vec![1u64];
    let mut frontier = vec![0u64];
    while !frontier.is_empty() {
        let next_rank = sizes.len();
        if next_rank >= usize::from(UNREACHED) {
            return Err(Error::Invariant("rank exceeds 254".into()));
        }
        let mut next = Vec::new();
        for &x in &frontier {
            let xs = adder.split(x);
            for (gi, gs) in gen_split.iter().enumerate() {
                let y = adder.add(&xs, gs) as usize;
                if ranks[y] == UNREACHED {
                    ranks[y] = next_rank as u8;
                    parents[y] = Parent {
                        pred: x as u32,
                        generator: gi as u32,
                    };
                    next.push(y as u64);
                }
            }
        }
        next.sort_unstable();
        if !next.is_empty() {
            sizes.push(next.len() as u64);
        }
        frontier = next;
    }
    let reached: u64 = sizes.iter().sum();
    Ok(RankStratification {
        field,
        order,
        kind: StrataKind::Symmetric,
        ranks,
        parents: Some(parents),
        generators,
        sizes,
        undecomposable: n - reached,
    })
}

/// Outer-product-rank strata over all `p^(2^k)` tensors. No derivations
/// are kept.
///
/// Small layers are expanded forward from the frontier; once the frontier
/// is a sizeable fraction of what is still unreached, each unreached tensor
/// instead looks for a generator that takes it back into the frontier.
pub fn general_rank_strata(field: FieldSpec, order: usize, budget: Budget) -> Result<RankStratification> {
    let n = space_size(field, order)?;
    budget.check(n)?;
    let generators = general_generators(field, order)?;
    let adder = BlockAdder::new(field, 1 << order);
    let gen_split: Vec<Split> = generators.iter().map(|g| adder.split(g.index)).collect();
    let neg_split: Vec<Split> = generators
        .iter()
        .map(|g| {
            let neg = Tensor::decode(TensorCode(g.index), field, order)
                .expect("generator in range")
                .scale(field.neg(1))
                .encode();
            adder.split(neg.0)
        })
        .collect();

    let ranks: Vec<AtomicU8> = (0..n).map(|_| AtomicU8::new(UNREACHED)).collect();
    ranks[0].store(0, Ordering::Relaxed);
    let mut sizes = vec![1u64];
    let mut unreached = n - 1;
    const BLOCK: usize = 1 << 14;
    loop {
        let r = (sizes.len() - 1) as u8;
        if r + 1 == UNREACHED {
            return Err(Error::Invariant("rank exceeds 254".into()));
        }
        let frontier = *sizes.last().unwrap();
        let pull = frontier.saturating_mul(14) > unreached;
        let added: u64 = ranks
            .par_chunks(BLOCK)
            .enumerate()
            .map(|(bi, block)| {
                let base = (bi * BLOCK) as u64;
                let mut count = 0;
                for (off, cell) in block.iter().enumerate() {
                    let x = base + off as u64;
                    let state = cell.load(Ordering::Relaxed);
                    if pull && state == UNREACHED {
                        let xs = adder.split(x);
                        if neg_split
                            .iter()
                            .any(|g| ranks[adder.add(&xs, g) as usize].load(Ordering::Relaxed) == r)
                        {
                            cell.store(r + 1, Ordering::Relaxed);
                            count += 1;
                        }
                    } else if !pull && state == r {
                        let xs = adder.split(x);
                        for g in &gen_split {
                            let y = adder.add(&xs, g) as usize;
                            if ranks[y]
                                .compare_exchange(UNREACHED, r + 1, Ordering::Relaxed, Ordering::Relaxed)
                                .is_ok()
                            {
                                count += 1;
                            }
                        }
                    }
                }
                count
            })
            .sum();
        if added == 0 {
            break;
        }
        sizes.push(added);
        unreached -= added;
    }
    Ok(RankStratification {
        field,
        order,
        kind: StrataKind::General,
        ranks: ranks.into_iter().map(AtomicU8::into_inner).collect(),
        parents: None,
        generators,
        sizes,
        undecomposable: unreached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::parse_literal;
    use proptest::prelude::*;

    fn f(p: u32) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    fn sym(p: u32, lit: &str) -> SymTensor {
        SymTensor::try_from(parse_literal(lit, f(p), None).unwrap()).unwrap()
    }

    fn strata(p: u32, k: usize) -> RankStratification {
        symmetric_rank_strata(f(p), k, Budget::default()).unwrap()
    }

    /// Independent oracle: the minimal number of symmetric rank-1 terms, by
    /// enumerating multisets of non-zero vectors of growing size.
    fn brute_force_symmetric_rank(x: &SymTensor, max: usize) -> Option<usize> {
        let field = x.field();
        let powers: Vec<SymTensor> = nonzero_vectors(field)
            .into_iter()
            .map(|a| SymTensor::outer_power(field, a, x.order()).unwrap())
            .collect();
        fn search(target: &SymTensor, acc: &SymTensor, powers: &[SymTensor], start: usize, left: usize) -> bool {
            if left == 0 {
                return acc == target;
            }
            (start..powers.len()).any(|i| search(target, &acc.add(&powers[i]).unwrap(), powers, i, left - 1))
        }
        let zero = SymTensor::zeros(field, x.order()).unwrap();
        (0..=max).find(|&r| search(x, &zero, &powers, 0, r))
    }

    #[test]
    fn strata_examples() {
        let s2 = strata(2, 3);
        assert_eq!(s2.stratum_sizes(), &[1, 3, 3, 1]);
        assert_eq!(s2.undecomposable_count(), 8);
        let s7 = strata(7, 3);
        assert_eq!(s7.stratum_sizes(), &[1, 16, 128, 688, 1232, 336]);
        assert_eq!(s7.max_rank(), 5);
        let s5 = strata(5, 4);
        assert_eq!(s5.stratum_sizes(), &[1, 6, 21, 56, 126, 240, 395, 570, 690, 660, 360]);
        assert_eq!(max_symmetric_rank(&s5), 10);
    }

    #[test]
    fn max_rank_examples() {
        assert_eq!(strata(5, 3).max_rank(), 3);
        assert_eq!(strata(3, 4).max_rank(), 8);
        assert_eq!(strata(7, 4).max_rank(), 6);
    }

    #[test]
    fn rank_lookup_examples() {
        let s = strata(2, 3);
        assert_eq!(
            symmetric_rank(&SymTensor::zeros(f(2), 3).unwrap(), &s).unwrap(),
            Rank::Finite(0)
        );
        assert_eq!(symmetric_rank(&sym(2, "c:0,1,1,0"), &s).unwrap(), Rank::Finite(3));
        assert_eq!(
            symmetric_rank(&sym(2, "0,1,1,0,1,0,0,0"), &s).unwrap(),
            Rank::Undecomposable
        );
        let other = SymTensor::zeros(f(3), 3).unwrap();
        assert!(matches!(s.rank_of(&other), Err(Error::FieldMismatch { .. })));
        let asym = parse_literal("0,1,0,0,0,0,0,0", f(2), None).unwrap();
        assert!(matches!(s.rank_of(&asym), Err(Error::Asymmetric)));
    }

    #[test]
    fn decompose_examples() {
        let s = strata(2, 3);
        let e1 = SymTensor::outer_power(f(2), [1, 0], 3).unwrap();
        assert_eq!(decompose(&e1, &s).unwrap().vectors, vec![[1, 0]]);
        let x = sym(2, "0,1,1,1,1,1,1,1");
        let mut w = decompose(&x, &s).unwrap().vectors;
        w.sort();
        assert_eq!(w, vec![[1, 0], [1, 1]]);
        assert!(matches!(
            decompose(&sym(2, "c:0,1,0,0"), &s),
            Err(Error::Undecomposable(2))
        ));
        let s3 = strata(3, 3);
        for code in s3.stratum(4) {
            let x = SymTensor::decode(code, f(3), 3).unwrap();
            let w = decompose(&x, &s3).unwrap();
            assert_eq!(w.vectors.len(), 4);
            assert_eq!(w.evaluate(f(3), 3).unwrap(), x);
        }
    }

    #[test]
    fn strata_agree_with_brute_force_rank() {
        for (p, k) in [(2, 3), (3, 3), (2, 4), (5, 3)] {
            let s = strata(p, k);
            let max = s.max_rank() as usize;
            for idx in 0..s.total() {
                let x = SymTensor::from_compact(&CompactSym::from_index(idx, f(p), k).unwrap());
                let expected = brute_force_symmetric_rank(&x, max + 1);
                let got = s.rank_of(&x).unwrap().finite().map(|r| r as usize);
                assert_eq!(got, expected, "p={p} k={k} {}", x.to_literal());
            }
        }
    }

    #[test]
    fn strata_partition_the_symmetric_space() {
        for (p, k) in [(2, 3), (3, 3), (5, 3), (2, 4), (3, 4)] {
            let s = strata(p, k);
            let mut all: Vec<TensorCode> = (0..=s.max_rank()).flat_map(|r| s.stratum(r)).collect();
            all.extend(s.undecomposable());
            let n = all.len();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), n);
            assert_eq!(n as u64, u64::from(p).pow(k as u32 + 1));
            assert_eq!(s.stratum(0), vec![TensorCode(0)]);
            assert!(!s.stratum(s.max_rank()).is_empty());
            assert!(s.stratum(s.max_rank() + 1).is_empty());
        }
    }

    #[test]
    fn stratum_one_is_the_set_of_outer_powers() {
        for (p, k) in [(2, 3), (5, 3), (7, 4)] {
            let s = strata(p, k);
            let mut powers: Vec<TensorCode> = nonzero_vectors(f(p))
                .into_iter()
                .map(|a| SymTensor::outer_power(f(p), a, k).unwrap().encode())
                .collect();
            powers.sort();
            powers.dedup();
            assert_eq!(s.stratum(1), powers);
        }
    }

    #[test]
    fn witnesses_are_sound_exhaustive_small() {
        for (p, k) in [(2, 3), (3, 3), (2, 4), (3, 4)] {
            let s = strata(p, k);
            for r in 0..=s.max_rank() {
                for code in s.stratum(r) {
                    let x = SymTensor::decode(code, f(p), k).unwrap();
                    let w = s.decompose(&x).unwrap();
                    assert_eq!(w.vectors.len() as u32, r);
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            symmetric_rank_strata(f(7), 3, Budget(100)),
            Err(Error::BudgetExceeded {
                needed: 2401,
                budget: 100
            })
        ));
        assert!(matches!(
            general_rank_strata(f(7), 4, Budget::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn general_strata_sizes() {
        let g2 = general_rank_strata(f(2), 3, Budget::default()).unwrap();
        assert_eq!(g2.total(), 256);
        assert_eq!(g2.stratum_sizes().iter().sum::<u64>() + g2.undecomposable_count(), 256);
        assert_eq!(g2.undecomposable_count(), 0);
        // (p^2-1)^3 / (p-1)^2 distinct rank-1 tensors
        assert_eq!(g2.stratum_sizes()[1], 27);
        let g3 = general_rank_strata(f(3), 3, Budget::default()).unwrap();
        assert_eq!(g3.total(), 6561);
        assert_eq!(g3.stratum_sizes()[1], 128);
        assert!(matches!(
            g3.decompose(&SymTensor::zeros(f(3), 3).unwrap()),
            Err(Error::NoWitnesses)
        ));
    }

    #[test]
    fn general_strata_match_forward_only_search() {
        // the direction switch must not change the layers
        for (p, k) in [(2, 3), (3, 3), (2, 4)] {
            let fast = general_rank_strata(f(p), k, Budget::default()).unwrap();
            let n = space_size(f(p), k).unwrap() as usize;
            let gens: Vec<Tensor> = fast
                .generators()
                .iter()
                .map(|g| Tensor::decode(TensorCode(g.index()), f(p), k).unwrap())
                .collect();
            let mut rank = vec![UNREACHED; n];
            rank[0] = 0;
            let mut frontier = vec![Tensor::zeros(f(p), k).unwrap()];
            let mut r = 0;
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for x in &frontier {
                    for g in &gens {
                        let y = x.add(g).unwrap();
                        let c = y.encode().0 as usize;
                        if rank[c] == UNREACHED {
                            rank[c] = r + 1;
                            next.push(y);
                        }
                    }
                }
                frontier = next;
                r += 1;
            }
            for (c, &r) in rank.iter().enumerate() {
                let expected = if r == UNREACHED {
                    Rank::Undecomposable
                } else {
                    Rank::Finite(u32::from(r))
                };
                assert_eq!(fast.rank_of_code(TensorCode(c as u64)).unwrap(), expected);
            }
        }
    }

    #[test]
    fn adding_a_rank_one_term_moves_rank_by_at_most_one_for_odd_order() {
        for p in [3, 5, 7] {
            let s = strata(p, 3);
            let ones = s.stratum(1);
            for idx in (0..s.total()).step_by(7) {
                let x = SymTensor::from_compact(&CompactSym::from_index(idx, f(p), 3).unwrap());
                let rx = s.rank_of(&x).unwrap().finite().unwrap() as i64;
                for &y in &ones {
                    let y = SymTensor::decode(y, f(p), 3).unwrap();
                    let rs = s.rank_of(&x.add(&y).unwrap()).unwrap().finite().unwrap() as i64;
                    assert!((rs - rx).abs() <= 1);
                }
            }
        }
    }

    #[test]
    fn even_order_can_drop_rank_by_two() {
        // -a^{⊗4} need not be a fourth power: 2·e2^{⊗4} has rank 2 over F_3,
        // and adding e2^{⊗4} gives zero.
        let s = strata(3, 4);
        let x = sym(3, "c:0,0,0,0,2");
        let y = sym(3, "c:0,0,0,0,1");
        assert_eq!(s.rank_of(&x).unwrap(), Rank::Finite(2));
        assert_eq!(s.rank_of(&x.add(&y).unwrap()).unwrap(), Rank::Finite(0));
    }

    #[test]
    fn strata_are_thread_count_invariant() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let g = general_rank_strata(f(3), 3, Budget::default()).unwrap();
                    (g.stratum_sizes().to_vec(), g.ranks.clone())
                })
        };
        assert_eq!(run(1), run(3));
    }

    proptest! {
        #[test]
        fn witnesses_resum_sampled(
            pk in prop::sample::select(vec![(5u32, 3usize), (7, 3), (5, 4), (11, 3)]),
            idx in any::<u64>(),
        ) {
            let (p, k) = pk;
            let s = strata(p, k);
            let x = SymTensor::from_compact(&CompactSym::from_index(idx % s.total(), f(p), k).unwrap());
            let rank = s.rank_of(&x).unwrap().finite().unwrap();
            let w = s.decompose(&x).unwrap();
            prop_assert_eq!(w.vectors.len() as u32, rank);
            prop_assert_eq!(w.evaluate(f(p), k).unwrap(), x);
        }
    }
}
