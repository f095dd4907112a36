//! Tensors of format 2×…×2 over F_p.
//!
//! Entries are stored flattened: the entry at subscript tuple
//! `(i_1, …, i_k)` lives at the position whose binary expansion is
//! `i_1 … i_k` (with subscript 1 ↦ bit 0, subscript 2 ↦ bit 1, `i_1` most
//! significant). This is the lexicographic order of subscript tuples, so for
//! order 3 the layout is `x111, x112, x121, x122, x211, x212, x221, x222`.
//!
//! A symmetric tensor is determined by `k + 1` values: `compact[j]` is the
//! common value of the entries whose subscript tuple contains exactly `j`
//! twos.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfp::FieldSpec;

/// Largest order the representation admits.
pub const MAX_ORDER: usize = 6;

/// A 2-vector over F_p.
pub type Vec2 = [u32; 2];

/// A 2×2 matrix over F_p, row major.
pub type Mat2 = [[u32; 2]; 2];

/// Radix-p evaluation of the flattened entry vector, `x_{1…1}` most
/// significant. Numeric order on codes equals lexicographic order on
/// flattened tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TensorCode(pub u64);

impl fmt::Display for TensorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Checks that `(field, order)` is a representable shape and returns
/// `p^(2^order)`, the number of tensors of that shape.
pub fn space_size(field: FieldSpec, order: usize) -> Result<u64> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    u64::from(field.p())
        .checked_pow(1 << order)
        .ok_or(Error::CodeOverflow { p: field.p(), order })
}

/// `p^(order+1)`, the number of symmetric tensors of that shape.
pub fn symmetric_space_size(field: FieldSpec, order: usize) -> Result<u64> {
    space_size(field, order)?;
    Ok(u64::from(field.p()).pow(order as u32 + 1))
}

/// A full order-k tensor. Symmetry is not assumed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tensor {
    field: FieldSpec,
    order: usize,
    entries: Vec<u32>,
}

impl Tensor {
    pub fn zeros(field: FieldSpec, order: usize) -> Result<Self> {
        space_size(field, order)?;
        Ok(Tensor {
            field,
            order,
            entries: vec![0; 1 << order],
        })
    }

    /// Builds a tensor from its flattened entries (the inverse of
    /// [`Tensor::flatten`]).
    pub fn unflatten(field: FieldSpec, order: usize, entries: Vec<u32>) -> Result<Self> {
        space_size(field, order)?;
        if entries.len() != 1 << order {
            return Err(Error::LengthMismatch {
                expected: 1 << order,
                found: entries.len(),
            });
        }
        for &v in &entries {
            field.residue(u64::from(v))?;
        }
        Ok(Tensor { field, order, entries })
    }

    /// Outer product `v_1 ⊗ … ⊗ v_k`. Every factor must be non-zero.
    pub fn outer(field: FieldSpec, vectors: &[Vec2]) -> Result<Self> {
        let order = vectors.len();
        space_size(field, order)?;
        for v in vectors {
            field.residue(u64::from(v[0]))?;
            field.residue(u64::from(v[1]))?;
            if v == &[0, 0] {
                return Err(Error::ZeroVector);
            }
        }
        let entries = (0..1usize << order)
            .map(|idx| {
                vectors
                    .iter()
                    .enumerate()
                    .fold(1, |acc, (m, v)| field.mul(acc, v[subscript(idx, order, m)]))
            })
            .collect();
        Ok(Tensor { field, order, entries })
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Flattened entries in lexicographic subscript order.
    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn flatten(&self) -> Vec<u32> {
        self.entries.clone()
    }

    /// Entry at a 0-based subscript tuple (`0` for subscript 1, `1` for 2).
    pub fn get(&self, tuple: &[usize]) -> u32 {
        assert_eq!(tuple.len(), self.order);
        self.entries[tuple.iter().fold(0, |acc, &i| (acc << 1) | (i & 1))]
    }

    /// True iff every entry equals the entry at every permutation of its
    /// subscript tuple. For a 2×…×2 tensor that is the same as the entry
    /// depending only on how many subscripts equal 2.
    pub fn is_symmetric(&self) -> bool {
        let mut by_weight = [None; MAX_ORDER + 1];
        self.entries.iter().enumerate().all(|(idx, &v)| {
            let w = idx.count_ones() as usize;
            match by_weight[w] {
                None => {
                    by_weight[w] = Some(v);
                    true
                }
                Some(u) => u == v,
            }
        })
    }

    pub fn encode(&self) -> TensorCode {
        TensorCode(encode_digits(&self.entries, self.field))
    }

    pub fn decode(code: TensorCode, field: FieldSpec, order: usize) -> Result<Self> {
        let limit = space_size(field, order)?;
        if code.0 >= limit {
            return Err(Error::CodeOutOfRange { code: code.0, limit });
        }
        Ok(Tensor {
            field,
            order,
            entries: decode_digits(code.0, field, 1 << order),
        })
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(Tensor {
            field: f,
            order: self.order,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    /// Entrywise multiple `c · X`.
    pub fn scale(&self, c: u32) -> Tensor {
        let f = self.field;
        Tensor {
            field: f,
            order: self.order,
            entries: self.entries.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    /// The two slices of an order-3 tensor in the given mode.
    pub fn slices(&self, mode: SliceMode) -> Result<[Mat2; 2]> {
        if self.order != 3 {
            return Err(Error::SlicesNeedOrder3);
        }
        let x = |i: usize, j: usize, k: usize| self.entries[(i << 2) | (j << 1) | k];
        let slice = |s: usize| -> Mat2 {
            match mode {
                SliceMode::Frontal => [[x(0, 0, s), x(0, 1, s)], [x(1, 0, s), x(1, 1, s)]],
                SliceMode::Vertical => [[x(0, s, 0), x(0, s, 1)], [x(1, s, 0), x(1, s, 1)]],
                SliceMode::Horizontal => [[x(s, 0, 0), x(s, 0, 1)], [x(s, 1, 0), x(s, 1, 1)]],
            }
        };
        Ok([slice(0), slice(1)])
    }

    /// Comma-separated flattened digits, the form accepted by
    /// [`parse_literal`].
    pub fn to_literal(&self) -> String {
        digits_literal(&self.entries)
    }

    pub(crate) fn from_raw(field: FieldSpec, order: usize, entries: Vec<u32>) -> Tensor {
        debug_assert_eq!(entries.len(), 1 << order);
        Tensor { field, order, entries }
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.field != other.field || self.order != other.order {
            return Err(Error::FieldMismatch {
                expected_p: self.field.p(),
                expected_k: self.order,
                p: other.field.p(),
                k: other.order,
            });
        }
        Ok(())
    }
}

/// Which index is held fixed when slicing an order-3 tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceMode {
    /// Third index fixed; rows indexed by the first, columns by the second.
    Frontal,
    /// Second index fixed; rows by the first, columns by the third.
    Vertical,
    /// First index fixed; rows by the second, columns by the third.
    Horizontal,
}

/// A tensor known to be symmetric.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymTensor(Tensor);

impl SymTensor {
    pub fn zeros(field: FieldSpec, order: usize) -> Result<Self> {
        Tensor::zeros(field, order).map(SymTensor)
    }

    /// `a ⊗ … ⊗ a` (k factors). Rejects the zero vector: the zero tensor has
    /// rank 0, not 1.
    pub fn outer_power(field: FieldSpec, a: Vec2, order: usize) -> Result<Self> {
        Tensor::outer(field, &vec![a; order]).map(SymTensor)
    }

    pub fn from_compact(c: &CompactSym) -> SymTensor {
        let entries = (0..1usize << c.order)
            .map(|idx| c.coeffs[idx.count_ones() as usize])
            .collect();
        SymTensor(Tensor::from_raw(c.field, c.order, entries))
    }

    pub fn compact(&self) -> CompactSym {
        let k = self.0.order;
        // The entry with the last j subscripts equal to 2 has weight j.
        let coeffs = (0..=k).map(|j| self.0.entries[(1 << j) - 1]).collect();
        CompactSym {
            field: self.0.field,
            order: k,
            coeffs,
        }
    }

    pub fn decode(code: TensorCode, field: FieldSpec, order: usize) -> Result<Self> {
        SymTensor::try_from(Tensor::decode(code, field, order)?)
    }

    #[inline]
    pub fn as_tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn add(&self, other: &SymTensor) -> Result<SymTensor> {
        self.0.add(&other.0).map(SymTensor)
    }

    pub(crate) fn from_tensor_unchecked(t: Tensor) -> SymTensor {
        debug_assert!(t.is_symmetric());
        SymTensor(t)
    }
}

impl std::ops::Deref for SymTensor {
    type Target = Tensor;
    fn deref(&self) -> &Tensor {
        &self.0
    }
}

impl TryFrom<Tensor> for SymTensor {
    type Error = Error;
    fn try_from(t: Tensor) -> Result<Self> {
        if t.is_symmetric() {
            Ok(SymTensor(t))
        } else {
            Err(Error::Asymmetric)
        }
    }
}

impl From<SymTensor> for Tensor {
    fn from(s: SymTensor) -> Tensor {
        s.0
    }
}

/// The `k + 1` free coordinates of a symmetric tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompactSym {
    field: FieldSpec,
    order: usize,
    coeffs: Vec<u32>,
}

impl CompactSym {
    pub fn new(field: FieldSpec, order: usize, coeffs: Vec<u32>) -> Result<Self> {
        space_size(field, order)?;
        if coeffs.len() != order + 1 {
            return Err(Error::LengthMismatch {
                expected: order + 1,
                found: coeffs.len(),
            });
        }
        for &v in &coeffs {
            field.residue(u64::from(v))?;
        }
        Ok(CompactSym { field, order, coeffs })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Radix-p index of the coefficient vector, `coeffs[0]` most
    /// significant. Ordering agrees with [`TensorCode`] ordering of the full
    /// tensors.
    pub fn index(&self) -> u64 {
        encode_digits(&self.coeffs, self.field)
    }

    pub fn from_index(index: u64, field: FieldSpec, order: usize) -> Result<Self> {
        let limit = symmetric_space_size(field, order)?;
        if index >= limit {
            return Err(Error::CodeOutOfRange { code: index, limit });
        }
        Ok(CompactSym {
            field,
            order,
            coeffs: decode_digits(index, field, order + 1),
        })
    }
}

/// 0-based subscript of mode `m` (0-based) in flattened position `idx`.
#[inline]
pub(crate) fn subscript(idx: usize, order: usize, m: usize) -> usize {
    (idx >> (order - 1 - m)) & 1
}

pub(crate) fn encode_digits(digits: &[u32], field: FieldSpec) -> u64 {
    let p = u64::from(field.p());
    digits.iter().fold(0, |acc, &d| acc * p + u64::from(d))
}

pub(crate) fn decode_digits(mut code: u64, field: FieldSpec, len: usize) -> Vec<u32> {
    let p = u64::from(field.p());
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % p) as u32;
        code /= p;
    }
    out
}

pub(crate) fn digits_literal(digits: &[u32]) -> String {
    digits.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Parses a tensor literal: comma- or space-separated residues in flatten
/// order (`2^k` of them), or `c:` followed by the `k + 1` compact
/// coordinates. When `order` is `None` it is inferred from the digit count.
pub fn parse_literal(text: &str, field: FieldSpec, order: Option<usize>) -> Result<Tensor> {
    let (compact, body) = match text.trim().strip_prefix("c:") {
        Some(rest) => (true, rest),
        None => (false, text.trim()),
    };
    let digits = parse_digits(body, field)?;
    let n = digits.len();
    let order = match order {
        Some(k) => k,
        None if compact && n >= 2 => n - 1,
        None if !compact && n.is_power_of_two() && n >= 2 => n.trailing_zeros() as usize,
        None => {
            return Err(Error::Parse {
                what: "tensor literal",
                msg: format!("{n} digits do not determine an order"),
            })
        }
    };
    if compact {
        Ok(SymTensor::from_compact(&CompactSym::new(field, order, digits)?).into_tensor())
    } else {
        Tensor::unflatten(field, order, digits)
    }
}

/// Parses comma/space separated residues.
pub fn parse_digits(body: &str, field: FieldSpec) -> Result<Vec<u32>> {
    body.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|tok| {
            if !tok.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse {
                    what: "residue",
                    msg: format!("{tok:?} is not a decimal residue"),
                });
            }
            let v: u64 = tok.parse().map_err(|_| Error::Parse {
                what: "residue",
                msg: format!("{tok:?} is too large"),
            })?;
            field.residue(v)
        })
        .collect()
}
