//! GL₂(F_p) and its action on 2×…×2 tensors by changes of basis along the
//! modes.
//!
//! Only the diagonal action `(g, …, g) · X` preserves symmetry, so orbits,
//! canonical forms and stabilizers here are always taken with respect to it.
//! The single-mode [`act`] is exposed because the diagonal action is its
//! k-fold composition.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gfp::FieldSpec;
use crate::tensor::{encode_digits, Mat2, SymTensor, Tensor, TensorCode, Vec2, MAX_ORDER};

/// An invertible 2×2 matrix over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    field: FieldSpec,
    m: Mat2,
}

impl GroupElement {
    pub fn new(field: FieldSpec, m: Mat2) -> Result<Self> {
        for row in &m {
            for &v in row {
                field.residue(u64::from(v))?;
            }
        }
        let det = field.sub(field.mul(m[0][0], m[1][1]), field.mul(m[0][1], m[1][0]));
        if det == 0 {
            return Err(Error::SingularMatrix(field.p()));
        }
        Ok(GroupElement { field, m })
    }

    pub fn identity(field: FieldSpec) -> Self {
        GroupElement {
            field,
            m: [[1, 0], [0, 1]],
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    /// Matrix product `self · other`; acting by it equals acting by `other`
    /// first and then by `self`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let f = self.field;
        let (a, b) = (&self.m, &other.m);
        let e = |i: usize, j: usize| f.add(f.mul(a[i][0], b[0][j]), f.mul(a[i][1], b[1][j]));
        GroupElement {
            field: f,
            m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    /// `g · v`.
    pub fn apply(&self, v: Vec2) -> Vec2 {
        let f = self.field;
        let m = &self.m;
        [
            f.add(f.mul(m[0][0], v[0]), f.mul(m[0][1], v[1])),
            f.add(f.mul(m[1][0], v[0]), f.mul(m[1][1], v[1])),
        ]
    }

    /// In-place update of every mode-`m` fiber (0-based mode).
    fn apply_mode(&self, entries: &mut [u32], order: usize, mode: usize) {
        let bit = 1usize << (order - 1 - mode);
        for idx in 0..entries.len() {
            if idx & bit == 0 {
                let w = self.apply([entries[idx], entries[idx | bit]]);
                entries[idx] = w[0];
                entries[idx | bit] = w[1];
            }
        }
    }

    fn apply_all_modes(&self, entries: &mut [u32], order: usize) {
        for mode in 0..order {
            self.apply_mode(entries, order, mode);
        }
    }
}

/// Every invertible 2×2 matrix over F_p, in lexicographic order of
/// `(m11, m12, m21, m22)`. There are `(p²−1)(p²−p)` of them.
pub fn enumerate_gl2(field: FieldSpec) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(field.gl2_order() as usize);
    for a in field.elements() {
        for b in field.elements() {
            for c in field.elements() {
                for d in field.elements() {
                    if let Ok(g) = GroupElement::new(field, [[a, b], [c, d]]) {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

/// Applies `g` along a single mode (1-based, as in `x_{i_1 … i_k}`).
pub fn act(g: &GroupElement, x: &Tensor, mode: usize) -> Result<Tensor> {
    check_field(g, x)?;
    if mode == 0 || mode > x.order() {
        return Err(Error::ModeOutOfRange { mode, order: x.order() });
    }
    let mut entries = x.flatten();
    g.apply_mode(&mut entries, x.order(), mode - 1);
    Ok(Tensor::from_raw(x.field(), x.order(), entries))
}

/// `(g, …, g) · X`.
pub fn act_diagonal(g: &GroupElement, x: &SymTensor) -> Result<SymTensor> {
    check_field(g, x)?;
    let mut entries = x.flatten();
    g.apply_all_modes(&mut entries, x.order());
    Ok(SymTensor::from_tensor_unchecked(Tensor::from_raw(
        x.field(),
        x.order(),
        entries,
    )))
}

fn check_field(g: &GroupElement, x: &Tensor) -> Result<()> {
    if g.field != x.field() {
        return Err(Error::FieldMismatch {
            expected_p: g.field.p(),
            expected_k: x.order(),
            p: x.field().p(),
            k: x.order(),
        });
    }
    Ok(())
}

/// An orbit under the diagonal action, as a sorted set of codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    members: Vec<TensorCode>,
    stabilizer: u64,
}

impl Orbit {
    /// Sorted, distinct member codes.
    pub fn members(&self) -> &[TensorCode] {
        &self.members
    }

    /// The lexicographically minimal member.
    pub fn canonical(&self) -> TensorCode {
        self.members[0]
    }

    pub fn size(&self) -> u64 {
        self.members.len() as u64
    }

    /// Number of group elements fixing the seed tensor, counted directly
    /// while the orbit was generated.
    pub fn stabilizer_size(&self) -> u64 {
        self.stabilizer
    }

    pub fn contains(&self, code: TensorCode) -> bool {
        self.members.binary_search(&code).is_ok()
    }
}

/// GL₂(F_p) enumerated once, for repeated orbit computations.
#[derive(Clone, Debug)]
pub struct Gl2 {
    field: FieldSpec,
    elements: Vec<GroupElement>,
}

impl Gl2 {
    pub fn new(field: FieldSpec) -> Self {
        Gl2 {
            field,
            elements: enumerate_gl2(field),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    /// Applies every group element to `x`. The element list is split across
    /// the current rayon pool; the merged result does not depend on the
    /// split.
    pub fn orbit(&self, x: &SymTensor) -> Result<Orbit> {
        if x.field() != self.field {
            return Err(Error::FieldMismatch {
                expected_p: self.field.p(),
                expected_k: x.order(),
                p: x.field().p(),
                k: x.order(),
            });
        }
        let order = x.order();
        let seed = x.encode();
        let field = self.field;
        let chunk = (self.elements.len() / (4 * rayon::current_num_threads())).max(256);
        let parts: Vec<(Vec<TensorCode>, u64)> = self
            .elements
            .par_chunks(chunk)
            .map(|gs| {
                let mut buf = [0u32; 1 << MAX_ORDER];
                let buf = &mut buf[..1 << order];
                let mut codes = Vec::with_capacity(gs.len());
                let mut fixed = 0;
                for g in gs {
                    buf.copy_from_slice(x.entries());
                    g.apply_all_modes(buf, order);
                    let code = TensorCode(encode_digits(buf, field));
                    fixed += u64::from(code == seed);
                    codes.push(code);
                }
                codes.sort_unstable();
                codes.dedup();
                (codes, fixed)
            })
            .collect();
        let stabilizer = parts.iter().map(|(_, s)| s).sum();
        let mut members: Vec<TensorCode> = parts.into_iter().flat_map(|(c, _)| c).collect();
        members.sort_unstable();
        members.dedup();
        Ok(Orbit { members, stabilizer })
    }

    pub fn canonical_form(&self, x: &SymTensor) -> Result<SymTensor> {
        let orbit = self.orbit(x)?;
        SymTensor::decode(orbit.canonical(), self.field, x.order())
    }

    /// `|GL₂(F_p)| / |orbit|`.
    pub fn stabilizer_size(&self, x: &SymTensor) -> Result<u64> {
        Ok(self.order() / self.orbit(x)?.size())
    }

    /// Stabilizer counted element by element.
    pub fn stabilizer_count_direct(&self, x: &SymTensor) -> Result<u64> {
        let mut n = 0;
        for g in &self.elements {
            if act_diagonal(g, x)? == *x {
                n += 1;
            }
        }
        Ok(n)
    }
}

/// Orbit of `x` under the diagonal GL₂(F_p) action.
pub fn orbit(x: &SymTensor) -> Result<Orbit> {
    Gl2::new(x.field()).orbit(x)
}

/// Lexicographically minimal member of the orbit of `x`.
pub fn canonical_form(x: &SymTensor) -> Result<SymTensor> {
    Gl2::new(x.field()).canonical_form(x)
}

pub fn stabilizer_size(x: &SymTensor) -> Result<u64> {
    Gl2::new(x.field()).stabilizer_size(x)
}
