//! Symmetric tensors as binary forms.
//!
//! A symmetric tensor `X` of order `k` gives the polynomial function
//! `u ↦ Σ x_{i₁…i_k} u_{i₁}⋯u_{i_k}` on F_p². Collecting monomials gives the
//! coefficients `binomial(k, j) · c_j`, where `c_j` are the compact
//! coordinates. When `p ≤ k` some of those binomials vanish mod p and the
//! collected coefficients lose information, so checks here are done by
//! evaluation.

use crate::error::{Error, Result};
use crate::gfp::{binomial_mod, FieldSpec};
use crate::strata::RankStratification;
use crate::tensor::{parse_digits, SymTensor, Vec2};

/// A homogeneous polynomial of degree `k` in two variables.
/// `coeffs[j]` multiplies `x^(k-j) y^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    field: FieldSpec,
    coeffs: Vec<u32>,
}

impl BinaryForm {
    pub fn new(field: FieldSpec, coeffs: Vec<u32>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Parse {
                what: "binary form",
                msg: "need at least two coefficients".into(),
            });
        }
        for &c in &coeffs {
            field.residue(u64::from(c))?;
        }
        Ok(BinaryForm { field, coeffs })
    }

    /// Parses `k+1` base-p digits, highest power of `x` first.
    pub fn parse(text: &str, field: FieldSpec) -> Result<Self> {
        BinaryForm::new(field, parse_digits(text, field)?)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// `Σ_j coeffs[j] · u₁^(k-j) · u₂^j`.
    pub fn eval(&self, u: Vec2) -> u32 {
        let f = self.field;
        let k = self.degree() as u64;
        self.coeffs.iter().enumerate().fold(0, |acc, (j, &c)| {
            let j = j as u64;
            let term = f.mul(c, f.mul(f.pow(u[0], k - j), f.pow(u[1], j)));
            f.add(acc, term)
        })
    }
}

impl std::fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = self.degree();
        let mut terms = Vec::new();
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut term = if c == 1 { String::new() } else { c.to_string() };
            for (var, e) in [("x", k - j), ("y", j)] {
                match e {
                    0 => {}
                    1 => term.push_str(var),
                    _ => term.push_str(&format!("{var}^{e}")),
                }
            }
            terms.push(term);
        }
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

/// Collected form of `x`: `coeffs[j] = binomial(k, j) · c_j mod p`.
pub fn tensor_to_form(x: &SymTensor) -> BinaryForm {
    let field = x.field();
    let k = x.order() as u64;
    let coeffs = x
        .compact()
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| field.mul(binomial_mod(k, j as u64, field), c))
        .collect();
    BinaryForm { field, coeffs }
}

/// `Σ x_{i₁…i_k} u_{i₁}⋯u_{i_k}` summed over every entry of the full tensor.
pub fn eval_form(x: &SymTensor, u: Vec2) -> u32 {
    let f = x.field();
    let k = x.order();
    x.entries().iter().enumerate().fold(0, |acc, (idx, &v)| {
        let mut term = v;
        for m in 0..k {
            term = f.mul(term, u[(idx >> (k - 1 - m)) & 1]);
        }
        f.add(acc, term)
    })
}

/// Checks that the decomposition of `x` recorded in `strata` reproduces its
/// form as a sum of k-th powers of linear forms, at every point of F_p².
pub fn waring_rank_check(x: &SymTensor, strata: &RankStratification) -> Result<bool> {
    let witness = strata.decompose(x)?;
    let f = x.field();
    let k = x.order() as u64;
    for u0 in f.elements() {
        for u1 in f.elements() {
            let u = [u0, u1];
            let powers = witness.vectors.iter().fold(0, |acc, v| {
                let dot = f.add(f.mul(v[0], u0), f.mul(v[1], u1));
                f.add(acc, f.pow(dot, k))
            });
            if powers != eval_form(x, u) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Number of compact coordinates that `tensor_to_form` forgets, i.e. the
/// dimension of its kernel: how many `binomial(k, j)` vanish mod p.
pub fn coefficient_kernel_dimension(field: FieldSpec, order: usize) -> usize {
    (0..=order as u64)
        .filter(|&j| binomial_mod(order as u64, j, field) == 0)
        .count()
}

/// Dimension of the space of symmetric tensors whose form vanishes at every
/// point of F_p². Counted exhaustively, so meant for small `p`.
pub fn evaluation_kernel_dimension(field: FieldSpec, order: usize) -> Result<usize> {
    let n = crate::tensor::symmetric_space_size(field, order)?;
    let mut zeros = 0u64;
    for idx in 0..n {
        let x = SymTensor::from_compact(&crate::tensor::CompactSym::from_index(idx, field, order)?);
        if field
            .elements()
            .all(|a| field.elements().all(|b| eval_form(&x, [a, b]) == 0))
        {
            zeros += 1;
        }
    }
    let p = u64::from(field.p());
    let mut dim = 0;
    let mut size = 1;
    while size < zeros {
        size *= p;
        dim += 1;
    }
    if size != zeros {
        return Err(Error::Invariant(format!(
            "kernel of size {zeros} is not a power of {p}"
        )));
    }
    Ok(dim)
}
