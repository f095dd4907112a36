//! Arithmetic in the prime field F_p on canonical residues `0..p`.
//!
//! Residues are plain `u32` values. Range is checked once by
//! [`FieldSpec::residue`]; the arithmetic methods assume valid inputs and only
//! debug-assert them, since they sit in the innermost enumeration loops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted. Keeps every product of two residues below 2^32.
pub const MAX_PRIME: u32 = 65_521;

/// A prime modulus `p` defining F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldSpec {
    p: u32,
}

impl FieldSpec {
    /// Checks primality by trial division.
    pub fn new(p: u32) -> Result<Self> {
        if p > MAX_PRIME || !is_prime(u64::from(p)) {
            return Err(Error::NotPrime(u64::from(p)));
        }
        Ok(FieldSpec { p })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    /// Validates `value` as a canonical residue.
    pub fn residue(self, value: u64) -> Result<u32> {
        if value < u64::from(self.p) {
            Ok(value as u32)
        } else {
            Err(Error::ResidueOutOfRange { value, p: self.p })
        }
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.p && b < self.p);
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.p && b < self.p);
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.p && b < self.p);
        (a * b) % self.p
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32> {
        debug_assert!(a < self.p);
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (i64::from(self.p), i64::from(a));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(t0.rem_euclid(i64::from(self.p)) as u32)
    }

    /// All residues in increasing order.
    pub fn elements(self) -> impl Iterator<Item = u32> + Clone {
        0..self.p
    }

    /// Order of GL_2(F_p): (p^2 - 1)(p^2 - p).
    pub fn gl2_order(self) -> u64 {
        let p = u64::from(self.p);
        (p * p - 1) * (p * p - p)
    }
}

impl TryFrom<u32> for FieldSpec {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        FieldSpec::new(p)
    }
}

impl From<FieldSpec> for u32 {
    fn from(f: FieldSpec) -> u32 {
        f.p
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `binomial(n, k) mod p`, computed over the integers first.
pub fn binomial_mod(n: u64, k: u64, field: FieldSpec) -> u32 {
    if k > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    (c % u128::from(field.p())) as u32
}
