//! Exact arithmetic in a prime field, used to solve the hint system.
//!
//! The production modulus is the smallest prime above 2^256, so every
//! 256-bit hash embeds injectively. Tests may substitute a small prime.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::digest::Digest;

/// Smallest prime exceeding 2^256, i.e. 2^256 + 297, big-endian.
pub const HINT_MODULUS_BYTES: [u8; 33] = {
    let mut b = [0u8; 33];
    b[0] = 0x01;
    b[31] = 0x01;
    b[32] = 0x29;
    b
};

/// Encoded width of one field element on the wire.
pub const ELEMENT_BYTES: usize = 33;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(BigUint);

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Back to a 256-bit digest; `None` when the value needs more than 256 bits.
    pub fn to_digest(&self) -> Option<Digest> {
        if self.0.bits() > 256 {
            return None;
        }
        let bytes = self.0.to_bytes_be();
        let mut out = [0u8; 32];
        out[32 - bytes.len()..].copy_from_slice(&bytes);
        Some(Digest(out))
    }

    /// Fixed-width 33-byte big-endian encoding.
    pub fn to_bytes33(&self) -> [u8; ELEMENT_BYTES] {
        let bytes = self.0.to_bytes_be();
        let mut out = [0u8; ELEMENT_BYTES];
        out[ELEMENT_BYTES - bytes.len()..].copy_from_slice(&bytes);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeField {
    modulus: BigUint,
}

impl PrimeField {
    /// The field used on the wire.
    pub fn hint_field() -> Self {
        PrimeField {
            modulus: BigUint::from_bytes_be(&HINT_MODULUS_BYTES),
        }
    }

    /// A field over an arbitrary prime. Primality is the caller's promise.
    pub fn with_modulus(modulus: BigUint) -> Self {
        assert!(modulus > BigUint::one(), "modulus must exceed 1");
        PrimeField { modulus }
    }

    pub fn from_u64_modulus(q: u64) -> Self {
        Self::with_modulus(BigUint::from(q))
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(BigUint::zero())
    }

    pub fn elem(&self, v: impl Into<BigUint>) -> FieldElement {
        FieldElement(v.into() % &self.modulus)
    }

    /// Parses a canonical element; `None` when the value is not below the modulus.
    pub fn from_bytes(&self, bytes: &[u8]) -> Option<FieldElement> {
        let v = BigUint::from_bytes_be(bytes);
        (v < self.modulus).then_some(FieldElement(v))
    }

    pub fn from_digest(&self, d: &Digest) -> FieldElement {
        self.elem(BigUint::from_bytes_be(d.as_bytes()))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let s = &a.0 + &b.0;
        FieldElement(if s >= self.modulus {
            s - &self.modulus
        } else {
            s
        })
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        if a.0 >= b.0 {
            FieldElement(&a.0 - &b.0)
        } else {
            FieldElement(&self.modulus - (&b.0 - &a.0))
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement((&a.0 * &b.0) % &self.modulus)
    }

    pub fn mul_u32(&self, a: &FieldElement, k: u32) -> FieldElement {
        FieldElement((&a.0 * k) % &self.modulus)
    }

    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.0.is_zero() {
            return None;
        }
        a.0.modinv(&self.modulus).map(FieldElement)
    }

    /// Solves `A·x = b` for a `rows × cols` matrix (row-major), `rows >= cols`.
    ///
    /// Returns `Err(Rank)` when the columns are dependent and `Err(Inconsistent)`
    /// when the surplus equations disagree with the unique solution.
    pub fn solve(
        &self,
        rows: usize,
        cols: usize,
        mut a: Vec<FieldElement>,
        mut b: Vec<FieldElement>,
    ) -> Result<Vec<FieldElement>, SolveError> {
        debug_assert_eq!(a.len(), rows * cols);
        debug_assert_eq!(b.len(), rows);
        if cols > rows {
            return Err(SolveError::Rank);
        }
        for col in 0..cols {
            let pivot = (col..rows)
                .find(|&r| !a[r * cols + col].is_zero())
                .ok_or(SolveError::Rank)?;
            if pivot != col {
                for k in 0..cols {
                    a.swap(pivot * cols + k, col * cols + k);
                }
                b.swap(pivot, col);
            }
            let inv = self.inv(&a[col * cols + col]).ok_or(SolveError::Rank)?;
            for k in col..cols {
                a[col * cols + k] = self.mul(&a[col * cols + k], &inv);
            }
            b[col] = self.mul(&b[col], &inv);
            for r in 0..rows {
                if r == col || a[r * cols + col].is_zero() {
                    continue;
                }
                let factor = a[r * cols + col].clone();
                for k in col..cols {
                    let t = self.mul(&factor, &a[col * cols + k]);
                    a[r * cols + k] = self.sub(&a[r * cols + k], &t);
                }
                let t = self.mul(&factor, &b[col]);
                b[r] = self.sub(&b[r], &t);
            }
        }
        if b[cols..].iter().any(|v| !v.is_zero()) {
            return Err(SolveError::Inconsistent);
        }
        b.truncate(cols);
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveError {
    Rank,
    Inconsistent,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Deterministic Miller-Rabin for the modulus check, independent of the field code.
    fn miller_rabin(n: &BigUint, bases: &[u32]) -> bool {
        let one = BigUint::one();
        let two = &one + &one;
        if *n < two {
            return false;
        }
        let n1 = n - &one;
        let s = n1.trailing_zeros().unwrap();
        let d = &n1 >> s;
        'outer: for &a in bases {
            let a = BigUint::from(a) % n;
            if a.is_zero() {
                continue;
            }
            let mut x = a.modpow(&d, n);
            if x == one || x == n1 {
                continue;
            }
            for _ in 1..s {
                x = x.modpow(&two, n);
                if x == n1 {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    #[test]
    fn hint_modulus_is_next_prime_after_2_256() {
        let base = BigUint::one() << 256u32;
        let q = BigUint::from_bytes_be(&HINT_MODULUS_BYTES);
        assert_eq!(&q - &base, BigUint::from(297u32));
        let bases: Vec<u32> = vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
        assert!(miller_rabin(&q, &bases));
        for k in 1u32..297 {
            assert!(
                !miller_rabin(&(&base + k), &bases),
                "2^256+{k} reported prime"
            );
        }
    }

    #[test]
    fn toy_field_arithmetic() {
        let f = PrimeField::from_u64_modulus(101);
        let a = f.elem(7u32);
        assert_eq!(f.inv(&a).unwrap(), f.elem(29u32));
        assert_eq!(f.sub(&f.elem(3u32), &f.elem(5u32)), f.elem(99u32));
        assert_eq!(f.inv(&f.zero()), None);
    }

    #[test]
    fn digest_embedding_round_trips() {
        let f = PrimeField::hint_field();
        let d = Digest([0xff; 32]);
        let e = f.from_digest(&d);
        assert_eq!(e.to_digest(), Some(d));
        assert_eq!(f.from_bytes(&e.to_bytes33()), Some(e));
        let top = f.sub(&f.zero(), &f.elem(1u32));
        assert_eq!(top.to_digest(), None);
        assert_eq!(f.from_bytes(&HINT_MODULUS_BYTES), None);
    }

    #[test]
    fn solve_square_and_overdetermined() {
        let f = PrimeField::from_u64_modulus(101);
        let e = |v: u32| f.elem(v);
        // 2x + y = 5, x + 3y = 10 (mod 101) -> x = 1, y = 3
        let x = f
            .solve(2, 2, vec![e(2), e(1), e(1), e(3)], vec![e(5), e(10)])
            .unwrap();
        assert_eq!(x, vec![e(1), e(3)]);
        // Surplus row consistent / inconsistent.
        assert_eq!(
            f.solve(2, 1, vec![e(2), e(4)], vec![e(6), e(12)]).unwrap(),
            vec![e(3)]
        );
        assert_eq!(
            f.solve(2, 1, vec![e(2), e(4)], vec![e(6), e(13)]),
            Err(SolveError::Inconsistent)
        );
        assert_eq!(
            f.solve(2, 2, vec![e(1), e(2), e(2), e(4)], vec![e(1), e(2)]),
            Err(SolveError::Rank)
        );
    }
}
