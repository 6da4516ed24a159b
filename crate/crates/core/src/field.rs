//! Binary extension fields used for share arithmetic.
//!
//! [`Gf64`] is GF(2^64) modulo `x^64 + x^4 + x^3 + x + 1`; an 8-byte data
//! segment maps onto it bijectively. [`Gf256`] is GF(2^8) modulo
//! `x^8 + x^4 + x^3 + x + 1` and exists so small parameter sets can be
//! enumerated exhaustively.

#![allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Operations shared by the fields the interpolation code runs over.
pub trait Field:
    Copy
    + Eq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const ZERO: Self;
    const ONE: Self;

    fn inv(self) -> Result<Self, FieldError>;

    fn is_zero(self) -> bool {
        self == Self::ZERO
    }
}

/// Replaces every element of `values` by its inverse using a single field
/// inversion. Fails if any element is zero, leaving `values` untouched.
pub fn batch_invert<F: Field>(values: &mut [F]) -> Result<(), FieldError> {
    if values.is_empty() {
        return Ok(());
    }
    let mut prefix = Vec::with_capacity(values.len());
    let mut acc = F::ONE;
    for &v in values.iter() {
        if v.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        prefix.push(acc);
        acc *= v;
    }
    let mut inv = acc.inv()?;
    for i in (0..values.len()).rev() {
        let v = values[i];
        values[i] = inv * prefix[i];
        inv *= v;
    }
    Ok(())
}

/// An element of GF(2^64).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf64(pub u64);

impl fmt::Debug for Gf64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf64({:#x})", self.0)
    }
}

impl Gf64 {
    pub const fn new(v: u64) -> Self {
        Gf64(v)
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Gf64(1);
        while exp != 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^64 - 2)`.
    pub fn inv(self) -> Result<Self, FieldError> {
        if self.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(u64::MAX - 1))
    }

    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: [u8; 8]) -> Self {
        Gf64(u64::from_le_bytes(bytes))
    }
}

/// Carry-less 64x64 -> 128 multiply, four bits of `b` at a time.
#[inline]
fn clmul(a: u64, b: u64) -> u128 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("pclmulqdq") {
            // SAFETY: feature presence checked above
            return unsafe { clmul_hw(a, b) };
        }
    }
    clmul_soft(a, b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq,sse2")]
unsafe fn clmul_hw(a: u64, b: u64) -> u128 {
    use std::arch::x86_64::*;
    let va = _mm_set_epi64x(0, a as i64);
    let vb = _mm_set_epi64x(0, b as i64);
    let r = _mm_clmulepi64_si128(va, vb, 0);
    let lo = _mm_cvtsi128_si64(r) as u64;
    let hi = _mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)) as u64;
    ((hi as u128) << 64) | lo as u128
}

fn clmul_soft(a: u64, b: u64) -> u128 {
    let a = a as u128;
    let mut table = [0u128; 16];
    for (i, entry) in table.iter_mut().enumerate().skip(1) {
        let mut v = 0u128;
        for bit in 0..4 {
            if i >> bit & 1 == 1 {
                v ^= a << bit;
            }
        }
        *entry = v;
    }
    let mut acc = 0u128;
    for nibble in (0..16).rev() {
        acc = (acc << 4) ^ table[((b >> (nibble * 4)) & 0xf) as usize];
    }
    acc
}

#[inline]
fn reduce(product: u128) -> u64 {
    let lo = product as u64;
    let hi = (product >> 64) as u64;
    // hi * (x^4 + x^3 + x + 1) overflows by at most 4 bits; fold those once more.
    let overflow = (hi >> 63) ^ (hi >> 61) ^ (hi >> 60);
    let folded = hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4);
    let extra = overflow ^ (overflow << 1) ^ (overflow << 3) ^ (overflow << 4);
    lo ^ folded ^ extra
}

impl Add for Gf64 {
    type Output = Gf64;
    fn add(self, rhs: Gf64) -> Gf64 {
        Gf64(self.0 ^ rhs.0)
    }
}

impl Sub for Gf64 {
    type Output = Gf64;
    fn sub(self, rhs: Gf64) -> Gf64 {
        Gf64(self.0 ^ rhs.0)
    }
}

impl Mul for Gf64 {
    type Output = Gf64;
    #[inline]
    fn mul(self, rhs: Gf64) -> Gf64 {
        Gf64(reduce(clmul(self.0, rhs.0)))
    }
}

impl AddAssign for Gf64 {
    fn add_assign(&mut self, rhs: Gf64) {
        self.0 ^= rhs.0;
    }
}

impl SubAssign for Gf64 {
    fn sub_assign(&mut self, rhs: Gf64) {
        self.0 ^= rhs.0;
    }
}

impl MulAssign for Gf64 {
    fn mul_assign(&mut self, rhs: Gf64) {
        *self = *self * rhs;
    }
}

impl Field for Gf64 {
    const ZERO: Self = Gf64(0);
    const ONE: Self = Gf64(1);

    fn inv(self) -> Result<Self, FieldError> {
        Gf64::inv(self)
    }
}

pub fn gf_add(a: Gf64, b: Gf64) -> Gf64 {
    a + b
}

pub fn gf_mul(a: Gf64, b: Gf64) -> Gf64 {
    a * b
}

pub fn gf_inv(a: Gf64) -> Result<Gf64, FieldError> {
    a.inv()
}

/// An element of GF(2^8) (AES polynomial).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf256(pub u8);

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

impl Gf256 {
    pub fn pow(self, mut exp: u32) -> Self {
        let mut base = self;
        let mut acc = Gf256(1);
        while exp != 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }
}

impl Add for Gf256 {
    type Output = Gf256;
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl Sub for Gf256 {
    type Output = Gf256;
    fn sub(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    fn mul(self, rhs: Gf256) -> Gf256 {
        let (mut a, mut b, mut p) = (self.0, rhs.0, 0u8);
        while b != 0 {
            if b & 1 == 1 {
                p ^= a;
            }
            let carry = a & 0x80;
            a <<= 1;
            if carry != 0 {
                a ^= 0x1b;
            }
            b >>= 1;
        }
        Gf256(p)
    }
}

impl AddAssign for Gf256 {
    fn add_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

impl SubAssign for Gf256 {
    fn sub_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

impl MulAssign for Gf256 {
    fn mul_assign(&mut self, rhs: Gf256) {
        *self = *self * rhs;
    }
}

impl Field for Gf256 {
    const ZERO: Self = Gf256(0);
    const ONE: Self = Gf256(1);

    fn inv(self) -> Result<Self, FieldError> {
        if self.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(254))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // x^64 = x^4 + x^3 + x + 1 (mod p)
    const GF64_REDUCTION: u64 = 0x1b;

    #[test]
    fn clmul_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let (a, b): (u64, u64) = (rng.gen(), rng.gen());
            assert_eq!(clmul(a, b), clmul_soft(a, b));
        }
        assert_eq!(clmul_soft(u64::MAX, u64::MAX), clmul(u64::MAX, u64::MAX));
    }

    /// Shift-and-add multiply with reduction applied bit by bit.
    fn mul_oracle(a: u64, b: u64) -> u64 {
        let (mut a, mut b, mut p) = (a, b, 0u64);
        while b != 0 {
            if b & 1 == 1 {
                p ^= a;
            }
            let carry = a >> 63;
            a <<= 1;
            if carry == 1 {
                a ^= GF64_REDUCTION;
            }
            b >>= 1;
        }
        p
    }

    /// Inverse by extended Euclid over GF(2)[x], independent of `pow`.
    fn inv_oracle(a: u64) -> u64 {
        fn deg(v: u128) -> i32 {
            127 - v.leading_zeros() as i32
        }
        let modulus: u128 = (1u128 << 64) | GF64_REDUCTION as u128;
        let (mut r0, mut r1) = (modulus, a as u128);
        let (mut s0, mut s1) = (0u128, 1u128);
        while r1 != 0 {
            while r0 != 0 && deg(r0) >= deg(r1) {
                let shift = deg(r0) - deg(r1);
                r0 ^= r1 << shift;
                s0 ^= s1 << shift;
            }
            std::mem::swap(&mut r0, &mut r1);
            std::mem::swap(&mut s0, &mut s1);
        }
        assert_eq!(r0, 1);
        let mut s = s0;
        for bit in (64..128).rev() {
            if s >> bit & 1 == 1 {
                s ^= modulus << (bit - 64);
            }
        }
        s as u64
    }

    #[test]
    fn add_examples() {
        assert_eq!(gf_add(Gf64(0x5), Gf64(0x3)), Gf64(0x6));
        let a = Gf64(0xdead_beef_0123_4567);
        assert_eq!(gf_add(a, Gf64(0)), a);
        assert_eq!(gf_add(a, a), Gf64(0));
    }

    #[test]
    fn mul_examples() {
        let a = Gf64(0x0123_4567_89ab_cdef);
        assert_eq!(gf_mul(a, Gf64(1)), a);
        assert_eq!(gf_mul(Gf64(0x2), Gf64(0x3)), Gf64(0x6));
        // x^63 * x = x^64 = x^4 + x^3 + x + 1
        assert_eq!(gf_mul(Gf64(1 << 63), Gf64(2)), Gf64(0x1b));
    }

    #[test]
    fn mul_matches_oracle_on_all_byte_pairs() {
        for a in 0u64..256 {
            for b in 0u64..256 {
                assert_eq!(gf_mul(Gf64(a), Gf64(b)).0, mul_oracle(a, b), "{a} * {b}");
            }
        }
    }

    #[test]
    fn mul_matches_oracle_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let (a, b): (u64, u64) = (rng.gen(), rng.gen());
            assert_eq!(gf_mul(Gf64(a), Gf64(b)).0, mul_oracle(a, b));
        }
    }

    #[test]
    fn distributivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let (a, b, c) = (Gf64(rng.gen()), Gf64(rng.gen()), Gf64(rng.gen()));
            assert_eq!(a * (b + c), a * b + a * c);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(gf_inv(Gf64(1)), Ok(Gf64(1)));
        assert_eq!(gf_inv(Gf64(0)), Err(FieldError::ZeroInverse));
        let v = gf_inv(Gf64(2)).unwrap();
        assert_eq!(v.0, inv_oracle(2));
        assert_eq!(gf_mul(Gf64(2), v), Gf64(1));
    }

    #[test]
    fn inverse_of_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..10_000 {
            let a = Gf64(rng.gen::<u64>() | 1);
            let inv = a.inv().unwrap();
            assert_eq!(a * inv, Gf64(1));
            if i < 200 {
                assert_eq!(inv.0, inv_oracle(a.0));
            }
        }
    }

    #[test]
    fn batch_inversion_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut values: Vec<Gf64> = (0..33).map(|_| Gf64(rng.gen::<u64>() | 1)).collect();
        let expected: Vec<Gf64> = values.iter().map(|v| v.inv().unwrap()).collect();
        batch_invert(&mut values).unwrap();
        assert_eq!(values, expected);

        let mut with_zero = vec![Gf64(3), Gf64(0)];
        assert!(batch_invert(&mut with_zero).is_err());
        assert_eq!(with_zero, vec![Gf64(3), Gf64(0)]);
    }

    #[test]
    fn gf256_is_a_field() {
        for a in 1..=255u8 {
            let inv = Gf256(a).inv().unwrap();
            assert_eq!(Gf256(a) * inv, Gf256(1));
        }
        // 0x53 * 0xca = 1 in the AES field
        assert_eq!(Gf256(0x53) * Gf256(0xca), Gf256(1));
    }
}
