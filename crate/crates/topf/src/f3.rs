//! Arithmetic in the field with three elements.
//!
//! The residue 2 plays the role of −1, which lets chains over this field
//! remember simplex orientations — the reason it is used for the persistence
//! computation instead of the more common two-element field.

use std::ops::{Add, Mul, Neg, Sub};

/// An element of Z/3Z, stored as a residue in {0, 1, 2}.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct F3(u8);

impl F3 {
    pub const ZERO: F3 = F3(0);
    pub const ONE: F3 = F3(1);
    /// 2 ≡ −1 (mod 3).
    pub const NEG_ONE: F3 = F3(2);

    #[inline]
    pub fn new(value: u8) -> F3 {
        F3(value % 3)
    }

    /// Reduction of a signed integer mod 3.
    #[inline]
    pub fn from_signed(value: i64) -> F3 {
        F3(value.rem_euclid(3) as u8)
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(self) -> F3 {
        match self.0 {
            1 => F3(1),
            2 => F3(2), // 2 * 2 = 4 ≡ 1
            _ => panic!("inverse of zero in F3"),
        }
    }

    /// The canonical embedding {0, 1, 2} → {0, +1, −1} ⊂ R.
    #[inline]
    pub fn to_real(self) -> f64 {
        match self.0 {
            0 => 0.0,
            1 => 1.0,
            _ => -1.0,
        }
    }
}

impl Add for F3 {
    type Output = F3;
    #[inline]
    fn add(self, rhs: F3) -> F3 {
        F3((self.0 + rhs.0) % 3)
    }
}

impl Sub for F3 {
    type Output = F3;
    #[inline]
    fn sub(self, rhs: F3) -> F3 {
        F3((3 + self.0 - rhs.0) % 3)
    }
}

impl Mul for F3 {
    type Output = F3;
    #[inline]
    fn mul(self, rhs: F3) -> F3 {
        F3((self.0 * rhs.0) % 3)
    }
}

impl Neg for F3 {
    type Output = F3;
    #[inline]
    fn neg(self) -> F3 {
        F3((3 - self.0) % 3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_exhaustive() {
        let all = [F3::ZERO, F3::ONE, F3::NEG_ONE];
        for &a in &all {
            for &b in &all {
                assert_eq!(a + b, b + a);
                assert_eq!(a * b, b * a);
                assert_eq!(a - b, a + (-b));
                for &c in &all {
                    assert_eq!((a + b) + c, a + (b + c));
                    assert_eq!(a * (b + c), a * b + a * c);
                }
            }
            assert_eq!(a + F3::ZERO, a);
            assert_eq!(a * F3::ONE, a);
            if !a.is_zero() {
                assert_eq!(a * a.inv(), F3::ONE);
            }
        }
    }

    #[test]
    fn one_is_not_neg_one() {
        assert_ne!(F3::ONE, F3::NEG_ONE);
        assert_eq!(-F3::ONE, F3::NEG_ONE);
        assert_eq!(F3::ONE.to_real(), 1.0);
        assert_eq!(F3::NEG_ONE.to_real(), -1.0);
    }

    #[test]
    fn from_signed_handles_negatives() {
        assert_eq!(F3::from_signed(-1), F3::NEG_ONE);
        assert_eq!(F3::from_signed(-3), F3::ZERO);
        assert_eq!(F3::from_signed(4), F3::ONE);
    }
}
