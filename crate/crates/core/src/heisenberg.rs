//! The Heisenberg group `R^3` with `(x,y,z)*(x',y',z') = (x+x', y+y', z+z'+x*y')`.
//!
//! Elements are generic over an exact coefficient ring (`i64`, `i128`,
//! rationals). The nilmanifold `G/Z^3` with fixed-point coordinates lives in
//! [`crate::systems`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Coefficients the group law needs: a commutative ring with exact arithmetic.
pub trait Coeff:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_i64(n: i64) -> Self;
}

macro_rules! int_coeff {
    ($($t:ty),*) => {$(
        impl Coeff for $t {
            fn zero() -> Self { 0 }
            fn from_i64(n: i64) -> Self { n as $t }
        }
    )*};
}
int_coeff!(i64, i128);

impl<T> Coeff for num_rational::Ratio<T>
where
    T: Copy + std::fmt::Debug + num_integer::Integer + Neg<Output = T> + From<i32> + TryFrom<i64>,
{
    fn zero() -> Self {
        num_rational::Ratio::from_integer(T::from(0))
    }
    fn from_i64(n: i64) -> Self {
        let n = T::try_from(n).unwrap_or_else(|_| panic!("{n} does not fit the coefficient type"));
        num_rational::Ratio::from_integer(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeisenbergElement<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Coeff> HeisenbergElement<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        HeisenbergElement { x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y, self.z + other.z + self.x * other.y)
    }

    pub fn inv(&self) -> Self {
        Self::new(-self.x, -self.y, -self.z + self.x * self.y)
    }

    /// `g^n = (n x, n y, n z + C(n,2) x y)`, valid for every integer `n`.
    pub fn pow(&self, n: i64) -> Self {
        let nn = T::from_i64(n);
        let binom = T::from_i64(binom2(n));
        Self::new(nn * self.x, nn * self.y, nn * self.z + binom * self.x * self.y)
    }

    /// `[g, h] = g^{-1} h^{-1} g h`; always central with `x = y = 0`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.inv().mul(&other.inv()).mul(self).mul(other)
    }
}

/// `n (n - 1) / 2` for any integer `n`.
pub fn binom2(n: i64) -> i64 {
    let n = n as i128;
    (n * (n - 1) / 2) as i64
}

/// Free-standing forms of the group operations.
pub fn heis_mul<T: Coeff>(g: &HeisenbergElement<T>, h: &HeisenbergElement<T>) -> HeisenbergElement<T> {
    g.mul(h)
}

pub fn heis_inv<T: Coeff>(g: &HeisenbergElement<T>) -> HeisenbergElement<T> {
    g.inv()
}

pub fn heis_pow<T: Coeff>(g: &HeisenbergElement<T>, n: i64) -> HeisenbergElement<T> {
    g.pow(n)
}

pub fn heis_commutator<T: Coeff>(g: &HeisenbergElement<T>, h: &HeisenbergElement<T>) -> HeisenbergElement<T> {
    g.commutator(h)
}

/// Two-step Hall–Petresco data for a pair `x, y`: `z = x y` and `w1 = [x, y]`,
/// so that `x^k y^k = z^k w1^{C(k,2)}` for every `k`. Higher correction terms
/// vanish because the group is 2-step nilpotent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HallPetresco<T> {
    pub z: HeisenbergElement<T>,
    pub w1: HeisenbergElement<T>,
}

impl<T: Coeff> HallPetresco<T> {
    /// `z^k w1^{C(k,2)}`.
    pub fn progression_term(&self, k: i64) -> HeisenbergElement<T> {
        self.z.pow(k).mul(&self.w1.pow(binom2(k)))
    }
}

pub fn hall_petresco<T: Coeff>(x: &HeisenbergElement<T>, y: &HeisenbergElement<T>) -> HallPetresco<T> {
    HallPetresco { z: x.mul(y), w1: x.commutator(y) }
}

/// Checks `x^k y^k = z^k w1^{C(k,2)}` for `1 <= k <= n` with exact arithmetic.
/// Returns the first `k` that fails.
pub fn hall_petresco_verify<T: Coeff>(
    x: &HeisenbergElement<T>,
    y: &HeisenbergElement<T>,
    n: i64,
) -> Result<(), i64> {
    let hp = hall_petresco(x, y);
    let mut xk = HeisenbergElement::identity();
    let mut yk = HeisenbergElement::identity();
    for k in 1..=n {
        // repeated multiplication, independent of the closed-form power
        xk = xk.mul(x);
        yk = yk.mul(y);
        if xk.mul(&yk) != hp.progression_term(k) {
            return Err(k);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    type H = HeisenbergElement<i64>;

    #[test]
    fn group_law_fixtures() {
        let a = H::new(1, 0, 0);
        let b = H::new(0, 1, 0);
        assert_eq!(a.mul(&b), H::new(1, 1, 1));
        assert_eq!(b.mul(&a), H::new(1, 1, 0));
        assert_eq!(H::new(1, 1, 0).pow(3), H::new(3, 3, 3));
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let g = H::new(2, -3, 5);
        let mut acc = H::identity();
        for n in 0..12 {
            assert_eq!(g.pow(n), acc);
            assert_eq!(g.pow(-n), acc.inv());
            acc = acc.mul(&g);
        }
    }

    #[test]
    fn inverse_is_two_sided() {
        let g = H::new(4, 7, -2);
        assert_eq!(g.inv(), H::new(-4, -7, 2 + 28));
        assert_eq!(g.mul(&g.inv()), H::identity());
        assert_eq!(g.inv().mul(&g), H::identity());
    }

    #[test]
    fn hall_petresco_unit_vectors() {
        let x = H::new(1, 0, 0);
        let y = H::new(0, 1, 0);
        let hp = hall_petresco(&x, &y);
        assert_eq!(hp.z, H::new(1, 1, 1));
        assert_eq!(hp.w1, H::new(0, 0, 1));
        // x^2 y^2 = (2,0,0)(0,2,0) = (2,2,4) = z^2 w1
        assert_eq!(x.pow(2).mul(&y.pow(2)), H::new(2, 2, 4));
        assert_eq!(hp.progression_term(2), H::new(2, 2, 4));
        assert!(hall_petresco_verify(&x, &y, 20).is_ok());
    }

    #[test]
    fn hall_petresco_identity_pair() {
        let e = H::identity();
        let hp = hall_petresco(&e, &e);
        assert_eq!(hp.z, e);
        assert_eq!(hp.w1, e);
    }

    #[test]
    fn rational_coefficients_are_exact() {
        use num_rational::Ratio;
        let q = |n: i64, d: i64| Ratio::new(n, d);
        let g = HeisenbergElement::new(q(1, 3), q(2, 5), q(0, 1));
        let h = HeisenbergElement::new(q(-7, 2), q(1, 9), q(3, 4));
        let w = HeisenbergElement::new(q(5, 6), q(-1, 7), q(2, 3));
        assert_eq!(g.mul(&h).mul(&w), g.mul(&h.mul(&w)));
        let c = g.commutator(&h);
        assert_eq!((c.x, c.y), (q(0, 1), q(0, 1)));
        assert_eq!(c.z, q(1, 3) * q(1, 9) - q(2, 5) * q(-7, 2));
        // g^3 = (1, 6/5, C(3,2) * 2/15)
        assert_eq!(g.pow(3), HeisenbergElement::new(q(1, 1), q(6, 5), q(6, 15)));
    }
}
