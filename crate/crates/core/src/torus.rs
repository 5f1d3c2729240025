//! Fixed-point points of the circle `R/Z`.
//!
//! A [`TorusCoord`] stores `raw / 2^64`; addition is wrapping integer
//! addition, so orbit computations are exact and bit-reproducible. The
//! [`WideCoord`] variant carries 128 fractional bits and holds products of two
//! `TorusCoord`s without rounding (needed for the Heisenberg fibre coordinate).

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusCoord(u64);

impl TorusCoord {
    pub const ZERO: TorusCoord = TorusCoord(0);
    pub const HALF: TorusCoord = TorusCoord(1 << 63);
    /// `sqrt(2) - 1`, truncated to 64 bits.
    pub const SQRT2_MINUS_1: TorusCoord = TorusCoord(0x6a09_e667_f3bc_c908);
    /// `(sqrt(5) - 1) / 2`, truncated to 64 bits.
    pub const GOLDEN: TorusCoord = TorusCoord(0x9e37_79b9_7f4a_7c15);
    /// `sqrt(3) - 1`, truncated to 64 bits.
    pub const SQRT3_MINUS_1: TorusCoord = TorusCoord(0xbb67_ae85_84ca_a73b);

    pub const fn from_raw(raw: u64) -> Self {
        TorusCoord(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    /// Nearest fixed-point value to the fractional part of `x`.
    pub fn from_f64(x: f64) -> Self {
        let frac = x - x.floor();
        let scaled = (frac * TWO_POW_64).round();
        if scaled >= TWO_POW_64 {
            TorusCoord(0)
        } else {
            TorusCoord(scaled as u64)
        }
    }

    /// `floor(frac(num / den) * 2^64)`, exact.
    pub fn from_ratio(num: i128, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let den = den as i128;
        let r = num.rem_euclid(den) as u128;
        TorusCoord(((r << 64) / den as u128) as u64)
    }

    /// Value in `[0, 1)`. Drops the low 11 bits so the result never rounds up to 1.
    pub fn to_f64(self) -> f64 {
        (self.0 >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn mul_int(self, n: i128) -> Self {
        TorusCoord((self.0 as u128).wrapping_mul(n as u128) as u64)
    }

    /// Distance to the nearest integer, `||x||`.
    pub fn dist_to_int(self) -> f64 {
        let r = self.0.min(self.0.wrapping_neg());
        r as f64 / TWO_POW_64
    }

    /// The character `e(x) = exp(2 pi i x)`.
    pub fn e(self) -> Complex64 {
        phase_to_unit(self.to_f64())
    }

    pub fn widen(self) -> WideCoord {
        WideCoord((self.0 as u128) << 64)
    }
}

/// `exp(2 pi i t)`.
pub fn phase_to_unit(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

impl Add for TorusCoord {
    type Output = TorusCoord;
    fn add(self, rhs: TorusCoord) -> TorusCoord {
        TorusCoord(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for TorusCoord {
    type Output = TorusCoord;
    fn sub(self, rhs: TorusCoord) -> TorusCoord {
        TorusCoord(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for TorusCoord {
    type Output = TorusCoord;
    fn neg(self) -> TorusCoord {
        TorusCoord(self.0.wrapping_neg())
    }
}

impl AddAssign for TorusCoord {
    fn add_assign(&mut self, rhs: TorusCoord) {
        *self = *self + rhs;
    }
}

impl SubAssign for TorusCoord {
    fn sub_assign(&mut self, rhs: TorusCoord) {
        *self = *self - rhs;
    }
}

impl fmt::Debug for TorusCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusCoord({:#018x} ~ {})", self.0, self.to_f64())
    }
}

impl fmt::Display for TorusCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// Textual forms: `0x<raw hex>` (exact), `p/q` (exact floor), the named
/// constants `sqrt2-1`, `golden`, `sqrt3-1`, or a decimal (nearest value).
impl FromStr for TorusCoord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "sqrt2-1" => return Ok(Self::SQRT2_MINUS_1),
            "golden" => return Ok(Self::GOLDEN),
            "sqrt3-1" => return Ok(Self::SQRT3_MINUS_1),
            _ => {}
        }
        if let Some(hex) = s.strip_prefix("0x") {
            return u64::from_str_radix(hex, 16)
                .map(TorusCoord)
                .map_err(|e| format!("bad raw coordinate {s:?}: {e}"));
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
            let q: u64 = q.trim().parse().map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
            if q == 0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Self::from_ratio(p, q));
        }
        let x: f64 = s.parse().map_err(|e| format!("bad coordinate {s:?}: {e}"))?;
        if !x.is_finite() {
            return Err(format!("non-finite coordinate {s:?}"));
        }
        Ok(Self::from_f64(x))
    }
}

impl Serialize for TorusCoord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{:#x}", self.0))
    }
}

impl<'de> Deserialize<'de> for TorusCoord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Float(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Float(x) if x.is_finite() => Ok(TorusCoord::from_f64(x)),
            Repr::Float(x) => Err(serde::de::Error::custom(format!("non-finite coordinate {x}"))),
        }
    }
}

/// Point of `R/Z` with 128 fractional bits.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WideCoord(u128);

impl WideCoord {
    pub const ZERO: WideCoord = WideCoord(0);

    pub const fn from_raw(raw: u128) -> Self {
        WideCoord(raw)
    }

    pub const fn raw(self) -> u128 {
        self.0
    }

    /// Exact product of two circle coordinates read as reals in `[0, 1)`, mod 1.
    pub fn product(a: TorusCoord, b: TorusCoord) -> Self {
        WideCoord(a.raw() as u128 * b.raw() as u128)
    }

    pub fn mul_int(self, n: i128) -> Self {
        WideCoord(self.0.wrapping_mul(n as u128))
    }

    /// Top 64 bits, i.e. the value rounded down to a [`TorusCoord`].
    pub fn narrow(self) -> TorusCoord {
        TorusCoord((self.0 >> 64) as u64)
    }

    pub fn to_f64(self) -> f64 {
        self.narrow().to_f64()
    }
}

impl Add for WideCoord {
    type Output = WideCoord;
    fn add(self, rhs: WideCoord) -> WideCoord {
        WideCoord(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for WideCoord {
    type Output = WideCoord;
    fn sub(self, rhs: WideCoord) -> WideCoord {
        WideCoord(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for WideCoord {
    type Output = WideCoord;
    fn neg(self) -> WideCoord {
        WideCoord(self.0.wrapping_neg())
    }
}

impl fmt::Debug for WideCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WideCoord({:#034x} ~ {})", self.0, self.to_f64())
    }
}

impl Serialize for WideCoord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{:#x}", self.0))
    }
}

impl<'de> Deserialize<'de> for WideCoord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let s = s.trim();
        if let Some(hex) = s.strip_prefix("0x") {
            u128::from_str_radix(hex, 16)
                .map(WideCoord)
                .map_err(serde::de::Error::custom)
        } else {
            s.parse::<TorusCoord>()
                .map(TorusCoord::widen)
                .map_err(serde::de::Error::custom)
        }
    }
}
