//! Measurable sets with exact measures: interval unions on the circle,
//! cylinders on tori, and subsets of `Z/N`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};
use crate::torus::TorusCoord;

const ONE: u128 = 1 << 64;

/// Half-open arc `[lo, hi)` of `[0, 1)` in units of `2^-64`; `hi` may equal `2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "hex_u128")]
    pub lo: u128,
    #[serde(with = "hex_u128")]
    pub hi: u128,
}

mod hex_u128 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:#x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let text = String::deserialize(d)?;
        let text = text.trim();
        if let Some(hex) = text.strip_prefix("0x") {
            return u128::from_str_radix(hex, 16).map_err(serde::de::Error::custom);
        }
        if text == "1" {
            return Ok(1 << 64);
        }
        text.parse::<crate::torus::TorusCoord>()
            .map(|t| t.raw() as u128)
            .map_err(serde::de::Error::custom)
    }
}

impl Interval {
    pub fn new(lo: u128, hi: u128) -> Result<Self> {
        if lo >= hi || hi > ONE {
            return Err(domain(format!("bad interval [{lo:#x}, {hi:#x})")));
        }
        Ok(Interval { lo, hi })
    }

    /// `[lo, hi)` from reals in `[0, 1]` (rounded to the fixed-point grid).
    pub fn from_f64(lo: f64, hi: f64) -> Result<Self> {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 18_446_744_073_709_551_616.0).round() as u128;
        Interval::new(q(lo), q(hi))
    }

    /// `[p/q, r/q)` with exact floors.
    pub fn from_ratio(lo_num: u64, hi_num: u64, den: u64) -> Result<Self> {
        let f = |n: u64| ((n as u128) << 64) / den as u128;
        Interval::new(f(lo_num), f(hi_num))
    }

    pub fn len(&self) -> u128 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: TorusCoord) -> bool {
        let x = x.raw() as u128;
        self.lo <= x && x < self.hi
    }
}

/// Sorted, pairwise disjoint, non-adjacent, nonempty arcs of `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for IntervalUnion {
    type Error = Error;
    fn try_from(v: Vec<Interval>) -> Result<Self> {
        for iv in &v {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(IntervalUnion::normalize(v))
    }
}

impl From<IntervalUnion> for Vec<Interval> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals
    }
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { intervals: Vec::new() }
    }

    pub fn full() -> Self {
        IntervalUnion { intervals: vec![Interval { lo: 0, hi: ONE }] }
    }

    pub fn single(iv: Interval) -> Self {
        IntervalUnion { intervals: vec![iv] }
    }

    /// `[lo, hi)` for reals `0 <= lo < hi <= 1`.
    pub fn from_f64(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self::single(Interval::from_f64(lo, hi)?))
    }

    /// Sorts and merges overlapping or touching arcs; drops empty ones.
    pub fn normalize(mut v: Vec<Interval>) -> Self {
        v.retain(|iv| !iv.is_empty());
        v.sort_by_key(|iv| (iv.lo, iv.hi));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Exact measure in units of `2^-64` (at most `2^64`).
    pub fn measure_raw(&self) -> u128 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn measure(&self) -> f64 {
        raw_to_f64(self.measure_raw())
    }

    pub fn contains(&self, x: TorusCoord) -> bool {
        let xr = x.raw() as u128;
        let idx = self.intervals.partition_point(|iv| iv.hi <= xr);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    /// `A + t mod 1`; arcs crossing 1 are split.
    pub fn shift(&self, t: TorusCoord) -> Self {
        let t = t.raw() as u128;
        let mut v = Vec::with_capacity(self.intervals.len() + 1);
        for iv in &self.intervals {
            let (lo, hi) = (iv.lo + t, iv.hi + t);
            if hi <= ONE {
                v.push(Interval { lo, hi });
            } else if lo >= ONE {
                v.push(Interval { lo: lo - ONE, hi: hi - ONE });
            } else {
                v.push(Interval { lo, hi: ONE });
                v.push(Interval { lo: 0, hi: hi - ONE });
            }
        }
        IntervalUnion::normalize(v)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if lo < hi {
                out.push(Interval { lo, hi });
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion { intervals: out }
    }

    /// Measure of `self ∩ other` without materializing it.
    pub fn intersection_measure_raw(&self, other: &Self) -> u128 {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut total = 0u128;
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if lo < hi {
                total += hi - lo;
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        IntervalUnion::normalize(v)
    }

    /// Number of distinct arc endpoints (bounds the grid error of quadrature).
    pub fn endpoint_count(&self) -> usize {
        2 * self.intervals.len()
    }
}

pub fn raw_to_f64(raw: u128) -> f64 {
    raw as f64 / 18_446_744_073_709_551_616.0
}

/// A subset of `Z/N` stored as a bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BitSetRepr", into = "BitSetRepr")]
pub struct BitSet {
    modulus: u64,
    words: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BitSetRepr {
    modulus: u64,
    members: Vec<u64>,
}

impl TryFrom<BitSetRepr> for BitSet {
    type Error = Error;
    fn try_from(r: BitSetRepr) -> Result<Self> {
        BitSet::from_members(r.modulus, &r.members)
    }
}

impl From<BitSet> for BitSetRepr {
    fn from(b: BitSet) -> Self {
        BitSetRepr { modulus: b.modulus, members: b.members().collect() }
    }
}

impl BitSet {
    pub fn new(modulus: u64) -> Self {
        BitSet { modulus, words: vec![0; (modulus as usize).div_ceil(64)] }
    }

    pub fn from_members(modulus: u64, members: &[u64]) -> Result<Self> {
        let mut s = BitSet::new(modulus);
        for &m in members {
            if m >= modulus {
                return Err(domain(format!("member {m} outside Z/{modulus}")));
            }
            s.insert(m);
        }
        Ok(s)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn insert(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: u64) -> bool {
        i < self.modulus && self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.modulus).filter(|&i| self.contains(i))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(shape(format!("Z/{} vs Z/{}", self.modulus, other.modulus)));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(BitSet { modulus: self.modulus, words })
    }

    /// `|self ∩ others[0] ∩ ...|` without allocating.
    pub fn intersection_count(&self, others: &[&BitSet]) -> Result<u64> {
        if let Some(o) = others.iter().find(|o| o.modulus != self.modulus) {
            return Err(shape(format!("Z/{} vs Z/{}", self.modulus, o.modulus)));
        }
        Ok((0..self.words.len())
            .map(|w| others.iter().fold(self.words[w], |acc, o| acc & o.words[w]).count_ones() as u64)
            .sum())
    }

    /// Bits `pos..pos + len` as a word, `len <= 64`, `pos + len <= N`.
    fn read_linear(&self, pos: u64, len: u64) -> u64 {
        if len == 0 {
            return 0;
        }
        let (q, r) = ((pos / 64) as usize, pos % 64);
        let mut v = self.words[q] >> r;
        if r > 0 && q + 1 < self.words.len() {
            v |= self.words[q + 1] << (64 - r);
        }
        if len < 64 {
            v &= (1 << len) - 1;
        }
        v
    }

    /// `A - t mod N`, i.e. `{x : x + t in A}`.
    pub fn shift_back(&self, t: u64) -> Self {
        let n = self.modulus;
        let mut out = BitSet::new(n);
        if n == 0 {
            return out;
        }
        let t = t % n;
        if n < 64 {
            for m in self.members() {
                out.insert((m + n - t) % n);
            }
            return out;
        }
        // bits above N stay zero: each output word reads only `min(64, N - 64 w)` bits
        for (w, word) in out.words.iter_mut().enumerate() {
            let len = (n - 64 * w as u64).min(64);
            let start = (64 * w as u64 + t) % n;
            let head = (n - start).min(len);
            *word = self.read_linear(start, head) | self.read_linear(0, len - head).checked_shl(head as u32).unwrap_or(0);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    /// `{p : coords(p)[coord] in set}`.
    TorusIntervals { coord: usize, set: IntervalUnion },
    /// Product of per-coordinate arcs (one entry per coordinate).
    CylinderProduct { factors: Vec<IntervalUnion> },
    /// Subset of `Z/N` (as phase space of a cyclic rotation).
    BitVectorSet { set: BitSet },
    FullSpace,
}

impl SetSpec {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(SetSpec::TorusIntervals { coord: 0, set: IntervalUnion::from_f64(lo, hi)? })
    }

    pub fn membership(&self, coords: &[TorusCoord], residue: Option<u64>) -> Result<bool> {
        match self {
            SetSpec::FullSpace => Ok(true),
            SetSpec::TorusIntervals { coord, set } => coords
                .get(*coord)
                .map(|&x| set.contains(x))
                .ok_or_else(|| shape(format!("set on coordinate {coord} of a {}-dimensional point", coords.len()))),
            SetSpec::CylinderProduct { factors } => {
                if factors.len() != coords.len() {
                    return Err(shape(format!("{}-factor cylinder on a {}-dimensional point", factors.len(), coords.len())));
                }
                Ok(factors.iter().zip(coords).all(|(f, &x)| f.contains(x)))
            }
            SetSpec::BitVectorSet { set } => residue
                .map(|r| set.contains(r))
                .ok_or_else(|| shape("bit-vector set evaluated at a non-cyclic point")),
        }
    }

    /// Arc endpoints (used for quadrature error bounds); 0 for bit vectors.
    pub fn endpoint_count(&self) -> usize {
        match self {
            SetSpec::TorusIntervals { set, .. } => set.endpoint_count(),
            SetSpec::CylinderProduct { factors } => factors.iter().map(IntervalUnion::endpoint_count).sum(),
            _ => 0,
        }
    }
}

/// Exact measure under Haar / counting measure.
pub fn set_measure(a: &SetSpec) -> f64 {
    match a {
        SetSpec::FullSpace => 1.0,
        SetSpec::TorusIntervals { set, .. } => set.measure(),
        SetSpec::CylinderProduct { factors } => factors.iter().map(IntervalUnion::measure).product(),
        SetSpec::BitVectorSet { set } if set.modulus() == 0 => 0.0,
        SetSpec::BitVectorSet { set } => set.count() as f64 / set.modulus() as f64,
    }
}

/// `A + t` for a set of arcs on one coordinate.
pub fn shift_set(a: &SetSpec, t: TorusCoord) -> Result<SetSpec> {
    match a {
        SetSpec::TorusIntervals { coord, set } => Ok(SetSpec::TorusIntervals { coord: *coord, set: set.shift(t) }),
        other => Err(Error::Variant(format!("shift_set needs torus intervals, got {other:?}"))),
    }
}

/// Exact intersection of sets of compatible variants.
pub fn intersect_sets(sets: &[SetSpec]) -> Result<SetSpec> {
    let mut iter = sets.iter();
    let mut acc = iter.next().cloned().unwrap_or(SetSpec::FullSpace);
    for s in iter {
        acc = intersect_pair(&acc, s)?;
    }
    Ok(acc)
}

fn intersect_pair(a: &SetSpec, b: &SetSpec) -> Result<SetSpec> {
    use SetSpec::*;
    match (a, b) {
        (FullSpace, x) | (x, FullSpace) => Ok(x.clone()),
        (TorusIntervals { coord: i, set: s }, TorusIntervals { coord: j, set: t }) if i == j => {
            Ok(TorusIntervals { coord: *i, set: s.intersect(t) })
        }
        (CylinderProduct { factors: f }, CylinderProduct { factors: g }) if f.len() == g.len() => {
            Ok(CylinderProduct { factors: f.iter().zip(g).map(|(x, y)| x.intersect(y)).collect() })
        }
        (CylinderProduct { factors }, TorusIntervals { coord, set })
        | (TorusIntervals { coord, set }, CylinderProduct { factors })
            if *coord < factors.len() =>
        {
            let mut factors = factors.clone();
            factors[*coord] = factors[*coord].intersect(set);
            Ok(CylinderProduct { factors })
        }
        (BitVectorSet { set: s }, BitVectorSet { set: t }) => Ok(BitVectorSet { set: s.intersect(t)? }),
        _ => Err(Error::Variant(format!("cannot intersect {a:?} with {b:?} exactly"))),
    }
}
