//! Finite integer sets in a window `[0, N)`: Behrend sets, progression and
//! quadratic-configuration search, shifted densities and gap statistics.
//!
//! Densities and gaps are window quantities and always carry their horizon.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};

/// A subset of `[0, N)` stored as a bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct IntegerWindowSet {
    window: u64,
    words: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    window: u64,
    members: Vec<u64>,
}

impl TryFrom<WindowRepr> for IntegerWindowSet {
    type Error = Error;
    fn try_from(r: WindowRepr) -> Result<Self> {
        IntegerWindowSet::from_members(r.window, &r.members)
    }
}

impl From<IntegerWindowSet> for WindowRepr {
    fn from(s: IntegerWindowSet) -> Self {
        WindowRepr { window: s.window, members: s.members() }
    }
}

impl fmt::Debug for IntegerWindowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerWindowSet(N={}, {:?})", self.window, self.members())
    }
}

const MAX_WINDOW: u64 = 1 << 32;

impl IntegerWindowSet {
    pub fn empty(window: u64) -> Result<Self> {
        if window > MAX_WINDOW {
            return Err(crate::error::guard(format!("window {window} exceeds 2^32")));
        }
        Ok(IntegerWindowSet { window, words: vec![0; window.div_ceil(64) as usize] })
    }

    pub fn full(window: u64) -> Result<Self> {
        let mut s = IntegerWindowSet::empty(window)?;
        s.words.iter_mut().for_each(|w| *w = u64::MAX);
        s.trim();
        Ok(s)
    }

    pub fn from_members(window: u64, members: &[u64]) -> Result<Self> {
        let mut s = IntegerWindowSet::empty(window)?;
        for &m in members {
            s.insert(m)?;
        }
        Ok(s)
    }

    /// Each `x` in the window is included independently with probability `density`.
    pub fn random<R: Rng + ?Sized>(window: u64, density: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(domain(format!("density {density} outside [0, 1]")));
        }
        let mut s = IntegerWindowSet::empty(window)?;
        for x in 0..window {
            if rng.gen::<f64>() < density {
                s.set(x);
            }
        }
        Ok(s)
    }

    fn trim(&mut self) {
        let tail = self.window % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    fn set(&mut self, x: u64) {
        self.words[(x / 64) as usize] |= 1 << (x % 64);
    }

    pub fn insert(&mut self, x: u64) -> Result<()> {
        if x >= self.window {
            return Err(domain(format!("{x} outside the window [0, {})", self.window)));
        }
        self.set(x);
        Ok(())
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= 0 && (x as u64) < self.window && self.words[(x as u64 / 64) as usize] >> (x as u64 % 64) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn density(&self) -> f64 {
        if self.window == 0 {
            0.0
        } else {
            self.len() as f64 / self.window as f64
        }
    }

    pub fn members(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * 64 + b)
            })
        })
    }

    /// `{x in [0, N) : x + s in E}` for any integer `s`.
    pub fn shifted(&self, s: i64) -> Self {
        let mut out = IntegerWindowSet { window: self.window, words: vec![0; self.words.len()] };
        let nw = self.words.len() as i64;
        let word_shift = s.div_euclid(64);
        let bit = s.rem_euclid(64) as u32;
        for (i, slot) in out.words.iter_mut().enumerate() {
            let src = i as i64 + word_shift;
            let lo = if (0..nw).contains(&src) { self.words[src as usize] } else { 0 };
            let hi = if (0..nw).contains(&(src + 1)) { self.words[(src + 1) as usize] } else { 0 };
            *slot = if bit == 0 { lo } else { lo >> bit | hi << (64 - bit) };
        }
        out.trim();
        out
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.window != other.window {
            return Err(shape(format!("windows {} and {}", self.window, other.window)));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(IntegerWindowSet { window: self.window, words })
    }

    /// One member per line after a `window N` header.
    pub fn to_members_text(&self) -> String {
        let mut s = format!("window {}\n", self.window);
        for m in self.iter() {
            s.push_str(&m.to_string());
            s.push('\n');
        }
        s
    }

    /// `window N rle` header, then alternating run lengths starting with an
    /// absent run (possibly 0).
    pub fn to_rle_text(&self) -> String {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u64;
        for x in 0..self.window {
            let b = self.contains(x as i64);
            if b != current {
                runs.push(len);
                current = b;
                len = 0;
            }
            len += 1;
        }
        runs.push(len);
        let body: Vec<String> = runs.iter().map(u64::to_string).collect();
        format!("window {} rle\n{}\n", self.window, body.join(" "))
    }
}

impl FromStr for IntegerWindowSet {
    type Err = Error;

    /// Accepts either text form, blank lines and `#` comments ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| domain("empty set text"))?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let (window, rle) = match words.as_slice() {
            ["window", n] => (parse_u64(n)?, false),
            ["window", n, "rle"] => (parse_u64(n)?, true),
            _ => return Err(domain(format!("bad header line {header:?} (expected `window N` or `window N rle`)"))),
        };
        let mut set = IntegerWindowSet::empty(window)?;
        if rle {
            let mut pos = 0u64;
            let mut present = false;
            for tok in lines.flat_map(str::split_whitespace) {
                let run = parse_u64(tok)?;
                if pos.checked_add(run).is_none_or(|e| e > window) {
                    return Err(domain("run lengths exceed the window"));
                }
                if present {
                    (pos..pos + run).for_each(|x| set.set(x));
                }
                pos += run;
                present = !present;
            }
            if pos != window {
                return Err(domain(format!("run lengths cover {pos} of {window} positions")));
            }
        } else {
            for l in lines {
                set.insert(parse_u64(l)?)?;
            }
        }
        Ok(set)
    }
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse().map_err(|_| domain(format!("not a nonnegative integer: {s:?}")))
}

/// Whether `E` contains `a, a + d, a + 2d` with `d != 0`.
pub fn has_3ap(e: &IntegerWindowSet) -> bool {
    let m = e.members();
    m.par_iter().enumerate().any(|(i, &a)| m[i + 1..].iter().any(|&b| e.contains(2 * b as i64 - a as i64)))
}

/// Whether `E` contains a `k`-term progression with nonzero difference.
pub fn has_kap(e: &IntegerWindowSet, k: usize) -> bool {
    match k {
        0 => true,
        1 => !e.is_empty(),
        2 => e.len() >= 2,
        3 => has_3ap(e),
        _ => {
            let n = e.window();
            let span = (k - 1) as u64;
            (1..=n.saturating_sub(1) / span).into_par_iter().any(|d| {
                let mut acc = e.clone();
                for j in 1..k as i64 {
                    acc = acc.intersect(&e.shifted(j * d as i64)).expect("same window");
                    if acc.is_empty() {
                        return false;
                    }
                }
                true
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApCountReport {
    pub k: usize,
    pub window: u64,
    /// `(d, #{a : a, a+d, ..., a+(k-1)d in E})` for `d = 1..=(N-1)/(k-1)`.
    pub counts_by_difference: Vec<(u64, u64)>,
    pub total: u64,
}

fn max_difference(n: u64, k: usize) -> u64 {
    n.saturating_sub(1) / (k as u64 - 1)
}

/// Progressions of length `k >= 3` in `E`, grouped by positive difference.
pub fn count_aps_by_difference(e: &IntegerWindowSet, k: usize) -> Result<ApCountReport> {
    if k < 3 {
        return Err(domain(format!("progression length k = {k} must be >= 3")));
    }
    let counts: Vec<(u64, u64)> = (1..=max_difference(e.window(), k))
        .into_par_iter()
        .map(|d| {
            let mut acc = e.clone();
            for j in 1..k as i64 {
                acc = acc.intersect(&e.shifted(j * d as i64)).expect("same window");
            }
            (d, acc.len())
        })
        .collect();
    Ok(report(k, e.window(), counts))
}

fn report(k: usize, window: u64, counts_by_difference: Vec<(u64, u64)>) -> ApCountReport {
    let total = counts_by_difference.iter().map(|c| c.1).sum();
    ApCountReport { k, window, counts_by_difference, total }
}

/// Direct scan over starting points; same output as [`count_aps_by_difference`].
pub fn count_aps_brute(e: &IntegerWindowSet, k: usize) -> Result<ApCountReport> {
    if k < 3 {
        return Err(domain(format!("progression length k = {k} must be >= 3")));
    }
    let counts = (1..=max_difference(e.window(), k))
        .map(|d| {
            let c = e.iter().filter(|&a| (1..k as u64).all(|j| e.contains((a + j * d) as i64))).count();
            (d, c as u64)
        })
        .collect();
    Ok(report(k, e.window(), counts))
}

/// Coefficients of `P(n) = a n^2 + b n + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qc5Witness {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Qc5Witness {
    pub fn values(&self) -> [i64; 5] {
        std::array::from_fn(|n| {
            let n = n as i64;
            self.a * n * n + self.b * n + self.c
        })
    }

    /// In `E`, nonconstant and with at least three distinct values.
    pub fn is_valid_in(&self, e: &IntegerWindowSet) -> bool {
        let v = self.values();
        let mut d = v.to_vec();
        d.sort_unstable();
        d.dedup();
        (self.a, self.b) != (0, 0) && d.len() >= 3 && v.iter().all(|&x| e.contains(x))
    }
}

/// A quadratic configuration `{P(0), ..., P(4)} ⊂ E`, if one exists.
///
/// Exhaustive: `P(0), P(2)` range over `E` and `8a = P(0) - 2P(2) + P(4)`
/// confines `a` to `|a| < N/4`; `b` is then determined by `P(2)`.
pub fn find_qc5(e: &IntegerWindowSet) -> Option<Qc5Witness> {
    let m = e.members();
    let n = e.window() as i64;
    m.par_iter().find_map_first(|&c| {
        let c = c as i64;
        for &p2 in &m {
            let p2 = p2 as i64;
            if (p2 - c) % 2 != 0 {
                continue;
            }
            // P(4) = 2 P(2) - c + 8a in [0, N)
            let base = 2 * p2 - c;
            let a_lo = (-base).div_euclid(8) + i64::from((-base).rem_euclid(8) != 0);
            let a_hi = (n - 1 - base).div_euclid(8);
            for a in a_lo..=a_hi {
                let b = (p2 - c - 4 * a) / 2;
                let w = Qc5Witness { a, b, c };
                if w.is_valid_in(e) {
                    return Some(w);
                }
            }
        }
        None
    })
}

pub fn has_qc5(e: &IntegerWindowSet) -> bool {
    find_qc5(e).is_some()
}

/// `|E ∩ (E + m_1) ∩ ... ∩ (E + m_k)| / N`.
pub fn shifted_intersection_density(e: &IntegerWindowSet, shifts: &[i64]) -> f64 {
    if e.window() == 0 {
        return 0.0;
    }
    let mut acc = e.clone();
    for &m in shifts {
        // x in E + m  iff  x - m in E
        acc = acc.intersect(&e.shifted(-m)).expect("same window");
    }
    acc.density()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndeticReport {
    pub window: u64,
    pub nonempty: bool,
    /// Largest difference between consecutive members.
    pub interior_gap: u64,
    /// `first - 0` and `(N - 1) - last`.
    pub leading_gap: u64,
    pub trailing_gap: u64,
    /// Maximum of the three gaps; `N` for an empty set.
    pub max_gap: u64,
}

impl SyndeticReport {
    pub fn is_syndetic_at(&self, g: u64) -> bool {
        self.nonempty && self.max_gap <= g
    }
}

pub fn syndetic_gap(s: &IntegerWindowSet) -> SyndeticReport {
    let n = s.window();
    let members = s.members();
    let (Some(&first), Some(&last)) = (members.first(), members.last()) else {
        return SyndeticReport { window: n, nonempty: false, interior_gap: 0, leading_gap: n, trailing_gap: n, max_gap: n };
    };
    let interior_gap = members.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
    let leading_gap = first;
    let trailing_gap = n - 1 - last;
    let max_gap = interior_gap.max(leading_gap).max(trailing_gap).max(1);
    SyndeticReport { window: n, nonempty: true, interior_gap, leading_gap, trailing_gap, max_gap }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenReport {
    pub window: u64,
    pub density: f64,
    /// Difference with the most 3-term progressions (smallest on ties).
    pub best_d: Option<u64>,
    pub count: u64,
    /// `(1 - eps) delta^3 N`
    pub threshold: f64,
    pub pass: bool,
}

/// Best single-difference 3-AP count against `(1 - eps) delta^3 N`.
pub fn green_count_check(e: &IntegerWindowSet, eps: f64) -> Result<GreenReport> {
    let density = e.density();
    if density == 0.0 {
        return Err(domain("set has density 0"));
    }
    let rep = count_aps_by_difference(e, 3)?;
    let best = rep.counts_by_difference.iter().fold(None::<(u64, u64)>, |best, &(d, c)| match best {
        Some((_, bc)) if bc >= c => best,
        _ => Some((d, c)),
    });
    let threshold = (1.0 - eps) * density.powi(3) * e.window() as f64;
    let count = best.map_or(0, |b| b.1);
    Ok(GreenReport { window: e.window(), density, best_d: best.map(|b| b.0), count, threshold, pass: count > 0 && count as f64 >= threshold })
}

/// How a Behrend set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BehrendConstruction {
    /// Integers whose `digits` base-`base` digits lie in `[0, d)` with squared
    /// digit sum `radius`.
    Sphere { base: u64, digits: u32, d: u64, radius: u64 },
    /// Integers whose base-3 digits are all 0 or 1 (every sphere of `d = 2` at once).
    BinaryDigits { digits: u32 },
    /// Greedy: include `x` unless it completes a progression.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehrendSet {
    pub set: IntegerWindowSet,
    pub construction: BehrendConstruction,
}

/// Largest 3-AP-free subset of `[0, L)` among the sphere-digit sets, the
/// base-3 binary-digit set and (for `L < 64`) the greedy set. Every candidate
/// is verified before it is returned.
pub fn behrend_construction(l: u64) -> Result<BehrendSet> {
    if l < 2 {
        return Err(domain(format!("L = {l} must be >= 2")));
    }
    let mut candidates: Vec<(Vec<u64>, BehrendConstruction)> = Vec::new();
    let max_digits = (l as f64).log2().floor() as u32;
    for digits in 2..=max_digits.max(2) {
        for odd_base in [false, true] {
            // largest d whose base^digits fits in L
            let mut d = 2u64;
            let base_of = |d: u64| if odd_base { 2 * d - 1 } else { 2 * d };
            while (base_of(d + 1) as u128).pow(digits) <= l as u128 {
                d += 1;
            }
            if (base_of(d) as u128).pow(digits) > l as u128 {
                continue;
            }
            let base = base_of(d);
            if let Some((radius, members)) = best_sphere(base, digits, d) {
                candidates.push((members, BehrendConstruction::Sphere { base, digits, d, radius }));
            }
        }
    }
    let mut digits = 0u32;
    while 3u128.pow(digits + 1) <= l as u128 {
        digits += 1;
    }
    candidates.push(((0..1u64 << digits).map(binary_to_base3).collect(), BehrendConstruction::BinaryDigits { digits }));
    if l < 64 {
        candidates.push((greedy_3ap_free(l), BehrendConstruction::Greedy));
    }
    let mut best: Option<BehrendSet> = None;
    for (members, construction) in candidates {
        let set = IntegerWindowSet::from_members(l, &members)?;
        if has_3ap(&set) {
            continue;
        }
        if best.as_ref().is_none_or(|b| set.len() > b.set.len()) {
            best = Some(BehrendSet { set, construction });
        }
    }
    best.ok_or_else(|| domain("no verified construction"))
}

/// 3-AP-free subset of `[0, L)`; see [`behrend_construction`].
pub fn behrend_set(l: u64) -> Result<IntegerWindowSet> {
    behrend_construction(l).map(|b| b.set)
}

fn binary_to_base3(mut mask: u64) -> u64 {
    let (mut v, mut p) = (0u64, 1u64);
    while mask != 0 {
        v += (mask & 1) * p;
        mask >>= 1;
        p *= 3;
    }
    v
}

/// Most populated sphere `sum digit^2 = r` among `digits`-digit base-`base`
/// numbers with digits in `[0, d)`.
fn best_sphere(base: u64, digits: u32, d: u64) -> Option<(u64, Vec<u64>)> {
    let total = (d as u128).pow(digits);
    if total > 1 << 24 {
        return None;
    }
    let max_r = (digits as u64) * (d - 1) * (d - 1);
    let mut pop = vec![0u64; max_r as usize + 1];
    let radius_of = |mut idx: u64| {
        let mut r = 0;
        for _ in 0..digits {
            let dig = idx % d;
            r += dig * dig;
            idx /= d;
        }
        r
    };
    for idx in 0..total as u64 {
        pop[radius_of(idx) as usize] += 1;
    }
    let radius = pop.iter().enumerate().max_by_key(|&(r, &c)| (c, std::cmp::Reverse(r))).map(|(r, _)| r as u64)?;
    let members = (0..total as u64)
        .filter(|&idx| radius_of(idx) == radius)
        .map(|mut idx| {
            let (mut v, mut p) = (0u64, 1u64);
            for _ in 0..digits {
                v += (idx % d) * p;
                idx /= d;
                p *= base;
            }
            v
        })
        .collect();
    Some((radius, members))
}

fn greedy_3ap_free(l: u64) -> Vec<u64> {
    let mut set = IntegerWindowSet::empty(l).expect("small window");
    let mut members = Vec::new();
    for x in 0..l {
        // x completes y - (x - y), y, x
        if !members.iter().any(|&y: &u64| 2 * y >= x && set.contains((2 * y - x) as i64) && 2 * y != x) {
            set.set(x);
            members.push(x);
        }
    }
    members
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(n: u64, m: &[u64]) -> IntegerWindowSet {
        IntegerWindowSet::from_members(n, m).unwrap()
    }

    fn naive_has_kap(e: &IntegerWindowSet, k: usize) -> bool {
        let n = e.window() as i64;
        (0..n).any(|a| (1..n).any(|d| (0..k as i64).all(|j| e.contains(a + j * d))))
    }

    #[test]
    fn window_set_basics() {
        let s = set(130, &[0, 63, 64, 129]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.members(), vec![0, 63, 64, 129]);
        assert!(s.contains(129) && !s.contains(130) && !s.contains(-1));
        assert!(IntegerWindowSet::from_members(10, &[10]).is_err());
        assert_eq!(IntegerWindowSet::full(70).unwrap().len(), 70);
        assert_eq!(s.shifted(1).members(), vec![62, 63, 128]);
        assert_eq!(s.shifted(-1).members(), vec![1, 64, 65]);
        assert_eq!(s.shifted(-65).members(), vec![65, 128, 129]);
        assert!(s.shifted(200).is_empty());
    }

    #[test]
    fn text_round_trips() {
        let s = set(20, &[0, 1, 2, 7, 19]);
        let a: IntegerWindowSet = s.to_members_text().parse().unwrap();
        let b: IntegerWindowSet = s.to_rle_text().parse().unwrap();
        assert_eq!(a, s);
        assert_eq!(b, s);
        assert_eq!(s.to_rle_text(), "window 20 rle\n0 3 4 1 11 1\n");
        assert!("window 5 rle\n2 2\n".parse::<IntegerWindowSet>().is_err());
        assert!("5\n".parse::<IntegerWindowSet>().is_err());
        let e = IntegerWindowSet::empty(3).unwrap();
        assert_eq!(e.to_rle_text().parse::<IntegerWindowSet>().unwrap(), e);
    }

    #[test]
    fn progression_detection() {
        assert!(has_3ap(&set(5, &[0, 1, 2])));
        assert!(!has_3ap(&set(5, &[0, 1, 3])));
        let mut r = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e = IntegerWindowSet::random(40, 0.25, &mut r).unwrap();
            for k in 3..=5 {
                assert_eq!(has_kap(&e, k), naive_has_kap(&e, k));
                if has_kap(&e, k + 1) {
                    assert!(has_kap(&e, k));
                }
            }
        }
    }

    #[test]
    fn full_window_counts() {
        for n in [10u64, 11, 64] {
            let r = count_aps_by_difference(&IntegerWindowSet::full(n).unwrap(), 3).unwrap();
            for &(d, c) in &r.counts_by_difference {
                assert_eq!(c, n - 2 * d);
            }
            assert_eq!(r, count_aps_brute(&IntegerWindowSet::full(n).unwrap(), 3).unwrap());
        }
        let r = count_aps_by_difference(&IntegerWindowSet::empty(10).unwrap(), 3).unwrap();
        assert_eq!(r.total, 0);
        assert!(count_aps_by_difference(&IntegerWindowSet::empty(10).unwrap(), 2).is_err());
    }

    #[test]
    fn fast_counts_match_brute_force() {
        let mut r = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let e = IntegerWindowSet::random(256, 0.5, &mut r).unwrap();
            for k in 3..=4 {
                assert_eq!(count_aps_by_difference(&e, k).unwrap(), count_aps_brute(&e, k).unwrap());
            }
        }
    }

    /// Triple loop over `(a, b, c)` with `|a| <= N`, `|b| <= 2N`: exhaustive
    /// because `2a` and `a + b` are differences of window elements.
    fn naive_qc5(e: &IntegerWindowSet) -> bool {
        let n = e.window() as i64;
        (-n..=n).any(|a| (-2 * n..=2 * n).any(|b| (0..n).any(|c| Qc5Witness { a, b, c }.is_valid_in(e))))
    }

    #[test]
    fn qc5_fixtures() {
        assert_eq!(find_qc5(&set(10, &[0, 1, 2, 3, 4])).map(|w| w.is_valid_in(&set(10, &[0, 1, 2, 3, 4]))), Some(true));
        assert!(has_qc5(&set(17, &[0, 1, 4, 9, 16])));
        // a = 9 > N/16: P(n) = 9 (n - 2)^2
        let e = set(40, &[0, 9, 36]);
        assert!(has_qc5(&e));
        assert!(!has_qc5(&set(40, &[0, 9])));
    }

    #[test]
    fn qc5_matches_naive_search() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        for n in [12u64, 25, 40] {
            for density in [0.1, 0.2, 0.3] {
                for _ in 0..3 {
                    let e = IntegerWindowSet::random(n, density, &mut r).unwrap();
                    assert_eq!(has_qc5(&e), naive_qc5(&e), "{e:?}");
                }
            }
        }
    }

    #[test]
    fn shifted_densities() {
        let evens: Vec<u64> = (0..100).step_by(2).collect();
        let e = set(100, &evens);
        assert_eq!(shifted_intersection_density(&e, &[]), 0.5);
        assert_eq!(shifted_intersection_density(&e, &[1]), 0.0);
        assert_eq!(shifted_intersection_density(&e, &[2]), 0.49);
        assert_eq!(shifted_intersection_density(&e, &[-2]), 0.49);
    }

    #[test]
    fn syndetic_conventions() {
        let full = syndetic_gap(&IntegerWindowSet::full(10).unwrap());
        assert_eq!(full.max_gap, 1);
        let r = syndetic_gap(&set(10, &[0, 7]));
        assert_eq!((r.interior_gap, r.trailing_gap, r.max_gap), (7, 2, 7));
        assert!(r.is_syndetic_at(7) && !r.is_syndetic_at(6));
        let empty = syndetic_gap(&IntegerWindowSet::empty(10).unwrap());
        assert!(!empty.nonempty && !empty.is_syndetic_at(100));
    }

    #[test]
    fn green_checks() {
        let full = green_count_check(&IntegerWindowSet::full(100).unwrap(), 0.1).unwrap();
        assert_eq!((full.best_d, full.count), (Some(1), 98));
        assert!(full.pass);
        let mut r = ChaCha8Rng::seed_from_u64(2024);
        let e = IntegerWindowSet::random(4096, 0.5, &mut r).unwrap();
        assert!(green_count_check(&e, 0.5).unwrap().pass);
        let b = behrend_set(500).unwrap();
        assert!(!green_count_check(&b, 0.999).unwrap().pass);
        assert!(green_count_check(&IntegerWindowSet::empty(5).unwrap(), 0.5).is_err());
    }

    #[test]
    fn behrend_sets_are_progression_free() {
        for l in [2u64, 3, 4, 10, 63, 64, 100, 729, 2000] {
            let b = behrend_construction(l).unwrap();
            assert!(!has_3ap(&b.set), "L = {l}");
            if l <= 100 {
                assert!(!naive_has_kap(&b.set, 3));
            }
        }
        assert!(behrend_set(4).unwrap().len() >= 2);
        let b = behrend_construction(729).unwrap();
        assert_eq!(b.set.len(), 64);
        assert_eq!(b.construction, BehrendConstruction::BinaryDigits { digits: 6 });
        assert!(behrend_set(1).is_err());
    }

    #[test]
    fn sphere_candidates_are_progression_free() {
        for (base, digits, d) in [(8u64, 3u32, 4u64), (7, 3, 4), (10, 2, 5)] {
            let (_, members) = best_sphere(base, digits, d).unwrap();
            let n = base.pow(digits);
            assert!(!has_3ap(&set(n, &members)));
        }
    }
}
