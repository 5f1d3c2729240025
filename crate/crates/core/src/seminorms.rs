//! Gowers uniformity norms on `Z/N` and cube seminorms of circle rotations.
//!
//! Complex inputs use the conjugation pattern `C^{|eps|}`: the factor at a cube
//! vertex is conjugated when the vertex has odd weight. Values are therefore
//! real and nonnegative, and reduce to the usual definition on real inputs.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{capability, domain, guard, shape, Result};
use crate::observables::{eval_unchecked, Observable};
use crate::reduce;
use crate::systems::{grid_midpoint, PhasePoint, SystemSpec};
use crate::torus::TorusCoord;

const GUARD_LOG2: u32 = 32;

/// A function on `Z/N` (`N = values.len()`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct ComplexSignal {
    values: Vec<Complex64>,
    sup_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct SignalRepr {
    values: Vec<Complex64>,
    sup_bound: Option<f64>,
}

impl TryFrom<SignalRepr> for ComplexSignal {
    type Error = crate::Error;
    fn try_from(r: SignalRepr) -> Result<Self> {
        match r.sup_bound {
            Some(b) => ComplexSignal::with_sup_bound(r.values, b),
            None => ComplexSignal::new(r.values),
        }
    }
}

impl From<ComplexSignal> for SignalRepr {
    fn from(s: ComplexSignal) -> Self {
        SignalRepr { values: s.values, sup_bound: Some(s.sup_bound) }
    }
}

impl ComplexSignal {
    /// Signal with sup bound `max |values|`.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        ComplexSignal::with_sup_bound(values, sup)
    }

    pub fn with_sup_bound(values: Vec<Complex64>, sup_bound: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("signal must have N >= 1 values"));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(domain(format!("value {i} is not finite")));
        }
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup_bound.is_nan() || sup_bound < sup {
            return Err(domain(format!("sup bound {sup_bound} below max |f| = {sup}")));
        }
        Ok(ComplexSignal { values, sup_bound })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        ComplexSignal::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        ComplexSignal::new(vec![c; n])
    }

    /// `x -> e(xi x / N)`.
    pub fn character(n: usize, xi: i64) -> Result<Self> {
        if n == 0 {
            return Err(domain("signal must have N >= 1 values"));
        }
        let values = (0..n as i64)
            .map(|x| {
                let r = (xi as i128 * x as i128).rem_euclid(n as i128);
                TorusCoord::from_ratio(r, n as u64).e()
            })
            .collect();
        ComplexSignal::with_sup_bound(values, 1.0)
    }

    /// Indicator of `{0}`.
    pub fn delta(n: usize) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        if let Some(first) = v.first_mut() {
            *first = Complex64::new(1.0, 0.0);
        }
        ComplexSignal::new(v)
    }

    /// Uniform random values in the closed unit disc.
    pub fn random_disc<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let values = (0..n)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                Complex64::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
            })
            .collect();
        ComplexSignal::with_sup_bound(values, 1.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn get(&self, x: i64) -> Complex64 {
        self.values[x.rem_euclid(self.values.len() as i64) as usize]
    }

    /// `x -> f(x + s)`.
    pub fn shifted(&self, s: i64) -> Self {
        let values = (0..self.len() as i64).map(|x| self.get(x + s)).collect();
        ComplexSignal { values, sup_bound: self.sup_bound }
    }

    pub fn conj(&self) -> Self {
        ComplexSignal { values: self.values.iter().map(|v| v.conj()).collect(), sup_bound: self.sup_bound }
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        same_len(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(ComplexSignal { values, sup_bound: self.sup_bound + other.sup_bound })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_len(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(ComplexSignal { values, sup_bound: self.sup_bound * other.sup_bound })
    }
}

fn same_len(a: &ComplexSignal, b: &ComplexSignal) -> Result<()> {
    if a.len() != b.len() {
        return Err(shape(format!("signals on Z/{} and Z/{}", a.len(), b.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GowersMethod {
    Recursive,
    Spectral,
    CubeSum,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GowersValue {
    pub k: usize,
    pub value: f64,
    pub method: GowersMethod,
}

impl GowersValue {
    /// `value^{2^k}`.
    pub fn power(&self) -> f64 {
        self.value.powi(1 << self.k)
    }
}

fn check_level(k: usize, max: usize) -> Result<()> {
    if k == 0 || k > max {
        return Err(domain(format!("level k = {k} outside 1..={max}")));
    }
    Ok(())
}

fn check_work(n: usize, exponent: usize) -> Result<()> {
    let log2 = (n as f64).log2() * exponent as f64;
    if log2 > GUARD_LOG2 as f64 + 1e-9 {
        return Err(guard(format!("N^{exponent} with N = {n} exceeds 2^{GUARD_LOG2}")));
    }
    Ok(())
}

/// `x -> f(x + h) conj f(x)`
fn multiplicative_derivative(f: &[Complex64], h: usize) -> Vec<Complex64> {
    let n = f.len();
    (0..n).map(|x| f[(x + h) % n] * f[x].conj()).collect()
}

/// `||f||_{U_k}^{2^k}` by the recursion over multiplicative derivatives.
fn gowers_power(f: &[Complex64], k: usize) -> f64 {
    let n = f.len();
    if k == 1 {
        let mean = reduce::sum_indexed(n as u64, |x| f[x as usize]) / n as f64;
        return mean.norm_sqr();
    }
    let terms: Vec<f64> = (0..n).map(|h| gowers_power(&multiplicative_derivative(f, h), k - 1)).collect();
    reduce::pairwise_sum(&terms) / n as f64
}

fn gowers_power_parallel(f: &[Complex64], k: usize) -> f64 {
    if k == 1 {
        return gowers_power(f, 1);
    }
    let n = f.len();
    reduce::sum_indexed(n as u64, |h| gowers_power(&multiplicative_derivative(f, h as usize), k - 1)) / n as f64
}

fn root(power: f64, k: usize) -> f64 {
    power.max(0.0).powf(1.0 / (1u64 << k) as f64)
}

/// `||f||_{U_k}` on `Z/N`, `1 <= k <= 5`, with `N^k <= 2^32`.
pub fn gowers_norm(f: &ComplexSignal, k: usize) -> Result<GowersValue> {
    check_level(k, 5)?;
    check_work(f.len(), k)?;
    Ok(GowersValue { k, value: root(gowers_power_parallel(&f.values, k), k), method: GowersMethod::Recursive })
}

/// `N^{-k-1} sum_{x, h} prod_eps C^{|eps|} fs[eps](x + eps.h)`.
fn cube_sum(fs: &[&[Complex64]], k: usize) -> Complex64 {
    let n = fs[0].len() as u64;
    let total = n.pow(k as u32 + 1);
    let s: Complex64 = reduce::sum_indexed(total, |flat| {
        let x = flat % n;
        let mut rest = flat / n;
        let mut h = [0u64; 5];
        for slot in h.iter_mut().take(k) {
            *slot = rest % n;
            rest /= n;
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for (eps, f) in fs.iter().enumerate() {
            let mut idx = x;
            for (i, hi) in h.iter().enumerate().take(k) {
                if eps >> i & 1 == 1 {
                    idx += hi;
                }
            }
            let v = f[(idx % n) as usize];
            acc *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
        }
        acc
    });
    s / total as f64
}

/// `||f||_{U_k}` by direct summation over all cubes (`N^{k+1} <= 2^32`).
pub fn gowers_norm_cube_sum(f: &ComplexSignal, k: usize) -> Result<GowersValue> {
    check_level(k, 5)?;
    check_work(f.len(), k + 1)?;
    let fs = vec![f.values.as_slice(); 1 << k];
    Ok(GowersValue { k, value: root(cube_sum(&fs, k).re, k), method: GowersMethod::CubeSum })
}

/// `||f||_{U_2} = (sum_xi |f^(xi)|^4)^{1/4}` with `f^(xi) = (1/N) sum_x f(x) e(-x xi / N)`.
pub fn gowers_u2_spectral(f: &ComplexSignal) -> GowersValue {
    let n = f.len();
    let mut buf = f.values.clone();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let fourth: Vec<f64> = buf.iter().map(|c| (c / n as f64).norm_sqr().powi(2)).collect();
    GowersValue { k: 2, value: root(reduce::pairwise_sum(&fourth), 2), method: GowersMethod::Spectral }
}

/// Gowers inner product of `2^k` signals; `fs[eps]` sits at vertex `eps`.
pub fn gowers_inner(fs: &[ComplexSignal]) -> Result<Complex64> {
    let k = cube_level(fs)?;
    check_work(fs[0].len(), k + 1)?;
    let views: Vec<&[Complex64]> = fs.iter().map(|f| f.values.as_slice()).collect();
    Ok(cube_sum(&views, k))
}

fn cube_level(fs: &[ComplexSignal]) -> Result<usize> {
    if fs.len() < 2 || !fs.len().is_power_of_two() {
        return Err(shape(format!("{} signals is not 2^k for k >= 1", fs.len())));
    }
    let k = fs.len().trailing_zeros() as usize;
    check_level(k, 5)?;
    for f in &fs[1..] {
        same_len(&fs[0], f)?;
    }
    Ok(k)
}

/// `(|<fs>_{U_k}|, prod_eps ||fs[eps]||_{U_k})`; the first never exceeds the second.
pub fn csg_check(fs: &[ComplexSignal]) -> Result<(f64, f64)> {
    let k = cube_level(fs)?;
    let lhs = gowers_inner(fs)?.norm();
    let mut rhs = 1.0;
    for f in fs {
        rhs *= gowers_norm(f, k)?.value;
    }
    Ok((lhs, rhs))
}

/// `(||f||_{U_{k+1}}^{2^{k+1}}, (1/N) sum_{n<N} ||f . T^n conj f||_{U_k}^{2^k})` for the
/// shift `T = +1`. The two agree exactly up to rounding.
pub fn seminorm_recursion_check(f: &ComplexSignal, k: usize) -> Result<(f64, f64)> {
    check_level(k, 3)?;
    check_work(f.len(), k + 1)?;
    let lhs = gowers_power_parallel(&f.values, k + 1);
    let n = f.len();
    let conj = f.conj();
    let rhs = reduce::sum_indexed(n as u64, |s| {
        let g = f.mul(&conj.shifted(s as i64)).expect("same length");
        gowers_power(&g.values, k)
    }) / n as f64;
    Ok((lhs, rhs))
}

/// `U_1, ..., U_{k_max}` of `f` (nondecreasing).
pub fn monotonicity_check(f: &ComplexSignal, k_max: usize) -> Result<Vec<GowersValue>> {
    check_level(k_max, 4)?;
    (1..=k_max).map(|k| gowers_norm(f, k)).collect()
}

/// Vertices `x_eps = z + eps.t` of a cube in a rotation group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeSample {
    pub k: usize,
    pub z: PhasePoint,
    pub t: Vec<PhasePoint>,
    /// Indexed by `eps` (bit `i` is `eps_{i+1}`).
    pub vertices: Vec<PhasePoint>,
}

#[derive(Debug, Clone, Copy)]
enum Group {
    Cyclic(u64),
    Torus(usize),
}

fn rotation_group(sys: &SystemSpec) -> Result<Group> {
    match sys {
        SystemSpec::CyclicRotation { modulus, .. } => Ok(Group::Cyclic(*modulus)),
        SystemSpec::TorusRotation { alpha } => Ok(Group::Torus(alpha.len())),
        other => Err(capability(format!("cube samples need a rotation, got {}", other.name()))),
    }
}

fn build_cube(group: Group, k: usize, params: Vec<PhasePoint>) -> CubeSample {
    let add = |a: &PhasePoint, b: &PhasePoint| match (a, b, group) {
        (PhasePoint::Cyclic(x), PhasePoint::Cyclic(y), Group::Cyclic(m)) => {
            PhasePoint::Cyclic(((*x as u128 + *y as u128) % m as u128) as u64)
        }
        (PhasePoint::Torus(x), PhasePoint::Torus(y), _) => PhasePoint::Torus(x.iter().zip(y).map(|(a, b)| *a + *b).collect()),
        _ => unreachable!("parameters are built for the group"),
    };
    let z = params[0].clone();
    let t = params[1..].to_vec();
    let vertices = (0..1usize << k)
        .map(|eps| {
            let mut v = z.clone();
            for (i, ti) in t.iter().enumerate() {
                if eps >> i & 1 == 1 {
                    v = add(&v, ti);
                }
            }
            v
        })
        .collect();
    CubeSample { k, z, t, vertices }
}

/// Cube with `z, t_1..t_k` drawn from Haar measure.
pub fn cube_sample<R: Rng + ?Sized>(sys: &SystemSpec, k: usize, rng: &mut R) -> Result<CubeSample> {
    check_level(k, 4)?;
    let group = rotation_group(sys)?;
    let params = (0..=k)
        .map(|_| match group {
            Group::Cyclic(m) => PhasePoint::Cyclic(rng.gen_range(0..m)),
            Group::Torus(d) => PhasePoint::Torus((0..d).map(|_| TorusCoord::from_raw(rng.gen())).collect()),
        })
        .collect();
    Ok(build_cube(group, k, params))
}

/// Cube number `index` of the product grid with `m` points per coordinate of
/// each of `z, t_1..t_k` (midpoints on circles, all residues on `Z/m`).
pub fn cube_sample_grid(sys: &SystemSpec, k: usize, m: u64, index: u64) -> Result<CubeSample> {
    check_level(k, 4)?;
    let group = rotation_group(sys)?;
    let (per_param, radix) = match group {
        Group::Cyclic(modulus) => (1u32, modulus),
        Group::Torus(d) => (d as u32, m),
    };
    if radix == 0 {
        return Err(domain("grid size must be >= 1"));
    }
    let cells = (radix as u128).checked_pow(per_param * (k as u32 + 1));
    match cells {
        Some(c) if (index as u128) < c => {}
        _ => return Err(domain(format!("grid index {index} out of range"))),
    }
    let mut rest = index;
    let mut digit = || {
        let d = rest % radix;
        rest /= radix;
        d
    };
    let params = (0..=k)
        .map(|_| match group {
            Group::Cyclic(_) => PhasePoint::Cyclic(digit()),
            Group::Torus(d) => PhasePoint::Torus((0..d).map(|_| grid_midpoint(digit(), m)).collect()),
        })
        .collect();
    Ok(build_cube(group, k, params))
}

/// Cube seminorm of `f` for a circle rotation, by quadrature on the
/// parametrization `x_eps = z + eps.t`: `z` runs over the `m` midpoints and each
/// `t_i` over `j/m`. Every vertex then lands on a midpoint, so the quadrature
/// is the `U_k` norm on `Z/m` of the samples `f((i + 1/2)/m)`.
pub fn rotation_seminorm_quadrature(f: &Observable, k: usize, m: u64) -> Result<GowersValue> {
    check_level(k, 3)?;
    if m == 0 {
        return Err(domain("grid size must be >= 1"));
    }
    check_work(m as usize, k)?;
    let sys = SystemSpec::rotation(TorusCoord::ZERO);
    let samples = (0..m)
        .map(|i| eval_unchecked(f, &sys, &PhasePoint::Torus(vec![grid_midpoint(i, m)])))
        .collect::<Result<Vec<_>>>()?;
    Ok(GowersValue { k, value: root(gowers_power_parallel(&samples, k), k), method: GowersMethod::Quadrature })
}

/// Correlation along a `(k+1)`-term progression against the smallest `U_k` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GvnReport {
    /// `|E_{x,y} prod_j f_j(x + j y)|`
    pub correlation: f64,
    /// `min_j ||f_j||_{U_k}`
    pub bound: f64,
    /// `correlation / bound` (0 when both vanish).
    pub ratio: f64,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Progression correlation of `k + 1` signals on `Z/N`, `N` prime and `N > k`.
pub fn gvn_ratio(fs: &[ComplexSignal], k: usize) -> Result<GvnReport> {
    check_level(k, 4)?;
    if fs.len() != k + 1 {
        return Err(shape(format!("{} signals for k = {k} (need k + 1)", fs.len())));
    }
    for f in &fs[1..] {
        same_len(&fs[0], f)?;
    }
    let n = fs[0].len();
    if !is_prime(n as u64) || n <= k {
        return Err(domain(format!("N = {n} must be a prime larger than k = {k}")));
    }
    if let Some(j) = fs.iter().position(|f| f.sup_bound() > 1.0) {
        return Err(domain(format!("signal {j} has sup bound > 1")));
    }
    check_work(n, k.max(2))?;
    let nn = n as u64;
    let s: Complex64 = reduce::sum_indexed(nn * nn, |flat| {
        let (x, y) = (flat % nn, flat / nn);
        fs.iter().enumerate().map(|(j, f)| f.values[((x + j as u64 * y) % nn) as usize]).product()
    });
    let correlation = (s / (nn * nn) as f64).norm();
    let mut bound = f64::INFINITY;
    for f in fs {
        bound = bound.min(gowers_norm(f, k)?.value);
    }
    let ratio = if bound > 0.0 { correlation / bound } else { 0.0 };
    Ok(GvnReport { correlation, bound, ratio })
}
