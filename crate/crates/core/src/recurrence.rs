//! Recurrence: first returns, Khintchine-type scans, the skew-product
//! counterexample to triple recurrence with large intersections, multiple
//! correlation sequences and their spectral measures.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::averages::{shifted_intersection, MeasureMethod};
use crate::combinatorics::{behrend_set, syndetic_gap, IntegerWindowSet};
use crate::error::{capability, domain, shape, Result};
use crate::observables::{eval_unchecked, fourier_coefficients, Observable};
use crate::reduce;
use crate::sets::{set_measure, BitSet, Interval, IntervalUnion, SetSpec};
use crate::systems::{grid_point, grid_size, iterate_unchecked, SkewForm, SystemSpec};
use crate::torus::TorusCoord;

/// First `n >= 1` with `mu(A ∩ T^{-n} A) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstReturn {
    pub horizon: u64,
    pub n: Option<u64>,
    /// `mu(A ∩ T^{-n} A)` at the returned `n`.
    pub measure: f64,
    pub method: MeasureMethod,
}

pub fn poincare_first_return(sys: &SystemSpec, a: &SetSpec, horizon: u64, grid: u64) -> Result<FirstReturn> {
    sys.validate()?;
    if set_measure(a) == 0.0 {
        return Err(domain("set has measure 0"));
    }
    let mut method = MeasureMethod::Grid;
    for n in 1..=horizon {
        let (m, how) = shifted_intersection(sys, &[a, a], &[0, n as i64], grid)?;
        method = how;
        if m > 0.0 {
            return Ok(FirstReturn { horizon, n: Some(n), measure: m, method });
        }
    }
    Ok(FirstReturn { horizon, n: None, measure: 0.0, method })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub k: usize,
    /// `mu(A)^{k+1} - eps`
    pub threshold: f64,
    pub horizon: u64,
    /// Members are the `n` in `[1, horizon]` whose intersection exceeds the threshold
    /// (window `horizon + 1`).
    pub good_set: IntegerWindowSet,
    /// Largest gap of the good set within `[1, horizon]`, boundary gaps included.
    pub max_gap: u64,
    /// `values[n - 1] = mu(A ∩ T^{-n} A ∩ ... ∩ T^{-kn} A)`.
    pub values: Option<Vec<f64>>,
    pub method: MeasureMethod,
}

/// Scan `n = 1..=horizon` for `mu(A ∩ T^{-n}A ∩ ... ∩ T^{-kn}A) > mu(A)^{k+1} - eps`.
pub fn khintchine_scan(sys: &SystemSpec, a: &SetSpec, k: usize, eps: f64, horizon: u64, grid: u64) -> Result<ScanReport> {
    if !(1..=3).contains(&k) {
        return Err(domain(format!("depth k = {k} outside 1..=3")));
    }
    if horizon == 0 {
        return Err(domain("horizon must be >= 1"));
    }
    sys.validate()?;
    let threshold = set_measure(a).powi(k as i32 + 1) - eps;
    let sets = vec![a; k + 1];
    let rows: Vec<(f64, MeasureMethod)> = (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let shifts: Vec<i64> = (0..=k as i64).map(|j| j * n as i64).collect();
            shifted_intersection(sys, &sets, &shifts, grid)
        })
        .collect::<Result<_>>()?;
    let method = rows[0].1;
    let values: Vec<f64> = rows.into_iter().map(|r| r.0).collect();
    let good: Vec<u64> = (1..=horizon).filter(|&n| values[n as usize - 1] > threshold).collect();
    let shifted: Vec<u64> = good.iter().map(|n| n - 1).collect();
    let max_gap = syndetic_gap(&IntegerWindowSet::from_members(horizon, &shifted)?).max_gap;
    Ok(ScanReport {
        k,
        threshold,
        horizon,
        good_set: IntegerWindowSet::from_members(horizon + 1, &good)?,
        max_gap,
        values: Some(values),
        method,
    })
}

/// An exact nonnegative rational with its floating value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exact {
    pub num: u64,
    pub den: u64,
}

impl Exact {
    fn new(num: u64, den: u64) -> Self {
        let g = num_integer::gcd(num, den).max(1);
        Exact { num: num / g, den: den / g }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self <= other`, exactly.
    pub fn le(&self, other: &Exact) -> bool {
        self.num as u128 * other.den as u128 <= other.num as u128 * self.den as u128
    }
}

/// The three-term intersection for `T(x, y) = (x, y + x)` and `A = T x B`, where
/// `B` is the union of `[j/(2L), j/(2L) + 1/(4L))` over a 3-AP-free `E ⊂ [0, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub l: u64,
    pub e: Vec<u64>,
    pub m_b: Exact,
    pub mu_a: Exact,
    /// `iint 1_B(y) 1_B(y + x) 1_B(y + 2x) dy dx`
    pub integral: Exact,
    /// Largest directly computed `mu(A ∩ T^n A ∩ T^{2n} A)`, `n = 1..=n_checked`.
    pub sup_intersection: Exact,
    pub n_checked: u64,
    /// `m(B) / (4L)`
    pub bound: Exact,
    pub within_bound: bool,
    /// Largest `l` with `sup_intersection <= mu(A)^l / 2` (0 if none).
    pub best_ell: u32,
}

/// `B` on `Z/(8 L n)`: cells `[4jn, 4jn + 2n)` of width `1/(8Ln)`.
fn lattice_b(e: &[u64], l: u64, n: u64) -> BitSet {
    let mut b = BitSet::new(8 * l * n);
    for &j in e {
        for c in 4 * j * n..4 * j * n + 2 * n {
            b.insert(c);
        }
    }
    b
}

/// `sum_i |B ∩ (B - n i) ∩ (B - 2 n i)|` over `i ∈ Z/(8 L n)`, in cells.
///
/// `F(x) = m(B ∩ (B - x) ∩ (B - 2x))` is continuous and piecewise linear.
/// Its breakpoints are where endpoints of `B`, `B - x` and `B - 2x` meet:
/// `x = b' - b` or `2x = b' - b` for endpoints `b, b'`. All endpoints are even
/// multiples of `1/(8L)`, so every breakpoint lies on `(1/(8L)) Z` and the
/// trapezoid rule on that lattice (or any refinement) is exact.
fn lattice_sum(e: &[u64], l: u64, n: u64) -> u64 {
    let b = lattice_b(e, l, n);
    let m = 8 * l * n;
    (0..m)
        .into_par_iter()
        .map(|i| {
            let s1 = b.shift_back((n * i) % m);
            let s2 = b.shift_back((2 * n * i) % m);
            b.intersection_count(&[&s1, &s2]).expect("same modulus")
        })
        .sum()
}

/// `mu(A ∩ T^n A ∩ T^{2n} A)` on the lattice `1/(8Ln)`, `(x, y) -> (x, y + nx)`.
fn direct_intersection(e: &[u64], l: u64, n: u64) -> Exact {
    let m = 8 * l * n;
    Exact::new(lattice_sum(e, l, n), m * m)
}

pub fn triple_counterexample(l: u64) -> Result<CounterexampleReport> {
    triple_counterexample_checked(l, 64)
}

/// As [`triple_counterexample`], computing the intersection directly for
/// `n = 1..=n_checked` in addition to the `n`-free integral.
pub fn triple_counterexample_checked(l: u64, n_checked: u64) -> Result<CounterexampleReport> {
    if l < 2 {
        return Err(domain(format!("L = {l} must be >= 2")));
    }
    if l > 1 << 16 {
        return Err(crate::error::guard(format!("L = {l} exceeds 2^16")));
    }
    let e = behrend_set(l)?.members();
    let size = e.len() as u64;
    let m_b = Exact::new(size, 4 * l);
    // trapezoid on (1/(8L)) Z: (1/(8L)) sum_i F(i/(8L)), F in cells of 1/(8L)
    let integral = Exact::new(lattice_sum(&e, l, 1), 64 * l * l);
    let sup_intersection = (1..=n_checked)
        .map(|n| direct_intersection(&e, l, n))
        .fold(integral, |best, x| if best.le(&x) { x } else { best });
    let bound = Exact::new(size, 16 * l * l);
    let within_bound = sup_intersection.le(&bound);

    let mut best_ell = 0u32;
    let (mut mu_num, mut mu_den) = (1u128, 1u128);
    // sup <= mu^l / 2  iff  2 sup_num mu_den <= mu_num sup_den
    while let (Some(nn), Some(dd)) = (mu_num.checked_mul(m_b.num as u128), mu_den.checked_mul(m_b.den as u128)) {
        let holds = match ((2 * sup_intersection.num as u128).checked_mul(dd), nn.checked_mul(sup_intersection.den as u128)) {
            (Some(lhs), Some(rhs)) => lhs <= rhs,
            _ => false,
        };
        if !holds {
            break;
        }
        best_ell += 1;
        mu_num = nn;
        mu_den = dd;
    }
    Ok(CounterexampleReport {
        l,
        e,
        m_b,
        mu_a: m_b,
        integral,
        sup_intersection,
        n_checked,
        bound,
        within_bound,
        best_ell,
    })
}

/// The skew product and the set `A` of the counterexample, for use with the
/// general machinery.
pub fn counterexample_system(l: u64) -> Result<(SystemSpec, SetSpec)> {
    let e = behrend_set(l)?.members();
    let b = IntervalUnion::normalize(
        e.iter().map(|&j| Interval::from_ratio(4 * j, 4 * j + 2, 8 * l)).collect::<Result<Vec<_>>>()?,
    );
    let sys = SystemSpec::SkewTorus { alpha: TorusCoord::ZERO, form: SkewForm::Plain };
    Ok((sys, SetSpec::CylinderProduct { factors: vec![IntervalUnion::full(), b] }))
}

/// `mu(A ∩ T A ∩ T^2 A)` for the counterexample by midpoint quadrature on an
/// `m x m` grid.
pub fn counterexample_grid(l: u64, m: u64) -> Result<f64> {
    let (sys, a) = counterexample_system(l)?;
    Ok(shifted_intersection(&sys, &[&a, &a, &a], &[0, 1, 2], m)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticorrelationSeries {
    pub k: usize,
    pub system: SystemSpec,
    pub observable: Observable,
    /// `values[n] = I_f(k, n)` for `n = 0..=n_max`.
    pub values: Vec<Complex64>,
    pub method: MeasureMethod,
}

/// `I_f(k, n) = int conj(f) . f∘T^n . f∘T^{2n} ... f∘T^{kn} dmu`.
pub fn multicorrelation_at(sys: &SystemSpec, f: &Observable, k: usize, n: i64, grid: u64) -> Result<(Complex64, MeasureMethod)> {
    if k == 0 {
        return Err(domain("k must be >= 1"));
    }
    if let Observable::Indicator { set } = f {
        let sets = vec![set; k + 1];
        let shifts: Vec<i64> = (0..=k as i64).map(|j| j * n).collect();
        let (m, how) = shifted_intersection(sys, &sets, &shifts, grid)?;
        return Ok((Complex64::new(m, 0.0), how));
    }
    let axes = sys.axes();
    let count = grid_size(&axes, grid)?;
    eval_unchecked(f, sys, &grid_point(sys, &axes, grid, 0))?;
    let s: Complex64 = reduce::sum_indexed(count, |i| {
        let x = grid_point(sys, &axes, grid, i);
        let mut acc = eval_unchecked(f, sys, &x).expect("checked").conj();
        for j in 1..=k as i64 {
            acc *= eval_unchecked(f, sys, &iterate_unchecked(sys, &x, j * n)).expect("checked");
        }
        acc
    });
    Ok((s / count as f64, MeasureMethod::Grid))
}

pub fn multicorrelation(sys: &SystemSpec, f: &Observable, k: usize, n_max: u64, grid: u64) -> Result<MulticorrelationSeries> {
    sys.validate()?;
    let rows: Vec<(Complex64, MeasureMethod)> =
        (0..=n_max).into_par_iter().map(|n| multicorrelation_at(sys, f, k, n as i64, grid)).collect::<Result<_>>()?;
    let method = rows[0].1;
    Ok(MulticorrelationSeries {
        k,
        system: sys.clone(),
        observable: f.clone(),
        values: rows.into_iter().map(|r| r.0).collect(),
        method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub frequency: TorusCoord,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMethod {
    /// Fourier coefficients of a trigonometric polynomial on a rotation.
    Exact,
    /// Peaks of a windowed transform of the correlation sequence (heuristic).
    Empirical,
}

/// Spectral measure of `n -> I_f(1, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    /// Sorted by decreasing weight, then frequency.
    pub atoms: Vec<Atom>,
    pub continuous_part_mass: f64,
    pub method: SpectralMethod,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>() + self.continuous_part_mass
    }

    fn sorted(mut atoms: Vec<Atom>, continuous_part_mass: f64, method: SpectralMethod) -> Self {
        atoms.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.frequency.cmp(&b.frequency)));
        SpectralMeasure { atoms, continuous_part_mass, method }
    }
}

/// Atoms `xi . alpha` with weight `|f^(xi)|^2` for a trigonometric polynomial
/// on a torus rotation (pure point spectrum, no continuous part).
pub fn spectral_decompose_exact(sys: &SystemSpec, f: &Observable) -> Result<SpectralMeasure> {
    let SystemSpec::TorusRotation { alpha } = sys else {
        return Err(capability(format!("exact spectral path needs a torus rotation, got {}", sys.name())));
    };
    let coeffs = fourier_coefficients(f, alpha.len())
        .ok_or_else(|| shape("exact spectral path needs a trigonometric polynomial of matching dimension"))?;
    let mut merged: std::collections::BTreeMap<TorusCoord, f64> = std::collections::BTreeMap::new();
    for (xi, c) in coeffs {
        let freq = xi.iter().zip(alpha).fold(TorusCoord::ZERO, |acc, (&x, &a)| acc + a.mul_int(x as i128));
        *merged.entry(freq).or_insert(0.0) += c.norm_sqr();
    }
    let atoms = merged.into_iter().map(|(frequency, weight)| Atom { frequency, weight }).collect();
    Ok(SpectralMeasure::sorted(atoms, 0.0, SpectralMethod::Exact))
}

/// Zero-padding factor of the empirical transform.
pub const EMPIRICAL_PADDING: usize = 8;
/// A bin counts as an atom when it exceeds this multiple of the median bin magnitude.
pub const EMPIRICAL_THRESHOLD: f64 = 3.0;

/// Heuristic atoms of the spectral measure from `I_f(1, n)`, `0 <= n <= n_max`.
///
/// The two-sided sequence (`I(-n) = conj I(n)`) is Hann-windowed, zero-padded and
/// transformed; an atom is a bin above `EMPIRICAL_THRESHOLD` times the median
/// magnitude that is also the maximum within the main-lobe half-width. Its
/// weight is the bin value divided by the window sum. Whatever mass `I(0)` is
/// left over is reported as continuous.
pub fn spectral_decompose_empirical(series: &MulticorrelationSeries) -> Result<SpectralMeasure> {
    if series.k != 1 {
        return Err(domain(format!("spectral decomposition needs k = 1, got {}", series.k)));
    }
    let v = &series.values;
    if v.len() < 2 {
        return Err(domain("need I(1, n) for at least n = 0, 1"));
    }
    let n_max = v.len() - 1;
    let len = 2 * n_max + 1;
    let size = (len * EMPIRICAL_PADDING).next_power_of_two();
    let hann = |n: usize| 0.5 * (1.0 + (std::f64::consts::PI * n as f64 / (n_max + 1) as f64).cos());
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[0] = v[0];
    for n in 1..=n_max {
        buf[n] = v[n] * hann(n);
        buf[size - n] = v[n].conj() * hann(n);
    }
    let window_sum = 1.0 + 2.0 * (1..=n_max).map(hann).sum::<f64>();
    FftPlanner::<f64>::new().plan_fft_forward(size).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mut sorted: Vec<f64> = mag.iter().map(|m| m.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[size / 2];
    let radius = (2 * size / len).max(1);
    let mut atoms = Vec::new();
    for j in 0..size {
        if mag[j] <= EMPIRICAL_THRESHOLD * median || mag[j] <= 0.0 {
            continue;
        }
        let is_peak = (1..=radius).all(|d| {
            let left = mag[(j + size - d) % size];
            let right = mag[(j + d) % size];
            left < mag[j] && right <= mag[j]
        });
        if is_peak {
            atoms.push(Atom { frequency: TorusCoord::from_ratio(j as i128, size as u64), weight: mag[j] / window_sum });
        }
    }
    let total = v[0].re;
    let continuous = (total - atoms.iter().map(|a| a.weight).sum::<f64>()).max(0.0);
    Ok(SpectralMeasure::sorted(atoms, continuous, SpectralMethod::Empirical))
}
