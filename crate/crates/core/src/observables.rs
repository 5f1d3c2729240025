//! Bounded complex observables on catalog phase spaces and Haar integration.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::reduce;
use crate::sets::{IntervalUnion, SetSpec};
use crate::systems::{self, grid_point, grid_size, PhasePoint, SystemSpec};
use crate::torus::phase_to_unit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub freq: Vec<i64>,
    pub coeff: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Observable {
    Constant { value: Complex64 },
    /// `e(freq . coords)`
    Character { freq: Vec<i64> },
    TrigPoly { terms: Vec<TrigTerm> },
    Indicator { set: SetSpec },
    Conjugate { inner: Box<Observable> },
    Product { factors: Vec<Observable> },
    Scale { factor: Complex64, inner: Box<Observable> },
    /// Pointwise sum.
    Sum { terms: Vec<Observable> },
}

impl Observable {
    pub fn one() -> Self {
        Observable::Constant { value: Complex64::new(1.0, 0.0) }
    }

    pub fn constant(value: Complex64) -> Self {
        Observable::Constant { value }
    }

    pub fn character(freq: Vec<i64>) -> Self {
        Observable::Character { freq }
    }

    pub fn indicator(set: SetSpec) -> Self {
        Observable::Indicator { set }
    }

    pub fn conj(self) -> Self {
        Observable::Conjugate { inner: Box::new(self) }
    }

    pub fn scale(self, factor: Complex64) -> Self {
        Observable::Scale { factor, inner: Box::new(self) }
    }

    pub fn sum(terms: Vec<Observable>) -> Self {
        Observable::Sum { terms }
    }

    pub fn trig_poly(terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Self {
        Observable::TrigPoly { terms: terms.into_iter().map(|(freq, coeff)| TrigTerm { freq, coeff }).collect() }
    }

    /// Upper bound on `sup |f|`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Observable::Constant { value } => value.norm(),
            Observable::Character { .. } | Observable::Indicator { .. } => 1.0,
            Observable::TrigPoly { terms } => terms.iter().map(|t| t.coeff.norm()).sum(),
            Observable::Conjugate { inner } => inner.sup_bound(),
            Observable::Product { factors } => factors.iter().map(Observable::sup_bound).product(),
            Observable::Scale { factor, inner } => factor.norm() * inner.sup_bound(),
            Observable::Sum { terms } => terms.iter().map(Observable::sup_bound).sum(),
        }
    }

    /// True when every value is real (indicators, real constants, closed under products).
    pub fn is_real(&self) -> bool {
        match self {
            Observable::Constant { value } => value.im == 0.0,
            Observable::Indicator { .. } => true,
            Observable::Character { freq } => freq.iter().all(|&f| f == 0),
            Observable::TrigPoly { .. } => false,
            Observable::Conjugate { inner } => inner.is_real(),
            Observable::Product { factors } => factors.iter().all(Observable::is_real),
            Observable::Scale { factor, inner } => factor.im == 0.0 && inner.is_real(),
            Observable::Sum { terms } => terms.iter().all(Observable::is_real),
        }
    }

    /// Largest absolute frequency component appearing in characters / trig polys.
    pub fn max_frequency(&self) -> Option<u64> {
        match self {
            Observable::Constant { .. } => Some(0),
            Observable::Character { freq } => Some(freq.iter().map(|f| f.unsigned_abs()).max().unwrap_or(0)),
            Observable::TrigPoly { terms } => {
                Some(terms.iter().flat_map(|t| t.freq.iter().map(|f| f.unsigned_abs())).max().unwrap_or(0))
            }
            Observable::Indicator { .. } => None,
            Observable::Conjugate { inner } | Observable::Scale { inner, .. } => inner.max_frequency(),
            Observable::Product { factors } => factors.iter().map(Observable::max_frequency).sum(),
            Observable::Sum { terms } => {
                terms.iter().map(Observable::max_frequency).try_fold(0, |m, f| f.map(|f| m.max(f)))
            }
        }
    }

    /// Indicator of a set of arcs on coordinate 0.
    pub fn arc_indicator(set: IntervalUnion) -> Self {
        Observable::Indicator { set: SetSpec::TorusIntervals { coord: 0, set } }
    }

    /// Interval-union set on coordinate 0 when this is such an indicator.
    pub fn as_arc_indicator(&self) -> Option<&IntervalUnion> {
        match self {
            Observable::Indicator { set: SetSpec::TorusIntervals { coord: 0, set } } => Some(set),
            _ => None,
        }
    }
}

/// `f(p)`.
pub fn evaluate(f: &Observable, sys: &SystemSpec, p: &PhasePoint) -> Result<Complex64> {
    sys.check_point(p)?;
    eval_unchecked(f, sys, p)
}

pub(crate) fn eval_unchecked(f: &Observable, sys: &SystemSpec, p: &PhasePoint) -> Result<Complex64> {
    Ok(match f {
        Observable::Constant { value } => *value,
        Observable::Character { freq } => phase_to_unit(systems::phase(sys, p, freq)?),
        Observable::TrigPoly { terms } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in terms {
                acc += t.coeff * phase_to_unit(systems::phase(sys, p, &t.freq)?);
            }
            acc
        }
        Observable::Indicator { set } => {
            let residue = match p {
                PhasePoint::Cyclic(r) => Some(*r),
                _ => None,
            };
            let inside = set.membership(&systems::coords(sys, p), residue)?;
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        }
        Observable::Conjugate { inner } => eval_unchecked(inner, sys, p)?.conj(),
        Observable::Product { factors } => {
            let mut acc = Complex64::new(1.0, 0.0);
            for g in factors {
                acc *= eval_unchecked(g, sys, p)?;
            }
            acc
        }
        Observable::Scale { factor, inner } => *factor * eval_unchecked(inner, sys, p)?,
        Observable::Sum { terms } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for g in terms {
                acc += eval_unchecked(g, sys, p)?;
            }
            acc
        }
    })
}

/// Midpoint-grid quadrature of `f` against Haar measure, `m` cells per circle
/// axis (cyclic axes are summed exactly).
pub fn haar_integral(f: &Observable, sys: &SystemSpec, m: u64) -> Result<Complex64> {
    if m < 2 {
        return Err(domain("haar_integral needs M >= 2"));
    }
    let axes = sys.axes();
    let count = grid_size(&axes, m)?;
    // shape check on one point, so the parallel sum cannot fail
    eval_unchecked(f, sys, &grid_point(sys, &axes, m, 0))?;
    let total: Complex64 =
        reduce::sum_indexed(count, |i| eval_unchecked(f, sys, &grid_point(sys, &axes, m, i)).expect("checked"));
    Ok(total / count as f64)
}

/// `int_A e(-xi x) dx` for a union of arcs.
pub fn arc_fourier_coefficient(set: &IntervalUnion, xi: i64) -> Complex64 {
    if xi == 0 {
        return Complex64::new(set.measure(), 0.0);
    }
    let two_pi_i_xi = Complex64::new(0.0, std::f64::consts::TAU * xi as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for iv in set.intervals() {
        let lo = crate::sets::raw_to_f64(iv.lo);
        let hi = crate::sets::raw_to_f64(iv.hi);
        acc += (phase_to_unit(-(xi as f64) * lo) - phase_to_unit(-(xi as f64) * hi)) / two_pi_i_xi;
    }
    acc
}

/// Fourier partial sum `sum_{|xi| <= k} 1_A^(xi) e(xi x)` of an arc indicator.
pub fn arc_fourier_truncation(set: &IntervalUnion, k: i64) -> Observable {
    Observable::trig_poly((-k..=k).map(|xi| (vec![xi], arc_fourier_coefficient(set, xi))))
}

/// Fourier coefficients of a trigonometric polynomial, keyed by frequency;
/// `None` when `f` contains an indicator. Every frequency has length `dim`.
pub fn fourier_coefficients(f: &Observable, dim: usize) -> Option<BTreeMap<Vec<i64>, Complex64>> {
    let zero = vec![0i64; dim];
    let mut out = BTreeMap::new();
    match f {
        Observable::Constant { value } => {
            out.insert(zero, *value);
        }
        Observable::Character { freq } => {
            out.insert(padded(freq, dim)?, Complex64::new(1.0, 0.0));
        }
        Observable::TrigPoly { terms } => {
            for t in terms {
                *out.entry(padded(&t.freq, dim)?).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
            }
        }
        Observable::Indicator { .. } => return None,
        Observable::Conjugate { inner } => {
            for (k, v) in fourier_coefficients(inner, dim)? {
                out.insert(k.iter().map(|x| -x).collect(), v.conj());
            }
        }
        Observable::Scale { factor, inner } => {
            for (k, v) in fourier_coefficients(inner, dim)? {
                out.insert(k, factor * v);
            }
        }
        Observable::Sum { terms } => {
            for g in terms {
                for (k, v) in fourier_coefficients(g, dim)? {
                    *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
                }
            }
        }
        Observable::Product { factors } => {
            out.insert(zero, Complex64::new(1.0, 0.0));
            for g in factors {
                let rhs = fourier_coefficients(g, dim)?;
                let mut next = BTreeMap::new();
                for (ka, va) in &out {
                    for (kb, vb) in &rhs {
                        let k: Vec<i64> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                        *next.entry(k).or_insert(Complex64::new(0.0, 0.0)) += va * vb;
                    }
                }
                out = next;
            }
        }
    }
    out.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    Some(out)
}

fn padded(freq: &[i64], dim: usize) -> Option<Vec<i64>> {
    if freq.len() > dim {
        return None;
    }
    let mut v = freq.to_vec();
    v.resize(dim, 0);
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::SetSpec;
    use crate::torus::TorusCoord;

    fn circle() -> SystemSpec {
        SystemSpec::rotation(TorusCoord::SQRT2_MINUS_1)
    }

    fn at(x: f64) -> PhasePoint {
        PhasePoint::Torus(vec![TorusCoord::from_f64(x)])
    }

    #[test]
    fn character_quarter_turn() {
        let v = evaluate(&Observable::character(vec![1]), &circle(), &at(0.25)).unwrap();
        assert!((v - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn indicator_values() {
        let f = Observable::indicator(SetSpec::interval(0.0, 0.3).unwrap());
        assert_eq!(evaluate(&f, &circle(), &at(0.5)).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(evaluate(&f, &circle(), &at(0.1)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn double_frequency_character() {
        let f = Observable::character(vec![2]);
        for &x in &[0.0, 0.1, 0.37, 0.9] {
            let v = evaluate(&f, &circle(), &at(x)).unwrap();
            let want = Complex64::new(0.0, 4.0 * std::f64::consts::PI * x).exp();
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(evaluate(&Observable::character(vec![1, 1]), &circle(), &at(0.1)).is_err());
        let cyc = SystemSpec::CyclicRotation { modulus: 4, step: 1 };
        let f = Observable::indicator(SetSpec::interval(0.0, 0.5).unwrap());
        // arcs apply to the cyclic coordinate r / N
        assert_eq!(evaluate(&f, &cyc, &PhasePoint::Cyclic(1)).unwrap().re, 1.0);
        assert_eq!(evaluate(&f, &cyc, &PhasePoint::Cyclic(2)).unwrap().re, 0.0);
    }

    #[test]
    fn haar_integral_of_characters() {
        let sys = circle();
        for xi in [-3i64, 1, 5] {
            let v = haar_integral(&Observable::character(vec![xi]), &sys, 16).unwrap();
            assert!(v.norm() < 1e-15, "xi = {xi}: {v}");
        }
        assert_eq!(haar_integral(&Observable::one(), &sys, 16).unwrap(), Complex64::new(1.0, 0.0));
        let c = Observable::character(vec![3]);
        let p = Observable::Product { factors: vec![c.clone(), c.conj()] };
        assert!((haar_integral(&p, &sys, 8).unwrap() - 1.0).norm() < 1e-15);
        assert!(haar_integral(&Observable::one(), &sys, 1).is_err());
    }

    #[test]
    fn haar_integral_on_cyclic_is_exact_average() {
        let cyc = SystemSpec::CyclicRotation { modulus: 6, step: 1 };
        let set = crate::sets::BitSet::from_members(6, &[0, 2, 3]).unwrap();
        let f = Observable::indicator(SetSpec::BitVectorSet { set });
        assert_eq!(haar_integral(&f, &cyc, 2).unwrap().re, 0.5);
    }

    #[test]
    fn sup_bounds() {
        let f = Observable::trig_poly([(vec![1], Complex64::new(0.5, 0.0)), (vec![-2], Complex64::new(0.0, 0.25))]);
        assert_eq!(f.sup_bound(), 0.75);
        assert_eq!(f.max_frequency(), Some(2));
        let g = Observable::Product { factors: vec![f.clone(), f.clone().conj()] };
        assert_eq!(g.sup_bound(), 0.5625);
    }

    #[test]
    fn arc_coefficients_of_half_interval() {
        let half = IntervalUnion::from_f64(0.0, 0.5).unwrap();
        assert!((arc_fourier_coefficient(&half, 0).re - 0.5).abs() < 1e-15);
        for xi in [1i64, 3, -5] {
            let c = arc_fourier_coefficient(&half, xi);
            assert!((c.norm() - 1.0 / (std::f64::consts::PI * xi.abs() as f64)).abs() < 1e-14);
        }
        assert!(arc_fourier_coefficient(&half, 2).norm() < 1e-15);
    }
}
