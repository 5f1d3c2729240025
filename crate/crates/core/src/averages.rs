//! Multiple ergodic averages along linear and polynomial patterns, cubes and
//! commuting rotations, with their limit formulas on rotations.
//!
//! Every Cesàro sum goes through [`crate::reduce`], so reports are
//! bit-identical whatever the thread count. Convergence is never asserted at
//! runtime: reports carry the averages at `N/4, N/2, 3N/4, N` and their spread.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, guard, shape, Error, Result};
use crate::observables::{eval_unchecked, Observable};
use crate::reduce;
use crate::sets::{raw_to_f64, IntervalUnion, SetSpec};
use crate::systems::{grid_midpoint, grid_point, grid_size, iterate_unchecked, CommutingFamily, PhasePoint, SystemSpec};
use crate::torus::TorusCoord;

/// Exponents `p_1(n), ..., p_k(n)` of the iterates, as integer polynomials
/// (coefficients lowest degree first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IteratePattern {
    polys: Vec<Vec<i64>>,
    vanish_at_zero: bool,
}

impl TryFrom<Vec<Vec<i64>>> for IteratePattern {
    type Error = Error;
    fn try_from(polys: Vec<Vec<i64>>) -> Result<Self> {
        IteratePattern::new(polys)
    }
}

impl From<IteratePattern> for Vec<Vec<i64>> {
    fn from(p: IteratePattern) -> Self {
        p.polys
    }
}

impl IteratePattern {
    pub fn new(polys: Vec<Vec<i64>>) -> Result<Self> {
        if polys.is_empty() {
            return Err(domain("iterate pattern needs k >= 1"));
        }
        let vanish_at_zero = polys.iter().all(|p| p.first().copied().unwrap_or(0) == 0);
        Ok(IteratePattern { polys, vanish_at_zero })
    }

    /// `p_j(n) = j n` for `j = 1..=k`.
    pub fn linear(k: usize) -> Self {
        IteratePattern::new((1..=k as i64).map(|j| vec![0, j]).collect()).expect("k >= 1")
    }

    /// `p_j(n) = n` for every `j` (used with commuting families).
    pub fn diagonal(k: usize) -> Self {
        IteratePattern::new(vec![vec![0, 1]; k]).expect("k >= 1")
    }

    pub fn k(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[Vec<i64>] {
        &self.polys
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.vanish_at_zero
    }

    /// `p_j(n)` (Horner, wrapping at 64 bits).
    pub fn eval(&self, j: usize, n: i64) -> i64 {
        self.polys[j].iter().rev().fold(0i64, |acc, &c| acc.wrapping_mul(n).wrapping_add(c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub horizon: u64,
    pub value: Complex64,
    /// `(n, average over the first n terms)` at `N/4, N/2, 3N/4, N`.
    pub checkpoints: Vec<(u64, Complex64)>,
    /// Largest pairwise distance between checkpoint values.
    pub oscillation: f64,
}

impl AverageReport {
    fn from_checkpoints(horizon: u64, checkpoints: Vec<(u64, Complex64)>) -> Self {
        let value = checkpoints.last().map(|c| c.1).unwrap_or_default();
        let mut oscillation = 0.0f64;
        for (i, a) in checkpoints.iter().enumerate() {
            for b in &checkpoints[i + 1..] {
                oscillation = oscillation.max((a.1 - b.1).norm());
            }
        }
        AverageReport { horizon, value, checkpoints, oscillation }
    }
}

fn checkpoint_bounds(n: u64) -> Vec<u64> {
    let mut bounds: Vec<u64> = (1..=4u64).map(|i| (n as u128 * i as u128 / 4) as u64).filter(|&b| b > 0).collect();
    bounds.dedup();
    bounds
}

/// `(1/N) sum_{n<N} term(n)` with checkpoints.
pub(crate) fn cesaro<F>(n: u64, term: F) -> AverageReport
where
    F: Fn(u64) -> Complex64 + Sync,
{
    let bounds = checkpoint_bounds(n);
    let mut start = 0;
    let mut running = Complex64::new(0.0, 0.0);
    let mut checkpoints = Vec::with_capacity(bounds.len());
    for &b in &bounds {
        running += reduce::sum_range(start, b, &term);
        checkpoints.push((b, running / b as f64));
        start = b;
    }
    AverageReport::from_checkpoints(n, checkpoints)
}

fn check_observables(sys: &SystemSpec, fs: &[Observable], p: &PhasePoint) -> Result<()> {
    for f in fs {
        eval_unchecked(f, sys, p)?;
    }
    Ok(())
}

fn pattern_term(sys: &SystemSpec, fs: &[Observable], pattern: &IteratePattern, x: &PhasePoint, n: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, f) in fs.iter().enumerate() {
        let q = iterate_unchecked(sys, x, pattern.eval(j, n as i64));
        acc *= eval_unchecked(f, sys, &q).expect("observables checked");
    }
    acc
}

/// `(1/N) sum_{n<N} prod_j f_j(T^{p_j(n)} x)`.
pub fn multi_average_pointwise(
    sys: &SystemSpec,
    fs: &[Observable],
    pattern: &IteratePattern,
    x: &PhasePoint,
    n: u64,
) -> Result<AverageReport> {
    if fs.len() != pattern.k() {
        return Err(shape(format!("{} observables for a {}-term pattern", fs.len(), pattern.k())));
    }
    if n == 0 {
        return Err(domain("horizon N must be >= 1"));
    }
    sys.check_point(x)?;
    check_observables(sys, fs, x)?;
    Ok(cesaro(n, |i| pattern_term(sys, fs, pattern, x, i)))
}

/// `L^2(mu)` norm of `x -> (1/N) sum_{n<N} prod_j f_j(T^{p_j(n)} x)`, by
/// midpoint quadrature over starting points.
pub fn multi_average_l2(
    sys: &SystemSpec,
    fs: &[Observable],
    pattern: &IteratePattern,
    n: u64,
    m: u64,
) -> Result<f64> {
    if fs.len() != pattern.k() {
        return Err(shape(format!("{} observables for a {}-term pattern", fs.len(), pattern.k())));
    }
    if n == 0 || m == 0 {
        return Err(domain("N and M must be >= 1"));
    }
    let axes = sys.axes();
    let count = grid_size(&axes, m)?;
    check_observables(sys, fs, &grid_point(sys, &axes, m, 0))?;
    let sq: f64 = reduce::sum_indexed(count, |i| {
        let x = grid_point(sys, &axes, m, i);
        let avg: Complex64 = reduce::sum_indexed(n, |t| pattern_term(sys, fs, pattern, &x, t)) / n as f64;
        avg.norm_sqr()
    });
    Ok((sq / count as f64).sqrt())
}

/// Exact description of a set as a product of arcs on a torus, if possible.
fn as_cylinder(a: &SetSpec, dim: usize) -> Option<Vec<IntervalUnion>> {
    match a {
        SetSpec::FullSpace => Some(vec![IntervalUnion::full(); dim]),
        SetSpec::TorusIntervals { coord, set } if *coord < dim => {
            let mut f = vec![IntervalUnion::full(); dim];
            f[*coord] = set.clone();
            Some(f)
        }
        SetSpec::CylinderProduct { factors } if factors.len() == dim => Some(factors.clone()),
        _ => None,
    }
}

/// Which evaluation path a set-intersection computation takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMethod {
    /// Interval arithmetic on a rotation.
    ExactIntervals,
    /// Counting on `Z/N`.
    ExactCounting,
    /// Midpoint grid quadrature.
    Grid,
}

/// `mu(A_0 ∩ T^{-s_1} A_1 ∩ ... )` for sets on the same system, where the first
/// set is taken unshifted. `shifts[j]` applies to `sets[j]`.
pub fn shifted_intersection(
    sys: &SystemSpec,
    sets: &[&SetSpec],
    shifts: &[i64],
    grid: u64,
) -> Result<(f64, MeasureMethod)> {
    if sets.len() != shifts.len() {
        return Err(shape("one shift per set"));
    }
    match sys {
        SystemSpec::TorusRotation { alpha } => {
            let cyl: Option<Vec<Vec<IntervalUnion>>> = sets.iter().map(|a| as_cylinder(a, alpha.len())).collect();
            if let Some(cyl) = cyl {
                let mut total = 1.0f64;
                for (c, &a) in alpha.iter().enumerate() {
                    let mut acc = IntervalUnion::full();
                    for (factors, &s) in cyl.iter().zip(shifts) {
                        // x in T^{-s} A  iff  x + s a in A
                        acc = acc.intersect(&factors[c].shift(-a.mul_int(s as i128)));
                        if acc.intervals().is_empty() {
                            break;
                        }
                    }
                    total *= raw_to_f64(acc.measure_raw());
                }
                return Ok((total, MeasureMethod::ExactIntervals));
            }
        }
        SystemSpec::CyclicRotation { modulus, step } => {
            let bits: Option<Vec<_>> = sets
                .iter()
                .map(|a| match a {
                    SetSpec::BitVectorSet { set } if set.modulus() == *modulus => Some(set.clone()),
                    SetSpec::FullSpace => {
                        let all: Vec<u64> = (0..*modulus).collect();
                        crate::sets::BitSet::from_members(*modulus, &all).ok()
                    }
                    _ => None,
                })
                .collect();
            if let Some(bits) = bits {
                let md = *modulus as i128;
                let mut acc: Option<crate::sets::BitSet> = None;
                for (b, &s) in bits.iter().zip(shifts) {
                    let t = (s as i128 * *step as i128).rem_euclid(md) as u64;
                    let shifted = b.shift_back(t);
                    acc = Some(match acc {
                        None => shifted,
                        Some(a) => a.intersect(&shifted)?,
                    });
                }
                let count = acc.map(|a| a.count()).unwrap_or(*modulus);
                return Ok((count as f64 / *modulus as f64, MeasureMethod::ExactCounting));
            }
        }
        _ => {}
    }
    let fs: Vec<Observable> = sets.iter().map(|a| Observable::indicator((*a).clone())).collect();
    let axes = sys.axes();
    let count = grid_size(&axes, grid)?;
    check_observables(sys, &fs, &grid_point(sys, &axes, grid, 0))?;
    let total: f64 = reduce::sum_indexed(count, |i| {
        let x = grid_point(sys, &axes, grid, i);
        let inside = fs.iter().zip(shifts).all(|(f, &s)| {
            eval_unchecked(f, sys, &iterate_unchecked(sys, &x, s)).expect("checked").re > 0.5
        });
        if inside {
            1.0
        } else {
            0.0
        }
    });
    Ok((total / count as f64, MeasureMethod::Grid))
}

/// Entries `n = 0..=n_max` of `mu(A ∩ T^{-n}A ∩ ... ∩ T^{-kn}A)`.
/// `grid` is used only when no exact path applies.
pub fn intersection_sequence(sys: &SystemSpec, a: &SetSpec, k: usize, n_max: u64, grid: u64) -> Result<Vec<f64>> {
    sys.validate()?;
    let sets: Vec<&SetSpec> = vec![a; k + 1];
    (0..=n_max)
        .map(|n| {
            let shifts: Vec<i64> = (0..=k as i64).map(|j| j * n as i64).collect();
            shifted_intersection(sys, &sets, &shifts, grid).map(|r| r.0)
        })
        .collect()
}

/// How a cube or commuting average is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Evaluation {
    /// At one starting point.
    Pointwise { point: PhasePoint },
    /// `int base(x) * average(x) dmu(x)` by grid quadrature (or exactly when
    /// every function is an arc indicator on a circle rotation).
    Integrated { grid: u64, base: Option<Observable> },
}

/// `eps . n` for the cube vertex with bit pattern `eps`.
fn dot(eps: usize, n: &[i64]) -> i64 {
    n.iter().enumerate().filter(|(i, _)| eps >> i & 1 == 1).map(|(_, v)| v).sum()
}

/// Cube average `N^{-k} sum_{n in [0,N)^k} prod_{eps != 0} f_eps(T^{eps.n} x)`.
///
/// `fs[e - 1]` is the function at vertex `e` (bit `i` of `e` is `eps_{i+1}`).
pub fn cube_average(sys: &SystemSpec, fs: &[Observable], k: usize, n: u64, eval: &Evaluation) -> Result<AverageReport> {
    if k == 0 || k > 4 {
        return Err(domain(format!("cube dimension k = {k} outside 1..=4")));
    }
    if fs.len() != (1 << k) - 1 {
        return Err(shape(format!("{} functions for a {k}-cube (need {})", fs.len(), (1 << k) - 1)));
    }
    if n == 0 {
        return Err(domain("horizon N must be >= 1"));
    }
    if (n as f64).powi(k as i32) > 2f64.powi(40) {
        return Err(guard(format!("N^k = {n}^{k} exceeds 2^40 terms")));
    }
    let exact_arcs = match (sys.circle_rotation_angle(), eval) {
        (Some(alpha), Evaluation::Integrated { base, .. }) => {
            let base = base.clone().unwrap_or_else(Observable::one);
            let mut arcs = vec![match &base {
                Observable::Constant { value } if *value == Complex64::new(1.0, 0.0) => IntervalUnion::full(),
                other => match other.as_arc_indicator() {
                    Some(s) => s.clone(),
                    None => IntervalUnion::empty(),
                },
            }];
            let base_ok = matches!(&base, Observable::Constant { value } if *value == Complex64::new(1.0, 0.0))
                || base.as_arc_indicator().is_some();
            let rest: Option<Vec<IntervalUnion>> = fs.iter().map(|f| f.as_arc_indicator().cloned()).collect();
            match (base_ok, rest) {
                (true, Some(rest)) => {
                    arcs.extend(rest);
                    Some((alpha, arcs))
                }
                _ => None,
            }
        }
        _ => None,
    };

    let bounds = checkpoint_bounds(n);
    let mut checkpoints = Vec::with_capacity(bounds.len());
    for &b in &bounds {
        let terms = (b as u128).pow(k as u32) as u64;
        let value: Complex64 = match (&exact_arcs, eval) {
            (Some((alpha, arcs)), _) => {
                let total: f64 = reduce::sum_indexed(terms, |flat| {
                    let idx = unflatten(flat, b, k);
                    let mut acc = arcs[0].clone();
                    for (e, arc) in arcs.iter().enumerate().skip(1) {
                        acc = acc.intersect(&arc.shift(-alpha.mul_int(dot(e, &idx) as i128)));
                        if acc.intervals().is_empty() {
                            break;
                        }
                    }
                    raw_to_f64(acc.measure_raw())
                });
                Complex64::new(total / terms as f64, 0.0)
            }
            (None, Evaluation::Pointwise { point }) => {
                sys.check_point(point)?;
                check_observables(sys, fs, point)?;
                let s: Complex64 = reduce::sum_indexed(terms, |flat| cube_term(sys, fs, k, point, &unflatten(flat, b, k)));
                s / terms as f64
            }
            (None, Evaluation::Integrated { grid, base }) => {
                let axes = sys.axes();
                let count = grid_size(&axes, *grid)?;
                let base = base.clone().unwrap_or_else(Observable::one);
                let x0 = grid_point(sys, &axes, *grid, 0);
                check_observables(sys, fs, &x0)?;
                check_observables(sys, std::slice::from_ref(&base), &x0)?;
                let s: Complex64 = reduce::sum_indexed(count, |i| {
                    let x = grid_point(sys, &axes, *grid, i);
                    let w = eval_unchecked(&base, sys, &x).expect("checked");
                    let inner: Complex64 = reduce::sum_indexed(terms, |flat| cube_term(sys, fs, k, &x, &unflatten(flat, b, k)));
                    w * inner / terms as f64
                });
                s / count as f64
            }
        };
        checkpoints.push((b, value));
    }
    Ok(AverageReport::from_checkpoints(n, checkpoints))
}

fn unflatten(mut flat: u64, n: u64, k: usize) -> Vec<i64> {
    let mut idx = vec![0i64; k];
    for slot in idx.iter_mut() {
        *slot = (flat % n) as i64;
        flat /= n;
    }
    idx
}

fn cube_term(sys: &SystemSpec, fs: &[Observable], k: usize, x: &PhasePoint, idx: &[i64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for e in 1..(1usize << k) {
        let q = iterate_unchecked(sys, x, dot(e, idx));
        acc *= eval_unchecked(&fs[e - 1], sys, &q).expect("checked");
    }
    acc
}

fn circle_system() -> SystemSpec {
    SystemSpec::rotation(TorusCoord::ZERO)
}

/// `int_T f1(x + t) f2(x + 2t) dt` by `m`-point midpoint quadrature: the limit
/// of the double average on an ergodic circle rotation.
pub fn kronecker_double_limit(f1: &Observable, f2: &Observable, x: TorusCoord, m: u64) -> Result<Complex64> {
    if m == 0 {
        return Err(domain("M must be >= 1"));
    }
    let sys = circle_system();
    let at = |t: TorusCoord| PhasePoint::Torus(vec![t]);
    eval_unchecked(f1, &sys, &at(x))?;
    eval_unchecked(f2, &sys, &at(x))?;
    let s: Complex64 = reduce::sum_indexed(m, |i| {
        let t = grid_midpoint(i, m);
        eval_unchecked(f1, &sys, &at(x + t)).expect("checked") * eval_unchecked(f2, &sys, &at(x + t + t)).expect("checked")
    });
    Ok(s / m as f64)
}

/// `iint f(s) f(s+t) f(s+2t) ds dt` on an `m x m` midpoint grid.
pub fn roth_triple_integral(f: &Observable, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(domain("M must be >= 1"));
    }
    if (m as u128) * (m as u128) > 1 << 34 {
        return Err(guard("M^2 exceeds 2^34 grid points"));
    }
    let sys = circle_system();
    let at = |t: TorusCoord| PhasePoint::Torus(vec![t]);
    eval_unchecked(f, &sys, &at(TorusCoord::ZERO))?;
    let s: f64 = reduce::sum_indexed(m * m, |idx| {
        let s = grid_midpoint(idx / m, m);
        let t = grid_midpoint(idx % m, m);
        let v = eval_unchecked(f, &sys, &at(s)).expect("checked")
            * eval_unchecked(f, &sys, &at(s + t)).expect("checked")
            * eval_unchecked(f, &sys, &at(s + t + t)).expect("checked");
        v.re
    });
    Ok(s / (m * m) as f64)
}

/// Finite-horizon van der Corput comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VdcReport {
    /// Number of averaged terms `N` (the input has `N + H - 1` vectors).
    pub n: usize,
    pub h: usize,
    /// `|| (1/N) sum_{n<N} u_n ||^2`
    pub lhs: f64,
    /// `(1/H) sum_{h<H} gamma_h`, `gamma_h = |(1/N) sum_{n<N} <u_{n+h}, u_n>|`
    pub rhs: f64,
    /// `(sqrt(C) + (H-1)/N)^2` with `C = (1/N) sum_{n<N} ||(1/H) sum_{h<H} u_{n+h}||^2`.
    /// This is a true finite-horizon upper bound for `lhs`.
    pub rigorous_rhs: f64,
}

impl VdcReport {
    /// Heuristic slack for comparing `lhs` with `rhs` at finite `N, H`:
    /// the boundary term `2(H-1)/N` plus the diagonal weight `1/H`.
    pub fn slack(&self) -> f64 {
        2.0 * (self.h as f64 - 1.0) / self.n as f64 + 1.0 / self.h as f64
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Compare both sides of the van der Corput inequality on a finite sequence of
/// vectors (`u.len() = N + H - 1`, each `||u_n|| <= 1`).
pub fn vdc_check(u: &[Vec<Complex64>], h: usize) -> Result<VdcReport> {
    if h == 0 {
        return Err(domain("H must be >= 1"));
    }
    if u.len() < h {
        return Err(domain(format!("need at least H = {h} vectors, got {}", u.len())));
    }
    let dim = u[0].len();
    for (i, v) in u.iter().enumerate() {
        if v.len() != dim {
            return Err(shape(format!("vector {i} has dimension {} (expected {dim})", v.len())));
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(domain(format!("||u_{i}|| = {norm} > 1")));
        }
    }
    let n = u.len() - h + 1;
    let mean: Vec<Complex64> = (0..dim)
        .map(|c| reduce::sum_indexed(n as u64, |i| u[i as usize][c]) / n as f64)
        .collect();
    let lhs = mean.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let gammas: Vec<f64> = (0..h)
        .map(|lag| {
            let s: Complex64 = reduce::sum_indexed(n as u64, |i| inner(&u[i as usize + lag], &u[i as usize]));
            (s / n as f64).norm()
        })
        .collect();
    let rhs = reduce::pairwise_sum(&gammas) / h as f64;
    let c: f64 = reduce::sum_indexed(n as u64, |i| {
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        for v in &u[i as usize..i as usize + h] {
            for (s, x) in w.iter_mut().zip(v) {
                *s += x;
            }
        }
        w.iter().map(|x| x.norm_sqr()).sum::<f64>() / (h * h) as f64
    }) / n as f64;
    let rigorous_rhs = (c.max(0.0).sqrt() + (h as f64 - 1.0) / n as f64).powi(2);
    Ok(VdcReport { n, h, lhs, rhs, rigorous_rhs })
}

/// `(1/N) sum_{n<N} prod_j f_j(T_j^n x)` for commuting rotations `T_j`.
pub fn commuting_average(family: &CommutingFamily, fs: &[Observable], n: u64, eval: &Evaluation) -> Result<AverageReport> {
    family.validate()?;
    if fs.len() != family.len() {
        return Err(shape(format!("{} observables for {} transformations", fs.len(), family.len())));
    }
    if n == 0 {
        return Err(domain("horizon N must be >= 1"));
    }
    let members: Vec<SystemSpec> = (0..family.len()).map(|j| family.member(j)).collect();
    let term = |x: &PhasePoint, t: u64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (sys, f) in members.iter().zip(fs) {
            acc *= eval_unchecked(f, sys, &iterate_unchecked(sys, x, t as i64)).expect("checked");
        }
        acc
    };
    match eval {
        Evaluation::Pointwise { point } => {
            members[0].check_point(point)?;
            check_observables(&members[0], fs, point)?;
            Ok(cesaro(n, |t| term(point, t)))
        }
        Evaluation::Integrated { grid, base } => {
            let sys = &members[0];
            let axes = sys.axes();
            let count = grid_size(&axes, *grid)?;
            let base = base.clone().unwrap_or_else(Observable::one);
            let x0 = grid_point(sys, &axes, *grid, 0);
            check_observables(sys, fs, &x0)?;
            check_observables(sys, std::slice::from_ref(&base), &x0)?;
            let weights: Vec<Complex64> = (0..count)
                .map(|i| eval_unchecked(&base, sys, &grid_point(sys, &axes, *grid, i)).expect("checked"))
                .collect();
            Ok(cesaro(n, |t| {
                let s: Complex64 = reduce::sum_indexed(count, |i| weights[i as usize] * term(&grid_point(sys, &axes, *grid, i), t));
                s / count as f64
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{BitSet, SetSpec};

    fn t(x: f64) -> TorusCoord {
        TorusCoord::from_f64(x)
    }

    fn rot() -> SystemSpec {
        SystemSpec::rotation(TorusCoord::SQRT2_MINUS_1)
    }

    #[test]
    fn pattern_evaluation() {
        let p = IteratePattern::new(vec![vec![0, 0, 1], vec![3, 2]]).unwrap();
        assert_eq!(p.eval(0, 5), 25);
        assert_eq!(p.eval(1, -2), -1);
        assert!(!p.vanishes_at_zero());
        assert!(IteratePattern::linear(3).vanishes_at_zero());
        assert!(IteratePattern::new(vec![]).is_err());
    }

    #[test]
    fn double_average_example_is_termwise_exact() {
        let fs = [Observable::character(vec![2]), Observable::character(vec![-1])];
        let x = PhasePoint::Torus(vec![t(0.123)]);
        let r = multi_average_pointwise(&rot(), &fs, &IteratePattern::linear(2), &x, 1000).unwrap();
        // every summand is conj(f2(x)) = e(x)
        let want = crate::observables::evaluate(&fs[1], &rot(), &x).unwrap().conj();
        assert!((r.value - want).norm() < 1e-12);
        assert!(r.oscillation < 1e-12);
        assert_eq!(r.checkpoints.iter().map(|c| c.0).collect::<Vec<_>>(), vec![250, 500, 750, 1000]);
    }

    #[test]
    fn constants_average_to_one() {
        let fs = vec![Observable::one(); 3];
        let x = PhasePoint::Torus(vec![t(0.5)]);
        let r = multi_average_pointwise(&rot(), &fs, &IteratePattern::linear(3), &x, 7).unwrap();
        assert!((r.value - 1.0).norm() < 1e-15);
        assert_eq!(multi_average_l2(&rot(), &fs, &IteratePattern::linear(3), 5, 4).unwrap(), 1.0);
    }

    #[test]
    fn arity_errors() {
        let x = PhasePoint::Torus(vec![t(0.5)]);
        assert!(multi_average_pointwise(&rot(), &[Observable::one()], &IteratePattern::linear(2), &x, 5).is_err());
        assert!(multi_average_pointwise(&rot(), &[Observable::one()], &IteratePattern::linear(1), &x, 0).is_err());
    }

    #[test]
    fn single_average_mean_ergodic_bound() {
        // f = 0.5 + e(x): |avg - 0.5| <= 2 / (N ||alpha||)
        let f = Observable::trig_poly([(vec![0], Complex64::new(0.5, 0.0)), (vec![1], Complex64::new(1.0, 0.0))]);
        let n = 10_000;
        let a = TorusCoord::SQRT2_MINUS_1;
        for &x0 in &[0.0, 0.3, 0.77] {
            let r = multi_average_pointwise(&rot(), std::slice::from_ref(&f), &IteratePattern::linear(1), &PhasePoint::Torus(vec![t(x0)]), n)
                .unwrap();
            assert!((r.value - 0.5).norm() <= 2.0 / (n as f64 * a.dist_to_int()));
        }
        let l2 = multi_average_l2(&rot(), &[f], &IteratePattern::linear(1), n, 64).unwrap();
        assert!((l2 - 0.5).abs() <= 2.0 / (n as f64 * a.dist_to_int()));
    }

    #[test]
    fn intersection_sequence_rotation_matches_overlap() {
        let a = SetSpec::interval(0.0, 0.3).unwrap();
        let seq = intersection_sequence(&rot(), &a, 1, 20, 0).unwrap();
        assert_eq!(seq[0], crate::sets::set_measure(&a));
        for (n, v) in seq.iter().enumerate() {
            let d = TorusCoord::SQRT2_MINUS_1.mul_int(n as i128).dist_to_int();
            let want = (0.3 - d).max(0.0);
            assert!((v - want).abs() < 1e-15, "n = {n}: {v} vs {want}");
        }
    }

    #[test]
    fn intersection_sequence_cyclic() {
        let sys = SystemSpec::CyclicRotation { modulus: 8, step: 1 };
        let a = SetSpec::BitVectorSet { set: BitSet::from_members(8, &[0, 1, 2, 3]).unwrap() };
        let seq = intersection_sequence(&sys, &a, 2, 4, 0).unwrap();
        assert_eq!(seq[0], 0.5);
        assert_eq!(seq[4], 0.0);
        // brute force: |{x : x, x+n, x+2n in A}| / 8
        for (n, v) in seq.iter().enumerate() {
            let count = (0..8u64).filter(|x| (0..3).all(|j| (x + j * n as u64) % 8 < 4)).count();
            assert_eq!(*v, count as f64 / 8.0);
        }
    }

    #[test]
    fn grid_and_exact_intersections_agree() {
        let a = SetSpec::interval(0.0, 0.25).unwrap();
        let sys = rot();
        let sets = [&a, &a, &a];
        let (exact, m1) = shifted_intersection(&sys, &sets, &[0, 3, 6], 0).unwrap();
        assert_eq!(m1, MeasureMethod::ExactIntervals);
        // product with a trivial cyclic factor forces the grid path
        let prod = SystemSpec::Product { factors: vec![sys.clone()] };
        let (approx, m2) = shifted_intersection(&prod, &sets, &[0, 3, 6], 1 << 14).unwrap();
        assert_eq!(m2, MeasureMethod::Grid);
        assert!((exact - approx).abs() <= 6.0 / (1 << 14) as f64, "{exact} vs {approx}");
    }

    #[test]
    fn cube_average_trivial_and_factorized() {
        let x = PhasePoint::Torus(vec![t(0.2)]);
        let ones = vec![Observable::one(); 3];
        let r = cube_average(&rot(), &ones, 2, 10, &Evaluation::Pointwise { point: x.clone() }).unwrap();
        assert!((r.value - 1.0).norm() < 1e-15);

        // f1 = e(x), f2 = e(x), f3 = e(-x): term = e(x + n a) e(x + m a) e(-x - (n+m) a) = e(x)
        let fs = vec![Observable::character(vec![1]), Observable::character(vec![1]), Observable::character(vec![-1])];
        let r = cube_average(&rot(), &fs, 2, 50, &Evaluation::Pointwise { point: x.clone() }).unwrap();
        assert!((r.value - t(0.2).e()).norm() < 1e-12);

        // f1 = e(x), f2 = 1, f3 = 1: (1/N) sum_n e(x + n a) times 1 -- geometric sum
        let fs = vec![Observable::character(vec![1]), Observable::one(), Observable::one()];
        let n = 64u64;
        let r = cube_average(&rot(), &fs, 2, n, &Evaluation::Pointwise { point: x.clone() }).unwrap();
        let a = TorusCoord::SQRT2_MINUS_1.to_f64();
        let geo: Complex64 = (0..n).map(|j| crate::torus::phase_to_unit(0.2 + j as f64 * a)).sum::<Complex64>() / n as f64;
        assert!((r.value - geo).norm() < 1e-12);
        assert!(cube_average(&rot(), &fs[..2], 2, n, &Evaluation::Pointwise { point: x }).is_err());
    }

    #[test]
    fn cube_average_exact_and_grid_integration_agree() {
        let arc = IntervalUnion::from_f64(0.0, 0.4).unwrap();
        let f = Observable::arc_indicator(arc);
        let fs = vec![f.clone(); 3];
        let exact = cube_average(&rot(), &fs, 2, 12, &Evaluation::Integrated { grid: 0, base: Some(f.clone()) }).unwrap();
        let prod = SystemSpec::Product { factors: vec![rot()] };
        let g = Observable::indicator(SetSpec::TorusIntervals { coord: 0, set: IntervalUnion::from_f64(0.0, 0.4).unwrap() });
        let grid = cube_average(&prod, &vec![g.clone(); 3], 2, 12, &Evaluation::Integrated { grid: 1 << 12, base: Some(g) }).unwrap();
        assert!((exact.value - grid.value).norm() < 4.0 * 4.0 / (1 << 12) as f64);
    }

    #[test]
    fn kronecker_limit_fixtures() {
        let f1 = Observable::character(vec![2]);
        let f2 = Observable::character(vec![-1]);
        let x = t(0.31);
        let v = kronecker_double_limit(&f1, &f2, x, 16).unwrap();
        assert!((v - x.e()).norm() < 1e-12);
        let zero = Observable::constant(Complex64::new(0.0, 0.0));
        assert_eq!(kronecker_double_limit(&zero, &f2, x, 16).unwrap(), Complex64::new(0.0, 0.0));
        // 1_[0,0.3)(t) 1_[0,0.3)(2t): t in [0, 0.15)
        let ind = Observable::arc_indicator(IntervalUnion::from_f64(0.0, 0.3).unwrap());
        let v = kronecker_double_limit(&ind, &ind, TorusCoord::ZERO, 1 << 12).unwrap();
        assert!((v.re - 0.15).abs() <= 2.0 / (1 << 12) as f64);
    }

    #[test]
    fn roth_integral_fixtures() {
        assert!((roth_triple_integral(&Observable::one(), 32).unwrap() - 1.0).abs() < 1e-15);
        // F(t) = m(B ∩ B-t ∩ B-2t) for B = [0,1/2) is the hat of height 1/2 on [-1/4, 1/4]: integral 1/8
        let half = Observable::arc_indicator(IntervalUnion::from_f64(0.0, 0.5).unwrap());
        let v = roth_triple_integral(&half, 1024).unwrap();
        assert!((v - 0.125).abs() <= 2.0 / 1024.0, "{v}");
    }

    #[test]
    fn vdc_constant_sequence() {
        let u = vec![vec![Complex64::new(1.0, 0.0)]; 50];
        let r = vdc_check(&u, 5).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs - 1.0).abs() < 1e-12);
        assert!(r.lhs <= r.rigorous_rhs + 1e-12);
        assert!(vdc_check(&[vec![Complex64::new(2.0, 0.0)]], 1).is_err());
        assert!(vdc_check(&u, 0).is_err());
    }

    #[test]
    fn vdc_geometric_sequence() {
        let theta = TorusCoord::GOLDEN.to_f64();
        let n = 1000usize;
        let h = 10usize;
        let u: Vec<Vec<Complex64>> = (0..n + h - 1).map(|j| vec![crate::torus::phase_to_unit(j as f64 * theta)]).collect();
        let r = vdc_check(&u, h).unwrap();
        let norm_theta = TorusCoord::GOLDEN.dist_to_int();
        assert!(r.lhs <= 1.0 / (n as f64 * norm_theta).powi(2) * 4.0);
        // gamma_h = 1 for every h for a pure character
        assert!((r.rhs - 1.0).abs() < 1e-9);
        assert!(r.lhs <= r.rigorous_rhs);
    }

    #[test]
    fn commuting_average_geometric_bound() {
        let a = TorusCoord::SQRT2_MINUS_1;
        let b = TorusCoord::GOLDEN;
        let fam = CommutingFamily::new(vec![vec![a], vec![b]]).unwrap();
        let fs = [Observable::character(vec![1]), Observable::character(vec![-1])];
        let n = 5000;
        let r = commuting_average(&fam, &fs, n, &Evaluation::Pointwise { point: PhasePoint::Torus(vec![t(0.4)]) }).unwrap();
        assert!(r.value.norm() <= 2.0 / (n as f64 * (a - b).dist_to_int()));
        let r = commuting_average(&fam, &fs, n, &Evaluation::Integrated { grid: 8, base: None }).unwrap();
        assert!(r.value.norm() <= 2.0 / (n as f64 * (a - b).dist_to_int()));
    }

    #[test]
    fn commuting_equal_members_reduce_to_multi_average() {
        let a = TorusCoord::SQRT2_MINUS_1;
        let fam = CommutingFamily::new(vec![vec![a], vec![a]]).unwrap();
        let fs = [Observable::character(vec![3]), Observable::arc_indicator(IntervalUnion::from_f64(0.1, 0.6).unwrap())];
        let x = PhasePoint::Torus(vec![t(0.05)]);
        let c = commuting_average(&fam, &fs, 777, &Evaluation::Pointwise { point: x.clone() }).unwrap();
        let m = multi_average_pointwise(&rot(), &fs, &IteratePattern::diagonal(2), &x, 777).unwrap();
        assert!((c.value - m.value).norm() < 1e-12);
    }
}
