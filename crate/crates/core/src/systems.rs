//! Catalog of explicitly computable measure-preserving systems.
//!
//! Every transformation acts exactly on fixed-point coordinates, so
//! `iterate` (closed forms) and repeated `step` agree bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, guard, shape, Result};
use crate::heisenberg::binom2;
use crate::reduce;
use crate::torus::{phase_to_unit, TorusCoord, WideCoord};
use num_complex::Complex64;

/// Canonical point of the Heisenberg nilmanifold `G / Z^3`: `x, y, z` in `[0, 1)`.
///
/// The fibre coordinate `z` carries 128 fractional bits so that the term
/// `a1 * y` of the group law is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NilPoint {
    pub x: TorusCoord,
    pub y: TorusCoord,
    pub z: WideCoord,
}

/// Arbitrary coset representative: `x`, `y` as signed Q64.64 reals, `z` mod 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NilRaw {
    pub x: i128,
    pub y: i128,
    pub z: WideCoord,
}

impl NilRaw {
    /// Nearest representable representative of real coordinates (test/fixture helper).
    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        let q = |v: f64| (v * 18_446_744_073_709_551_616.0).round() as i128;
        NilRaw { x: q(x), y: q(y), z: TorusCoord::from_f64(z).widen() }
    }
}

/// Reduce a coset representative to the unique point with all coordinates in
/// `[0, 1)`, by right multiplication with lattice elements: first `x`, then
/// `y` (which shifts `z` by `-x * b`), then `z`.
pub fn canonicalize(raw: NilRaw) -> NilPoint {
    let a = raw.x >> 64;
    let x = TorusCoord::from_raw((raw.x - (a << 64)) as u64);
    // right-multiplying by (-a, 0, 0) leaves z unchanged
    let b = raw.y >> 64;
    let y = TorusCoord::from_raw((raw.y - (b << 64)) as u64);
    // right-multiplying by (0, -b, 0) adds x * (-b) to z
    let z = raw.z - x.widen().mul_int(b);
    NilPoint { x, y, z }
}

impl NilPoint {
    pub const IDENTITY: NilPoint = NilPoint { x: TorusCoord::ZERO, y: TorusCoord::ZERO, z: WideCoord::ZERO };

    pub fn to_raw(self) -> NilRaw {
        NilRaw { x: self.x.raw() as i128, y: self.y.raw() as i128, z: self.z }
    }
}

/// Translation element `a = (a1, a2, a3)` with `a1, a2, a3` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilTranslation {
    pub a1: TorusCoord,
    pub a2: TorusCoord,
    pub a3: WideCoord,
}

impl Default for NilTranslation {
    fn default() -> Self {
        NilTranslation { a1: TorusCoord::SQRT2_MINUS_1, a2: TorusCoord::GOLDEN, a3: WideCoord::ZERO }
    }
}

impl NilTranslation {
    /// Left multiplication of the coset of `p` by `a^n`.
    fn act(&self, p: NilPoint, n: i64) -> NilPoint {
        let n = n as i128;
        let a1n = n * self.a1.raw() as i128;
        let a2n = n * self.a2.raw() as i128;
        // a^n = (n a1, n a2, n a3 + C(n,2) a1 a2); a^n * p adds (n a1) * y to z
        let z = self.a3.mul_int(n)
            + WideCoord::product(self.a1, self.a2).mul_int(binom2(n as i64) as i128)
            + p.z
            + WideCoord::from_raw((a1n as u128).wrapping_mul(p.y.raw() as u128));
        canonicalize(NilRaw { x: a1n + p.x.raw() as i128, y: a2n + p.y.raw() as i128, z })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePoint {
    Cyclic(u64),
    Torus(Vec<TorusCoord>),
    Heisenberg(NilPoint),
    Product(Vec<PhasePoint>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkewForm {
    /// `(x, y) -> (x + a, y + x)`
    Plain,
    /// `(x, y) -> (x + a, y + 2x + a)`
    Nil,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `x -> x + step mod modulus` on `Z/modulus`.
    CyclicRotation { modulus: u64, step: u64 },
    /// `x -> x + alpha` on `T^d`.
    TorusRotation { alpha: Vec<TorusCoord> },
    SkewTorus { alpha: TorusCoord, form: SkewForm },
    /// `(x, y, z) -> (x + a, y + x, z + y)`
    Skew3Torus { alpha: TorusCoord },
    /// Left translation by `a` on the Heisenberg nilmanifold.
    HeisenbergNil { a: NilTranslation },
    Product { factors: Vec<SystemSpec> },
}

/// One axis of a phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Cyclic(u64),
    Circle,
}

fn binom3(n: i128) -> i128 {
    n * (n - 1) * (n - 2) / 6
}

impl SystemSpec {
    pub fn rotation(alpha: TorusCoord) -> Self {
        SystemSpec::TorusRotation { alpha: vec![alpha] }
    }

    pub fn heisenberg(a: NilTranslation) -> Self {
        SystemSpec::HeisenbergNil { a }
    }

    /// Coordinate axes of the phase space, products flattened in order.
    pub fn axes(&self) -> Vec<Axis> {
        let mut out = Vec::new();
        self.push_axes(&mut out);
        out
    }

    fn push_axes(&self, out: &mut Vec<Axis>) {
        match self {
            SystemSpec::CyclicRotation { modulus, .. } => out.push(Axis::Cyclic(*modulus)),
            SystemSpec::TorusRotation { alpha } => out.extend(alpha.iter().map(|_| Axis::Circle)),
            SystemSpec::SkewTorus { .. } => out.extend([Axis::Circle; 2]),
            SystemSpec::Skew3Torus { .. } | SystemSpec::HeisenbergNil { .. } => out.extend([Axis::Circle; 3]),
            SystemSpec::Product { factors } => factors.iter().for_each(|f| f.push_axes(out)),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes().len()
    }

    /// Validates parameters (nonzero modulus, nonempty vectors, residues in range).
    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::CyclicRotation { modulus, step } => {
                if *modulus == 0 {
                    return Err(domain("cyclic modulus must be positive"));
                }
                if step >= modulus {
                    return Err(domain(format!("cyclic step {step} not reduced mod {modulus}")));
                }
                Ok(())
            }
            SystemSpec::TorusRotation { alpha } if alpha.is_empty() => Err(domain("torus rotation needs d >= 1")),
            SystemSpec::Product { factors } if factors.is_empty() => Err(domain("empty product system")),
            SystemSpec::Product { factors } => factors.iter().try_for_each(|f| f.validate()),
            _ => Ok(()),
        }
    }

    /// Checks that `p` is a point of this system's phase space.
    pub fn check_point(&self, p: &PhasePoint) -> Result<()> {
        match (self, p) {
            (SystemSpec::CyclicRotation { modulus, .. }, PhasePoint::Cyclic(r)) => {
                if r < modulus {
                    Ok(())
                } else {
                    Err(shape(format!("residue {r} outside Z/{modulus}")))
                }
            }
            (SystemSpec::TorusRotation { alpha }, PhasePoint::Torus(c)) if c.len() == alpha.len() => Ok(()),
            (SystemSpec::SkewTorus { .. }, PhasePoint::Torus(c)) if c.len() == 2 => Ok(()),
            (SystemSpec::Skew3Torus { .. }, PhasePoint::Torus(c)) if c.len() == 3 => Ok(()),
            (SystemSpec::HeisenbergNil { .. }, PhasePoint::Heisenberg(_)) => Ok(()),
            (SystemSpec::Product { factors }, PhasePoint::Product(ps)) if ps.len() == factors.len() => {
                factors.iter().zip(ps).try_for_each(|(f, q)| f.check_point(q))
            }
            _ => Err(shape(format!("point {p:?} does not belong to {}", self.name()))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::CyclicRotation { .. } => "cyclic-rotation",
            SystemSpec::TorusRotation { .. } => "torus-rotation",
            SystemSpec::SkewTorus { .. } => "skew-torus",
            SystemSpec::Skew3Torus { .. } => "skew3-torus",
            SystemSpec::HeisenbergNil { .. } => "heisenberg-nil",
            SystemSpec::Product { .. } => "product",
        }
    }

    /// Rotation angle when this is a one-dimensional circle rotation.
    pub fn circle_rotation_angle(&self) -> Option<TorusCoord> {
        match self {
            SystemSpec::TorusRotation { alpha } if alpha.len() == 1 => Some(alpha[0]),
            _ => None,
        }
    }

    /// Builds a point from one value per axis (`Cyclic` axes take a residue in
    /// the raw slot).
    pub fn assemble(&self, values: &[u64]) -> Result<PhasePoint> {
        if values.len() != self.dim() {
            return Err(shape(format!("{} coordinates for a {}-dimensional space", values.len(), self.dim())));
        }
        let mut it = values.iter().copied();
        Ok(self.assemble_from(&mut it))
    }

    fn assemble_from(&self, it: &mut impl Iterator<Item = u64>) -> PhasePoint {
        let mut circle = |n: usize| -> Vec<TorusCoord> { (0..n).map(|_| TorusCoord::from_raw(it.next().unwrap())).collect() };
        match self {
            SystemSpec::CyclicRotation { modulus, .. } => PhasePoint::Cyclic(circle(1)[0].raw() % modulus),
            SystemSpec::TorusRotation { alpha } => PhasePoint::Torus(circle(alpha.len())),
            SystemSpec::SkewTorus { .. } => PhasePoint::Torus(circle(2)),
            SystemSpec::Skew3Torus { .. } => PhasePoint::Torus(circle(3)),
            SystemSpec::HeisenbergNil { .. } => {
                let c = circle(3);
                PhasePoint::Heisenberg(NilPoint { x: c[0], y: c[1], z: c[2].widen() })
            }
            SystemSpec::Product { factors } => {
                PhasePoint::Product(factors.iter().map(|f| f.assemble_from(it)).collect())
            }
        }
    }

    /// Identity-like base point: all coordinates zero.
    pub fn origin(&self) -> PhasePoint {
        self.assemble(&vec![0; self.dim()]).expect("dimension matches")
    }
}

/// One application of the transformation.
pub fn step(sys: &SystemSpec, p: &PhasePoint) -> Result<PhasePoint> {
    sys.check_point(p)?;
    Ok(step_unchecked(sys, p))
}

fn step_unchecked(sys: &SystemSpec, p: &PhasePoint) -> PhasePoint {
    match (sys, p) {
        (SystemSpec::CyclicRotation { modulus, step }, PhasePoint::Cyclic(r)) => {
            PhasePoint::Cyclic(((*r as u128 + *step as u128) % *modulus as u128) as u64)
        }
        (SystemSpec::TorusRotation { alpha }, PhasePoint::Torus(c)) => {
            PhasePoint::Torus(c.iter().zip(alpha).map(|(&x, &a)| x + a).collect())
        }
        (SystemSpec::SkewTorus { alpha, form }, PhasePoint::Torus(c)) => {
            let (x, y) = (c[0], c[1]);
            let y1 = match form {
                SkewForm::Plain => y + x,
                SkewForm::Nil => y + x + x + *alpha,
            };
            PhasePoint::Torus(vec![x + *alpha, y1])
        }
        (SystemSpec::Skew3Torus { alpha }, PhasePoint::Torus(c)) => {
            PhasePoint::Torus(vec![c[0] + *alpha, c[1] + c[0], c[2] + c[1]])
        }
        (SystemSpec::HeisenbergNil { a }, PhasePoint::Heisenberg(g)) => {
            // a * g = (a1 + x, a2 + y, a3 + z + a1 y), then reduce
            let z = a.a3 + g.z + WideCoord::product(a.a1, g.y);
            PhasePoint::Heisenberg(canonicalize(NilRaw {
                x: a.a1.raw() as i128 + g.x.raw() as i128,
                y: a.a2.raw() as i128 + g.y.raw() as i128,
                z,
            }))
        }
        (SystemSpec::Product { factors }, PhasePoint::Product(ps)) => {
            PhasePoint::Product(factors.iter().zip(ps).map(|(f, q)| step_unchecked(f, q)).collect())
        }
        _ => unreachable!("shape checked by caller"),
    }
}

/// `T^n p` by closed form, for any signed `n`.
pub fn iterate(sys: &SystemSpec, p: &PhasePoint, n: i64) -> Result<PhasePoint> {
    sys.check_point(p)?;
    Ok(iterate_unchecked(sys, p, n))
}

pub(crate) fn iterate_unchecked(sys: &SystemSpec, p: &PhasePoint, n: i64) -> PhasePoint {
    let m = n as i128;
    match (sys, p) {
        (SystemSpec::CyclicRotation { modulus, step }, PhasePoint::Cyclic(r)) => {
            let md = *modulus as i128;
            PhasePoint::Cyclic((*r as i128 + m * (*step as i128 % md)).rem_euclid(md) as u64)
        }
        (SystemSpec::TorusRotation { alpha }, PhasePoint::Torus(c)) => {
            PhasePoint::Torus(c.iter().zip(alpha).map(|(&x, &a)| x + a.mul_int(m)).collect())
        }
        (SystemSpec::SkewTorus { alpha, form }, PhasePoint::Torus(c)) => {
            let (x, y) = (c[0], c[1]);
            let y1 = match form {
                // y + n x + C(n,2) a
                SkewForm::Plain => y + x.mul_int(m) + alpha.mul_int(binom2(n) as i128),
                // y + 2 n x + n^2 a
                SkewForm::Nil => y + x.mul_int(2 * m) + alpha.mul_int(m * m),
            };
            PhasePoint::Torus(vec![x + alpha.mul_int(m), y1])
        }
        (SystemSpec::Skew3Torus { alpha }, PhasePoint::Torus(c)) => {
            let (x, y, z) = (c[0], c[1], c[2]);
            let b2 = binom2(n) as i128;
            PhasePoint::Torus(vec![
                x + alpha.mul_int(m),
                y + x.mul_int(m) + alpha.mul_int(b2),
                z + y.mul_int(m) + x.mul_int(b2) + alpha.mul_int(binom3(m)),
            ])
        }
        (SystemSpec::HeisenbergNil { a }, PhasePoint::Heisenberg(g)) => PhasePoint::Heisenberg(a.act(*g, n)),
        (SystemSpec::Product { factors }, PhasePoint::Product(ps)) => {
            PhasePoint::Product(factors.iter().zip(ps).map(|(f, q)| iterate_unchecked(f, q, n)).collect())
        }
        _ => unreachable!("shape checked by caller"),
    }
}

/// `n`-fold application of [`step`]; the reference path for `iterate`.
pub fn iterate_by_steps(sys: &SystemSpec, p: &PhasePoint, n: u64) -> Result<PhasePoint> {
    sys.check_point(p)?;
    let mut q = p.clone();
    for _ in 0..n {
        q = step_unchecked(sys, &q);
    }
    Ok(q)
}

impl PhasePoint {
    /// Number of scalar coordinates.
    pub fn dim(&self) -> usize {
        match self {
            PhasePoint::Heisenberg(_) => 3,
            PhasePoint::Cyclic(_) => 1,
            PhasePoint::Torus(c) => c.len(),
            PhasePoint::Product(ps) => ps.iter().map(PhasePoint::dim).sum(),
        }
    }
}

/// Coordinates of `p` as circle points; a cyclic residue `r` of `Z/N` is read
/// as `floor(r / N)` in fixed point.
pub fn coords(sys: &SystemSpec, p: &PhasePoint) -> Vec<TorusCoord> {
    let mut out = Vec::with_capacity(p.dim());
    push_coords(sys, p, &mut out);
    out
}

fn push_coords(sys: &SystemSpec, p: &PhasePoint, out: &mut Vec<TorusCoord>) {
    match (sys, p) {
        (SystemSpec::CyclicRotation { modulus, .. }, PhasePoint::Cyclic(r)) => {
            out.push(TorusCoord::from_ratio(*r as i128, *modulus))
        }
        (_, PhasePoint::Torus(c)) => out.extend_from_slice(c),
        (_, PhasePoint::Heisenberg(g)) => out.extend([g.x, g.y, g.z.narrow()]),
        (SystemSpec::Product { factors }, PhasePoint::Product(ps)) => {
            factors.iter().zip(ps).for_each(|(f, q)| push_coords(f, q, out))
        }
        _ => {}
    }
}

/// Phase `xi . coords(p)` in `[0, 1)`, computed exactly before the final
/// conversion (cyclic residues contribute `xi r / N`).
pub fn phase(sys: &SystemSpec, p: &PhasePoint, xi: &[i64]) -> Result<f64> {
    if xi.len() != p.dim() {
        return Err(shape(format!("frequency of length {} for a {}-dimensional point", xi.len(), p.dim())));
    }
    let mut circle = TorusCoord::ZERO;
    let mut rational = 0.0f64;
    let mut idx = 0usize;
    accumulate_phase(sys, p, xi, &mut idx, &mut circle, &mut rational);
    let t = circle.to_f64() + rational;
    Ok(t - t.floor())
}

fn accumulate_phase(
    sys: &SystemSpec,
    p: &PhasePoint,
    xi: &[i64],
    idx: &mut usize,
    circle: &mut TorusCoord,
    rational: &mut f64,
) {
    match (sys, p) {
        (SystemSpec::CyclicRotation { modulus, .. }, PhasePoint::Cyclic(r)) => {
            let num = (xi[*idx] as i128 * *r as i128).rem_euclid(*modulus as i128);
            *rational += num as f64 / *modulus as f64;
            *idx += 1;
        }
        (_, PhasePoint::Torus(c)) => {
            for &x in c {
                *circle += x.mul_int(xi[*idx] as i128);
                *idx += 1;
            }
        }
        (_, PhasePoint::Heisenberg(g)) => {
            *circle += g.x.mul_int(xi[*idx] as i128) + g.y.mul_int(xi[*idx + 1] as i128);
            *circle += g.z.mul_int(xi[*idx + 2] as i128).narrow();
            *idx += 3;
        }
        (SystemSpec::Product { factors }, PhasePoint::Product(ps)) => {
            for (f, q) in factors.iter().zip(ps) {
                accumulate_phase(f, q, xi, idx, circle, rational);
            }
        }
        _ => {}
    }
}

/// `(1/N) sum_{n<N} e(xi . coords(T^n p))`.
pub fn weyl_sum(sys: &SystemSpec, p: &PhasePoint, xi: &[i64], n: u64) -> Result<Complex64> {
    sys.check_point(p)?;
    if n == 0 {
        return Err(domain("weyl_sum needs N >= 1"));
    }
    phase(sys, p, xi)?;
    let total: Complex64 = reduce::sum_indexed(n, |i| {
        let q = iterate_unchecked(sys, p, i as i64);
        phase_to_unit(phase(sys, &q, xi).expect("dimension checked"))
    });
    Ok(total / n as f64)
}

/// Commuting rotations `T_j x = x + alpha_j` on a shared torus `T^d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutingFamily {
    pub generators: Vec<Vec<TorusCoord>>,
}

impl CommutingFamily {
    pub fn new(generators: Vec<Vec<TorusCoord>>) -> Result<Self> {
        let family = CommutingFamily { generators };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.generators.first().map(Vec::len).ok_or_else(|| domain("empty commuting family"))?;
        if d == 0 {
            return Err(domain("commuting family on T^0"));
        }
        if self.generators.iter().any(|g| g.len() != d) {
            return Err(shape("commuting family members must share the torus dimension"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn member(&self, j: usize) -> SystemSpec {
        SystemSpec::TorusRotation { alpha: self.generators[j].clone() }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Midpoint of cell `i` of an `m`-cell grid on the circle.
pub fn grid_midpoint(i: u64, m: u64) -> TorusCoord {
    TorusCoord::from_raw((((2 * i as u128 + 1) << 63) / m as u128) as u64)
}

/// Guarded size of the product grid used for quadrature over `sys`.
pub(crate) fn grid_size(axes: &[Axis], m: u64) -> Result<u64> {
    let mut total: u64 = 1;
    for a in axes {
        let n = match a {
            Axis::Cyclic(n) => *n,
            Axis::Circle => m,
        };
        total = total
            .checked_mul(n)
            .filter(|&t| t <= 1 << 32)
            .ok_or_else(|| guard(format!("quadrature grid exceeds 2^32 points (M = {m}, {} axes)", axes.len())))?;
    }
    Ok(total)
}

/// The `index`-th point of the quadrature grid (row-major, last axis fastest).
pub(crate) fn grid_point(sys: &SystemSpec, axes: &[Axis], m: u64, mut index: u64) -> PhasePoint {
    let mut raw = vec![0u64; axes.len()];
    for (slot, a) in raw.iter_mut().zip(axes).rev() {
        match a {
            Axis::Cyclic(n) => {
                *slot = index % n;
                index /= n;
            }
            Axis::Circle => {
                *slot = grid_midpoint(index % m, m).raw();
                index /= m;
            }
        }
    }
    sys.assemble(&raw).expect("axes come from sys")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(x: f64) -> TorusCoord {
        TorusCoord::from_f64(x)
    }

    #[test]
    fn cyclic_wraparound() {
        let sys = SystemSpec::CyclicRotation { modulus: 5, step: 1 };
        assert_eq!(step(&sys, &PhasePoint::Cyclic(4)).unwrap(), PhasePoint::Cyclic(0));
        assert_eq!(iterate(&sys, &PhasePoint::Cyclic(4), -9).unwrap(), PhasePoint::Cyclic(0));
    }

    #[test]
    fn skew_plain_step_and_orbit() {
        let a = TorusCoord::SQRT2_MINUS_1;
        let sys = SystemSpec::SkewTorus { alpha: a, form: SkewForm::Plain };
        let (x, y) = (t(0.3), t(0.8));
        let p = PhasePoint::Torus(vec![x, y]);
        assert_eq!(step(&sys, &p).unwrap(), PhasePoint::Torus(vec![x + a, y + x]));
        // n = 3: (x + 3a, y + 3x + 3a)
        let want = PhasePoint::Torus(vec![x + a.mul_int(3), y + x.mul_int(3) + a.mul_int(3)]);
        assert_eq!(iterate(&sys, &p, 3).unwrap(), want);
    }

    #[test]
    fn skew_nil_orbit() {
        let a = TorusCoord::GOLDEN;
        let sys = SystemSpec::SkewTorus { alpha: a, form: SkewForm::Nil };
        let (x, y) = (t(0.1), t(0.6));
        let p = PhasePoint::Torus(vec![x, y]);
        let want = PhasePoint::Torus(vec![x + a.mul_int(2), y + x.mul_int(4) + a.mul_int(4)]);
        assert_eq!(iterate(&sys, &p, 2).unwrap(), want);
        assert_eq!(iterate_by_steps(&sys, &p, 2).unwrap(), want);
    }

    #[test]
    fn heisenberg_identity_goes_to_a() {
        let a = NilTranslation::default();
        let sys = SystemSpec::heisenberg(a);
        let q = step(&sys, &PhasePoint::Heisenberg(NilPoint::IDENTITY)).unwrap();
        assert_eq!(q, PhasePoint::Heisenberg(NilPoint { x: a.a1, y: a.a2, z: a.a3 }));
    }

    #[test]
    fn canonicalize_fixtures() {
        // (1.25, 0.5, 0.5): right-multiplying by (-1, 0, 0) leaves z alone
        let p = canonicalize(NilRaw::from_f64(1.25, 0.5, 0.5));
        assert_eq!(p, NilPoint { x: t(0.25), y: t(0.5), z: t(0.5).widen() });
        // (0.5, 1.25, 0): y-reduction by b = 1 shifts z by -0.5
        let q = canonicalize(NilRaw::from_f64(0.5, 1.25, 0.0));
        assert_eq!(q, NilPoint { x: t(0.5), y: t(0.25), z: t(0.5).widen() });
        // negative coordinates: (-0.25, -0.5, 0) -> x = 0.75, b = -1, z = 0 + 0.75
        let r = canonicalize(NilRaw::from_f64(-0.25, -0.5, 0.0));
        assert_eq!(r, NilPoint { x: t(0.75), y: t(0.5), z: t(0.75).widen() });
        let c = NilPoint { x: t(0.3), y: t(0.4), z: t(0.9).widen() };
        assert_eq!(canonicalize(c.to_raw()), c);
    }

    #[test]
    fn shape_errors() {
        let sys = SystemSpec::SkewTorus { alpha: t(0.1), form: SkewForm::Plain };
        assert!(step(&sys, &PhasePoint::Torus(vec![t(0.1)])).is_err());
        assert!(iterate(&sys, &PhasePoint::Cyclic(0), 1).is_err());
        let cyc = SystemSpec::CyclicRotation { modulus: 4, step: 1 };
        assert!(step(&cyc, &PhasePoint::Cyclic(4)).is_err());
    }

    #[test]
    fn weyl_sum_zero_frequency_is_one() {
        let sys = SystemSpec::heisenberg(NilTranslation::default());
        let w = weyl_sum(&sys, &PhasePoint::Heisenberg(NilPoint::IDENTITY), &[0, 0, 0], 1000).unwrap();
        assert_eq!(w, Complex64::new(1.0, 0.0));
        assert!(weyl_sum(&sys, &PhasePoint::Heisenberg(NilPoint::IDENTITY), &[0, 0], 10).is_err());
    }

    #[test]
    fn weyl_sum_rotation_geometric_bound() {
        let a = TorusCoord::SQRT2_MINUS_1;
        let sys = SystemSpec::rotation(a);
        let n = 100_000u64;
        let w = weyl_sum(&sys, &PhasePoint::Torus(vec![t(0.2)]), &[1], n).unwrap();
        // |sum_{j<N} e(j a)| <= 1 / |sin(pi a)| <= 1 / (2 ||a||)
        let bound = 2.0 / (n as f64 * a.dist_to_int());
        assert!(w.norm() <= bound, "{} > {}", w.norm(), bound);
    }

    #[test]
    fn weyl_sum_quadratic_equidistributes() {
        let sys = SystemSpec::SkewTorus { alpha: TorusCoord::SQRT2_MINUS_1, form: SkewForm::Nil };
        let p = PhasePoint::Torus(vec![t(0.0), t(0.0)]);
        let w = weyl_sum(&sys, &p, &[0, 1], 100_000).unwrap();
        assert!(w.norm() <= 0.05, "{}", w.norm());
    }

    #[test]
    fn commuting_family_validation() {
        assert!(CommutingFamily::new(vec![]).is_err());
        assert!(CommutingFamily::new(vec![vec![t(0.1)], vec![t(0.2), t(0.3)]]).is_err());
        let fam = CommutingFamily::new(vec![vec![t(0.1), t(0.2)], vec![t(0.3), t(0.4)]]).unwrap();
        let p = PhasePoint::Torus(vec![t(0.5), t(0.9)]);
        let (s, u) = (fam.member(0), fam.member(1));
        let st = step(&s, &step(&u, &p).unwrap()).unwrap();
        let ts = step(&u, &step(&s, &p).unwrap()).unwrap();
        assert_eq!(st, ts);
    }

    #[test]
    fn grid_midpoints() {
        assert_eq!(grid_midpoint(0, 2), t(0.25));
        assert_eq!(grid_midpoint(1, 2), t(0.75));
        assert_eq!(grid_midpoint(3, 8), t(7.0 / 16.0));
    }

    #[test]
    fn product_system_steps_componentwise() {
        let sys = SystemSpec::Product {
            factors: vec![SystemSpec::CyclicRotation { modulus: 3, step: 2 }, SystemSpec::rotation(t(0.5))],
        };
        let p = PhasePoint::Product(vec![PhasePoint::Cyclic(2), PhasePoint::Torus(vec![t(0.75)])]);
        let q = step(&sys, &p).unwrap();
        assert_eq!(q, PhasePoint::Product(vec![PhasePoint::Cyclic(1), PhasePoint::Torus(vec![t(0.25)])]));
        assert_eq!(iterate(&sys, &p, 5).unwrap(), iterate_by_steps(&sys, &p, 5).unwrap());
        assert_eq!(sys.axes(), vec![Axis::Cyclic(3), Axis::Circle]);
    }
}
