//! Laurent polynomials in two variables over the rationals: Newton polygons,
//! slicing along affine functionals, exact divisibility, mutability,
//! mutations, and the degree maps `ψ` and `ξ` that transport mutable degrees
//! and dual monoids through a mutation.

use crate::error::{Error, Result};
use crate::geometry::{
    lv, phi, DualVec, EdgeData, ExtDualVec, LatticeVec, Polygon, Rat,
};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A Laurent polynomial `Σ a_v χ^v` with finite support in `Z²` and nonzero
/// rational coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<LatticeVec, Rat>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly::default()
    }

    pub fn one() -> LaurentPoly {
        LaurentPoly::monomial(LatticeVec::ZERO, Rat::one())
    }

    pub fn monomial(v: LatticeVec, coeff: Rat) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(v, coeff);
        }
        LaurentPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (LatticeVec, Rat)>>(iter: I) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (v, c) in iter {
            out.add_term(v, c);
        }
        out
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_int_terms<I: IntoIterator<Item = (i64, i64, i64)>>(iter: I) -> LaurentPoly {
        LaurentPoly::from_terms(
            iter.into_iter().map(|(x, y, c)| (lv(x, y), Rat::from_integer(c.into()))),
        )
    }

    fn add_term(&mut self, v: LatticeVec, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LatticeVec, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, v: LatticeVec) -> Rat {
        self.terms.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support(&self) -> Vec<LatticeVec> {
        self.terms.keys().copied().collect()
    }

    pub fn translate(&self, w: LatticeVec) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&v, c)| (v + w, c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> LaurentPoly {
        if s.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(&v, c)| (v, c * s)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> LaurentPoly {
        let mut acc = LaurentPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// The canonical normalized polynomial with Newton polygon a given
    /// segment or point: `χ^min · (1 + χ^d)^ℓ`.
    pub fn segment_witness(q: &Polygon) -> Result<LaurentPoly> {
        match q.dim() {
            0 => Ok(LaurentPoly::monomial(q.vertices()[0], Rat::one())),
            1 => {
                let d = q.segment_direction().unwrap();
                let len = q.segment_lattice_length().unwrap();
                let base = LaurentPoly::from_terms([
                    (LatticeVec::ZERO, Rat::one()),
                    (d, Rat::one()),
                ]);
                Ok(base.pow(len as u32).translate(*q.vertices().iter().min().unwrap()))
            }
            _ => Err(Error::WitnessOutsideKernel),
        }
    }

    /// Newton polygon of a nonzero polynomial.
    pub fn newton(&self) -> Result<Polygon> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Polygon::hull(&self.support())
    }

    /// `true` iff the coefficient at every vertex of the Newton polygon is 1.
    pub fn is_normalized(&self) -> Result<bool> {
        let newton = self.newton()?;
        Ok(newton.vertices().iter().all(|&v| self.coeff(v).is_one()))
    }

    /// Splits into the parts `f_i` supported on the level sets `φ_m = i`;
    /// only nonzero parts are reported, and they sum back to `f`.
    pub fn slices(&self, m: ExtDualVec) -> BTreeMap<i64, LaurentPoly> {
        let mut out: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
        for (&v, c) in &self.terms {
            out.entry(phi(m, v)).or_insert_with(LaurentPoly::zero).add_term(v, c.clone());
        }
        out
    }
}

impl std::ops::Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&v, c) in &other.terms {
            out.add_term(v, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&v, c) in &other.terms {
            out.add_term(v, -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&v, c) in &self.terms {
            for (&w, d) in &other.terms {
                out.add_term(v + w, c * d);
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&v, c) in &self.terms {
            let neg = c.is_negative();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = v == LatticeVec::ZERO;
            let unit_coeff = abs.is_one();
            if !unit_coeff || is_const {
                write!(f, "{abs}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let power = |f: &mut fmt::Formatter<'_>, sym: &str, e: i64| -> fmt::Result {
                match e {
                    0 => Ok(()),
                    1 => write!(f, "{sym}"),
                    _ => write!(f, "{sym}^{e}"),
                }
            };
            if v.x != 0 {
                power(f, "x", v.x)?;
                if v.y != 0 {
                    write!(f, "*")?;
                }
            }
            if v.y != 0 {
                power(f, "y", v.y)?;
            }
        }
        Ok(())
    }
}

/// Exact division of univariate coefficient lists (ascending order):
/// returns `h / g` when the division is exact.
fn div_exact_univariate(h: &[Rat], g: &[Rat]) -> Option<Vec<Rat>> {
    debug_assert!(!g.is_empty() && !g[0].is_zero());
    if h.is_empty() {
        return Some(Vec::new());
    }
    if h.len() < g.len() {
        return None;
    }
    let qlen = h.len() - g.len() + 1;
    let mut rem: Vec<Rat> = h.to_vec();
    let mut q = vec![Rat::zero(); qlen];
    for j in 0..qlen {
        let qj = &rem[j] / &g[0];
        for (i, gi) in g.iter().enumerate() {
            let delta = &qj * gi;
            rem[j + i] -= delta;
        }
        q[j] = qj;
    }
    if rem.iter().all(|r| r.is_zero()) {
        Some(q)
    } else {
        None
    }
}

/// Decomposes a polynomial into its restrictions to lattice lines parallel to
/// `d`, each reported as `(base point, ascending coefficients)`.
fn line_decomposition(h: &LaurentPoly, d: LatticeVec) -> Vec<(LatticeVec, Vec<Rat>)> {
    let normal = DualVec { a: -d.y, b: d.x };
    // Parametrize each line by the step count along d from its minimal term.
    let mut lines: BTreeMap<i64, Vec<(i64, LatticeVec, Rat)>> = BTreeMap::new();
    let along = DualVec { a: d.x, b: d.y };
    for (&v, c) in h.terms() {
        lines.entry(normal.dot(v)).or_default().push((along.dot(v), v, c.clone()));
    }
    let step = along.dot(d);
    let mut out = Vec::new();
    for (_, mut pts) in lines {
        pts.sort_by_key(|&(t, _, _)| t);
        let (t0, base, _) = pts[0];
        let tmax = pts.last().unwrap().0;
        debug_assert_eq!((tmax - t0) % step, 0);
        let len = ((tmax - t0) / step) as usize + 1;
        let mut coeffs = vec![Rat::zero(); len];
        for (t, _, c) in pts {
            debug_assert_eq!((t - t0) % step, 0);
            coeffs[((t - t0) / step) as usize] = c;
        }
        out.push((base, coeffs));
    }
    out
}

/// Tests whether `h = q · g^i` for a Laurent polynomial `q` and returns the
/// quotient on success.  `g` must be supported on a point or a segment.
pub fn divides_power(h: &LaurentPoly, g: &LaurentPoly, i: u32) -> Result<Option<LaurentPoly>> {
    if g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if i == 0 {
        return Ok(Some(h.clone()));
    }
    if h.is_zero() {
        return Ok(Some(LaurentPoly::zero()));
    }
    let delta_g = g.newton()?;
    match delta_g.dim() {
        0 => {
            // Monomial: always divides in the Laurent ring.
            let w = delta_g.vertices()[0];
            let c = g.coeff(w);
            let scale = (0..i).fold(Rat::one(), |acc, _| acc / &c);
            Ok(Some(h.translate(-(i as i64) * w).scale(&scale)))
        }
        1 => {
            let d = delta_g.segment_direction().unwrap();
            let g_lines = line_decomposition(g, d);
            debug_assert_eq!(g_lines.len(), 1);
            let (g_base, g_coeffs) = &g_lines[0];
            let mut quotient = LaurentPoly::zero();
            for (h_base, mut h_coeffs) in line_decomposition(h, d) {
                // Repeated exact division, failing fast on a remainder.
                for _ in 0..i {
                    match div_exact_univariate(&h_coeffs, g_coeffs) {
                        Some(q) => h_coeffs = q,
                        None => return Ok(None),
                    }
                }
                let base = h_base - (i as i64) * *g_base;
                for (j, c) in h_coeffs.into_iter().enumerate() {
                    quotient.add_term(base + (j as i64) * d, c);
                }
            }
            Ok(Some(quotient))
        }
        _ => Err(Error::WitnessOutsideKernel),
    }
}

fn check_kernel(m: ExtDualVec, delta_g: &Polygon) -> Result<()> {
    if delta_g.dim() > 1 {
        return Err(Error::WitnessOutsideKernel);
    }
    if delta_g.vertices().iter().any(|&v| m.pi_m().dot(v) != 0) {
        return Err(Error::WitnessOutsideKernel);
    }
    Ok(())
}

/// Whether `f` is `(m, g)`-mutable: every positive slice `f_i` must be
/// divisible by `g^i`.  Zero and negative slices impose no condition.
pub fn is_mg_mutable(f: &LaurentPoly, m: ExtDualVec, g: &LaurentPoly) -> Result<bool> {
    check_kernel(m, &g.newton()?)?;
    for (i, part) in f.slices(m) {
        if i >= 1 && divides_power(&part, g, i as u32)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The mutation `mut_m^g f = Σ_i f_i / g^i`: positive slices are divided
/// exactly, negative slices are multiplied by the matching power of `g`.
pub fn mutate(f: &LaurentPoly, m: ExtDualVec, g: &LaurentPoly) -> Result<LaurentPoly> {
    check_kernel(m, &g.newton()?)?;
    let mut out = LaurentPoly::zero();
    for (i, part) in f.slices(m) {
        let piece = if i >= 1 {
            divides_power(&part, g, i as u32)?.ok_or(Error::NotMutable { m, level: i })?
        } else if i == 0 {
            part
        } else {
            &part * &g.pow((-i) as u32)
        };
        out = &out + &piece;
    }
    if f.is_normalized()? {
        // Normalization is preserved by mutation; a violation would expose a
        // divisibility bug, so fail loudly.
        assert!(
            out.is_normalized()?,
            "mutation of a normalized polynomial must stay normalized"
        );
    }
    Ok(out)
}

/// A degree at which a polynomial is mutable, together with the canonical
/// lattice-length-one witness and, when the degree was found through an edge
/// scan, the `(edge, n, k)` parameters with `m = n·R* − k·s_E`.
#[derive(Clone, Debug)]
pub struct MutableDegree {
    pub m: ExtDualVec,
    pub witness_g: LaurentPoly,
    pub edge: Option<EdgeData>,
    pub params: Option<(i64, i64)>,
}

/// Canonical witness for a degree: `1 + χ^d` with `d` the lex-positive
/// primitive vector spanning `(π_M(m) = 0)`.
pub fn canonical_witness(m: ExtDualVec) -> Result<LaurentPoly> {
    let d = m
        .pi_m()
        .kernel_direction()
        .ok_or(Error::RadialDegree(m))?;
    Ok(LaurentPoly::from_terms([
        (LatticeVec::ZERO, Rat::one()),
        (d, Rat::one()),
    ]))
}

/// Whether `f` is `m`-mutable, i.e. `(m, g)`-mutable with `Δ(g)` a segment of
/// lattice length one.  Divisibility is translation invariant in `g`, so the
/// canonical translate suffices.
pub fn is_m_mutable(f: &LaurentPoly, m: ExtDualVec) -> Result<Option<MutableDegree>> {
    if m.is_radial() {
        return Err(Error::RadialDegree(m));
    }
    if !f.is_normalized()? {
        return Err(Error::NotNormalized);
    }
    let g = canonical_witness(m)?;
    if is_mg_mutable(f, m, &g)? {
        Ok(Some(MutableDegree { m, witness_g: g, edge: None, params: None }))
    } else {
        Ok(None)
    }
}

/// The degree transport `ψ_(m,g)` extended as in the family bookkeeping:
/// `m` itself maps to `−m`, degrees collinear with `m` shift by `−m`, and
/// everything else is corrected by the support value of the witness.
pub fn psi(m: ExtDualVec, g: &LaurentPoly, r: ExtDualVec) -> Result<ExtDualVec> {
    let delta_g = g.newton()?;
    check_kernel(m, &delta_g)?;
    if r == m {
        return Ok(-m);
    }
    if r.pi_m().is_collinear(m.pi_m()) {
        return Ok(r - m);
    }
    Ok(r + delta_g.eta(-r.pi_m()) * m)
}

/// The piecewise-linear map `ξ_(m,Q)(h) = h − η_Q(π_M(h))·m` transporting the
/// dual monoid of a polygon onto the dual monoid of its mutation.
pub fn xi(m: ExtDualVec, q: &Polygon, h: ExtDualVec) -> ExtDualVec {
    h - q.eta(h.pi_m()) * m
}

/// `ψ_m` on degrees, with the witness given as a polygon: `m ↦ −m`, degrees
/// collinear with `m` shift by `−m`, and transverse degrees are corrected by
/// the support value of the witness segment.
pub fn psi_degree(m: ExtDualVec, q: &Polygon, r: ExtDualVec) -> ExtDualVec {
    if r == m {
        -m
    } else if r.pi_m().is_collinear(m.pi_m()) {
        r - m
    } else {
        r + q.eta(-r.pi_m()) * m
    }
}

/// An edge-parametrized enumeration of mutable degrees together with the
/// bounds it was run at.
///
/// Every degree with `max φ_m ≥ 1` at which a polynomial with
/// two-dimensional Newton polygon can be mutable has its top level set on an
/// edge `E`, hence is of the form `n·R* − k·s_E` with `n, k ≥ 1`; the
/// enumeration below is therefore complete for that part of the mutable set
/// within the stated bounds.  Degrees with `max φ_m ≤ 0` are vacuously
/// mutable and not listed.
#[derive(Clone, Debug)]
pub struct MutableDegrees {
    pub degrees: Vec<MutableDegree>,
    pub n_max: i64,
    pub k_max: i64,
}

/// All mutable degrees `n·R* − k·s_E` with `1 ≤ n ≤ n_max`, `1 ≤ k ≤ k_max`,
/// sorted by `(edge index, n, k)`.
pub fn mutable_degrees(f: &LaurentPoly, n_max: i64, k_max: i64) -> Result<MutableDegrees> {
    let newton = f.newton()?;
    if newton.dim() != 2 {
        return Err(Error::DegeneratePolygon);
    }
    let mut degrees = Vec::new();
    for edge in newton.edge_data()? {
        // Divisibility of the edge row caps the mutable level by the
        // lattice length of the edge.
        let n_hi = n_max.min(edge.length);
        for n in 1..=n_hi {
            for k in 1..=k_max {
                let m = n * ExtDualVec::GORENSTEIN - k * edge.s_e;
                if let Some(mut found) = is_m_mutable(f, m)? {
                    found.edge = Some(edge.clone());
                    found.params = Some((n, k));
                    degrees.push(found);
                }
            }
        }
    }
    Ok(MutableDegrees { degrees, n_max, k_max })
}

/// The largest `n ≤ n_cap` with `f` mutable at `n·R* − s_E`; mutability is
/// monotone downwards in `n`, so an upward scan is exact.  `n_cap` defaults
/// to the level of the vertex farthest from the edge.
pub fn n_e(f: &LaurentPoly, edge: &EdgeData, n_cap: Option<i64>) -> Result<i64> {
    let newton = f.newton()?;
    let cap = n_cap.unwrap_or_else(|| {
        newton
            .vertices()
            .iter()
            .map(|&v| edge.s_e.pair(v))
            .max()
            .unwrap_or(0)
    });
    let mut best = 0;
    for n in 1..=cap.min(edge.length) {
        let m = n * ExtDualVec::GORENSTEIN - edge.s_e;
        if is_m_mutable(f, m)?.is_some() {
            best = n;
        } else {
            break;
        }
    }
    Ok(best)
}

/// One step of a composed mutation: the degree actually applied (after
/// transport through the earlier steps), the witness used, and the resulting
/// polynomial.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub m: ExtDualVec,
    pub witness_g: LaurentPoly,
    pub result: LaurentPoly,
}

/// Applies a sequence of mutations.  The given degrees refer to the original
/// polynomial; each is pushed forward through `ψ` of the steps already
/// applied before use.  Fails naming the offending step if a pushed degree is
/// not mutable at its turn.
pub fn compose_mutations(
    f: &LaurentPoly,
    steps: &[ExtDualVec],
) -> Result<(LaurentPoly, Vec<TraceStep>)> {
    let mut current = f.clone();
    let mut applied: Vec<(ExtDualVec, LaurentPoly)> = Vec::new();
    let mut trace = Vec::new();
    for (index, &raw) in steps.iter().enumerate() {
        let mut m = raw;
        for (prev_m, prev_g) in &applied {
            m = psi(*prev_m, prev_g, m)
                .map_err(|e| Error::StepFailed { index, source: Box::new(e) })?;
        }
        let g = canonical_witness(m)
            .map_err(|e| Error::StepFailed { index, source: Box::new(e) })?;
        if !is_mg_mutable(&current, m, &g)
            .map_err(|e| Error::StepFailed { index, source: Box::new(e) })?
        {
            return Err(Error::StepFailed {
                index,
                source: Box::new(Error::NotMutable { m, level: 0 }),
            });
        }
        current = mutate(&current, m, &g)
            .map_err(|e| Error::StepFailed { index, source: Box::new(e) })?;
        applied.push((m, g.clone()));
        trace.push(TraceStep { m, witness_g: g, result: current.clone() });
    }
    Ok((current, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ext, mutate_polygon};

    /// `1 + 2y + y² + xy²` and its companions.
    fn small_triangle_poly() -> LaurentPoly {
        LaurentPoly::from_int_terms([(0, 0, 1), (0, 1, 2), (0, 2, 1), (1, 2, 1)])
    }

    fn one_plus_x() -> LaurentPoly {
        LaurentPoly::from_int_terms([(0, 0, 1), (1, 0, 1)])
    }

    fn one_plus_y() -> LaurentPoly {
        LaurentPoly::from_int_terms([(0, 0, 1), (0, 1, 1)])
    }

    #[test]
    fn newton_polygons() {
        let f = small_triangle_poly();
        assert_eq!(
            f.newton().unwrap(),
            Polygon::from_vertices(vec![lv(0, 0), lv(0, 2), lv(1, 2)]).unwrap()
        );
        assert_eq!(LaurentPoly::one().newton().unwrap(), Polygon::point(lv(0, 0)));
        let g = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 3),
            (2, 0, 3),
            (3, 0, 1),
            (0, 1, 2),
            (1, 1, 2),
            (0, 2, 1),
        ]);
        assert_eq!(
            g.newton().unwrap(),
            Polygon::from_vertices(vec![lv(0, 0), lv(3, 0), lv(0, 2)]).unwrap()
        );
    }

    #[test]
    fn normalization() {
        assert!(small_triangle_poly().is_normalized().unwrap());
        let f = LaurentPoly::from_int_terms([(0, 0, 2), (1, 0, 1)]);
        assert!(!f.is_normalized().unwrap());
    }

    #[test]
    fn slice_decomposition() {
        let f = small_triangle_poly();
        let m = ext(0, 2, -3);
        let slices = f.slices(m);
        assert_eq!(slices.len(), 3);
        assert_eq!(slices[&-3], LaurentPoly::one());
        assert_eq!(slices[&-1], LaurentPoly::from_int_terms([(0, 1, 2)]));
        assert_eq!(slices[&1], LaurentPoly::from_int_terms([(0, 2, 1), (1, 2, 1)]));
        let total = slices.values().fold(LaurentPoly::zero(), |acc, p| &acc + p);
        assert_eq!(total, f);
        // The Gorenstein degree puts everything in level one.
        let radial = f.slices(ExtDualVec::GORENSTEIN);
        assert_eq!(radial.len(), 1);
        assert_eq!(radial[&1], f);
    }

    #[test]
    fn exact_division_along_a_diagonal() {
        // (1 + 2z + 3z² + 4z³ + 2z⁴) / (1+z)² = 1 + 2z² with z = xy.
        let h = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 1, 2),
            (2, 2, 3),
            (3, 3, 4),
            (4, 4, 2),
        ]);
        let g = LaurentPoly::from_int_terms([(0, 0, 1), (1, 1, 1)]);
        let q = divides_power(&h, &g, 2).unwrap().unwrap();
        assert_eq!(q, LaurentPoly::from_int_terms([(0, 0, 1), (2, 2, 2)]));
        assert!(divides_power(&h, &g, 3).unwrap().is_none());
        assert_eq!(divides_power(&h, &g, 0).unwrap().unwrap(), h);
        let small = one_plus_y();
        assert!(divides_power(&small, &small, 2).unwrap().is_none());
    }

    #[test]
    fn division_by_monomial_always_succeeds() {
        let h = small_triangle_poly();
        let g = LaurentPoly::from_int_terms([(1, 1, 2)]);
        let q = divides_power(&h, &g, 2).unwrap().unwrap();
        assert_eq!(&q * &g.pow(2), h);
    }

    #[test]
    fn two_dimensional_quotients_divide() {
        // h = (1+y)(1+x)³ is divisible by (1+x)² with a 2-dimensional h.
        let h = &one_plus_y() * &one_plus_x().pow(3);
        let q = divides_power(&h, &one_plus_x(), 2).unwrap().unwrap();
        assert_eq!(q, &one_plus_y() * &one_plus_x());
    }

    #[test]
    fn mutability_checks() {
        let f = small_triangle_poly();
        let m = ext(0, 2, -3);
        assert!(is_mg_mutable(&f, m, &one_plus_x()).unwrap());
        assert!(is_mg_mutable(&f, m, &one_plus_y()).is_err());
        let g = LaurentPoly::from_int_terms([(0, 0, 1), (0, 1, 1), (1, 2, 1)]);
        assert!(is_mg_mutable(&g, m, &one_plus_x()).unwrap() == false);
    }

    #[test]
    fn golden_mutation() {
        let f = small_triangle_poly();
        let m = ext(0, 2, -3);
        let mutated = mutate(&f, m, &one_plus_x()).unwrap();
        let expected = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 3),
            (2, 0, 3),
            (3, 0, 1),
            (0, 1, 2),
            (1, 1, 2),
            (0, 2, 1),
        ]);
        assert_eq!(mutated, expected);
        // Mutating back with the inverse degree restores the original.
        assert_eq!(mutate(&mutated, -m, &one_plus_x()).unwrap(), f);
        // Newton compatibility with the polygon-level mutation.
        let q = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        assert_eq!(
            mutated.newton().unwrap(),
            mutate_polygon(&f.newton().unwrap(), m, &q).unwrap()
        );
    }

    #[test]
    fn mutation_with_no_positive_slices_multiplies() {
        let f = LaurentPoly::from_int_terms([(0, 0, 1)]);
        let m = ext(1, 0, 0);
        let mutated = mutate(&f, m, &one_plus_y()).unwrap();
        assert_eq!(mutated, f);
    }

    /// The two-step chain through the 3-4-triangle family.
    #[test]
    fn golden_chain_two_steps() {
        let f = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 3),
            (2, 0, 3),
            (3, 0, 1),
            (0, 1, 2),
            (1, 1, 2),
            (0, 2, 1),
        ]);
        let m = ext(-2, 0, 2);
        let f1 = mutate(&f, m, &one_plus_y()).unwrap();
        let f1_expected = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 3),
            (2, 0, 3),
            (3, 0, 1),
            (1, 1, 2),
            (2, 1, 6),
            (3, 1, 4),
            (2, 2, 3),
            (3, 2, 6),
            (3, 3, 4),
            (3, 4, 1),
        ]);
        assert_eq!(f1, f1_expected);
        let s = ext(0, -1, 2);
        let f2 = mutate(&f1, s, &one_plus_x()).unwrap();
        let f2_expected = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 1),
            (1, 1, 2),
            (2, 1, 4),
            (2, 2, 3),
            (3, 2, 6),
            (3, 3, 4),
            (4, 3, 4),
            (3, 4, 1),
            (4, 4, 2),
            (5, 4, 1),
        ]);
        assert_eq!(f2, f2_expected);
        // The chain is also reachable through the composition API.
        let (end, trace) = compose_mutations(&f, &[m, s]).unwrap();
        assert_eq!(end, f2_expected);
        assert_eq!(trace.len(), 2);
        assert_eq!(trace[0].m, m);
        assert_eq!(trace[1].m, s);
        // And f2 is mutable at the transported degree −m + 2s.
        let r = psi(s, &one_plus_x(), -m).unwrap();
        assert_eq!(r, ext(2, -2, 2));
        assert!(is_m_mutable(&f2, r).unwrap().is_some());
    }

    fn quintic_triangle_poly() -> LaurentPoly {
        // (1+x)⁴ + y(5−15x²−10x³) + y²(10−12x−22x²) + y³(10−8x) + 5y⁴ + y⁵
        LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 4),
            (2, 0, 6),
            (3, 0, 4),
            (4, 0, 1),
            (0, 1, 5),
            (2, 1, -15),
            (3, 1, -10),
            (0, 2, 10),
            (1, 2, -12),
            (2, 2, -22),
            (0, 3, 10),
            (1, 3, -8),
            (0, 4, 5),
            (0, 5, 1),
        ])
    }

    #[test]
    fn m_mutability_of_the_quintic_triangle() {
        let f = quintic_triangle_poly();
        assert!(f.is_normalized().unwrap());
        let got = is_m_mutable(&f, ext(0, -1, 3)).unwrap().unwrap();
        assert_eq!(got.witness_g, one_plus_x());
        assert!(is_m_mutable(&f, ext(0, -1, 4)).unwrap().is_none());
        assert!(is_m_mutable(&f, ext(-2, 0, 4)).unwrap().is_some());
        assert!(is_m_mutable(&f, ExtDualVec::GORENSTEIN).is_err());
    }

    #[test]
    fn chain_to_the_reduced_quadrilateral() {
        let f = quintic_triangle_poly();
        let (end, _) = compose_mutations(&f, &[ext(0, -1, 3), ext(-2, 0, 4)]).unwrap();
        let expected = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 1),
            (0, 1, 1),
            (1, 1, -12),
            (1, 2, 1),
            (1, 3, 2),
            (2, 5, 1),
        ]);
        assert_eq!(end, expected);
    }

    #[test]
    fn empty_composition_is_identity() {
        let f = small_triangle_poly();
        let (end, trace) = compose_mutations(&f, &[]).unwrap();
        assert_eq!(end, f);
        assert!(trace.is_empty());
    }

    #[test]
    fn psi_golden_values() {
        // Fixed-degree case.
        let m = ext(-2, 0, 2);
        let g = one_plus_y();
        assert_eq!(psi(m, &g, ext(0, -1, 3)).unwrap(), ext(0, -1, 3));
        // Self-image flips the sign.
        assert_eq!(psi(m, &g, m).unwrap(), -m);
        // Collinear degrees shift.
        assert_eq!(psi(m, &g, ext(-4, 0, 1)).unwrap(), ext(-2, 0, -1));
    }

    #[test]
    fn xi_golden_values() {
        let m = ext(0, 2, -3);
        let q = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        assert_eq!(xi(m, &q, ext(-1, 0, 1)), ext(-1, -2, 4));
        assert_eq!(xi(m, &q, ext(0, -1, 2)), ext(0, -1, 2));
        // Round trip over a small box.
        for a in -3..=3 {
            for b in -3..=3 {
                for h in -3..=3 {
                    let v = ext(a, b, h);
                    assert_eq!(xi(-m, &q, xi(m, &q, v)), v);
                }
            }
        }
    }

    #[test]
    fn mutable_degree_enumeration_on_the_quintic_triangle() {
        let f = quintic_triangle_poly();
        let found = mutable_degrees(&f, 5, 3).unwrap();
        let ms: Vec<ExtDualVec> = found.degrees.iter().map(|d| d.m).collect();
        assert!(ms.contains(&ext(0, -1, 3)));
        assert!(ms.contains(&ext(-2, 0, 4)));
        assert!(!ms.contains(&ext(0, -1, 4)));
        assert!(!ms.contains(&ext(-1, 0, 5)));
        // Monotone in n for fixed edge and k.
        for d in &found.degrees {
            let (n, k) = d.params.unwrap();
            if n > 1 {
                let smaller = (n - 1) * ExtDualVec::GORENSTEIN
                    - k * d.edge.as_ref().unwrap().s_e;
                assert!(is_m_mutable(&f, smaller).unwrap().is_some());
            }
        }
    }

    #[test]
    fn edge_caps_on_the_binomial_triangle() {
        // Columns of binomial coefficients: x-degree j carries C(4,j)(1+y)^(5−2j)…
        // the classical fully divisible polynomial on the 4 × 5 triangle.
        let f = binomial_45_poly();
        let newton = f.newton().unwrap();
        let edges = newton.edge_data().unwrap();
        let left = edges.iter().find(|e| e.normal == DualVec { a: 1, b: 0 }).unwrap();
        assert_eq!(n_e(&f, left, None).unwrap(), 4);
    }

    pub(crate) fn binomial_45_poly() -> LaurentPoly {
        // (1+y)⁵ + 4x(1+y)³ + 6x²(1+y)² + 4x³(1+y) + x⁴.
        let y = one_plus_y();
        let mut acc = LaurentPoly::zero();
        let coeffs = [1i64, 4, 6, 4, 1];
        let powers = [5u32, 3, 2, 1, 0];
        for j in 0..5 {
            let c = LaurentPoly::monomial(lv(j as i64, 0), Rat::from_integer(coeffs[j].into()));
            acc = &acc + &(&c * &y.pow(powers[j]));
        }
        acc
    }
}
