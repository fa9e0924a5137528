//! Exact lattice geometry in rank two: polygons, edges, affine functionals,
//! slices, support values, Minkowski operations and deformation-pair
//! validation.
//!
//! Points of the lattice `N ≅ Z²` are [`LatticeVec`], functionals in the dual
//! lattice `M` are [`DualVec`], and [`ExtDualVec`] lives in the extended dual
//! `M ⊕ Z` that grades everything downstream.  All coordinates are `i64` and
//! all derived lengths are exact rationals.

use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use std::fmt;

/// Exact rational scalar used for slice endpoints and lengths.
pub type Rat = BigRational;

pub(crate) fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn gcd(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

/// A point of the rank-two lattice `N`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LatticeVec {
    pub x: i64,
    pub y: i64,
}

/// A functional in the dual lattice `M = Hom(N, Z)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DualVec {
    pub a: i64,
    pub b: i64,
}

/// An element of the extended dual lattice `M ⊕ Z`; carries all mutation
/// degrees as well as the Gorenstein degree [`ExtDualVec::GORENSTEIN`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ExtDualVec {
    pub c: DualVec,
    pub h: i64,
}

pub const fn lv(x: i64, y: i64) -> LatticeVec {
    LatticeVec { x, y }
}

pub const fn dv(a: i64, b: i64) -> DualVec {
    DualVec { a, b }
}

pub const fn ext(a: i64, b: i64, h: i64) -> ExtDualVec {
    ExtDualVec { c: DualVec { a, b }, h }
}

impl LatticeVec {
    pub const ZERO: LatticeVec = lv(0, 0);

    /// Primitive vector on the same ray; zero stays zero.
    pub fn primitive(self) -> LatticeVec {
        let g = gcd(self.x, self.y);
        if g == 0 {
            self
        } else {
            lv(self.x / g, self.y / g)
        }
    }

    /// `true` when the vector is lexicographically positive, the orientation
    /// convention used for every canonically chosen segment direction.
    pub fn is_lex_positive(self) -> bool {
        self.x > 0 || (self.x == 0 && self.y > 0)
    }

    pub fn lex_positive(self) -> LatticeVec {
        if self.is_lex_positive() || self == LatticeVec::ZERO {
            self
        } else {
            lv(-self.x, -self.y)
        }
    }
}

impl DualVec {
    pub const ZERO: DualVec = dv(0, 0);

    pub fn dot(self, v: LatticeVec) -> i64 {
        self.a * v.x + self.b * v.y
    }

    pub fn is_zero(self) -> bool {
        self == DualVec::ZERO
    }

    /// Primitive generator of the kernel line `(c = 0)`, oriented
    /// lexicographically positive.  Zero functional has no kernel direction.
    pub fn kernel_direction(self) -> Option<LatticeVec> {
        if self.is_zero() {
            return None;
        }
        Some(lv(self.b, -self.a).primitive().lex_positive())
    }

    /// `true` when the two functionals span a rank-one sublattice.
    pub fn is_collinear(self, other: DualVec) -> bool {
        self.a * other.b - self.b * other.a == 0
    }
}

impl ExtDualVec {
    /// The Gorenstein degree `(0, 0, 1)`, evaluating to one on every
    /// height-one cone generator.
    pub const GORENSTEIN: ExtDualVec = ext(0, 0, 1);

    pub fn pi_m(self) -> DualVec {
        self.c
    }

    pub fn pi_z(self) -> i64 {
        self.h
    }

    /// Pairing `⟨(v, 1), self⟩ = ⟨v, c⟩ + h`; this is also the affine
    /// functional `φ` of the degree evaluated at `v`.
    pub fn pair(self, v: LatticeVec) -> i64 {
        self.c.dot(v) + self.h
    }

    pub fn is_radial(self) -> bool {
        self.c.is_zero()
    }
}

macro_rules! vec2_ops {
    ($t:ident, $f0:ident, $f1:ident, $mk:ident) => {
        impl std::ops::Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                $mk(self.$f0 + o.$f0, self.$f1 + o.$f1)
            }
        }
        impl std::ops::Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                $mk(self.$f0 - o.$f0, self.$f1 - o.$f1)
            }
        }
        impl std::ops::Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $mk(-self.$f0, -self.$f1)
            }
        }
        impl std::ops::Mul<$t> for i64 {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                $mk(self * o.$f0, self * o.$f1)
            }
        }
    };
}

vec2_ops!(LatticeVec, x, y, lv);
vec2_ops!(DualVec, a, b, dv);

impl std::ops::Add for ExtDualVec {
    type Output = ExtDualVec;
    fn add(self, o: ExtDualVec) -> ExtDualVec {
        ExtDualVec { c: self.c + o.c, h: self.h + o.h }
    }
}

impl std::ops::Sub for ExtDualVec {
    type Output = ExtDualVec;
    fn sub(self, o: ExtDualVec) -> ExtDualVec {
        ExtDualVec { c: self.c - o.c, h: self.h - o.h }
    }
}

impl std::ops::Neg for ExtDualVec {
    type Output = ExtDualVec;
    fn neg(self) -> ExtDualVec {
        ExtDualVec { c: -self.c, h: -self.h }
    }
}

impl std::ops::Mul<ExtDualVec> for i64 {
    type Output = ExtDualVec;
    fn mul(self, o: ExtDualVec) -> ExtDualVec {
        ExtDualVec { c: self * o.c, h: self * o.h }
    }
}

impl fmt::Display for LatticeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for DualVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl fmt::Display for ExtDualVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.c.a, self.c.b, self.h)
    }
}

/// The affine functional `φ_m(n) = ⟨π_M(m), n⟩ + π_Z(m)` attached to a degree.
pub fn phi(m: ExtDualVec, n: LatticeVec) -> i64 {
    m.pair(n)
}

/// A lattice polygon with counter-clockwise vertices.  Single points and
/// segments are first-class degenerate values: mutations terminate at points
/// and witness supports are segments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Polygon {
    vertices: Vec<LatticeVec>,
}

fn cross(o: LatticeVec, a: LatticeVec, b: LatticeVec) -> i64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

impl Polygon {
    pub fn point(v: LatticeVec) -> Polygon {
        Polygon { vertices: vec![v] }
    }

    pub fn segment(a: LatticeVec, b: LatticeVec) -> Result<Polygon> {
        if a == b {
            return Err(Error::InvalidPolygon("segment endpoints coincide".into()));
        }
        let mut vs = [a, b];
        vs.sort();
        Ok(Polygon { vertices: vs.to_vec() })
    }

    /// Convex hull of a nonempty point set; collinear interior points are
    /// dropped so the vertex list is strictly convex.
    pub fn hull(points: &[LatticeVec]) -> Result<Polygon> {
        let set: BTreeSet<LatticeVec> = points.iter().copied().collect();
        let pts: Vec<LatticeVec> = set.into_iter().collect();
        match pts.len() {
            0 => Err(Error::EmptyPolygon),
            1 => Ok(Polygon::point(pts[0])),
            _ => {
                // Monotone chain; `pts` is already sorted.
                let mut lower: Vec<LatticeVec> = Vec::new();
                for &p in &pts {
                    while lower.len() >= 2
                        && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0
                    {
                        lower.pop();
                    }
                    lower.push(p);
                }
                let mut upper: Vec<LatticeVec> = Vec::new();
                for &p in pts.iter().rev() {
                    while upper.len() >= 2
                        && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0
                    {
                        upper.pop();
                    }
                    upper.push(p);
                }
                if lower.len() == pts.len() && upper.len() == pts.len() && pts.len() >= 2 {
                    // All points collinear: keep the two extremes.
                    let a = pts[0];
                    let b = *pts.last().unwrap();
                    if a == b {
                        return Ok(Polygon::point(a));
                    }
                    return Polygon::segment(a, b);
                }
                lower.pop();
                upper.pop();
                lower.extend(upper);
                if lower.len() == 2 {
                    return Polygon::segment(lower[0], lower[1]);
                }
                Ok(Polygon::canonical_rotation(lower))
            }
        }
    }

    /// Builds a polygon from an explicit vertex list, validating strict
    /// convexity and counter-clockwise orientation.
    pub fn from_vertices(vertices: Vec<LatticeVec>) -> Result<Polygon> {
        let hull = Polygon::hull(&vertices)?;
        let distinct: BTreeSet<LatticeVec> = vertices.iter().copied().collect();
        if hull.vertices.len() != distinct.len() {
            return Err(Error::InvalidPolygon(
                "vertex list contains repeated, interior or collinear points".into(),
            ));
        }
        Ok(hull)
    }

    fn canonical_rotation(mut vs: Vec<LatticeVec>) -> Polygon {
        let min = vs.iter().enumerate().min_by_key(|(_, v)| **v).map(|(i, _)| i).unwrap();
        vs.rotate_left(min);
        Polygon { vertices: vs }
    }

    pub fn vertices(&self) -> &[LatticeVec] {
        &self.vertices
    }

    /// 0 for a point, 1 for a segment, 2 otherwise.
    pub fn dim(&self) -> usize {
        match self.vertices.len() {
            1 => 0,
            2 => 1,
            _ => 2,
        }
    }

    pub fn is_point(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_segment(&self) -> bool {
        self.dim() == 1
    }

    pub fn translate(&self, w: LatticeVec) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|&v| v + w).collect() }
    }

    /// Translate so the lexicographically minimal vertex is the origin; the
    /// dedup key used by the bounded searches.
    pub fn normalize_translation(&self) -> Polygon {
        let min = *self.vertices.iter().min().unwrap();
        self.translate(-min)
    }

    /// Support value `η_P(c) = −min_{v ∈ P} ⟨v, c⟩`.
    pub fn eta(&self, c: DualVec) -> i64 {
        -self.vertices.iter().map(|&v| c.dot(v)).min().unwrap()
    }

    pub fn min_pair(&self, m: ExtDualVec) -> i64 {
        self.vertices.iter().map(|&v| m.pair(v)).min().unwrap()
    }

    pub fn max_pair(&self, m: ExtDualVec) -> i64 {
        self.vertices.iter().map(|&v| m.pair(v)).max().unwrap()
    }

    /// Primitive direction for a segment polygon.
    pub fn segment_direction(&self) -> Option<LatticeVec> {
        if self.is_segment() {
            Some((self.vertices[1] - self.vertices[0]).primitive().lex_positive())
        } else {
            None
        }
    }

    /// Lattice length of a segment polygon, 0 for a point.
    pub fn segment_lattice_length(&self) -> Option<i64> {
        match self.dim() {
            0 => Some(0),
            1 => {
                let d = self.vertices[1] - self.vertices[0];
                Some(gcd(d.x, d.y))
            }
            _ => None,
        }
    }

    /// `true` when the lattice point lies inside or on the boundary.
    pub fn contains(&self, p: LatticeVec) -> bool {
        match self.dim() {
            0 => self.vertices[0] == p,
            1 => {
                let a = self.vertices[0];
                let b = self.vertices[1];
                if cross(a, b, p) != 0 {
                    return false;
                }
                let d = b - a;
                let t = (p - a).x * d.x + (p - a).y * d.y;
                t >= 0 && t <= d.x * d.x + d.y * d.y
            }
            _ => self.edge_data().unwrap().iter().all(|e| e.s_e.pair(p) >= 0),
        }
    }

    /// All lattice points of the polygon, sorted.
    pub fn lattice_points(&self) -> Vec<LatticeVec> {
        let xs: Vec<i64> = self.vertices.iter().map(|v| v.x).collect();
        let ys: Vec<i64> = self.vertices.iter().map(|v| v.y).collect();
        let (x0, x1) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
        let (y0, y1) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
        let mut out = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                if self.contains(lv(x, y)) {
                    out.push(lv(x, y));
                }
            }
        }
        out
    }

    /// One [`EdgeData`] per edge in counter-clockwise order; requires a
    /// two-dimensional polygon.
    pub fn edge_data(&self) -> Result<Vec<EdgeData>> {
        if self.dim() != 2 {
            return Err(Error::DegeneratePolygon);
        }
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let from = self.vertices[i];
            let to = self.vertices[(i + 1) % n];
            let d = to - from;
            let length = gcd(d.x, d.y);
            let direction = lv(d.x / length, d.y / length);
            // Inward normal of a counter-clockwise edge.
            let normal = dv(-direction.y, direction.x);
            let s_e = ExtDualVec { c: normal, h: self.eta(normal) };
            out.push(EdgeData {
                index: i,
                from,
                to,
                normal,
                s_e,
                length,
                direction,
                a_e: (direction, 0),
            });
        }
        Ok(out)
    }

    /// Minkowski sum of two polygons.
    pub fn minkowski_sum(&self, other: &Polygon) -> Polygon {
        let mut pts = Vec::new();
        for &a in &self.vertices {
            for &b in &other.vertices {
                pts.push(a + b);
            }
        }
        Polygon::hull(&pts).unwrap()
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conv{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Edge of a two-dimensional polygon together with its inward normal, the
/// facet generator `s_E = (c_E, η_P(c_E))` of the dual cone, its lattice
/// length and primitive direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeData {
    pub index: usize,
    pub from: LatticeVec,
    pub to: LatticeVec,
    pub normal: DualVec,
    pub s_e: ExtDualVec,
    pub length: i64,
    pub direction: LatticeVec,
    /// The primitive edge vector lifted to height zero in `N ⊕ Z`.
    pub a_e: (LatticeVec, i64),
}

/// Support value of a polygon, exposed as a free function mirroring the other
/// module-level operations.
pub fn eta(q: &Polygon, c: DualVec) -> i64 {
    q.eta(c)
}

/// A segment (possibly a point) with exact rational endpoints on a lattice
/// line; the intersection of a polygon with a level set of some `φ_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSegment {
    pub start: (Rat, Rat),
    pub end: (Rat, Rat),
    /// Primitive lattice direction when one-dimensional, `None` for a point.
    pub direction: Option<LatticeVec>,
}

impl RationalSegment {
    /// Euclidean length divided by the length of the primitive direction;
    /// zero for a point.
    pub fn lattice_length(&self) -> Rat {
        match self.direction {
            None => Rat::zero(),
            Some(d) => {
                let dx = &self.end.0 - &self.start.0;
                let dy = &self.end.1 - &self.start.1;
                if d.x != 0 {
                    dx / rat(d.x)
                } else {
                    dy / rat(d.y)
                }
            }
        }
    }
}

/// Lattice length of a rational segment.
pub fn lattice_length(s: &RationalSegment) -> Rat {
    s.lattice_length()
}

/// The slice `P ∩ (φ_m = i)`.  Empty slices return `None`.  The direction of
/// a one-dimensional slice is the primitive vector spanning `(π_M(m) = 0)`.
///
/// When `π_M(m) = 0` the level set is either empty or all of `P`; that case
/// only makes sense for degenerate polygons and is reported as the full
/// segment/point.
pub fn slice(p: &Polygon, m: ExtDualVec, i: i64) -> Option<RationalSegment> {
    let c = m.pi_m();
    if c.is_zero() {
        if m.pi_z() != i {
            return None;
        }
        debug_assert!(p.dim() <= 1, "level set of a radial degree on a 2-polygon is not a segment");
        let a = p.vertices()[0];
        let b = *p.vertices().last().unwrap();
        return Some(RationalSegment {
            start: (rat(a.x), rat(a.y)),
            end: (rat(b.x), rat(b.y)),
            direction: p.segment_direction(),
        });
    }
    // Clip the polygon with the line ⟨c, n⟩ = i − π_Z(m); collect the extreme
    // intersection points along the kernel direction.
    let t = i - m.pi_z();
    let verts = p.vertices();
    let n = verts.len();
    let mut points: Vec<(Rat, Rat)> = Vec::new();
    if n == 1 {
        if c.dot(verts[0]) == t {
            points.push((rat(verts[0].x), rat(verts[0].y)));
        }
    } else {
        let m_edges = if n == 2 { 1 } else { n };
        for e in 0..m_edges {
            let a = verts[e];
            let b = verts[(e + 1) % n];
            let va = c.dot(a) - t;
            let vb = c.dot(b) - t;
            if va == 0 {
                points.push((rat(a.x), rat(a.y)));
            }
            if vb == 0 {
                points.push((rat(b.x), rat(b.y)));
            }
            if (va > 0 && vb < 0) || (va < 0 && vb > 0) {
                // Proper crossing: a + s·(b−a) with s = va/(va−vb).
                let s = rat(va) / rat(va - vb);
                let px = rat(a.x) + &s * rat(b.x - a.x);
                let py = rat(a.y) + &s * rat(b.y - a.y);
                points.push((px, py));
            }
        }
    }
    if points.is_empty() {
        return None;
    }
    let d = c.kernel_direction().unwrap();
    // Order along the kernel direction.
    let key = |p: &(Rat, Rat)| -> Rat { &p.0 * rat(d.x) + &p.1 * rat(d.y) };
    let mut best_min = points[0].clone();
    let mut best_max = points[0].clone();
    for q in &points[1..] {
        if key(q) < key(&best_min) {
            best_min = q.clone();
        }
        if key(q) > key(&best_max) {
            best_max = q.clone();
        }
    }
    let degenerate = best_min == best_max;
    Some(RationalSegment {
        start: best_min,
        end: best_max,
        direction: if degenerate { None } else { Some(d) },
    })
}

fn check_witness_polygon(m: ExtDualVec, q: &Polygon) -> Result<()> {
    if q.dim() > 1 {
        return Err(Error::WitnessOutsideKernel);
    }
    if q.vertices().iter().any(|&v| m.pi_m().dot(v) != 0) {
        return Err(Error::WitnessOutsideKernel);
    }
    Ok(())
}

/// Whether `(m, Q)` is a deformation pair of `P`: for every positive level
/// `i` with a nonempty slice, `iQ` must be a Minkowski summand of
/// `P ∩ (φ_m = i)`.
pub fn is_deformation_pair(p: &Polygon, m: ExtDualVec, q: &Polygon) -> Result<bool> {
    check_witness_polygon(m, q)?;
    if q.is_point() {
        return Ok(true);
    }
    let qd = q.segment_direction().unwrap();
    let qlen = q.segment_lattice_length().unwrap();
    if m.pi_m().is_zero() {
        // The only (possibly) nonempty positive level set is all of P at
        // level π_Z(m); a segment is a summand of P iff both support edges
        // parallel to it are long enough.
        let level = m.pi_z();
        if level <= 0 {
            return Ok(true);
        }
        let need = level * qlen;
        return Ok(match p.dim() {
            0 => false,
            1 => {
                p.segment_direction() == Some(qd)
                    && p.segment_lattice_length().unwrap() >= need
            }
            _ => {
                let edges = p.edge_data()?;
                let long = |dir: LatticeVec| {
                    edges.iter().any(|e| e.direction == dir && e.length >= need)
                };
                long(qd) && long(-1 * qd)
            }
        });
    }
    let hi = p.max_pair(m);
    for i in 1..=hi {
        let Some(s) = slice(p, m, i) else { continue };
        let need = rat(i * qlen);
        if s.lattice_length() < need {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The mutated polygon `P_(m,Q)`, computed as the Newton polygon of the
/// mutation of a canonical witness polynomial (all admissible coefficients
/// forced minimal).
pub fn mutate_polygon(p: &Polygon, m: ExtDualVec, q: &Polygon) -> Result<Polygon> {
    use crate::laurent::LaurentPoly;
    if !is_deformation_pair(p, m, q)? {
        return Err(Error::NotDeformationPair { m });
    }
    let witness = witness_polynomial(p, m, q)?;
    let g = LaurentPoly::segment_witness(q)?;
    let mutated = crate::laurent::mutate(&witness, m, &g)?;
    mutated.newton()
}

/// A normalized polynomial with Newton polygon `P` whose positive slices are
/// divisible by the matching powers of the normalized polynomial on `Q`.
pub(crate) fn witness_polynomial(
    p: &Polygon,
    m: ExtDualVec,
    q: &Polygon,
) -> Result<crate::laurent::LaurentPoly> {
    use crate::laurent::LaurentPoly;
    let qlen = q.segment_lattice_length().ok_or(Error::WitnessOutsideKernel)?;
    let q_min = *q.vertices().iter().min().unwrap();
    let qd = q.segment_direction();

    // A lattice point carries the translate of i·Q iff both endpoints of the
    // translated segment stay inside P.
    let fits = |pt: LatticeVec, i: i64| -> bool {
        let near = pt + i * q_min;
        let far = match qd {
            Some(d) => near + (i * qlen) * d,
            None => near,
        };
        p.contains(near) && p.contains(far)
    };

    let c = m.pi_m();
    if c.is_zero() {
        // Single level; the witness is the residual row times the power of g.
        let lvl = m.pi_z();
        if lvl > 0 {
            let terms = p
                .lattice_points()
                .into_iter()
                .filter(|&pt| fits(pt, lvl))
                .map(|pt| (pt, Rat::one()));
            let g = LaurentPoly::segment_witness(q)?;
            let base = LaurentPoly::from_terms(terms);
            return Ok(&base * &g.pow(lvl as u32));
        }
        return Ok(LaurentPoly::from_terms(
            p.lattice_points().into_iter().map(|pt| (pt, Rat::one())),
        ));
    }

    let lo = p.min_pair(m);
    let hi = p.max_pair(m);
    let mut acc = LaurentPoly::zero();
    let g = LaurentPoly::segment_witness(q)?;
    for i in lo..=hi {
        let level_pts: Vec<(LatticeVec, Rat)> = p
            .lattice_points()
            .into_iter()
            .filter(|&pt| m.pair(pt) == i && (i < 1 || fits(pt, i)))
            .map(|pt| (pt, Rat::one()))
            .collect();
        if level_pts.is_empty() {
            continue;
        }
        let h = LaurentPoly::from_terms(level_pts);
        if i >= 1 {
            acc = &acc + &(&h * &g.pow(i as u32));
        } else {
            acc = &acc + &h;
        }
    }
    Ok(acc)
}

/// All decompositions of `P` into `parts` lattice Minkowski summands, up to
/// translation of each summand and up to permutation of the parts.
///
/// Each edge vector `ℓ(E)·d_E` is partitioned into non-negative integer
/// multiples assigned to the summands; an assignment is a decomposition
/// exactly when every summand's edge vectors sum to zero.
pub fn minkowski_decompositions(p: &Polygon, parts: usize) -> Result<Vec<Vec<Polygon>>> {
    if parts == 0 {
        return Err(Error::InvalidArgument("parts must be at least 1".into()));
    }
    let origin = Polygon::point(LatticeVec::ZERO);
    match p.dim() {
        0 => Ok(vec![vec![origin; parts]]),
        1 => {
            let d = p.segment_direction().unwrap();
            let len = p.segment_lattice_length().unwrap();
            let mut out: BTreeSet<Vec<Polygon>> = BTreeSet::new();
            for comp in compositions(len, parts) {
                let mut tuple: Vec<Polygon> = comp
                    .iter()
                    .map(|&c| {
                        if c == 0 {
                            origin.clone()
                        } else {
                            Polygon::segment(LatticeVec::ZERO, c * d).unwrap()
                        }
                    })
                    .collect();
                tuple.sort();
                out.insert(tuple);
            }
            Ok(out.into_iter().collect())
        }
        _ => {
            let edges = p.edge_data()?;
            let per_edge: Vec<Vec<Vec<i64>>> =
                edges.iter().map(|e| compositions(e.length, parts)).collect();
            let mut out: BTreeSet<Vec<Polygon>> = BTreeSet::new();
            let mut choice = vec![0usize; edges.len()];
            loop {
                // Assemble the candidate assignment.
                let mut ok = true;
                let mut summands: Vec<Polygon> = Vec::with_capacity(parts);
                for j in 0..parts {
                    let mut sum = LatticeVec::ZERO;
                    for (ei, e) in edges.iter().enumerate() {
                        sum = sum + per_edge[ei][choice[ei]][j] * e.direction;
                    }
                    if sum != LatticeVec::ZERO {
                        ok = false;
                        break;
                    }
                    // Walk the assigned edge vectors in CCW order.
                    let mut pos = LatticeVec::ZERO;
                    let mut pts = vec![pos];
                    for (ei, e) in edges.iter().enumerate() {
                        let c = per_edge[ei][choice[ei]][j];
                        if c != 0 {
                            pos = pos + c * e.direction;
                            pts.push(pos);
                        }
                    }
                    summands.push(Polygon::hull(&pts)?.normalize_translation());
                }
                if ok {
                    summands.sort();
                    out.insert(summands);
                }
                // Advance the mixed-radix counter.
                let mut k = 0;
                loop {
                    if k == edges.len() {
                        let mut result: Vec<Vec<Polygon>> = out.into_iter().collect();
                        result.sort();
                        return Ok(result);
                    }
                    choice[k] += 1;
                    if choice[k] < per_edge[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
            }
        }
    }
}

/// All ways of writing `total` as an ordered sum of `parts` non-negative
/// integers.
fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; parts];
    fn rec(total: i64, idx: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if idx + 1 == cur.len() {
            cur[idx] = total;
            out.push(cur.clone());
            return;
        }
        for v in 0..=total {
            cur[idx] = v;
            rec(total - v, idx + 1, cur, out);
        }
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri_a() -> Polygon {
        Polygon::from_vertices(vec![lv(0, 0), lv(0, 2), lv(1, 2)]).unwrap()
    }

    fn tri_b() -> Polygon {
        Polygon::from_vertices(vec![lv(0, 0), lv(3, 0), lv(0, 2)]).unwrap()
    }

    fn unit_square() -> Polygon {
        Polygon::from_vertices(vec![lv(0, 0), lv(1, 0), lv(1, 1), lv(0, 1)]).unwrap()
    }

    #[test]
    fn eta_of_segment_and_triangles() {
        let seg = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        assert_eq!(eta(&seg, dv(-1, 1)), 1);
        assert_eq!(eta(&tri_a(), dv(0, 0)), 0);
        assert_eq!(eta(&tri_b(), dv(-2, -3)), 6);
    }

    #[test]
    fn phi_values() {
        let m = ext(0, 2, -3);
        assert_eq!(phi(m, lv(0, 0)), -3);
        assert_eq!(phi(m, lv(1, 2)), 1);
        assert_eq!(phi(ExtDualVec::GORENSTEIN, lv(7, -3)), 1);
    }

    #[test]
    fn edge_normals_of_square_and_triangles() {
        let sq = unit_square();
        let edges = sq.edge_data().unwrap();
        assert_eq!(edges.len(), 4);
        let ss: BTreeSet<ExtDualVec> = edges.iter().map(|e| e.s_e).collect();
        let expect: BTreeSet<ExtDualVec> =
            [ext(0, 1, 0), ext(1, 0, 0), ext(0, -1, 1), ext(-1, 0, 1)].into_iter().collect();
        assert_eq!(ss, expect);

        let edges = tri_a().edge_data().unwrap();
        let ss: BTreeSet<ExtDualVec> = edges.iter().map(|e| e.s_e).collect();
        assert!(ss.contains(&ext(1, 0, 0)));
        assert!(ss.contains(&ext(0, -1, 2)));
        assert!(ss.contains(&ext(-2, 1, 0)));

        assert!(Polygon::point(lv(0, 0)).edge_data().is_err());
    }

    #[test]
    fn slices_of_triangle() {
        let p = tri_a();
        let m = ext(0, 2, -3);
        let s = slice(&p, m, 1).unwrap();
        assert_eq!(s.start, (rat(0), rat(2)));
        assert_eq!(s.end, (rat(1), rat(2)));
        assert_eq!(s.lattice_length(), rat(1));
        assert!(slice(&p, m, 2).is_none());
        assert!(slice(&p, m, -10).is_none());
    }

    #[test]
    fn rational_slice_endpoints() {
        let p = tri_b();
        // Vertical slices of the 3x2 right triangle at x = 3/2.
        let m = ext(-2, 0, 3);
        let s = slice(&p, m, 0).unwrap();
        assert_eq!(s.start.0, rat(3) / rat(2));
        assert_eq!(s.lattice_length(), rat(1));
    }

    #[test]
    fn lattice_length_of_rational_segment() {
        let s = RationalSegment {
            start: (rat(1) / rat(2), rat(0)),
            end: (rat(2), rat(0)),
            direction: Some(lv(1, 0)),
        };
        assert_eq!(s.lattice_length(), rat(3) / rat(2));
    }

    #[test]
    fn deformation_pair_examples() {
        let p = tri_a();
        let m = ext(0, 2, -3);
        let q = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        assert!(is_deformation_pair(&p, m, &q).unwrap());
        // A point witness is always a summand.
        assert!(is_deformation_pair(&p, m, &Polygon::point(lv(0, 0))).unwrap());
        // Top slice shorter than its level.
        assert!(!is_deformation_pair(&p, ext(0, 2, -2), &q).unwrap());
        // Witness outside the kernel line is a precondition error.
        let bad = Polygon::segment(lv(0, 0), lv(0, 1)).unwrap();
        assert!(is_deformation_pair(&p, m, &bad).is_err());
    }

    #[test]
    fn polygon_mutation_golden() {
        let p = tri_a();
        let m = ext(0, 2, -3);
        let q = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        let mutated = mutate_polygon(&p, m, &q).unwrap();
        assert_eq!(mutated, tri_b());
        // Round trip with the inverse degree.
        let back = mutate_polygon(&mutated, -m, &q).unwrap();
        assert_eq!(back.normalize_translation(), p.normalize_translation());
    }

    #[test]
    fn point_witness_mutation_is_identity_at_origin() {
        let p = tri_a();
        let m = ext(0, 2, -3);
        let q = Polygon::point(lv(0, 0));
        assert_eq!(mutate_polygon(&p, m, &q).unwrap(), p);
    }

    #[test]
    fn minkowski_decompositions_of_squares() {
        let sq = unit_square();
        let dec = minkowski_decompositions(&sq, 2).unwrap();
        let h = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        let v = Polygon::segment(lv(0, 0), lv(0, 1)).unwrap();
        let mut seg_pair = vec![h, v];
        seg_pair.sort();
        assert!(dec.contains(&seg_pair));
        let mut trivial = vec![sq.normalize_translation(), Polygon::point(lv(0, 0))];
        trivial.sort();
        assert!(dec.contains(&trivial));
        assert_eq!(dec.len(), 2);

        let two = Polygon::from_vertices(vec![lv(0, 0), lv(2, 0), lv(2, 2), lv(0, 2)]).unwrap();
        let dec = minkowski_decompositions(&two, 2).unwrap();
        let usq = vec![unit_square(), unit_square()];
        assert!(dec.contains(&usq));
        for tuple in &dec {
            let sum = tuple.iter().fold(Polygon::point(lv(0, 0)), |acc, s| acc.minkowski_sum(s));
            assert_eq!(sum.normalize_translation(), two.normalize_translation());
        }
    }

    #[test]
    fn single_part_decomposition_is_identity() {
        let p = tri_b();
        let dec = minkowski_decompositions(&p, 1).unwrap();
        assert_eq!(dec, vec![vec![p.normalize_translation()]]);
    }

    #[test]
    fn eta_additivity_under_minkowski_sum() {
        let p = tri_a();
        let q = unit_square();
        let s = p.minkowski_sum(&q);
        for c in [dv(1, 0), dv(-2, 3), dv(0, -1), dv(5, 5)] {
            assert_eq!(s.eta(c), p.eta(c) + q.eta(c));
        }
    }
}
