//! The dual monoid of the Gorenstein cone over a polygon: Hilbert bases,
//! user-supplied generating sets, boundary decompositions, a deterministic
//! representation map, the binomial generators of the toric ideal with their
//! linear relations, and the transport of generating sets through mutations.

use crate::deform::{GradedPoly, Mono, VarContext};
use crate::error::{Error, Result};
use crate::geometry::{ext, is_deformation_pair, mutate_polygon, ExtDualVec, Polygon};
use crate::laurent::xi;
use num_traits::One;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

/// Exponent tuple over the stored generator list.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(len: usize) -> MultiIndex {
        MultiIndex(vec![0; len])
    }

    pub fn unit(len: usize, j: usize) -> MultiIndex {
        let mut v = vec![0; len];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn norm1(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Boundary decomposition `s = ∂(s) + n(s)·R*` of a monoid element.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BoundaryDecomp {
    pub boundary: ExtDualVec,
    pub height: i64,
}

/// Default box bound (on pairing values against the cone generators) for the
/// generation checks of user-supplied generating sets.
pub const DEFAULT_GENERATION_BOX: i64 = 12;

/// Default box bound for the representation-compatibility check performed
/// when a generating set is transported through a mutation.
pub const DEFAULT_TRANSPORT_BOX: i64 = 8;

/// A polygon together with an ordered generating set `s_1, …, s_r` of the
/// boundary part of its dual monoid; the Gorenstein degree `R*` is stored
/// separately and completes the generating set.  The representation map is
/// memoized so every element always resolves to the same exponent tuple.
#[derive(Debug)]
pub struct MonoidData {
    polygon: Polygon,
    generators: Vec<ExtDualVec>,
    facet_normals: Vec<ExtDualVec>,
    rep_cache: Mutex<HashMap<ExtDualVec, Option<MultiIndex>>>,
}

impl Clone for MonoidData {
    fn clone(&self) -> Self {
        MonoidData {
            polygon: self.polygon.clone(),
            generators: self.generators.clone(),
            facet_normals: self.facet_normals.clone(),
            rep_cache: Mutex::new(self.rep_cache.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for MonoidData {
    fn eq(&self, other: &Self) -> bool {
        self.polygon == other.polygon && self.generators == other.generators
    }
}

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn as_col(s: ExtDualVec) -> [i128; 3] {
    [s.c.a as i128, s.c.b as i128, s.h as i128]
}

impl MonoidData {
    /// The minimal generating set of the dual monoid, computed from facet
    /// normals, a fan triangulation of the dual cone, lattice points of the
    /// fundamental parallelepipeds, and removal of reducible elements.  The
    /// Gorenstein degree is kept separate whether or not it is irreducible.
    pub fn hilbert_basis(polygon: &Polygon) -> Result<MonoidData> {
        let edges = polygon.edge_data()?;
        let rays: Vec<ExtDualVec> = edges.iter().map(|e| e.s_e).collect();
        let mut candidates: BTreeSet<ExtDualVec> = rays.iter().copied().collect();
        for i in 1..rays.len().saturating_sub(1) {
            let tri = [rays[0], rays[i], rays[i + 1]];
            for p in parallelepiped_points(tri) {
                if p != ext(0, 0, 0) {
                    candidates.insert(p);
                }
            }
        }
        candidates.remove(&ExtDualVec::GORENSTEIN);
        let generators: Vec<ExtDualVec> = candidates
            .iter()
            .copied()
            .filter(|&c| is_irreducible(polygon, c))
            .collect();
        Ok(MonoidData {
            polygon: polygon.clone(),
            generators,
            facet_normals: rays,
            rep_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Monoid data over an explicitly ordered (not necessarily minimal)
    /// generating set; generation is verified on the default box.
    pub fn with_generating_set(polygon: &Polygon, gens: Vec<ExtDualVec>) -> Result<MonoidData> {
        MonoidData::with_generating_set_checked(polygon, gens, DEFAULT_GENERATION_BOX)
    }

    /// Like [`MonoidData::with_generating_set`] with a configurable box: every
    /// lattice point of the dual cone whose pairings against all lifted
    /// vertices are at most `box_bound` must be a non-negative combination of
    /// the generators and `R*`.
    pub fn with_generating_set_checked(
        polygon: &Polygon,
        gens: Vec<ExtDualVec>,
        box_bound: i64,
    ) -> Result<MonoidData> {
        if polygon.dim() != 2 {
            return Err(Error::DegeneratePolygon);
        }
        let edges = polygon.edge_data()?;
        let md = MonoidData {
            polygon: polygon.clone(),
            generators: gens,
            facet_normals: edges.iter().map(|e| e.s_e).collect(),
            rep_cache: Mutex::new(HashMap::new()),
        };
        for &g in &md.generators {
            if g == ext(0, 0, 0) {
                return Err(Error::BadGeneratingSet("zero generator".into()));
            }
            if !md.contains(g) || md.boundary_decompose(g)?.height != 0 {
                return Err(Error::BadGeneratingSet(format!(
                    "{g} is not a boundary element of the dual monoid"
                )));
            }
        }
        for s in md.box_elements(box_bound) {
            let boundary = md.boundary_decompose(s)?.boundary;
            if md.rep(boundary).is_err() {
                return Err(Error::BadGeneratingSet(format!(
                    "box element {s} is not generated (boundary part {boundary})"
                )));
            }
        }
        Ok(md)
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn generators(&self) -> &[ExtDualVec] {
        &self.generators
    }

    pub fn facet_normals(&self) -> &[ExtDualVec] {
        &self.facet_normals
    }

    pub fn gorenstein(&self) -> ExtDualVec {
        ExtDualVec::GORENSTEIN
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Membership in the dual monoid: non-negative pairing against every
    /// lifted vertex.
    pub fn contains(&self, s: ExtDualVec) -> bool {
        self.polygon.vertices().iter().all(|&v| s.pair(v) >= 0)
    }

    /// All lattice points of the dual cone with pairings at most `bound`
    /// against every lifted vertex.
    pub fn box_elements(&self, bound: i64) -> Vec<ExtDualVec> {
        let verts = self.polygon.vertices();
        let (v0, v1, v2) = (verts[0], verts[1], verts[2]);
        let a = [
            [v0.x as i128, v0.y as i128, 1],
            [v1.x as i128, v1.y as i128, 1],
            [v2.x as i128, v2.y as i128, 1],
        ];
        let d = det3(a);
        debug_assert_ne!(d, 0);
        let mut out = Vec::new();
        for p0 in 0..=bound {
            for p1 in 0..=bound {
                for p2 in 0..=bound {
                    // Solve ⟨(v_i,1), s⟩ = p_i by Cramer's rule.
                    let rhs = [p0 as i128, p1 as i128, p2 as i128];
                    let mut cols = [[0i128; 3]; 3];
                    for c in 0..3 {
                        let mut m = a;
                        for r in 0..3 {
                            m[r][c] = rhs[r];
                        }
                        cols[c] = [det3(m), 0, 0];
                    }
                    if cols.iter().any(|c| c[0] % d != 0) {
                        continue;
                    }
                    let s = ext(
                        (cols[0][0] / d) as i64,
                        (cols[1][0] / d) as i64,
                        (cols[2][0] / d) as i64,
                    );
                    if self.contains(s)
                        && self.polygon.vertices().iter().all(|&v| s.pair(v) <= bound)
                    {
                        out.push(s);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Unique decomposition `s = ∂(s) + n(s)·R*`.
    pub fn boundary_decompose(&self, s: ExtDualVec) -> Result<BoundaryDecomp> {
        if !self.contains(s) {
            return Err(Error::NotInMonoid(s));
        }
        let eta = self.polygon.eta(s.c);
        Ok(BoundaryDecomp { boundary: ExtDualVec { c: s.c, h: eta }, height: s.h - eta })
    }

    /// Deterministic representation of a boundary element over the stored
    /// generators: the lexicographically smallest exponent tuple, found by an
    /// ascending depth-first search with cone-membership pruning, and
    /// memoized so the same element always resolves identically.
    pub fn rep(&self, s: ExtDualVec) -> Result<MultiIndex> {
        let decomp = self.boundary_decompose(s)?;
        if decomp.height != 0 {
            return Err(Error::InvalidArgument(format!(
                "{s} is not a boundary element (height {})",
                decomp.height
            )));
        }
        if let Some(cached) = self.rep_cache.lock().unwrap().get(&s) {
            return cached.clone().ok_or(Error::NoRepresentation(s));
        }
        let found = self.rep_search(s);
        self.rep_cache.lock().unwrap().insert(s, found.clone());
        found.ok_or(Error::NoRepresentation(s))
    }

    fn rep_search(&self, s: ExtDualVec) -> Option<MultiIndex> {
        let verts = self.polygon.vertices();
        fn rec(
            gens: &[ExtDualVec],
            verts: &[crate::geometry::LatticeVec],
            idx: usize,
            rem: ExtDualVec,
            prefix: &mut Vec<u32>,
        ) -> Option<MultiIndex> {
            if rem == ext(0, 0, 0) {
                let mut v = prefix.clone();
                v.resize(gens.len(), 0);
                return Some(MultiIndex(v));
            }
            if idx == gens.len() {
                return None;
            }
            let g = gens[idx];
            // Strong convexity of the dual cone bounds the multiplicity.
            let mut ub = i64::MAX;
            for &v in verts {
                let gv = g.pair(v);
                if gv > 0 {
                    ub = ub.min(rem.pair(v) / gv);
                }
            }
            debug_assert!(ub < i64::MAX);
            for t in 0..=ub {
                prefix.push(t as u32);
                let next = rem - t * g;
                if let Some(found) = rec(gens, verts, idx + 1, next, prefix) {
                    return Some(found);
                }
                prefix.pop();
            }
            None
        }
        let mut prefix = Vec::new();
        rec(&self.generators, verts, 0, s, &mut prefix)
    }

    /// The element `s_k = Σ k_i s_i`.
    pub fn element_of(&self, k: &MultiIndex) -> ExtDualVec {
        debug_assert_eq!(k.len(), self.rank());
        let mut s = ext(0, 0, 0);
        for (i, &g) in self.generators.iter().enumerate() {
            s = s + (k.get(i) as i64) * g;
        }
        s
    }

    /// `∂(k)`: the canonical exponent tuple of the boundary part of `s_k`.
    pub fn boundary_tuple(&self, k: &MultiIndex) -> Result<MultiIndex> {
        let decomp = self.boundary_decompose(self.element_of(k))?;
        self.rep(decomp.boundary)
    }

    /// Height `n(s_k)` of the element of an exponent tuple.
    pub fn height_of(&self, k: &MultiIndex) -> i64 {
        let s = self.element_of(k);
        s.h - self.polygon.eta(s.c)
    }

    /// Tuple weight `Σ k_i η_Q(c_i)` against an arbitrary polytope `Q`.
    pub fn tuple_weight(&self, q: &Polygon, k: &MultiIndex) -> i64 {
        self.generators
            .iter()
            .enumerate()
            .map(|(i, g)| (k.get(i) as i64) * q.eta(g.c))
            .sum()
    }

    /// `η_Q(k) = Σ η_Q(k_i c_i) − η_Q(Σ k_i c_i)`.
    pub fn eta_vec(&self, q: &Polygon, k: &MultiIndex) -> i64 {
        let c = self.element_of(k).c;
        self.tuple_weight(q, k) - q.eta(c)
    }

    /// The monomial `χ^s = x^{∂(s)} u^{n(s)}` of a monoid element.
    pub fn chi(&self, s: ExtDualVec) -> Result<(MultiIndex, u32)> {
        let decomp = self.boundary_decompose(s)?;
        let tuple = self.rep(decomp.boundary)?;
        Ok((tuple, decomp.height as u32))
    }

    /// Variable context grading `x_j` by `s_j` and `u` by `R*`.
    pub fn var_context(&self, params: Vec<crate::deform::GradedParam>) -> Arc<VarContext> {
        Arc::new(VarContext { x_degrees: self.generators.clone(), params })
    }

    /// The binomial generator `f_k = x^k − x^{∂(k)} u^{η(k)}` of the toric
    /// ideal; zero when the tuple is its own boundary representation.
    pub fn f_k(&self, k: &MultiIndex) -> Result<GradedPoly> {
        let ctx = self.var_context(Vec::new());
        let b = self.boundary_tuple(k)?;
        let n = self.height_of(k);
        let lead = Mono { x: k.clone(), u: 0, t: Vec::new() };
        let tail = Mono { x: b, u: n as u32, t: Vec::new() };
        let mut f = GradedPoly::zero(ctx);
        f.add_term(lead, crate::geometry::Rat::one());
        f.add_term(tail, -crate::geometry::Rat::one());
        debug_assert!(f.homogeneous_degree().is_some() || f.is_zero());
        Ok(f)
    }

    /// The linear relation `r_{a,k} = e_{a+k} − x^a e_k − u^{η(k)} e_{∂(k)+a}`
    /// among the binomial generators, as a formal combination.
    pub fn r_ak(&self, a: &MultiIndex, k: &MultiIndex) -> Result<Relation> {
        let ctx = self.var_context(Vec::new());
        let b = self.boundary_tuple(k)?;
        let n = self.height_of(k);
        let one = GradedPoly::monomial(
            ctx.clone(),
            Mono { x: MultiIndex::zero(self.rank()), u: 0, t: Vec::new() },
            crate::geometry::Rat::one(),
        );
        let xa = GradedPoly::monomial(
            ctx.clone(),
            Mono { x: a.clone(), u: 0, t: Vec::new() },
            -crate::geometry::Rat::one(),
        );
        let un = GradedPoly::monomial(
            ctx,
            Mono { x: MultiIndex::zero(self.rank()), u: n as u32, t: Vec::new() },
            -crate::geometry::Rat::one(),
        );
        Ok(Relation {
            terms: vec![(one, a.add(k)), (xa, k.clone()), (un, b.add(a))],
        })
    }

    /// Transports the generating set through a mutation: the ordered image
    /// under `ξ_(m,Q)` becomes a generating set for the mutated polygon, so
    /// exponent tuples transfer verbatim.  Representation compatibility is
    /// re-verified on a bounded box and failures are reported.
    pub fn xi_transport(&self, m: ExtDualVec, q: &Polygon) -> Result<MonoidData> {
        self.xi_transport_checked(m, q, DEFAULT_TRANSPORT_BOX)
    }

    pub fn xi_transport_checked(
        &self,
        m: ExtDualVec,
        q: &Polygon,
        box_bound: i64,
    ) -> Result<MonoidData> {
        if !is_deformation_pair(&self.polygon, m, q)? {
            return Err(Error::NotDeformationPair { m });
        }
        let new_polygon = mutate_polygon(&self.polygon, m, q)?;
        let new_gens: Vec<ExtDualVec> =
            self.generators.iter().map(|&s| xi(m, q, s)).collect();
        let transported =
            MonoidData::with_generating_set_checked(&new_polygon, new_gens, box_bound)?;
        // The exponent tuples stored here must remain valid boundary
        // representations after transport.
        for s in self.box_elements(box_bound) {
            let boundary = self.boundary_decompose(s)?.boundary;
            let tuple = self.rep(boundary)?;
            if transported.element_of(&tuple) != xi(m, q, boundary) {
                return Err(Error::TransportIncompatible(boundary));
            }
        }
        Ok(transported)
    }
}

/// A formal combination `Σ coeff_i · e_{k_i}` over the free module indexed by
/// exponent tuples; substituting `e_k ↦ f_k` must expand to zero.
#[derive(Clone, Debug)]
pub struct Relation {
    pub terms: Vec<(GradedPoly, MultiIndex)>,
}

impl Relation {
    pub fn expand(&self, md: &MonoidData) -> Result<GradedPoly> {
        let ctx = md.var_context(Vec::new());
        let mut acc = GradedPoly::zero(ctx);
        for (coeff, idx) in &self.terms {
            let f = md.f_k(idx)?;
            acc = &acc + &(coeff * &f);
        }
        Ok(acc)
    }

    pub fn verify(&self, md: &MonoidData) -> Result<()> {
        let expansion = self.expand(md)?;
        if expansion.is_zero() {
            Ok(())
        } else {
            let (mono, _) = expansion.first_term().unwrap();
            Err(Error::Certification { term: format!("{mono:?}"), t_degree: mono.t.clone() })
        }
    }
}

/// Lattice points of the half-open fundamental parallelepiped spanned by
/// three dual-cone generators.
fn parallelepiped_points(tri: [ExtDualVec; 3]) -> Vec<ExtDualVec> {
    let cols = [as_col(tri[0]), as_col(tri[1]), as_col(tri[2])];
    let mat = [
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [cols[0][2], cols[1][2], cols[2][2]],
    ];
    let d = det3(mat);
    if d == 0 {
        return Vec::new();
    }
    // Bounding box of the closed parallelepiped.
    let mut lo = [0i128; 3];
    let mut hi = [0i128; 3];
    for mask in 0..8u8 {
        let mut corner = [0i128; 3];
        for (j, col) in cols.iter().enumerate() {
            if mask & (1 << j) != 0 {
                for (r, c) in corner.iter_mut().zip(col) {
                    *r += c;
                }
            }
        }
        for r in 0..3 {
            lo[r] = lo[r].min(corner[r]);
            hi[r] = hi[r].max(corner[r]);
        }
    }
    let mut out = Vec::new();
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                // λ_j = det(mat with column j replaced by p) / det(mat).
                let p = [x, y, z];
                let mut inside = true;
                for j in 0..3 {
                    let mut m = mat;
                    for r in 0..3 {
                        m[r][j] = p[r];
                    }
                    let num = det3(m);
                    let ok = if d > 0 { num >= 0 && num < d } else { num <= 0 && num > d };
                    if !ok {
                        inside = false;
                        break;
                    }
                }
                if inside {
                    out.push(ext(x as i64, y as i64, z as i64));
                }
            }
        }
    }
    out
}

/// Irreducibility in the dual monoid: no decomposition into two nonzero
/// monoid elements, checked by scanning the (bounded) set `S ∩ (c − S)`.
fn is_irreducible(polygon: &Polygon, c: ExtDualVec) -> bool {
    let verts: Vec<_> = polygon.vertices().to_vec();
    let (v0, v1, v2) = (verts[0], verts[1], verts[2]);
    let a = [
        [v0.x as i128, v0.y as i128, 1],
        [v1.x as i128, v1.y as i128, 1],
        [v2.x as i128, v2.y as i128, 1],
    ];
    let d = det3(a);
    let caps = [c.pair(v0), c.pair(v1), c.pair(v2)];
    for p0 in 0..=caps[0] {
        for p1 in 0..=caps[1] {
            for p2 in 0..=caps[2] {
                let rhs = [p0 as i128, p1 as i128, p2 as i128];
                let mut vals = [0i128; 3];
                let mut integral = true;
                for j in 0..3 {
                    let mut m = a;
                    for r in 0..3 {
                        m[r][j] = rhs[r];
                    }
                    let num = det3(m);
                    if num % d != 0 {
                        integral = false;
                        break;
                    }
                    vals[j] = num / d;
                }
                if !integral {
                    continue;
                }
                let s = ext(vals[0] as i64, vals[1] as i64, vals[2] as i64);
                if s == ext(0, 0, 0) || s == c {
                    continue;
                }
                let t = c - s;
                let in_s = verts.iter().all(|&v| s.pair(v) >= 0);
                let in_t = verts.iter().all(|&v| t.pair(v) >= 0);
                if in_s && in_t {
                    return false;
                }
            }
        }
    }
    true
}
