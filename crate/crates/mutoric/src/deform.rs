//! Deformation equations and their certificates: graded polynomials in the
//! ideal variables, one-parameter families with lifted linear relations,
//! mutation of families along a deformation parameter, multi-parameter
//! families at the origin, and the Cayley families attached to Minkowski
//! decompositions.

use crate::error::{Error, Result};
use crate::geometry::{ext, is_deformation_pair, DualVec, ExtDualVec, LatticeVec, Polygon, Rat};
use crate::toric::{MonoidData, MultiIndex};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A named deformation parameter carrying an extended-dual degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedParam {
    pub name: String,
    pub degree: ExtDualVec,
}

impl GradedParam {
    /// Canonical parameter name derived from the degree.
    pub fn for_degree(degree: ExtDualVec) -> GradedParam {
        GradedParam { name: format!("t[{},{},{}]", degree.c.a, degree.c.b, degree.h), degree }
    }

    pub fn named(name: &str, degree: ExtDualVec) -> GradedParam {
        GradedParam { name: name.to_string(), degree }
    }
}

/// Degrees of the ambient variables: `x_j` carries the degree of the j-th
/// monoid generator, `u` carries the Gorenstein degree, and each parameter
/// carries its recorded degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarContext {
    pub x_degrees: Vec<ExtDualVec>,
    pub params: Vec<GradedParam>,
}

impl VarContext {
    pub fn mono_degree(&self, m: &Mono) -> ExtDualVec {
        let mut d = (m.u as i64) * ExtDualVec::GORENSTEIN;
        for (j, &g) in self.x_degrees.iter().enumerate() {
            d = d + (m.x.get(j) as i64) * g;
        }
        for (j, p) in self.params.iter().enumerate() {
            d = d + (m.t[j] as i64) * p.degree;
        }
        d
    }

    pub fn param_index(&self, degree: ExtDualVec) -> Option<usize> {
        self.params.iter().position(|p| p.degree == degree)
    }
}

/// A monomial `x^k u^p t^j` over a variable context.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Mono {
    pub x: MultiIndex,
    pub u: u32,
    pub t: Vec<u32>,
}

impl Mono {
    pub fn mul(&self, other: &Mono) -> Mono {
        Mono {
            x: self.x.add(&other.x),
            u: self.u + other.u,
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        }
    }
}

/// A polynomial in the ideal variables `x_1..x_r`, `u` and the deformation
/// parameters, with every variable carrying an extended-dual degree; the
/// carrier of all constructed families.
#[derive(Clone, Debug)]
pub struct GradedPoly {
    ctx: Arc<VarContext>,
    terms: BTreeMap<Mono, Rat>,
}

impl PartialEq for GradedPoly {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.terms == other.terms
    }
}

impl GradedPoly {
    pub fn zero(ctx: Arc<VarContext>) -> GradedPoly {
        GradedPoly { ctx, terms: BTreeMap::new() }
    }

    pub fn monomial(ctx: Arc<VarContext>, m: Mono, c: Rat) -> GradedPoly {
        let mut p = GradedPoly::zero(ctx);
        p.add_term(m, c);
        p
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        debug_assert_eq!(m.x.len(), self.ctx.x_degrees.len());
        debug_assert_eq!(m.t.len(), self.ctx.params.len());
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn first_term(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next()
    }

    /// The common degree of all monomials, when it exists; `None` for the
    /// zero polynomial or an inhomogeneous value.
    pub fn homogeneous_degree(&self) -> Option<ExtDualVec> {
        let mut it = self.terms.keys();
        let first = self.ctx.mono_degree(it.next()?);
        for m in it {
            if self.ctx.mono_degree(m) != first {
                return None;
            }
        }
        Some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }
}

impl std::ops::Add for &GradedPoly {
    type Output = GradedPoly;
    fn add(self, other: &GradedPoly) -> GradedPoly {
        debug_assert_eq!(*self.ctx, *other.ctx);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &GradedPoly {
    type Output = GradedPoly;
    fn sub(self, other: &GradedPoly) -> GradedPoly {
        debug_assert_eq!(*self.ctx, *other.ctx);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &GradedPoly {
    type Output = GradedPoly;
    fn mul(self, other: &GradedPoly) -> GradedPoly {
        debug_assert_eq!(*self.ctx, *other.ctx);
        let mut out = GradedPoly::zero(self.ctx.clone());
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Parameter-free part first (leading monomial in front), then by
        // ascending parameter powers.
        let mut ordered: Vec<(&Mono, &Rat)> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| {
            let ta: u32 = a.t.iter().sum();
            let tb: u32 = b.t.iter().sum();
            ta.cmp(&tb)
                .then(a.t.cmp(&b.t))
                .then(a.u.cmp(&b.u))
                .then(b.x.cmp(&a.x))
        });
        let mut first = true;
        for (m, c) in ordered {
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
            let mut parts: Vec<String> = Vec::new();
            for (j, p) in self.ctx.params.iter().enumerate() {
                match m.t[j] {
                    0 => {}
                    1 => parts.push(p.name.clone()),
                    e => parts.push(format!("{}^{e}", p.name)),
                }
            }
            match m.u {
                0 => {}
                1 => parts.push("u".into()),
                e => parts.push(format!("u^{e}")),
            }
            for j in 0..m.x.len() {
                match m.x.get(j) {
                    0 => {}
                    1 => parts.push(format!("x{}", j + 1)),
                    e => parts.push(format!("x{}^{e}", j + 1)),
                }
            }
            if !abs.is_one() || parts.is_empty() {
                parts.insert(0, abs.to_string());
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

fn binomial(n: i64, i: i64) -> Rat {
    if i < 0 || i > n {
        return Rat::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..i {
        num *= BigInt::from(n - j);
        den *= BigInt::from(j + 1);
    }
    Rat::new(num, den)
}

/// The deformation multiplicity of an exponent tuple against a witness
/// segment: the weight of the tuple minus the weight of its stored boundary
/// representation.  For weight-coherent representations this equals
/// `Σ η_Q(k_i c_i) − η_Q(Σ k_i c_i)`, and it keeps trivially-zero binomials
/// undeformed in every case.
fn deformation_multiplicity(md: &MonoidData, q: &Polygon, k: &MultiIndex) -> Result<i64> {
    let b = md.boundary_tuple(k)?;
    let delta = md.tuple_weight(q, k) - md.tuple_weight(q, &b);
    if delta < 0 {
        return Err(Error::DegreeBookkeeping(format!(
            "negative deformation multiplicity {delta} for tuple {k}"
        )));
    }
    Ok(delta)
}

/// The one-parameter family
/// `F_k = x^k − Σ_i C(δ, i) t^i χ^{s_k − i·m}` over a deformation pair
/// `(m, Q)`; at `t = 0` it restricts to the binomial generator `f_k`.
pub fn one_param_f(
    md: &MonoidData,
    m: ExtDualVec,
    q: &Polygon,
    k: &MultiIndex,
) -> Result<GradedPoly> {
    if !is_deformation_pair(md.polygon(), m, q)? {
        return Err(Error::NotDeformationPair { m });
    }
    let ctx = md.var_context(vec![GradedParam::for_degree(m)]);
    one_param_f_in(md, m, q, k, &ctx)
}

fn one_param_f_in(
    md: &MonoidData,
    m: ExtDualVec,
    q: &Polygon,
    k: &MultiIndex,
    ctx: &Arc<VarContext>,
) -> Result<GradedPoly> {
    let delta = deformation_multiplicity(md, q, k)?;
    let t_slot = ctx
        .param_index(m)
        .ok_or_else(|| Error::InvalidArgument("context lacks the pair parameter".into()))?;
    let s_k = md.element_of(k);
    let mut f = GradedPoly::zero(ctx.clone());
    f.add_term(
        Mono { x: k.clone(), u: 0, t: vec![0; ctx.params.len()] },
        Rat::one(),
    );
    for i in 0..=delta {
        let s = s_k - i * m;
        if !md.contains(s) {
            return Err(Error::DegreeBookkeeping(format!(
                "{s} left the dual cone while deforming tuple {k}"
            )));
        }
        let (xt, up) = md.chi(s)?;
        let mut t = vec![0; ctx.params.len()];
        t[t_slot] = i as u32;
        f.add_term(Mono { x: xt, u: up, t }, -binomial(delta, i));
    }
    debug_assert!(f.is_homogeneous());
    Ok(f)
}

/// The tuple `k_j` with `Σ (k_j)_l s_l = ∂(s_k − j·m)`, the subscripts of the
/// correction terms in the lifted relations.
pub fn k_j(md: &MonoidData, k: &MultiIndex, m: ExtDualVec, j: i64) -> Result<MultiIndex> {
    let s = md.element_of(k) - j * m;
    let b = md.boundary_decompose(s)?.boundary;
    md.rep(b)
}

/// One summand of a relation certificate: a coefficient polynomial, the
/// family subscript it multiplies, and the family itself.
#[derive(Clone, Debug)]
pub struct CertTerm {
    pub coeff: GradedPoly,
    pub index: MultiIndex,
    pub family: GradedPoly,
}

/// A certified linear relation `Σ coeff_i · F_{k_i} = 0`; the certificate is
/// valid exactly when the expansion is the zero polynomial.
#[derive(Clone, Debug)]
pub struct RelationCert {
    pub a: MultiIndex,
    pub k: MultiIndex,
    pub terms: Vec<CertTerm>,
}

impl RelationCert {
    pub fn expansion(&self) -> GradedPoly {
        let ctx = self.terms[0].coeff.ctx().clone();
        let mut acc = GradedPoly::zero(ctx);
        for t in &self.terms {
            acc = &acc + &(&t.coeff * &t.family);
        }
        acc
    }

    pub fn verify(&self) -> Result<()> {
        let e = self.expansion();
        if e.is_zero() {
            Ok(())
        } else {
            let (mono, _) = e.first_term().unwrap();
            Err(Error::Certification { term: format!("{mono:?}"), t_degree: mono.t.clone() })
        }
    }
}

/// The lifted relation
/// `R_{a,k} = F_{a+k} − x^a F_k − u^{n(s_k)} F_{∂(k)+a}
///            − Σ_j u^{n(s_k − j·m)} C(δ, j) t^j F_{k_j + a}`,
/// returned as a verified certificate.
pub fn one_param_r(
    md: &MonoidData,
    m: ExtDualVec,
    q: &Polygon,
    a: &MultiIndex,
    k: &MultiIndex,
) -> Result<RelationCert> {
    if !is_deformation_pair(md.polygon(), m, q)? {
        return Err(Error::NotDeformationPair { m });
    }
    let ctx = md.var_context(vec![GradedParam::for_degree(m)]);
    let r = md.rank();
    let np = ctx.params.len();
    let delta = deformation_multiplicity(md, q, k)?;
    let bk = md.boundary_tuple(k)?;
    let nk = md.height_of(k);
    let mono = |x: MultiIndex, u: u32, tpow: u32| Mono { x, u, t: vec![tpow; np] };
    let mut terms = vec![
        CertTerm {
            coeff: GradedPoly::monomial(ctx.clone(), mono(MultiIndex::zero(r), 0, 0), Rat::one()),
            index: a.add(k),
            family: one_param_f_in(md, m, q, &a.add(k), &ctx)?,
        },
        CertTerm {
            coeff: GradedPoly::monomial(ctx.clone(), mono(a.clone(), 0, 0), -Rat::one()),
            index: k.clone(),
            family: one_param_f_in(md, m, q, k, &ctx)?,
        },
        CertTerm {
            coeff: GradedPoly::monomial(
                ctx.clone(),
                mono(MultiIndex::zero(r), nk as u32, 0),
                -Rat::one(),
            ),
            index: bk.add(a),
            family: one_param_f_in(md, m, q, &bk.add(a), &ctx)?,
        },
    ];
    for j in 1..=delta {
        let kj = k_j(md, k, m, j)?;
        let level = md.element_of(k) - j * m;
        let u_pow = md.boundary_decompose(level)?.height as u32;
        terms.push(CertTerm {
            coeff: GradedPoly::monomial(
                ctx.clone(),
                mono(MultiIndex::zero(r), u_pow, j as u32),
                -binomial(delta, j),
            ),
            index: kj.add(a),
            family: one_param_f_in(md, m, q, &kj.add(a), &ctx)?,
        });
    }
    let cert = RelationCert { a: a.clone(), k: k.clone(), terms };
    cert.verify()?;
    Ok(cert)
}

/// Whether a family can be mutated along its parameter of degree `m`: every
/// monomial must satisfy the degree inequality that makes the homogenizing
/// power of `t_{−m}` non-negative.
pub fn t_mutable(f: &GradedPoly, k: &MultiIndex, m: ExtDualVec, q: &Polygon, md: &MonoidData) -> bool {
    let ctx = f.ctx();
    let slot = ctx.param_index(m);
    let w_k = md.tuple_weight(q, k);
    for (mono, _) in f.terms() {
        let t_m_power = slot.map(|s| mono.t[s] as i64).unwrap_or(0);
        let mut bound = w_k - md.tuple_weight(q, &mono.x);
        for (j, p) in ctx.params.iter().enumerate() {
            if Some(j) == slot {
                continue;
            }
            let pow = mono.t[j] as i64;
            if p.degree.pi_m().is_collinear(m.pi_m()) {
                bound -= pow;
            } else {
                bound += pow * q.eta(-p.degree.pi_m());
            }
        }
        if t_m_power > bound {
            return false;
        }
    }
    true
}

/// Substitutes `x_i → y_i` (re-graded by the transported generating set),
/// `t_r → t_{ψ_m(r)}` for `r ≠ m` and `t_m → 1`, then homogenizes every
/// monomial to `target` by powers of the parameter of degree `−m`.
fn mutate_graded(
    f: &GradedPoly,
    target: ExtDualVec,
    m: ExtDualVec,
    transported: &MonoidData,
    new_ctx: &Arc<VarContext>,
    old_slot: usize,
    hom_slot: usize,
    param_map: &[Option<usize>],
) -> Result<GradedPoly> {
    let mut out = GradedPoly::zero(new_ctx.clone());
    for (mono, c) in f.terms() {
        let mut t = vec![0u32; new_ctx.params.len()];
        for (j, &pow) in mono.t.iter().enumerate() {
            if j == old_slot {
                continue; // the mutated parameter is set to one
            }
            t[param_map[j].unwrap()] += pow;
        }
        let mut deg = (mono.u as i64) * ExtDualVec::GORENSTEIN;
        for (j, &g) in transported.generators().iter().enumerate() {
            deg = deg + (mono.x.get(j) as i64) * g;
        }
        for (j, p) in new_ctx.params.iter().enumerate() {
            deg = deg + (t[j] as i64) * p.degree;
        }
        // target = deg + i·(−m) for a unique non-negative integer i.
        let diff = target - deg;
        let i = if diff == ext(0, 0, 0) {
            0i64
        } else {
            let neg_m = -m;
            let ratio = if neg_m.c.a != 0 {
                diff.c.a / neg_m.c.a
            } else if neg_m.c.b != 0 {
                diff.c.b / neg_m.c.b
            } else {
                diff.h / neg_m.h
            };
            if ratio * neg_m != diff {
                return Err(Error::FamilyNotMutable(format!(
                    "monomial degree offset {diff} is not a multiple of {neg_m}"
                )));
            }
            ratio
        };
        if i < 0 {
            return Err(Error::FamilyNotMutable(format!(
                "homogenization requires a negative power at {mono:?}"
            )));
        }
        t[hom_slot] += i as u32;
        out.add_term(Mono { x: mono.x.clone(), u: mono.u, t }, c.clone());
    }
    debug_assert!(out.is_homogeneous());
    Ok(out)
}

/// Builds the mutated variable context: parameters other than the mutated
/// one are re-graded by `ψ_m`, and the homogenizing parameter of degree `−m`
/// is appended when not already present.
fn mutated_context(
    ctx: &VarContext,
    m: ExtDualVec,
    q: &Polygon,
    transported: &MonoidData,
) -> Result<(Arc<VarContext>, usize, usize, Vec<Option<usize>>)> {
    let old_slot = ctx
        .param_index(m)
        .ok_or_else(|| Error::FamilyNotMutable(format!("no parameter of degree {m}")))?;
    let mut params: Vec<GradedParam> = Vec::new();
    let mut param_map: Vec<Option<usize>> = vec![None; ctx.params.len()];
    for (j, p) in ctx.params.iter().enumerate() {
        if j == old_slot {
            continue;
        }
        let new_degree = crate::laurent::psi_degree(m, q, p.degree);
        param_map[j] = Some(params.len());
        params.push(GradedParam::for_degree(new_degree));
    }
    let hom_slot = match params.iter().position(|p| p.degree == -m) {
        Some(i) => i,
        None => {
            params.push(GradedParam::for_degree(-m));
            params.len() - 1
        }
    };
    let new_ctx = Arc::new(VarContext { x_degrees: transported.generators().to_vec(), params });
    Ok((new_ctx, old_slot, hom_slot, param_map))
}

/// The family mutation `mut_{t_m} F_k`: requires [`t_mutable`] and a
/// transported generating set, and produces a homogeneous family of degree
/// `Σ k_j · ξ(s_j)`.
pub fn mutate_family(
    f: &GradedPoly,
    k: &MultiIndex,
    m: ExtDualVec,
    q: &Polygon,
    md: &MonoidData,
    transported: &MonoidData,
) -> Result<GradedPoly> {
    if !t_mutable(f, k, m, q, md) {
        return Err(Error::FamilyNotMutable(format!(
            "family {k} is not mutable along the parameter of degree {m}"
        )));
    }
    let (new_ctx, old_slot, hom_slot, param_map) = mutated_context(f.ctx(), m, q, transported)?;
    let target = transported.element_of(k);
    mutate_graded(f, target, m, transported, &new_ctx, old_slot, hom_slot, &param_map)
}

/// Mutates a whole relation certificate: each family is mutated to its own
/// target degree and each coefficient is homogenized to close the gap to the
/// leading target, so the mutated combination recertifies to zero.
pub fn mutate_relation(
    cert: &RelationCert,
    m: ExtDualVec,
    q: &Polygon,
    transported: &MonoidData,
) -> Result<RelationCert> {
    let ctx = cert.terms[0].coeff.ctx();
    let (new_ctx, old_slot, hom_slot, param_map) = mutated_context(ctx, m, q, transported)?;
    let lead_target = transported.element_of(&cert.a.add(&cert.k));
    let mut terms = Vec::with_capacity(cert.terms.len());
    for t in &cert.terms {
        let family_target = transported.element_of(&t.index);
        let family = mutate_graded(
            &t.family,
            family_target,
            m,
            transported,
            &new_ctx,
            old_slot,
            hom_slot,
            &param_map,
        )?;
        let coeff = mutate_graded(
            &t.coeff,
            lead_target - family_target,
            m,
            transported,
            &new_ctx,
            old_slot,
            hom_slot,
            &param_map,
        )?;
        terms.push(CertTerm { coeff, index: t.index.clone(), family });
    }
    let out = RelationCert { a: cert.a.clone(), k: cert.k.clone(), terms };
    out.verify()?;
    Ok(out)
}

/// Multi-parameter families over the toric variety of a single lattice
/// point, with one parameter per mutable direction; the seed of the
/// mutation-transport arguments.
#[derive(Clone, Debug)]
pub struct OriginFamily {
    gens: Vec<DualVec>,
    params: Vec<GradedParam>,
    /// Index of the distinguished parameter; its kernel segment splits the
    /// others into collinear and transverse classes.
    distinguished: usize,
    ctx: Arc<VarContext>,
    rep_cap: u32,
}

impl OriginFamily {
    /// `gens` generate the character lattice as a monoid; every parameter
    /// degree is a plain dual vector (height zero).
    pub fn new(gens: Vec<DualVec>, params: Vec<(String, DualVec)>, distinguished: usize) -> Result<OriginFamily> {
        if distinguished >= params.len() {
            return Err(Error::InvalidArgument("distinguished parameter out of range".into()));
        }
        let params: Vec<GradedParam> = params
            .into_iter()
            .map(|(name, d)| GradedParam::named(&name, ExtDualVec { c: d, h: 0 }))
            .collect();
        let x_degrees: Vec<ExtDualVec> =
            gens.iter().map(|&c| ExtDualVec { c, h: 0 }).collect();
        let ctx = Arc::new(VarContext { x_degrees, params: params.clone() });
        let fam = OriginFamily { gens, params, distinguished, ctx, rep_cap: 8 };
        // Every parameter direction must be representable.
        for p in &fam.params {
            fam.rep(-p.degree.c)?;
        }
        Ok(fam)
    }

    /// Minimal-total-degree, then lexicographically smallest representation
    /// of a character as a sum of generators.
    pub fn rep(&self, c: DualVec) -> Result<MultiIndex> {
        for total in 0..=self.rep_cap {
            if let Some(found) = self.rep_with_total(c, total) {
                return Ok(found);
            }
        }
        Err(Error::NoRepresentation(ExtDualVec { c, h: 0 }))
    }

    fn rep_with_total(&self, c: DualVec, total: u32) -> Option<MultiIndex> {
        fn rec(
            gens: &[DualVec],
            idx: usize,
            rem: DualVec,
            left: u32,
            prefix: &mut Vec<u32>,
        ) -> Option<MultiIndex> {
            if idx == gens.len() {
                return if rem == DualVec::ZERO && left == 0 {
                    Some(MultiIndex(prefix.clone()))
                } else {
                    None
                };
            }
            for t in 0..=left {
                prefix.push(t);
                let next = rem - (t as i64) * gens[idx];
                if let Some(found) = rec(gens, idx + 1, next, left - t, prefix) {
                    return Some(found);
                }
                prefix.pop();
            }
            None
        }
        let mut prefix = Vec::new();
        rec(&self.gens, 0, c, total, &mut prefix)
    }

    fn weight(&self, q: &Polygon, k: &MultiIndex) -> i64 {
        self.gens
            .iter()
            .enumerate()
            .map(|(i, &c)| (k.get(i) as i64) * q.eta(c))
            .sum()
    }

    fn kernel_segment(degree: DualVec) -> Result<Polygon> {
        let d = degree
            .kernel_direction()
            .ok_or_else(|| Error::InvalidArgument("zero parameter degree".into()))?;
        Polygon::segment(LatticeVec::ZERO, d)
    }

    /// The deformation factor
    /// `(1 + Σ_{collinear} χ^{−r} t_r)^{δ_Q(k)} · Π_{transverse} (1 + χ^{−r} t_r)^{δ_{Q_r}(k)}`
    /// multiplying the boundary monomial of `F_k`.
    fn factor(&self, k: &MultiIndex, b: &MultiIndex) -> Result<GradedPoly> {
        let m = self.params[self.distinguished].degree.c;
        let q = OriginFamily::kernel_segment(m)?;
        let np = self.params.len();
        let r = self.gens.len();
        let one = GradedPoly::monomial(
            self.ctx.clone(),
            Mono { x: MultiIndex::zero(r), u: 0, t: vec![0; np] },
            Rat::one(),
        );
        // Collinear bundle, which includes the distinguished parameter.
        let mut collinear_sum = one.clone();
        let mut acc = one.clone();
        let mut delta_q = self.weight(&q, k) - self.weight(&q, b);
        if delta_q < 0 {
            return Err(Error::DegreeBookkeeping("negative multiplicity".into()));
        }
        for (j, p) in self.params.iter().enumerate() {
            let collinear = p.degree.c.is_collinear(m);
            if collinear {
                let chi = self.rep(-p.degree.c)?;
                let mut t = vec![0; np];
                t[j] = 1;
                let term = GradedPoly::monomial(
                    self.ctx.clone(),
                    Mono { x: chi, u: 0, t },
                    Rat::one(),
                );
                collinear_sum = &collinear_sum + &term;
            } else {
                let qr = OriginFamily::kernel_segment(p.degree.c)?;
                let dq = self.weight(&qr, k) - self.weight(&qr, b);
                if dq < 0 {
                    return Err(Error::DegreeBookkeeping("negative multiplicity".into()));
                }
                let chi = self.rep(-p.degree.c)?;
                let mut t = vec![0; np];
                t[j] = 1;
                let mut fac = one.clone();
                fac.add_term(Mono { x: chi, u: 0, t }, Rat::one());
                for _ in 0..dq {
                    acc = &acc * &fac;
                }
            }
        }
        while delta_q > 0 {
            acc = &acc * &collinear_sum;
            delta_q -= 1;
        }
        Ok(acc)
    }

    /// The family `F_k(z, t) = z^k − z^{∂(k)} · factor`.
    pub fn f_k(&self, k: &MultiIndex) -> Result<GradedPoly> {
        let np = self.params.len();
        let c_k = self
            .gens
            .iter()
            .enumerate()
            .fold(DualVec::ZERO, |acc, (i, &c)| acc + (k.get(i) as i64) * c);
        let b = self.rep(c_k)?;
        let mut f = GradedPoly::monomial(
            self.ctx.clone(),
            Mono { x: k.clone(), u: 0, t: vec![0; np] },
            Rat::one(),
        );
        let tail = GradedPoly::monomial(
            self.ctx.clone(),
            Mono { x: b.clone(), u: 0, t: vec![0; np] },
            Rat::one(),
        );
        let factored = &tail * &self.factor(k, &b)?;
        f = &f - &factored;
        debug_assert!(f.is_homogeneous());
        Ok(f)
    }

    /// The lifted relation
    /// `R_{a,k} = F_{a+k} − z^a F_k − factor(k) · F_{a+∂(k)}`, verified.
    pub fn relation(&self, a: &MultiIndex, k: &MultiIndex) -> Result<RelationCert> {
        let np = self.params.len();
        let r = self.gens.len();
        let c_k = self
            .gens
            .iter()
            .enumerate()
            .fold(DualVec::ZERO, |acc, (i, &c)| acc + (k.get(i) as i64) * c);
        let b = self.rep(c_k)?;
        let one = GradedPoly::monomial(
            self.ctx.clone(),
            Mono { x: MultiIndex::zero(r), u: 0, t: vec![0; np] },
            Rat::one(),
        );
        let za = GradedPoly::monomial(
            self.ctx.clone(),
            Mono { x: a.clone(), u: 0, t: vec![0; np] },
            Rat::one(),
        );
        let factor = self.factor(k, &b)?;
        let terms = vec![
            CertTerm { coeff: one, index: a.add(k), family: self.f_k(&a.add(k))? },
            CertTerm {
                coeff: &GradedPoly::zero(self.ctx.clone()) - &za,
                index: k.clone(),
                family: self.f_k(k)?,
            },
            CertTerm {
                coeff: &GradedPoly::zero(self.ctx.clone()) - &factor,
                index: b.add(a),
                family: self.f_k(&b.add(a))?,
            },
        ];
        let cert = RelationCert { a: a.clone(), k: k.clone(), terms };
        cert.verify()?;
        Ok(cert)
    }

    /// The family together with its relation certificate.
    pub fn family_with_certificate(
        &self,
        a: &MultiIndex,
        k: &MultiIndex,
    ) -> Result<(GradedPoly, RelationCert)> {
        Ok((self.f_k(k)?, self.relation(a, k)?))
    }
}

/// A polynomial in the ideal variables and the Cayley heights `z_1..z_m`,
/// graded by `M ⊕ Z^m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CayleyPoly {
    pub terms: BTreeMap<(MultiIndex, Vec<u32>), Rat>,
}

impl CayleyPoly {
    fn zero() -> CayleyPoly {
        CayleyPoly { terms: BTreeMap::new() }
    }

    fn add_term(&mut self, key: (MultiIndex, Vec<u32>), c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn mul_add_into(&self, other: &CayleyPoly, sign: Rat, out: &mut CayleyPoly) {
        for ((xa, za), ca) in &self.terms {
            for ((xb, zb), cb) in &other.terms {
                let key = (
                    xa.add(xb),
                    za.iter().zip(zb).map(|(p, q)| p + q).collect::<Vec<u32>>(),
                );
                out.add_term(key, ca * cb * &sign);
            }
        }
    }
}

/// The Cayley construction over a fixed Minkowski decomposition
/// `P = P_1 + … + P_m`: families `F_k(x, z) = x^k − x^{∂(k)} Π z_i^{δ_i(k)}`
/// whose substitutions `z_i → u + Z_i` deform the toric variety of `P`.
#[derive(Clone, Debug)]
pub struct CayleyFamily {
    md: MonoidData,
    parts: Vec<Polygon>,
}

impl CayleyFamily {
    pub fn new(parts: Vec<Polygon>) -> Result<CayleyFamily> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("need at least one summand".into()));
        }
        let sum = parts
            .iter()
            .fold(Polygon::point(LatticeVec::ZERO), |acc, p| acc.minkowski_sum(p));
        if sum.dim() != 2 {
            return Err(Error::DegeneratePolygon);
        }
        let md = MonoidData::hilbert_basis(&sum)?;
        Ok(CayleyFamily { md, parts })
    }

    pub fn monoid(&self) -> &MonoidData {
        &self.md
    }

    pub fn parts(&self) -> &[Polygon] {
        &self.parts
    }

    /// The generators of the Cayley monoid: each `s_j` extended by its
    /// per-summand support heights, plus the unit heights of the `z_i`.
    pub fn cayley_generators(&self) -> Vec<Vec<i64>> {
        let m = self.parts.len();
        let mut out = Vec::new();
        for g in self.md.generators() {
            let mut v = vec![g.c.a, g.c.b];
            for p in &self.parts {
                v.push(p.eta(g.c));
            }
            out.push(v);
        }
        for i in 0..m {
            let mut v = vec![0, 0];
            for j in 0..m {
                v.push(if i == j { 1 } else { 0 });
            }
            out.push(v);
        }
        out
    }

    /// Per-summand deformation multiplicities `δ_i(k)`; they sum to the
    /// height `n(s_k)`.
    pub fn multiplicities(&self, k: &MultiIndex) -> Result<Vec<i64>> {
        let b = self.md.boundary_tuple(k)?;
        let mut out = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            let d = self.md.tuple_weight(p, k) - self.md.tuple_weight(p, &b);
            if d < 0 {
                return Err(Error::DegreeBookkeeping(format!(
                    "negative Cayley multiplicity for {k}"
                )));
            }
            out.push(d);
        }
        debug_assert_eq!(out.iter().sum::<i64>(), self.md.height_of(k));
        Ok(out)
    }

    /// `F_k(x, z) = x^k − x^{∂(k)} Π z_i^{δ_i(k)}`.
    pub fn f_k(&self, k: &MultiIndex) -> Result<CayleyPoly> {
        let b = self.md.boundary_tuple(k)?;
        let deltas = self.multiplicities(k)?;
        let m = self.parts.len();
        let mut f = CayleyPoly::zero();
        f.add_term((k.clone(), vec![0; m]), Rat::one());
        f.add_term((b, deltas.iter().map(|&d| d as u32).collect()), -Rat::one());
        Ok(f)
    }

    /// The relation `F_{a+k} − x^a F_k − Π z_i^{δ_i(k)} F_{a+∂(k)}`,
    /// verified to expand to zero.
    pub fn relation(&self, a: &MultiIndex, k: &MultiIndex) -> Result<CayleyPoly> {
        let m = self.parts.len();
        let b = self.md.boundary_tuple(k)?;
        let deltas = self.multiplicities(k)?;
        let mut acc = CayleyPoly::zero();
        let one = {
            let mut p = CayleyPoly::zero();
            p.add_term((MultiIndex::zero(self.md.rank()), vec![0; m]), Rat::one());
            p
        };
        let xa = {
            let mut p = CayleyPoly::zero();
            p.add_term((a.clone(), vec![0; m]), Rat::one());
            p
        };
        let zdelta = {
            let mut p = CayleyPoly::zero();
            p.add_term(
                (MultiIndex::zero(self.md.rank()), deltas.iter().map(|&d| d as u32).collect()),
                Rat::one(),
            );
            p
        };
        one.mul_add_into(&self.f_k(&a.add(k))?, Rat::one(), &mut acc);
        xa.mul_add_into(&self.f_k(k)?, -Rat::one(), &mut acc);
        zdelta.mul_add_into(&self.f_k(&b.add(a))?, -Rat::one(), &mut acc);
        if !acc.is_zero() {
            return Err(Error::Certification {
                term: format!("{:?}", acc.terms.keys().next().unwrap()),
                t_degree: Vec::new(),
            });
        }
        Ok(acc)
    }

    /// Substitutes `z_i → u + Z_i`, producing an ordinary graded family with
    /// parameters `Z_1..Z_m` of Gorenstein degree; at `Z = 0` it restricts to
    /// the binomial generator.
    pub fn substitute(&self, f: &CayleyPoly) -> GradedPoly {
        let m = self.parts.len();
        let params: Vec<GradedParam> = (0..m)
            .map(|i| GradedParam::named(&format!("Z{}", i + 1), ExtDualVec::GORENSTEIN))
            .collect();
        let ctx = self.md.var_context(params);
        let mut out = GradedPoly::zero(ctx.clone());
        for ((x, z), c) in &f.terms {
            // Expand Π (u + Z_i)^{z_i}.
            let mut expansion: Vec<(u32, Vec<u32>, Rat)> = vec![(0, vec![0; m], Rat::one())];
            for (i, &zi) in z.iter().enumerate() {
                let mut next = Vec::new();
                for (u_pow, t_pows, coeff) in &expansion {
                    for j in 0..=zi {
                        let mut t = t_pows.clone();
                        t[i] += j;
                        next.push((
                            u_pow + (zi - j),
                            t,
                            coeff * binomial(zi as i64, j as i64),
                        ));
                    }
                }
                expansion = next;
            }
            for (u_pow, t_pows, coeff) in expansion {
                out.add_term(Mono { x: x.clone(), u: u_pow, t: t_pows }, c * &coeff);
            }
        }
        out
    }

    /// The substituted relation: it must expand to zero as well.
    pub fn substituted_relation(&self, a: &MultiIndex, k: &MultiIndex) -> Result<GradedPoly> {
        let b = self.md.boundary_tuple(k)?;
        let deltas = self.multiplicities(k)?;
        let fak = self.substitute(&self.f_k(&a.add(k))?);
        let fk = self.substitute(&self.f_k(k)?);
        let fba = self.substitute(&self.f_k(&b.add(a))?);
        let ctx = fak.ctx().clone();
        let m = self.parts.len();
        let xa = GradedPoly::monomial(
            ctx.clone(),
            Mono { x: a.clone(), u: 0, t: vec![0; m] },
            Rat::one(),
        );
        // Π (u + Z_i)^{δ_i(k)} as a graded polynomial.
        let mut zfac = GradedPoly::monomial(
            ctx.clone(),
            Mono { x: MultiIndex::zero(self.md.rank()), u: 0, t: vec![0; m] },
            Rat::one(),
        );
        for (i, &d) in deltas.iter().enumerate() {
            let mut t = vec![0; m];
            t[i] = 1;
            let mut lin = GradedPoly::monomial(
                ctx.clone(),
                Mono { x: MultiIndex::zero(self.md.rank()), u: 1, t: vec![0; m] },
                Rat::one(),
            );
            lin.add_term(Mono { x: MultiIndex::zero(self.md.rank()), u: 0, t }, Rat::one());
            for _ in 0..d {
                zfac = &zfac * &lin;
            }
        }
        let expansion = &(&fak - &(&xa * &fk)) - &(&zfac * &fba);
        if !expansion.is_zero() {
            let (mono, _) = expansion.first_term().unwrap();
            return Err(Error::Certification {
                term: format!("{mono:?}"),
                t_degree: mono.t.clone(),
            });
        }
        Ok(expansion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lv;

    fn tri_b() -> Polygon {
        Polygon::from_vertices(vec![lv(0, 0), lv(3, 0), lv(0, 2)]).unwrap()
    }

    fn gens_b() -> Vec<ExtDualVec> {
        vec![
            ext(-2, -3, 6),
            ext(-1, -1, 3),
            ext(0, 1, 0),
            ext(-1, -2, 4),
            ext(0, -1, 2),
            ext(1, 0, 0),
        ]
    }

    fn md_b() -> MonoidData {
        MonoidData::with_generating_set(&tri_b(), gens_b()).unwrap()
    }

    fn hseg() -> Polygon {
        Polygon::segment(lv(0, 0), lv(1, 0)).unwrap()
    }

    #[test]
    fn one_parameter_families_golden() {
        let md = md_b();
        let m = ext(0, -2, 3); // the pair degree of the worked example
        let q = hseg();
        let k = MultiIndex(vec![0, 1, 0, 0, 0, 1]);
        let a = MultiIndex(vec![0, 0, 0, 1, 0, 1]);
        let fk = one_param_f(&md, m, &q, &k).unwrap();
        assert_eq!(fk.to_string(), "x2*x6 - u*x5 - t[0,-2,3]*x3");
        let fak = one_param_f(&md, m, &q, &a.add(&k)).unwrap();
        assert_eq!(
            fak.to_string(),
            "x2*x4*x6^2 - u*x5^3 - 2*t[0,-2,3]*u^2*x5 - t[0,-2,3]^2*u*x3"
        );
        let bk = md.boundary_tuple(&k).unwrap();
        let fba = one_param_f(&md, m, &q, &bk.add(&a)).unwrap();
        assert_eq!(fba.to_string(), "x4*x5*x6 - x5^3 - t[0,-2,3]*u*x5");
        assert_eq!(k_j(&md, &k, m, 1).unwrap(), MultiIndex(vec![0, 0, 1, 0, 0, 0]));
        let fk1a = one_param_f(&md, m, &q, &k_j(&md, &k, m, 1).unwrap().add(&a)).unwrap();
        assert_eq!(fk1a.to_string(), "x3*x4*x6 - u^2*x5 - t[0,-2,3]*u*x3");
        // Multiplicity zero keeps the undeformed binomial.
        let unit = MultiIndex::unit(6, 2);
        let f_unit = one_param_f(&md, m, &q, &unit).unwrap();
        assert!(f_unit.is_zero());
    }

    #[test]
    fn one_parameter_relation_certifies() {
        let md = md_b();
        let m = ext(0, -2, 3);
        let q = hseg();
        let k = MultiIndex(vec![0, 1, 0, 0, 0, 1]);
        let a = MultiIndex(vec![0, 0, 0, 1, 0, 1]);
        let cert = one_param_r(&md, m, &q, &a, &k).unwrap();
        assert_eq!(cert.terms.len(), 4);
        assert!(cert.expansion().is_zero());
        // Undeformed corner case: trivial multiplicity reduces to the plain
        // binomial relation.
        let cert0 = one_param_r(&md, m, &q, &MultiIndex::zero(6), &k).unwrap();
        assert!(cert0.expansion().is_zero());
    }

    #[test]
    fn family_mutation_golden() {
        let md = md_b();
        let mu = ext(0, -2, 3);
        let q = hseg();
        let transported = md.xi_transport(mu, &q).unwrap();
        let k = MultiIndex(vec![0, 1, 0, 0, 0, 1]);
        let a = MultiIndex(vec![0, 0, 0, 1, 0, 1]);
        let fk = one_param_f(&md, mu, &q, &k).unwrap();
        assert!(t_mutable(&fk, &k, mu, &q, &md));
        let mutated = mutate_family(&fk, &k, mu, &q, &md, &transported).unwrap();
        assert_eq!(mutated.to_string(), "x2*x6 - x3 - t[0,2,-3]*u*x5");
        let fak = one_param_f(&md, mu, &q, &a.add(&k)).unwrap();
        let mak = mutate_family(&fak, &a.add(&k), mu, &q, &md, &transported).unwrap();
        assert_eq!(
            mak.to_string(),
            "x2*x4*x6^2 - u*x3 - 2*t[0,2,-3]*u^2*x5 - t[0,2,-3]^2*u*x5^3"
        );
        let bk = md.boundary_tuple(&k).unwrap();
        let fba = one_param_f(&md, mu, &q, &bk.add(&a)).unwrap();
        let mba = mutate_family(&fba, &bk.add(&a), mu, &q, &md, &transported).unwrap();
        assert_eq!(mba.to_string(), "x4*x5*x6 - u*x5 - t[0,2,-3]*x5^3");
        let k1a = k_j(&md, &k, mu, 1).unwrap().add(&a);
        let fk1a = one_param_f(&md, mu, &q, &k1a).unwrap();
        let mk1a = mutate_family(&fk1a, &k1a, mu, &q, &md, &transported).unwrap();
        assert_eq!(mk1a.to_string(), "x3*x4*x6 - u*x3 - t[0,2,-3]*u^2*x5");
        // The mutated relation recertifies.
        let cert = one_param_r(&md, mu, &q, &a, &k).unwrap();
        let mutated_cert = mutate_relation(&cert, mu, &q, &transported).unwrap();
        assert!(mutated_cert.expansion().is_zero());
    }

    #[test]
    fn mutability_violations_are_detected() {
        let md = md_b();
        let mu = ext(0, -2, 3);
        let q = hseg();
        let k = MultiIndex(vec![0, 1, 0, 0, 0, 1]);
        let mut f = one_param_f(&md, mu, &q, &k).unwrap();
        // Force an extra parameter power that violates the degree bound.
        let mono = Mono { x: MultiIndex::unit(6, 2), u: 0, t: vec![2] };
        f.add_term(mono, Rat::one());
        assert!(!t_mutable(&f, &k, mu, &q, &md));
        // A family with no parameters is trivially mutable.
        let plain = md.f_k(&k).unwrap();
        assert!(t_mutable(&plain, &k, mu, &q, &md));
    }

    #[test]
    fn origin_family_golden() {
        let gens = vec![dvv(-1, 0), dvv(0, 1), dvv(1, 0), dvv(0, -1), dvv(1, -1), dvv(1, -2)];
        let fam = OriginFamily::new(
            gens,
            vec![("t".into(), dvv(1, 0)), ("s".into(), dvv(0, -1))],
            0,
        )
        .unwrap();
        // z₁z₆ − z₄² deforms only along the transverse parameter.
        let mut k = MultiIndex::zero(6);
        k.0[0] = 1;
        k.0[5] = 1;
        let f = fam.f_k(&k).unwrap();
        assert_eq!(f.to_string(), "x1*x6 - x4^2 - s*x2*x4^2");
        // z₂z₄² − z₄ deforms along the distinguished parameter.
        let mut k2 = MultiIndex::zero(6);
        k2.0[1] = 1;
        k2.0[3] = 2;
        let f2 = fam.f_k(&k2).unwrap();
        assert_eq!(f2.to_string(), "x2*x4^2 - x4 - t*x1*x4");
        // Unit tuples are undeformed zero binomials.
        assert!(fam.f_k(&MultiIndex::unit(6, 1)).unwrap().is_zero());
        // The relation certificate expands to zero.
        let mut a = MultiIndex::zero(6);
        a.0[1] = 1;
        let (_, cert) = fam.family_with_certificate(&a, &k).unwrap();
        assert!(cert.expansion().is_zero());
    }

    fn dvv(a: i64, b: i64) -> DualVec {
        DualVec { a, b }
    }

    #[test]
    fn cayley_square_as_two_segments() {
        let h = Polygon::segment(lv(0, 0), lv(1, 0)).unwrap();
        let v = Polygon::segment(lv(0, 0), lv(0, 1)).unwrap();
        let fam = CayleyFamily::new(vec![h, v]).unwrap();
        let r = fam.monoid().rank();
        for k in all_tuples(r, 2) {
            let deltas = fam.multiplicities(&k).unwrap();
            assert_eq!(deltas.iter().sum::<i64>(), fam.monoid().height_of(&k));
            for a in all_tuples(r, 2) {
                fam.relation(&a, &k).unwrap();
                fam.substituted_relation(&a, &k).unwrap();
            }
        }
        // At Z = 0 the substitution restores the binomial generator.
        for k in all_tuples(r, 2) {
            let sub = fam.substitute(&fam.f_k(&k).unwrap());
            let at_zero: Vec<_> = sub
                .terms()
                .filter(|(m, _)| m.t.iter().all(|&e| e == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect();
            let fk = fam.monoid().f_k(&k).unwrap();
            let expect: Vec<_> = fk
                .terms()
                .map(|(m, c)| (Mono { x: m.x.clone(), u: m.u, t: vec![0, 0] }, c.clone()))
                .collect();
            assert_eq!(at_zero, expect);
        }
    }

    #[test]
    fn cayley_single_part_uses_u_only() {
        let tri = Polygon::from_vertices(vec![lv(0, 0), lv(1, 0), lv(0, 1)]).unwrap();
        let fam = CayleyFamily::new(vec![tri]).unwrap();
        let r = fam.monoid().rank();
        for k in all_tuples(r, 2) {
            let deltas = fam.multiplicities(&k).unwrap();
            assert_eq!(deltas[0], fam.monoid().height_of(&k));
        }
    }

    pub(crate) fn all_tuples(len: usize, max_norm: u32) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(len)];
        let mut frontier = out.clone();
        for _ in 0..max_norm {
            let mut next = Vec::new();
            for t in &frontier {
                for j in 0..len {
                    let mut u = t.clone();
                    u.0[j] += 1;
                    next.push(u);
                }
            }
            next.sort();
            next.dedup();
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out.sort();
        out.dedup();
        out
    }
}
