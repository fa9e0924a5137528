//! Mutation-equivalence searches: the lattice perimeter as a potential
//! function, the greedy-plus-compositions reduction strategy, zero-mutability
//! verdicts with replayable traces, maximal mutability through exact linear
//! feasibility, degree-persistence checks along mutation chains, and a
//! bounded bidirectional search for mutation equivalence.

use crate::error::{Error, Result};
use crate::geometry::{
    dv, is_deformation_pair, mutate_polygon, ExtDualVec, LatticeVec, Polygon, Rat,
};
use crate::laurent::{
    canonical_witness, is_m_mutable, mutable_degrees, mutate, psi_degree, LaurentPoly, TraceStep,
};
use crate::linalg::{solve, Solution};
use crate::tangent::polygon_is_m_mutable;
use num_traits::{One, Zero};
use std::collections::HashMap;

/// Total lattice length of the boundary: the sum over edges for a polygon,
/// twice the length for a segment (the degenerate cycle runs both ways), and
/// zero for a point.
pub fn perimeter(p: &Polygon) -> i64 {
    match p.dim() {
        0 => 0,
        1 => 2 * p.segment_lattice_length().unwrap(),
        _ => p.edge_data().unwrap().iter().map(|e| e.length).sum(),
    }
}

/// Search budgets for the reduction loop.
#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    /// Longest composition tried when no single mutation decreases the
    /// perimeter.
    pub depth: usize,
    /// Maximum number of accepted mutation steps.
    pub step_budget: usize,
    /// Bound on `k` for the candidate degrees inside composition search.
    pub k_max: i64,
    /// Node cap for the composition search.
    pub node_budget: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { depth: 3, step_budget: 64, k_max: 3, node_budget: 2000 }
    }
}

/// Outcome of a reduction run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The Newton polygon shrank to a single lattice point.
    Point,
    /// Reduction is stuck and the stated lattice point takes non-positive
    /// values under every mutable degree of the final polynomial.
    Witness(LatticeVec),
    /// The budgets ran out before either certificate was found.
    BoundExceeded,
}

/// The full record of a reduction: every accepted step and the final verdict.
#[derive(Clone, Debug)]
pub struct MutationTrace {
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl MutationTrace {
    pub fn final_poly<'a>(&'a self, start: &'a LaurentPoly) -> &'a LaurentPoly {
        self.steps.last().map(|s| &s.result).unwrap_or(start)
    }
}

/// Largest `n` with the whole (line-supported) polynomial divisible by the
/// `n`-th power of its direction binomial.
fn segment_divisibility(f: &LaurentPoly, d: LatticeVec) -> Result<i64> {
    let g = LaurentPoly::from_terms([(LatticeVec::ZERO, Rat::one()), (d, Rat::one())]);
    let mut n = 0;
    let mut cur = f.clone();
    loop {
        match crate::laurent::divides_power(&cur, &g, 1)? {
            Some(q) => {
                cur = q;
                n += 1;
            }
            None => return Ok(n),
        }
    }
}

/// Degree whose level sets are the lines parallel to `d`, taking the value
/// `level` on the line through `v0`.
fn line_degree(d: LatticeVec, v0: LatticeVec, level: i64) -> ExtDualVec {
    let c = dv(-d.y, d.x);
    ExtDualVec { c, h: level - c.dot(v0) }
}

/// Candidate degrees for the reduction search on a two-dimensional polygon:
/// all mutable `n·R* − k·s_E` with `n` up to each edge's cap and `k` bounded
/// by the budget.
fn reduction_candidates(
    f: &LaurentPoly,
    k_max: i64,
) -> Result<Vec<crate::laurent::MutableDegree>> {
    let newton = f.newton()?;
    let n_cap = newton.edge_data()?.iter().map(|e| e.length).max().unwrap_or(1);
    Ok(mutable_degrees(f, n_cap, k_max)?.degrees)
}

/// Depth-first search for a composition of mutations with a strict net
/// perimeter decrease; returns the steps when found.  Intermediate
/// polynomials whose perimeter exceeds twice the starting value are pruned —
/// the decreasing compositions all pass through moderate intermediates — and
/// branches are explored most-promising first.
fn find_decreasing_composition(
    f: &LaurentPoly,
    start_perimeter: i64,
    depth: usize,
    k_max: i64,
    nodes: &mut usize,
) -> Result<Option<Vec<TraceStep>>> {
    if depth == 0 || *nodes == 0 {
        return Ok(None);
    }
    if f.newton()?.dim() != 2 {
        return Ok(None);
    }
    let mut branches: Vec<(i64, TraceStep)> = Vec::new();
    for cand in reduction_candidates(f, k_max)? {
        if *nodes == 0 {
            return Ok(None);
        }
        *nodes -= 1;
        let mutated = mutate(f, cand.m, &cand.witness_g)?;
        let n = perimeter(&mutated.newton()?);
        let step =
            TraceStep { m: cand.m, witness_g: cand.witness_g.clone(), result: mutated };
        if n < start_perimeter {
            return Ok(Some(vec![step]));
        }
        if n <= 2 * start_perimeter {
            branches.push((n, step));
        }
    }
    branches.sort_by_key(|(n, _)| *n);
    for (_, step) in branches {
        if let Some(mut rest) =
            find_decreasing_composition(&step.result, start_perimeter, depth - 1, k_max, nodes)?
        {
            let mut steps = vec![step];
            steps.append(&mut rest);
            return Ok(Some(steps));
        }
    }
    Ok(None)
}

/// Greedy perimeter reduction: apply single mutations at the maximal-level
/// edge degrees whenever they strictly decrease the perimeter; when stuck,
/// search compositions up to the depth budget; terminate with the point, a
/// witness lattice point, or a budget verdict.
pub fn reduce(f: &LaurentPoly, budgets: Budgets) -> Result<MutationTrace> {
    if !f.is_normalized()? {
        return Err(Error::NotNormalized);
    }
    let mut current = f.clone();
    let mut steps: Vec<TraceStep> = Vec::new();
    'outer: loop {
        let newton = current.newton()?;
        match newton.dim() {
            0 => return Ok(MutationTrace { steps, outcome: Outcome::Point }),
            1 => {
                let d = newton.segment_direction().unwrap();
                let n = segment_divisibility(&current, d)?;
                if n >= 1 && steps.len() < budgets.step_budget {
                    let m = line_degree(d, newton.vertices()[0], n);
                    let g = canonical_witness(m)?;
                    current = mutate(&current, m, &g)?;
                    steps.push(TraceStep { m, witness_g: g, result: current.clone() });
                    continue;
                }
                // Witness: every lattice point of the segment works, since
                // the only degrees with positive values on the segment would
                // require divisibility by the direction binomial.
                let v = *newton.vertices().iter().min().unwrap();
                return Ok(MutationTrace { steps, outcome: Outcome::Witness(v) });
            }
            _ => {}
        }
        if steps.len() >= budgets.step_budget {
            return Ok(MutationTrace { steps, outcome: Outcome::BoundExceeded });
        }
        let n0 = perimeter(&newton);
        // Phase one: single mutations at the maximal mutable level of each
        // edge, most promising edges first.
        let mut singles: Vec<(i64, usize, ExtDualVec)> = Vec::new();
        for edge in newton.edge_data()? {
            let n_e = crate::laurent::n_e(&current, &edge, None)?;
            if n_e >= 1 {
                let m = n_e * ExtDualVec::GORENSTEIN - edge.s_e;
                singles.push((n_e, edge.index, m));
            }
        }
        singles.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, _, m) in &singles {
            let g = canonical_witness(*m)?;
            let mutated = mutate(&current, *m, &g)?;
            if perimeter(&mutated.newton()?) < n0 {
                current = mutated;
                steps.push(TraceStep { m: *m, witness_g: g, result: current.clone() });
                continue 'outer;
            }
        }
        // Phase two: compositions with a strict net decrease.
        let mut nodes = budgets.node_budget;
        if let Some(found) =
            find_decreasing_composition(&current, n0, budgets.depth, budgets.k_max, &mut nodes)?
        {
            if steps.len() + found.len() > budgets.step_budget {
                return Ok(MutationTrace { steps, outcome: Outcome::BoundExceeded });
            }
            current = found.last().unwrap().result.clone();
            steps.extend(found);
            continue 'outer;
        }
        // Stuck: look for a witness point.
        return match witness_point(&current, None)? {
            Some(v) => Ok(MutationTrace { steps, outcome: Outcome::Witness(v) }),
            None => Ok(MutationTrace { steps, outcome: Outcome::BoundExceeded }),
        };
    }
}

/// A lattice point of the Newton polygon taking non-positive values under
/// every mutable degree of `g`.
///
/// Degrees with non-positive maximum are vacuously mutable and impose no
/// condition; every other mutable degree has the form `n·R* − k·s_E`.  The
/// edge-row divisibility caps the mutable level at `ℓ(E)`, so checking
/// `k ≤ k_cap = max_E ℓ(E)` is complete: for points off the edge line larger
/// `k` only weakens the constraint, and for points on it the `k`-independent
/// level-one divisibility already decides.
pub fn witness_point(g: &LaurentPoly, k_cap: Option<i64>) -> Result<Option<LatticeVec>> {
    let newton = g.newton()?;
    match newton.dim() {
        0 => Ok(Some(newton.vertices()[0])),
        1 => {
            let d = newton.segment_direction().unwrap();
            if segment_divisibility(g, d)? >= 1 {
                Ok(None)
            } else {
                Ok(Some(*newton.vertices().iter().min().unwrap()))
            }
        }
        _ => {
            let edges = newton.edge_data()?;
            let cap = k_cap.unwrap_or_else(|| edges.iter().map(|e| e.length).max().unwrap());
            // n_{E,k}: the largest mutable level per edge and k.
            let mut constraints: Vec<(ExtDualVec, i64, i64)> = Vec::new();
            for edge in &edges {
                for k in 1..=cap {
                    let mut n_ek = 0;
                    for n in 1..=edge.length {
                        let m = n * ExtDualVec::GORENSTEIN - k * edge.s_e;
                        if is_m_mutable(g, m)?.is_some() {
                            n_ek = n;
                        } else {
                            break;
                        }
                    }
                    if n_ek >= 1 {
                        constraints.push((edge.s_e, k, n_ek));
                    }
                }
            }
            for v in newton.lattice_points() {
                let ok = constraints.iter().all(|&(s_e, k, n)| n <= k * s_e.pair(v));
                if ok {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        }
    }
}

/// Verdict of the zero-mutability decision, carrying the replayable trace.
#[derive(Clone, Debug)]
pub enum ZeroMutability {
    Yes(MutationTrace),
    No(MutationTrace),
    Unknown(MutationTrace),
}

impl ZeroMutability {
    pub fn trace(&self) -> &MutationTrace {
        match self {
            ZeroMutability::Yes(t) | ZeroMutability::No(t) | ZeroMutability::Unknown(t) => t,
        }
    }
}

/// Whether the polynomial is mutation equivalent to a single lattice point:
/// yes when the reduction reaches a point, no when it certifies a witness,
/// unknown when the budgets are exhausted.
pub fn is_zero_mutable(f: &LaurentPoly, budgets: Budgets) -> Result<ZeroMutability> {
    let trace = reduce(f, budgets)?;
    Ok(match trace.outcome {
        Outcome::Point => ZeroMutability::Yes(trace),
        Outcome::Witness(_) => ZeroMutability::No(trace),
        Outcome::BoundExceeded => ZeroMutability::Unknown(trace),
    })
}

/// Result of the bounded maximal-mutability decision.
#[derive(Clone, Debug)]
pub struct MaxMutability {
    pub maximal: bool,
    /// When not maximal: an extra mutable degree together with a normalized
    /// polynomial on the same polygon realizing the enlarged set.
    pub certificate: Option<(ExtDualVec, LaurentPoly)>,
    pub n_max: i64,
    pub k_max: i64,
}

/// Linear functional on the unknown coefficients plus a constant part.
#[derive(Clone, Debug)]
struct LinForm {
    coeffs: Vec<Rat>,
    constant: Rat,
}

/// The linear feasibility problem deciding whether a normalized polynomial
/// on a fixed polygon can be mutable at a prescribed set of degrees: one
/// unknown per lattice point, vertex unknowns fixed to one, and one linear
/// equation per vanishing division remainder.
struct FeasibilityProblem {
    polygon: Polygon,
    points: Vec<LatticeVec>,
    unknown_of: HashMap<LatticeVec, usize>,
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
}

impl FeasibilityProblem {
    fn new(polygon: &Polygon) -> FeasibilityProblem {
        let points = polygon.lattice_points();
        let vertices: Vec<LatticeVec> = polygon.vertices().to_vec();
        let mut unknown_of = HashMap::new();
        for &p in &points {
            if !vertices.contains(&p) {
                let next = unknown_of.len();
                unknown_of.insert(p, next);
            }
        }
        FeasibilityProblem {
            polygon: polygon.clone(),
            points,
            unknown_of,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    fn num_unknowns(&self) -> usize {
        self.unknown_of.len()
    }

    fn form_of(&self, p: LatticeVec) -> LinForm {
        let mut coeffs = vec![Rat::zero(); self.num_unknowns()];
        match self.unknown_of.get(&p) {
            Some(&j) => {
                coeffs[j] = Rat::one();
                LinForm { coeffs, constant: Rat::zero() }
            }
            None => LinForm { coeffs, constant: Rat::one() },
        }
    }

    /// Adds the vanishing of the remainder of the level-`i` slice modulo the
    /// `i`-th power of the direction binomial, as `i` linear equations (the
    /// first `i` derivatives of the slice at −1 along the line).
    fn add_divisibility(&mut self, m: ExtDualVec, level: i64) {
        let d = m.pi_m().kernel_direction().unwrap();
        let mut line: Vec<LatticeVec> = self
            .points
            .iter()
            .copied()
            .filter(|&p| m.pair(p) == level)
            .collect();
        if line.is_empty() {
            return;
        }
        let along = dv(d.x, d.y);
        line.sort_by_key(|&p| along.dot(p));
        let base = along.dot(line[0]);
        let step = along.dot(d);
        let positions: Vec<(i64, LinForm)> = line
            .iter()
            .map(|&p| ((along.dot(p) - base) / step, self.form_of(p)))
            .collect();
        for j in 0..level {
            // Σ_t C(t, j) (−1)^(t−j) c_t = 0.
            let mut row = vec![Rat::zero(); self.num_unknowns()];
            let mut cst = Rat::zero();
            for (t, form) in &positions {
                let coeff = binom_rat(*t, j) * sign(t - j);
                for (c, f) in row.iter_mut().zip(&form.coeffs) {
                    *c += &coeff * f;
                }
                cst += &coeff * &form.constant;
            }
            self.rows.push(row);
            self.rhs.push(-cst);
        }
    }

    fn solve(&self) -> Option<LaurentPoly> {
        match solve(self.rows.clone(), self.rhs.clone(), self.num_unknowns()) {
            Solution::Inconsistent => None,
            Solution::Solvable(x) => {
                let mut terms: Vec<(LatticeVec, Rat)> = Vec::new();
                for &p in &self.points {
                    let c = match self.unknown_of.get(&p) {
                        Some(&j) => x[j].clone(),
                        None => Rat::one(),
                    };
                    terms.push((p, c));
                }
                let g = LaurentPoly::from_terms(terms);
                debug_assert_eq!(g.newton().unwrap(), self.polygon);
                Some(g)
            }
        }
    }
}

fn binom_rat(n: i64, k: i64) -> Rat {
    if k < 0 || k > n {
        return Rat::zero();
    }
    let mut acc = Rat::one();
    for j in 0..k {
        acc *= Rat::from_integer((n - j).into());
        acc /= Rat::from_integer((j + 1).into());
    }
    acc
}

fn sign(e: i64) -> Rat {
    if e.rem_euclid(2) == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

/// Decides, within the stated bounds, whether any normalized polynomial on
/// the same Newton polygon is mutable at strictly more degrees: candidates
/// are the geometrically admissible edge degrees missing from the mutable
/// set, and each one is tested by exact linear feasibility.  A feasible
/// candidate yields an explicit certificate polynomial (replayed before
/// being returned).
pub fn is_maximally_mutable(f: &LaurentPoly, n_max: i64, k_max: i64) -> Result<MaxMutability> {
    if !f.is_normalized()? {
        return Err(Error::NotNormalized);
    }
    let newton = f.newton()?;
    if newton.dim() != 2 {
        return Err(Error::DegeneratePolygon);
    }
    let known = mutable_degrees(f, n_max, k_max)?;
    let known_ms: Vec<ExtDualVec> = known.degrees.iter().map(|d| d.m).collect();
    for edge in newton.edge_data()? {
        for n in 1..=n_max {
            for k in 1..=k_max {
                let m = n * ExtDualVec::GORENSTEIN - k * edge.s_e;
                if known_ms.contains(&m) || !polygon_is_m_mutable(&newton, m)? {
                    continue;
                }
                let mut problem = FeasibilityProblem::new(&newton);
                for &deg in known_ms.iter().chain(std::iter::once(&m)) {
                    let hi = newton.max_pair(deg);
                    for level in 1..=hi {
                        problem.add_divisibility(deg, level);
                    }
                }
                if let Some(g) = problem.solve() {
                    // Replay the certificate against the full augmented set.
                    let replay_ok = known_ms
                        .iter()
                        .chain(std::iter::once(&m))
                        .all(|&deg| matches!(is_m_mutable(&g, deg), Ok(Some(_))));
                    if replay_ok {
                        return Ok(MaxMutability {
                            maximal: false,
                            certificate: Some((m, g)),
                            n_max,
                            k_max,
                        });
                    }
                }
            }
        }
    }
    Ok(MaxMutability { maximal: true, certificate: None, n_max, k_max })
}

/// Report of a degree-persistence check along a polygon mutation chain.
#[derive(Clone, Debug)]
pub struct PersistenceReport {
    /// First failure: the number of steps applied before it and the pushed
    /// degree that stopped being realizable.
    pub failure: Option<(usize, ExtDualVec)>,
    pub final_polygon: Polygon,
    pub final_degrees: Vec<ExtDualVec>,
}

/// Pushes a degree set through a sequence of polygon mutations and tests
/// polygon-level mutability of every pushed degree after each step; the
/// first failure is an obstruction witness.
pub fn check_degree_persistence(
    p: &Polygon,
    degrees: &[ExtDualVec],
    steps: &[ExtDualVec],
) -> Result<PersistenceReport> {
    let mut polygon = p.clone();
    let mut ms: Vec<ExtDualVec> = degrees.to_vec();
    let check = |polygon: &Polygon, ms: &[ExtDualVec]| -> Result<Option<ExtDualVec>> {
        for &m in ms {
            if !polygon_is_m_mutable(polygon, m)? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    };
    if let Some(bad) = check(&polygon, &ms)? {
        return Ok(PersistenceReport {
            failure: Some((0, bad)),
            final_polygon: polygon,
            final_degrees: ms,
        });
    }
    for (i, &m) in steps.iter().enumerate() {
        let g = canonical_witness(m)?;
        let q = g.newton()?;
        if !is_deformation_pair(&polygon, m, &q)? {
            return Err(Error::StepFailed {
                index: i,
                source: Box::new(Error::NotDeformationPair { m }),
            });
        }
        polygon = mutate_polygon(&polygon, m, &q)?;
        ms = ms.iter().map(|&r| psi_degree(m, &q, r)).collect();
        if let Some(bad) = check(&polygon, &ms)? {
            return Ok(PersistenceReport {
                failure: Some((i + 1, bad)),
                final_polygon: polygon,
                final_degrees: ms,
            });
        }
    }
    Ok(PersistenceReport { failure: None, final_polygon: polygon, final_degrees: ms })
}

/// Budgets for the bidirectional equivalence search.
#[derive(Clone, Copy, Debug)]
pub struct EquivBudgets {
    pub n_max: i64,
    pub k_max: i64,
    pub max_nodes: usize,
    pub max_depth: usize,
}

impl Default for EquivBudgets {
    fn default() -> Self {
        EquivBudgets { n_max: 6, k_max: 2, max_nodes: 2000, max_depth: 6 }
    }
}

/// One replayable step of an equivalence trace: mutate at `m` with the
/// stated witness, then translate by `translation`.
#[derive(Clone, Debug)]
pub struct EquivStep {
    pub m: ExtDualVec,
    pub witness_g: LaurentPoly,
    pub translation: LatticeVec,
    pub result: LaurentPoly,
}

fn canonical_translate(f: &LaurentPoly) -> (LaurentPoly, LatticeVec) {
    let min = *f.newton().unwrap().vertices().iter().min().unwrap();
    (f.translate(-min), -min)
}

/// Neighbor expansion for the equivalence search: all bounded edge-degree
/// mutations for two-dimensional polygons, the direction divisions for
/// segments.
fn equivalence_neighbors(
    f: &LaurentPoly,
    budgets: EquivBudgets,
) -> Result<Vec<(ExtDualVec, LaurentPoly)>> {
    let newton = f.newton()?;
    match newton.dim() {
        0 => Ok(Vec::new()),
        1 => {
            let d = newton.segment_direction().unwrap();
            let max_n = segment_divisibility(f, d)?;
            let mut out = Vec::new();
            for n in 1..=max_n {
                let m = line_degree(d, newton.vertices()[0], n);
                out.push((m, canonical_witness(m)?));
            }
            Ok(out)
        }
        _ => Ok(reduction_candidates(f, budgets.k_max)?
            .into_iter()
            .filter(|c| c.params.map(|(n, _)| n <= budgets.n_max).unwrap_or(true))
            .map(|c| (c.m, c.witness_g))
            .collect()),
    }
}

#[derive(Clone)]
struct SearchNode {
    parent: Option<LaurentPoly>,
    step: Option<EquivStep>,
    depth: usize,
}

/// Bounded bidirectional breadth-first search for a mutation chain from `f`
/// to `g`, up to translation.  `None` means not found within budgets, which
/// is not a disproof.
pub fn mutation_equivalent(
    f: &LaurentPoly,
    g: &LaurentPoly,
    budgets: EquivBudgets,
) -> Result<Option<Vec<EquivStep>>> {
    if !f.is_normalized()? || !g.is_normalized()? {
        return Err(Error::NotNormalized);
    }
    let (cf, _) = canonical_translate(f);
    let (cg, _) = canonical_translate(g);
    let mut sides: [HashMap<LaurentPoly, SearchNode>; 2] = [HashMap::new(), HashMap::new()];
    sides[0].insert(cf.clone(), SearchNode { parent: None, step: None, depth: 0 });
    sides[1].insert(cg.clone(), SearchNode { parent: None, step: None, depth: 0 });
    let mut frontiers: [Vec<LaurentPoly>; 2] = [vec![cf.clone()], vec![cg.clone()]];
    let mut meet: Option<LaurentPoly> = if cf == cg { Some(cf.clone()) } else { None };
    let mut nodes = 2usize;
    let mut depth = 0usize;
    while meet.is_none() && depth < budgets.max_depth && nodes < budgets.max_nodes {
        // Expand the smaller frontier.
        let side = if frontiers[0].len() <= frontiers[1].len() { 0 } else { 1 };
        if frontiers[side].is_empty() {
            break;
        }
        let mut next: Vec<LaurentPoly> = Vec::new();
        for node in std::mem::take(&mut frontiers[side]) {
            let node_depth = sides[side][&node].depth;
            for (m, w) in equivalence_neighbors(&node, budgets)? {
                let raw = mutate(&node, m, &w)?;
                let (canon, tr) = canonical_translate(&raw);
                if sides[side].contains_key(&canon) {
                    continue;
                }
                let step = EquivStep {
                    m,
                    witness_g: w,
                    translation: tr,
                    result: canon.clone(),
                };
                sides[side].insert(
                    canon.clone(),
                    SearchNode { parent: Some(node.clone()), step: Some(step), depth: node_depth + 1 },
                );
                nodes += 1;
                if sides[1 - side].contains_key(&canon) {
                    meet = Some(canon);
                    break;
                }
                next.push(canon);
                if nodes >= budgets.max_nodes {
                    break;
                }
            }
            if meet.is_some() || nodes >= budgets.max_nodes {
                break;
            }
        }
        frontiers[side] = next;
        depth += 1;
    }
    let Some(meet) = meet else { return Ok(None) };
    // Forward half: from f to the meeting node.
    let mut forward: Vec<EquivStep> = Vec::new();
    let mut cursor = meet.clone();
    while let Some(node) = sides[0].get(&cursor) {
        match (&node.parent, &node.step) {
            (Some(p), Some(s)) => {
                forward.push(s.clone());
                cursor = p.clone();
            }
            _ => break,
        }
    }
    forward.reverse();
    // Backward half: invert the steps recorded from the g side.
    let mut backward: Vec<EquivStep> = Vec::new();
    let mut cursor = meet;
    while let Some(node) = sides[1].get(&cursor).cloned() {
        match (node.parent, node.step) {
            (Some(p), Some(s)) => {
                // cursor = translate(mut_m(parent), tr); invert on cursor.
                let m_inv = ExtDualVec {
                    c: -s.m.pi_m(),
                    h: -s.m.pi_z() + s.m.pi_m().dot(s.translation),
                };
                backward.push(EquivStep {
                    m: m_inv,
                    witness_g: s.witness_g.clone(),
                    translation: -s.translation,
                    result: p.clone(),
                });
                cursor = p;
            }
            _ => break,
        }
    }
    forward.extend(backward);
    Ok(Some(forward))
}

/// Replays an equivalence trace from `f`, returning the final polynomial.
pub fn replay_equivalence(f: &LaurentPoly, steps: &[EquivStep]) -> Result<LaurentPoly> {
    let (mut current, _) = canonical_translate(f);
    for (index, s) in steps.iter().enumerate() {
        let mutated = mutate(&current, s.m, &s.witness_g)
            .map_err(|e| Error::StepFailed { index, source: Box::new(e) })?;
        current = mutated.translate(s.translation);
        if current != s.result {
            return Err(Error::StepFailed {
                index,
                source: Box::new(Error::InvalidArgument("trace result mismatch".into())),
            });
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ext, lv};

    fn p45_binomial() -> LaurentPoly {
        // (1+y)⁵ + 4x(1+y)³ + 6x²(1+y)² + 4x³(1+y) + x⁴.
        let y = LaurentPoly::from_int_terms([(0, 0, 1), (0, 1, 1)]);
        let coeffs = [1i64, 4, 6, 4, 1];
        let powers = [5u32, 3, 2, 1, 0];
        let mut acc = LaurentPoly::zero();
        for j in 0..5 {
            let c = LaurentPoly::from_int_terms([(j as i64, 0, coeffs[j])]);
            acc = &acc + &(&c * &y.pow(powers[j]));
        }
        acc
    }

    fn quintic_triangle_poly() -> LaurentPoly {
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
    fn perimeter_goldens() {
        let p = Polygon::from_vertices(vec![lv(0, 0), lv(4, 0), lv(0, 5)]).unwrap();
        assert_eq!(perimeter(&p), 10);
        assert_eq!(perimeter(&Polygon::point(lv(3, 3))), 0);
        let q = Polygon::from_vertices(vec![lv(0, 0), lv(1, 0), lv(2, 5), lv(0, 5)]).unwrap();
        assert_eq!(perimeter(&q), 9);
        let seg = Polygon::segment(lv(0, 0), lv(0, 3)).unwrap();
        assert_eq!(perimeter(&seg), 6);
    }

    #[test]
    fn reduction_of_the_fully_divisible_polynomial() {
        let trace = reduce(&p45_binomial(), Budgets::default()).unwrap();
        assert_eq!(trace.outcome, Outcome::Point);
        // Replay: every step applies to the previous polynomial.
        let mut current = p45_binomial();
        for s in &trace.steps {
            current = mutate(&current, s.m, &s.witness_g).unwrap();
            assert_eq!(&current, &s.result);
        }
        assert!(current.newton().unwrap().is_point());
    }

    #[test]
    fn reduction_of_the_constant() {
        let trace = reduce(&LaurentPoly::one(), Budgets::default()).unwrap();
        assert_eq!(trace.outcome, Outcome::Point);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn witness_for_the_quintic_triangle() {
        let f = quintic_triangle_poly();
        let trace = reduce(&f, Budgets::default()).unwrap();
        assert_eq!(trace.outcome, Outcome::Witness(lv(1, 1)));
        match is_zero_mutable(&f, Budgets::default()).unwrap() {
            ZeroMutability::No(_) => {}
            other => panic!("expected a negative verdict, got {other:?}"),
        }
    }

    #[test]
    fn witness_point_goldens() {
        // The reduced quadrilateral endpoint of the quintic-triangle chain.
        let f2 = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 1),
            (0, 1, 1),
            (1, 1, -12),
            (1, 2, 1),
            (1, 3, 2),
            (2, 5, 1),
        ]);
        assert_eq!(witness_point(&f2, None).unwrap(), Some(lv(1, 1)));
        assert_eq!(
            witness_point(&LaurentPoly::one(), None).unwrap(),
            Some(lv(0, 0))
        );
        // A fully divisible polynomial has no witness.
        assert_eq!(witness_point(&p45_binomial(), None).unwrap(), None);
    }

    #[test]
    fn maximal_mutability_of_the_quintic_triangle() {
        let f = quintic_triangle_poly();
        let result = is_maximally_mutable(&f, 5, 3).unwrap();
        assert!(result.maximal);
    }

    #[test]
    fn broken_coefficient_is_not_maximal() {
        // Start from the fully divisible polynomial and damage one
        // non-vertex coefficient.
        let good = p45_binomial();
        let mut terms: Vec<(LatticeVec, Rat)> =
            good.terms().map(|(v, c)| (*v, c.clone())).collect();
        for t in &mut terms {
            if t.0 == lv(1, 1) {
                t.1 += Rat::one();
            }
        }
        let broken = LaurentPoly::from_terms(terms);
        let result = is_maximally_mutable(&broken, 4, 2).unwrap();
        assert!(!result.maximal);
        let (m, g) = result.certificate.unwrap();
        assert!(is_m_mutable(&g, m).unwrap().is_some());
        assert!(is_m_mutable(&broken, m).unwrap().is_none());
    }

    #[test]
    fn unimodular_triangle_is_maximal() {
        let f = LaurentPoly::from_int_terms([(0, 0, 1), (1, 0, 1), (0, 1, 1)]);
        let result = is_maximally_mutable(&f, 3, 2).unwrap();
        assert!(result.maximal);
    }

    #[test]
    fn persistence_along_the_quintic_chain() {
        let f = quintic_triangle_poly();
        let p = f.newton().unwrap();
        let degrees = vec![ext(0, -1, 3), ext(-2, 0, 4)];
        let report = check_degree_persistence(&p, &degrees, &[ext(0, -1, 3)]).unwrap();
        assert!(report.failure.is_none());
        // An unrealizable degree fails immediately.
        let report = check_degree_persistence(&p, &[ext(0, -1, 5)], &[]).unwrap();
        assert_eq!(report.failure, Some((0, ext(0, -1, 5))));
    }

    #[test]
    fn equivalence_of_the_two_step_chain() {
        let f = LaurentPoly::from_int_terms([
            (0, 0, 1),
            (1, 0, 3),
            (2, 0, 3),
            (3, 0, 1),
            (0, 1, 2),
            (1, 1, 2),
            (0, 2, 1),
        ]);
        let g = LaurentPoly::from_int_terms([
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
        let trace = mutation_equivalent(&f, &g, EquivBudgets::default()).unwrap().unwrap();
        let end = replay_equivalence(&f, &trace).unwrap();
        assert_eq!(end, canonical_translate(&g).0);
        // Self equivalence is the empty trace.
        let trace = mutation_equivalent(&f, &f, EquivBudgets::default()).unwrap().unwrap();
        assert!(trace.is_empty());
    }
}
