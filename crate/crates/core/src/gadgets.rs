//! Hardness gadgets: constraint systems of averages, minima and difference
//! bounds turned into tropical dependence instances, and 0/1 matrices turned
//! into semimodules on complete graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use indexmap::IndexMap;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::game::{
    decide_sign, find_partial_super, GameCertificate, GameError, MaxAction, MinAction, SignDecision, SignOptions,
    StochGame,
};
use crate::graph::{EdgeId, EdgeSpec, GraphError, GraphSpec, MetricGraph, PointRef, VertexId};
use crate::pl::{min_attained_twice, EdgeProfile, FunctionError, TropFunction};
use crate::rational::{int, ratio, Rational};
use crate::semimodule::{EvalMatrix, Semimodule, SemimoduleError};

/// A system in `n` real variables (indices are 0-based):
/// `c_i ≥ (c_j + c_k)/2` for `(i, j, k)` in `avg`,
/// `c_i ≥ min(c_j, c_k)` for `(i, j, k)` in `min`,
/// `c_i ≥ a_ij + c_j` for every ordered pair `i ≠ j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    pub n: usize,
    pub avg: Vec<[usize; 3]>,
    pub min: Vec<[usize; 3]>,
    pub a: BTreeMap<(usize, usize), i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CspIssue {
    TooFewVariables(usize),
    BadTriple {
        kind: &'static str,
        triple: [usize; 3],
    },
    DuplicateTriple {
        kind: &'static str,
        triple: [usize; 3],
    },
    MissingPair(usize, usize),
    ExtraPair(usize, usize),
    /// `a_ij + a_ji > 0`: trivially unsatisfiable.
    PositiveCycle {
        i: usize,
        j: usize,
        sum: i64,
    },
}

impl std::fmt::Display for CspIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let one = |t: &[usize; 3]| format!("({}, {}, {})", t[0] + 1, t[1] + 1, t[2] + 1);
        match self {
            CspIssue::TooFewVariables(n) => write!(f, "need at least 2 variables, got {n}"),
            CspIssue::BadTriple { kind, triple } => {
                write!(f, "{kind} triple {} needs distinct entries with j < k", one(triple))
            }
            CspIssue::DuplicateTriple { kind, triple } => {
                write!(f, "{kind} triple {} repeated", one(triple))
            }
            CspIssue::MissingPair(i, j) => write!(f, "a[{},{}] missing", i + 1, j + 1),
            CspIssue::ExtraPair(i, j) => {
                write!(f, "a[{},{}] is not an ordered pair of distinct variables", i + 1, j + 1)
            }
            CspIssue::PositiveCycle { i, j, sum } => {
                write!(f, "a[{},{}] + a[{},{}] = {sum} > 0", i + 1, j + 1, j + 1, i + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("invalid constraint system: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidCsp(Vec<CspIssue>),
    #[error("matrix entry ({row}, {col}) is not 0 or 1")]
    NotBinary { row: usize, col: usize },
    #[error("matrix needs at least 2 rows and 1 column")]
    MatrixTooSmall,
    #[error("matrix rows have different lengths")]
    Ragged,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Invariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Semimodule(#[from] SemimoduleError),
    #[error(transparent)]
    Game(#[from] GameError),
}

pub fn validate_csp(csp: &CspInstance) -> Vec<CspIssue> {
    let mut issues = Vec::new();
    let n = csp.n;
    if n < 2 {
        issues.push(CspIssue::TooFewVariables(n));
    }
    for (kind, triples) in [("avg", &csp.avg), ("min", &csp.min)] {
        let mut seen = BTreeSet::new();
        for t in triples {
            let [i, j, k] = *t;
            if i >= n || j >= n || k >= n || i == j || i == k || j >= k {
                issues.push(CspIssue::BadTriple { kind, triple: *t });
            }
            if !seen.insert(*t) {
                issues.push(CspIssue::DuplicateTriple { kind, triple: *t });
            }
        }
    }
    for &(i, j) in csp.a.keys() {
        if i >= n || j >= n || i == j {
            issues.push(CspIssue::ExtraPair(i, j));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            match (csp.a.get(&(i, j)), csp.a.get(&(j, i))) {
                (None, _) => issues.push(CspIssue::MissingPair(i, j)),
                (Some(x), Some(y)) if i < j && x + y > 0 => issues.push(CspIssue::PositiveCycle { i, j, sum: x + y }),
                _ => {}
            }
        }
    }
    issues
}

fn require_valid(csp: &CspInstance) -> Result<(), GadgetError> {
    let issues = validate_csp(csp);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(GadgetError::InvalidCsp(issues))
    }
}

impl CspInstance {
    /// `M = −min a_ij + 1`.
    pub fn big_m(&self) -> i64 {
        -self.a.values().copied().min().unwrap_or(0) + 1
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.a.keys().copied().collect()
    }
}

/// Checks every constraint by substitution.
pub fn feasible_witness_check(csp: &CspInstance, c: &[Rational]) -> bool {
    if c.len() != csp.n {
        return false;
    }
    let two = int(2);
    csp.avg.iter().all(|&[i, j, k]| c[i] >= (&c[j] + &c[k]) / &two)
        && csp.min.iter().all(|&[i, j, k]| c[i] >= std::cmp::min(&c[j], &c[k]).clone())
        && csp.a.iter().all(|(&(i, j), &a)| c[i] >= int(a) + &c[j])
}

/// The operator `G(c)_i = max` of the right-hand sides of the constraints
/// with head `i`, as a game: MAX picks a constraint, MIN picks a branch of a
/// `min` constraint.
pub fn constraint_game(csp: &CspInstance) -> Result<StochGame, GadgetError> {
    require_valid(csp)?;
    let mut actions: Vec<Vec<MaxAction>> = vec![Vec::new(); csp.n];
    for (&(i, j), &a) in &csp.a {
        actions[i].push(MaxAction {
            label: format!("a{},{}", i + 1, j + 1),
            min_actions: vec![MinAction::new("go", int(a), vec![(j, Rational::one())])],
        });
    }
    for &[i, j, k] in &csp.avg {
        actions[i].push(MaxAction {
            label: format!("avg{},{},{}", i + 1, j + 1, k + 1),
            min_actions: vec![MinAction::new("go", Rational::zero(), vec![(j, ratio(1, 2)), (k, ratio(1, 2))])],
        });
    }
    for &[i, j, k] in &csp.min {
        actions[i].push(MaxAction {
            label: format!("min{},{},{}", i + 1, j + 1, k + 1),
            min_actions: vec![
                MinAction::new(format!("to{}", j + 1), Rational::zero(), vec![(j, Rational::one())]),
                MinAction::new(format!("to{}", k + 1), Rational::zero(), vec![(k, Rational::one())]),
            ],
        });
    }
    Ok(StochGame::new((1..=csp.n).map(|i| format!("c{i}")).collect(), actions)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfeasibilityEvidence {
    /// Every mean payoff of the constraint operator is positive.
    Certificate(GameCertificate),
    /// Finite where some mean payoff is positive, `-∞` (`None`) elsewhere.
    Partial(Vec<Option<Rational>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CspVerdict {
    Feasible(Vec<Rational>),
    Infeasible(InfeasibilityEvidence),
    Unresolved { lo: Rational, hi: Rational },
}

/// A system is feasible exactly when `c ≥ G(c)` has a solution, i.e. when no
/// mean payoff of `G` is positive.
pub fn csp_feasibility(csp: &CspInstance, opts: &SignOptions) -> Result<CspVerdict, GadgetError> {
    let game = constraint_game(csp)?;
    match decide_sign(&game, opts) {
        SignDecision::NonPositive(cert) => {
            let c = cert.c().to_vec();
            if !feasible_witness_check(csp, &c) {
                return Err(GadgetError::Invariant("sub-certificate fails the constraints".into()));
            }
            Ok(CspVerdict::Feasible(c))
        }
        SignDecision::Positive(cert) => Ok(CspVerdict::Infeasible(InfeasibilityEvidence::Certificate(cert))),
        SignDecision::Unresolved { lo, hi, .. } => match find_partial_super(&game, opts) {
            Some(c) => Ok(CspVerdict::Infeasible(InfeasibilityEvidence::Partial(c))),
            None => Ok(CspVerdict::Unresolved { lo, hi }),
        },
    }
}

/// Where each function of a gadget family sits in the coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyLayout {
    pub n: usize,
    pub avg: usize,
    pub min: usize,
    pub pairs: usize,
}

impl FamilyLayout {
    pub fn len(&self) -> usize {
        self.n + 2 * self.avg + self.min + self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The disconnected instance: one edge per average constraint, two isolated
/// vertices per min constraint and per ordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedInstance {
    pub graph: Arc<MetricGraph>,
    /// `f_1..f_n`, then `f⁺, f⁻` per average triple, `g` per min triple,
    /// `h` per ordered pair.
    pub functions: Vec<TropFunction>,
    pub names: Vec<String>,
    pub m: i64,
    pub layout: FamilyLayout,
    /// Symbol in the construction to emitted vertex or edge id.
    pub provenance: IndexMap<String, String>,
}

fn tag(t: &[usize]) -> String {
    t.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn csp_to_generalized(csp: &CspInstance) -> Result<GeneralizedInstance, GadgetError> {
    require_valid(csp)?;
    let m = csp.big_m();
    let len = int(2 * m);
    let mut provenance = IndexMap::new();
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for t in &csp.avg {
        let id = format!("E{}", tag(t));
        let (lo, hi) = (format!("{id}-"), format!("{id}+"));
        vertices.push(lo.clone());
        vertices.push(hi.clone());
        edges.push(EdgeSpec::new(id.clone(), lo, hi, len.clone()));
        provenance.insert(format!("E_{{{}}}", tag(t)), id);
    }
    for t in &csp.min {
        for prime in ["", "'"] {
            let id = format!("v{prime}{}", tag(t));
            vertices.push(id.clone());
            provenance.insert(format!("v{prime}_{{{}}}", tag(t)), id);
        }
    }
    let pairs = csp.pairs();
    for &(i, j) in &pairs {
        for prime in ["", "'"] {
            let id = format!("w{prime}{}", tag(&[i, j]));
            vertices.push(id.clone());
            provenance.insert(format!("w{prime}_{{{}}}", tag(&[i, j])), id);
        }
    }
    let basepoint = vertices[0].clone();
    let graph = Arc::new(MetricGraph::from_spec(&GraphSpec { vertices, edges, basepoint })?);
    let v = |name: String| graph.vertex(&name).expect("emitted vertex");
    let mi = int(m);

    let mut functions = Vec::new();
    let mut names = Vec::new();
    for i in 0..csp.n {
        let mut prof = BTreeMap::new();
        for (e, &[h, j, k]) in csp.avg.iter().enumerate() {
            let p = if i == h {
                EdgeProfile::constant(len.clone(), Rational::zero())
            } else if i == j {
                EdgeProfile::affine(len.clone(), -1, mi.clone())
            } else if i == k {
                EdgeProfile::affine(len.clone(), 1, -mi.clone())
            } else {
                continue;
            };
            prof.insert(EdgeId(e), p);
        }
        let mut iso = BTreeMap::new();
        for t in &csp.min {
            if t.contains(&i) {
                iso.insert(v(format!("v{}", tag(t))), Rational::zero());
            }
            if t[1] == i || t[2] == i {
                iso.insert(v(format!("v'{}", tag(t))), Rational::zero());
            }
        }
        for &(p, q) in &pairs {
            if p == i {
                iso.insert(v(format!("w{}", tag(&[p, q]))), Rational::zero());
            }
            if q == i {
                let a = int(csp.a[&(p, q)]);
                iso.insert(v(format!("w{}", tag(&[p, q]))), a.clone());
                iso.insert(v(format!("w'{}", tag(&[p, q]))), a);
            }
        }
        functions.push(TropFunction::new(graph.clone(), prof, iso)?);
        names.push(format!("f{}", i + 1));
    }
    for (e, t) in csp.avg.iter().enumerate() {
        for (sign, slope, start) in [("+", -1, mi.clone()), ("-", 1, -mi.clone())] {
            let prof = BTreeMap::from([(EdgeId(e), EdgeProfile::affine(len.clone(), slope, start))]);
            functions.push(TropFunction::new(graph.clone(), prof, BTreeMap::new())?);
            names.push(format!("f{sign}{}", tag(t)));
        }
    }
    for t in &csp.min {
        let iso = BTreeMap::from([
            (v(format!("v{}", tag(t))), Rational::zero()),
            (v(format!("v'{}", tag(t))), Rational::zero()),
        ]);
        functions.push(TropFunction::new(graph.clone(), BTreeMap::new(), iso)?);
        names.push(format!("g{}", tag(t)));
    }
    for &(i, j) in &pairs {
        let iso = BTreeMap::from([
            (v(format!("w{}", tag(&[i, j]))), Rational::zero()),
            (v(format!("w'{}", tag(&[i, j]))), Rational::zero()),
        ]);
        functions.push(TropFunction::new(graph.clone(), BTreeMap::new(), iso)?);
        names.push(format!("h{}", tag(&[i, j])));
    }
    let layout = FamilyLayout { n: csp.n, avg: csp.avg.len(), min: csp.min.len(), pairs: pairs.len() };
    Ok(GeneralizedInstance { graph, functions, names, m, layout, provenance })
}

/// The connected instance: every pair of vertices not joined by an edge gets
/// a new edge of length 2, functions become `4M` where they were `∞`, and on
/// new edges they follow `min(A + 3M t, B + 3M(2 − t))` in the offset `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletedInstance {
    pub graph: Arc<MetricGraph>,
    pub functions: Vec<TropFunction>,
    pub names: Vec<String>,
    pub m: i64,
    pub layout: FamilyLayout,
    /// Number of edges carried over from the disconnected instance; they keep
    /// their ids and come first.
    pub original_edges: usize,
    pub provenance: IndexMap<String, String>,
}

pub fn complete_instance(gi: &GeneralizedInstance) -> Result<CompletedInstance, GadgetError> {
    let g = &gi.graph;
    let m = gi.m;
    let four_m = int(4 * m);
    let mut spec = g.to_spec();
    let mut joined = BTreeSet::new();
    for e in g.edges() {
        joined.insert((e.ends[0].min(e.ends[1]), e.ends[0].max(e.ends[1])));
    }
    let mut added = Vec::new();
    let n = g.num_vertices();
    for p in 0..n {
        for q in p + 1..n {
            if !joined.contains(&(VertexId(p), VertexId(q))) {
                let id = format!("{}~{}", g.vertex_name(VertexId(p)), g.vertex_name(VertexId(q)));
                spec.edges.push(EdgeSpec::new(id, g.vertex_name(VertexId(p)), g.vertex_name(VertexId(q)), int(2)));
                added.push((VertexId(p), VertexId(q)));
            }
        }
    }
    let graph = Arc::new(MetricGraph::from_spec(&spec)?);
    if !graph.is_connected() {
        return Err(GadgetError::Invariant("completed graph is disconnected".into()));
    }
    let low = int(-m);
    let functions = gi
        .functions
        .iter()
        .map(|f| {
            let at = |v: VertexId| f.vertex_value(v).into_finite().unwrap_or_else(|| four_m.clone());
            let mut profiles = Vec::with_capacity(graph.num_edges());
            for e in g.edge_ids() {
                profiles.push(
                    f.profile(e)
                        .cloned()
                        .unwrap_or_else(|| EdgeProfile::constant(g.edge(e).length.clone(), four_m.clone())),
                );
            }
            for v in g.vertex_ids() {
                let x = at(v);
                if x < low || x > four_m {
                    return Err(GadgetError::Invariant(format!("value {x} outside [-M, 4M]")));
                }
            }
            for &(p, q) in &added {
                profiles.push(tent(&at(p), &at(q), m));
            }
            Ok(TropFunction::total(graph.clone(), profiles, BTreeMap::new())?)
        })
        .collect::<Result<Vec<_>, GadgetError>>()?;
    Ok(CompletedInstance {
        graph,
        functions,
        names: gi.names.clone(),
        m,
        layout: gi.layout.clone(),
        original_edges: g.num_edges(),
        provenance: gi.provenance.clone(),
    })
}

/// `min(A + 3M t, B + 3M(2 − t))` on `[0, 2]`; the two lines cross at
/// `t* = (B − A + 6M) / 6M`, inside the edge whenever `|B − A| < 6M`.
fn tent(a: &Rational, b: &Rational, m: i64) -> EdgeProfile {
    let s = 3 * m;
    let cross = (b - a + int(6 * m)) / int(6 * m);
    EdgeProfile::new(vec![Rational::zero(), cross, int(2)], vec![s, -s], a.clone()).expect("crossing lies inside")
}

/// Coefficients for the gadget families, in the order of [`FamilyLayout`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DVectors {
    pub c: Vec<Rational>,
    /// `(c⁺, c⁻)` per average triple.
    pub c_pm: Vec<(Rational, Rational)>,
    pub d: Vec<Rational>,
    pub d_prime: Vec<Rational>,
}

impl DVectors {
    pub fn flatten(&self) -> Vec<Rational> {
        let mut out = self.c.clone();
        for (p, m) in &self.c_pm {
            out.push(p.clone());
            out.push(m.clone());
        }
        out.extend(self.d.iter().cloned());
        out.extend(self.d_prime.iter().cloned());
        out
    }

    fn check_layout(&self, layout: &FamilyLayout) -> Result<(), GadgetError> {
        for (expected, got) in [
            (layout.n, self.c.len()),
            (layout.avg, self.c_pm.len()),
            (layout.min, self.d.len()),
            (layout.pairs, self.d_prime.len()),
        ] {
            if expected != got {
                return Err(GadgetError::LengthMismatch { expected, got });
            }
        }
        Ok(())
    }
}

/// Builds coefficient vectors from a solution `c`: `c⁺ = c_j`, `c⁻ = c_k`,
/// `d = min(c_j, c_k)`, `d′ = a_ij + c_j`, after translating so that
/// `min c = 0`. The result is checked to lie in the boxes
/// `c, c±, d ∈ [0, M]`, `d′ ∈ [−M, M]`.
pub fn witness_vectors(csp: &CspInstance, c: &[Rational]) -> Result<DVectors, GadgetError> {
    if c.len() != csp.n {
        return Err(GadgetError::LengthMismatch { expected: csp.n, got: c.len() });
    }
    if !feasible_witness_check(csp, c) {
        return Err(GadgetError::Invariant("vector does not satisfy the constraints".into()));
    }
    let shift = c.iter().min().expect("n ≥ 2").clone();
    let c: Vec<Rational> = c.iter().map(|x| x - &shift).collect();
    let out = DVectors {
        c_pm: csp.avg.iter().map(|&[_, j, k]| (c[j].clone(), c[k].clone())).collect(),
        d: csp.min.iter().map(|&[_, j, k]| std::cmp::min(&c[j], &c[k]).clone()).collect(),
        d_prime: csp.a.iter().map(|(&(_, j), &a)| int(a) + &c[j]).collect(),
        c,
    };
    let m = int(csp.big_m());
    let unit = |x: &Rational| !x.is_zero() && x < &Rational::zero() || x > &m;
    if out.c.iter().any(unit) || out.c_pm.iter().any(|(p, q)| unit(p) || unit(q)) || out.d.iter().any(unit) {
        return Err(GadgetError::Invariant("coefficient outside [0, M]".into()));
    }
    if out.d_prime.iter().any(|x| x < &-m.clone() || x > &m) {
        return Err(GadgetError::Invariant("coefficient outside [-M, M]".into()));
    }
    Ok(out)
}

/// Whether the minimum of the gadget family plus coefficients is attained at
/// least twice at every point.
pub fn property_d_check(functions: &[TropFunction], layout: &FamilyLayout, v: &DVectors) -> Result<bool, GadgetError> {
    v.check_layout(layout)?;
    if functions.len() != layout.len() {
        return Err(GadgetError::LengthMismatch { expected: layout.len(), got: functions.len() });
    }
    Ok(min_attained_twice(functions, &v.flatten())?.is_ok())
}

/// Semimodule of a 0/1 matrix on the complete graph with edges of length 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGadget {
    pub semimodule: Semimodule,
    /// Midpoint of the edge between `v_i` and `v_s`, for `i < s`.
    pub midpoints: Vec<((usize, usize), PointRef)>,
    /// Evaluation at the vertices followed by the midpoints.
    pub b: EvalMatrix,
}

/// `f_j(v_i) = A_ij`, `f_j(w_is) = min(A_ij, A_sj)`, linear in between.
pub fn matrix_gadget(a: &[Vec<u8>]) -> Result<MatrixGadget, GadgetError> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m < 2 || n == 0 {
        return Err(GadgetError::MatrixTooSmall);
    }
    for (r, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(GadgetError::Ragged);
        }
        if let Some(c) = row.iter().position(|&x| x > 1) {
            return Err(GadgetError::NotBinary { row: r, col: c });
        }
    }
    let vertices: Vec<String> = (1..=m).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    let mut ends = Vec::new();
    for i in 0..m {
        for s in i + 1..m {
            edges.push(EdgeSpec::new(format!("e{},{}", i + 1, s + 1), &vertices[i], &vertices[s], int(2)));
            ends.push((i, s));
        }
    }
    let graph = Arc::new(MetricGraph::from_spec(&GraphSpec { vertices, edges, basepoint: "v1".into() })?);
    let generators = (0..n)
        .map(|j| {
            let profiles = ends
                .iter()
                .map(|&(i, s)| {
                    let (x, y) = (i64::from(a[i][j]), i64::from(a[s][j]));
                    let w = x.min(y);
                    EdgeProfile::new(vec![int(0), int(1), int(2)], vec![w - x, y - w], int(x)).expect("valid profile")
                })
                .collect();
            TropFunction::total(graph.clone(), profiles, BTreeMap::new())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let semimodule = Semimodule::new(generators)?;
    let midpoints: Vec<((usize, usize), PointRef)> = ends
        .iter()
        .enumerate()
        .map(|(e, &pair)| (pair, PointRef::Interior { edge: EdgeId(e), offset: int(1) }))
        .collect();
    let mut points: Vec<PointRef> = graph.vertex_ids().map(PointRef::Vertex).collect();
    points.extend(midpoints.iter().map(|(_, p)| p.clone()));
    let b = semimodule.evaluation_matrix(&points)?;
    Ok(MatrixGadget { semimodule, midpoints, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::independence::{dss_matrix_rank, troprank, RankBudget, RankValue};
    use crate::rational::Trop;

    pub(crate) fn csp(
        n: usize,
        avg: &[[usize; 3]],
        min: &[[usize; 3]],
        a: impl Fn(usize, usize) -> i64,
    ) -> CspInstance {
        let mut map = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    map.insert((i, j), a(i, j));
                }
            }
        }
        CspInstance { n, avg: avg.to_vec(), min: min.to_vec(), a: map }
    }

    /// `c_1 ≥ (c_2 + c_3)/2` with `c_2, c_3 ≥ c_1 + 1`.
    fn infeasible() -> CspInstance {
        csp(3, &[[0, 1, 2]], &[], |i, j| match (i, j) {
            (1, 0) | (2, 0) => 1,
            (0, 1) | (0, 2) => -1,
            _ => -10,
        })
    }

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_csp(&csp(2, &[], &[], |_, _| 0)).is_empty());
        let bad = csp(2, &[], &[], |_, _| 1);
        assert!(matches!(validate_csp(&bad)[..], [CspIssue::PositiveCycle { .. }]));
        let repeated = csp(3, &[[0, 1, 1]], &[], |_, _| 0);
        assert!(matches!(validate_csp(&repeated)[..], [CspIssue::BadTriple { .. }]));
        let mut missing = csp(2, &[], &[], |_, _| 0);
        missing.a.remove(&(0, 1));
        assert_eq!(validate_csp(&missing), vec![CspIssue::MissingPair(0, 1)]);
    }

    #[test]
    fn witness_examples() {
        assert!(feasible_witness_check(&csp(3, &[], &[], |_, _| 0), &ints(&[4, 4, 4])));
        let one = csp(3, &[[0, 1, 2]], &[], |_, _| -5);
        assert!(feasible_witness_check(&one, &ints(&[0, 1, -1])));
        assert!(!feasible_witness_check(&one, &ints(&[0, 1, 1])));
        let inf = infeasible();
        // c_1 ≥ ((1 + c_1) + (1 + c_1))/2 = c_1 + 1 fails on a grid
        for x in -3..=3 {
            for y in -3..=3 {
                assert!(!feasible_witness_check(&inf, &ints(&[0, x, y])));
            }
        }
    }

    #[test]
    fn feasibility_examples() {
        let opts = SignOptions::default();
        match csp_feasibility(&csp(3, &[], &[], |_, _| 0), &opts).unwrap() {
            CspVerdict::Feasible(c) => assert!(c.iter().all(|x| x == &c[0])),
            other => panic!("{other:?}"),
        }
        assert!(matches!(csp_feasibility(&infeasible(), &opts).unwrap(), CspVerdict::Infeasible(_)));
        let generous = csp(3, &[], &[[0, 1, 2]], |_, _| -1);
        match csp_feasibility(&generous, &opts).unwrap() {
            CspVerdict::Feasible(c) => assert!(feasible_witness_check(&generous, &c)),
            other => panic!("{other:?}"),
        }
        assert!(csp_feasibility(&csp(2, &[], &[], |_, _| 1), &opts).is_err());
    }

    #[test]
    fn generalized_table() {
        let c = csp(3, &[[0, 1, 2]], &[], |_, _| -1);
        let gi = csp_to_generalized(&c).unwrap();
        assert_eq!(gi.m, 2);
        let e = EdgeId(0);
        assert_eq!(gi.graph.edge(e).length, int(4));
        // chart x = t − M on the edge
        let x = |t: i64| int(t - 2);
        let f = |i: usize, t: i64| gi.functions[i].profile(e).unwrap().value_at(&int(t));
        for t in 0..=4 {
            assert_eq!(f(0, t), int(0));
            assert_eq!(f(1, t), -x(t));
            assert_eq!(f(2, t), x(t));
            assert_eq!(gi.functions[3].profile(e).unwrap().value_at(&int(t)), -x(t));
            assert_eq!(gi.functions[4].profile(e).unwrap().value_at(&int(t)), x(t));
        }
        let w21 = gi.graph.vertex("w2,1").unwrap();
        assert_eq!(gi.functions[0].vertex_value(w21), Trop::Fin(int(-1)));
        assert_eq!(gi.functions[1].vertex_value(w21), Trop::zero());
        assert_eq!(gi.functions[2].vertex_value(w21), Trop::Inf);
        assert_eq!(gi.provenance["E_{1,2,3}"], "E1,2,3");

        let bare = csp_to_generalized(&csp(2, &[], &[], |_, _| 0)).unwrap();
        assert_eq!(bare.graph.num_vertices(), 4);
        assert_eq!(bare.graph.num_edges(), 0);
        let done = complete_instance(&bare).unwrap();
        assert_eq!(done.graph.num_edges(), 6);
        assert!(done.graph.edges().iter().all(|e| e.length == int(2)));
    }

    #[test]
    fn tent_crosses_inside() {
        // φ̄(−1) = 0, φ̄(1) = 8, M = 2: 0 + 6(x + 1) = 8 − 6(x − 1) at x = 2/3
        let p = tent(&int(0), &int(8), 2);
        assert_eq!(p.breaks(), &[int(0), ratio(5, 3), int(2)]);
        assert_eq!(p.value_at(&ratio(5, 3)), int(10));
        assert_eq!(p.value_at(&int(0)), int(0));
        assert_eq!(p.value_at(&int(2)), int(8));
    }

    #[test]
    fn witness_vectors_pass_both_properties() {
        let c = csp(4, &[[0, 1, 2]], &[[3, 0, 1]], |i, j| if i == j + 1 || j == i + 1 { -1 } else { -3 });
        let sol = ints(&[3, 3, 2, 3]);
        assert!(feasible_witness_check(&c, &sol));
        let vs = witness_vectors(&c, &sol).unwrap();
        assert_eq!(vs.c.iter().min().unwrap(), &int(0));
        let gi = csp_to_generalized(&c).unwrap();
        assert!(property_d_check(&gi.functions, &gi.layout, &vs).unwrap());
        let done = complete_instance(&gi).unwrap();
        assert!(property_d_check(&done.functions, &done.layout, &vs).unwrap());
        let mut broken = vs.clone();
        broken.d_prime[0] += int(1);
        assert!(!property_d_check(&gi.functions, &gi.layout, &broken).unwrap());
    }

    #[test]
    fn matrix_gadget_examples() {
        let g = matrix_gadget(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.semimodule.graph().num_edges(), 1);
        let w = g.midpoints[0].1.clone();
        let vals = |j: usize| {
            [PointRef::Vertex(VertexId(0)), w.clone(), PointRef::Vertex(VertexId(1))]
                .iter()
                .map(|p| g.semimodule.generators()[j].evaluate(p).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(vals(0), vec![Trop::zero(), Trop::zero(), Trop::Fin(int(1))]);
        assert_eq!(vals(1), vec![Trop::Fin(int(1)), Trop::zero(), Trop::zero()]);
        assert_eq!(g.b.rows, vec![ints(&[0, 1]), ints(&[1, 0]), ints(&[0, 0])]);
        assert_eq!(dss_matrix_rank(&g.b.to_trop()).unwrap(), 2);
        assert_eq!(troprank(&g.semimodule, &RankBudget::default()).unwrap().value, RankValue::Exact(2));

        let zeros = matrix_gadget(&[vec![0, 0], vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(troprank(&zeros.semimodule, &RankBudget::default()).unwrap().value, RankValue::Exact(1));
        assert!(matches!(matrix_gadget(&[vec![0, 2], vec![1, 0]]), Err(GadgetError::NotBinary { row: 0, col: 1 })));
        assert!(matches!(matrix_gadget(&[vec![0]]), Err(GadgetError::MatrixTooSmall)));
    }
}
