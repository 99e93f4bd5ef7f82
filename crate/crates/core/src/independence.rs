//! Tropical linear independence of rational functions, decided through a
//! stochastic mean-payoff game, and tropical ranks of matrices and
//! semimodules.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{
    decide_sign, escape_rate_bounds, GameCertificate, GameError, MaxAction, MinAction, SignDecision, SignOptions,
    StochGame,
};
use crate::graph::{EdgeId, PointRef, VertexId};
use crate::par;
use crate::pl::{common_refinement, min_attained_twice, FunctionError, Line, TropFunction};
use crate::rational::{int, Rational, Trop};
use crate::semimodule::{EvalMatrix, Semimodule};

/// Largest family for which all permutations are enumerated.
pub const PERMUTATION_CAP: usize = 9;
/// Largest `min(rows, cols)` accepted by [`dss_matrix_rank`].
pub const DSS_CAP: usize = 8;
/// Largest number of square minors examined at a single size.
pub const DSS_WORK_CAP: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndependenceError {
    #[error("no terms")]
    EmptyTerms,
    #[error("interval [{u}, {v}] is empty")]
    EmptyInterval { u: Rational, v: Rational },
    #[error("need at least two functions")]
    TooFewFunctions,
    #[error("function {0} is not finite everywhere")]
    NotTotal(usize),
    #[error("the graph is disconnected")]
    Disconnected,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{0} is too large for exact enumeration")]
    TooLarge(String),
    #[error("matrix rows have different lengths")]
    Ragged,
    #[error("internal consistency check failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Which bound attains the minimum in the closed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Achiever {
    /// A nonincreasing term evaluated at the left endpoint.
    Left(usize),
    /// A nondecreasing term evaluated at the right endpoint.
    Right(usize),
    /// The crossing of an increasing term `up` and a decreasing term `down`.
    Crossing { up: usize, down: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupMinResult {
    pub value: Rational,
    pub argmax: Rational,
    pub achieving: Achiever,
}

fn envelope_at(terms: &[(Rational, Rational)], x: &Rational) -> Rational {
    terms.iter().map(|(g, d)| g * x + d).min().expect("nonempty")
}

fn clamp(x: Rational, u: &Rational, v: &Rational) -> Rational {
    x.clamp(u.clone(), v.clone())
}

/// `sup_{x∈[u,v]} min_j (γ_j x + d_j)` in closed form: the least of the
/// nonincreasing terms at `u`, the nondecreasing terms at `v`, and the
/// crossing values `π_j d_j + π_k d_k` of every increasing/decreasing pair.
/// Terms with `γ = 0` count on both sides.
pub fn sup_min_on_interval(
    terms: &[(Rational, Rational)],
    u: &Rational,
    v: &Rational,
) -> Result<SupMinResult, IndependenceError> {
    if terms.is_empty() {
        return Err(IndependenceError::EmptyTerms);
    }
    if u > v {
        return Err(IndependenceError::EmptyInterval { u: u.clone(), v: v.clone() });
    }
    let mut cands: Vec<(Rational, Rational, Achiever)> = Vec::new();
    for (j, (g, d)) in terms.iter().enumerate() {
        if !g.is_positive() {
            cands.push((g * u + d, u.clone(), Achiever::Left(j)));
        }
        if !g.is_negative() {
            cands.push((g * v + d, v.clone(), Achiever::Right(j)));
        }
    }
    for (j, (gj, dj)) in terms.iter().enumerate() {
        if gj.is_negative() {
            continue;
        }
        for (k, (gk, dk)) in terms.iter().enumerate() {
            if gk.is_positive() || gj <= gk {
                continue;
            }
            let span = gj - gk;
            let value = (-gk * dj + gj * dk) / &span;
            let x = clamp((dk - dj) / &span, u, v);
            cands.push((value, x, Achiever::Crossing { up: j, down: k }));
        }
    }
    let value = cands.iter().map(|c| &c.0).min().expect("nonempty").clone();
    let rank = |a: &Achiever| match a {
        Achiever::Crossing { .. } => 0,
        Achiever::Left(_) => 1,
        Achiever::Right(_) => 2,
    };
    let mut achieving: Vec<&(Rational, Rational, Achiever)> = cands.iter().filter(|c| c.0 == value).collect();
    achieving.sort_by_key(|c| rank(&c.2));
    for (_, x, a) in achieving {
        if envelope_at(terms, x) == value {
            return Ok(SupMinResult { value, argmax: x.clone(), achieving: a.clone() });
        }
    }
    Err(IndependenceError::Construction("closed form has no attaining abscissa".into()))
}

/// Maximum of the lower envelope found by scanning the endpoints and every
/// pairwise crossing inside the interval.
pub fn sup_min_by_scan(terms: &[(Rational, Rational)], u: &Rational, v: &Rational) -> (Rational, Rational) {
    let mut xs = vec![u.clone(), v.clone()];
    for (a, (ga, da)) in terms.iter().enumerate() {
        for (gb, db) in &terms[a + 1..] {
            if ga != gb {
                let x = (db - da) / (ga - gb);
                if &x > u && &x < v {
                    xs.push(x);
                }
            }
        }
    }
    xs.into_iter().map(|x| (envelope_at(terms, &x), x)).max_by(|a, b| a.0.cmp(&b.0)).expect("nonempty")
}

/// A piece of the common refinement, seen as a MAX action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Site {
    Edge { edge: EdgeId, from: Rational, to: Rational },
    Vertex(VertexId),
}

impl Site {
    fn interval(&self) -> (Rational, Rational) {
        match self {
            Site::Edge { from, to, .. } => (from.clone(), to.clone()),
            Site::Vertex(_) => (Rational::zero(), Rational::zero()),
        }
    }
}

/// The game built from a family together with what each action stands for.
#[derive(Debug, Clone)]
pub struct GameConstruction {
    pub game: StochGame,
    pub sites: Vec<Site>,
    /// `lines[α][j]` is `f_j` on site `α`, in the edge offset.
    pub lines: Vec<Vec<Line>>,
    /// `witnesses[i][α][β]`: where MIN action `β` is evaluated.
    pub witnesses: Vec<Vec<Vec<Achiever>>>,
}

impl GameConstruction {
    /// Terms `(γ_j, d_j)` of state `i` on site `α` for the coefficient vector
    /// `c`, indexed by `j ≠ i`.
    fn terms(&self, i: usize, alpha: usize, c: &[Rational]) -> (Vec<usize>, Vec<(Rational, Rational)>) {
        terms_of(&self.lines[alpha], i, c)
    }

    fn check(&self, c: &[Rational]) -> Result<(), IndependenceError> {
        for i in 0..self.game.num_states() {
            for (alpha, act) in self.game.actions(i).iter().enumerate() {
                let by_actions = act.min_actions.iter().map(|b| b.value(c)).min().expect("nonempty");
                let (_, terms) = self.terms(i, alpha, c);
                let (u, v) = self.sites[alpha].interval();
                let (direct, _) = sup_min_by_scan(&terms, &u, &v);
                if by_actions != direct {
                    return Err(IndependenceError::Construction(format!(
                        "state {i}, action {}: {by_actions} != {direct}",
                        act.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Points `x_i` at which `f_i + c_i` is the unique minimum, for a vector
    /// `c` with `T(c) > c`.
    pub fn witness_points(&self, fs: &[TropFunction], c: &[Rational]) -> Result<Vec<PointRef>, IndependenceError> {
        let n = self.game.num_states();
        if c.len() != n {
            return Err(IndependenceError::LengthMismatch { expected: n, got: c.len() });
        }
        let graph = fs[0].graph().clone();
        (0..n)
            .map(|i| {
                let mut best: Option<(Rational, usize, Rational)> = None;
                for alpha in 0..self.sites.len() {
                    let (_, terms) = self.terms(i, alpha, c);
                    let (u, v) = self.sites[alpha].interval();
                    let r = sup_min_on_interval(&terms, &u, &v)?;
                    if best.as_ref().map_or(true, |b| r.value > b.0) {
                        best = Some((r.value, alpha, r.argmax));
                    }
                }
                let (value, alpha, x) = best.expect("at least one site");
                if value <= c[i] {
                    return Err(IndependenceError::Construction(format!("T_{i}(c) ≤ c_{i}")));
                }
                let p = match &self.sites[alpha] {
                    Site::Edge { edge, .. } => graph.canonical_point(*edge, &x).map_err(FunctionError::from)?,
                    Site::Vertex(v) => PointRef::Vertex(*v),
                };
                if unique_minimizer(fs, c, &p)? != Some(i) {
                    return Err(IndependenceError::Construction(format!("minimum at witness {i} is not unique")));
                }
                Ok(p)
            })
            .collect()
    }
}

fn terms_of(ls: &[Line], i: usize, c: &[Rational]) -> (Vec<usize>, Vec<(Rational, Rational)>) {
    let others: Vec<usize> = (0..ls.len()).filter(|&j| j != i).collect();
    let terms =
        others.iter().map(|&j| (int(ls[j].slope - ls[i].slope), &ls[j].intercept - &ls[i].intercept + &c[j])).collect();
    (others, terms)
}

/// The index attaining `min_j (f_j(x) + c_j)`, if it is attained only once.
pub fn unique_minimizer(fs: &[TropFunction], c: &[Rational], x: &PointRef) -> Result<Option<usize>, IndependenceError> {
    let vals: Vec<Trop> =
        fs.iter().zip(c).map(|(f, ci)| f.evaluate(x).map(|v| v.add_rational(ci))).collect::<Result<_, _>>()?;
    let m = vals.iter().min().expect("nonempty");
    if !m.is_finite() {
        return Ok(None);
    }
    let hits: Vec<usize> = (0..vals.len()).filter(|&j| &vals[j] == m).collect();
    Ok(if hits.len() == 1 { Some(hits[0]) } else { None })
}

fn check_family(fs: &[TropFunction]) -> Result<(), IndependenceError> {
    if fs.len() < 2 {
        return Err(IndependenceError::TooFewFunctions);
    }
    for (i, f) in fs.iter().enumerate() {
        if !f.same_graph(&fs[0]) {
            return Err(FunctionError::GraphMismatch.into());
        }
        if !f.is_total() {
            return Err(IndependenceError::NotTotal(i));
        }
    }
    if !fs[0].graph().is_connected() {
        return Err(IndependenceError::Disconnected);
    }
    Ok(())
}

/// Builds the game whose Shapley operator is
/// `T_i(c) = sup_x min_{j≠i} (f_j(x) − f_i(x) + c_j)`.
///
/// MAX picks a piece of the common refinement; MIN picks one of the bounds of
/// the closed form for that piece. The construction is checked against a
/// direct envelope scan at a few fixed vectors before it is returned.
pub fn build_game(fs: &[TropFunction]) -> Result<GameConstruction, IndependenceError> {
    check_family(fs)?;
    let n = fs.len();
    let graph = fs[0].graph().clone();
    let refinement = common_refinement(fs)?;
    let mut sites = Vec::new();
    let mut lines = Vec::new();
    let mut labels = Vec::new();
    for seg in &refinement.segments {
        sites.push(Site::Edge { edge: seg.edge, from: seg.from.clone(), to: seg.to.clone() });
        lines.push(seg.lines.iter().map(|l| l.clone().expect("total")).collect::<Vec<_>>());
        labels.push(format!("{}[{},{}]", graph.edge(seg.edge).name, seg.from, seg.to));
    }
    for p in &refinement.points {
        sites.push(Site::Vertex(p.vertex));
        lines.push(p.values.iter().map(|v| Line::new(0, v.finite().expect("total").clone())).collect());
        labels.push(graph.vertex_name(p.vertex).to_string());
    }
    let zero = vec![Rational::zero(); n];
    let mut actions = Vec::with_capacity(n);
    let mut witnesses = Vec::with_capacity(n);
    for i in 0..n {
        let mut per_state = Vec::with_capacity(sites.len());
        let mut per_state_w = Vec::with_capacity(sites.len());
        for (alpha, label) in labels.iter().enumerate() {
            let (others, terms) = terms_of(&lines[alpha], i, &zero);
            let (u, v) = sites[alpha].interval();
            let mut mins = Vec::new();
            let mut ws = Vec::new();
            for (t, (g, d)) in terms.iter().enumerate() {
                let j = others[t];
                if !g.is_positive() {
                    mins.push(MinAction::new(format!("L{}", j + 1), g * &u + d, vec![(j, int(1))]));
                    ws.push(Achiever::Left(j));
                }
                if !g.is_negative() {
                    mins.push(MinAction::new(format!("R{}", j + 1), g * &v + d, vec![(j, int(1))]));
                    ws.push(Achiever::Right(j));
                }
            }
            for (a, (ga, da)) in terms.iter().enumerate() {
                if ga.is_negative() {
                    continue;
                }
                for (b, (gb, db)) in terms.iter().enumerate() {
                    if gb.is_positive() || ga <= gb {
                        continue;
                    }
                    let (j, k) = (others[a], others[b]);
                    let span = ga - gb;
                    let pj = -gb / &span;
                    let pk = ga / &span;
                    let payoff = &pj * da + &pk * db;
                    let transitions: Vec<(usize, Rational)> =
                        [(j, pj), (k, pk)].into_iter().filter(|(_, p)| !p.is_zero()).collect();
                    mins.push(MinAction::new(format!("X{},{}", j + 1, k + 1), payoff, transitions));
                    ws.push(Achiever::Crossing { up: j, down: k });
                }
            }
            per_state.push(MaxAction { label: label.clone(), min_actions: mins });
            per_state_w.push(ws);
        }
        actions.push(per_state);
        witnesses.push(per_state_w);
    }
    let game = StochGame::new((1..=n).map(|i| i.to_string()).collect(), actions)?;
    let built = GameConstruction { game, sites, lines, witnesses };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    built.check(&zero)?;
    for _ in 0..2 {
        let c: Vec<Rational> =
            (0..n).map(|_| Rational::new(rng.gen_range(-40..=40).into(), rng.gen_range(1..=8).into())).collect();
        built.check(&c)?;
    }
    Ok(built)
}

/// Result of enumerating all assignments of functions to points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationCheck {
    pub unique: bool,
    pub value: Trop,
    /// Number of minimizing permutations.
    pub count: usize,
    /// The first minimizing permutations found (at most eight), as
    /// `σ[k] =` index of the function placed at point `k`.
    pub minimizers: Vec<Vec<usize>>,
}

/// Minimizes `Σ_k f_{σ(k)}(x_k)` over all permutations `σ`.
pub fn unique_permutation_check(
    fs: &[TropFunction],
    points: &[PointRef],
) -> Result<PermutationCheck, IndependenceError> {
    let n = fs.len();
    if points.len() != n {
        return Err(IndependenceError::LengthMismatch { expected: n, got: points.len() });
    }
    if n > PERMUTATION_CAP {
        return Err(IndependenceError::TooLarge(format!("a family of {n} functions")));
    }
    let vals: Vec<Vec<Trop>> = points
        .iter()
        .map(|p| fs.iter().map(|f| f.evaluate(p)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let mut best = Trop::Inf;
    let mut count = 0;
    let mut minimizers = Vec::new();
    for perm in permutations(n) {
        let total = perm.iter().enumerate().fold(Trop::zero(), |acc, (k, &j)| acc.add(&vals[k][j]));
        if total < best {
            best = total;
            count = 1;
            minimizers = vec![perm];
        } else if total == best {
            count += 1;
            if minimizers.len() < 8 {
                minimizers.push(perm);
            }
        }
    }
    Ok(PermutationCheck { unique: best.is_finite() && count == 1, value: best, count, minimizers })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn go(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == perm.len() {
            out.push(perm.clone());
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            go(k + 1, perm, out);
            perm.swap(k, i);
        }
    }
    go(0, &mut perm, &mut out);
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndependenceVerdict {
    Independent {
        certificate: GameCertificate,
        /// Escape-rate bounds at the certificate vector.
        bounds: (Rational, Rational),
        /// `points[i]` is where `f_i + c_i` is the unique minimum.
        points: Vec<PointRef>,
        permutation: Option<PermutationCheck>,
    },
    Dependent {
        certificate: GameCertificate,
        bounds: (Rational, Rational),
        /// `min_j (f_j + coefficients_j)` is attained at least twice everywhere.
        coefficients: Vec<Rational>,
    },
    Unresolved {
        lo: Rational,
        hi: Rational,
        iterations: usize,
    },
}

impl IndependenceVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            IndependenceVerdict::Independent { .. } => "independent",
            IndependenceVerdict::Dependent { .. } => "dependent",
            IndependenceVerdict::Unresolved { .. } => "unresolved",
        }
    }
}

/// Decides tropical independence of a family of finite functions on a
/// connected graph.
pub fn check_independence(fs: &[TropFunction], opts: &SignOptions) -> Result<IndependenceVerdict, IndependenceError> {
    let built = build_game(fs)?;
    verdict_from(fs, &built, decide_sign(&built.game, opts))
}

fn verdict_from(
    fs: &[TropFunction],
    built: &GameConstruction,
    decision: SignDecision,
) -> Result<IndependenceVerdict, IndependenceError> {
    match decision {
        SignDecision::Positive(certificate) => {
            let c = certificate.c().to_vec();
            let bounds = escape_rate_bounds(&built.game, &c)?;
            let points = built.witness_points(fs, &c)?;
            let permutation = if fs.len() <= PERMUTATION_CAP {
                let check = unique_permutation_check(fs, &points)?;
                if !check.unique {
                    return Err(IndependenceError::Construction("witness points admit several permutations".into()));
                }
                Some(check)
            } else {
                None
            };
            Ok(IndependenceVerdict::Independent { certificate, bounds, points, permutation })
        }
        SignDecision::NonPositive(certificate) => {
            let coefficients = certificate.c().to_vec();
            let bounds = escape_rate_bounds(&built.game, &coefficients)?;
            if !min_attained_twice(fs, &coefficients)?.is_ok() {
                return Err(IndependenceError::Construction("dependence coefficients fail the exact check".into()));
            }
            Ok(IndependenceVerdict::Dependent { certificate, bounds, coefficients })
        }
        SignDecision::Unresolved { lo, hi, iterations } => Ok(IndependenceVerdict::Unresolved { lo, hi, iterations }),
    }
}

/// Witness points for a vector `c` with `T(c) > c` on the family's game.
pub fn extract_witness_points(fs: &[TropFunction], c: &[Rational]) -> Result<Vec<PointRef>, IndependenceError> {
    build_game(fs)?.witness_points(fs, c)
}

/// `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    if k <= n {
        go(0, n, k, &mut cur, &mut out);
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Whether the square minor on `rows × cols` has a finite tropical
/// determinant attained by a single permutation.
fn nonsingular(a: &[Vec<Trop>], rows: &[usize], cols: &[usize]) -> bool {
    let r = rows.len();
    let mut dp: Vec<(Trop, u8)> = vec![(Trop::Inf, 0); 1 << r];
    dp[0] = (Trop::zero(), 1);
    for mask in 0..(1usize << r) {
        let (val, cnt) = dp[mask].clone();
        if !val.is_finite() {
            continue;
        }
        if mask.count_ones() as usize == r {
            continue;
        }
        let row = rows[mask.count_ones() as usize];
        for (b, &col) in cols.iter().enumerate() {
            if mask & (1 << b) != 0 {
                continue;
            }
            let cand = val.add(&a[row][col]);
            if !cand.is_finite() {
                continue;
            }
            let slot = &mut dp[mask | (1 << b)];
            if cand < slot.0 {
                *slot = (cand, cnt);
            } else if cand == slot.0 {
                slot.1 = (slot.1 + cnt).min(2);
            }
        }
    }
    let full = &dp[(1 << r) - 1];
    full.0.is_finite() && full.1 == 1
}

/// Representatives of the rows up to adding a constant.
fn distinct_rows(a: &[Vec<Trop>]) -> Vec<Vec<Trop>> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for row in a {
        let shift = row.iter().filter_map(Trop::finite).min().cloned().unwrap_or_default();
        let key: Vec<Trop> = row.iter().map(|x| x.add_rational(&-shift.clone())).collect();
        if !seen.contains(&key) {
            seen.push(key);
            out.push(row.clone());
        }
    }
    out
}

fn transpose(a: &[Vec<Trop>]) -> Vec<Vec<Trop>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Tropical rank in the determinantal sense: the largest size of a square
/// minor whose tropical determinant is finite and attained exactly once.
pub fn dss_matrix_rank(a: &[Vec<Trop>]) -> Result<usize, IndependenceError> {
    let cols = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != cols) {
        return Err(IndependenceError::Ragged);
    }
    // duplicate rows or columns up to translation never sit in a nonsingular minor
    let a = transpose(&distinct_rows(&transpose(&distinct_rows(a))));
    let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
    if rows.min(cols) > DSS_CAP {
        return Err(IndependenceError::TooLarge(format!("a {rows}×{cols} matrix")));
    }
    let mut rank = 0;
    for r in 1..=rows.min(cols) {
        let work = binomial(rows, r) * binomial(cols, r);
        if work > DSS_WORK_CAP {
            return Err(IndependenceError::TooLarge(format!("{work} minors of size {r}")));
        }
        let row_sets = combinations(rows, r);
        let col_sets = combinations(cols, r);
        let found = par::any_range(row_sets.len(), |x| col_sets.iter().any(|cs| nonsingular(&a, &row_sets[x], cs)));
        if !found {
            break;
        }
        rank = r;
    }
    Ok(rank)
}

pub fn eval_rank(m: &EvalMatrix) -> Result<usize, IndependenceError> {
    dss_matrix_rank(&m.to_trop())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankBudget {
    /// Midpoint refinement levels for evaluation point sets.
    pub levels: u32,
    /// Iteration cap for each independence game.
    pub max_iters: usize,
    /// Maximum number of generator subfamilies decided by games.
    pub max_subfamilies: usize,
}

impl Default for RankBudget {
    fn default() -> Self {
        RankBudget { levels: 2, max_iters: 10_000, max_subfamilies: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankValue {
    Exact(usize),
    Bounds { lo: usize, hi: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankEvidence {
    /// Evaluation at the refined vertices is injective; its matrix rank is exact.
    TwoSlope {
        points: usize,
        rank: usize,
    },
    /// Number of distinct slopes along one direction.
    SlopeCount(usize),
    /// Matrix rank at a refinement level of the evaluation points.
    Evaluation {
        level: u32,
        points: usize,
        rank: usize,
    },
    /// Generator subfamily certified independent.
    Independent(Vec<usize>),
    /// Every generator subfamily of this size certified dependent.
    AllDependent(usize),
    /// Number of generators.
    Generators(usize),
    /// A subfamily whose game was not decided.
    Unresolved(Vec<usize>),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub value: RankValue,
    pub evidence: Vec<RankEvidence>,
}

/// Tropical rank of a finitely generated semimodule.
///
/// The rank equals the largest tropically independent subfamily of
/// generators, so games on subfamilies give both bounds; evaluation matrices
/// give cheap lower bounds and, under the two-slope condition, the exact value.
pub fn troprank(m: &Semimodule, budget: &RankBudget) -> Result<RankReport, IndependenceError> {
    let l = m.len();
    let mut evidence = Vec::new();
    if let Some(points) = m.two_slope_points() {
        match eval_rank(&m.evaluation_matrix(&points).map_err(semi_err)?) {
            Ok(rank) => {
                evidence.push(RankEvidence::TwoSlope { points: points.len(), rank });
                return Ok(RankReport { value: RankValue::Exact(rank), evidence });
            }
            Err(IndependenceError::TooLarge(what)) => evidence.push(RankEvidence::Skipped(what)),
            Err(e) => return Err(e),
        }
    }
    let slopes = m.rank_lower_bound_slopes();
    evidence.push(RankEvidence::SlopeCount(slopes));
    evidence.push(RankEvidence::Generators(l));
    let mut lo = slopes;
    let mut hi = l;
    for level in 0..=budget.levels {
        if lo == hi {
            break;
        }
        let points = m.refined_points(level);
        match eval_rank(&m.evaluation_matrix(&points).map_err(semi_err)?) {
            Ok(rank) => {
                evidence.push(RankEvidence::Evaluation { level, points: points.len(), rank });
                lo = lo.max(rank);
            }
            Err(IndependenceError::TooLarge(what)) => {
                evidence.push(RankEvidence::Skipped(what));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if lo < hi && !m.graph().is_connected() {
        evidence.push(RankEvidence::Skipped("games need a connected graph".into()));
    }
    let mut spent = 0;
    let opts = SignOptions::with_max_iters(budget.max_iters);
    'sizes: while lo < hi && m.graph().is_connected() {
        let s = lo + 1;
        let mut all_dependent = true;
        for subset in combinations(l, s) {
            if spent == budget.max_subfamilies {
                evidence.push(RankEvidence::Skipped("subfamily budget exhausted".into()));
                break 'sizes;
            }
            spent += 1;
            let fs: Vec<TropFunction> = subset.iter().map(|&i| m.generators()[i].clone()).collect();
            match check_independence(&fs, &opts)? {
                IndependenceVerdict::Independent { .. } => {
                    evidence.push(RankEvidence::Independent(subset));
                    lo = s;
                    continue 'sizes;
                }
                IndependenceVerdict::Dependent { .. } => {}
                IndependenceVerdict::Unresolved { .. } => {
                    evidence.push(RankEvidence::Unresolved(subset));
                    all_dependent = false;
                }
            }
        }
        if all_dependent {
            evidence.push(RankEvidence::AllDependent(s));
            hi = s - 1;
        }
        break;
    }
    let value = if lo == hi { RankValue::Exact(lo) } else { RankValue::Bounds { lo, hi } };
    Ok(RankReport { value, evidence })
}

fn semi_err(e: crate::semimodule::SemimoduleError) -> IndependenceError {
    match e {
        crate::semimodule::SemimoduleError::Function(f) => IndependenceError::Function(f),
        other => IndependenceError::Construction(other.to_string()),
    }
}
