//! Turn-based stochastic mean-payoff games with finitely many states and
//! actions, their Shapley operators, and exact sign certificates for the
//! mean payoff.

use std::collections::{BTreeSet, HashSet};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg;
use crate::par;
use crate::rational::{approximate, to_f64, Rational};

/// Upper bound on strategy pairs enumerated by [`brute_force_mean_payoff`].
pub const ORACLE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("a game needs at least one state")]
    NoStates,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("state {state} has no MAX actions")]
    NoMaxActions { state: usize },
    #[error("action {action} of state {state} has no MIN actions")]
    NoMinActions { state: usize, action: usize },
    #[error("transition to unknown state {0}")]
    UnknownState(usize),
    #[error("negative probability at ({state}, {action}, {min_action})")]
    NegativeProbability { state: usize, action: usize, min_action: usize },
    #[error("probabilities at ({state}, {action}, {min_action}) sum to {sum}, not 1")]
    BadDistribution { state: usize, action: usize, min_action: usize, sum: Rational },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{pairs} strategy pairs exceed the oracle cap of {cap}")]
    TooLarge { pairs: u128, cap: u128 },
    #[error("empty vector")]
    EmptyVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinAction {
    pub label: String,
    pub payoff: Rational,
    pub transitions: Vec<(usize, Rational)>,
}

impl MinAction {
    pub fn new(label: impl Into<String>, payoff: Rational, transitions: Vec<(usize, Rational)>) -> Self {
        MinAction { label: label.into(), payoff, transitions }
    }

    pub fn value(&self, c: &[Rational]) -> Rational {
        let mut v = self.payoff.clone();
        for (j, p) in &self.transitions {
            v += p * &c[*j];
        }
        v
    }

    /// Value with `None` standing for `-∞`.
    fn value_partial(&self, c: &[Option<Rational>]) -> Option<Rational> {
        let mut v = self.payoff.clone();
        for (j, p) in &self.transitions {
            if p.is_zero() {
                continue;
            }
            v += p * c[*j].as_ref()?;
        }
        Some(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxAction {
    pub label: String,
    pub min_actions: Vec<MinAction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochGame {
    states: Vec<String>,
    actions: Vec<Vec<MaxAction>>,
}

impl StochGame {
    pub fn new(states: Vec<String>, actions: Vec<Vec<MaxAction>>) -> Result<Self, GameError> {
        let n = states.len();
        if n == 0 {
            return Err(GameError::NoStates);
        }
        if actions.len() != n {
            return Err(GameError::DimensionMismatch { expected: n, got: actions.len() });
        }
        unique(states.iter())?;
        for (i, acts) in actions.iter().enumerate() {
            if acts.is_empty() {
                return Err(GameError::NoMaxActions { state: i });
            }
            unique(acts.iter().map(|a| &a.label))?;
            for (a, act) in acts.iter().enumerate() {
                if act.min_actions.is_empty() {
                    return Err(GameError::NoMinActions { state: i, action: a });
                }
                unique(act.min_actions.iter().map(|b| &b.label))?;
                for (b, m) in act.min_actions.iter().enumerate() {
                    let mut sum = Rational::zero();
                    for (j, p) in &m.transitions {
                        if *j >= n {
                            return Err(GameError::UnknownState(*j));
                        }
                        if p.is_negative() {
                            return Err(GameError::NegativeProbability { state: i, action: a, min_action: b });
                        }
                        sum += p;
                    }
                    if !sum.is_one() {
                        return Err(GameError::BadDistribution { state: i, action: a, min_action: b, sum });
                    }
                }
            }
        }
        Ok(StochGame { states, actions })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self, state: usize) -> &[MaxAction] {
        &self.actions[state]
    }

    /// Number of positional strategy pairs, `∏_i Σ_α |B_{i,α}|`.
    pub fn strategy_pairs(&self) -> u128 {
        self.actions
            .iter()
            .map(|acts| acts.iter().map(|a| a.min_actions.len() as u128).sum::<u128>())
            .fold(1u128, |acc, k| acc.saturating_mul(k))
    }

    fn check_dim(&self, got: usize) -> Result<(), GameError> {
        if got != self.num_states() {
            return Err(GameError::DimensionMismatch { expected: self.num_states(), got });
        }
        Ok(())
    }

    fn shapley_at(&self, i: usize, c: &[Rational]) -> Rational {
        self.actions[i]
            .iter()
            .map(|a| a.min_actions.iter().map(|b| b.value(c)).min().expect("nonempty"))
            .max()
            .expect("nonempty")
    }

    fn shapley(&self, c: &[Rational]) -> Vec<Rational> {
        par::map_range(self.num_states(), |i| self.shapley_at(i, c))
    }
}

fn unique<'a>(labels: impl Iterator<Item = &'a String>) -> Result<(), GameError> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(GameError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// `T_i(c) = max_α min_β (r_i^{αβ} + Σ_j P_{ij}^{αβ} c_j)`.
pub fn apply_shapley(g: &StochGame, c: &[Rational]) -> Result<Vec<Rational>, GameError> {
    g.check_dim(c.len())?;
    Ok(g.shapley(c))
}

/// The Shapley operator extended to vectors with `-∞` entries (`None`).
pub fn apply_shapley_partial(g: &StochGame, c: &[Option<Rational>]) -> Result<Vec<Option<Rational>>, GameError> {
    g.check_dim(c.len())?;
    Ok(par::map_range(g.num_states(), |i| {
        g.actions[i]
            .iter()
            .map(|a| {
                let mut best: Option<Option<Rational>> = None;
                for b in &a.min_actions {
                    let v = b.value_partial(c);
                    best = Some(match best {
                        None => v,
                        Some(cur) => match (cur, v) {
                            (None, _) | (_, None) => None,
                            (Some(x), Some(y)) => Some(x.min(y)),
                        },
                    });
                }
                best.expect("nonempty")
            })
            .max()
            .expect("nonempty")
    }))
}

/// `v^1, …, v^N` with `v^k = T^k(0)`.
pub fn value_iteration(g: &StochGame, n: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::with_capacity(n);
    let mut v = vec![Rational::zero(); g.num_states()];
    for _ in 0..n {
        v = g.shapley(&v);
        out.push(v.clone());
    }
    out
}

/// `(min_i (T(c) − c)_i, max_i (T(c) − c)_i)`.
pub fn escape_rate_bounds(g: &StochGame, c: &[Rational]) -> Result<(Rational, Rational), GameError> {
    let t = apply_shapley(g, c)?;
    Ok(bounds_of(&diff(&t, c)))
}

fn diff(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn bounds_of(d: &[Rational]) -> (Rational, Rational) {
    (d.iter().min().expect("nonempty").clone(), d.iter().max().expect("nonempty").clone())
}

pub fn hilbert_seminorm(x: &[Rational]) -> Result<Rational, GameError> {
    let lo = x.iter().min().ok_or(GameError::EmptyVector)?;
    let hi = x.iter().max().ok_or(GameError::EmptyVector)?;
    Ok(hi - lo)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameCertificate {
    /// `T(c) = ρ + c`.
    Eigenpair { c: Vec<Rational>, rho: Rational },
    /// `T(c) > c` in every coordinate.
    StrictSuper(Vec<Rational>),
    /// `T(c) ≤ c` in every coordinate.
    Sub(Vec<Rational>),
}

impl GameCertificate {
    pub fn c(&self) -> &[Rational] {
        match self {
            GameCertificate::Eigenpair { c, .. } | GameCertificate::StrictSuper(c) | GameCertificate::Sub(c) => c,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GameCertificate::Eigenpair { .. } => "eigenpair",
            GameCertificate::StrictSuper(_) => "strict_super",
            GameCertificate::Sub(_) => "sub",
        }
    }

    /// Whether a valid certificate of this kind proves every mean payoff positive.
    pub fn proves_positive(&self) -> bool {
        match self {
            GameCertificate::Eigenpair { rho, .. } => rho.is_positive(),
            GameCertificate::StrictSuper(_) => true,
            GameCertificate::Sub(_) => false,
        }
    }
}

pub fn verify_certificate(g: &StochGame, cert: &GameCertificate) -> Result<bool, GameError> {
    let c = cert.c();
    let d = diff(&apply_shapley(g, c)?, c);
    Ok(match cert {
        GameCertificate::Eigenpair { rho, .. } => d.iter().all(|x| x == rho),
        GameCertificate::StrictSuper(_) => d.iter().all(|x| x.is_positive()),
        GameCertificate::Sub(_) => d.iter().all(|x| !x.is_positive()),
    })
}

/// A vector with some coordinates `-∞` such that `T(c)_i > c_i` wherever
/// `c_i` is finite. It proves a positive mean payoff at every finite
/// coordinate.
pub fn verify_partial_super(g: &StochGame, c: &[Option<Rational>]) -> Result<bool, GameError> {
    let t = apply_shapley_partial(g, c)?;
    Ok(c.iter().any(Option::is_some)
        && c.iter().zip(&t).all(|(ci, ti)| match (ci, ti) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(x), Some(y)) => y > x,
        }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignDecision {
    /// Every mean payoff is positive.
    Positive(GameCertificate),
    /// Every mean payoff is nonpositive.
    NonPositive(GameCertificate),
    /// No certificate found. `lo ≤ χ_i ≤ hi` for every state.
    Unresolved { lo: Rational, hi: Rational, iterations: usize },
}

impl SignDecision {
    pub fn certificate(&self) -> Option<&GameCertificate> {
        match self {
            SignDecision::Positive(c) | SignDecision::NonPositive(c) => Some(c),
            SignDecision::Unresolved { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignOptions {
    /// Total iteration budget.
    pub max_iters: usize,
    /// Iterations carried out in exact arithmetic before switching to floats.
    pub exact_iters: usize,
    /// Search by floating-point iteration once the exact phase is over.
    /// Verdicts are still only emitted after exact verification.
    pub round_and_verify: bool,
}

impl Default for SignOptions {
    fn default() -> Self {
        SignOptions { max_iters: 10_000, exact_iters: 128, round_and_verify: true }
    }
}

impl SignOptions {
    pub fn with_max_iters(max_iters: usize) -> Self {
        SignOptions { max_iters, ..SignOptions::default() }
    }
}

/// Stop the exact phase once denominators grow past this many bits.
const EXACT_BITS: u64 = 512;

fn too_big(v: &[Rational]) -> bool {
    v.iter().any(|x| x.denom().bits() > EXACT_BITS || x.numer().bits() > 2 * EXACT_BITS)
}

/// Classifies a candidate from its displacement `d = T(c) − c`.
fn classify(c: Vec<Rational>, d: &[Rational]) -> Option<SignDecision> {
    let (lo, hi) = bounds_of(d);
    if lo == hi {
        let cert = GameCertificate::Eigenpair { c, rho: lo.clone() };
        return Some(if lo.is_positive() { SignDecision::Positive(cert) } else { SignDecision::NonPositive(cert) });
    }
    if lo.is_positive() {
        return Some(SignDecision::Positive(GameCertificate::StrictSuper(c)));
    }
    if !hi.is_positive() {
        return Some(SignDecision::NonPositive(GameCertificate::Sub(c)));
    }
    None
}

fn try_candidate(g: &StochGame, c: Vec<Rational>) -> Option<SignDecision> {
    let d = diff(&g.shapley(&c), &c);
    classify(c, &d)
}

/// Decides whether all mean payoffs are positive or all are nonpositive.
///
/// Iterates `v^k = T^k(0)` exactly. At each step three candidates are tried:
/// the iterate itself; if `λ = min_i v^k_i / k > 0`, the vector
/// `max_{t<k}(v^t − tλ)`, which satisfies `T(c) ≥ c + λ`; and if
/// `v^k ≤ v^s` for some `s < k`, the vector `min_{s≤t<k} v^t`, which satisfies
/// `T(c) ≤ c`. After the exact phase, floating-point iteration proposes
/// positional strategies whose exact gains and biases give further candidates.
pub fn decide_sign(g: &StochGame, opts: &SignOptions) -> SignDecision {
    let n = g.num_states();
    let max_iters = opts.max_iters.max(1);
    let mut iterates = vec![vec![Rational::zero(); n]];
    let mut best = (None::<Rational>, None::<Rational>);
    let mut tighten = |lo: Rational, hi: Rational| {
        if best.0.as_ref().map_or(true, |b| &lo > b) {
            best.0 = Some(lo);
        }
        if best.1.as_ref().map_or(true, |b| &hi < b) {
            best.1 = Some(hi);
        }
    };
    let exact_cap = opts.exact_iters.clamp(1, max_iters);
    let mut done = 0;
    for k in 1..=exact_cap {
        let prev = iterates.last().expect("nonempty");
        let next = g.shapley(prev);
        let d = diff(&next, prev);
        let (lo, hi) = bounds_of(&d);
        tighten(lo, hi);
        if let Some(found) = classify(prev.clone(), &d) {
            return found;
        }
        iterates.push(next);
        done = k;
        let vk = &iterates[k];
        let kq = Rational::from_integer(k.into());
        let lambda = vk.iter().min().expect("nonempty") / &kq;
        if lambda.is_positive() {
            let c: Vec<Rational> = (0..n)
                .map(|i| {
                    (0..k).map(|t| &iterates[t][i] - &lambda * Rational::from_integer(t.into())).max().expect("k ≥ 1")
                })
                .collect();
            if let Some(found) = try_candidate(g, c) {
                return found;
            }
        }
        for s in (k.saturating_sub(64)..k).rev() {
            if vk.iter().zip(&iterates[s]).all(|(a, b)| a <= b) {
                let c: Vec<Rational> =
                    (0..n).map(|i| (s..k).map(|t| iterates[t][i].clone()).min().expect("s < k")).collect();
                if let Some(found) = try_candidate(g, c) {
                    return found;
                }
                break;
            }
        }
        if too_big(vk) {
            break;
        }
    }
    let mut used = done;
    if opts.round_and_verify && used < max_iters {
        let (found, spent) = float_search(g, max_iters - used, &mut tighten);
        if let Some(found) = found {
            return found;
        }
        used += spent;
    }
    let (lo, hi) = (best.0.expect("at least one iteration"), best.1.expect("at least one iteration"));
    SignDecision::Unresolved { lo, hi, iterations: used }
}

/// Floating-point copy of a game for fast approximate iteration.
struct FloatGame {
    actions: Vec<Vec<Vec<(f64, Vec<(usize, f64)>)>>>,
}

impl FloatGame {
    fn new(g: &StochGame) -> Self {
        FloatGame {
            actions: g
                .actions
                .iter()
                .map(|acts| {
                    acts.iter()
                        .map(|a| {
                            a.min_actions
                                .iter()
                                .map(|b| {
                                    (to_f64(&b.payoff), b.transitions.iter().map(|(j, p)| (*j, to_f64(p))).collect())
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// One step, recording the chosen positional strategies.
    fn step(&self, v: &[f64], sigma: &mut [usize], tau: &mut [usize]) -> Vec<f64> {
        self.actions
            .iter()
            .enumerate()
            .map(|(i, acts)| {
                let mut best = f64::NEG_INFINITY;
                for (a, mins) in acts.iter().enumerate() {
                    let mut low = f64::INFINITY;
                    let mut arg = 0;
                    for (b, (r, tr)) in mins.iter().enumerate() {
                        let val = r + tr.iter().map(|(j, p)| p * v[*j]).sum::<f64>();
                        if val < low {
                            low = val;
                            arg = b;
                        }
                    }
                    if low > best {
                        best = low;
                        sigma[i] = a;
                        tau[i] = arg;
                    }
                }
                best
            })
            .collect()
    }
}

fn float_search(
    g: &StochGame,
    budget: usize,
    tighten: &mut impl FnMut(Rational, Rational),
) -> (Option<SignDecision>, usize) {
    let n = g.num_states();
    let fg = FloatGame::new(g);
    let mut v = vec![0.0; n];
    let mut sigma = vec![0; n];
    let mut tau = vec![0; n];
    let mut tried: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut next_check = 8;
    for k in 1..=budget {
        v = fg.step(&v, &mut sigma, &mut tau);
        if k == next_check || k == budget {
            next_check = if next_check < 1024 { next_check * 2 } else { next_check + 1024 };
            if tried.insert((sigma.clone(), tau.clone())) {
                if let Some(found) = strategy_candidates(g, &sigma, &tau, k) {
                    return (Some(found), k);
                }
            }
            let shift = v.iter().cloned().fold(f64::INFINITY, f64::min);
            for den in [1u64, 12, 1000, 1 << 20] {
                let c: Option<Vec<Rational>> = v.iter().map(|x| approximate(x - shift, den)).collect();
                let Some(c) = c else { continue };
                let d = diff(&g.shapley(&c), &c);
                let (lo, hi) = bounds_of(&d);
                tighten(lo, hi);
                if let Some(found) = classify(c, &d) {
                    return (Some(found), k);
                }
            }
        }
    }
    (None, budget)
}

fn strategy_candidates(g: &StochGame, sigma: &[usize], tau: &[usize], k: usize) -> Option<SignDecision> {
    let (p, r) = induced_chain(g, sigma, tau);
    let gain = chain_gain(&p, &r);
    let bias = chain_bias(&p, &r, &gain)?;
    for t in [0, 1, 16, 256, k.max(1)] {
        let tq = Rational::from_integer(t.into());
        let c: Vec<Rational> = bias.iter().zip(&gain).map(|(h, gi)| h + &tq * gi).collect();
        if let Some(found) = try_candidate(g, c) {
            return Some(found);
        }
    }
    None
}

type Chain = Vec<Vec<(usize, Rational)>>;

fn induced_chain(g: &StochGame, sigma: &[usize], tau: &[usize]) -> (Chain, Vec<Rational>) {
    (0..g.num_states())
        .map(|i| {
            let b = &g.actions[i][sigma[i]].min_actions[tau[i]];
            (b.transitions.clone(), b.payoff.clone())
        })
        .unzip()
}

/// Exact per-state long-run average reward of a finite Markov reward chain.
pub fn chain_gain(p: &[Vec<(usize, Rational)>], r: &[Rational]) -> Vec<Rational> {
    let n = p.len();
    let reach: Vec<BTreeSet<usize>> = (0..n)
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(i) = stack.pop() {
                for (j, q) in &p[i] {
                    if q.is_positive() && seen.insert(*j) {
                        stack.push(*j);
                    }
                }
            }
            seen
        })
        .collect();
    let recurrent: Vec<bool> = (0..n).map(|i| reach[i].iter().all(|&j| reach[j].contains(&i))).collect();
    let mut gain: Vec<Option<Rational>> = vec![None; n];
    for i in 0..n {
        if !recurrent[i] || gain[i].is_some() {
            continue;
        }
        let class: Vec<usize> = reach[i].iter().copied().collect();
        let pos = |j: usize| class.iter().position(|&x| x == j).expect("closed class");
        let m = class.len();
        // π (P − I) = 0 restricted to the class, plus Σ π = 1
        let mut a = vec![vec![Rational::zero(); m]; m + 1];
        for (col, &s) in class.iter().enumerate() {
            a[col][col] -= Rational::one();
            for (t, q) in &p[s] {
                a[pos(*t)][col] += q;
            }
        }
        a[m] = vec![Rational::one(); m];
        let mut b = vec![Rational::zero(); m + 1];
        b[m] = Rational::one();
        let pi = linalg::solve(&a, &b).expect("stationary distribution exists");
        let value: Rational = pi.iter().zip(&class).map(|(w, &s)| w * &r[s]).sum();
        for &s in &class {
            gain[s] = Some(value.clone());
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&i| !recurrent[i]).collect();
    if !transient.is_empty() {
        let idx = |j: usize| transient.iter().position(|&x| x == j);
        let m = transient.len();
        let mut a = linalg::identity(m);
        let mut b = vec![Rational::zero(); m];
        for (row, &s) in transient.iter().enumerate() {
            for (t, q) in &p[s] {
                match idx(*t) {
                    Some(col) => a[row][col] -= q,
                    None => b[row] += q * gain[*t].as_ref().expect("recurrent"),
                }
            }
        }
        let x = linalg::solve(&a, &b).expect("absorption system is nonsingular");
        for (s, v) in transient.iter().zip(x) {
            gain[*s] = Some(v);
        }
    }
    gain.into_iter().map(|g| g.expect("every state classified")).collect()
}

/// A bias vector `h` with `h + g = r + P h`.
fn chain_bias(p: &[Vec<(usize, Rational)>], r: &[Rational], g: &[Rational]) -> Option<Vec<Rational>> {
    let n = p.len();
    let mut a = linalg::identity(n);
    for (i, row) in p.iter().enumerate() {
        for (j, q) in row {
            a[i][*j] -= q;
        }
    }
    let b: Vec<Rational> = r.iter().zip(g).map(|(x, y)| x - y).collect();
    linalg::solve(&a, &b)
}

/// Exact mean payoff per state by enumerating positional strategies:
/// `χ_i = max_σ min_τ gain_i(σ, τ)`.
pub fn brute_force_mean_payoff(g: &StochGame) -> Result<Vec<Rational>, GameError> {
    let pairs = g.strategy_pairs();
    if pairs > ORACLE_CAP {
        return Err(GameError::TooLarge { pairs, cap: ORACLE_CAP });
    }
    let n = g.num_states();
    let sigmas = product(&(0..n).map(|i| g.actions[i].len()).collect::<Vec<_>>());
    let per_sigma = par::map(&sigmas, |sigma| {
        let taus = product(&(0..n).map(|i| g.actions[i][sigma[i]].min_actions.len()).collect::<Vec<_>>());
        let mut best: Option<Vec<Rational>> = None;
        for tau in &taus {
            let (p, r) = induced_chain(g, sigma, tau);
            let gain = chain_gain(&p, &r);
            best = Some(match best {
                None => gain,
                Some(b) => b.into_iter().zip(gain).map(|(x, y)| x.min(y)).collect(),
            });
        }
        best.expect("nonempty")
    });
    Ok((0..n).map(|i| per_sigma.iter().map(|v| v[i].clone()).max().expect("nonempty")).collect())
}

fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &k in sizes {
        out = out.into_iter().flat_map(|prefix| (0..k).map(move |x| [prefix.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Looks for a vector, finite on a nonempty set `S` of states and `-∞`
/// elsewhere, with `T(c) > c` on `S`. Such a vector proves a positive mean
/// payoff at every state of `S`, even when other states are nonpositive.
pub fn find_partial_super(g: &StochGame, opts: &SignOptions) -> Option<Vec<Option<Rational>>> {
    let n = g.num_states();
    let fg = FloatGame::new(g);
    let rounds = opts.max_iters.clamp(1, 4096);
    let mut v = vec![0.0; n];
    let (mut s1, mut s2) = (vec![0; n], vec![0; n]);
    for _ in 0..rounds {
        v = fg.step(&v, &mut s1, &mut s2);
    }
    let mut support: Vec<bool> = v.iter().map(|x| x / rounds as f64 > 1e-9).collect();
    let cap = opts.exact_iters.max(1);
    while support.iter().any(|&b| b) {
        let mut xs = vec![(0..n).map(|i| support[i].then(Rational::zero)).collect::<Vec<_>>()];
        for k in 1..=cap {
            let next = apply_shapley_partial(g, xs.last().expect("nonempty")).expect("dimension");
            xs.push(next);
            let kq = Rational::from_integer(k.into());
            let lambda = (0..n).filter(|&i| support[i]).map(|i| xs[k][i].clone().map(|x| x / &kq)).min().flatten();
            if let Some(lambda) = lambda.filter(Signed::is_positive) {
                let c: Vec<Option<Rational>> = (0..n)
                    .map(|i| {
                        (0..k)
                            .filter_map(|t| xs[t][i].as_ref().map(|x| x - &lambda * Rational::from_integer(t.into())))
                            .max()
                    })
                    .collect();
                if verify_partial_super(g, &c).unwrap_or(false) {
                    return Some(c);
                }
            }
            if xs[k].iter().flatten().any(|x| x.denom().bits() > EXACT_BITS) {
                break;
            }
        }
        let last = xs.last().expect("nonempty");
        let shrunk: Vec<bool> =
            (0..n).map(|i| support[i] && last[i].as_ref().is_some_and(Signed::is_positive)).collect();
        if shrunk == support {
            return None;
        }
        support = shrunk;
    }
    None
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    pub(crate) fn det(label: &str, payoff: Rational, to: usize) -> MinAction {
        MinAction::new(label, payoff, vec![(to, Rational::one())])
    }

    fn one_action(mins: Vec<MinAction>) -> Vec<MaxAction> {
        vec![MaxAction { label: "a".into(), min_actions: mins }]
    }

    pub(crate) fn self_loop(p: i64) -> StochGame {
        StochGame::new(vec!["s".into()], vec![one_action(vec![det("b", int(p), 0)])]).unwrap()
    }

    /// The game of the pair `{0, x}` on the unit edge.
    pub(crate) fn zero_x() -> StochGame {
        StochGame::new(
            vec!["1".into(), "2".into()],
            vec![one_action(vec![det("b", int(1), 1)]), one_action(vec![det("b", int(0), 0)])],
        )
        .unwrap()
    }

    fn two_cycle(p: i64, q: i64) -> StochGame {
        StochGame::new(
            vec!["1".into(), "2".into()],
            vec![one_action(vec![det("b", int(p), 1)]), one_action(vec![det("b", int(q), 0)])],
        )
        .unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn shapley_examples() {
        assert_eq!(apply_shapley(&self_loop(3), &ints(&[5])).unwrap(), ints(&[8]));
        let g = zero_x();
        assert_eq!(apply_shapley(&g, &ints(&[0, 0])).unwrap(), ints(&[1, 0]));
        assert_eq!(apply_shapley(&g, &ints(&[4, 7])).unwrap(), ints(&[8, 4]));
        let avg = StochGame::new(
            vec!["1".into(), "2".into()],
            vec![
                one_action(vec![MinAction::new("b", int(0), vec![(0, ratio(1, 2)), (1, ratio(1, 2))])]),
                one_action(vec![det("b", int(0), 1)]),
            ],
        )
        .unwrap();
        assert_eq!(apply_shapley(&avg, &ints(&[0, 2])).unwrap()[0], int(1));
        assert!(apply_shapley(&g, &ints(&[0])).is_err());
    }

    #[test]
    fn iteration_examples() {
        let vs = value_iteration(&zero_x(), 4);
        assert_eq!(vs, vec![ints(&[1, 0]), ints(&[1, 1]), ints(&[2, 1]), ints(&[2, 2])]);
        assert_eq!(value_iteration(&self_loop(3), 5)[4], ints(&[15]));
        assert_eq!(value_iteration(&self_loop(0), 7)[6], ints(&[0]));
    }

    #[test]
    fn escape_rate_examples() {
        assert_eq!(escape_rate_bounds(&zero_x(), &ints(&[0, 0])).unwrap(), (int(0), int(1)));
        assert_eq!(escape_rate_bounds(&zero_x(), &[ratio(1, 2), int(0)]).unwrap(), (ratio(1, 2), ratio(1, 2)));
        assert_eq!(escape_rate_bounds(&self_loop(3), &ints(&[-9])).unwrap(), (int(3), int(3)));
    }

    #[test]
    fn decide_examples() {
        match decide_sign(&zero_x(), &SignOptions::default()) {
            SignDecision::Positive(cert) => {
                assert!(verify_certificate(&zero_x(), &cert).unwrap());
                assert_eq!(cert, GameCertificate::Eigenpair { c: vec![ratio(1, 2), int(0)], rho: ratio(1, 2) });
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(decide_sign(&self_loop(0), &SignOptions::default()), SignDecision::NonPositive(_)));
        assert!(matches!(decide_sign(&self_loop(3), &SignOptions::default()), SignDecision::Positive(_)));
        let alt = two_cycle(1, -1);
        assert!(!matches!(decide_sign(&alt, &SignOptions::default()), SignDecision::Positive(_)));
        assert_eq!(brute_force_mean_payoff(&alt).unwrap(), ints(&[0, 0]));
    }

    #[test]
    fn verify_examples() {
        let g = zero_x();
        assert!(verify_certificate(&g, &GameCertificate::Eigenpair { c: vec![ratio(1, 2), int(0)], rho: ratio(1, 2) })
            .unwrap());
        assert!(!verify_certificate(&g, &GameCertificate::Eigenpair { c: ints(&[0, 0]), rho: ratio(1, 2) }).unwrap());
        let z = self_loop(0);
        assert!(verify_certificate(&z, &GameCertificate::Sub(ints(&[0]))).unwrap());
        assert!(!verify_certificate(&z, &GameCertificate::StrictSuper(ints(&[0]))).unwrap());
        assert!(verify_certificate(&z, &GameCertificate::Sub(ints(&[0, 0]))).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(brute_force_mean_payoff(&self_loop(3)).unwrap(), ints(&[3]));
        assert_eq!(brute_force_mean_payoff(&zero_x()).unwrap(), vec![ratio(1, 2), ratio(1, 2)]);
        let split = StochGame::new(
            vec!["1".into(), "2".into()],
            vec![one_action(vec![det("b", int(1), 0)]), one_action(vec![det("b", int(-1), 1)])],
        )
        .unwrap();
        assert_eq!(brute_force_mean_payoff(&split).unwrap(), ints(&[1, -1]));
        // a transient state drawn half and half into the two loops above
        let mixed = StochGame::new(
            vec!["1".into(), "2".into(), "3".into()],
            vec![
                one_action(vec![det("b", int(1), 0)]),
                one_action(vec![det("b", int(-1), 1)]),
                one_action(vec![MinAction::new("b", int(7), vec![(0, ratio(1, 2)), (1, ratio(1, 2))])]),
            ],
        )
        .unwrap();
        assert_eq!(brute_force_mean_payoff(&mixed).unwrap(), ints(&[1, -1, 0]));
    }

    #[test]
    fn oracle_size_cap() {
        let mins: Vec<MinAction> = (0..40).map(|k| det(&k.to_string(), int(0), 0)).collect();
        let acts: Vec<Vec<MaxAction>> = (0..4)
            .map(|_| {
                one_action(
                    mins.iter().map(|m| MinAction { transitions: vec![(0, Rational::one())], ..m.clone() }).collect(),
                )
            })
            .collect();
        let g = StochGame::new((0..4).map(|i| i.to_string()).collect(), acts).unwrap();
        assert!(matches!(brute_force_mean_payoff(&g), Err(GameError::TooLarge { .. })));
    }

    #[test]
    fn rejects_malformed_games() {
        assert_eq!(StochGame::new(vec![], vec![]), Err(GameError::NoStates));
        assert!(matches!(
            StochGame::new(
                vec!["s".into()],
                vec![one_action(vec![MinAction::new("b", int(0), vec![(0, ratio(1, 2))])])]
            ),
            Err(GameError::BadDistribution { .. })
        ));
        assert_eq!(StochGame::new(vec!["s".into()], vec![vec![]]), Err(GameError::NoMaxActions { state: 0 }));
        assert!(matches!(
            StochGame::new(vec!["s".into()], vec![one_action(vec![det("b", int(0), 3)])]),
            Err(GameError::UnknownState(3))
        ));
    }

    #[test]
    fn seminorm() {
        assert_eq!(hilbert_seminorm(&ints(&[3, 1, 0])).unwrap(), int(3));
        assert_eq!(hilbert_seminorm(&ints(&[2, 2])).unwrap(), int(0));
        assert_eq!(hilbert_seminorm(&ints(&[5, 3, 2])).unwrap(), int(3));
        assert!(hilbert_seminorm(&[]).is_err());
    }

    #[test]
    fn partial_super_on_mixed_game() {
        let split = StochGame::new(
            vec!["1".into(), "2".into()],
            vec![one_action(vec![det("b", int(1), 0)]), one_action(vec![det("b", int(-1), 1)])],
        )
        .unwrap();
        assert!(matches!(decide_sign(&split, &SignOptions::default()), SignDecision::Unresolved { .. }));
        let c = find_partial_super(&split, &SignOptions::default()).unwrap();
        assert!(verify_partial_super(&split, &c).unwrap());
        assert_eq!(c[1], None);
        assert!(find_partial_super(&self_loop(-1), &SignOptions::default()).is_none());
    }

    proptest! {
        #[test]
        fn gain_of_random_chain_satisfies_bias_equation(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..5);
            let p: Chain = (0..n).map(|_| {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                vec![(a, ratio(1, 2)), (b, ratio(1, 2))]
            }).collect();
            let r: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-3..4))).collect();
            let g = chain_gain(&p, &r);
            let h = chain_bias(&p, &r, &g).expect("consistent");
            for i in 0..n {
                let pg: Rational = p[i].iter().map(|(j, q)| q * &g[*j]).sum();
                prop_assert_eq!(&pg, &g[i]);
                let ph: Rational = p[i].iter().map(|(j, q)| q * &h[*j]).sum();
                prop_assert_eq!(&h[i] + &g[i], &r[i] + ph);
            }
        }
    }
}
