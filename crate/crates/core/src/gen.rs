//! Seeded random instances: graphs, functions, families with known answers,
//! games and constraint systems.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

use crate::gadgets::CspInstance;
use crate::game::{MaxAction, MinAction, StochGame};
use crate::graph::{EdgeSpec, GraphSpec, MetricGraph};
use crate::pl::{trop_min_all, EdgeProfile, TropFunction};
use crate::rational::{int, ratio, Rational};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational(rng: &mut Rng64, lo: i64, hi: i64, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    ratio(rng.gen_range(lo * den..=hi * den), den)
}

/// Connected graph: a random tree plus extra edges (loops and parallel edges
/// allowed), lengths in `{1/2, 1, 3/2, 2}`.
pub fn random_graph(rng: &mut Rng64, vertices: usize, edges: usize) -> Arc<MetricGraph> {
    let vertices = vertices.max(1);
    let names: Vec<String> = (0..vertices).map(|i| format!("v{i}")).collect();
    let mut specs = Vec::new();
    let target = edges.max(vertices - 1).max(1);
    for k in 0..target {
        let (a, b) = if k + 1 < vertices {
            (rng.gen_range(0..=k), k + 1)
        } else {
            (rng.gen_range(0..vertices), rng.gen_range(0..vertices))
        };
        let len = ratio(rng.gen_range(1..=4), 2);
        specs.push(EdgeSpec::new(format!("e{k}"), &names[a], &names[b], len));
    }
    let spec = GraphSpec { vertices: names.clone(), edges: specs, basepoint: names[0].clone() };
    Arc::new(MetricGraph::from_spec(&spec).expect("generated graph is valid"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionParams {
    /// Interior breakpoints per edge, at most.
    pub max_breaks: usize,
    /// Free slopes are drawn from `-max_slope..=max_slope`.
    pub max_slope: i64,
    /// Vertex values are drawn from `-max_value..=max_value`.
    pub max_value: i64,
}

impl Default for FunctionParams {
    fn default() -> Self {
        FunctionParams { max_breaks: 3, max_slope: 3, max_value: 3 }
    }
}

/// Continuous total function. With `lead = Some(s)` the function has slope
/// `s` on the first quarter of edge 0.
pub fn random_function(
    rng: &mut Rng64,
    graph: &Arc<MetricGraph>,
    p: &FunctionParams,
    lead: Option<i64>,
) -> TropFunction {
    let at: Vec<Rational> = graph.vertex_ids().map(|_| random_rational(rng, -p.max_value, p.max_value, 2)).collect();
    let profiles = graph
        .edge_ids()
        .map(|e| {
            let edge = graph.edge(e);
            let (a, b) = (&at[edge.ends[0].0], &at[edge.ends[1].0]);
            let forced = if e.0 == 0 { lead } else { None };
            edge_profile(rng, &edge.length, a, b, p, forced)
        })
        .collect();
    TropFunction::total(graph.clone(), profiles, BTreeMap::new()).expect("profiles match at vertices")
}

fn edge_profile(
    rng: &mut Rng64,
    len: &Rational,
    a: &Rational,
    b: &Rational,
    p: &FunctionParams,
    lead: Option<i64>,
) -> EdgeProfile {
    let mut breaks = vec![Rational::zero()];
    let mut slopes = Vec::new();
    if let Some(s) = lead {
        breaks.push(len / int(4));
        slopes.push(s);
    }
    // free pieces on the first half, then two pieces that land on `b`
    let free = rng.gen_range(0..=p.max_breaks.saturating_sub(1));
    let mut cuts: Vec<Rational> = (0..free).map(|_| len * ratio(rng.gen_range(1..16), 32)).collect();
    cuts.retain(|t| t > breaks.last().unwrap());
    cuts.sort();
    cuts.dedup();
    for t in cuts {
        breaks.push(t);
        slopes.push(rng.gen_range(-p.max_slope..=p.max_slope));
    }
    let t1 = breaks.last().unwrap().clone();
    let y1 = breaks.windows(2).zip(&slopes).fold(a.clone(), |y, (w, s)| y + (&w[1] - &w[0]) * int(*s));
    let rest = len - &t1;
    let gap = b - &y1;
    let (up, down) = loop {
        let up = rng.gen_range(-p.max_slope..=p.max_slope);
        let down = rng.gen_range(-p.max_slope..=p.max_slope);
        if up != down {
            break (up, down);
        }
    };
    // y1 + up (t − t1) = b + down (t − len)
    let cross = (&gap - &rest * int(down)) / int(up - down) + &t1;
    let (up, down, cross) = if cross >= t1 && cross <= *len {
        (up, down, cross)
    } else {
        let steep = (gap.abs() / &rest).ceil().to_integer().try_into().unwrap_or(i64::MAX / 4) + rng.gen_range(1..=2);
        let cross = (&gap + &rest * int(steep)) / int(2 * steep) + &t1;
        (steep, -steep, cross)
    };
    if cross > t1 {
        breaks.push(cross.clone());
        slopes.push(up);
    }
    if cross < *len {
        breaks.push(len.clone());
        slopes.push(down);
    } else {
        *breaks.last_mut().unwrap() = len.clone();
    }
    EdgeProfile::new(breaks, slopes, a.clone()).expect("increasing breaks")
}

/// `n` functions with pairwise distinct slopes on the first quarter of edge 0,
/// hence tropically independent.
pub fn independent_family(
    rng: &mut Rng64,
    graph: &Arc<MetricGraph>,
    n: usize,
    p: &FunctionParams,
) -> Vec<TropFunction> {
    let mut slopes: Vec<i64> = (-(n as i64)..=n as i64).collect();
    slopes.shuffle(rng);
    slopes[..n].iter().map(|&s| random_function(rng, graph, p, Some(s))).collect()
}

/// `n − 1` random functions followed by a tropical combination of them; the
/// returned coefficients witness dependence.
pub fn dependent_family(
    rng: &mut Rng64,
    graph: &Arc<MetricGraph>,
    n: usize,
    p: &FunctionParams,
) -> (Vec<TropFunction>, Vec<Rational>) {
    assert!(n >= 2);
    let mut fs: Vec<TropFunction> = (0..n - 1).map(|_| random_function(rng, graph, p, None)).collect();
    let cs: Vec<Rational> = (0..n - 1).map(|_| random_rational(rng, -2, 2, 4)).collect();
    let shifted: Vec<TropFunction> = fs.iter().zip(&cs).map(|(f, c)| f.shift(c)).collect();
    fs.push(trop_min_all(&shifted.iter().collect::<Vec<_>>()).expect("same graph"));
    let mut coefficients = cs;
    coefficients.push(Rational::zero());
    (fs, coefficients)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameParams {
    pub max_states: usize,
    pub max_max_actions: usize,
    pub max_min_actions: usize,
    /// Transition probabilities have this denominator.
    pub den: i64,
    /// Payoffs are integers in `-max_payoff..=max_payoff`.
    pub max_payoff: i64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams { max_states: 4, max_max_actions: 3, max_min_actions: 3, den: 4, max_payoff: 3 }
    }
}

pub fn random_game(rng: &mut Rng64, p: &GameParams) -> StochGame {
    let n = rng.gen_range(1..=p.max_states);
    let actions = (0..n)
        .map(|_| {
            (0..rng.gen_range(1..=p.max_max_actions))
                .map(|a| MaxAction {
                    label: format!("a{a}"),
                    min_actions: (0..rng.gen_range(1..=p.max_min_actions))
                        .map(|b| {
                            MinAction::new(
                                format!("b{b}"),
                                int(rng.gen_range(-p.max_payoff..=p.max_payoff)),
                                random_distribution(rng, n, p.den),
                            )
                        })
                        .collect(),
                })
                .collect()
        })
        .collect();
    StochGame::new((0..n).map(|i| format!("s{i}")).collect(), actions).expect("generated game is valid")
}

fn random_distribution(rng: &mut Rng64, n: usize, den: i64) -> Vec<(usize, Rational)> {
    let mut mass = vec![0i64; n];
    for _ in 0..den {
        mass[rng.gen_range(0..n)] += 1;
    }
    mass.iter().enumerate().filter(|(_, &m)| m > 0).map(|(j, &m)| (j, ratio(m, den))).collect()
}

/// A system satisfied by a hidden integer vector in `[0, 5]^n`, which is
/// returned alongside.
pub fn feasible_csp(rng: &mut Rng64, n: usize, triples: usize) -> (CspInstance, Vec<Rational>) {
    assert!(n >= 3);
    let c: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
    let mut avg = Vec::new();
    let mut min = Vec::new();
    for _ in 0..triples * 20 {
        if avg.len() + min.len() >= triples {
            break;
        }
        let t = random_triple(rng, n);
        let [i, j, k] = t;
        if rng.gen_bool(0.5) {
            if 2 * c[i] >= c[j] + c[k] && !avg.contains(&t) {
                avg.push(t);
            }
        } else if c[i] >= c[j].min(c[k]) && !min.contains(&t) {
            min.push(t);
        }
    }
    let mut a = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a.insert((i, j), rng.gen_range(-6..=c[i] - c[j]));
            }
        }
    }
    (CspInstance { n, avg, min, a }, c.into_iter().map(int).collect())
}

fn random_triple(rng: &mut Rng64, n: usize) -> [usize; 3] {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let (j, k) = (idx[1].min(idx[2]), idx[1].max(idx[2]));
    [idx[0], j, k]
}

/// A system with a planted contradiction: `c_i ≥ (c_j + c_k)/2` or
/// `c_i ≥ min(c_j, c_k)` together with `c_j, c_k ≥ c_i + 1`.
pub fn infeasible_csp(rng: &mut Rng64, n: usize) -> CspInstance {
    assert!(n >= 3);
    let t = random_triple(rng, n);
    let [i, j, k] = t;
    let mut a = BTreeMap::new();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                a.insert((p, q), rng.gen_range(-4..=-1));
            }
        }
    }
    for x in [j, k] {
        let up = rng.gen_range(1..=2);
        a.insert((x, i), up);
        a.insert((i, x), -up - rng.gen_range(0..=1));
    }
    let (avg, min) = if rng.gen_bool(0.5) { (vec![t], vec![]) } else { (vec![], vec![t]) };
    CspInstance { n, avg, min, a }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{feasible_witness_check, validate_csp};
    use crate::pl::min_attained_twice;

    #[test]
    fn generators_are_deterministic_and_valid() {
        for seed in 0..40 {
            let g = random_graph(&mut rng(seed), 3, 4);
            assert!(g.is_connected());
            assert_eq!(g, random_graph(&mut rng(seed), 3, 4));
            let p = FunctionParams::default();
            let f = random_function(&mut rng(seed), &g, &p, Some(2));
            assert!(f.is_total());
            assert_eq!(f.profile(crate::graph::EdgeId(0)).unwrap().slopes()[0], 2);
            let (fs, cs) = dependent_family(&mut rng(seed), &g, 3, &p);
            assert!(min_attained_twice(&fs, &cs).unwrap().is_ok());
            let (csp, c) = feasible_csp(&mut rng(seed), 4, 3);
            assert!(validate_csp(&csp).is_empty());
            assert!(feasible_witness_check(&csp, &c));
            assert!(validate_csp(&infeasible_csp(&mut rng(seed), 3)).is_empty());
            let game = random_game(&mut rng(seed), &GameParams::default());
            assert!(game.num_states() <= 4);
        }
    }
}
