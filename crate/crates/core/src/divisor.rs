//! Divisors on a metric graph, principal divisors `div(f)` and Riemann–Roch
//! space membership.

use std::collections::BTreeMap;
use std::ops::Add;

use crate::graph::{End, PointRef};
use crate::pl::{FunctionError, TropFunction};

/// A finitely supported integer combination of points. Zero coefficients are
/// never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Divisor {
    coefficients: BTreeMap<PointRef, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (PointRef, i64)>) -> Self {
        let mut d = Divisor::zero();
        for (p, k) in pairs {
            d.add_at(p, k);
        }
        d
    }

    pub fn add_at(&mut self, p: PointRef, k: i64) {
        let slot = self.coefficients.entry(p.clone()).or_insert(0);
        *slot += k;
        if *slot == 0 {
            self.coefficients.remove(&p);
        }
    }

    pub fn coefficient(&self, p: &PointRef) -> i64 {
        self.coefficients.get(p).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = (&PointRef, &i64)> {
        self.coefficients.iter()
    }

    pub fn degree(&self) -> i64 {
        self.coefficients.values().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.coefficients.values().all(|&k| k >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }
}

impl Add<&Divisor> for &Divisor {
    type Output = Divisor;

    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, k) in &rhs.coefficients {
            out.add_at(p.clone(), *k);
        }
        out
    }
}

/// `div(f)`: at each point, minus the sum of the outgoing slopes of `f`.
/// Only breaks and vertices can carry a nonzero order.
pub fn divisor_of(f: &TropFunction) -> Result<Divisor, FunctionError> {
    let g = f.graph();
    if !g.is_connected() {
        return Err(FunctionError::Disconnected);
    }
    if !f.is_total() {
        return Err(FunctionError::NotTotal);
    }
    let mut d = Divisor::zero();
    for v in g.vertex_ids() {
        let outgoing: i64 =
            g.incidence(v).iter().map(|&(e, end)| f.profile(e).expect("total function").outgoing_slope(end)).sum();
        d.add_at(PointRef::Vertex(v), -outgoing);
    }
    for (&e, p) in f.profiles() {
        let slopes = p.slopes();
        for (k, t) in p.breaks().iter().enumerate().take(slopes.len()).skip(1) {
            // toward end1 the slope is s_k, toward end0 it is -s_{k-1}
            let ord = slopes[k - 1] - slopes[k];
            d.add_at(PointRef::Interior { edge: e, offset: t.clone() }, ord);
        }
    }
    Ok(d)
}

/// Order of vanishing of `f` at a single point.
pub fn order_at(f: &TropFunction, p: &PointRef) -> Result<i64, FunctionError> {
    let g = f.graph();
    let dirs = g.incident_directions(p)?;
    let mut total = 0;
    for dir in dirs {
        let prof = f.profile(dir.edge).ok_or(FunctionError::NotTotal)?;
        let slope = match &dir.at {
            PointRef::Vertex(_) => prof.outgoing_slope(dir.toward.opposite()),
            PointRef::Interior { offset, .. } => {
                let k = prof.breaks().partition_point(|b| b <= offset);
                match dir.toward {
                    End::End1 => prof.slopes()[(k - 1).min(prof.slopes().len() - 1)],
                    End::End0 => {
                        let left = prof.breaks().partition_point(|b| b < offset);
                        -prof.slopes()[left - 1]
                    }
                }
            }
        };
        total += slope;
    }
    Ok(-total)
}

/// `f ∈ R(D)`: either `f = ∞`, or `div(f) + D ≥ 0`.
pub fn in_riemann_roch(f: &TropFunction, d: &Divisor) -> Result<bool, FunctionError> {
    if f.is_infinity() {
        return Ok(true);
    }
    Ok((&divisor_of(f)? + d).is_effective())
}
