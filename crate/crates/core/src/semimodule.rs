//! Finitely generated subsemimodules of rational functions: tropical
//! combinations, evaluation maps and their canonical section, and the slope
//! data that bound or pin down the tropical rank.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{EdgeId, MetricGraph, PointRef};
use crate::par;
use crate::pl::{trop_min_all, FunctionError, TropFunction};
use crate::rational::{Rational, Trop};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemimoduleError {
    #[error("a semimodule needs at least one generator")]
    NoGenerators,
    #[error("generator {0} is not finite everywhere")]
    NotTotal(usize),
    #[error("every coefficient is infinite")]
    AllInfinite,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Function(#[from] FunctionError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semimodule {
    graph: Arc<MetricGraph>,
    generators: Vec<TropFunction>,
}

/// Values of the generators at a list of points: `rows[k][i] = f_i(x_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMatrix {
    pub points: Vec<PointRef>,
    pub rows: Vec<Vec<Rational>>,
}

impl EvalMatrix {
    pub fn to_trop(&self) -> Vec<Vec<Trop>> {
        self.rows.iter().map(|r| r.iter().cloned().map(Trop::Fin).collect()).collect()
    }

    pub fn column(&self, i: usize) -> Vec<Rational> {
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

/// One cell of the break-refined model with the generator slopes seen along
/// each of its two orientations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeCell {
    pub edge: EdgeId,
    pub from: Rational,
    pub to: Rational,
    pub toward_end1: BTreeSet<i64>,
    pub toward_end0: BTreeSet<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeProfile {
    pub cells: Vec<SlopeCell>,
}

impl SlopeProfile {
    /// Largest number of distinct slopes along any direction.
    pub fn max_distinct(&self) -> usize {
        self.cells.iter().map(|c| c.toward_end1.len().max(c.toward_end0.len())).max().unwrap_or(0)
    }
}

impl Semimodule {
    pub fn new(generators: Vec<TropFunction>) -> Result<Self, SemimoduleError> {
        let first = generators.first().ok_or(SemimoduleError::NoGenerators)?;
        let graph = first.graph().clone();
        for (i, g) in generators.iter().enumerate() {
            if !g.same_graph(first) {
                return Err(FunctionError::GraphMismatch.into());
            }
            if !g.is_total() {
                return Err(SemimoduleError::NotTotal(i));
            }
        }
        Ok(Semimodule { graph, generators })
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn generators(&self) -> &[TropFunction] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// The tropical combination `min_j (g_j + c_j)`; `∞` coefficients drop
    /// their generator.
    pub fn combine(&self, cs: &[Trop]) -> Result<TropFunction, SemimoduleError> {
        self.check_len(cs.len())?;
        let shifted: Vec<TropFunction> =
            self.generators.iter().zip(cs).filter_map(|(g, c)| c.finite().map(|c| g.shift(c))).collect();
        if shifted.is_empty() {
            return Err(SemimoduleError::AllInfinite);
        }
        let refs: Vec<&TropFunction> = shifted.iter().collect();
        Ok(trop_min_all(&refs)?)
    }

    pub fn combine_finite(&self, cs: &[Rational]) -> Result<TropFunction, SemimoduleError> {
        let cs: Vec<Trop> = cs.iter().cloned().map(Trop::Fin).collect();
        self.combine(&cs)
    }

    pub fn evaluation_matrix(&self, points: &[PointRef]) -> Result<EvalMatrix, SemimoduleError> {
        for p in points {
            self.graph.check_point(p).map_err(FunctionError::from)?;
        }
        let rows = par::map(points, |p| {
            self.generators
                .iter()
                .map(|g| g.evaluate(p).expect("checked point").into_finite().expect("total generator"))
                .collect()
        });
        Ok(EvalMatrix { points: points.to_vec(), rows })
    }

    /// `c_i = max_k (g_k - f_i(x_k))`, the coefficients of the section.
    pub fn section_coefficients(&self, points: &[PointRef], g: &[Rational]) -> Result<Vec<Rational>, SemimoduleError> {
        if g.len() != points.len() {
            return Err(SemimoduleError::LengthMismatch { expected: points.len(), got: g.len() });
        }
        if points.is_empty() {
            return Err(SemimoduleError::LengthMismatch { expected: 1, got: 0 });
        }
        let a = self.evaluation_matrix(points)?;
        Ok((0..self.len())
            .map(|i| a.rows.iter().zip(g).map(|(row, gk)| gk - &row[i]).max().expect("nonempty"))
            .collect())
    }

    /// The smallest element of the module whose values at `points` dominate
    /// `g`. The formula is applied to any `g`; it is the section of the
    /// evaluation map when `g` lies in the image.
    pub fn section_rho(&self, points: &[PointRef], g: &[Rational]) -> Result<TropFunction, SemimoduleError> {
        let cs = self.section_coefficients(points, g)?;
        self.combine_finite(&cs)
    }

    /// Union of all generator breaks, per edge, including both endpoints.
    fn cuts(&self) -> BTreeMap<EdgeId, Vec<Rational>> {
        self.graph
            .edge_ids()
            .map(|e| {
                let mut cuts: Vec<Rational> = self
                    .generators
                    .iter()
                    .flat_map(|g| g.profile(e).expect("total").breaks().iter().cloned())
                    .collect();
                cuts.sort();
                cuts.dedup();
                (e, cuts)
            })
            .collect()
    }

    /// Slope sets per cell of the model refined at every generator break.
    ///
    /// The set of slopes of all elements of the module along a cell equals
    /// the set of generator slopes there: an element is a minimum of shifted
    /// generators, so its slope is one of theirs, and a generator's slope is
    /// realized by giving it a coefficient far below all others.
    pub fn slope_profile(&self) -> SlopeProfile {
        let mut cells = Vec::new();
        for (e, cuts) in self.cuts() {
            for w in cuts.windows(2) {
                let mid = (&w[0] + &w[1]) / Rational::from_integer(2.into());
                let forward: BTreeSet<i64> = self
                    .generators
                    .iter()
                    .map(|g| {
                        let p = g.profile(e).expect("total");
                        let k = p.breaks().partition_point(|b| b <= &mid) - 1;
                        p.slopes()[k]
                    })
                    .collect();
                let backward = forward.iter().map(|s| -s).collect();
                cells.push(SlopeCell {
                    edge: e,
                    from: w[0].clone(),
                    to: w[1].clone(),
                    toward_end1: forward,
                    toward_end0: backward,
                });
            }
        }
        SlopeProfile { cells }
    }

    /// A lower bound on the tropical rank: functions that agree at a point and
    /// have pairwise distinct slopes along a direction there are independent.
    pub fn rank_lower_bound_slopes(&self) -> usize {
        self.slope_profile().max_distinct().max(1)
    }

    /// When every direction carries at most two generator slopes, each element
    /// changes slope at most once per refined edge, so its values at the
    /// refined vertices determine it. Returns those vertices (graph vertices
    /// first, then interior cuts by edge and offset), or `None` otherwise.
    pub fn two_slope_points(&self) -> Option<Vec<PointRef>> {
        if self.slope_profile().max_distinct() > 2 {
            return None;
        }
        let mut points: Vec<PointRef> = self.graph.vertex_ids().map(PointRef::Vertex).collect();
        for (e, cuts) in self.cuts() {
            for t in &cuts[1..cuts.len() - 1] {
                points.push(PointRef::Interior { edge: e, offset: t.clone() });
            }
        }
        Some(points)
    }

    /// Vertices, generator breaks and `levels` rounds of midpoint subdivision of
    /// the break-refined model.
    pub fn refined_points(&self, levels: u32) -> Vec<PointRef> {
        let mut points: Vec<PointRef> = self.graph.vertex_ids().map(PointRef::Vertex).collect();
        for (e, mut cuts) in self.cuts() {
            for _ in 0..levels {
                let mut next = Vec::with_capacity(cuts.len() * 2);
                for w in cuts.windows(2) {
                    next.push(w[0].clone());
                    next.push((&w[0] + &w[1]) / Rational::from_integer(2.into()));
                }
                next.push(cuts.last().unwrap().clone());
                cuts = next;
            }
            for t in &cuts[1..cuts.len() - 1] {
                if !t.is_zero() {
                    points.push(PointRef::Interior { edge: e, offset: t.clone() });
                }
            }
        }
        points
    }

    fn check_len(&self, got: usize) -> Result<(), SemimoduleError> {
        if got != self.len() {
            return Err(SemimoduleError::LengthMismatch { expected: self.len(), got });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, GraphSpec, VertexId};
    use crate::pl::EdgeProfile;
    use crate::rational::{int, ratio};

    fn unit() -> Arc<MetricGraph> {
        Arc::new(
            MetricGraph::from_spec(&GraphSpec {
                vertices: vec!["u".into(), "v".into()],
                edges: vec![EdgeSpec::new("e", "u", "v", int(1))],
                basepoint: "u".into(),
            })
            .unwrap(),
        )
    }

    fn line(g: &Arc<MetricGraph>, s: i64) -> TropFunction {
        TropFunction::total(g.clone(), vec![EdgeProfile::affine(int(1), s, int(0))], BTreeMap::new()).unwrap()
    }

    fn module(slopes: &[i64]) -> Semimodule {
        let g = unit();
        Semimodule::new(slopes.iter().map(|&s| line(&g, s)).collect()).unwrap()
    }

    const U: PointRef = PointRef::Vertex(VertexId(0));
    const V: PointRef = PointRef::Vertex(VertexId(1));

    #[test]
    fn combine_examples() {
        let m = module(&[0, 1]);
        let single = m.combine(&[Trop::Inf, Trop::Fin(int(3))]).unwrap();
        assert_eq!(single, m.generators()[1].shift(&int(3)));
        assert_eq!(m.combine_finite(&[int(0), int(0)]).unwrap(), m.generators()[0]);
        let f = m.combine_finite(&[int(0), ratio(-1, 2)]).unwrap();
        let p = f.profile(EdgeId(0)).unwrap();
        assert_eq!(p.breaks(), &[int(0), ratio(1, 2), int(1)]);
        // envelope oracle: min(0, t - 1/2) at sample points
        for k in 0..=20 {
            let t = ratio(k, 20);
            assert_eq!(p.value_at(&t), std::cmp::min(int(0), &t - ratio(1, 2)));
        }
        assert_eq!(m.combine(&[Trop::Inf, Trop::Inf]), Err(SemimoduleError::AllInfinite));
        assert!(m.combine(&[Trop::zero()]).is_err());
    }

    #[test]
    fn evaluation_matrix_examples() {
        let m = module(&[0, 1]);
        let a = m.evaluation_matrix(&[U, V]).unwrap();
        assert_eq!(a.rows, vec![vec![int(0), int(0)], vec![int(0), int(1)]]);
        let c = module(&[0]);
        let a = c.evaluation_matrix(&[U, V, PointRef::Interior { edge: EdgeId(0), offset: ratio(1, 3) }]).unwrap();
        assert!(a.rows.iter().all(|r| r == &vec![int(0)]));
    }

    #[test]
    fn section_examples() {
        let m = module(&[0, 1]);
        let pts = [U, V];
        assert_eq!(m.section_coefficients(&pts, &[int(0), int(0)]).unwrap(), vec![int(0), int(0)]);
        assert_eq!(m.section_rho(&pts, &[int(0), int(0)]).unwrap(), m.generators()[0]);

        // g = eval of generator 2: result below g_2 and equal at the points
        let g2 = m.generators()[1].clone();
        let vals = m.evaluation_matrix(&pts).unwrap().column(1);
        let r = m.section_rho(&pts, &vals).unwrap();
        for k in 0..=10 {
            let p = m.graph().canonical_point(EdgeId(0), &ratio(k, 10)).unwrap();
            assert!(r.evaluate(&p).unwrap() <= g2.evaluate(&p).unwrap());
        }
        for p in &pts {
            assert_eq!(r.evaluate(p).unwrap(), g2.evaluate(p).unwrap());
        }

        let one = module(&[0]);
        assert_eq!(one.section_rho(&[U], &[int(5)]).unwrap(), one.generators()[0].shift(&int(5)));
        assert!(one.section_rho(&[U], &[]).is_err());
    }

    #[test]
    fn slope_examples() {
        let m = module(&[0, 1]);
        let prof = m.slope_profile();
        assert_eq!(prof.cells.len(), 1);
        assert_eq!(prof.cells[0].toward_end1, BTreeSet::from([0, 1]));
        assert_eq!(prof.cells[0].toward_end0, BTreeSet::from([0, -1]));
        assert_eq!(m.rank_lower_bound_slopes(), 2);
        assert_eq!(m.two_slope_points(), Some(vec![U, V]));

        let c = module(&[0]);
        assert_eq!(c.slope_profile().cells[0].toward_end1, BTreeSet::from([0]));
        assert_eq!(c.rank_lower_bound_slopes(), 1);

        let three = module(&[0, 1, 2]);
        assert_eq!(three.rank_lower_bound_slopes(), 3);
        assert_eq!(three.two_slope_points(), None);
    }

    #[test]
    fn rejects_bad_generators() {
        let g = unit();
        assert_eq!(Semimodule::new(vec![]), Err(SemimoduleError::NoGenerators));
        assert_eq!(Semimodule::new(vec![TropFunction::infinity(g)]), Err(SemimoduleError::NotTotal(0)));
    }

    #[test]
    fn refined_points_grow() {
        let m = module(&[0, 1]);
        assert_eq!(m.refined_points(0).len(), 2);
        assert_eq!(m.refined_points(1).len(), 3);
        assert_eq!(m.refined_points(3).len(), 9);
    }
}
