//! Piecewise-linear functions with integer slopes on a metric graph, possibly
//! taking the value `∞` off a support made of closed edges and isolated
//! vertices.
//!
//! Every profile is kept canonical (adjacent pieces with equal slope are
//! merged), so structural equality of two [`TropFunction`]s is equality of the
//! functions they represent.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeId, End, GraphError, MetricGraph, PointRef, VertexId};
use crate::rational::{int, Rational, Trop};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionError {
    #[error("edge {edge:?}: {reason}")]
    BadProfile { edge: String, reason: String },
    #[error("values disagree at vertex {0:?}")]
    InconsistentVertex(String),
    #[error("result would be discontinuous at vertex {0:?}")]
    Discontinuous(String),
    #[error("functions live on different graphs")]
    GraphMismatch,
    #[error("function is not finite everywhere")]
    NotTotal,
    #[error("graph is not connected")]
    Disconnected,
    #[error("at least two functions are required")]
    TooFewFunctions,
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An affine map `t ↦ slope·t + intercept` in the offset coordinate of an edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    pub slope: i64,
    pub intercept: Rational,
}

impl Line {
    pub fn new(slope: i64, intercept: Rational) -> Self {
        Line { slope, intercept }
    }

    pub fn at(&self, t: &Rational) -> Rational {
        &self.intercept + t * int(self.slope)
    }

    pub fn shifted(&self, c: &Rational) -> Line {
        Line { slope: self.slope, intercept: &self.intercept + c }
    }

    /// Abscissa where two lines of different slope meet.
    pub fn crossing(&self, other: &Line) -> Option<Rational> {
        if self.slope == other.slope {
            return None;
        }
        Some((&other.intercept - &self.intercept) / int(self.slope - other.slope))
    }
}

/// The restriction of a function to one closed edge `[0, length]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeProfile {
    breaks: Vec<Rational>,
    slopes: Vec<i64>,
    values: Vec<Rational>,
}

impl EdgeProfile {
    /// Breaks `0 = t_0 < … < t_k = length`, one integer slope per piece and the
    /// value at `t_0`.
    pub fn new(breaks: Vec<Rational>, slopes: Vec<i64>, start_value: Rational) -> Result<Self, String> {
        if breaks.len() < 2 {
            return Err("need at least two breaks".into());
        }
        if slopes.len() + 1 != breaks.len() {
            return Err(format!("{} breaks but {} slopes", breaks.len(), slopes.len()));
        }
        if !breaks[0].is_zero() {
            return Err("first break must be 0".into());
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err("breaks must be strictly increasing".into());
        }
        let mut values = Vec::with_capacity(breaks.len());
        values.push(start_value);
        for (k, s) in slopes.iter().enumerate() {
            let v = &values[k] + (&breaks[k + 1] - &breaks[k]) * int(*s);
            values.push(v);
        }
        let mut p = EdgeProfile { breaks, slopes, values };
        p.canonicalize();
        Ok(p)
    }

    pub fn constant(length: Rational, value: Rational) -> Self {
        EdgeProfile { breaks: vec![Rational::zero(), length], slopes: vec![0], values: vec![value.clone(), value] }
    }

    pub fn affine(length: Rational, slope: i64, start_value: Rational) -> Self {
        let end = &start_value + &length * int(slope);
        EdgeProfile { breaks: vec![Rational::zero(), length], slopes: vec![slope], values: vec![start_value, end] }
    }

    /// Builds a profile from consecutive `(from, to, line)` pieces covering
    /// `[0, length]`. The pieces must agree at their junctions.
    pub fn from_pieces(pieces: &[(Rational, Rational, Line)]) -> Result<Self, String> {
        let first = pieces.first().ok_or("no pieces")?;
        let mut breaks = vec![first.0.clone()];
        let mut slopes = Vec::with_capacity(pieces.len());
        for (k, (from, to, line)) in pieces.iter().enumerate() {
            if from != breaks.last().unwrap() {
                return Err("pieces are not contiguous".into());
            }
            if k > 0 {
                let prev = &pieces[k - 1].2;
                if prev.at(from) != line.at(from) {
                    return Err("pieces disagree at a junction".into());
                }
            }
            breaks.push(to.clone());
            slopes.push(line.slope);
        }
        EdgeProfile::new(breaks, slopes, first.2.at(&first.0))
    }

    fn canonicalize(&mut self) {
        let mut k = 1;
        while k < self.slopes.len() {
            if self.slopes[k] == self.slopes[k - 1] {
                self.slopes.remove(k);
                self.breaks.remove(k);
                self.values.remove(k);
            } else {
                k += 1;
            }
        }
    }

    pub fn length(&self) -> &Rational {
        self.breaks.last().unwrap()
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn slopes(&self) -> &[i64] {
        &self.slopes
    }

    pub fn start_value(&self) -> &Rational {
        &self.values[0]
    }

    pub fn values_at_breaks(&self) -> &[Rational] {
        &self.values
    }

    pub fn end_value(&self, end: End) -> &Rational {
        match end {
            End::End0 => &self.values[0],
            End::End1 => self.values.last().unwrap(),
        }
    }

    /// Slope leaving the given end and heading into the edge.
    pub fn outgoing_slope(&self, end: End) -> i64 {
        match end {
            End::End0 => self.slopes[0],
            End::End1 => -*self.slopes.last().unwrap(),
        }
    }

    pub fn line(&self, piece: usize) -> Line {
        let s = self.slopes[piece];
        Line { slope: s, intercept: &self.values[piece] - &self.breaks[piece] * int(s) }
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Rational, Rational, Line)> + '_ {
        (0..self.slopes.len()).map(move |k| (self.breaks[k].clone(), self.breaks[k + 1].clone(), self.line(k)))
    }

    /// Index of the piece containing `t`; a break belongs to the piece on its right
    /// (except the last break).
    fn piece_at(&self, t: &Rational) -> usize {
        let k = self.breaks.partition_point(|b| b <= t);
        k.saturating_sub(1).min(self.slopes.len() - 1)
    }

    pub fn value_at(&self, t: &Rational) -> Rational {
        let k = self.piece_at(t);
        &self.values[k] + (t - &self.breaks[k]) * int(self.slopes[k])
    }

    pub fn shifted(&self, c: &Rational) -> Self {
        EdgeProfile {
            breaks: self.breaks.clone(),
            slopes: self.slopes.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// The lines of this profile restricted to each cell of `cuts`, a refinement
    /// of its breaks.
    fn lines_on(&self, cuts: &[Rational]) -> Vec<Line> {
        cuts.windows(2).map(|w| self.line(self.piece_at(&w[0]))).collect()
    }
}

/// A maximal piece of a lower envelope together with every input index whose
/// line coincides with the envelope there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopePiece {
    pub from: Rational,
    pub to: Rational,
    pub line: Line,
    pub members: Vec<usize>,
}

/// Exact lower envelope of finitely many lines over `[a, b]`, `a < b`. Pieces
/// are maximal: consecutive pieces carry different lines.
pub fn lower_envelope(lines: &[(usize, Line)], a: &Rational, b: &Rational) -> Vec<EnvelopePiece> {
    let mut groups: BTreeMap<&Line, Vec<usize>> = BTreeMap::new();
    for (idx, line) in lines {
        groups.entry(line).or_default().push(*idx);
    }
    let groups: Vec<(&Line, Vec<usize>)> = groups.into_iter().collect();
    if groups.is_empty() {
        return Vec::new();
    }
    let mut cur = (0..groups.len())
        .min_by(|&i, &j| {
            let (li, lj) = (groups[i].0, groups[j].0);
            li.at(a).cmp(&lj.at(a)).then(li.slope.cmp(&lj.slope))
        })
        .unwrap();
    let mut x = a.clone();
    let mut out = Vec::new();
    loop {
        let cl = groups[cur].0;
        let mut next: Option<(Rational, usize)> = None;
        for (g, (line, _)) in groups.iter().enumerate() {
            if line.slope >= cl.slope {
                continue;
            }
            let xc = cl.crossing(line).unwrap();
            if xc <= x || &xc >= b {
                continue;
            }
            let better = match &next {
                None => true,
                Some((bx, bg)) => xc < *bx || (xc == *bx && line.slope < groups[*bg].0.slope),
            };
            if better {
                next = Some((xc, g));
            }
        }
        match next {
            None => {
                out.push(EnvelopePiece { from: x, to: b.clone(), line: cl.clone(), members: groups[cur].1.clone() });
                return out;
            }
            Some((xc, g)) => {
                out.push(EnvelopePiece { from: x, to: xc.clone(), line: cl.clone(), members: groups[cur].1.clone() });
                x = xc;
                cur = g;
            }
        }
    }
}

/// A function on a metric graph with values in `Rational ∪ {∞}`.
///
/// `edges` holds the closed edges of the support; `isolated` holds support
/// vertices not covered by any supported edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropFunction {
    graph: Arc<MetricGraph>,
    edges: BTreeMap<EdgeId, EdgeProfile>,
    isolated: BTreeMap<VertexId, Rational>,
}

impl TropFunction {
    /// Validates lengths and vertex consistency. An isolated value given at a
    /// vertex already covered by a supported edge must agree with it and is
    /// then dropped.
    pub fn new(
        graph: Arc<MetricGraph>,
        edges: BTreeMap<EdgeId, EdgeProfile>,
        isolated: BTreeMap<VertexId, Rational>,
    ) -> Result<Self, FunctionError> {
        for (e, p) in &edges {
            if e.0 >= graph.num_edges() {
                return Err(FunctionError::Graph(GraphError::UnknownEdge(format!("#{}", e.0))));
            }
            let edge = graph.edge(*e);
            if p.length() != &edge.length {
                return Err(FunctionError::BadProfile {
                    edge: edge.name.clone(),
                    reason: format!("profile length {} differs from edge length {}", p.length(), edge.length),
                });
            }
        }
        let mut f = TropFunction { graph, edges, isolated: BTreeMap::new() };
        for v in f.graph.vertex_ids() {
            let mut seen: Option<&Rational> = None;
            for &(e, end) in f.graph.incidence(v) {
                if let Some(p) = f.edges.get(&e) {
                    let val = p.end_value(end);
                    match seen {
                        Some(s) if s != val => {
                            return Err(FunctionError::InconsistentVertex(f.graph.vertex_name(v).to_string()))
                        }
                        _ => seen = Some(val),
                    }
                }
            }
            if let (Some(s), Some(iso)) = (seen, isolated.get(&v)) {
                if s != iso {
                    return Err(FunctionError::InconsistentVertex(f.graph.vertex_name(v).to_string()));
                }
            }
        }
        for (v, val) in isolated {
            if v.0 >= f.graph.num_vertices() {
                return Err(FunctionError::Graph(GraphError::UnknownVertex(format!("#{}", v.0))));
            }
            if !f.covered(v) {
                f.isolated.insert(v, val);
            }
        }
        Ok(f)
    }

    /// The constant `∞` function.
    pub fn infinity(graph: Arc<MetricGraph>) -> Self {
        TropFunction { graph, edges: BTreeMap::new(), isolated: BTreeMap::new() }
    }

    pub fn constant(graph: Arc<MetricGraph>, c: Rational) -> Self {
        let edges =
            graph.edge_ids().map(|e| (e, EdgeProfile::constant(graph.edge(e).length.clone(), c.clone()))).collect();
        let isolated = graph.vertex_ids().filter(|&v| graph.incidence(v).is_empty()).map(|v| (v, c.clone())).collect();
        TropFunction { graph, edges, isolated }
    }

    /// Tropical Dirac function at a vertex with no supported neighbourhood:
    /// `0` at `v`, `∞` elsewhere.
    pub fn dirac(graph: Arc<MetricGraph>, v: VertexId) -> Self {
        TropFunction { graph, edges: BTreeMap::new(), isolated: BTreeMap::from([(v, Rational::zero())]) }
    }

    /// A total function given by one profile per edge (and values at vertices
    /// with no incident edge).
    pub fn total(
        graph: Arc<MetricGraph>,
        profiles: Vec<EdgeProfile>,
        bare_vertices: BTreeMap<VertexId, Rational>,
    ) -> Result<Self, FunctionError> {
        let edges = profiles.into_iter().enumerate().map(|(k, p)| (EdgeId(k), p)).collect();
        let f = TropFunction::new(graph, edges, bare_vertices)?;
        if !f.is_total() {
            return Err(FunctionError::NotTotal);
        }
        Ok(f)
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn profiles(&self) -> &BTreeMap<EdgeId, EdgeProfile> {
        &self.edges
    }

    pub fn profile(&self, e: EdgeId) -> Option<&EdgeProfile> {
        self.edges.get(&e)
    }

    pub fn isolated(&self) -> &BTreeMap<VertexId, Rational> {
        &self.isolated
    }

    fn covered(&self, v: VertexId) -> bool {
        self.graph.incidence(v).iter().any(|(e, _)| self.edges.contains_key(e))
    }

    pub fn is_infinity(&self) -> bool {
        self.edges.is_empty() && self.isolated.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.edges.len() == self.graph.num_edges()
            && self.graph.vertex_ids().all(|v| self.covered(v) || self.isolated.contains_key(&v))
    }

    pub fn same_graph(&self, other: &TropFunction) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph
    }

    pub fn vertex_value(&self, v: VertexId) -> Trop {
        for &(e, end) in self.graph.incidence(v) {
            if let Some(p) = self.edges.get(&e) {
                return Trop::Fin(p.end_value(end).clone());
            }
        }
        match self.isolated.get(&v) {
            Some(x) => Trop::Fin(x.clone()),
            None => Trop::Inf,
        }
    }

    pub fn evaluate(&self, p: &PointRef) -> Result<Trop, FunctionError> {
        self.graph.check_point(p)?;
        Ok(match p {
            PointRef::Vertex(v) => self.vertex_value(*v),
            PointRef::Interior { edge, offset } => match self.edges.get(edge) {
                Some(prof) => Trop::Fin(prof.value_at(offset)),
                None => Trop::Inf,
            },
        })
    }

    /// `f ⊙ c`: adds `c` on the support.
    pub fn shift(&self, c: &Rational) -> Self {
        TropFunction {
            graph: self.graph.clone(),
            edges: self.edges.iter().map(|(e, p)| (*e, p.shifted(c))).collect(),
            isolated: self.isolated.iter().map(|(v, x)| (*v, x + c)).collect(),
        }
    }

    /// `f ⊕ g`: the exact pointwise minimum.
    pub fn trop_min(&self, other: &TropFunction) -> Result<Self, FunctionError> {
        trop_min_all(&[self, other])
    }

    /// Integer-valued points where some profile changes slope, per edge.
    pub fn interior_breaks(&self) -> Vec<PointRef> {
        self.edges
            .iter()
            .flat_map(|(e, p)| {
                p.breaks()[1..p.breaks().len() - 1]
                    .iter()
                    .map(move |t| PointRef::Interior { edge: *e, offset: t.clone() })
            })
            .collect()
    }
}

fn check_same_graph(fs: &[&TropFunction]) -> Result<(), FunctionError> {
    if let Some(first) = fs.first() {
        if fs.iter().any(|f| !f.same_graph(first)) {
            return Err(FunctionError::GraphMismatch);
        }
    }
    Ok(())
}

/// Sorted union of the breaks of several profiles on one edge.
fn merged_cuts<'a>(profiles: impl Iterator<Item = &'a EdgeProfile>) -> Vec<Rational> {
    let mut cuts: Vec<Rational> = profiles.flat_map(|p| p.breaks().iter().cloned()).collect();
    cuts.sort();
    cuts.dedup();
    cuts
}

/// Pointwise minimum of a nonempty family.
pub fn trop_min_all(fs: &[&TropFunction]) -> Result<TropFunction, FunctionError> {
    check_same_graph(fs)?;
    let graph = fs.first().ok_or(FunctionError::TooFewFunctions)?.graph.clone();
    let mut edges = BTreeMap::new();
    for e in graph.edge_ids() {
        let supported: Vec<&EdgeProfile> = fs.iter().filter_map(|f| f.edges.get(&e)).collect();
        match supported.len() {
            0 => {}
            1 => {
                edges.insert(e, supported[0].clone());
            }
            _ => {
                let cuts = merged_cuts(supported.iter().copied());
                let per_profile: Vec<Vec<Line>> = supported.iter().map(|p| p.lines_on(&cuts)).collect();
                let mut pieces: Vec<(Rational, Rational, Line)> = Vec::new();
                for (k, w) in cuts.windows(2).enumerate() {
                    let lines: Vec<(usize, Line)> =
                        per_profile.iter().enumerate().map(|(i, ls)| (i, ls[k].clone())).collect();
                    for piece in lower_envelope(&lines, &w[0], &w[1]) {
                        pieces.push((piece.from, piece.to, piece.line));
                    }
                }
                let prof = EdgeProfile::from_pieces(&pieces)
                    .map_err(|reason| FunctionError::BadProfile { edge: graph.edge(e).name.clone(), reason })?;
                edges.insert(e, prof);
            }
        }
    }
    let mut isolated: BTreeMap<VertexId, Rational> = BTreeMap::new();
    for f in fs {
        for (v, x) in &f.isolated {
            let slot = isolated.entry(*v).or_insert_with(|| x.clone());
            if x < slot {
                *slot = x.clone();
            }
        }
    }
    // an isolated value below the value carried by a supported edge would make
    // the minimum jump at that vertex
    let mut kept = BTreeMap::new();
    for (v, x) in isolated {
        let covered = graph.incidence(v).iter().find_map(|&(e, end)| edges.get(&e).map(|p| p.end_value(end).clone()));
        match covered {
            Some(c) if x < c => return Err(FunctionError::Discontinuous(graph.vertex_name(v).to_string())),
            Some(_) => {}
            None => {
                kept.insert(v, x);
            }
        }
    }
    TropFunction::new(graph, edges, kept)
}

/// A closed piece `[from, to]` of an edge on which every function of a family
/// is affine (`Some`) or identically `∞` (`None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub edge: EdgeId,
    pub from: Rational,
    pub to: Rational,
    pub lines: Vec<Option<Line>>,
}

/// A supported vertex with no supported incident edge, kept for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSegment {
    pub vertex: VertexId,
    pub values: Vec<Trop>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Refinement {
    pub segments: Vec<Segment>,
    pub points: Vec<PointSegment>,
}

/// Splits every edge supported by some function at the union of all breaks.
pub fn common_refinement(fs: &[TropFunction]) -> Result<Refinement, FunctionError> {
    let refs: Vec<&TropFunction> = fs.iter().collect();
    check_same_graph(&refs)?;
    let Some(first) = fs.first() else {
        return Ok(Refinement::default());
    };
    let graph = first.graph.clone();
    let mut out = Refinement::default();
    for e in graph.edge_ids() {
        let cuts = merged_cuts(fs.iter().filter_map(|f| f.edges.get(&e)));
        if cuts.is_empty() {
            continue;
        }
        let per_fn: Vec<Option<Vec<Line>>> = fs.iter().map(|f| f.edges.get(&e).map(|p| p.lines_on(&cuts))).collect();
        for (k, w) in cuts.windows(2).enumerate() {
            out.segments.push(Segment {
                edge: e,
                from: w[0].clone(),
                to: w[1].clone(),
                lines: per_fn.iter().map(|ls| ls.as_ref().map(|ls| ls[k].clone())).collect(),
            });
        }
    }
    for v in graph.vertex_ids() {
        let edge_supported = graph.incidence(v).iter().any(|(e, _)| fs.iter().any(|f| f.edges.contains_key(e)));
        if edge_supported {
            continue;
        }
        let values: Vec<Trop> = fs.iter().map(|f| f.vertex_value(v)).collect();
        if values.iter().any(Trop::is_finite) {
            out.points.push(PointSegment { vertex: v, values });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwiceVerdict {
    Ok,
    Witness(PointRef),
}

impl TwiceVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, TwiceVerdict::Ok)
    }
}

/// Decides exactly whether `min_j (f_j + c_j)` is attained at least twice at
/// every point. Points where every term is `∞` count as attained by all.
///
/// On failure the witness is the midpoint of the first maximal open interval
/// (edges in declaration order) on which a single term is minimal, or else the
/// first offending vertex.
pub fn min_attained_twice(fs: &[TropFunction], cs: &[Rational]) -> Result<TwiceVerdict, FunctionError> {
    if fs.len() < 2 {
        return Err(FunctionError::TooFewFunctions);
    }
    if cs.len() != fs.len() {
        return Err(FunctionError::LengthMismatch { expected: fs.len(), got: cs.len() });
    }
    let refinement = common_refinement(fs)?;
    let graph = fs[0].graph.clone();

    let mut seg_iter = refinement.segments.iter().peekable();
    while let Some(seg) = seg_iter.next() {
        let edge = seg.edge;
        let mut pieces: Vec<EnvelopePiece> = Vec::new();
        let mut push_segment = |seg: &Segment| {
            let lines: Vec<(usize, Line)> =
                seg.lines.iter().enumerate().filter_map(|(j, l)| l.as_ref().map(|l| (j, l.shifted(&cs[j])))).collect();
            for piece in lower_envelope(&lines, &seg.from, &seg.to) {
                match pieces.last_mut() {
                    Some(last) if last.to == piece.from && last.line == piece.line && last.members == piece.members => {
                        last.to = piece.to;
                    }
                    _ => pieces.push(piece),
                }
            }
        };
        push_segment(seg);
        while let Some(next) = seg_iter.peek() {
            if next.edge != edge {
                break;
            }
            push_segment(seg_iter.next().unwrap());
        }
        if let Some(bad) = pieces.iter().find(|p| p.members.len() < 2) {
            let mid = (&bad.from + &bad.to) / int(2);
            return Ok(TwiceVerdict::Witness(graph.canonical_point(edge, &mid)?));
        }
    }

    for v in graph.vertex_ids() {
        let terms: Vec<Rational> =
            fs.iter().zip(cs).filter_map(|(f, c)| f.vertex_value(v).into_finite().map(|x| x + c)).collect();
        if let Some(m) = terms.iter().min() {
            if terms.iter().filter(|x| *x == m).count() < 2 {
                return Ok(TwiceVerdict::Witness(PointRef::Vertex(v)));
            }
        }
    }
    Ok(TwiceVerdict::Ok)
}

/// Offsets `k/den` lying in `[0, length]`, for sampling-based checks.
pub fn sample_offsets(length: &Rational, den: u32) -> Vec<Rational> {
    let d = BigInt::from(den);
    let steps = (length * Rational::from_integer(d.clone())).floor().to_integer();
    let mut out = Vec::new();
    let mut k = BigInt::zero();
    while k <= steps {
        out.push(Rational::new(k.clone(), d.clone()));
        k += 1;
    }
    out.retain(|t| !t.is_negative() && t <= length);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, GraphSpec};
    use crate::rational::ratio;

    pub(crate) fn segment_graph(len: Rational) -> Arc<MetricGraph> {
        Arc::new(
            MetricGraph::from_spec(&GraphSpec {
                vertices: vec!["u".into(), "v".into()],
                edges: vec![EdgeSpec::new("e", "u", "v", len)],
                basepoint: "u".into(),
            })
            .unwrap(),
        )
    }

    fn affine(g: &Arc<MetricGraph>, slope: i64, start: Rational) -> TropFunction {
        let len = g.edge(EdgeId(0)).length.clone();
        TropFunction::total(g.clone(), vec![EdgeProfile::affine(len, slope, start)], BTreeMap::new()).unwrap()
    }

    fn pt(t: Rational) -> PointRef {
        PointRef::Interior { edge: EdgeId(0), offset: t }
    }

    #[test]
    fn evaluate_interpolates() {
        let g = segment_graph(int(1));
        let f = affine(&g, 1, int(0));
        assert_eq!(f.evaluate(&pt(ratio(1, 3))).unwrap(), Trop::Fin(ratio(1, 3)));
        assert_eq!(f.evaluate(&PointRef::Vertex(VertexId(1))).unwrap(), Trop::Fin(int(1)));
        assert!(f.evaluate(&pt(int(2))).is_err());
    }

    #[test]
    fn dirac_function() {
        let g = Arc::new(
            MetricGraph::from_spec(&GraphSpec {
                vertices: vec!["y".into(), "z".into()],
                edges: vec![],
                basepoint: "y".into(),
            })
            .unwrap(),
        );
        let d = TropFunction::dirac(g, VertexId(0));
        assert_eq!(d.evaluate(&PointRef::Vertex(VertexId(0))).unwrap(), Trop::zero());
        assert_eq!(d.evaluate(&PointRef::Vertex(VertexId(1))).unwrap(), Trop::Inf);
    }

    #[test]
    fn min_of_constants_and_lines() {
        let g = segment_graph(int(1));
        let zero = TropFunction::constant(g.clone(), int(0));
        let five = TropFunction::constant(g.clone(), int(5));
        assert_eq!(zero.trop_min(&five).unwrap(), zero);

        let x = affine(&g, 1, int(0));
        let m = zero.trop_min(&x).unwrap();
        assert_eq!(m, zero);
        let p = m.profile(EdgeId(0)).unwrap();
        assert_eq!(p.breaks(), &[int(0), int(1)]);
        assert_eq!(p.slopes(), &[0]);
    }

    #[test]
    fn min_of_crossing_lines_matches_dense_samples() {
        // x - 1 and 1 - x on [-1, 1], stored as offsets t = x + 1 on [0, 2]
        let g = segment_graph(int(2));
        let up = affine(&g, 1, int(-1));
        let down = affine(&g, -1, int(1));
        let m = up.trop_min(&down).unwrap();
        let p = m.profile(EdgeId(0)).unwrap();
        assert_eq!(p.breaks(), &[int(0), int(1), int(2)]);
        assert_eq!(p.slopes(), &[1, -1]);
        assert_eq!(p.value_at(&int(1)), int(0));
        // oracle: compare to the pointwise minimum at 1001 rational samples
        for k in 0..=1000 {
            let t = ratio(2 * k, 1000);
            let q = g.canonical_point(EdgeId(0), &t).unwrap();
            let want = std::cmp::min(up.evaluate(&q).unwrap(), down.evaluate(&q).unwrap());
            assert_eq!(m.evaluate(&q).unwrap(), want);
        }
    }

    #[test]
    fn min_with_isolated_values_rejects_jumps() {
        let g = segment_graph(int(1));
        let f = affine(&g, 1, int(0));
        let d = TropFunction::new(g.clone(), BTreeMap::new(), BTreeMap::from([(VertexId(0), int(-1))])).unwrap();
        assert!(matches!(f.trop_min(&d), Err(FunctionError::Discontinuous(_))));
        let d_hi = TropFunction::new(g.clone(), BTreeMap::new(), BTreeMap::from([(VertexId(0), int(3))])).unwrap();
        assert_eq!(f.trop_min(&d_hi).unwrap(), f);
    }

    #[test]
    fn inconsistent_vertex_rejected() {
        let g = Arc::new(
            MetricGraph::from_spec(&GraphSpec {
                vertices: vec!["a".into(), "b".into(), "c".into()],
                edges: vec![EdgeSpec::new("ab", "a", "b", int(1)), EdgeSpec::new("bc", "b", "c", int(1))],
                basepoint: "a".into(),
            })
            .unwrap(),
        );
        let r = TropFunction::total(
            g,
            vec![EdgeProfile::affine(int(1), 1, int(0)), EdgeProfile::constant(int(1), int(0))],
            BTreeMap::new(),
        );
        assert!(matches!(r, Err(FunctionError::InconsistentVertex(v)) if v == "b"));
    }

    #[test]
    fn profile_merges_equal_slopes() {
        let p = EdgeProfile::new(vec![int(0), ratio(1, 2), int(1)], vec![1, 1], int(0)).unwrap();
        assert_eq!(p, EdgeProfile::affine(int(1), 1, int(0)));
        assert!(EdgeProfile::new(vec![int(0), int(0), int(1)], vec![1, 1], int(0)).is_err());
        assert!(EdgeProfile::new(vec![int(1), int(2)], vec![1], int(0)).is_err());
    }

    #[test]
    fn refinement_examples() {
        let g = segment_graph(int(1));
        let zero = TropFunction::constant(g.clone(), int(0));
        let x = affine(&g, 1, int(0));
        let r = common_refinement(&[zero.clone(), x]).unwrap();
        assert_eq!(r.segments.len(), 1);
        assert_eq!(r.segments[0].lines, vec![Some(Line::new(0, int(0))), Some(Line::new(1, int(0)))]);

        let tent = TropFunction::total(
            g.clone(),
            vec![EdgeProfile::new(vec![int(0), ratio(1, 2), int(1)], vec![1, -1], int(0)).unwrap()],
            BTreeMap::new(),
        )
        .unwrap();
        let r = common_refinement(&[zero, tent]).unwrap();
        let spans: Vec<_> = r.segments.iter().map(|s| (s.from.clone(), s.to.clone())).collect();
        assert_eq!(spans, vec![(int(0), ratio(1, 2)), (ratio(1, 2), int(1))]);
    }

    #[test]
    fn twice_examples() {
        let g = segment_graph(int(1));
        let zero = TropFunction::constant(g.clone(), int(0));
        let x = affine(&g, 1, int(0));
        let v = min_attained_twice(&[zero.clone(), x.clone()], &[int(0), int(0)]).unwrap();
        assert_eq!(v, TwiceVerdict::Witness(pt(ratio(1, 2))));

        let third = zero.trop_min(&x.shift(&ratio(-1, 2))).unwrap();
        let fs = [zero, x, third];
        let v = min_attained_twice(&fs, &[int(0), ratio(-1, 2), int(0)]).unwrap();
        assert_eq!(v, TwiceVerdict::Ok);
        assert!(min_attained_twice(&fs[..1], &[int(0)]).is_err());
        assert!(min_attained_twice(&fs, &[int(0)]).is_err());
    }

    #[test]
    fn twice_on_isolated_vertices() {
        let g = Arc::new(
            MetricGraph::from_spec(&GraphSpec {
                vertices: vec!["p".into(), "q".into()],
                edges: vec![],
                basepoint: "p".into(),
            })
            .unwrap(),
        );
        let dp = TropFunction::dirac(g.clone(), VertexId(0));
        let both = TropFunction::constant(g.clone(), int(0));
        // at q only one finite term
        assert_eq!(
            min_attained_twice(&[dp.clone(), both.clone()], &[int(0), int(0)]).unwrap(),
            TwiceVerdict::Witness(PointRef::Vertex(VertexId(1)))
        );
        // all terms infinite at q counts as attained
        let dp2 = TropFunction::dirac(g, VertexId(0));
        assert!(min_attained_twice(&[dp, dp2], &[int(0), int(0)]).unwrap().is_ok());
    }

    #[test]
    fn envelope_tie_and_identical_lines() {
        let lines = vec![(0, Line::new(0, int(0))), (1, Line::new(0, int(0))), (2, Line::new(1, int(-1)))];
        let env = lower_envelope(&lines, &int(0), &int(2));
        assert_eq!(env.len(), 2);
        assert_eq!(env[0].members, vec![2]);
        assert_eq!(env[0].to, int(1));
        assert_eq!(env[1].members, vec![0, 1]);
    }
}
