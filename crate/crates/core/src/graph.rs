//! Metric graphs given by a model `(G, ℓ)` with rational edge lengths, and
//! canonical references to points and tangent directions on them.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// One of the two ends of an edge. Offsets along an edge are measured from
/// `End0` toward `End1`, and every slope in the crate is relative to that
/// orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    End0,
    End1,
}

impl End {
    pub fn index(self) -> usize {
        match self {
            End::End0 => 0,
            End::End1 => 1,
        }
    }

    pub fn opposite(self) -> End {
        match self {
            End::End0 => End::End1,
            End::End1 => End::End0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub ends: [VertexId; 2],
    pub length: Rational,
}

/// A point of the metric graph. Interior offsets satisfy `0 < offset < length`;
/// endpoints are always represented by the vertex itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointRef {
    Vertex(VertexId),
    Interior { edge: EdgeId, offset: Rational },
}

/// A unit tangent direction at a point: leave `at` along `edge`, moving toward
/// the given end.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub at: PointRef,
    pub edge: EdgeId,
    pub toward: End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphIssue {
    NoVertices,
    DuplicateVertex(String),
    DuplicateEdge(String),
    NonpositiveLength { edge: String },
    DanglingEndpoint { edge: String, vertex: String },
    UnknownBasepoint(String),
}

impl fmt::Display for GraphIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphIssue::NoVertices => f.write_str("graph has no vertices"),
            GraphIssue::DuplicateVertex(v) => write!(f, "duplicate vertex id {v:?}"),
            GraphIssue::DuplicateEdge(e) => write!(f, "duplicate edge id {e:?}"),
            GraphIssue::NonpositiveLength { edge } => {
                write!(f, "edge {edge:?}: nonpositive length")
            }
            GraphIssue::DanglingEndpoint { edge, vertex } => {
                write!(f, "edge {edge:?}: endpoint {vertex:?} is not a declared vertex")
            }
            GraphIssue::UnknownBasepoint(v) => {
                write!(f, "basepoint {v:?} is not a declared vertex")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", join_issues(.0))]
    Invalid(Vec<GraphIssue>),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("offset {offset} outside [0, {length}] on edge {edge:?}")]
    OffsetOutOfRange { edge: String, offset: Rational, length: Rational },
    #[error("point is not on this graph")]
    PointNotOnGraph,
    #[error("malformed point reference {0:?}")]
    MalformedPoint(String),
}

fn join_issues(issues: &[GraphIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

/// Unvalidated description of a model, as read from a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub basepoint: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: [String; 2],
    pub length: Rational,
}

impl EdgeSpec {
    pub fn new(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>, length: Rational) -> Self {
        EdgeSpec { id: id.into(), ends: [a.into(), b.into()], length }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub connected: bool,
    pub errors: Vec<GraphIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Collects every problem with a model instead of stopping at the first one.
/// Connectivity is computed over the well-formed part of the model.
pub fn validate_graph(spec: &GraphSpec) -> ValidationReport {
    let mut errors = Vec::new();
    if spec.vertices.is_empty() {
        errors.push(GraphIssue::NoVertices);
    }
    let mut index = HashMap::new();
    for v in &spec.vertices {
        let next = index.len();
        if let Entry::Vacant(slot) = index.entry(v.as_str()) {
            slot.insert(next);
        } else {
            errors.push(GraphIssue::DuplicateVertex(v.clone()));
        }
    }
    let mut seen_edges = HashSet::new();
    let mut adjacency = vec![Vec::new(); index.len()];
    for e in &spec.edges {
        if !seen_edges.insert(e.id.as_str()) {
            errors.push(GraphIssue::DuplicateEdge(e.id.clone()));
        }
        if !e.length.is_positive() {
            errors.push(GraphIssue::NonpositiveLength { edge: e.id.clone() });
        }
        let mut ends = Vec::with_capacity(2);
        for v in &e.ends {
            match index.get(v.as_str()) {
                Some(&i) => ends.push(i),
                None => errors.push(GraphIssue::DanglingEndpoint { edge: e.id.clone(), vertex: v.clone() }),
            }
        }
        if let [a, b] = ends[..] {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    if !spec.vertices.is_empty() && !index.contains_key(spec.basepoint.as_str()) {
        errors.push(GraphIssue::UnknownBasepoint(spec.basepoint.clone()));
    }
    ValidationReport { connected: is_connected(&adjacency), errors }
}

fn is_connected(adjacency: &[Vec<usize>]) -> bool {
    if adjacency.is_empty() {
        return false;
    }
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == adjacency.len()
}

/// A validated model. Immutable once built.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    basepoint: VertexId,
    connected: bool,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    incidence: Vec<Vec<(EdgeId, End)>>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.basepoint == other.basepoint
    }
}

impl Eq for MetricGraph {}

impl MetricGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self, GraphError> {
        let report = validate_graph(spec);
        if !report.is_valid() {
            return Err(GraphError::Invalid(report.errors));
        }
        let vertex_index: HashMap<String, VertexId> =
            spec.vertices.iter().enumerate().map(|(i, v)| (v.clone(), VertexId(i))).collect();
        let mut incidence = vec![Vec::new(); spec.vertices.len()];
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut edge_index = HashMap::new();
        for (k, e) in spec.edges.iter().enumerate() {
            let ends = [vertex_index[&e.ends[0]], vertex_index[&e.ends[1]]];
            incidence[ends[0].0].push((EdgeId(k), End::End0));
            incidence[ends[1].0].push((EdgeId(k), End::End1));
            edge_index.insert(e.id.clone(), EdgeId(k));
            edges.push(Edge { name: e.id.clone(), ends, length: e.length.clone() });
        }
        Ok(MetricGraph {
            vertices: spec.vertices.clone(),
            edges,
            basepoint: vertex_index[&spec.basepoint],
            connected: report.connected,
            vertex_index,
            edge_index,
            incidence,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.name.clone(),
                    ends: [self.vertex_name(e.ends[0]).to_string(), self.vertex_name(e.ends[1]).to_string()],
                    length: e.length.clone(),
                })
                .collect(),
            basepoint: self.vertex_name(self.basepoint).to_string(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId, GraphError> {
        self.vertex_index.get(name).copied().ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn edge_by_name(&self, name: &str) -> Result<EdgeId, GraphError> {
        self.edge_index.get(name).copied().ok_or_else(|| GraphError::UnknownEdge(name.to_string()))
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Edge ends incident to `v`; a self-loop contributes both of its ends.
    pub fn incidence(&self, v: VertexId) -> &[(EdgeId, End)] {
        &self.incidence[v.0]
    }

    pub fn endpoint(&self, e: EdgeId, end: End) -> VertexId {
        self.edges[e.0].ends[end.index()]
    }

    pub fn contains_point(&self, p: &PointRef) -> bool {
        match p {
            PointRef::Vertex(v) => v.0 < self.vertices.len(),
            PointRef::Interior { edge, offset } => {
                self.edges.get(edge.0).map(|e| offset.is_positive() && offset < &e.length).unwrap_or(false)
            }
        }
    }

    pub fn check_point(&self, p: &PointRef) -> Result<(), GraphError> {
        if self.contains_point(p) {
            Ok(())
        } else {
            Err(GraphError::PointNotOnGraph)
        }
    }

    /// The point at distance `offset` from `end0` along `e`; endpoints collapse
    /// to vertices.
    pub fn canonical_point(&self, e: EdgeId, offset: &Rational) -> Result<PointRef, GraphError> {
        let edge = self.edges.get(e.0).ok_or_else(|| GraphError::UnknownEdge(format!("#{}", e.0)))?;
        if offset.is_negative() || offset > &edge.length {
            return Err(GraphError::OffsetOutOfRange {
                edge: edge.name.clone(),
                offset: offset.clone(),
                length: edge.length.clone(),
            });
        }
        Ok(if offset.is_zero() {
            PointRef::Vertex(edge.ends[0])
        } else if offset == &edge.length {
            PointRef::Vertex(edge.ends[1])
        } else {
            PointRef::Interior { edge: e, offset: offset.clone() }
        })
    }

    pub fn incident_directions(&self, p: &PointRef) -> Result<Vec<Direction>, GraphError> {
        self.check_point(p)?;
        Ok(match p {
            PointRef::Vertex(v) => self
                .incidence(*v)
                .iter()
                .map(|&(e, end)| Direction { at: p.clone(), edge: e, toward: end.opposite() })
                .collect(),
            PointRef::Interior { edge, .. } => vec![
                Direction { at: p.clone(), edge: *edge, toward: End::End0 },
                Direction { at: p.clone(), edge: *edge, toward: End::End1 },
            ],
        })
    }

    /// Text form of a point: the vertex id, or `edge@offset` for interior points.
    pub fn point_name(&self, p: &PointRef) -> String {
        match p {
            PointRef::Vertex(v) => self.vertex_name(*v).to_string(),
            PointRef::Interior { edge, offset } => {
                format!("{}@{}", self.edge(*edge).name, format_rational(offset))
            }
        }
    }

    /// Inverse of [`point_name`](Self::point_name). `edge@0` and `edge@length`
    /// are accepted and canonicalized to the endpoint vertices.
    pub fn parse_point(&self, s: &str) -> Result<PointRef, GraphError> {
        if let Some(&v) = self.vertex_index.get(s) {
            return Ok(PointRef::Vertex(v));
        }
        let (e, t) = s.rsplit_once('@').ok_or_else(|| GraphError::MalformedPoint(s.to_string()))?;
        let e = self.edge_by_name(e)?;
        let t = parse_rational(t).map_err(|_| GraphError::MalformedPoint(s.to_string()))?;
        self.canonical_point(e, &t)
    }

    /// Location of a point as (edge, offset) when it lies on an edge; vertices
    /// report their first incident edge end, if any.
    pub fn edge_position(&self, p: &PointRef) -> Option<(EdgeId, Rational)> {
        match p {
            PointRef::Interior { edge, offset } => Some((*edge, offset.clone())),
            PointRef::Vertex(v) => self.incidence(*v).first().map(|&(e, end)| {
                let t = match end {
                    End::End0 => Rational::zero(),
                    End::End1 => self.edge(e).length.clone(),
                };
                (e, t)
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn unit_edge() -> MetricGraph {
        MetricGraph::from_spec(&GraphSpec {
            vertices: vec!["u".into(), "v".into()],
            edges: vec![EdgeSpec::new("e", "u", "v", int(1))],
            basepoint: "u".into(),
        })
        .unwrap()
    }

    #[test]
    fn validation_examples() {
        let ok = validate_graph(&unit_edge().to_spec());
        assert!(ok.connected && ok.errors.is_empty());

        let isolated =
            validate_graph(&GraphSpec { vertices: vec!["a".into(), "b".into()], edges: vec![], basepoint: "a".into() });
        assert!(!isolated.connected);
        assert!(isolated.errors.is_empty());

        let zero = validate_graph(&GraphSpec {
            vertices: vec!["u".into(), "v".into()],
            edges: vec![EdgeSpec::new("e", "u", "v", int(0))],
            basepoint: "u".into(),
        });
        assert_eq!(zero.errors, vec![GraphIssue::NonpositiveLength { edge: "e".into() }]);
    }

    #[test]
    fn validation_collects_every_error() {
        let report = validate_graph(&GraphSpec {
            vertices: vec!["u".into(), "u".into()],
            edges: vec![EdgeSpec::new("e", "u", "w", int(-1)), EdgeSpec::new("e", "u", "u", int(1))],
            basepoint: "z".into(),
        });
        assert_eq!(report.errors.len(), 5, "{:?}", report.errors);
        assert!(MetricGraph::from_spec(&GraphSpec {
            vertices: vec!["u".into()],
            edges: vec![],
            basepoint: "z".into()
        })
        .is_err());
    }

    #[test]
    fn canonical_points() {
        let g = unit_edge();
        let e = EdgeId(0);
        assert_eq!(g.canonical_point(e, &int(0)).unwrap(), PointRef::Vertex(VertexId(0)));
        assert_eq!(g.canonical_point(e, &int(1)).unwrap(), PointRef::Vertex(VertexId(1)));
        assert_eq!(g.canonical_point(e, &ratio(1, 2)).unwrap(), PointRef::Interior { edge: e, offset: ratio(1, 2) });
        assert!(matches!(g.canonical_point(e, &ratio(3, 2)), Err(GraphError::OffsetOutOfRange { .. })));
        assert!(g.canonical_point(e, &ratio(-1, 2)).is_err());
    }

    #[test]
    fn canonical_point_is_idempotent() {
        let g = unit_edge();
        for k in 0..=8 {
            let t = ratio(k, 8);
            let p = g.canonical_point(EdgeId(0), &t).unwrap();
            if let PointRef::Interior { edge, offset } = &p {
                assert_eq!(g.canonical_point(*edge, offset).unwrap(), p);
            }
        }
    }

    #[test]
    fn directions() {
        let g = unit_edge();
        let mid = PointRef::Interior { edge: EdgeId(0), offset: ratio(1, 2) };
        assert_eq!(g.incident_directions(&mid).unwrap().len(), 2);

        let star = MetricGraph::from_spec(&GraphSpec {
            vertices: vec!["c".into(), "a".into(), "b".into(), "d".into()],
            edges: vec![
                EdgeSpec::new("ca", "c", "a", int(1)),
                EdgeSpec::new("bc", "b", "c", int(2)),
                EdgeSpec::new("cd", "c", "d", ratio(1, 3)),
            ],
            basepoint: "c".into(),
        })
        .unwrap();
        let dirs = star.incident_directions(&PointRef::Vertex(VertexId(0))).unwrap();
        assert_eq!(dirs.len(), 3);
        // every direction points away from the center
        for d in &dirs {
            assert_ne!(star.endpoint(d.edge, d.toward), VertexId(0));
        }

        let lollipop = MetricGraph::from_spec(&GraphSpec {
            vertices: vec!["x".into()],
            edges: vec![EdgeSpec::new("loop", "x", "x", int(1))],
            basepoint: "x".into(),
        })
        .unwrap();
        let dirs = lollipop.incident_directions(&PointRef::Vertex(VertexId(0))).unwrap();
        // brute force: count edge-end incidences at x
        let brute = lollipop.edges().iter().flat_map(|e| e.ends).filter(|&v| v == VertexId(0)).count();
        assert_eq!(dirs.len(), brute);
        assert_eq!(dirs.len(), 2);
        assert_ne!(dirs[0].toward, dirs[1].toward);

        assert!(g.incident_directions(&PointRef::Vertex(VertexId(7))).is_err());
    }

    #[test]
    fn point_names_round_trip() {
        let g = unit_edge();
        for p in [PointRef::Vertex(VertexId(1)), PointRef::Interior { edge: EdgeId(0), offset: ratio(2, 7) }] {
            assert_eq!(g.parse_point(&g.point_name(&p)).unwrap(), p);
        }
        assert_eq!(g.parse_point("e@1").unwrap(), PointRef::Vertex(VertexId(1)));
        assert!(g.parse_point("zz").is_err());
    }
}
