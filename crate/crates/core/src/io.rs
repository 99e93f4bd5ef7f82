//! JSON documents for graphs, functions, divisors, semimodules, games,
//! certificates, constraint systems and 0/1 matrices, plus the result
//! documents reported by the command-line tool.
//!
//! Rationals are written as reduced strings (`"3"`, `"-1/2"`). Maps keep
//! insertion order, so writing the same value twice gives the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::divisor::Divisor;
use crate::gadgets::{CompletedInstance, CspInstance, GadgetError, GeneralizedInstance, MatrixGadget};
use crate::game::{GameCertificate, GameError, MaxAction, MinAction, SignDecision, StochGame};
use crate::graph::{EdgeSpec, GraphError, GraphSpec, MetricGraph, PointRef};
use crate::independence::{IndependenceVerdict, RankEvidence, RankReport, RankValue};
use crate::pl::{EdgeProfile, FunctionError, TropFunction};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::semimodule::{EvalMatrix, Semimodule, SemimoduleError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{at}: bad rational {value:?}")]
    Rational { at: String, value: String },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Semimodule(#[from] SemimoduleError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        IoError::Json { line: e.line(), column: e.column(), message }
    }
}

fn rat(at: impl Into<String>, s: &str) -> Result<Rational, IoError> {
    parse_rational(s).map_err(|_| IoError::Rational { at: at.into(), value: s.to_string() })
}

fn invalid(at: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Invalid { at: at.into(), message: message.into() }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

fn rats(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

// graphs

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    pub basepoint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub ends: [String; 2],
    pub length: String,
}

impl GraphDoc {
    pub fn from_graph(g: &MetricGraph) -> Self {
        let spec = g.to_spec();
        GraphDoc {
            vertices: spec.vertices,
            edges: spec
                .edges
                .into_iter()
                .map(|e| EdgeDoc { id: e.id, ends: e.ends, length: format_rational(&e.length) })
                .collect(),
            basepoint: spec.basepoint,
        }
    }

    pub fn to_spec(&self) -> Result<GraphSpec, IoError> {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let length = rat(format!("edge {:?} length", e.id), &e.length)?;
                Ok(EdgeSpec { id: e.id.clone(), ends: e.ends.clone(), length })
            })
            .collect::<Result<_, IoError>>()?;
        Ok(GraphSpec { vertices: self.vertices.clone(), edges, basepoint: self.basepoint.clone() })
    }

    pub fn build(&self) -> Result<Arc<MetricGraph>, IoError> {
        Ok(Arc::new(MetricGraph::from_spec(&self.to_spec()?)?))
    }
}

pub fn parse_graph(text: &str) -> Result<Arc<MetricGraph>, IoError> {
    serde_json::from_str::<GraphDoc>(text)?.build()
}

// functions

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub edges: IndexMap<String, ProfileDoc>,
    #[serde(default)]
    pub isolated: IndexMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub breaks: Vec<String>,
    pub slopes: Vec<i64>,
    pub start_value: String,
}

impl FunctionDoc {
    pub fn from_function(name: &str, f: &TropFunction) -> Self {
        let g = f.graph();
        FunctionDoc {
            name: name.to_string(),
            edges: f
                .profiles()
                .iter()
                .map(|(e, p)| {
                    let doc = ProfileDoc {
                        breaks: rats(p.breaks()),
                        slopes: p.slopes().to_vec(),
                        start_value: format_rational(p.start_value()),
                    };
                    (g.edge(*e).name.clone(), doc)
                })
                .collect(),
            isolated: f.isolated().iter().map(|(v, x)| (g.vertex_name(*v).to_string(), format_rational(x))).collect(),
        }
    }

    pub fn build(&self, graph: &Arc<MetricGraph>) -> Result<TropFunction, IoError> {
        let at = |what: String| {
            if self.name.is_empty() {
                what
            } else {
                format!("function {:?}: {what}", self.name)
            }
        };
        let mut profiles = BTreeMap::new();
        for (id, p) in &self.edges {
            let e = graph.edge_by_name(id)?;
            let breaks =
                p.breaks.iter().map(|b| rat(at(format!("edge {id:?} breaks")), b)).collect::<Result<Vec<_>, _>>()?;
            let start = rat(at(format!("edge {id:?} start_value")), &p.start_value)?;
            if breaks.last() != Some(&graph.edge(e).length) {
                return Err(invalid(at(format!("edge {id:?}")), "last break must equal the edge length"));
            }
            let profile = EdgeProfile::new(breaks, p.slopes.clone(), start)
                .map_err(|m| invalid(at(format!("edge {id:?}")), m))?;
            profiles.insert(e, profile);
        }
        let mut isolated = BTreeMap::new();
        for (v, x) in &self.isolated {
            isolated.insert(graph.vertex(v)?, rat(at(format!("isolated value at {v:?}")), x)?);
        }
        Ok(TropFunction::new(graph.clone(), profiles, isolated)?)
    }
}

pub fn parse_function(text: &str, graph: &Arc<MetricGraph>) -> Result<TropFunction, IoError> {
    serde_json::from_str::<FunctionDoc>(text)?.build(graph)
}

// divisors

pub fn divisor_doc(g: &MetricGraph, d: &Divisor) -> IndexMap<String, i64> {
    d.support().map(|(p, k)| (g.point_name(p), *k)).collect()
}

pub fn parse_divisor(text: &str, g: &MetricGraph) -> Result<Divisor, IoError> {
    let doc: IndexMap<String, i64> = serde_json::from_str(text)?;
    let mut d = Divisor::zero();
    for (p, k) in doc {
        d.add_at(g.parse_point(&p)?, k);
    }
    Ok(d)
}

// semimodules and bundles

/// A graph given inline or as a path relative to the referring document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Path(String),
    Inline(GraphDoc),
}

/// `{ "graph", "generators" }`; `"functions"` is accepted for `"generators"`.
/// Other sections (provenance, layout) are ignored on reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub graph: GraphRef,
    #[serde(alias = "functions")]
    pub generators: Vec<FunctionDoc>,
}

#[derive(Debug, Clone)]
pub struct Family {
    pub graph: Arc<MetricGraph>,
    pub names: Vec<String>,
    pub functions: Vec<TropFunction>,
}

impl BundleDoc {
    pub fn from_family(graph: &MetricGraph, names: &[String], fs: &[TropFunction]) -> Self {
        BundleDoc {
            graph: GraphRef::Inline(GraphDoc::from_graph(graph)),
            generators: names.iter().zip(fs).map(|(n, f)| FunctionDoc::from_function(n, f)).collect(),
        }
    }

    /// `base` resolves a graph given by path.
    pub fn build(&self, base: Option<&Path>) -> Result<Family, IoError> {
        let graph = match &self.graph {
            GraphRef::Inline(doc) => doc.build()?,
            GraphRef::Path(p) => {
                let path = base.map_or_else(|| Path::new(p).to_path_buf(), |b| b.join(p));
                parse_graph(&read_text(&path)?)?
            }
        };
        let functions = self.generators.iter().map(|f| f.build(&graph)).collect::<Result<Vec<_>, _>>()?;
        let names = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, f)| if f.name.is_empty() { format!("f{}", i + 1) } else { f.name.clone() })
            .collect();
        Ok(Family { graph, names, functions })
    }
}

pub fn parse_bundle(text: &str, base: Option<&Path>) -> Result<Family, IoError> {
    serde_json::from_str::<BundleDoc>(text)?.build(base)
}

pub fn parse_semimodule(text: &str, base: Option<&Path>) -> Result<Semimodule, IoError> {
    Ok(Semimodule::new(parse_bundle(text, base)?.functions)?)
}

pub fn eval_matrix_doc(g: &MetricGraph, m: &EvalMatrix) -> Value {
    json!({
        "points": m.points.iter().map(|p| g.point_name(p)).collect::<Vec<_>>(),
        "rows": m.rows.iter().map(|r| rats(r)).collect::<Vec<_>>(),
    })
}

// games

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub states: Vec<String>,
    pub max_actions: IndexMap<String, IndexMap<String, IndexMap<String, MinActionDoc>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinActionDoc {
    pub payoff: String,
    pub transitions: Vec<(String, String)>,
}

impl GameDoc {
    pub fn from_game(g: &StochGame) -> Self {
        let states = g.states().to_vec();
        let max_actions = (0..g.num_states())
            .map(|i| {
                let acts = g
                    .actions(i)
                    .iter()
                    .map(|a| {
                        let mins = a
                            .min_actions
                            .iter()
                            .map(|b| {
                                let doc = MinActionDoc {
                                    payoff: format_rational(&b.payoff),
                                    transitions: b
                                        .transitions
                                        .iter()
                                        .map(|(j, p)| (states[*j].clone(), format_rational(p)))
                                        .collect(),
                                };
                                (b.label.clone(), doc)
                            })
                            .collect();
                        (a.label.clone(), mins)
                    })
                    .collect();
                (states[i].clone(), acts)
            })
            .collect();
        GameDoc { states, max_actions }
    }

    pub fn build(&self) -> Result<StochGame, IoError> {
        let index: IndexMap<&str, usize> = self.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut actions = vec![Vec::new(); self.states.len()];
        for (state, acts) in &self.max_actions {
            let &i =
                index.get(state.as_str()).ok_or_else(|| invalid("max_actions", format!("unknown state {state:?}")))?;
            for (label, mins) in acts {
                let mut min_actions = Vec::new();
                for (ml, b) in mins {
                    let at = format!("state {state:?}, action {label:?}, min action {ml:?}");
                    let payoff = rat(format!("{at}: payoff"), &b.payoff)?;
                    let transitions = b
                        .transitions
                        .iter()
                        .map(|(s, p)| {
                            let &j = index
                                .get(s.as_str())
                                .ok_or_else(|| invalid(at.clone(), format!("unknown state {s:?}")))?;
                            Ok((j, rat(format!("{at}: probability"), p)?))
                        })
                        .collect::<Result<Vec<_>, IoError>>()?;
                    min_actions.push(MinAction::new(ml.clone(), payoff, transitions));
                }
                actions[i].push(MaxAction { label: label.clone(), min_actions });
            }
        }
        Ok(StochGame::new(self.states.clone(), actions)?)
    }
}

pub fn parse_game(text: &str) -> Result<StochGame, IoError> {
    serde_json::from_str::<GameDoc>(text)?.build()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub kind: String,
    pub c: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
}

impl CertificateDoc {
    pub fn from_certificate(cert: &GameCertificate) -> Self {
        CertificateDoc {
            kind: cert.kind().to_string(),
            c: rats(cert.c()),
            rho: match cert {
                GameCertificate::Eigenpair { rho, .. } => Some(format_rational(rho)),
                _ => None,
            },
        }
    }

    pub fn build(&self) -> Result<GameCertificate, IoError> {
        let c = self.c.iter().enumerate().map(|(i, x)| rat(format!("c[{i}]"), x)).collect::<Result<Vec<_>, _>>()?;
        match (self.kind.as_str(), &self.rho) {
            ("eigenpair", Some(r)) => Ok(GameCertificate::Eigenpair { c, rho: rat("rho", r)? }),
            ("eigenpair", None) => Err(invalid("certificate", "eigenpair needs \"rho\"")),
            ("strict_super", None) => Ok(GameCertificate::StrictSuper(c)),
            ("sub", None) => Ok(GameCertificate::Sub(c)),
            ("strict_super" | "sub", Some(_)) => Err(invalid("certificate", "\"rho\" only belongs to eigenpairs")),
            (k, _) => Err(invalid("certificate", format!("unknown kind {k:?}"))),
        }
    }
}

pub fn parse_certificate(text: &str) -> Result<GameCertificate, IoError> {
    serde_json::from_str::<CertificateDoc>(text)?.build()
}

// constraint systems and matrices

/// Indices are 1-based in documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CspDoc {
    pub n: usize,
    #[serde(default)]
    pub avg: Vec<[usize; 3]>,
    #[serde(default)]
    pub min: Vec<[usize; 3]>,
    pub a: IndexMap<String, i64>,
}

impl CspDoc {
    pub fn from_csp(csp: &CspInstance) -> Self {
        let one = |t: &[usize; 3]| [t[0] + 1, t[1] + 1, t[2] + 1];
        CspDoc {
            n: csp.n,
            avg: csp.avg.iter().map(one).collect(),
            min: csp.min.iter().map(one).collect(),
            a: csp.a.iter().map(|(&(i, j), &x)| (format!("{},{}", i + 1, j + 1), x)).collect(),
        }
    }

    pub fn build(&self) -> Result<CspInstance, IoError> {
        let zero = |what: &str, t: &[usize; 3]| {
            if t.iter().any(|&x| x == 0) {
                Err(invalid(what, format!("indices are 1-based, got {t:?}")))
            } else {
                Ok([t[0] - 1, t[1] - 1, t[2] - 1])
            }
        };
        let avg = self.avg.iter().map(|t| zero("avg", t)).collect::<Result<_, _>>()?;
        let min = self.min.iter().map(|t| zero("min", t)).collect::<Result<_, _>>()?;
        let mut a = BTreeMap::new();
        for (key, &x) in &self.a {
            let parsed = key
                .split_once(',')
                .and_then(|(i, j)| Some((i.trim().parse::<usize>().ok()?, j.trim().parse::<usize>().ok()?)));
            match parsed {
                Some((i, j)) if i > 0 && j > 0 => {
                    if a.insert((i - 1, j - 1), x).is_some() {
                        return Err(invalid("a", format!("pair {key:?} repeated")));
                    }
                }
                _ => return Err(invalid("a", format!("key {key:?} is not \"i,j\" with 1-based indices"))),
            }
        }
        Ok(CspInstance { n: self.n, avg, min, a })
    }
}

pub fn parse_csp(text: &str) -> Result<CspInstance, IoError> {
    serde_json::from_str::<CspDoc>(text)?.build()
}

pub fn parse_matrix(text: &str) -> Result<Vec<Vec<u8>>, IoError> {
    Ok(serde_json::from_str(text)?)
}

// result documents

fn trail(evidence: &[RankEvidence]) -> Vec<Value> {
    evidence
        .iter()
        .map(|e| match e {
            RankEvidence::TwoSlope { points, rank } => {
                json!({"kind": "two_slope", "points": points, "rank": rank})
            }
            RankEvidence::SlopeCount(k) => json!({"kind": "slope_count", "lower": k}),
            RankEvidence::Evaluation { level, points, rank } => {
                json!({"kind": "evaluation", "level": level, "points": points, "lower": rank})
            }
            RankEvidence::Independent(s) => {
                json!({"kind": "independent_subfamily", "generators": one_based(s)})
            }
            RankEvidence::AllDependent(k) => {
                json!({"kind": "all_dependent", "size": k, "upper": k - 1})
            }
            RankEvidence::Generators(k) => json!({"kind": "generators", "upper": k}),
            RankEvidence::Unresolved(s) => {
                json!({"kind": "unresolved_subfamily", "generators": one_based(s)})
            }
            RankEvidence::Skipped(why) => json!({"kind": "skipped", "reason": why}),
        })
        .collect()
}

fn one_based(s: &[usize]) -> Vec<usize> {
    s.iter().map(|i| i + 1).collect()
}

pub fn rank_doc(r: &RankReport) -> Value {
    let value = match r.value {
        RankValue::Exact(k) => json!({"status": "exact", "rank": k}),
        RankValue::Bounds { lo, hi } => json!({"status": "bounds", "lower": lo, "upper": hi}),
    };
    let mut v = value;
    v["evidence"] = Value::Array(trail(&r.evidence));
    v
}

pub fn certificate_value(cert: &GameCertificate) -> Value {
    serde_json::to_value(CertificateDoc::from_certificate(cert)).expect("serializes")
}

pub fn decision_doc(d: &SignDecision) -> Value {
    match d {
        SignDecision::Positive(c) => {
            json!({"verdict": "positive", "certificate": certificate_value(c)})
        }
        SignDecision::NonPositive(c) => {
            json!({"verdict": "nonpositive", "certificate": certificate_value(c)})
        }
        SignDecision::Unresolved { lo, hi, iterations } => json!({
            "verdict": "unresolved",
            "lower": format_rational(lo),
            "upper": format_rational(hi),
            "iterations": iterations,
        }),
    }
}

/// `emit_cert` and `emit_points` control the optional sections.
pub fn independence_doc(
    g: &MetricGraph,
    names: &[String],
    v: &IndependenceVerdict,
    emit_cert: bool,
    emit_points: bool,
) -> Value {
    let mut doc = json!({"verdict": v.name()});
    match v {
        IndependenceVerdict::Independent { certificate, bounds, points, permutation } => {
            doc["rho_bounds"] = json!([format_rational(&bounds.0), format_rational(&bounds.1)]);
            if emit_cert {
                doc["certificate"] = certificate_value(certificate);
            }
            if emit_points {
                let pts: IndexMap<&str, String> =
                    names.iter().map(String::as_str).zip(points.iter().map(|p| g.point_name(p))).collect();
                doc["points"] = json!(pts);
                if let Some(p) = permutation {
                    doc["permutation"] = json!({
                        "unique": p.unique,
                        "value": p.value.to_string(),
                        "minimizers": p.count,
                    });
                }
            }
        }
        IndependenceVerdict::Dependent { certificate, bounds, coefficients } => {
            doc["rho_bounds"] = json!([format_rational(&bounds.0), format_rational(&bounds.1)]);
            let cs: IndexMap<&str, String> =
                names.iter().map(String::as_str).zip(coefficients.iter().map(format_rational)).collect();
            doc["coefficients"] = json!(cs);
            if emit_cert {
                doc["certificate"] = certificate_value(certificate);
            }
        }
        IndependenceVerdict::Unresolved { lo, hi, iterations } => {
            doc["lower"] = json!(format_rational(lo));
            doc["upper"] = json!(format_rational(hi));
            doc["iterations"] = json!(iterations);
        }
    }
    doc
}

pub fn divisor_report(g: &MetricGraph, d: &Divisor) -> Value {
    json!({
        "divisor": divisor_doc(g, d),
        "degree": d.degree(),
        "effective": d.is_effective(),
    })
}

/// The disconnected instance as a bundle plus provenance and layout.
pub fn generalized_doc(gi: &GeneralizedInstance) -> Value {
    let mut doc =
        serde_json::to_value(BundleDoc::from_family(&gi.graph, &gi.names, &gi.functions)).expect("serializes");
    doc["M"] = json!(gi.m);
    doc["provenance"] = json!(gi.provenance);
    doc
}

pub fn completed_doc(ci: &CompletedInstance) -> Value {
    let mut doc =
        serde_json::to_value(BundleDoc::from_family(&ci.graph, &ci.names, &ci.functions)).expect("serializes");
    doc["M"] = json!(ci.m);
    let added: BTreeSet<usize> = (ci.original_edges..ci.graph.num_edges()).collect();
    doc["added_edges"] = json!(added.iter().map(|&e| ci.graph.edges()[e].name.clone()).collect::<Vec<_>>());
    doc["provenance"] = json!(ci.provenance);
    doc
}

pub fn matrix_gadget_doc(m: &MatrixGadget) -> Value {
    let g = m.semimodule.graph();
    let names: Vec<String> = (1..=m.semimodule.len()).map(|j| format!("f{j}")).collect();
    let mut doc =
        serde_json::to_value(BundleDoc::from_family(g, &names, m.semimodule.generators())).expect("serializes");
    let provenance: IndexMap<String, String> =
        m.midpoints.iter().map(|((i, s), p)| (format!("w_{{{},{}}}", i + 1, s + 1), g.point_name(p))).collect();
    doc["provenance"] = json!(provenance);
    doc["evaluation"] = eval_matrix_doc(g, &m.b);
    doc
}

pub fn point_names(g: &MetricGraph, ps: &[PointRef]) -> Vec<String> {
    ps.iter().map(|p| g.point_name(p)).collect()
}
