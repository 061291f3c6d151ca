//! Operator requests: which functionalities are needed on which nodes, with
//! quality and latency bounds, data sources and a value.

use crate::netmodel::Topology;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use thiserror::Error;

/// Whether the model score must stay above (`+1`) or below (`-1`) the
/// requested performance level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    #[default]
    AtLeast,
    AtMost,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::AtLeast => 1.0,
            Direction::AtMost => -1.0,
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Direction::AtLeast),
            -1 => Ok(Direction::AtMost),
            other => Err(serde::de::Error::custom(format!(
                "direction must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// JSON has no infinity; an unbounded latency is written as `null`.
mod unbounded_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// One required `(functionality, target node)` pair of a request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub f: String,
    pub d: String,
    pub min_perf: f64,
    #[serde(default)]
    pub direction: Direction,
    #[serde(with = "unbounded_f64")]
    pub max_latency_s: f64,
    pub data_sources: Vec<String>,
}

impl Requirement {
    pub fn new(f: &str, d: &str, min_perf: f64, max_latency_s: f64, sources: &[&str]) -> Self {
        Self {
            f: f.to_string(),
            d: d.to_string(),
            min_perf,
            direction: Direction::AtLeast,
            max_latency_s,
            data_sources: sources.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub value: f64,
    pub requirements: Vec<Requirement>,
}

impl Request {
    pub fn new(id: &str, value: f64, requirements: Vec<Requirement>) -> Self {
        Self {
            id: id.to_string(),
            value,
            requirements,
        }
    }

    pub fn requires(&self, f: &str, d: &str) -> bool {
        self.requirements.iter().any(|r| r.f == f && r.d == d)
    }

    /// Distinct nodes targeted by at least one requirement.
    pub fn target_nodes(&self) -> BTreeSet<String> {
        self.requirements.iter().map(|r| r.d.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RequestError {
    #[error("duplicate request id `{0}`")]
    DuplicateId(String),
}

/// Outstanding requests, with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Request>", into = "Vec<Request>")]
pub struct RequestSet {
    requests: Vec<Request>,
}

impl TryFrom<Vec<Request>> for RequestSet {
    type Error = RequestError;

    fn try_from(v: Vec<Request>) -> Result<Self, Self::Error> {
        RequestSet::new(v)
    }
}

impl From<RequestSet> for Vec<Request> {
    fn from(rs: RequestSet) -> Self {
        rs.requests
    }
}

impl RequestSet {
    pub fn new(requests: Vec<Request>) -> Result<Self, RequestError> {
        let mut seen = HashSet::new();
        for r in &requests {
            if !seen.insert(r.id.as_str()) {
                return Err(RequestError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self { requests })
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Request> {
        self.requests.iter().find(|r| r.id == id)
    }

    /// `true` iff request `i` requires functionality `f` on node `d`.
    pub fn tau(&self, i: &str, f: &str, d: &str) -> bool {
        self.get(i).is_some_and(|r| r.requires(f, d))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RequestViolation {
    UnknownNode { f: String, d: String, node: String },
    SourceUnreachable { f: String, d: String, source: String },
    NoSources { f: String, d: String },
    DuplicateRequirement { f: String, d: String },
    InvalidLatency { f: String, d: String },
    InvalidValue,
}

impl fmt::Display for RequestViolation {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequestViolation::UnknownNode { f, d, node } => {
                write!(fm, "unknown node `{node}` in ({f}, {d})")
            }
            RequestViolation::SourceUnreachable { f, d, source } => {
                write!(fm, "source unreachable: `{source}` for ({f}, {d})")
            }
            RequestViolation::NoSources { f, d } => write!(fm, "no data sources for ({f}, {d})"),
            RequestViolation::DuplicateRequirement { f, d } => {
                write!(fm, "duplicate requirement ({f}, {d})")
            }
            RequestViolation::InvalidLatency { f, d } => {
                write!(fm, "latency bound for ({f}, {d}) must be >= 0")
            }
            RequestViolation::InvalidValue => write!(fm, "request value must be >= 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub request: String,
    pub violations: Vec<RequestViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks node ids and that every data source can reach its target node.
pub fn validate_request(t: &Topology, r: &Request) -> ValidationReport {
    let mut violations = Vec::new();
    if !(r.value >= 0.0) || !r.value.is_finite() {
        violations.push(RequestViolation::InvalidValue);
    }
    let mut keys = HashSet::new();
    for req in &r.requirements {
        let (f, d) = (req.f.clone(), req.d.clone());
        if !keys.insert((req.f.as_str(), req.d.as_str())) {
            violations.push(RequestViolation::DuplicateRequirement {
                f: f.clone(),
                d: d.clone(),
            });
        }
        if !(req.max_latency_s >= 0.0) {
            violations.push(RequestViolation::InvalidLatency {
                f: f.clone(),
                d: d.clone(),
            });
        }
        if req.data_sources.is_empty() {
            violations.push(RequestViolation::NoSources {
                f: f.clone(),
                d: d.clone(),
            });
        }
        let target = t.get(&req.d);
        if target.is_none() {
            violations.push(RequestViolation::UnknownNode {
                f: f.clone(),
                d: d.clone(),
                node: d.clone(),
            });
        }
        for s in &req.data_sources {
            match (t.get(s), target) {
                (None, _) => violations.push(RequestViolation::UnknownNode {
                    f: f.clone(),
                    d: d.clone(),
                    node: s.clone(),
                }),
                (Some(si), Some(ti)) if !t.reachable_ix(si, ti) => {
                    violations.push(RequestViolation::SourceUnreachable {
                        f: f.clone(),
                        d: d.clone(),
                        source: s.clone(),
                    })
                }
                _ => {}
            }
        }
    }
    ValidationReport {
        request: r.id.clone(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn tau_on_t1() {
        let rs = fixtures::t1_requests();
        assert!(rs.tau("i1", "f1", "D1"));
        assert!(!rs.tau("i1", "f1", "D2"));
        assert!(!rs.tau("nope", "f1", "D1"));
    }

    #[test]
    fn target_nodes_union() {
        let rs = fixtures::t1_requests();
        let i1 = rs.get("i1").unwrap();
        assert_eq!(i1.target_nodes(), BTreeSet::from(["D1".to_string()]));

        let two = Request::new(
            "x",
            1.0,
            vec![
                Requirement::new("f1", "D1", 0.0, 1.0, &["D1"]),
                Requirement::new("f2", "D1", 0.0, 1.0, &["D1"]),
                Requirement::new("f1", "N1", 0.0, 1.0, &["D1"]),
            ],
        );
        assert_eq!(
            two.target_nodes(),
            BTreeSet::from(["D1".to_string(), "N1".to_string()])
        );
        assert!(Request::new("e", 1.0, vec![]).target_nodes().is_empty());
    }

    #[test]
    fn validation_reports() {
        let t = fixtures::t1_topology();
        let rs = fixtures::t1_requests();
        assert!(validate_request(&t, rs.get("i1").unwrap()).is_ok());

        let bad = Request::new("b", 1.0, vec![Requirement::new("f1", "D1", 0.5, 0.1, &["D2"])]);
        let rep = validate_request(&t, &bad);
        assert_eq!(rep.violations.len(), 1);
        assert!(rep.violations[0].to_string().contains("source unreachable"));

        let bad = Request::new("b", 1.0, vec![Requirement::new("f1", "D1", 0.5, 0.1, &["ZZ"])]);
        let rep = validate_request(&t, &bad);
        assert!(rep.violations[0].to_string().contains("unknown node"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = Request::new("a", 1.0, vec![]);
        assert_eq!(
            RequestSet::new(vec![r.clone(), r]).unwrap_err(),
            RequestError::DuplicateId("a".into())
        );
    }

    #[test]
    fn json_schema_and_infinite_latency() {
        let mut r = Request::new("a", 2.0, vec![Requirement::new("f1", "D1", 0.5, 0.1, &["D1"])]);
        r.requirements[0].direction = Direction::AtMost;
        r.requirements[0].max_latency_s = f64::INFINITY;
        let v = serde_json::to_value(&r).unwrap();
        let req = &v["requirements"][0];
        assert_eq!(req["direction"], -1);
        assert!(req["max_latency_s"].is_null());
        for key in ["f", "d", "min_perf", "data_sources"] {
            assert!(req.get(key).is_some(), "missing {key}");
        }
        let back: Request = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
