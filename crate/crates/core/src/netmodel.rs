//! Infrastructure tree: typed nodes, per-node resources, and per-link
//! bandwidth/delay.
//!
//! The tree is rooted at the single non-RT RIC. Two nodes can exchange data
//! iff one is an ancestor of the other (or they are the same node); nodes on
//! different branches never reach each other. Multi-hop paths use the
//! bottleneck bandwidth and the summed propagation delay.

use crate::ids::NodeIx;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

/// Logical group of an infrastructure node, from the top of the hierarchy
/// (non-RT RIC) to the bottom (RU).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    #[serde(rename = "non_rt_ric")]
    NonRtRic,
    #[serde(rename = "near_rt_ric")]
    NearRtRic,
    #[serde(rename = "cu")]
    Cu,
    #[serde(rename = "du")]
    Du,
    #[serde(rename = "ru")]
    Ru,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::NonRtRic,
        NodeKind::NearRtRic,
        NodeKind::Cu,
        NodeKind::Du,
        NodeKind::Ru,
    ];

    /// Hierarchy level; 0 is the root level, larger is closer to the radio.
    pub fn level(self) -> usize {
        match self {
            NodeKind::NonRtRic => 0,
            NodeKind::NearRtRic => 1,
            NodeKind::Cu => 2,
            NodeKind::Du => 3,
            NodeKind::Ru => 4,
        }
    }

    /// True for CU, DU and RU (the RAN nodes hosting dApps).
    pub fn is_ran(self) -> bool {
        self.level() >= 2
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::NonRtRic => "non_rt_ric",
            NodeKind::NearRtRic => "near_rt_ric",
            NodeKind::Cu => "cu",
            NodeKind::Du => "du",
            NodeKind::Ru => "ru",
        }
    }
}

/// Amounts of each resource type (`cpu_cores`, `mem_gb`, ...). Missing keys
/// read as zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceVector(pub BTreeMap<String, f64>);

impl ResourceVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, amount: f64) -> Self {
        self.0.insert(key.to_string(), amount);
        self
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, key: &str, amount: f64) {
        self.0.insert(key.to_string(), amount);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn is_zero(&self) -> bool {
        self.0.values().all(|v| *v == 0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.0.values().all(|v| v.is_finite() && *v >= 0.0)
    }

    /// Every amount multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|(k, v)| (k.clone(), v * factor)).collect())
    }

    /// Sum of all amounts, across resource types.
    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub resources: ResourceVector,
    #[serde(default)]
    pub parent: Option<String>,
}

impl Node {
    pub fn new(id: &str, kind: NodeKind, resources: ResourceVector, parent: Option<&str>) -> Self {
        Self {
            id: id.to_string(),
            kind,
            resources,
            parent: parent.map(str::to_string),
        }
    }
}

/// Tree edge. Orientation in documents is free; once built, `a` is the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: String,
    pub b: String,
    #[serde(rename = "bandwidth_Bps")]
    pub bandwidth_bps: f64,
    pub delay_s: f64,
}

impl Link {
    pub fn new(a: &str, b: &str, bandwidth_bps: f64, delay_s: f64) -> Self {
        Self {
            a: a.to_string(),
            b: b.to_string(),
            bandwidth_bps,
            delay_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("topology has no nodes")]
    Empty,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("link or parent reference `{a}`-`{b}` names an unknown node")]
    DanglingLink { a: String, b: String },
    #[error("more than one parentless node: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("parent chain through `{0}` forms a cycle")]
    CycleDetected(String),
    #[error("root `{0}` must be a non-RT RIC")]
    RootKind(String),
    #[error("child `{child}` is not strictly below parent `{parent}` in the node hierarchy")]
    KindOrderViolation { parent: String, child: String },
    #[error("node `{0}` has a parent but no link to it")]
    MissingLink(String),
    #[error("link `{a}`-`{b}` is not a tree edge or is duplicated")]
    NotTreeEdge { a: String, b: String },
    #[error("link `{a}`-`{b}` needs bandwidth > 0 and delay >= 0")]
    InvalidLinkParams { a: String, b: String },
    #[error("node `{0}` has negative or non-finite resources")]
    InvalidResources(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{a}` and `{b}` are on different branches")]
    NotReachable { a: String, b: String },
}

/// Bottleneck bandwidth and summed delay along a tree path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMetrics {
    pub bandwidth_bps: f64,
    pub delay_s: f64,
}

/// Document form of a topology, as read from and written to JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
}

/// Validated infrastructure tree. Immutable once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    index: HashMap<String, NodeIx>,
    parent: Vec<Option<NodeIx>>,
    // (bandwidth, delay) of the link to the parent
    up_link: Vec<Option<(f64, f64)>>,
    children: Vec<Vec<NodeIx>>,
    depth: Vec<usize>,
    /// Preorder entry index and one past the last preorder index of each
    /// subtree.
    span: Vec<(usize, usize)>,
    preorder: Vec<NodeIx>,
    root: NodeIx,
}

impl TryFrom<TopologyDoc> for Topology {
    type Error = TopologyError;

    fn try_from(doc: TopologyDoc) -> Result<Self, Self::Error> {
        Topology::build(doc.nodes, doc.links)
    }
}

impl From<Topology> for TopologyDoc {
    fn from(t: Topology) -> Self {
        TopologyDoc {
            nodes: t.nodes,
            links: t.links,
        }
    }
}

impl Topology {
    /// Validates `nodes` and `links` and indexes the tree.
    ///
    /// Parent pointers on the nodes define the tree; the link list must carry
    /// exactly one link per parent edge, in either orientation.
    pub fn build(nodes: Vec<Node>, links: Vec<Link>) -> Result<Topology, TopologyError> {
        if nodes.is_empty() {
            return Err(TopologyError::Empty);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), NodeIx::new(i)).is_some() {
                return Err(TopologyError::DuplicateNode(n.id.clone()));
            }
            if !n.resources.is_valid() {
                return Err(TopologyError::InvalidResources(n.id.clone()));
            }
        }
        for l in &links {
            if !index.contains_key(&l.a) || !index.contains_key(&l.b) {
                return Err(TopologyError::DanglingLink {
                    a: l.a.clone(),
                    b: l.b.clone(),
                });
            }
        }
        let mut parent = Vec::with_capacity(nodes.len());
        for n in &nodes {
            match &n.parent {
                None => parent.push(None),
                Some(p) => match index.get(p) {
                    Some(&pi) => parent.push(Some(pi)),
                    None => {
                        return Err(TopologyError::DanglingLink {
                            a: p.clone(),
                            b: n.id.clone(),
                        })
                    }
                },
            }
        }

        let roots: Vec<usize> = (0..nodes.len()).filter(|&i| parent[i].is_none()).collect();
        match roots.len() {
            0 => return Err(TopologyError::CycleDetected(nodes[0].id.clone())),
            1 => {}
            _ => {
                return Err(TopologyError::MultipleRoots(
                    roots.iter().map(|&i| nodes[i].id.clone()).collect(),
                ))
            }
        }
        let root = NodeIx::new(roots[0]);

        // depth via memoised parent walks; a walk longer than |D| is a cycle
        let mut depth = vec![usize::MAX; nodes.len()];
        depth[root.idx()] = 0;
        for start in 0..nodes.len() {
            let mut chain = Vec::new();
            let mut cur = start;
            while depth[cur] == usize::MAX {
                chain.push(cur);
                if chain.len() > nodes.len() {
                    return Err(TopologyError::CycleDetected(nodes[start].id.clone()));
                }
                cur = parent[cur].expect("only the root is parentless").idx();
            }
            let mut d = depth[cur];
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
        }

        if nodes[root.idx()].kind != NodeKind::NonRtRic {
            return Err(TopologyError::RootKind(nodes[root.idx()].id.clone()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some(p) = parent[i] {
                let pk = nodes[p.idx()].kind;
                if n.kind.level() <= pk.level() {
                    return Err(TopologyError::KindOrderViolation {
                        parent: nodes[p.idx()].id.clone(),
                        child: n.id.clone(),
                    });
                }
            }
        }

        let mut up_link: Vec<Option<(f64, f64)>> = vec![None; nodes.len()];
        let mut normalized = Vec::with_capacity(links.len());
        for l in links {
            let a = index[&l.a];
            let b = index[&l.b];
            let child = if parent[b.idx()] == Some(a) {
                b
            } else if parent[a.idx()] == Some(b) {
                a
            } else {
                return Err(TopologyError::NotTreeEdge { a: l.a, b: l.b });
            };
            if up_link[child.idx()].is_some() {
                return Err(TopologyError::NotTreeEdge { a: l.a, b: l.b });
            }
            if !(l.bandwidth_bps > 0.0) || !(l.delay_s >= 0.0) || !l.delay_s.is_finite() {
                return Err(TopologyError::InvalidLinkParams { a: l.a, b: l.b });
            }
            up_link[child.idx()] = Some((l.bandwidth_bps, l.delay_s));
            let p = parent[child.idx()].expect("tree edge has a parent");
            normalized.push(Link {
                a: nodes[p.idx()].id.clone(),
                b: nodes[child.idx()].id.clone(),
                bandwidth_bps: l.bandwidth_bps,
                delay_s: l.delay_s,
            });
        }
        for (i, n) in nodes.iter().enumerate() {
            if parent[i].is_some() && up_link[i].is_none() {
                return Err(TopologyError::MissingLink(n.id.clone()));
            }
        }

        let mut children = vec![Vec::new(); nodes.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[p.idx()].push(NodeIx::new(i));
            }
        }
        let mut span = vec![(0, 0); nodes.len()];
        let mut preorder = Vec::with_capacity(nodes.len());
        let mut clock = 0;
        let mut stack = vec![(root, false)];
        while let Some((n, done)) = stack.pop() {
            if done {
                span[n.idx()].1 = clock;
                continue;
            }
            span[n.idx()].0 = clock;
            preorder.push(n);
            clock += 1;
            stack.push((n, true));
            stack.extend(children[n.idx()].iter().rev().map(|&c| (c, false)));
        }

        Ok(Topology {
            nodes,
            links: normalized,
            index,
            parent,
            up_link,
            children,
            depth,
            span,
            preorder,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, ix: NodeIx) -> &Node {
        &self.nodes[ix.idx()]
    }

    pub fn root(&self) -> NodeIx {
        self.root
    }

    pub fn ix(&self, id: &str) -> Result<NodeIx, TopologyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| TopologyError::UnknownNode(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Option<NodeIx> {
        self.index.get(id).copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = NodeIx> + '_ {
        (0..self.nodes.len()).map(NodeIx::new)
    }

    pub fn parent(&self, ix: NodeIx) -> Option<NodeIx> {
        self.parent[ix.idx()]
    }

    pub fn children(&self, ix: NodeIx) -> &[NodeIx] {
        &self.children[ix.idx()]
    }

    pub fn depth(&self, ix: NodeIx) -> usize {
        self.depth[ix.idx()]
    }

    pub fn kind(&self, ix: NodeIx) -> NodeKind {
        self.nodes[ix.idx()].kind
    }

    /// Proper ancestors of `ix`, nearest first.
    pub fn ancestors(&self, ix: NodeIx) -> impl Iterator<Item = NodeIx> + '_ {
        std::iter::successors(self.parent(ix), move |&p| self.parent(p))
    }

    /// All proper descendants of `ix` in depth-first preorder.
    pub fn descendants(&self, ix: NodeIx) -> Vec<NodeIx> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeIx> = self.children(ix).iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    /// Leaves of the subtree rooted at `ix`; `[ix]` when `ix` is itself a leaf.
    pub fn leaf_descendants(&self, ix: NodeIx) -> Vec<NodeIx> {
        if self.children(ix).is_empty() {
            return vec![ix];
        }
        self.descendants(ix)
            .into_iter()
            .filter(|&n| self.children(n).is_empty())
            .collect()
    }

    /// `true` iff `anc` is `ix` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, anc: NodeIx, ix: NodeIx) -> bool {
        let (a, i) = (self.span[anc.idx()], self.span[ix.idx()]);
        a.0 <= i.0 && i.0 < a.1
    }

    /// Every node reachable from `ix`: its ancestors, itself and its
    /// subtree, in index order.
    pub fn reachable_from(&self, ix: NodeIx) -> Vec<NodeIx> {
        let (lo, hi) = self.span[ix.idx()];
        let mut out: Vec<NodeIx> = self.ancestors(ix).chain(self.preorder[lo..hi].iter().copied()).collect();
        out.sort_unstable();
        out
    }

    pub fn reachable_ix(&self, a: NodeIx, b: NodeIx) -> bool {
        self.is_ancestor_or_self(a, b) || self.is_ancestor_or_self(b, a)
    }

    /// Whether data can flow between `a` and `b` (same node, or one is an
    /// ancestor of the other).
    pub fn reachable(&self, a: &str, b: &str) -> Result<bool, TopologyError> {
        Ok(self.reachable_ix(self.ix(a)?, self.ix(b)?))
    }

    /// Child endpoints of the links on the path between two reachable nodes.
    /// Each link is identified by its child node. `None` if not reachable.
    pub fn path_links(&self, a: NodeIx, b: NodeIx) -> Option<Vec<NodeIx>> {
        let (top, bottom) = if self.is_ancestor_or_self(a, b) {
            (a, b)
        } else if self.is_ancestor_or_self(b, a) {
            (b, a)
        } else {
            return None;
        };
        let mut out = Vec::with_capacity(self.depth(bottom) - self.depth(top));
        let mut cur = bottom;
        while cur != top {
            out.push(cur);
            cur = self.parent(cur).expect("walk stops at an ancestor");
        }
        Some(out)
    }

    pub fn path_metrics_ix(&self, a: NodeIx, b: NodeIx) -> Option<PathMetrics> {
        let (top, mut cur) = if self.is_ancestor_or_self(a, b) {
            (a, b)
        } else if self.is_ancestor_or_self(b, a) {
            (b, a)
        } else {
            return None;
        };
        let mut m = PathMetrics {
            bandwidth_bps: f64::INFINITY,
            delay_s: 0.0,
        };
        while cur != top {
            let (bw, delay) = self.up_link[cur.idx()].expect("non-root node has an uplink");
            m.bandwidth_bps = m.bandwidth_bps.min(bw);
            m.delay_s += delay;
            cur = self.parent(cur).expect("walk stops at an ancestor");
        }
        Some(m)
    }

    /// Bottleneck bandwidth and total delay between `a` and `b`;
    /// `(inf, 0)` for `a == b`.
    pub fn path_metrics(&self, a: &str, b: &str) -> Result<PathMetrics, TopologyError> {
        let (ai, bi) = (self.ix(a)?, self.ix(b)?);
        self.path_metrics_ix(ai, bi)
            .ok_or_else(|| TopologyError::NotReachable {
                a: a.to_string(),
                b: b.to_string(),
            })
    }

    /// Induced topology on `members` (which must be closed under parent
    /// links), with per-node resource overrides.
    pub fn restrict(
        &self,
        members: &[NodeIx],
        resource_override: &HashMap<NodeIx, ResourceVector>,
    ) -> Result<Topology, TopologyError> {
        let set: HashSet<NodeIx> = members.iter().copied().collect();
        let mut nodes = Vec::with_capacity(members.len());
        let mut links = Vec::new();
        for &m in members {
            let mut n = self.nodes[m.idx()].clone();
            if let Some(r) = resource_override.get(&m) {
                n.resources = r.clone();
            }
            if let Some(p) = self.parent(m) {
                if !set.contains(&p) {
                    n.parent = None;
                } else {
                    let (bw, d) = self.up_link[m.idx()].expect("uplink");
                    links.push(Link::new(&self.nodes[p.idx()].id, &n.id, bw, d));
                }
            }
            nodes.push(n);
        }
        Topology::build(nodes, links)
    }

    /// Union of the resource type ids present on any node.
    pub fn resource_types(&self) -> Vec<String> {
        let mut keys: Vec<String> = self
            .nodes
            .iter()
            .flat_map(|n| n.resources.keys().map(str::to_string))
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cpu(c: f64) -> ResourceVector {
        ResourceVector::new().with("cpu_cores", c)
    }

    #[test]
    fn single_node_is_valid() {
        let t = Topology::build(
            vec![Node::new("R", NodeKind::NonRtRic, cpu(1.0), None)],
            vec![],
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.reachable("R", "R").unwrap());
    }

    #[test]
    fn t1_builds() {
        let t = fixtures::t1_topology();
        assert_eq!(t.len(), 4);
        assert_eq!(t.links().len(), 3);
        assert_eq!(t.node(t.root()).id, "R0");
    }

    #[test]
    fn two_parentless_nodes() {
        let err = Topology::build(
            vec![
                Node::new("A", NodeKind::NonRtRic, cpu(1.0), None),
                Node::new("B", NodeKind::NonRtRic, cpu(1.0), None),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, TopologyError::MultipleRoots(_)));
    }

    #[test]
    fn cycle_is_detected() {
        let err = Topology::build(
            vec![
                Node::new("R", NodeKind::NonRtRic, cpu(1.0), None),
                Node::new("A", NodeKind::Cu, cpu(1.0), Some("B")),
                Node::new("B", NodeKind::Du, cpu(1.0), Some("A")),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, TopologyError::CycleDetected(_)));
    }

    #[test]
    fn kind_order_and_dangling() {
        let err = Topology::build(
            vec![
                Node::new("R", NodeKind::NonRtRic, cpu(1.0), None),
                Node::new("D", NodeKind::Du, cpu(1.0), Some("R")),
                Node::new("C", NodeKind::Cu, cpu(1.0), Some("D")),
            ],
            vec![Link::new("R", "D", 1.0, 0.0), Link::new("D", "C", 1.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, TopologyError::KindOrderViolation { .. }));

        let err = Topology::build(
            vec![
                Node::new("R", NodeKind::NonRtRic, cpu(1.0), None),
                Node::new("D", NodeKind::Du, cpu(1.0), Some("R")),
            ],
            vec![Link::new("R", "X", 1.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, TopologyError::DanglingLink { .. }));

        let err = Topology::build(
            vec![
                Node::new("R", NodeKind::NonRtRic, cpu(1.0), None),
                Node::new("D", NodeKind::Du, cpu(1.0), Some("R")),
            ],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, TopologyError::MissingLink("D".into()));
    }

    #[test]
    fn reachability_on_t1() {
        let t = fixtures::t1_topology();
        assert!(t.reachable("D1", "D1").unwrap());
        assert!(t.reachable("D1", "N1").unwrap());
        assert!(t.reachable("D1", "R0").unwrap());
        assert!(t.reachable("R0", "D1").unwrap());
        assert!(!t.reachable("D1", "D2").unwrap());
        assert!(matches!(
            t.reachable("D1", "nope"),
            Err(TopologyError::UnknownNode(_))
        ));
    }

    #[test]
    fn path_metrics_on_t1() {
        let t = fixtures::t1_topology();
        let m = t.path_metrics("D1", "D1").unwrap();
        assert!(m.bandwidth_bps.is_infinite());
        assert_eq!(m.delay_s, 0.0);

        let m = t.path_metrics("D1", "N1").unwrap();
        assert_eq!(m.bandwidth_bps, 1e6);
        assert!((m.delay_s - 0.001).abs() < 1e-15);

        let m = t.path_metrics("D1", "R0").unwrap();
        assert_eq!(m.bandwidth_bps, 1e6);
        assert!((m.delay_s - 0.011).abs() < 1e-15);

        assert!(matches!(
            t.path_metrics("D1", "D2"),
            Err(TopologyError::NotReachable { .. })
        ));
    }

    #[test]
    fn json_field_names() {
        let t = fixtures::t1_topology();
        let v = serde_json::to_value(&t).unwrap();
        let link = &v["links"][0];
        assert!(link.get("bandwidth_Bps").is_some());
        assert!(link.get("delay_s").is_some());
        assert!(link.get("a").is_some() && link.get("b").is_some());
        let node = &v["nodes"][1];
        assert_eq!(node["kind"], "near_rt_ric");
        assert_eq!(node["parent"], "R0");
        let back: Topology = serde_json::from_value(v).unwrap();
        assert_eq!(back.nodes(), t.nodes());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn ancestry_matches_parent_walk(seed in 0u64..10_000) {
            let inst = fixtures::random_small(seed, true, f64::INFINITY);
            let t = inst.topology();
            for a in t.indices() {
                let reach = t.reachable_from(a);
                for b in t.indices() {
                    let walk = b == a || t.ancestors(b).any(|x| x == a);
                    proptest::prop_assert_eq!(t.is_ancestor_or_self(a, b), walk);
                    proptest::prop_assert_eq!(reach.contains(&b), t.reachable_ix(a, b));
                }
            }
        }
    }
}
