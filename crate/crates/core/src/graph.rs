//! Immutable bipartite interaction graph in CSR layout.
//!
//! Every node owns a contiguous slice of arcs. Arcs are ordered by
//! non-increasing weight, and instead of raw weights each arc stores the
//! running cumulative probability of its node's distribution. The final entry
//! of every non-empty slice is 1.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Node type. `Listing` is one side of the bipartite graph; the others form
/// the opposite side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Query,
    Listing,
    Shop,
    Tag,
}

impl NodeKind {
    pub const ALL: [NodeKind; 4] = [NodeKind::Query, NodeKind::Listing, NodeKind::Shop, NodeKind::Tag];

    /// One-byte tag used by the graph file format.
    pub fn tag(self) -> u8 {
        match self {
            NodeKind::Query => 0,
            NodeKind::Listing => 1,
            NodeKind::Shop => 2,
            NodeKind::Tag => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(NodeKind::Query),
            1 => Some(NodeKind::Listing),
            2 => Some(NodeKind::Shop),
            3 => Some(NodeKind::Tag),
            _ => None,
        }
    }

    pub fn is_listing_side(self) -> bool {
        self == NodeKind::Listing
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Query => "query",
            NodeKind::Listing => "listing",
            NodeKind::Shop => "shop",
            NodeKind::Tag => "tag",
        }
    }

    fn slot(self) -> usize {
        self.tag() as usize
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense node index; the position of the node in the node table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRef {
    pub id: NodeId,
    pub kind: NodeKind,
    pub key: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node table holds {0} nodes, more than a 32-bit id can address")]
    TooManyNodes(usize),
    #[error("duplicate node ({kind}, {key:?})")]
    DuplicateNode { kind: NodeKind, key: String },
    #[error("offsets has length {found}, expected {expected}")]
    OffsetsLength { expected: usize, found: usize },
    #[error("offsets must start at 0 and end at the arc count ({arcs})")]
    OffsetsBounds { arcs: usize },
    #[error("offsets decrease at node {0}")]
    OffsetsDecreasing(NodeId),
    #[error("targets ({targets}) and cdf ({cdf}) lengths differ")]
    ArcArrays { targets: usize, cdf: usize },
    #[error("arc of node {node} points at missing node {target}")]
    TargetOutOfRange { node: NodeId, target: NodeId },
    #[error("cdf of node {node} is not positive and non-decreasing at arc {index}")]
    CdfNotMonotone { node: NodeId, index: usize },
    #[error("cdf of node {node} ends at {last}, expected 1")]
    CdfNotNormalized { node: NodeId, last: f64 },
    #[error("weights of node {node} increase at arc {index}")]
    WeightsNotSorted { node: NodeId, index: usize },
    #[error("arc {source_node} -> {target} joins two nodes on the same side")]
    NotBipartite { source_node: NodeId, target: NodeId },
    #[error("arc {source_node} -> {target} has no reverse arc")]
    NotUndirected { source_node: NodeId, target: NodeId },
    #[error("node {0} does not exist")]
    NodeOutOfRange(NodeId),
    #[error("arc index {index} out of range for node {node} of degree {degree}")]
    ArcIndexOutOfRange { node: NodeId, index: usize, degree: usize },
}

/// Non-fatal findings from [`CsrGraph::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub zero_degree: Vec<NodeId>,
}

/// Node totals per kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindCounts {
    pub queries: usize,
    pub listings: usize,
    pub shops: usize,
    pub tags: usize,
}

impl KindCounts {
    pub fn get(&self, kind: NodeKind) -> usize {
        match kind {
            NodeKind::Query => self.queries,
            NodeKind::Listing => self.listings,
            NodeKind::Shop => self.shops,
            NodeKind::Tag => self.tags,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsrGraph<F> {
    nodes: Vec<NodeRef>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    cdf: Vec<F>,
    index: [HashMap<String, NodeId>; 4],
}

// The key index is derived from `nodes`, so it takes no part in equality.
impl<F: PartialEq> PartialEq for CsrGraph<F> {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.offsets == other.offsets
            && self.targets == other.targets
            && self.cdf == other.cdf
    }
}

impl<F: Scalar> Default for CsrGraph<F> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<F: Scalar> CsrGraph<F> {
    pub fn empty() -> Self {
        CsrGraph {
            nodes: Vec::new(),
            offsets: vec![0],
            targets: Vec::new(),
            cdf: Vec::new(),
            index: Default::default(),
        }
    }

    /// Assembles a graph from raw CSR arrays and checks every structural
    /// invariant. Node ids are assigned by position in `nodes`.
    pub fn from_parts(
        nodes: Vec<(NodeKind, String)>,
        offsets: Vec<usize>,
        targets: Vec<NodeId>,
        cdf: Vec<F>,
    ) -> Result<Self, GraphError> {
        if nodes.len() > u32::MAX as usize {
            return Err(GraphError::TooManyNodes(nodes.len()));
        }
        let mut index: [HashMap<String, NodeId>; 4] = Default::default();
        let mut table = Vec::with_capacity(nodes.len());
        for (i, (kind, key)) in nodes.into_iter().enumerate() {
            let id = NodeId(i as u32);
            if index[kind.slot()].insert(key.clone(), id).is_some() {
                return Err(GraphError::DuplicateNode { kind, key });
            }
            table.push(NodeRef { id, kind, key });
        }
        let graph = CsrGraph { nodes: table, offsets, targets, cdf, index };
        let report = graph.validate()?;
        if !report.zero_degree.is_empty() {
            log::warn!("graph has {} node(s) without arcs", report.zero_degree.len());
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Undirected edges; every edge is stored as two arcs.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn cdf(&self) -> &[F] {
        &self.cdf
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeRef> {
        self.nodes.get(id.index())
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn key(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].key
    }

    pub fn lookup_node(&self, kind: NodeKind, key: &str) -> Option<NodeId> {
        self.index[kind.slot()].get(key).copied()
    }

    #[inline]
    pub fn degree(&self, id: NodeId) -> usize {
        let i = id.index();
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Neighbor ids of `id`, heaviest edge first.
    #[inline]
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        let i = id.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn cdf_slice(&self, id: NodeId) -> &[F] {
        let i = id.index();
        &self.cdf[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Transition probability of the `index`-th arc of `node`, recovered as
    /// the difference of consecutive CDF entries.
    pub fn edge_probability(&self, node: NodeId, index: usize) -> Result<F, GraphError> {
        if node.index() >= self.nodes.len() {
            return Err(GraphError::NodeOutOfRange(node));
        }
        let cdf = self.cdf_slice(node);
        if index >= cdf.len() {
            return Err(GraphError::ArcIndexOutOfRange { node, index, degree: cdf.len() });
        }
        Ok(probability_at(cdf, index))
    }

    pub fn kind_counts(&self) -> KindCounts {
        let mut counts = KindCounts::default();
        for node in &self.nodes {
            match node.kind {
                NodeKind::Query => counts.queries += 1,
                NodeKind::Listing => counts.listings += 1,
                NodeKind::Shop => counts.shops += 1,
                NodeKind::Tag => counts.tags += 1,
            }
        }
        counts
    }

    /// Checks all structural invariants. Degree-0 nodes are reported but
    /// allowed.
    pub fn validate(&self) -> Result<ValidationReport, GraphError> {
        let n = self.nodes.len();
        let arcs = self.targets.len();
        if self.offsets.len() != n + 1 {
            return Err(GraphError::OffsetsLength { expected: n + 1, found: self.offsets.len() });
        }
        if self.offsets[0] != 0 || self.offsets[n] != arcs {
            return Err(GraphError::OffsetsBounds { arcs });
        }
        if self.cdf.len() != arcs {
            return Err(GraphError::ArcArrays { targets: arcs, cdf: self.cdf.len() });
        }
        let tol = F::of(F::CDF_TOLERANCE);
        let mut report = ValidationReport::default();
        for i in 0..n {
            let node = NodeId(i as u32);
            if self.offsets[i + 1] < self.offsets[i] {
                return Err(GraphError::OffsetsDecreasing(node));
            }
            let (start, end) = (self.offsets[i], self.offsets[i + 1]);
            if start == end {
                report.zero_degree.push(node);
                continue;
            }
            let side = self.nodes[i].kind.is_listing_side();
            for &t in &self.targets[start..end] {
                if t.index() >= n {
                    return Err(GraphError::TargetOutOfRange { node, target: t });
                }
                if self.nodes[t.index()].kind.is_listing_side() == side {
                    return Err(GraphError::NotBipartite { source_node: node, target: t });
                }
            }
            let cdf = &self.cdf[start..end];
            let mut prev = F::zero();
            let mut prev_weight = F::infinity();
            for (k, &c) in cdf.iter().enumerate() {
                if !(c > F::zero() && c >= prev) || !c.is_finite() {
                    return Err(GraphError::CdfNotMonotone { node, index: k });
                }
                let w = c - prev;
                if w > prev_weight + tol {
                    return Err(GraphError::WeightsNotSorted { node, index: k });
                }
                prev_weight = w;
                prev = c;
            }
            if (prev - F::one()).abs() > tol {
                return Err(GraphError::CdfNotNormalized { node, last: prev.as_f64() });
            }
        }
        self.check_undirected()?;
        Ok(report)
    }

    fn check_undirected(&self) -> Result<(), GraphError> {
        let mut forward = Vec::with_capacity(self.targets.len());
        for i in 0..self.nodes.len() {
            for &t in &self.targets[self.offsets[i]..self.offsets[i + 1]] {
                forward.push((i as u32, t.0));
            }
        }
        let mut reverse: Vec<(u32, u32)> = forward.iter().map(|&(a, b)| (b, a)).collect();
        forward.sort_unstable();
        reverse.sort_unstable();
        if let Some((&f, &r)) = forward.iter().zip(&reverse).find(|(f, r)| f != r) {
            // At the first mismatch the smaller pair is missing from the other list.
            let (s, t) = if f < r { f } else { (r.1, r.0) };
            return Err(GraphError::NotUndirected { source_node: NodeId(s), target: NodeId(t) });
        }
        Ok(())
    }
}

/// `cdf[index] - cdf[index - 1]`, with `cdf[-1] = 0`.
#[inline]
pub(crate) fn probability_at<F: Scalar>(cdf: &[F], index: usize) -> F {
    if index == 0 {
        cdf[0]
    } else {
        cdf[index] - cdf[index - 1]
    }
}
