//! Signal flow graphs with ring-valued transfer gains.
//!
//! Nodes carry quantum signals of a declared mode width; directed arcs carry
//! transfer-map gains. The balance rule is `value(node) = sum over ingoing
//! arcs of gain * origin value + injection`. Two gain computations are
//! provided: a block linear solve on `(I - T(s))` and the matrix forward
//! return loop rule; they agree pointwise, which the tests exercise on
//! random graphs.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cmat::{self, CMat};
use crate::dmatrix::DMatrix;
use crate::error::{Error, Result};
use crate::tfcore::{TransferMap, COND_LIMIT};

/// Handle to a node of a [`SignalFlowGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
struct NodeInfo {
    name: String,
    width: usize,
}

#[derive(Debug, Clone)]
struct ArcInfo {
    from: usize,
    to: usize,
    gain: TransferMap,
}

/// Directed graph of signal nodes and transfer gains.
#[derive(Debug, Clone, Default)]
pub struct SignalFlowGraph {
    nodes: Vec<NodeInfo>,
    arcs: Vec<ArcInfo>,
    names: HashMap<String, usize>,
}

impl SignalFlowGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str, width: usize) -> Result<NodeId> {
        if self.names.contains_key(name) {
            return Err(Error::NodeExists(name.to_string()));
        }
        if width == 0 {
            return Err(Error::InvalidConfig(format!("node `{name}` has zero width")));
        }
        let id = self.nodes.len();
        self.nodes.push(NodeInfo {
            name: name.to_string(),
            width,
        });
        self.names.insert(name.to_string(), id);
        Ok(NodeId(id))
    }

    pub fn node(&self, name: &str) -> Result<NodeId> {
        self.names
            .get(name)
            .map(|&i| NodeId(i))
            .ok_or_else(|| Error::NoSuchNode(name.to_string()))
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].name
    }

    pub fn width(&self, id: NodeId) -> usize {
        self.nodes[id.0].width
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Adds a directed arc; the gain must be `width(to) x width(from)`.
    /// Parallel arcs are allowed and sum.
    pub fn add_arc(&mut self, from: NodeId, to: NodeId, gain: TransferMap) -> Result<()> {
        let expected = (self.width(to), self.width(from));
        if gain.shape() != expected {
            return Err(Error::ShapeMismatch {
                context: "arc gain",
                expected: format!("{}x{}", expected.0, expected.1),
                got: format!("{}x{}", gain.rows(), gain.cols()),
            });
        }
        self.arcs.push(ArcInfo {
            from: from.0,
            to: to.0,
            gain,
        });
        Ok(())
    }

    fn snapshot(&self) -> Arc<Snapshot> {
        // Sum parallel arcs into one effective gain per ordered pair.
        let mut gains: BTreeMap<(usize, usize), Vec<TransferMap>> = BTreeMap::new();
        for arc in &self.arcs {
            gains.entry((arc.from, arc.to)).or_default().push(arc.gain.clone());
        }
        let gains = gains
            .into_iter()
            .map(|(k, v)| {
                let g = if v.len() == 1 {
                    v.into_iter().next().unwrap()
                } else {
                    TransferMap::sum(v).expect("parallel arcs share shape")
                };
                (k, g)
            })
            .collect();
        let widths: Vec<usize> = self.nodes.iter().map(|n| n.width).collect();
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for w in &widths {
            offsets.push(total);
            total += w;
        }
        Arc::new(Snapshot {
            widths,
            offsets,
            total,
            gains,
        })
    }

    /// Gain from `source` to `sink` as the corresponding block of
    /// `(I - T(s))^-1`, where `T` is the block arc-gain matrix.
    pub fn gain_direct_solve(&self, source: NodeId, sink: NodeId) -> Result<TransferMap> {
        let snap = self.snapshot();
        let rows = self.width(sink);
        let cols = self.width(source);
        Ok(TransferMap::from_fn(rows, cols, "sfg-solve", move |s| {
            snap.solve_block(s, source.0, sink.0)
        }))
    }

    /// All simple forward paths from `source` to `sink`, in lexicographic
    /// node order.
    pub fn enumerate_forward_paths(&self, source: NodeId, sink: NodeId) -> Vec<Vec<NodeId>> {
        if source == sink {
            return vec![vec![source]];
        }
        let snap = self.snapshot();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for &(from, to) in snap.gains.keys() {
            adjacency[from].push(to);
        }
        for next in adjacency.iter_mut() {
            next.sort_unstable();
            next.dedup();
        }
        let mut paths = Vec::new();
        let mut stack = vec![source.0];
        let mut on_path = vec![false; self.nodes.len()];
        on_path[source.0] = true;
        Self::dfs_paths(&adjacency, sink.0, &mut stack, &mut on_path, &mut paths);
        paths
    }

    fn dfs_paths(
        adjacency: &[Vec<usize>],
        sink: usize,
        stack: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let here = *stack.last().unwrap();
        if here == sink {
            out.push(stack.iter().map(|&i| NodeId(i)).collect());
            return;
        }
        for &next in &adjacency[here] {
            if !on_path[next] {
                stack.push(next);
                on_path[next] = true;
                Self::dfs_paths(adjacency, sink, stack, on_path, out);
                stack.pop();
                on_path[next] = false;
            }
        }
    }

    /// Forward-return-loop factor of `node` on `path`.
    ///
    /// Every path node strictly downstream of `node` (sink included) is
    /// separated first: all arcs incident to those nodes are removed. The
    /// node is then split into a source copy keeping the outgoing arcs and a
    /// sink copy keeping the ingoing arcs, and the factor is
    /// `(I - gain(copy -> copy))^-1`.
    pub fn frl_factor(&self, path: &[NodeId], node: NodeId) -> Result<TransferMap> {
        let pos = path
            .iter()
            .position(|&n| n == node)
            .ok_or_else(|| Error::InvalidConfig("node does not lie on the path".into()))?;
        if pos == 0 {
            return Err(Error::InvalidConfig(
                "the forward return loop factor is defined for non-source path nodes".into(),
            ));
        }
        self.frl_factor_at(path, pos)
    }

    fn frl_factor_at(&self, path: &[NodeId], pos: usize) -> Result<TransferMap> {
        let node = path[pos];
        let removed: Vec<usize> = path[pos + 1..].iter().map(|n| n.0).collect();
        let width = self.width(node);

        // Rebuild the reduced graph with the node split in two.
        let mut reduced = SignalFlowGraph::new();
        for info in &self.nodes {
            reduced.add_node(&info.name, info.width)?;
        }
        let src_copy = reduced.add_node("__split_out", width)?;
        let dst_copy = reduced.add_node("__split_in", width)?;
        for arc in &self.arcs {
            if removed.contains(&arc.from) || removed.contains(&arc.to) {
                continue;
            }
            let from = if arc.from == node.0 { src_copy } else { NodeId(arc.from) };
            let to = if arc.to == node.0 { dst_copy } else { NodeId(arc.to) };
            reduced.add_arc(from, to, arc.gain.clone())?;
        }
        let loop_gain = reduced.gain_direct_solve(src_copy, dst_copy)?;
        (&TransferMap::identity(width) - &loop_gain).inverse()
    }

    /// Total gain by the matrix forward-return-loop rule: the sum over
    /// forward paths of the path gain interrupted by FRL factors at every
    /// non-source path node (sink included).
    pub fn gain_riegle(&self, source: NodeId, sink: NodeId) -> Result<TransferMap> {
        let paths = self.enumerate_forward_paths(source, sink);
        let snap = self.snapshot();
        let mut contributions = Vec::new();
        for path in &paths {
            // factors F(v_L) g_L F(v_{L-1}) g_{L-1} ... F(v_1) g_1
            let mut chain: Vec<TransferMap> = Vec::new();
            for i in (1..path.len()).rev() {
                chain.push(self.frl_factor_at(path, i)?);
                chain.push(
                    snap.gains
                        .get(&(path[i - 1].0, path[i].0))
                        .expect("path follows arcs")
                        .clone(),
                );
            }
            if path.len() == 1 {
                // Degenerate source == sink query: the gain is the node's
                // own FRL factor with nothing separated.
                contributions.push(self.frl_factor_at(path, 0)?);
            } else {
                contributions.push(TransferMap::product(chain)?);
            }
        }
        if contributions.is_empty() {
            return Ok(TransferMap::zero(self.width(sink), self.width(source)));
        }
        TransferMap::sum(contributions)
    }
}

/// Immutable analysis view with parallel arcs pre-summed.
struct Snapshot {
    widths: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
    gains: BTreeMap<(usize, usize), TransferMap>,
}

impl Snapshot {
    fn solve_block(&self, s: Complex64, source: usize, sink: usize) -> Result<DMatrix> {
        let dim = 2 * self.total;
        let mut t = CMat::zeros(dim, dim);
        for (&(from, to), gain) in &self.gains {
            let block = gain.eval(s)?.to_doubled();
            let (r0, c0) = (2 * self.offsets[to], 2 * self.offsets[from]);
            for r in 0..block.nrows() {
                for c in 0..block.ncols() {
                    t[(r0 + r, c0 + c)] += block[(r, c)];
                }
            }
        }
        let system = CMat::identity(dim, dim) - t;
        let inv = cmat::inv_gated(&system, COND_LIMIT).map_err(|e| match e {
            Error::IllConditioned { cond } => Error::SingularAt { s, cond },
            other => other,
        })?;
        let block = inv.view(
            (2 * self.offsets[sink], 2 * self.offsets[source]),
            (2 * self.widths[sink], 2 * self.widths[source]),
        );
        Ok(DMatrix::from_doubled_symmetrized(&block.into_owned()))
    }
}
