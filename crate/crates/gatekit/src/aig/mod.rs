//! And-Inverter Graph data model and structural analyses.
//!
//! An [`Aig`] is a combinational DAG over three gate kinds: primary inputs,
//! two-input ANDs, and inverters. Nodes carry dense ids `0..n` in topological
//! order (every fan-in id precedes its consumer), with all PIs first. The
//! graph is immutable after construction; downstream modules index per-node
//! data (signatures, embeddings) by node id.

mod aiger;
mod rand_gen;

pub use aiger::{parse_aiger, write_aiger};
pub use rand_gen::{random_aig, RandomAigConfig};

use std::collections::BTreeSet;
use thiserror::Error;

/// Dense node index, `0..aig.len()`.
pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigError {
    #[error("malformed AIGER header: {0}")]
    MalformedHeader(String),
    #[error("latches are unsupported (L = {0})")]
    LatchesUnsupported(usize),
    #[error("literal {lit} out of range for M = {max_var}")]
    LiteralOutOfRange { lit: u64, max_var: u64 },
    #[error("cyclic definition involving variable {0}")]
    CyclicDefinition(u64),
    #[error("constant literal {0} unsupported")]
    ConstantLiteralUnsupported(u64),
    #[error("variable {0} defined more than once")]
    DuplicateDefinition(u64),
    #[error("literal {0} references an undefined variable")]
    UndefinedLiteral(u64),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("nodes must be distinct, got {0} twice")]
    IdenticalNodes(NodeId),
    #[error("malformed AIGER body: {0}")]
    MalformedBody(String),
}

/// Gate kind. PIs have no fan-ins, NOT exactly one, AND exactly two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Pi,
    And,
    Not,
}

/// A node together with its fan-ins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Pi,
    And(NodeId, NodeId),
    Not(NodeId),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Pi => GateKind::Pi,
            Gate::And(..) => GateKind::And,
            Gate::Not(..) => GateKind::Not,
        }
    }

    pub fn fanins(&self) -> FaninIter {
        let (a, b) = match *self {
            Gate::Pi => (None, None),
            Gate::Not(x) => (Some(x), None),
            Gate::And(x, y) => (Some(x), Some(y)),
        };
        FaninIter { a, b }
    }
}

pub struct FaninIter {
    a: Option<NodeId>,
    b: Option<NodeId>,
}

impl Iterator for FaninIter {
    type Item = NodeId;
    fn next(&mut self) -> Option<NodeId> {
        self.a.take().or_else(|| self.b.take())
    }
}

/// Topologically ordered combinational AIG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aig {
    gates: Vec<Gate>,
    pis: Vec<NodeId>,
    pos: Vec<NodeId>,
    levels: Vec<u32>,
}

/// The transitive fan-in of one node.
///
/// `support` is exactly the set of PIs reachable backward from `root`;
/// `gates` is every node in the cone, root and PIs included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    pub root: NodeId,
    pub support: BTreeSet<NodeId>,
    pub gates: BTreeSet<NodeId>,
}

/// A cone re-packaged as a standalone circuit, plus the id mapping back
/// into the parent. `node_map[new_id] = old_id`. PIs keep their relative
/// order from the parent so shared simulation patterns line up.
#[derive(Debug, Clone)]
pub struct ConeExtraction {
    pub aig: Aig,
    pub node_map: Vec<NodeId>,
}

impl Aig {
    /// Number of nodes (PIs + gates).
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, n: NodeId) -> Gate {
        self.gates[n]
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn pis(&self) -> &[NodeId] {
        &self.pis
    }

    pub fn pos(&self) -> &[NodeId] {
        &self.pos
    }

    pub fn num_pis(&self) -> usize {
        self.pis.len()
    }

    pub fn num_ands(&self) -> usize {
        self.gates.iter().filter(|g| g.kind() == GateKind::And).count()
    }

    pub fn num_nots(&self) -> usize {
        self.gates.iter().filter(|g| g.kind() == GateKind::Not).count()
    }

    /// Logic level per node: 0 for PIs, 1 + max fan-in level otherwise.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn level(&self, n: NodeId) -> u32 {
        self.levels[n]
    }

    /// Circuit logic depth (maximum level).
    pub fn depth(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    fn check_node(&self, n: NodeId) -> Result<(), AigError> {
        if n < self.gates.len() {
            Ok(())
        } else {
            Err(AigError::UnknownNode(n))
        }
    }

    /// Exact PI support (and full cone gate set) of `node`.
    pub fn support(&self, node: NodeId) -> Result<Cone, AigError> {
        self.check_node(node)?;
        let mut gates = BTreeSet::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if gates.insert(n) {
                stack.extend(self.gates[n].fanins());
            }
        }
        let support = gates
            .iter()
            .copied()
            .filter(|&n| self.gates[n].kind() == GateKind::Pi)
            .collect();
        Ok(Cone {
            root: node,
            support,
            gates,
        })
    }

    /// Per-node support as PI bitsets (`ceil(num_pis/64)` words each),
    /// computed bottom-up: support(g) = union of fan-in supports.
    pub fn support_masks(&self) -> Vec<Box<[u64]>> {
        let words = self.pis.len().div_ceil(64).max(1);
        let mut pi_bit = vec![usize::MAX; self.gates.len()];
        for (k, &pi) in self.pis.iter().enumerate() {
            pi_bit[pi] = k;
        }
        let mut masks: Vec<Box<[u64]>> = Vec::with_capacity(self.gates.len());
        for (n, gate) in self.gates.iter().enumerate() {
            let mut m = vec![0u64; words].into_boxed_slice();
            match *gate {
                Gate::Pi => {
                    let k = pi_bit[n];
                    m[k / 64] |= 1u64 << (k % 64);
                }
                Gate::Not(a) => m.copy_from_slice(&masks[a]),
                Gate::And(a, b) => {
                    for w in 0..words {
                        m[w] = masks[a][w] | masks[b][w];
                    }
                }
            }
            masks.push(m);
        }
        masks
    }

    /// Whether the strict transitive fan-ins of `i` and `j` intersect.
    /// `i` and `j` themselves are excluded from both sets.
    pub fn has_common_predecessor(&self, i: NodeId, j: NodeId) -> Result<bool, AigError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(AigError::IdenticalNodes(i));
        }
        let mut reach_i = vec![false; self.gates.len()];
        let mut stack: Vec<NodeId> = self.gates[i].fanins().collect();
        while let Some(n) = stack.pop() {
            if !reach_i[n] {
                reach_i[n] = true;
                stack.extend(self.gates[n].fanins());
            }
        }
        let mut reach_j = vec![false; self.gates.len()];
        let mut stack: Vec<NodeId> = self.gates[j].fanins().collect();
        while let Some(n) = stack.pop() {
            if !reach_j[n] {
                reach_j[n] = true;
                stack.extend(self.gates[n].fanins());
            }
        }
        Ok((0..self.gates.len()).any(|n| n != i && n != j && reach_i[n] && reach_j[n]))
    }

    /// Extract the cone rooted at `root` as a standalone Aig with `root`
    /// as its single PO. Cone node ids ascend with the parent ids, so the
    /// result is topologically ordered and PIs keep their relative order.
    pub fn extract_cone(&self, root: NodeId) -> Result<ConeExtraction, AigError> {
        let cone = self.support(root)?;
        let node_map: Vec<NodeId> = cone.gates.iter().copied().collect();
        let mut new_id = vec![usize::MAX; self.gates.len()];
        for (new, &old) in node_map.iter().enumerate() {
            new_id[old] = new;
        }
        let mut builder = AigBuilder::new();
        for &old in &node_map {
            match self.gates[old] {
                Gate::Pi => {
                    builder.add_pi();
                }
                Gate::Not(a) => {
                    builder.add_not(new_id[a]).expect("cone order");
                }
                Gate::And(a, b) => {
                    builder.add_and(new_id[a], new_id[b]).expect("cone order");
                }
            }
        }
        let aig = builder.finish(vec![new_id[root]]).expect("cone is acyclic");
        Ok(ConeExtraction { aig, node_map })
    }
}

/// Incremental constructor enforcing the topological-order invariant:
/// fan-ins must already exist when a gate is added.
#[derive(Debug, Default)]
pub struct AigBuilder {
    gates: Vec<Gate>,
    pis: Vec<NodeId>,
}

impl AigBuilder {
    pub fn new() -> Self {
        AigBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn add_pi(&mut self) -> NodeId {
        let id = self.gates.len();
        self.gates.push(Gate::Pi);
        self.pis.push(id);
        id
    }

    pub fn add_and(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AigError> {
        let id = self.gates.len();
        if a >= id {
            return Err(AigError::UnknownNode(a));
        }
        if b >= id {
            return Err(AigError::UnknownNode(b));
        }
        self.gates.push(Gate::And(a, b));
        Ok(id)
    }

    pub fn add_not(&mut self, a: NodeId) -> Result<NodeId, AigError> {
        let id = self.gates.len();
        if a >= id {
            return Err(AigError::UnknownNode(a));
        }
        self.gates.push(Gate::Not(a));
        Ok(id)
    }

    pub fn finish(self, pos: Vec<NodeId>) -> Result<Aig, AigError> {
        for &po in &pos {
            if po >= self.gates.len() {
                return Err(AigError::UnknownNode(po));
            }
        }
        let levels = levelize(&self.gates);
        Ok(Aig {
            gates: self.gates,
            pis: self.pis,
            pos,
            levels,
        })
    }
}

/// Levels in one forward pass over the (already topological) node list.
fn levelize(gates: &[Gate]) -> Vec<u32> {
    let mut levels = vec![0u32; gates.len()];
    for (n, gate) in gates.iter().enumerate() {
        levels[n] = match *gate {
            Gate::Pi => 0,
            Gate::Not(a) => levels[a] + 1,
            Gate::And(a, b) => levels[a].max(levels[b]) + 1,
        };
    }
    levels
}
