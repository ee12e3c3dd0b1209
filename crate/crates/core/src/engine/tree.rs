//! Full response trees: every accept/reject combination at every round.

use std::fmt::Write;

use serde::Serialize;

use crate::error::{invalid, ClearError, Result};
use crate::model::{Allocation, Exchange, Instance, ParticipantSet};
use crate::protocol::{propose, ProtocolConfig, ProtocolKind, RejectedSet};

/// Widest proposal set whose `2^k` outcomes are still expanded.
const MAX_ROUND_WIDTH: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeEdge {
    /// Per proposal of the parent node, in its order: did the exchange execute.
    pub accepted: Vec<bool>,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Empty for leaves.
    pub proposals: Vec<Exchange>,
    pub edges: Vec<TreeEdge>,
    /// Set on leaves only.
    pub terminal: Option<Allocation>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.terminal.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolTree {
    pub protocol: ProtocolKind,
    /// Node 0 is the root; parents precede children.
    pub nodes: Vec<TreeNode>,
}

impl ProtocolTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Number of proposal rounds on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| !n.is_leaf())
            .map(|n| n.depth + 1)
            .max()
            .unwrap_or(0)
    }

    /// True if `ancestor` lies strictly above `node`.
    pub fn is_strict_ancestor(&self, ancestor: usize, node: usize) -> bool {
        let mut cur = self.nodes[node].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p].parent;
        }
        false
    }

    /// Exchanges proposed on the path from the root down to `node`, inclusive.
    pub fn path_proposals(&self, node: usize) -> Vec<Exchange> {
        let mut out = Vec::new();
        let mut cur = Some(node);
        while let Some(id) = cur {
            out.extend(self.nodes[id].proposals.iter().copied());
            cur = self.nodes[id].parent;
        }
        out
    }

    /// Graphviz rendering with agent names and 1-based goods.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph protocol_tree {\n  node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let label = if n.is_leaf() {
                "leaf".to_string()
            } else {
                n.proposals
                    .iter()
                    .map(|e| e.display_named(names))
                    .collect::<Vec<_>>()
                    .join("\\n")
            };
            let shape = if n.is_leaf() { ", shape=ellipse" } else { "" };
            let _ = writeln!(out, "  n{} [label=\"{label}\"{shape}];", n.id);
            for e in &n.edges {
                let bits: String = e.accepted.iter().map(|&a| if a { '1' } else { '0' }).collect();
                let _ = writeln!(out, "  n{} -> n{} [label=\"{bits}\"];", n.id, e.child);
            }
        }
        out.push_str("}\n");
        out
    }
}

struct Pending {
    id: usize,
    allocation: Allocation,
    rejected: RejectedSet,
}

/// Expands every per-round response combination. `budget` caps the number
/// of nodes.
pub fn build_protocol_tree(
    instance: &Instance,
    participants: &ParticipantSet,
    config: &ProtocolConfig,
    budget: u64,
) -> Result<ProtocolTree> {
    participants.validate(instance)?;
    let mut nodes = vec![TreeNode {
        id: 0,
        parent: None,
        depth: 0,
        proposals: Vec::new(),
        edges: Vec::new(),
        terminal: None,
    }];
    let mut stack = vec![Pending {
        id: 0,
        allocation: Allocation::initial(instance),
        rejected: RejectedSet::new(),
    }];
    let over_budget = |count: usize| ClearError::BudgetExceeded {
        what: "protocol tree",
        needed: count as u128,
        budget: u128::from(budget),
    };
    while let Some(Pending {
        id,
        allocation,
        rejected,
    }) = stack.pop()
    {
        let mut proposals = propose(instance, participants, &allocation, &rejected, config);
        proposals.sort();
        if proposals.is_empty() {
            nodes[id].terminal = Some(allocation);
            continue;
        }
        let k = proposals.len();
        if k > MAX_ROUND_WIDTH {
            return Err(invalid(format!(
                "a round with {k} proposals has too many response combinations to expand"
            )));
        }
        let depth = nodes[id].depth;
        nodes[id].proposals = proposals.clone();
        let full = (1u32 << k) - 1;
        // all-accepted outcome first, all-rejected last
        for mask in (0..=full).rev() {
            let accepted: Vec<bool> = (0..k).map(|b| mask & (1 << (k - 1 - b)) != 0).collect();
            let mut next = allocation.clone();
            let mut next_rejected = rejected.clone();
            for (e, &acc) in proposals.iter().zip(&accepted) {
                if acc {
                    next.apply(e);
                } else {
                    next_rejected.insert(*e);
                }
            }
            let child = nodes.len();
            if child as u64 >= budget {
                return Err(over_budget(child + 1));
            }
            let stops = mask == full && config.protocol.stops_when_all_accepted();
            nodes.push(TreeNode {
                id: child,
                parent: Some(id),
                depth: depth + 1,
                proposals: Vec::new(),
                edges: Vec::new(),
                terminal: stops.then(|| next.clone()),
            });
            nodes[id].edges.push(TreeEdge { accepted, child });
            if !stops {
                stack.push(Pending {
                    id: child,
                    allocation: next,
                    rejected: next_rejected,
                });
            }
        }
    }
    Ok(ProtocolTree {
        protocol: config.protocol,
        nodes,
    })
}
