//! Tracked-path decomposition of the focal agent's participation gain.
//!
//! Two all-accepting runs are compared: `E` with the focal agent taking part
//! and `E′` without it. Every executed exchange `((j, r), (k, s))` becomes an
//! edge between the vertices `(j, s)` and `(k, r)`, the two acquisitions it
//! causes, labelled by the run it came from. A vertex carries at most one
//! edge per label, so every connected component is a path or a cycle.
//!
//! Components that touch a focal vertex must be alternating paths that start
//! with an `E` edge at the focal agent. Their end determines how much the
//! focal agent gains from them. Everything else is untracked, and untracked
//! exchanges must balance pair by pair between the two runs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::{execute, PairCount};
use crate::error::{invalid, Result};
use crate::model::{AgentId, Exchange, GoodId, Instance, ParticipantSet, TOL};
use crate::protocol::ProtocolConfig;
use crate::strategies::Profile;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeLabel {
    /// Exchange from the run with the focal agent.
    E,
    /// Exchange from the run without it.
    EPrime,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PathClass {
    /// Even length, ends with an `E′` edge at another agent: gain `1 + β`.
    T1,
    /// Odd length, ends with an `E` edge at another agent: gain `1 − β`.
    T2,
    /// Odd length, ends back at the focal agent: gain `2`.
    T3,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackedPath {
    /// Starts at a focal vertex.
    pub vertices: Vec<(AgentId, GoodId)>,
    pub labels: Vec<EdgeLabel>,
    pub exchanges: Vec<Exchange>,
    pub class: PathClass,
    /// Class formula applied to the path's end agent.
    pub delta: f64,
    /// The same gain recomputed edge by edge.
    pub edge_delta: f64,
}

impl TrackedPath {
    pub fn end_agent(&self) -> AgentId {
        self.vertices.last().expect("paths are non-empty").0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackedReport {
    pub passed: bool,
    pub focal: AgentId,
    pub others: ParticipantSet,
    pub paths: Vec<TrackedPath>,
    pub untracked_e: Vec<PairCount>,
    pub untracked_e_prime: Vec<PairCount>,
    pub u_in: f64,
    pub u_out: f64,
    pub delta_sum: f64,
    pub violations: Vec<String>,
}

struct Edge {
    ends: [usize; 2],
    label: EdgeLabel,
    exchange: Exchange,
}

fn pair_counts(edges: &[&Edge], label: EdgeLabel) -> Vec<PairCount> {
    let mut map: BTreeMap<(AgentId, AgentId), usize> = BTreeMap::new();
    for e in edges.iter().filter(|e| e.label == label) {
        *map.entry(e.exchange.agents()).or_default() += 1;
    }
    map.into_iter()
        .map(|((a, b), count)| PairCount { a, b, count })
        .collect()
}

pub fn tracked_decomposition(
    instance: &Instance,
    others: &ParticipantSet,
    focal: AgentId,
    config: &ProtocolConfig,
) -> Result<TrackedReport> {
    if others.contains(focal) {
        return Err(invalid(format!("focal agent {focal} must not be among the others")));
    }
    let m = instance.num_goods();
    let profile = Profile::accepting();
    let with = execute(instance, &others.with(focal), &profile, config)?;
    let without = execute(instance, others, &profile, config)?;

    let mut edges: Vec<Edge> = Vec::new();
    for (label, trace) in [(EdgeLabel::E, &with), (EdgeLabel::EPrime, &without)] {
        for e in trace.executed() {
            let [d0, d1] = e.deliveries();
            edges.push(Edge {
                ends: [d0.receiver.0 * m + d0.good.0, d1.receiver.0 * m + d1.good.0],
                label,
                exchange: *e,
            });
        }
    }
    let vertex = |v: usize| (AgentId(v / m), GoodId(v % m));
    let beta = |a: AgentId| if a == focal { 0.0 } else { instance.beta(focal, a) };

    let nv = instance.num_agents() * m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (idx, e) in edges.iter().enumerate() {
        adj[e.ends[0]].push(idx);
        adj[e.ends[1]].push(idx);
    }

    let mut violations = Vec::new();
    for (v, inc) in adj.iter().enumerate() {
        for label in [EdgeLabel::E, EdgeLabel::EPrime] {
            let k = inc.iter().filter(|&&e| edges[e].label == label).count();
            if k > 1 {
                let (a, g) = vertex(v);
                violations.push(format!("agent {a} acquires good {g} {k} times in one run"));
            }
        }
    }

    // connected components over the edge set
    let mut comp = vec![usize::MAX; nv];
    let mut components: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for start in 0..nv {
        if comp[start] != usize::MAX || adj[start].is_empty() {
            continue;
        }
        let id = components.len();
        let mut verts = vec![start];
        let mut stack = vec![start];
        comp[start] = id;
        let mut comp_edges = Vec::new();
        while let Some(v) = stack.pop() {
            for &e in &adj[v] {
                let u = if edges[e].ends[0] == v {
                    edges[e].ends[1]
                } else {
                    edges[e].ends[0]
                };
                if edges[e].ends[0] == v {
                    comp_edges.push(e);
                }
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    verts.push(u);
                    stack.push(u);
                }
            }
        }
        components.push((verts, comp_edges));
    }

    let vertex_gain = |v: usize, label: EdgeLabel| -> f64 {
        let (a, _) = vertex(v);
        let sign = if label == EdgeLabel::E { 1.0 } else { -1.0 };
        if a == focal {
            sign
        } else {
            -sign * beta(a)
        }
    };

    let mut paths = Vec::new();
    let mut untracked: Vec<&Edge> = Vec::new();
    for (verts, comp_edges) in &components {
        let touches = verts.iter().any(|&v| vertex(v).0 == focal);
        if !touches {
            untracked.extend(comp_edges.iter().map(|&e| &edges[e]));
            continue;
        }
        let is_path = comp_edges.len() + 1 == verts.len() && verts.iter().all(|&v| adj[v].len() <= 2);
        if !is_path {
            violations.push(format!(
                "component through focal vertex {:?} is not a simple path ({} vertices, {} edges)",
                vertex(verts[0]),
                verts.len(),
                comp_edges.len()
            ));
            continue;
        }
        let start = verts
            .iter()
            .copied()
            .filter(|&v| adj[v].len() == 1 && vertex(v).0 == focal)
            .min();
        let Some(start) = start else {
            violations.push(format!(
                "path through focal agent {focal} does not end at a focal vertex"
            ));
            continue;
        };
        let mut walk_vertices = vec![start];
        let mut labels = Vec::new();
        let mut exchanges = Vec::new();
        let mut edge_delta = 0.0;
        let mut prev_edge = usize::MAX;
        let mut cur = start;
        while let Some(&e) = adj[cur].iter().find(|&&e| e != prev_edge) {
            let next = if edges[e].ends[0] == cur {
                edges[e].ends[1]
            } else {
                edges[e].ends[0]
            };
            edge_delta += vertex_gain(cur, edges[e].label) + vertex_gain(next, edges[e].label);
            labels.push(edges[e].label);
            exchanges.push(edges[e].exchange);
            walk_vertices.push(next);
            prev_edge = e;
            cur = next;
        }
        let alternates = labels
            .iter()
            .enumerate()
            .all(|(idx, &l)| l == if idx % 2 == 0 { EdgeLabel::E } else { EdgeLabel::EPrime });
        if !alternates {
            violations.push(format!(
                "tracked path from {:?} does not alternate E, E' starting with E",
                vertex(start)
            ));
            continue;
        }
        let end = vertex(cur).0;
        let (class, delta) = if labels.len() % 2 == 0 {
            (PathClass::T1, 1.0 + beta(end))
        } else if end == focal {
            (PathClass::T3, 2.0)
        } else {
            (PathClass::T2, 1.0 - beta(end))
        };
        if (delta - edge_delta).abs() > TOL {
            violations.push(format!(
                "path from {:?}: class gain {delta} differs from edge-by-edge gain {edge_delta}",
                vertex(start)
            ));
        }
        paths.push(TrackedPath {
            vertices: walk_vertices.into_iter().map(vertex).collect(),
            labels,
            exchanges,
            class,
            delta,
            edge_delta,
        });
    }

    let untracked_e = pair_counts(&untracked, EdgeLabel::E);
    let untracked_e_prime = pair_counts(&untracked, EdgeLabel::EPrime);
    if untracked_e != untracked_e_prime {
        violations.push(format!(
            "untracked pair counts differ: with focal {untracked_e:?}, without {untracked_e_prime:?}"
        ));
    }
    let u_in = with.utilities[focal.0];
    let u_out = without.utilities[focal.0];
    let delta_sum: f64 = paths.iter().map(|p| p.delta).sum();
    if (delta_sum - (u_in - u_out)).abs() > TOL {
        violations.push(format!(
            "tracked gains sum to {delta_sum} but participation changes utility by {}",
            u_in - u_out
        ));
    }
    Ok(TrackedReport {
        passed: violations.is_empty(),
        focal,
        others: others.clone(),
        paths,
        untracked_e,
        untracked_e_prime,
        u_in,
        u_out,
        delta_sum,
        violations,
    })
}
