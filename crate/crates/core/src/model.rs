//! Domain model: agents, goods, instances, allocations and pairwise exchanges.
//!
//! Goods are freely replicable: giving a copy away never removes it from the
//! giver, so allocations only ever grow. Utilities are linear in holdings with
//! a symmetric negative externality `beta[i][j]` between every pair of agents.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ClearError, Result};

/// Absolute tolerance used for every utility comparison.
pub const TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoodId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl GoodId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for GoodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A problem instance: who initially holds what, and how strongly each pair
/// of agents competes.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    num_agents: usize,
    num_goods: usize,
    initial: Vec<Vec<bool>>,
    beta: Vec<Vec<f64>>,
}

impl Instance {
    /// Builds and validates an instance. `beta` must be symmetric with
    /// off-diagonal entries in the open interval (0, 1); the diagonal is
    /// ignored and stored as zero.
    pub fn new(initial: Vec<Vec<bool>>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let num_agents = initial.len();
        if num_agents == 0 {
            return Err(invalid("instance has no agents"));
        }
        let num_goods = initial[0].len();
        for (a, row) in initial.iter().enumerate() {
            if row.len() != num_goods {
                return Err(ClearError::DimensionMismatch {
                    expected: format!("{num_goods} goods"),
                    found: format!("{} goods in row {a}", row.len()),
                });
            }
        }
        if beta.len() != num_agents {
            return Err(ClearError::DimensionMismatch {
                expected: format!("{num_agents} beta rows"),
                found: format!("{} beta rows", beta.len()),
            });
        }
        let mut beta = beta;
        for (a, row) in beta.iter().enumerate() {
            if row.len() != num_agents {
                return Err(ClearError::DimensionMismatch {
                    expected: format!("{num_agents} beta columns"),
                    found: format!("{} columns in beta row {a}", row.len()),
                });
            }
        }
        for a in 0..num_agents {
            for b in 0..num_agents {
                if a == b {
                    continue;
                }
                let v = beta[a][b];
                if !(v > 0.0 && v < 1.0) {
                    return Err(invalid(format!(
                        "beta[{a}][{b}] = {v} is outside the open interval (0, 1)"
                    )));
                }
                if (v - beta[b][a]).abs() > 1e-12 {
                    return Err(invalid(format!(
                        "beta is not symmetric: beta[{a}][{b}] = {v}, beta[{b}][{a}] = {}",
                        beta[b][a]
                    )));
                }
            }
        }
        for (a, row) in beta.iter_mut().enumerate() {
            row[a] = 0.0;
        }
        Ok(Self {
            num_agents,
            num_goods,
            initial,
            beta,
        })
    }

    /// Convenience constructor from 0/1 rows.
    pub fn from_bits(initial: &[&[u8]], beta: Vec<Vec<f64>>) -> Result<Self> {
        let rows = initial
            .iter()
            .map(|row| row.iter().map(|&b| b != 0).collect())
            .collect();
        Self::new(rows, beta)
    }

    /// Builds a symmetric beta matrix from `(a, b, value)` triples; unspecified
    /// pairs fall back to `default`.
    pub fn beta_from_pairs(n: usize, pairs: &[(usize, usize, f64)], default: f64) -> Vec<Vec<f64>> {
        let mut beta = vec![vec![default; n]; n];
        for &(a, b, v) in pairs {
            beta[a][b] = v;
            beta[b][a] = v;
        }
        for (a, row) in beta.iter_mut().enumerate() {
            row[a] = 0.0;
        }
        beta
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.num_agents).map(AgentId)
    }

    pub fn goods(&self) -> impl Iterator<Item = GoodId> {
        (0..self.num_goods).map(GoodId)
    }

    pub fn holds_initially(&self, agent: AgentId, good: GoodId) -> bool {
        self.initial[agent.0][good.0]
    }

    pub fn initial_rows(&self) -> &[Vec<bool>] {
        &self.initial
    }

    pub fn beta(&self, a: AgentId, b: AgentId) -> f64 {
        self.beta[a.0][b.0]
    }

    pub fn beta_matrix(&self) -> &[Vec<f64>] {
        &self.beta
    }

    /// Distinct off-diagonal competition levels, ascending.
    pub fn distinct_betas(&self) -> Vec<f64> {
        let mut values: Vec<f64> = (0..self.num_agents)
            .flat_map(|a| ((a + 1)..self.num_agents).map(move |b| (a, b)))
            .map(|(a, b)| self.beta[a][b])
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }

    /// Same competition levels, different initial holdings.
    pub fn with_initial(&self, initial: Vec<Vec<bool>>) -> Result<Self> {
        Self::new(initial, self.beta.clone())
    }
}

/// Binary agent-by-good possession matrix, optionally annotated with the agent
/// that supplied each held good (an agent is its own source for initial goods).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    #[serde(with = "crate::format::bits")]
    data: Vec<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Vec<Vec<Option<AgentId>>>>,
}

impl Allocation {
    /// The initial allocation of an instance, with source annotations.
    pub fn initial(instance: &Instance) -> Self {
        let data = instance.initial.clone();
        let source = data
            .iter()
            .enumerate()
            .map(|(a, row)| row.iter().map(|&held| held.then_some(AgentId(a))).collect())
            .collect();
        Self {
            data,
            source: Some(source),
        }
    }

    /// A bare matrix without source annotations.
    pub fn from_matrix(data: Vec<Vec<bool>>) -> Self {
        Self { data, source: None }
    }

    pub fn num_agents(&self) -> usize {
        self.data.len()
    }

    pub fn num_goods(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn holds(&self, agent: AgentId, good: GoodId) -> bool {
        self.data[agent.0][good.0]
    }

    pub fn source(&self, agent: AgentId, good: GoodId) -> Option<AgentId> {
        self.source.as_ref().and_then(|s| s[agent.0][good.0])
    }

    pub fn has_sources(&self) -> bool {
        self.source.is_some()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.data
    }

    pub fn row(&self, agent: AgentId) -> &[bool] {
        &self.data[agent.0]
    }

    pub fn count(&self, agent: AgentId) -> usize {
        self.data[agent.0].iter().filter(|&&h| h).count()
    }

    /// True if `agent` holds every good.
    pub fn is_complete(&self, agent: AgentId) -> bool {
        self.data[agent.0].iter().all(|&h| h)
    }

    /// Records that `receiver` obtained a copy of `good` from `giver`. Receiving
    /// a good already held is a no-op: the agent keeps a single copy and its
    /// original source.
    pub fn grant(&mut self, receiver: AgentId, good: GoodId, giver: AgentId) {
        let cell = &mut self.data[receiver.0][good.0];
        if *cell {
            return;
        }
        *cell = true;
        if let Some(src) = self.source.as_mut() {
            src[receiver.0][good.0] = Some(giver);
        }
    }

    /// Executes a pairwise exchange in place.
    pub fn apply(&mut self, exchange: &Exchange) {
        for d in exchange.deliveries() {
            self.grant(d.receiver, d.good, d.giver);
        }
    }

    pub fn check_dims(&self, instance: &Instance) -> Result<()> {
        if self.num_agents() != instance.num_agents() || self.data.iter().any(|r| r.len() != instance.num_goods()) {
            return Err(ClearError::DimensionMismatch {
                expected: format!("{}x{}", instance.num_agents(), instance.num_goods()),
                found: format!("{}x{}", self.num_agents(), self.num_goods()),
            });
        }
        Ok(())
    }

    /// True if every cell held in `other` is also held here.
    pub fn dominates_cellwise(&self, other: &Allocation) -> bool {
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| x || !y))
    }
}

/// One good moving in one direction as part of an exchange.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Delivery {
    pub receiver: AgentId,
    pub good: GoodId,
    pub giver: AgentId,
}

/// A pairwise exchange proposal `((a, good_a), (b, good_b))`: `a` gives a copy
/// of `good_a` to `b` and `b` gives a copy of `good_b` to `a`. Always stored
/// with `giver_a < giver_b`, so mirrored tuples compare equal.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[[usize; 2]; 2]", try_from = "[[usize; 2]; 2]")]
pub struct Exchange {
    pub giver_a: AgentId,
    pub good_a: GoodId,
    pub giver_b: AgentId,
    pub good_b: GoodId,
}

impl Exchange {
    /// `i` gives `r` to `j`, `j` gives `s` to `i`. Panics if `i == j`.
    pub fn new(i: AgentId, r: GoodId, j: AgentId, s: GoodId) -> Self {
        assert_ne!(i, j, "an exchange needs two distinct agents");
        if i < j {
            Self {
                giver_a: i,
                good_a: r,
                giver_b: j,
                good_b: s,
            }
        } else {
            Self {
                giver_a: j,
                good_a: s,
                giver_b: i,
                good_b: r,
            }
        }
    }

    pub fn of(i: usize, r: usize, j: usize, s: usize) -> Self {
        Self::new(AgentId(i), GoodId(r), AgentId(j), GoodId(s))
    }

    pub fn agents(&self) -> (AgentId, AgentId) {
        (self.giver_a, self.giver_b)
    }

    pub fn involves(&self, agent: AgentId) -> bool {
        self.giver_a == agent || self.giver_b == agent
    }

    pub fn partner(&self, agent: AgentId) -> Option<AgentId> {
        if agent == self.giver_a {
            Some(self.giver_b)
        } else if agent == self.giver_b {
            Some(self.giver_a)
        } else {
            None
        }
    }

    /// The good `agent` receives through this exchange.
    pub fn received_by(&self, agent: AgentId) -> Option<GoodId> {
        if agent == self.giver_a {
            Some(self.good_b)
        } else if agent == self.giver_b {
            Some(self.good_a)
        } else {
            None
        }
    }

    /// The good `agent` gives away through this exchange.
    pub fn given_by(&self, agent: AgentId) -> Option<GoodId> {
        if agent == self.giver_a {
            Some(self.good_a)
        } else if agent == self.giver_b {
            Some(self.good_b)
        } else {
            None
        }
    }

    pub fn deliveries(&self) -> [Delivery; 2] {
        [
            Delivery {
                receiver: self.giver_b,
                good: self.good_a,
                giver: self.giver_a,
            },
            Delivery {
                receiver: self.giver_a,
                good: self.good_b,
                giver: self.giver_b,
            },
        ]
    }

    /// The same exchange with `receiver` getting `good` instead.
    pub fn with_received(&self, receiver: AgentId, good: GoodId) -> Self {
        let mut out = *self;
        if receiver == self.giver_a {
            out.good_b = good;
        } else {
            assert_eq!(receiver, self.giver_b, "receiver is not part of the exchange");
            out.good_a = good;
        }
        out
    }

    /// Formats with agent names and 1-based goods, e.g. `((i,3),(j,7))`.
    pub fn display_named(&self, names: &[String]) -> String {
        let name = |a: AgentId| names.get(a.0).cloned().unwrap_or_else(|| a.0.to_string());
        format!(
            "(({},{}),({},{}))",
            name(self.giver_a),
            self.good_a.0 + 1,
            name(self.giver_b),
            self.good_b.0 + 1
        )
    }
}

impl fmt::Display for Exchange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(({},{}),({},{}))",
            self.giver_a, self.good_a, self.giver_b, self.good_b
        )
    }
}

impl From<Exchange> for [[usize; 2]; 2] {
    fn from(e: Exchange) -> Self {
        [[e.giver_a.0, e.good_a.0], [e.giver_b.0, e.good_b.0]]
    }
}

impl TryFrom<[[usize; 2]; 2]> for Exchange {
    type Error = String;

    fn try_from(v: [[usize; 2]; 2]) -> std::result::Result<Self, Self::Error> {
        if v[0][0] == v[1][0] {
            return Err(format!("exchange between agent {} and itself", v[0][0]));
        }
        Ok(Exchange::of(v[0][0], v[0][1], v[1][0], v[1][1]))
    }
}

/// The agents taking part in a protocol run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticipantSet {
    members: Vec<AgentId>,
}

impl ParticipantSet {
    pub fn all(instance: &Instance) -> Self {
        instance.agents().collect()
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.members.binary_search(&agent).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn as_slice(&self) -> &[AgentId] {
        &self.members
    }

    pub fn with(&self, agent: AgentId) -> Self {
        self.iter().chain(std::iter::once(agent)).collect()
    }

    pub fn without(&self, agent: AgentId) -> Self {
        self.iter().filter(|&a| a != agent).collect()
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        match self.members.iter().find(|a| a.0 >= instance.num_agents()) {
            Some(a) => Err(invalid(format!(
                "participant {a} is not an agent of a {}-agent instance",
                instance.num_agents()
            ))),
            None => Ok(()),
        }
    }
}

impl FromIterator<AgentId> for ParticipantSet {
    fn from_iter<T: IntoIterator<Item = AgentId>>(iter: T) -> Self {
        let set: BTreeSet<AgentId> = iter.into_iter().collect();
        Self {
            members: set.into_iter().collect(),
        }
    }
}

/// `1ᵀx_i − Σ_{j≠i} β_ij 1ᵀx_j`.
pub fn utility(instance: &Instance, allocation: &Allocation, agent: AgentId) -> Result<f64> {
    allocation.check_dims(instance)?;
    if agent.0 >= instance.num_agents() {
        return Err(invalid(format!("agent {agent} out of range")));
    }
    Ok(utility_from_counts(instance, agent, |a| allocation.count(a)))
}

/// Utility computed from per-agent holding counts only.
pub fn utility_from_counts(instance: &Instance, agent: AgentId, count: impl Fn(AgentId) -> usize) -> f64 {
    let mut u = count(agent) as f64;
    for other in instance.agents() {
        if other != agent {
            u -= instance.beta(agent, other) * count(other) as f64;
        }
    }
    u
}

/// Utilities of every agent of the instance, participants or not.
pub fn utilities(instance: &Instance, allocation: &Allocation) -> Result<Vec<f64>> {
    allocation.check_dims(instance)?;
    Ok(instance
        .agents()
        .map(|a| utility_from_counts(instance, a, |b| allocation.count(b)))
        .collect())
}

/// Every exchange between two distinct participants where each side gives a
/// good it held initially, regardless of current holdings.
pub fn feasible_exchanges(instance: &Instance, participants: &ParticipantSet) -> BTreeSet<Exchange> {
    let mut out = BTreeSet::new();
    let members = participants.as_slice();
    for (idx, &a) in members.iter().enumerate() {
        for &b in &members[idx + 1..] {
            for r in instance.goods().filter(|&r| instance.holds_initially(a, r)) {
                for s in instance.goods().filter(|&s| instance.holds_initially(b, s)) {
                    out.insert(Exchange::new(a, r, b, s));
                }
            }
        }
    }
    out
}

/// Feasible exchanges in which neither receiver already holds what it would
/// receive; each such exchange raises both parties' utility by `1 − β`.
pub fn beneficial_exchanges(
    instance: &Instance,
    allocation: &Allocation,
    participants: &ParticipantSet,
) -> BTreeSet<Exchange> {
    let members = participants.as_slice();
    let mut out = BTreeSet::new();
    for (idx, &a) in members.iter().enumerate() {
        for &b in &members[idx + 1..] {
            for r in instance.goods() {
                if !instance.holds_initially(a, r) || allocation.holds(b, r) {
                    continue;
                }
                for s in instance.goods() {
                    if instance.holds_initially(b, s) && !allocation.holds(a, s) {
                        out.insert(Exchange::new(a, r, b, s));
                    }
                }
            }
        }
    }
    out
}

/// Returns a copy of `allocation` with `exchange` executed.
pub fn apply_exchange(allocation: &Allocation, exchange: &Exchange) -> Allocation {
    let mut next = allocation.clone();
    next.apply(exchange);
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_agent_beta() -> Vec<Vec<f64>> {
        Instance::beta_from_pairs(3, &[(0, 1, 0.1), (0, 2, 0.2), (1, 2, 0.3)], 0.5)
    }

    #[test]
    fn competitor_holding_both_goods() {
        // i = [1,0], j = [0,1], k = [1,1]
        let inst = Instance::from_bits(&[&[1, 0], &[0, 1], &[1, 1]], three_agent_beta()).unwrap();
        let x = Allocation::initial(&inst);
        let u_k = utility(&inst, &x, AgentId(2)).unwrap();
        assert!((u_k - (2.0 - 0.2 - 0.3)).abs() < TOL);
    }

    #[test]
    fn lone_agent_utility_is_its_bundle_size() {
        let inst = Instance::from_bits(&[&[1, 1, 1, 1]], vec![vec![0.0]]).unwrap();
        let x = Allocation::initial(&inst);
        assert_eq!(utility(&inst, &x, AgentId(0)).unwrap(), 4.0);
        assert!(feasible_exchanges(&inst, &ParticipantSet::all(&inst)).is_empty());
    }

    #[test]
    fn utility_rejects_mismatched_allocation() {
        let inst = Instance::from_bits(&[&[1, 0], &[0, 1], &[1, 1]], three_agent_beta()).unwrap();
        let x = Allocation::from_matrix(vec![vec![true; 3]; 3]);
        assert!(matches!(
            utility(&inst, &x, AgentId(0)),
            Err(ClearError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn instance_validation() {
        let asym = vec![vec![0.0, 0.2], vec![0.3, 0.0]];
        assert!(Instance::from_bits(&[&[1], &[0]], asym).is_err());
        let out_of_range = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(Instance::from_bits(&[&[1], &[0]], out_of_range).is_err());
        let ragged = vec![vec![true, false], vec![true]];
        assert!(Instance::new(ragged, vec![vec![0.0, 0.5], vec![0.5, 0.0]]).is_err());
        assert!(Instance::new(vec![], vec![]).is_err());
        // zero goods is a valid degenerate instance
        let no_goods = Instance::new(vec![vec![], vec![]], vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert_eq!(no_goods.num_goods(), 0);
        assert!(feasible_exchanges(&no_goods, &ParticipantSet::all(&no_goods)).is_empty());
    }

    #[test]
    fn diagonal_is_ignored() {
        let beta = vec![vec![7.0, 0.4], vec![0.4, -3.0]];
        let inst = Instance::from_bits(&[&[1], &[0]], beta).unwrap();
        assert_eq!(inst.beta(AgentId(0), AgentId(0)), 0.0);
    }

    #[test]
    fn exchange_is_orientation_symmetric() {
        let a = Exchange::of(2, 0, 1, 5);
        let b = Exchange::of(1, 5, 2, 0);
        assert_eq!(a, b);
        assert_eq!(a.giver_a, AgentId(1));
        assert_eq!(a.received_by(AgentId(1)), Some(GoodId(0)));
        assert_eq!(a.received_by(AgentId(2)), Some(GoodId(5)));
        assert_eq!(a.received_by(AgentId(0)), None);
        let c = a.with_received(AgentId(2), GoodId(3));
        assert_eq!(c, Exchange::of(1, 3, 2, 0));
    }

    #[test]
    fn exchange_serializes_as_nested_pairs() {
        let e = Exchange::of(0, 2, 1, 6);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "[[0,2],[1,6]]");
        let back: Exchange = serde_json::from_str("[[1,6],[0,2]]").unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<Exchange>("[[1,6],[1,2]]").is_err());
    }

    #[test]
    fn pairwise_copy_semantics() {
        // i holds {1,3,4}, j holds {2,3} (1-based); swap 1 for 2.
        let beta = Instance::beta_from_pairs(2, &[], 0.5);
        let inst = Instance::from_bits(&[&[1, 0, 1, 1], &[0, 1, 1, 0]], beta).unwrap();
        let x = Allocation::initial(&inst);
        let y = apply_exchange(&x, &Exchange::of(0, 0, 1, 1));
        assert_eq!(y.row(AgentId(0)), &[true, true, true, true]);
        assert_eq!(y.row(AgentId(1)), &[true, true, true, false]);
        assert_eq!(y.source(AgentId(1), GoodId(0)), Some(AgentId(0)));
        assert_eq!(y.source(AgentId(0), GoodId(1)), Some(AgentId(1)));
        assert_eq!(y.source(AgentId(0), GoodId(0)), Some(AgentId(0)));
        // delivering a held good changes nothing
        let z = apply_exchange(&y, &Exchange::of(0, 2, 1, 2));
        assert_eq!(z, y);
    }

    #[test]
    fn four_agent_two_good_exchange_sets() {
        // i = k = [1,0], j = l = [0,1]
        let beta = Instance::beta_from_pairs(4, &[], 0.5);
        let inst = Instance::from_bits(&[&[1, 0], &[0, 1], &[1, 0], &[0, 1]], beta).unwrap();
        let all = ParticipantSet::all(&inst);
        let x = Allocation::initial(&inst);
        let expected: BTreeSet<Exchange> = [
            Exchange::of(0, 0, 1, 1),
            Exchange::of(1, 1, 2, 0),
            Exchange::of(2, 0, 3, 1),
            Exchange::of(0, 0, 3, 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(beneficial_exchanges(&inst, &x, &all), expected);
        // raw feasible set additionally contains the same-good swaps i<->k and j<->l
        let raw = feasible_exchanges(&inst, &all);
        assert_eq!(raw.len(), 6);
        assert!(expected.is_subset(&raw));
    }

    #[test]
    fn three_agent_two_good_exchanges() {
        // i = j = [1,0], k = [0,1]
        let inst = Instance::from_bits(&[&[1, 0], &[1, 0], &[0, 1]], three_agent_beta()).unwrap();
        let x = Allocation::initial(&inst);
        let got = beneficial_exchanges(&inst, &x, &ParticipantSet::all(&inst));
        let want: BTreeSet<_> = [Exchange::of(0, 0, 2, 1), Exchange::of(1, 0, 2, 1)].into();
        assert_eq!(got, want);
    }

    #[test]
    fn non_participants_never_trade() {
        let inst = Instance::from_bits(&[&[1, 0], &[0, 1], &[1, 0]], three_agent_beta()).unwrap();
        let only_01: ParticipantSet = [AgentId(0), AgentId(1)].into_iter().collect();
        let f = feasible_exchanges(&inst, &only_01);
        assert!(f.iter().all(|e| !e.involves(AgentId(2))));
        assert!(feasible_exchanges(&inst, &ParticipantSet::empty()).is_empty());
    }

    #[test]
    fn complete_allocation_has_no_demand() {
        let inst = Instance::from_bits(&[&[1, 0], &[0, 1], &[1, 1]], three_agent_beta()).unwrap();
        let full = Allocation::from_matrix(vec![vec![true, true]; 3]);
        assert!(beneficial_exchanges(&inst, &full, &ParticipantSet::all(&inst)).is_empty());
    }
}
