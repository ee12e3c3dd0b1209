//! Agent decision policies.
//!
//! A strategy sees the proposal it is asked about, the whole proposal set of
//! the current round, the participants and the complete history of earlier
//! rounds. It is only ever consulted about proposals involving its own agent.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::engine::RoundRecord;
use crate::error::{ClearError, Result};
use crate::model::{AgentId, Exchange, ParticipantSet};

/// Everything an agent may condition on when deciding.
#[derive(Clone, Copy, Debug)]
pub struct DecisionContext<'a> {
    pub agent: AgentId,
    /// 1-based round index.
    pub round: usize,
    pub participants: &'a ParticipantSet,
    pub proposals: &'a [Exchange],
    pub history: &'a [RoundRecord],
}

pub trait Strategy: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// `true` accepts.
    fn decide(&self, proposal: &Exchange, ctx: &DecisionContext<'_>) -> bool;
}

/// Accepts everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accepting;

impl Strategy for Accepting {
    fn name(&self) -> String {
        "accepting".into()
    }

    fn decide(&self, _: &Exchange, _: &DecisionContext<'_>) -> bool {
        true
    }
}

/// Rejects everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct RejectAll;

impl Strategy for RejectAll {
    fn name(&self) -> String {
        "reject-all".into()
    }

    fn decide(&self, _: &Exchange, _: &DecisionContext<'_>) -> bool {
        false
    }
}

/// A lookup table from `(round, exchange)` to a decision. A `None` round
/// matches every round; exact-round entries take precedence. Anything not in
/// the table is accepted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scripted {
    decisions: BTreeMap<(Option<usize>, Exchange), bool>,
}

impl Scripted {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_map(decisions: BTreeMap<(Option<usize>, Exchange), bool>) -> Self {
        Self { decisions }
    }

    /// Adds an entry; `round = None` applies in every round.
    pub fn with(mut self, round: Option<usize>, exchange: Exchange, accept: bool) -> Self {
        self.decisions.insert((round, exchange), accept);
        self
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }
}

impl Strategy for Scripted {
    fn name(&self) -> String {
        format!("scripted({} entries)", self.decisions.len())
    }

    fn decide(&self, proposal: &Exchange, ctx: &DecisionContext<'_>) -> bool {
        self.decisions
            .get(&(Some(ctx.round), *proposal))
            .or_else(|| self.decisions.get(&(None, *proposal)))
            .copied()
            .unwrap_or(true)
    }
}

/// A fixed sequence of accept/reject bits consumed, in order, by every
/// proposal involving the focal agent. Within a round, proposals are taken in
/// the order they appear in the round's proposal list. Once the script runs
/// out the agent accepts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DeviationScript {
    pub bits: Vec<bool>,
}

impl DeviationScript {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Position of `proposal` in the focal agent's decision sequence.
    pub fn decision_index(proposal: &Exchange, ctx: &DecisionContext<'_>) -> usize {
        let earlier: usize = ctx
            .history
            .iter()
            .map(|r| r.proposals.iter().filter(|e| e.involves(ctx.agent)).count())
            .sum();
        let within = ctx
            .proposals
            .iter()
            .filter(|e| e.involves(ctx.agent))
            .position(|e| e == proposal)
            .expect("the proposal being decided is in the current round");
        earlier + within
    }
}

impl serde::Serialize for DeviationScript {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let text: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }
}

impl Strategy for DeviationScript {
    fn name(&self) -> String {
        let s: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!("deviation[{s}]")
    }

    fn decide(&self, proposal: &Exchange, ctx: &DecisionContext<'_>) -> bool {
        let idx = Self::decision_index(proposal, ctx);
        self.bits.get(idx).copied().unwrap_or(true)
    }
}

pub fn accepting() -> Arc<dyn Strategy> {
    Arc::new(Accepting)
}

pub fn reject_all() -> Arc<dyn Strategy> {
    Arc::new(RejectAll)
}

pub fn scripted(decisions: BTreeMap<(Option<usize>, Exchange), bool>) -> Arc<dyn Strategy> {
    Arc::new(Scripted::from_map(decisions))
}

/// One strategy per agent; agents without an explicit entry accept.
#[derive(Clone, Debug, Default)]
pub struct Profile {
    overrides: BTreeMap<AgentId, Arc<dyn Strategy>>,
}

impl Profile {
    pub fn accepting() -> Self {
        Self::default()
    }

    pub fn with(mut self, agent: AgentId, strategy: Arc<dyn Strategy>) -> Self {
        self.overrides.insert(agent, strategy);
        self
    }

    pub fn set(&mut self, agent: AgentId, strategy: Arc<dyn Strategy>) {
        self.overrides.insert(agent, strategy);
    }

    pub fn get(&self, agent: AgentId) -> Arc<dyn Strategy> {
        self.overrides.get(&agent).cloned().unwrap_or_else(accepting)
    }

    pub fn describe(&self) -> String {
        if self.overrides.is_empty() {
            return "all accepting".into();
        }
        self.overrides
            .iter()
            .map(|(a, s)| format!("{a}: {}", s.name()))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Parses scripted strategies from text. One entry per line:
///
/// ```text
/// # agent round exchange decision
/// 0 1 ((0,0),(2,2)) 0
/// 2 * ((0,0),(2,2)) 1
/// ```
///
/// Agents and goods are 0-based indices, rounds are 1-based, `*` matches any
/// round, and the decision is `1` (accept) or `0` (reject). Blank lines and
/// text after `#` are ignored.
pub fn parse_scripted(text: &str) -> Result<BTreeMap<AgentId, Scripted>> {
    let mut out: BTreeMap<AgentId, Scripted> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ClearError::Parse { line: line_no, message };
        let compact: String = line.replace(", ", ",");
        let fields: Vec<&str> = compact.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!(
                "expected `agent round exchange decision`, found {} fields",
                fields.len()
            )));
        }
        let agent: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad agent index `{}`", fields[0])))?;
        let round = match fields[1] {
            "*" => None,
            r => Some(
                r.parse::<usize>()
                    .ok()
                    .filter(|&r| r >= 1)
                    .ok_or_else(|| err(format!("bad round `{r}` (1-based or `*`)")))?,
            ),
        };
        let exchange = parse_exchange(fields[2]).map_err(err)?;
        if !exchange.involves(AgentId(agent)) {
            return Err(err(format!("agent {agent} is not part of exchange {exchange}")));
        }
        let accept = match fields[3] {
            "1" => true,
            "0" => false,
            d => return Err(err(format!("decision must be 0 or 1, found `{d}`"))),
        };
        let entry = out.entry(AgentId(agent)).or_default();
        entry.decisions.insert((round, exchange), accept);
    }
    Ok(out)
}

/// Parses `((a,r),(b,s))` with 0-based indices.
pub fn parse_exchange(text: &str) -> std::result::Result<Exchange, String> {
    let nums: Vec<usize> = text
        .split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("bad number `{t}`")))
        .collect::<std::result::Result<_, _>>()?;
    let shape_ok = text.starts_with("((") && text.ends_with("))") && nums.len() == 4;
    if !shape_ok {
        return Err(format!("expected an exchange like ((0,1),(2,3)), found `{text}`"));
    }
    if nums[0] == nums[2] {
        return Err(format!("exchange `{text}` pairs an agent with itself"));
    }
    Ok(Exchange::of(nums[0], nums[1], nums[2], nums[3]))
}
