//! CLEAR proposal construction with the RETROSPECT repair subroutine.
//!
//! Within a round, agent pairs are visited in increasing competition. For each
//! pair the builder lazily schedules the lexicographically smallest unrejected
//! exchange while both sides still demand something from each other. When one
//! side's demand runs dry, RETROSPECT tries to rewire earlier deliveries so the
//! pair can trade once more, never changing how many goods anyone is scheduled
//! to receive or how many exchanges any earlier pair has.
//!
//! All mutations of the working allocation and of the proposal list go
//! through a journal so that failed or abandoned repairs roll back exactly.

use std::collections::BTreeSet;

use super::{pair_order, ProtocolConfig, RejectedSet};
use crate::model::{AgentId, Allocation, Exchange, GoodId, Instance, ParticipantSet};

/// Result of a RETROSPECT call.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RetroOutcome {
    /// A good the receiver can now take from the giver.
    Found(GoodId),
    /// No rewiring of earlier deliveries makes room.
    Fail,
}

impl RetroOutcome {
    pub fn is_found(self) -> bool {
        matches!(self, RetroOutcome::Found(_))
    }
}

/// Who delivers a scheduled good, and through which proposal slot.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct Source {
    giver: usize,
    slot: usize,
}

#[derive(Clone, Debug)]
enum Mutation {
    Set {
        cell: usize,
        value: bool,
        prev: bool,
        prev_source: Option<Source>,
    },
    Push,
    Replace {
        slot: usize,
        prev: Exchange,
    },
}

/// Proposals for one round and the allocation they would produce if all
/// were accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundProposals {
    /// In scheduling order.
    pub proposals: Vec<Exchange>,
    pub working: Allocation,
}

/// Mutable state of one CLEAR proposal phase: the working allocation, the
/// proposals scheduled so far, and the rollback journal.
pub struct RoundState<'a> {
    instance: &'a Instance,
    prior: &'a Allocation,
    rejected: &'a RejectedSet,
    config: &'a ProtocolConfig,
    n: usize,
    m: usize,
    working: Vec<bool>,
    row_count: Vec<usize>,
    sources: Vec<Option<Source>>,
    slots: Vec<Exchange>,
    journal: Vec<Mutation>,
    examined: Vec<bool>,
    failed: Vec<bool>,
    depth: usize,
}

struct Snapshot {
    row_count: Vec<usize>,
    pair_counts: Vec<u32>,
    working: Vec<bool>,
    slots: Vec<Exchange>,
    journal_len: usize,
}

impl<'a> RoundState<'a> {
    pub fn new(
        instance: &'a Instance,
        prior: &'a Allocation,
        rejected: &'a RejectedSet,
        config: &'a ProtocolConfig,
    ) -> Self {
        let n = instance.num_agents();
        let m = instance.num_goods();
        let working: Vec<bool> = prior.rows().iter().flatten().copied().collect();
        let row_count = prior.rows().iter().map(|r| r.iter().filter(|&&h| h).count()).collect();
        Self {
            instance,
            prior,
            rejected,
            config,
            n,
            m,
            working,
            row_count,
            sources: vec![None; n * m],
            slots: Vec::new(),
            journal: Vec::new(),
            examined: vec![false; n],
            failed: vec![false; n],
            depth: 0,
        }
    }

    fn cell(&self, agent: usize, good: usize) -> usize {
        agent * self.m + good
    }

    pub fn holds(&self, agent: AgentId, good: GoodId) -> bool {
        self.working[self.cell(agent.0, good.0)]
    }

    pub fn proposals(&self) -> &[Exchange] {
        &self.slots
    }

    /// Number of goods each agent would hold if every proposal were accepted.
    pub fn scheduled_counts(&self) -> Vec<usize> {
        self.row_count.clone()
    }

    /// Scheduled exchanges per unordered pair, as a dense `n*n` table indexed
    /// `[a * n + b]` with `a < b`.
    pub fn pair_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n * self.n];
        for e in &self.slots {
            counts[e.giver_a.0 * self.n + e.giver_b.0] += 1;
        }
        counts
    }

    pub fn checkpoint(&self) -> usize {
        self.journal.len()
    }

    pub fn rollback(&mut self, checkpoint: usize) {
        while self.journal.len() > checkpoint {
            match self.journal.pop().expect("journal length checked") {
                Mutation::Set {
                    cell,
                    value,
                    prev,
                    prev_source,
                } => {
                    self.working[cell] = prev;
                    let agent = cell / self.m;
                    if value && !prev {
                        self.row_count[agent] -= 1;
                    } else if prev && !value {
                        self.row_count[agent] += 1;
                    }
                    self.sources[cell] = prev_source;
                }
                Mutation::Push => {
                    self.slots.pop();
                }
                Mutation::Replace { slot, prev } => self.slots[slot] = prev,
            }
        }
    }

    fn set(&mut self, agent: usize, good: usize, value: bool, source: Option<Source>) {
        let cell = self.cell(agent, good);
        let prev = self.working[cell];
        self.journal.push(Mutation::Set {
            cell,
            value,
            prev,
            prev_source: self.sources[cell],
        });
        self.working[cell] = value;
        if value && !prev {
            self.row_count[agent] += 1;
        } else if prev && !value {
            self.row_count[agent] -= 1;
        }
        if self.config.opt_source_encoding {
            self.sources[cell] = source;
        }
    }

    fn push_exchange(&mut self, e: Exchange) {
        let slot = self.slots.len();
        self.slots.push(e);
        self.journal.push(Mutation::Push);
        for d in e.deliveries() {
            self.set(d.receiver.0, d.good.0, true, Some(Source { giver: d.giver.0, slot }));
        }
    }

    fn replace(&mut self, slot: usize, e: Exchange) {
        let prev = self.slots[slot];
        self.journal.push(Mutation::Replace { slot, prev });
        self.slots[slot] = e;
    }

    /// Adds a proposal directly, bypassing the pair loop. Both receivers must
    /// still lack what they would receive and both givers must have held
    /// their good initially.
    pub fn schedule(&mut self, e: Exchange) -> crate::Result<()> {
        for d in e.deliveries() {
            if !self.instance.holds_initially(d.giver, d.good) {
                return Err(crate::error::invalid(format!(
                    "agent {} did not initially hold good {}",
                    d.giver, d.good
                )));
            }
            if self.holds(d.receiver, d.good) {
                return Err(crate::error::invalid(format!(
                    "agent {} is already scheduled to hold good {}",
                    d.receiver, d.good
                )));
            }
        }
        self.push_exchange(e);
        Ok(())
    }

    /// The proposal through which `receiver` gets `good` this round.
    fn delivery_of(&self, receiver: usize, good: usize) -> Source {
        if self.config.opt_source_encoding {
            return self.sources[self.cell(receiver, good)]
                .expect("a scheduled, not previously held good has a recorded source");
        }
        let agent = AgentId(receiver);
        self.slots
            .iter()
            .enumerate()
            .find(|(_, e)| e.received_by(agent) == Some(GoodId(good)))
            .map(|(slot, e)| Source {
                giver: e.partner(agent).expect("exchange involves receiver").0,
                slot,
            })
            .expect("a scheduled, not previously held good is delivered by some proposal")
    }

    /// RETROSPECT(receiver, giver, examined). On failure the state is left
    /// exactly as it was on entry.
    pub fn retrospect(&mut self, receiver: AgentId, giver: AgentId, examined: &BTreeSet<AgentId>) -> RetroOutcome {
        self.examined.iter_mut().for_each(|e| *e = false);
        for a in examined {
            self.examined[a.0] = true;
        }
        self.examined[receiver.0] = true;
        self.examined[giver.0] = true;
        self.failed.iter_mut().for_each(|f| *f = false);
        let out = if self.config.opt_skip_full_receivers && self.row_count[receiver.0] == self.m {
            RetroOutcome::Fail
        } else {
            self.call(receiver.0, giver.0, true)
        };
        self.examined.iter_mut().for_each(|e| *e = false);
        out
    }

    fn call(&mut self, i: usize, j: usize, top_level: bool) -> RetroOutcome {
        self.depth += 1;
        let out = match self.config.audit.clone() {
            None => self.body(i, j),
            Some(audit) => {
                audit.note_call(self.depth, top_level);
                if self.depth > self.n {
                    audit.violation(format!("recursion depth {} exceeds the {} agents", self.depth, self.n));
                }
                let before = self.snapshot();
                let out = self.body(i, j);
                for msg in self.compare(&before, i, j, out) {
                    audit.violation(msg);
                }
                out
            }
        };
        self.depth -= 1;
        out
    }

    fn body(&mut self, i: usize, j: usize) -> RetroOutcome {
        for s in 0..self.m {
            if self.prior.holds(AgentId(i), GoodId(s)) || !self.instance.holds_initially(AgentId(j), GoodId(s)) {
                continue;
            }
            if !self.working[self.cell(i, s)] {
                return RetroOutcome::Found(GoodId(s));
            }
            let src = self.delivery_of(i, s);
            if self.examined[src.giver] {
                continue;
            }
            if self.config.opt_skip_failed_givers && self.failed[src.giver] {
                continue;
            }
            let checkpoint = self.checkpoint();
            self.examined[src.giver] = true;
            let inner = self.call(i, src.giver, false);
            self.examined[src.giver] = false;
            match inner {
                RetroOutcome::Found(alt) => {
                    let rewired = self.slots[src.slot].with_received(AgentId(i), alt);
                    if !self.rejected.contains(&rewired) {
                        self.set(i, alt.0, true, Some(src));
                        self.set(i, s, false, None);
                        self.replace(src.slot, rewired);
                        return RetroOutcome::Found(GoodId(s));
                    }
                    self.rollback(checkpoint);
                }
                RetroOutcome::Fail => {
                    if self.config.opt_skip_failed_givers {
                        self.failed[src.giver] = true;
                    }
                    self.rollback(checkpoint);
                }
            }
        }
        RetroOutcome::Fail
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            row_count: self.row_count.clone(),
            pair_counts: self.pair_counts(),
            working: self.working.clone(),
            slots: self.slots.clone(),
            journal_len: self.journal.len(),
        }
    }

    fn compare(&self, before: &Snapshot, i: usize, j: usize, out: RetroOutcome) -> Vec<String> {
        let mut msgs = Vec::new();
        let call = format!("retrospect(receiver {i}, giver {j})");
        if before.row_count != self.row_count {
            msgs.push(format!("{call} changed scheduled good counts"));
        }
        if before.pair_counts != self.pair_counts() {
            msgs.push(format!("{call} changed per-pair exchange counts"));
        }
        match out {
            RetroOutcome::Found(s) => {
                if self.prior.holds(AgentId(i), s) {
                    msgs.push(format!("{call} returned good {s} already held before the round"));
                }
                if !self.instance.holds_initially(AgentId(j), s) {
                    msgs.push(format!("{call} returned good {s} the giver never held"));
                }
                if self.working[self.cell(i, s.0)] {
                    msgs.push(format!("{call} returned good {s} that is still scheduled"));
                }
            }
            RetroOutcome::Fail => {
                if before.working != self.working
                    || before.slots != self.slots
                    || before.journal_len != self.journal.len()
                {
                    msgs.push(format!("{call} failed without restoring the round state"));
                }
            }
        }
        msgs
    }

    fn demand(&self, receiver: usize, giver: usize) -> Vec<usize> {
        (0..self.m)
            .filter(|&g| {
                !self.working[self.cell(receiver, g)] && self.instance.holds_initially(AgentId(giver), GoodId(g))
            })
            .collect()
    }

    /// Lexicographically smallest `((a, r), (b, s))` over the two demand
    /// sets that has not been rejected.
    fn first_unrejected(&self, a: usize, to_b: &[usize], b: usize, to_a: &[usize]) -> Option<Exchange> {
        for &r in to_b {
            for &s in to_a {
                let e = Exchange::of(a, r, b, s);
                if !self.rejected.contains(&e) {
                    return Some(e);
                }
            }
        }
        None
    }

    /// The inner while loop for one agent pair `a < b`.
    fn exchange_loop(&mut self, a: usize, b: usize) {
        let mut pending: Option<usize> = None;
        loop {
            let to_b = self.demand(b, a);
            let to_a = self.demand(a, b);
            if !to_b.is_empty() && !to_a.is_empty() {
                match self.first_unrejected(a, &to_b, b, &to_a) {
                    Some(e) => {
                        self.push_exchange(e);
                        pending = None;
                    }
                    None => {
                        if let (true, Some(cp)) = (self.config.undo_unplaced_retrospect, pending) {
                            self.rollback(cp);
                        }
                        break;
                    }
                }
            } else {
                if !self.config.retrospect_enabled {
                    break;
                }
                let checkpoint = self.checkpoint();
                let mut ok = true;
                if to_b.is_empty() {
                    ok = self.retrospect(AgentId(b), AgentId(a), &BTreeSet::new()).is_found();
                }
                if ok && to_a.is_empty() {
                    ok = self.retrospect(AgentId(a), AgentId(b), &BTreeSet::new()).is_found();
                }
                if !ok {
                    self.rollback(checkpoint);
                    break;
                }
                pending.get_or_insert(checkpoint);
            }
        }
    }

    /// Runs the pair loop over all participant pairs.
    pub fn schedule_all(&mut self, participants: &ParticipantSet) {
        for (a, b) in pair_order(self.instance, participants) {
            self.exchange_loop(a, b);
        }
    }

    /// The allocation that results if every scheduled proposal is accepted,
    /// annotated with who supplies each good.
    pub fn working_allocation(&self) -> Allocation {
        let mut out = self.prior.clone();
        for e in &self.slots {
            out.apply(e);
        }
        out
    }

    fn audit_round(&self, participants: &ParticipantSet) -> Vec<String> {
        let mut msgs = Vec::new();
        for entry in &self.journal {
            if let Mutation::Set { cell, value: true, .. } = entry {
                if !self.working[*cell] {
                    msgs.push(format!(
                        "agent {} was scheduled to receive good {} during the round but lost it by the end",
                        cell / self.m,
                        cell % self.m
                    ));
                }
            }
        }
        let mut delivered = vec![false; self.n * self.m];
        for e in &self.slots {
            if self.rejected.contains(e) {
                msgs.push(format!("rejected exchange {e} was proposed again"));
            }
            if !participants.contains(e.giver_a) || !participants.contains(e.giver_b) {
                msgs.push(format!("exchange {e} involves a non-participant"));
            }
            for d in e.deliveries() {
                let cell = self.cell(d.receiver.0, d.good.0);
                if delivered[cell] {
                    msgs.push(format!(
                        "agent {} is scheduled to receive good {} twice",
                        d.receiver, d.good
                    ));
                }
                delivered[cell] = true;
                if self.prior.holds(d.receiver, d.good) {
                    msgs.push(format!(
                        "exchange {e} delivers good {} that agent {} already held",
                        d.good, d.receiver
                    ));
                }
                if !self.instance.holds_initially(d.giver, d.good) {
                    msgs.push(format!(
                        "exchange {e} makes agent {} give a good it never held",
                        d.giver
                    ));
                }
                if self.config.opt_source_encoding {
                    let src = self.sources[cell];
                    if src.map(|s| s.giver) != Some(d.giver.0) {
                        msgs.push(format!(
                            "source record for agent {} good {} disagrees with the proposals",
                            d.receiver, d.good
                        ));
                    }
                }
            }
        }
        for a in 0..self.n {
            for g in 0..self.m {
                let cell = self.cell(a, g);
                let expect = self.prior.holds(AgentId(a), GoodId(g)) || delivered[cell];
                if self.working[cell] != expect {
                    msgs.push(format!(
                        "working allocation at agent {a} good {g} disagrees with the proposals"
                    ));
                }
            }
        }
        msgs
    }
}

/// Builds the CLEAR proposal set `P_t` for one round.
pub fn build_proposals(
    instance: &Instance,
    participants: &ParticipantSet,
    prior: &Allocation,
    rejected: &RejectedSet,
    config: &ProtocolConfig,
) -> RoundProposals {
    let mut state = RoundState::new(instance, prior, rejected, config);
    state.schedule_all(participants);
    if let Some(audit) = &config.audit {
        audit.note_round();
        for msg in state.audit_round(participants) {
            audit.violation(msg);
        }
    }
    RoundProposals {
        working: state.working_allocation(),
        proposals: state.slots,
    }
}
