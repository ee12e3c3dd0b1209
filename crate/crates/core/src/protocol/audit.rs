//! Runtime invariant hooks for the repair subroutine and proposal rounds.
//!
//! An [`Audit`] is shared through [`super::ProtocolConfig::audit`]. When set,
//! every RETROSPECT call (top-level and recursive) is bracketed by snapshot
//! checks, and every completed round is replayed against its mutation journal.
//! Violations are collected rather than panicking so a whole suite can report
//! them at once.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

#[derive(Debug, Default)]
pub struct Audit {
    retrospect_calls: AtomicU64,
    top_level_calls: AtomicU64,
    rounds: AtomicU64,
    max_depth: AtomicU64,
    violations: Mutex<Vec<String>>,
}

/// Counters and violations collected so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditSummary {
    pub retrospect_calls: u64,
    pub top_level_calls: u64,
    pub rounds: u64,
    pub max_depth: u64,
    pub violations: Vec<String>,
}

impl Audit {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn note_call(&self, depth: usize, top_level: bool) {
        self.retrospect_calls.fetch_add(1, Ordering::Relaxed);
        if top_level {
            self.top_level_calls.fetch_add(1, Ordering::Relaxed);
        }
        self.max_depth.fetch_max(depth as u64, Ordering::Relaxed);
    }

    pub(crate) fn note_round(&self) {
        self.rounds.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn violation(&self, message: String) {
        let mut v = self.violations.lock().unwrap_or_else(|e| e.into_inner());
        // keep memory bounded if something goes badly wrong
        if v.len() < 1000 {
            v.push(message);
        }
    }

    pub fn summary(&self) -> AuditSummary {
        AuditSummary {
            retrospect_calls: self.retrospect_calls.load(Ordering::Relaxed),
            top_level_calls: self.top_level_calls.load(Ordering::Relaxed),
            rounds: self.rounds.load(Ordering::Relaxed),
            max_depth: self.max_depth.load(Ordering::Relaxed),
            violations: self.violations.lock().unwrap_or_else(|e| e.into_inner()).clone(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.lock().unwrap_or_else(|e| e.into_inner()).is_empty()
    }
}
