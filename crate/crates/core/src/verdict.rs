//! Three-valued verdicts and the finite-truncation trend protocol.
//!
//! Evidence is a defect sequence on a window (indices `j >= 8`, or a
//! function grid). The window is split into a front and a tail half by
//! point count and the two halves are compared with margin `TREND_EPS`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub const TREND_EPS: f64 = 0.05;
/// First index that counts as evidence for sequence-indexed defects.
pub const TREND_START: usize = 8;
/// Certificate entries within this distance of zero (in log units) are snapped.
pub const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    /// Conjunction: holds only if both hold, fails if either fails.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Holds => Verdict::Fails,
            Verdict::Fails => Verdict::Holds,
            Verdict::Inconclusive => Verdict::Inconclusive,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub front_sup: f64,
    pub front_min: f64,
    pub tail_sup: f64,
    pub tail_min: f64,
    pub front_len: usize,
    pub tail_len: usize,
}

/// Split finite values into halves by count; `None` with fewer than 4 points.
pub fn window_stats(values: &[f64]) -> Option<WindowStats> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if finite.len() < 4 {
        return None;
    }
    let mid = finite.len() / 2;
    let (front, tail) = finite.split_at(mid);
    let sup = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    Some(WindowStats {
        front_sup: sup(front),
        front_min: min(front),
        tail_sup: sup(tail),
        tail_min: min(tail),
        front_len: front.len(),
        tail_len: tail.len(),
    })
}

/// "sup is finite": holds when the tail does not rise above the front by
/// more than `eps`; fails when the tail rises and does not drop back below
/// the front's maximum.
pub fn bounded_trend(stats: Option<&WindowStats>) -> Verdict {
    let Some(s) = stats else { return Verdict::Inconclusive };
    if s.tail_sup == f64::INFINITY {
        return Verdict::Fails;
    }
    if s.tail_sup <= s.front_sup + TREND_EPS {
        Verdict::Holds
    } else if s.tail_min >= s.front_sup - TREND_EPS {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// "tends to -infinity": holds when the tail lies below the front and keeps
/// descending by more than `eps`; fails when the tail minimum does not go
/// below the front minimum by more than `eps`.
pub fn decay_trend(stats: Option<&WindowStats>) -> Verdict {
    let Some(s) = stats else { return Verdict::Inconclusive };
    if s.tail_min == f64::NEG_INFINITY || (s.tail_sup <= s.front_min + TREND_EPS && s.tail_min < s.front_min - TREND_EPS) {
        Verdict::Holds
    } else if s.tail_min >= s.front_min - TREND_EPS {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSummary {
    pub points: usize,
    pub window: Option<WindowStats>,
    pub notes: Vec<String>,
}

/// Verdict on one condition, with a certificate that re-checks on the tested
/// range when the verdict is `holds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: String,
    pub holds: Verdict,
    pub certificate: BTreeMap<String, f64>,
    pub evidence_summary: EvidenceSummary,
    /// Defect sequence as `(index or log t, value)` pairs.
    #[serde(skip)]
    pub evidence: Vec<(f64, f64)>,
}

impl ConditionVerdict {
    pub fn new(condition: impl Into<String>, holds: Verdict) -> Self {
        ConditionVerdict {
            condition: condition.into(),
            holds,
            certificate: BTreeMap::new(),
            evidence_summary: EvidenceSummary::default(),
            evidence: Vec::new(),
        }
    }

    pub fn with_cert(mut self, key: &str, value: f64) -> Self {
        self.certificate.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.evidence_summary.notes.push(note.into());
        self
    }

    pub(crate) fn with_evidence(mut self, evidence: Vec<(f64, f64)>, window: Option<WindowStats>) -> Self {
        self.evidence_summary.points = evidence.len();
        self.evidence_summary.window = window;
        self.evidence = evidence;
        self
    }

    pub fn cert(&self, key: &str) -> Option<f64> {
        self.certificate.get(key).copied()
    }
}

pub(crate) fn snap(x: f64) -> f64 {
    if x.abs() < SNAP {
        0.0
    } else {
        x
    }
}

/// Realize `j * d_j <= log C + j log h` for all supplied `(j, d_j)`:
/// `log h` is the tail-window supremum, `log C` absorbs the rest. Returns
/// `(log C, log h)`, both snapped.
pub(crate) fn linear_certificate(defects: &[(usize, f64)]) -> (f64, f64) {
    let tail: Vec<f64> = defects.iter().filter(|(j, _)| *j >= TREND_START).map(|p| p.1).collect();
    let log_h = window_stats(&tail)
        .map(|s| s.tail_sup)
        .or_else(|| defects.iter().map(|p| p.1).reduce(f64::max))
        .unwrap_or(0.0);
    let log_h = snap(log_h);
    let log_c = defects
        .iter()
        .map(|&(j, d)| j as f64 * (d - log_h))
        .fold(0.0_f64, f64::max);
    (snap(log_c), log_h)
}
