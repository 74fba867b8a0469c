//! Weight sequences `M = (M_j)` stored as `log M_j`, their standard
//! families, structural validation, comparison and growth conditions.

use crate::error::{invalid, Error, Result};
use crate::numeric::{gauss_legendre, ln_factorial, NeumaierSum};
use crate::verdict::{
    bounded_trend, decay_trend, linear_certificate, snap, window_stats, ConditionVerdict, Verdict, TREND_START,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Last index with `mu_j = 1` in the log-log rows (`e^e ~ 15.15`).
pub const LOGLOG_J0: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    Factorial,
    Gevrey { s: f64 },
    #[serde(rename = "qgevrey")]
    QGevrey { q: f64 },
    #[serde(rename = "loglog")]
    LogLogRow { lambda: f64 },
    Custom,
}

impl FamilyDescriptor {
    fn check(&self) -> Result<()> {
        match *self {
            FamilyDescriptor::Gevrey { s } if !(s >= 1.0 && s.is_finite()) => {
                Err(invalid(format!("Gevrey order must satisfy s >= 1, got {s}")))
            }
            FamilyDescriptor::QGevrey { q } if !(q > 1.0 && q.is_finite()) => {
                Err(invalid(format!("q-Gevrey base must satisfy q > 1, got {q}")))
            }
            FamilyDescriptor::LogLogRow { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(invalid(format!("log-log parameter must satisfy lambda > 0, got {lambda}")))
            }
            _ => Ok(()),
        }
    }

    /// Closed-form `log M_k`, available for every family except `Custom`.
    pub fn log_m_at(&self, k: u64) -> Option<f64> {
        let lf = ln_factorial(k);
        match *self {
            FamilyDescriptor::Factorial => Some(lf),
            FamilyDescriptor::Gevrey { s } => Some(s * lf),
            FamilyDescriptor::QGevrey { q } => Some(lf + (k as f64) * (k as f64) * q.ln()),
            FamilyDescriptor::LogLogRow { lambda } => {
                if k as usize <= LOGLOG_J0 {
                    Some(0.0)
                } else {
                    Some(lf - ln_factorial(LOGLOG_J0 as u64) + lambda * loglog_sum(k))
                }
            }
            FamilyDescriptor::Custom => None,
        }
    }

    fn log_mu_at(&self, j: u64) -> f64 {
        let lj = (j as f64).ln();
        match *self {
            FamilyDescriptor::Factorial => lj,
            FamilyDescriptor::Gevrey { s } => s * lj,
            FamilyDescriptor::QGevrey { q } => lj + (2.0 * j as f64 - 1.0) * q.ln(),
            FamilyDescriptor::LogLogRow { lambda } => {
                if j as usize <= LOGLOG_J0 {
                    0.0
                } else {
                    lj + lambda * lll(j as f64)
                }
            }
            FamilyDescriptor::Custom => unreachable!("custom sequences carry explicit values"),
        }
    }
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyDescriptor::Factorial => write!(f, "factorial"),
            FamilyDescriptor::Gevrey { s } => write!(f, "gevrey:{s}"),
            FamilyDescriptor::QGevrey { q } => write!(f, "qgevrey:{q}"),
            FamilyDescriptor::LogLogRow { lambda } => write!(f, "loglog:{lambda}"),
            FamilyDescriptor::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for FamilyDescriptor {
    type Err = Error;

    /// `factorial`, `gevrey:<s>`, `qgevrey:<q>`, `loglog:<lambda>`, `custom`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let num = |name: &str| -> Result<f64> {
            let p = param.ok_or_else(|| invalid(format!("family `{kind}` needs a parameter ({name})")))?;
            p.parse::<f64>().map_err(|_| invalid(format!("cannot parse {name} = `{p}`")))
        };
        let fam = match kind.to_ascii_lowercase().as_str() {
            "factorial" => FamilyDescriptor::Factorial,
            "gevrey" => FamilyDescriptor::Gevrey { s: num("s")? },
            "qgevrey" | "q-gevrey" => FamilyDescriptor::QGevrey { q: num("q")? },
            "loglog" | "loglogrow" => FamilyDescriptor::LogLogRow { lambda: num("lambda")? },
            "custom" => FamilyDescriptor::Custom,
            other => return Err(invalid(format!("unknown sequence family `{other}`"))),
        };
        fam.check()?;
        Ok(fam)
    }
}

fn lll(x: f64) -> f64 {
    x.ln().ln().ln()
}

const LOGLOG_TABLE: u64 = 1 << 16;

fn loglog_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = vec![0.0; LOGLOG_TABLE as usize + 1];
        let mut acc = NeumaierSum::default();
        for i in (LOGLOG_J0 + 1)..=LOGLOG_TABLE as usize {
            acc.add(lll(i as f64));
            out[i] = acc.value();
        }
        out
    })
}

/// `sum_{i=16}^{k} log log log i`; exact up to 2^16, Euler-Maclaurin beyond.
fn loglog_sum(k: u64) -> f64 {
    let table = loglog_table();
    if k <= LOGLOG_TABLE {
        return table[k as usize];
    }
    let a = LOGLOG_TABLE as f64;
    let b = k as f64;
    let (la, lb) = (a.ln(), b.ln());
    let panels = ((lb - la) / 0.25).ceil().max(1.0) as usize;
    let integral = gauss_legendre(|u| u.exp() * u.ln().ln(), la, lb, panels);
    let d1 = |x: f64| 1.0 / (x * x.ln() * x.ln().ln());
    // sum_{i=a+1}^{b} f(i) = int_a^b f + (f(b) - f(a))/2 + (f'(b) - f'(a))/12
    table[LOGLOG_TABLE as usize] + integral + 0.5 * (lll(b) - lll(a)) + (d1(b) - d1(a)) / 12.0
}

/// Truncated weight sequence `log M_0 .. log M_J` with `log M_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    family: FamilyDescriptor,
    log_m: Vec<f64>,
    log_mu: Vec<f64>,
}

impl WeightSequence {
    /// Materialize `family` up to index `j_max`.
    pub fn new(family: FamilyDescriptor, j_max: usize) -> Result<Self> {
        if family == FamilyDescriptor::Custom {
            return Err(invalid("custom sequences are built from explicit values"));
        }
        family.check()?;
        if j_max < 2 {
            return Err(invalid(format!("truncation J must be at least 2, got {j_max}")));
        }
        let log_m: Vec<f64> = (0..=j_max as u64).map(|k| family.log_m_at(k).unwrap()).collect();
        let mut log_mu = vec![0.0; j_max + 1];
        for (j, mu) in log_mu.iter_mut().enumerate().skip(1) {
            *mu = family.log_mu_at(j as u64);
        }
        Ok(WeightSequence { family, log_m, log_mu })
    }

    /// Sequence from explicit `log M_j`, `j = 0..=J`.
    pub fn custom(log_m: Vec<f64>) -> Result<Self> {
        if log_m.len() < 3 {
            return Err(invalid("custom sequence needs at least three values (J >= 2)"));
        }
        if let Some(j) = log_m.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("log M_{j} is not finite")));
        }
        if log_m[0].abs() > 1e-12 {
            return Err(invalid(format!("sequence must be normalized (M_0 = 1), got log M_0 = {}", log_m[0])));
        }
        let mut log_m = log_m;
        log_m[0] = 0.0;
        let mut log_mu = vec![0.0; log_m.len()];
        for j in 1..log_m.len() {
            log_mu[j] = log_m[j] - log_m[j - 1];
        }
        Ok(WeightSequence { family: FamilyDescriptor::Custom, log_m, log_mu })
    }

    /// Sequence from explicit values `M_j > 0`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if let Some(j) = values.iter().position(|v| !(*v > 0.0)) {
            return Err(invalid(format!("M_{j} must be positive")));
        }
        Self::custom(values.iter().map(|v| v.ln()).collect())
    }

    pub fn family(&self) -> &FamilyDescriptor {
        &self.family
    }

    /// Truncation index `J`.
    pub fn truncation(&self) -> usize {
        self.log_m.len() - 1
    }

    pub fn log_m(&self) -> &[f64] {
        &self.log_m
    }

    /// `log mu_j = log(M_j / M_{j-1})`, with `mu_0 := 1`.
    pub fn log_mu(&self) -> &[f64] {
        &self.log_mu
    }

    /// `log m_j = log(M_j / j!)`.
    pub fn log_small_m(&self, j: usize) -> f64 {
        self.log_m[j] - ln_factorial(j as u64)
    }

    /// `log M_k` for any `k`: stored values inside the truncation, the
    /// family's closed form beyond it.
    pub fn log_m_at(&self, k: u64) -> Option<f64> {
        if (k as usize) < self.log_m.len() {
            Some(self.log_m[k as usize])
        } else {
            self.family.log_m_at(k)
        }
    }

    /// `(h^j M_j)` as a custom sequence.
    pub fn rescaled(&self, log_h: f64) -> WeightSequence {
        let log_m = self.log_m.iter().enumerate().map(|(j, v)| v + j as f64 * log_h).collect();
        let log_mu = self.log_mu.iter().enumerate().map(|(j, v)| if j == 0 { 0.0 } else { v + log_h }).collect();
        WeightSequence { family: FamilyDescriptor::Custom, log_m, log_mu }
    }
}

/// Structural check of the standing assumptions on a weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `log M_0 = 0` and `log M_1 >= 0`.
    pub normalized: bool,
    /// `mu_j` nondecreasing.
    pub log_convex: bool,
    /// First index where `mu_j < mu_{j-1}`.
    pub first_violation: Option<usize>,
    /// `(log m_j)/j` stays bounded below on the tail window.
    pub lower_bound: Verdict,
    pub valid: bool,
}

pub fn validate_weight_sequence(w: &WeightSequence) -> ValidationReport {
    let normalized = w.log_m[0] == 0.0 && w.log_m[1] >= -1e-12;
    let mu = &w.log_mu;
    let first_violation = (2..mu.len()).find(|&j| mu[j] < mu[j - 1] - 1e-12 * mu[j - 1].abs().max(1.0));
    let log_convex = first_violation.is_none();
    let rates: Vec<f64> =
        (TREND_START..=w.truncation()).map(|j| w.log_small_m(j) / j as f64).collect();
    let lower_bound = decay_trend(window_stats(&rates).as_ref()).negate();
    ValidationReport {
        normalized,
        log_convex,
        first_violation,
        lower_bound,
        valid: normalized && log_convex && lower_bound != Verdict::Fails,
    }
}

impl ValidationReport {
    pub fn to_verdict(&self) -> ConditionVerdict {
        let holds = if !self.normalized || !self.log_convex {
            Verdict::Fails
        } else {
            self.lower_bound
        };
        let mut v = ConditionVerdict::new("valid", holds);
        if let Some(j) = self.first_violation {
            v = v.with_cert("first_violation", j as f64).note(format!("mu_{j} < mu_{}", j - 1));
        }
        if !self.normalized {
            v = v.note("not normalized: need M_0 = 1 <= M_1");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `M ≈ N`.
    Equivalent,
    /// `M ◁ N`.
    StrictlyBelow,
    /// `M ≼ N` only.
    Below,
    /// `N ◁ M`.
    StrictlyAbove,
    /// `N ≼ M` only.
    Above,
    Incomparable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceComparison {
    pub relation: Relation,
    /// `M ≼ N`.
    pub below: Verdict,
    /// `N ≼ M`.
    pub above: Verdict,
    /// `M ◁ N`.
    pub strictly_below: Verdict,
    /// `N ◁ M`.
    pub strictly_above: Verdict,
    /// `r_j = (log M_j - log N_j)/j`, `j = 1..=J`.
    pub rates: Vec<f64>,
}

/// Classify `M` against `N` from `r_j = (log M_j - log N_j)/j` on the common truncation.
pub fn compare_sequences(m: &WeightSequence, n: &WeightSequence) -> SequenceComparison {
    let j_max = m.truncation().min(n.truncation());
    let rates: Vec<f64> = (1..=j_max).map(|j| (m.log_m[j] - n.log_m[j]) / j as f64).collect();
    if j_max < TREND_START {
        return SequenceComparison {
            relation: Relation::Inconclusive,
            below: Verdict::Inconclusive,
            above: Verdict::Inconclusive,
            strictly_below: Verdict::Inconclusive,
            strictly_above: Verdict::Inconclusive,
            rates,
        };
    }
    let tail: Vec<f64> = rates[TREND_START - 1..].to_vec();
    let neg: Vec<f64> = tail.iter().map(|r| -r).collect();
    let below = bounded_trend(window_stats(&tail).as_ref());
    let above = bounded_trend(window_stats(&neg).as_ref());
    let strictly_below = decay_trend(window_stats(&tail).as_ref());
    let strictly_above = decay_trend(window_stats(&neg).as_ref());
    let relation = if strictly_below.holds() {
        Relation::StrictlyBelow
    } else if strictly_above.holds() {
        Relation::StrictlyAbove
    } else if below.holds() && above.holds() {
        Relation::Equivalent
    } else if below.holds() {
        Relation::Below
    } else if above.holds() {
        Relation::Above
    } else if below == Verdict::Fails && above == Verdict::Fails {
        Relation::Incomparable
    } else {
        Relation::Inconclusive
    };
    SequenceComparison { relation, below, above, strictly_below, strictly_above, rates }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SequenceCondition {
    /// Moderate growth `M_{j+k} <= C^{j+k} M_j M_k`.
    ModerateGrowth,
    /// Non-quasianalyticity `sum 1/mu_j < infinity`.
    NonQuasianalytic,
    /// `m_j^2 <= C h^j m_j`.
    PointwiseSquare,
    /// `m_j^{2C} <= D h^j m_{Cj}`.
    Mixed { c: usize },
    /// `(M_j^{1/j})^2 <= C1 j M_{Cj}^{1/(Cj)}` plus the geometric tail bound.
    Destroyer { c: usize, c1: Option<f64> },
}

impl fmt::Display for SequenceCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceCondition::ModerateGrowth => write!(f, "mg"),
            SequenceCondition::NonQuasianalytic => write!(f, "nq"),
            SequenceCondition::PointwiseSquare => write!(f, "pointwise-square"),
            SequenceCondition::Mixed { c } => write!(f, "mixed:{c}"),
            SequenceCondition::Destroyer { c, c1: None } => write!(f, "destroyer:{c}"),
            SequenceCondition::Destroyer { c, c1: Some(c1) } => write!(f, "destroyer:{c}:{c1}"),
        }
    }
}

impl FromStr for SequenceCondition {
    type Err = Error;

    /// `mg`, `nq`, `pointwise-square`, `mixed:<C>`, `destroyer:<C>[:<C1>]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let int = |p: Option<&&str>| -> Result<usize> {
            let p = p.ok_or_else(|| invalid(format!("condition `{s}` needs an integer C")))?;
            match p.parse::<usize>() {
                Ok(c) if c >= 1 => Ok(c),
                _ => Err(invalid(format!("C must be a positive integer, got `{p}`"))),
            }
        };
        match parts[0].to_ascii_lowercase().as_str() {
            "mg" => Ok(SequenceCondition::ModerateGrowth),
            "nq" => Ok(SequenceCondition::NonQuasianalytic),
            "pointwise-square" | "pointwise_square" => Ok(SequenceCondition::PointwiseSquare),
            "mixed" => Ok(SequenceCondition::Mixed { c: int(parts.get(1))? }),
            "destroyer" => {
                let c = int(parts.get(1))?;
                let c1 = match parts.get(2) {
                    Some(p) => Some(p.parse::<f64>().map_err(|_| invalid(format!("cannot parse C1 = `{p}`")))?),
                    None => None,
                };
                Ok(SequenceCondition::Destroyer { c, c1 })
            }
            other => Err(invalid(format!("unknown sequence condition `{other}`"))),
        }
    }
}

fn indexed(defects: &[(usize, f64)]) -> Vec<(f64, f64)> {
    defects.iter().map(|&(j, d)| (j as f64, d)).collect()
}

fn tail_values(defects: &[(usize, f64)]) -> Vec<f64> {
    defects.iter().filter(|(j, _)| *j >= TREND_START).map(|p| p.1).collect()
}

/// Verdict for a single-sequence condition on the truncation.
pub fn check_sequence_condition(w: &WeightSequence, cond: SequenceCondition) -> Result<ConditionVerdict> {
    let j_max = w.truncation();
    if j_max < 2 * TREND_START {
        return Err(invalid(format!("truncation J = {j_max} is too short for trend evidence (need >= 16)")));
    }
    let name = cond.to_string();
    match cond {
        SequenceCondition::ModerateGrowth => {
            let lm = &w.log_m;
            let defects: Vec<(usize, f64)> = (2..=j_max)
                .map(|n| {
                    let worst = (1..n).map(|j| lm[n] - lm[j] - lm[n - j]).fold(f64::NEG_INFINITY, f64::max);
                    (n, worst / n as f64)
                })
                .collect();
            let stats = window_stats(&tail_values(&defects));
            let holds = bounded_trend(stats.as_ref());
            let log_c = defects.iter().map(|p| p.1).fold(0.0_f64, f64::max);
            Ok(ConditionVerdict::new(name, holds)
                .with_cert("C", log_c.exp())
                .with_evidence(indexed(&defects), stats))
        }
        SequenceCondition::PointwiseSquare => {
            let defects: Vec<(usize, f64)> = (1..=j_max).map(|j| (j, w.log_small_m(j) / j as f64)).collect();
            let stats = window_stats(&tail_values(&defects));
            let holds = bounded_trend(stats.as_ref());
            let (log_c, log_h) = linear_certificate(&defects);
            Ok(ConditionVerdict::new(name, holds)
                .with_cert("C", log_c.exp())
                .with_cert("h", log_h.exp())
                .with_evidence(indexed(&defects), stats))
        }
        SequenceCondition::Mixed { c } => {
            let top = j_max / c;
            if top < 2 * TREND_START {
                return Err(invalid(format!("mixed({c}) evidence range j <= J/C = {top} is too short")));
            }
            let cf = c as f64;
            let defects: Vec<(usize, f64)> = (1..=top)
                .map(|j| (j, (2.0 * cf * w.log_small_m(j) - w.log_small_m(c * j)) / j as f64))
                .collect();
            let stats = window_stats(&tail_values(&defects));
            let holds = bounded_trend(stats.as_ref());
            let (log_d, log_h) = linear_certificate(&defects);
            Ok(ConditionVerdict::new(name, holds)
                .with_cert("C", cf)
                .with_cert("D", log_d.exp())
                .with_cert("h", log_h.exp())
                .with_evidence(indexed(&defects), stats))
        }
        SequenceCondition::NonQuasianalytic => Ok(check_nq(w, name)),
        SequenceCondition::Destroyer { c, c1 } => check_destroyer(w, c, c1, name),
    }
}

fn check_nq(w: &WeightSequence, name: String) -> ConditionVerdict {
    let j_max = w.truncation();
    let mut quot = NeumaierSum::default();
    let mut carl = NeumaierSum::default();
    let mut quot_sums = Vec::with_capacity(j_max);
    let mut carl_sums = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        quot.add((-w.log_mu[j]).exp());
        carl.add((-w.log_m[j] / j as f64).exp());
        quot_sums.push((j, quot.value()));
        carl_sums.push((j, carl.value()));
    }
    let q_stats = window_stats(&tail_values(&quot_sums));
    let c_stats = window_stats(&tail_values(&carl_sums));
    let q_verdict = bounded_trend(q_stats.as_ref());
    let c_verdict = bounded_trend(c_stats.as_ref());
    let holds = if q_verdict == c_verdict { q_verdict } else { Verdict::Inconclusive };
    let label = match holds {
        Verdict::Holds => "non-quasianalytic: partial sums plateau",
        Verdict::Fails => "quasianalytic: partial sums keep growing",
        Verdict::Inconclusive => "partial-sum trends disagree or are flat-ambiguous",
    };
    ConditionVerdict::new(name, holds)
        .with_cert("sum_quotients", quot.value())
        .with_cert("sum_carleman", carl.value())
        .note(label)
        .note(format!("quotient-sum trend: {q_verdict}; carleman-sum trend: {c_verdict}"))
        .with_evidence(indexed(&quot_sums), q_stats)
}

fn check_destroyer(w: &WeightSequence, c: usize, c1: Option<f64>, name: String) -> Result<ConditionVerdict> {
    let j_max = w.truncation();
    let top = j_max / c;
    if top < 2 * TREND_START {
        return Err(invalid(format!("destroyer({c}) evidence range j <= J/C = {top} is too short")));
    }
    if c < 2 {
        return Err(invalid("destroyer condition needs C >= 2"));
    }
    if let Some(c1) = c1 {
        if !(c1 >= 1.0) {
            return Err(invalid(format!("C1 must be >= 1, got {c1}")));
        }
    }
    let lm = &w.log_m;
    let cf = c as f64;
    let defects: Vec<(usize, f64)> = (1..=top)
        .map(|j| {
            let jf = j as f64;
            (j, 2.0 * lm[j] / jf - jf.ln() - lm[c * j] / (cf * jf))
        })
        .collect();
    let stats = window_stats(&tail_values(&defects));
    let trend = bounded_trend(stats.as_ref());
    let sup_d = defects.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let log_c1 = match c1 {
        Some(v) => v.ln(),
        None => snap(sup_d.max(0.0)),
    };
    let mut verdict = ConditionVerdict::new(name, trend).with_cert("C", cf).with_cert("C1", log_c1.exp());
    if sup_d > log_c1 + 1e-12 {
        let worst = defects.iter().find(|p| p.1 > log_c1 + 1e-12).unwrap().0;
        verdict.holds = Verdict::Fails;
        verdict = verdict.note(format!("supplied C1 violated at j = {worst}"));
        return Ok(verdict.with_evidence(indexed(&defects), stats));
    }
    // smallest q with q C C1 / M_q^{1/q} < 1
    let base = cf.ln() + log_c1;
    let q = (1..=j_max).find(|&q| (q as f64).ln() + base - lm[q] / (q as f64) < 0.0);
    let Some(q) = q else {
        verdict.holds = Verdict::Inconclusive;
        return Ok(verdict.note("no q <= J with q C C1 / M_q^(1/q) < 1").with_evidence(indexed(&defects), stats));
    };
    let log_r = (q as f64).ln() + base - lm[q] / q as f64;
    let mut geometric = NeumaierSum::default();
    let mut power = log_r;
    for _ in 0..64 {
        let term = power.exp();
        if term < 1e-300 {
            break;
        }
        geometric.add(term);
        power *= 2.0;
    }
    let mut tail = NeumaierSum::default();
    for (j, l) in lm.iter().enumerate().skip(q) {
        tail.add((-l / j as f64).exp());
    }
    let bound_ok = geometric.value() >= tail.value();
    if trend == Verdict::Holds && !bound_ok {
        verdict.holds = Verdict::Fails;
        verdict = verdict.note("geometric bound below the Carleman tail sum");
    }
    Ok(verdict
        .with_cert("q", q as f64)
        .with_cert("geometric_bound", geometric.value())
        .with_cert("carleman_tail", tail.value())
        .with_evidence(indexed(&defects), stats))
}
