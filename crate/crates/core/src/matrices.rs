//! Weight matrices `{M^(lambda)}`: finite families of weight sequences
//! ordered pointwise along a strictly increasing `lambda` grid.

use crate::error::{invalid, Error, Result};
use crate::numeric::ln_factorial;
use crate::sequences::{check_sequence_condition, FamilyDescriptor, SequenceCondition, WeightSequence};
use crate::verdict::{bounded_trend, linear_certificate, window_stats, ConditionVerdict, Verdict, TREND_START};
use crate::weight_functions::{associated_omega_log, legendre_lower, legendre_upper, LogGrid, WeightFunction};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Default `lambda` grid.
pub const DEFAULT_LAMBDAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const ORDER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    lambdas: Vec<f64>,
    rows: Vec<WeightSequence>,
}

impl WeightMatrix {
    /// Rows must share one truncation, be log-convex, and satisfy
    /// `M^(lambda) <= M^(kappa)` for `lambda <= kappa`.
    pub fn new(lambdas: Vec<f64>, rows: Vec<WeightSequence>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != rows.len() {
            return Err(invalid("matrix needs one row per lambda"));
        }
        if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("lambda values must be positive and finite"));
        }
        if lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("lambda grid must be strictly increasing"));
        }
        let j_max = rows[0].truncation();
        if rows.iter().any(|r| r.truncation() != j_max) {
            return Err(invalid("all rows must share the same truncation J"));
        }
        for (r, lambda) in rows.iter().zip(&lambdas) {
            let mu = r.log_mu();
            if let Some(j) = (2..mu.len()).find(|&j| mu[j] < mu[j - 1] - ORDER_TOL * mu[j - 1].abs().max(1.0)) {
                return Err(invalid(format!("row lambda = {lambda} is not log-convex at j = {j}")));
            }
        }
        for (i, pair) in rows.windows(2).enumerate() {
            let (a, b) = (pair[0].log_m(), pair[1].log_m());
            if let Some(j) = (0..a.len()).find(|&j| a[j] > b[j] + ORDER_TOL * a[j].abs().max(1.0)) {
                return Err(invalid(format!(
                    "pointwise order violated between lambda = {} and {} at j = {j}",
                    lambdas[i],
                    lambdas[i + 1]
                )));
            }
        }
        Ok(WeightMatrix { lambdas, rows })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn rows(&self) -> &[WeightSequence] {
        &self.rows
    }

    pub fn truncation(&self) -> usize {
        self.rows[0].truncation()
    }

    pub fn row_index(&self, lambda: f64) -> Option<usize> {
        self.lambdas.iter().position(|l| (l - lambda).abs() <= 1e-12 * lambda.max(1.0))
    }

    pub fn row(&self, lambda: f64) -> Option<&WeightSequence> {
        self.row_index(lambda).map(|i| &self.rows[i])
    }
}

/// `W^(lambda)_j = exp(phi*(lambda j) / lambda)`, with `W_0 := 1`.
pub fn associated_matrix(omega: &WeightFunction, lambdas: &[f64], j_max: usize) -> Result<WeightMatrix> {
    if j_max < 2 {
        return Err(invalid("matrix truncation J must be at least 2"));
    }
    let cells: Vec<(usize, usize)> =
        (0..lambdas.len()).flat_map(|a| (1..=j_max).map(move |j| (a, j))).collect();
    let values: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(a, j)| {
            let lambda = lambdas[a];
            let c = legendre_upper(omega, lambda * j as f64)?;
            if c.saturated {
                return Err(Error::Saturation { lambda, j });
            }
            Ok(c.value / lambda)
        })
        .collect();
    let mut rows = vec![vec![0.0; j_max + 1]; lambdas.len()];
    for (&(a, j), v) in cells.iter().zip(values) {
        rows[a][j] = v?;
    }
    let rows = rows.into_iter().map(WeightSequence::custom).collect::<Result<Vec<_>>>()?;
    WeightMatrix::new(lambdas.to_vec(), rows)
}

/// Matrix whose rows are the log-log sequences `M^(lambda)`.
pub fn build_example_matrix(lambdas: &[f64], j_max: usize) -> Result<WeightMatrix> {
    let rows = lambdas
        .iter()
        .map(|&lambda| WeightSequence::new(FamilyDescriptor::LogLogRow { lambda }, j_max))
        .collect::<Result<Vec<_>>>()?;
    WeightMatrix::new(lambdas.to_vec(), rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixCondition {
    /// `forall lambda exists kappa: (m^lambda_j)^2 <= C h^j m^kappa_j`.
    RoumieuSquare,
    /// `forall lambda exists kappa: (m^kappa_j)^2 <= C h^j m^lambda_j`.
    BeurlingSquare,
    /// As `RoumieuSquare` with `M` in place of `m`.
    RoumieuBigSquare,
    /// As `BeurlingSquare` with `M` in place of `m`.
    BeurlingBigSquare,
    /// Every row quasianalytic.
    Quasianalytic,
}

impl fmt::Display for MatrixCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixCondition::RoumieuSquare => "roumieu-square",
            MatrixCondition::BeurlingSquare => "beurling-square",
            MatrixCondition::RoumieuBigSquare => "roumieu-big-square",
            MatrixCondition::BeurlingBigSquare => "beurling-big-square",
            MatrixCondition::Quasianalytic => "quasianalytic",
        })
    }
}

impl FromStr for MatrixCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "roumieu-square" => MatrixCondition::RoumieuSquare,
            "beurling-square" => MatrixCondition::BeurlingSquare,
            "roumieu-big-square" => MatrixCondition::RoumieuBigSquare,
            "beurling-big-square" => MatrixCondition::BeurlingBigSquare,
            "quasianalytic" => MatrixCondition::Quasianalytic,
            other => return Err(invalid(format!("unknown matrix condition `{other}`"))),
        })
    }
}

fn row_log(row: &WeightSequence, j: usize, big: bool) -> f64 {
    if big {
        row.log_m()[j]
    } else {
        row.log_m()[j] - ln_factorial(j as u64)
    }
}

/// Per-index square defect `(2 L^a_j - L^b_j)/j`, `j = 1..=J`, where `L` is
/// `log m` (or `log M` when `big`).
pub fn square_defect(mx: &WeightMatrix, big: bool, a: usize, b: usize) -> Vec<f64> {
    let (ra, rb) = (&mx.rows[a], &mx.rows[b]);
    (1..=mx.truncation())
        .map(|j| (2.0 * row_log(ra, j, big) - row_log(rb, j, big)) / j as f64)
        .collect()
}

/// Outcome of one `(lambda, kappa)` pairing.
fn pair_verdict(mx: &WeightMatrix, big: bool, squared: usize, other: usize) -> (Verdict, f64, f64) {
    let d = square_defect(mx, big, squared, other);
    let indexed: Vec<(usize, f64)> = d.iter().enumerate().map(|(i, v)| (i + 1, *v)).collect();
    let tail: Vec<f64> = d[TREND_START - 1..].to_vec();
    let holds = bounded_trend(window_stats(&tail).as_ref());
    let (log_c, log_h) = linear_certificate(&indexed);
    (holds, log_c, log_h)
}

/// Verdict for a matrix condition. The `forall lambda` quantifier runs over
/// the grid rows that have a partner on the required side; the extreme row
/// (top for Roumieu, bottom for Beurling) only counts if it pairs with itself.
pub fn check_matrix_condition(mx: &WeightMatrix, cond: MatrixCondition) -> Result<ConditionVerdict> {
    let n = mx.lambdas.len();
    if n < 2 {
        return Err(invalid("matrix conditions need at least two rows"));
    }
    if mx.truncation() < 2 * TREND_START {
        return Err(invalid("matrix truncation J is too short for trend evidence (need >= 16)"));
    }
    let name = cond.to_string();
    if cond == MatrixCondition::Quasianalytic {
        let mut verdict = ConditionVerdict::new(name, Verdict::Holds);
        let mut all = Verdict::Holds;
        for (row, lambda) in mx.rows.iter().zip(&mx.lambdas) {
            let nq = check_sequence_condition(row, SequenceCondition::NonQuasianalytic)?;
            verdict = verdict.with_cert(&format!("sum_quotients@{lambda}"), nq.cert("sum_quotients").unwrap_or(f64::NAN));
            all = all.and(nq.holds.negate());
        }
        verdict.holds = all;
        return Ok(verdict);
    }
    let (roumieu, big) = match cond {
        MatrixCondition::RoumieuSquare => (true, false),
        MatrixCondition::RoumieuBigSquare => (true, true),
        MatrixCondition::BeurlingSquare => (false, false),
        MatrixCondition::BeurlingBigSquare => (false, true),
        MatrixCondition::Quasianalytic => unreachable!(),
    };
    let mut verdict = ConditionVerdict::new(name, Verdict::Holds);
    let mut overall = Verdict::Holds;
    let mut edge_skipped = None;
    for a in 0..n {
        let partners: Vec<usize> = if roumieu { (a..n).collect() } else { (0..=a).rev().collect() };
        let is_edge = if roumieu { a == n - 1 } else { a == 0 };
        let mut found = None;
        let mut all_fail = true;
        for &b in &partners {
            let (holds, log_c, log_h) =
                if roumieu { pair_verdict(mx, big, a, b) } else { pair_verdict(mx, big, b, a) };
            if holds.holds() {
                found = Some((b, log_c, log_h));
                break;
            }
            all_fail &= holds == Verdict::Fails;
        }
        let lambda = mx.lambdas[a];
        match found {
            Some((b, log_c, log_h)) => {
                verdict = verdict
                    .with_cert(&format!("kappa@{lambda}"), mx.lambdas[b])
                    .with_cert(&format!("C@{lambda}"), log_c.exp())
                    .with_cert(&format!("h@{lambda}"), log_h.exp());
            }
            None if is_edge => edge_skipped = Some(lambda),
            None => {
                overall = overall.and(if all_fail { Verdict::Fails } else { Verdict::Inconclusive });
                verdict = verdict.note(format!(
                    "lambda = {lambda}: no grid partner {}",
                    if all_fail { "works" } else { "is conclusive" }
                ));
            }
        }
    }
    if let Some(lambda) = edge_skipped {
        verdict = verdict.note(format!("lambda = {lambda} has no grid partner beyond itself; quantified over the remaining rows"));
    }
    verdict.holds = overall;
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodEquivalenceReport {
    pub lambda: f64,
    /// `max_t (lambda omega_W(t) - omega(t))`, required `<= 1e-9`.
    pub lower_defect: f64,
    /// `max_t (omega(t) - 2 lambda omega_W(t))` over unsaturated points.
    pub c_lambda: f64,
    pub points: usize,
    /// Points where `omega_W` saturates; they enter only the lower defect,
    /// for which the truncated value is still a valid lower bound.
    pub saturated_points: usize,
    pub holds: bool,
}

/// `lambda omega_{W^lambda}(t) <= omega(t) <= 2 lambda omega_{W^lambda}(t) + C_lambda`.
pub fn verify_good_equivalence(
    omega: &WeightFunction,
    mx: &WeightMatrix,
    lambda: f64,
    grid: &LogGrid,
) -> Result<GoodEquivalenceReport> {
    let row = mx.row(lambda).ok_or_else(|| invalid(format!("lambda = {lambda} is not a matrix row")))?;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut points = 0;
    let mut saturated = 0;
    for y in grid.ys() {
        let w = omega.phi(y);
        if w.saturated {
            continue;
        }
        let ow = associated_omega_log(row, y);
        points += 1;
        lower = lower.max(lambda * ow.value - w.value);
        if ow.saturated {
            saturated += 1;
        } else {
            upper = upper.max(w.value - 2.0 * lambda * ow.value);
        }
    }
    if points == 0 {
        return Err(invalid("no grid point lies inside the weight's faithful domain"));
    }
    let c_lambda = upper.max(0.0);
    Ok(GoodEquivalenceReport {
        lambda,
        lower_defect: lower,
        c_lambda,
        points,
        saturated_points: saturated,
        holds: lower <= 1e-9 && c_lambda.is_finite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynkinReport {
    pub kappa: f64,
    /// `Ŵ_1 / Ŵ_0`.
    pub threshold: f64,
    /// `max (omega_Ŵ(t) - (omega^iota_W)_*(t))`.
    pub left_defect: f64,
    /// `max ((omega^iota_W)_*(t) - 1 - omega_Ŵ(e t))`.
    pub right_defect: f64,
    pub points: usize,
    /// Grid points below the threshold or with saturated evaluations.
    pub dropped: usize,
}

/// `omega_Ŵ(t) <= (omega^iota_W)_*(t) <= 1 + omega_Ŵ(e t)` for `t >= Ŵ_1/Ŵ_0`,
/// where `Ŵ_j = j! W_j` for the row `kappa`.
pub fn verify_dynkin_sandwich(mx: &WeightMatrix, kappa: f64, grid: &LogGrid) -> Result<DynkinReport> {
    let row = mx.row(kappa).ok_or_else(|| invalid(format!("kappa = {kappa} is not a matrix row")))?;
    let hat = WeightSequence::custom(
        row.log_m().iter().enumerate().map(|(j, v)| v + ln_factorial(j as u64)).collect(),
    )?;
    let log_threshold = hat.log_m()[1] - hat.log_m()[0];
    let omega_w = WeightFunction::associated(row.clone());
    let ys = grid.ys();
    let results: Vec<Option<(f64, f64)>> = ys
        .par_iter()
        .map(|&y| {
            if y < log_threshold {
                return None;
            }
            let left = associated_omega_log(&hat, y);
            let right = associated_omega_log(&hat, y + 1.0);
            if left.saturated || right.saturated {
                return None;
            }
            let mid = legendre_lower(&omega_w, y.exp()).ok()?;
            if mid.saturated {
                return None;
            }
            Some((left.value - mid.value, mid.value - 1.0 - right.value))
        })
        .collect();
    let used: Vec<(f64, f64)> = results.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(invalid("no admissible grid point at or above the threshold"));
    }
    Ok(DynkinReport {
        kappa,
        threshold: log_threshold.exp(),
        left_defect: used.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        right_defect: used.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        points: used.len(),
        dropped: ys.len() - used.len(),
    })
}
