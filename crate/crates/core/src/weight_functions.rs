//! Weight functions `omega`, the associated function `omega_M`, the two
//! Legendre-type conjugates and the function-level growth conditions.
//!
//! Functions are evaluated through `phi(y) = omega(e^y)` so that weights
//! with astronomically large domains (q-Gevrey) stay representable.

use crate::error::{invalid, Error, Result};
use crate::numeric::{linspace, maximize, minimize, trapezoid, Edge, GRID_POINTS};
use crate::sequences::WeightSequence;
use crate::verdict::{bounded_trend, decay_trend, window_stats, ConditionVerdict, Verdict};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

const MAX_WIDEN: usize = 12;
/// Trapezoid step in `u = log t` for the integral conditions.
pub const QUAD_STEP: f64 = 1.0 / 256.0;
/// Growth margin separating convergent from divergent partial integrals.
pub const DIVERGENCE_MARGIN: f64 = 0.05;
const H_CANDIDATES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Piecewise-linear weight on a `(t, omega)` grid; linear in `log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedWeight {
    log_t: Vec<f64>,
    omega: Vec<f64>,
}

impl TabulatedWeight {
    pub fn new(t: &[f64], omega: &[f64]) -> Result<Self> {
        if t.len() != omega.len() || t.len() < 2 {
            return Err(invalid("tabulated weight needs at least two (t, omega) pairs of equal length"));
        }
        if t.iter().any(|v| !(*v > 0.0 && v.is_finite())) || omega.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated weight needs finite t > 0 and finite omega"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated t values must be strictly increasing"));
        }
        if omega.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("tabulated omega values must be nondecreasing"));
        }
        Ok(TabulatedWeight { log_t: t.iter().map(|v| v.ln()).collect(), omega: omega.to_vec() })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.log_t.iter().zip(&self.omega).map(|(y, w)| (y.exp(), *w))
    }

    fn phi(&self, y: f64) -> Sample {
        let n = self.log_t.len();
        if y <= self.log_t[0] {
            return Sample { value: self.omega[0], saturated: false };
        }
        if y > self.log_t[n - 1] {
            return Sample { value: self.omega[n - 1], saturated: true };
        }
        let i = self.log_t.partition_point(|v| *v < y).max(1);
        let (y0, y1) = (self.log_t[i - 1], self.log_t[i]);
        let s = (y - y0) / (y1 - y0);
        Sample { value: self.omega[i - 1] + s * (self.omega[i] - self.omega[i - 1]), saturated: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    /// Raw `t^alpha` (not normalized to vanish on `[0, 1]`).
    Power { alpha: f64 },
    /// `omega_M` of a validated weight sequence.
    Associated(WeightSequence),
    Tabulated(TabulatedWeight),
}

/// A function value plus whether it came from outside the faithful domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub value: f64,
    pub saturated: bool,
}

impl WeightFunction {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(invalid(format!("power exponent must be finite and >= 1, got {alpha}")));
        }
        Ok(WeightFunction::Power { alpha })
    }

    pub fn associated(w: WeightSequence) -> Self {
        WeightFunction::Associated(w)
    }

    /// `phi(y) = omega(e^y)`.
    pub fn phi(&self, y: f64) -> Sample {
        match self {
            WeightFunction::Power { alpha } => Sample { value: (alpha * y).exp(), saturated: false },
            WeightFunction::Associated(w) => {
                let v = associated_omega_log(w, y);
                Sample { value: v.value, saturated: v.saturated }
            }
            WeightFunction::Tabulated(t) => t.phi(y),
        }
    }

    /// `omega(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Sample {
        self.phi(if t == 0.0 { f64::NEG_INFINITY } else { t.ln() })
    }

    /// Largest `log t` at which evaluations are faithful, if bounded.
    pub fn log_limit(&self) -> Option<f64> {
        match self {
            WeightFunction::Power { .. } => None,
            WeightFunction::Associated(w) => Some(w.log_mu()[w.truncation()]),
            WeightFunction::Tabulated(t) => Some(*t.log_t.last().unwrap()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WeightFunction::Power { alpha } => format!("power:{alpha}"),
            WeightFunction::Associated(w) => format!("associated({}, J={})", w.family(), w.truncation()),
            WeightFunction::Tabulated(t) => format!("tabulated({} points)", t.log_t.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaValue {
    pub value: f64,
    /// Index attaining `sup_j (j log t - log M_j)`.
    pub maximizer: usize,
    /// The maximizer is the truncation index, so the value is only a lower bound.
    pub saturated: bool,
}

/// `omega_M(t)` by the counting form `sum_{j>=1, mu_j <= t} log(t/mu_j)`.
pub fn associated_omega(w: &WeightSequence, t: f64) -> Result<OmegaValue> {
    if !(t >= 0.0) || t.is_infinite() {
        return Err(invalid(format!("omega_M needs finite t >= 0, got {t}")));
    }
    Ok(associated_omega_log(w, if t == 0.0 { f64::NEG_INFINITY } else { t.ln() }))
}

/// `omega_M(e^y)`. The count `K` of quotients `mu_j <= e^y` gives the value
/// `K y - log M_K`, which is the telescoped counting sum.
pub fn associated_omega_log(w: &WeightSequence, y: f64) -> OmegaValue {
    let mu = &w.log_mu()[1..];
    let k = mu.partition_point(|&l| l <= y);
    let value = if k == 0 { 0.0 } else { k as f64 * y - w.log_m()[k] };
    OmegaValue { value, maximizer: k, saturated: k == w.truncation() }
}

/// Recover `log M_j = sup_t (j log t - omega_M(t))` from `omega_M` alone.
pub fn lc_minorant_roundtrip(w: &WeightSequence, j: usize) -> Result<f64> {
    let top = w.truncation();
    if 2 * j > top {
        return Err(invalid(format!("round trip needs j <= J/2, got j = {j} with J = {top}")));
    }
    let lo = w.log_mu()[1].min(0.0) - 1.0;
    let hi = w.log_mu()[top].max(lo + 1.0);
    let jf = j as f64;
    let e = maximize(|y| jf * y - associated_omega_log(w, y).value, lo, hi, GRID_POINTS);
    Ok(e.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conjugate {
    pub value: f64,
    /// Optimizer in log coordinates (`y` for the upper, `log s` for the lower conjugate).
    pub arg: f64,
    /// The optimizer sits at the end of the faithful domain.
    pub saturated: bool,
}

/// `phi*(x) = sup_{y >= 0} (x y - omega(e^y))`.
pub fn legendre_upper(omega: &WeightFunction, x: f64) -> Result<Conjugate> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(invalid(format!("upper conjugate needs finite x >= 0, got {x}")));
    }
    let objective = |y: f64| x * y - omega.phi(y).value;
    match omega.log_limit() {
        Some(limit) => {
            if limit <= 0.0 {
                return Ok(Conjugate { value: objective(0.0), arg: 0.0, saturated: true });
            }
            let e = maximize(objective, 0.0, limit, GRID_POINTS);
            Ok(Conjugate { value: e.value, arg: e.arg, saturated: e.edge == Some(Edge::Upper) })
        }
        None => {
            let alpha = match omega {
                WeightFunction::Power { alpha } => *alpha,
                _ => 1.0,
            };
            let mut hi = (2.0 * (x.max(1e-300) / alpha).ln().max(0.0) / alpha + 4.0).max(4.0);
            for _ in 0..MAX_WIDEN {
                let e = maximize(objective, 0.0, hi, GRID_POINTS);
                if e.edge != Some(Edge::Upper) {
                    return Ok(Conjugate { value: e.value, arg: e.arg, saturated: false });
                }
                hi *= 2.0;
            }
            let e = maximize(objective, 0.0, hi, GRID_POINTS);
            Ok(Conjugate { value: e.value, arg: e.arg, saturated: true })
        }
    }
}

/// `(omega^iota)_*(t) = inf_{s > 0} (omega(1/s) + t s)`.
pub fn legendre_lower(omega: &WeightFunction, t: f64) -> Result<Conjugate> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("lower conjugate needs finite t >= 0, got {t}")));
    }
    let h = |u: f64| omega.phi(-u);
    if t == 0.0 {
        let v = h(f64::INFINITY);
        return Ok(Conjugate { value: v.value, arg: f64::INFINITY, saturated: true });
    }
    lower_conjugate(h, omega.log_limit().map(|l| -l), t.ln())
}

/// [`legendre_lower`] at `t = e^y`, for arguments beyond the `f64` range.
pub fn legendre_lower_log(omega: &WeightFunction, y: f64) -> Result<Conjugate> {
    if !y.is_finite() {
        return Err(invalid(format!("lower conjugate needs finite log t, got {y}")));
    }
    lower_conjugate(|u| omega.phi(-u), omega.log_limit().map(|l| -l), y)
}

/// `h_*(t) = inf_{s > 0} (h(s) + t s)` for an arbitrary `h` on `(0, infinity)`.
pub fn legendre_lower_fn<H: Fn(f64) -> f64>(h: H, t: f64) -> Result<Conjugate> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("lower conjugate needs finite t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(Conjugate { value: h(f64::INFINITY), arg: f64::INFINITY, saturated: true });
    }
    lower_conjugate(|u| Sample { value: h(u.exp()), saturated: false }, None, t.ln())
}

/// Minimize `h(e^u) + e^{log_t + u}` over `u`, widening the window while the
/// minimizer sits on an end that can still move.
fn lower_conjugate<H: Fn(f64) -> Sample>(h: H, u_floor: Option<f64>, log_t: f64) -> Result<Conjugate> {
    let objective = |u: f64| {
        let s = h(u);
        s.value + (log_t + u).exp()
    };
    let half = 2.0 * log_t.abs() + 8.0;
    let mut lo = -half;
    let mut hi = half;
    if let Some(floor) = u_floor {
        lo = lo.max(floor);
        if hi <= lo {
            hi = lo + 2.0 * half;
        }
    }
    let mut last = None;
    for _ in 0..=MAX_WIDEN {
        let e = minimize(objective, lo, hi, GRID_POINTS);
        let width = hi - lo;
        match e.edge {
            Some(Edge::Lower) if u_floor.is_none_or(|f| lo > f) => {
                lo = u_floor.map_or(lo - width, |f| (lo - width).max(f));
            }
            Some(Edge::Upper) => hi += width,
            edge => {
                let saturated = edge == Some(Edge::Lower) || h(e.arg).saturated;
                return Ok(Conjugate { value: e.value, arg: e.arg, saturated });
            }
        }
        last = Some(e);
    }
    let e = last.unwrap();
    Ok(Conjugate { value: e.value, arg: e.arg, saturated: true })
}

/// Log-uniform evaluation grid, stored as `y = log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn from_t(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(invalid(format!("grid needs 0 < tmin < tmax, got [{t_min}, {t_max}]")));
        }
        if points < 8 {
            return Err(invalid("grid needs at least 8 points"));
        }
        Ok(LogGrid { y_min: t_min.ln(), y_max: t_max.ln(), points })
    }

    /// `[1, 1e6]` for unbounded weights, `[1, T_max]` for tabulated or
    /// associated ones; 256 points.
    pub fn default_for(omega: &WeightFunction) -> Self {
        let y_max = omega.log_limit().unwrap_or(1e6_f64.ln()).max(1.0);
        LogGrid { y_min: 0.0, y_max, points: 256 }
    }

    pub fn ys(&self) -> Vec<f64> {
        linspace(self.y_min, self.y_max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionCondition {
    /// `omega(2t) = O(omega(t))`.
    Omega1,
    /// `omega(t) = O(t)`.
    Omega2,
    /// `log t = o(omega(t))`.
    Omega3,
    /// `phi(y) = omega(e^y)` convex.
    Omega4,
    /// `omega(t) = o(t)`.
    Omega5,
    /// `omega(t^2) <= C omega(H t) + C`.
    Omega7,
    /// `(omega^iota)_*(t^2) <= C omega(H t) + C`.
    MixedOmega7Equ,
    /// `int_1^inf omega(y t)/t^2 dt <= C omega(y) + C`.
    OmegaSnq,
    /// `int_1^inf omega(t)/t^2 dt = infinity`.
    OmegaQ,
}

impl fmt::Display for FunctionCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionCondition::Omega1 => "omega1",
            FunctionCondition::Omega2 => "omega2",
            FunctionCondition::Omega3 => "omega3",
            FunctionCondition::Omega4 => "omega4",
            FunctionCondition::Omega5 => "omega5",
            FunctionCondition::Omega7 => "omega7",
            FunctionCondition::MixedOmega7Equ => "mixedomega7equ",
            FunctionCondition::OmegaSnq => "omegasnq",
            FunctionCondition::OmegaQ => "omegaQ",
        };
        f.write_str(s)
    }
}

impl FromStr for FunctionCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "omega1" => FunctionCondition::Omega1,
            "omega2" => FunctionCondition::Omega2,
            "omega3" => FunctionCondition::Omega3,
            "omega4" => FunctionCondition::Omega4,
            "omega5" => FunctionCondition::Omega5,
            "omega7" => FunctionCondition::Omega7,
            "mixedomega7equ" => FunctionCondition::MixedOmega7Equ,
            "omegasnq" => FunctionCondition::OmegaSnq,
            "omegaq" => FunctionCondition::OmegaQ,
            other => return Err(invalid(format!("unknown weight-function condition `{other}`"))),
        })
    }
}

/// Grid points whose every needed argument stays within the faithful domain.
fn usable(omega: &WeightFunction, grid: &LogGrid, reach: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let limit = omega.log_limit().unwrap_or(f64::INFINITY);
    let ys: Vec<f64> = grid.ys().into_iter().filter(|&y| reach(y) <= limit + 1e-12).collect();
    if ys.len() < 16 {
        return Err(invalid(format!(
            "fewer than 16 grid points lie inside the faithful domain (log t <= {limit:.4})"
        )));
    }
    Ok(ys)
}

fn log_evidence(ys: &[f64], d: impl Fn(f64) -> Option<f64>) -> Vec<(f64, f64)> {
    ys.iter().filter_map(|&y| d(y).map(|v| (y, v))).collect()
}

fn values(e: &[(f64, f64)]) -> Vec<f64> {
    e.iter().map(|p| p.1).collect()
}

fn bounded_ratio(name: String, evidence: Vec<(f64, f64)>, at_least_one: bool) -> ConditionVerdict {
    let stats = window_stats(&values(&evidence));
    let holds = bounded_trend(stats.as_ref());
    let mut c = evidence.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).exp();
    if at_least_one {
        c = c.max(1.0);
    }
    ConditionVerdict::new(name, holds).with_cert("C", c).with_evidence(evidence, stats)
}

fn decaying_ratio(name: String, evidence: Vec<(f64, f64)>) -> ConditionVerdict {
    let stats = window_stats(&values(&evidence));
    ConditionVerdict::new(name, decay_trend(stats.as_ref())).with_evidence(evidence, stats)
}

/// Best `H` for a `num(t) <= C omega(H t) + C` condition: among holding
/// candidates the smallest `C`, then the smallest `H`.
fn choose_h(name: &str, omega: &WeightFunction, ys: &[f64], num: &[Option<f64>]) -> ConditionVerdict {
    let limit = omega.log_limit().unwrap_or(f64::INFINITY);
    let mut candidates = Vec::new();
    for &h in &H_CANDIDATES {
        let lh = h.ln();
        let evidence: Vec<(f64, f64)> = ys
            .iter()
            .zip(num)
            .filter(|(y, n)| n.is_some() && *y + lh <= limit + 1e-12)
            .filter_map(|(&y, n)| {
                let n = n.unwrap();
                (n > 0.0).then(|| (y, n.ln() - (omega.phi(y + lh).value + 1.0).ln()))
            })
            .collect();
        if evidence.len() < 16 {
            continue;
        }
        candidates.push(bounded_ratio(name.to_string(), evidence, true).with_cert("H", h));
    }
    if candidates.is_empty() {
        return ConditionVerdict::new(name, Verdict::Inconclusive).note("no H candidate has enough grid points");
    }
    let holding = candidates
        .iter()
        .filter(|v| v.holds.holds())
        .min_by(|a, b| a.cert("C").partial_cmp(&b.cert("C")).unwrap().then(a.cert("H").partial_cmp(&b.cert("H")).unwrap()));
    if let Some(best) = holding {
        return best.clone();
    }
    let all_fail = candidates.iter().all(|v| v.holds == Verdict::Fails);
    let mut out = candidates.swap_remove(0);
    out.holds = if all_fail { Verdict::Fails } else { Verdict::Inconclusive };
    out.note(format!("no H in {H_CANDIDATES:?} gives a bounded ratio"))
}

fn partial_integrals(omega: &WeightFunction, shift: f64, upper: f64) -> (f64, f64) {
    let f = |u: f64| omega.phi(shift + u).value * (-u).exp();
    (trapezoid(f, upper, QUAD_STEP), trapezoid(f, 0.5 * upper, QUAD_STEP))
}

fn diverges(full: f64, half: f64) -> bool {
    full > (1.0 + DIVERGENCE_MARGIN) * half
}

/// Verdict for a weight-function condition on `grid`.
pub fn check_function_condition(
    omega: &WeightFunction,
    cond: FunctionCondition,
    grid: &LogGrid,
) -> Result<ConditionVerdict> {
    let name = cond.to_string();
    let phi = |y: f64| omega.phi(y).value;
    let ln2 = 2f64.ln();
    let v = match cond {
        FunctionCondition::Omega1 => {
            let ys = usable(omega, grid, |y| y + ln2)?;
            let ev = log_evidence(&ys, |y| (phi(y) > 0.0).then(|| phi(y + ln2).ln() - phi(y).ln()));
            bounded_ratio(name, ev, false)
        }
        FunctionCondition::Omega2 => {
            let ys = usable(omega, grid, |y| y)?;
            let ev = log_evidence(&ys, |y| (phi(y) > 0.0).then(|| phi(y).ln() - y));
            bounded_ratio(name, ev, false)
        }
        FunctionCondition::Omega3 => {
            let ys = usable(omega, grid, |y| y)?;
            let ev = log_evidence(&ys, |y| (y > 0.0 && phi(y) > 0.0).then(|| y.ln() - phi(y).ln()));
            decaying_ratio(name, ev)
        }
        FunctionCondition::Omega5 => {
            let ys = usable(omega, grid, |y| y)?;
            let ev = log_evidence(&ys, |y| (phi(y) > 0.0).then(|| phi(y).ln() - y));
            decaying_ratio(name, ev)
        }
        FunctionCondition::Omega4 => {
            let ys = usable(omega, grid, |y| y)?;
            let vals: Vec<f64> = ys.iter().map(|&y| phi(y)).collect();
            let mut worst = f64::INFINITY;
            let mut at = 0.0;
            for i in 1..vals.len() - 1 {
                let scale = vals[i].abs().max(1.0);
                let d2 = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / scale;
                if d2 < worst {
                    worst = d2;
                    at = ys[i];
                }
            }
            let holds = if worst >= -1e-9 { Verdict::Holds } else { Verdict::Fails };
            ConditionVerdict::new(name, holds)
                .with_cert("min_second_difference", worst)
                .with_cert("at_log_t", at)
        }
        FunctionCondition::Omega7 => {
            let ys = usable(omega, grid, |y| 2.0 * y)?;
            let num: Vec<Option<f64>> = ys.iter().map(|&y| Some(phi(2.0 * y))).collect();
            choose_h(&name, omega, &ys, &num)
        }
        FunctionCondition::MixedOmega7Equ => {
            let ys = usable(omega, grid, |y| 2.0 * y)?;
            let num: Vec<Option<f64>> = ys
                .iter()
                .map(|&y| {
                    let c = legendre_lower_log(omega, 2.0 * y).ok()?;
                    (!c.saturated).then_some(c.value)
                })
                .collect();
            choose_h(&name, omega, &ys, &num)
        }
        FunctionCondition::OmegaSnq => {
            let span = grid.y_max - grid.y_min;
            let upper = 0.5 * span;
            let ys = usable(omega, grid, |y| y + upper)?;
            let mut evidence = Vec::with_capacity(ys.len());
            let mut worst_growth: f64 = 0.0;
            let mut divergent_at = None;
            for &y in &ys {
                let (full, half) = partial_integrals(omega, y, upper);
                worst_growth = worst_growth.max(full / half);
                if diverges(full, half) && divergent_at.is_none() {
                    divergent_at = Some(y);
                }
                evidence.push((y, full.ln() - (phi(y) + 1.0).ln()));
            }
            let tail = phi(ys[ys.len() - 1] + upper) * (-upper).exp();
            let mut v = bounded_ratio(name, evidence, true)
                .with_cert("integration_log_span", upper)
                .with_cert("max_partial_growth", worst_growth)
                .with_cert("tail_estimate", tail);
            if let Some(y) = divergent_at {
                v.holds = Verdict::Fails;
                v = v.note(format!("partial integral still growing at log y = {y:.4}"));
            }
            v
        }
        FunctionCondition::OmegaQ => {
            let limit = omega.log_limit().unwrap_or(f64::INFINITY);
            let upper = grid.y_max.min(limit);
            if upper <= 1.0 {
                return Err(invalid("omegaQ needs log T > 1 inside the faithful domain"));
            }
            let (full, half) = partial_integrals(omega, 0.0, upper);
            let holds = if half <= 0.0 {
                Verdict::Inconclusive
            } else if diverges(full, half) {
                Verdict::Holds
            } else {
                Verdict::Fails
            };
            ConditionVerdict::new(name, holds)
                .with_cert("log_T", upper)
                .with_cert("integral_T", full)
                .with_cert("integral_sqrt_T", half)
                .with_cert("tail_estimate", phi(upper) * (-upper).exp())
        }
    };
    Ok(v)
}
