//! Truncated formal power series with scaled coefficients, their Cauchy
//! and Hadamard products, weighted norms and membership classification.

use crate::error::{invalid, Result};
use crate::matrices::{check_matrix_condition, MatrixCondition, WeightMatrix};
use crate::numeric::{ln_factorial, log_sum_exp, NeumaierSum};
use crate::sequences::{FamilyDescriptor, WeightSequence};
use crate::verdict::{bounded_trend, decay_trend, window_stats, Verdict, TREND_START};
use num_complex::Complex64;
use serde::Serialize;

/// Relative size below which a phase-aware sum is snapped to zero.
pub const CANCELLATION_SNAP: f64 = 1e-14;

/// `phase * exp(log_mag)`; `log_mag = -inf` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCoefficient {
    pub phase: Complex64,
    pub log_mag: f64,
}

/// `z / |z|`, leaving phases that are already unit to within rounding
/// untouched so that reloads and identity products stay bit-exact.
fn unit(z: Complex64) -> Complex64 {
    let n = z.norm();
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        z
    } else {
        z / n
    }
}

impl ScaledCoefficient {
    pub const ZERO: ScaledCoefficient = ScaledCoefficient { phase: Complex64::new(1.0, 0.0), log_mag: f64::NEG_INFINITY };
    pub const ONE: ScaledCoefficient = ScaledCoefficient { phase: Complex64::new(1.0, 0.0), log_mag: 0.0 };

    pub fn new(phase: Complex64, log_mag: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        ScaledCoefficient { phase: unit(phase), log_mag }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let n = z.norm();
        if n == 0.0 {
            Self::ZERO
        } else {
            ScaledCoefficient { phase: z / n, log_mag: n.ln() }
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// Plain complex value; overflows to infinity for huge magnitudes.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_mag.exp()
        }
    }

    pub fn is_real(&self) -> bool {
        self.phase.im == 0.0
    }

    pub fn mul(self, other: ScaledCoefficient) -> ScaledCoefficient {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        let p = self.phase * other.phase;
        let p = if p.im == 0.0 { Complex64::new(p.re.signum(), 0.0) } else { unit(p) };
        ScaledCoefficient { phase: p, log_mag: self.log_mag + other.log_mag }
    }

    /// Multiply the magnitude by `e^l`.
    pub fn scale_log(self, l: f64) -> ScaledCoefficient {
        if self.is_zero() {
            self
        } else {
            ScaledCoefficient { phase: self.phase, log_mag: self.log_mag + l }
        }
    }
}

/// Sum anchored at the largest magnitude, accumulated in input order.
pub fn scaled_sum(terms: &[ScaledCoefficient]) -> ScaledCoefficient {
    let anchor = terms.iter().map(|t| t.log_mag).fold(f64::NEG_INFINITY, f64::max);
    if anchor == f64::NEG_INFINITY {
        return ScaledCoefficient::ZERO;
    }
    let mut nonzero = terms.iter().filter(|t| !t.is_zero());
    if let (Some(only), None) = (nonzero.next(), nonzero.next()) {
        return *only;
    }
    if terms.iter().all(|t| t.is_real()) {
        let mut acc = NeumaierSum::default();
        for t in terms.iter().filter(|t| !t.is_zero()) {
            acc.add(t.phase.re * (t.log_mag - anchor).exp());
        }
        let s = acc.value();
        if s.abs() < CANCELLATION_SNAP {
            return ScaledCoefficient::ZERO;
        }
        return ScaledCoefficient { phase: Complex64::new(s.signum(), 0.0), log_mag: anchor + s.abs().ln() };
    }
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for t in terms.iter().filter(|t| !t.is_zero()) {
        let w = (t.log_mag - anchor).exp();
        re.add(t.phase.re * w);
        im.add(t.phase.im * w);
    }
    let z = Complex64::new(re.value(), im.value());
    let n = z.norm();
    if n < CANCELLATION_SNAP {
        return ScaledCoefficient::ZERO;
    }
    ScaledCoefficient { phase: unit(z), log_mag: anchor + n.ln() }
}

/// `F = sum_j F_j x^j`, `j = 0..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPowerSeries {
    coeffs: Vec<ScaledCoefficient>,
}

impl WeightedPowerSeries {
    pub fn new(coeffs: Vec<ScaledCoefficient>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("series needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| c.log_mag.is_nan() || c.log_mag == f64::INFINITY || !c.phase.norm().is_finite()) {
            return Err(invalid("series coefficients must be finite"));
        }
        Ok(WeightedPowerSeries { coeffs })
    }

    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        Self::new(values.iter().map(|z| ScaledCoefficient::from_complex(*z)).collect())
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|x| ScaledCoefficient::from_real(*x)).collect())
    }

    pub fn zeros(j_max: usize) -> Self {
        WeightedPowerSeries { coeffs: vec![ScaledCoefficient::ZERO; j_max + 1] }
    }

    /// Cauchy identity `delta_0`.
    pub fn identity(j_max: usize) -> Self {
        let mut s = Self::zeros(j_max);
        s.coeffs[0] = ScaledCoefficient::ONE;
        s
    }

    /// Hadamard identity: all coefficients one.
    pub fn ones(j_max: usize) -> Self {
        WeightedPowerSeries { coeffs: vec![ScaledCoefficient::ONE; j_max + 1] }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ScaledCoefficient] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> ScaledCoefficient {
        self.coeffs[j]
    }

    pub fn set(&mut self, j: usize, c: ScaledCoefficient) {
        self.coeffs[j] = c;
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_real())
    }

    fn same_truncation(&self, other: &Self) -> Result<()> {
        if self.truncation() != other.truncation() {
            return Err(invalid(format!(
                "truncation mismatch: {} vs {}",
                self.truncation(),
                other.truncation()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_truncation(other)?;
        Ok(WeightedPowerSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| scaled_sum(&[*a, *b])).collect(),
        })
    }

    pub fn scale(&self, alpha: ScaledCoefficient) -> Self {
        WeightedPowerSeries { coeffs: self.coeffs.iter().map(|c| c.mul(alpha)).collect() }
    }

    /// Indices with nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&j| !self.coeffs[j].is_zero()).collect()
    }
}

/// `(F * G)_j = sum_{r <= j} F_r G_{j-r}`; zero coefficients are skipped so
/// lacunary inputs stay cheap and gap indices stay exactly zero.
pub fn cauchy_product(f: &WeightedPowerSeries, g: &WeightedPowerSeries) -> Result<WeightedPowerSeries> {
    f.same_truncation(g)?;
    let j_max = f.truncation();
    let fs = f.support();
    let gs = g.support();
    let mut cells: Vec<Vec<ScaledCoefficient>> = vec![Vec::new(); j_max + 1];
    for &r in &fs {
        for &s in &gs {
            if r + s > j_max {
                break;
            }
            cells[r + s].push(f.coeffs[r].mul(g.coeffs[s]));
        }
    }
    Ok(WeightedPowerSeries { coeffs: cells.iter().map(|c| scaled_sum(c)).collect() })
}

/// `(F ⊙ G)_j = F_j G_j`.
pub fn hadamard_product(f: &WeightedPowerSeries, g: &WeightedPowerSeries) -> Result<WeightedPowerSeries> {
    f.same_truncation(g)?;
    Ok(WeightedPowerSeries { coeffs: f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a.mul(*b)).collect() })
}

/// `log |F|^M_h = log sup_j |F_j| j! / (h^j M_j)`; `-inf` for the zero series.
pub fn weighted_norm(f: &WeightedPowerSeries, m: &WeightSequence, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("norm scale h must be positive, got {h}")));
    }
    if m.truncation() < f.truncation() {
        return Err(invalid("sequence truncation shorter than the series"));
    }
    let lh = h.ln();
    Ok(f.coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| c.log_mag + ln_factorial(j as u64) - j as f64 * lh - m.log_m()[j])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest-rate certificate: `(log C, log h)` with `|F|^M_h = C`, where
/// `log h` is the supremum of `h_j` over the tail window.
pub fn norm_certificate(f: &WeightedPowerSeries, m: &WeightSequence, h: f64) -> Result<NormCertificate> {
    Ok(NormCertificate { log_c: weighted_norm(f, m, h)?, log_h: h.ln() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormCertificate {
    pub log_c: f64,
    pub log_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub roumieu: Verdict,
    pub beurling: Verdict,
    /// Tail supremum of `h_j`; `exp` of it is the smallest admissible `h`.
    pub log_rate: f64,
    /// `(j, h_j)` for nonzero coefficients.
    pub rates: Vec<(usize, f64)>,
}

/// `h_j = (log|F_j| + log j! - log M_j)/j`: Roumieu iff bounded above,
/// Beurling iff it tends to `-inf`.
pub fn classify_membership(f: &WeightedPowerSeries, m: &WeightSequence) -> Result<MembershipReport> {
    let j_max = f.truncation();
    if j_max < 32 {
        return Err(invalid(format!("membership needs truncation >= 32, got {j_max}")));
    }
    if m.truncation() < j_max {
        return Err(invalid("sequence truncation shorter than the series"));
    }
    let rates: Vec<(usize, f64)> = (1..=j_max)
        .filter(|&j| !f.coeffs[j].is_zero())
        .map(|j| (j, (f.coeffs[j].log_mag + ln_factorial(j as u64) - m.log_m()[j]) / j as f64))
        .collect();
    let tail: Vec<f64> = rates.iter().filter(|(j, _)| *j >= TREND_START).map(|p| p.1).collect();
    let stats = window_stats(&tail);
    let (roumieu, beurling) = if rates.is_empty() {
        (Verdict::Holds, Verdict::Holds)
    } else {
        (bounded_trend(stats.as_ref()), decay_trend(stats.as_ref()))
    };
    let log_rate = stats.map(|s| s.tail_sup).unwrap_or(f64::NEG_INFINITY);
    Ok(MembershipReport { roumieu, beurling, log_rate, rates })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixMembership {
    /// Exists a row with Roumieu membership.
    pub roumieu: Verdict,
    /// Beurling membership in every row.
    pub beurling: Verdict,
    pub rows: Vec<(f64, MembershipReport)>,
}

pub fn classify_membership_matrix(f: &WeightedPowerSeries, mx: &WeightMatrix) -> Result<MatrixMembership> {
    let mut rows = Vec::new();
    for (lambda, row) in mx.lambdas().iter().zip(mx.rows()) {
        rows.push((*lambda, classify_membership(f, row)?));
    }
    let roumieu = if rows.iter().any(|r| r.1.roumieu.holds()) {
        Verdict::Holds
    } else if rows.iter().all(|r| r.1.roumieu == Verdict::Fails) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let beurling = rows.iter().fold(Verdict::Holds, |acc, r| acc.and(r.1.beurling));
    Ok(MatrixMembership { roumieu, beurling, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSeries {
    /// Coefficients `i^j s_j / j!`.
    pub series: WeightedPowerSeries,
    /// `log s_j` with `s_j = sum_{k <= K} M_k (2 mu_k)^{j-k}`.
    pub log_s: Vec<f64>,
    /// `log(M_j 2^{j-K})`, the certified bound on the omitted terms `k > K`.
    pub log_tail_bound: Vec<f64>,
    pub k_terms: usize,
}

/// Characteristic series of `M`, truncated at `J`, summed over `k <= K`.
pub fn theta_series(m: &WeightSequence, j_max: usize, k_terms: usize) -> Result<ThetaSeries> {
    if k_terms < j_max + 64 {
        return Err(invalid(format!("theta needs K >= J + 64 for the tail bound, got K = {k_terms}, J = {j_max}")));
    }
    if m.truncation() < k_terms {
        return Err(invalid(format!(
            "sequence truncation {} is shorter than K = {k_terms}",
            m.truncation()
        )));
    }
    let ln2 = 2f64.ln();
    let lm = m.log_m();
    let lmu = m.log_mu();
    let mut log_s = Vec::with_capacity(j_max + 1);
    let mut coeffs = Vec::with_capacity(j_max + 1);
    let mut terms = vec![0.0; k_terms + 1];
    for j in 0..=j_max {
        for (k, t) in terms.iter_mut().enumerate() {
            *t = lm[k] + (j as f64 - k as f64) * (ln2 + lmu[k]);
        }
        let ls = log_sum_exp(&terms);
        log_s.push(ls);
        let phase = match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        coeffs.push(ScaledCoefficient { phase, log_mag: ls - ln_factorial(j as u64) });
    }
    let log_tail_bound = (0..=j_max).map(|j| lm[j] + (j as f64 - k_terms as f64) * ln2).collect();
    Ok(ThetaSeries { series: WeightedPowerSeries { coeffs }, log_s, log_tail_bound, k_terms })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub flagged: bool,
    pub all_positive: bool,
    /// Trend of `log|F_j|/j` being bounded; `fails` means unbounded growth.
    pub growth_bounded: Verdict,
}

/// Flag series whose coefficients are all real and positive while
/// `log F_j / j` is unbounded: such series admit no positive smooth
/// representative in the ultraholomorphic sense.
pub fn positivity_obstruction(f: &WeightedPowerSeries) -> PositivityReport {
    let all_positive = f
        .coeffs
        .iter()
        .all(|c| !c.is_zero() && c.phase.re > 0.0 && c.phase.im.abs() <= 1e-12);
    let rates: Vec<f64> = (TREND_START..=f.truncation()).map(|j| f.coeffs[j].log_mag / j as f64).collect();
    let growth_bounded = bounded_trend(window_stats(&rates).as_ref());
    PositivityReport { flagged: all_positive && growth_bounded == Verdict::Fails, all_positive, growth_bounded }
}

/// Flagged by [`positivity_obstruction`] and outside the class of the
/// factorial sequence: not the Borel image of a representable element.
pub fn solid_core_obstruction(f: &WeightedPowerSeries) -> Result<bool> {
    let pos = positivity_obstruction(f);
    if !pos.flagged {
        return Ok(false);
    }
    let fact = WeightSequence::new(FamilyDescriptor::Factorial, f.truncation().max(2))?;
    Ok(classify_membership(f, &fact)?.roumieu == Verdict::Fails)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs_log_norm: f64,
    pub rhs_log_bound: f64,
    /// `lhs - rhs`; the bound holds when this is at most the tolerance.
    pub log_defect: f64,
}

/// `|F * G|^M_{C(h1+h2)} <= C1 C2`, where `C` is the smallest constant with
/// `M_r M_{j-r} <= C^j M_j` on the truncation.
pub fn cauchy_bound_check(
    f: &WeightedPowerSeries,
    g: &WeightedPowerSeries,
    m: &WeightSequence,
    cf: NormCertificate,
    cg: NormCertificate,
) -> Result<BoundCheck> {
    let product = cauchy_product(f, g)?;
    let lm = m.log_m();
    let j_max = f.truncation();
    let log_c = (1..=j_max)
        .flat_map(|j| (0..=j).map(move |r| (j, r)))
        .map(|(j, r)| (lm[r] + lm[j - r] - lm[j]) / j as f64)
        .fold(0.0_f64, f64::max);
    let h = log_c.exp() * (cf.log_h.exp() + cg.log_h.exp());
    let lhs = weighted_norm(&product, m, h)?;
    let rhs = cf.log_c + cg.log_c;
    Ok(BoundCheck { lhs_log_norm: lhs, rhs_log_bound: rhs, log_defect: lhs - rhs })
}

/// `|F ⊙ G|^{M^kappa}_{h1 h2 h3} <= C1 C2 C3`, with `(kappa, C3, h3)` the
/// Roumieu-square certificate of the row `max(lambda1, lambda2)`.
pub fn hadamard_bound_check(
    f: &WeightedPowerSeries,
    g: &WeightedPowerSeries,
    mx: &WeightMatrix,
    cf: NormCertificate,
    cg: NormCertificate,
    lambda3: f64,
) -> Result<BoundCheck> {
    mx.row(lambda3).ok_or_else(|| invalid(format!("lambda = {lambda3} is not a matrix row")))?;
    let cert = check_matrix_condition(mx, MatrixCondition::RoumieuSquare)?;
    let key = |k: &str| cert.cert(&format!("{k}@{lambda3}"));
    let (Some(kappa), Some(c3), Some(h3)) = (key("kappa"), key("C"), key("h")) else {
        return Err(invalid(format!("no Roumieu-square partner for lambda = {lambda3}")));
    };
    let row = mx.row(kappa).unwrap();
    let product = hadamard_product(f, g)?;
    let h = (cf.log_h + cg.log_h).exp() * h3;
    let lhs = weighted_norm(&product, row, h)?;
    let rhs = cf.log_c + cg.log_c + c3.ln();
    Ok(BoundCheck { lhs_log_norm: lhs, rhs_log_bound: rhs, log_defect: lhs - rhs })
}

/// `G = C theta_{(h^j M_j)}` dominating `F` coefficientwise.
pub fn solid_hull_witness(f: &WeightedPowerSeries, m: &WeightSequence, c: f64, h: f64) -> Result<WeightedPowerSeries> {
    if !(c > 0.0 && h > 0.0) {
        return Err(invalid("solid hull needs C > 0 and h > 0"));
    }
    let j_max = f.truncation();
    let scaled = m.rescaled(h.ln());
    let theta = theta_series(&scaled, j_max, (j_max + 64).min(m.truncation()))?;
    let g = theta.series.scale(ScaledCoefficient { phase: Complex64::new(1.0, 0.0), log_mag: c.ln() });
    if let Some(j) = (0..=j_max).find(|&j| g.coeffs[j].log_mag < f.coeffs[j].log_mag - 1e-12) {
        return Err(invalid(format!(
            "|F_{j}| exceeds C h^j m_j: the supplied (C, h) is not a norm certificate"
        )));
    }
    Ok(g)
}
