//! Lacunary witnesses: gap sequences, independent exponent sets, the
//! generators `F^b`, polynomial elements in them, and divergence evidence.

use crate::error::{invalid, Error, Result};
use crate::formal_series::{cauchy_product, hadamard_product, scaled_sum, ScaledCoefficient, WeightedPowerSeries};
use crate::matrices::WeightMatrix;
use crate::numeric::ln_factorial;
use crate::sequences::{FamilyDescriptor, WeightSequence};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Search cap for gap indices.
pub const GAP_SEARCH_CAP: u64 = 1 << 40;
const LINEAR_SCAN: u64 = 1 << 16;
pub const MIN_COMBO_GAP: f64 = 1e-9;
const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessVariant {
    /// `k_p > p k_{p-1}`; generators combined by Cauchy products.
    Cauchy,
    /// `k_p > k_{p-1}`; generators combined by Hadamard products.
    Hadamard,
}

impl fmt::Display for WitnessVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessVariant::Cauchy => "cauchy",
            WitnessVariant::Hadamard => "hadamard",
        })
    }
}

impl FromStr for WitnessVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cauchy" => Ok(WitnessVariant::Cauchy),
            "hadamard" => Ok(WitnessVariant::Hadamard),
            other => Err(invalid(format!("unknown witness variant `{other}`"))),
        }
    }
}

/// Where `n_k = N_k / k!` comes from: one sequence, or row `1/(p+1)` of a matrix.
#[derive(Debug, Clone, Copy)]
pub enum WitnessWeight<'a> {
    Sequence(&'a WeightSequence),
    Matrix(&'a WeightMatrix),
}

impl WitnessWeight<'_> {
    /// `log n_k` for the generator coefficient attached to step `p`.
    pub fn log_n(&self, p: usize, k: u64) -> Result<f64> {
        let log_m = match self {
            WitnessWeight::Sequence(w) => w.log_m_at(k),
            WitnessWeight::Matrix(mx) => {
                let target = 1.0 / (p as f64 + 1.0);
                let loglog = mx
                    .rows()
                    .iter()
                    .all(|r| matches!(r.family(), FamilyDescriptor::LogLogRow { .. }));
                if loglog {
                    FamilyDescriptor::LogLogRow { lambda: target }.log_m_at(k)
                } else {
                    let idx = mx
                        .lambdas()
                        .iter()
                        .rposition(|l| *l <= target + 1e-12)
                        .ok_or_else(|| Error::Construction {
                            p,
                            reason: format!("matrix has no row with lambda <= 1/(p+1) = {target}"),
                        })?;
                    mx.rows()[idx].log_m_at(k)
                }
            }
        };
        log_m.map(|v| v - ln_factorial(k)).ok_or_else(|| Error::Construction {
            p,
            reason: format!("index {k} lies beyond the truncation of a tabulated sequence"),
        })
    }
}

/// `(j, k) -> omega_{j,k}`, the summation weights of the representation formula.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SummationWeightOracle {
    /// `omega == 1`.
    #[default]
    Trivial,
    /// Explicit entries; absent pairs take `default`.
    Table { entries: BTreeMap<(usize, usize), f64>, default: f64 },
}

impl SummationWeightOracle {
    pub fn table(entries: BTreeMap<(usize, usize), f64>) -> Self {
        SummationWeightOracle::Table { entries, default: 1.0 }
    }

    pub fn weight(&self, j: usize, k: usize) -> f64 {
        match self {
            SummationWeightOracle::Trivial => 1.0,
            SummationWeightOracle::Table { entries, default } => entries.get(&(j, k)).copied().unwrap_or(*default),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, SummationWeightOracle::Trivial)
    }

    /// `sum_{j <= upto} |omega_{j,k} - 1| n_j`, in log form (`-inf` when zero).
    fn log_defect_sum(&self, weight: &WitnessWeight<'_>, p: usize, upto: usize, k: usize) -> Result<f64> {
        if self.is_trivial() {
            return Ok(f64::NEG_INFINITY);
        }
        let mut terms = Vec::new();
        for j in 0..=upto {
            let d = (self.weight(j, k) - 1.0).abs();
            if d > 0.0 {
                terms.push(ScaledCoefficient::from_real(d).scale_log(weight.log_n(p, j as u64)?));
            }
        }
        Ok(scaled_sum(&terms).log_mag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSequence {
    pub k: Vec<usize>,
    pub variant: WitnessVariant,
}

impl GapSequence {
    /// Checks `k_0 = 1` and the variant's recurrence.
    pub fn new(k: Vec<usize>, variant: WitnessVariant) -> Result<Self> {
        if k.first() != Some(&1) {
            return Err(invalid("gap sequence must start with k_0 = 1"));
        }
        for p in 1..k.len() {
            let bound = match variant {
                WitnessVariant::Cauchy => p * k[p - 1],
                WitnessVariant::Hadamard => k[p - 1],
            };
            if k[p] <= bound {
                return Err(invalid(format!("k_{p} = {} violates the {variant} recurrence (must exceed {bound})", k[p])));
            }
        }
        Ok(GapSequence { k, variant })
    }

    /// Minimal recurrence with no growth thresholds.
    pub fn minimal(steps: usize, variant: WitnessVariant) -> Self {
        let mut k = vec![1usize];
        for p in 1..=steps {
            let prev = k[p - 1];
            k.push(match variant {
                WitnessVariant::Cauchy => p * prev + 1,
                WitnessVariant::Hadamard => prev + 1,
            });
        }
        GapSequence { k, variant }
    }

    /// Last step `P` (the sequence is `k_0..k_P`).
    pub fn steps(&self) -> usize {
        self.k.len() - 1
    }

    pub fn last(&self) -> usize {
        *self.k.last().unwrap()
    }
}

/// Smallest admissible `k_p` for `p = 1..=steps`: beyond the variant's
/// recurrence bound, with `(log n_k)/k >= log T_p` when thresholds are given
/// and the oracle sum `sum_{j <= p k_{p-1}} |omega_{j,k} - 1| n_j <= 1`.
pub fn build_gap_sequence(
    weight: WitnessWeight<'_>,
    steps: usize,
    variant: WitnessVariant,
    oracle: &SummationWeightOracle,
    thresholds: Option<&[f64]>,
) -> Result<GapSequence> {
    if let Some(t) = thresholds {
        if t.len() < steps {
            return Err(invalid(format!("need {steps} thresholds T_1..T_P, got {}", t.len())));
        }
        if t.iter().any(|v| !(*v > 0.0)) || t.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("thresholds must be positive and nondecreasing"));
        }
    }
    let mut k = vec![1usize];
    for p in 1..=steps {
        let prev = k[p - 1];
        let lower = match variant {
            WitnessVariant::Cauchy => p as u64 * prev as u64 + 1,
            WitnessVariant::Hadamard => prev as u64 + 1,
        };
        let upto = match variant {
            WitnessVariant::Cauchy => p * prev,
            WitnessVariant::Hadamard => prev,
        };
        let log_t = thresholds.map(|t| t[p - 1].ln());
        let admissible = |cand: u64| -> Result<bool> {
            if let Some(lt) = log_t {
                if weight.log_n(p, cand)? / (cand as f64) < lt {
                    return Ok(false);
                }
            }
            Ok(oracle.log_defect_sum(&weight, p, upto, cand as usize)? <= 0.0)
        };
        let found = search_smallest(lower, admissible).map_err(|e| match e {
            Error::Construction { .. } => e,
            other => Error::Construction { p, reason: other.to_string() },
        })?;
        let kp = found.ok_or_else(|| Error::Construction {
            p,
            reason: format!("threshold unreachable below k = 2^40 (lower bound {lower})"),
        })?;
        k.push(kp as usize);
    }
    Ok(GapSequence { k, variant })
}

/// Linear scan over `2^16` candidates, then doubling up to `2^40` with a
/// bisection back to the first admissible index.
fn search_smallest<F: Fn(u64) -> Result<bool>>(lower: u64, ok: F) -> Result<Option<u64>> {
    let scan_end = lower + LINEAR_SCAN;
    for cand in lower..scan_end {
        if ok(cand)? {
            return Ok(Some(cand));
        }
    }
    let mut bad = scan_end - 1;
    let mut good = None;
    let mut cand = scan_end;
    while cand <= GAP_SEARCH_CAP {
        if ok(cand)? {
            good = Some(cand);
            break;
        }
        bad = cand;
        cand *= 2;
    }
    let Some(mut hi) = good else { return Ok(None) };
    while hi - bad > 1 {
        let mid = bad + (hi - bad) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Some(hi))
}

/// Finite stand-in for a Hamel basis: `b_i = c_i sqrt(p_i)` in `(A, B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentBasis {
    pub b: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub primes: Vec<u64>,
    /// `c_i` as `(numerator, denominator)`.
    pub scalings: Vec<(u64, u64)>,
    /// Certified combination degree `D`.
    pub degree: u32,
    /// Smallest distance between distinct degree-`<= D` combinations.
    pub min_gap: f64,
}

pub fn build_exponent_basis(count: usize, lower: f64, upper: f64, degree: u32) -> Result<ExponentBasis> {
    if !(0.0 < lower && lower < upper && upper < 1.0) {
        return Err(invalid(format!("need 0 < A < B < 1, got A = {lower}, B = {upper}")));
    }
    if count == 0 || count > PRIMES.len() {
        return Err(invalid(format!("basis size must be in 1..=8, got {count}")));
    }
    if degree > 6 {
        return Err(invalid(format!("certified degree must be <= 6, got {degree}")));
    }
    let mid = 0.5 * (lower + upper);
    let inside = |v: f64| lower < v && v < upper;
    let mut b = Vec::with_capacity(count);
    let mut scalings = Vec::with_capacity(count);
    for &p in &PRIMES[..count] {
        let root = (p as f64).sqrt();
        let mut den = 1u64;
        while root / den as f64 > mid {
            den *= 2;
        }
        let (num, den) = if inside(root / den as f64) {
            (1, den)
        } else {
            (1..=64u64)
                .find_map(|q| {
                    let r = (mid * q as f64 / root).round().max(1.0) as u64;
                    inside(r as f64 * root / q as f64).then_some((r, q))
                })
                .ok_or_else(|| Error::Construction { p: 0, reason: format!("no rational scaling of sqrt({p}) in (A, B)") })?
        };
        b.push(num as f64 * root / den as f64);
        scalings.push((num, den));
    }
    let min_gap = combination_min_gap(&b, degree);
    if min_gap < MIN_COMBO_GAP {
        return Err(Error::Construction {
            p: 0,
            reason: format!("exponent combinations collide (min gap {min_gap:e}); choose different scalings"),
        });
    }
    Ok(ExponentBasis { b, lower, upper, primes: PRIMES[..count].to_vec(), scalings, degree, min_gap })
}

/// All `sum_m i_m b_m` with `0 <= i_m <= D`.
pub fn combinations(b: &[f64], degree: u32) -> Vec<f64> {
    let mut values = vec![0.0];
    for &bm in b {
        let mut next = Vec::with_capacity(values.len() * (degree as usize + 1));
        for v in &values {
            for i in 0..=degree {
                next.push(v + i as f64 * bm);
            }
        }
        values = next;
    }
    values
}

/// Minimum pairwise distance between the combination values.
pub fn combination_min_gap(b: &[f64], degree: u32) -> f64 {
    let mut v = combinations(b, degree);
    if v.len() < 2 {
        return f64::INFINITY;
    }
    v.sort_by(f64::total_cmp);
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// `log n` for the generator coefficient at `k_p`.
fn generator_log_n(gap: &GapSequence, weight: &WitnessWeight<'_>, p: usize) -> Result<f64> {
    weight.log_n(p, gap.k[p] as u64)
}

/// Lacunary generator: `F_{k_p} = n_{k_p}^b`, zero elsewhere.
pub fn build_witness(b: f64, gap: &GapSequence, weight: WitnessWeight<'_>, j_max: usize) -> Result<WeightedPowerSeries> {
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid(format!("witness exponent must lie in (0, 1), got {b}")));
    }
    if gap.last() > j_max {
        return Err(invalid(format!("k_P = {} exceeds the truncation J = {j_max}", gap.last())));
    }
    let mut f = WeightedPowerSeries::zeros(j_max);
    for p in 0..gap.k.len() {
        let log_n = generator_log_n(gap, &weight, p)?;
        f.set(gap.k[p], ScaledCoefficient { phase: Complex64::new(1.0, 0.0), log_mag: b * log_n });
    }
    Ok(f)
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(with = "complex_pair")]
    pub alpha: Complex64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    /// `P_l`.
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// `c_l = sum_m i_{l,m} b_m`.
    pub fn exponent(&self, b: &[f64]) -> f64 {
        self.exponents.iter().zip(b).map(|(i, bm)| *i as f64 * bm).sum()
    }
}

/// `sum_l alpha_l prod_m (F^{b_m})^{i_{l,m}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub monomials: Vec<Monomial>,
}

impl AlgebraElement {
    pub fn new(monomials: Vec<Monomial>) -> Result<Self> {
        if monomials.is_empty() {
            return Err(invalid("algebra element needs at least one monomial"));
        }
        let width = monomials[0].exponents.len();
        for (l, m) in monomials.iter().enumerate() {
            if m.exponents.len() != width {
                return Err(invalid("all monomials must use the same number of generators"));
            }
            if m.alpha.norm() == 0.0 || !m.alpha.norm().is_finite() {
                return Err(invalid(format!("monomial {l} has a zero or non-finite coefficient")));
            }
            if m.degree() == 0 {
                return Err(invalid(format!("monomial {l} has all exponents zero")));
            }
            if monomials[..l].iter().any(|o| o.exponents == m.exponents) {
                return Err(invalid(format!("monomial {l} repeats an exponent tuple")));
            }
        }
        Ok(AlgebraElement { monomials })
    }

    pub fn generators(&self) -> usize {
        self.monomials[0].exponents.len()
    }

    /// `P = max_l P_l`.
    pub fn max_degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementMethod {
    ClosedForm,
    ByProducts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementCoefficients {
    pub series: WeightedPowerSeries,
    /// Indices fixed by the explicit formulas; the rest came from convolution.
    pub determined: Vec<bool>,
    /// Gap ranges `(p k_{p-1}, k_p)` on which the element vanishes identically.
    pub gap_ranges: Vec<(usize, usize)>,
}

pub fn algebra_element_coefficients(
    elem: &AlgebraElement,
    basis: &ExponentBasis,
    gap: &GapSequence,
    weight: WitnessWeight<'_>,
    j_max: usize,
    method: ElementMethod,
) -> Result<ElementCoefficients> {
    if elem.generators() > basis.b.len() {
        return Err(invalid(format!(
            "element uses {} generators, basis has {}",
            elem.generators(),
            basis.b.len()
        )));
    }
    let big_p = elem.max_degree() as usize;
    let required = match gap.variant {
        WitnessVariant::Cauchy => big_p * gap.last(),
        WitnessVariant::Hadamard => gap.last(),
    };
    if j_max < required {
        return Err(invalid(format!("truncation J = {j_max} too short; the element needs J >= {required}")));
    }
    let b = &basis.b[..elem.generators()];
    let gens = b.iter().map(|&bm| build_witness(bm, gap, weight, j_max)).collect::<Result<Vec<_>>>()?;
    let gap_ranges: Vec<(usize, usize)> = match gap.variant {
        WitnessVariant::Cauchy => (big_p.max(1)..gap.k.len()).map(|p| (p * gap.k[p - 1], gap.k[p])).collect(),
        WitnessVariant::Hadamard => Vec::new(),
    };
    match (method, gap.variant) {
        (ElementMethod::ByProducts, variant) => {
            let series = by_products(elem, &gens, variant, j_max)?;
            Ok(ElementCoefficients { series, determined: vec![true; j_max + 1], gap_ranges })
        }
        (ElementMethod::ClosedForm, WitnessVariant::Hadamard) => {
            let mut series = WeightedPowerSeries::zeros(j_max);
            for p in 0..gap.k.len() {
                let log_n = generator_log_n(gap, &weight, p)?;
                series.set(gap.k[p], closed_value(elem, b, log_n, None));
            }
            Ok(ElementCoefficients { series, determined: vec![true; j_max + 1], gap_ranges })
        }
        (ElementMethod::ClosedForm, WitnessVariant::Cauchy) => {
            let mut series = by_products(elem, &gens, WitnessVariant::Cauchy, j_max)?;
            let mut determined = vec![false; j_max + 1];
            for p in big_p..gap.k.len() {
                let log_n = generator_log_n(gap, &weight, p)?;
                for d in 1..=big_p {
                    let idx = d * gap.k[p];
                    if idx <= j_max {
                        series.set(idx, closed_value(elem, b, log_n, Some(d as u32)));
                        determined[idx] = true;
                    }
                }
            }
            for &(lo, hi) in &gap_ranges {
                for j in (lo + 1)..hi.min(j_max + 1) {
                    series.set(j, ScaledCoefficient::ZERO);
                    determined[j] = true;
                }
            }
            Ok(ElementCoefficients { series, determined, gap_ranges })
        }
    }
}

/// `sum_{l : P_l = d} alpha_l n^{c_l}` (all monomials when `d` is `None`).
fn closed_value(elem: &AlgebraElement, b: &[f64], log_n: f64, d: Option<u32>) -> ScaledCoefficient {
    let terms: Vec<ScaledCoefficient> = elem
        .monomials
        .iter()
        .filter(|m| d.is_none_or(|d| m.degree() == d))
        .map(|m| ScaledCoefficient::from_complex(m.alpha).scale_log(m.exponent(b) * log_n))
        .collect();
    scaled_sum(&terms)
}

fn by_products(
    elem: &AlgebraElement,
    gens: &[WeightedPowerSeries],
    variant: WitnessVariant,
    j_max: usize,
) -> Result<WeightedPowerSeries> {
    let mut cells: Vec<Vec<ScaledCoefficient>> = vec![Vec::new(); j_max + 1];
    for m in &elem.monomials {
        let mut acc = match variant {
            WitnessVariant::Cauchy => WeightedPowerSeries::identity(j_max),
            WitnessVariant::Hadamard => WeightedPowerSeries::ones(j_max),
        };
        for (g, &i) in gens.iter().zip(&m.exponents) {
            for _ in 0..i {
                acc = match variant {
                    WitnessVariant::Cauchy => cauchy_product(&acc, g)?,
                    WitnessVariant::Hadamard => hadamard_product(&acc, g)?,
                };
            }
        }
        let alpha = ScaledCoefficient::from_complex(m.alpha);
        for (j, c) in acc.coeffs().iter().enumerate() {
            if !c.is_zero() {
                cells[j].push(c.mul(alpha));
            }
        }
    }
    WeightedPowerSeries::new(cells.iter().map(|c| scaled_sum(c)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub p: usize,
    pub k: usize,
    /// `log |S_{k_p}(a)|`.
    pub log_abs: f64,
    /// `log` of the correction `|sum_{j <= p k_{p-1}} (omega_{j,k_p} - 1) G_j a^j|`.
    pub log_correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub a: f64,
    pub sums: Vec<PartialSum>,
    /// The last three steps are strict increases.
    pub increasing: bool,
    /// `log|S|` gain over the last three steps.
    pub gain: f64,
    pub evidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub rows: Vec<DivergenceRow>,
}

/// Minimum total gain (log units) over the last three steps.
pub const DIVERGENCE_GAIN: f64 = 2.0;

/// `S_{k_p}(a) = sum_{j < k_p} omega_{j,k_p} G_j a^j` for every `p >= 1`
/// with `k_p - 1` inside the truncation of `G`.
pub fn divergence_diagnostic(
    g: &WeightedPowerSeries,
    oracle: &SummationWeightOracle,
    a_list: &[f64],
    gap: &GapSequence,
) -> Result<DivergenceReport> {
    if a_list.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(invalid("evaluation points a must be positive"));
    }
    let support = g.support();
    let mut rows = Vec::with_capacity(a_list.len());
    for &a in a_list {
        let la = a.ln();
        let mut sums = Vec::new();
        for p in 1..gap.k.len() {
            let k = gap.k[p];
            if k > g.truncation() + 1 {
                break;
            }
            let upto = match gap.variant {
                WitnessVariant::Cauchy => p * gap.k[p - 1],
                WitnessVariant::Hadamard => gap.k[p - 1],
            };
            let mut main = Vec::new();
            let mut corr = Vec::new();
            for &j in support.iter().take_while(|&&j| j < k) {
                let base = g.coeff(j).scale_log(j as f64 * la);
                let w = oracle.weight(j, k);
                main.push(base.mul(ScaledCoefficient::from_real(w)));
                if j <= upto && w != 1.0 {
                    corr.push(base.mul(ScaledCoefficient::from_real(w - 1.0)));
                }
            }
            sums.push(PartialSum {
                p,
                k,
                log_abs: scaled_sum(&main).log_mag,
                log_correction: scaled_sum(&corr).log_mag,
            });
        }
        let (increasing, gain) = if sums.len() >= 4 {
            let last: Vec<f64> = sums[sums.len() - 4..].iter().map(|s| s.log_abs).collect();
            (last.windows(2).all(|w| w[1] > w[0]), last[3] - last[0])
        } else {
            (false, f64::NAN)
        };
        rows.push(DivergenceRow { a, sums, increasing, gain, evidence: increasing && gain >= DIVERGENCE_GAIN });
    }
    Ok(DivergenceReport { rows })
}
