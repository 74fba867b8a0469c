//! Shared numerical kernels: log-domain sums, factorial tables and the
//! grid + golden-section envelope search used by every conjugate.

use std::sync::OnceLock;

/// Base grid size for envelope searches.
pub const GRID_POINTS: usize = 2048;
/// Argument tolerance of the golden-section refinement.
pub const GOLDEN_TOL: f64 = 1e-10;

const FACTORIAL_TABLE: usize = 1 << 16;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(FACTORIAL_TABLE + 1);
        let mut acc = NeumaierSum::default();
        out.push(0.0);
        for i in 1..=FACTORIAL_TABLE {
            acc.add((i as f64).ln());
            out.push(acc.value());
        }
        out
    })
}

/// `log j!`; tabulated up to 2^16, `ln Γ(j+1)` beyond.
pub fn ln_factorial(j: u64) -> f64 {
    let table = factorial_table();
    if (j as usize) < table.len() {
        table[j as usize]
    } else {
        statrs::function::gamma::ln_gamma(j as f64 + 1.0)
    }
}

/// `log(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log Σ e^{x_i}`, anchored at the maximum, summed in input order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let anchor = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if anchor == f64::NEG_INFINITY {
        return anchor;
    }
    if anchor == f64::INFINITY {
        return anchor;
    }
    let mut acc = NeumaierSum::default();
    for &x in xs {
        acc.add((x - anchor).exp());
    }
    anchor + acc.value().ln()
}

/// Which end of the search interval an extremum landed on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Lower,
    Upper,
}

/// Result of a one-dimensional envelope search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
    pub edge: Option<Edge>,
}

/// Maximize a concave (or unimodal) `f` on `[lo, hi]`: uniform grid, then
/// golden-section refinement inside the bracket of the best grid point.
pub fn maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> Extremum {
    assert!(hi > lo && points >= 3, "degenerate search interval");
    let step = (hi - lo) / (points - 1) as f64;
    let at = |i: usize| if i == points - 1 { hi } else { lo + step * i as f64 };
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(at(i));
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let a = at(best.saturating_sub(1));
    let b = at((best + 1).min(points - 1));
    let (g_arg, g_val) = golden_max(&f, a, b);
    let (arg, value) = if g_val > best_val { (g_arg, g_val) } else { (at(best), best_val) };
    let edge = if best == 0 && arg - lo <= step {
        Some(Edge::Lower)
    } else if best == points - 1 && hi - arg <= step {
        Some(Edge::Upper)
    } else {
        None
    };
    Extremum { arg, value, edge }
}

/// Minimize a convex (or unimodal) `f` on `[lo, hi]`.
pub fn minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> Extremum {
    let e = maximize(|x| -f(x), lo, hi, points);
    Extremum { value: -e.value, ..e }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    [(c, fc), (d, fd), (m, fm)]
        .into_iter()
        .fold((m, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Composite trapezoid rule on `[0, upper]` with the given step.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, upper: f64, step: f64) -> f64 {
    let n = (upper / step).ceil().max(1.0) as usize;
    let h = upper / n as f64;
    let mut acc = NeumaierSum::default();
    acc.add(0.5 * f(0.0));
    for i in 1..n {
        acc.add(f(h * i as f64));
    }
    acc.add(0.5 * f(upper));
    acc.value() * h
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre quadrature with `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut acc = NeumaierSum::default();
    for p in 0..panels {
        let mid = a + width * (p as f64 + 0.5);
        let half = 0.5 * width;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            acc.add(w * half * (f(mid - half * x) + f(mid + half * x)));
        }
    }
    acc.value()
}

/// Uniform grid of `points` values on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| if i == points - 1 { hi } else { lo + step * i as f64 }).collect()
}
