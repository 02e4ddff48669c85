//! Mean-field return map of an outer-totalistic rule and the random-start
//! density experiment it predicts.
//!
//! Under the independence assumption a cell is alive next step with
//! probability `P(p) = Σ_{k∈B} C(8,k) p^k q^(8-k) q + Σ_{k∈S} C(8,k) p^k q^(8-k) p`
//! where `q = 1 - p`. Every term is homogeneous of degree 9 in `(p, q)`, which
//! is the basis the coefficients are stored in.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{Grid, RuleSpec};
use crate::error::{Error, Result};

/// Number of intervals of the sign-change scan in [`MeanFieldPoly::fixed_points`].
pub const SCAN_POINTS: usize = 20_000;

/// `|P'| - 1` closer to zero than this is labelled marginal.
const MARGINAL_BAND: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanFieldPoly {
    rule: RuleSpec,
    /// `(power of p, power of q) -> coefficient`, powers summing to 9.
    coefficients: BTreeMap<(u32, u32), u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn from_derivative(d: f64) -> Self {
        let m = d.abs() - 1.0;
        if m.abs() <= MARGINAL_BAND {
            Stability::Marginal
        } else if m < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub value: f64,
    pub stability: Stability,
    pub derivative: f64,
}

pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * u64::from(n - i) / u64::from(i + 1))
}

impl MeanFieldPoly {
    pub fn build(rule: &RuleSpec) -> Self {
        let mut coefficients = BTreeMap::new();
        for k in rule.births() {
            let k = u32::from(k);
            *coefficients.entry((k, 9 - k)).or_insert(0) += binomial(8, k);
        }
        for k in rule.survivals() {
            let k = u32::from(k);
            *coefficients.entry((k + 1, 8 - k)).or_insert(0) += binomial(8, k);
        }
        Self {
            rule: *rule,
            coefficients,
        }
    }

    pub fn rule(&self) -> &RuleSpec {
        &self.rule
    }

    pub fn coefficients(&self) -> &BTreeMap<(u32, u32), u64> {
        &self.coefficients
    }

    pub fn coefficient(&self, p_power: u32, q_power: u32) -> u64 {
        self.coefficients
            .get(&(p_power, q_power))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn evaluate(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(self.eval_unchecked(p))
    }

    fn eval_unchecked(&self, p: f64) -> f64 {
        let q = 1.0 - p;
        self.coefficients
            .iter()
            .map(|(&(a, b), &c)| c as f64 * p.powi(a as i32) * q.powi(b as i32))
            .sum()
    }

    /// Analytic `dP/dp`, with `dq/dp = -1`.
    pub fn derivative(&self, p: f64) -> f64 {
        let q = 1.0 - p;
        let pow = |x: f64, n: u32| if n == 0 { 1.0 } else { x.powi(n as i32) };
        self.coefficients
            .iter()
            .map(|(&(a, b), &c)| {
                let c = c as f64;
                let dp = if a > 0 {
                    a as f64 * pow(p, a - 1) * pow(q, b)
                } else {
                    0.0
                };
                let dq = if b > 0 {
                    b as f64 * pow(p, a) * pow(q, b - 1)
                } else {
                    0.0
                };
                c * (dp - dq)
            })
            .sum()
    }

    /// Solutions of `P(p) = p` on [0, 1], ascending.
    ///
    /// `P(p) - p` is sampled on [`SCAN_POINTS`] intervals; exact zeros at
    /// sample points are taken as they are and every sign change is bisected
    /// until the bracket is narrower than `tolerance`.
    pub fn fixed_points(&self, tolerance: f64) -> Result<Vec<FixedPoint>> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let g = |p: f64| self.eval_unchecked(p) - p;
        let xs: Vec<f64> = (0..=SCAN_POINTS)
            .map(|i| i as f64 / SCAN_POINTS as f64)
            .collect();
        let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        let mut roots: Vec<f64> = Vec::new();
        for i in 0..xs.len() {
            if gs[i] == 0.0 {
                roots.push(xs[i]);
            } else if i + 1 < xs.len() && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
                roots.push(bisect(&g, xs[i], xs[i + 1], tolerance));
            }
        }
        roots.dedup_by(|b, a| (*b - *a).abs() <= 2.0 * tolerance);
        Ok(roots
            .into_iter()
            .map(|value| {
                let derivative = self.derivative(value);
                FixedPoint {
                    value,
                    stability: Stability::from_derivative(derivative),
                    derivative,
                }
            })
            .collect())
    }
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tolerance: f64) -> f64 {
    let lo_negative = g(lo) < 0.0;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl fmt::Display for MeanFieldPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .map(|(&(a, b), &c)| format!("{c} p^{a} q^{b}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Least-squares `density ≈ a + b t + c t²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticFit {
    pub fn at(&self, t: f64) -> f64 {
        self.a + self.b * t + self.c * t * t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRun {
    pub width: usize,
    pub height: usize,
    pub initial_density: f64,
    pub seed: u64,
    /// Live cells at steps `0..=steps`.
    pub populations: Vec<u64>,
    /// Last step of the growth phase: the first step at which the density
    /// reaches 90% of its final value.
    pub growth_end: usize,
    /// Quadratic fit over steps `0..=growth_end`, if that span has at least
    /// three points.
    pub fit: Option<QuadraticFit>,
    /// Period (1 or 2) of the final configuration, if it has one.
    pub final_period: Option<u64>,
}

impl DensityRun {
    pub fn densities(&self) -> Vec<f64> {
        let area = (self.width * self.height) as f64;
        self.populations.iter().map(|&n| n as f64 / area).collect()
    }

    pub fn terminal_density(&self) -> f64 {
        *self.populations.last().expect("at least the initial state") as f64
            / (self.width * self.height) as f64
    }

    /// `step,population,density` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,population,density")?;
        for (t, (n, d)) in self.populations.iter().zip(self.densities()).enumerate() {
            writeln!(out, "{t},{n},{d:.6}")?;
        }
        Ok(())
    }
}

pub fn density_experiment(
    width: usize,
    height: usize,
    initial_density: f64,
    steps: usize,
    seed: u64,
    rule: &RuleSpec,
) -> Result<DensityRun> {
    let mut grid = Grid::random(width, height, initial_density, seed)?;
    let mut populations = Vec::with_capacity(steps + 1);
    populations.push(grid.population());
    let mut history: [Option<Grid>; 2] = [None, None];
    for t in 1..=steps {
        if t + 2 > steps {
            history[(steps - t) % 2] = Some(grid.clone());
        }
        grid.tick(rule);
        populations.push(grid.population());
    }
    let final_period = [1u64, 2].into_iter().find(|&k| {
        history[(k - 1) as usize]
            .as_ref()
            .is_some_and(|prev| prev.same_cells(&grid))
    });

    let terminal = *populations.last().unwrap() as f64;
    let growth_end = populations
        .iter()
        .position(|&n| n as f64 >= 0.9 * terminal)
        .unwrap_or(steps);
    let area = (width * height) as f64;
    let ts: Vec<f64> = (0..=growth_end).map(|t| t as f64).collect();
    let ys: Vec<f64> = populations[..=growth_end]
        .iter()
        .map(|&n| n as f64 / area)
        .collect();
    let fit = fit_quadratic(&ts, &ys);
    Ok(DensityRun {
        width,
        height,
        initial_density,
        seed,
        populations,
        growth_end,
        fit,
        final_period,
    })
}

/// Ordinary least squares for a quadratic; `None` with fewer than three
/// points or a singular system.
pub fn fit_quadratic(ts: &[f64], ys: &[f64]) -> Option<QuadraticFit> {
    if ts.len() < 3 || ts.len() != ys.len() {
        return None;
    }
    // Centre t for conditioning, then shift the coefficients back.
    let m = ts.iter().sum::<f64>() / ts.len() as f64;
    let mut s = [0.0f64; 5];
    let mut r = [0.0f64; 3];
    for (&t, &y) in ts.iter().zip(ys) {
        let u = t - m;
        let mut pw = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += pw;
            if k < 3 {
                r[k] += pw * y;
            }
            pw *= u;
        }
    }
    let mut a = [
        [s[0], s[1], s[2], r[0]],
        [s[1], s[2], s[3], r[1]],
        [s[2], s[3], s[4], r[2]],
    ];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                let pivot = a[col];
                for (x, p) in a[row].iter_mut().zip(pivot).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    let (c0, c1, c2) = (a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]);
    Some(QuadraticFit {
        a: c0 - c1 * m + c2 * m * m,
        b: c1 - 2.0 * c2 * m,
        c: c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `14 p²q³ (4p⁴ + 2q⁴ + 5p³q + 2pq³ + 4p²q²)` multiplied out by hand-rolled
    /// monomial arithmetic.
    fn factored_reference() -> BTreeMap<(u32, u32), u64> {
        let inner = [
            ((4, 0), 4u64),
            ((0, 4), 2),
            ((3, 1), 5),
            ((1, 3), 2),
            ((2, 2), 4),
        ];
        let mut out = BTreeMap::new();
        for ((a, b), c) in inner {
            *out.entry((a + 2, b + 3)).or_insert(0) += 14 * c;
        }
        out
    }

    #[test]
    fn b2s2345_matches_factored_form() {
        let poly = MeanFieldPoly::build(&RuleSpec::b2s2345());
        assert_eq!(poly.coefficients(), &factored_reference());
        let expected = [
            ((2, 7), 28),
            ((3, 6), 28),
            ((4, 5), 56),
            ((5, 4), 70),
            ((6, 3), 56),
        ];
        assert_eq!(poly.coefficients(), &expected.into_iter().collect());
    }

    #[test]
    fn degenerate_rules() {
        let zero = MeanFieldPoly::build(&RuleSpec::new(&[], &[]).unwrap());
        assert!(zero.is_zero());
        let fps = zero.fixed_points(1e-12).unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].value, 0.0);
        assert_eq!(fps[0].stability, Stability::Stable);

        let b0 = MeanFieldPoly::build(&RuleSpec::new(&[0], &[]).unwrap());
        assert_eq!(b0.coefficients().len(), 1);
        assert_eq!(b0.coefficient(0, 9), 1);
    }

    #[test]
    fn endpoints_and_domain() {
        let poly = MeanFieldPoly::build(&RuleSpec::b2s2345());
        assert_eq!(poly.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(poly.evaluate(1.0).unwrap(), 0.0);
        assert!((poly.evaluate(0.468).unwrap() - 0.468).abs() < 2e-3);
        assert!(poly.evaluate(-0.1).is_err());
        assert!(poly.evaluate(1.5).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let poly = MeanFieldPoly::build(&RuleSpec::b2s2345());
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let h = 1e-6;
            let fd = (poly.eval_unchecked(p + h) - poly.eval_unchecked(p - h)) / (2.0 * h);
            assert!((fd - poly.derivative(p)).abs() < 1e-6, "p={p}");
        }
    }

    #[test]
    fn binomials() {
        let row: Vec<u64> = (0..=8).map(|k| binomial(8, k)).collect();
        assert_eq!(row, [1, 8, 28, 56, 70, 56, 28, 8, 1]);
    }

    #[test]
    fn quadratic_fit_recovers_exact_data() {
        let ts: Vec<f64> = (0..20).map(f64::from).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 0.5 - 0.25 * t + 0.125 * t * t).collect();
        let fit = fit_quadratic(&ts, &ys).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-9);
        assert!((fit.b + 0.25).abs() < 1e-9);
        assert!((fit.c - 0.125).abs() < 1e-9);
        assert!(fit_quadratic(&ts[..2], &ys[..2]).is_none());
    }

    #[test]
    fn zero_density_stays_empty() {
        let run = density_experiment(40, 30, 0.0, 10, 7, &RuleSpec::b2s2345()).unwrap();
        assert!(run.populations.iter().all(|&n| n == 0));
        assert_eq!(run.final_period, Some(1));
        let mut csv = Vec::new();
        run.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("step,population,density\n0,0,0.000000\n"));
    }
}
