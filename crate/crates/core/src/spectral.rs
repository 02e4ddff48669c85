//! Power spectra of windowed cell activity and log-log slope fits.
//!
//! Each cell's binary series is transformed as is (no taper, no mean
//! removal) and the squared magnitudes are summed over cells, bin by bin.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::engine::{ActivityTrace, Rect};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    /// Bin indices `0..=steps/2`.
    pub frequencies: Vec<usize>,
    pub power: Vec<f64>,
    pub steps: usize,
    pub window: Rect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Inclusive bin range.
    pub range: (usize, usize),
    /// Root-mean-square residual of `log10(power)`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub low_slope: f64,
    pub high_slope: f64,
    pub lorentzian: bool,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

pub fn power_spectrum(trace: &ActivityTrace) -> Result<SpectrumEstimate> {
    let steps = trace.steps();
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "a spectrum needs at least 2 steps, got {steps}"
        )));
    }
    let bins = steps / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(steps);
    let mut buf = vec![Complex::new(0.0, 0.0); steps];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut acc = vec![CompensatedSum::default(); bins];
    for series in trace.iter() {
        if series.iter().all(|&s| s == 0) {
            continue;
        }
        for (b, &s) in buf.iter_mut().zip(series) {
            *b = Complex::new(f64::from(s), 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, x) in acc.iter_mut().zip(&buf) {
            a.add(x.norm_sqr());
        }
    }
    Ok(SpectrumEstimate {
        frequencies: (0..bins).collect(),
        power: acc.into_iter().map(CompensatedSum::value).collect(),
        steps,
        window: trace.window(),
    })
}

impl SpectrumEstimate {
    /// `frequency,power` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "frequency,power")?;
        for (f, p) in self.frequencies.iter().zip(&self.power) {
            writeln!(out, "{f},{p:e}")?;
        }
        Ok(())
    }

    /// Index of the largest non-DC bin.
    pub fn peak_bin(&self) -> Option<usize> {
        (1..self.power.len()).max_by(|&a, &b| self.power[a].total_cmp(&self.power[b]))
    }
}

/// Least squares of `log10(power)` on `log10(f)` over bins `f_lo..=f_hi`.
pub fn fit_exponent(spectrum: &SpectrumEstimate, f_lo: usize, f_hi: usize) -> Result<SpectrumFit> {
    let nyquist = spectrum.steps / 2;
    if f_lo < 1 || f_lo >= f_hi || f_hi > nyquist {
        return Err(Error::InvalidArgument(format!(
            "fit range {f_lo}..={f_hi} must satisfy 1 <= lo < hi <= {nyquist}"
        )));
    }
    let mut xs = Vec::with_capacity(f_hi - f_lo + 1);
    let mut ys = Vec::with_capacity(f_hi - f_lo + 1);
    for f in f_lo..=f_hi {
        let p = spectrum.power[f];
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::DegenerateFit(format!("power at bin {f} is {p}")));
        }
        xs.push((f as f64).log10());
        ys.push(p.log10());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SpectrumFit {
        exponent,
        intercept,
        range: (f_lo, f_hi),
        residual,
    })
}

/// Flat below a knee, falling above it: `|low slope| < 0.3` and
/// `high slope < -1`.
pub fn plateau_check(
    spectrum: &SpectrumEstimate,
    low_band: (usize, usize),
    high_band: (usize, usize),
) -> Result<PlateauReport> {
    if low_band.1 >= high_band.0 {
        return Err(Error::InvalidArgument(format!(
            "bands {low_band:?} and {high_band:?} must be disjoint and ordered"
        )));
    }
    let low_slope = fit_exponent(spectrum, low_band.0, low_band.1)?.exponent;
    let high_slope = fit_exponent(spectrum, high_band.0, high_band.1)?.exponent;
    Ok(PlateauReport {
        low_slope,
        high_slope,
        lorentzian: low_slope.abs() < 0.3 && high_slope < -1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace(series: &[Vec<u8>]) -> ActivityTrace {
        ActivityTrace::from_series(Rect::new(0, 0, series.len(), 1), series).unwrap()
    }

    fn synthetic(power: impl Fn(f64) -> f64, steps: usize) -> SpectrumEstimate {
        let bins = steps / 2 + 1;
        SpectrumEstimate {
            frequencies: (0..bins).collect(),
            power: (0..bins).map(|f| power(f as f64)).collect(),
            steps,
            window: Rect::new(0, 0, 1, 1),
        }
    }

    /// Direct O(T²) transform.
    fn naive_power(series: &[u8]) -> Vec<f64> {
        let n = series.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, &s) in series.iter().enumerate() {
                    let a = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                    re += f64::from(s) * a.cos();
                    im += f64::from(s) * a.sin();
                }
                re * re + im * im
            })
            .collect()
    }

    #[test]
    fn constant_series_is_pure_dc() {
        let s = power_spectrum(&trace(&[vec![1; 64]])).unwrap();
        assert_eq!(s.power[0], 64.0 * 64.0);
        assert!(s.power[1..].iter().all(|&p| p < 1e-18));
    }

    #[test]
    fn alternating_series_peaks_at_nyquist() {
        let series: Vec<u8> = (0..32).map(|t| (t % 2) as u8).collect();
        let s = power_spectrum(&trace(&[series])).unwrap();
        assert_eq!(s.frequencies.len(), 17);
        assert!((s.power[16] - 256.0).abs() < 1e-9);
        assert!(s.power[1..16].iter().all(|&p| p < 1e-18));
    }

    #[test]
    fn matches_naive_transform_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let series: Vec<Vec<u8>> = (0..5)
            .map(|_| (0..48).map(|_| u8::from(rng.gen_bool(0.3))).collect())
            .collect();
        let s = power_spectrum(&trace(&series)).unwrap();
        let mut naive = vec![0.0; 25];
        for c in &series {
            for (n, p) in naive.iter_mut().zip(naive_power(c)) {
                *n += p;
            }
        }
        for (a, b) in s.power.iter().zip(&naive) {
            assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
        // Parseval over the full two-sided spectrum of a real series.
        let two_sided: f64 = (0..48)
            .map(|k| s.power[if k <= 24 { k } else { 48 - k }])
            .sum();
        let energy: f64 = series.iter().flatten().map(|&x| f64::from(x)).sum();
        assert!((two_sided / 48.0 - energy).abs() < 1e-9 * energy);
    }

    #[test]
    fn time_reversal_keeps_power() {
        let series: Vec<u8> = (0..40).map(|t| u8::from(t % 7 < 3 || t % 5 == 0)).collect();
        let mut reversed = series.clone();
        reversed.reverse();
        let a = power_spectrum(&trace(&[series])).unwrap();
        let b = power_spectrum(&trace(&[reversed])).unwrap();
        for (x, y) in a.power.iter().zip(&b.power) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn too_short_series_rejected() {
        assert!(power_spectrum(&trace(&[vec![1]])).is_err());
    }

    #[test]
    fn exact_power_law_slope() {
        let s = synthetic(|f| f.powf(-2.0), 1024);
        let fit = fit_exponent(&s, 1, 10).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-10);
        assert!(fit.residual < 1e-10);
        assert!(fit_exponent(&s, 0, 10).is_err());
        assert!(fit_exponent(&s, 10, 10).is_err());
        assert!(fit_exponent(&s, 1, 513).is_err());
    }

    #[test]
    fn zero_power_is_degenerate() {
        let s = synthetic(|f| if f == 5.0 { 0.0 } else { 1.0 }, 64);
        assert!(matches!(
            fit_exponent(&s, 1, 10),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn lorentzian_versus_power_law() {
        let f0 = 64.0;
        let lor = synthetic(|f| 1.0 / (1.0 + (f / f0).powi(2)), 1024);
        let r = plateau_check(&lor, (1, 10), (200, 500)).unwrap();
        assert!(r.lorentzian, "{r:?}");
        let pl = synthetic(|f| f.powf(-2.0), 1024);
        let r = plateau_check(&pl, (1, 10), (200, 500)).unwrap();
        assert!(!r.lorentzian, "{r:?}");
        assert!(plateau_check(&pl, (1, 300), (200, 500)).is_err());
    }

    #[test]
    fn white_noise_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let series: Vec<Vec<u8>> = (0..400)
            .map(|_| (0..1024).map(|_| u8::from(rng.gen_bool(0.5))).collect())
            .collect();
        let s = power_spectrum(&trace(&series)).unwrap();
        let fit = fit_exponent(&s, 1, 10).unwrap();
        assert!(fit.exponent.abs() < 0.2, "{fit:?}");
    }
}
