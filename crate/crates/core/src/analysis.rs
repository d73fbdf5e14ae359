//! Frequency extraction and waveform diagnostics for sampled spin series.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::integrator::TimeSeries;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all points share the same abscissa")]
    Degenerate,
    #[error("log-log fit needs positive values, got ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("no reference point at eta = pi/2")]
    MissingReference,
    #[error("eta = {0} is outside (0, pi/2]")]
    EtaOutOfRange(f64),
    #[error("series has no density channel")]
    MissingDensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Least-squares sinusoid seeded from zero crossings.
    Sinusoid,
    /// Quadratic fit of the initial decline; no zero crossing available.
    Curvature,
    /// No usable signal.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyFit {
    /// rad/s.
    pub omega_fit: f64,
    /// Units of `hbar`.
    pub amplitude: f64,
    /// Constant offset of the fit, units of `hbar`.
    pub offset: f64,
    /// RMS deviation of the samples from the fit, units of `hbar`.
    pub residual_rms: f64,
    pub method: FitMethod,
    pub usable: bool,
}

/// Fits the precession frequency of `s_z` over the flat-envelope part of a
/// run.
pub fn extract_precession_frequency(series: &TimeSeries) -> FrequencyFit {
    let cfg = &series.meta.config;
    let (t, y) = flat_window(series, &series.s_z, cfg.delta_t, cfg.t_total);
    fit_precession(&t, &y)
}

fn flat_window(series: &TimeSeries, values: &[f64], ramp: f64, total: f64) -> (Vec<f64>, Vec<f64>) {
    // small slack so samples landing exactly on the ramp ends are kept
    let eps = 1e-9 * series.meta.config.period();
    series
        .times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= ramp - eps && **t <= total - ramp + eps)
        .map(|(t, v)| (*t, *v))
        .unzip()
}

/// Least-squares fit of `y = A cos(w t) + C sin(w t) + B`.
///
/// The frequency is seeded from midline crossings of `y`, refined by a
/// scan plus golden-section search of the projected residual, and polished
/// by Gauss-Newton on all four parameters. Without a zero crossing the
/// frequency is estimated from the curvature of the initial decline and the
/// fit is flagged unusable.
pub fn fit_precession(t: &[f64], y: &[f64]) -> FrequencyFit {
    assert_eq!(t.len(), y.len());
    let unusable = FrequencyFit {
        omega_fit: 0.0,
        amplitude: 0.0,
        offset: y.iter().sum::<f64>() / y.len().max(1) as f64,
        residual_rms: 0.0,
        method: FitMethod::None,
        usable: false,
    };
    if t.len() < 5 {
        return unusable;
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mid = 0.5 * (lo + hi);
    let crossings: Vec<f64> = t
        .windows(2)
        .zip(y.windows(2))
        .filter(|(_, w)| (w[0] - mid) * (w[1] - mid) < 0.0 || (w[1] == mid && w[0] != mid))
        .map(|(tt, w)| tt[0] + (tt[1] - tt[0]) * (mid - w[0]) / (w[1] - w[0]))
        .collect();
    // the swing must stand out from sub-permille micro-motion
    let swing = hi - lo;
    if crossings.is_empty() || swing < 0.1 {
        return curvature_fit(t, y).unwrap_or(unusable);
    }
    let seed = if crossings.len() >= 2 {
        PI * (crossings.len() - 1) as f64 / (crossings[crossings.len() - 1] - crossings[0])
    } else {
        // a cosine starting near an extremum at t = 0 crosses its midline
        // a quarter period later
        FRAC_PI_2 / crossings[0]
    };

    let span = t[t.len() - 1] - t[0];
    // scan wide enough to cover a crude seed, fine enough to land in the
    // basin of the true minimum (spacing well under one period over span)
    let (a, b) = (0.5 * seed, 1.5 * seed);
    let n = ((b - a) * span / 0.1).ceil().clamp(50.0, 20000.0) as usize;
    let mut best = (f64::INFINITY, seed);
    for i in 0..=n {
        let w = a + (b - a) * i as f64 / n as f64;
        let r = projected_residual(t, y, w).0;
        if r < best.0 {
            best = (r, w);
        }
    }
    let h = (b - a) / n as f64;
    let w = golden(|w| projected_residual(t, y, w).0, best.1 - h, best.1 + h);
    let (_, lin) = projected_residual(t, y, w);
    let (w, lin) = gauss_newton(t, y, w, lin);
    let rss = residual(t, y, w, &lin);
    FrequencyFit {
        omega_fit: w.abs(),
        amplitude: lin[0].hypot(lin[1]),
        offset: lin[2],
        residual_rms: (rss / t.len() as f64).sqrt(),
        method: FitMethod::Sinusoid,
        usable: true,
    }
}

/// Residual sum of squares of the best linear fit at frequency `w`, with the
/// coefficients `(A, C, B)`.
fn projected_residual(t: &[f64], y: &[f64], w: f64) -> (f64, [f64; 3]) {
    let t0 = t[0];
    let mut g = nalgebra::Matrix3::<f64>::zeros();
    let mut r = nalgebra::Vector3::<f64>::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let (s, c) = (w * (ti - t0)).sin_cos();
        let f = nalgebra::Vector3::new(c, s, 1.0);
        g += f * f.transpose();
        r += f * yi;
    }
    let x = g
        .cholesky()
        .map(|ch| ch.solve(&r))
        .unwrap_or_else(nalgebra::Vector3::zeros);
    // rotate the phase reference from t0 back to t = 0
    let (s0, c0) = (w * t0).sin_cos();
    let lin = [x[0] * c0 - x[1] * s0, x[0] * s0 + x[1] * c0, x[2]];
    (residual(t, y, w, &lin), lin)
}

fn residual(t: &[f64], y: &[f64], w: f64, lin: &[f64; 3]) -> f64 {
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let (s, c) = (w * ti).sin_cos();
            (yi - lin[0] * c - lin[1] * s - lin[2]).powi(2)
        })
        .sum()
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Polishes all four parameters. Works with the phase referenced to the
/// window centre, where the frequency is least correlated with `(A, C)`.
fn gauss_newton(t: &[f64], y: &[f64], mut w: f64, lin: [f64; 3]) -> (f64, [f64; 3]) {
    let tc = 0.5 * (t[0] + t[t.len() - 1]);
    let (s0, c0) = (w * tc).sin_cos();
    let mut p = [lin[0] * c0 + lin[1] * s0, -lin[0] * s0 + lin[1] * c0, lin[2]];
    let centred = |w: f64, p: &[f64; 3]| -> f64 {
        t.iter()
            .zip(y)
            .map(|(&ti, &yi)| {
                let (s, c) = (w * (ti - tc)).sin_cos();
                (yi - p[0] * c - p[1] * s - p[2]).powi(2)
            })
            .sum()
    };
    let mut rss = centred(w, &p);
    for _ in 0..20 {
        let mut g = Matrix4::<f64>::zeros();
        let mut r = Vector4::<f64>::zeros();
        for (&ti, &yi) in t.iter().zip(y) {
            let u = ti - tc;
            let (s, c) = (w * u).sin_cos();
            let f = p[0] * c + p[1] * s + p[2];
            let j = Vector4::new(c, s, 1.0, u * (-p[0] * s + p[1] * c));
            g += j * j.transpose();
            r += j * (yi - f);
        }
        let Some(d) = g.cholesky().map(|ch| ch.solve(&r)) else {
            break;
        };
        let wn = w + d[3];
        let pn = [p[0] + d[0], p[1] + d[1], p[2] + d[2]];
        let rn = centred(wn, &pn);
        if !(rn <= rss) {
            break;
        }
        let done = d[3].abs() <= 1e-15 * w.abs();
        (w, p, rss) = (wn, pn, rn);
        if done {
            break;
        }
    }
    let (s0, c0) = (w * tc).sin_cos();
    (w, [p[0] * c0 - p[1] * s0, p[0] * s0 + p[1] * c0, p[2]])
}

/// `y ~ a + b t + c t^2` near the start; for `y = A cos(w t)` this gives
/// `w^2 = -2 c / a`.
fn curvature_fit(t: &[f64], y: &[f64]) -> Option<FrequencyFit> {
    let t0 = t[0];
    let mut g = nalgebra::Matrix3::<f64>::zeros();
    let mut r = nalgebra::Vector3::<f64>::zeros();
    let scale = (t[t.len() - 1] - t0).max(f64::MIN_POSITIVE);
    for (&ti, &yi) in t.iter().zip(y) {
        let u = (ti - t0) / scale;
        let f = nalgebra::Vector3::new(1.0, u, u * u);
        g += f * f.transpose();
        r += f * yi;
    }
    let x = g.cholesky()?.solve(&r);
    let (a, c) = (x[0], x[2] / (scale * scale));
    // curvature must account for a visible decline over the window
    if !(c < 0.0) || (x[2].abs() < 1e-4 * a.abs()) {
        return None;
    }
    let omega = (-2.0 * c / a).sqrt();
    let rss: f64 = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let u = (ti - t0) / scale;
            (yi - x[0] - x[1] * u - x[2] * u * u).powi(2)
        })
        .sum();
    Some(FrequencyFit {
        omega_fit: omega,
        amplitude: a,
        offset: 0.0,
        residual_rms: (rss / t.len() as f64).sqrt(),
        method: FitMethod::Curvature,
        usable: false,
    })
}

/// RMS deviation of `s_z` from its best cosine fit, in units of `hbar / 2`.
pub fn anharmonicity_score(series: &TimeSeries) -> f64 {
    let cfg = &series.meta.config;
    let (t, y) = flat_window(series, &series.s_z, cfg.delta_t, cfg.t_total);
    2.0 * fit_precession(&t, &y).residual_rms
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// `log omega - fit` per point.
    pub residuals: Vec<f64>,
}

/// Least-squares slope of `log omega` against `log E_hat`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit, AnalysisError> {
    if points.len() < 4 {
        return Err(AnalysisError::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    if let Some(&(e, w)) = points.iter().find(|(e, w)| !(*e > 0.0 && *w > 0.0)) {
        return Err(AnalysisError::NonPositive(e, w));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 * mx.abs().max(1.0) {
        return Err(AnalysisError::Degenerate);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - intercept - slope * x)
        .collect();
    Ok(ScalingFit {
        slope,
        intercept,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityFit {
    /// `(eta, omega(eta) / omega(pi/2), sin eta)` per point.
    pub ratios: Vec<(f64, f64, f64)>,
    /// Largest `|ratio - sin eta| / sin eta`.
    pub max_deviation: f64,
}

/// Compares `omega(eta) / omega(pi/2)` with `sin eta`.
pub fn ellipticity_law(points: &[(f64, f64)]) -> Result<EllipticityFit, AnalysisError> {
    if let Some(&(eta, _)) = points.iter().find(|(e, _)| !(*e > 0.0 && *e <= FRAC_PI_2 + 1e-12)) {
        return Err(AnalysisError::EtaOutOfRange(eta));
    }
    let reference = points
        .iter()
        .find(|(e, _)| (e - FRAC_PI_2).abs() < 1e-12)
        .ok_or(AnalysisError::MissingReference)?
        .1;
    let ratios: Vec<_> = points
        .iter()
        .map(|&(eta, w)| (eta, w / reference, eta.sin()))
        .collect();
    let max_deviation = ratios
        .iter()
        .map(|(_, r, s)| (r - s).abs() / s)
        .fold(0.0, f64::max);
    Ok(EllipticityFit {
        ratios,
        max_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Dominant oscillation period of `lambda rho(lambda/4, t)` around its
    /// mean, s; `None` with fewer than two mean crossings.
    pub envelope_period: Option<f64>,
}

/// Statistics of `lambda rho(lambda/4, t)` over the flat-envelope window.
pub fn density_statistics(series: &TimeSeries) -> Result<DensityStats, AnalysisError> {
    let d = series.density.as_ref().ok_or(AnalysisError::MissingDensity)?;
    let cfg = &series.meta.config;
    let (t, v) = flat_window(series, d, cfg.delta_t, cfg.t_total);
    if v.is_empty() {
        return Err(AnalysisError::TooFewPoints { needed: 1, got: 0 });
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let crossings: Vec<f64> = t
        .windows(2)
        .zip(v.windows(2))
        .filter(|(_, w)| (w[0] - mean) * (w[1] - mean) < 0.0)
        .map(|(tt, w)| tt[0] + (tt[1] - tt[0]) * (mean - w[0]) / (w[1] - w[0]))
        .collect();
    let envelope_period = (crossings.len() >= 2).then(|| {
        2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
    });
    Ok(DensityStats {
        mean,
        min,
        max,
        envelope_period,
    })
}
