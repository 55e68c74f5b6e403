//! Fringe metrics and pattern comparison.
//!
//! All metrics look only at the central 60% of the screen, where the
//! Fraunhofer picture holds and finite-extent edge effects are absent.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::grid::Grid;
use crate::scenarios::{run_with, RunOptions, Scenario};

/// Fraction of the screen width analysed.
pub const WINDOW_FRACTION: f64 = 0.6;
/// Maxima below this fraction of the global maximum are ignored.
pub const PEAK_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub grid: Grid,
    pub intensity: Vec<f64>,
    pub scenario: String,
    pub model: String,
}

impl Pattern {
    pub fn new(grid: Grid, intensity: Vec<f64>, scenario: String, model: String) -> Result<Self> {
        if grid.len() != intensity.len() {
            return Err(Error::GridMismatch);
        }
        if intensity.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::validation(
                "intensity",
                "must be finite and nonnegative",
            ));
        }
        Ok(Self {
            grid,
            intensity,
            scenario,
            model,
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        self.grid.xs().collect()
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }

    /// Index range of the analysis window.
    pub fn window(&self) -> std::ops::Range<usize> {
        let half = WINDOW_FRACTION * self.grid.half_extent();
        let c = self.grid.center();
        let lo = self.grid.index_of(c - half).ceil().max(0.0) as usize;
        let hi = (self.grid.index_of(c + half).floor() as usize).min(self.grid.len() - 1);
        lo..hi + 1
    }

    /// `max |a − b| / max a`.
    pub fn max_relative_deviation(&self, other: &Pattern) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let scale = self.max_intensity();
        let worst = self
            .intensity
            .iter()
            .zip(&other.intensity)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(if scale > 0.0 { worst / scale } else { worst })
    }

    /// `max |I(x) − I(−x)| / max I` about the grid centre.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.intensity.len();
        let scale = self.max_intensity();
        let worst = (0..n)
            .map(|i| (self.intensity[i] - self.intensity[n - 1 - i]).abs())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternMetrics {
    pub central_max_x: f64,
    pub fringe_spacing: f64,
    pub visibility: f64,
    pub n_fringes: usize,
}

/// Vertex offset, in samples, of the parabola through three points.
fn parabolic_offset(l: f64, c: f64, r: f64) -> f64 {
    let den = l - 2.0 * c + r;
    if den == 0.0 {
        0.0
    } else {
        (0.5 * (l - r) / den).clamp(-0.5, 0.5)
    }
}

/// Refined positions and heights of local maxima of `y` inside `range`.
fn extrema(y: &[f64], range: std::ops::Range<usize>, maxima: bool, floor: f64) -> Vec<(f64, f64)> {
    let sign = if maxima { 1.0 } else { -1.0 };
    let lo = range.start.max(1);
    let hi = range.end.min(y.len() - 1);
    (lo..hi)
        .filter(|&i| {
            let (l, c, r) = (sign * y[i - 1], sign * y[i], sign * y[i + 1]);
            c > l && c >= r && (!maxima || y[i] >= floor)
        })
        .map(|i| {
            let off = parabolic_offset(y[i - 1], y[i], y[i + 1]);
            (i as f64 + off, y[i])
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_gap(positions: &[(f64, f64)]) -> f64 {
    median(positions.windows(2).map(|w| w[1].0 - w[0].0).collect())
}

fn grid_x(grid: &Grid, fractional_index: f64) -> f64 {
    grid.center() + (fractional_index - 0.5 * (grid.len() - 1) as f64) * grid.step()
}

/// Fringe metrics of the analysis window.
///
/// Spacing is the median gap between dark fringes: under a sinc² envelope
/// the bright-fringe maxima are pulled toward the centre while the zeros of
/// a two-beam pattern stay put.
pub fn metrics(p: &Pattern) -> Result<PatternMetrics> {
    let win = p.window();
    let y = &p.intensity;
    let floor = PEAK_FLOOR * p.max_intensity();
    let peaks = extrema(y, win.clone(), true, floor);
    if peaks.len() < 3 {
        return Err(Error::TooFewFringes { found: peaks.len() });
    }
    let troughs = extrema(y, win.clone(), false, 0.0);
    let spacing_samples = if troughs.len() >= 3 {
        median_gap(&troughs)
    } else {
        median_gap(&peaks)
    };

    let top = peaks.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let mid = 0.5 * (p.grid.len() - 1) as f64;
    let central = peaks
        .iter()
        .filter(|pk| pk.1 >= top * (1.0 - 1e-9))
        .min_by(|a, b| (a.0 - mid).abs().total_cmp(&(b.0 - mid).abs()))
        .map(|pk| pk.0)
        .unwrap_or(mid);

    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &v in &y[win] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let visibility = if hi + lo > 0.0 {
        (hi - lo) / (hi + lo)
    } else {
        0.0
    };

    Ok(PatternMetrics {
        central_max_x: grid_x(&p.grid, central),
        fringe_spacing: spacing_samples * p.grid.step(),
        visibility,
        n_fringes: peaks.len(),
    })
}

/// Shift of `a` relative to `b` in fringes, in `(−0.5, 0.5]`.
///
/// Taken from the peak of the cyclic cross-correlation of the mean-removed
/// windows, so a half-fringe shift is as well defined as a small one.
pub fn shift_fraction(a: &Pattern, b: &Pattern) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let win = a.window();
    let center = |p: &Pattern| -> Vec<f64> {
        let w = &p.intensity[win.clone()];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        w.iter().map(|v| v - mean).collect()
    };
    let (xa, xb) = (center(a), center(b));
    let n = xa.len();
    let corr = |lag: isize| -> f64 {
        (0..n)
            .map(|i| xa[i] * xb[(i as isize + lag).rem_euclid(n as isize) as usize])
            .sum()
    };
    let half = (n / 2) as isize;
    let lags: Vec<isize> = (-half + 1..=half).collect();
    let values: Vec<f64> = lags.iter().map(|&l| corr(l)).collect();
    let best = (0..values.len())
        .max_by(|&i, &j| values[i].total_cmp(&values[j]).then(j.cmp(&i)))
        .ok_or(Error::TooFewFringes { found: 0 })?;
    let at = |k: isize| corr(k);
    let l0 = lags[best];
    let offset = parabolic_offset(at(l0 - 1), values[best], at(l0 + 1));
    let lag = l0 as f64 + offset;

    let spacing = match (metrics(a), metrics(b)) {
        (Ok(ma), Ok(mb)) => 0.5 * (ma.fringe_spacing + mb.fringe_spacing),
        (Ok(m), Err(_)) | (Err(_), Ok(m)) => m.fringe_spacing,
        (Err(e), Err(_)) => return Err(e),
    };
    Ok(wrap_half(-lag * a.grid.step() / spacing))
}

/// Maps `v` into `(−0.5, 0.5]`.
pub fn wrap_half(v: f64) -> f64 {
    let w = v - v.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

/// Distance between two fringe fractions on the unit circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_half(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescale {
    pub scale: f64,
    pub residual: f64,
}

pub const RESCALE_RANGE: (f64, f64) = (0.8, 1.25);

/// Scale `s` minimising the relative RMS between `a(x)` and `b(s·x)` about
/// the grid centre, over the analysis window.
pub fn rescale_equivalence(a: &Pattern, b: &Pattern) -> Result<Rescale> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let win = a.window();
    let grid = a.grid;
    let c = grid.center();
    let norm = a.intensity[win.clone()]
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let sample_b = |x: f64| -> f64 {
        let fi = grid.index_of(x);
        if fi < 0.0 || fi > (grid.len() - 1) as f64 {
            return 0.0;
        }
        let i = (fi.floor() as usize).min(grid.len() - 2);
        let t = fi - i as f64;
        b.intensity[i] * (1.0 - t) + b.intensity[i + 1] * t
    };
    let residual = |s: f64| -> f64 {
        let ss: f64 = win
            .clone()
            .map(|i| {
                let x = grid.x(i);
                let d = a.intensity[i] - sample_b(c + s * (x - c));
                d * d
            })
            .sum();
        if norm > 0.0 {
            ss.sqrt() / norm
        } else {
            ss.sqrt()
        }
    };

    let (lo, hi) = RESCALE_RANGE;
    let steps = 180;
    let h = (hi - lo) / steps as f64;
    let mut best = (lo, residual(lo));
    for i in 1..=steps {
        let s = lo + i as f64 * h;
        let r = residual(s);
        if r < best.1 {
            best = (s, r);
        }
    }
    let (mut x0, mut x3) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = x3 - g * (x3 - x0);
    let mut x2 = x0 + g * (x3 - x0);
    let (mut f1, mut f2) = (residual(x1), residual(x2));
    while x3 - x0 > 1e-9 {
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - g * (x3 - x0);
            f1 = residual(x1);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + g * (x3 - x0);
            f2 = residual(x2);
        }
    }
    let (s, r) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let (s, r) = if r < best.1 { (s, r) } else { best };
    let unit = residual(1.0);
    Ok(if unit <= r {
        Rescale {
            scale: 1.0,
            residual: unit,
        }
    } else {
        Rescale {
            scale: s,
            residual: r,
        }
    })
}

/// Field parameter varied by [`visibility_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Toroid field strength.
    B,
    /// Flux of the first tube; a partner tube keeps its relative sign.
    Flux,
    /// Toroid winding thickness.
    Thickness,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(SweepParam::B),
            "flux" => Ok(SweepParam::Flux),
            "thickness" => Ok(SweepParam::Thickness),
            other => Err(Error::validation(
                "param",
                format!("expected B, flux or thickness, got `{other}`"),
            )),
        }
    }
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::B => "B",
            SweepParam::Flux => "flux",
            SweepParam::Thickness => "thickness",
        }
    }
}

/// Copy of `s` with `param` set to `value` in every matching component.
pub fn with_parameter(s: &Scenario, param: SweepParam, value: f64) -> Result<Scenario> {
    let mut out = s.clone();
    let mut touched = false;
    for m in out.field.components_mut() {
        match (param, m) {
            (SweepParam::B, FieldModel::ToroidBore(b)) => {
                b.b = value;
                touched = true;
            }
            (SweepParam::Thickness, FieldModel::ToroidBore(b)) => {
                b.thickness = value;
                touched = true;
            }
            (SweepParam::Flux, FieldModel::FluxTube(t)) => {
                t.flux = value;
                touched = true;
            }
            (SweepParam::Flux, FieldModel::FluxTubePair(ts)) => {
                let ratio = if ts[0].flux != 0.0 {
                    (ts[1].flux / ts[0].flux).signum()
                } else {
                    -1.0
                };
                ts[0].flux = value;
                ts[1].flux = ratio * value;
                touched = true;
            }
            _ => {}
        }
    }
    if !touched {
        return Err(Error::validation(
            "param",
            format!("scenario `{}` has no {} parameter", s.name, param.as_str()),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when the pattern has too few fringes to measure.
    pub metrics: Option<PatternMetrics>,
    pub slit_phase_difference: f64,
}

/// One row per value, computed concurrently, returned in input order.
pub fn visibility_sweep(s: &Scenario, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .map(|&v| {
            let sc = with_parameter(s, param, v)?;
            let res = run_with(&sc, RunOptions { parallel: false })?;
            let metrics = match metrics(&res.pattern) {
                Ok(m) => Some(m),
                Err(Error::TooFewFringes { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                value: v,
                metrics,
                slit_phase_difference: res.slit_phase_difference(),
            })
        })
        .collect()
}
