//! Adaptive Gauss-Kronrod (7-15) quadrature.
//!
//! The tolerance is relative to the integral of `|f|` over the interval, so
//! integrands that cancel to zero still terminate. An optional absolute floor
//! stops refinement of integrands that are pure rounding noise. Each bisection halves the
//! local tolerance; a piece is accepted when the Gauss and Kronrod estimates
//! agree to within it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    /// Absolute error below which any estimate is accepted.
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Every interval is bisected at least this many times before the
    /// error test is trusted.
    pub min_depth: u32,
    /// Hard cap on integrand evaluations per call.
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_depth: 40,
            min_depth: 1,
            max_evals: 2_000_000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights of the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Rule {
    kronrod: f64,
    gauss: f64,
    abs: f64,
}

struct State<'a, F> {
    f: &'a mut F,
    opts: QuadOptions,
    evals: usize,
}

impl<F: FnMut(f64) -> f64> State<'_, F> {
    fn rule(&mut self, a: f64, b: f64) -> Rule {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.evals += 15;
        let fc = (self.f)(c);
        let mut kronrod = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        let mut abs = WGK[7] * fc.abs();
        for j in 0..7 {
            let dx = h * XGK[j];
            let (f1, f2) = ((self.f)(c - dx), (self.f)(c + dx));
            kronrod += WGK[j] * (f1 + f2);
            abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        Rule {
            kronrod: kronrod * h,
            gauss: gauss * h,
            abs: (abs * h).abs(),
        }
    }

    fn recurse(&mut self, a: f64, b: f64, r: Rule, tol: f64, depth: u32) -> Result<f64> {
        let err = (r.kronrod - r.gauss).abs();
        if depth >= self.opts.min_depth && err <= tol {
            return Ok(r.kronrod);
        }
        if depth >= self.opts.max_depth || self.evals >= self.opts.max_evals || !err.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                lo: a,
                hi: b,
                depth,
            });
        }
        let m = 0.5 * (a + b);
        let left = self.rule(a, m);
        let right = self.rule(m, b);
        let l = self.recurse(a, m, left, 0.5 * tol, depth + 1)?;
        let r = self.recurse(m, b, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut st = State {
        f: &mut f,
        opts,
        evals: 0,
    };
    let whole = st.rule(a, b);
    let tol = (opts.rel_tol * whole.abs).max(opts.abs_tol);
    st.recurse(a, b, whole, tol, 0)
}

/// Integrates over `[0, 1]`, splitting at the given interior breakpoints
/// (values outside `(0, 1)` are ignored).
pub fn integrate_unit_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|s| *s > 0.0 && *s < 1.0)
        .collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = 0.0;
    for hi in cuts.into_iter().chain(std::iter::once(1.0)) {
        total += integrate(&mut f, lo, hi, opts)?;
        lo = hi;
    }
    Ok(total)
}
