//! Analytic electromagnetic potentials.
//!
//! Every potential the simulator evaluates is one of the [`FieldModel`]
//! variants below. Conventions:
//!
//! * the plane is `(x, z)`, x transverse and z axial, flux tubes pierce it;
//! * positive flux circulates `A` counter-clockwise when x points right and
//!   z points up, so `∮ A·dl` around a tube taken counter-clockwise is `+Φ`;
//! * all vector potentials are static; time enters only through
//!   [`UniformScalar`] ramps and [`GaugeFunction::TimeLinear`].

mod gauge;
mod line;

pub use gauge::GaugeFunction;
pub use line::{
    closed_path_phase_factor, line_integral_a, line_integral_a_numeric, segment_integral_a, Route,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Point, Vec2};

/// Potentials at one point: `a` in tesla·metre, `phi` in volts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PotentialSample {
    pub a: Vec2,
    pub phi: f64,
}

impl std::ops::Add for PotentialSample {
    type Output = PotentialSample;
    fn add(self, o: PotentialSample) -> PotentialSample {
        PotentialSample {
            a: self.a + o.a,
            phi: self.phi + o.phi,
        }
    }
}

/// Idealised infinite solenoid of radius `radius` carrying `flux` webers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxTube {
    pub center: Vec2,
    pub radius: f64,
    pub flux: f64,
}

impl FluxTube {
    pub fn new(center: Vec2, radius: f64, flux: f64) -> Self {
        Self {
            center,
            radius,
            flux,
        }
    }

    pub fn vector_potential(&self, r: Vec2) -> Vec2 {
        let d = r - self.center;
        let rho_sq = d.norm_sq();
        if rho_sq == 0.0 {
            return Vec2::ZERO;
        }
        let r_sq = self.radius * self.radius;
        // Outside: Φ/(2πρ) θ̂; inside: Φρ/(2πR²) θ̂; θ̂ = perp(d)/ρ.
        let denom = if rho_sq >= r_sq { rho_sq } else { r_sq };
        d.perp() * (self.flux / (2.0 * PI * denom))
    }

    /// Parameters `s ∈ (0, 1)` where `a + s (b - a)` crosses the tube wall.
    pub(crate) fn crossings(&self, a: Vec2, b: Vec2) -> Vec<f64> {
        let d = b - a;
        let f = a - self.center;
        let qa = d.norm_sq();
        if qa == 0.0 {
            return Vec::new();
        }
        let qb = 2.0 * f.dot(d);
        let qc = f.norm_sq() - self.radius * self.radius;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        // Stable quadratic roots.
        let qq = -0.5 * (qb + qb.signum() * sq);
        let mut roots = Vec::with_capacity(2);
        if qq != 0.0 {
            roots.push(qq / qa);
            roots.push(qc / qq);
        } else {
            roots.push(sq / (2.0 * qa));
            roots.push(-sq / (2.0 * qa));
        }
        roots.retain(|s| *s > 0.0 && *s < 1.0);
        roots.sort_by(|x, y| x.total_cmp(y));
        roots
    }

    /// Exact `∫ A·dl` along the straight segment `a → b`.
    pub(crate) fn segment_integral(&self, a: Vec2, b: Vec2) -> f64 {
        let mut knots = vec![0.0];
        knots.extend(self.crossings(a, b));
        knots.push(1.0);
        let r_sq = self.radius * self.radius;
        let mut total = 0.0;
        let d = b - a;
        for w in knots.windows(2) {
            let p = a.lerp(b, w[0]) - self.center;
            // Taking the cross product with the step rather than the end
            // point avoids cancellation on short segments.
            let step = if w[1] - w[0] == 1.0 {
                d
            } else {
                d * (w[1] - w[0])
            };
            let mid = a.lerp(b, 0.5 * (w[0] + w[1])) - self.center;
            if mid.norm_sq() < r_sq {
                // A·dl = Φ/(2πR²) (r × dl), linear along a chord.
                total += self.flux / (2.0 * PI * r_sq) * p.cross(step);
            } else {
                total += self.flux / (2.0 * PI) * p.cross(step).atan2(p.dot(p + step));
            }
        }
        total
    }

    fn validate(&self) -> Result<()> {
        if !(self.center.is_finite() && self.radius.is_finite() && self.flux.is_finite()) {
            return Err(Error::validation("flux_tube", "parameters must be finite"));
        }
        if self.radius <= 0.0 {
            return Err(Error::validation(
                "flux_tube.radius",
                format!("must be positive, got {}", self.radius),
            ));
        }
        Ok(())
    }
}

/// Cosine edge blend of half-width `ramp/2` centred on `s = 0`.
fn rise(s: f64, ramp: f64) -> f64 {
    let h = 0.5 * ramp;
    if s >= h {
        1.0
    } else if s <= -h {
        0.0
    } else {
        0.5 * (1.0 + (PI * s / ramp).sin())
    }
}

/// `∫_{-∞}^{s} rise`. Equals `s` once past the blend, like a hard step.
fn rise_integral(s: f64, ramp: f64) -> f64 {
    let h = 0.5 * ramp;
    if s >= h {
        s
    } else if s <= -h {
        0.0
    } else {
        0.5 * (s + h) - ramp / (2.0 * PI) * (PI * s / ramp).cos()
    }
}

/// Smooth indicator of `[lo, hi]` and its antiderivative.
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    hi: f64,
    ramp: f64,
}

impl Window {
    fn weight(&self, u: f64) -> f64 {
        rise(u - self.lo, self.ramp) * rise(self.hi - u, self.ramp)
    }

    fn antiderivative(&self, u: f64) -> f64 {
        let mid = 0.5 * (self.lo + self.hi);
        if u <= mid {
            rise_integral(u - self.lo, self.ramp)
        } else {
            (self.hi - self.lo) - rise_integral(self.hi - u, self.ramp)
        }
    }

    fn in_plateau(&self, u: f64) -> bool {
        u >= self.lo + 0.5 * self.ramp && u <= self.hi - 0.5 * self.ramp
    }

    fn below_support(&self, u: f64) -> bool {
        u <= self.lo - 0.5 * self.ramp
    }

    fn above_support(&self, u: f64) -> bool {
        u >= self.hi + 0.5 * self.ramp
    }

    fn edges(&self) -> [f64; 4] {
        let h = 0.5 * self.ramp;
        [self.lo - h, self.lo + h, self.hi - h, self.hi + h]
    }
}

/// Bore of a long toroidal solenoid: uniform axial `A = B × thickness`
/// inside `[x_lo, x_hi] × [z_lo, z_hi]`, zero outside, blended by a cosine
/// ramp of width `edge_ramp` centred on each boundary.
///
/// Because the blend is centred, `∫ A_z dz` across a boundary equals that of
/// a hard edge placed on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToroidBore {
    pub z_lo: f64,
    pub z_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub b: f64,
    pub thickness: f64,
    pub edge_ramp: f64,
}

impl ToroidBore {
    /// Bore with the default edge ramp of 1% of the axial length.
    pub fn new(z: (f64, f64), x: (f64, f64), b: f64, thickness: f64) -> Self {
        Self {
            z_lo: z.0,
            z_hi: z.1,
            x_lo: x.0,
            x_hi: x.1,
            b,
            thickness,
            edge_ramp: 0.01 * (z.1 - z.0),
        }
    }

    /// Interior magnitude of `A_z`.
    pub fn interior_a(&self) -> f64 {
        self.b * self.thickness
    }

    fn zw(&self) -> Window {
        Window {
            lo: self.z_lo,
            hi: self.z_hi,
            ramp: self.edge_ramp,
        }
    }

    fn xw(&self) -> Window {
        Window {
            lo: self.x_lo,
            hi: self.x_hi,
            ramp: self.edge_ramp,
        }
    }

    pub fn vector_potential(&self, r: Vec2) -> Vec2 {
        let w = self.zw().weight(r.z) * self.xw().weight(r.x);
        Vec2::new(0.0, self.interior_a() * w)
    }

    /// Closed-form `∫ A·dl` when the segment stays inside one plateau or
    /// outside the support; `None` when quadrature is needed.
    pub(crate) fn segment_integral(&self, a: Vec2, b: Vec2) -> Option<f64> {
        let (xw, zw) = (self.xw(), self.zw());
        let dz = b.z - a.z;
        if dz == 0.0 {
            return Some(0.0);
        }
        if (xw.below_support(a.x) && xw.below_support(b.x))
            || (xw.above_support(a.x) && xw.above_support(b.x))
            || (zw.below_support(a.z) && zw.below_support(b.z))
            || (zw.above_support(a.z) && zw.above_support(b.z))
        {
            return Some(0.0);
        }
        let a0 = self.interior_a();
        let x_plateau = xw.in_plateau(a.x) && xw.in_plateau(b.x);
        let z_plateau = zw.in_plateau(a.z) && zw.in_plateau(b.z);
        if x_plateau && z_plateau {
            return Some(a0 * dz);
        }
        if x_plateau {
            return Some(a0 * (zw.antiderivative(b.z) - zw.antiderivative(a.z)));
        }
        if z_plateau {
            let dx = b.x - a.x;
            if dx.abs() <= 1e-9 * (self.x_hi - self.x_lo) {
                return Some(a0 * xw.weight(0.5 * (a.x + b.x)) * dz);
            }
            return Some(a0 * dz / dx * (xw.antiderivative(b.x) - xw.antiderivative(a.x)));
        }
        None
    }

    fn uniform_on(&self, a: Vec2, b: Vec2) -> Option<Vec2> {
        let (xw, zw) = (self.xw(), self.zw());
        let outside = (xw.below_support(a.x) && xw.below_support(b.x))
            || (xw.above_support(a.x) && xw.above_support(b.x))
            || (zw.below_support(a.z) && zw.below_support(b.z))
            || (zw.above_support(a.z) && zw.above_support(b.z));
        if outside {
            Some(Vec2::ZERO)
        } else if xw.in_plateau(a.x)
            && xw.in_plateau(b.x)
            && zw.in_plateau(a.z)
            && zw.in_plateau(b.z)
        {
            Some(Vec2::new(0.0, self.interior_a()))
        } else {
            None
        }
    }

    pub(crate) fn crossings(&self, a: Vec2, b: Vec2) -> Vec<f64> {
        let mut out = Vec::new();
        for (lo, hi, w) in [(a.x, b.x, self.xw()), (a.z, b.z, self.zw())] {
            if hi != lo {
                for e in w.edges() {
                    out.push((e - lo) / (hi - lo));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let vals = [
            self.z_lo,
            self.z_hi,
            self.x_lo,
            self.x_hi,
            self.b,
            self.thickness,
            self.edge_ramp,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("toroid", "parameters must be finite"));
        }
        if self.z_hi <= self.z_lo || self.x_hi <= self.x_lo {
            return Err(Error::validation("toroid", "extents must satisfy lo < hi"));
        }
        if self.thickness <= 0.0 {
            return Err(Error::validation("toroid.thickness", "must be positive"));
        }
        let min_extent = (self.z_hi - self.z_lo).min(self.x_hi - self.x_lo);
        if self.edge_ramp < 0.0 || self.edge_ramp > min_extent {
            return Err(Error::validation(
                "toroid.edge_ramp",
                format!("must lie in [0, {min_extent}]"),
            ));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

impl Rect {
    pub fn contains(&self, r: Vec2) -> bool {
        r.x >= self.x_lo && r.x <= self.x_hi && r.z >= self.z_lo && r.z <= self.z_hi
    }
}

/// Scalar potential `volts + ramp · t` inside `region` (everywhere when
/// `None`), zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformScalar {
    pub region: Option<Rect>,
    pub volts: f64,
    pub ramp: f64,
}

impl UniformScalar {
    pub fn potential(&self, p: Point) -> f64 {
        match self.region {
            Some(rect) if !rect.contains(p.r()) => 0.0,
            _ => self.volts + self.ramp * p.t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum FieldModel {
    #[default]
    Vacuum,
    FluxTube(FluxTube),
    FluxTubePair([FluxTube; 2]),
    ToroidBore(ToroidBore),
    UniformScalar(UniformScalar),
    PureGauge(GaugeFunction),
    Superposition(Vec<FieldModel>),
}

impl FieldModel {
    /// Potentials at `p`. Superposition is the component-wise sum.
    pub fn sample(&self, p: Point) -> PotentialSample {
        match self {
            FieldModel::PureGauge(g) => PotentialSample {
                a: g.gradient(p),
                phi: -g.time_derivative(p),
            },
            FieldModel::Superposition(parts) => parts
                .iter()
                .fold(PotentialSample::default(), |acc, m| acc + m.sample(p)),
            _ => self.physical_sample(p),
        }
    }

    /// Potentials excluding every declared pure-gauge component.
    pub fn physical_sample(&self, p: Point) -> PotentialSample {
        match self {
            FieldModel::Vacuum | FieldModel::PureGauge(_) => PotentialSample::default(),
            FieldModel::FluxTube(t) => PotentialSample {
                a: t.vector_potential(p.r()),
                phi: 0.0,
            },
            FieldModel::FluxTubePair(ts) => PotentialSample {
                a: ts[0].vector_potential(p.r()) + ts[1].vector_potential(p.r()),
                phi: 0.0,
            },
            FieldModel::ToroidBore(b) => PotentialSample {
                a: b.vector_potential(p.r()),
                phi: 0.0,
            },
            FieldModel::UniformScalar(s) => PotentialSample {
                a: Vec2::ZERO,
                phi: s.potential(p),
            },
            FieldModel::Superposition(parts) => {
                parts.iter().fold(PotentialSample::default(), |acc, m| {
                    acc + m.physical_sample(p)
                })
            }
        }
    }

    /// Sum of the gauge functions `S` of all pure-gauge components at `p`.
    pub fn gauge_scalar(&self, p: Point) -> f64 {
        match self {
            FieldModel::PureGauge(g) => g.value(p),
            FieldModel::Superposition(parts) => parts.iter().map(|m| m.gauge_scalar(p)).sum(),
            _ => 0.0,
        }
    }

    /// Whether any non-gauge component carries a vector potential.
    pub fn has_physical_vector_potential(&self) -> bool {
        match self {
            FieldModel::FluxTube(_) | FieldModel::FluxTubePair(_) | FieldModel::ToroidBore(_) => {
                true
            }
            FieldModel::Superposition(parts) => {
                parts.iter().any(|m| m.has_physical_vector_potential())
            }
            _ => false,
        }
    }

    pub fn has_gauge(&self) -> bool {
        match self {
            FieldModel::PureGauge(_) => true,
            FieldModel::Superposition(parts) => parts.iter().any(|m| m.has_gauge()),
            _ => false,
        }
    }

    /// The physical vector potential along `a → b` when it is provably
    /// constant there, e.g. inside a bore plateau or clear of every tube.
    pub fn uniform_physical_a(&self, a: Vec2, b: Vec2) -> Option<Vec2> {
        match self {
            FieldModel::Vacuum | FieldModel::UniformScalar(_) | FieldModel::PureGauge(_) => {
                Some(Vec2::ZERO)
            }
            FieldModel::FluxTube(_) | FieldModel::FluxTubePair(_) => None,
            FieldModel::ToroidBore(bore) => bore.uniform_on(a, b),
            FieldModel::Superposition(parts) => {
                let mut total = Vec2::ZERO;
                for m in parts {
                    total += m.uniform_physical_a(a, b)?;
                }
                Some(total)
            }
        }
    }

    /// Parameters in `(0, 1)` along `a → b` where some physical component
    /// loses smoothness (tube walls, toroid ramp edges).
    pub fn breakpoints(&self, a: Vec2, b: Vec2) -> Vec<f64> {
        match self {
            FieldModel::FluxTube(t) => t.crossings(a, b),
            FieldModel::FluxTubePair(ts) => {
                let mut v = ts[0].crossings(a, b);
                v.extend(ts[1].crossings(a, b));
                v
            }
            FieldModel::ToroidBore(bore) => bore.crossings(a, b),
            FieldModel::Superposition(parts) => {
                parts.iter().flat_map(|m| m.breakpoints(a, b)).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldModel::Vacuum => Ok(()),
            FieldModel::FluxTube(t) => t.validate(),
            FieldModel::FluxTubePair(ts) => ts.iter().try_for_each(FluxTube::validate),
            FieldModel::ToroidBore(b) => b.validate(),
            FieldModel::UniformScalar(s) => {
                let finite = s.volts.is_finite()
                    && s.ramp.is_finite()
                    && s.region.is_none_or(|r| {
                        [r.x_lo, r.x_hi, r.z_lo, r.z_hi]
                            .iter()
                            .all(|v| v.is_finite())
                            && r.x_lo < r.x_hi
                            && r.z_lo < r.z_hi
                    });
                if finite {
                    Ok(())
                } else {
                    Err(Error::validation(
                        "scalar",
                        "invalid scalar potential region",
                    ))
                }
            }
            FieldModel::PureGauge(g) => g.validate(),
            FieldModel::Superposition(parts) => parts.iter().try_for_each(FieldModel::validate),
        }
    }

    /// Depth-first list of the leaf components.
    pub fn components(&self) -> Vec<&FieldModel> {
        match self {
            FieldModel::Superposition(parts) => parts.iter().flat_map(|m| m.components()).collect(),
            other => vec![other],
        }
    }

    pub fn components_mut(&mut self) -> Vec<&mut FieldModel> {
        match self {
            FieldModel::Superposition(parts) => {
                parts.iter_mut().flat_map(|m| m.components_mut()).collect()
            }
            other => vec![other],
        }
    }

    pub fn contains_toroid(&self) -> bool {
        self.components()
            .iter()
            .any(|m| matches!(m, FieldModel::ToroidBore(_)))
    }

    /// One-line human-readable description.
    pub fn summary(&self) -> String {
        match self {
            FieldModel::Vacuum => "vacuum".to_string(),
            FieldModel::FluxTube(t) => format!(
                "flux tube Φ={:e} at ({:e}, {:e}) R={:e}",
                t.flux, t.center.x, t.center.z, t.radius
            ),
            FieldModel::FluxTubePair(ts) => format!(
                "flux tube pair Φ=({:e}, {:e}) at x=({:e}, {:e})",
                ts[0].flux, ts[1].flux, ts[0].center.x, ts[1].center.x
            ),
            FieldModel::ToroidBore(b) => format!(
                "toroid bore B={:e} T thickness={:e} z=[{:e}, {:e}] x=[{:e}, {:e}]",
                b.b, b.thickness, b.z_lo, b.z_hi, b.x_lo, b.x_hi
            ),
            FieldModel::UniformScalar(s) => {
                format!("scalar V={:e} ramp={:e}/s", s.volts, s.ramp)
            }
            FieldModel::PureGauge(g) => format!("pure gauge ({})", g.name()),
            FieldModel::Superposition(parts) => parts
                .iter()
                .map(FieldModel::summary)
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }
}

/// `A → A + ∇S`, `φ → φ - ∂S/∂t`.
pub fn apply_gauge(model: &FieldModel, g: &GaugeFunction) -> FieldModel {
    let mut parts = match model {
        FieldModel::Superposition(parts) => parts.clone(),
        other => vec![other.clone()],
    };
    parts.push(FieldModel::PureGauge(g.clone()));
    FieldModel::Superposition(parts)
}
