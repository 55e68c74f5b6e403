//! Sampled wavefronts and their propagation through a potential landscape.
//!
//! A wavefront is born as a plane wave on a transverse line at the source
//! station, carried along straight rays to the first aperture, masked, and
//! then stepped between stations with the two-dimensional Huygens kernel
//! `exp(i Φ) / sqrt(L)`. How the potentials enter `Φ` is selected by
//! [`PathPhaseModel`].
//!
//! Absolute phases at electron wavelengths reach 1e4–1e9 rad, beyond what a
//! double can resolve to a fraction of a radian. Every phase is therefore
//! formed relative to a reference path before exponentiation, and path
//! lengths enter only through `L − dz = dx² / (L + dz)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{line_integral_a, segment_integral_a, FieldModel, Route};
use crate::geom::{Point, Vec2};
use crate::grid::Grid;
use crate::kinematics::SourceRef;
use crate::quadrature::{integrate_unit_pieces, QuadOptions};
use crate::sum::ComplexSum;

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefront {
    pub z: f64,
    pub grid: Grid,
    pub amps: Vec<Complex64>,
    pub src: SourceRef,
}

impl Wavefront {
    pub fn new(z: f64, grid: Grid, amps: Vec<Complex64>, src: SourceRef) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::validation(
                "wavefront",
                format!("{} amplitudes for {} abscissae", amps.len(), grid.len()),
            ));
        }
        if !z.is_finite() || amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::validation(
                "wavefront",
                "non-finite station or amplitude",
            ));
        }
        Ok(Self { z, grid, amps, src })
    }

    pub fn xs(&self) -> Vec<f64> {
        self.grid.xs().collect()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * c).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slit {
    pub center: f64,
    pub width: f64,
}

impl Slit {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() <= 0.5 * self.width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aperture {
    pub z: f64,
    pub slits: Vec<Slit>,
}

impl Aperture {
    pub fn validate(&self) -> Result<()> {
        if !self.z.is_finite() {
            return Err(Error::validation("aperture.z", "must be finite"));
        }
        if self.slits.is_empty() {
            return Err(Error::validation("aperture", "needs at least one slit"));
        }
        for s in &self.slits {
            if !(s.width > 0.0 && s.width.is_finite() && s.center.is_finite()) {
                return Err(Error::validation(
                    "slit",
                    format!("width must be positive and finite, got {}", s.width),
                ));
            }
        }
        let mut sorted = self.slits.clone();
        sorted.sort_by(|a, b| a.center.total_cmp(&b.center));
        for w in sorted.windows(2) {
            if w[0].center + 0.5 * w[0].width >= w[1].center - 0.5 * w[1].width {
                return Err(Error::validation(
                    "slit",
                    format!("slits at {} and {} overlap", w[0].center, w[1].center),
                ));
            }
        }
        Ok(())
    }

    /// Same aperture with only the listed slits open.
    pub fn subset(&self, keep: &[usize]) -> Aperture {
        Aperture {
            z: self.z,
            slits: keep.iter().map(|&i| self.slits[i]).collect(),
        }
    }
}

/// Zeroes every sample outside the open slits.
pub fn apply_aperture(w: &Wavefront, a: &Aperture) -> Result<Wavefront> {
    if (w.z - a.z).abs() > 1e-12 {
        return Err(Error::StationMismatch {
            wavefront_z: w.z,
            aperture_z: a.z,
        });
    }
    let amps = w
        .grid
        .xs()
        .zip(&w.amps)
        .map(|(x, &amp)| {
            if a.slits.iter().any(|s| s.contains(x)) {
                amp
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(Wavefront { amps, ..w.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalVariant {
    /// Isotropic medium of index `|k(r)| / |k0|`.
    #[default]
    Magnitude,
    /// Only the component of `k(r)` along the path counts.
    Projected,
}

impl LocalVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            LocalVariant::Magnitude => "magnitude",
            LocalVariant::Projected => "projected",
        }
    }
}

impl std::str::FromStr for LocalVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "magnitude" => Ok(LocalVariant::Magnitude),
            "projected" => Ok(LocalVariant::Projected),
            other => Err(Error::validation(
                "local_variant",
                format!("expected `magnitude` or `projected`, got `{other}`"),
            )),
        }
    }
}

/// Assignment of the first aperture's slits to channels, each channel with
/// a representative path. All paths must share their end points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelMap {
    pub channel_of_slit: Vec<usize>,
    pub paths: Vec<Vec<Vec2>>,
}

impl ChannelMap {
    pub fn n_channels(&self) -> usize {
        self.paths.len()
    }

    /// Slit indices of channel `c`, in slit order.
    pub fn slits_of(&self, c: usize) -> Vec<usize> {
        self.channel_of_slit
            .iter()
            .enumerate()
            .filter(|(_, &ch)| ch == c)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn validate(&self, n_slits: usize) -> Result<()> {
        if self.channel_of_slit.len() != n_slits {
            return Err(Error::ChannelMismatch(format!(
                "{} slits but {} channel assignments",
                n_slits,
                self.channel_of_slit.len()
            )));
        }
        if self.paths.is_empty() {
            return Err(Error::ChannelMismatch("no channels declared".into()));
        }
        if let Some(&c) = self
            .channel_of_slit
            .iter()
            .find(|&&c| c >= self.paths.len())
        {
            return Err(Error::ChannelMismatch(format!(
                "slit assigned to undeclared channel {c}"
            )));
        }
        for c in 0..self.paths.len() {
            if self.slits_of(c).is_empty() {
                return Err(Error::ChannelMismatch(format!("channel {c} has no slits")));
            }
        }
        let first = &self.paths[0];
        for (c, p) in self.paths.iter().enumerate() {
            if p.len() < 2 || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::ChannelMismatch(format!(
                    "channel {c} path needs at least two finite points"
                )));
            }
            let scale = (first[first.len() - 1] - first[0])
                .norm()
                .max(f64::MIN_POSITIVE);
            let gap = (p[0] - first[0])
                .norm()
                .max((p[p.len() - 1] - first[first.len() - 1]).norm());
            if gap > 1e-12 * scale {
                return Err(Error::ChannelMismatch(format!(
                    "channel {c} path does not share end points with channel 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathPhaseModel {
    LocalWavefront { variant: LocalVariant },
    TopologicalAB,
    AlternativeMinimal(ChannelMap),
}

impl PathPhaseModel {
    pub fn name(&self) -> &'static str {
        match self {
            PathPhaseModel::LocalWavefront { .. } => "local",
            PathPhaseModel::TopologicalAB => "topological",
            PathPhaseModel::AlternativeMinimal(_) => "alternative",
        }
    }

    /// Name including the local variant, e.g. `local/magnitude`.
    pub fn label(&self) -> String {
        match self {
            PathPhaseModel::LocalWavefront { variant } => format!("local/{}", variant.as_str()),
            other => other.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
}

/// Phase accumulated along `seg`: `|k0| L` plus the potential contribution.
pub fn path_phase(
    model: &PathPhaseModel,
    field: &FieldModel,
    src: &SourceRef,
    seg: Segment,
) -> Result<f64> {
    let (a, b) = (seg.from.r(), seg.to.r());
    let len = (b - a).norm();
    if !(len > 0.0) {
        return Err(Error::validation("segment", "must have nonzero length"));
    }
    Ok(src.k0.norm() * len + potential_phase(model, field, src, a, b, seg.from.t)?)
}

/// Part of the phase along `a → b` caused by the potentials.
pub fn potential_phase(
    model: &PathPhaseModel,
    field: &FieldModel,
    src: &SourceRef,
    a: Vec2,
    b: Vec2,
    t: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let coupling = src.q / src.consts.hbar;
    match model {
        PathPhaseModel::AlternativeMinimal(_) => Ok(0.0),
        PathPhaseModel::TopologicalAB => {
            Ok(coupling * segment_integral_a(field, a, b, t, Route::Analytic)?)
        }
        PathPhaseModel::LocalWavefront {
            variant: LocalVariant::Projected,
        } => {
            let a0 = src.source_potentials().a;
            let integral = segment_integral_a(field, a, b, t, Route::Analytic)?;
            Ok(coupling * (integral - a0.dot(b - a)))
        }
        PathPhaseModel::LocalWavefront {
            variant: LocalVariant::Magnitude,
        } => {
            let gauge = if field.has_gauge() {
                field.gauge_scalar(Point::at(b, t)) - field.gauge_scalar(Point::at(a, t))
            } else {
                0.0
            };
            Ok(coupling * gauge + medium_phase(field, src, a, b, t)?)
        }
    }
}

/// Absolute phase error, in radians, accepted per segment by the local
/// magnitude integrand.
const MEDIUM_PHASE_ABS_TOL: f64 = 1e-13;

/// `∫ (|k0 + δ(r)| − |k0|) dl` with `δ = q (A(r) − A(r0)) / ħ` over the
/// physical potentials.
fn medium_phase(field: &FieldModel, src: &SourceRef, a: Vec2, b: Vec2, t: f64) -> Result<f64> {
    let coupling = src.q / src.consts.hbar;
    let a0 = src.physical_source_potentials().a;
    let k0 = src.k0;
    let k0n = k0.norm();
    let excess = |a_here: Vec2| {
        let d = (a_here - a0) * coupling;
        if d == Vec2::ZERO {
            return 0.0;
        }
        (2.0 * k0.dot(d) + d.norm_sq()) / ((k0 + d).norm() + k0n)
    };
    let len = (b - a).norm();
    if let Some(uniform) = field.uniform_physical_a(a, b) {
        return Ok(excess(uniform) * len);
    }
    let bp = field.breakpoints(a, b);
    let unit = integrate_unit_pieces(
        |s| excess(field.physical_sample(Point::at(a.lerp(b, s), t)).a),
        &bp,
        QuadOptions {
            abs_tol: MEDIUM_PHASE_ABS_TOL / len,
            ..QuadOptions::default()
        },
    )?;
    Ok(unit * len)
}

/// Whether `model` attaches any potential phase in `field` relative to `src`.
fn has_potential_phase(model: &PathPhaseModel, field: &FieldModel, src: &SourceRef) -> bool {
    match model {
        PathPhaseModel::AlternativeMinimal(_) => false,
        PathPhaseModel::TopologicalAB => field.has_physical_vector_potential() || field.has_gauge(),
        PathPhaseModel::LocalWavefront { variant } => {
            field.has_physical_vector_potential()
                || field.has_gauge()
                || match variant {
                    LocalVariant::Projected => src.source_potentials().a != Vec2::ZERO,
                    LocalVariant::Magnitude => src.physical_source_potentials().a != Vec2::ZERO,
                }
        }
    }
}

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Plane wave `exp(i k0·(r − r0))` on the line `z`, phased by the potentials
/// along the straight ray from the birth point. The phase is taken relative
/// to the grid center.
pub fn emit(
    src: &SourceRef,
    field: &FieldModel,
    model: &PathPhaseModel,
    z: f64,
    grid: Grid,
    t: f64,
) -> Result<Wavefront> {
    let r0 = src.r0.r();
    let with_potential = has_potential_phase(model, field, src);
    let pot = |x: f64| -> Result<f64> {
        if with_potential {
            potential_phase(model, field, src, r0, Vec2::new(x, z), t)
        } else {
            Ok(0.0)
        }
    };
    let xc = grid.center();
    let p_ref = pot(xc)?;
    let amps = grid
        .xs()
        .map(|x| Ok(cis(src.k0.x * (x - xc) + (pot(x)? - p_ref))))
        .collect::<Result<Vec<_>>>()?;
    Wavefront::new(z, grid, amps, src.clone())
}

/// Carries every sample along its own axial ray to `z_to`. Only the phase
/// relative to the central ray is kept.
pub fn transport(
    w: &Wavefront,
    z_to: f64,
    field: &FieldModel,
    model: &PathPhaseModel,
    t: f64,
) -> Result<Wavefront> {
    if !(z_to >= w.z) {
        return Err(Error::validation(
            "transport",
            "target station lies upstream",
        ));
    }
    if !has_potential_phase(model, field, &w.src) || z_to == w.z {
        return Ok(Wavefront {
            z: z_to,
            ..w.clone()
        });
    }
    let pot = |x: f64| {
        potential_phase(
            model,
            field,
            &w.src,
            Vec2::new(x, w.z),
            Vec2::new(x, z_to),
            t,
        )
    };
    let p_ref = pot(w.grid.center())?;
    let amps = w
        .grid
        .xs()
        .zip(&w.amps)
        .map(|(x, &amp)| {
            if amp == Complex64::new(0.0, 0.0) {
                Ok(amp)
            } else {
                Ok(amp * cis(pot(x)? - p_ref))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Wavefront {
        z: z_to,
        amps,
        ..w.clone()
    })
}

/// `L − dz` for `L = sqrt(dx² + dz²)`, without cancellation.
fn excess_length(dx: f64, dz: f64, len: f64) -> f64 {
    dx * dx / (len + dz)
}

/// Options for [`huygens_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub t: f64,
    /// Spread target points over the rayon pool.
    pub parallel: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            t: 0.0,
            parallel: true,
        }
    }
}

/// `ψ(b) = Σ_j ψ_j exp(i Φ_jb) / sqrt(L_jb) Δx` onto the line `target_z`.
///
/// Each target sums its sources in index order, so the result does not
/// depend on how targets are scheduled across threads.
pub fn huygens_step(
    w: &Wavefront,
    target_z: f64,
    target: Grid,
    field: &FieldModel,
    model: &PathPhaseModel,
    opts: StepOptions,
) -> Result<Wavefront> {
    let dz = target_z - w.z;
    if !(dz > 0.0) {
        return Err(Error::validation(
            "target_z",
            format!("must lie downstream of the wavefront at {}", w.z),
        ));
    }
    let h = w.grid.step();
    let gap = (target.first() - w.grid.last())
        .max(w.grid.first() - target.last())
        .max(0.0);
    let closest = gap.hypot(dz);
    if closest < 10.0 * h {
        return Err(Error::DegenerateGeometry {
            distance: closest,
            limit: 10.0 * h,
        });
    }

    let src = &w.src;
    let k = src.k0.norm();
    let with_potential = has_potential_phase(model, field, src);
    let pot = |xa: f64, xb: f64| -> Result<f64> {
        if with_potential {
            potential_phase(
                model,
                field,
                src,
                Vec2::new(xa, w.z),
                Vec2::new(xb, target_z),
                opts.t,
            )
        } else {
            Ok(0.0)
        }
    };
    let (xc, xt) = (w.grid.center(), target.center());
    let ref_len = (xt - xc).hypot(dz);
    let ref_excess = excess_length(xt - xc, dz, ref_len);
    let p_ref = pot(xc, xt)?;

    let sources: Vec<(f64, Complex64)> = w
        .grid
        .xs()
        .zip(&w.amps)
        .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
        .map(|(x, &a)| (x, a))
        .collect();

    let one = |i: usize| -> Result<Complex64> {
        let xb = target.x(i);
        let mut acc = ComplexSum::new();
        for &(xa, amp) in &sources {
            let dx = xb - xa;
            let len = dx.hypot(dz);
            let phase = k * (excess_length(dx, dz, len) - ref_excess) + (pot(xa, xb)? - p_ref);
            acc.add(amp * cis(phase) / len.sqrt());
        }
        Ok(acc.value() * h)
    };

    let amps: Vec<Complex64> = if opts.parallel {
        (0..target.len())
            .into_par_iter()
            .map(one)
            .collect::<Result<_>>()?
    } else {
        (0..target.len()).map(one).collect::<Result<_>>()?
    };
    Wavefront::new(target_z, target, amps, src.clone())
}

/// Channel phase offsets `(q/ħ) ∫ A·dl` along each representative path,
/// relative to channel 0.
pub fn channel_offsets(
    map: &ChannelMap,
    field: &FieldModel,
    src: &SourceRef,
    t: f64,
) -> Result<Vec<f64>> {
    let coupling = src.q / src.consts.hbar;
    let integrals = map
        .paths
        .iter()
        .map(|p| {
            let pts: Vec<Point> = p.iter().map(|&r| Point::at(r, t)).collect();
            line_integral_a(field, &pts, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(integrals
        .iter()
        .map(|v| coupling * (v - integrals[0]))
        .collect())
}

/// `Σ_c ψ_c exp(i Δφ_c)` over per-channel screen wavefronts.
pub fn combine_channels(
    channels: &[Wavefront],
    map: &ChannelMap,
    field: &FieldModel,
    src: &SourceRef,
    t: f64,
) -> Result<Wavefront> {
    let first = channels
        .first()
        .ok_or_else(|| Error::ChannelMismatch("no channel wavefronts".into()))?;
    if channels.len() != map.n_channels() {
        return Err(Error::ChannelMismatch(format!(
            "{} wavefronts for {} channels",
            channels.len(),
            map.n_channels()
        )));
    }
    if channels
        .iter()
        .any(|c| c.z != first.z || c.grid != first.grid || c.src != first.src)
    {
        return Err(Error::ChannelMismatch(
            "channel wavefronts differ in station, grid or source".into(),
        ));
    }
    let offsets = channel_offsets(map, field, src, t)?;
    let factors: Vec<Complex64> = offsets.iter().map(|&p| cis(p)).collect();
    let amps = (0..first.amps.len())
        .map(|i| {
            let mut acc = ComplexSum::new();
            for (c, f) in channels.iter().zip(&factors) {
                acc.add(c.amps[i] * f);
            }
            acc.value()
        })
        .collect();
    Ok(Wavefront {
        amps,
        ..first.clone()
    })
}
