//! Catalog of interferometer experiments and the pipeline that runs them.
//!
//! Builtin geometry, in units of the source wavelength `λ0`:
//!
//! | item          | value                                    |
//! |---------------|------------------------------------------|
//! | source        | `(0, −400)`, plane wave along +z         |
//! | wavefront     | 2048 samples over `x ∈ [−40, 40]`        |
//! | double slit   | `z = 0`, centres `±25`, width 10         |
//! | screen        | `z = 5000`, `x ∈ [−1500, 1500]`, 1201 samples |
//!
//! Reduced-mode builtins use `λ0 = 1`; SI builtins use `λ0 = 0.03 Å`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::analysis::Pattern;
use crate::error::{Error, Result};
use crate::fields::{FieldModel, FluxTube, GaugeFunction, ToroidBore, UniformScalar};
use crate::geom::{Point, Vec2};
use crate::grid::Grid;
use crate::kinematics::SourceRef;
use crate::propagation::{
    apply_aperture, combine_channels, emit, huygens_step, potential_phase, transport, Aperture,
    ChannelMap, LocalVariant, PathPhaseModel, Slit, StepOptions, Wavefront,
};
use crate::units::{UnitMode, ELECTRON_MASS_SI, ELEMENTARY_CHARGE_SI};

pub const BUILTIN_NAMES: [&str; 8] = [
    "free",
    "fig1_1",
    "fig1_2",
    "fig1_3",
    "fig1_4",
    "fig1_5",
    "fig1_6",
    "scalar_vt",
];

/// Electron wavelength of the SI builtins.
pub const SI_WAVELENGTH: f64 = 3e-12;

/// Particle and incident plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub charge: f64,
    pub mass: f64,
    pub x: f64,
    pub z: f64,
    pub t0: f64,
    pub wavelength: f64,
    /// Angle of `k0` from the +z axis, radians.
    pub angle: f64,
    /// Frequency `ν0`; derived from the free dispersion relation when absent.
    pub frequency: Option<f64>,
    pub samples: usize,
    pub half_width: f64,
}

impl SourceSpec {
    pub fn k0(&self) -> Vec2 {
        let k = 2.0 * PI / self.wavelength;
        Vec2::new(k * self.angle.sin(), k * self.angle.cos())
    }

    pub fn r0(&self) -> Point {
        Point::new(self.x, self.z, self.t0)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::centered(self.x, self.half_width, self.samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenSpec {
    pub z: f64,
    pub half_extent: f64,
    pub samples: usize,
}

impl ScreenSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::centered(0.0, self.half_extent, self.samples)
    }
}

/// Which part of the apparatus a toroid bore covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coverage {
    AllExceptSource,
    AfterSlit,
    SlitAndSource,
    SlitOnly,
    SourceOnly,
}

impl Coverage {
    pub const ALL: [Coverage; 5] = [
        Coverage::AllExceptSource,
        Coverage::AfterSlit,
        Coverage::SlitAndSource,
        Coverage::SlitOnly,
        Coverage::SourceOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Coverage::AllExceptSource => "all_except_source",
            Coverage::AfterSlit => "after_slit",
            Coverage::SlitAndSource => "slit_and_source",
            Coverage::SlitOnly => "slit_only",
            Coverage::SourceOnly => "source_only",
        }
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coverage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Coverage::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::validation("coverage", format!("unknown coverage `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub unit_mode: UnitMode,
    pub source: SourceSpec,
    pub apertures: Vec<Aperture>,
    pub field: FieldModel,
    pub coverage: Option<Coverage>,
    pub screen: ScreenSpec,
    pub model: PathPhaseModel,
    /// Channel decomposition used when the model is switched to the
    /// alternative prescription.
    pub channels: ChannelMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Spread each Huygens step over the rayon pool.
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { parallel: true }
    }
}

/// Potential phase along the axial ray from a slit centre to the screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitDiagnostic {
    pub center: f64,
    pub phase: f64,
    pub length: f64,
    pub phase_per_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub pattern: Pattern,
    pub model_used: String,
    pub field_summary: String,
    pub slits: Vec<SlitDiagnostic>,
    pub time: f64,
}

impl ScenarioResult {
    /// Phase of the last slit's axial ray minus that of the first.
    pub fn slit_phase_difference(&self) -> f64 {
        match (self.slits.first(), self.slits.last()) {
            (Some(a), Some(b)) => b.phase - a.phase,
            _ => 0.0,
        }
    }
}

impl Scenario {
    pub fn source_ref(&self) -> Result<SourceRef> {
        let consts = self.unit_mode.constants();
        let k0 = self.source.k0();
        let nu0 = self
            .source
            .frequency
            .unwrap_or_else(|| SourceRef::free_frequency(k0, self.source.mass, consts));
        SourceRef::new(
            self.source.charge,
            self.source.mass,
            self.source.r0(),
            k0,
            nu0,
            consts,
            &self.field,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.source;
        if !(s.wavelength > 0.0) {
            return Err(Error::NonpositiveWavelength(s.wavelength));
        }
        let finite = [
            s.charge,
            s.mass,
            s.x,
            s.z,
            s.t0,
            s.angle,
            s.half_width,
            s.wavelength,
        ]
        .iter()
        .all(|v| v.is_finite())
            && s.frequency.is_none_or(f64::is_finite);
        if !finite {
            return Err(Error::validation("source", "parameters must be finite"));
        }
        if s.angle.abs() >= 0.5 * PI {
            return Err(Error::validation(
                "source.angle",
                "must lie within (−π/2, π/2)",
            ));
        }
        if s.samples < 64 {
            return Err(Error::validation(
                "source.samples",
                "need at least 64 samples",
            ));
        }
        s.grid()?;
        if self.screen.samples < 64 {
            return Err(Error::validation(
                "screen.samples",
                "need at least 64 samples",
            ));
        }
        if !self.screen.z.is_finite() {
            return Err(Error::validation("screen.z", "must be finite"));
        }
        self.screen.grid()?;
        if self.apertures.is_empty() {
            return Err(Error::validation("apertures", "need at least one aperture"));
        }
        let mut upstream = s.z;
        for a in &self.apertures {
            a.validate()?;
            if !(a.z > upstream) {
                return Err(Error::validation(
                    "aperture.z",
                    format!(
                        "apertures must lie downstream of the source and of each other (z = {})",
                        a.z
                    ),
                ));
            }
            upstream = a.z;
        }
        if !(self.screen.z > upstream) {
            return Err(Error::validation(
                "screen.z",
                format!("must exceed every aperture z, got {}", self.screen.z),
            ));
        }
        self.field.validate()?;
        if self.coverage.is_some() && !self.field.contains_toroid() {
            return Err(Error::validation(
                "coverage",
                "only valid with a toroid field",
            ));
        }
        let n_slits = self.apertures[0].slits.len();
        if let PathPhaseModel::AlternativeMinimal(map) = &self.model {
            map.validate(n_slits)?;
        }
        if !self.channels.paths.is_empty() {
            self.channels.validate(n_slits)?;
        }
        self.source_ref()?;
        Ok(())
    }

    /// Selects the path-phase model by name (`local`, `topological`,
    /// `alternative`).
    pub fn set_model(&mut self, name: &str, variant: LocalVariant) -> Result<()> {
        self.model = match name {
            "local" => PathPhaseModel::LocalWavefront { variant },
            "topological" => PathPhaseModel::TopologicalAB,
            "alternative" => PathPhaseModel::AlternativeMinimal(self.channels.clone()),
            other => {
                return Err(Error::validation(
                    "model",
                    format!("expected local, topological or alternative, got `{other}`"),
                ))
            }
        };
        Ok(())
    }

    pub fn with_model(&self, name: &str, variant: LocalVariant) -> Result<Scenario> {
        let mut s = self.clone();
        s.set_model(name, variant)?;
        Ok(s)
    }

    /// The same experiment with every potential removed.
    pub fn free_counterpart(&self) -> Scenario {
        Scenario {
            name: format!("{}/vacuum", self.name),
            field: FieldModel::Vacuum,
            coverage: None,
            ..self.clone()
        }
    }

    /// The same experiment with `g` applied to its field.
    pub fn gauged(&self, g: &GaugeFunction) -> Scenario {
        Scenario {
            name: format!("{}+{}", self.name, g.name()),
            field: crate::fields::apply_gauge(&self.field, g),
            ..self.clone()
        }
    }

    /// The gauge catalog scaled to this scenario: `S` in units of `ħ/q`,
    /// lengths in units of the wavelength and the screen distance.
    pub fn gauge_catalog(&self) -> Vec<GaugeFunction> {
        let consts = self.unit_mode.constants();
        let unit = if self.source.charge != 0.0 {
            consts.hbar / self.source.charge
        } else {
            consts.hbar
        };
        let k = self.source.k0().norm();
        let l = self.screen.z - self.apertures.first().map_or(0.0, |a| a.z);
        vec![
            GaugeFunction::Constant { c: 0.7 * unit },
            GaugeFunction::Linear {
                a: Vec2::new(0.05 * k * unit, 0.1 * k * unit),
            },
            GaugeFunction::GaussianBump {
                center: Vec2::new(0.0, 0.5 * l),
                width: 0.25 * l,
                height: 3.0 * unit,
            },
            GaugeFunction::TimeLinear { rate: 2.0 * unit },
        ]
    }

    pub fn gauge_by_name(&self, name: &str) -> Result<GaugeFunction> {
        self.gauge_catalog()
            .into_iter()
            .find(|g| g.name() == name)
            .ok_or_else(|| {
                Error::validation(
                    "gauge",
                    format!("expected constant, linear, bump or timelinear, got `{name}`"),
                )
            })
    }
}

fn reduced_source(scale: f64, charge: f64, mass: f64) -> SourceSpec {
    SourceSpec {
        charge,
        mass,
        x: 0.0,
        z: -400.0 * scale,
        t0: 0.0,
        wavelength: scale,
        angle: 0.0,
        frequency: None,
        samples: 2048,
        half_width: 40.0 * scale,
    }
}

/// Representative paths: source → first slit of the channel → screen centre.
pub fn default_channels(
    source: &SourceSpec,
    aperture: &Aperture,
    screen: &ScreenSpec,
    channel_of_slit: Vec<usize>,
) -> ChannelMap {
    let n = channel_of_slit.iter().copied().max().map_or(0, |m| m + 1);
    let paths = (0..n)
        .map(|c| {
            let slit = channel_of_slit
                .iter()
                .position(|&ch| ch == c)
                .map(|i| aperture.slits[i].center)
                .unwrap_or(0.0);
            vec![
                Vec2::new(source.x, source.z),
                Vec2::new(slit, aperture.z),
                Vec2::new(0.0, screen.z),
            ]
        })
        .collect();
    ChannelMap {
        channel_of_slit,
        paths,
    }
}

fn double_slit(
    name: &str,
    mode: UnitMode,
    field: FieldModel,
    model: PathPhaseModel,
    channels: usize,
) -> Scenario {
    let (scale, charge, mass) = match mode {
        UnitMode::Reduced => (1.0, 1.0, 1.0),
        UnitMode::Si => (SI_WAVELENGTH, ELEMENTARY_CHARGE_SI, ELECTRON_MASS_SI),
    };
    let source = reduced_source(scale, charge, mass);
    let aperture = Aperture {
        z: 0.0,
        slits: vec![
            Slit {
                center: -25.0 * scale,
                width: 10.0 * scale,
            },
            Slit {
                center: 25.0 * scale,
                width: 10.0 * scale,
            },
        ],
    };
    let screen = ScreenSpec {
        z: 5000.0 * scale,
        half_extent: 1500.0 * scale,
        samples: 1201,
    };
    let assign = if channels == 2 {
        vec![0, 1]
    } else {
        vec![0, 0]
    };
    let channels = default_channels(&source, &aperture, &screen, assign);
    Scenario {
        name: name.to_string(),
        unit_mode: mode,
        source,
        apertures: vec![aperture],
        field,
        coverage: None,
        screen,
        model,
        channels,
    }
}

/// Axial extent of the fig1_5 bore for each coverage, in units of `λ0`.
/// The edge ramps are centred on these bounds.
fn coverage_extent(c: Coverage, z_src: f64, screen_z: f64, ramp: f64) -> (f64, f64) {
    match c {
        Coverage::AllExceptSource => (0.5 * z_src, 1.1 * screen_z),
        Coverage::AfterSlit => (-0.5 * ramp, 1.1 * screen_z),
        Coverage::SlitAndSource => (1.5 * z_src, 100.0),
        Coverage::SlitOnly => (-100.0, 100.0),
        Coverage::SourceOnly => (1.5 * z_src, 0.5 * z_src),
    }
}

fn fig1_5(coverage: Coverage) -> Scenario {
    let l = SI_WAVELENGTH;
    let (z_src, screen_z) = (-400.0, 5000.0);
    let nominal_ramp = 0.011 * screen_z;
    let (lo, hi) = coverage_extent(coverage, z_src, screen_z, nominal_ramp);
    let ramp = if coverage == Coverage::AfterSlit {
        nominal_ramp
    } else {
        0.01 * (hi - lo)
    };
    let bore = ToroidBore {
        z_lo: lo * l,
        z_hi: hi * l,
        x_lo: -3000.0 * l,
        x_hi: 3000.0 * l,
        b: 0.01,
        thickness: 0.01,
        edge_ramp: ramp * l,
    };
    let name = if coverage == Coverage::AfterSlit {
        "fig1_5".to_string()
    } else {
        format!("fig1_5@{coverage}")
    };
    let mut s = double_slit(
        &name,
        UnitMode::Si,
        FieldModel::ToroidBore(bore),
        PathPhaseModel::LocalWavefront {
            variant: LocalVariant::Magnitude,
        },
        1,
    );
    s.coverage = Some(coverage);
    s
}

/// Builtin scenario by name. `fig1_5@<coverage>` selects a toroid coverage
/// variant of fig1_5.
pub fn builtin(name: &str) -> Result<Scenario> {
    let reduced = UnitMode::Reduced;
    let topo = PathPhaseModel::TopologicalAB;
    let half_quantum = PI; // h / (2q) with h = 2π, q = 1
    let tube = |x: f64, z: f64, flux: f64| FluxTube::new(Vec2::new(x, z), 2.0, flux);
    let s = match name {
        "free" => double_slit(name, reduced, FieldModel::Vacuum, topo, 1),
        "fig1_1" => double_slit(
            name,
            reduced,
            FieldModel::FluxTube(tube(0.0, 10.0, half_quantum)),
            topo,
            2,
        ),
        "fig1_2" => double_slit(
            name,
            reduced,
            FieldModel::FluxTubePair([
                tube(0.0, 10.0, half_quantum),
                tube(-80.0, 10.0, -half_quantum),
            ]),
            topo,
            2,
        ),
        "fig1_3" => double_slit(
            name,
            reduced,
            FieldModel::FluxTubePair([
                tube(5.0, -50.0, half_quantum),
                tube(-5.0, -50.0, -half_quantum),
            ]),
            PathPhaseModel::LocalWavefront {
                variant: LocalVariant::Magnitude,
            },
            2,
        ),
        "fig1_4" => double_slit(
            name,
            reduced,
            FieldModel::FluxTubePair([
                tube(10.0, -100.0, half_quantum),
                tube(-10.0, -100.0, -half_quantum),
            ]),
            PathPhaseModel::LocalWavefront {
                variant: LocalVariant::Magnitude,
            },
            2,
        ),
        "fig1_5" => fig1_5(Coverage::AfterSlit),
        "fig1_6" => {
            let l = SI_WAVELENGTH;
            let ramp = 10.0 * l;
            let bore = ToroidBore {
                z_lo: -0.5 * ramp,
                z_hi: 5500.0 * l,
                x_lo: 0.0,
                x_hi: 3000.0 * l,
                b: 0.01,
                thickness: 0.01,
                edge_ramp: ramp,
            };
            double_slit(name, UnitMode::Si, FieldModel::ToroidBore(bore), topo, 2)
        }
        "scalar_vt" => double_slit(
            name,
            reduced,
            FieldModel::UniformScalar(UniformScalar {
                region: None,
                volts: 1.0,
                ramp: 0.5,
            }),
            PathPhaseModel::LocalWavefront {
                variant: LocalVariant::Magnitude,
            },
            1,
        ),
        other => match other.strip_prefix("fig1_5@") {
            Some(c) => fig1_5(
                c.parse()
                    .map_err(|_| Error::UnknownScenario(other.to_string()))?,
            ),
            None => return Err(Error::UnknownScenario(other.to_string())),
        },
    };
    Ok(s)
}

/// All builtin names including the coverage variants.
pub fn builtin_names_with_variants() -> Vec<String> {
    let mut v: Vec<String> = BUILTIN_NAMES.iter().map(|s| s.to_string()).collect();
    v.extend(
        Coverage::ALL
            .iter()
            .filter(|c| **c != Coverage::AfterSlit)
            .map(|c| format!("fig1_5@{c}")),
    );
    v
}

fn propagate(
    s: &Scenario,
    field: &FieldModel,
    model: &PathPhaseModel,
    src: &SourceRef,
    first_mask: &Aperture,
    t: f64,
    opts: RunOptions,
) -> Result<Wavefront> {
    let step = StepOptions {
        t,
        parallel: opts.parallel,
    };
    let grid = s.source.grid()?;
    let w = emit(src, field, model, s.source.z, grid, t)?;
    let mut w = transport(&w, s.apertures[0].z, field, model, t)?;
    w = apply_aperture(&w, first_mask)?;
    for a in &s.apertures[1..] {
        w = huygens_step(&w, a.z, grid, field, model, step)?;
        w = apply_aperture(&w, a)?;
    }
    huygens_step(&w, s.screen.z, s.screen.grid()?, field, model, step)
}

fn slit_diagnostics(s: &Scenario, src: &SourceRef, t: f64) -> Result<Vec<SlitDiagnostic>> {
    let model = match &s.model {
        PathPhaseModel::AlternativeMinimal(_) => PathPhaseModel::TopologicalAB,
        m => m.clone(),
    };
    let ap = &s.apertures[0];
    let length = s.screen.z - ap.z;
    ap.slits
        .iter()
        .map(|slit| {
            let a = Vec2::new(slit.center, ap.z);
            let b = Vec2::new(slit.center, s.screen.z);
            let phase = potential_phase(&model, &s.field, src, a, b, t)?;
            Ok(SlitDiagnostic {
                center: slit.center,
                phase,
                length,
                phase_per_length: phase / length,
            })
        })
        .collect()
}

/// Runs the scenario with the field evaluated at time `t`.
pub fn run_at(s: &Scenario, t: f64, opts: RunOptions) -> Result<ScenarioResult> {
    s.validate()?;
    if !t.is_finite() {
        return Err(Error::validation("t", "must be finite"));
    }
    let src = s.source_ref()?;
    let screen = match &s.model {
        PathPhaseModel::AlternativeMinimal(map) => {
            let channels = (0..map.n_channels())
                .map(|c| {
                    let mask = s.apertures[0].subset(&map.slits_of(c));
                    propagate(s, &s.field, &s.model, &src, &mask, t, opts)
                })
                .collect::<Result<Vec<_>>>()?;
            combine_channels(&channels, map, &s.field, &src, t)?
        }
        model => propagate(s, &s.field, model, &src, &s.apertures[0], t, opts)?,
    };
    let pattern = Pattern::new(
        screen.grid,
        screen.intensity(),
        s.name.clone(),
        s.model.label(),
    )?;
    Ok(ScenarioResult {
        pattern,
        model_used: s.model.label(),
        field_summary: s.field.summary(),
        slits: slit_diagnostics(s, &src, t)?,
        time: t,
    })
}

pub fn run_with(s: &Scenario, opts: RunOptions) -> Result<ScenarioResult> {
    run_at(s, s.source.t0, opts)
}

pub fn run(s: &Scenario) -> Result<ScenarioResult> {
    run_with(s, RunOptions::default())
}

/// One result per time in `ts`.
pub fn run_time_series(s: &Scenario, ts: &[f64], opts: RunOptions) -> Result<Vec<ScenarioResult>> {
    ts.iter().map(|&t| run_at(s, t, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for name in builtin_names_with_variants() {
            let s = builtin(&name).unwrap();
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
        assert!(matches!(builtin("fig9"), Err(Error::UnknownScenario(_))));
        assert!(matches!(
            builtin("fig1_5@nowhere"),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn defaults() {
        let free = builtin("free").unwrap();
        assert_eq!(free.field, FieldModel::Vacuum);
        assert_eq!(free.unit_mode, UnitMode::Reduced);
        assert_eq!(free.apertures[0].slits.len(), 2);
        let f11 = builtin("fig1_1").unwrap();
        let h = f11.unit_mode.constants().h;
        match f11.field {
            FieldModel::FluxTube(t) => {
                assert!((t.flux - h / (2.0 * f11.source.charge)).abs() < 1e-15)
            }
            _ => panic!(),
        }
        let f15 = builtin("fig1_5").unwrap();
        assert_eq!(f15.unit_mode, UnitMode::Si);
        assert_eq!(f15.source.wavelength, 3e-12);
        match f15.field {
            FieldModel::ToroidBore(b) => assert_eq!((b.b, b.thickness), (0.01, 0.01)),
            _ => panic!(),
        }
    }

    #[test]
    fn coverage_requires_toroid() {
        let mut s = builtin("free").unwrap();
        s.coverage = Some(Coverage::SlitOnly);
        assert!(s.validate().unwrap_err().is_validation());
    }

    #[test]
    fn screen_must_be_downstream() {
        let mut s = builtin("free").unwrap();
        s.screen.z = -1.0;
        assert!(s.validate().is_err());
        let mut s = builtin("free").unwrap();
        s.screen.samples = 10;
        assert!(s.validate().is_err());
    }

    #[test]
    fn fig1_6_diagnostic_difference() {
        let s = builtin("fig1_6").unwrap();
        let src = s.source_ref().unwrap();
        let d = slit_diagnostics(&s, &src, 0.0).unwrap();
        let c = s.unit_mode.constants();
        let expect = s.source.charge * 0.01 * 0.01 / c.hbar;
        let diff = d[1].phase_per_length - d[0].phase_per_length;
        assert!((diff - expect).abs() < 1e-9 * expect, "{diff} vs {expect}");
    }
}
