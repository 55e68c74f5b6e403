//! Scenario files: sectioned `key = value` text.
//!
//! ```text
//! name = my_run
//!
//! [source]
//! unit_mode = reduced        # si | reduced
//! charge = 1
//! mass = 1
//! x = 0                      # optional, default 0
//! z = -400
//! t0 = 0                     # optional, default 0
//! wavelength = 1
//! angle = 0                  # optional, radians from +z
//! frequency = 1.01           # optional, default from the dispersion relation
//! samples = 2048
//! half_width = 40
//!
//! [apertures]
//! z = 0                      # starts an aperture
//! slit = -25 10              # centre width
//! slit = 25 10
//!
//! [field]                    # empty section: vacuum
//! kind = tube                # tube | tube_pair | toroid | scalar | gauge | vacuum
//! center = 0 10
//! radius = 2
//! flux = 3.14159
//! coverage = after_slit      # optional, toroid fields only
//!
//! [screen]
//! z = 5000
//! half_extent = 1500
//! samples = 1201
//!
//! [model]
//! model = topological        # local | topological | alternative
//! local_variant = magnitude  # magnitude | projected
//! channel_of_slit = 0 1
//! channel_path = 0 -400 -25 0 0 5000   # x z pairs, one line per channel
//! ```
//!
//! Keys are case-sensitive, unknown or repeated keys are errors, and `#`
//! starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;

use abwave_core::fields::{FieldModel, FluxTube, GaugeFunction, Rect, ToroidBore, UniformScalar};
use abwave_core::propagation::{Aperture, ChannelMap, LocalVariant, PathPhaseModel, Slit};
use abwave_core::scenarios::{default_channels, Coverage, Scenario, ScreenSpec, SourceSpec};
use abwave_core::{UnitMode, Vec2};

use crate::error::{CliError, CliResult};

const SECTIONS: [&str; 5] = ["source", "apertures", "field", "screen", "model"];

#[derive(Debug, Clone, Copy)]
struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

/// Keyed lines of a section, checked against an allow-list.
struct Keys<'a> {
    section: &'a str,
    header_line: usize,
    map: HashMap<&'a str, Entry<'a>>,
}

impl<'a> Keys<'a> {
    fn new(
        section: &'a str,
        header_line: usize,
        entries: &[Entry<'a>],
        allowed: &[&str],
    ) -> CliResult<Self> {
        let mut map = HashMap::new();
        for e in entries {
            if !allowed.contains(&e.key) {
                return Err(CliError::parse(
                    e.line,
                    format!("unknown key `{}` in [{section}]", e.key),
                ));
            }
            if map.insert(e.key, *e).is_some() {
                return Err(CliError::parse(
                    e.line,
                    format!("duplicate key `{}`", e.key),
                ));
            }
        }
        Ok(Self {
            section,
            header_line,
            map,
        })
    }

    fn opt(&self, key: &str) -> Option<Entry<'a>> {
        self.map.get(key).copied()
    }

    fn req(&self, key: &str) -> CliResult<Entry<'a>> {
        self.opt(key).ok_or_else(|| {
            CliError::parse(
                self.header_line,
                format!("missing required key `{key}` in [{}]", self.section),
            )
        })
    }

    fn f64(&self, key: &str) -> CliResult<f64> {
        number(self.req(key)?)
    }

    fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        self.opt(key).map_or(Ok(default), number)
    }

    fn usize(&self, key: &str) -> CliResult<usize> {
        let e = self.req(key)?;
        e.value.parse().map_err(|_| {
            CliError::parse(
                e.line,
                format!("`{}` expects a count, got `{}`", e.key, e.value),
            )
        })
    }

    fn floats(&self, key: &str, n: usize) -> CliResult<Vec<f64>> {
        floats(self.req(key)?, Some(n))
    }
}

fn number(e: Entry<'_>) -> CliResult<f64> {
    e.value.parse().map_err(|_| {
        CliError::parse(
            e.line,
            format!("`{}` expects a number, got `{}`", e.key, e.value),
        )
    })
}

fn floats(e: Entry<'_>, n: Option<usize>) -> CliResult<Vec<f64>> {
    let v = e
        .value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| {
                CliError::parse(e.line, format!("`{}` expects numbers, got `{t}`", e.key))
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(n) = n {
        if v.len() != n {
            return Err(CliError::parse(
                e.line,
                format!("`{}` expects {n} numbers, got {}", e.key, v.len()),
            ));
        }
    }
    Ok(v)
}

fn vec2(v: &[f64]) -> Vec2 {
    Vec2::new(v[0], v[1])
}

struct Section<'a> {
    name: &'a str,
    line: usize,
    entries: Vec<Entry<'a>>,
}

fn split_sections(text: &str) -> CliResult<(Vec<Entry<'_>>, Vec<Section<'_>>)> {
    let mut preamble = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| {
                    CliError::parse(line, format!("malformed section header `{content}`"))
                })?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(CliError::parse(line, format!("unknown section [{name}]")));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(CliError::parse(line, format!("duplicate section [{name}]")));
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            CliError::parse(line, format!("expected `key = value`, got `{content}`"))
        })?;
        let entry = Entry {
            line,
            key: key.trim(),
            value: value.trim(),
        };
        if entry.key.is_empty() {
            return Err(CliError::parse(line, "empty key"));
        }
        match sections.last_mut() {
            Some(s) => s.entries.push(entry),
            None => preamble.push(entry),
        }
    }
    Ok((preamble, sections))
}

fn parse_source(s: &Section<'_>) -> CliResult<(UnitMode, SourceSpec)> {
    let k = Keys::new(
        "source",
        s.line,
        &s.entries,
        &[
            "unit_mode",
            "charge",
            "mass",
            "x",
            "z",
            "t0",
            "wavelength",
            "angle",
            "frequency",
            "samples",
            "half_width",
        ],
    )?;
    let mode_entry = k.req("unit_mode")?;
    let mode: UnitMode = mode_entry
        .value
        .parse()
        .map_err(|e: abwave_core::Error| CliError::parse(mode_entry.line, e.to_string()))?;
    let frequency = k.opt("frequency").map(number).transpose()?;
    Ok((
        mode,
        SourceSpec {
            charge: k.f64("charge")?,
            mass: k.f64("mass")?,
            x: k.f64_or("x", 0.0)?,
            z: k.f64("z")?,
            t0: k.f64_or("t0", 0.0)?,
            wavelength: k.f64("wavelength")?,
            angle: k.f64_or("angle", 0.0)?,
            frequency,
            samples: k.usize("samples")?,
            half_width: k.f64("half_width")?,
        },
    ))
}

fn parse_apertures(s: &Section<'_>) -> CliResult<Vec<Aperture>> {
    let mut out: Vec<Aperture> = Vec::new();
    for e in &s.entries {
        match e.key {
            "z" => out.push(Aperture {
                z: number(*e)?,
                slits: Vec::new(),
            }),
            "slit" => {
                let v = floats(*e, Some(2))?;
                let ap = out
                    .last_mut()
                    .ok_or_else(|| CliError::parse(e.line, "`slit` before any aperture `z`"))?;
                ap.slits.push(Slit {
                    center: v[0],
                    width: v[1],
                });
            }
            other => {
                return Err(CliError::parse(
                    e.line,
                    format!("unknown key `{other}` in [apertures]"),
                ))
            }
        }
    }
    Ok(out)
}

fn parse_component(kind: Entry<'_>, entries: &[Entry<'_>]) -> CliResult<FieldModel> {
    let allowed: &[&str] =
        match kind.value {
            "vacuum" => &[],
            "tube" => &["center", "radius", "flux"],
            "tube_pair" => &["center1", "radius1", "flux1", "center2", "radius2", "flux2"],
            "toroid" => &["z_range", "x_range", "B", "thickness", "edge_ramp"],
            "scalar" => &["volts", "ramp", "region"],
            "gauge" => &["gauge", "c", "a", "center", "width", "height", "rate"],
            other => return Err(CliError::parse(
                kind.line,
                format!(
                    "unknown field kind `{other}` (tube, tube_pair, toroid, scalar, gauge, vacuum)"
                ),
            )),
        };
    let k = Keys::new("field", kind.line, entries, allowed)?;
    let tube = |suffix: &str| -> CliResult<FluxTube> {
        Ok(FluxTube::new(
            vec2(&k.floats(&format!("center{suffix}"), 2)?),
            k.f64(&format!("radius{suffix}"))?,
            k.f64(&format!("flux{suffix}"))?,
        ))
    };
    Ok(match kind.value {
        "vacuum" => FieldModel::Vacuum,
        "tube" => FieldModel::FluxTube(tube("")?),
        "tube_pair" => FieldModel::FluxTubePair([tube("1")?, tube("2")?]),
        "toroid" => {
            let z = k.floats("z_range", 2)?;
            let x = k.floats("x_range", 2)?;
            let mut bore =
                ToroidBore::new((z[0], z[1]), (x[0], x[1]), k.f64("B")?, k.f64("thickness")?);
            if let Some(e) = k.opt("edge_ramp") {
                bore.edge_ramp = number(e)?;
            }
            FieldModel::ToroidBore(bore)
        }
        "scalar" => {
            let region = match k.opt("region") {
                Some(e) => {
                    let r = floats(e, Some(4))?;
                    Some(Rect {
                        x_lo: r[0],
                        x_hi: r[1],
                        z_lo: r[2],
                        z_hi: r[3],
                    })
                }
                None => None,
            };
            FieldModel::UniformScalar(UniformScalar {
                region,
                volts: k.f64("volts")?,
                ramp: k.f64_or("ramp", 0.0)?,
            })
        }
        _ => {
            let g = k.req("gauge")?;
            let (needed, gauge): (&[&str], GaugeFunction) = match g.value {
                "constant" => (&["c"], GaugeFunction::Constant { c: k.f64("c")? }),
                "linear" => (
                    &["a"],
                    GaugeFunction::Linear {
                        a: vec2(&k.floats("a", 2)?),
                    },
                ),
                "bump" => (
                    &["center", "width", "height"],
                    GaugeFunction::GaussianBump {
                        center: vec2(&k.floats("center", 2)?),
                        width: k.f64("width")?,
                        height: k.f64("height")?,
                    },
                ),
                "timelinear" => (
                    &["rate"],
                    GaugeFunction::TimeLinear {
                        rate: k.f64("rate")?,
                    },
                ),
                other => {
                    return Err(CliError::parse(
                        g.line,
                        format!("unknown gauge `{other}` (constant, linear, bump, timelinear)"),
                    ))
                }
            };
            if let Some(e) = entries
                .iter()
                .find(|e| e.key != "gauge" && !needed.contains(&e.key))
            {
                return Err(CliError::parse(
                    e.line,
                    format!("key `{}` does not apply to a {} gauge", e.key, g.value),
                ));
            }
            FieldModel::PureGauge(gauge)
        }
    })
}

fn parse_field(s: &Section<'_>) -> CliResult<(FieldModel, Option<Coverage>)> {
    let mut coverage = None;
    let mut parts = Vec::new();
    let mut current: Option<(Entry, Vec<Entry>)> = None;
    for e in &s.entries {
        match e.key {
            "coverage" => {
                if coverage.is_some() {
                    return Err(CliError::parse(e.line, "duplicate key `coverage`"));
                }
                coverage = Some(
                    e.value
                        .parse::<Coverage>()
                        .map_err(|err| CliError::parse(e.line, err.to_string()))?,
                );
            }
            "kind" => {
                if let Some((kind, entries)) = current.take() {
                    parts.push(parse_component(kind, &entries)?);
                }
                current = Some((*e, Vec::new()));
            }
            _ => match current.as_mut() {
                Some((_, entries)) => entries.push(*e),
                None => {
                    return Err(CliError::parse(
                        e.line,
                        format!("key `{}` before any `kind` in [field]", e.key),
                    ))
                }
            },
        }
    }
    if let Some((kind, entries)) = current {
        parts.push(parse_component(kind, &entries)?);
    }
    let field = match parts.len() {
        0 => FieldModel::Vacuum,
        1 => parts.pop().unwrap_or_default(),
        _ => FieldModel::Superposition(parts),
    };
    Ok((field, coverage))
}

fn parse_screen(s: &Section<'_>) -> CliResult<ScreenSpec> {
    let k = Keys::new(
        "screen",
        s.line,
        &s.entries,
        &["z", "half_extent", "samples"],
    )?;
    Ok(ScreenSpec {
        z: k.f64("z")?,
        half_extent: k.f64("half_extent")?,
        samples: k.usize("samples")?,
    })
}

struct ModelSpec {
    name: String,
    line: usize,
    variant: LocalVariant,
    channel_of_slit: Option<(usize, Vec<usize>)>,
    paths: Vec<Vec<Vec2>>,
}

fn parse_model(s: &Section<'_>) -> CliResult<ModelSpec> {
    let single: Vec<Entry> = s
        .entries
        .iter()
        .copied()
        .filter(|e| e.key != "channel_path")
        .collect();
    let k = Keys::new(
        "model",
        s.line,
        &single,
        &["model", "local_variant", "channel_of_slit"],
    )?;
    let model = k.req("model")?;
    let variant = match k.opt("local_variant") {
        Some(e) => e
            .value
            .parse()
            .map_err(|err: abwave_core::Error| CliError::parse(e.line, err.to_string()))?,
        None => LocalVariant::Magnitude,
    };
    let channel_of_slit = k
        .opt("channel_of_slit")
        .map(|e| {
            e.value
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        CliError::parse(
                            e.line,
                            format!("`channel_of_slit` expects channel ids, got `{t}`"),
                        )
                    })
                })
                .collect::<CliResult<Vec<_>>>()
                .map(|v| (e.line, v))
        })
        .transpose()?;
    let paths = s
        .entries
        .iter()
        .filter(|e| e.key == "channel_path")
        .map(|e| {
            let v = floats(*e, None)?;
            if v.len() < 4 || v.len() % 2 != 0 {
                return Err(CliError::parse(
                    e.line,
                    "`channel_path` expects at least two `x z` pairs",
                ));
            }
            Ok(v.chunks(2).map(vec2).collect())
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ModelSpec {
        name: model.value.to_string(),
        line: model.line,
        variant,
        channel_of_slit,
        paths,
    })
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    let (preamble, sections) = split_sections(text)?;
    let pre = Keys::new("preamble", 1, &preamble, &["name"])?;
    let name = pre.opt("name").map_or("scenario", |e| e.value).to_string();
    let find = |n: &str| sections.iter().find(|s| s.name == n);
    let missing = |n: &str| {
        CliError::parse(
            text.lines().count().max(1),
            format!("missing section [{n}]"),
        )
    };

    let (unit_mode, source) = parse_source(find("source").ok_or_else(|| missing("source"))?)?;
    let apertures = parse_apertures(find("apertures").ok_or_else(|| missing("apertures"))?)?;
    let (field, coverage) = match find("field") {
        Some(s) => parse_field(s)?,
        None => (FieldModel::Vacuum, None),
    };
    let screen = parse_screen(find("screen").ok_or_else(|| missing("screen"))?)?;
    let model = match find("model") {
        Some(s) => parse_model(s)?,
        None => ModelSpec {
            name: "topological".into(),
            line: 1,
            variant: LocalVariant::Magnitude,
            channel_of_slit: None,
            paths: Vec::new(),
        },
    };

    let channels = match (&model.channel_of_slit, apertures.first()) {
        (Some((_, assign)), _) => ChannelMap {
            channel_of_slit: assign.clone(),
            paths: model.paths.clone(),
        },
        (None, Some(first)) if model.paths.is_empty() => {
            default_channels(&source, first, &screen, (0..first.slits.len()).collect())
        }
        (None, _) => {
            return Err(CliError::parse(
                model.line,
                "`channel_path` given without `channel_of_slit`",
            ))
        }
    };

    let mut scenario = Scenario {
        name,
        unit_mode,
        source,
        apertures,
        field,
        coverage,
        screen,
        model: PathPhaseModel::TopologicalAB,
        channels,
    };
    scenario
        .set_model(&model.name, model.variant)
        .map_err(|e| CliError::parse(model.line, e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Shortest decimal text that parses back to exactly `v`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn join(vs: &[f64]) -> String {
    vs.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ")
}

fn export_component(out: &mut String, m: &FieldModel) {
    let tube = |out: &mut String, t: &FluxTube, suffix: &str| {
        let _ = writeln!(out, "center{suffix} = {}", join(&[t.center.x, t.center.z]));
        let _ = writeln!(out, "radius{suffix} = {}", fmt_f64(t.radius));
        let _ = writeln!(out, "flux{suffix} = {}", fmt_f64(t.flux));
    };
    match m {
        FieldModel::Vacuum => out.push_str("kind = vacuum\n"),
        FieldModel::FluxTube(t) => {
            out.push_str("kind = tube\n");
            tube(out, t, "");
        }
        FieldModel::FluxTubePair(ts) => {
            out.push_str("kind = tube_pair\n");
            tube(out, &ts[0], "1");
            tube(out, &ts[1], "2");
        }
        FieldModel::ToroidBore(b) => {
            out.push_str("kind = toroid\n");
            let _ = writeln!(out, "z_range = {}", join(&[b.z_lo, b.z_hi]));
            let _ = writeln!(out, "x_range = {}", join(&[b.x_lo, b.x_hi]));
            let _ = writeln!(out, "B = {}", fmt_f64(b.b));
            let _ = writeln!(out, "thickness = {}", fmt_f64(b.thickness));
            let _ = writeln!(out, "edge_ramp = {}", fmt_f64(b.edge_ramp));
        }
        FieldModel::UniformScalar(s) => {
            out.push_str("kind = scalar\n");
            let _ = writeln!(out, "volts = {}", fmt_f64(s.volts));
            let _ = writeln!(out, "ramp = {}", fmt_f64(s.ramp));
            if let Some(r) = s.region {
                let _ = writeln!(out, "region = {}", join(&[r.x_lo, r.x_hi, r.z_lo, r.z_hi]));
            }
        }
        FieldModel::PureGauge(g) => {
            out.push_str("kind = gauge\n");
            let _ = writeln!(out, "gauge = {}", g.name());
            match g {
                GaugeFunction::Constant { c } => {
                    let _ = writeln!(out, "c = {}", fmt_f64(*c));
                }
                GaugeFunction::Linear { a } => {
                    let _ = writeln!(out, "a = {}", join(&[a.x, a.z]));
                }
                GaugeFunction::GaussianBump {
                    center,
                    width,
                    height,
                } => {
                    let _ = writeln!(out, "center = {}", join(&[center.x, center.z]));
                    let _ = writeln!(out, "width = {}", fmt_f64(*width));
                    let _ = writeln!(out, "height = {}", fmt_f64(*height));
                }
                GaugeFunction::TimeLinear { rate } => {
                    let _ = writeln!(out, "rate = {}", fmt_f64(*rate));
                }
            }
        }
        FieldModel::Superposition(parts) => {
            for p in parts {
                export_component(out, p);
            }
        }
    }
}

/// Scenario file text for `s`; [`parse_scenario`] reads it back unchanged.
pub fn export_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# abwave scenario");
    let _ = writeln!(out, "name = {}", s.name);
    let src = &s.source;
    out.push_str("\n[source]\n");
    let _ = writeln!(out, "unit_mode = {}", s.unit_mode);
    for (k, v) in [
        ("charge", src.charge),
        ("mass", src.mass),
        ("x", src.x),
        ("z", src.z),
        ("t0", src.t0),
        ("wavelength", src.wavelength),
        ("angle", src.angle),
    ] {
        let _ = writeln!(out, "{k} = {}", fmt_f64(v));
    }
    if let Some(f) = src.frequency {
        let _ = writeln!(out, "frequency = {}", fmt_f64(f));
    }
    let _ = writeln!(out, "samples = {}", src.samples);
    let _ = writeln!(out, "half_width = {}", fmt_f64(src.half_width));

    out.push_str("\n[apertures]\n");
    for a in &s.apertures {
        let _ = writeln!(out, "z = {}", fmt_f64(a.z));
        for sl in &a.slits {
            let _ = writeln!(out, "slit = {}", join(&[sl.center, sl.width]));
        }
    }

    out.push_str("\n[field]\n");
    if s.field != FieldModel::Vacuum {
        export_component(&mut out, &s.field);
    }
    if let Some(c) = s.coverage {
        let _ = writeln!(out, "coverage = {c}");
    }

    out.push_str("\n[screen]\n");
    let _ = writeln!(out, "z = {}", fmt_f64(s.screen.z));
    let _ = writeln!(out, "half_extent = {}", fmt_f64(s.screen.half_extent));
    let _ = writeln!(out, "samples = {}", s.screen.samples);

    out.push_str("\n[model]\n");
    let _ = writeln!(out, "model = {}", s.model.name());
    let variant = match s.model {
        PathPhaseModel::LocalWavefront { variant } => variant,
        _ => LocalVariant::Magnitude,
    };
    let _ = writeln!(out, "local_variant = {}", variant.as_str());
    let map = match &s.model {
        PathPhaseModel::AlternativeMinimal(m) => m,
        _ => &s.channels,
    };
    if !map.paths.is_empty() {
        let ids: Vec<String> = map.channel_of_slit.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "channel_of_slit = {}", ids.join(" "));
        for p in &map.paths {
            let flat: Vec<f64> = p.iter().flat_map(|v| [v.x, v.z]).collect();
            let _ = writeln!(out, "channel_path = {}", join(&flat));
        }
    }
    out
}
