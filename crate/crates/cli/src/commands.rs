use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use abwave_core::analysis::{
    metrics, rescale_equivalence, shift_fraction, visibility_sweep, Pattern, SweepParam,
};
use abwave_core::kinematics::{predict_inverse_wavelength_shift, wavelength_change};
use abwave_core::propagation::{LocalVariant, PathPhaseModel};
use abwave_core::scenarios::{
    builtin, builtin_names_with_variants, run_with, RunOptions, Scenario, ScenarioResult,
    SI_WAVELENGTH,
};
use abwave_core::units::ELEMENTARY_CHARGE_SI;
use abwave_core::{Error, UnitMode};
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult, EXIT_GAUGE, EXIT_OK};
use crate::scenario_file::{export_scenario, fmt_f64, parse_scenario};
use crate::{ascii, csv};

/// Gauge-invariance tolerance on the maximum relative intensity deviation.
pub const GAUGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "abwave",
    version,
    about = "Aharonov-Bohm interference laboratory"
)]
pub struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "ABWAVE_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate a scenario to the screen and write the pattern CSV.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the pattern as ASCII art.
        #[arg(long)]
        ascii: bool,
    },
    /// Fringe metrics over a range of one field parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// B, flux or thickness.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a scenario with its gauge-transformed copy.
    GaugeCheck {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// constant, linear, bump or timelinear.
        #[arg(long)]
        gauge: String,
    },
    /// Wavelength change inside a toroidal-solenoid bore (SI units).
    PredictShift {
        /// Field strength in tesla.
        #[arg(long = "B", alias = "b")]
        b: f64,
        /// Winding thickness in metres.
        #[arg(long)]
        thickness: f64,
        /// Incident wavelength in metres.
        #[arg(long, default_value_t = SI_WAVELENGTH)]
        lambda0: f64,
        /// Particle charge in coulombs.
        #[arg(long, default_value_t = ELEMENTARY_CHARGE_SI)]
        charge: f64,
    },
    /// Run the local, topological and alternative models side by side.
    CompareModels {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List builtin scenarios.
    ListScenarios,
    /// Print a scenario in file form.
    Export {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Builtin name or path to a scenario file.
    #[arg(long)]
    pub scenario: String,
    /// local, topological or alternative.
    #[arg(long)]
    pub model: Option<String>,
    /// magnitude or projected; applies to the local model.
    #[arg(long)]
    pub local_variant: Option<String>,
}

impl ScenarioArgs {
    pub fn resolve(&self) -> CliResult<Scenario> {
        let mut s = load_scenario(&self.scenario)?;
        let variant = self
            .local_variant
            .as_deref()
            .map(str::parse::<LocalVariant>)
            .transpose()?;
        match (&self.model, variant) {
            (Some(m), v) => s.set_model(m, v.unwrap_or(LocalVariant::Magnitude))?,
            (None, Some(v)) => match s.model {
                PathPhaseModel::LocalWavefront { .. } => s.set_model("local", v)?,
                _ => {
                    return Err(CliError::Usage(
                        "--local-variant needs --model local for this scenario".into(),
                    ))
                }
            },
            (None, None) => {}
        }
        Ok(s)
    }

    fn variant(&self) -> CliResult<LocalVariant> {
        Ok(self
            .local_variant
            .as_deref()
            .map(str::parse)
            .transpose()?
            .unwrap_or(LocalVariant::Magnitude))
    }
}

/// Builtin by name, otherwise a scenario file at that path.
pub fn load_scenario(name_or_path: &str) -> CliResult<Scenario> {
    match builtin(name_or_path) {
        Ok(s) => Ok(s),
        Err(Error::UnknownScenario(_)) if Path::new(name_or_path).is_file() => {
            let text = fs::read_to_string(name_or_path).map_err(|source| CliError::Io {
                path: name_or_path.into(),
                source,
            })?;
            parse_scenario(&text)
        }
        Err(e) => Err(e.into()),
    }
}

fn emit(out: &mut (dyn Write + Send), path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn say(w: &mut (dyn Write + Send), text: std::fmt::Arguments<'_>) -> CliResult<()> {
    w.write_fmt(text)
        .and_then(|_| w.write_all(b"\n"))
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
}

fn scenario_meta(s: &Scenario, r: &ScenarioResult) -> Vec<(&'static str, String)> {
    vec![
        ("scenario", s.name.clone()),
        ("model", r.model_used.clone()),
        ("unit_mode", s.unit_mode.to_string()),
        ("field", r.field_summary.clone()),
        ("time", fmt_f64(r.time)),
        (
            "slit_phase_difference",
            format!("{:e}", r.slit_phase_difference()),
        ),
    ]
}

fn simulate(
    args: &ScenarioArgs,
    path: Option<&Path>,
    draw: bool,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> CliResult<i32> {
    let s = args.resolve()?;
    let r = run_with(&s, RunOptions::default())?;
    let m = metrics(&r.pattern);
    let text = csv::pattern_csv(&scenario_meta(&s, &r), &r.pattern, &m);
    emit(out, path, &text)?;
    if draw {
        let art = ascii::render(&r.pattern);
        let target: &mut (dyn Write + Send) = if path.is_some() { out } else { err };
        say(target, format_args!("{}", art.trim_end()))?;
    }
    Ok(EXIT_OK)
}

fn linspace(from: f64, to: f64, steps: u32) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    let n = steps - 1;
    (0..steps)
        .map(|i| from + (to - from) * f64::from(i) / f64::from(n))
        .collect()
}

fn sweep(
    args: &ScenarioArgs,
    param: &str,
    range: (f64, f64, u32),
    path: Option<&Path>,
    out: &mut (dyn Write + Send),
) -> CliResult<i32> {
    let s = args.resolve()?;
    let param: SweepParam = param.parse()?;
    let values = linspace(range.0, range.1, range.2);
    let rows = visibility_sweep(&s, param, &values)?;
    let meta = [
        ("command", "sweep".to_string()),
        ("scenario", s.name.clone()),
        ("model", s.model.label()),
        ("param", param.as_str().to_string()),
    ];
    emit(out, path, &csv::sweep_csv(&meta, &rows))?;
    Ok(EXIT_OK)
}

fn gauge_check(args: &ScenarioArgs, gauge: &str, out: &mut (dyn Write + Send)) -> CliResult<i32> {
    let s = args.resolve()?;
    let g = s.gauge_by_name(gauge)?;
    let plain = run_with(&s, RunOptions::default())?;
    let gauged = run_with(&s.gauged(&g), RunOptions::default())?;
    let dev = gauged.pattern.max_relative_deviation(&plain.pattern)?;
    let pass = dev < GAUGE_TOLERANCE;
    say(out, format_args!("scenario={}", s.name))?;
    say(out, format_args!("model={}", plain.model_used))?;
    say(out, format_args!("gauge={}", g.name()))?;
    say(out, format_args!("max_relative_deviation={dev:e}"))?;
    say(out, format_args!("tolerance={GAUGE_TOLERANCE:e}"))?;
    say(
        out,
        format_args!("result={}", if pass { "pass" } else { "fail" }),
    )?;
    Ok(if pass { EXIT_OK } else { EXIT_GAUGE })
}

fn predict_shift(
    b: f64,
    thickness: f64,
    lambda0: f64,
    charge: f64,
    out: &mut (dyn Write + Send),
) -> CliResult<i32> {
    let consts = UnitMode::Si.constants();
    let shift = predict_inverse_wavelength_shift(b, thickness, charge, consts)?;
    let w = wavelength_change(shift, lambda0)?;
    say(
        out,
        format_args!("inverse_wavelength_shift_per_m={shift:.6e}"),
    )?;
    say(out, format_args!("lambda0_m={lambda0:e}"))?;
    say(
        out,
        format_args!("relative_change={:.4}%", 100.0 * w.relative_wavenumber),
    )?;
    say(
        out,
        format_args!("new_wavelength_m={:.6e}", w.new_wavelength),
    )?;
    say(
        out,
        format_args!(
            "relative_wavelength_change={:.4}%",
            100.0 * w.relative_wavelength
        ),
    )?;
    Ok(EXIT_OK)
}

fn compare_models(
    args: &ScenarioArgs,
    path: Option<&Path>,
    out: &mut (dyn Write + Send),
) -> CliResult<i32> {
    let base = load_scenario(&args.scenario)?;
    let variant = args.variant()?;
    let names = ["local", "topological", "alternative"];
    let mut results = Vec::with_capacity(3);
    for name in names {
        let s = base.with_model(name, variant)?;
        results.push(run_with(&s, RunOptions::default())?);
    }
    let patterns: Vec<&Pattern> = results.iter().map(|r| &r.pattern).collect();
    let columns: Vec<(&str, &Pattern, _)> = names
        .iter()
        .zip(&patterns)
        .map(|(n, p)| (*n, *p, metrics(p)))
        .collect();
    let mut extra = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (2, 1)] {
        let key = format!("diff.{}_vs_{}", names[i], names[j]);
        let dev = patterns[i].max_relative_deviation(patterns[j])?;
        extra.push((format!("{key}.max_relative_deviation"), format!("{dev:e}")));
        let shift = shift_fraction(patterns[i], patterns[j])
            .map_or_else(|e| format!("error: {e}"), |v| format!("{v:e}"));
        extra.push((format!("{key}.shift_fraction"), shift));
        let scale = rescale_equivalence(patterns[j], patterns[i])
            .map_or_else(|e| format!("error: {e}"), |r| format!("{:e}", r.scale));
        extra.push((format!("{key}.rescale"), scale));
    }
    let meta = [
        ("command", "compare-models".to_string()),
        ("scenario", base.name.clone()),
        ("local_variant", variant.as_str().to_string()),
        ("unit_mode", base.unit_mode.to_string()),
    ];
    emit(out, path, &csv::joined_csv(&meta, &columns, &extra))?;
    Ok(EXIT_OK)
}

fn list_scenarios(out: &mut (dyn Write + Send)) -> CliResult<i32> {
    for name in builtin_names_with_variants() {
        let s = builtin(&name)?;
        say(
            out,
            format_args!(
                "{name}\t{}\t{}\t{}",
                s.unit_mode,
                s.model.label(),
                s.field.summary()
            ),
        )?;
    }
    Ok(EXIT_OK)
}

fn dispatch(
    cmd: &Command,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> CliResult<i32> {
    match cmd {
        Command::Simulate {
            scenario,
            out: path,
            ascii,
        } => simulate(scenario, path.as_deref(), *ascii, out, err),
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            out: path,
        } => sweep(scenario, param, (*from, *to, *steps), path.as_deref(), out),
        Command::GaugeCheck { scenario, gauge } => gauge_check(scenario, gauge, out),
        Command::PredictShift {
            b,
            thickness,
            lambda0,
            charge,
        } => predict_shift(*b, *thickness, *lambda0, *charge, out),
        Command::CompareModels {
            scenario,
            out: path,
        } => compare_models(scenario, path.as_deref(), out),
        Command::ListScenarios => list_scenarios(out),
        Command::Export {
            scenario,
            out: path,
        } => {
            let s = scenario.resolve()?;
            emit(out, path.as_deref(), &export_scenario(&s))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs a parsed command inside a worker pool of the requested size.
pub fn execute(
    cli: &Cli,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> CliResult<i32> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, out, err))
}
