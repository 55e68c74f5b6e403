//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use abwave::csv::parse_pattern_csv;
use abwave_core::analysis::{
    circular_distance, metrics, rescale_equivalence, shift_fraction, Pattern,
};
use abwave_core::fields::FieldModel;
use abwave_core::kinematics::kg_residual;
use abwave_core::propagation::LocalVariant;
use abwave_core::scenarios::{
    builtin, builtin_names_with_variants, run_time_series, run_with, RunOptions, Scenario,
    BUILTIN_NAMES,
};
use abwave_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_abwave");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn abwave(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(BIN)
        .args(args)
        .env_remove("ABWAVE_THREADS")
        .output()
        .map_err(|e| format!("cannot run {BIN}: {e}"))?;
    let code = out.status.code().unwrap_or(-1);
    Ok((code, String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn serial(s: &Scenario) -> Result<Pattern, String> {
    run_with(s, RunOptions { parallel: false })
        .map(|r| r.pattern)
        .map_err(|e| format!("{}: {e}", s.name))
}

fn scenario(name: &str) -> Result<Scenario, String> {
    builtin(name).map_err(|e| e.to_string())
}

fn with_model(s: &Scenario, model: &str, variant: LocalVariant) -> Result<Scenario, String> {
    s.with_model(model, variant).map_err(|e| e.to_string())
}

fn value_of<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

fn predicted_wavelength_change() -> Outcome {
    let start = Instant::now();
    let (code, out) = abwave(&[
        "predict-shift",
        "--B",
        "0.01",
        "--thickness",
        "0.01",
        "--lambda0",
        "3e-12",
    ])?;
    let elapsed = start.elapsed();
    let pct: f64 = value_of(&out, "relative_change")
        .and_then(|v| v.trim_end_matches('%').parse().ok())
        .ok_or_else(|| format!("no relative_change in output:\n{out}"))?;
    check(
        code == 0 && (pct - 7.25).abs() <= 0.05 && elapsed < Duration::from_secs(1),
        format!(
            "relative change {pct}% (7.25 ± 0.05), exit {code}, {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

fn fraunhofer_oracle() -> Outcome {
    let s = scenario("free")?;
    let start = Instant::now();
    let p = serial(&s)?;
    let elapsed = start.elapsed();
    let m = metrics(&p).map_err(|e| e.to_string())?;
    let slits = &s.apertures[0].slits;
    let (a, d) = (slits[0].width, slits[1].center - slits[0].center);
    let lambda = s.source.wavelength;
    let l = s.screen.z - s.apertures[0].z;
    let expected_spacing = lambda * l / d;

    // Far-field double slit over the central lobe of the single-slit envelope,
    // with the amplitude fitted by least squares.
    let pairs: Vec<(f64, f64)> = p
        .grid
        .xs()
        .zip(&p.intensity)
        .filter_map(|(x, &i)| {
            let sin = x / x.hypot(l);
            (sin.abs() < lambda / a).then(|| {
                let oracle =
                    sinc(PI * a * sin / lambda).powi(2) * (PI * d * sin / lambda).cos().powi(2);
                (i, oracle)
            })
        })
        .collect();
    let c = pairs.iter().map(|(i, o)| i * o).sum::<f64>()
        / pairs.iter().map(|(_, o)| o * o).sum::<f64>();
    let num: f64 = pairs.iter().map(|(i, o)| (i - c * o).powi(2)).sum();
    let den: f64 = pairs.iter().map(|(_, o)| (c * o).powi(2)).sum();
    let rms = (num / den).sqrt();
    let spacing_err = (m.fringe_spacing - expected_spacing).abs() / expected_spacing;
    check(
        !p.intensity.is_empty()
            && s.source.samples == 2048
            && spacing_err < 1e-2
            && rms < 1e-2
            && elapsed < Duration::from_secs(10),
        format!(
            "spacing {:.4} vs λL/d = {expected_spacing} ({:.3}%), envelope RMS {rms:.2e}, {:.2} s",
            m.fringe_spacing,
            100.0 * spacing_err,
            elapsed.as_secs_f64()
        ),
    )
}

fn ab_fringe_shift() -> Outcome {
    let free = serial(&scenario("free")?)?;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let mut s = scenario("fig1_1")?;
        let consts = s.unit_mode.constants();
        match &mut s.field {
            FieldModel::FluxTube(t) => t.flux = frac * consts.h / s.source.charge,
            other => return Err(format!("fig1_1 field is {other:?}")),
        }
        let p = serial(&s)?;
        let got = shift_fraction(&p, &free).map_err(|e| e.to_string())?;
        let err = circular_distance(got, frac);
        worst = worst.max(err);
        details.push(format!("{frac}→{got:.4}"));
    }
    check(
        worst < 1e-2,
        format!("{} (worst error {worst:.2e})", details.join(", ")),
    )
}

fn gauge_invariance() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for name in BUILTIN_NAMES {
        for gauge in ["constant", "linear", "bump", "timelinear"] {
            cases += 1;
            let (code, out) = abwave(&[
                "gauge-check",
                "--scenario",
                name,
                "--gauge",
                gauge,
                "--threads",
                "1",
            ])?;
            let dev: f64 = value_of(&out, "max_relative_deviation")
                .and_then(|v| v.parse().ok())
                .unwrap_or(f64::INFINITY);
            worst = worst.max(dev);
            if code != 0 || !(dev < 1e-6) {
                failures.push(format!("{name}+{gauge} (exit {code}, {dev:e})"));
            }
        }
    }
    check(
        failures.is_empty() && cases == 32,
        if failures.is_empty() {
            format!("{cases} gauge-check runs exit 0, worst deviation {worst:.2e}")
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn title_effect() -> Outcome {
    let s = scenario("fig1_5")?;
    let free = serial(&s.free_counterpart())?;
    let topo = serial(&with_model(&s, "topological", LocalVariant::Magnitude)?)?;
    let local = serial(&with_model(&s, "local", LocalVariant::Magnitude)?)?;
    let topo_dev = topo
        .max_relative_deviation(&free)
        .map_err(|e| e.to_string())?;
    let r = rescale_equivalence(&free, &local).map_err(|e| e.to_string())?;
    let m = metrics(&local).map_err(|e| e.to_string())?;
    let expected = 1.0 / (1.0 + 0.0725);
    let centre = m.central_max_x.abs() / m.fringe_spacing;
    check(
        topo_dev < 1e-9 && (r.scale - expected).abs() < 1e-2 && r.residual < 1e-2 && centre < 1e-3,
        format!(
            "topological vs free {topo_dev:.1e}; local scale {:.5} (expect {expected:.4}), residual {:.1e}, central max at {centre:.1e} fringes",
            r.scale, r.residual
        ),
    )
}

fn model_collapse() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let names = builtin_names_with_variants();
    for name in &names {
        let s = scenario(name)?;
        let proj = serial(&with_model(&s, "local", LocalVariant::Projected)?)?;
        let topo = serial(&with_model(&s, "topological", LocalVariant::Magnitude)?)?;
        let dev = proj
            .max_relative_deviation(&topo)
            .map_err(|e| e.to_string())?;
        worst = worst.max(dev);
        if !(dev < 1e-9) {
            failures.push(format!("{name} ({dev:e})"));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} scenarios, worst deviation {worst:.1e}", names.len())
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn kg_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b67);
    let mut worst: f64 = 0.0;
    let mut fields = 0;
    for name in BUILTIN_NAMES {
        let base = scenario(name)?;
        let mut variants = vec![base.clone()];
        variants.extend(base.gauge_catalog().iter().map(|g| base.gauged(g)));
        for s in variants {
            fields += 1;
            let src = s.source_ref().map_err(|e| e.to_string())?;
            let h = s.screen.half_extent;
            for _ in 0..1000 {
                let p = Point::new(
                    rng.gen_range(-h..h),
                    rng.gen_range(s.source.z..s.screen.z),
                    rng.gen_range(0.0..2.0),
                );
                worst = worst.max(kg_residual(&src, &s.field, p));
            }
        }
    }
    check(
        worst < 1e-12,
        format!("{fields} fields × 1000 points, worst residual {worst:.2e}"),
    )
}

fn time_varying_scalar() -> Outcome {
    let s = scenario("scalar_vt")?;
    let rs = run_time_series(&s, &[0.0, 1.0, 2.0], RunOptions { parallel: false })
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in &rs[1..] {
        worst = worst.max(
            r.pattern
                .max_relative_deviation(&rs[0].pattern)
                .map_err(|e| e.to_string())?,
        );
    }
    check(
        worst < 1e-12,
        format!("t = 0, 1, 2: max deviation {worst:.1e}"),
    )
}

fn mirror_symmetry() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["fig1_3", "fig1_4", "fig1_5"] {
        let p = serial(&scenario(name)?)?;
        let asym = p.mirror_asymmetry();
        ok &= asym < 1e-9;
        parts.push(format!("{name} {asym:.1e}"));
    }
    check(ok, parts.join(", "))
}

fn determinism() -> Outcome {
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let (code, csv) = abwave(&["simulate", "--scenario", "fig1_5", "--threads", threads])?;
        if code != 0 {
            return Err(format!("simulate with {threads} threads exited {code}"));
        }
        parse_pattern_csv(&csv).map_err(|e| e.to_string())?;
        outputs.push(csv);
    }
    check(
        outputs.windows(2).all(|w| w[0] == w[1]),
        format!(
            "threads 1, 4, 8: {} bytes each, identical",
            outputs[0].len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "predicted 7% wavelength change",
            predicted_wavelength_change,
        ),
        ("Fraunhofer double slit", fraunhofer_oracle),
        ("AB fringe shift", ab_fringe_shift),
        ("gauge invariance", gauge_invariance),
        ("bore after the slits", title_effect),
        ("projected local equals topological", model_collapse),
        ("Klein-Gordon identity", kg_identity),
        ("time-varying scalar potential", time_varying_scalar),
        ("mirror symmetry", mirror_symmetry),
        ("thread-count determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
