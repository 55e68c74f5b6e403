//! Line integrals of the vector potential.

use num_complex::Complex64;

use super::FieldModel;
use crate::error::{Error, Result};
use crate::geom::{Point, Vec2};
use crate::quadrature::{integrate_unit_pieces, QuadOptions};

/// How a segment integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Closed forms where available, quadrature elsewhere.
    #[default]
    Analytic,
    /// Adaptive quadrature of the sampled `A` throughout.
    Numeric,
}

/// `∫ A·dl` along the straight segment `a → b` at time `t`.
pub fn segment_integral_a(
    model: &FieldModel,
    a: Vec2,
    b: Vec2,
    t: f64,
    route: Route,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    match route {
        Route::Numeric => numeric_segment(model, a, b, t),
        Route::Analytic => analytic_segment(model, a, b, t),
    }
}

fn numeric_segment(model: &FieldModel, a: Vec2, b: Vec2, t: f64) -> Result<f64> {
    let d = b - a;
    let bp = model.breakpoints(a, b);
    integrate_unit_pieces(
        |s| model.sample(Point::at(a.lerp(b, s), t)).a.dot(d),
        &bp,
        QuadOptions::default(),
    )
}

fn analytic_segment(model: &FieldModel, a: Vec2, b: Vec2, t: f64) -> Result<f64> {
    match model {
        FieldModel::Vacuum | FieldModel::UniformScalar(_) => Ok(0.0),
        FieldModel::FluxTube(tube) => Ok(tube.segment_integral(a, b)),
        FieldModel::FluxTubePair(ts) => {
            Ok(ts[0].segment_integral(a, b) + ts[1].segment_integral(a, b))
        }
        FieldModel::ToroidBore(bore) => match bore.segment_integral(a, b) {
            Some(v) => Ok(v),
            None => numeric_segment(model, a, b, t),
        },
        FieldModel::PureGauge(g) => Ok(g.value(Point::at(b, t)) - g.value(Point::at(a, t))),
        FieldModel::Superposition(parts) => {
            parts.iter().map(|m| analytic_segment(m, a, b, t)).sum()
        }
    }
}

fn path_integral(model: &FieldModel, path: &[Point], t: f64, route: Route) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::validation("path", "needs at least two points"));
    }
    if let Some(p) = path.iter().find(|p| !p.is_finite()) {
        return Err(Error::validation("path", format!("non-finite point {p:?}")));
    }
    path.windows(2)
        .map(|w| segment_integral_a(model, w[0].r(), w[1].r(), t, route))
        .sum()
}

/// `∫ A·dl` along a polyline, evaluated at time `t`.
pub fn line_integral_a(model: &FieldModel, path: &[Point], t: f64) -> Result<f64> {
    path_integral(model, path, t, Route::Analytic)
}

/// Same as [`line_integral_a`] but by quadrature of sampled potentials only.
pub fn line_integral_a_numeric(model: &FieldModel, path: &[Point], t: f64) -> Result<f64> {
    path_integral(model, path, t, Route::Numeric)
}

/// `exp(i q/ħ ∮ A·dl)` around a closed polyline.
///
/// With the metric signature `(+,-,-,-)`, `A_μ dx^μ = φ dt - A·dl`, so the
/// factor `exp(-i q/ħ ∮ A_μ dx^μ)` of a static loop is the expression above.
pub fn closed_path_phase_factor(
    model: &FieldModel,
    path: &[Point],
    q: f64,
    hbar: f64,
    t: f64,
) -> Result<Complex64> {
    if let (Some(first), Some(last)) = (path.first(), path.last()) {
        let gap = (last.r() - first.r()).norm();
        if !(gap <= 1e-12) {
            return Err(Error::OpenPath { gap });
        }
    }
    let flux = line_integral_a(model, path, t)?;
    Ok(Complex64::from_polar(1.0, q * flux / hbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{apply_gauge, FluxTube, GaugeFunction, ToroidBore};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn square(center: Vec2, half: f64) -> Vec<Point> {
        [
            (-1.0, -1.0),
            (1.0, -1.0),
            (1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ]
        .iter()
        .map(|(sx, sz)| Point::new(center.x + sx * half, center.z + sz * half, 0.0))
        .collect()
    }

    /// Counter-clockwise regular polygon.
    fn polygon(center: Vec2, radius: f64, n: usize, phase: f64) -> Vec<Point> {
        (0..=n)
            .map(|i| {
                let th = phase + 2.0 * PI * (i % n) as f64 / n as f64;
                Point::new(
                    center.x + radius * th.cos(),
                    center.z + radius * th.sin(),
                    0.0,
                )
            })
            .collect()
    }

    #[test]
    fn vacuum_path_is_zero() {
        let path = [
            Point::new(0.0, 0.0, 0.0),
            Point::new(3.0, 4.0, 0.0),
            Point::new(-1.0, 2.0, 0.0),
        ];
        assert_eq!(
            line_integral_a(&FieldModel::Vacuum, &path, 0.0).unwrap(),
            0.0
        );
        assert_eq!(
            line_integral_a_numeric(&FieldModel::Vacuum, &path, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn square_around_tube_gives_flux() {
        let r = 0.3;
        let flux = 1.7;
        let m = FieldModel::FluxTube(FluxTube::new(Vec2::new(1.0, -2.0), r, flux));
        let loop_ = square(Vec2::new(1.0, -2.0), 4.0 * r);
        for v in [
            line_integral_a(&m, &loop_, 0.0).unwrap(),
            line_integral_a_numeric(&m, &loop_, 0.0).unwrap(),
        ] {
            assert!((v - flux).abs() <= 1e-6 * flux, "{v}");
        }
    }

    #[test]
    fn axial_path_inside_bore() {
        let bore = ToroidBore::new((0.0, 10.0), (-2.0, 2.0), 0.01, 0.01);
        let m = FieldModel::ToroidBore(bore);
        let path = [Point::new(0.0, 1.0, 0.0), Point::new(0.0, 9.0, 0.0)];
        let v = line_integral_a(&m, &path, 0.0).unwrap();
        assert!((v - 1e-4 * 8.0).abs() < 1e-18);
        let n = line_integral_a_numeric(&m, &path, 0.0).unwrap();
        assert!((n - 1e-4 * 8.0).abs() < 1e-15);
    }

    #[test]
    fn reversal_and_additivity() {
        let m = FieldModel::FluxTubePair([
            FluxTube::new(Vec2::new(0.0, 0.0), 0.5, 1.0),
            FluxTube::new(Vec2::new(3.0, 0.0), 0.5, -1.0),
        ]);
        let p = [
            Point::new(-2.0, -1.0, 0.0),
            Point::new(0.2, 0.1, 0.0),
            Point::new(4.0, 2.0, 0.0),
        ];
        let fwd = line_integral_a(&m, &p, 0.0).unwrap();
        let mut rev = p;
        rev.reverse();
        let back = line_integral_a(&m, &rev, 0.0).unwrap();
        assert!((fwd + back).abs() < 1e-14);
        let a = line_integral_a(&m, &p[..2], 0.0).unwrap();
        let b = line_integral_a(&m, &p[1..], 0.0).unwrap();
        assert!((fwd - (a + b)).abs() < 1e-14);
    }

    #[test]
    fn routes_agree_on_random_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut bore = ToroidBore::new((0.0, 4.0), (-1.0, 1.0), 0.5, 0.2);
        bore.edge_ramp = 0.3;
        let models = [
            FieldModel::FluxTube(FluxTube::new(Vec2::new(0.1, 0.2), 0.4, 2.0)),
            FieldModel::ToroidBore(bore),
            FieldModel::PureGauge(GaugeFunction::GaussianBump {
                center: Vec2::new(0.0, 1.0),
                width: 0.8,
                height: 1.5,
            }),
        ];
        for m in &models {
            for _ in 0..200 {
                let a = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..6.0));
                let b = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..6.0));
                let x = segment_integral_a(m, a, b, 0.0, Route::Analytic).unwrap();
                let y = segment_integral_a(m, a, b, 0.0, Route::Numeric).unwrap();
                assert!(
                    (x - y).abs() <= 1e-8 * x.abs().max(1e-3),
                    "{m:?} {a:?}->{b:?}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn stokes_on_random_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tube = FluxTube::new(Vec2::new(0.4, -0.2), 0.25, 1.3);
        let pair = [
            FluxTube::new(Vec2::new(-1.0, 0.0), 0.2, 0.8),
            FluxTube::new(Vec2::new(1.0, 0.5), 0.2, -0.8),
        ];
        let mut bore = ToroidBore::new((0.0, 3.0), (-1.0, 1.0), 2.0, 0.5);
        bore.edge_ramp = 0.2;

        let enclosed_by_disk = |t: &FluxTube, c: Vec2, inner: f64, outer: f64| -> Option<f64> {
            let d = (t.center - c).norm();
            if d + t.radius < inner {
                Some(t.flux)
            } else if d - t.radius > outer {
                Some(0.0)
            } else {
                None
            }
        };

        let mut checked = 0;
        while checked < 100 {
            let c = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let radius = rng.gen_range(0.3..3.0);
            let n = rng.gen_range(5..12);
            let loop_ = polygon(c, radius, n, rng.gen_range(0.0..PI));
            let inner = radius * (PI / n as f64).cos();
            let e1 = enclosed_by_disk(&tube, c, inner, radius);
            let e2 = enclosed_by_disk(&pair[0], c, inner, radius)
                .zip(enclosed_by_disk(&pair[1], c, inner, radius))
                .map(|(a, b)| a + b);
            if let Some(expect) = e1 {
                let v = line_integral_a(&FieldModel::FluxTube(tube), &loop_, 0.0).unwrap();
                assert!(
                    (v - expect).abs() <= 1e-6 * tube.flux.abs(),
                    "{v} vs {expect}"
                );
                checked += 1;
            }
            if let Some(expect) = e2 {
                let v = line_integral_a(&FieldModel::FluxTubePair(pair), &loop_, 0.0).unwrap();
                assert!((v - expect).abs() <= 1e-6 * 0.8, "{v} vs {expect}");
            }
        }

        // Axis-aligned rectangles against the bore: only vertical sides count.
        let wx = |x: f64| bore.vector_potential(Vec2::new(x, 1.5)).z / bore.interior_a();
        let wz_int = |z1: f64, z2: f64| {
            crate::quadrature::integrate(
                |z| bore.vector_potential(Vec2::new(0.0, z)).z,
                z1,
                z2,
                QuadOptions::default(),
            )
            .unwrap()
        };
        for _ in 0..100 {
            let (x1, x2) = (rng.gen_range(-2.0..0.5), rng.gen_range(0.5..2.0));
            let (z1, z2) = (rng.gen_range(-1.0..1.5), rng.gen_range(1.5..4.0));
            let loop_ = [
                Point::new(x1, z1, 0.0),
                Point::new(x2, z1, 0.0),
                Point::new(x2, z2, 0.0),
                Point::new(x1, z2, 0.0),
                Point::new(x1, z1, 0.0),
            ];
            let expect = (wx(x2) - wx(x1)) * wz_int(z1, z2);
            let v = line_integral_a(&FieldModel::ToroidBore(bore), &loop_, 0.0).unwrap();
            assert!(
                (v - expect).abs() <= 1e-6 * bore.interior_a() * 3.0,
                "{v} vs {expect}"
            );
        }
    }

    #[test]
    fn gauge_closure_on_loops() {
        let base = FieldModel::FluxTube(FluxTube::new(Vec2::ZERO, 0.5, 2.0));
        let gauges = [
            GaugeFunction::Constant { c: 3.0 },
            GaugeFunction::Linear {
                a: Vec2::new(1.0, -2.0),
            },
            GaugeFunction::GaussianBump {
                center: Vec2::new(0.3, 0.3),
                width: 0.6,
                height: 4.0,
            },
            GaugeFunction::TimeLinear { rate: 5.0 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in &gauges {
            let gauged = apply_gauge(&base, g);
            for _ in 0..20 {
                let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let loop_ = polygon(c, rng.gen_range(0.5..3.0), 7, 0.1);
                let a = line_integral_a(&base, &loop_, 0.7).unwrap();
                let b = line_integral_a(&gauged, &loop_, 0.7).unwrap();
                assert!((a - b).abs() <= 1e-9 * 2.0, "{g:?}: {a} vs {b}");
                let bn = line_integral_a_numeric(&gauged, &loop_, 0.7).unwrap();
                assert!((a - bn).abs() <= 1e-8 * 2.0, "{g:?}: {a} vs {bn}");
            }
        }
    }

    #[test]
    fn curl_free_outside_tube_and_inside_bore() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tube = FieldModel::FluxTube(FluxTube::new(Vec2::ZERO, 0.2, 1.0));
        let bore = FieldModel::ToroidBore(ToroidBore::new((0.0, 2.0), (-1.0, 1.0), 1.0, 1.0));
        let side = 1e-6;
        for _ in 0..100 {
            let c = loop {
                let c = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                if c.norm() > 0.5 {
                    break c;
                }
            };
            let v = line_integral_a(&tube, &square(c, side / 2.0), 0.0).unwrap();
            let a_local = tube.sample(Point::at(c, 0.0)).a.norm();
            assert!((v / (side * side)).abs() < 1e-6 * a_local.max(1.0), "{v}");

            let c = Vec2::new(rng.gen_range(-0.9..0.9), rng.gen_range(0.1..1.9));
            let v = line_integral_a(&bore, &square(c, side / 2.0), 0.0).unwrap();
            assert!((v / (side * side)).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn phase_factor_examples() {
        let (q, hbar) = (1.0, 1.0);
        let h = 2.0 * PI * hbar;
        let loop_ = square(Vec2::ZERO, 2.0);
        let full = FieldModel::FluxTube(FluxTube::new(Vec2::ZERO, 0.5, h / q));
        let u = closed_path_phase_factor(&full, &loop_, q, hbar, 0.0).unwrap();
        assert!((u - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let half = FieldModel::FluxTube(FluxTube::new(Vec2::ZERO, 0.5, h / (2.0 * q)));
        let u = closed_path_phase_factor(&half, &loop_, q, hbar, 0.0).unwrap();
        assert!((u + Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let pair = FieldModel::FluxTubePair([
            FluxTube::new(Vec2::new(-0.5, 0.0), 0.2, h / (2.0 * q)),
            FluxTube::new(Vec2::new(0.5, 0.0), 0.2, -h / (2.0 * q)),
        ]);
        let u = closed_path_phase_factor(&pair, &loop_, q, hbar, 0.0).unwrap();
        assert!((u - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!((u.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_factor_is_gauge_invariant() {
        let base = FieldModel::FluxTube(FluxTube::new(Vec2::ZERO, 0.5, 1.1));
        let g = GaugeFunction::GaussianBump {
            center: Vec2::new(1.0, 0.0),
            width: 0.5,
            height: 2.0,
        };
        let loop_ = polygon(Vec2::new(0.2, 0.1), 1.8, 9, 0.0);
        let a = closed_path_phase_factor(&base, &loop_, 1.0, 1.0, 0.0).unwrap();
        let b = closed_path_phase_factor(&apply_gauge(&base, &g), &loop_, 1.0, 1.0, 0.0).unwrap();
        assert!((a.arg() - b.arg()).abs() < 1e-9);
    }

    #[test]
    fn open_loop_is_rejected() {
        let path = [
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
        ];
        let err = closed_path_phase_factor(&FieldModel::Vacuum, &path, 1.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::OpenPath { .. }));
    }
}
