use crate::geom::{Point, Vec2};

/// Scalar gauge function `S(r, t)` with closed-form derivatives.
///
/// A pure-gauge potential is `A = ∇S`, `φ = -∂S/∂t`; `S` is measured in
/// units of flux (tesla·m² in SI), so `q S / ħ` is a phase.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeFunction {
    Constant {
        c: f64,
    },
    /// `S = a · r`
    Linear {
        a: Vec2,
    },
    /// `S = height · exp(-|r - center|² / (2 width²))`
    GaussianBump {
        center: Vec2,
        width: f64,
        height: f64,
    },
    /// `S = rate · t`
    TimeLinear {
        rate: f64,
    },
}

impl GaugeFunction {
    pub fn value(&self, p: Point) -> f64 {
        match *self {
            GaugeFunction::Constant { c } => c,
            GaugeFunction::Linear { a } => a.dot(p.r()),
            GaugeFunction::GaussianBump {
                center,
                width,
                height,
            } => {
                let d = p.r() - center;
                height * (-d.norm_sq() / (2.0 * width * width)).exp()
            }
            GaugeFunction::TimeLinear { rate } => rate * p.t,
        }
    }

    pub fn gradient(&self, p: Point) -> Vec2 {
        match *self {
            GaugeFunction::Constant { .. } | GaugeFunction::TimeLinear { .. } => Vec2::ZERO,
            GaugeFunction::Linear { a } => a,
            GaugeFunction::GaussianBump { center, width, .. } => {
                let d = p.r() - center;
                d * (-self.value(p) / (width * width))
            }
        }
    }

    pub fn time_derivative(&self, _p: Point) -> f64 {
        match *self {
            GaugeFunction::TimeLinear { rate } => rate,
            _ => 0.0,
        }
    }

    /// The gauge function `-S`.
    pub fn negated(&self) -> GaugeFunction {
        match *self {
            GaugeFunction::Constant { c } => GaugeFunction::Constant { c: -c },
            GaugeFunction::Linear { a } => GaugeFunction::Linear { a: -a },
            GaugeFunction::GaussianBump {
                center,
                width,
                height,
            } => GaugeFunction::GaussianBump {
                center,
                width,
                height: -height,
            },
            GaugeFunction::TimeLinear { rate } => GaugeFunction::TimeLinear { rate: -rate },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GaugeFunction::Constant { .. } => "constant",
            GaugeFunction::Linear { .. } => "linear",
            GaugeFunction::GaussianBump { .. } => "bump",
            GaugeFunction::TimeLinear { .. } => "timelinear",
        }
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            GaugeFunction::Constant { c } => c.is_finite(),
            GaugeFunction::Linear { a } => a.is_finite(),
            GaugeFunction::GaussianBump {
                center,
                width,
                height,
            } => center.is_finite() && width > 0.0 && width.is_finite() && height.is_finite(),
            GaugeFunction::TimeLinear { rate } => rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::validation(
                "gauge",
                format!(
                    "{} gauge parameters must be finite (width > 0)",
                    self.name()
                ),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> Vec<GaugeFunction> {
        vec![
            GaugeFunction::Constant { c: 0.7 },
            GaugeFunction::Linear {
                a: Vec2::new(0.3, -1.2),
            },
            GaugeFunction::GaussianBump {
                center: Vec2::new(0.5, 2.0),
                width: 1.5,
                height: 2.5,
            },
            GaugeFunction::TimeLinear { rate: 3.0 },
        ]
    }

    #[test]
    fn gradient_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in catalog() {
            for _ in 0..200 {
                let p = Point::new(
                    rng.gen_range(-4.0..4.0),
                    rng.gen_range(-4.0..6.0),
                    rng.gen_range(0.0..2.0),
                );
                let h = 1e-5;
                let fd = Vec2::new(
                    (g.value(Point::new(p.x + h, p.z, p.t))
                        - g.value(Point::new(p.x - h, p.z, p.t)))
                        / (2.0 * h),
                    (g.value(Point::new(p.x, p.z + h, p.t))
                        - g.value(Point::new(p.x, p.z - h, p.t)))
                        / (2.0 * h),
                );
                let dt = (g.value(Point::new(p.x, p.z, p.t + h))
                    - g.value(Point::new(p.x, p.z, p.t - h)))
                    / (2.0 * h);
                let grad = g.gradient(p);
                let scale = grad.norm().max(1e-3);
                assert!(
                    (grad - fd).norm() <= 1e-6 * scale,
                    "{g:?} at {p:?}: {grad:?} vs {fd:?}"
                );
                assert!(
                    (g.time_derivative(p) - dt).abs()
                        <= 1e-6 * g.time_derivative(p).abs().max(1e-3)
                );
            }
        }
    }

    #[test]
    fn negation_cancels() {
        let p = Point::new(0.3, 0.9, 1.0);
        for g in catalog() {
            assert_eq!(g.value(p) + g.negated().value(p), 0.0);
        }
    }
}
