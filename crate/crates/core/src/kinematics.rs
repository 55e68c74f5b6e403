//! Local frequency and wave-vector of a charged particle in a potential
//! landscape.
//!
//! A particle born at `(r0, t0)` with frequency `ν0` and wave-vector `k0`
//! carries, at any other point,
//!
//! ```text
//! ν(r, t) = ν0 + q (φ(r, t) − φ(r0, t0)) / h
//! k(r, t) = k0 + q (A(r, t) − A(r0, t0)) / ħ
//! ```
//!
//! so that `(hν − qφ)² − c²|ħk − qA|²` is the same everywhere.

use crate::error::{Error, Result};
use crate::fields::{FieldModel, PotentialSample};
use crate::geom::{Point, Vec2};
use crate::units::Constants;

/// Birth record of the particle. Potentials at the birth point are sampled
/// once, when the record is built against a field.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRef {
    pub q: f64,
    pub m: f64,
    pub r0: Point,
    pub k0: Vec2,
    pub nu0: f64,
    pub consts: Constants,
    at_source: PotentialSample,
    physical_at_source: PotentialSample,
}

impl SourceRef {
    pub fn new(
        q: f64,
        m: f64,
        r0: Point,
        k0: Vec2,
        nu0: f64,
        consts: Constants,
        field: &FieldModel,
    ) -> Result<Self> {
        if !(k0.is_finite() && k0.norm() > 0.0) {
            return Err(Error::validation(
                "k0",
                "wave-vector must be finite and nonzero",
            ));
        }
        if !(r0.is_finite() && q.is_finite() && m.is_finite() && nu0.is_finite()) {
            return Err(Error::validation("source", "parameters must be finite"));
        }
        Ok(Self {
            q,
            m,
            r0,
            k0,
            nu0,
            consts,
            at_source: field.sample(r0),
            physical_at_source: field.physical_sample(r0),
        })
    }

    /// Frequency from the free dispersion relation `E² = (ħkc)² + (mc²)²`.
    pub fn free_frequency(k0: Vec2, m: f64, consts: Constants) -> f64 {
        let pc = consts.hbar * k0.norm() * consts.c;
        let mc2 = m * consts.c * consts.c;
        pc.hypot(mc2) / consts.h
    }

    /// Potentials of the full field at the birth point.
    pub fn source_potentials(&self) -> PotentialSample {
        self.at_source
    }

    /// Potentials at the birth point excluding pure-gauge components.
    pub fn physical_source_potentials(&self) -> PotentialSample {
        self.physical_at_source
    }

    /// Same particle re-anchored in another field.
    pub fn rebind(&self, field: &FieldModel) -> Self {
        Self {
            at_source: field.sample(self.r0),
            physical_at_source: field.physical_sample(self.r0),
            ..self.clone()
        }
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.k0.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalState {
    pub k: Vec2,
    pub nu: f64,
    pub at: Point,
}

pub fn local_frequency(src: &SourceRef, field: &FieldModel, p: Point) -> f64 {
    let phi = field.sample(p).phi;
    src.nu0 + src.q * (phi - src.at_source.phi) / src.consts.h
}

pub fn local_wavevector(src: &SourceRef, field: &FieldModel, p: Point) -> Vec2 {
    let a = field.sample(p).a;
    src.k0 + (a - src.at_source.a) * (src.q / src.consts.hbar)
}

pub fn local_state(src: &SourceRef, field: &FieldModel, p: Point) -> LocalState {
    LocalState {
        k: local_wavevector(src, field, p),
        nu: local_frequency(src, field, p),
        at: p,
    }
}

fn kg_invariant(src: &SourceRef, nu: f64, k: Vec2, s: PotentialSample) -> (f64, f64) {
    let c = src.consts;
    let energy = c.h * nu - src.q * s.phi;
    let momentum = k * c.hbar - s.a * src.q;
    (
        energy * energy - c.c * c.c * momentum.norm_sq(),
        energy * energy,
    )
}

/// Relative change of `(hν − qφ)² − c²|ħk − qA|²` between `p` and the birth
/// point. Normalised by the invariant itself, or by the squared energy when
/// the invariant is near zero.
pub fn kg_residual(src: &SourceRef, field: &FieldModel, p: Point) -> f64 {
    let here = kg_invariant(
        src,
        local_frequency(src, field, p),
        local_wavevector(src, field, p),
        field.sample(p),
    );
    let there = kg_invariant(src, src.nu0, src.k0, src.at_source);
    let denom = there.0.abs().max(there.1).max(f64::MIN_POSITIVE);
    (here.0 - there.0).abs() / denom
}

/// `(hν)² − (h/λ)² c²` as inferred by an observer who ignores local
/// potentials. May be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparentMass {
    pub m_sq: f64,
    h: f64,
}

impl ApparentMass {
    /// `m_sq / h²`.
    pub fn in_planck_units(&self) -> f64 {
        self.m_sq / (self.h * self.h)
    }
}

pub fn apparent_mass_sq(nu: f64, lambda: f64, consts: Constants) -> Result<ApparentMass> {
    if !(lambda > 0.0) {
        return Err(Error::NonpositiveWavelength(lambda));
    }
    let e = consts.h * nu;
    let p = consts.h / lambda;
    Ok(ApparentMass {
        m_sq: e * e - p * p * consts.c * consts.c,
        h: consts.h,
    })
}

/// Apparent mass of a local state.
pub fn local_apparent_mass(state: &LocalState, consts: Constants) -> Result<ApparentMass> {
    let k = state.k.norm();
    let lambda = if k > 0.0 {
        2.0 * std::f64::consts::PI / k
    } else {
        f64::INFINITY
    };
    apparent_mass_sq(state.nu, lambda, consts)
}

/// `(mc²)²`, the apparent mass of a free particle in energy units.
pub fn invariant_mass_sq(m: f64, consts: Constants) -> f64 {
    let mc2 = m * consts.c * consts.c;
    mc2 * mc2
}

/// Change of `1/λ` inside a toroidal-solenoid bore of field `b` and winding
/// thickness `thickness`: `thickness · q b / h`.
pub fn predict_inverse_wavelength_shift(
    b: f64,
    thickness: f64,
    q: f64,
    consts: Constants,
) -> Result<f64> {
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(Error::validation(
            "thickness",
            format!("must be positive, got {thickness}"),
        ));
    }
    if !b.is_finite() || !q.is_finite() {
        return Err(Error::validation("B", "must be finite"));
    }
    Ok(thickness * q * b / consts.h)
}

/// Effect of an inverse-wavelength shift on a beam of wavelength `lambda0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthChange {
    /// `Δ(1/λ) · λ0`, the relative change of the wavenumber.
    pub relative_wavenumber: f64,
    /// `λ'` with `1/λ' = 1/λ0 + Δ(1/λ)`.
    pub new_wavelength: f64,
    /// `(λ' − λ0) / λ0`.
    pub relative_wavelength: f64,
}

pub fn wavelength_change(shift: f64, lambda0: f64) -> Result<WavelengthChange> {
    if !(lambda0 > 0.0) {
        return Err(Error::NonpositiveWavelength(lambda0));
    }
    let rel = shift * lambda0;
    let new_wavelength = lambda0 / (1.0 + rel);
    Ok(WavelengthChange {
        relative_wavenumber: rel,
        new_wavelength,
        relative_wavelength: -rel / (1.0 + rel),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{apply_gauge, FluxTube, GaugeFunction, ToroidBore, UniformScalar};
    use crate::units::{ELECTRON_MASS_SI, ELEMENTARY_CHARGE_SI};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn reduced_src(field: &FieldModel) -> SourceRef {
        let k0 = Vec2::new(0.0, 2.0 * PI);
        let consts = Constants::reduced();
        let nu0 = SourceRef::free_frequency(k0, 1.0, consts);
        SourceRef::new(1.0, 1.0, Point::new(0.0, -5.0, 0.0), k0, nu0, consts, field).unwrap()
    }

    fn catalog() -> Vec<FieldModel> {
        let tube = FieldModel::FluxTube(FluxTube::new(Vec2::new(0.0, 1.0), 0.5, PI));
        let pair = FieldModel::FluxTubePair([
            FluxTube::new(Vec2::new(0.5, -1.0), 0.3, PI),
            FluxTube::new(Vec2::new(-0.5, -1.0), 0.3, -PI),
        ]);
        let bore = FieldModel::ToroidBore(ToroidBore::new((0.0, 5.0), (-1.0, 1.0), 1.0, 0.5));
        let scalar = FieldModel::UniformScalar(UniformScalar {
            region: None,
            volts: 1.0,
            ramp: 0.5,
        });
        let gauges = [
            GaugeFunction::Constant { c: 0.7 },
            GaugeFunction::Linear {
                a: Vec2::new(0.3, 0.6),
            },
            GaugeFunction::GaussianBump {
                center: Vec2::new(0.0, 1.0),
                width: 1.0,
                height: 3.0,
            },
            GaugeFunction::TimeLinear { rate: 2.0 },
        ];
        let mut out = vec![FieldModel::Vacuum, tube.clone(), pair, bore.clone(), scalar];
        out.extend(gauges.iter().cloned().map(FieldModel::PureGauge));
        out.push(FieldModel::Superposition(vec![tube, bore]));
        out
    }

    #[test]
    fn anchored_at_source() {
        for f in catalog() {
            let src = reduced_src(&f);
            assert_eq!(local_frequency(&src, &f, src.r0), src.nu0);
            assert_eq!(local_wavevector(&src, &f, src.r0), src.k0);
        }
    }

    #[test]
    fn frequency_follows_scalar_potential() {
        let f = FieldModel::UniformScalar(UniformScalar {
            region: Some(crate::fields::Rect {
                x_lo: -1.0,
                x_hi: 1.0,
                z_lo: 0.0,
                z_hi: 1.0,
            }),
            volts: 3.0,
            ramp: 0.0,
        });
        let src = reduced_src(&f);
        let nu = local_frequency(&src, &f, Point::new(0.0, 0.5, 0.0));
        assert!((nu - (src.nu0 + 3.0 / (2.0 * PI))).abs() < 1e-15);
        let neutral = SourceRef {
            q: 0.0,
            ..src.clone()
        };
        assert_eq!(
            local_frequency(&neutral, &f, Point::new(0.0, 0.5, 0.0)),
            src.nu0
        );
    }

    #[test]
    fn wavevector_in_bore_is_collinear_shift() {
        let f = FieldModel::ToroidBore(ToroidBore::new((0.0, 5.0), (-1.0, 1.0), 2.0, 0.25));
        let src = reduced_src(&f);
        let k = local_wavevector(&src, &f, Point::new(0.0, 2.0, 0.0));
        assert_eq!(k, Vec2::new(0.0, 2.0 * PI + 0.5));
        let vac = FieldModel::Vacuum;
        assert_eq!(
            local_wavevector(&reduced_src(&vac), &vac, Point::new(3.0, 3.0, 1.0)),
            src.k0
        );
    }

    #[test]
    fn kg_identity_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for f in catalog() {
            let src = reduced_src(&f);
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let p = Point::new(
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(0.0..3.0),
                );
                worst = worst.max(kg_residual(&src, &f, p));
            }
            assert!(worst < 1e-12, "{f:?}: {worst}");
        }
        let vac = FieldModel::Vacuum;
        assert_eq!(
            kg_residual(&reduced_src(&vac), &vac, Point::new(1.0, 2.0, 3.0)),
            0.0
        );
    }

    #[test]
    fn gauge_covariance() {
        let base = FieldModel::FluxTube(FluxTube::new(Vec2::new(0.0, 1.0), 0.5, PI));
        let p = Point::new(0.7, 2.0, 0.0);
        let src = reduced_src(&base);
        let k = local_wavevector(&src, &base, p);
        for g in [
            GaugeFunction::Constant { c: 5.0 },
            GaugeFunction::Linear {
                a: Vec2::new(0.3, -0.2),
            },
            GaugeFunction::GaussianBump {
                center: Vec2::new(0.1, 0.2),
                width: 2.0,
                height: 1.0,
            },
        ] {
            let gf = apply_gauge(&base, &g);
            let gsrc = src.rebind(&gf);
            let kg = local_wavevector(&gsrc, &gf, p);
            let expect = (g.gradient(p) - g.gradient(src.r0)) * (src.q / src.consts.hbar);
            assert!(((kg - k) - expect).norm() < 1e-12);
            if !matches!(g, GaugeFunction::GaussianBump { .. }) {
                assert!((kg - k).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn apparent_mass_arithmetic() {
        let m = apparent_mass_sq(5.0, 1.0 / 3.0, Constants::reduced()).unwrap();
        assert!((m.in_planck_units() - 16.0).abs() < 1e-12);
        assert!((m.m_sq - 16.0 * 4.0 * PI * PI).abs() < 1e-10);
        assert_eq!(
            m,
            apparent_mass_sq(5.0, 1.0 / 3.0, Constants::reduced()).unwrap()
        );
        assert!(matches!(
            apparent_mass_sq(1.0, 0.0, Constants::reduced()),
            Err(Error::NonpositiveWavelength(_))
        ));
        assert!(
            apparent_mass_sq(1.0, 0.5, Constants::reduced())
                .unwrap()
                .m_sq
                < 0.0
        );
    }

    #[test]
    fn apparent_mass_of_free_source_is_rest_mass() {
        let consts = Constants::si();
        let k0 = Vec2::new(0.0, 2.0 * PI / 3e-12);
        let nu0 = SourceRef::free_frequency(k0, ELECTRON_MASS_SI, consts);
        let m = apparent_mass_sq(nu0, 3e-12, consts).unwrap();
        let expect = invariant_mass_sq(ELECTRON_MASS_SI, consts);
        assert!((m.m_sq - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn shift_prediction() {
        let c = Constants::si();
        let s = predict_inverse_wavelength_shift(0.01, 0.01, ELEMENTARY_CHARGE_SI, c).unwrap();
        // e·1e-4 / h, from the exact SI definitions
        let oracle = 1.602_176_634e-23 / 6.626_070_15e-34;
        assert!((s - oracle).abs() < 1e-15 * oracle);
        assert!((s - 2.417_989e10).abs() < 1e4);
        let ch = wavelength_change(s, 3e-12).unwrap();
        assert!((ch.relative_wavenumber - 0.0725).abs() < 5e-4);
        assert!((ch.relative_wavelength + 0.0676).abs() < 5e-4);
        assert_eq!(
            predict_inverse_wavelength_shift(0.0, 0.01, 1.0, c).unwrap(),
            0.0
        );
        let d = predict_inverse_wavelength_shift(0.01, 0.02, ELEMENTARY_CHARGE_SI, c).unwrap();
        assert_eq!(d, 2.0 * s);
        assert!(predict_inverse_wavelength_shift(0.01, 0.0, 1.0, c).is_err());
    }
}
