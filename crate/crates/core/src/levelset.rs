//! The level function `u(z) = |f(z)|² − λ|z|² + λ − 1`, its Wirtinger
//! derivatives, boundary seeding and tracing of `∂Ω_λ(f)`.

mod trace;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::{one_minus_abs2, HoloMap, Jet};
use crate::numeric::bisect;

pub use trace::{trace, Parametrization, RadialInterpolant, TraceOptions, TracedCurve, TracedSample};
pub(crate) use trace::polar_sample;

/// A sublevel set `Ω_λ(f) = {u > 0}`, or the Jordan case `Ω(rf)` when `r`
/// is set (then the effective map is `rf` and `λ = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProblem {
    f: HoloMap,
    lambda: f64,
    r: Option<f64>,
}

/// Wirtinger data of `u` at a point. `u_zzbar` is real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wirtinger {
    pub u_z: Complex64,
    pub u_zbar: Complex64,
    pub u_zz: Complex64,
    pub u_zzbar: f64,
}

impl LevelProblem {
    /// `Ω_λ(f)` with `λ ≥ 1`; for `λ = 1` the map must satisfy `f(0) ≠ 0`.
    pub fn new(f: HoloMap, lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidProblem(format!("λ = {lambda} must be ≥ 1")));
        }
        if lambda == 1.0 {
            check_f0(&f)?;
        }
        Ok(Self { f, lambda, r: None })
    }

    /// The Jordan case `Ω(rf)`, `r ∈ (0, 1)`, `f(0) ≠ 0`.
    pub fn scaled(f: HoloMap, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidProblem(format!("r = {r} must lie in (0, 1)")));
        }
        check_f0(&f)?;
        Ok(Self { f, lambda: 1.0, r: Some(r) })
    }

    pub fn map(&self) -> &HoloMap {
        &self.f
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> Option<f64> {
        self.r
    }

    /// Same problem with a different scaling radius.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::scaled(self.f.clone(), r)
    }

    /// Jet of the effective map (`rf` in the Jordan case).
    pub fn effective_jet(&self, z: Complex64) -> Result<Jet> {
        let jet = self.f.jet(z)?;
        Ok(match self.r {
            Some(r) => jet.scale(Complex64::new(r, 0.0)),
            None => jet,
        })
    }

    /// `|g(0)|` for the effective map `g`.
    pub fn effective_f0_modulus(&self) -> f64 {
        self.effective_jet(Complex64::new(0.0, 0.0)).map(|j| j.value.norm()).unwrap_or(f64::NAN)
    }

    pub fn u_value(&self, z: Complex64) -> Result<f64> {
        let jet = self.effective_jet(z)?;
        Ok(u_from(&jet, z, self.lambda))
    }

    /// `(u_z, u_z̄, u_zz, u_zz̄)` at `z`.
    pub fn u_wirtinger(&self, z: Complex64) -> Result<Wirtinger> {
        let jet = self.effective_jet(z)?;
        Ok(wirtinger_from(&jet, z, self.lambda))
    }

    /// `u` and its Wirtinger data from one map evaluation.
    pub fn u_with_wirtinger(&self, z: Complex64) -> Result<(f64, Wirtinger, Jet)> {
        let jet = self.effective_jet(z)?;
        Ok((u_from(&jet, z, self.lambda), wirtinger_from(&jet, z, self.lambda), jet))
    }

    /// Scans 64 rays from the origin for a sign change of `u` and bisects
    /// it. Among the rays that cross, the crossing closest to the origin is
    /// returned.
    pub fn find_boundary_seed(&self) -> Result<Complex64> {
        const RAYS: usize = 64;
        const SAMPLES: usize = 1024;
        let r_max = 1.0 - 1e-6;
        let mut best: Option<(f64, Complex64)> = None;
        for k in 0..RAYS {
            let dir = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / RAYS as f64);
            let u_at = |t: f64| self.u_value(dir * t).unwrap_or(f64::NAN);
            let mut prev_t = 0.0;
            let mut prev_u = u_at(0.0);
            for j in 1..=SAMPLES {
                let t = r_max * j as f64 / SAMPLES as f64;
                if let Some((best_t, _)) = best {
                    if t > best_t + r_max / SAMPLES as f64 {
                        break;
                    }
                }
                let uj = u_at(t);
                if !uj.is_finite() || !prev_u.is_finite() {
                    break;
                }
                if (uj > 0.0) != (prev_u > 0.0) || uj == 0.0 {
                    let root = if uj == 0.0 { t } else { bisect(u_at, prev_t, t, 1e-13) };
                    if best.is_none_or(|(bt, _)| root < bt) {
                        best = Some((root, dir * root));
                    }
                    break;
                }
                prev_t = t;
                prev_u = uj;
            }
        }
        best.map(|(_, z)| z).ok_or(Error::NotFound)
    }

    /// Moves `z` onto `u = 0` by Newton steps along the gradient.
    pub fn correct(&self, mut z: Complex64, tol: f64) -> Result<Complex64> {
        let mut last_step = f64::INFINITY;
        for _ in 0..60 {
            let (u, w, _) = self.u_with_wirtinger(z)?;
            let g = w.u_zbar.norm();
            if g < 1e-10 {
                return Err(Error::SingularGradient { z, modulus: g });
            }
            // directional derivative of u along ∇u/|∇u| is 2|u_z̄|
            let step = -u * w.u_zbar / (2.0 * g * g);
            z += step;
            let s = step.norm();
            if u.abs() < tol && (s < 1e-15 || s >= last_step) {
                return Ok(z);
            }
            last_step = s;
        }
        let u = self.u_value(z)?;
        if u.abs() < tol {
            Ok(z)
        } else {
            Err(Error::CorrectorFailed { z })
        }
    }
}

fn check_f0(f: &HoloMap) -> Result<()> {
    let f0 = f.value(Complex64::new(0.0, 0.0))?;
    if f0.norm() == 0.0 {
        return Err(Error::InvalidProblem("f(0) = 0 is not admitted when λ = 1".into()));
    }
    Ok(())
}

/// `u = λ(1 − |z|²) − (1 − |g|²)`, using the propagated defect of `g`.
pub(crate) fn u_from(jet: &Jet, z: Complex64, lambda: f64) -> f64 {
    lambda * one_minus_abs2(z) - jet.defect
}

pub(crate) fn wirtinger_from(jet: &Jet, z: Complex64, lambda: f64) -> Wirtinger {
    let u_z = jet.d1 * jet.value.conj() - lambda * z.conj();
    Wirtinger { u_z, u_zbar: u_z.conj(), u_zz: jet.d2 * jet.value.conj(), u_zzbar: jet.d1.norm_sqr() - lambda }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn u_at_origin() {
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.2)).unwrap(), 1.0).unwrap();
        assert_abs_diff_eq!(p.u_value(c(0.0, 0.0)).unwrap(), 0.29, epsilon = 1e-15);
        let f = HoloMap::mobius(c(0.3, 0.0)).unwrap();
        let p2 = LevelProblem::new(f, 2.0).unwrap();
        assert_abs_diff_eq!(p2.u_value(c(0.0, 0.0)).unwrap(), 0.09 + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn u_vanishes_on_scaled_constant_circle() {
        let sigma = Complex64::from_polar(1.0, 0.4);
        let p = LevelProblem::scaled(HoloMap::constant(sigma).unwrap(), 0.4).unwrap();
        for k in 0..8 {
            let z = Complex64::from_polar(0.4, k as f64);
            assert_abs_diff_eq!(p.u_value(z).unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_problems() {
        assert!(LevelProblem::new(HoloMap::Identity, 1.0).is_err());
        assert!(LevelProblem::new(HoloMap::Identity, 0.5).is_err());
        assert!(LevelProblem::new(HoloMap::Identity, 1.5).is_ok());
        assert!(LevelProblem::scaled(HoloMap::Constant(c(1.0, 0.0)), 1.0).is_err());
        assert!(LevelProblem::scaled(HoloMap::Constant(c(0.0, 0.0)), 0.5).is_err());
        assert!(matches!(
            LevelProblem::new(HoloMap::Constant(c(0.5, 0.0)), 1.0).unwrap().u_value(c(1.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn wirtinger_identity_map_degenerates() {
        let p = LevelProblem { f: HoloMap::Identity, lambda: 1.0, r: None };
        let w = p.u_wirtinger(c(0.3, 0.2)).unwrap();
        assert_abs_diff_eq!(w.u_z.norm(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(w.u_zz.norm(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(w.u_zzbar, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(p.u_value(c(0.3, 0.2)).unwrap(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn wirtinger_matches_finite_differences() {
        let f = crate::holomap::parse("compose(kalpha(0.6), phi(0.3,0.2))").unwrap();
        let p = LevelProblem::new(f, 1.3).unwrap();
        let z = c(0.2, -0.35);
        let w = p.u_wirtinger(z).unwrap();
        let h = 1e-5;
        let u = |z: Complex64| p.u_value(z).unwrap();
        let ux = (u(z + h) - u(z - h)) / (2.0 * h);
        let uy = (u(z + c(0.0, h)) - u(z - c(0.0, h))) / (2.0 * h);
        assert_abs_diff_eq!((w.u_zbar - 0.5 * c(ux, uy)).norm(), 0.0, epsilon = 1e-8);
        // Laplacian = 4 u_zz̄
        let lap = (u(z + h) + u(z - h) + u(z + c(0.0, h)) + u(z - c(0.0, h)) - 4.0 * u(z)) / (h * h);
        assert_abs_diff_eq!(lap, 4.0 * w.u_zzbar, epsilon = 1e-4);
    }

    #[test]
    fn constant_scaled_gradient_is_minus_z() {
        let p = LevelProblem::scaled(HoloMap::Constant(c(1.0, 0.0)), 0.4).unwrap();
        let z = Complex64::from_polar(0.4, 1.0);
        let w = p.u_wirtinger(z).unwrap();
        assert_abs_diff_eq!((w.u_zbar + z).norm(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(w.u_zbar.norm(), 0.4, epsilon = 1e-16);
    }

    #[test]
    fn automorphism_gradient_nonzero_on_boundary() {
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.0)).unwrap(), 1.0).unwrap();
        let seed = p.find_boundary_seed().unwrap();
        let w = p.u_wirtinger(seed).unwrap();
        assert!(w.u_zbar.norm() > 1e-3);
    }

    #[test]
    fn seed_on_automorphism_geodesic() {
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.0)).unwrap(), 1.0).unwrap();
        let z = p.find_boundary_seed().unwrap();
        assert_abs_diff_eq!((z - 2.0).norm(), 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn seed_on_scaled_constant() {
        let p = LevelProblem::scaled(HoloMap::Constant(c(0.0, 1.0)), 0.4).unwrap();
        let z = p.find_boundary_seed().unwrap();
        assert_abs_diff_eq!(z.norm(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn seed_not_found_when_level_set_fills_disc() {
        // sup|φ_a'| = (1 + |a|)/(1 − |a|) = 3 ≤ λ
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.0)).unwrap(), 3.5).unwrap();
        assert_eq!(p.find_boundary_seed(), Err(Error::NotFound));
        let b = crate::holomap::parse("blaschke([(0.2,0,1),(-0.1,0.1,1)];1,0)").unwrap();
        let p = LevelProblem::new(b, 4.0).unwrap();
        assert_eq!(p.find_boundary_seed(), Err(Error::NotFound));
    }
}
