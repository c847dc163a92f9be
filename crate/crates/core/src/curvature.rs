//! Euclidean and hyperbolic curvature, for parametrized curves and for
//! level curves of `u`.
//!
//! Sign convention: the unit normal is `n = i·γ′/|γ′|`. For boundaries of
//! sublevel sets the orientation is chosen so that `n` points into `Ω`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::{one_minus_abs2, HoloMap, Jet};
use crate::levelset::{LevelProblem, Parametrization, TracedCurve, Wirtinger};
use crate::numeric::fd_weights;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvaturePair {
    /// Signed Euclidean curvature.
    pub ke: f64,
    /// Signed hyperbolic curvature.
    pub kh: f64,
    /// Unit normal used for the sign.
    pub normal: Complex64,
}

impl CurvaturePair {
    /// Builds the pair from `k_e`, enforcing `k_h = (1 − |z|²)k_e − 2 Re(n z̄)`.
    pub fn from_euclidean(z: Complex64, ke: f64, normal: Complex64) -> Self {
        let kh = (1.0 - z.norm_sqr()) * ke - 2.0 * (normal * z.conj()).re;
        Self { ke, kh, normal }
    }
}

/// A `C²` curve that can report `(γ(t), γ′(t), γ″(t))`.
pub trait ParametricCurve {
    fn jet(&self, t: f64) -> (Complex64, Complex64, Complex64);
}

impl<F> ParametricCurve for F
where
    F: Fn(f64) -> (Complex64, Complex64, Complex64),
{
    fn jet(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        self(t)
    }
}

/// `c + ρ e^{it}`, anticlockwise.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl ParametricCurve for Circle {
    fn jet(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        let e = Complex64::from_polar(self.radius, t);
        (self.center + e, I * e, -e)
    }
}

/// Image `φ ∘ γ` of a curve under a holomorphic map.
pub struct MappedCurve<'a, C: ParametricCurve> {
    pub map: &'a HoloMap,
    pub curve: C,
}

impl<C: ParametricCurve> MappedCurve<'_, C> {
    pub fn try_jet(&self, t: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let (z, dz, ddz) = self.curve.jet(t);
        let j = self.map.jet(z)?;
        Ok((j.value, j.d1 * dz, j.d2 * dz * dz + j.d1 * ddz))
    }
}

impl<C: ParametricCurve> ParametricCurve for MappedCurve<'_, C> {
    fn jet(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        self.try_jet(t).expect("mapped curve leaves the disc")
    }
}

/// Curvatures of a parametrized curve at parameter `t`.
pub fn kh_parametric<C: ParametricCurve + ?Sized>(gamma: &C, t: f64) -> Result<CurvaturePair> {
    let (z, d1, d2) = gamma.jet(t);
    curvature_from_derivatives(z, d1, d2)
}

/// Curvatures from `γ, γ′, γ″` at one point.
pub fn curvature_from_derivatives(z: Complex64, d1: Complex64, d2: Complex64) -> Result<CurvaturePair> {
    let speed = d1.norm();
    if speed < 1e-12 {
        return Err(Error::SingularTangent { modulus: speed });
    }
    if !(z.norm() < 1.0) {
        return Err(Error::Domain { z });
    }
    let ke = (d2 * d1.conj()).im / (speed * speed * speed);
    let kh = ((1.0 - z.norm_sqr()) * d2 / d1 + 2.0 * z.conj() * d1).im / speed;
    Ok(CurvaturePair { ke, kh, normal: I * d1 / speed })
}

/// Curvature of the level curve `u = 0` through `z` from Wirtinger data,
/// oriented with inward normal `n = u_z̄/|u_z̄|`.
///
/// Along an arclength parametrization with `γ′ = −i n`, `(u∘γ)″ = 0`
/// reads `Re(u_zz γ′²) + u_zz̄ + k_e |u_z̄| = 0`.
pub fn curvature_from_wirtinger(z: Complex64, w: &Wirtinger) -> Result<CurvaturePair> {
    let g = w.u_zbar.norm();
    if g < 1e-10 {
        return Err(Error::SingularGradient { z, modulus: g });
    }
    let normal = w.u_zbar / g;
    let tangent = -I * normal;
    let ke = -((w.u_zz * tangent * tangent).re + w.u_zzbar) / g;
    Ok(CurvaturePair::from_euclidean(z, ke, normal))
}

/// Curvature of the level curve of `(1 − |g|²)/(1 − |z|²)` through `z`,
/// where `g` is the effective map with jet `jet` at `z`.
///
/// The curve is moved by the involution `φ_z` so that `z` goes to the
/// origin, where `k_h(z) = k_e(0)` of the image curve. In that frame the
/// defining function is `(1 − |h(w)|²)·|1 − z̄w|²/(1 − |w|²)` (up to the
/// constant `1 − |z|²`) with `h = g∘φ_z`, and all its derivatives at 0 are
/// of the size of `1 − |g|²`. Unlike the Wirtinger form of `u`, nothing
/// large cancels when `z` approaches ∂𝔻, so the result stays accurate at
/// the ends of open arcs.
pub fn curvature_in_origin_frame(z: Complex64, jet: &Jet) -> Result<CurvaturePair> {
    let c = one_minus_abs2(z);
    if !(c > 0.0) {
        return Err(Error::Domain { z });
    }
    let zb = z.conj();
    // φ_z′(0) = −c, φ_z″(0) = −2z̄c
    let h0 = jet.value;
    let h1 = -c * jet.d1;
    let h2 = c * c * jet.d2 - 2.0 * zb * c * jet.d1;
    let n = jet.defect;
    let n_w = -h1 * h0.conj();
    let n_ww = -h2 * h0.conj();
    let n_wwbar = -h1.norm_sqr();
    // A = |1 − z̄w|²/(1 − |w|²): A(0) = 1, A_w = −z̄, A_ww = 0, A_ww̄ = 1 + |z|²
    let r_w = n_w - n * zb;
    let r_ww = n_ww - 2.0 * n_w * zb;
    let r_wwbar = n_wwbar + 2.0 * (n_w * -z).re + n * (1.0 + z.norm_sqr());
    // defining function λ − R, positive inside
    let grad = -r_w.conj();
    let g = grad.norm();
    if !(g > 1e-300) {
        return Err(Error::SingularGradient { z, modulus: g });
    }
    let normal0 = grad / g;
    let t0 = -I * normal0;
    let kh = ((r_ww * t0 * t0).re + r_wwbar) / g;
    // dφ_z at 0 is multiplication by −c: normals turn by π
    let normal = -normal0;
    let ke = (kh + 2.0 * (normal * zb).re) / c;
    Ok(CurvaturePair { ke, kh, normal })
}

/// Curvature of `∂_𝔻Ω_λ(f)` at a boundary point.
pub fn kh_implicit(p: &LevelProblem, z: Complex64) -> Result<CurvaturePair> {
    let (u, w, _) = p.u_with_wirtinger(z)?;
    if u.abs() > 1e-10 {
        return Err(Error::OffCurve { z, residual: u });
    }
    curvature_from_wirtinger(z, &w)
}

/// Largest deviation between the stored sample curvatures and `k_h`
/// recomputed from five-point finite differences of the sample positions.
/// Open arcs skip the two samples at each end.
pub fn cross_validate(_p: &LevelProblem, curve: &TracedCurve) -> f64 {
    let samples = curve.samples();
    let n = samples.len();
    if n < 5 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    match curve.parametrization() {
        Parametrization::UniformAngle { step } if curve.is_closed() => {
            let w = fd_weights(0.0, &[-2.0 * step, -step, 0.0, step, 2.0 * step], 2);
            for i in 0..n {
                let (d1, d2) = stencil(&w, |k| samples[(i + n + k - 2) % n].z);
                if let Ok(pair) = curvature_from_derivatives(samples[i].z, d1, d2) {
                    worst = worst.max((pair.kh - samples[i].kh).abs());
                }
            }
        }
        _ => {
            let range = if curve.is_closed() { 0..n } else { 2..n - 2 };
            for i in range {
                let idx: Vec<usize> = (0..5).map(|k| (i + n + k - 2) % n).collect();
                // unwrap the parameter across the seam of closed curves
                let period = curve.period();
                let t0 = samples[i].t;
                let ts: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| {
                        let mut t = samples[j].t;
                        if k < 2 && t > t0 {
                            t -= period;
                        } else if k > 2 && t < t0 {
                            t += period;
                        }
                        t
                    })
                    .collect();
                let w = fd_weights(t0, &ts, 2);
                let (d1, d2) = stencil(&w, |k| samples[idx[k]].z);
                if let Ok(pair) = curvature_from_derivatives(samples[i].z, d1, d2) {
                    worst = worst.max((pair.kh - samples[i].kh).abs());
                }
            }
        }
    }
    worst
}

fn stencil(w: &[Vec<f64>], z: impl Fn(usize) -> Complex64) -> (Complex64, Complex64) {
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut d2 = Complex64::new(0.0, 0.0);
    for k in 0..5 {
        let zk = z(k);
        d1 += w[1][k] * zk;
        d2 += w[2][k] * zk;
    }
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn centred_circle() {
        for &r in &[0.1, 0.5, 0.9] {
            let circle = Circle { center: c(0.0, 0.0), radius: r };
            for k in 0..12 {
                let pair = kh_parametric(&circle, k as f64 * 0.5).unwrap();
                assert_abs_diff_eq!(pair.kh, r + 1.0 / r, epsilon = 1e-12);
                assert_abs_diff_eq!(pair.ke, 1.0 / r, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn off_centre_circle() {
        let circle = Circle { center: c(0.3, -0.2), radius: 0.4 };
        let expect = (1.0 - 0.13 + 0.16) / 0.4;
        for k in 0..12 {
            let pair = kh_parametric(&circle, k as f64 * 0.5).unwrap();
            assert_abs_diff_eq!(pair.kh, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn diameter_is_geodesic() {
        let line = |t: f64| (c(t, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        for &t in &[-0.9, -0.2, 0.0, 0.5] {
            let pair = kh_parametric(&line, t).unwrap();
            assert_eq!(pair.kh, 0.0);
            assert_eq!(pair.ke, 0.0);
        }
    }

    #[test]
    fn quartic_flat_point() {
        let gamma = |t: f64| (c(t, t.powi(4)), c(1.0, 4.0 * t.powi(3)), c(0.0, 12.0 * t * t));
        // fit the O(t⁴) constant once on the interval, then check the bound
        let ts: Vec<f64> = (1..=100).map(|k| -0.1 + 0.002 * k as f64).filter(|t| t.abs() > 1e-9).collect();
        let ratio = ts
            .iter()
            .map(|&t| (kh_parametric(&gamma, t).unwrap().kh - 12.0 * t * t).abs() / t.powi(4))
            .fold(0.0f64, f64::max);
        assert!(ratio < 10.0, "O(t⁴) constant {ratio}");
        for &t in &ts {
            let kh = kh_parametric(&gamma, t).unwrap().kh;
            assert!((kh - 12.0 * t * t).abs() <= ratio * t.powi(4) + 1e-15);
        }
        assert_eq!(kh_parametric(&gamma, 0.0).unwrap().kh, 0.0);
    }

    #[test]
    fn reversing_orientation_negates() {
        let fwd = Circle { center: c(0.1, 0.2), radius: 0.3 };
        let rev = |t: f64| {
            let (z, d1, d2) = fwd.jet(-t);
            (z, -d1, d2)
        };
        for &t in &[0.0, 1.0, 2.5] {
            let a = kh_parametric(&fwd, t).unwrap();
            let b = kh_parametric(&rev, -t).unwrap();
            assert_abs_diff_eq!(a.kh, -b.kh, epsilon = 1e-13);
            assert_abs_diff_eq!(a.ke, -b.ke, epsilon = 1e-13);
        }
    }

    #[test]
    fn hyperbolic_circle_coth() {
        for &rh in &[0.1, 0.7, 2.0] {
            let rho = f64::tanh(rh);
            let pair = kh_parametric(&Circle { center: c(0.0, 0.0), radius: rho }, 0.3).unwrap();
            assert_abs_diff_eq!(pair.kh, 2.0 / (2.0 * rh).tanh(), epsilon = 1e-12);
        }
    }

    #[test]
    fn invariant_holds_in_pair() {
        let circle = Circle { center: c(0.2, 0.1), radius: 0.5 };
        let (z, _, _) = circle.jet(0.4);
        let pair = kh_parametric(&circle, 0.4).unwrap();
        let rebuilt = (1.0 - z.norm_sqr()) * pair.ke - 2.0 * (pair.normal * z.conj()).re;
        assert_abs_diff_eq!(pair.kh, rebuilt, epsilon = 1e-14);
    }

    #[test]
    fn singular_tangent() {
        let stuck = |_t: f64| (c(0.1, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(kh_parametric(&stuck, 0.0), Err(Error::SingularTangent { .. })));
    }

    #[test]
    fn implicit_scaled_constant() {
        let p = LevelProblem::scaled(HoloMap::Constant(c(1.0, 0.0)), 0.3).unwrap();
        for k in 0..6 {
            let z = Complex64::from_polar(0.3, k as f64);
            let pair = kh_implicit(&p, z).unwrap();
            assert_abs_diff_eq!(pair.kh, 0.3 + 1.0 / 0.3, epsilon = 1e-13);
            assert_abs_diff_eq!((pair.normal + z / 0.3).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn implicit_off_curve() {
        let p = LevelProblem::scaled(HoloMap::Constant(c(1.0, 0.0)), 0.3).unwrap();
        assert!(matches!(kh_implicit(&p, c(0.1, 0.0)), Err(Error::OffCurve { .. })));
    }

    #[test]
    fn implicit_automorphism_level_circle() {
        // |ζ − 2| = √2.5 and k_h = √2.5·0.2
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.0)).unwrap(), 1.2).unwrap();
        let rho = 2.5f64.sqrt();
        for &t in &[2.9, 3.0, 3.15, 3.3, 3.4] {
            let z = p.correct(c(2.0, 0.0) + Complex64::from_polar(rho, t), 1e-14).unwrap();
            let pair = kh_implicit(&p, z).unwrap();
            assert_abs_diff_eq!(pair.kh, 0.2 * rho, epsilon = 1e-12);
        }
    }

    #[test]
    fn origin_frame_agrees_with_wirtinger_form() {
        let f = crate::holomap::parse("compose(kalpha(0.6),phi(0.3,0.2))").unwrap();
        for p in [LevelProblem::scaled(f.clone(), 0.7).unwrap(), LevelProblem::new(f, 1.5).unwrap()] {
            let seed = p.find_boundary_seed().unwrap();
            for k in 0..8 {
                let z = p.correct(seed * Complex64::from_polar(1.0, 0.05 * k as f64), 1e-13).unwrap();
                let (_, w, jet) = p.u_with_wirtinger(z).unwrap();
                let a = curvature_from_wirtinger(z, &w).unwrap();
                let b = curvature_in_origin_frame(z, &jet).unwrap();
                assert_abs_diff_eq!(a.ke, b.ke, epsilon = 1e-10);
                assert_abs_diff_eq!(a.kh, b.kh, epsilon = 1e-10);
                assert_abs_diff_eq!((a.normal - b.normal).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn origin_frame_is_accurate_near_the_unit_circle() {
        // geodesic arc of φ_a at λ = 1, circle |z − 1/a| = √(1/a² − 1)
        let a = 0.3;
        let p = LevelProblem::new(HoloMap::mobius(c(a, 0.0)).unwrap(), 1.0).unwrap();
        let b: f64 = 1.0 / a;
        let rho = (b * b - 1.0).sqrt();
        let end = std::f64::consts::PI - (rho / b).acos();
        for eps in [1e-3, 1e-4, 2e-5] {
            let z = p.correct(b + rho * Complex64::from_polar(1.0, end + eps), 1e-14).unwrap();
            let jet = p.effective_jet(z).unwrap();
            let pair = curvature_in_origin_frame(z, &jet).unwrap();
            assert!(pair.kh.abs() < 1e-10, "{eps}: {}", pair.kh);
            assert_abs_diff_eq!(pair.ke, -1.0 / rho, epsilon = 1e-6);
        }
    }
}
