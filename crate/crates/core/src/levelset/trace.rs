//! Predictor–corrector tracing of `u = 0`.
//!
//! The marcher takes curvature-adaptive steps along the unit tangent
//! `t = −i·u_z̄/|u_z̄|` and projects back onto the curve with Newton steps
//! along the gradient. A closed curve that is starlike about the origin is
//! then resampled on a uniform angular grid: every sample is re-solved on
//! `u = 0` and carries the exact speed `|dz/dθ|`, which makes the periodic
//! trapezoid rule spectrally accurate for the measures downstream.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::LevelProblem;
use crate::curvature::{curvature_from_wirtinger, curvature_in_origin_frame, CurvaturePair};
use crate::error::{Error, Result};
use crate::numeric::{bisect, compensated_sum};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceOptions {
    /// Turning angle allowed per step; the step is `angle_budget / |k_e|`
    /// clamped to `[h_min, h_max]`.
    pub angle_budget: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Open arcs stop once `|z| > 1 − edge_margin`.
    pub edge_margin: f64,
    /// Corrector stops when `|u| <` this and the Newton update has stalled.
    pub corrector_tol: f64,
    pub max_steps: usize,
    /// Resample closed starlike curves on a uniform angular grid.
    pub resample: bool,
    /// Angular grid size is the next power of two above
    /// `oversample × (raw sample count)`.
    pub oversample: usize,
    pub min_samples: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            angle_budget: 0.05,
            h_min: 1e-5,
            h_max: 0.02,
            edge_margin: 1e-4,
            corrector_tol: 1e-12,
            max_steps: 2_000_000,
            resample: true,
            oversample: 2,
            min_samples: 64,
        }
    }
}

impl TraceOptions {
    /// Divides every step control by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            angle_budget: self.angle_budget / factor,
            h_min: self.h_min / factor,
            h_max: self.h_max / factor,
            ..*self
        }
    }
}

/// One sample of a traced curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracedSample {
    pub z: Complex64,
    pub tangent: Complex64,
    /// `i·tangent`, pointing into `Ω`.
    pub normal: Complex64,
    pub ke: f64,
    pub kh: f64,
    /// Cumulative arc length from the first sample.
    pub s: f64,
    /// Curve parameter: arc length for adaptive samples, polar angle for
    /// uniform angular samples.
    pub t: f64,
    /// `|dz/dt|`.
    pub speed: f64,
    pub u_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Parametrization {
    /// Adaptive predictor–corrector samples, parameter = chord arc length.
    Arclength,
    /// Uniform polar-angle grid with spacing `step`.
    UniformAngle { step: f64 },
}

/// An oriented sample sequence of a level curve, inward normal into `Ω`.
#[derive(Debug, Clone, Serialize)]
pub struct TracedCurve {
    samples: Vec<TracedSample>,
    closed: bool,
    parametrization: Parametrization,
    raw_len: usize,
    quadrature_check: Option<f64>,
}

impl TracedCurve {
    pub fn samples(&self) -> &[TracedSample] {
        &self.samples
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    /// Number of predictor–corrector steps before resampling.
    pub fn raw_len(&self) -> usize {
        self.raw_len
    }

    /// Relative change of the hyperbolic perimeter between the full angular
    /// grid and every other sample; small means the grid resolves the curve.
    pub fn quadrature_check(&self) -> Option<f64> {
        self.quadrature_check
    }

    /// Parameter period of a closed curve.
    pub fn period(&self) -> f64 {
        match self.parametrization {
            Parametrization::UniformAngle { .. } => TAU,
            Parametrization::Arclength => {
                let last = self.samples.last().expect("non-empty curve");
                last.t + (self.samples[0].z - last.z).norm()
            }
        }
    }

    /// Trigonometric interpolant of `|z|` against `arg z` for uniform
    /// angular curves.
    pub fn radial_interpolant(&self) -> Option<RadialInterpolant> {
        match self.parametrization {
            Parametrization::UniformAngle { step } => {
                let radii: Vec<f64> = self.samples.iter().map(|s| s.z.norm()).collect();
                Some(RadialInterpolant::new(&radii, self.samples[0].t, step))
            }
            Parametrization::Arclength => None,
        }
    }
}

/// Fourier interpolant of a periodic radius function sampled uniformly.
#[derive(Debug, Clone)]
pub struct RadialInterpolant {
    coeffs: Arc<Vec<Complex64>>,
    theta0: f64,
}

impl RadialInterpolant {
    fn new(radii: &[f64], theta0: f64, _step: f64) -> Self {
        let n = radii.len();
        let mut buf: Vec<Complex64> = radii.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        for c in buf.iter_mut() {
            *c /= n as f64;
        }
        Self { coeffs: Arc::new(buf), theta0 }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.coeffs.len();
        let x = theta - self.theta0;
        let mut acc = self.coeffs[0].re;
        for k in 1..n.div_ceil(2) {
            acc += 2.0 * (self.coeffs[k] * Complex64::from_polar(1.0, k as f64 * x)).re;
        }
        if n.is_multiple_of(2) {
            acc += (self.coeffs[n / 2] * Complex64::from_polar(1.0, (n / 2) as f64 * x)).re;
        }
        acc
    }
}

enum MarchEnd {
    Closed,
    Exited,
}

/// Traces the component of `∂_𝔻Ω_λ(f)` through `seed`.
pub fn trace(p: &LevelProblem, seed: Complex64, opts: &TraceOptions) -> Result<TracedCurve> {
    let u0 = p.u_value(seed)?;
    if u0.abs() > 1e-8 {
        return Err(Error::OffCurve { z: seed, residual: u0 });
    }
    let seed = p.correct(seed, opts.corrector_tol)?;
    let (forward, end) = march(p, seed, 1.0, opts, true)?;
    match end {
        MarchEnd::Closed => {
            let raw_len = forward.len();
            if opts.resample {
                if let Some(curve) = polar_resample(p, &forward, opts)? {
                    return Ok(curve);
                }
            }
            let mut curve = adaptive_curve(p, &forward, true)?;
            curve.raw_len = raw_len;
            Ok(curve)
        }
        MarchEnd::Exited => {
            let (backward, _) = march(p, seed, -1.0, opts, false)?;
            let mut pts: Vec<Complex64> = backward.into_iter().skip(1).rev().collect();
            pts.extend(forward);
            adaptive_curve(p, &pts, false)
        }
    }
}

fn march(
    p: &LevelProblem,
    seed: Complex64,
    dir: f64,
    opts: &TraceOptions,
    allow_close: bool,
) -> Result<(Vec<Complex64>, MarchEnd)> {
    let mut pts = vec![seed];
    let mut z = seed;
    let seed_tangent = tangent_at(p, seed)?;
    for _ in 0..opts.max_steps {
        let w = p.u_wirtinger(z)?;
        let pair = curvature_from_wirtinger(z, &w)?;
        let n = pair.normal;
        let t = -I * n;
        let mut h = (opts.angle_budget / pair.ke.abs()).clamp(opts.h_min, opts.h_max);
        if allow_close && pts.len() > 8 && (z - seed).norm() <= h && dot(t, seed_tangent) > 0.99 {
            return Ok((pts, MarchEnd::Closed));
        }
        let next = loop {
            let zp = z + dir * h * t + 0.5 * h * h * pair.ke * n;
            let accepted = if zp.norm() < 1.0 {
                match p.correct(zp, opts.corrector_tol) {
                    Ok(zn) if (zn - zp).norm() < 0.5 * h && (zn - z).norm() > 0.25 * h => {
                        match tangent_at(p, zn) {
                            Ok(tn) if dot(tn, t) > 0.5 => Some(zn),
                            _ => None,
                        }
                    }
                    _ => None,
                }
            } else {
                None
            };
            // land the last point of an arc near the edge margin rather than
            // far inside it, where |∇u| vanishes and positions lose accuracy
            let overshoot = |zn: Complex64| {
                1.0 - zn.norm() < 0.5 * opts.edge_margin && 1.0 - z.norm() >= opts.edge_margin
            };
            match accepted {
                Some(zn) if !overshoot(zn) || h < opts.h_min => break zn,
                _ => {}
            }
            h *= 0.5;
            if h < 1e-3 * opts.h_min {
                return Err(Error::CorrectorFailed { z });
            }
        };
        z = next;
        pts.push(z);
        if 1.0 - z.norm() < opts.edge_margin {
            return Ok((pts, MarchEnd::Exited));
        }
    }
    Err(Error::MaxSteps(opts.max_steps))
}

fn dot(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).re
}

fn tangent_at(p: &LevelProblem, z: Complex64) -> Result<Complex64> {
    let w = p.u_wirtinger(z)?;
    let g = w.u_zbar.norm();
    if g < 1e-10 {
        return Err(Error::SingularGradient { z, modulus: g });
    }
    Ok(-I * w.u_zbar / g)
}

fn sample_at(p: &LevelProblem, z: Complex64, s: f64, t: f64, speed: f64) -> Result<TracedSample> {
    let (u, w, jet) = p.u_with_wirtinger(z)?;
    // gradient check on u itself, curvature from the better conditioned frame
    curvature_from_wirtinger(z, &w)?;
    let CurvaturePair { ke, kh, normal } = curvature_in_origin_frame(z, &jet)?;
    Ok(TracedSample { z, tangent: -I * normal, normal, ke, kh, s, t, speed, u_residual: u })
}

fn adaptive_curve(p: &LevelProblem, pts: &[Complex64], closed: bool) -> Result<TracedCurve> {
    let mut s = 0.0;
    let mut samples = Vec::with_capacity(pts.len());
    for (i, &z) in pts.iter().enumerate() {
        if i > 0 {
            s += (z - pts[i - 1]).norm();
        }
        samples.push(sample_at(p, z, s, s, 1.0)?);
    }
    Ok(TracedCurve {
        samples,
        closed,
        parametrization: Parametrization::Arclength,
        raw_len: pts.len(),
        quadrature_check: None,
    })
}

/// Unwrapped polar angles of a closed polygon, if it winds once
/// anticlockwise around the origin with strictly increasing angle.
fn starlike_angles(pts: &[Complex64]) -> Option<Vec<f64>> {
    let mut angles = Vec::with_capacity(pts.len() + 1);
    let mut acc = pts[0].arg();
    angles.push(acc);
    for i in 1..=pts.len() {
        let a = pts[i - 1];
        let b = pts[i % pts.len()];
        let d = (b / a).arg();
        if !(d > 0.0) {
            return None;
        }
        acc += d;
        angles.push(acc);
    }
    if ((acc - angles[0]) - TAU).abs() > 1e-6 {
        return None;
    }
    Some(angles)
}

/// Point of the curve on the ray at angle `theta`, by Newton on the radius
/// starting from `guess`, with a bracketing fallback.
pub(crate) fn polar_root(p: &LevelProblem, theta: f64, guess: f64) -> Result<f64> {
    let dir = Complex64::from_polar(1.0, theta);
    let mut rho = guess;
    for _ in 0..50 {
        let (u, w, _) = p.u_with_wirtinger(dir * rho)?;
        let du = 2.0 * (w.u_z * dir).re;
        if du == 0.0 || !du.is_finite() {
            break;
        }
        let step = u / du;
        rho -= step;
        if !(rho > 0.0 && rho < 1.0) || (rho - guess).abs() > 0.05 {
            break;
        }
        if step.abs() < 4.0 * f64::EPSILON * rho {
            let (u, _, _) = p.u_with_wirtinger(dir * rho)?;
            if u.abs() < 1e-12 {
                return Ok(rho);
            }
        }
    }
    // bracket around the guess and bisect
    let u_at = |r: f64| p.u_value(dir * r).unwrap_or(f64::NAN);
    let mut delta = 1e-4;
    while delta < 0.5 {
        let lo = (guess - delta).max(0.0);
        let hi = (guess + delta).min(1.0 - 1e-12);
        let (ul, uh) = (u_at(lo), u_at(hi));
        if ul.is_finite() && uh.is_finite() && (ul > 0.0) != (uh > 0.0) {
            return Ok(bisect(u_at, lo, hi, 1e-16));
        }
        delta *= 2.0;
    }
    Err(Error::CorrectorFailed { z: dir * guess })
}

/// Curve sample on the ray at `theta` together with `dz/dθ`.
pub(crate) fn polar_sample(p: &LevelProblem, theta: f64, guess: f64) -> Result<(TracedSample, Complex64)> {
    let rho = polar_root(p, theta, guess)?;
    let dir = Complex64::from_polar(1.0, theta);
    let z = dir * rho;
    let sample = sample_at(p, z, 0.0, theta, 0.0)?;
    let w = p.u_wirtinger(z)?;
    let drho = -(I * z * w.u_z).re / (dir * w.u_z).re;
    let dz = drho * dir + I * z;
    if dot(dz, sample.tangent) <= 0.0 {
        return Err(Error::CorrectorFailed { z });
    }
    Ok((TracedSample { speed: dz.norm(), ..sample }, dz))
}

fn polar_resample(p: &LevelProblem, raw: &[Complex64], opts: &TraceOptions) -> Result<Option<TracedCurve>> {
    let Some(angles) = starlike_angles(raw) else {
        return Ok(None);
    };
    let n = (opts.oversample * raw.len()).next_power_of_two().max(opts.min_samples.next_power_of_two());
    let step = TAU / n as f64;
    let theta0 = angles[0];
    let mut radii: Vec<f64> = raw.iter().map(|z| z.norm()).collect();
    radii.push(radii[0]);
    let mut samples = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let theta = theta0 + k as f64 * step;
        while seg + 1 < angles.len() - 1 && angles[seg + 1] <= theta {
            seg += 1;
        }
        let frac = (theta - angles[seg]) / (angles[seg + 1] - angles[seg]);
        let guess = radii[seg] + frac * (radii[seg + 1] - radii[seg]);
        let (sample, _) = match polar_sample(p, theta, guess) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        samples.push(sample);
    }
    // cumulative arc length by the periodic trapezoid rule
    let mut s = 0.0;
    for k in 0..n {
        samples[k].s = s;
        s += 0.5 * step * (samples[k].speed + samples[(k + 1) % n].speed);
        samples[k].t = wrap_angle(samples[k].t);
    }
    let density = |smp: &TracedSample| smp.speed / (1.0 - smp.z.norm_sqr());
    let full = step * compensated_sum(samples.iter().map(density));
    let half = 2.0 * step * compensated_sum(samples.iter().step_by(2).map(density));
    Ok(Some(TracedCurve {
        samples,
        closed: true,
        parametrization: Parametrization::UniformAngle { step },
        raw_len: raw.len(),
        quadrature_check: Some(((full - half) / full).abs()),
    }))
}

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}
