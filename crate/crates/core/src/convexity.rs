//! Euclidean convexity of `Ω(rf)` and the radius of convexity
//! `ω_f = sup{r : Ω(rf) convex}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::HoloMap;
use crate::levelset::{polar_sample, trace, LevelProblem, Parametrization, TraceOptions, TracedCurve};
use crate::numeric::golden_section_min;

/// Decision tolerance on the minimum Euclidean curvature.
pub const CONVEXITY_TOL: f64 = 1e-9;

pub const RADIUS_BRACKET: (f64, f64) = (0.05, 1.0 - 1e-6);
pub const RADIUS_WIDTH: f64 = 1e-6;
pub const RADIUS_MAX_DEPTH: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Convex,
    Nonconvex,
    /// `min k_e` within the tolerance band around zero.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub r: f64,
    pub min_ke: f64,
    pub min_kh: f64,
    /// Boundary point where `min_ke` is attained.
    pub argmin: Complex64,
    pub verdict: Verdict,
}

impl ConvexityCertificate {
    pub fn hyperbolically_convex(&self) -> bool {
        self.min_kh >= -CONVEXITY_TOL
    }

    pub fn witness(&self) -> Option<(Complex64, f64)> {
        (self.verdict == Verdict::Nonconvex).then_some((self.argmin, self.min_ke))
    }
}

pub fn verdict(min_ke: f64) -> Verdict {
    if min_ke >= CONVEXITY_TOL {
        Verdict::Convex
    } else if min_ke < -10.0 * CONVEXITY_TOL {
        Verdict::Nonconvex
    } else {
        Verdict::Inconclusive
    }
}

pub fn certify(p: &LevelProblem) -> Result<ConvexityCertificate> {
    certify_with(p, &TraceOptions::default())
}

pub fn certify_with(p: &LevelProblem, opts: &TraceOptions) -> Result<ConvexityCertificate> {
    if p.r().is_none() {
        return Err(Error::RequirementMismatch {
            check: "convexity".into(),
            reason: "needs a scaled problem Ω(rf)".into(),
        });
    }
    let curve = trace(p, p.find_boundary_seed()?, opts)?;
    certify_curve(p, &curve)
}

/// Minimum curvatures over the samples, refined by golden-section search in
/// the polar angle around the minimizing sample.
pub fn certify_curve(p: &LevelProblem, curve: &TracedCurve) -> Result<ConvexityCertificate> {
    let r = p.r().ok_or_else(|| Error::RequirementMismatch {
        check: "convexity".into(),
        reason: "needs a scaled problem Ω(rf)".into(),
    })?;
    let samples = curve.samples();
    let argmin_by = |key: fn(&crate::levelset::TracedSample) -> f64| {
        samples
            .iter()
            .enumerate()
            .min_by(|a, b| key(a.1).total_cmp(&key(b.1)))
            .map(|(i, _)| i)
            .expect("non-empty curve")
    };
    let ie = argmin_by(|s| s.ke);
    let ih = argmin_by(|s| s.kh);
    let (mut min_ke, mut argmin) = (samples[ie].ke, samples[ie].z);
    let mut min_kh = samples[ih].kh;
    if let Parametrization::UniformAngle { step } = curve.parametrization() {
        let refine = |i: usize, pick: fn(&crate::levelset::TracedSample) -> f64| {
            let s = &samples[i];
            golden_section_min(
                |theta| polar_sample(p, theta, s.z.norm()).map(|(x, _)| pick(&x)),
                s.t - step,
                s.t + step,
                1e-10,
            )
        };
        let (theta, ke) = refine(ie, |s| s.ke)?;
        if ke < min_ke {
            min_ke = ke;
            argmin = polar_sample(p, theta, samples[ie].z.norm())?.0.z;
        }
        min_kh = min_kh.min(refine(ih, |s| s.kh)?.1);
    }
    Ok(ConvexityCertificate { r, min_ke, min_kh, argmin, verdict: verdict(min_ke) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityRadius {
    pub omega: f64,
    pub bracket: (f64, f64),
    /// The upper end never moved: every tested `r` was convex.
    pub capped: bool,
    /// First nonconvex certificate met by the search.
    pub witness: Option<ConvexityCertificate>,
    pub depth: usize,
}

/// Bisection on `r` using [`certify`], returning the midpoint of the final
/// bracket, or the upper cap when no nonconvex `r` was met. Convexity is
/// monotone in `r`, so an inconclusive certificate is taken as the convex
/// side: it only occurs within the tolerance band of `ω_f` itself.
pub fn radius_of_convexity(f: &HoloMap) -> Result<ConvexityRadius> {
    radius_of_convexity_with(f, &TraceOptions::default())
}

pub fn radius_of_convexity_with(f: &HoloMap, opts: &TraceOptions) -> Result<ConvexityRadius> {
    let (mut lo, mut hi) = RADIUS_BRACKET;
    let base = LevelProblem::scaled(f.clone(), lo)?;
    if certify_with(&base, opts)?.verdict == Verdict::Nonconvex {
        return Err(Error::InvalidProblem(format!("Ω({lo}f) is not convex")));
    }
    let mut witness = None;
    let mut depth = 0;
    while hi - lo > RADIUS_WIDTH {
        depth += 1;
        if depth > RADIUS_MAX_DEPTH {
            return Err(Error::Abort(depth));
        }
        let mid = 0.5 * (lo + hi);
        let cert = certify_with(&base.with_r(mid)?, opts)?;
        if cert.verdict == Verdict::Nonconvex {
            hi = mid;
            witness.get_or_insert(cert);
        } else {
            lo = mid;
        }
    }
    let capped = hi == RADIUS_BRACKET.1;
    Ok(ConvexityRadius {
        // a capped search only shows ω ≥ the cap
        omega: if capped { hi } else { 0.5 * (lo + hi) },
        bracket: (lo, hi),
        capped,
        witness,
        depth,
    })
}

/// `√(√2 + 2) / 2`, the extremal `α` for the radius of convexity.
pub fn alpha0() -> f64 {
    (2f64.sqrt() + 2.0).sqrt() / 2.0
}

/// Euclidean curvature of `∂Ω(r f_α)` at `k_α(−r)`:
/// `(k′(−r) − r k″(−r)) / (r k′(−r)²)`.
pub fn ke_at_pi_closed_form(alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain { z: Complex64::new(r, 0.0) });
    }
    let jet = HoloMap::ma_minda_k(alpha)?.jet(Complex64::new(-r, 0.0))?;
    let (d1, d2) = (jet.d1.re, jet.d2.re);
    Ok((d1 - r * d2) / (r * d1 * d1))
}
