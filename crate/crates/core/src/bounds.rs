//! Pointwise curvature inequalities along traced level curves.
//!
//! Every bound is a closed form in `ζ`, `g(ζ)`, `g′(ζ)` and `λ`, where `g`
//! is the effective map of the problem (`rf` in the scaled case). Margins
//! are signed so that a nonnegative value means the inequality holds.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::HoloMap;
use crate::levelset::{LevelProblem, TracedCurve, TracedSample};

/// Margins below this are reported as equality.
pub const EQ_TOL: f64 = 1e-7;

/// Samples closer to the origin than this are skipped by bounds that divide
/// by `|ζ|`.
pub const ORIGIN_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BoundId {
    T21,
    C41,
    C31Khlb,
    C42Khlb2,
    C43Kh3,
    C44Kelb,
    T51Lower,
    T51Upper,
    C53Lower,
    C53Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    LowerOnKh,
    UpperOnKh,
    LowerOnKe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Requirement {
    LambdaAtLeastOne,
    LambdaAboveOne,
    LambdaOne,
    JordanScaled,
}

impl Requirement {
    fn check(self, p: &LevelProblem) -> std::result::Result<(), &'static str> {
        match self {
            Requirement::LambdaAtLeastOne => Ok(()),
            Requirement::LambdaAboveOne if p.lambda() > 1.0 => Ok(()),
            Requirement::LambdaAboveOne => Err("needs λ > 1"),
            Requirement::LambdaOne if p.lambda() == 1.0 => Ok(()),
            Requirement::LambdaOne => Err("needs λ = 1"),
            Requirement::JordanScaled if p.r().is_some() => Ok(()),
            Requirement::JordanScaled => Err("needs a scaled problem Ω(rf)"),
        }
    }
}

impl BoundId {
    pub const ALL: [BoundId; 10] = [
        BoundId::T21,
        BoundId::C41,
        BoundId::C31Khlb,
        BoundId::C42Khlb2,
        BoundId::C43Kh3,
        BoundId::C44Kelb,
        BoundId::T51Lower,
        BoundId::T51Upper,
        BoundId::C53Lower,
        BoundId::C53Upper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::T21 => "T21",
            BoundId::C41 => "C41",
            BoundId::C31Khlb => "C31_khlb",
            BoundId::C42Khlb2 => "C42_khlb2",
            BoundId::C43Kh3 => "C43_kh3",
            BoundId::C44Kelb => "C44_kelb",
            BoundId::T51Lower => "T51_lower",
            BoundId::T51Upper => "T51_upper",
            BoundId::C53Lower => "C53_lower",
            BoundId::C53Upper => "C53_upper",
        }
    }

    pub fn side(self) -> Side {
        match self {
            BoundId::T51Upper | BoundId::C53Upper => Side::UpperOnKh,
            BoundId::C44Kelb => Side::LowerOnKe,
            _ => Side::LowerOnKh,
        }
    }

    pub fn requirement(self) -> Requirement {
        match self {
            BoundId::T21 | BoundId::C44Kelb => Requirement::LambdaAtLeastOne,
            BoundId::C41 | BoundId::C43Kh3 => Requirement::LambdaAboveOne,
            BoundId::C31Khlb | BoundId::C42Khlb2 => Requirement::LambdaOne,
            BoundId::T51Lower | BoundId::T51Upper | BoundId::C53Lower | BoundId::C53Upper => {
                Requirement::JordanScaled
            }
        }
    }

    pub fn applies_to(self, p: &LevelProblem) -> bool {
        self.requirement().check(p).is_ok()
    }

    /// `(actual, bound)` at one sample, or `None` when the sample is skipped.
    pub fn evaluate_at(self, p: &LevelProblem, s: &TracedSample) -> Result<Option<(f64, f64)>> {
        let zeta = s.z;
        let az = zeta.norm();
        let jet = p.effective_jet(zeta)?;
        let lam = p.lambda();
        let (g, dg) = (jet.value.norm(), jet.d1.norm());
        let grad = (jet.d1.conj() * jet.value - lam * zeta).norm();
        let needs_origin_gap = matches!(
            self,
            BoundId::C42Khlb2 | BoundId::T51Lower | BoundId::T51Upper
        );
        if needs_origin_gap && az < ORIGIN_CUTOFF {
            return Ok(None);
        }
        let bound = match self {
            BoundId::T21 => {
                (lam * lam * (1.0 + az * az - 2.0 * g) - dg * dg * (1.0 - g).powi(2)) / (lam * grad)
            }
            BoundId::C41 => lam * (lam - 1.0) * (1.0 - az * az) / grad,
            BoundId::C31Khlb => (1.0 - az).powi(2) * (1.0 - dg * dg) / grad,
            BoundId::C42Khlb2 => (1.0 - az).powi(2) * (1.0 - dg * dg) / (2.0 * az),
            BoundId::C43Kh3 => az - g,
            BoundId::C44Kelb => -(az + g) / (1.0 - az * az),
            BoundId::T51Lower | BoundId::T51Upper => {
                let r = p.r().expect("scaled problem");
                let c = grad * (1.0 - az * az) / (az * az);
                let a = (1.0 - r * r) / r;
                if self == BoundId::T51Upper {
                    (1.0 + r) / (1.0 - r) * c - 2.0 * a / c
                } else {
                    (1.0 - r) / (1.0 + r) * c + 2.0 * a / c
                }
            }
            BoundId::C53Lower | BoundId::C53Upper => {
                let r = p.r().expect("scaled problem");
                let alpha = p.map().value(Complex64::new(0.0, 0.0))?.norm();
                let (dm, dp) = kalpha_dh1_pair(alpha, r);
                if self == BoundId::C53Upper {
                    (1.0 + r).powi(2) / (r * dm) - 2.0 * dm
                } else {
                    (1.0 - r).powi(2) / (r * dp) + 2.0 * dm
                }
            }
        };
        let actual = if self.side() == Side::LowerOnKe { s.ke } else { s.kh };
        Ok(Some((actual, bound)))
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(D_h1 k_α(−r), D_h1 k_α(r))` in closed form.
pub fn kalpha_dh1_pair(alpha: f64, r: f64) -> (f64, f64) {
    let minus = alpha * (1.0 - r) / ((1.0 + r).powi(2) - 4.0 * alpha * alpha * r).sqrt();
    let plus = alpha * (1.0 + r) / ((1.0 - r).powi(2) + 4.0 * alpha * alpha * r).sqrt();
    (minus, plus)
}

/// `|D_h1 k_α(±r)|` through the map itself, for cross-checking the closed form.
pub fn kalpha_dh1_numeric(alpha: f64, r: f64) -> Result<(f64, f64)> {
    let k = HoloMap::ma_minda_k(alpha)?;
    let (m, _) = k.hyperbolic_derivatives(Complex64::new(-r, 0.0))?;
    let (p, _) = k.hyperbolic_derivatives(Complex64::new(r, 0.0))?;
    Ok((m.norm(), p.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub z: Complex64,
    pub actual: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub id: BoundId,
    pub rows: Vec<BoundRow>,
    pub min_margin: f64,
    pub equality_samples: Vec<Complex64>,
    /// Samples skipped because `|ζ| < ORIGIN_CUTOFF`.
    pub skipped: usize,
}

impl BoundReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_margin >= -tol
    }
}

pub fn evaluate_bound(id: BoundId, p: &LevelProblem, curve: &TracedCurve) -> Result<BoundReport> {
    id.requirement().check(p).map_err(|reason| Error::RequirementMismatch {
        check: id.name().to_string(),
        reason: reason.to_string(),
    })?;
    let mut rows = Vec::with_capacity(curve.samples().len());
    let mut skipped = 0;
    for s in curve.samples() {
        match id.evaluate_at(p, s)? {
            Some((actual, bound)) => {
                let margin = match id.side() {
                    Side::UpperOnKh => bound - actual,
                    Side::LowerOnKh | Side::LowerOnKe => actual - bound,
                };
                rows.push(BoundRow { z: s.z, actual, bound, margin });
            }
            None => skipped += 1,
        }
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let equality_samples = rows.iter().filter(|r| r.margin.abs() < EQ_TOL).map(|r| r.z).collect();
    Ok(BoundReport { id, rows, min_margin, equality_samples, skipped })
}

/// Every bound whose hypotheses the problem meets.
pub fn full_report(p: &LevelProblem, curve: &TracedCurve) -> Result<Vec<BoundReport>> {
    BoundId::ALL
        .iter()
        .filter(|id| id.applies_to(p))
        .map(|&id| evaluate_bound(id, p, curve))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::{trace, TraceOptions};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn traced(p: &LevelProblem) -> TracedCurve {
        trace(p, p.find_boundary_seed().unwrap(), &TraceOptions::default()).unwrap()
    }

    fn ids(reports: &[BoundReport]) -> Vec<BoundId> {
        reports.iter().map(|r| r.id).collect()
    }

    #[test]
    fn unimodular_constant_meets_curvature_bounds() {
        let p = LevelProblem::scaled(HoloMap::Constant(c(0.0, 1.0)), 0.4).unwrap();
        let curve = traced(&p);
        for id in [BoundId::T51Lower, BoundId::T51Upper, BoundId::C53Lower, BoundId::C53Upper] {
            let rep = evaluate_bound(id, &p, &curve).unwrap();
            for row in &rep.rows {
                assert_abs_diff_eq!(row.actual, 2.9, epsilon = 1e-10);
                assert!(row.margin.abs() < 1e-10, "{id}: {}", row.margin);
            }
            assert_eq!(rep.equality_samples.len(), rep.rows.len());
        }
    }

    #[test]
    fn automorphism_meets_c41_everywhere() {
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.0)).unwrap(), 1.2).unwrap();
        let rep = evaluate_bound(BoundId::C41, &p, &traced(&p)).unwrap();
        assert!(rep.rows.iter().all(|r| r.margin.abs() < 1e-9));
    }

    #[test]
    fn geodesic_case_is_zero() {
        let p = LevelProblem::new(HoloMap::mobius(c(0.3, 0.0)).unwrap(), 1.0).unwrap();
        let rep = evaluate_bound(BoundId::C31Khlb, &p, &traced(&p)).unwrap();
        for r in &rep.rows {
            assert!(r.bound.abs() < 1e-12 && r.actual.abs() < 1e-9);
        }
    }

    #[test]
    fn c43_equality_at_arc_midpoint_only() {
        let a = 0.5;
        let lam = 1.0 / (1.0 - a * a);
        let p = LevelProblem::new(HoloMap::mobius(c(a, 0.0)).unwrap(), lam).unwrap();
        let rep = evaluate_bound(BoundId::C43Kh3, &p, &traced(&p)).unwrap();
        assert!(rep.min_margin > -1e-9);
        assert_eq!(rep.equality_samples.len(), 1, "{:?}", rep.equality_samples);
        let mid = rep.equality_samples[0];
        let expected = 1.0 / a - ((1.0 / (a * a) - 1.0) / lam).sqrt();
        assert_abs_diff_eq!(mid.re, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(mid.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn requirement_mismatch() {
        let p = LevelProblem::new(HoloMap::mobius(c(0.5, 0.0)).unwrap(), 1.0).unwrap();
        let curve = traced(&p);
        assert!(matches!(evaluate_bound(BoundId::C41, &p, &curve), Err(Error::RequirementMismatch { .. })));
        assert!(matches!(evaluate_bound(BoundId::T51Upper, &p, &curve), Err(Error::RequirementMismatch { .. })));
    }

    #[test]
    fn applicability_filter() {
        let f = HoloMap::mobius(c(0.5, 0.0)).unwrap();
        let p1 = LevelProblem::new(f.clone(), 1.0).unwrap();
        assert_eq!(
            ids(&full_report(&p1, &traced(&p1)).unwrap()),
            vec![BoundId::T21, BoundId::C31Khlb, BoundId::C42Khlb2, BoundId::C44Kelb]
        );
        let p2 = LevelProblem::new(f.clone(), 1.5).unwrap();
        assert_eq!(
            ids(&full_report(&p2, &traced(&p2)).unwrap()),
            vec![BoundId::T21, BoundId::C41, BoundId::C43Kh3, BoundId::C44Kelb]
        );
        let p3 = LevelProblem::scaled(f, 0.6).unwrap();
        assert_eq!(
            ids(&full_report(&p3, &traced(&p3)).unwrap()),
            vec![
                BoundId::T21,
                BoundId::C31Khlb,
                BoundId::C42Khlb2,
                BoundId::C44Kelb,
                BoundId::T51Lower,
                BoundId::T51Upper,
                BoundId::C53Lower,
                BoundId::C53Upper
            ]
        );
    }

    #[test]
    fn kalpha_closed_forms_match_map() {
        for (alpha, r) in [(0.3, 0.2), (0.7, 0.5), (0.9659, 0.8), (1.0, 0.4)] {
            let (m, p) = kalpha_dh1_pair(alpha, r);
            let (mn, pn) = kalpha_dh1_numeric(alpha, r).unwrap();
            assert_abs_diff_eq!(m, mn, epsilon = 1e-12);
            assert_abs_diff_eq!(p, pn, epsilon = 1e-12);
        }
    }
}
