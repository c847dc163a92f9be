//! The fixed-point function `ψ` of a self-map: `ψ(w)` is the unique fixed
//! point of `z ↦ w·f(z)`, a conformal map of 𝔻 onto `Ω(f)` with
//! `Ω(rf) = ψ(r𝔻)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holomap::{hyperbolic_derivatives_of_jet, HoloMap, Jet};

const PICARD_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointMap {
    f: HoloMap,
    max_iter: usize,
    tol: f64,
}

/// `C_{rf,ζ}` evaluated through `ψ` and through the boundary data at
/// `ζ = ψ(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CQuantity {
    pub via_psi: f64,
    pub via_boundary: f64,
}

impl FixedPointMap {
    pub fn new(f: HoloMap) -> Result<Self> {
        if f.value(Complex64::new(0.0, 0.0))?.norm() == 0.0 {
            return Err(Error::InvalidProblem("the fixed-point function needs f(0) ≠ 0".into()));
        }
        Ok(Self { f, max_iter: 500, tol: 1e-14 })
    }

    pub fn with_limits(mut self, max_iter: usize, tol: f64) -> Self {
        self.max_iter = max_iter;
        self.tol = tol;
        self
    }

    pub fn map(&self) -> &HoloMap {
        &self.f
    }

    /// Picard iteration from `w·f(0)`, then Newton on `w·f(z) − z` for the
    /// last digits or when Picard stalls.
    pub fn psi(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() >= 1.0 {
            return Err(Error::Domain { z: w });
        }
        let mut z = w * self.f.value(Complex64::new(0.0, 0.0))?;
        for _ in 0..PICARD_ITERATIONS.min(self.max_iter) {
            let next = w * self.f.value(z)?;
            let step = (next - z).norm();
            z = next;
            if step < self.tol {
                break;
            }
        }
        for _ in 0..self.max_iter {
            let jet = self.f.eval(z, 1)?;
            let g = w * jet.value - z;
            let dg = w * jet.d1 - 1.0;
            if dg.norm() < 1e-14 {
                return Err(Error::NoConvergence { w });
            }
            let step = g / dg;
            z -= step;
            if z.norm() >= 1.0 {
                return Err(Error::NoConvergence { w });
            }
            if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        let residual = (w * self.f.value(z)? - z).norm();
        if residual > 1e-13 {
            return Err(Error::NoConvergence { w });
        }
        Ok(z)
    }

    /// `ψ(w)`, `ψ′(w)` and `ψ″(w)` by implicit differentiation of
    /// `w·f(ψ(w)) = ψ(w)`.
    pub fn psi_jet(&self, w: Complex64) -> Result<Jet> {
        let z = self.psi(w)?;
        let fj = self.f.jet(z)?;
        let den = 1.0 - w * fj.d1;
        if den.norm() < 1e-10 {
            return Err(Error::NearSingular { modulus: den.norm() });
        }
        let d1 = fj.value / den;
        let d2 = (2.0 * fj.d1 * d1 + w * fj.d2 * d1 * d1) / den;
        Ok(Jet::new(z, d1, d2))
    }

    pub fn psi_prime(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.psi_jet(w)?.d1)
    }

    /// `C_{rf,ζ}` for `|w| = r`, computed both ways.
    pub fn c_quantity_pair(&self, w: Complex64) -> Result<CQuantity> {
        let r = w.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain { z: w });
        }
        let jet = self.psi_jet(w)?;
        let zeta = jet.value;
        let via_psi = (1.0 - zeta.norm_sqr()) / (r * jet.d1.norm());
        let fj = self.f.jet(zeta)?;
        let (g, dg) = (r * fj.value, r * fj.d1);
        let via_boundary = (dg.conj() * g - zeta).norm() * (1.0 - zeta.norm_sqr()) / zeta.norm_sqr();
        Ok(CQuantity { via_psi, via_boundary })
    }

    /// `C_{rf,ζ}` through `ψ`; errors if the boundary-data form disagrees.
    pub fn c_quantity(&self, w: Complex64) -> Result<f64> {
        let c = self.c_quantity_pair(w)?;
        if (c.via_psi - c.via_boundary).abs() > 1e-9 * c.via_psi.max(1.0) {
            return Err(Error::NoConvergence { w });
        }
        Ok(c.via_psi)
    }

    /// `p(w) = 1 + wψ″/ψ′ + 2wψ′·conj(ψ)/(1 − |ψ|²)`.
    pub fn p_of_w(&self, w: Complex64) -> Result<Complex64> {
        let jet = self.psi_jet(w)?;
        Ok(1.0 + w * jet.d2 / jet.d1 + 2.0 * w * jet.d1 * jet.value.conj() / (1.0 - jet.value.norm_sqr()))
    }

    /// `p(w)` through the hyperbolic derivatives of `ψ`.
    pub fn p_of_w_hyperbolic(&self, w: Complex64) -> Result<Complex64> {
        let jet = self.psi_jet(w)?;
        let (dh1, dh2) = hyperbolic_derivatives_of_jet(w, &jet)?;
        let s = 1.0 - w.norm_sqr();
        Ok(w / s * dh2 / dh1 + (1.0 + w.norm_sqr()) / s)
    }

    /// Slack in the distortion inequality for hyperbolically convex maps:
    /// right side minus left side, nonnegative when it holds.
    pub fn ma_minda_slack(&self, w: Complex64) -> Result<f64> {
        let jet = self.psi_jet(w)?;
        let p = self.p_of_w(w)?;
        let s = 1.0 - w.norm_sqr();
        let lhs = (p - (1.0 + w.norm_sqr()) / s).norm();
        let dh = s * jet.d1.norm() / (1.0 - jet.value.norm_sqr());
        let rhs = 2.0 * w.norm() / s * (1.0 - dh * dh);
        Ok(rhs - lhs)
    }
}
