//! Closed algebra of holomorphic self-maps of the unit disc.
//!
//! Every node carries closed-form first and second derivatives, and
//! combinators propagate them with the chain and product rules, so a
//! [`Jet`] is exact up to rounding. Nothing in here differentiates
//! numerically.

mod dsl;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dsl::parse;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `1 − |z|²`, the one place this is computed from coordinates.
pub fn one_minus_abs2(z: Complex64) -> f64 {
    1.0 - z.norm_sqr()
}

/// Value and first two complex derivatives of a map at a point, with
/// `defect = 1 − |value|²`.
///
/// The defect is propagated through the expression tree in closed form
/// (for a Möbius factor it is `(1 − |a|²)(1 − |z|²)/|1 − āz|²`), so it keeps
/// full relative accuracy when the value approaches the unit circle, where
/// `1 − |value|²` itself would cancel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub defect: f64,
}

impl Jet {
    pub fn new(value: Complex64, d1: Complex64, d2: Complex64) -> Self {
        Self { value, d1, d2, defect: one_minus_abs2(value) }
    }

    pub fn with_defect(value: Complex64, d1: Complex64, d2: Complex64, defect: f64) -> Self {
        Self { value, d1, d2, defect }
    }

    fn constant(c: Complex64) -> Self {
        Self::new(c, ZERO, ZERO)
    }

    /// `s·f` for `|s| ≤ 1`.
    pub fn scale(self, s: Complex64) -> Self {
        let s2 = s.norm_sqr();
        Self::with_defect(s * self.value, s * self.d1, s * self.d2, (1.0 - s2) + s2 * self.defect)
    }

    fn mul(self, o: Jet) -> Self {
        Self::with_defect(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
            self.defect + self.value.norm_sqr() * o.defect,
        )
    }

    /// `outer ∘ inner`, where `outer` was evaluated at `inner.value`.
    fn chain(outer: Jet, inner: Jet) -> Self {
        Self::with_defect(
            outer.value,
            outer.d1 * inner.d1,
            outer.d2 * inner.d1 * inner.d1 + outer.d1 * inner.d2,
            outer.defect,
        )
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.defect.is_finite()
    }
}

/// Jet of a disc automorphism with denominator `den`, whose defect is
/// `k·(1 − |z|²)/|den|²`.
fn automorphism_jet(value: Complex64, d1: Complex64, d2: Complex64, k: f64, den: Complex64, dz: f64) -> Jet {
    Jet::with_defect(value, d1, d2, k * dz / den.norm_sqr())
}

/// A zero of a finite Blaschke product together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeZero {
    pub zero: Complex64,
    pub multiplicity: u32,
}

/// `σ · Π ((z − a)/(1 − āz))^m`. Stored by zeros so the product is a
/// self-map of the disc by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<BlaschkeZero>,
    unimodular: Complex64,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<BlaschkeZero>, unimodular: Complex64) -> Result<Self> {
        for z in &zeros {
            if !(z.zero.norm() < 1.0) {
                return Err(Error::InvalidMap(format!("Blaschke zero {} is not in the disc", z.zero)));
            }
            if z.multiplicity == 0 {
                return Err(Error::InvalidMap("Blaschke multiplicity must be positive".into()));
            }
        }
        if (unimodular.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMap(format!("Blaschke factor {unimodular} is not unimodular")));
        }
        Ok(Self { zeros, unimodular })
    }

    pub fn zeros(&self) -> &[BlaschkeZero] {
        &self.zeros
    }

    pub fn unimodular(&self) -> Complex64 {
        self.unimodular
    }

    pub fn degree(&self) -> u32 {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    fn jet(&self, z: Complex64, dz: f64) -> Jet {
        let mut acc = Jet::with_defect(self.unimodular, ZERO, ZERO, 0.0);
        for bz in &self.zeros {
            let a = bz.zero;
            let den = ONE - a.conj() * z;
            let k = 1.0 - a.norm_sqr();
            let factor = automorphism_jet(
                (z - a) / den,
                k / (den * den),
                2.0 * a.conj() * k / (den * den * den),
                k,
                den,
                dz,
            );
            for _ in 0..bz.multiplicity {
                acc = acc.mul(factor);
            }
        }
        acc
    }
}

/// Expression tree of a holomorphic map `𝔻 → 𝔻̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HoloMap {
    /// `z ↦ c`, `|c| ≤ 1`.
    Constant(Complex64),
    Identity,
    /// `z ↦ e^{iθ} z`.
    Rotation(f64),
    /// `z ↦ r z`, `0 < r ≤ 1`.
    Scale(f64),
    /// `φ_a(z) = (a − z)/(1 − āz)`.
    Mobius(Complex64),
    /// `f_α = −φ_{−α}`, i.e. `z ↦ (α + z)/(1 + αz)`, `α ∈ (0, 1]`.
    NegMobiusNeg(f64),
    Blaschke(BlaschkeProduct),
    /// Extremal map `k_α(z) = 2αz / (1 − z + √((1 − z)² + 4α²z))`.
    MaMindaK(f64),
    /// `g_α(z) = z(1 + αz)/(α + z)`, the inverse of `k_α` on `k_α(𝔻)`.
    /// Not a self-map of the disc: it has a pole at `−α`.
    MaMindaG(f64),
    Compose(Box<HoloMap>, Box<HoloMap>),
    Product(Box<HoloMap>, Box<HoloMap>),
    ScalarMul(Complex64, Box<HoloMap>),
}

impl HoloMap {
    pub fn constant(c: Complex64) -> Result<Self> {
        if !(c.norm() <= 1.0 + 1e-15) {
            return Err(Error::InvalidMap(format!("constant {c} has modulus > 1")));
        }
        Ok(Self::Constant(c))
    }

    pub fn rotation(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidMap("rotation angle must be finite".into()));
        }
        Ok(Self::Rotation(theta))
    }

    pub fn scale(r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidMap(format!("scale {r} outside (0, 1]")));
        }
        Ok(Self::Scale(r))
    }

    pub fn mobius(a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::InvalidMap(format!("Möbius parameter {a} is not in the disc")));
        }
        Ok(Self::Mobius(a))
    }

    pub fn neg_mobius_neg(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::NegMobiusNeg(alpha))
    }

    pub fn ma_minda_k(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::MaMindaK(alpha))
    }

    pub fn ma_minda_g(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::MaMindaG(alpha))
    }

    pub fn blaschke(zeros: Vec<BlaschkeZero>, unimodular: Complex64) -> Result<Self> {
        Ok(Self::Blaschke(BlaschkeProduct::new(zeros, unimodular)?))
    }

    pub fn compose(outer: HoloMap, inner: HoloMap) -> Self {
        Self::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn product(left: HoloMap, right: HoloMap) -> Self {
        Self::Product(Box::new(left), Box::new(right))
    }

    pub fn scalar_mul(sigma: Complex64, inner: HoloMap) -> Result<Self> {
        if !(sigma.norm() <= 1.0 + 1e-15) {
            return Err(Error::InvalidMap(format!("scalar {sigma} has modulus > 1")));
        }
        Ok(Self::ScalarMul(sigma, Box::new(inner)))
    }

    /// Evaluates `f`, `f′`, `f″` at `z`. Derivatives above `order` are
    /// not computed and come back as NaN.
    pub fn eval(&self, z: Complex64, order: u8) -> Result<Jet> {
        let mut jet = self.jet(z)?;
        if order < 2 {
            jet.d2 = Complex64::new(f64::NAN, f64::NAN);
        }
        if order < 1 {
            jet.d1 = Complex64::new(f64::NAN, f64::NAN);
        }
        Ok(jet)
    }

    /// Full second-order jet at a point of the open disc.
    pub fn jet(&self, z: Complex64) -> Result<Jet> {
        if !(z.norm() < 1.0) {
            return Err(Error::Domain { z });
        }
        let jet = self.jet_unchecked(z, one_minus_abs2(z));
        if jet.is_finite() {
            Ok(jet)
        } else {
            Err(Error::Pole { z })
        }
    }

    /// `f(z)` only.
    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        self.jet(z).map(|j| j.value)
    }

    /// `dz` is `1 − |z|²`, passed down so compositions reuse the inner
    /// map's accurate defect.
    fn jet_unchecked(&self, z: Complex64, dz: f64) -> Jet {
        match self {
            HoloMap::Constant(c) => Jet::constant(*c),
            HoloMap::Identity => Jet::with_defect(z, ONE, ZERO, dz),
            HoloMap::Rotation(theta) => {
                let e = Complex64::from_polar(1.0, *theta);
                Jet::with_defect(e * z, e, ZERO, dz)
            }
            HoloMap::Scale(r) => {
                Jet::with_defect(*r * z, Complex64::new(*r, 0.0), ZERO, (1.0 - r * r) + r * r * dz)
            }
            HoloMap::Mobius(a) => {
                let den = ONE - a.conj() * z;
                let k = a.norm_sqr() - 1.0;
                automorphism_jet((*a - z) / den, k / (den * den), 2.0 * a.conj() * k / (den * den * den), -k, den, dz)
            }
            HoloMap::NegMobiusNeg(alpha) => {
                let den = ONE + *alpha * z;
                let k = 1.0 - alpha * alpha;
                automorphism_jet((*alpha + z) / den, k / (den * den), -2.0 * alpha * k / (den * den * den), k, den, dz)
            }
            HoloMap::Blaschke(b) => b.jet(z, dz),
            HoloMap::MaMindaK(alpha) => {
                let mut jet = ma_minda_k_jet(*alpha, z);
                let k = jet.value;
                // from k = z·f_α(k); the direct form cancels only where |k| → 1
                if k.norm_sqr() > 0.5 {
                    let a = *alpha;
                    let spread = a * (a + 2.0 * k.re + a * k.norm_sqr()) + (1.0 - a * a) * dz;
                    jet.defect = dz * (ONE + a * k).norm_sqr() / spread;
                }
                jet
            }
            HoloMap::MaMindaG(alpha) => {
                let a = *alpha;
                let den = a + z;
                Jet::with_defect(
                    z * (ONE + a * z) / den,
                    a * (ONE + 2.0 * a * z + z * z) / (den * den),
                    2.0 * a * (a * a - 1.0) / (den * den * den),
                    dz * a * (a + 2.0 * z.re + a * z.norm_sqr()) / den.norm_sqr(),
                )
            }
            HoloMap::Compose(outer, inner) => {
                let gi = inner.jet_unchecked(z, dz);
                let go = outer.jet_unchecked(gi.value, gi.defect);
                Jet::chain(go, gi)
            }
            HoloMap::Product(l, r) => l.jet_unchecked(z, dz).mul(r.jet_unchecked(z, dz)),
            HoloMap::ScalarMul(s, inner) => inner.jet_unchecked(z, dz).scale(*s),
        }
    }

    /// `(D_{h1} f(z), D_{h2} f(z))`.
    pub fn hyperbolic_derivatives(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let jet = self.jet(z)?;
        hyperbolic_derivatives_of_jet(z, &jet)
    }

    /// True when the tree is a unimodular constant, possibly wrapped in
    /// unimodular scalar multiples.
    pub fn is_unimodular_constant(&self) -> bool {
        match self {
            HoloMap::Constant(c) => (c.norm() - 1.0).abs() < 1e-14,
            HoloMap::NegMobiusNeg(alpha) => *alpha == 1.0,
            HoloMap::ScalarMul(s, inner) => (s.norm() - 1.0).abs() < 1e-14 && inner.is_unimodular_constant(),
            _ => false,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidMap(format!("α = {alpha} outside (0, 1]")))
    }
}

/// `k_α` satisfies `αk² + (1 − z)k − αz = 0`; derivatives come from
/// differentiating that relation, with `2αk + 1 − z = √((1 − z)² + 4α²z)`.
/// The principal square root is the branch with value 1 at the origin:
/// `(1 − z)² + 4α²z` never meets the closed negative axis on the disc.
fn ma_minda_k_jet(alpha: f64, z: Complex64) -> Jet {
    let s = ((ONE - z) * (ONE - z) + 4.0 * alpha * alpha * z).sqrt();
    let k = 2.0 * alpha * z / (ONE - z + s);
    let d1 = (k + alpha) / s;
    let d2 = 2.0 * d1 * (ONE - alpha * d1) / s;
    Jet::new(k, d1, d2)
}

/// Hyperbolic derivatives from a precomputed jet at `z`.
pub fn hyperbolic_derivatives_of_jet(z: Complex64, jet: &Jet) -> Result<(Complex64, Complex64)> {
    let w = jet.value;
    let den = jet.defect;
    if den <= 1e-14 {
        return Err(Error::ImageOnBoundary { z, modulus: w.norm() });
    }
    let a = one_minus_abs2(z);
    let dh1 = a * jet.d1 / den;
    let dh2 = a * a * jet.d2 / den + 2.0 * a * a * w.conj() * jet.d1 * jet.d1 / (den * den)
        - 2.0 * z.conj() * a * jet.d1 / den;
    Ok((dh1, dh2))
}

impl fmt::Display for HoloMap {
    /// Renders the map in the CLI text syntax; `parse` inverts this.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloMap::Constant(c) => write!(f, "const({:?},{:?})", c.re, c.im),
            HoloMap::Identity => write!(f, "id"),
            HoloMap::Rotation(t) => write!(f, "rot({t:?})"),
            HoloMap::Scale(r) => write!(f, "scale({r:?})"),
            HoloMap::Mobius(a) => write!(f, "phi({:?},{:?})", a.re, a.im),
            HoloMap::NegMobiusNeg(a) => write!(f, "falpha({a:?})"),
            HoloMap::MaMindaK(a) => write!(f, "kalpha({a:?})"),
            HoloMap::MaMindaG(a) => write!(f, "galpha({a:?})"),
            HoloMap::Blaschke(b) => {
                write!(f, "blaschke([")?;
                for (i, z) in b.zeros.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({:?},{:?},{})", z.zero.re, z.zero.im, z.multiplicity)?;
                }
                write!(f, "];{:?},{:?})", b.unimodular.re, b.unimodular.im)
            }
            HoloMap::Compose(o, i) => write!(f, "compose({o},{i})"),
            HoloMap::Product(l, r) => write!(f, "mul({l},{r})"),
            HoloMap::ScalarMul(s, i) => write!(f, "smul({:?},{:?},{i})", s.re, s.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn alpha0() -> f64 {
        (2f64.sqrt() + 2.0).sqrt() / 2.0
    }

    #[test]
    fn identity_jet() {
        let j = HoloMap::Identity.eval(c(0.3, 0.0), 2).unwrap();
        assert_eq!(j, Jet::new(c(0.3, 0.0), ONE, ZERO));
    }

    #[test]
    fn mobius_at_origin() {
        let a = c(0.4, -0.2);
        let j = HoloMap::mobius(a).unwrap().eval(ZERO, 1).unwrap();
        assert_abs_diff_eq!((j.value - a).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((j.d1 - c(a.norm_sqr() - 1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert!(j.d2.re.is_nan());
    }

    #[test]
    fn ma_minda_k_taylor_at_origin() {
        for &alpha in &[0.25, 0.5, alpha0(), 1.0] {
            let j = HoloMap::ma_minda_k(alpha).unwrap().jet(ZERO).unwrap();
            assert_abs_diff_eq!(j.value.norm(), 0.0, epsilon = 1e-16);
            assert_abs_diff_eq!((j.d1 - c(alpha, 0.0)).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((j.d2 - c(2.0 * alpha * (1.0 - alpha * alpha), 0.0)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ma_minda_k_one_is_identity() {
        let k = HoloMap::ma_minda_k(1.0).unwrap();
        for z in [c(0.3, 0.4), c(-0.9, 0.1), c(0.0, -0.7)] {
            let j = k.jet(z).unwrap();
            assert_abs_diff_eq!((j.value - z).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((j.d1 - ONE).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn neg_mobius_neg_matches_definition() {
        let alpha = 0.6;
        let f = HoloMap::neg_mobius_neg(alpha).unwrap();
        let reference = HoloMap::scalar_mul(-ONE, HoloMap::mobius(c(-alpha, 0.0)).unwrap()).unwrap();
        for z in [c(0.1, 0.2), c(-0.5, -0.5), c(0.8, 0.0)] {
            let a = f.jet(z).unwrap();
            let b = reference.jet(z).unwrap();
            assert_abs_diff_eq!((a.value - b.value).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((a.d1 - b.d1).norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!((a.d2 - b.d2).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn blaschke_degree_and_zeros() {
        let b = BlaschkeProduct::new(
            vec![BlaschkeZero { zero: c(0.3, 0.1), multiplicity: 2 }, BlaschkeZero { zero: c(-0.5, 0.0), multiplicity: 1 }],
            c(0.0, 1.0),
        )
        .unwrap();
        assert_eq!(b.degree(), 3);
        let f = HoloMap::Blaschke(b);
        assert!(f.value(c(0.3, 0.1)).unwrap().norm() < 1e-15);
        // |B| = 1 near the circle
        let z = Complex64::from_polar(1.0 - 1e-12, 0.7);
        assert_abs_diff_eq!(f.value(z).unwrap().norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(HoloMap::Identity.jet(c(1.0, 0.0)), Err(Error::Domain { .. })));
        assert!(matches!(HoloMap::ma_minda_g(0.5).unwrap().jet(c(-0.5, 0.0)), Err(Error::Pole { .. })));
        assert!(HoloMap::mobius(c(1.0, 0.0)).is_err());
        assert!(HoloMap::constant(c(1.0, 0.1)).is_err());
        assert!(HoloMap::ma_minda_k(0.0).is_err());
        assert!(HoloMap::blaschke(vec![], c(0.5, 0.0)).is_err());
    }

    #[test]
    fn rotation_is_isometry() {
        let f = HoloMap::rotation(1.1).unwrap();
        for z in [c(0.2, 0.1), c(-0.6, 0.7)] {
            let (dh1, _) = f.hyperbolic_derivatives(z).unwrap();
            assert_abs_diff_eq!(dh1.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn kalpha_dh1_closed_forms() {
        for &alpha in &[0.3, 0.7, alpha0()] {
            let k = HoloMap::ma_minda_k(alpha).unwrap();
            for &r in &[0.1, 0.5, 0.9] {
                let minus = alpha * (1.0 - r) / ((1.0 + r).powi(2) - 4.0 * alpha * alpha * r).sqrt();
                let plus = alpha * (1.0 + r) / ((1.0 - r).powi(2) + 4.0 * alpha * alpha * r).sqrt();
                let (d_minus, _) = k.hyperbolic_derivatives(c(-r, 0.0)).unwrap();
                let (d_plus, _) = k.hyperbolic_derivatives(c(r, 0.0)).unwrap();
                assert_abs_diff_eq!(d_minus.norm(), minus, epsilon = 1e-13);
                assert_abs_diff_eq!(d_plus.norm(), plus, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn unimodular_detection() {
        assert!(HoloMap::Constant(c(0.6, 0.8)).is_unimodular_constant());
        assert!(!HoloMap::Constant(c(0.5, 0.0)).is_unimodular_constant());
        assert!(HoloMap::NegMobiusNeg(1.0).is_unimodular_constant());
        assert!(!HoloMap::Identity.is_unimodular_constant());
    }
}
