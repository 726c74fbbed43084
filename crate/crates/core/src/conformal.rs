//! An analytic surjection `v` of the unit disc onto the open annulus
//! `r < |z| < 1`, its Möbius recenterings and their boundary singularities.
//!
//! `v` sends the disc onto the strip `|Im w| < 1/2` by
//! `w = (1/π) Log((1+z)/(1-z))` and then applies `w ↦ exp(i c w + d)` with
//! `c = -ln r`, `d = (ln r)/2`. Hence `v(0) = √r`, the upper half of the
//! circle goes to `|z| = r` and the lower half to `|z| = 1`.

use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::Complex64;

/// Boundary points closer than this to a logarithmic singularity are treated
/// as singular.
pub const EXCEPTIONAL_RADIUS: f64 = 1e-9;

/// The map `v` for a fixed inner radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusMap {
    r: f64,
    c: f64,
    d: f64,
}

impl AnnulusMap {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0 && r < 1.0) {
            return Err(Error::InvalidRadius(r));
        }
        let ln_r = r.ln();
        Ok(Self { r, c: -ln_r, d: ln_r / 2.0 })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(c, d)` with `v(z) = exp(i c w(z) + d)`.
    pub fn constants(&self) -> (f64, f64) {
        (self.c, self.d)
    }

    /// `v(z)` for `|z| ≤ 1`, `z` away from `±1`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_closed_disc(z)?;
        if (z - 1.0).norm() <= EXCEPTIONAL_RADIUS || (z + 1.0).norm() <= EXCEPTIONAL_RADIUS {
            return Err(Error::ExceptionalPoint { re: z.re, im: z.im });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let w = ((Complex64::new(1.0, 0.0) + z) / (Complex64::new(1.0, 0.0) - z)).ln() / PI;
        (Complex64::i() * w * self.c + self.d).exp()
    }

    /// The purely imaginary `w` with `v(w) = λ`, for `r < λ < 1`.
    pub fn preimage(&self, lambda: f64) -> Result<Complex64> {
        if !(lambda > self.r && lambda < 1.0) {
            return Err(Error::SpectrumOutsideBand { eigenvalue: lambda });
        }
        let ln_r = self.r.ln();
        let y = (FRAC_PI_2 * (lambda.ln() - ln_r / 2.0) / ln_r).tan();
        let w = Complex64::new(0.0, y);
        let back = self.eval_unchecked(w);
        if (back - lambda).norm() > 1e-10 {
            return Err(Error::NoConvergence);
        }
        Ok(w)
    }
}

fn check_closed_disc(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDisk { re: z.re, im: z.im });
    }
    Ok(())
}

/// `φ_{w0}(z) = (w0 - z)/(1 - conj(w0) z)`, an involutive automorphism of
/// the disc.
pub fn mobius(w0: Complex64, z: Complex64) -> Result<Complex64> {
    if w0.norm() >= 1.0 {
        return Err(Error::OutsideDisk { re: w0.re, im: w0.im });
    }
    let den = Complex64::new(1.0, 0.0) - w0.conj() * z;
    if den.norm() <= f64::EPSILON {
        return Err(Error::MoebiusPole { re: z.re, im: z.im });
    }
    Ok((w0 - z) / den)
}

/// `{φ_{w0}(1), φ_{w0}(-1)}`: the boundary points where `v ∘ φ_{w0}` is
/// singular.
pub fn exceptional_points(w0: Complex64) -> Result<[Complex64; 2]> {
    Ok([mobius(w0, Complex64::new(1.0, 0.0))?, mobius(w0, Complex64::new(-1.0, 0.0))?])
}

/// `v_λ = v ∘ φ_{w0}` where `w0` is the imaginary preimage of `λ`, so that
/// `v_λ(0) = λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecenteredSymbol {
    map: AnnulusMap,
    lambda: f64,
    w0: Complex64,
    exceptional: [Complex64; 2],
}

impl RecenteredSymbol {
    pub fn new(map: AnnulusMap, lambda: f64) -> Result<Self> {
        let w0 = map.preimage(lambda)?;
        let exceptional = exceptional_points(w0)?;
        Ok(Self { map, lambda, w0, exceptional })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn w0(&self) -> Complex64 {
        self.w0
    }

    pub fn exceptional_points(&self) -> [Complex64; 2] {
        self.exceptional
    }

    /// Distance from `z` to the nearer exceptional point.
    pub fn clearance(&self, z: Complex64) -> f64 {
        (z - self.exceptional[0]).norm().min((z - self.exceptional[1]).norm())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_closed_disc(z)?;
        if self.clearance(z) <= EXCEPTIONAL_RADIUS {
            return Err(Error::ExceptionalPoint { re: z.re, im: z.im });
        }
        Ok(self.map.eval_unchecked(mobius(self.w0, z)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cis(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t)
    }

    #[test]
    fn boundary_values() {
        for r in [0.1, 0.5, 0.9] {
            let v = AnnulusMap::new(r).unwrap();
            assert!((v.eval(Complex64::new(0.0, 0.0)).unwrap() - r.sqrt()).norm() < 1e-15);
            assert!((v.eval(Complex64::i()).unwrap().norm() - r).abs() < 1e-12);
            assert!((v.eval(-Complex64::i()).unwrap().norm() - 1.0).abs() < 1e-12);
            let (c, d) = v.constants();
            assert!(c > 0.0 && (d.exp() - r.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_points_rejected() {
        let v = AnnulusMap::new(0.5).unwrap();
        assert!(matches!(v.eval(Complex64::new(1.0, 0.0)), Err(Error::ExceptionalPoint { .. })));
        assert!(matches!(v.eval(Complex64::new(-1.0, 0.0)), Err(Error::ExceptionalPoint { .. })));
        assert!(matches!(v.eval(Complex64::new(1.5, 0.0)), Err(Error::OutsideDisk { .. })));
        assert!(AnnulusMap::new(1.0).is_err());
    }

    #[test]
    fn preimage_examples() {
        let v = AnnulusMap::new(0.5).unwrap();
        assert!(v.preimage(0.5f64.sqrt()).unwrap().norm() < 1e-15);
        let v = AnnulusMap::new(0.25).unwrap();
        assert!(v.preimage(0.5).unwrap().norm() < 1e-15);
        let v = AnnulusMap::new(0.5).unwrap();
        let w = v.preimage(0.9).unwrap();
        assert_eq!(w.re, 0.0);
        assert!(w.norm() < 1.0);
        assert!((v.eval(w).unwrap() - 0.9).norm() < 1e-10);
        assert!(v.preimage(0.5).is_err() && v.preimage(1.0).is_err());
    }

    #[test]
    fn mobius_basics() {
        let w0 = Complex64::new(0.3, -0.4);
        assert!(mobius(w0, w0).unwrap().norm() < 1e-16);
        assert_eq!(mobius(w0, Complex64::new(0.0, 0.0)).unwrap(), w0);
        assert!(mobius(Complex64::new(1.0, 0.0), w0).is_err());
        let w0 = Complex64::new(0.5, 0.0);
        assert!(matches!(mobius(w0, Complex64::new(2.0, 0.0)), Err(Error::MoebiusPole { .. })));
    }

    #[test]
    fn exceptional_points_at_origin() {
        let [a, b] = exceptional_points(Complex64::new(0.0, 0.0)).unwrap();
        assert!((a + 1.0).norm() < 1e-16 && (b - 1.0).norm() < 1e-16);
    }

    #[test]
    fn exceptional_points_imaginary_center_symmetry() {
        let [a, b] = exceptional_points(Complex64::new(0.0, 0.37)).unwrap();
        assert!((a + b.conj()).norm() < 1e-15);
    }

    #[test]
    fn recentered_symbol_values() {
        let r = 0.4;
        let map = AnnulusMap::new(r).unwrap();
        let s = RecenteredSymbol::new(map, 0.85).unwrap();
        assert!((s.eval(Complex64::new(0.0, 0.0)).unwrap() - 0.85).norm() < 1e-10);
        assert!((s.eval(s.w0()).unwrap() - r.sqrt()).norm() < 1e-14);
        for k in 0..200 {
            let z = cis(2.0 * PI * (k as f64 + 0.37) / 200.0);
            if s.clearance(z) < 1e-6 {
                continue;
            }
            let m = s.eval(z).unwrap().norm();
            assert!((m - r).abs() < 1e-9 || (m - 1.0).abs() < 1e-9, "|v| = {m}");
        }
        assert!(s.eval(s.exceptional_points()[0]).is_err());
    }

    #[test]
    fn mean_value_property() {
        let v = AnnulusMap::new(0.3).unwrap();
        let z0 = Complex64::new(0.2, -0.5);
        let rho = 1e-2;
        let avg =
            (0..64).map(|k| v.eval(z0 + cis(2.0 * PI * k as f64 / 64.0) * rho).unwrap()).sum::<Complex64>() / 64.0;
        assert!((avg - v.eval(z0).unwrap()).norm() <= 1e-8 * rho * rho);
    }

    proptest! {
        #[test]
        fn mobius_is_involution(a in 0.0f64..0.95, t in 0.0f64..6.3, b in 0.0f64..1.0, s in 0.0f64..6.3) {
            let w0 = Complex64::from_polar(a, t);
            let z = Complex64::from_polar(b, s);
            let back = mobius(w0, mobius(w0, z).unwrap()).unwrap();
            prop_assert!((back - z).norm() <= 1e-13);
        }

        #[test]
        fn exceptional_points_on_circle(a in 0.0f64..0.99, t in 0.0f64..6.3) {
            for p in exceptional_points(Complex64::from_polar(a, t)).unwrap() {
                prop_assert!((p.norm() - 1.0).abs() <= 1e-13);
            }
        }

        #[test]
        fn values_stay_in_annulus(r in 0.05f64..0.95, rho in 0.0f64..1.0, t in 0.0f64..6.3) {
            let v = AnnulusMap::new(r).unwrap();
            let z = Complex64::from_polar(rho, t);
            prop_assume!((z - 1.0).norm() > 1e-6 && (z + 1.0).norm() > 1e-6);
            let m = v.eval(z).unwrap().norm();
            prop_assert!(m >= r - 1e-12 && m <= 1.0 + 1e-12);
        }

        #[test]
        fn boundary_dichotomy(r in 0.05f64..0.95, t in 1e-3f64..3.1) {
            let v = AnnulusMap::new(r).unwrap();
            prop_assert!((v.eval(cis(t)).unwrap().norm() - r).abs() <= 1e-10);
            prop_assert!((v.eval(cis(-t)).unwrap().norm() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn preimage_round_trip(r in 0.05f64..0.95, u in 1e-3f64..0.999) {
            let v = AnnulusMap::new(r).unwrap();
            let lambda = r + 1e-3 + u * (1.0 - r - 2e-3);
            let w = v.preimage(lambda).unwrap();
            prop_assert!(w.norm() < 1.0);
            prop_assert!((v.eval(w).unwrap() - lambda).norm() <= 1e-10);
        }
    }
}
