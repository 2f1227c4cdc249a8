//! Arithmetic for the noncommutative ring of doubled-up 2x2 coefficient
//! matrices `[[alpha, beta], [beta*, alpha*]]`.
//!
//! Elements are stored as the real quadruple `(a, b, c, d)` in the basis
//! `e, i, j, k` with `alpha = a + ib`, `beta = c + id`. The basis satisfies
//! `-i^2 = j^2 = k^2 = e`, `ijk = e` and pairwise anticommutation, so the
//! ring contains zero divisors (`det = |alpha|^2 - |beta|^2` may vanish for
//! nonzero elements) and is not a division algebra.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative determinant threshold below which an element counts as a zero
/// divisor.
pub const INV_TOL: f64 = 1e-12;

/// Element of the coefficient ring, stored in the `e, i, j, k` basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DNum {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl DNum {
    pub const ZERO: DNum = DNum::new(0.0, 0.0, 0.0, 0.0);
    /// Multiplicative identity.
    pub const E: DNum = DNum::new(1.0, 0.0, 0.0, 0.0);
    pub const I: DNum = DNum::new(0.0, 1.0, 0.0, 0.0);
    pub const J: DNum = DNum::new(0.0, 0.0, 1.0, 0.0);
    pub const K: DNum = DNum::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        DNum { a, b, c, d }
    }

    /// Builds the element with matrix form `[[alpha, beta], [beta*, alpha*]]`.
    pub fn from_complex(alpha: Complex64, beta: Complex64) -> Self {
        DNum::new(alpha.re, alpha.im, beta.re, beta.im)
    }

    /// Embeds a complex number as the diagonal element `[[z, 0], [0, z*]]`.
    ///
    /// These elements form the commutative subring that carries all passive
    /// (non-squeezing) dynamics; the Laplace variable enters resolvents this
    /// way.
    pub fn scalar(z: Complex64) -> Self {
        DNum::new(z.re, z.im, 0.0, 0.0)
    }

    pub fn real(x: f64) -> Self {
        DNum::new(x, 0.0, 0.0, 0.0)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.c, self.d)
    }

    /// The 2x2 complex matrix form.
    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        let alpha = self.alpha();
        let beta = self.beta();
        Matrix2::new(alpha, beta, beta.conj(), alpha.conj())
    }

    /// Determinant of the matrix form: `|alpha|^2 - |beta|^2` (always real).
    pub fn det(&self) -> f64 {
        self.a * self.a + self.b * self.b - self.c * self.c - self.d * self.d
    }

    /// Squared Frobenius norm of the 2x2 matrix form.
    pub fn norm_sq(&self) -> f64 {
        2.0 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.a.abs() <= tol && self.b.abs() <= tol && self.c.abs() <= tol && self.d.abs() <= tol
    }

    /// The flat conjugate `i^-1 p^dag i`, flipping the `i, j, k` parts.
    pub fn flat(&self) -> Self {
        DNum::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn scale(&self, x: f64) -> Self {
        DNum::new(self.a * x, self.b * x, self.c * x, self.d * x)
    }

    /// Multiplicative inverse `flat(p) / det(p)`.
    ///
    /// Fails with [`Error::NonInvertible`] when `|det|` falls below
    /// `INV_TOL * max(1, norm_sq)`, which flags zero divisors in a
    /// scale-aware way.
    pub fn inv(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() <= INV_TOL * self.norm_sq().max(1.0) {
            return Err(Error::NonInvertible { det });
        }
        Ok(self.flat().scale(1.0 / det))
    }

    /// Unimodular-transformation invariants `(a, C)` with
    /// `C = -b^2 + c^2 + d^2`.
    ///
    /// The complex eigenvalues of the matrix form are `a ± sqrt(C)`: `a > 0`
    /// marks a gain medium, `a < 0` a lossy one, and `C > 0` a squeezed mode.
    pub fn classify(&self) -> ModeInvariants {
        ModeInvariants {
            a: self.a,
            c: -self.b * self.b + self.c * self.c + self.d * self.d,
        }
    }

    /// Exponential, using that the imaginary part `v` squares to `C * e`.
    pub fn exp(&self) -> Self {
        let v = DNum::new(0.0, self.b, self.c, self.d);
        let c = -self.b * self.b + self.c * self.c + self.d * self.d;
        let (cosh, sinc) = if c > 0.0 {
            let r = c.sqrt();
            (r.cosh(), r.sinh() / r)
        } else if c < 0.0 {
            let r = (-c).sqrt();
            (r.cos(), r.sin() / r)
        } else {
            (1.0, 1.0)
        };
        (DNum::E.scale(cosh) + v.scale(sinc)).scale(self.a.exp())
    }

    pub fn approx_eq(&self, other: &DNum, tol: f64) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.c - other.c).abs() <= tol
            && (self.d - other.d).abs() <= tol
    }
}

/// Right-eigenvalue class invariants of a mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeInvariants {
    pub a: f64,
    pub c: f64,
}

impl ModeInvariants {
    pub fn is_gain(&self, tol: f64) -> bool {
        self.a > tol
    }

    pub fn is_lossy(&self, tol: f64) -> bool {
        self.a < -tol
    }

    pub fn is_squeezed(&self, tol: f64) -> bool {
        self.c > tol
    }

    /// Short text label, e.g. `"lossless squeezed"`.
    pub fn label(&self, tol: f64) -> String {
        let medium = if self.is_gain(tol) {
            "gain"
        } else if self.is_lossy(tol) {
            "lossy"
        } else {
            "lossless"
        };
        let squeeze = if self.is_squeezed(tol) {
            "squeezed"
        } else {
            "unsqueezed"
        };
        format!("{medium} {squeeze}")
    }
}

impl Add for DNum {
    type Output = DNum;
    fn add(self, q: DNum) -> DNum {
        DNum::new(self.a + q.a, self.b + q.b, self.c + q.c, self.d + q.d)
    }
}

impl Sub for DNum {
    type Output = DNum;
    fn sub(self, q: DNum) -> DNum {
        DNum::new(self.a - q.a, self.b - q.b, self.c - q.c, self.d - q.d)
    }
}

impl Neg for DNum {
    type Output = DNum;
    fn neg(self) -> DNum {
        DNum::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for DNum {
    type Output = DNum;
    // Basis table: -i^2 = j^2 = k^2 = e, ij = k = -ji, jk = -i = -kj, ki = j = -ik.
    fn mul(self, q: DNum) -> DNum {
        let p = self;
        DNum::new(
            p.a * q.a - p.b * q.b + p.c * q.c + p.d * q.d,
            p.a * q.b + p.b * q.a - p.c * q.d + p.d * q.c,
            p.a * q.c + p.c * q.a + p.d * q.b - p.b * q.d,
            p.a * q.d + p.d * q.a + p.b * q.c - p.c * q.b,
        )
    }
}

impl fmt::Display for DNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_dnum(rng: &mut StdRng) -> DNum {
        DNum::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    fn mul_via_matrices(p: DNum, q: DNum) -> DNum {
        // Independent oracle: plain 2x2 complex matrix product.
        let m = p.to_matrix() * q.to_matrix();
        DNum::from_complex(m[(0, 0)], m[(0, 1)])
    }

    #[test]
    fn basis_construction() {
        assert_eq!(DNum::from_complex(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)), DNum::E);
        assert_eq!(DNum::from_complex(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)), DNum::I);
        assert_eq!(DNum::from_complex(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)), DNum::J);
        assert_eq!(DNum::from_complex(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)), DNum::K);
        let m = DNum::E.to_matrix();
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn basis_table_exact() {
        let e = DNum::E;
        let (i, j, k) = (DNum::I, DNum::J, DNum::K);
        assert_eq!(-(i * i), e);
        assert_eq!(j * j, e);
        assert_eq!(k * k, e);
        assert_eq!(i * j * k, e);
        assert_eq!(i * j, -(j * i));
        assert_eq!(j * k, -(k * j));
        assert_eq!(k * i, -(i * k));
        assert_eq!(i * j, k);
        assert_eq!(j * k, -i);
        assert_eq!(k * i, j);
    }

    #[test]
    fn product_matches_matrix_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = random_dnum(&mut rng);
            let q = random_dnum(&mut rng);
            assert!((p * q).approx_eq(&mul_via_matrices(p, q), 1e-13));
        }
        // Spec'd instance: (1+i) * j shifts the off-diagonal part.
        let p = DNum::from_complex(Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0));
        let q = DNum::J;
        assert!((p * q).approx_eq(
            &DNum::from_complex(Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)),
            1e-15
        ));
    }

    #[test]
    fn ring_laws_hold() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = random_dnum(&mut rng);
            let q = random_dnum(&mut rng);
            let r = random_dnum(&mut rng);
            assert!(((p * q) * r).approx_eq(&(p * (q * r)), 1e-13));
            assert!((p * (q + r)).approx_eq(&(p * q + p * r), 1e-13));
            assert!(((p + q) * r).approx_eq(&(p * r + q * r), 1e-13));
            assert!((p * q).flat().approx_eq(&(q.flat() * p.flat()), 1e-13));
            assert_eq!(p.flat().flat(), p);
        }
    }

    #[test]
    fn flat_flips_imaginary_parts() {
        assert_eq!(DNum::E.flat(), DNum::E);
        assert_eq!(DNum::new(1.0, 2.0, 3.0, 4.0).flat(), DNum::new(1.0, -2.0, -3.0, -4.0));
        assert_eq!(DNum::I.flat(), -DNum::I);
    }

    #[test]
    fn inverses() {
        let two = DNum::real(2.0);
        assert!(two.inv().unwrap().approx_eq(&DNum::real(0.5), 1e-15));
        // j is its own inverse since j^2 = e.
        assert!(DNum::J.inv().unwrap().approx_eq(&DNum::J, 1e-15));
        // |alpha| = |beta| makes a zero divisor.
        let z = DNum::from_complex(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(z.inv(), Err(Error::NonInvertible { .. })));
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..200 {
            let p = random_dnum(&mut rng);
            if let Ok(q) = p.inv() {
                assert!((p * q).approx_eq(&DNum::E, 1e-10));
                assert!((q * p).approx_eq(&DNum::E, 1e-10));
            }
        }
    }

    #[test]
    fn classification_invariants() {
        let inv = DNum::I.classify();
        assert_eq!((inv.a, inv.c), (0.0, -1.0));
        assert!(!inv.is_squeezed(1e-12) && !inv.is_gain(1e-12) && !inv.is_lossy(1e-12));

        let inv = DNum::K.classify();
        assert_eq!((inv.a, inv.c), (0.0, 1.0));
        assert!(inv.is_squeezed(1e-12));

        let inv = DNum::from_complex(Complex64::new(-0.5, 2.0), Complex64::new(0.0, 0.0)).classify();
        assert_eq!((inv.a, inv.c), (-0.5, -4.0));
        assert!(inv.is_lossy(1e-12));
    }

    #[test]
    fn classification_invariant_under_unimodular_conjugation() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..1000 {
            let p = random_dnum(&mut rng);
            // exp of a purely imaginary element is unimodular: u~ u = e.
            let u = DNum::new(
                0.0,
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            )
            .exp();
            assert!((u.flat() * u).approx_eq(&DNum::E, 1e-12));
            let q = u.flat() * p * u;
            let (ip, iq) = (p.classify(), q.classify());
            assert!((ip.a - iq.a).abs() < 1e-10, "a changed: {} vs {}", ip.a, iq.a);
            assert!((ip.c - iq.c).abs() < 1e-10, "C changed: {} vs {}", ip.c, iq.c);
        }
    }

    #[test]
    fn eigenvalues_are_a_plus_minus_sqrt_c() {
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..200 {
            let p = random_dnum(&mut rng);
            let inv = p.classify();
            // Roots of lambda^2 - 2a lambda + det.
            let disc = Complex64::new(inv.c, 0.0).sqrt();
            let expected = [Complex64::new(inv.a, 0.0) + disc, Complex64::new(inv.a, 0.0) - disc];
            let eigs = p.to_matrix().eigenvalues();
            match eigs {
                Some(ev) => {
                    let got = [ev[0], ev[1]];
                    let direct = (got[0] - expected[0]).norm() + (got[1] - expected[1]).norm();
                    let swapped = (got[0] - expected[1]).norm() + (got[1] - expected[0]).norm();
                    assert!(direct.min(swapped) < 1e-10);
                }
                None => panic!("2x2 eigenvalues failed"),
            }
        }
    }
}
