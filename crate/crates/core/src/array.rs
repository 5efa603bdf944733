//! Uniform linear array geometry and steering vectors.
//!
//! Angles are measured from broadside in radians and must lie in
//! `(-pi/2, pi/2)`. Element `n` of the steering vector is
//! `exp(-j 2 pi (d/lambda) n sin(theta))`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type CVector<T> = Vec<Complex<T>>;

/// Uniform linear array with `n_tx` elements spaced `d_over_lambda` wavelengths apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry<T> {
    n_tx: usize,
    d_over_lambda: T,
}

impl<T: Real> UlaGeometry<T> {
    pub fn new(n_tx: usize, d_over_lambda: T) -> Result<Self> {
        if n_tx == 0 {
            return Err(Error::InvalidParameter("array needs at least one antenna".into()));
        }
        if !(d_over_lambda > T::zero()) || !d_over_lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("element spacing {d_over_lambda} must be positive")));
        }
        Ok(Self { n_tx, d_over_lambda })
    }

    /// Half-wavelength spacing.
    pub fn half_wavelength(n_tx: usize) -> Result<Self> {
        Self::new(n_tx, T::lit(0.5))
    }

    #[inline]
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    #[inline]
    pub fn d_over_lambda(&self) -> T {
        self.d_over_lambda
    }

    /// Spatial frequency scale `2 pi d / lambda`.
    #[inline]
    pub fn wavenumber_spacing(&self) -> T {
        T::lit(2.0) * T::PI() * self.d_over_lambda
    }

    /// Diagonal of the element position operator, `0, 1, ..., n_tx - 1`.
    pub fn positions(&self) -> PositionOperator {
        PositionOperator(self.n_tx)
    }

    /// Steering vector `a(theta)`.
    pub fn steering(&self, theta: T) -> CVector<T> {
        self.steering_at_sine(theta.sin())
    }

    /// Steering vector parameterized by `u = sin(theta)`.
    pub fn steering_at_sine(&self, u: T) -> CVector<T> {
        let k = self.wavenumber_spacing();
        (0..self.n_tx)
            .map(|n| Complex::from_polar(T::one(), -k * T::lit(n as f64) * u))
            .collect()
    }

    /// `d a / d theta`: element `n` is `-j k n cos(theta) a_n(theta)`.
    pub fn steering_deriv_theta(&self, theta: T) -> CVector<T> {
        let cos = theta.cos();
        self.steering_deriv_sin_theta(theta).into_iter().map(|z| z * cos).collect()
    }

    /// `d a / d sin(theta) = -j k D a(theta)`.
    pub fn steering_deriv_sin_theta(&self, theta: T) -> CVector<T> {
        let k = self.wavenumber_spacing();
        let minus_j = Complex::new(T::zero(), -T::one());
        self.steering(theta)
            .into_iter()
            .enumerate()
            .map(|(n, a)| minus_j * k * T::lit(n as f64) * a)
            .collect()
    }
}

/// `D = diag{0, 1, ..., N-1}`; stored implicitly by its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionOperator(pub usize);

impl PositionOperator {
    pub fn diagonal(&self) -> Vec<usize> {
        (0..self.0).collect()
    }

    /// `D v`.
    pub fn apply<T: Real>(&self, v: &[Complex<T>]) -> CVector<T> {
        assert_eq!(v.len(), self.0);
        v.iter().enumerate().map(|(n, &z)| z * T::lit(n as f64)).collect()
    }
}

/// Degrees to radians for any scalar.
#[inline]
pub fn deg<T: Real>(degrees: T) -> T {
    degrees * T::PI() / T::lit(180.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ula(n: usize) -> UlaGeometry<f64> {
        UlaGeometry::half_wavelength(n).unwrap()
    }

    fn close(a: &[Complex<f64>], b: &[Complex<f64>], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn geometry_validation() {
        assert!(UlaGeometry::<f64>::new(0, 0.5).is_err());
        assert!(UlaGeometry::<f64>::new(4, 0.0).is_err());
        assert!(UlaGeometry::<f64>::new(4, -0.5).is_err());
        assert_eq!(ula(3).positions().diagonal(), vec![0, 1, 2]);
    }

    #[test]
    fn steering_examples() {
        let a = ula(6).steering(0.0);
        assert!(a.iter().all(|z| (z - Complex::new(1.0, 0.0)).norm() < 1e-15));
        assert_eq!(ula(1).steering(0.7), vec![Complex::new(1.0, 0.0)]);
        let a = ula(2).steering(deg(30.0));
        assert!(close(&a, &[Complex::new(1.0, 0.0), Complex::new(0.0, -1.0)], 1e-15));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(ula(1).steering_deriv_theta(0.4), vec![Complex::new(0.0, 0.0)]);
        let pi = std::f64::consts::PI;
        let expected = [Complex::new(0.0, 0.0), Complex::new(0.0, -pi)];
        assert!(close(&ula(2).steering_deriv_theta(0.0), &expected, 1e-15));
        assert!(close(&ula(2).steering_deriv_sin_theta(0.0), &expected, 1e-15));

        let theta = deg(40.0);
        let g = ula(7);
        let chain: Vec<_> = g.steering_deriv_sin_theta(theta).iter().map(|z| z * theta.cos()).collect();
        assert!(close(&g.steering_deriv_theta(theta), &chain, 1e-14));
    }

    #[test]
    fn derivatives_match_central_differences() {
        let g = ula(8);
        let h = 1e-6;
        for &theta in &[-1.2, -0.5, 0.0, 0.3, 1.1] {
            let plus = g.steering(theta + h);
            let minus = g.steering(theta - h);
            let fd: Vec<_> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect();
            assert!(close(&g.steering_deriv_theta(theta), &fd, 1e-5));

            let u = theta.sin();
            let plus = g.steering_at_sine(u + h);
            let minus = g.steering_at_sine(u - h);
            let fd: Vec<_> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect();
            assert!(close(&g.steering_deriv_sin_theta(theta), &fd, 1e-5));
        }
    }

    proptest! {
        #[test]
        fn steering_is_unit_modulus_and_conjugate_symmetric(n in 1usize..40, theta in -1.5f64..1.5) {
            let g = ula(n);
            let a = g.steering(theta);
            prop_assert!(a.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
            prop_assert_eq!(a[0], Complex::new(1.0, 0.0));
            let mirrored = g.steering(-theta);
            prop_assert!(a.iter().zip(&mirrored).all(|(x, y)| (x.conj() - y).norm() <= 1e-12));
            let chain: Vec<_> = g.steering_deriv_sin_theta(theta).iter().map(|z| z * theta.cos()).collect();
            prop_assert!(close(&g.steering_deriv_theta(theta), &chain, 1e-10));
        }
    }
}
