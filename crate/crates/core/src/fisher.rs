//! Fisher information, Cramér-Rao bound and the closed-form angle error bound
//! for the line-of-sight pilot model `y = beta S F^T a(theta) + n`.
//!
//! The unknowns are `x = [sin(theta), Re(beta), Im(beta)]`; the angle entry is
//! differentiated with respect to `sin(theta)`, so the bound is expressed in
//! the sine domain. The pilot matrix never appears explicitly: only its power
//! `S^H S = sigma_s^2 I` enters.
//!
//! Everything reduces to two length-`M` responses of the precoder,
//! `g = F^T a(theta)` and `h = F^T D a(theta)`:
//!
//! ```text
//! J11 = 2 k^2 |beta|^2 sigma_s^2 / sigma_n^2 * ||h||^2
//! J12 = 2 k sigma_s^2 / sigma_n^2 * Re{ j conj(beta) h^H g }
//! J13 = -2 k sigma_s^2 / sigma_n^2 * Re{ conj(beta) h^H g }
//! J22 = J33 = 2 sigma_s^2 / sigma_n^2 * ||g||^2,   J23 = 0
//! ```
//!
//! with `k = 2 pi d / lambda`, and the angle error bound is
//! `sigma_n / (sigma_s sqrt(2) |beta| k) * sqrt(||g||^2 / (||g||^2 ||h||^2 - |g^H h|^2))`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::array::UlaGeometry;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Mat3};
use crate::scalar::Real;

/// Channel parameters at which the bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState<T> {
    pub theta: T,
    pub beta: Complex<T>,
    pub sigma_n: T,
    pub sigma_s: T,
    pub geom: UlaGeometry<T>,
}

impl<T: Real> ChannelState<T> {
    pub fn new(theta: T, beta: Complex<T>, sigma_n: T, sigma_s: T, geom: UlaGeometry<T>) -> Result<Self> {
        let state = Self {
            theta,
            beta,
            sigma_n,
            sigma_s,
            geom,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_n > T::zero()) || !(self.sigma_s > T::zero()) {
            return Err(Error::InvalidParameter("noise and pilot amplitudes must be positive".into()));
        }
        if !(self.beta.norm() > T::zero()) {
            return Err(Error::InvalidParameter("channel gain must be nonzero".into()));
        }
        if !(self.theta.abs() < T::FRAC_PI_2()) {
            return Err(Error::InvalidParameter(format!("angle {} outside (-pi/2, pi/2)", self.theta)));
        }
        Ok(())
    }

    /// Same state at a different angle.
    pub fn at_angle(&self, theta: T) -> Self {
        Self { theta, ..*self }
    }
}

/// Responses `g = F^T a` and `h = F^T D a` of every precoder column.
#[derive(Debug, Clone)]
pub struct BeamResponses<T> {
    pub g: Vec<Complex<T>>,
    pub h: Vec<Complex<T>>,
}

impl<T: Real> BeamResponses<T> {
    pub fn compute(f: &ComplexMatrix<T>, state: &ChannelState<T>) -> Result<Self> {
        let n_tx = state.geom.n_tx();
        if f.rows() != n_tx {
            return Err(Error::DimensionMismatch(format!(
                "precoder has {} rows but the array has {n_tx} antennas",
                f.rows()
            )));
        }
        let a = state.geom.steering(state.theta);
        let da = state.geom.positions().apply(&a);
        let zero = Complex::new(T::zero(), T::zero());
        let mut g = vec![zero; f.cols()];
        let mut h = vec![zero; f.cols()];
        for n in 0..n_tx {
            for m in 0..f.cols() {
                let fnm = f[(n, m)];
                g[m] += fnm * a[n];
                h[m] += fnm * da[n];
            }
        }
        Ok(Self { g, h })
    }

    pub fn g_norm_sq(&self) -> T {
        self.g.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn h_norm_sq(&self) -> T {
        self.h.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `h^H g`.
    pub fn cross(&self) -> Complex<T> {
        self.h
            .iter()
            .zip(&self.g)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (h, g)| acc + h.conj() * g)
    }
}

/// 3x3 Fisher information matrix over `[sin(theta), Re(beta), Im(beta)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix<T>(pub Mat3<T>);

impl<T: Real> FisherMatrix<T> {
    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0.get(i, j)
    }
}

/// Closed-form Fisher information of precoder `f` at `state`.
pub fn fim<T: Real>(f: &ComplexMatrix<T>, state: &ChannelState<T>) -> Result<FisherMatrix<T>> {
    let resp = BeamResponses::compute(f, state)?;
    Ok(fim_from_responses(&resp, state))
}

pub(crate) fn fim_from_responses<T: Real>(resp: &BeamResponses<T>, state: &ChannelState<T>) -> FisherMatrix<T> {
    let two = T::lit(2.0);
    let k = state.geom.wavenumber_spacing();
    let snr = state.sigma_s * state.sigma_s / (state.sigma_n * state.sigma_n);
    let beta = state.beta;
    let cross = resp.cross();
    let bc = beta.conj() * cross;
    let j = Complex::new(T::zero(), T::one());

    let j11 = two * k * k * beta.norm_sqr() * snr * resp.h_norm_sq();
    let j12 = two * k * snr * (j * bc).re;
    let j13 = -two * k * snr * bc.re;
    let j22 = two * snr * resp.g_norm_sq();
    let z = T::zero();
    FisherMatrix(Mat3([[j11, j12, j13], [j12, j22, z], [j13, z, j22]]))
}

/// Cramér-Rao bound matrix `C = J^{-1}`.
pub fn crb<T: Real>(j: &FisherMatrix<T>) -> Result<Mat3<T>> {
    let eig = j.0.symmetric_eigenvalues();
    let min = eig.iter().copied().fold(T::infinity(), T::min);
    let max = eig.iter().copied().fold(T::neg_infinity(), T::max);
    if !(max > T::zero()) || min <= T::lit(T::GRAM_RCOND) * max {
        return Err(Error::SingularFim);
    }
    let inv = j.0.inverse().ok_or(Error::SingularFim)?;
    // exact symmetry of the returned bound
    let mut c = inv;
    for r in 0..3 {
        for s in (r + 1)..3 {
            let avg = (inv.0[r][s] + inv.0[s][r]) * T::lit(0.5);
            c.0[r][s] = avg;
            c.0[s][r] = avg;
        }
    }
    Ok(c)
}

/// Closed-form angle error bound `sqrt([J^{-1}]_11)`.
pub fn aeb<T: Real>(f: &ComplexMatrix<T>, state: &ChannelState<T>) -> Result<T> {
    let resp = BeamResponses::compute(f, state)?;
    aeb_from_responses(&resp, state)
}

pub(crate) fn aeb_from_responses<T: Real>(resp: &BeamResponses<T>, state: &ChannelState<T>) -> Result<T> {
    let gg = resp.g_norm_sq();
    let hh = resp.h_norm_sq();
    let scale = gg * hh;
    let denom = scale - resp.cross().norm_sqr();
    if !(scale > T::zero()) || denom <= T::lit(T::BOUND_RCOND) * scale {
        let ratio = if scale > T::zero() { denom / scale } else { T::zero() };
        return Err(Error::DegenerateBound(ratio.to_f64().unwrap_or(f64::NAN)));
    }
    let k = state.geom.wavenumber_spacing();
    let prefactor = state.sigma_n / (state.sigma_s * T::SQRT_2() * state.beta.norm() * k);
    Ok(prefactor * (gg / denom).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::deg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn random_f(rng: &mut ChaCha8Rng, n: usize, m: usize) -> M {
        M::from_fn(n, m, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn state(n: usize, theta_deg: f64) -> ChannelState<f64> {
        ChannelState::new(
            deg(theta_deg),
            Complex::new(1.0, 0.5),
            0.3,
            1.2,
            UlaGeometry::half_wavelength(n).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn state_validation() {
        let g = UlaGeometry::half_wavelength(4).unwrap();
        assert!(ChannelState::new(0.0, Complex::new(0.0, 0.0), 1.0, 1.0, g).is_err());
        assert!(ChannelState::new(0.0, Complex::new(1.0, 0.0), 0.0, 1.0, g).is_err());
        assert!(ChannelState::new(0.0, Complex::new(1.0, 0.0), 1.0, -1.0, g).is_err());
        assert!(ChannelState::new(2.0, Complex::new(1.0, 0.0), 1.0, 1.0, g).is_err());
    }

    #[test]
    fn zero_precoder_has_zero_information() {
        let j = fim(&M::zeros(4, 6), &state(4, 20.0)).unwrap();
        assert_eq!(*j.matrix(), Mat3::zeros());
        assert!(matches!(crb(&j), Err(Error::SingularFim)));
        assert!(matches!(aeb(&M::zeros(4, 6), &state(4, 20.0)), Err(Error::DegenerateBound(_))));
    }

    #[test]
    fn fim_is_quadratic_in_precoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_f(&mut rng, 4, 6);
        let s = state(4, 20.0);
        let j1 = fim(&f, &s).unwrap();
        let j2 = fim(&f.scale(2.0), &s).unwrap();
        assert!(j2.matrix().max_abs_diff(&j1.matrix().scale(4.0)) <= 1e-12 * j1.matrix().frobenius_norm());
    }

    #[test]
    fn fim_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j = fim(&random_f(&mut rng, 5, 3), &state(5, -10.0)).unwrap();
        assert!(j.matrix().is_symmetric());
        assert_eq!(j.get(1, 2), 0.0);
        assert_eq!(j.get(1, 1), j.get(2, 2));
    }

    #[test]
    fn crb_examples() {
        assert_eq!(crb(&FisherMatrix(Mat3::<f64>::identity())).unwrap(), Mat3::identity());
        assert_eq!(
            crb(&FisherMatrix(Mat3::diag([4.0, 2.0, 2.0]))).unwrap(),
            Mat3::diag([0.25, 0.5, 0.5])
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = fim(&random_f(&mut rng, 6, 4), &state(6, 15.0)).unwrap();
        let c = crb(&j).unwrap();
        assert!(c.is_symmetric());
        assert!(c.matmul(j.matrix()).max_abs_diff(&Mat3::identity()) < 1e-9);
    }

    #[test]
    fn aeb_homogeneity_and_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_f(&mut rng, 8, 10);
        let s = state(8, 12.0);
        let base = aeb(&f, &s).unwrap();
        let doubled = aeb(&f.scale(2.0), &s).unwrap();
        assert!((doubled - base / 2.0).abs() <= 1e-12 * base);
        let rotated = aeb(&f.scale_complex(Complex::from_polar(1.0, 1.234)), &s).unwrap();
        assert!((rotated - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn aeb_equals_crb_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let f = random_f(&mut rng, 8, 10);
            let s = state(8, rng.gen_range(-70.0..70.0));
            let closed = aeb(&f, &s).unwrap();
            let numeric = crb(&fim(&f, &s).unwrap()).unwrap().get(0, 0).sqrt();
            assert!((closed - numeric).abs() <= 1e-8 * numeric);
        }
    }

    #[test]
    fn single_beam_is_unidentifiable_and_extra_beams_help() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = state(8, 5.0);
        let cols: Vec<Vec<Complex<f64>>> = (0..3).map(|_| random_f(&mut rng, 8, 1).column(0)).collect();
        let one = M::from_columns(&cols[..1]).unwrap();
        assert!(matches!(aeb(&one, &s), Err(Error::DegenerateBound(_))));
        let two = aeb(&M::from_columns(&cols[..2]).unwrap(), &s).unwrap();
        let three = aeb(&M::from_columns(&cols).unwrap(), &s).unwrap();
        assert!(two.is_finite() && three < two);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(fim(&M::zeros(3, 2), &state(4, 0.0)), Err(Error::DimensionMismatch(_))));
    }
}
