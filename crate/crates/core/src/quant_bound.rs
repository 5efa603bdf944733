//! Worst-case effect of phase quantization on the decomposition error.
//!
//! Quantizing every phase of a continuous-phase `F*` by at most `pi / 2^B`
//! increases `||F_opt - F F_BB||` by no more than
//! `|1 - exp(j pi / 2^B)| sqrt(N_Tx N_RF) ||F*|| ||F_BB||`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::quantizer::QuantizerSpec;
use crate::scalar::Real;

/// `|1 - exp(j pi / 2^B)|`, zero for continuous phase.
pub fn quant_bound_factor<T: Real>(spec: QuantizerSpec) -> T {
    match spec {
        QuantizerSpec::Infinite => T::zero(),
        QuantizerSpec::Finite(bits) => {
            let half_step = T::PI() / T::lit(2f64.powi(bits as i32));
            (Complex::new(T::one(), T::zero()) - Complex::from_polar(T::one(), half_step)).norm()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantBoundReport<T> {
    pub bits: QuantizerSpec,
    pub factor: T,
    /// `sqrt(N_Tx N_RF) ||F*|| ||F_BB||`.
    pub c: T,
    /// `||F_opt - F* F_BB||`.
    pub true_error: T,
    /// `||F_opt - Q(F*) F_BB||`.
    pub quantized_error: T,
    /// `true_error + c * factor`.
    pub decp_ub: T,
}

/// Flat record for tabular output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantBoundRow {
    #[serde(rename = "B")]
    pub bits: String,
    pub factor: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub true_error: f64,
    pub decp_ub: f64,
}

impl<T: Real> QuantBoundReport<T> {
    pub fn slack(&self) -> T {
        self.c * self.factor
    }

    /// `(decp_ub - true_error) / true_error`.
    pub fn relative_gap(&self) -> T {
        self.slack() / self.true_error
    }

    pub fn row(&self) -> QuantBoundRow {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        QuantBoundRow {
            bits: self.bits.to_string(),
            factor: f(self.factor),
            c: f(self.c),
            true_error: f(self.true_error),
            decp_ub: f(self.decp_ub),
        }
    }
}

/// Quantizes `f_rf_star` to `spec` and checks the error increase against the bound.
pub fn verify_quantization_bound<T: Real>(
    f_opt: &ComplexMatrix<T>,
    f_rf_star: &ComplexMatrix<T>,
    f_bb: &ComplexMatrix<T>,
    spec: QuantizerSpec,
) -> Result<QuantBoundReport<T>> {
    let (n_tx, n_rf) = f_rf_star.shape();
    if f_opt.rows() != n_tx || f_bb.rows() != n_rf || f_bb.cols() != f_opt.cols() {
        return Err(Error::DimensionMismatch(format!(
            "F_opt {:?}, F* {:?}, F_BB {:?}",
            f_opt.shape(),
            f_rf_star.shape(),
            f_bb.shape()
        )));
    }
    let factor = quant_bound_factor::<T>(spec);
    let c = T::lit((n_tx * n_rf) as f64).sqrt() * f_rf_star.frobenius_norm() * f_bb.frobenius_norm();
    let true_error = (f_opt - &f_rf_star.matmul(f_bb)).frobenius_norm();
    let quantized = spec.project(f_rf_star, n_tx);
    let quantized_error = (f_opt - &quantized.matmul(f_bb)).frobenius_norm();
    let allowance = c * factor;
    let excess = quantized_error - true_error;
    let tol = T::epsilon() * T::lit(64.0) * (T::one() + true_error + quantized_error + allowance);
    if excess > allowance + tol {
        return Err(Error::BoundViolation {
            excess: excess.to_f64().unwrap_or(f64::NAN),
            allowance: allowance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(QuantBoundReport {
        bits: spec,
        factor,
        c,
        true_error,
        quantized_error,
        decp_ub: true_error + allowance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::random_power_normalized;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factor_examples() {
        assert!((quant_bound_factor::<f64>(QuantizerSpec::Finite(1)) - 2f64.sqrt()).abs() < 1e-15);
        assert!((quant_bound_factor::<f64>(QuantizerSpec::Finite(3)) - 0.3902).abs() < 1e-4);
        assert_eq!(quant_bound_factor::<f64>(QuantizerSpec::Infinite), 0.0);
    }

    #[test]
    fn factor_halves_per_bit() {
        let f: Vec<f64> = (1..=12).map(|b| quant_bound_factor(QuantizerSpec::Finite(b))).collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        for w in f[2..].windows(2) {
            let r = w[1] / w[0];
            assert!((0.49..=0.51).contains(&r), "{r}");
        }
    }

    #[test]
    fn scalar_chain_by_hand() {
        let one = |z: Complex<f64>| ComplexMatrix::from_row_major(1, 1, vec![z]).unwrap();
        let f_star = one(Complex::from_polar(1.0, 0.3));
        let f_bb = one(Complex::new(1.0, 0.0));
        let f_opt = one(Complex::new(1.2, 0.5));
        let rep = verify_quantization_bound(&f_opt, &f_star, &f_bb, QuantizerSpec::Finite(1)).unwrap();
        // phase 0.3 rounds to 0, so the quantized RF entry is 1
        let true_error = (Complex::new(1.2, 0.5) - Complex::from_polar(1.0, 0.3)).norm();
        let quantized_error = (Complex::new(1.2, 0.5) - Complex::new(1.0, 0.0)).norm();
        assert!((rep.true_error - true_error).abs() < 1e-15);
        assert!((rep.quantized_error - quantized_error).abs() < 1e-15);
        assert!((rep.c - 1.0).abs() < 1e-15);
        assert!((rep.decp_ub - (true_error + 2f64.sqrt())).abs() < 1e-15);
        // the per-entry phase error 0.3 is inside the 1-bit half step
        assert!(quantized_error - true_error <= (Complex::new(1.0, 0.0) - Complex::from_polar(1.0, 0.3)).norm() + 1e-15);
    }

    #[test]
    fn continuous_phase_has_no_slack() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f_opt = random_power_normalized::<f64, _>(8, 6, 1.0, &mut rng);
        let f_star: ComplexMatrix<f64> = QuantizerSpec::Infinite.random_feasible(8, 4, &mut rng);
        let f_bb = random_power_normalized::<f64, _>(4, 6, 1.0, &mut rng);
        let rep = verify_quantization_bound(&f_opt, &f_star, &f_bb, QuantizerSpec::Infinite).unwrap();
        assert!((rep.quantized_error - rep.true_error).abs() < 1e-14);
        assert_eq!(rep.slack(), 0.0);
        assert_eq!(rep.decp_ub, rep.true_error);
    }

    #[test]
    fn csv_row_fields() {
        let rep: QuantBoundReport<f64> = QuantBoundReport {
            bits: QuantizerSpec::Finite(4),
            factor: 0.25,
            c: 2.0,
            true_error: 0.5,
            quantized_error: 0.6,
            decp_ub: 1.0,
        };
        let row = rep.row();
        assert_eq!(row.bits, "4");
        assert_eq!((row.factor, row.c, row.true_error, row.decp_ub), (0.25, 2.0, 0.5, 1.0));
        assert!((rep.relative_gap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let a = ComplexMatrix::<f64>::zeros(4, 3);
        let b = ComplexMatrix::<f64>::zeros(4, 2);
        let c = ComplexMatrix::<f64>::zeros(3, 3);
        assert!(verify_quantization_bound(&a, &b, &c, QuantizerSpec::Finite(2)).is_err());
    }
}
