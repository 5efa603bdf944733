//! Phase-shifter resolution and the feasible set of RF precoder entries.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Phase-shifter bit budget. `Infinite` means continuous phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuantizerSpec {
    Finite(u32),
    Infinite,
}

impl QuantizerSpec {
    pub fn bits(bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InvalidParameter("phase shifters need at least one bit".into()));
        }
        if bits > 52 {
            return Err(Error::InvalidParameter(format!("{bits} bits exceeds double precision")));
        }
        Ok(Self::Finite(bits))
    }

    /// Number of available phases, `None` for continuous phase.
    pub fn levels(&self) -> Option<u64> {
        match *self {
            Self::Finite(b) => Some(1u64 << b),
            Self::Infinite => None,
        }
    }

    /// Rounds `phase` to the nearest available phase on the circle.
    ///
    /// Finite resolutions return a value `2 pi b / 2^B` in `[0, 2 pi)`; exact
    /// midpoints go to the smaller index `b`. Continuous phase is returned as is.
    pub fn quantize<T: Real>(&self, phase: T) -> T {
        let Some(levels) = self.levels() else {
            return phase;
        };
        let two_pi = T::TAU();
        let step = two_pi / T::lit(levels as f64);
        let mut wrapped = phase % two_pi;
        if wrapped < T::zero() {
            wrapped += two_pi;
        }
        let r = wrapped / step;
        let lower = r.floor();
        let mut b = if r - lower > T::lit(0.5) { lower + T::one() } else { lower };
        if b >= T::lit(levels as f64) {
            b = T::zero();
        }
        b * step
    }

    /// Elementwise [`Self::quantize`].
    pub fn quantize_phases<T: Real>(&self, phases: &[T]) -> Vec<T> {
        phases.iter().map(|&p| self.quantize(p)).collect()
    }

    /// `(1/sqrt(n_tx)) exp(j Q(angle(x)))` for every entry of `x`.
    pub fn project<T: Real>(&self, x: &ComplexMatrix<T>, n_tx: usize) -> ComplexMatrix<T> {
        let modulus = T::one() / T::lit(n_tx as f64).sqrt();
        x.map(|z| Complex::from_polar(modulus, self.quantize(z.arg())))
    }

    /// Uniform draw from the feasible set.
    pub fn random_feasible<T: Real, R: Rng + ?Sized>(&self, rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<T> {
        let modulus = T::one() / T::lit(rows as f64).sqrt();
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            let phase = match self.levels() {
                Some(levels) => {
                    let b = rng.gen_range(0..levels);
                    std::f64::consts::TAU * b as f64 / levels as f64
                }
                None => rng.gen_range(0.0..std::f64::consts::TAU),
            };
            Complex::from_polar(modulus, T::lit(phase))
        })
    }

    /// Whether every entry has modulus `1/sqrt(n_tx)` and (finite case) an on-grid phase.
    pub fn is_feasible<T: Real>(&self, m: &ComplexMatrix<T>, n_tx: usize, tol: T) -> bool {
        let modulus = T::one() / T::lit(n_tx as f64).sqrt();
        m.iter().all(|z| {
            if (z.norm() - modulus).abs() > tol {
                return false;
            }
            match self.levels() {
                None => true,
                Some(_) => {
                    let p = z.arg();
                    let q = self.quantize(p);
                    let d = (p - q).abs() % T::TAU();
                    d.min(T::TAU() - d) <= tol
                }
            }
        })
    }
}

impl fmt::Display for QuantizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(b) => write!(f, "{b}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for QuantizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" => Ok(Self::Infinite),
            other => {
                let bits: u32 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad bit count '{s}'")))?;
                Self::bits(bits)
            }
        }
    }
}
