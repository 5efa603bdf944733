//! Hybrid factorization `F_opt ~ F_RF F_BB` with phase-quantized `F_RF`.
//!
//! The outer loop alternates a power-normalized least-squares fit of `F_BB`
//! with a scaled-form ADMM solve for `F_RF`. The ADMM splits the RF precoder
//! into a feasible copy `F_RF` and an unconstrained copy `F~`, tied by the
//! scaled dual `U`:
//!
//! ```text
//! L(F~, F_RF, U) = 1/2 ||F_opt - F~ F_BB||^2 + rho/2 (||F~ - F_RF + U||^2 - ||U||^2)
//! ```
//!
//! With `rho >= max{sqrt(2) ||F_BB F_BB^H||, ||F_BB||^2}` the Lagrangian is
//! nonincreasing from the first iterate on and bounded below by zero.

use log::warn;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{left_pseudoinverse, Cholesky, ComplexMatrix};
use crate::quantizer::QuantizerSpec;
use crate::scalar::Real;

/// Result of the factorization: `F_RF` is `N_Tx x N_RF`, `F_BB` is `N_RF x M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridFactors<T> {
    pub f_rf: ComplexMatrix<T>,
    pub f_bb: ComplexMatrix<T>,
}

impl<T: Real> HybridFactors<T> {
    pub fn product(&self) -> ComplexMatrix<T> {
        self.f_rf.matmul(&self.f_bb)
    }

    pub fn power(&self) -> T {
        self.product().frobenius_norm_sq()
    }
}

/// `||F_opt - F_RF F_BB|| / ||F_opt||`.
pub fn decomposition_error<T: Real>(f_opt: &ComplexMatrix<T>, factors: &HybridFactors<T>) -> T {
    let residual = f_opt - &factors.product();
    residual.frobenius_norm() / f_opt.frobenius_norm()
}

/// Power-normalized least-squares baseband precoder for a fixed `F_RF`.
pub fn bb_update<T: Real>(f_rf: &ComplexMatrix<T>, f_opt: &ComplexMatrix<T>, power: T) -> Result<ComplexMatrix<T>> {
    let pinv = left_pseudoinverse(f_rf)?;
    let ls = pinv.try_matmul(f_opt)?;
    let norm = f_rf.matmul(&ls).frobenius_norm();
    if !(norm > T::zero()) {
        return Err(Error::ZeroProjection);
    }
    Ok(ls.scale(power.sqrt() / norm))
}

/// `max{sqrt(2) ||F_BB F_BB^H||_F, ||F_BB||_F^2}`.
pub fn rho_rule<T: Real>(f_bb: &ComplexMatrix<T>) -> Result<T> {
    let energy = f_bb.frobenius_norm_sq();
    if !(energy > T::zero()) {
        return Err(Error::ZeroBb);
    }
    let gram = f_bb.matmul(&f_bb.adjoint()).frobenius_norm();
    Ok((T::SQRT_2() * gram).max(energy))
}

/// Scaled-form augmented Lagrangian.
pub fn augmented_lagrangian<T: Real>(
    f_tilde: &ComplexMatrix<T>,
    f_rf: &ComplexMatrix<T>,
    u: &ComplexMatrix<T>,
    rho: T,
    f_opt: &ComplexMatrix<T>,
    f_bb: &ComplexMatrix<T>,
) -> T {
    let fit = (f_opt - &f_tilde.matmul(f_bb)).frobenius_norm_sq();
    let gap = (&(f_tilde - f_rf) + u).frobenius_norm_sq();
    let half = T::lit(0.5);
    half * fit + half * rho * (gap - u.frobenius_norm_sq())
}

/// Gradient of the `F~` subproblem: `(F~ F_BB - F_opt) F_BB^H + rho (F~ - F_RF + U)`.
///
/// Zero (up to rounding) when `f_tilde` is the exact minimizer for the given
/// `f_rf` and previous dual `u_prev`.
pub fn stationarity_residual<T: Real>(
    f_tilde: &ComplexMatrix<T>,
    f_rf: &ComplexMatrix<T>,
    u_prev: &ComplexMatrix<T>,
    rho: T,
    f_opt: &ComplexMatrix<T>,
    f_bb: &ComplexMatrix<T>,
) -> ComplexMatrix<T> {
    let fit = (&f_tilde.matmul(f_bb) - f_opt).matmul(&f_bb.adjoint());
    let gap = &(f_tilde - f_rf) + u_prev;
    &fit + &gap.scale(rho)
}

/// Iterates of the inner ADMM loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState<T> {
    pub f_rf: ComplexMatrix<T>,
    pub f_tilde: ComplexMatrix<T>,
    pub u: ComplexMatrix<T>,
    pub rho: T,
    pub k: usize,
    /// Lagrangian after each step, `L^(1), L^(2), ...`.
    pub lagrangian_trace: Vec<T>,
}

impl<T: Real> AdmmState<T> {
    /// Starting point `(F_RF, F~, U = 0)` at iteration zero.
    pub fn new(f_rf: ComplexMatrix<T>, f_tilde: ComplexMatrix<T>, rho: T) -> Result<Self> {
        if f_rf.shape() != f_tilde.shape() {
            return Err(Error::DimensionMismatch(format!(
                "F_RF is {:?} but F~ is {:?}",
                f_rf.shape(),
                f_tilde.shape()
            )));
        }
        if !(rho > T::zero()) {
            return Err(Error::InvalidParameter("rho must be positive".into()));
        }
        let (rows, cols) = f_rf.shape();
        Ok(Self {
            f_rf,
            f_tilde,
            u: ComplexMatrix::zeros(rows, cols),
            rho,
            k: 0,
            lagrangian_trace: Vec::new(),
        })
    }

    pub fn lagrangian(&self, f_opt: &ComplexMatrix<T>, f_bb: &ComplexMatrix<T>) -> T {
        augmented_lagrangian(&self.f_tilde, &self.f_rf, &self.u, self.rho, f_opt, f_bb)
    }
}

/// ADMM iteration with `F_opt F_BB^H` and `(F_BB F_BB^H + rho I)^{-1}` cached.
#[derive(Debug, Clone)]
pub struct AdmmSolver<'a, T> {
    f_opt: &'a ComplexMatrix<T>,
    f_bb: &'a ComplexMatrix<T>,
    spec: QuantizerSpec,
    rho: T,
    target: ComplexMatrix<T>,
    inverse: ComplexMatrix<T>,
    n_tx: usize,
}

impl<'a, T: Real> AdmmSolver<'a, T> {
    pub fn new(f_opt: &'a ComplexMatrix<T>, f_bb: &'a ComplexMatrix<T>, rho: T, spec: QuantizerSpec) -> Result<Self> {
        if f_opt.cols() != f_bb.cols() {
            return Err(Error::DimensionMismatch(format!(
                "F_opt has {} columns, F_BB has {}",
                f_opt.cols(),
                f_bb.cols()
            )));
        }
        if !(rho > T::zero()) {
            return Err(Error::InvalidParameter("rho must be positive".into()));
        }
        let bbh = f_bb.adjoint();
        let gram = &f_bb.matmul(&bbh) + &ComplexMatrix::identity(f_bb.rows()).scale(rho);
        let inverse = Cholesky::factor(&gram)?.inverse();
        Ok(Self {
            f_opt,
            f_bb,
            spec,
            rho,
            target: f_opt.matmul(&bbh),
            inverse,
            n_tx: f_opt.rows(),
        })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// One primal, auxiliary and dual update; appends the new Lagrangian.
    pub fn step(&self, state: &AdmmState<T>) -> AdmmState<T> {
        let mut next = state.clone();
        self.advance(&mut next);
        next
    }

    /// In-place [`Self::step`].
    pub fn advance(&self, state: &mut AdmmState<T>) {
        let f_rf = self.spec.project(&(&state.f_tilde + &state.u), self.n_tx);
        let rhs = &self.target + &(&f_rf - &state.u).scale(self.rho);
        let f_tilde = rhs.matmul(&self.inverse);
        if cfg!(debug_assertions) {
            let r = stationarity_residual(&f_tilde, &f_rf, &state.u, self.rho, self.f_opt, self.f_bb);
            let scale = self.target.frobenius_norm() + self.rho * (f_tilde.frobenius_norm() + f_rf.frobenius_norm());
            debug_assert!(
                r.frobenius_norm() <= T::epsilon() * T::lit(1e4) * (T::one() + scale),
                "F~ update is not stationary: {}",
                r.frobenius_norm()
            );
        }
        state.u = &(&state.u + &f_tilde) - &f_rf;
        state.f_rf = f_rf;
        state.f_tilde = f_tilde;
        state.k += 1;
        let l = state.lagrangian(self.f_opt, self.f_bb);
        state.lagrangian_trace.push(l);
    }
}

/// Single ADMM step without caching.
pub fn admm_step<T: Real>(
    state: &AdmmState<T>,
    f_opt: &ComplexMatrix<T>,
    f_bb: &ComplexMatrix<T>,
    spec: QuantizerSpec,
) -> Result<AdmmState<T>> {
    Ok(AdmmSolver::new(f_opt, f_bb, state.rho, spec)?.step(state))
}

/// Which `(F_RF, F_BB)` pair the factorization returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputPairing {
    /// Final re-quantized `F_RF` with `F_BB` refitted to it.
    #[default]
    Refit,
    /// Final re-quantized `F_RF` with the `F_BB` of the last outer iteration,
    /// which was fitted to the previous `F_RF`.
    Listing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltOptConfig {
    pub i_max: usize,
    pub k_max: usize,
    pub seed: u64,
    pub pairing: OutputPairing,
    /// Fresh random initializations allowed after a singular Gram matrix.
    pub max_redraws: usize,
}

impl Default for AltOptConfig {
    fn default() -> Self {
        Self {
            i_max: 10,
            k_max: 50,
            seed: 0,
            pairing: OutputPairing::Refit,
            max_redraws: 10,
        }
    }
}

/// Record of one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord<T> {
    pub outer: usize,
    pub rho: T,
    /// Relative error of `(F_RF^(i), F_BB^(i+1))` right after the baseband fit.
    pub decp_err: T,
    /// `1/2 ||F_opt - F_RF^(i) F_BB^(i+1)||^2`.
    pub cost: T,
    /// Relative error of the re-quantized `F_RF^(i+1)` against the same `F_BB^(i+1)`.
    pub decp_err_after_rf: T,
    /// Lagrangian at the inner starting point.
    pub initial_lagrangian: T,
    pub lagrangian_trace: Vec<T>,
}

/// Flattened per-inner-iteration row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord<T> {
    pub outer: usize,
    pub inner: usize,
    pub lagrangian: T,
    pub decp_err: T,
    pub rho: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics<T> {
    pub outer: Vec<OuterRecord<T>>,
    /// Number of random initializations used (1 unless a Gram matrix was singular).
    pub draws: usize,
    /// Whether `F_opt` was rescaled to the requested power.
    pub renormalized: bool,
    pub pairing: OutputPairing,
    /// The final re-quantized `F_RF` was rank deficient, so the refit pairing
    /// fell back to the last `(F_RF, F_BB)` pair that was fitted together.
    pub rank_deficient: bool,
    /// Error of the pair the listing returns (final `F_RF`, last fitted `F_BB`).
    pub listing_decp_err: T,
    /// Error after refitting `F_BB` to the final `F_RF`.
    pub refit_decp_err: T,
}

impl<T: Real> Diagnostics<T> {
    /// Error of the returned factors.
    pub fn final_decp_err(&self) -> T {
        match self.pairing {
            OutputPairing::Refit => self.refit_decp_err,
            OutputPairing::Listing => self.listing_decp_err,
        }
    }

    pub fn iteration_records(&self) -> Vec<IterationRecord<T>> {
        self.outer
            .iter()
            .flat_map(|o| {
                o.lagrangian_trace.iter().enumerate().map(move |(k, &l)| IterationRecord {
                    outer: o.outer,
                    inner: k + 1,
                    lagrangian: l,
                    decp_err: o.decp_err,
                    rho: o.rho,
                })
            })
            .collect()
    }

    pub fn outer_costs(&self) -> Vec<T> {
        self.outer.iter().map(|o| o.cost).collect()
    }
}

/// Alternating LS / ADMM factorization of `f_opt` with `n_rf` RF chains.
pub fn alt_opt_ls_admm<T: Real>(
    f_opt: &ComplexMatrix<T>,
    n_rf: usize,
    power: T,
    spec: QuantizerSpec,
    cfg: &AltOptConfig,
) -> Result<(HybridFactors<T>, Diagnostics<T>)> {
    let n_tx = f_opt.rows();
    if n_rf == 0 || n_rf > n_tx {
        return Err(Error::InvalidParameter(format!("need 1 <= N_RF <= N_Tx, got {n_rf} and {n_tx}")));
    }
    if cfg.i_max == 0 || cfg.k_max == 0 {
        return Err(Error::InvalidParameter("iteration limits must be positive".into()));
    }
    if !(power > T::zero()) {
        return Err(Error::InvalidParameter("total power must be positive".into()));
    }
    if !f_opt.is_finite() {
        return Err(Error::NonFinite);
    }
    let energy = f_opt.frobenius_norm_sq();
    if !(energy > T::zero()) {
        return Err(Error::InvalidParameter("F_opt is zero".into()));
    }
    let mismatch = ((energy - power) / power).abs();
    let renormalized = mismatch > T::lit(1e-9);
    let scaled;
    let f_opt = if renormalized {
        warn!("F_opt power {energy} differs from P = {power}; rescaling");
        scaled = f_opt.scale((power / energy).sqrt());
        &scaled
    } else {
        f_opt
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for draw in 1..=cfg.max_redraws + 1 {
        let f_rf_init: ComplexMatrix<T> = spec.random_feasible(n_tx, n_rf, &mut rng);
        let f_tilde_init: ComplexMatrix<T> = spec.random_feasible(n_tx, n_rf, &mut rng);
        match run(f_opt, f_rf_init, &f_tilde_init, power, spec, cfg) {
            Ok((factors, mut diag)) => {
                diag.draws = draw;
                diag.renormalized = renormalized;
                return Ok((factors, diag));
            }
            Err(Error::SingularGram { min, max }) => {
                warn!("singular F_RF Gram (eigenvalues {min:e}..{max:e}) on draw {draw}; redrawing");
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InitializationFailed(cfg.max_redraws + 1))
}

fn run<T: Real>(
    f_opt: &ComplexMatrix<T>,
    mut f_rf: ComplexMatrix<T>,
    f_tilde_init: &ComplexMatrix<T>,
    power: T,
    spec: QuantizerSpec,
    cfg: &AltOptConfig,
) -> Result<(HybridFactors<T>, Diagnostics<T>)> {
    let n_tx = f_opt.rows();
    let opt_norm = f_opt.frobenius_norm();
    let rel_err = |rf: &ComplexMatrix<T>, bb: &ComplexMatrix<T>| (f_opt - &rf.matmul(bb)).frobenius_norm() / opt_norm;
    let mut outer = Vec::with_capacity(cfg.i_max);
    let mut last_pair: Option<(ComplexMatrix<T>, ComplexMatrix<T>)> = None;

    for i in 0..cfg.i_max {
        let f_bb = match (bb_update(&f_rf, f_opt, power), &last_pair) {
            (Ok(bb), _) => bb,
            (Err(Error::SingularGram { .. }), Some(_)) => {
                warn!("re-quantized F_RF lost rank at outer iteration {}; stopping", i + 1);
                break;
            }
            (Err(e), _) => return Err(e),
        };
        let rho = rho_rule(&f_bb)?;
        let residual = (f_opt - &f_rf.matmul(&f_bb)).frobenius_norm();
        let solver = AdmmSolver::new(f_opt, &f_bb, rho, spec)?;
        let mut state = AdmmState::new(f_rf.clone(), f_tilde_init.clone(), rho)?;
        let initial_lagrangian = state.lagrangian(f_opt, &f_bb);
        for _ in 0..cfg.k_max {
            solver.advance(&mut state);
        }
        let next_rf = spec.project(&state.f_tilde, n_tx);
        outer.push(OuterRecord {
            outer: i + 1,
            rho,
            decp_err: residual / opt_norm,
            cost: T::lit(0.5) * residual * residual,
            decp_err_after_rf: rel_err(&next_rf, &f_bb),
            initial_lagrangian,
            lagrangian_trace: state.lagrangian_trace,
        });
        last_pair = Some((std::mem::replace(&mut f_rf, next_rf), f_bb));
    }

    let (prev_rf, last_bb) = last_pair.expect("at least one outer iteration");
    let listing_decp_err = rel_err(&f_rf, &last_bb);
    let (refit_rf, refit_bb, rank_deficient) = match bb_update(&f_rf, f_opt, power) {
        Ok(bb) => (f_rf.clone(), bb, false),
        Err(Error::SingularGram { .. }) => (prev_rf, last_bb.clone(), true),
        Err(e) => return Err(e),
    };
    let refit_decp_err = rel_err(&refit_rf, &refit_bb);
    let factors = match cfg.pairing {
        OutputPairing::Refit => HybridFactors {
            f_rf: refit_rf,
            f_bb: refit_bb,
        },
        OutputPairing::Listing => HybridFactors { f_rf, f_bb: last_bb },
    };
    Ok((
        factors,
        Diagnostics {
            outer,
            draws: 1,
            renormalized: false,
            pairing: cfg.pairing,
            rank_deficient,
            listing_decp_err,
            refit_decp_err,
        },
    ))
}

/// Random `n_tx x m` complex Gaussian matrix scaled to `||F||^2 = power`.
pub fn random_power_normalized<T: Real, R: rand::Rng + ?Sized>(n_tx: usize, m: usize, power: T, rng: &mut R) -> ComplexMatrix<T> {
    use rand_distr::StandardNormal;
    let raw = ComplexMatrix::from_fn(n_tx, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re), T::lit(im))
    });
    let norm = raw.frobenius_norm();
    raw.scale(power.sqrt() / norm)
}
