//! Codebook-based design of the fully digital precoder.
//!
//! The codebook stacks, per UE, `G` directional beams followed by `G`
//! derivative beams over a uniform angle grid covering the UE's uncertainty
//! interval. The precoder is `F_opt = F_pre diag(sqrt(q))`, and the power
//! weights `q` minimize the worst-case angle error bound over every grid
//! point subject to `sum_m q_m ||f_m||^2 = P`.
//!
//! Because the model transmits `F^T a(theta)`, a beam pointing at `theta` is
//! the conjugate steering vector; the codebook therefore holds `conj(a)` and
//! `conj(da/dtheta)`.
//!
//! The worst-case bound is minimized as a convex min-max: `[J^{-1}]_11` is
//! convex in `q`, the max over grid points is smoothed with a log-sum-exp
//! whose temperature is annealed, and each step is a normalized gradient step
//! followed by Euclidean projection onto the power simplex.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::array::UlaGeometry;
use crate::error::{Error, Result};
use crate::fisher::{aeb, BeamResponses, ChannelState};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Angle interval `[center - half_width, center + half_width)` for one UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySet<T> {
    pub center: T,
    pub half_width: T,
}

impl<T: Real> UncertaintySet<T> {
    pub fn new(center: T, half_width: T) -> Result<Self> {
        if !(half_width >= T::zero()) {
            return Err(Error::InvalidParameter("uncertainty half-width must be nonnegative".into()));
        }
        Ok(Self { center, half_width })
    }

    /// The default +/- 5 degree interval around `center`.
    pub fn around(center: T) -> Self {
        Self {
            center,
            half_width: crate::array::deg(T::lit(5.0)),
        }
    }

    /// `count` points starting at the interval's left edge with step `2 half_width / count`.
    pub fn grid(&self, count: usize) -> Result<Vec<T>> {
        if count == 0 {
            return Err(Error::InvalidParameter("grid needs at least one point".into()));
        }
        let step = T::lit(2.0) * self.half_width / T::lit(count as f64);
        let start = self.center - self.half_width;
        let grid: Vec<T> = (0..count).map(|g| start + step * T::lit(g as f64)).collect();
        if grid.iter().any(|t| !(t.abs() < T::FRAC_PI_2())) {
            return Err(Error::InvalidParameter("grid point outside (-pi/2, pi/2)".into()));
        }
        Ok(grid)
    }
}

/// Directional and derivative beams for every UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook<T> {
    pub beams: ComplexMatrix<T>,
    /// Grid angles, one list per UE.
    pub grid_angles: Vec<Vec<T>>,
    pub grid_count: usize,
}

impl<T: Real> Codebook<T> {
    pub fn ue_count(&self) -> usize {
        self.grid_angles.len()
    }

    pub fn pilot_count(&self) -> usize {
        self.beams.cols()
    }

    /// Column range of UE `l`'s directional beams.
    pub fn directional_columns(&self, ue: usize) -> std::ops::Range<usize> {
        let start = 2 * self.grid_count * ue;
        start..start + self.grid_count
    }

    /// Column range of UE `l`'s derivative beams.
    pub fn derivative_columns(&self, ue: usize) -> std::ops::Range<usize> {
        let start = 2 * self.grid_count * ue + self.grid_count;
        start..start + self.grid_count
    }

    /// All grid angles in UE order.
    pub fn all_grid_angles(&self) -> Vec<T> {
        self.grid_angles.iter().flatten().copied().collect()
    }

    /// `nominal` moved to every grid angle.
    pub fn grid_states(&self, nominal: &ChannelState<T>) -> Vec<ChannelState<T>> {
        self.all_grid_angles().into_iter().map(|t| nominal.at_angle(t)).collect()
    }

    /// `||f_m||^2` per column.
    pub fn column_norms_sq(&self) -> Vec<T> {
        (0..self.beams.cols())
            .map(|m| (0..self.beams.rows()).map(|n| self.beams[(n, m)].norm_sqr()).sum())
            .collect()
    }
}

/// Builds the codebook for `uncertainty.len()` UEs and `pilots` columns.
pub fn build_codebook<T: Real>(
    geom: &UlaGeometry<T>,
    uncertainty: &[UncertaintySet<T>],
    pilots: usize,
) -> Result<Codebook<T>> {
    let ues = uncertainty.len();
    if ues == 0 {
        return Err(Error::InvalidParameter("codebook needs at least one UE".into()));
    }
    if pilots < 2 * ues {
        return Err(Error::TooFewPilots { pilots, ues });
    }
    if pilots % (2 * ues) != 0 {
        return Err(Error::IndivisiblePilots { pilots, ues });
    }
    let grid_count = pilots / (2 * ues);
    let mut columns = Vec::with_capacity(pilots);
    let mut grid_angles = Vec::with_capacity(ues);
    for set in uncertainty {
        let grid = set.grid(grid_count)?;
        columns.extend(grid.iter().map(|&t| conj_vec(geom.steering(t))));
        columns.extend(grid.iter().map(|&t| conj_vec(geom.steering_deriv_theta(t))));
        grid_angles.push(grid);
    }
    Ok(Codebook {
        beams: ComplexMatrix::from_columns(&columns)?,
        grid_angles,
        grid_count,
    })
}

fn conj_vec<T: Real>(v: Vec<Complex<T>>) -> Vec<Complex<T>> {
    v.into_iter().map(|z| z.conj()).collect()
}

/// Nonnegative per-beam power weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation<T> {
    pub q: Vec<T>,
}

impl<T: Real> PowerAllocation<T> {
    /// Equal transmit power on every beam.
    pub fn uniform(cb: &Codebook<T>, power: T) -> Self {
        let m = T::lit(cb.pilot_count() as f64);
        Self::from_fractions(cb, &vec![T::one() / m; cb.pilot_count()], power)
    }

    /// Weights from per-beam power fractions `w` (summing to one).
    pub fn from_fractions(cb: &Codebook<T>, fractions: &[T], power: T) -> Self {
        let q = fractions
            .iter()
            .zip(cb.column_norms_sq())
            .map(|(&w, n)| power * w / n)
            .collect();
        Self { q }
    }

    /// `tr(F_pre diag(q) F_pre^H)`.
    pub fn total_power(&self, cb: &Codebook<T>) -> T {
        self.q.iter().zip(cb.column_norms_sq()).map(|(&q, n)| q * n).sum()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            q: self.q.iter().map(|&q| q * c).collect(),
        }
    }
}

/// `F_opt = F_pre diag(sqrt(q))`.
pub fn assemble_f_opt<T: Real>(cb: &Codebook<T>, alloc: &PowerAllocation<T>) -> Result<ComplexMatrix<T>> {
    if alloc.q.len() != cb.pilot_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} beams",
            alloc.q.len(),
            cb.pilot_count()
        )));
    }
    if alloc.q.iter().any(|&q| !(q >= T::zero()) || !q.is_finite()) {
        return Err(Error::InvalidParameter("power weights must be finite and nonnegative".into()));
    }
    let amp: Vec<T> = alloc.q.iter().map(|q| q.sqrt()).collect();
    Ok(ComplexMatrix::from_fn(cb.beams.rows(), cb.beams.cols(), |n, m| cb.beams[(n, m)] * amp[m]))
}

/// Solver settings for [`optimize_power_allocation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationConfig {
    /// Initial smoothing temperature relative to the starting objective.
    pub initial_temperature: f64,
    /// Temperature multiplier applied at each annealing step.
    pub anneal_factor: f64,
    /// Iterations between annealing steps.
    pub anneal_every: usize,
    /// Convergence is only tested once the relative temperature is at or below this.
    pub min_temperature: f64,
    /// Step size numerator; the step at iteration `t` is `step / sqrt(t)`.
    pub step: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub tol_window: usize,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 0.1,
            anneal_factor: 0.5,
            anneal_every: 200,
            min_temperature: 1e-4,
            step: 0.1,
            max_iters: 10_000,
            rel_tol: 1e-7,
            tol_window: 50,
        }
    }
}

/// Outcome of the power-allocation solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport<T> {
    pub allocation: PowerAllocation<T>,
    /// Worst-case angle error bound over the grid at the returned allocation.
    pub max_aeb: T,
    /// Worst-case bound at equal per-beam power.
    pub uniform_max_aeb: T,
    pub iterations: usize,
    /// Best worst-case bound reached by the end of each temperature stage.
    pub stage_best: Vec<T>,
}

/// Per-grid-point linear forms of the Schur complement in the power fractions.
struct GridTerms<T> {
    /// `2 k^2 |beta|^2 sigma_s^2 / sigma_n^2`.
    kappa: T,
    /// `c_m |alpha_m|^2`, `c_m |delta_m|^2` and `c_m conj(alpha_m) delta_m` with `c_m = P / ||f_m||^2`.
    aa: Vec<T>,
    dd: Vec<T>,
    ad: Vec<Complex<T>>,
}

impl<T: Real> GridTerms<T> {
    fn new(cb: &Codebook<T>, state: &ChannelState<T>, power: T) -> Result<Self> {
        let resp = BeamResponses::compute(&cb.beams, state)?;
        let c: Vec<T> = cb.column_norms_sq().into_iter().map(|n| power / n).collect();
        let k = state.geom.wavenumber_spacing();
        let kappa = T::lit(2.0) * k * k * state.beta.norm_sqr() * state.sigma_s * state.sigma_s
            / (state.sigma_n * state.sigma_n);
        Ok(Self {
            kappa,
            aa: resp.g.iter().zip(&c).map(|(a, &c)| c * a.norm_sqr()).collect(),
            dd: resp.h.iter().zip(&c).map(|(d, &c)| c * d.norm_sqr()).collect(),
            ad: resp.g.iter().zip(resp.h.iter()).zip(&c).map(|((a, d), &c)| a.conj() * d * c).collect(),
        })
    }

    /// Schur complement `J11 - (J12^2 + J13^2)/J22` and its gradient in `w`.
    fn schur(&self, w: &[T], grad: Option<&mut [T]>) -> T {
        let a: T = self.aa.iter().zip(w).map(|(&x, &w)| x * w).sum();
        let b: T = self.dd.iter().zip(w).map(|(&x, &w)| x * w).sum();
        let x = self
            .ad
            .iter()
            .zip(w)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&z, &w)| acc + z * w);
        if !(a > T::zero()) {
            return T::zero();
        }
        let s = self.kappa * (b - x.norm_sqr() / a);
        if let Some(grad) = grad {
            let xc = x.conj();
            let two = T::lit(2.0);
            for m in 0..w.len() {
                grad[m] = self.kappa
                    * (self.dd[m] - two * (xc * self.ad[m]).re / a + x.norm_sqr() * self.aa[m] / (a * a));
            }
        }
        s
    }
}

/// Euclidean projection onto `{w >= 0, sum w = 1}`.
pub fn project_to_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut shift = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - T::one()) / T::lit((i + 1) as f64);
        if u - candidate > T::zero() {
            shift = candidate;
        }
    }
    v.iter().map(|&x| (x - shift).max(T::zero())).collect()
}

/// Minimizes the worst-case angle error bound over `states` by allocating
/// total power `power` across the codebook beams.
pub fn optimize_power_allocation<T: Real>(
    cb: &Codebook<T>,
    states: &[ChannelState<T>],
    power: T,
    cfg: &AllocationConfig,
) -> Result<AllocationReport<T>> {
    if !(power > T::zero()) {
        return Err(Error::InvalidParameter("total power must be positive".into()));
    }
    if states.is_empty() {
        return Err(Error::InvalidParameter("no grid states supplied".into()));
    }
    let m = cb.pilot_count();
    let terms = states
        .iter()
        .map(|s| GridTerms::new(cb, s, power))
        .collect::<Result<Vec<_>>>()?;

    let uniform = vec![T::one() / T::lit(m as f64); m];
    let uniform_f = assemble_f_opt(cb, &PowerAllocation::from_fractions(cb, &uniform, power))?;
    let mut uniform_max_aeb = T::zero();
    for (index, s) in states.iter().enumerate() {
        let bound = aeb(&uniform_f, s).map_err(|_| Error::InfeasibleGrid { index })?;
        uniform_max_aeb = uniform_max_aeb.max(bound);
    }

    // worst-case [J^{-1}]_11, i.e. the squared bound
    let worst = |w: &[T]| -> Option<T> {
        let mut out = T::zero();
        for t in &terms {
            let s = t.schur(w, None);
            if !(s > T::zero()) {
                return None;
            }
            out = out.max(T::one() / s);
        }
        Some(out)
    };

    let scale = worst(&uniform).ok_or(Error::InfeasibleGrid { index: 0 })?;
    let mut w = uniform.clone();
    let mut best_w = uniform;
    let mut best = scale;
    let mut stage_best = Vec::new();
    let mut history: Vec<T> = Vec::with_capacity(cfg.max_iters);
    let mut grads = vec![vec![T::zero(); m]; terms.len()];
    let mut values = vec![T::zero(); terms.len()];
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        iterations = t;
        let stage = (t - 1) / cfg.anneal_every.max(1);
        let temperature = cfg.initial_temperature * cfg.anneal_factor.powi(stage as i32);
        if t > 1 && (t - 1) % cfg.anneal_every.max(1) == 0 {
            stage_best.push(best);
            w.clone_from(&best_w);
        }

        // log-sum-exp weights over normalized h_g = 1 / (scale * s_g)
        for (g, term) in terms.iter().enumerate() {
            let s = term.schur(&w, Some(&mut grads[g]));
            values[g] = T::one() / (scale * s);
            // d h / d w = -(d s / d w) / (scale s^2)
            let factor = -T::one() / (scale * s * s);
            grads[g].iter_mut().for_each(|x| *x *= factor);
        }
        let tau = T::lit(temperature);
        let peak = values.iter().copied().fold(T::neg_infinity(), T::max);
        let weights: Vec<T> = values.iter().map(|&v| ((v - peak) / tau).exp()).collect();
        let total: T = weights.iter().copied().sum();
        let mut direction = vec![T::zero(); m];
        for (g, &wt) in weights.iter().enumerate() {
            let p = wt / total;
            for (d, &gr) in direction.iter_mut().zip(&grads[g]) {
                *d += p * gr;
            }
        }
        let norm = direction.iter().map(|&d| d * d).sum::<T>().sqrt();
        if norm > T::zero() && norm.is_finite() {
            let mut eta = T::lit(cfg.step) / (T::lit(t as f64).sqrt() * norm);
            for _ in 0..40 {
                let trial: Vec<T> = w.iter().zip(&direction).map(|(&x, &d)| x - eta * d).collect();
                let trial = project_to_simplex(&trial);
                if let Some(obj) = worst(&trial) {
                    w = trial;
                    if obj < best {
                        best = obj;
                        best_w.clone_from(&w);
                    }
                    break;
                }
                eta *= T::lit(0.5);
            }
        }

        history.push(best);
        if temperature <= cfg.min_temperature && history.len() > cfg.tol_window {
            let past = history[history.len() - 1 - cfg.tol_window];
            if (past - best) <= T::lit(cfg.rel_tol) * past {
                break;
            }
        }
    }
    stage_best.push(best);

    let allocation = PowerAllocation::from_fractions(cb, &best_w, power);
    let f_opt = assemble_f_opt(cb, &allocation)?;
    let mut max_aeb = T::zero();
    for s in states {
        max_aeb = max_aeb.max(aeb(&f_opt, s)?);
    }
    Ok(AllocationReport {
        allocation,
        max_aeb,
        uniform_max_aeb,
        iterations,
        stage_best: stage_best.into_iter().map(|h| h.sqrt()).collect(),
    })
}

/// Full digital design: codebook, robust allocation and `F_opt`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DigitalDesign<T> {
    pub codebook: Codebook<T>,
    pub report: AllocationReport<T>,
    pub f_opt: ComplexMatrix<T>,
}

/// Designs `F_opt` for the given UEs around a nominal channel state.
pub fn design_digital_precoder<T: Real>(
    nominal: &ChannelState<T>,
    uncertainty: &[UncertaintySet<T>],
    pilots: usize,
    power: T,
    cfg: &AllocationConfig,
) -> Result<DigitalDesign<T>> {
    let codebook = build_codebook(&nominal.geom, uncertainty, pilots)?;
    let states = codebook.grid_states(nominal);
    let report = optimize_power_allocation(&codebook, &states, power, cfg)?;
    let f_opt = assemble_f_opt(&codebook, &report.allocation)?;
    Ok(DigitalDesign {
        codebook,
        report,
        f_opt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::deg;

    fn geom(n: usize) -> UlaGeometry<f64> {
        UlaGeometry::half_wavelength(n).unwrap()
    }

    fn nominal(n: usize) -> ChannelState<f64> {
        ChannelState::new(0.0, Complex::new(1.0, 0.0), 0.1, 1.0, geom(n)).unwrap()
    }

    #[test]
    fn single_grid_point_codebook() {
        let g = geom(4);
        let cb = build_codebook(&g, &[UncertaintySet::around(0.0)], 2).unwrap();
        assert_eq!(cb.grid_count, 1);
        let theta = deg(-5.0);
        assert_eq!(cb.grid_angles, vec![vec![theta]]);
        let a: Vec<_> = g.steering(theta).into_iter().map(|z| z.conj()).collect();
        let da: Vec<_> = g.steering_deriv_theta(theta).into_iter().map(|z| z.conj()).collect();
        assert_eq!(cb.beams.column(0), a);
        assert_eq!(cb.beams.column(1), da);
    }

    #[test]
    fn two_ue_block_order() {
        let g = geom(8);
        let sets = [UncertaintySet::around(0.0), UncertaintySet::around(deg(60.0))];
        let cb = build_codebook(&g, &sets, 20).unwrap();
        assert_eq!(cb.grid_count, 5);
        assert_eq!(cb.directional_columns(0), 0..5);
        assert_eq!(cb.derivative_columns(0), 5..10);
        assert_eq!(cb.directional_columns(1), 10..15);
        assert_eq!(cb.derivative_columns(1), 15..20);
        let theta = cb.grid_angles[1][2];
        assert!((theta - deg(59.0)).abs() < 1e-12);
        let a: Vec<_> = g.steering(theta).into_iter().map(|z| z.conj()).collect();
        assert_eq!(cb.beams.column(12), a);
        let da: Vec<_> = g.steering_deriv_theta(theta).into_iter().map(|z| z.conj()).collect();
        assert_eq!(cb.beams.column(17), da);
    }

    #[test]
    fn pilot_count_errors() {
        let g = geom(4);
        let one = [UncertaintySet::around(0.0)];
        assert_eq!(build_codebook(&g, &one, 3).unwrap_err(), Error::IndivisiblePilots { pilots: 3, ues: 1 });
        let two = [UncertaintySet::around(0.0), UncertaintySet::around(0.5)];
        assert_eq!(build_codebook(&g, &two, 2).unwrap_err(), Error::TooFewPilots { pilots: 2, ues: 2 });
    }

    #[test]
    fn grid_must_stay_inside_visible_region() {
        let set = UncertaintySet::new(deg(88.0), deg(5.0)).unwrap();
        assert!(set.grid(4).is_err());
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.5, 0.5]);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = project_to_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_to_simplex(&[0.4f64, 0.4, 0.4]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn assembly_examples() {
        let cb = build_codebook(&geom(6), &[UncertaintySet::around(0.1)], 4).unwrap();
        let norms = cb.column_norms_sq();
        let power = 2.0;
        let mut q = vec![0.0; 4];
        q[0] = power / norms[0];
        let f = assemble_f_opt(&cb, &PowerAllocation { q: q.clone() }).unwrap();
        for n in 0..6 {
            assert!((f[(n, 0)] - cb.beams[(n, 0)] * q[0].sqrt()).norm() < 1e-15);
            for m in 1..4 {
                assert_eq!(f[(n, m)], Complex::new(0.0, 0.0));
            }
        }
        assert!((f.frobenius_norm_sq() - power).abs() < 1e-12 * power);

        let uni = PowerAllocation::uniform(&cb, power);
        let f = assemble_f_opt(&cb, &uni).unwrap();
        assert!((f.frobenius_norm_sq() - power).abs() < 1e-12 * power);
        for m in 0..4 {
            let ratio = f[(1, m)] / cb.beams[(1, m)];
            assert!((ratio.re - uni.q[m].sqrt()).abs() < 1e-12 && ratio.im.abs() < 1e-12);
        }
        assert!(assemble_f_opt(&cb, &PowerAllocation { q: vec![-1.0, 0.0, 0.0, 0.0] }).is_err());
    }

    #[test]
    fn schur_gradient_matches_finite_differences() {
        let cb = build_codebook(&geom(8), &[UncertaintySet::around(deg(10.0))], 6).unwrap();
        let state = nominal(8).at_angle(deg(12.0));
        let terms = GridTerms::new(&cb, &state, 1.0).unwrap();
        let w = [0.1, 0.2, 0.15, 0.25, 0.2, 0.1];
        let mut grad = vec![0.0; 6];
        terms.schur(&w, Some(&mut grad));
        let h = 1e-7;
        for m in 0..6 {
            let mut up = w;
            let mut dn = w;
            up[m] += h;
            dn[m] -= h;
            let fd = (terms.schur(&up, None) - terms.schur(&dn, None)) / (2.0 * h);
            assert!((fd - grad[m]).abs() <= 1e-5 * (1.0 + fd.abs()), "m={m}: {fd} vs {}", grad[m]);
        }
        // and the Schur complement reproduces the closed-form bound
        let f = assemble_f_opt(&cb, &PowerAllocation::from_fractions(&cb, &w, 1.0)).unwrap();
        let bound = aeb(&f, &state).unwrap();
        assert!((1.0 / terms.schur(&w, None).sqrt() - bound).abs() < 1e-10 * bound);
    }

    #[test]
    fn optimizer_never_loses_to_uniform_and_keeps_power() {
        let cb = build_codebook(&geom(8), &[UncertaintySet::around(0.0)], 2).unwrap();
        let states = cb.grid_states(&nominal(8));
        let rep = optimize_power_allocation(&cb, &states, 1.0, &AllocationConfig::default()).unwrap();
        assert!(rep.max_aeb <= rep.uniform_max_aeb * (1.0 + 1e-12));
        assert!((rep.allocation.total_power(&cb) - 1.0).abs() < 1e-9);
        assert!(rep.stage_best.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn derivative_beam_power_beats_pure_directional() {
        // grid point at the true angle, one directional and one derivative beam
        let g = geom(8);
        let set = UncertaintySet::new(deg(3.0), 0.0).unwrap();
        let cb = build_codebook(&g, &[set], 2).unwrap();
        let state = nominal(8).at_angle(deg(3.0));
        let directional_only = assemble_f_opt(&cb, &PowerAllocation::from_fractions(&cb, &[1.0, 0.0], 1.0)).unwrap();
        assert!(matches!(aeb(&directional_only, &state), Err(Error::DegenerateBound(_))));
        let rep = optimize_power_allocation(&cb, &[state], 1.0, &AllocationConfig::default()).unwrap();
        assert!(rep.allocation.q[1] > 0.0 && rep.max_aeb.is_finite());
    }

    #[test]
    fn unidentifiable_grid_is_rejected() {
        // two beams that are both pure directional at the same angle carry no angle information
        let g = geom(4);
        let a: Vec<_> = g.steering(0.0).into_iter().map(|z| z.conj()).collect();
        let cb = Codebook {
            beams: ComplexMatrix::from_columns(&[a.clone(), a]).unwrap(),
            grid_angles: vec![vec![0.0]],
            grid_count: 1,
        };
        let states = [nominal(4)];
        assert_eq!(
            optimize_power_allocation(&cb, &states, 1.0, &AllocationConfig::default()).unwrap_err(),
            Error::InfeasibleGrid { index: 0 }
        );
    }
}
