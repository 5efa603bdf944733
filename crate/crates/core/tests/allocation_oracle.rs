use aod_precoder::{
    aeb, assemble_f_opt, build_codebook, deg, optimize_power_allocation, AllocationConfig, ChannelState, Codebook,
    PowerAllocation, UncertaintySet, UlaGeometry, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: f64 = 0.01;

fn worst_case(cb: &Codebook<f64>, states: &[ChannelState<f64>], w: &[f64]) -> f64 {
    let f = assemble_f_opt(cb, &PowerAllocation::from_fractions(cb, w, P)).unwrap();
    states.iter().map(|s| aeb(&f, s).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

/// Minimum over the simplex grid with spacing `1/steps`.
fn brute_force(cb: &Codebook<f64>, states: &[ChannelState<f64>], steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=steps {
        for b in 0..=steps - a {
            for c in 0..=steps - a - b {
                let d = steps - a - b - c;
                let w = [a, b, c, d].map(|x| x as f64 / steps as f64);
                best = best.min(worst_case(cb, states, &w));
            }
        }
    }
    best
}

#[test]
fn solver_matches_grid_search() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = deg(rng.gen_range(-60.0..60.0));
        let geom = UlaGeometry::half_wavelength(8).unwrap();
        let nominal = ChannelState::new(center, C64::new(1.0, 0.0), (P / 10.0).sqrt(), 1.0, geom).unwrap();
        let cb = build_codebook(&geom, &[UncertaintySet::around(center)], 4).unwrap();
        let states = cb.grid_states(&nominal);
        let report = optimize_power_allocation(&cb, &states, P, &AllocationConfig::default()).unwrap();
        let grid = brute_force(&cb, &states, 50);
        assert!((report.max_aeb - grid).abs() <= 0.02 * grid, "{} vs {grid}", report.max_aeb);
        assert!(report.max_aeb <= report.uniform_max_aeb);
    }
}

#[test]
fn robust_design_spreads_over_two_ues() {
    let geom = UlaGeometry::half_wavelength(20).unwrap();
    let nominal = ChannelState::new(0.0, C64::new(1.0, 0.0), 0.01, 1.0, geom).unwrap();
    let sets = [UncertaintySet::around(0.0), UncertaintySet::around(deg(60.0))];
    let cb = build_codebook(&geom, &sets, 20).unwrap();
    let states = cb.grid_states(&nominal);
    let report = optimize_power_allocation(&cb, &states, P, &AllocationConfig::default()).unwrap();
    let f = assemble_f_opt(&cb, &report.allocation).unwrap();
    let per_ue: Vec<f64> = (0..2)
        .map(|ue| {
            cb.grid_angles[ue]
                .iter()
                .map(|&t| aeb(&f, &nominal.at_angle(t)).unwrap())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!((per_ue[0].max(per_ue[1]) - report.max_aeb).abs() < 1e-12);
    // both UEs receive power
    let power = |cols: std::ops::Range<usize>| -> f64 {
        let norms = cb.column_norms_sq();
        cols.map(|m| report.allocation.q[m] * norms[m]).sum()
    };
    assert!(power(0..10) > 0.1 * P && power(10..20) > 0.1 * P);
    assert!((power(0..20) - P).abs() < 1e-9 * P);
}
