use framelab::extended_affine::{
    affine_rep, contracted_bounds, contraction_limit_check, ea_rep, u_epsilon, u_epsilon_inverse, wavelet_family,
    wavelet_family_with_phases, wavelet_frame_sum, zeta_apply,
};
use framelab::numerics::{frequency_grid, inverse_fourier_transform};
use framelab::{
    norm_sq, random_test_signals, Complex64, ContractionSpec, EAParams, GaborSystemSpec, GeneratorSpec, Grid,
    GridSignal, LatticeTruncation, PiecewiseWindow, SignalKind, WHParams, WindowPiece,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn phi(second_slope: f64) -> PiecewiseWindow {
    PiecewiseWindow::new(
        "phi",
        vec![
            WindowPiece { lo: 0.0, hi: 1.0, coeffs: vec![1.0, 1.0] },
            WindowPiece { lo: 1.0, hi: 2.0, coeffs: vec![0.0, second_slope] },
        ],
    )
    .unwrap()
}

fn reference_contraction(eps: f64, windows: &[PiecewiseWindow]) -> ContractionSpec {
    let wh = WHParams::new(1.0, 0.0).unwrap();
    let base = GaborSystemSpec::new(
        wh,
        windows.iter().map(|w| GeneratorSpec::painless(w.clone(), 1.0, wh).unwrap()).collect(),
    )
    .unwrap();
    ContractionSpec::new(eps, 1.0, -1.0, 1.0, base, 4.0, 16.0).unwrap()
}

fn small_grid() -> Grid {
    Grid::new(-8.0, 8.0, 2048).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn wavelet_sum_ignores_global_phases(seed in 0u64..1000, eps in 0.05..0.95f64) {
        let g = small_grid();
        let spec = reference_contraction(eps, &[phi(1.0)]);
        let trunc = LatticeTruncation::new(10, 5);
        let f = &random_test_signals(&g, 1, seed, SignalKind::Compact)[0];
        let plain = wavelet_family(&spec, &g, trunc).unwrap().frame_sum(f).unwrap().total;
        let scrambled = wavelet_family_with_phases(&spec, &g, trunc, |idx, _| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((idx.m as u64) << 20) ^ (idx.n as u64));
            rng.random_range(-100.0..100.0)
        })
        .unwrap()
        .frame_sum(f)
        .unwrap()
        .total;
        prop_assert!(rel(plain, scrambled) < 1e-12);
    }

    #[test]
    fn wavelet_sum_scales_quadratically(re in -3.0..3.0f64, im in -3.0..3.0f64, seed in 0u64..1000) {
        let g = small_grid();
        let spec = reference_contraction(0.5, &[phi(1.0)]);
        let trunc = LatticeTruncation::new(10, 5);
        let f = &random_test_signals(&g, 1, seed, SignalKind::Compact)[0];
        let s = Complex64::new(re, im);
        let a = wavelet_frame_sum(&spec, f, trunc).unwrap().total;
        let b = wavelet_frame_sum(&spec, &f.scaled(s), trunc).unwrap().total;
        prop_assert!((b - s.norm_sqr() * a).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn zeta_is_unitary_on_sample_shifts(k in -2000i64..2000, b in -3.0..3.0f64, y in -3.0..3.0f64, seed in 0u64..1000) {
        let g = Grid::default_acceptance();
        let eps = 0.5;
        let a = (-eps * k as f64 * g.dx()).exp();
        let f = &random_test_signals(&g, 1, seed, SignalKind::Compact)[0];
        let p = EAParams::new(-1.5, 0.8).unwrap();
        let out = zeta_apply(p, eps, a, b, y, f).unwrap();
        prop_assert!(rel(norm_sq(&out), norm_sq(f)) < 1e-12);
    }

    #[test]
    fn contracted_bound_ratio_is_fixed(eps in 1e-6..1.0f64, c in 0.05..20.0f64) {
        let spec = reference_contraction(0.5, &[phi(1.0)]);
        let spec = ContractionSpec::new(eps, c, -1.0, 1.0, spec.base().clone(), 3.0, 7.0).unwrap();
        let r = contracted_bounds(&spec);
        prop_assert!((r.lower / r.upper - 3.0 / 7.0).abs() < 1e-14);
        prop_assert!(r.upper < 3.0);
    }
}

#[test]
fn wavelet_sum_adds_over_generators() {
    let g = small_grid();
    let trunc = LatticeTruncation::new(8, 5);
    let both = reference_contraction(0.5, &[phi(1.0), phi(0.5)]);
    let parts = [reference_contraction(0.5, &[phi(1.0)]), reference_contraction(0.5, &[phi(0.5)])];
    for f in random_test_signals(&g, 4, 12, SignalKind::Compact) {
        let whole = wavelet_frame_sum(&both, &f, trunc).unwrap().total;
        let split: f64 = parts.iter().map(|s| wavelet_frame_sum(s, &f, trunc).unwrap().total).sum();
        assert!(rel(whole, split) < 1e-12);
    }
}

#[test]
fn u_epsilon_is_an_isometry_on_hardy_signals() {
    let g = Grid::default_acceptance();
    for eps in [0.25, 0.5, 1.0] {
        for f in random_test_signals(&g, 6, 40, SignalKind::Hardy) {
            let u = u_epsilon(&f, eps).unwrap();
            assert!(rel(norm_sq(&u), norm_sq(&f)) < 1e-4);
            let back = u_epsilon_inverse(&u, eps).unwrap();
            assert!(norm_sq(&back.sub(&f).unwrap()) < 1e-4 * norm_sq(&f));
        }
    }
}

#[test]
fn u_epsilon_of_an_indicator_spectrum() {
    // f̂ = 1 on [1, e]: |U_ε f(x)|² = ε e^{−εx} on [−1/ε, 0] and vanishes elsewhere.
    // f decays like 1/x, so a wide grid keeps the truncation leak small.
    let g = Grid::new(-128.0, 128.0, 1 << 14).unwrap();
    let eps = 0.5;
    let spectrum = GridSignal::from_real_fn(frequency_grid(&g), |w| {
        if (1.0..=std::f64::consts::E).contains(&w) {
            1.0
        } else {
            0.0
        }
    });
    let f = inverse_fourier_transform(&spectrum, &g).unwrap();
    let u = u_epsilon(&f, eps).unwrap();
    let energy = |lo: f64, hi: f64| -> f64 {
        g.abscissae()
            .zip(u.samples())
            .filter(|(x, _)| *x > lo && *x <= hi)
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * g.dx()
    };
    let oracle = |lo: f64, hi: f64| (-eps * lo).exp() - (-eps * hi).exp();
    let inside = energy(-1.0 / eps, 0.0);
    assert!(rel(inside, oracle(-1.0 / eps, 0.0)) < 1e-2, "{inside}");
    for (lo, hi) in [(-1.75, -1.25), (-1.25, -0.75), (-0.75, -0.25)] {
        assert!(rel(energy(lo, hi), oracle(lo, hi)) < 2e-2);
    }
    let total = norm_sq(&u);
    assert!((total - inside) / total < 1e-2);
}

#[test]
fn zeta_intertwines_the_extended_affine_action() {
    // −ln(2)/ε is exactly one unit, a whole number of samples
    let g = Grid::default_acceptance();
    let eps = 2f64.ln();
    let p = EAParams::new(1.0, 0.5).unwrap();
    for f in random_test_signals(&g, 10, 77, SignalKind::Hardy) {
        let lhs = zeta_apply(p, eps, 2.0, 0.3, 0.7, &u_epsilon(&f, eps).unwrap()).unwrap();
        let rhs = u_epsilon(&ea_rep(p, 2.0, 0.3, 0.7, &f).unwrap(), eps).unwrap();
        let defect = (norm_sq(&lhs.sub(&rhs).unwrap()) / norm_sq(&rhs)).sqrt();
        assert!(defect < 1e-3, "{defect}");
    }
}

#[test]
fn affine_rep_preserves_energy_of_bandlimited_signals() {
    let g = Grid::default_acceptance();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for f in random_test_signals(&g, 40, 31, SignalKind::Bandlimited) {
        let a = rng.random_range(0.5..1.5);
        let b = rng.random_range(-1.0..1.0);
        let out = affine_rep(0.7, a, b, &f).unwrap();
        assert!(rel(norm_sq(&out), norm_sq(&f)) < 1e-6);
    }
}

#[test]
fn contraction_upper_bound_rises_toward_alpha() {
    let mut last = 0.0;
    for eps in [1.0, 1e-1, 1e-2, 1e-3, 1e-4] {
        let up = contracted_bounds(&reference_contraction(eps, &[phi(1.0)])).upper;
        assert!(up > last && up < 4.0);
        last = up;
    }
    // 4·ln(1 + ε)/ε = 4(1 − ε/2 + ε²/3 − …)
    let series = 4.0 * (1.0 - 0.5e-4 + 1e-8 / 3.0);
    assert!(rel(last, series) < 1e-12);
    assert!(rel(last, 4.0) < 1e-4);
}

#[test]
fn limit_check_on_the_reference_contraction() {
    let g = small_grid();
    let spec = reference_contraction(0.5, &[phi(1.0)]);
    let signals = random_test_signals(&g, 4, 9, SignalKind::Compact);
    let trunc = LatticeTruncation::new(12, 6);
    let report = contraction_limit_check(&spec, &signals, &[1.0, 0.5, 0.1, 0.01], trunc, 0.02).unwrap();
    assert!(report.passed());
    assert_eq!(report.rows.len(), 4);
    assert!(report.rows[0].oracle_min.is_none(), "v(1) = 0 leaves the lattice undefined");
    for row in &report.rows[1..] {
        assert_eq!(row.chain_holds, Some(true));
        assert!(row.max_wavelet_to_gabor.unwrap() <= 1.02);
    }
    assert!(report.gabor_max_ratio <= 16.0 * 1.02);
}
