use nrsense::{
    add_awgn, apply_time_domain, build_radar_matrix, demodulate_frame, generate_payload, modulate_frame,
    synthesize_symbol_domain, Constellation, CpMethod, NoiseSpec, Numerology, Target, TargetSet,
};
use proptest::prelude::*;

#[test]
fn modulate_demodulate_recovers_payload() {
    let num = Numerology::new(3, 5, 28).unwrap();
    for c in [Constellation::Qpsk, Constellation::Qam16] {
        let grid = generate_payload(21, num.n_sc(), num.n_symb(), c).unwrap();
        let stream = modulate_frame(&grid, &num).unwrap();
        assert_eq!(stream.len() as u64, num.frame_samples());
        let y = demodulate_frame(&stream, &num, num.n_sc(), num.n_symb()).unwrap();
        for l in 0..num.n_symb() {
            for k in 0..num.n_sc() {
                assert!((y[(k, l)] - grid.data[(k, l)]).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn time_domain_delay_only_echo_matches_closed_form() {
    let num = Numerology::new(3, 5, 28).unwrap();
    let targets = TargetSet::new(vec![Target::unit(117.0 * num.t_c(), 0.0), Target::unit(409.0 * num.t_c(), 0.0)]);
    let grid = generate_payload(4, num.n_sc(), num.n_symb(), Constellation::Qam16).unwrap();
    let echo = apply_time_domain(&modulate_frame(&grid, &num).unwrap(), &targets, &num).unwrap();
    assert!(echo.notices.is_empty());
    let y = demodulate_frame(&echo.stream, &num, num.n_sc(), num.n_symb()).unwrap();
    let td = build_radar_matrix(&y, &grid, &num).unwrap();
    let sd = synthesize_symbol_domain(&num, &targets, num.n_sc(), num.n_symb()).unwrap();
    for l in 0..num.n_symb() {
        for k in 0..num.n_sc() {
            assert!((td.data[(k, l)] - sd.data[(k, l)]).norm() < 1e-9);
        }
    }
}

#[test]
fn off_grid_delay_is_reported() {
    let num = Numerology::new(3, 1, 14).unwrap();
    let targets = TargetSet::new(vec![Target::unit(10.4 * num.t_c(), 0.0)]);
    let grid = generate_payload(1, 12, 14, Constellation::Qpsk).unwrap();
    let echo = apply_time_domain(&modulate_frame(&grid, &num).unwrap(), &targets, &num).unwrap();
    assert_eq!(echo.notices.len(), 1);
    assert!((echo.notices[0].applied_s - 10.0 * num.t_c()).abs() < 1e-20);
}

#[test]
fn symbol_domain_phase_follows_exact_symbol_times() {
    let num = Numerology::desk();
    let f = 9_000.0;
    let y = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(0.0, f)]), 1, num.n_symb()).unwrap();
    let times = num.symbol_times(num.n_symb(), CpMethod::Exact).unwrap();
    for (l, t) in times.iter().enumerate() {
        let expected = nrsense::c64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t);
        assert!((y.data[(0, l)] - expected).norm() < 1e-12);
    }
}

#[test]
fn noise_is_seeded() {
    let num = Numerology::desk();
    let y = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(1e-8, 100.0)]), 24, 14).unwrap();
    let a = add_awgn(&y, &NoiseSpec::new(0.0, 77), 1.0).unwrap();
    let b = add_awgn(&y, &NoiseSpec::new(0.0, 77), 1.0).unwrap();
    let c = add_awgn(&y, &NoiseSpec::new(0.0, 78), 1.0).unwrap();
    assert_eq!(a.data, b.data);
    assert_ne!(a.data, c.data);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulative_time_is_brute_force_sum(mu in 0u32..=3, l in 0usize..=100) {
        let n = Numerology::symbols_per_frame(mu);
        let num = Numerology::new(mu, 1, n).unwrap();
        let l = l * (n - 1) / 100;
        let brute: u64 = (0..l).map(|i| num.symbol_samples(i).unwrap()).sum();
        prop_assert_eq!(num.start_sample(l).unwrap(), brute);
        prop_assert_eq!(num.cumulative_time(l, CpMethod::Exact).unwrap(), brute as f64 * num.t_c());
    }

    #[test]
    fn method_times_agree_at_frame_edges(mu in 0u32..=3) {
        let n = Numerology::symbols_per_frame(mu);
        let num = Numerology::new(mu, 1, n).unwrap();
        prop_assert_eq!(num.frame_samples(), 19_660_800);
        let exact_last = num.start_sample(n).unwrap() as f64 * num.t_c();
        let avg_last = num.nominal_spacing(CpMethod::FrameAverage) * n as f64;
        prop_assert!((exact_last - avg_last).abs() < 1e-15);
    }
}
