//! Randomized invariants: whatever the parameters, validated networks
//! scatter unitarily, phases are the only source of nonreciprocity,
//! frames never touch magnitudes, and the synthesis conditions hold
//! across their whole advertised range.

use std::f64::consts::PI;

use modeflux::design::{scheme_b_condition, scheme_b_system, scheme_c_system, SchemeC};
use modeflux::dynamics::scattering;
use modeflux::gauge::{is_nonreciprocal, GaugeFrame};
use modeflux::network::{NetworkComponent, Netlist};
use modeflux::noise::{output_noise, port_occupancies};
use modeflux::system::{Coupling, Mode, SystemSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;

fn wrap(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(2.0 * PI);
    if wrapped > PI { wrapped - 2.0 * PI } else { wrapped }
}

/// A connected system with randomized topology: a spanning tree over a
/// few cavities and oscillators plus up to two chords, with every rate,
/// phase and detuning drawn from a broad range.
fn arb_system() -> impl Strategy<Value = SystemSpec> {
    (2usize..=3, 0usize..=2).prop_flat_map(|(n_em, n_mech)| {
        let n = n_em + n_mech;
        (
            vec(-2.0f64..2.0, n),
            vec(0.1f64..3.0, n_em),
            vec(0.0f64..0.5, n_em),
            vec(0.05f64..2.0, n_mech.max(1)),
            vec(0.0f64..50.0, n_mech.max(1)),
            vec(any::<prop::sample::Index>(), n - 1),
            vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 2),
            0usize..=2,
            vec(0.05f64..1.5, n + 1),
            vec(-PI..PI, n + 1),
        )
            .prop_map(
                move |(
                    detunings,
                    kappa_ex,
                    kappa_0,
                    gammas,
                    occupancies,
                    parents,
                    chords,
                    n_chords,
                    rates,
                    phases,
                )| {
                    let mut modes = Vec::new();
                    for i in 0..n_em {
                        modes.push(Mode::electromagnetic(
                            &format!("a{}", i + 1),
                            detunings[i],
                            kappa_ex[i],
                            kappa_0[i],
                        ));
                    }
                    for i in 0..n_mech {
                        modes.push(
                            Mode::mechanical(
                                &format!("b{}", i + 1),
                                detunings[n_em + i],
                                gammas[i],
                            )
                            .with_occupancy(occupancies[i]),
                        );
                    }

                    let link = |modes: &[Mode], i: usize, j: usize, rate: f64, phase: f64| {
                        let from = modes[i].id.clone();
                        let to = modes[j].id.clone();
                        if modes[i].kind == modes[j].kind {
                            Coupling::coherent(&from, &to, rate, phase)
                        } else {
                            Coupling::optomechanical(&from, &to, rate, phase)
                        }
                    };
                    let mut couplings = Vec::new();
                    for i in 1..n {
                        let parent = parents[i - 1].index(i);
                        couplings.push(link(&modes, parent, i, rates[i - 1], phases[i - 1]));
                    }
                    for (k, (pick_a, pick_b)) in chords.iter().enumerate().take(n_chords) {
                        let i = pick_a.index(n);
                        let j = pick_b.index(n);
                        if i != j {
                            couplings.push(link(&modes, i, j, rates[n - 1 + k], phases[n - 1 + k]));
                        }
                    }
                    SystemSpec::new(modes, couplings)
                },
            )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn revalidation_changes_nothing(spec in arb_system()) {
        let validated = spec.validate().unwrap();
        let again = validated.spec().clone().validate().unwrap();
        prop_assert_eq!(validated.spec(), again.spec());
    }

    #[test]
    fn loop_flux_survives_single_mode_gauge_shifts(
        c1 in 0.3f64..4.0,
        c2 in 0.3f64..4.0,
        c_coh in 0.3f64..4.0,
        flux in -PI..PI,
        shift in -PI..PI,
        target in 0usize..3,
    ) {
        let sys = scheme_b_system(c1, c2, c_coh, 1.1, 0.8, 0.3, flux).validate().unwrap();
        let reference = sys.synthetic_flux(&[0, 1, 2]).unwrap();
        let id = ["a1", "a2", "b"][target];
        let shifted = sys.gauge_shift(id, shift).unwrap();
        let moved = shifted.synthetic_flux(&[0, 1, 2]).unwrap();
        prop_assert!(wrap(moved - reference).abs() < 1e-12);
    }

    #[test]
    fn cooperativity_scales_as_rate_squared_over_decays(
        g in 0.05f64..1.0,
        kappa_ex in 0.2f64..2.0,
        kappa_0 in 0.0f64..0.5,
        gamma in 0.05f64..2.0,
        lambda in 0.25f64..4.0,
    ) {
        let build = |g: f64, kappa_ex: f64, kappa_0: f64, gamma: f64| {
            SystemSpec::new(
                vec![
                    Mode::electromagnetic("a", 0.0, kappa_ex, kappa_0),
                    Mode::mechanical("b", 0.0, gamma),
                ],
                vec![Coupling::optomechanical("a", "b", g, 0.0)],
            )
            .validate()
            .unwrap()
            .cooperativity(0)
            .unwrap()
        };
        let base = build(g, kappa_ex, kappa_0, gamma);
        let rate_scaled = build(lambda * g, kappa_ex, kappa_0, gamma);
        prop_assert!((rate_scaled / base - lambda * lambda).abs() < 1e-9 * lambda * lambda);
        let cavity_scaled = build(g, lambda * kappa_ex, lambda * kappa_0, gamma);
        prop_assert!((cavity_scaled / base - 1.0 / lambda).abs() < 1e-9 / lambda);
        let oscillator_scaled = build(g, kappa_ex, kappa_0, lambda * gamma);
        prop_assert!((oscillator_scaled / base - 1.0 / lambda).abs() < 1e-9 / lambda);
    }

    #[test]
    fn every_network_scatters_unitarily(spec in arb_system(), delta in -5.0f64..5.0) {
        let sys = spec.validate().unwrap();
        let point = scattering(&sys, delta).unwrap();
        prop_assert!(point.unitarity_defect() <= 1e-9);
    }

    #[test]
    fn phases_are_the_only_source_of_nonreciprocity(
        spec in arb_system(),
        delta in -5.0f64..5.0,
    ) {
        let mut spec = spec;
        for coupling in &mut spec.couplings {
            coupling.phase = 0.0;
        }
        let sys = spec.validate().unwrap();
        let s = scattering(&sys, delta).unwrap();
        let m = s.matrix();
        for j in 0..m.nrows() {
            for k in 0..j {
                prop_assert!((m[(j, k)].norm() - m[(k, j)].norm()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn center_response_depends_only_on_rate_ratios(
        spec in arb_system(),
        lambda in 0.25f64..4.0,
    ) {
        let sys = spec.validate().unwrap();
        let reference = scattering(&sys, 0.0).unwrap();

        let mut scaled = spec.clone();
        for mode in &mut scaled.modes {
            mode.detuning *= lambda;
            mode.kappa_ex *= lambda;
            mode.intrinsic_loss *= lambda;
        }
        for coupling in &mut scaled.couplings {
            coupling.rate *= lambda;
        }
        let scaled = scaled.validate().unwrap();
        let rescaled = scattering(&scaled, 0.0).unwrap();
        let worst = reference
            .matrix()
            .iter()
            .zip(rescaled.matrix().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        prop_assert!(worst <= 1e-9);
    }

    #[test]
    fn output_noise_is_conserved_and_monotone(
        spec in arb_system(),
        delta in -5.0f64..5.0,
        bumped in any::<prop::sample::Index>(),
        bump in 0.1f64..5.0,
    ) {
        let sys = spec.validate().unwrap();
        let point = scattering(&sys, delta).unwrap();

        let uniform = vec![1.0; sys.ports().len()];
        for out in 0..sys.ports().len() {
            prop_assert!((output_noise(&point, &uniform, out) - 1.0).abs() <= 1e-9);
        }

        let mut occupancies = port_occupancies(&sys);
        let before: Vec<f64> =
            (0..occupancies.len()).map(|p| output_noise(&point, &occupancies, p)).collect();
        let target = bumped.index(occupancies.len());
        occupancies[target] += bump;
        for (p, reference) in before.iter().enumerate() {
            prop_assert!(output_noise(&point, &occupancies, p) >= reference - 1e-12);
        }
    }

    #[test]
    fn hot_oscillators_dump_noise_into_the_blocked_port(
        cooperativity in 0.5f64..20.0,
        splitting_over_gamma in 0.5f64..5.0,
        occupancy in 0.1f64..100.0,
    ) {
        let gamma = 100.0;
        let splitting = splitting_over_gamma * gamma;
        let params = SchemeC {
            kappa1: 1.0e6,
            kappa2: 1.0e6,
            gamma1: gamma,
            gamma2: gamma,
            cooperativity,
            splitting,
            flux: modeflux::design::scheme_c_isolating_flux(splitting, gamma),
            occupancy,
        };
        let sys = scheme_c_system(&params).validate().unwrap();
        let point = scattering(&sys, 0.0).unwrap();
        let occupancies = port_occupancies(&sys);
        let forward = output_noise(&point, &occupancies, sys.port_index("a2").unwrap());
        let backward = output_noise(&point, &occupancies, sys.port_index("a1").unwrap());
        prop_assert!(backward > forward);
    }

    #[test]
    fn lossless_chains_reduce_to_unitary_networks(
        r1 in 0.0f64..0.9,
        r2 in 0.0f64..0.9,
        phase1 in -PI..PI,
        phase2 in -PI..PI,
        with_gyrator in any::<bool>(),
    ) {
        let mut net = Netlist::new();
        net.add(NetworkComponent::mirror("m1", r1)).unwrap();
        net.add(NetworkComponent::transmission_line("t1", phase1)).unwrap();
        net.add(NetworkComponent::transmission_line("t2", phase2)).unwrap();
        net.add(NetworkComponent::mirror("m2", r2)).unwrap();
        net.connect("m1.2", "t1.1").unwrap();
        if with_gyrator {
            net.add(NetworkComponent::gyrator("g")).unwrap();
            net.connect("t1.2", "g.1").unwrap();
            net.connect("g.2", "t2.1").unwrap();
        } else {
            net.connect("t1.2", "t2.1").unwrap();
        }
        net.connect("t2.2", "m2.1").unwrap();
        let reduced = net.reduce().unwrap();
        prop_assert_eq!(reduced.n_ports(), 2);
        let m = reduced.matrix();
        let defect = (m.adjoint() * m - DMatrix::<Complex64>::identity(2, 2)).norm();
        prop_assert!(defect <= 1e-12);
    }

    #[test]
    fn connection_order_does_not_change_the_reduction(
        order in Just(vec![
            ("bsL.3", "gyr.1"),
            ("gyr.2", "bsR.1"),
            ("bsL.4", "ref.1"),
            ("ref.2", "bsR.2"),
        ])
        .prop_shuffle(),
    ) {
        let build = |connections: &[(&str, &str)]| {
            let mut net = Netlist::new();
            net.add(NetworkComponent::beam_splitter("bsL")).unwrap();
            net.add(NetworkComponent::beam_splitter("bsR")).unwrap();
            net.add(NetworkComponent::gyrator("gyr")).unwrap();
            net.add(NetworkComponent::transmission_line("ref", 0.0)).unwrap();
            for (a, b) in connections {
                net.connect(a, b).unwrap();
            }
            net.reduce().unwrap()
        };
        let reference = build(&[
            ("bsL.3", "gyr.1"),
            ("gyr.2", "bsR.1"),
            ("bsL.4", "ref.1"),
            ("ref.2", "bsR.2"),
        ]);
        let shuffled = build(&order);
        prop_assert_eq!(&reference.port_labels, &shuffled.port_labels);
        prop_assert!((reference.matrix() - shuffled.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn gyrator_free_networks_stay_reciprocal(
        r1 in 0.0f64..0.9,
        r2 in 0.0f64..0.9,
        phase in -PI..PI,
    ) {
        let mut net = Netlist::new();
        net.add(NetworkComponent::mirror("m1", r1)).unwrap();
        net.add(NetworkComponent::transmission_line("t", phase)).unwrap();
        net.add(NetworkComponent::mirror("m2", r2)).unwrap();
        net.connect("m1.2", "t.1").unwrap();
        net.connect("t.2", "m2.1").unwrap();
        let reduced = net.reduce().unwrap();
        let m = reduced.matrix();
        prop_assert!((m - m.transpose()).norm() <= 1e-12);

        let mut interferometer = Netlist::new();
        interferometer.add(NetworkComponent::beam_splitter("bsL")).unwrap();
        interferometer.add(NetworkComponent::beam_splitter("bsR")).unwrap();
        interferometer.add(NetworkComponent::transmission_line("upper", phase)).unwrap();
        interferometer.add(NetworkComponent::transmission_line("lower", 0.0)).unwrap();
        interferometer.connect("bsL.3", "upper.1").unwrap();
        interferometer.connect("upper.2", "bsR.1").unwrap();
        interferometer.connect("bsL.4", "lower.1").unwrap();
        interferometer.connect("lower.2", "bsR.2").unwrap();
        let reduced = interferometer.reduce().unwrap();
        let m = reduced.matrix();
        prop_assert!((m - m.transpose()).norm() <= 1e-12);
    }

    #[test]
    fn frames_compose_and_never_touch_magnitudes(
        entries in vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        frequencies in vec(-5.0f64..5.0, 4),
        t0 in -10.0f64..10.0,
        t1 in -10.0f64..10.0,
    ) {
        let s = DMatrix::from_fn(4, 4, |j, k| {
            let (re, im) = entries[4 * j + k];
            Complex64::new(re, im)
        });
        let first = GaugeFrame::new(t0, frequencies.clone());
        let second = GaugeFrame::new(t1, frequencies.clone());
        let combined = GaugeFrame::new(t0 + t1, frequencies);

        let stepwise = second.transform(&first.transform(&s));
        prop_assert!((&stepwise - combined.transform(&s)).norm() <= 1e-12);
        for (a, b) in s.iter().zip(stepwise.iter()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-12);
        }
        let framed = is_nonreciprocal(&stepwise, 1e-9);
        prop_assert_eq!(framed.nonreciprocal, is_nonreciprocal(&s, 1e-9).nonreciprocal);
    }

    #[test]
    fn reframing_commutes_with_network_reduction(
        omega in vec(-5.0f64..5.0, 3),
        t0 in -4.0f64..4.0,
        phase in -PI..PI,
    ) {
        let chain = |gyr: NetworkComponent, line: NetworkComponent| {
            let mut net = Netlist::new();
            net.add(gyr).unwrap();
            net.add(line).unwrap();
            net.connect("gyr.2", "line.1").unwrap();
            net.reduce().unwrap()
        };

        let plain = chain(
            NetworkComponent::gyrator("gyr"),
            NetworkComponent::transmission_line("line", phase),
        );
        let external = GaugeFrame::new(t0, vec![omega[0], omega[2]]);
        let reduced_then_framed = external.transform(plain.matrix());

        let left = GaugeFrame::new(t0, vec![omega[0], omega[1]]);
        let right = GaugeFrame::new(t0, vec![omega[1], omega[2]]);
        let framed_then_reduced = chain(
            NetworkComponent::from_scattering(
                "gyr",
                vec!["1".into(), "2".into()],
                left.transform(NetworkComponent::gyrator("gyr").matrix()),
            ),
            NetworkComponent::from_scattering(
                "line",
                vec!["1".into(), "2".into()],
                right.transform(NetworkComponent::transmission_line("line", phase).matrix()),
            ),
        );
        prop_assert!((reduced_then_framed - framed_then_reduced.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn matched_loops_always_block_the_reverse_path(
        c1 in 0.2f64..5.0,
        c2 in 0.2f64..5.0,
        kappa1 in 0.3f64..3.0,
        kappa2 in 0.3f64..3.0,
        gamma in 0.05f64..2.0,
    ) {
        let (c_coh, flux) = scheme_b_condition(c1, c2);
        let sys = scheme_b_system(c1, c2, c_coh, kappa1, kappa2, gamma, flux).validate().unwrap();
        let s = scattering(&sys, 0.0).unwrap();
        prop_assert!(s.entry("a1", "a2").unwrap().norm() <= 1e-9);
    }

    #[test]
    fn flux_negation_mirrors_the_magnitude_spectra(
        c1 in 0.3f64..4.0,
        c2 in 0.3f64..4.0,
        delta in -3.0f64..3.0,
        plaquette_flux in 0.3f64..2.8,
        plaquette_c in 0.5f64..10.0,
        splitting in 100.0f64..2000.0,
        sign in any::<bool>(),
    ) {
        let (c_coh, mut flux) = scheme_b_condition(c1, c2);
        if sign {
            flux = -flux;
        }
        let forward = scheme_b_system(c1, c2, c_coh, 1.2, 0.9, 0.4, flux).validate().unwrap();
        let mirrored = scheme_b_system(c1, c2, c_coh, 1.2, 0.9, 0.4, -flux).validate().unwrap();
        let s_fwd = scattering(&forward, delta).unwrap();
        let s_mir = scattering(&mirrored, -delta).unwrap();
        let lhs = s_fwd.entry("a2", "a1").unwrap().norm();
        let rhs = s_mir.entry("a1", "a2").unwrap().norm();
        prop_assert!((lhs - rhs).abs() <= 1e-9);

        let params = SchemeC {
            kappa1: 1.0e6,
            kappa2: 1.0e6,
            gamma1: 100.0,
            gamma2: 100.0,
            cooperativity: plaquette_c,
            splitting,
            flux: plaquette_flux,
            occupancy: 0.0,
        };
        let negated = SchemeC { flux: -plaquette_flux, ..params };
        let sys = scheme_c_system(&params).validate().unwrap();
        let neg = scheme_c_system(&negated).validate().unwrap();
        let s_fwd = scattering(&sys, delta * 100.0).unwrap();
        let s_mir = scattering(&neg, -delta * 100.0).unwrap();
        let lhs = s_fwd.entry("a2", "a1").unwrap().norm();
        let rhs = s_mir.entry("a1", "a2").unwrap().norm();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn system_files_round_trip(spec in arb_system(), with_calibration in any::<bool>()) {
        let mut spec = spec;
        if with_calibration {
            let photon_number = 2.5e5_f64;
            let g0 = spec.couplings[0].rate / photon_number.sqrt();
            let first = spec.couplings[0].clone();
            spec.couplings[0] = first.with_calibration(g0, photon_number);
        }
        let text = modeflux::config::write_system(&spec);
        let parsed = modeflux::config::parse_system(&text).unwrap();
        prop_assert_eq!(spec, parsed);
    }
}
