//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible under `cargo test --test acceptance -- --nocapture`).
//!
//! Expected values are frozen from independent evaluation: closed-form
//! propagation of the splitter/scattering rules done by hand for the state
//! checks, and direct formula evaluation for the probability and rate
//! checks. None of them are read back from the engine.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use mzi_sim::feasibility;
use mzi_sim::hilbert::{
    compose, BasisLabel, HybridState, IonFactor, IonLabel, PhotonFactor, PhotonPath, PhotonSector,
    Polarization,
};
use mzi_sim::measurement::{detect_output_ports, measure_ion_pair, IonBasis, OutcomeLabel};
use mzi_sim::oracle::DenseContext;
use mzi_sim::protocols::{
    concentrate_via_swapping, remote_prepare, run_mzi, teleport, ConcentrateInputs,
    RemotePrepareInputs, TeleportInputs,
};
use mzi_sim::report::ProtocolReport;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Random complex pair with |x|² + |y|² = 1 (and away from degenerate 0/1
/// splits so every branch stays populated).
fn random_pair(rng: &mut ChaCha8Rng) -> (C64, C64) {
    loop {
        let x = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let y = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if n < 1e-3 {
            continue;
        }
        let (x, y) = (x / n, y / n);
        if x.norm_sqr() > 1e-4 && y.norm_sqr() > 1e-4 {
            return (x, y);
        }
    }
}

fn random_real_pair(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let a_sq: f64 = rng.gen_range(0.05..0.95);
    (c(a_sq.sqrt(), 0.0), c((1.0 - a_sq).sqrt(), 0.0))
}

#[test]
fn criterion_1_teleport_herald_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let (alpha, beta) = random_pair(&mut rng);
        let report = teleport(&TeleportInputs { alpha, beta }).unwrap();
        let dev = (report.herald_probability - 0.125).abs();
        assert!(
            dev < 1e-12,
            "herald {} for ({alpha}, {beta})",
            report.herald_probability
        );
        // Conditional outcome uniformity rides along: 1/4 each.
        for outcome in &report.outcomes {
            assert!((outcome.conditional_probability - 0.25).abs() < 1e-12);
        }
    }
    println!("acceptance 1/9 (teleport herald probability = 1/8 over 100 random inputs): PASS");
}

#[test]
fn criterion_2_teleport_corrected_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..100 {
        let (alpha, beta) = random_pair(&mut rng);
        let report = teleport(&TeleportInputs { alpha, beta }).unwrap();
        for outcome in &report.outcomes {
            let f = outcome.fidelity_vs_target.expect("populated branch");
            assert!(f >= 1.0 - 1e-9, "{:?}: fidelity {}", outcome.label, f);

            // Independent check against a state composed here in the test:
            // the measured ions in their |±⟩ outcome kets, the receiver
            // carrying the input qubit.
            let h = FRAC_1_SQRT_2;
            let sign_of = |plus: bool| if plus { h } else { -h };
            let (si, sj) = match outcome.label {
                OutcomeLabel::PlusPlus => (true, true),
                OutcomeLabel::PlusMinus => (true, false),
                OutcomeLabel::MinusPlus => (false, true),
                OutcomeLabel::MinusMinus => (false, false),
                other => panic!("unexpected outcome {other:?}"),
            };
            let expected = compose(
                3,
                &[
                    IonFactor::qubit(0, c(h, 0.0), c(sign_of(si), 0.0)),
                    IonFactor::qubit(1, c(h, 0.0), c(sign_of(sj), 0.0)),
                    IonFactor::qubit(2, alpha, beta),
                ],
                &PhotonFactor::vacuum(),
            )
            .unwrap();
            let corrected = HybridState::from_records(3, &outcome.state).unwrap();
            let f_independent = corrected.fidelity_mod_phase(&expected).unwrap();
            assert!(
                f_independent >= 1.0 - 1e-9,
                "{:?}: independent fidelity {}",
                outcome.label,
                f_independent
            );
        }
    }
    println!("acceptance 2/9 (teleport corrected fidelity >= 1 - 1e-9 on all outcomes): PASS");
}

type Term = (PhotonSector, [IonLabel; 2], C64);

/// Hand-propagated interferometer images of the four two-ion basis inputs.
fn expected_two_ion_evolutions() -> [(IonLabel, IonLabel, Vec<Term>); 4] {
    let mp = IonLabel::m_plus();
    let mm = IonLabel::m_minus();
    let gs = IonLabel::scattered_ground();
    let vac = PhotonSector::Vacuum;
    let up = PhotonSector::one(PhotonPath::Upper, Polarization::SigmaPlus);
    let low = PhotonSector::one(PhotonPath::Lower, Polarization::SigmaPlus);
    let h = FRAC_1_SQRT_2;
    [
        // both bright: photon absorbed in either arm
        (
            mp,
            mp,
            vec![(vac, [gs, mp], c(h, 0.0)), (vac, [mp, gs], c(0.0, h))],
        ),
        // bright upper only
        (
            mp,
            mm,
            vec![
                (vac, [gs, mm], c(h, 0.0)),
                (up, [mp, mm], c(0.0, 0.5)),
                (low, [mp, mm], c(-0.5, 0.0)),
            ],
        ),
        // bright lower only
        (
            mm,
            mp,
            vec![
                (vac, [mm, gs], c(0.0, h)),
                (low, [mm, mp], c(0.5, 0.0)),
                (up, [mm, mp], c(0.0, 0.5)),
            ],
        ),
        // both dark: balanced interferometer sends the photon upward
        (mm, mm, vec![(up, [mm, mm], c(0.0, 1.0))]),
    ]
}

/// Hand-propagated image of the full three-ion teleport pre-detection state.
fn expected_teleport_evolution(alpha: C64, beta: C64) -> Vec<(PhotonSector, [IonLabel; 3], C64)> {
    let mp = IonLabel::m_plus();
    let mm = IonLabel::m_minus();
    let gs = IonLabel::scattered_ground();
    let vac = PhotonSector::Vacuum;
    let up = PhotonSector::one(PhotonPath::Upper, Polarization::SigmaPlus);
    let low = PhotonSector::one(PhotonPath::Lower, Polarization::SigmaPlus);
    let i = c(0.0, 1.0);
    let s = 2.0 * SQRT_2;
    vec![
        (vac, [gs, mp, mp], alpha * 0.5),
        (vac, [mp, gs, mp], alpha * i * 0.5),
        (vac, [gs, mm, mm], alpha * 0.5),
        (up, [mp, mm, mm], alpha * i / s),
        (low, [mp, mm, mm], -alpha / s),
        (vac, [mm, gs, mp], beta * i * 0.5),
        (low, [mm, mp, mp], beta / s),
        (up, [mm, mp, mp], beta * i / s),
        (up, [mm, mm, mm], beta * i * FRAC_1_SQRT_2),
    ]
}

#[test]
fn criterion_3_interferometer_equation_regression() {
    // Two-ion product inputs.
    for (first, second, expected_terms) in expected_two_ion_evolutions() {
        let input = compose(
            2,
            &[
                IonFactor::basis_state(0, first),
                IonFactor::basis_state(1, second),
            ],
            &PhotonFactor::vacuum(),
        )
        .unwrap();
        let out = run_mzi(&input, 0, 1).unwrap();
        let expected = HybridState::from_terms(
            2,
            expected_terms
                .into_iter()
                .map(|(photon, ions, amp)| (BasisLabel::new(ions.to_vec(), photon), amp)),
        )
        .unwrap();
        let diff = out.max_amplitude_diff(&expected);
        assert!(
            diff < 1e-12,
            "two-ion case ({first:?}, {second:?}): diff {diff}"
        );
    }

    // Full three-ion pre-detection state, real and complex inputs.
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut pairs = vec![(c(0.6, 0.0), c(0.8, 0.0))];
    for _ in 0..10 {
        pairs.push(random_pair(&mut rng));
    }
    for (alpha, beta) in pairs {
        let input = compose(
            3,
            &[IonFactor::qubit(0, alpha, beta), IonFactor::bell_pair(1, 2)],
            &PhotonFactor::vacuum(),
        )
        .unwrap();
        let out = run_mzi(&input, 0, 1).unwrap();
        let expected = HybridState::from_terms(
            3,
            expected_teleport_evolution(alpha, beta)
                .into_iter()
                .map(|(photon, ions, amp)| (BasisLabel::new(ions.to_vec(), photon), amp)),
        )
        .unwrap();
        let diff = out.max_amplitude_diff(&expected);
        assert!(
            diff < 1e-12,
            "three-ion case ({alpha}, {beta}): diff {diff}"
        );
    }
    println!("acceptance 3/9 (interferometer output matches hand-propagated coefficients): PASS");
}

#[test]
fn criterion_4_concentration_success_probability_and_state() {
    for k in 1..=9 {
        let a_sq = 0.1 * k as f64;
        let (a, b) = (c(a_sq.sqrt(), 0.0), c((1.0 - a_sq).sqrt(), 0.0));
        let report = concentrate_via_swapping(&ConcentrateInputs::matched(a, b)).unwrap();
        let expected = 0.5 * a_sq * (1.0 - a_sq);
        let dev = (report.total_success_probability - expected).abs();
        assert!(
            dev < 1e-12,
            "a²={a_sq}: total {}",
            report.total_success_probability
        );
        assert!((report.herald_probability - expected).abs() < 1e-12);

        // Post-selected branch (photon still on the lower port) must equal
        // the maximally entangled four-ion state up to normalization.
        let initial = compose(
            4,
            &[
                IonFactor::correlated_pair(0, 1, a, b),
                IonFactor::correlated_pair(2, 3, a, b),
            ],
            &PhotonFactor::vacuum(),
        )
        .unwrap();
        let out = run_mzi(&initial, 1, 2).unwrap();
        let (p, branch) = out.project(|label| {
            matches!(
                label.photon,
                PhotonSector::One {
                    path: PhotonPath::Lower,
                    ..
                }
            )
        });
        assert!((p - expected).abs() < 1e-12);
        let normalized = branch.normalized().unwrap();
        let low = PhotonSector::one(PhotonPath::Lower, Polarization::SigmaPlus);
        let mp = IonLabel::m_plus();
        let mm = IonLabel::m_minus();
        let expected_state = HybridState::from_terms(
            4,
            vec![
                (
                    BasisLabel::new(vec![mm, mm, mp, mp], low),
                    c(FRAC_1_SQRT_2, 0.0),
                ),
                (
                    BasisLabel::new(vec![mp, mp, mm, mm], low),
                    c(-FRAC_1_SQRT_2, 0.0),
                ),
            ],
        )
        .unwrap();
        let diff = normalized.max_amplitude_diff(&expected_state);
        assert!(diff < 1e-12, "a²={a_sq}: state diff {diff}");
    }
    println!(
        "acceptance 4/9 (concentration success = a²(1-a²)/2 and maximal four-ion state): PASS"
    );
}

#[test]
fn criterion_5_remote_preparation_outcome_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..40 {
        let (a, b) = random_real_pair(&mut rng);
        let (mu, nu) = random_real_pair(&mut rng);
        let report = remote_prepare(&RemotePrepareInputs { a, b, mu, nu }).unwrap();

        let ab2 = a.norm_sqr() * b.norm_sqr();
        let mn2 = mu.norm_sqr() * nu.norm_sqr();
        let quartic = mu.norm_sqr().powi(2) + nu.norm_sqr().powi(2);
        for outcome in &report.outcomes {
            let expected = match outcome.label {
                OutcomeLabel::PlusPlus | OutcomeLabel::MinusMinus => 0.5 * mn2 * ab2,
                OutcomeLabel::PlusMinus | OutcomeLabel::MinusPlus => 0.25 * ab2 * quartic,
                other => panic!("unexpected outcome {other:?}"),
            };
            let dev = (outcome.absolute_probability - expected).abs();
            assert!(
                dev < 1e-12,
                "{:?}: {}",
                outcome.label,
                outcome.absolute_probability
            );
            match outcome.label {
                OutcomeLabel::PlusMinus => {
                    assert!(outcome.correction.is_none());
                    assert!(outcome.fidelity_vs_target.unwrap() >= 1.0 - 1e-9);
                }
                OutcomeLabel::MinusPlus => {
                    assert_eq!(outcome.correction.as_ref().map(Vec::len), Some(2));
                    assert!(outcome.fidelity_vs_target.unwrap() >= 1.0 - 1e-9);
                }
                _ => {}
            }

            // Independent state check for the two delivery outcomes: target
            // weights m ∝ ν², n ∝ μ² on the outer ions, relay ions left in
            // their (real-parameter) measurement kets.
            if matches!(
                outcome.label,
                OutcomeLabel::PlusMinus | OutcomeLabel::MinusPlus
            ) {
                let quartic_norm = quartic.sqrt();
                let m = nu.norm_sqr() / quartic_norm;
                let n = mu.norm_sqr() / quartic_norm;
                let payload = IonFactor::new(
                    vec![0, 3],
                    vec![
                        (c(m, 0.0), vec![IonLabel::m_plus(), IonLabel::m_minus()]),
                        (c(n, 0.0), vec![IonLabel::m_minus(), IonLabel::m_plus()]),
                    ],
                )
                .unwrap();
                let plus_ket = IonFactor::qubit; // |+'⟩ = ν|m₊⟩ + μ|m₋⟩
                let (relay_1, relay_2) = if outcome.label == OutcomeLabel::PlusMinus {
                    (plus_ket(1, nu, mu), IonFactor::qubit(2, -mu, nu))
                } else {
                    (IonFactor::qubit(1, -mu, nu), plus_ket(2, nu, mu))
                };
                let expected =
                    compose(4, &[payload, relay_1, relay_2], &PhotonFactor::vacuum()).unwrap();
                let delivered = HybridState::from_records(4, &outcome.state).unwrap();
                let f = delivered.fidelity_mod_phase(&expected).unwrap();
                assert!(
                    f >= 1.0 - 1e-9,
                    "{:?}: independent fidelity {f}",
                    outcome.label
                );
            }
        }
        let total_expected = 0.5 * ab2 * quartic;
        assert!((report.total_success_probability - total_expected).abs() < 1e-12);
    }
    println!("acceptance 5/9 (remote-preparation outcome probabilities and fidelities): PASS");
}

#[test]
fn criterion_6_probability_completeness() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);

    let check_report = |report: &ProtocolReport| {
        let total = report.herald_probability + report.failure_mass;
        assert!((total - 1.0).abs() < 1e-12, "herald + failure = {total}");
    };

    // Exact three-way split at a fixed point, computed from the frozen
    // pre-detection coefficients: lower 1/8, upper 1/8 + β²/2, none
    // (3α² + β²)/4.
    let (alpha, beta) = (0.6, 0.8);
    let initial = compose(
        3,
        &[
            IonFactor::qubit(0, c(alpha, 0.0), c(beta, 0.0)),
            IonFactor::bell_pair(1, 2),
        ],
        &PhotonFactor::vacuum(),
    )
    .unwrap();
    let ports = detect_output_ports(&run_mzi(&initial, 0, 1).unwrap());
    assert!((ports[0].probability - (0.125 + beta * beta / 2.0)).abs() < 1e-12);
    assert!((ports[1].probability - 0.125).abs() < 1e-12);
    assert!((ports[2].probability - (3.0 * alpha * alpha + beta * beta) / 4.0).abs() < 1e-12);

    for _ in 0..25 {
        let (alpha, beta) = random_pair(&mut rng);
        check_report(&teleport(&TeleportInputs { alpha, beta }).unwrap());

        let (a, b) = random_pair(&mut rng);
        check_report(&concentrate_via_swapping(&ConcentrateInputs { alpha, beta, a, b }).unwrap());

        let (a, b) = random_real_pair(&mut rng);
        let (mu, nu) = random_real_pair(&mut rng);
        check_report(&remote_prepare(&RemotePrepareInputs { a, b, mu, nu }).unwrap());

        // Same statement at the detector level: the three port masses
        // partition the full pre-detection state.
        let initial = compose(
            4,
            &[
                IonFactor::correlated_pair(0, 1, alpha, beta),
                IonFactor::correlated_pair(2, 3, a, b),
            ],
            &PhotonFactor::vacuum(),
        )
        .unwrap();
        let out = run_mzi(&initial, 1, 2).unwrap();
        let ports = detect_output_ports(&out);
        let sum: f64 = ports.iter().map(|r| r.probability).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    println!("acceptance 6/9 (herald + upper-port + no-photon masses = 1): PASS");
}

/// Numeric-tolerant comparison of note strings: identical text, with
/// embedded decimal values compared at the report tolerance.
fn assert_notes_match(a: &[String], b: &[String], tol: f64) {
    assert_eq!(a.len(), b.len(), "note count differs: {a:?} vs {b:?}");
    for (na, nb) in a.iter().zip(b) {
        let ta: Vec<&str> = na.split_whitespace().collect();
        let tb: Vec<&str> = nb.split_whitespace().collect();
        assert_eq!(
            ta.len(),
            tb.len(),
            "note structure differs: '{na}' vs '{nb}'"
        );
        for (x, y) in ta.iter().zip(&tb) {
            if x == y {
                continue;
            }
            let (kx, vx) = x.split_once('=').unwrap_or(("", x));
            let (ky, vy) = y.split_once('=').unwrap_or(("", y));
            assert_eq!(kx, ky, "note token differs: '{x}' vs '{y}'");
            let (fx, fy) = (vx.parse::<f64>(), vy.parse::<f64>());
            match (fx, fy) {
                (Ok(fx), Ok(fy)) => {
                    assert!((fx - fy).abs() < tol, "note value differs: '{x}' vs '{y}'")
                }
                _ => panic!("note token differs: '{x}' vs '{y}'"),
            }
        }
    }
}

fn assert_reports_match(sparse: &ProtocolReport, dense: &ProtocolReport, tol: f64) {
    assert_eq!(sparse.protocol, dense.protocol);
    assert_eq!(sparse.schema_version, dense.schema_version);
    assert_eq!(sparse.inputs, dense.inputs);
    assert!((sparse.herald_probability - dense.herald_probability).abs() < tol);
    assert!((sparse.failure_mass - dense.failure_mass).abs() < tol);
    assert!((sparse.total_success_probability - dense.total_success_probability).abs() < tol);

    let to_state = |records: &Vec<mzi_sim::hilbert::AmplitudeRecord>| {
        let ion_count = records.first().map_or(1, |r| r.ions.len());
        HybridState::from_records(ion_count, records).unwrap()
    };
    assert!(
        to_state(&sparse.target_state).max_amplitude_diff(&to_state(&dense.target_state)) < tol
    );

    assert_eq!(sparse.outcomes.len(), dense.outcomes.len());
    for (s, d) in sparse.outcomes.iter().zip(&dense.outcomes) {
        assert_eq!(s.label, d.label);
        assert!((s.conditional_probability - d.conditional_probability).abs() < tol);
        assert!((s.absolute_probability - d.absolute_probability).abs() < tol);
        assert_eq!(s.correction, d.correction, "{:?}", s.label);
        match (s.fidelity_vs_target, d.fidelity_vs_target) {
            (Some(fs), Some(fd)) => assert!((fs - fd).abs() < tol),
            (None, None) => {}
            other => panic!("{:?}: fidelity presence differs: {other:?}", s.label),
        }
        let diff = to_state(&s.state).max_amplitude_diff(&to_state(&d.state));
        assert!(diff < tol, "{:?}: state diff {diff}", s.label);
    }
    assert_notes_match(&sparse.notes, &dense.notes, tol);
}

#[test]
fn criterion_7_dense_oracle_equivalence() {
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    let teleport_ctx = DenseContext::teleport().unwrap();
    for _ in 0..34 {
        let (alpha, beta) = random_pair(&mut rng);
        let inputs = TeleportInputs { alpha, beta };
        assert_reports_match(
            &teleport(&inputs).unwrap(),
            &teleport_ctx.run_teleport(&inputs).unwrap(),
            tol,
        );
    }
    drop(teleport_ctx);

    let swap_ctx = DenseContext::swapping().unwrap();
    for k in 0..34 {
        let (a, b) = random_pair(&mut rng);
        let inputs = if k % 2 == 0 {
            ConcentrateInputs::matched(a, b)
        } else {
            let (alpha, beta) = random_pair(&mut rng);
            ConcentrateInputs { alpha, beta, a, b }
        };
        assert_reports_match(
            &concentrate_via_swapping(&inputs).unwrap(),
            &swap_ctx.run_concentrate(&inputs).unwrap(),
            tol,
        );
    }
    for _ in 0..34 {
        let (a, b) = random_pair(&mut rng);
        let (mu, nu) = random_pair(&mut rng);
        let inputs = RemotePrepareInputs { a, b, mu, nu };
        assert_reports_match(
            &remote_prepare(&inputs).unwrap(),
            &swap_ctx.run_remote_prepare(&inputs).unwrap(),
            tol,
        );
    }
    println!("acceptance 7/9 (sparse engine = dense oracle on 102 randomized runs): PASS");
}

#[test]
fn criterion_8_feasibility_rate_and_decay_discrepancy() {
    let y = feasibility::YieldParams::new(0.01, 0.7, 1.0, 0.7, 1e6).unwrap();
    let rate = feasibility::concentration_rate(&y);
    assert!((rate - 7.35).abs() < 1e-9, "rate {rate}");

    // The decay-rate formula gives 6.61e7 1/s at finesse 19000, length 3 mm
    // — not the commonly quoted 9.9e6 1/s, which is documentation only.
    let gamma = feasibility::cavity_decay_rate(19_000.0, 3e-3).unwrap();
    assert!((gamma - 6.6093037449433446e7).abs() < 1e-3);
    assert!((gamma / feasibility::reference::QUOTED_DECAY_RATE - 1.0).abs() > 1.0);

    // The report records the discrepancy whenever the cavity model runs.
    let spec = feasibility::FeasibilitySpec {
        cavity: Some(feasibility::CavityParams {
            finesse: 19_000.0,
            length: 3e-3,
            wavelength: 854e-9,
            dipole: 1e-29,
            loss_rate: 1.3e8,
        }),
        p_cav_override: None,
        eta: 0.7,
        xi: 1.0,
        a_sq: 0.7,
        photon_rate: 1e6,
    };
    let report = spec.evaluate().unwrap();
    assert!(report
        .notes
        .iter()
        .any(|n| n.contains("9.9e6") && n.contains("not reproduced")));
    println!(
        "acceptance 8/9 (concentration rate 7.35 pairs/s; decay-rate discrepancy recorded): PASS"
    );
}

/// Random hybrid state over the full label set (both polarizations, any
/// flags); not normalized.
fn random_state(rng: &mut ChaCha8Rng, ion_count: usize) -> HybridState {
    let photons = PhotonSector::all();
    let ions = IonLabel::all_valid();
    let terms: Vec<(BasisLabel, C64)> = (0..rng.gen_range(2..8))
        .map(|_| {
            let register: Vec<IonLabel> =
                (0..ion_count).map(|_| ions[rng.gen_range(0..4)]).collect();
            let photon = photons[rng.gen_range(0..5)];
            (
                BasisLabel::new(register, photon),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    HybridState::from_terms(ion_count, terms).unwrap()
}

/// Random state in the physical scattering domain: unscattered ions, σ⁺
/// photons only. On this domain the scattering map is an isometry (merging
/// branches require a second polarization or pre-set flags).
fn random_scatter_domain_state(rng: &mut ChaCha8Rng, ion_count: usize) -> HybridState {
    let ions = [IonLabel::m_plus(), IonLabel::m_minus(), IonLabel::ground()];
    let photons = [
        PhotonSector::Vacuum,
        PhotonSector::one(PhotonPath::Upper, Polarization::SigmaPlus),
        PhotonSector::one(PhotonPath::Lower, Polarization::SigmaPlus),
    ];
    let terms: Vec<(BasisLabel, C64)> = (0..rng.gen_range(2..8))
        .map(|_| {
            let register: Vec<IonLabel> =
                (0..ion_count).map(|_| ions[rng.gen_range(0..3)]).collect();
            (
                BasisLabel::new(register, photons[rng.gen_range(0..3)]),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    HybridState::from_terms(ion_count, terms).unwrap()
}

/// Random state whose first two ions stay in the qubit subspace.
fn random_metastable_pair_state(rng: &mut ChaCha8Rng, ion_count: usize) -> HybridState {
    let qubit = [IonLabel::m_plus(), IonLabel::m_minus()];
    let any = IonLabel::all_valid();
    let photons = PhotonSector::all();
    let terms: Vec<(BasisLabel, C64)> = (0..rng.gen_range(2..8))
        .map(|_| {
            let mut register = vec![qubit[rng.gen_range(0..2)], qubit[rng.gen_range(0..2)]];
            for _ in 2..ion_count {
                register.push(any[rng.gen_range(0..4)]);
            }
            (
                BasisLabel::new(register, photons[rng.gen_range(0..5)]),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    match HybridState::from_terms(ion_count, terms) {
        Ok(state) if !state.is_zero() => state,
        _ => random_metastable_pair_state(rng, ion_count),
    }
}

fn random_basis(rng: &mut ChaCha8Rng) -> IonBasis {
    let (nu, mu) = {
        let x = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let y = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt().max(1e-3);
        (x / n, y / n)
    };
    match IonBasis::new(nu, mu) {
        Ok(basis) => basis,
        Err(_) => random_basis(rng),
    }
}

#[test]
fn criterion_9_property_suites() {
    use mzi_sim::ion_photon::scatter_arm;
    use mzi_sim::measurement::PairSign;
    use mzi_sim::optics::beam_splitter;

    let mut rng = ChaCha8Rng::seed_from_u64(909);

    // Beam-splitter unitarity on arbitrary states.
    for _ in 0..1000 {
        let ion_count: usize = rng.gen_range(1..=4);
        let state = random_state(&mut rng, ion_count);
        let out = beam_splitter(&state);
        assert!((out.norm_sq() - state.norm_sq()).abs() < 1e-12);
    }

    // Scattering isometry on the physical domain.
    for _ in 0..1000 {
        let ion_count: usize = rng.gen_range(1..=4);
        let state = random_scatter_domain_state(&mut rng, ion_count);
        let arm = if rng.gen_bool(0.5) {
            PhotonPath::Upper
        } else {
            PhotonPath::Lower
        };
        let out = scatter_arm(&state, rng.gen_range(0..ion_count), arm).unwrap();
        assert!((out.norm_sq() - state.norm_sq()).abs() < 1e-12);
    }

    // Measurement completeness: detector ports and ion-pair outcomes.
    for _ in 0..1000 {
        let ion_count: usize = rng.gen_range(1..=4);
        let state = random_state(&mut rng, ion_count);
        if state.is_zero() {
            continue;
        }
        let ports = detect_output_ports(&state);
        let sum: f64 = ports.iter().map(|r| r.probability).sum();
        assert!((sum - 1.0).abs() < 1e-12);

        let pair_ions: usize = rng.gen_range(2..=4);
        let pair_state = random_metastable_pair_state(&mut rng, pair_ions);
        let outcomes = measure_ion_pair(&pair_state, (0, 1), &random_basis(&mut rng)).unwrap();
        let sum: f64 = outcomes.iter().map(|r| r.probability).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    // Basis orthonormality for random complex parameters.
    for _ in 0..1000 {
        let basis = random_basis(&mut rng);
        let plus = basis.ket(PairSign::Plus);
        let minus = basis.ket(PairSign::Minus);
        let overlap = plus.0.conj() * minus.0 + plus.1.conj() * minus.1;
        assert!(overlap.norm() < 1e-12);
        assert!((plus.0.norm_sqr() + plus.1.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((minus.0.norm_sqr() + minus.1.norm_sqr() - 1.0).abs() < 1e-12);
    }

    // Global-phase invariance of outcome probabilities.
    for _ in 0..1000 {
        let ion_count: usize = rng.gen_range(2..=4);
        let state = random_metastable_pair_state(&mut rng, ion_count);
        let rotated = state.scaled(C64::from_polar(
            1.0,
            rng.gen_range(0.0..std::f64::consts::TAU),
        ));
        let basis = random_basis(&mut rng);

        let ports = detect_output_ports(&state);
        let ports_rotated = detect_output_ports(&rotated);
        for (a, b) in ports.iter().zip(&ports_rotated) {
            assert!((a.probability - b.probability).abs() < 1e-12);
        }
        let outcomes = measure_ion_pair(&state, (0, 1), &basis).unwrap();
        let outcomes_rotated = measure_ion_pair(&rotated, (0, 1), &basis).unwrap();
        for (a, b) in outcomes.iter().zip(&outcomes_rotated) {
            assert!((a.probability - b.probability).abs() < 1e-12);
        }
    }

    println!("acceptance 9/9 (unitarity, isometry, completeness, orthonormality, phase invariance x1000): PASS");
}
