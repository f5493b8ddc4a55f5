use approx::assert_relative_eq;
use proptest::prelude::*;
use sqkd_core::device::{bob_output_distribution, bob_response, Basis, ChannelParams, DeviceChainParams, Preset};

fn basis() -> impl Strategy<Value = Basis> {
    prop_oneof![Just(Basis::Q), Just(Basis::P)]
}

fn chain() -> impl Strategy<Value = DeviceChainParams> {
    (
        0.0..6.0f64,
        0.0..5.0f64,
        0.2..1.0f64,
        0.0..30.0f64,
        prop::array::uniform4(0.0..0.5f64),
        prop::array::uniform4(0.0..0.1f64),
        0.0..20.0f64,
        0.0..3.0f64,
    )
        .prop_map(|(s, extra, eta, g_db, losses, photons, hemt_db, hemt_n)| {
            let mut c = DeviceChainParams::ideal(s, s + extra);
            c.quantum_efficiency = eta;
            c.measurement_gain_db = g_db;
            c.path_losses = losses;
            c.path_loss_photons = photons;
            c.hemt_gain_db = hemt_db;
            c.hemt_noise_photons = hemt_n;
            c
        })
}

fn channel() -> impl Strategy<Value = ChannelParams> {
    (0.0..0.5f64, 0.0..0.2f64).prop_map(|(e, n)| ChannelParams::new(e, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn readout_is_affine_in_the_symbol(
        c in chain(),
        ch in channel(),
        b in basis(),
        bob in basis(),
        alpha in -10.0..10.0f64,
    ) {
        let resp = bob_response(&c, &ch, b, bob).unwrap();
        let zero = bob_output_distribution(&c, &ch, 0.0, b, bob).unwrap();
        let out = bob_output_distribution(&c, &ch, alpha, b, bob).unwrap();
        prop_assert_eq!(zero.mean, 0.0);
        let tol = 1e-12 * (resp.gain.abs() * alpha.abs()).max(1.0);
        prop_assert!((out.mean - resp.gain * alpha).abs() <= tol);
        prop_assert!((out.variance - zero.variance).abs() <= 1e-12 * zero.variance);
    }

    #[test]
    fn trusted_decomposition_matches_op_by_op(c in chain(), ch in channel(), b in basis()) {
        let direct = bob_response(&c, &ch, b, b).unwrap();
        let lumped = c.trusted_chain(b).unwrap().response(&ch);
        assert_relative_eq!(direct.gain, lumped.gain, max_relative = 1e-10);
        assert_relative_eq!(direct.noise_variance, lumped.noise_variance, max_relative = 1e-10);
    }

    #[test]
    fn modulated_ensemble_covers_to_thermal(
        s in 0.0..8.0f64,
        extra in 0.0..6.0f64,
        l2 in 0.0..0.9f64,
        b in basis(),
    ) {
        let mut c = DeviceChainParams::ideal(s, s + extra);
        c.path_losses[1] = l2;
        let sig = c.prepared_signal(b).unwrap();
        let enc = sig.state.quadrature_variance(0, b) + sig.modulation.direction()[b.offset()].powi(2) * sig.modulation.variance();
        let conj = sig.state.quadrature_variance(0, b.conjugate());
        assert_relative_eq!(enc, conj, max_relative = 1e-12);
    }
}

#[test]
fn deamplified_quadrature_becomes_inaccessible() {
    let mut c = DeviceChainParams::preset(Preset::Run1);
    let ch = ChannelParams::experiment(0.0).unwrap();
    let var = c.codebook_variance().unwrap();
    let mut last = f64::INFINITY;
    for g_db in [0.0, 10.0, 20.0, 40.0, 60.0, 80.0] {
        c.measurement_gain_db = g_db;
        let snr = bob_response(&c, &ch, Basis::Q, Basis::P).unwrap().snr(var);
        assert!(snr < last, "G = {g_db} dB: {snr} >= {last}");
        last = snr;
    }
    assert!(last < 1e-6, "deamplified SNR at 80 dB is {last}");
    let matched = bob_response(&c, &ch, Basis::Q, Basis::Q).unwrap().snr(var);
    assert!(matched > 1.0);
}

#[test]
fn both_bases_see_the_same_channel() {
    let c = DeviceChainParams::preset(Preset::Run2);
    let ch = ChannelParams::experiment(0.02).unwrap();
    let q = bob_response(&c, &ch, Basis::Q, Basis::Q).unwrap();
    let p = bob_response(&c, &ch, Basis::P, Basis::P).unwrap();
    assert_relative_eq!(q.gain.abs(), p.gain.abs(), max_relative = 1e-12);
    assert_relative_eq!(q.noise_variance, p.noise_variance, max_relative = 1e-12);
}
