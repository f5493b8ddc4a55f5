use sqkd_core::device::{Basis, ChannelParams, DeviceChainParams, Preset};
use sqkd_core::protocol::{
    estimate_channel, generate_codebook, generate_codebook_with, sift, simulate_transmission, write_key_record_csv,
    BasisMode, KEY_RECORD_COLUMNS, MIN_ESTIMATION_SAMPLES,
};
use sqkd_core::{Error, Execution};

fn setup() -> (DeviceChainParams, ChannelParams) {
    (DeviceChainParams::preset(Preset::Run1), ChannelParams::experiment(0.02).unwrap())
}

#[test]
fn execution_mode_does_not_change_results() {
    let (c, ch) = setup();
    let var = c.codebook_variance().unwrap();
    let a = generate_codebook_with(5000, var, 9, Execution::Sequential).unwrap();
    let b = generate_codebook_with(5000, var, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let ra = simulate_transmission(&a, &c, &ch, 9, BasisMode::Sift, Execution::Sequential).unwrap();
    let rb = simulate_transmission(&a, &c, &ch, 9, BasisMode::Sift, Execution::Parallel).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn codebook_prefixes_are_stable() {
    let long = generate_codebook(1000, 1.0, 4).unwrap();
    let short = generate_codebook(100, 1.0, 4).unwrap();
    assert_eq!(&long.symbols[..100], &short.symbols[..]);
    assert_eq!(&long.bases[..100], &short.bases[..]);
}

#[test]
fn sifting_keeps_matched_bases() {
    let (c, ch) = setup();
    let cb = generate_codebook(10_000, c.codebook_variance().unwrap(), 2).unwrap();
    let rec = simulate_transmission(&cb, &c, &ch, 2, BasisMode::Sift, Execution::default()).unwrap();
    let pairs = sift(&rec);
    assert_eq!(pairs.len(), rec.matched_count());
    let frac = pairs.len() as f64 / rec.len() as f64;
    assert!((frac - 0.5).abs() < 0.03, "{frac}");
    assert!(rec.entries.iter().all(|e| e.matched == (e.alice_basis == e.bob_basis)));
    assert_eq!(pairs.len() + rec.mismatched().len(), rec.len());
    let q = pairs.iter().filter(|p| p.basis == Basis::Q).count() as f64 / pairs.len() as f64;
    assert!((q - 0.5).abs() < 0.05);

    let announced = simulate_transmission(&cb, &c, &ch, 2, BasisMode::Announced, Execution::default()).unwrap();
    assert_eq!(sift(&announced).len(), cb.len());
}

#[test]
fn estimator_needs_enough_pairs() {
    let (c, ch) = setup();
    let cb = generate_codebook(40, c.codebook_variance().unwrap(), 5).unwrap();
    let rec = simulate_transmission(&cb, &c, &ch, 5, BasisMode::Sift, Execution::default()).unwrap();
    let pairs = sift(&rec);
    assert!(pairs.len() < MIN_ESTIMATION_SAMPLES);
    assert!(matches!(
        estimate_channel(&pairs, &c),
        Err(Error::InsufficientData { .. })
    ));
}

#[test]
fn estimate_recovers_the_channel() {
    let c = DeviceChainParams::preset(Preset::Run2);
    let ch = ChannelParams::new(0.2, 0.03).unwrap();
    let cb = generate_codebook(200_000, c.codebook_variance().unwrap(), 8).unwrap();
    let rec = simulate_transmission(&cb, &c, &ch, 8, BasisMode::Announced, Execution::default()).unwrap();
    let est = estimate_channel(&sift(&rec), &c).unwrap();
    assert!((est.loss - ch.loss).abs() < 4.0 * est.loss_std, "{est:?}");
    assert!((est.noise_photons - ch.coupled_noise_photons).abs() < 4.0 * est.noise_std, "{est:?}");
    assert!(est.loss_std < 0.01);
}

#[test]
fn key_record_csv_layout() {
    let (c, ch) = setup();
    let cb = generate_codebook(10, c.codebook_variance().unwrap(), 1).unwrap();
    let rec = simulate_transmission(&cb, &c, &ch, 1, BasisMode::Sift, Execution::default()).unwrap();
    let mut buf = Vec::new();
    write_key_record_csv(&rec, &["seed: 1".into()], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# seed: 1"));
    assert_eq!(lines.next().unwrap(), KEY_RECORD_COLUMNS.join(","));
    assert_eq!(lines.count(), 10);
}
