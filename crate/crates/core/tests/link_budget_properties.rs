use proptest::prelude::*;
use sqkd_core::device::{DeviceChainParams, Preset};
use sqkd_core::link_budget::{
    bose_einstein_occupation, distance_to_loss, loss_to_distance, max_tolerable_loss, sweep_background,
    thermal_channel,
};
use sqkd_core::security::asymptotic_key;
use sqkd_core::Execution;

proptest! {
    #[test]
    fn distance_round_trip(total_db in 1e-6..60.0f64, gamma in 1e-7..1e-1f64) {
        // Past ~60 dB the transmissivity 10^(-dB/10) drowns in the f64
        // spacing of `loss` near 1.
        let d = total_db / gamma;
        let loss = distance_to_loss(d, gamma).unwrap();
        let back = loss_to_distance(loss, gamma).unwrap();
        prop_assert!((back / d - 1.0).abs() < 1e-9, "{d} -> {loss} -> {back}");
    }
}

#[test]
fn root_is_a_zero_of_the_key() {
    for preset in [Preset::Run1, Preset::Run2] {
        let c = DeviceChainParams::preset(preset);
        for n_th in [1e-6, 0.1, 1.0, 10.0, 1250.0] {
            let eps = max_tolerable_loss(&c, n_th).unwrap();
            if eps > 0.0 && eps < 1.0 {
                let k = asymptotic_key(&c, &thermal_channel(eps, n_th).unwrap()).unwrap();
                assert!(k.abs() < 1e-6, "{preset:?} n_th = {n_th}: K = {k}");
            }
        }
    }
}

#[test]
fn tolerable_loss_strictly_decreases_with_background() {
    let c = DeviceChainParams::preset(Preset::Run2);
    let grid: Vec<f64> = (0..41).map(|i| 10f64.powf(-2.0 + 0.15 * i as f64)).collect();
    let pts = sweep_background(&c, 1e-3, &grid, Execution::default()).unwrap();
    assert_eq!(pts.len(), grid.len());
    for w in pts.windows(2) {
        assert!(w[1].max_loss < w[0].max_loss, "{:?} -> {:?}", w[0], w[1]);
    }
}

#[test]
fn room_temperature_occupation() {
    let n = bose_einstein_occupation(300.0, 5e9).unwrap();
    assert!((n / 1250.0 - 1.0).abs() < 0.05, "{n}");
    assert!(bose_einstein_occupation(0.015, 5e9).unwrap() < 1e-6);
}
