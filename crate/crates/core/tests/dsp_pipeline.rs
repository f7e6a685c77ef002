//! End-to-end receiver behavior on simulated links.

use num_complex::Complex;
use superchannel::harness::{batch_stream, simulate, LinkSetup, Realization};
use superchannel::jointdsp::Receiver;
use superchannel::metrics::ls_gain;

fn clean(mut s: LinkSetup) -> LinkSetup {
    s.comb_tx.linewidth = 0.0;
    s.comb_rx.linewidth = 0.0;
    s.receiver.rx_comb.linewidth = 0.0;
    s
}

fn sim(s: &LinkSetup, seed: u64) -> Realization<f64> {
    simulate::<f64>(s, &batch_stream(seed, 0)).unwrap()
}

fn snr(r: &Realization<f64>, s: &LinkSetup, rx: Receiver) -> f64 {
    r.receive(rx, &s.dsp).unwrap().0.snr_db
}

fn mean_snr(s: &LinkSetup, rx: Receiver, seeds: std::ops::Range<u64>) -> f64 {
    let n = seeds.end - seeds.start;
    seeds.map(|k| snr(&sim(s, k), s, rx)).sum::<f64>() / n as f64
}

#[test]
fn side_banks_stay_idle_without_overlap() {
    // 20 GBd at 20% roll-off occupies 24 GHz of a 25 GHz grid
    let s = clean(LinkSetup::new(20e9, 0.2, 64).with_enob(f64::INFINITY));
    let r = sim(&s, 3);
    let (_, out) = r.receive(Receiver::Joint, &s.dsp).unwrap();
    let stream = |k: usize| -> f64 {
        out.diagnostics.taps.iter().flat_map(|o| o[2 * k..2 * k + 2].iter()).flatten().map(|w| w[0] * w[0] + w[1] * w[1]).sum()
    };
    let center = stream(1);
    for side in [0, 2] {
        let rel = 10.0 * (stream(side) / center).log10();
        assert!(rel < -20.0, "side bank {side} at {rel:.1} dB");
    }
}

#[test]
fn noiseless_single_channel_decodes_without_errors() {
    let mut s = clean(LinkSetup::new(24.5e9, 0.1, 64).with_channels(1).with_enob(f64::INFINITY));
    s.impairments.snr_db = f64::INFINITY;
    let r = sim(&s, 1);
    let (m, out) = r.receive(Receiver::Single, &s.dsp).unwrap();
    assert!(m.snr_db > 35.0, "{}", m.snr_db);
    for (p, sym) in [&out.symbols_x, &out.symbols_y].into_iter().enumerate() {
        let reference: Vec<Complex<f64>> = r.reference[p].iter().map(|&i| r.constellation.points[i]).collect();
        let g = ls_gain(sym, &reference).unwrap();
        let errors = sym.iter().zip(&r.reference[p]).filter(|(z, &i)| r.constellation.nearest(**z / g) != i).count();
        assert_eq!(errors, 0, "pol {p}");
    }
}

#[test]
fn same_seed_same_symbols() {
    let s = LinkSetup::new(24.5e9, 0.05, 64).with_enob(4.5);
    let a = sim(&s, 11).receive(Receiver::Joint, &s.dsp).unwrap().1;
    let b = sim(&s, 11).receive(Receiver::Joint, &s.dsp).unwrap().1;
    assert_eq!(a.symbols_x, b.symbols_x);
    assert_eq!(a.symbols_y, b.symbols_y);
    let c = sim(&s, 12).receive(Receiver::Joint, &s.dsp).unwrap().1;
    assert_ne!(a.symbols_x, c.symbols_x);
}

#[test]
fn common_complex_gain_is_invisible() {
    let s = LinkSetup::new(24.5e9, 0.05, 64).with_enob(4.5);
    let r = sim(&s, 5);
    let mut scaled = r.clone();
    let k = Complex::from_polar(0.37, 2.1);
    for ch in &mut scaled.channels {
        ch.signal = ch.signal.scale(k);
    }
    for rx in [Receiver::Joint, Receiver::Single] {
        let a = snr(&r, &s, rx);
        let b = snr(&scaled, &s, rx);
        assert!((a - b).abs() < 0.02, "{rx:?}: {a} vs {b}");
    }
}

#[test]
fn shared_offset_is_removed() {
    // ideal converters: an offset otherwise redraws the quantization error
    let base = clean(LinkSetup::new(24.5e9, 0.05, 64).with_enob(f64::INFINITY));
    for f0 in [-1.9e9, 0.6e9, 2.0e9] {
        let mut s = base.clone();
        s.comb_tx.f0 = f0;
        for seed in [0, 1] {
            let r0 = sim(&base, seed);
            let r1 = sim(&s, seed);
            let (m, out) = r1.receive(Receiver::Joint, &s.dsp).unwrap();
            assert!((out.foe_estimate - f0).abs() < 1e6, "f0 {f0}: estimate {}", out.foe_estimate);
            let d = snr(&r0, &base, Receiver::Joint) - m.snr_db;
            assert!(d.abs() < 0.1, "f0 {f0} seed {seed}: {d:.3} dB");
        }
    }
}

#[test]
fn small_spacing_error_is_left_to_phase_recovery() {
    let base = clean(LinkSetup::new(24.5e9, 0.05, 64).with_enob(4.5));
    let mut s = base.clone();
    s.comb_tx.delta_f = 5e3;
    let r = sim(&s, 2);
    let (m, out) = r.receive(Receiver::Joint, &s.dsp).unwrap();
    assert!(!out.diagnostics.delta_f_applied);
    let d = snr(&sim(&base, 2), &base, Receiver::Joint) - m.snr_db;
    assert!(d.abs() < 0.1, "{d:.3} dB");
}

#[test]
fn laser_linewidth_penalty_after_phase_recovery() {
    // one 10 kHz laser; the local comb is ideal
    let base = clean(LinkSetup::new(24.5e9, 0.1, 64).with_enob(4.5));
    let mut noisy = base.clone();
    noisy.comb_tx.linewidth = 10e3;
    assert_eq!(noisy.cpe_pilot_period, 256);
    for rx in [Receiver::Joint, Receiver::Single] {
        let penalty = mean_snr(&base, rx, 0..4) - mean_snr(&noisy, rx, 0..4);
        assert!(penalty < 0.2, "{rx:?}: {penalty:.3} dB");
    }
}

#[test]
fn joint_beats_single_when_spectra_overlap() {
    for (rs, beta) in [(24.5e9, 0.05), (24e9, 0.1), (25e9, 0.02)] {
        assert!(rs * (1.0 + beta) > 25e9);
        let s = clean(LinkSetup::new(rs, beta, 64).with_enob(4.5));
        for seed in [0, 1] {
            let r = sim(&s, seed);
            let j = snr(&r, &s, Receiver::Joint);
            let g = snr(&r, &s, Receiver::Single);
            assert!(j >= g, "rs {rs} beta {beta} seed {seed}: joint {j:.2} single {g:.2}");
        }
    }
}
