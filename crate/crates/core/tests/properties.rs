use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use superchannel::channel::{apply_cd, apply_pol_rotation, invert_cd, is_unitary, quantize, random_jones};
use superchannel::jointdsp::{channel_offset, matched_filter, pilot_waveform};
use superchannel::metrics::gmi_2d;
use superchannel::sigkit::ops::fft;
use superchannel::sigkit::{delay_signal, frequency_shift, qam_constellation, resample, rrc_taps, DualPolSignal};
use superchannel::txchain::{assemble_superchannel, shape_channel, ChannelPlan, CombModel};

type C = Complex<f64>;

fn noise(n: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn signal(n: usize, fs: f64, seed: u64) -> DualPolSignal<f64> {
    DualPolSignal::new(noise(n, seed), noise(n, seed ^ 0xabcdef), fs, 0.0).unwrap()
}

fn qam_symbols(n: usize, seed: u64) -> ([Vec<C>; 2], [Vec<usize>; 2]) {
    let c = qam_constellation::<f64>(64).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let idx: [Vec<usize>; 2] = [0, 1].map(|_| (0..n).map(|_| rng.random_range(0..64)).collect());
    let sym = [0, 1].map(|p| idx[p].iter().map(|&i| c.points[i]).collect());
    (sym, idx)
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
}

fn energy(s: &DualPolSignal<f64>) -> f64 {
    s.x.iter().chain(&s.y).map(|z| z.norm_sqr()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifts_compose(a in -40e9..40e9f64, b in -40e9..40e9f64, seed in any::<u64>()) {
        let s = signal(1024, 100e9, seed);
        let two = frequency_shift(&frequency_shift(&s, a), b);
        let one = frequency_shift(&s, a + b);
        prop_assert!(max_diff(&two.x, &one.x) < 1e-12);
        prop_assert!(max_diff(&two.y, &one.y) < 1e-12);
        prop_assert!((two.center_offset - one.center_offset).abs() < 1e-3);
    }

    #[test]
    fn operations_keep_both_polarizations(n in 16usize..512, seed in any::<u64>(), d in -3.0..3.0f64, enob in 2.0..10.0f64) {
        let s = signal(n, 50e9, seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let outs = [
            frequency_shift(&s, 1e9),
            delay_signal(&s, d),
            apply_cd(&s, 80.0, 17.0),
            quantize(&s, enob, 3.0),
            apply_pol_rotation(&s, &random_jones(&mut rng)).unwrap(),
        ];
        for o in &outs {
            prop_assert_eq!(o.x.len(), n);
            prop_assert_eq!(o.y.len(), n);
            prop_assert!(o.validate().is_ok());
        }
    }

    #[test]
    fn real_input_has_a_hermitian_spectrum(n in 8usize..600, seed in any::<u64>()) {
        let mut buf: Vec<C> = noise(n, seed).into_iter().map(|z| C::new(z.re, 0.0)).collect();
        fft(&mut buf);
        for k in 1..n {
            prop_assert!((buf[k] - buf[n - k].conj()).norm() < 1e-9);
        }
        prop_assert!(buf[0].im.abs() < 1e-9);
    }

    #[test]
    fn dispersion_is_undone(km in 0.0..3000.0f64, d in 1.0..20.0f64, seed in any::<u64>()) {
        let s = signal(2048, 50e9, seed);
        let back = invert_cd(&apply_cd(&s, km, d), km, d);
        prop_assert!(max_diff(&back.x, &s.x) < 1e-9);
        prop_assert!(max_diff(&back.y, &s.y) < 1e-9);
        prop_assert!((energy(&apply_cd(&s, km, d)) / energy(&s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_rotations_are_unitary(seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let j = random_jones::<f64, _>(&mut rng);
        prop_assert!(is_unitary(&j, 1e-12));
        let s = signal(256, 50e9, seed);
        let r = apply_pol_rotation(&s, &j).unwrap();
        prop_assert!((energy(&r) / energy(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn more_noise_never_raises_gmi(snr_db in 8.0..24.0f64, extra_db in 1.0..6.0f64, seed in any::<u64>()) {
        let c = qam_constellation::<f64>(64).unwrap();
        let (sym, idx) = qam_symbols(4096, seed);
        let w = noise(4096, seed.wrapping_add(1));
        let wp = w.iter().map(|z| z.norm_sqr()).sum::<f64>() / w.len() as f64;
        let gmi = |snr: f64| {
            let var = 10f64.powf(-snr / 10.0);
            let k = (var / wp).sqrt();
            let r: Vec<C> = sym[0].iter().zip(&w).map(|(s, n)| s + n * k).collect();
            gmi_2d(&r, &idx[0], &c, var).unwrap()
        };
        prop_assert!(gmi(snr_db) >= gmi(snr_db - extra_db));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn assembly_is_linear(alpha_re in -2.0..2.0f64, alpha_im in -2.0..2.0f64, seed in any::<u64>()) {
        let c = qam_constellation::<f64>(16).unwrap();
        let plan = ChannelPlan::new(20e9, 25e9, 0.2, c, 3);
        let comb = CombModel::ideal(25e9, 3);
        let pulse = rrc_taps::<f64>(0.2, 2, 16).unwrap();
        let wave = |s: u64| {
            let (sym, _) = qam_symbols(256, s);
            shape_channel(&sym[0], &sym[1], &pulse, 2, 20e9).unwrap()
        };
        let a: Vec<_> = (0..3).map(|k| wave(seed.wrapping_add(k))).collect();
        let b: Vec<_> = (0..3).map(|k| wave(seed.wrapping_add(10 + k))).collect();
        let alpha = C::new(alpha_re, alpha_im);
        let mix: Vec<_> = a.iter().zip(&b).map(|(u, v)| u.scale(alpha).add(v).unwrap()).collect();
        let run = |w: &[DualPolSignal<f64>]| assemble_superchannel(w, &plan, &comb, 160e9, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        let lhs = run(&mix);
        let rhs = run(&a).scale(alpha).add(&run(&b)).unwrap();
        prop_assert!(max_diff(&lhs.x, &rhs.x) < 1e-9);
        prop_assert!(max_diff(&lhs.y, &rhs.y) < 1e-9);
    }

    #[test]
    fn matched_filter_rejects_the_next_slot(beta in 0.05..0.3f64, seed in any::<u64>()) {
        let spacing = 25e9;
        let rs = 0.98 * spacing / (1.0 + beta);
        let pulse = rrc_taps::<f64>(beta, 2, 64).unwrap();
        let (sym, _) = qam_symbols(1024, seed);
        let base = shape_channel(&sym[0], &sym[1], &pulse, 2, rs).unwrap();
        let wide = resample(&base, 8.0 * rs).unwrap();
        let own = energy(&matched_filter(&wide, rs, beta));
        let neighbour = energy(&matched_filter(&frequency_shift(&wide, spacing), rs, beta));
        prop_assert!(10.0 * (neighbour / own).log10() < -30.0);
    }

    #[test]
    fn offset_estimates_compose(f1 in -1e9..1e9f64, f2 in -1e9..1e9f64, seed in any::<u64>()) {
        let (len, sync, rs) = (4096, 2048, 25e9);
        let (mut sym, _) = qam_symbols(len, seed);
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 7);
        for p in sym.iter_mut() {
            for v in p.iter_mut().take(sync) {
                *v = C::new(if rng.random() { q } else { -q }, if rng.random() { q } else { -q });
            }
        }
        let pilots = [0, 1].map(|p| sym[p][..sync].to_vec());
        let pilot = pilot_waveform(&pilots, len, 0.1, rs).unwrap();
        let s = shape_channel(&sym[0], &sym[1], &rrc_taps(0.1, 2, 128).unwrap(), 2, rs).unwrap();
        let stepwise = channel_offset(&frequency_shift(&frequency_shift(&s, f1), f2), &pilot, sync);
        let direct = channel_offset(&frequency_shift(&s, f1 + f2), &pilot, sync);
        prop_assert!((stepwise - direct).abs() < 1e3, "{} vs {}", stepwise, direct);
        prop_assert!((direct - (f1 + f2)).abs() < 1e6, "{} vs {}", direct, f1 + f2);
    }
}
