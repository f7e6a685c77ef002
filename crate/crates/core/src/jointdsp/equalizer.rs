//! Fractionally spaced MIMO LMS equalizer.
//!
//! Output convention: for output polarization `o`,
//! `out_o[k] = sum_b sum_m w[o][b][m] * in_b[sps*k - (M-1)/2 + m]`
//! where branch `b = 2*s + q` is polarization `q` of input stream `s`. With
//! three streams (lower, center, upper) this is the 6x2 joint equalizer; with
//! one stream it is the conventional 2x2 equalizer.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, real, Real};
use crate::sigkit::{ConstellationSpec, DualPolSignal};
use crate::txchain::{FrameMap, SlotKind};

/// Total tap energy above which adaptation is declared diverged.
pub const DIVERGENCE_TAP_ENERGY: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqualizerMode {
    Joint6x2,
    Single2x2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adaptation {
    /// Decision-directed updates continue over the payload.
    Continuous,
    /// Taps are frozen after pilot training.
    Frozen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TapInit {
    /// Unit center taps on the direct x->x and y->y paths.
    Spike,
    /// Center taps set to the inverse of a least-squares 2x2 fit of the
    /// center stream against the sync pilots.
    PilotJones,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EqualizerConfig {
    pub num_taps: usize,
    pub step_train: f64,
    pub step_dd: f64,
    pub train_epochs: usize,
    pub adaptation: Adaptation,
    /// Number of past CPE pilots averaged for the decision-directed phase reference.
    pub phase_window: usize,
    pub init: TapInit,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        Self { num_taps: 25, step_train: 1e-3, step_dd: 1e-4, train_epochs: 3, adaptation: Adaptation::Continuous, phase_window: 4, init: TapInit::PilotJones }
    }
}

impl EqualizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_taps == 0 || self.num_taps % 2 == 0 {
            return Err(Error::Config(format!("tap count must be odd, got {}", self.num_taps)));
        }
        if !(self.step_train > 0.0) || !(self.step_dd >= 0.0) {
            return Err(Error::Config("LMS steps must be positive".into()));
        }
        if self.train_epochs == 0 {
            return Err(Error::Config("need at least one training epoch".into()));
        }
        if self.phase_window == 0 {
            return Err(Error::Config("phase window must be >= 1".into()));
        }
        Ok(())
    }
}

/// Tap bank plus adaptation parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualizerState<T: Real> {
    /// `taps[out][branch][m]`.
    pub taps: [Vec<Vec<Complex<T>>>; 2],
    pub step_train: f64,
    pub step_dd: f64,
    pub mode: EqualizerMode,
    pub num_streams: usize,
    pub sps: usize,
}

impl<T: Real> EqualizerState<T> {
    /// Center-spike initialization on the direct x->x and y->y taps of the
    /// center stream, zeros elsewhere.
    pub fn new(mode: EqualizerMode, num_taps: usize, sps: usize, step_train: f64, step_dd: f64) -> Self {
        let num_streams = match mode {
            EqualizerMode::Joint6x2 => 3,
            EqualizerMode::Single2x2 => 1,
        };
        let zero = Complex::new(T::zero(), T::zero());
        let mut taps = [vec![vec![zero; num_taps]; 2 * num_streams], vec![vec![zero; num_taps]; 2 * num_streams]];
        let center_stream = num_streams / 2;
        let mid = num_taps / 2;
        taps[0][2 * center_stream][mid] = Complex::new(T::one(), T::zero());
        taps[1][2 * center_stream + 1][mid] = Complex::new(T::one(), T::zero());
        Self { taps, step_train, step_dd, mode, num_streams, sps }
    }

    pub fn num_taps(&self) -> usize {
        self.taps[0][0].len()
    }

    pub fn tap_energy(&self) -> f64 {
        self.taps
            .iter()
            .flat_map(|o| o.iter())
            .flat_map(|b| b.iter())
            .map(|w| w.norm_sqr().to_f64().unwrap())
            .sum()
    }

    /// Energy of the taps attached to input stream `s` (both outputs, both pols).
    pub fn stream_energy(&self, s: usize) -> f64 {
        self.taps
            .iter()
            .flat_map(|o| o[2 * s..2 * s + 2].iter())
            .flat_map(|b| b.iter())
            .map(|w| w.norm_sqr().to_f64().unwrap())
            .sum()
    }

    /// Replaces the center taps of the center stream by the inverse of the
    /// LS estimate `H` in `r[sps k] = H s[k]` over the sync pilots.
    pub fn init_from_pilots(&mut self, center: &DualPolSignal<T>, training: &TrainingData<'_, T>) {
        let c64 = |z: Complex<T>| Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
        let mut rs = [[Complex::new(0.0, 0.0); 2]; 2];
        let mut ss = [[Complex::new(0.0, 0.0); 2]; 2];
        for k in 0..training.map.sync_pilot_len {
            let n = (self.sps * k) % center.len();
            let r = [c64(center.x[n]), c64(center.y[n])];
            let s = [c64(training.frame[0][k]), c64(training.frame[1][k])];
            for i in 0..2 {
                for j in 0..2 {
                    rs[i][j] += r[i] * s[j].conj();
                    ss[i][j] += s[i] * s[j].conj();
                }
            }
        }
        let inv2 = |m: [[Complex<f64>; 2]; 2]| -> Option<[[Complex<f64>; 2]; 2]> {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.norm() < 1e-12 {
                return None;
            }
            Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
        };
        let Some(sinv) = inv2(ss) else { return };
        let mut h = [[Complex::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = rs[i][0] * sinv[0][j] + rs[i][1] * sinv[1][j];
            }
        }
        let Some(w) = inv2(h) else { return };
        let mid = self.num_taps() / 2;
        let cs = self.num_streams / 2;
        for o in 0..2 {
            for q in 0..2 {
                self.taps[o][2 * cs + q][mid] = Complex::new(real(w[o][q].re), real(w[o][q].im));
            }
        }
    }

    fn check(&self, symbol: usize) -> Result<()> {
        let e = self.tap_energy();
        if !(e < DIVERGENCE_TAP_ENERGY) {
            return Err(Error::Diverged { symbol, tap_energy: e });
        }
        Ok(())
    }
}

/// Known symbols the equalizer may use.
pub struct TrainingData<'a, T: Real> {
    /// Full transmitted frame of the target channel, per polarization.
    /// Only sync and CPE pilot positions are read.
    pub frame: [&'a [Complex<T>]; 2],
    pub map: &'a FrameMap,
    pub constellation: &'a ConstellationSpec<T>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EqualizerDiagnostics {
    /// Mean squared error per block of `trace_block` symbols, in processing order.
    pub mse_trace: Vec<f64>,
    pub trace_block: usize,
    pub final_tap_energy: f64,
}

/// Streams padded circularly so every window is a contiguous slice.
struct PaddedInputs<T: Real> {
    branches: Vec<Vec<Complex<T>>>,
}

impl<T: Real> PaddedInputs<T> {
    fn new(streams: &[&DualPolSignal<T>], num_taps: usize) -> Self {
        let half = num_taps / 2;
        let mut branches = Vec::with_capacity(2 * streams.len());
        for s in streams {
            for p in s.pols() {
                let n = p.len();
                let mut v = Vec::with_capacity(n + 2 * half);
                for i in 0..half {
                    v.push(p[(n - half + i) % n]);
                }
                v.extend_from_slice(p);
                for i in 0..half {
                    v.push(p[i % n]);
                }
                branches.push(v);
            }
        }
        Self { branches }
    }

    /// Window of branch `b` centered on sample `c` of the original stream.
    #[inline]
    fn window(&self, b: usize, c: usize, len: usize) -> &[Complex<T>] {
        // padded index c holds original sample c - half
        &self.branches[b][c..c + len]
    }
}

#[inline]
fn dot<T: Real>(w: &[Complex<T>], x: &[Complex<T>]) -> Complex<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (a, b) in w.iter().zip(x) {
        re = re + a.re * b.re - a.im * b.im;
        im = im + a.re * b.im + a.im * b.re;
    }
    Complex::new(re, im)
}

#[inline]
fn update<T: Real>(w: &mut [Complex<T>], x: &[Complex<T>], g: Complex<T>) {
    // w += g * conj(x)
    for (a, b) in w.iter_mut().zip(x) {
        *a = *a + g * b.conj();
    }
}

fn filter_at<T: Real>(state: &EqualizerState<T>, inputs: &PaddedInputs<T>, c: usize) -> [Complex<T>; 2] {
    let m = state.num_taps();
    let mut out = [Complex::new(T::zero(), T::zero()); 2];
    for (o, bank) in state.taps.iter().enumerate() {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (b, w) in bank.iter().enumerate() {
            acc = acc + dot(w, inputs.window(b, c, m));
        }
        out[o] = acc;
    }
    out
}

fn adapt<T: Real>(state: &mut EqualizerState<T>, inputs: &PaddedInputs<T>, c: usize, err: [Complex<T>; 2], mu: T) {
    let m = state.num_taps();
    for (o, bank) in state.taps.iter_mut().enumerate() {
        let g = err[o] * mu;
        for (b, w) in bank.iter_mut().enumerate() {
            update(w, inputs.window(b, c, m), g);
        }
    }
}

/// Runs pilot training followed by the decision-directed pass and returns the
/// equalized output for every symbol of the frame.
///
/// During the decision-directed pass the error is computed against the
/// decision rotated by a phase reference averaged over the last
/// `phase_window` CPE pilots, so the taps do not chase carrier phase.
pub fn run_equalizer<T: Real>(
    streams: &[&DualPolSignal<T>],
    training: &TrainingData<'_, T>,
    state: &mut EqualizerState<T>,
    cfg: &EqualizerConfig,
) -> Result<([Vec<Complex<T>>; 2], EqualizerDiagnostics)> {
    cfg.validate()?;
    if streams.len() != state.num_streams {
        return Err(Error::Input(format!("equalizer expects {} streams, got {}", state.num_streams, streams.len())));
    }
    let map = training.map;
    let n = streams[0].len();
    if streams.iter().any(|s| s.len() != n) {
        return Err(Error::Input("equalizer input streams differ in length".into()));
    }
    if n < state.sps * map.frame_len {
        return Err(Error::Input(format!("input holds {n} samples, frame needs {}", state.sps * map.frame_len)));
    }
    if cfg.init == TapInit::PilotJones {
        state.init_from_pilots(streams[state.num_streams / 2], training);
    }
    let inputs = PaddedInputs::new(streams, state.num_taps());
    let sps = state.sps;
    let block = 256;
    let mut diag = EqualizerDiagnostics { trace_block: block, ..Default::default() };
    let mut block_acc = 0.0;
    let mut block_count = 0usize;
    let mut push_err = |e: [Complex<T>; 2], diag: &mut EqualizerDiagnostics| {
        block_acc += (e[0].norm_sqr() + e[1].norm_sqr()).to_f64().unwrap() / 2.0;
        block_count += 1;
        if block_count == block {
            diag.mse_trace.push(block_acc / block as f64);
            block_acc = 0.0;
            block_count = 0;
        }
    };

    let mu_train = real::<T>(state.step_train);
    let mu_dd = real::<T>(state.step_dd);
    let sync_len = map.sync_pilot_len;

    for _ in 0..cfg.train_epochs {
        for k in 0..sync_len {
            let y = filter_at(state, &inputs, sps * k);
            let e = [training.frame[0][k] - y[0], training.frame[1][k] - y[1]];
            adapt(state, &inputs, sps * k, e, mu_train);
            push_err(e, &mut diag);
        }
        state.check(sync_len)?;
    }

    let zero = Complex::new(T::zero(), T::zero());
    let mut out = [vec![zero; map.frame_len], vec![zero; map.frame_len]];
    // outputs over the sync region with the trained taps
    for k in 0..sync_len {
        let y = filter_at(state, &inputs, sps * k);
        out[0][k] = y[0];
        out[1][k] = y[1];
    }

    let mut recent: std::collections::VecDeque<Complex<T>> = std::collections::VecDeque::with_capacity(cfg.phase_window);
    let mut rot = Complex::new(T::one(), T::zero());
    let adapt_dd = cfg.adaptation == Adaptation::Continuous && state.step_dd > 0.0;
    for k in sync_len..map.frame_len {
        let c = sps * k;
        let y = filter_at(state, &inputs, c);
        out[0][k] = y[0];
        out[1][k] = y[1];
        let pilot = map.slot(k) == SlotKind::Cpe;
        if pilot {
            let mut a = zero;
            for p in 0..2 {
                a = a + y[p] * training.frame[p][k].conj();
            }
            if recent.len() == cfg.phase_window {
                recent.pop_front();
            }
            recent.push_back(a);
            let sum = recent.iter().fold(zero, |s, v| s + v);
            if sum.norm_sqr() > T::zero() {
                rot = cis(sum.arg());
            }
        }
        let mut e = [zero; 2];
        for p in 0..2 {
            let reference = if pilot {
                training.frame[p][k]
            } else {
                training.constellation.decide(y[p] * rot.conj())
            };
            e[p] = reference * rot - y[p];
        }
        if adapt_dd {
            adapt(state, &inputs, c, e, mu_dd);
        }
        push_err(e, &mut diag);
        if k % 1024 == 0 {
            state.check(k)?;
        }
    }
    state.check(map.frame_len)?;
    diag.final_tap_energy = state.tap_energy();
    Ok((out, diag))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::channel::random_jones;
    use crate::rng::SeedStream;
    use crate::sigkit::qam_constellation;

    const LEN: usize = 4096;
    const SYNC: usize = 1024;

    /// 2-SPS stream of `J s`: symbols on even samples, midpoints on odd ones.
    fn rotated(tx: &[Vec<C>; 2], j: &Jones) -> DualPolSignal<f64> {
        let n = tx[0].len();
        let r: Vec<[C; 2]> = (0..n).map(|k| [j[0][0] * tx[0][k] + j[0][1] * tx[1][k], j[1][0] * tx[0][k] + j[1][1] * tx[1][k]]).collect();
        let pol = |p: usize| (0..2 * n).map(|i| if i % 2 == 0 { r[i / 2][p] } else { 0.5 * (r[i / 2][p] + r[(i / 2 + 1) % n][p]) }).collect();
        DualPolSignal::new(pol(0), pol(1), 50e9, 0.0).unwrap()
    }

    type Jones = [[C; 2]; 2];

    fn run(init: TapInit, step: f64) -> (Result<[Vec<C>; 2]>, EqualizerState<f64>, [Vec<C>; 2], Jones) {
        let tx = frame(LEN, SYNC, 21);
        let j: Jones = random_jones(&mut SeedStream::new(21).substream("jones"));
        let input = rotated(&tx, &j);
        let map = FrameMap::new(LEN, SYNC, 64).unwrap();
        let c = qam_constellation::<f64>(64).unwrap();
        let training = TrainingData { frame: [&tx[0], &tx[1]], map: &map, constellation: &c };
        let cfg = EqualizerConfig { init, step_train: step, ..Default::default() };
        let mut state = EqualizerState::new(EqualizerMode::Single2x2, cfg.num_taps, 2, cfg.step_train, cfg.step_dd);
        let out = run_equalizer(&[&input], &training, &mut state, &cfg).map(|r| r.0);
        (out, state, tx, j)
    }

    fn symbol_errors(out: &[Vec<C>; 2], tx: &[Vec<C>; 2]) -> usize {
        let c = qam_constellation::<f64>(64).unwrap();
        (0..2).map(|p| out[p].iter().zip(&tx[p]).skip(SYNC).filter(|(a, b)| (c.decide(**a) - **b).norm() > 1e-9).count()).sum()
    }

    #[test]
    fn inverts_a_polarization_rotation() {
        for init in [TapInit::PilotJones, TapInit::Spike] {
            let (out, state, tx, j) = run(init, 1e-3);
            let out = out.unwrap();
            assert_eq!(symbol_errors(&out, &tx), 0);
            let mid = state.num_taps() / 2;
            let w = |o: usize, q: usize, m: usize| state.taps[o][q][m];
            for o in 0..2 {
                for p in 0..2 {
                    // response of output o to a unit symbol on pol p
                    let r: C = (0..2).map(|q| j[q][p] * (w(o, q, mid) + 0.5 * (w(o, q, mid - 1) + w(o, q, mid + 1)))).sum();
                    let want = if o == p { 1.0 } else { 0.0 };
                    assert!((r - want).norm() < 0.02, "{init:?} {o}{p}: {r}");
                    if init == TapInit::PilotJones {
                        // unitary: the inverse is the conjugate transpose
                        assert!((w(o, p, mid) - j[p][o].conj()).norm() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn large_steps_are_reported_as_divergence() {
        let (out, ..) = run(TapInit::Spike, 5.0);
        assert!(matches!(out, Err(Error::Diverged { .. })));
    }

    #[test]
    fn deterministic() {
        let (a, sa, ..) = run(TapInit::Spike, 1e-3);
        let (b, sb, ..) = run(TapInit::Spike, 1e-3);
        assert_eq!(a.unwrap(), b.unwrap());
        assert_eq!(sa, sb);
    }

    #[test]
    fn bank_layout() {
        let joint = EqualizerState::<f64>::new(EqualizerMode::Joint6x2, 25, 2, 1e-3, 1e-4);
        assert!(joint.taps.iter().all(|o| o.len() == 6 && o.iter().all(|b| b.len() == 25)));
        assert_eq!((joint.stream_energy(0), joint.stream_energy(1), joint.stream_energy(2)), (0.0, 2.0, 0.0));
        let single = EqualizerState::<f64>::new(EqualizerMode::Single2x2, 25, 2, 1e-3, 1e-4);
        assert!(single.taps.iter().all(|o| o.len() == 2));
        assert!(EqualizerConfig { num_taps: 24, ..Default::default() }.validate().is_err());
    }
}
