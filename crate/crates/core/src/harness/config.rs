//! Experiment configuration file (TOML). Every section maps onto the typed
//! configuration of one stage; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::channel::ImpairmentConfig;
use crate::error::{Error, Result};
use crate::jointdsp::{Adaptation, DspConfig, EqualizerConfig, Receiver, TapInit};
use crate::rxchain::{wavelength_to_bandwidth, DemuxShape, ReceiverConfig};
use crate::sigkit::qam_constellation;
use crate::txchain::{default_decorrelation, flatness_ripple, ChannelPlan, CombModel, FrameMap, PolMux};

use super::sim::{LinkSetup, DEFAULT_LINEWIDTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Joint,
    Single,
    /// Wideband stitched reference receiver.
    Stitched,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Joint => "joint",
            Mode::Single => "single",
            Mode::Stitched => "stitched",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Mode::Joint),
            "single" => Ok(Mode::Single),
            "stitched" => Ok(Mode::Stitched),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }

    pub fn receiver(&self) -> Receiver {
        match self {
            Mode::Joint => Receiver::Joint,
            Mode::Single => Receiver::Single,
            Mode::Stitched => Receiver::Stitched { sps: 6 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub spacing_hz: f64,
    /// Transmitted channels (odd, centered on index 0).
    pub num_channels: usize,
    /// Index of the detected channel; its two neighbors are detected as well.
    pub center_index: i32,
    pub decorrelation: Option<Vec<u32>>,
    pub polmux: String,
    pub polmux_delay: usize,
    pub gains_db: Option<Vec<f64>>,
    pub ripple_db: f64,
    pub span_symbols: usize,
    pub dac_sps: usize,
    /// Simulation bandwidth in units of the spacing (rounded up to a multiple of the symbol rate).
    pub sim_oversampling: f64,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            spacing_hz: 25e9,
            num_channels: 5,
            center_index: 0,
            decorrelation: None,
            polmux: "independent".into(),
            polmux_delay: 250,
            gains_db: None,
            ripple_db: 0.0,
            span_symbols: 16,
            dac_sps: 2,
            sim_oversampling: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub frame_len: usize,
    pub sync_pilot_len: usize,
    pub cpe_pilot_period: usize,
}

impl Default for FrameSection {
    fn default() -> Self {
        Self { frame_len: 1 << 15, sync_pilot_len: 2048, cpe_pilot_period: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombSection {
    pub f0_hz: f64,
    pub delta_f_hz: f64,
    pub linewidth_hz: f64,
}

impl Default for CombSection {
    fn default() -> Self {
        Self { f0_hz: 0.0, delta_f_hz: 0.0, linewidth_hz: DEFAULT_LINEWIDTH }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentSection {
    pub snr_db: f64,
    pub clip_sigma: f64,
    pub fiber_len_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub pol_rotation: bool,
    /// Extra shared offset drawn uniformly from `[-f0_spread_hz, f0_spread_hz]` per run.
    pub f0_spread_hz: f64,
}

impl Default for ImpairmentSection {
    fn default() -> Self {
        let d = ImpairmentConfig::default();
        Self {
            snr_db: d.snr_db,
            clip_sigma: d.clip_sigma,
            fiber_len_km: d.fiber_len_km,
            dispersion_ps_nm_km: d.dispersion_ps_nm_km,
            pol_rotation: true,
            f0_spread_hz: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverSection {
    pub demux_bw_nm: f64,
    /// `0` for an ideal rectangular passband, otherwise the super-Gaussian order.
    pub demux_order: u32,
    pub clip_sigma: f64,
    pub timing_offset: f64,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self { demux_bw_nm: 0.3, demux_order: 0, clip_sigma: 3.0, timing_offset: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspSection {
    pub num_taps: usize,
    pub step_train: f64,
    pub step_dd: f64,
    pub train_epochs: usize,
    /// `continuous` or `frozen`.
    pub adaptation: String,
    pub phase_window: usize,
    /// `pilot_jones` or `spike`.
    pub tap_init: String,
    pub cpe_window: usize,
    pub compensate_cd: bool,
    pub matched_filter: bool,
}

impl Default for DspSection {
    fn default() -> Self {
        let e = EqualizerConfig::default();
        let d = DspConfig::default();
        Self {
            num_taps: e.num_taps,
            step_train: e.step_train,
            step_dd: e.step_dd,
            train_epochs: e.train_epochs,
            adaptation: "continuous".into(),
            phase_window: e.phase_window,
            tap_init: "pilot_jones".into(),
            cpe_window: d.cpe_window,
            compensate_cd: true,
            matched_filter: d.matched_filter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub symbol_rate: Vec<f64>,
    pub beta: Vec<f64>,
    pub modes: Vec<Mode>,
    pub formats: Vec<usize>,
    pub enob: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub plan: PlanSection,
    #[serde(default)]
    pub frame: FrameSection,
    #[serde(default)]
    pub comb_tx: CombSection,
    #[serde(default)]
    pub comb_rx: CombSection,
    #[serde(default)]
    pub impairments: ImpairmentSection,
    #[serde(default)]
    pub receiver: ReceiverSection,
    #[serde(default)]
    pub dsp: DspSection,
    pub sweep: SweepSection,
    pub seeds: Vec<u64>,
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn default_batches() -> usize {
    1
}

/// One point of the sweep grid (excluding mode, seed and batch).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub beta: f64,
    pub enob: f64,
    pub format: usize,
    pub symbol_rate: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Expanded grid in sorted key order (beta, enob, format, symbol_rate).
    pub fn grid(&self) -> Vec<SweepPoint> {
        let s = &self.sweep;
        let mut out = Vec::new();
        for &beta in &s.beta {
            for &enob in &s.enob {
                for &format in &s.formats {
                    for &symbol_rate in &s.symbol_rate {
                        out.push(SweepPoint { beta, enob, format, symbol_rate });
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.beta
                .total_cmp(&b.beta)
                .then(a.enob.total_cmp(&b.enob))
                .then(a.format.cmp(&b.format))
                .then(a.symbol_rate.total_cmp(&b.symbol_rate))
        });
        out
    }

    /// Concrete link for one sweep point.
    pub fn link(&self, point: &SweepPoint) -> Result<LinkSetup> {
        let p = &self.plan;
        let polmux = match p.polmux.as_str() {
            "independent" => PolMux::Independent,
            "delayed_copy" => PolMux::DelayedCopy,
            other => return Err(Error::Config(format!("plan.polmux: unknown value {other:?}"))),
        };
        let adaptation = match self.dsp.adaptation.as_str() {
            "continuous" => Adaptation::Continuous,
            "frozen" => Adaptation::Frozen,
            other => return Err(Error::Config(format!("dsp.adaptation: unknown value {other:?}"))),
        };
        let init = match self.dsp.tap_init.as_str() {
            "pilot_jones" => TapInit::PilotJones,
            "spike" => TapInit::Spike,
            other => return Err(Error::Config(format!("dsp.tap_init: unknown value {other:?}"))),
        };
        let comb = |c: &CombSection| CombModel {
            f0: c.f0_hz,
            delta_f: c.delta_f_hz,
            linewidth: c.linewidth_hz,
            spacing: p.spacing_hz,
            num_lines: p.num_channels,
        };
        let imp = &self.impairments;
        let impairments = ImpairmentConfig {
            snr_db: imp.snr_db,
            enob: point.enob,
            clip_sigma: imp.clip_sigma,
            fiber_len_km: imp.fiber_len_km,
            dispersion_ps_nm_km: imp.dispersion_ps_nm_km,
            pol_rotation_seed: if imp.pol_rotation { Some(0) } else { None },
        };
        let mut receiver = ReceiverConfig::new(comb(&self.comb_rx));
        receiver.demux_bw = wavelength_to_bandwidth(self.receiver.demux_bw_nm * 1e-9, crate::channel::REFERENCE_WAVELENGTH);
        receiver.demux_shape =
            if self.receiver.demux_order == 0 { DemuxShape::IdealRect } else { DemuxShape::SuperGaussian(self.receiver.demux_order) };
        receiver.adc_enob = point.enob;
        receiver.clip_sigma = self.receiver.clip_sigma;
        receiver.timing_offset = self.receiver.timing_offset;
        let d = &self.dsp;
        let dsp = DspConfig {
            equalizer: EqualizerConfig {
                num_taps: d.num_taps,
                step_train: d.step_train,
                step_dd: d.step_dd,
                train_epochs: d.train_epochs,
                adaptation,
                phase_window: d.phase_window,
                init,
            },
            cpe_window: d.cpe_window,
            cd_length_km: if d.compensate_cd { imp.fiber_len_km } else { 0.0 },
            cd_dispersion: imp.dispersion_ps_nm_km,
            matched_filter: d.matched_filter,
        };
        let gains_db = match (&p.gains_db, p.ripple_db) {
            (Some(g), _) => g.clone(),
            (None, r) => flatness_ripple(p.num_channels, r),
        };
        Ok(LinkSetup {
            symbol_rate: point.symbol_rate,
            spacing: p.spacing_hz,
            beta: point.beta,
            format: point.format,
            num_channels: p.num_channels,
            center_index: p.center_index,
            frame_len: self.frame.frame_len,
            sync_pilot_len: self.frame.sync_pilot_len,
            cpe_pilot_period: self.frame.cpe_pilot_period,
            decorrelation: p.decorrelation.clone().unwrap_or_else(|| default_decorrelation(p.num_channels)),
            polmux,
            polmux_delay: p.polmux_delay,
            gains_db,
            span_symbols: p.span_symbols,
            dac_sps: p.dac_sps,
            sim_oversampling: p.sim_oversampling,
            comb_tx: comb(&self.comb_tx),
            comb_rx: comb(&self.comb_rx),
            impairments,
            f0_spread: imp.f0_spread_hz,
            receiver,
            dsp,
        })
    }

    /// Checks everything that can be checked without simulating and
    /// reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let s = &self.sweep;
        for (name, empty) in [
            ("sweep.symbol_rate", s.symbol_rate.is_empty()),
            ("sweep.beta", s.beta.is_empty()),
            ("sweep.modes", s.modes.is_empty()),
            ("sweep.formats", s.formats.is_empty()),
            ("sweep.enob", s.enob.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            if empty {
                problems.push(format!("{name} must not be empty"));
            }
        }
        if self.batches == 0 {
            problems.push("batches must be >= 1".into());
        }
        let mut seen = std::collections::HashSet::new();
        for seed in &self.seeds {
            if !seen.insert(seed) {
                problems.push(format!("seed {seed} listed twice"));
            }
        }
        if let Err(e) = FrameMap::new(self.frame.frame_len, self.frame.sync_pilot_len, self.frame.cpe_pilot_period) {
            problems.push(format!("frame: {e}"));
        }
        if self.frame.frame_len % 2 != 0 {
            problems.push("frame.frame_len must be even".into());
        }
        if !(self.impairments.f0_spread_hz >= 0.0) {
            problems.push("impairments.f0_spread_hz must be >= 0".into());
        }
        for f in &s.formats {
            if let Err(e) = qam_constellation::<f64>(*f) {
                problems.push(format!("sweep.formats: {e}"));
            }
        }
        let joint_like = s.modes.iter().any(|m| *m != Mode::Single);
        let half = (self.plan.num_channels / 2) as i32;
        let c = self.plan.center_index;
        if c.abs() > half {
            problems.push(format!("plan.center_index {c} outside the {} transmitted channels", self.plan.num_channels));
        } else if joint_like && c.abs() + 1 > half {
            problems.push(format!("joint modes need both neighbors of channel {c} to be transmitted"));
        }
        let mut reported = std::collections::HashSet::new();
        for point in self.grid() {
            let setup = match self.link(&point) {
                Ok(l) => l,
                Err(e) => {
                    if reported.insert(e.to_string()) {
                        problems.push(e.to_string());
                    }
                    continue;
                }
            };
            for msg in setup.check() {
                let msg = format!("beta={} enob={} format={} symbol_rate={}: {msg}", point.beta, point.enob, point.format, point.symbol_rate);
                if reported.insert(msg.clone()) {
                    problems.push(msg);
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

impl LinkSetup {
    /// Module-level precondition failures for this link, as messages.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |r: Result<()>| {
            if let Err(e) = r {
                out.push(e.to_string());
            }
        };
        match qam_constellation::<f64>(self.format) {
            Ok(c) => {
                let mut plan = ChannelPlan::new(self.symbol_rate, self.spacing, self.beta, c, self.num_channels);
                plan.decorrelation_pattern = self.decorrelation.clone();
                plan.gains_db = self.gains_db.clone();
                plan.span_symbols = self.span_symbols;
                plan.dac_sps = self.dac_sps;
                push(plan.validate());
            }
            Err(e) => push(Err(e)),
        }
        push(self.comb_tx.validate());
        push(self.impairments.validate());
        push(self.receiver.validate(self.symbol_rate));
        push(self.dsp.validate());
        push(crate::sigkit::rrc_taps::<f64>(self.beta, self.dac_sps, self.span_symbols).map(|_| ()));
        push(FrameMap::new(self.frame_len, self.sync_pilot_len, self.cpe_pilot_period).map(|_| ()));
        if !(self.sim_oversampling >= 1.0) {
            push(Err(Error::Config(format!("sim_oversampling must be >= 1, got {}", self.sim_oversampling))));
        }
        out
    }
}
