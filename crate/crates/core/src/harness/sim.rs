//! One end-to-end link realization: transmitter, channel, per-channel
//! receivers and the receiver DSP.

use rand::Rng;

use crate::channel::{add_awgn_with_reference, apply_cd, apply_pol_rotation, quantize, random_jones, wiener_phase, ImpairmentConfig};
use crate::error::{Error, Result};
use crate::jointdsp::{process, DspConfig, DspResult, LinkParams, ReceivedChannel, Receiver};
use crate::metrics::{evaluate, MetricsReport, SeParams};
use crate::rng::SeedStream;
use crate::rxchain::{adc, coherent_downconvert, wss_demux, ReceiverConfig};
use crate::scalar::Real;
use crate::sigkit::{qam_constellation, rrc_taps, ConstellationSpec, DualPolSignal};
use crate::txchain::{assemble_superchannel, build_frame, shape_channel, ChannelPlan, CombModel, FrameMap, PolMux};

/// Fully specified link for one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSetup {
    pub symbol_rate: f64,
    pub spacing: f64,
    pub beta: f64,
    pub format: usize,
    pub num_channels: usize,
    pub center_index: i32,
    pub frame_len: usize,
    pub sync_pilot_len: usize,
    pub cpe_pilot_period: usize,
    pub decorrelation: Vec<u32>,
    pub polmux: PolMux,
    pub polmux_delay: usize,
    pub gains_db: Vec<f64>,
    pub span_symbols: usize,
    pub dac_sps: usize,
    pub sim_oversampling: f64,
    pub comb_tx: CombModel,
    pub comb_rx: CombModel,
    /// `enob` here is the DAC resolution.
    pub impairments: ImpairmentConfig,
    pub f0_spread: f64,
    pub receiver: ReceiverConfig,
    pub dsp: DspConfig,
}

/// Comb line linewidth used by the defaults, on both combs.
pub const DEFAULT_LINEWIDTH: f64 = 10e3;

impl LinkSetup {
    /// Back-to-back defaults: 5 transmitted channels on a 25 GHz grid, the
    /// middle three detected.
    pub fn new(symbol_rate: f64, beta: f64, format: usize) -> Self {
        let spacing = 25e9;
        let num_channels = 5;
        let comb = CombModel { linewidth: DEFAULT_LINEWIDTH, ..CombModel::ideal(spacing, num_channels) };
        let mut receiver = ReceiverConfig::new(comb.clone());
        receiver.timing_offset = 0.25;
        Self {
            symbol_rate,
            spacing,
            beta,
            format,
            num_channels,
            center_index: 0,
            frame_len: 1 << 15,
            sync_pilot_len: 2048,
            cpe_pilot_period: 256,
            decorrelation: crate::txchain::default_decorrelation(num_channels),
            polmux: PolMux::Independent,
            polmux_delay: 250,
            gains_db: vec![0.0; num_channels],
            span_symbols: 16,
            dac_sps: 2,
            sim_oversampling: 8.0,
            comb_tx: comb.clone(),
            comb_rx: comb,
            impairments: ImpairmentConfig::default(),
            f0_spread: 0.0,
            receiver,
            dsp: DspConfig::default(),
        }
    }

    /// Changes the transmitted channel count, keeping everything consistent.
    pub fn with_channels(mut self, num_channels: usize) -> Self {
        self.num_channels = num_channels;
        self.comb_tx.num_lines = num_channels;
        self.comb_rx.num_lines = num_channels;
        self.receiver.rx_comb.num_lines = num_channels;
        self.decorrelation = crate::txchain::default_decorrelation(num_channels);
        self.gains_db = vec![0.0; num_channels];
        self
    }

    /// Sets DAC and ADC resolution together.
    pub fn with_enob(mut self, enob: f64) -> Self {
        self.impairments.enob = enob;
        self.receiver.adc_enob = enob;
        self
    }

    /// Smallest multiple of the symbol rate covering `sim_oversampling`
    /// spacings and the superchannel.
    pub fn sim_rate<T: Real>(&self, plan: &ChannelPlan<T>) -> f64 {
        let need = (self.sim_oversampling * self.spacing).max(plan.min_sim_rate());
        let k = (need / self.symbol_rate - 1e-9).ceil().max(self.dac_sps as f64);
        k * self.symbol_rate
    }

    pub fn frame_map(&self) -> Result<FrameMap> {
        FrameMap::new(self.frame_len, self.sync_pilot_len, self.cpe_pilot_period)
    }

    pub fn plan<T: Real>(&self) -> Result<ChannelPlan<T>> {
        let mut plan = ChannelPlan::new(self.symbol_rate, self.spacing, self.beta, qam_constellation::<T>(self.format)?, self.num_channels);
        plan.decorrelation_pattern = self.decorrelation.clone();
        plan.polmux = self.polmux;
        plan.polmux_delay = self.polmux_delay;
        plan.gains_db = self.gains_db.clone();
        plan.span_symbols = self.span_symbols;
        plan.dac_sps = self.dac_sps;
        plan.validate()?;
        Ok(plan)
    }
}

/// Received 2-SPS streams of the detected channels plus the transmitted
/// reference of the center channel.
#[derive(Clone, Debug)]
pub struct Realization<T: Real> {
    pub channels: Vec<ReceivedChannel<T>>,
    /// Transmitted payload point indices of the center channel.
    pub reference: [Vec<usize>; 2],
    pub map: FrameMap,
    pub constellation: ConstellationSpec<T>,
    pub symbol_rate: f64,
    pub spacing: f64,
    pub beta: f64,
    /// Shared offset actually injected (tx minus rx comb).
    pub injected_f0: f64,
}

/// Draws one realization. All randomness comes from labeled substreams of
/// `seeds`, so the same seed gives the same data and noise at every sweep
/// point.
pub fn simulate<T: Real>(setup: &LinkSetup, seeds: &SeedStream) -> Result<Realization<T>> {
    let plan = setup.plan::<T>()?;
    let map = setup.frame_map()?;
    setup.impairments.validate()?;
    setup.receiver.validate(setup.symbol_rate)?;
    let frame = build_frame(&plan, &map, seeds)?;
    let pulse = rrc_taps::<T>(setup.beta, setup.dac_sps, setup.span_symbols)?;
    let imp = &setup.impairments;

    let mut waveforms = Vec::with_capacity(plan.num_channels);
    for ch in &frame.channels {
        let w = shape_channel(&ch.symbols[0], &ch.symbols[1], &pulse, setup.dac_sps, setup.symbol_rate)?;
        let w = quantize(&w, imp.enob, imp.clip_sigma);
        let w = match imp.pol_rotation_seed {
            Some(s) => {
                let mut rng = seeds.substream(&format!("tx/polrot/{s}/{}", ch.index));
                apply_pol_rotation(&w, &random_jones::<T, _>(&mut rng))?
            }
            None => w,
        };
        waveforms.push(w);
    }
    let sim_rate = setup.sim_rate(&plan);
    let mut comb_rx = setup.comb_rx.clone();
    if setup.f0_spread > 0.0 {
        let u: f64 = seeds.substream("channel/f0").random_range(-1.0..1.0);
        comb_rx.f0 -= u * setup.f0_spread;
    }
    let mut tx_phase = seeds.substream("tx/phase");
    let composite = assemble_superchannel(&waveforms, &plan, &setup.comb_tx, sim_rate, &mut tx_phase)?;
    let per_channel = composite.power().to_f64().unwrap() / plan.num_channels as f64;
    let mut awgn = seeds.substream("channel/awgn");
    let composite = add_awgn_with_reference(&composite, imp.snr_db, setup.symbol_rate, per_channel, &mut awgn);
    let composite = if imp.fiber_len_km > 0.0 { apply_cd(&composite, imp.fiber_len_km, imp.dispersion_ps_nm_km) } else { composite };

    let mut receiver = setup.receiver.clone();
    receiver.rx_comb = comb_rx.clone();
    let lo_phase = if comb_rx.linewidth > 0.0 {
        Some(wiener_phase(composite.len(), comb_rx.linewidth, sim_rate, &mut seeds.substream("rx/phase")))
    } else {
        None
    };
    let half = (plan.num_channels / 2) as i32;
    let c = setup.center_index;
    let detected: Vec<i32> = if c.abs() + 1 <= half { vec![c - 1, c, c + 1] } else { vec![c] };
    let mut channels = Vec::with_capacity(detected.len());
    for &index in &detected {
        let band = wss_demux(&composite, index, &receiver)?;
        let base = coherent_downconvert(&band, index, &receiver, lo_phase.as_deref());
        let signal: DualPolSignal<T> = adc(&base, setup.symbol_rate, &receiver)?;
        let tx = frame.channel(index).ok_or_else(|| Error::Input(format!("channel {index} not transmitted")))?;
        channels.push(ReceivedChannel { index, signal, pilots: tx.pilots(&map) });
    }
    let center = frame.channel(c).ok_or_else(|| Error::Input(format!("channel {c} not transmitted")))?;
    let reference = [
        center.payload_points[0].iter().map(|&p| p as usize).collect(),
        center.payload_points[1].iter().map(|&p| p as usize).collect(),
    ];
    Ok(Realization {
        channels,
        reference,
        map,
        constellation: plan.constellation.clone(),
        symbol_rate: setup.symbol_rate,
        spacing: setup.spacing,
        beta: setup.beta,
        injected_f0: setup.comb_tx.f0 - comb_rx.f0,
    })
}

impl<T: Real> Realization<T> {
    /// Detected channels a receiver structure consumes.
    pub fn inputs(&self, receiver: Receiver) -> Result<&[ReceivedChannel<T>]> {
        match (receiver, self.channels.len()) {
            (Receiver::Single, 1) => Ok(&self.channels[..]),
            (Receiver::Single, 3) => Ok(&self.channels[1..2]),
            (_, 3) => Ok(&self.channels[..]),
            (r, _) => Err(Error::Input(format!("{r:?} receiver needs both neighbors of the detected channel"))),
        }
    }

    /// Runs one receiver structure and scores its output.
    pub fn receive(&self, receiver: Receiver, dsp: &DspConfig) -> Result<(MetricsReport, DspResult<T>)> {
        let link = LinkParams {
            symbol_rate: self.symbol_rate,
            spacing: self.spacing,
            beta: self.beta,
            map: &self.map,
            constellation: &self.constellation,
        };
        let out = process(self.inputs(receiver)?, &link, receiver, dsp)?;
        let report = evaluate(
            [&out.symbols_x, &out.symbols_y],
            [&self.reference[0], &self.reference[1]],
            &self.constellation,
            None,
            SeParams { symbol_rate: self.symbol_rate, spacing: self.spacing, dsp_overhead: self.map.overhead() },
        )?;
        Ok((report, out))
    }
}
