//! Test-traffic generation and the simulated transmit/receive chain that feeds
//! the detectors: PRBS source, FIR ISI channel with additive Gaussian noise,
//! LMS-trained feed-forward equalizer and the 2-tap post-filter.
//!
//! Noise generation is reproducible across implementations: a ChaCha20 stream
//! (`rand_chacha::ChaCha20Rng::seed_from_u64(seed)`) supplies 64-bit words in
//! order; each word `w` becomes a uniform `u = 1 - (w >> 11) * 2^-53` in `(0, 1]`,
//! and consecutive uniforms `(u1, u2)` are turned into two normals by
//! Box–Muller: `r = sqrt(-2 ln u1)`, `z0 = r cos(2 pi u2)`, `z1 = r sin(2 pi u2)`.
//! Normals are consumed in the order `z0, z1, z0', z1', ...`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{MlseError, Result};
use crate::symbol::{Pam4Symbol, SymbolFrame};

/// PRBS15 period, `2^15 - 1`.
pub const PRBS15_PERIOD: usize = (1 << 15) - 1;

/// Maximal-length PRBS from the degree-15 LFSR `x^15 + x^14 + 1`.
///
/// The low 15 bits of `seed` form the initial register; they must not all be
/// zero. The sequence is cycled to `length`.
pub fn generate_prbs(seed: u32, length: usize) -> Result<Vec<u8>> {
    let mut reg = seed & 0x7fff;
    if reg == 0 {
        return Err(MlseError::ZeroSeed);
    }
    if length == 0 {
        return Err(MlseError::EmptyInput);
    }
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let bit = ((reg >> 14) ^ (reg >> 13)) & 1;
        reg = ((reg << 1) | bit) & 0x7fff;
        out.push(bit as u8);
    }
    Ok(out)
}

/// Where a sample frame was tapped from the receive chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRole {
    ChannelOutput,
    FfeOutput,
    PostFilterOutput,
}

/// Real-valued samples with the chain position they come from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    pub samples: Vec<f64>,
    pub role: SampleRole,
}

impl SampleFrame {
    pub fn new(samples: Vec<f64>, role: SampleRole) -> Result<Self> {
        if samples.is_empty() {
            return Err(MlseError::EmptyInput);
        }
        Ok(SampleFrame { samples, role })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }
}

/// Seeded standard-normal generator (see the module docs for the exact algorithm).
pub struct GaussianSource {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        GaussianSource {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        let w = self.rng.next_u64();
        1.0 - (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// FIR intersymbol-interference channel with additive white Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub taps: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(taps: Vec<f64>, noise_sigma: f64, seed: u64) -> Result<Self> {
        if taps.is_empty() {
            return Err(MlseError::InvalidChannel("no taps".into()));
        }
        if taps[0] == 0.0 {
            return Err(MlseError::InvalidChannel("leading tap is zero".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(MlseError::InvalidChannel("non-finite tap".into()));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(MlseError::InvalidChannel(format!(
                "noise sigma {noise_sigma} must be finite and >= 0"
            )));
        }
        Ok(ChannelModel {
            taps,
            noise_sigma,
            seed,
        })
    }
}

fn convolve_causal(input: &[f64], taps: &[f64]) -> Vec<f64> {
    (0..input.len())
        .map(|k| {
            taps.iter()
                .enumerate()
                .take(k + 1)
                .map(|(j, h)| h * input[k - j])
                .sum()
        })
        .collect()
}

/// `y_k = sum_j h_j s_{k-j} + w_k`, with `s_{k<0} = 0`.
pub fn apply_channel(frame: &[Pam4Symbol], model: &ChannelModel) -> Result<SampleFrame> {
    if frame.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    let levels: Vec<f64> = frame.iter().map(|s| s.value()).collect();
    let mut y = convolve_causal(&levels, &model.taps);
    if model.noise_sigma > 0.0 {
        let mut noise = GaussianSource::new(model.seed);
        for v in y.iter_mut() {
            *v += model.noise_sigma * noise.next_normal();
        }
    }
    SampleFrame::new(y, SampleRole::ChannelOutput)
}

/// Center-referenced linear equalizer with LMS adaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct FfeState {
    pub taps: Vec<f64>,
    pub step_size: f64,
    pub trained: bool,
    /// Training-set MSE measured with the taps frozen at the end of each epoch.
    pub epoch_mse: Vec<f64>,
}

impl FfeState {
    /// Unit impulse at the center tap.
    pub fn new(num_taps: usize, step_size: f64) -> Result<Self> {
        if num_taps == 0 || num_taps % 2 == 0 {
            return Err(MlseError::InvalidFfe(format!(
                "tap count {num_taps} must be odd"
            )));
        }
        let mut taps = vec![0.0; num_taps];
        taps[num_taps / 2] = 1.0;
        Self::from_taps(taps, step_size)
    }

    pub fn from_taps(taps: Vec<f64>, step_size: f64) -> Result<Self> {
        if taps.len() % 2 == 0 {
            return Err(MlseError::InvalidFfe(format!(
                "tap count {} must be odd",
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(MlseError::InvalidFfe("non-finite tap".into()));
        }
        if !(step_size >= 0.0 && step_size.is_finite()) {
            return Err(MlseError::InvalidFfe(format!(
                "step size {step_size} must be >= 0"
            )));
        }
        Ok(FfeState {
            taps,
            step_size,
            trained: false,
            epoch_mse: Vec::new(),
        })
    }

    fn center(&self) -> usize {
        self.taps.len() / 2
    }

    /// Equalizer output at index `k`; taps reach `center` samples on either side.
    #[inline]
    fn output_at(&self, received: &[f64], k: usize) -> f64 {
        let c = self.center();
        let mut acc = 0.0;
        for (j, t) in self.taps.iter().enumerate() {
            let idx = k as isize + j as isize - c as isize;
            if idx >= 0 && (idx as usize) < received.len() {
                acc += t * received[idx as usize];
            }
        }
        acc
    }

    fn training_mse(&self, train: &[Pam4Symbol], received: &[f64]) -> f64 {
        let sum: f64 = train
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let e = s.value() - self.output_at(received, k);
                e * e
            })
            .sum();
        sum / train.len() as f64
    }
}

/// Trains the equalizer by LMS against known symbols, one pass over the
/// training prefix per epoch.
pub fn lms_ffe_train(
    train_symbols: &[Pam4Symbol],
    received: &SampleFrame,
    state: FfeState,
    epochs: usize,
) -> Result<FfeState> {
    if train_symbols.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    if received.len() < train_symbols.len() {
        return Err(MlseError::InvalidFfe(format!(
            "received length {} shorter than training length {}",
            received.len(),
            train_symbols.len()
        )));
    }
    if state.taps.len() > train_symbols.len() {
        return Err(MlseError::InvalidFfe(format!(
            "{} taps exceed training length {}",
            state.taps.len(),
            train_symbols.len()
        )));
    }
    let mut state = state;
    let r = &received.samples;
    let c = state.center() as isize;
    for epoch in 0..epochs {
        for (k, s) in train_symbols.iter().enumerate() {
            let e = s.value() - state.output_at(r, k);
            let mu_e = state.step_size * e;
            for (j, t) in state.taps.iter_mut().enumerate() {
                let idx = k as isize + j as isize - c;
                if idx >= 0 && (idx as usize) < r.len() {
                    *t += mu_e * r[idx as usize];
                }
            }
        }
        if state.taps.iter().any(|t| !t.is_finite()) {
            return Err(MlseError::TrainingDiverged { epoch });
        }
        let mse = state.training_mse(train_symbols, r);
        if !mse.is_finite() {
            return Err(MlseError::TrainingDiverged { epoch });
        }
        state.epoch_mse.push(mse);
    }
    state.trained = true;
    Ok(state)
}

/// Center-aligned linear convolution; output length equals input length.
pub fn ffe_apply(state: &FfeState, received: &SampleFrame) -> SampleFrame {
    let out = (0..received.len())
        .map(|k| state.output_at(&received.samples, k))
        .collect();
    SampleFrame {
        samples: out,
        role: SampleRole::FfeOutput,
    }
}

/// `y_k = x_k + alpha x_{k-1}` with `x_{-1} = 0`.
pub fn post_filter(x: &SampleFrame, alpha: f64) -> SampleFrame {
    let mut prev = 0.0;
    let out = x
        .samples
        .iter()
        .map(|&v| {
            let y = v + alpha * prev;
            prev = v;
            y
        })
        .collect();
    SampleFrame {
        samples: out,
        role: SampleRole::PostFilterOutput,
    }
}

/// Undoes [`post_filter`]: `x_k = y_k - alpha x_{k-1}`. Applied to a channel
/// output this is the zero-forcing equalizer for taps `[1, alpha]`.
pub fn invert_post_filter(y: &SampleFrame, alpha: f64) -> SampleFrame {
    let mut prev = 0.0;
    let out = y
        .samples
        .iter()
        .map(|&v| {
            let x = v - alpha * prev;
            prev = x;
            x
        })
        .collect();
    SampleFrame {
        samples: out,
        role: SampleRole::FfeOutput,
    }
}

/// Transmit PAM4 symbols produced from a PRBS15 stream.
pub fn prbs_symbols(seed: u32, count: usize) -> Result<SymbolFrame> {
    let bits = generate_prbs(seed, 2 * count)?;
    crate::symbol::map_pam4(&bits)
}
