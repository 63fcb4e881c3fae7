//! Waveforms, the thresholded SDR training loss and SDR-style metrics.
//!
//! All arithmetic is carried out in `f64`; 32-bit float conversion only
//! happens at the file boundary (see [`crate::wav`]).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Reported in place of +inf when the error power is exactly zero, so that
/// metric values serialize cleanly.
pub const SDR_CAP_DB: f64 = 300.0;

/// A finite, single-channel signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    /// Validates that every sample is finite and the rate is positive.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::ZeroSampleRate);
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Internal constructor for samples produced by arithmetic on already
    /// validated waveforms.
    pub(crate) fn new_unchecked(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            (self.energy() / self.samples.len() as f64).sqrt()
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.samples.iter().all(|&x| x == 0.0)
    }

    /// Extracts `[start, start + len)` in signal coordinates, zero-padding
    /// everything that falls outside `[0, self.len())`.
    pub fn slice_padded(&self, start: i64, len: usize) -> Waveform {
        let mut out = vec![0.0; len];
        let src_len = self.samples.len() as i64;
        let copy_begin = start.max(0);
        let copy_end = (start + len as i64).min(src_len);
        if copy_begin < copy_end {
            let dst_offset = (copy_begin - start) as usize;
            let n = (copy_end - copy_begin) as usize;
            out[dst_offset..dst_offset + n]
                .copy_from_slice(&self.samples[copy_begin as usize..copy_begin as usize + n]);
        }
        Waveform::new_unchecked(out, self.sample_rate)
    }

    /// Adds `other` into this waveform starting at `offset`.
    pub(crate) fn add_at(&mut self, offset: usize, other: &[f64]) {
        for (dst, src) in self.samples[offset..offset + other.len()]
            .iter_mut()
            .zip(other)
        {
            *dst += src;
        }
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    fn check_compatible(&self, other: &Waveform) -> Result<()> {
        if self.samples.len() != other.samples.len() {
            return Err(Error::LengthMismatch {
                expected: self.samples.len(),
                actual: other.samples.len(),
            });
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::SampleRateMismatch {
                a: self.sample_rate,
                b: other.sample_rate,
            });
        }
        Ok(())
    }
}

/// Parameters of the thresholded SDR loss.
///
/// `tau` is always `10^(-sdr_max / 10)`; it is recomputed on construction and
/// cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsdrParams {
    sdr_max: f64,
    epsilon: f64,
    tau: f64,
}

impl TsdrParams {
    pub fn new(sdr_max: f64, epsilon: f64) -> Result<Self> {
        if !sdr_max.is_finite() {
            return Err(Error::InvalidConfig {
                message: "sdr_max must be finite".into(),
            });
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig {
                message: "epsilon must be positive and finite".into(),
            });
        }
        Ok(Self {
            sdr_max,
            epsilon,
            tau: 10f64.powf(-sdr_max / 10.0),
        })
    }

    pub fn sdr_max(&self) -> f64 {
        self.sdr_max
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

impl Default for TsdrParams {
    /// 20 dB soft threshold with epsilon 1e-6.
    fn default() -> Self {
        Self::new(20.0, 1e-6).expect("default params are valid")
    }
}

/// Thresholded SDR loss, in negated dB.
///
/// Computes `-10 log10((|s|^2 + eps) / (|s - s_hat|^2 + tau (|s|^2 + eps)))`.
/// The value never drops below `-sdr_max` and is defined for an all-zero
/// reference. The result is clamped at the bound to shield the fixed points
/// against last-ulp rounding of the ratio.
pub fn eps_tsdr_loss(
    reference: &Waveform,
    estimate: &Waveform,
    params: &TsdrParams,
) -> Result<f64> {
    reference.check_compatible(estimate)?;
    let signal_energy = reference.energy() + params.epsilon;
    let error_energy: f64 = reference
        .samples
        .iter()
        .zip(&estimate.samples)
        .map(|(s, e)| (s - e) * (s - e))
        .sum();
    let loss = -10.0 * (signal_energy / (error_energy + params.tau * signal_energy)).log10();
    Ok(loss.max(-params.sdr_max))
}

/// Plain energy-ratio SDR in dB: `10 log10(|s|^2 / |s - s_hat|^2)`.
///
/// Returns [`SDR_CAP_DB`] when the error power is exactly zero. The reference
/// must not be all-zero.
pub fn sdr(reference: &Waveform, estimate: &Waveform) -> Result<f64> {
    reference.check_compatible(estimate)?;
    let signal_energy = reference.energy();
    if signal_energy == 0.0 {
        return Err(Error::ZeroSignal {
            context: "SDR reference",
        });
    }
    let error_energy: f64 = reference
        .samples
        .iter()
        .zip(&estimate.samples)
        .map(|(s, e)| (s - e) * (s - e))
        .sum();
    if error_energy == 0.0 {
        return Ok(SDR_CAP_DB);
    }
    Ok(10.0 * (signal_energy / error_energy).log10())
}

/// SDR improvement of `estimate` over `unprocessed`, both against `reference`.
pub fn sdr_improvement(
    reference: &Waveform,
    unprocessed: &Waveform,
    estimate: &Waveform,
) -> Result<f64> {
    Ok(sdr(reference, estimate)? - sdr(reference, unprocessed)?)
}

/// White Gaussian noise scaled so that `10 log10(|signal|^2 / |noise|^2)`
/// equals `snr_db` exactly (the realized noise power is measured and
/// rescaled, making the SNR deterministic per seed).
pub fn scaled_white_noise<R: Rng + ?Sized>(
    signal: &Waveform,
    snr_db: f64,
    rng: &mut R,
) -> Result<Waveform> {
    let signal_energy = signal.energy();
    if signal_energy == 0.0 {
        return Err(Error::ZeroSignal {
            context: "noise SNR reference",
        });
    }
    let mut noise: Vec<f64> = (0..signal.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let raw_energy: f64 = noise.iter().map(|x| x * x).sum();
    if raw_energy == 0.0 {
        return Err(Error::ZeroSignal {
            context: "drawn noise",
        });
    }
    let scale = (signal_energy / (raw_energy * 10f64.powf(snr_db / 10.0))).sqrt();
    for x in &mut noise {
        *x *= scale;
    }
    Ok(Waveform::new_unchecked(noise, signal.sample_rate))
}

/// Returns `signal + noise` with the noise drawn at exactly `snr_db`.
pub fn add_white_noise<R: Rng + ?Sized>(
    signal: &Waveform,
    snr_db: f64,
    rng: &mut R,
) -> Result<Waveform> {
    let noise = scaled_white_noise(signal, snr_db, rng)?;
    let samples = signal
        .samples
        .iter()
        .zip(noise.samples())
        .map(|(s, n)| s + n)
        .collect();
    Ok(Waveform::new_unchecked(samples, signal.sample_rate))
}

/// Base loss closure evaluating the thresholded SDR loss with fixed params.
pub fn tsdr_base_loss(
    params: TsdrParams,
) -> impl Fn(&Waveform, &Waveform) -> Result<f64> + Copy + Send + Sync {
    move |reference, estimate| eps_tsdr_loss(reference, estimate, &params)
}

/// Base loss closure evaluating negated plain SDR.
pub fn neg_sdr_base_loss() -> impl Fn(&Waveform, &Waveform) -> Result<f64> + Copy + Send + Sync {
    |reference, estimate| Ok(-sdr(reference, estimate)?)
}
