//! Synthetic meeting generation.
//!
//! Meetings are built by sequential utterance placement: each new utterance
//! either overlaps the tail of the previous one or follows it, with the
//! overlap decision steered by a controller that drives the realized overlap
//! ratio towards a per-meeting target. Utterance audio is synthetic
//! amplitude-modulated filtered noise standing in for recorded speech, so
//! every meeting is reproducible from its config alone.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{scaled_white_noise, Waveform};
use crate::error::{Error, Result};
use crate::graph::UtteranceInterval;

/// Generation parameters; the defaults describe meetings of roughly two
/// minutes with five to eight speakers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeetingConfig {
    pub num_speakers_range: (usize, usize),
    pub overlap_ratio_range: (f64, f64),
    pub target_length_secs: f64,
    pub silence_probability: f64,
    pub speaker_gain_range_db: (f64, f64),
    pub noise_snr_range_db: (f64, f64),
    pub sample_rate: u32,
    pub rng_seed: u64,
}

impl Default for MeetingConfig {
    fn default() -> Self {
        Self {
            num_speakers_range: (5, 8),
            overlap_ratio_range: (0.2, 0.4),
            target_length_secs: 120.0,
            silence_probability: 0.1,
            speaker_gain_range_db: (0.0, 5.0),
            noise_snr_range_db: (20.0, 30.0),
            sample_rate: 8000,
            rng_seed: 0,
        }
    }
}

impl MeetingConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.num_speakers_range.0 == 0 || self.num_speakers_range.0 > self.num_speakers_range.1
        {
            problems.push("num_speakers_range must be a nonempty ordered range of positive ints");
        }
        if !(self.overlap_ratio_range.0 >= 0.0
            && self.overlap_ratio_range.0 <= self.overlap_ratio_range.1
            && self.overlap_ratio_range.1 < 1.0)
        {
            problems.push("overlap_ratio_range must be ordered within [0, 1)");
        }
        if !(self.target_length_secs > 0.0) {
            problems.push("target_length_secs must be positive");
        }
        if !(0.0..=1.0).contains(&self.silence_probability) {
            problems.push("silence_probability must lie in [0, 1]");
        }
        if self.speaker_gain_range_db.0 > self.speaker_gain_range_db.1 {
            problems.push("speaker_gain_range_db must be ordered");
        }
        if self.noise_snr_range_db.0 > self.noise_snr_range_db.1 {
            problems.push("noise_snr_range_db must be ordered");
        }
        if self.sample_rate == 0 {
            problems.push("sample_rate must be positive");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig {
                message: problems.join("; "),
            })
        }
    }
}

/// One placed utterance with its scaled audio (support-length, not padded).
#[derive(Debug, Clone, PartialEq)]
pub struct MeetingUtterance {
    pub interval: UtteranceInterval,
    /// Gain-scaled samples covering exactly `[interval.start, interval.end)`.
    pub waveform: Waveform,
    pub gain_db: f64,
    pub synth_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeakerInfo {
    pub id: usize,
    pub gain_db: f64,
}

/// A simulated meeting: mixture, ground-truth parts, and the generating
/// config. `mixture` always equals the sum of all scaled utterances plus
/// `noise`, sample-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Meeting {
    pub mixture: Waveform,
    pub noise: Waveform,
    pub utterances: Vec<MeetingUtterance>,
    pub speakers: Vec<SpeakerInfo>,
    pub target_overlap_ratio: f64,
    pub realized_overlap_ratio: f64,
    pub noise_snr_db: f64,
    pub config: MeetingConfig,
}

impl Meeting {
    pub fn sample_rate(&self) -> u32 {
        self.mixture.sample_rate()
    }

    pub fn num_samples(&self) -> usize {
        self.mixture.len()
    }

    pub fn num_speakers(&self) -> usize {
        self.speakers.len()
    }

    pub fn intervals(&self) -> Vec<UtteranceInterval> {
        self.utterances.iter().map(|u| u.interval).collect()
    }

    /// Mixture with the stored noise removed.
    pub fn clean_mixture(&self) -> Waveform {
        let samples = self
            .mixture
            .samples()
            .iter()
            .zip(self.noise.samples())
            .map(|(m, n)| m - n)
            .collect();
        Waveform::new_unchecked(samples, self.sample_rate())
    }
}

const MIN_UTTERANCE_SECS: f64 = 2.0;
const MAX_UTTERANCE_SECS: f64 = 10.0;
const MIN_GAP_SECS: f64 = 0.1;
const MAX_GAP_SECS: f64 = 2.0;
const MAX_ATTEMPTS: usize = 100;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

pub(crate) fn derive_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ salt.wrapping_mul(0x9E3779B97F4A7C15))
}

/// Synthetic utterance audio: amplitude-modulated lowpass-filtered noise,
/// normalized to unit RMS. Deterministic for a given rng state.
pub fn synth_utterance<R: Rng + ?Sized>(
    rng: &mut R,
    duration_samples: usize,
    sample_rate: u32,
) -> Result<Waveform> {
    if (duration_samples as f64) < 0.1 * sample_rate as f64 {
        return Err(Error::UtteranceTooShort {
            samples: duration_samples,
            sample_rate,
        });
    }
    let fs = sample_rate as f64;
    // One-pole lowpass with a per-utterance cutoff keeps the spectrum
    // speech-shaped rather than white.
    let cutoff_hz = rng.gen_range(300.0..=1500.0);
    let pole = (-2.0 * std::f64::consts::PI * cutoff_hz / fs).exp();
    // Two incommensurate modulators give a syllable-like nonstationary
    // envelope.
    let mod_a_hz = rng.gen_range(1.5..=4.0);
    let mod_b_hz = rng.gen_range(0.3..=0.9);
    let phase_a = rng.gen_range(0.0..std::f64::consts::TAU);
    let phase_b = rng.gen_range(0.0..std::f64::consts::TAU);

    let mut samples = Vec::with_capacity(duration_samples);
    let mut state = 0.0;
    for n in 0..duration_samples {
        let t = n as f64 / fs;
        let white: f64 = rng.gen_range(-1.0..=1.0);
        state = pole * state + (1.0 - pole) * white;
        let env_a = 0.2 + 0.8 * 0.5 * (1.0 + (std::f64::consts::TAU * mod_a_hz * t + phase_a).sin());
        let env_b = 0.5 + 0.5 * 0.5 * (1.0 + (std::f64::consts::TAU * mod_b_hz * t + phase_b).sin());
        samples.push(state * env_a * env_b);
    }
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / duration_samples as f64).sqrt();
    for x in &mut samples {
        *x /= rms;
    }
    Ok(Waveform::new_unchecked(samples, sample_rate))
}

/// Fraction of speech-active time during which at least two utterances are
/// simultaneously active.
pub fn overlap_ratio(utterances: &[UtteranceInterval]) -> f64 {
    let mut events: Vec<(usize, i32)> = Vec::with_capacity(utterances.len() * 2);
    for utt in utterances {
        events.push((utt.start, 1));
        events.push((utt.end, -1));
    }
    events.sort_unstable_by_key(|&(pos, delta)| (pos, delta));
    let mut active = 0i64;
    let mut last_pos = 0usize;
    let mut active_samples = 0usize;
    let mut overlapped_samples = 0usize;
    for (pos, delta) in events {
        let span = pos - last_pos;
        if active >= 1 {
            active_samples += span;
        }
        if active >= 2 {
            overlapped_samples += span;
        }
        active += delta as i64;
        last_pos = pos;
    }
    if active_samples == 0 {
        0.0
    } else {
        overlapped_samples as f64 / active_samples as f64
    }
}

struct PlacedUtterance {
    speaker: usize,
    start: usize,
    end: usize,
}

/// One attempt at the sequential placement; returns intervals or a short
/// diagnostic of the violated tolerance.
fn place_utterances(
    config: &MeetingConfig,
    rng: &mut ChaCha8Rng,
    num_speakers: usize,
    target_ratio: f64,
) -> std::result::Result<Vec<PlacedUtterance>, String> {
    let fs = config.sample_rate as f64;
    let target_samples = (config.target_length_secs * fs).round() as usize;
    let min_utt = (MIN_UTTERANCE_SECS * fs).round() as usize;

    // Speech budget per speaker, sized so that placing everything lands near
    // the target length once the target overlap is realized.
    let budget_total = 0.97 * target_samples as f64 * (1.0 + target_ratio);
    let mut queues: Vec<Vec<usize>> = Vec::with_capacity(num_speakers);
    for _ in 0..num_speakers {
        let budget = (budget_total / num_speakers as f64 * rng.gen_range(0.85..=1.15)) as usize;
        let mut durations = Vec::new();
        let mut remaining = budget.max(min_utt);
        let max_utt = (MAX_UTTERANCE_SECS * fs).round() as usize;
        while remaining > max_utt {
            let mut d = (rng.gen_range(MIN_UTTERANCE_SECS..=MAX_UTTERANCE_SECS) * fs) as usize;
            d = d.min(remaining - min_utt);
            durations.push(d);
            remaining -= d;
        }
        durations.push(remaining.max(min_utt));
        queues.push(durations);
    }

    let mut placed: Vec<PlacedUtterance> = Vec::new();
    let mut sum_dur = 0usize;
    let mut sum_overlap = 0usize;
    let mut prev_max_end = 0usize;

    while queues.iter().any(|q| !q.is_empty()) {
        let eligible: Vec<usize> = (0..num_speakers).filter(|&s| !queues[s].is_empty()).collect();
        let ratio_now = if sum_dur > sum_overlap {
            sum_overlap as f64 / (sum_dur - sum_overlap) as f64
        } else {
            0.0
        };
        let mut placed_with_overlap = false;
        if let Some(tail) = placed.last() {
            if ratio_now < target_ratio {
                let partners: Vec<usize> = eligible
                    .iter()
                    .copied()
                    .filter(|&s| s != tail.speaker)
                    .collect();
                if !partners.is_empty() {
                    let speaker = partners[rng.gen_range(0..partners.len())];
                    let duration = queues[speaker].pop().expect("nonempty queue");
                    // Overlap only the tail: onset may not reach back into
                    // any earlier utterance, and must not push the realized
                    // ratio past the target.
                    let avail = tail.end - tail.start.max(prev_max_end);
                    let no_overshoot = (target_ratio
                        * (sum_dur + duration - sum_overlap) as f64
                        - sum_overlap as f64)
                        / (1.0 + target_ratio);
                    let cap = avail.min(duration).min(no_overshoot.max(0.0) as usize);
                    if cap > 0 {
                        let overlap = (cap as f64 * rng.gen_range(0.5..=1.0)) as usize;
                        let start = tail.end - overlap;
                        let end = start + duration;
                        prev_max_end = tail.end;
                        sum_dur += duration;
                        sum_overlap += overlap;
                        placed.push(PlacedUtterance { speaker, start, end });
                        placed_with_overlap = true;
                    } else {
                        queues[speaker].push(duration);
                    }
                }
            }
        }
        if !placed_with_overlap {
            let speaker = eligible[rng.gen_range(0..eligible.len())];
            let duration = queues[speaker].pop().expect("nonempty queue");
            let gap = if placed.is_empty() {
                0
            } else if rng.gen_bool(config.silence_probability) {
                (rng.gen_range(MIN_GAP_SECS..=MAX_GAP_SECS) * fs) as usize
            } else {
                0
            };
            let start = placed.last().map_or(0, |tail| tail.end) + gap;
            let end = start + duration;
            if let Some(tail) = placed.last() {
                prev_max_end = tail.end;
            }
            sum_dur += duration;
            placed.push(PlacedUtterance { speaker, start, end });
        }
    }

    let total = placed.last().map_or(0, |u| u.end);
    let intervals: Vec<UtteranceInterval> = placed
        .iter()
        .enumerate()
        .map(|(id, u)| UtteranceInterval::new(id, u.speaker, u.start, u.end).expect("valid"))
        .collect();
    let realized = overlap_ratio(&intervals);

    if (realized - target_ratio).abs() > 0.05 {
        return Err(format!(
            "overlap ratio {realized:.3} missed target {target_ratio:.3}"
        ));
    }
    let length_error = (total as f64 - target_samples as f64).abs() / target_samples as f64;
    if length_error > 0.10 {
        return Err(format!(
            "length {}s missed target {}s",
            total as f64 / fs,
            config.target_length_secs
        ));
    }
    let mut per_speaker = vec![0usize; num_speakers];
    for u in &placed {
        per_speaker[u.speaker] += u.end - u.start;
    }
    let mean = per_speaker.iter().sum::<usize>() as f64 / num_speakers as f64;
    for (speaker, &samples) in per_speaker.iter().enumerate() {
        if (samples as f64 - mean).abs() > 0.3 * mean {
            return Err(format!(
                "speaker {speaker} speech time {:.1}s deviates more than 30% from mean {:.1}s",
                samples as f64 / fs,
                mean / fs
            ));
        }
    }
    Ok(placed)
}

/// Generates one meeting. Pure function of the config, including its seed;
/// placement attempts that miss a tolerance are retried with a derived seed
/// up to 100 times before erroring.
pub fn simulate_meeting(config: &MeetingConfig) -> Result<Meeting> {
    config.validate()?;
    let mut last_diag = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, attempt as u64));
        let num_speakers =
            rng.gen_range(config.num_speakers_range.0..=config.num_speakers_range.1);
        let target_ratio =
            rng.gen_range(config.overlap_ratio_range.0..=config.overlap_ratio_range.1);
        match place_utterances(config, &mut rng, num_speakers, target_ratio) {
            Ok(placed) => {
                return assemble_meeting(config, rng, num_speakers, target_ratio, placed)
            }
            Err(diag) => last_diag = diag,
        }
    }
    Err(Error::SimulationFailed {
        attempts: MAX_ATTEMPTS,
        diagnostics: last_diag,
    })
}

fn assemble_meeting(
    config: &MeetingConfig,
    mut rng: ChaCha8Rng,
    num_speakers: usize,
    target_ratio: f64,
    placed: Vec<PlacedUtterance>,
) -> Result<Meeting> {
    let sample_rate = config.sample_rate;
    let total = placed.last().map_or(0, |u| u.end);

    let speakers: Vec<SpeakerInfo> = (0..num_speakers)
        .map(|id| SpeakerInfo {
            id,
            gain_db: rng
                .gen_range(config.speaker_gain_range_db.0..=config.speaker_gain_range_db.1),
        })
        .collect();

    let mut clean = Waveform::zeros(total, sample_rate);
    let mut utterances = Vec::with_capacity(placed.len());
    for (id, u) in placed.iter().enumerate() {
        let synth_seed = rng.gen::<u64>();
        let mut synth_rng = ChaCha8Rng::seed_from_u64(synth_seed);
        let raw = synth_utterance(&mut synth_rng, u.end - u.start, sample_rate)?;
        let gain_db = speakers[u.speaker].gain_db;
        let gain = 10f64.powf(gain_db / 20.0);
        let scaled: Vec<f64> = raw.samples().iter().map(|x| x * gain).collect();
        clean.add_at(u.start, &scaled);
        utterances.push(MeetingUtterance {
            interval: UtteranceInterval::new(id, u.speaker, u.start, u.end)?,
            waveform: Waveform::new_unchecked(scaled, sample_rate),
            gain_db,
            synth_seed,
        });
    }

    let noise_snr_db =
        rng.gen_range(config.noise_snr_range_db.0..=config.noise_snr_range_db.1);
    let noise = scaled_white_noise(&clean, noise_snr_db, &mut rng)?;
    let mixture = {
        let samples = clean
            .samples()
            .iter()
            .zip(noise.samples())
            .map(|(c, n)| c + n)
            .collect();
        Waveform::new_unchecked(samples, sample_rate)
    };

    let intervals: Vec<UtteranceInterval> =
        utterances.iter().map(|u| u.interval).collect();
    Ok(Meeting {
        mixture,
        noise,
        utterances,
        speakers,
        target_overlap_ratio: target_ratio,
        realized_overlap_ratio: overlap_ratio(&intervals),
        noise_snr_db,
        config: config.clone(),
    })
}

/// Distribution of the number of distinct active speakers per segment
/// window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSpeakerHistogram {
    /// speakers-active -> number of windows.
    pub counts: BTreeMap<usize, usize>,
    pub total_segments: usize,
}

impl SegmentSpeakerHistogram {
    /// Fraction of windows whose speaker count stays within `num_channels`.
    pub fn fraction_with_at_most(&self, num_channels: usize) -> f64 {
        if self.total_segments == 0 {
            return 1.0;
        }
        let within: usize = self
            .counts
            .iter()
            .filter(|(&count, _)| count <= num_channels)
            .map(|(_, &n)| n)
            .sum();
        within as f64 / self.total_segments as f64
    }

    pub fn fraction_with_more_than(&self, num_channels: usize) -> f64 {
        1.0 - self.fraction_with_at_most(num_channels)
    }
}

/// Histogram over sliding windows of `segment_length_secs`, shifted by
/// `shift_secs`, counting distinct speakers with any activity inside each
/// window.
pub fn segment_speaker_histogram(
    meeting: &Meeting,
    segment_length_secs: f64,
    shift_secs: f64,
) -> Result<SegmentSpeakerHistogram> {
    speaker_histogram_from_intervals(
        &meeting.intervals(),
        meeting.num_samples(),
        meeting.sample_rate(),
        segment_length_secs,
        shift_secs,
    )
}

pub fn speaker_histogram_from_intervals(
    utterances: &[UtteranceInterval],
    total_samples: usize,
    sample_rate: u32,
    segment_length_secs: f64,
    shift_secs: f64,
) -> Result<SegmentSpeakerHistogram> {
    if !(shift_secs > 0.0) || segment_length_secs < shift_secs {
        return Err(Error::InvalidWindow {
            message: format!(
                "need segment_length >= shift > 0, got length {segment_length_secs}, \
                 shift {shift_secs}"
            ),
        });
    }
    let fs = sample_rate as f64;
    let window = (segment_length_secs * fs).round() as usize;
    let shift = (shift_secs * fs).round() as usize;
    if window == 0 || shift == 0 {
        return Err(Error::InvalidWindow {
            message: "window and shift must be at least one sample".into(),
        });
    }
    let mut counts = BTreeMap::new();
    let mut total_segments = 0;
    let mut start = 0usize;
    while start < total_samples {
        let end = (start + window).min(total_samples);
        let mut speakers: Vec<usize> = utterances
            .iter()
            .filter(|u| u.start < end && u.end > start)
            .map(|u| u.speaker)
            .collect();
        speakers.sort_unstable();
        speakers.dedup();
        *counts.entry(speakers.len()).or_insert(0) += 1;
        total_segments += 1;
        start += shift;
    }
    Ok(SegmentSpeakerHistogram {
        counts,
        total_segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::max_concurrency;

    fn interval(id: usize, speaker: usize, start: usize, end: usize) -> UtteranceInterval {
        UtteranceInterval::new(id, speaker, start, end).unwrap()
    }

    #[test]
    fn synth_is_deterministic_per_seed() {
        let a = synth_utterance(&mut ChaCha8Rng::seed_from_u64(42), 8000, 8000).unwrap();
        let b = synth_utterance(&mut ChaCha8Rng::seed_from_u64(42), 8000, 8000).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn synth_has_unit_rms() {
        for seed in 0..20 {
            let w = synth_utterance(&mut ChaCha8Rng::seed_from_u64(seed), 12000, 8000).unwrap();
            assert!((w.rms() - 1.0).abs() < 0.01, "rms {}", w.rms());
        }
    }

    #[test]
    fn synth_rejects_too_short() {
        let err = synth_utterance(&mut ChaCha8Rng::seed_from_u64(0), 700, 8000);
        assert!(matches!(err, Err(Error::UtteranceTooShort { .. })));
    }

    #[test]
    fn overlap_ratio_examples() {
        assert_eq!(overlap_ratio(&[interval(0, 0, 0, 10), interval(1, 1, 10, 20)]), 0.0);
        assert_eq!(overlap_ratio(&[interval(0, 0, 0, 10), interval(1, 1, 0, 10)]), 1.0);
        let r = overlap_ratio(&[interval(0, 0, 0, 10), interval(1, 1, 5, 15)]);
        assert!((r - 5.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn meetings_are_deterministic_per_seed() {
        let config = MeetingConfig {
            target_length_secs: 30.0,
            rng_seed: 7,
            ..MeetingConfig::default()
        };
        let a = simulate_meeting(&config).unwrap();
        let b = simulate_meeting(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn meetings_satisfy_construction_invariants() {
        for seed in 0..10 {
            let config = MeetingConfig {
                target_length_secs: 40.0,
                rng_seed: seed,
                ..MeetingConfig::default()
            };
            let meeting = simulate_meeting(&config).unwrap();
            let intervals = meeting.intervals();

            // No speaker overlaps themselves.
            for a in &intervals {
                for b in &intervals {
                    if a.id != b.id && a.speaker == b.speaker {
                        assert!(!a.overlaps(b), "speaker {} self-overlap", a.speaker);
                    }
                }
            }
            assert!(max_concurrency(&intervals) <= meeting.num_speakers());
            assert!(
                (meeting.realized_overlap_ratio - meeting.target_overlap_ratio).abs() <= 0.05
            );
            let length_secs = meeting.mixture.duration_secs();
            assert!((length_secs - 40.0).abs() <= 4.0, "length {length_secs}");

            // Mixture decomposes into stored parts.
            let mut reconstructed = meeting.noise.samples().to_vec();
            for utt in &meeting.utterances {
                for (i, s) in utt.waveform.samples().iter().enumerate() {
                    reconstructed[utt.interval.start + i] += s;
                }
            }
            for (a, b) in reconstructed.iter().zip(meeting.mixture.samples()) {
                assert!((a - b).abs() < 1e-9);
            }

            // One gain per speaker.
            for utt in &meeting.utterances {
                assert_eq!(utt.gain_db, meeting.speakers[utt.interval.speaker].gain_db);
            }

            // Speaker activity balance.
            let mut per_speaker = vec![0usize; meeting.num_speakers()];
            for utt in &meeting.utterances {
                per_speaker[utt.interval.speaker] += utt.interval.duration_samples();
            }
            let mean = per_speaker.iter().sum::<usize>() as f64 / per_speaker.len() as f64;
            for &samples in &per_speaker {
                assert!((samples as f64 - mean).abs() <= 0.3 * mean);
            }
        }
    }

    #[test]
    fn histogram_whole_meeting_window_counts_all_speakers() {
        let config = MeetingConfig {
            target_length_secs: 30.0,
            rng_seed: 3,
            ..MeetingConfig::default()
        };
        let meeting = simulate_meeting(&config).unwrap();
        let secs = meeting.mixture.duration_secs().ceil();
        let histogram = segment_speaker_histogram(&meeting, secs, secs).unwrap();
        assert_eq!(histogram.total_segments, 1);
        assert_eq!(
            histogram.counts,
            BTreeMap::from([(meeting.num_speakers(), 1)])
        );
    }

    #[test]
    fn histogram_short_windows_never_span_separated_speakers() {
        // Two utterances of different speakers separated by a 2 s gap;
        // 1 s windows can never contain both.
        let intervals = [interval(0, 0, 0, 8000), interval(1, 1, 24000, 32000)];
        let histogram =
            speaker_histogram_from_intervals(&intervals, 32000, 8000, 1.0, 1.0).unwrap();
        assert_eq!(histogram.total_segments, 4);
        assert!(histogram.counts.keys().all(|&c| c <= 1));
    }

    #[test]
    fn histogram_rejects_bad_windows() {
        let intervals = [interval(0, 0, 0, 100)];
        assert!(matches!(
            speaker_histogram_from_intervals(&intervals, 100, 8000, 1.0, 2.0),
            Err(Error::InvalidWindow { .. })
        ));
        assert!(matches!(
            speaker_histogram_from_intervals(&intervals, 100, 8000, 0.0, 0.0),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn histogram_fractions_sum_consistently() {
        let config = MeetingConfig {
            target_length_secs: 30.0,
            rng_seed: 11,
            ..MeetingConfig::default()
        };
        let meeting = simulate_meeting(&config).unwrap();
        let histogram = segment_speaker_histogram(&meeting, 4.0, 4.0).unwrap();
        let total: usize = histogram.counts.values().sum();
        assert_eq!(total, histogram.total_segments);
        let at_most_2 = histogram.fraction_with_at_most(2);
        let more_than_2 = histogram.fraction_with_more_than(2);
        assert!((at_most_2 + more_than_2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = MeetingConfig {
            num_speakers_range: (8, 5),
            ..MeetingConfig::default()
        };
        assert!(matches!(
            simulate_meeting(&config),
            Err(Error::InvalidConfig { .. })
        ));
    }
}
