//! Segment-wise continuous separation: planning, separating and stitching.
//!
//! A segment consists of history, current and future context; consecutive
//! segments shift by the current-context length and overlap by the history
//! plus future lengths. Each segment is separated independently, then
//! adjacent segments are aligned channel-wise by minimizing squared
//! differences over their geometric overlap, and the current-context
//! portions are concatenated into continuous streams.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{add_white_noise, Waveform};
use crate::error::{Error, Result};
use crate::graph::{enumerate_colorings, max_concurrency, Coloring};
use crate::pit::EstimateStreams;
use crate::sim::{derive_seed, Meeting};

/// History / current / future context lengths in seconds. All three must
/// convert to whole sample counts at the plan's sample rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub history_secs: f64,
    pub current_secs: f64,
    pub future_secs: f64,
    pub sample_rate: u32,
}

impl SegmentPlan {
    pub fn new(
        history_secs: f64,
        current_secs: f64,
        future_secs: f64,
        sample_rate: u32,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidPlan {
                message: "sample rate must be positive".into(),
            });
        }
        if !(current_secs > 0.0) || history_secs < 0.0 || future_secs < 0.0 {
            return Err(Error::InvalidPlan {
                message: format!(
                    "need current > 0 and history, future >= 0; \
                     got ({history_secs}, {current_secs}, {future_secs})"
                ),
            });
        }
        for (name, secs) in [
            ("history", history_secs),
            ("current", current_secs),
            ("future", future_secs),
        ] {
            let samples = secs * sample_rate as f64;
            if (samples - samples.round()).abs() > 1e-6 {
                return Err(Error::InvalidPlan {
                    message: format!(
                        "{name} context of {secs} s is not a whole number of samples \
                         at {sample_rate} Hz"
                    ),
                });
            }
        }
        Ok(Self {
            history_secs,
            current_secs,
            future_secs,
            sample_rate,
        })
    }

    pub fn history_samples(&self) -> usize {
        (self.history_secs * self.sample_rate as f64).round() as usize
    }

    pub fn current_samples(&self) -> usize {
        (self.current_secs * self.sample_rate as f64).round() as usize
    }

    pub fn future_samples(&self) -> usize {
        (self.future_secs * self.sample_rate as f64).round() as usize
    }

    /// Full segment length: history + current + future.
    pub fn segment_samples(&self) -> usize {
        self.history_samples() + self.current_samples() + self.future_samples()
    }

    /// Number of samples consecutive segments overlap by.
    pub fn overlap_samples(&self) -> usize {
        self.history_samples() + self.future_samples()
    }
}

/// One planned segment in absolute sample coordinates. `start` may be
/// negative and `end` may exceed the signal length; those parts are
/// zero-padded at separation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedSegment {
    pub index: usize,
    pub start: i64,
    pub end: i64,
}

impl PlannedSegment {
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Absolute range reconstructed from this segment (its current context).
    pub fn current_range(&self, plan: &SegmentPlan, total_samples: usize) -> (usize, usize) {
        let begin = (self.start + plan.history_samples() as i64).max(0) as usize;
        let end = (begin + plan.current_samples()).min(total_samples);
        (begin, end.max(begin))
    }
}

/// Plans segment windows `[i*Tc - Th, i*Tc + Tc + Tf)` until every sample is
/// covered by some current-context window.
pub fn plan_segments(total_samples: usize, plan: &SegmentPlan) -> Vec<PlannedSegment> {
    let shift = plan.current_samples();
    let history = plan.history_samples() as i64;
    let length = plan.segment_samples() as i64;
    let num_segments = total_samples.div_ceil(shift);
    (0..num_segments)
        .map(|index| {
            let start = (index * shift) as i64 - history;
            PlannedSegment {
                index,
                start,
                end: start + length,
            }
        })
        .collect()
}

/// Separator outputs for one planned segment.
#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub index: usize,
    /// Absolute sample position of the first stream sample.
    pub start: i64,
    /// Zero-padding before sample 0 of the mixture.
    pub pad_front: usize,
    /// Zero-padding past the end of the mixture.
    pub pad_back: usize,
    pub streams: EstimateStreams,
}

/// A segment-level source separator with a fixed number of output channels.
///
/// Implementations must return streams of exactly the input length. They are
/// invoked independently per segment and may be called concurrently unless
/// [`Separator::concurrency_safe`] returns false.
pub trait Separator {
    fn num_channels(&self) -> usize;

    fn concurrency_safe(&self) -> bool {
        true
    }

    fn separate(&self, segment: &Waveform, absolute_start: i64) -> Result<EstimateStreams>;
}

/// Duplicates the mixture onto every output channel.
pub struct IdentitySeparator {
    pub num_channels: usize,
}

impl Separator for IdentitySeparator {
    fn num_channels(&self) -> usize {
        self.num_channels
    }

    fn separate(&self, segment: &Waveform, _absolute_start: i64) -> Result<EstimateStreams> {
        EstimateStreams::new(vec![segment.clone(); self.num_channels])
    }
}

fn separate_one<S: Separator + ?Sized>(
    mixture: &Waveform,
    segment: &PlannedSegment,
    separator: &S,
) -> Result<SegmentOutput> {
    let slice = mixture.slice_padded(segment.start, segment.len());
    let streams = separator.separate(&slice, segment.start)?;
    if streams.num_channels() != separator.num_channels() {
        return Err(Error::ChannelCountMismatch {
            expected: separator.num_channels(),
            actual: streams.num_channels(),
        });
    }
    if streams.len() != segment.len() {
        return Err(Error::SeparatorLength {
            expected: segment.len(),
            actual: streams.len(),
        });
    }
    Ok(SegmentOutput {
        index: segment.index,
        start: segment.start,
        pad_front: (-segment.start).max(0) as usize,
        pad_back: (segment.end - mixture.len() as i64).max(0) as usize,
        streams,
    })
}

/// Runs the separator over every planned segment. Segments are independent;
/// they are processed on multiple threads when the separator allows it.
pub fn separate_segments<S: Separator + Sync + ?Sized>(
    mixture: &Waveform,
    plan: &SegmentPlan,
    separator: &S,
) -> Result<Vec<SegmentOutput>> {
    let segments = plan_segments(mixture.len(), plan);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    if !separator.concurrency_safe() || threads == 1 || segments.len() <= 1 {
        return segments
            .iter()
            .map(|segment| separate_one(mixture, segment, separator))
            .collect();
    }
    let chunk_size = segments.len().div_ceil(threads);
    let mut results: Vec<Option<Result<SegmentOutput>>> = Vec::new();
    results.resize_with(segments.len(), || None);
    std::thread::scope(|scope| {
        for (segment_chunk, result_chunk) in segments
            .chunks(chunk_size)
            .zip(results.chunks_mut(chunk_size))
        {
            scope.spawn(move || {
                for (segment, slot) in segment_chunk.iter().zip(result_chunk.iter_mut()) {
                    *slot = Some(separate_one(mixture, segment, separator));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|slot| slot.expect("every segment was processed"))
        .collect()
}

/// Channel alignment chosen at one segment boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryAlignment {
    /// Index of the right-hand segment of the boundary.
    pub segment_index: usize,
    /// `permutation[c]` is the right-segment channel matched to left-segment
    /// channel `c`.
    pub permutation: Vec<usize>,
    pub best_cost: f64,
    /// Cost of the best non-chosen permutation; `None` for single-channel
    /// streams.
    pub runner_up_cost: Option<f64>,
    /// Number of samples compared.
    pub overlap_len: usize,
}

/// Per-boundary alignment decisions of one stitch run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StitchTrace {
    pub boundaries: Vec<BoundaryAlignment>,
}

impl StitchTrace {
    /// Smallest gap between chosen and runner-up alignment cost, if any
    /// boundary had a competitor.
    pub fn min_gap(&self) -> Option<f64> {
        self.boundaries
            .iter()
            .filter_map(|b| b.runner_up_cost.map(|r| r - b.best_cost))
            .fold(None, |acc, gap| {
                Some(acc.map_or(gap, |a: f64| a.min(gap)))
            })
    }
}

fn validate_outputs(
    outputs: &[SegmentOutput],
    plan: &SegmentPlan,
    total_samples: usize,
) -> Result<usize> {
    let expected = plan_segments(total_samples, plan);
    if outputs.len() != expected.len() {
        return Err(Error::NonConsecutiveSegments {
            expected: expected.len(),
            actual: outputs.len(),
        });
    }
    let num_channels = outputs
        .first()
        .map(|o| o.streams.num_channels())
        .unwrap_or(0);
    for (output, planned) in outputs.iter().zip(&expected) {
        if output.index != planned.index || output.start != planned.start {
            return Err(Error::NonConsecutiveSegments {
                expected: planned.index,
                actual: output.index,
            });
        }
        if output.streams.num_channels() != num_channels {
            return Err(Error::ChannelCountMismatch {
                expected: num_channels,
                actual: output.streams.num_channels(),
            });
        }
        if output.streams.len() != planned.len() {
            return Err(Error::SeparatorLength {
                expected: planned.len(),
                actual: output.streams.len(),
            });
        }
    }
    Ok(num_channels)
}

/// Stitches per-segment streams into continuous streams of `total_samples`.
///
/// At each boundary the right segment's channels are matched to the left
/// segment's by the permutation minimizing the summed squared differences
/// over the geometric overlap (clipped to the signal extent); ties prefer
/// the identity, then lexicographic order. Permutations compose left to
/// right, segment 0 defines the emitted channel order, and only
/// current-context portions are copied out.
pub fn stitch(
    outputs: &[SegmentOutput],
    plan: &SegmentPlan,
    total_samples: usize,
) -> Result<EstimateStreams> {
    stitch_with_trace(outputs, plan, total_samples).map(|(streams, _)| streams)
}

pub fn stitch_with_trace(
    outputs: &[SegmentOutput],
    plan: &SegmentPlan,
    total_samples: usize,
) -> Result<(EstimateStreams, StitchTrace)> {
    let num_channels = validate_outputs(outputs, plan, total_samples)?;
    let sample_rate = plan.sample_rate;
    let mut continuous = vec![vec![0.0f64; total_samples]; num_channels];
    let mut trace = StitchTrace::default();

    // channel_of[g] is the raw channel of the current segment that feeds
    // global channel g.
    let mut channel_of: Vec<usize> = (0..num_channels).collect();
    for (position, output) in outputs.iter().enumerate() {
        if position > 0 {
            let left = &outputs[position - 1];
            let alignment = align_boundary(left, output, plan, total_samples)?;
            channel_of = channel_of
                .iter()
                .map(|&c| alignment.permutation[c])
                .collect();
            trace.boundaries.push(alignment);
        }
        // Copy the current-context portion under the composed permutation.
        let planned = PlannedSegment {
            index: output.index,
            start: output.start,
            end: output.start + output.streams.len() as i64,
        };
        let (abs_begin, abs_end) = planned.current_range(plan, total_samples);
        if abs_begin >= abs_end {
            continue;
        }
        let local_begin = (abs_begin as i64 - output.start) as usize;
        let span = abs_end - abs_begin;
        for (global, &raw) in channel_of.iter().enumerate() {
            let src = &output.streams.channel(raw).samples()[local_begin..local_begin + span];
            continuous[global][abs_begin..abs_end].copy_from_slice(src);
        }
    }

    let streams = EstimateStreams::new(
        continuous
            .into_iter()
            .map(|samples| Waveform::new_unchecked(samples, sample_rate))
            .collect(),
    )?;
    Ok((streams, trace))
}

/// Cost-minimal channel matching between two consecutive segments over their
/// geometric overlap region.
fn align_boundary(
    left: &SegmentOutput,
    right: &SegmentOutput,
    plan: &SegmentPlan,
    total_samples: usize,
) -> Result<BoundaryAlignment> {
    let num_channels = left.streams.num_channels();
    // Overlap region: [right.start, left.end) clipped to the signal.
    let abs_begin = right.start.max(0);
    let abs_end = (left.start + plan.segment_samples() as i64).min(total_samples as i64);
    let overlap_len = (abs_end - abs_begin).max(0) as usize;

    let mut pair_cost = vec![vec![0.0f64; num_channels]; num_channels];
    if overlap_len > 0 {
        let left_offset = (abs_begin - left.start) as usize;
        let right_offset = (abs_begin - right.start) as usize;
        for (c, row) in pair_cost.iter_mut().enumerate() {
            let a = &left.streams.channel(c).samples()[left_offset..left_offset + overlap_len];
            for (d, cost) in row.iter_mut().enumerate() {
                let b = &right.streams.channel(d).samples()
                    [right_offset..right_offset + overlap_len];
                *cost = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>();
            }
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut runner_up: Option<f64> = None;
    // Lexicographic enumeration starts at the identity, so strictly-smaller
    // updates implement the identity-then-lexicographic tie break.
    for perm in (0..num_channels).permutations(num_channels) {
        let cost: f64 = perm.iter().enumerate().map(|(c, &d)| pair_cost[c][d]).sum();
        match &best {
            Some((best_cost, _)) if cost >= *best_cost => {
                runner_up = Some(runner_up.map_or(cost, |r: f64| r.min(cost)));
            }
            _ => {
                if let Some((prev_cost, _)) = best.take() {
                    runner_up = Some(runner_up.map_or(prev_cost, |r: f64| r.min(prev_cost)));
                }
                best = Some((cost, perm));
            }
        }
    }
    let (best_cost, permutation) = best.expect("at least one permutation");
    Ok(BoundaryAlignment {
        segment_index: right.index,
        permutation,
        best_cost,
        runner_up_cost: runner_up,
        overlap_len,
    })
}

/// How a planted coloring is chosen when building oracle streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoringPolicy {
    /// First proper coloring in enumeration order.
    FirstEnumerated,
    Explicit(Coloring),
}

/// Optional corruptions applied per segment by the oracle separator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    /// Shuffle output channels with a permutation drawn per segment from
    /// this seed.
    pub shuffle_seed: Option<u64>,
    /// Add white noise per channel at this SNR (channels that are all-zero
    /// in a segment are passed through unchanged).
    pub noise_snr_db: Option<f64>,
}

const NOISE_SALT: u64 = 0x6f72_61_63_6c_65;

/// Evaluation stand-in for a trained separator: emits segment slices of
/// ground-truth continuous streams, optionally shuffled and corrupted per
/// segment.
pub struct OracleSeparator {
    streams: Vec<Waveform>,
    corruption: Corruption,
}

impl OracleSeparator {
    /// Wraps already-built continuous streams.
    pub fn from_streams(streams: EstimateStreams, corruption: Corruption) -> Self {
        Self {
            streams: streams.into_channels(),
            corruption,
        }
    }

    /// Builds the planted continuous streams of a meeting: each utterance's
    /// scaled waveform is summed onto the channel chosen by the policy's
    /// coloring of the meeting-wide overlap graph.
    pub fn for_meeting(
        meeting: &Meeting,
        num_channels: usize,
        policy: ColoringPolicy,
        corruption: Corruption,
    ) -> Result<Self> {
        let intervals = meeting.intervals();
        let graph = crate::graph::build_overlap_graph(&intervals)?;
        let coloring = match policy {
            ColoringPolicy::FirstEnumerated => enumerate_colorings(&graph, num_channels)
                .next()
                .ok_or_else(|| Error::Infeasible {
                    concurrency: max_concurrency(&intervals),
                    channels: num_channels,
                })?,
            ColoringPolicy::Explicit(coloring) => {
                coloring.check_proper(&graph, num_channels)?;
                coloring
            }
        };
        let mut streams: Vec<Waveform> = (0..num_channels)
            .map(|_| Waveform::zeros(meeting.num_samples(), meeting.sample_rate()))
            .collect();
        for (utterance, &channel) in meeting.utterances.iter().zip(&coloring.assignment) {
            streams[channel].add_at(utterance.interval.start, utterance.waveform.samples());
        }
        Ok(Self {
            streams,
            corruption,
        })
    }

    /// The clean continuous streams the oracle slices from.
    pub fn continuous_streams(&self) -> Result<EstimateStreams> {
        EstimateStreams::new(self.streams.clone())
    }
}

impl Separator for OracleSeparator {
    fn num_channels(&self) -> usize {
        self.streams.len()
    }

    fn separate(&self, segment: &Waveform, absolute_start: i64) -> Result<EstimateStreams> {
        if segment.sample_rate() != self.streams[0].sample_rate() {
            return Err(Error::SampleRateMismatch {
                a: self.streams[0].sample_rate(),
                b: segment.sample_rate(),
            });
        }
        let mut channels: Vec<Waveform> = self
            .streams
            .iter()
            .map(|stream| stream.slice_padded(absolute_start, segment.len()))
            .collect();
        if let Some(shuffle_seed) = self.corruption.shuffle_seed {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(shuffle_seed, absolute_start as u64));
            let mut order: Vec<usize> = (0..channels.len()).collect();
            order.shuffle(&mut rng);
            channels = order.iter().map(|&c| channels[c].clone()).collect();
        }
        if let Some(snr_db) = self.corruption.noise_snr_db {
            let base = self.corruption.shuffle_seed.unwrap_or(0) ^ NOISE_SALT;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base, absolute_start as u64));
            for channel in &mut channels {
                if !channel.is_all_zero() {
                    *channel = add_white_noise(channel, snr_db, &mut rng)?;
                }
            }
        }
        EstimateStreams::new(channels)
    }
}
