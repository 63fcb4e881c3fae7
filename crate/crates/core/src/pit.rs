//! Permutation- and coloring-invariant training objectives.
//!
//! [`upit_loss`] assigns one output channel per speaker and therefore needs
//! at least as many channels as speakers in the segment. [`graph_pit_loss`]
//! assigns individual utterances to channels through proper colorings of the
//! overlap graph, which only requires that no more utterances are
//! simultaneously active than channels exist. Both minimize a pluggable base
//! signal loss summed over channels.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::graph::{
    build_overlap_graph, enumerate_colorings, max_concurrency, validate_ids, Coloring,
    UtteranceInterval,
};

/// Target utterances of one segment, each zero-padded to the segment length.
#[derive(Debug, Clone)]
pub struct SegmentTargets {
    utterances: Vec<(UtteranceInterval, Waveform)>,
    segment_length: usize,
    sample_rate: u32,
    speakers: BTreeSet<usize>,
}

impl SegmentTargets {
    /// Builds targets from waveforms already padded to `segment_length`.
    ///
    /// Each waveform must be exactly `segment_length` samples and zero
    /// outside its utterance interval; ids must be contiguous from 0.
    pub fn new(
        utterances: Vec<(UtteranceInterval, Waveform)>,
        segment_length: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        let intervals: Vec<UtteranceInterval> = utterances.iter().map(|(i, _)| *i).collect();
        validate_ids(&intervals)?;
        for (interval, waveform) in &utterances {
            if waveform.len() != segment_length {
                return Err(Error::UtteranceLength {
                    id: interval.id,
                    expected: segment_length,
                    actual: waveform.len(),
                });
            }
            if waveform.sample_rate() != sample_rate {
                return Err(Error::SampleRateMismatch {
                    a: sample_rate,
                    b: waveform.sample_rate(),
                });
            }
            if interval.end > segment_length {
                return Err(Error::InvalidInterval {
                    id: interval.id,
                    start: interval.start,
                    end: interval.end,
                });
            }
            for (index, &sample) in waveform.samples().iter().enumerate() {
                if sample != 0.0 && (index < interval.start || index >= interval.end) {
                    return Err(Error::NonZeroOutsideInterval {
                        id: interval.id,
                        index,
                    });
                }
            }
        }
        let speakers = utterances.iter().map(|(i, _)| i.speaker).collect();
        Ok(Self {
            utterances,
            segment_length,
            sample_rate,
            speakers,
        })
    }

    /// Builds targets from support-only waveforms (one sample per interval
    /// position), zero-padding them to the segment length.
    pub fn from_supports(
        utterances: Vec<(UtteranceInterval, Waveform)>,
        segment_length: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        let mut padded = Vec::with_capacity(utterances.len());
        for (interval, support) in utterances {
            if support.len() != interval.duration_samples() {
                return Err(Error::UtteranceLength {
                    id: interval.id,
                    expected: interval.duration_samples(),
                    actual: support.len(),
                });
            }
            let mut samples = vec![0.0; segment_length];
            if interval.end > segment_length {
                return Err(Error::InvalidInterval {
                    id: interval.id,
                    start: interval.start,
                    end: interval.end,
                });
            }
            samples[interval.start..interval.end].copy_from_slice(support.samples());
            padded.push((interval, Waveform::new(samples, support.sample_rate())?));
        }
        Self::new(padded, segment_length, sample_rate)
    }

    pub fn utterances(&self) -> &[(UtteranceInterval, Waveform)] {
        &self.utterances
    }

    pub fn intervals(&self) -> Vec<UtteranceInterval> {
        self.utterances.iter().map(|(i, _)| *i).collect()
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Distinct speaker ids present in the segment.
    pub fn speakers(&self) -> &BTreeSet<usize> {
        &self.speakers
    }

    pub fn num_speakers(&self) -> usize {
        self.speakers.len()
    }
}

/// Fixed-size bundle of separator output channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateStreams {
    channels: Vec<Waveform>,
}

impl EstimateStreams {
    pub fn new(channels: Vec<Waveform>) -> Result<Self> {
        let first = channels.first().ok_or(Error::NoChannels)?;
        let (len, rate) = (first.len(), first.sample_rate());
        for channel in &channels {
            if channel.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: channel.len(),
                });
            }
            if channel.sample_rate() != rate {
                return Err(Error::SampleRateMismatch {
                    a: rate,
                    b: channel.sample_rate(),
                });
            }
        }
        Ok(Self { channels })
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.channels[0].sample_rate()
    }

    pub fn channel(&self, index: usize) -> &Waveform {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Waveform] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Waveform> {
        self.channels
    }

    /// Reorders channels so that new channel `i` is old channel `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<EstimateStreams> {
        if perm.len() != self.channels.len() {
            return Err(Error::ChannelCountMismatch {
                expected: self.channels.len(),
                actual: perm.len(),
            });
        }
        let channels = perm.iter().map(|&i| self.channels[i].clone()).collect();
        EstimateStreams::new(channels)
    }
}

/// Winning assignment of a PIT objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PitAssignment {
    /// `channel_of[k]` is the output channel of the k-th target slot, where
    /// slots list the segment's speakers in ascending id order followed by
    /// silent padding targets.
    Permutation(Vec<usize>),
    /// Proper coloring mapping each utterance to an output channel.
    Coloring(Coloring),
}

/// Minimized loss value together with the assignment that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct PitResult {
    pub loss: f64,
    pub assignment: PitAssignment,
}

/// One summed target waveform per distinct speaker, sorted by speaker id.
pub fn speaker_targets(targets: &SegmentTargets) -> Vec<(usize, Waveform)> {
    targets
        .speakers
        .iter()
        .map(|&speaker| {
            let mut sum = vec![0.0; targets.segment_length];
            for (interval, waveform) in &targets.utterances {
                if interval.speaker == speaker {
                    for (dst, src) in sum.iter_mut().zip(waveform.samples()) {
                        *dst += src;
                    }
                }
            }
            (
                speaker,
                Waveform::new_unchecked(sum, targets.sample_rate),
            )
        })
        .collect()
}

fn check_estimates(targets: &SegmentTargets, estimates: &EstimateStreams) -> Result<()> {
    if estimates.len() != targets.segment_length {
        return Err(Error::LengthMismatch {
            expected: targets.segment_length,
            actual: estimates.len(),
        });
    }
    if estimates.sample_rate() != targets.sample_rate {
        return Err(Error::SampleRateMismatch {
            a: targets.sample_rate,
            b: estimates.sample_rate(),
        });
    }
    Ok(())
}

/// Utterance-level PIT: minimizes the summed base loss over all bijective
/// speaker-to-channel assignments.
///
/// Speakers in excess of the channel count are an error; missing speakers
/// are padded with silent targets which stay part of the sum. Ties keep the
/// lexicographically smallest permutation.
pub fn upit_loss<L>(
    targets: &SegmentTargets,
    estimates: &EstimateStreams,
    base_loss: L,
) -> Result<PitResult>
where
    L: Fn(&Waveform, &Waveform) -> Result<f64>,
{
    check_estimates(targets, estimates)?;
    let num_channels = estimates.num_channels();
    let speakers = speaker_targets(targets);
    if speakers.len() > num_channels {
        return Err(Error::TooManySpeakers {
            speakers: speakers.len(),
            channels: num_channels,
        });
    }
    let mut slots: Vec<Waveform> = speakers.into_iter().map(|(_, w)| w).collect();
    while slots.len() < num_channels {
        slots.push(Waveform::zeros(targets.segment_length, targets.sample_rate));
    }

    // Cache per (slot, channel) pair; each permutation then only sums.
    let mut pair_loss = vec![vec![0.0; num_channels]; num_channels];
    for (slot, target) in slots.iter().enumerate() {
        for channel in 0..num_channels {
            pair_loss[slot][channel] = base_loss(target, estimates.channel(channel))?;
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..num_channels).permutations(num_channels) {
        let total: f64 = perm
            .iter()
            .enumerate()
            .map(|(slot, &channel)| pair_loss[slot][channel])
            .sum();
        if best.as_ref().map_or(true, |(loss, _)| total < *loss) {
            best = Some((total, perm));
        }
    }
    let (loss, perm) = best.expect("at least one permutation exists");
    Ok(PitResult {
        loss,
        assignment: PitAssignment::Permutation(perm),
    })
}

/// Sums utterances onto their assigned channels; channels without any
/// utterance are all-zero.
pub fn build_intermediate_targets(
    targets: &SegmentTargets,
    coloring: &Coloring,
    num_channels: usize,
) -> Result<Vec<Waveform>> {
    let graph = build_overlap_graph(&targets.intervals())?;
    coloring.check_proper(&graph, num_channels)?;
    let mut channels: Vec<Waveform> = (0..num_channels)
        .map(|_| Waveform::zeros(targets.segment_length, targets.sample_rate))
        .collect();
    fill_intermediate_targets(targets, coloring, &mut channels);
    Ok(channels)
}

/// Adds each utterance's support onto its assigned channel. Channels must
/// already be zeroed.
fn fill_intermediate_targets(
    targets: &SegmentTargets,
    coloring: &Coloring,
    channels: &mut [Waveform],
) {
    for (utterance_index, (interval, waveform)) in targets.utterances.iter().enumerate() {
        let channel = coloring.assignment[utterance_index];
        let src = &waveform.samples()[interval.start..interval.end];
        channels[channel].add_at(interval.start, src);
    }
}

/// Graph-coloring PIT: minimizes the summed base loss over every proper
/// coloring of the utterance overlap graph.
///
/// Colorings are visited in lexicographic order and ties keep the first
/// minimum, so the reported assignment is the lexicographically smallest
/// argmin. An empty coloring set (more concurrently active utterances than
/// channels) is an infeasibility error.
pub fn graph_pit_loss<L>(
    targets: &SegmentTargets,
    estimates: &EstimateStreams,
    base_loss: L,
) -> Result<PitResult>
where
    L: Fn(&Waveform, &Waveform) -> Result<f64>,
{
    check_estimates(targets, estimates)?;
    let num_channels = estimates.num_channels();
    let intervals = targets.intervals();
    let graph = build_overlap_graph(&intervals)?;

    let mut scratch: Vec<Waveform> = (0..num_channels)
        .map(|_| Waveform::zeros(targets.segment_length, targets.sample_rate))
        .collect();
    let mut best: Option<(f64, Coloring)> = None;
    for coloring in enumerate_colorings(&graph, num_channels) {
        for channel in &mut scratch {
            channel.samples_mut().fill(0.0);
        }
        fill_intermediate_targets(targets, &coloring, &mut scratch);
        let mut total = 0.0;
        for (channel, target) in scratch.iter().enumerate() {
            total += base_loss(target, estimates.channel(channel))?;
        }
        if best.as_ref().map_or(true, |(loss, _)| total < *loss) {
            best = Some((total, coloring));
        }
    }
    match best {
        Some((loss, coloring)) => Ok(PitResult {
            loss,
            assignment: PitAssignment::Coloring(coloring),
        }),
        None => Err(Error::Infeasible {
            concurrency: max_concurrency(&intervals),
            channels: num_channels,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{tsdr_base_loss, TsdrParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cell::Cell;

    fn support(rng: &mut ChaCha8Rng, len: usize) -> Waveform {
        let samples = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Waveform::new(samples, 8000).unwrap()
    }

    /// Segment from (speaker, start, end) specs with random content.
    fn segment(specs: &[(usize, usize, usize)], len: usize, rng: &mut ChaCha8Rng) -> SegmentTargets {
        let utterances = specs
            .iter()
            .enumerate()
            .map(|(id, &(speaker, start, end))| {
                (
                    UtteranceInterval::new(id, speaker, start, end).unwrap(),
                    support(rng, end - start),
                )
            })
            .collect();
        SegmentTargets::from_supports(utterances, len, 8000).unwrap()
    }

    fn tsdr20() -> impl Fn(&Waveform, &Waveform) -> Result<f64> + Copy {
        tsdr_base_loss(TsdrParams::default())
    }

    #[test]
    fn rejects_nonzero_outside_interval() {
        let interval = UtteranceInterval::new(0, 0, 2, 4).unwrap();
        let bad = Waveform::new(vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0], 8000).unwrap();
        let err = SegmentTargets::new(vec![(interval, bad)], 6, 8000);
        assert!(matches!(
            err,
            Err(Error::NonZeroOutsideInterval { id: 0, index: 0 })
        ));
    }

    #[test]
    fn rejects_interval_beyond_segment() {
        let interval = UtteranceInterval::new(0, 0, 2, 8).unwrap();
        let err = SegmentTargets::from_supports(
            vec![(interval, Waveform::zeros(6, 8000))],
            6,
            8000,
        );
        assert!(matches!(err, Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn speaker_target_single_utterance_is_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let targets = segment(&[(7, 10, 30)], 50, &mut rng);
        let spk = speaker_targets(&targets);
        assert_eq!(spk.len(), 1);
        assert_eq!(spk[0].0, 7);
        assert_eq!(spk[0].1.samples(), targets.utterances()[0].1.samples());
    }

    #[test]
    fn speaker_target_disjoint_utterances_sum_on_union() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let targets = segment(&[(3, 0, 10), (3, 20, 30)], 40, &mut rng);
        let spk = speaker_targets(&targets);
        assert_eq!(spk.len(), 1);
        let samples = spk[0].1.samples();
        assert!(samples[0..10].iter().all(|&x| x != 0.0));
        assert!(samples[10..20].iter().all(|&x| x == 0.0));
        assert!(samples[20..30].iter().all(|&x| x != 0.0));
        assert!(samples[30..40].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn speaker_targets_are_linear_in_utterances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let targets = segment(&[(1, 0, 20), (1, 30, 50), (2, 10, 40)], 60, &mut rng);
        let spk = speaker_targets(&targets);
        assert_eq!(spk.len(), 2);
        for t in 0..60 {
            let by_speaker: f64 = spk.iter().map(|(_, w)| w.samples()[t]).sum();
            let by_utterance: f64 = targets
                .utterances()
                .iter()
                .map(|(_, w)| w.samples()[t])
                .sum();
            assert!((by_speaker - by_utterance).abs() < 1e-12);
        }
    }

    #[test]
    fn upit_recovers_swapped_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let targets = segment(&[(0, 0, 40), (1, 10, 50)], 50, &mut rng);
        let spk = speaker_targets(&targets);
        let estimates =
            EstimateStreams::new(vec![spk[1].1.clone(), spk[0].1.clone()]).unwrap();
        let result = upit_loss(&targets, &estimates, tsdr20()).unwrap();
        assert!((result.loss - (-40.0)).abs() < 1e-9);
        assert_eq!(result.assignment, PitAssignment::Permutation(vec![1, 0]));
    }

    #[test]
    fn upit_pads_missing_speakers_with_silence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let targets = segment(&[(0, 0, 40)], 50, &mut rng);
        let spk = speaker_targets(&targets);
        let estimates = EstimateStreams::new(vec![
            spk[0].1.clone(),
            Waveform::zeros(50, 8000),
        ])
        .unwrap();
        let result = upit_loss(&targets, &estimates, tsdr20()).unwrap();
        assert!((result.loss - (-40.0)).abs() < 1e-9, "loss {}", result.loss);
        assert_eq!(result.assignment, PitAssignment::Permutation(vec![0, 1]));
    }

    #[test]
    fn upit_rejects_more_speakers_than_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let targets = segment(&[(0, 0, 10), (1, 20, 30), (2, 40, 50)], 60, &mut rng);
        let estimates = EstimateStreams::new(vec![
            Waveform::zeros(60, 8000),
            Waveform::zeros(60, 8000),
        ])
        .unwrap();
        assert!(matches!(
            upit_loss(&targets, &estimates, tsdr20()),
            Err(Error::TooManySpeakers {
                speakers: 3,
                channels: 2
            })
        ));
    }

    #[test]
    fn intermediate_targets_single_utterance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let targets = segment(&[(0, 5, 25)], 30, &mut rng);
        let channels =
            build_intermediate_targets(&targets, &Coloring::new(vec![0]), 2).unwrap();
        assert_eq!(channels[0].samples(), targets.utterances()[0].1.samples());
        assert!(channels[1].is_all_zero());
    }

    #[test]
    fn intermediate_targets_conserve_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let targets = segment(&[(0, 0, 30), (1, 20, 60), (2, 50, 80)], 90, &mut rng);
        for coloring in [vec![0, 1, 0], vec![1, 0, 1]] {
            let channels =
                build_intermediate_targets(&targets, &Coloring::new(coloring), 2).unwrap();
            for t in 0..90 {
                let by_channel: f64 = channels.iter().map(|w| w.samples()[t]).sum();
                let by_utterance: f64 = targets
                    .utterances()
                    .iter()
                    .map(|(_, w)| w.samples()[t])
                    .sum();
                assert!((by_channel - by_utterance).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn intermediate_targets_separate_overlapping_utterances() {
        // Alternating chain coloring: no channel carries two overlapping
        // utterances.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let targets = segment(&[(0, 0, 30), (1, 20, 60), (2, 50, 80)], 90, &mut rng);
        let channels =
            build_intermediate_targets(&targets, &Coloring::new(vec![0, 1, 0]), 2).unwrap();
        // Channel 0 holds utterances 0 and 2, disjoint in time.
        assert!(channels[0].samples()[30..50].iter().all(|&x| x == 0.0));
        assert_eq!(
            &channels[1].samples()[20..60],
            &targets.utterances()[1].1.samples()[20..60]
        );
    }

    #[test]
    fn intermediate_targets_reject_improper_coloring() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let targets = segment(&[(0, 0, 30), (1, 20, 60)], 60, &mut rng);
        let err = build_intermediate_targets(&targets, &Coloring::new(vec![0, 0]), 2);
        assert!(matches!(err, Err(Error::ImproperColoring { .. })));
    }

    #[test]
    fn graph_pit_equals_upit_on_two_clique() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let targets = segment(&[(0, 0, 40), (1, 10, 50)], 50, &mut rng);
            let estimates = EstimateStreams::new(vec![
                support(&mut rng, 50),
                support(&mut rng, 50),
            ])
            .unwrap();
            let u = upit_loss(&targets, &estimates, tsdr20()).unwrap();
            let g = graph_pit_loss(&targets, &estimates, tsdr20()).unwrap();
            assert!((u.loss - g.loss).abs() < 1e-9);
        }
    }

    #[test]
    fn graph_pit_finds_planted_coloring() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let targets = segment(&[(0, 0, 30), (1, 20, 60), (2, 50, 80)], 90, &mut rng);
        let planted = Coloring::new(vec![1, 0, 1]);
        let channels = build_intermediate_targets(&targets, &planted, 2).unwrap();
        let estimates = EstimateStreams::new(channels.clone()).unwrap();
        let result = graph_pit_loss(&targets, &estimates, tsdr20()).unwrap();
        assert!((result.loss - (-40.0)).abs() < 1e-9);
        let PitAssignment::Coloring(found) = &result.assignment else {
            panic!("graph pit returns a coloring");
        };
        let recovered = build_intermediate_targets(&targets, found, 2).unwrap();
        for (a, b) in recovered.iter().zip(&channels) {
            assert_eq!(a.samples(), b.samples());
        }
    }

    #[test]
    fn graph_pit_handles_three_speaker_chain_where_upit_cannot() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let targets = segment(&[(0, 0, 30), (1, 20, 60), (2, 50, 80)], 90, &mut rng);
        let channels =
            build_intermediate_targets(&targets, &Coloring::new(vec![0, 1, 0]), 2).unwrap();
        let estimates = EstimateStreams::new(channels).unwrap();
        let result = graph_pit_loss(&targets, &estimates, tsdr20()).unwrap();
        assert!((result.loss - (-40.0)).abs() < 1e-9);
        assert!(matches!(
            upit_loss(&targets, &estimates, tsdr20()),
            Err(Error::TooManySpeakers { .. })
        ));
    }

    #[test]
    fn graph_pit_reports_infeasible_concurrency() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let targets = segment(&[(0, 0, 30), (1, 10, 40), (2, 20, 50)], 60, &mut rng);
        let estimates = EstimateStreams::new(vec![
            Waveform::zeros(60, 8000),
            Waveform::zeros(60, 8000),
        ])
        .unwrap();
        assert!(matches!(
            graph_pit_loss(&targets, &estimates, tsdr20()),
            Err(Error::Infeasible {
                concurrency: 3,
                channels: 2
            })
        ));
    }

    /// Random segment where no speaker overlaps themselves and concurrency
    /// stays within `num_channels`.
    fn random_feasible_segment(
        rng: &mut ChaCha8Rng,
        num_channels: usize,
        len: usize,
    ) -> SegmentTargets {
        loop {
            let num_speakers = rng.gen_range(1..=num_channels);
            let mut specs = Vec::new();
            for speaker in 0..num_speakers {
                let mut cursor = rng.gen_range(0..len / 4);
                for _ in 0..rng.gen_range(1..=3) {
                    let dur = rng.gen_range(20..=60);
                    if cursor + dur > len {
                        break;
                    }
                    specs.push((speaker, cursor, cursor + dur));
                    cursor += dur + rng.gen_range(5..=40);
                }
            }
            if specs.is_empty() {
                continue;
            }
            let intervals: Vec<UtteranceInterval> = specs
                .iter()
                .enumerate()
                .map(|(id, &(s, a, b))| UtteranceInterval::new(id, s, a, b).unwrap())
                .collect();
            if max_concurrency(&intervals) <= num_channels {
                return segment(&specs, len, rng);
            }
        }
    }

    #[test]
    fn graph_pit_never_exceeds_upit() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..30 {
            let targets = random_feasible_segment(&mut rng, 2, 400);
            let estimates = EstimateStreams::new(vec![
                support(&mut rng, 400),
                support(&mut rng, 400),
            ])
            .unwrap();
            let u = upit_loss(&targets, &estimates, tsdr20()).unwrap();
            let g = graph_pit_loss(&targets, &estimates, tsdr20()).unwrap();
            assert!(g.loss <= u.loss + 1e-9, "graph {} upit {}", g.loss, u.loss);
        }
    }

    #[test]
    fn losses_match_reevaluated_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let targets = random_feasible_segment(&mut rng, 2, 300);
            let estimates = EstimateStreams::new(vec![
                support(&mut rng, 300),
                support(&mut rng, 300),
            ])
            .unwrap();
            let loss = tsdr20();

            let g = graph_pit_loss(&targets, &estimates, loss).unwrap();
            let PitAssignment::Coloring(coloring) = &g.assignment else {
                panic!("coloring expected");
            };
            let channels = build_intermediate_targets(&targets, coloring, 2).unwrap();
            let reeval: f64 = channels
                .iter()
                .zip(estimates.channels())
                .map(|(t, e)| loss(t, e).unwrap())
                .sum();
            assert!((g.loss - reeval).abs() < 1e-12);

            let u = upit_loss(&targets, &estimates, loss).unwrap();
            let PitAssignment::Permutation(perm) = &u.assignment else {
                panic!("permutation expected");
            };
            let mut slots: Vec<Waveform> = speaker_targets(&targets)
                .into_iter()
                .map(|(_, w)| w)
                .collect();
            while slots.len() < 2 {
                slots.push(Waveform::zeros(300, 8000));
            }
            let reeval: f64 = slots
                .iter()
                .zip(perm)
                .map(|(t, &c)| loss(t, estimates.channel(c)).unwrap())
                .sum();
            assert!((u.loss - reeval).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_pit_is_equivariant_under_channel_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for sigma in [vec![1, 2, 0], vec![2, 0, 1], vec![0, 2, 1]] {
            let targets = random_feasible_segment(&mut rng, 3, 300);
            let estimates = EstimateStreams::new(vec![
                support(&mut rng, 300),
                support(&mut rng, 300),
                support(&mut rng, 300),
            ])
            .unwrap();
            let base = graph_pit_loss(&targets, &estimates, tsdr20()).unwrap();
            // permuted: new channel i = old channel sigma[i].
            let shuffled = estimates.permuted(&sigma).unwrap();
            let moved = graph_pit_loss(&targets, &shuffled, tsdr20()).unwrap();
            assert!((base.loss - moved.loss).abs() < 1e-12);
            let (PitAssignment::Coloring(pi), PitAssignment::Coloring(pi_moved)) =
                (&base.assignment, &moved.assignment)
            else {
                panic!("colorings expected");
            };
            // Utterance assigned to old channel c is now on the index that
            // sigma maps onto c.
            let mut inverse = vec![0; sigma.len()];
            for (i, &s) in sigma.iter().enumerate() {
                inverse[s] = i;
            }
            let expected: Vec<usize> =
                pi.assignment.iter().map(|&c| inverse[c]).collect();
            assert_eq!(pi_moved.assignment, expected);
        }
    }

    #[test]
    fn graph_pit_visits_every_coloring_of_edgeless_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let targets = segment(&[(0, 0, 10), (1, 20, 30), (2, 40, 50)], 60, &mut rng);
        let estimates = EstimateStreams::new(vec![
            support(&mut rng, 60),
            support(&mut rng, 60),
        ])
        .unwrap();
        let calls = Cell::new(0usize);
        let params = TsdrParams::default();
        let counting = |reference: &Waveform, estimate: &Waveform| {
            calls.set(calls.get() + 1);
            crate::audio::eps_tsdr_loss(reference, estimate, &params)
        };
        graph_pit_loss(&targets, &estimates, counting).unwrap();
        // 2^3 colorings, each evaluating the base loss once per channel.
        assert_eq!(calls.get(), 8 * 2);
    }
}
