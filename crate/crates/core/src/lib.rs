//! Separation of overlapped speech into a fixed number of output streams.
//!
//! The crate covers the full desk-scale pipeline: utterance overlap graphs
//! and exhaustive proper-coloring enumeration ([`graph`]), the thresholded
//! SDR loss and channel assignment objectives ([`audio`], [`pit`]),
//! segment-wise separation with stream stitching ([`css`]), synthetic
//! meeting generation ([`sim`]), and utterance-wise SDR evaluation with
//! JSON/WAV persistence ([`eval`], [`meeting_io`], [`wav`]).

pub mod audio;
pub mod css;
pub mod error;
pub mod eval;
pub mod graph;
pub mod meeting_io;
pub mod pit;
pub mod sim;
pub mod wav;

pub use audio::{
    add_white_noise, eps_tsdr_loss, neg_sdr_base_loss, scaled_white_noise, sdr, sdr_improvement,
    tsdr_base_loss, TsdrParams, Waveform, SDR_CAP_DB,
};
pub use css::{
    plan_segments, separate_segments, stitch, stitch_with_trace, BoundaryAlignment,
    ColoringPolicy, Corruption, IdentitySeparator, OracleSeparator, PlannedSegment, SegmentOutput,
    SegmentPlan, Separator, StitchTrace,
};
pub use error::{Error, Result};
pub use eval::{
    evaluate_meeting, EvalConfigEcho, EvaluationReport, GroupAggregate, UtteranceEvaluation,
};
pub use meeting_io::{read_annotation, read_meeting, write_meeting, MeetingAnnotation};
pub use sim::{
    overlap_ratio, segment_speaker_histogram, simulate_meeting, synth_utterance, Meeting,
    MeetingConfig, MeetingUtterance, SegmentSpeakerHistogram, SpeakerInfo,
};
pub use graph::{
    build_overlap_graph, brute_force_colorings, connected_components, enumerate_colorings,
    max_concurrency, Coloring, OverlapGraph, UtteranceInterval,
};
pub use pit::{
    build_intermediate_targets, graph_pit_loss, speaker_targets, upit_loss, EstimateStreams,
    PitAssignment, PitResult, SegmentTargets,
};
