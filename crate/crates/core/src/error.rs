use std::path::PathBuf;

/// Crate-wide error type.
///
/// Contract violations (mismatched lengths, infeasible assignments, malformed
/// files) are reported through these variants rather than panics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("sample rate mismatch: {a} Hz vs {b} Hz")]
    SampleRateMismatch { a: u32, b: u32 },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("sample rate must be positive")]
    ZeroSampleRate,

    #[error("signal is all-zero: {context}")]
    ZeroSignal { context: &'static str },

    #[error("utterance {id} has empty interval: start {start} >= end {end}")]
    InvalidInterval { id: usize, start: usize, end: usize },

    #[error("duplicate utterance id {id}")]
    DuplicateId { id: usize },

    #[error("utterance ids must be contiguous from 0; missing id {missing}")]
    NonContiguousIds { missing: usize },

    #[error("utterance {id} waveform has {actual} samples, interval needs {expected}")]
    UtteranceLength {
        id: usize,
        expected: usize,
        actual: usize,
    },

    #[error("utterance {id} waveform is nonzero outside its interval (sample {index})")]
    NonZeroOutsideInterval { id: usize, index: usize },

    #[error("brute force guard exceeded: {channels}^{vertices} > {limit} assignments")]
    BruteForceGuard {
        channels: usize,
        vertices: usize,
        limit: u64,
    },

    #[error("coloring has {actual} entries, graph has {expected} vertices")]
    ColoringLength { expected: usize, actual: usize },

    #[error("coloring assigns channel {channel} but only {channels} channels exist")]
    ChannelOutOfRange { channel: usize, channels: usize },

    #[error("improper coloring: overlapping utterances {u} and {v} share channel {channel}")]
    ImproperColoring { u: usize, v: usize, channel: usize },

    #[error("{speakers} speakers exceed {channels} output channels")]
    TooManySpeakers { speakers: usize, channels: usize },

    #[error(
        "no proper coloring exists: {concurrency} concurrently active utterances \
         exceed {channels} channels"
    )]
    Infeasible { concurrency: usize, channels: usize },

    #[error("estimate streams: expected {expected} channels, got {actual}")]
    ChannelCountMismatch { expected: usize, actual: usize },

    #[error("estimate streams need at least one channel")]
    NoChannels,

    #[error("segment plan: {message}")]
    InvalidPlan { message: String },

    #[error("segment outputs are not consecutive: expected index {expected}, got {actual}")]
    NonConsecutiveSegments { expected: usize, actual: usize },

    #[error("separator output length {actual} does not match segment length {expected}")]
    SeparatorLength { expected: usize, actual: usize },

    #[error("invalid meeting config: {message}")]
    InvalidConfig { message: String },

    #[error("meeting simulation failed after {attempts} attempts: {diagnostics}")]
    SimulationFailed { attempts: usize, diagnostics: String },

    #[error("utterance too short: {samples} samples is less than 0.1 s at {sample_rate} Hz")]
    UtteranceTooShort { samples: usize, sample_rate: u32 },

    #[error("segment window: {message}")]
    InvalidWindow { message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    FileFormat { path: PathBuf, message: String },

    #[error("{path}: missing file referenced by annotation")]
    MissingFile { path: PathBuf },

    #[error("{path}: invalid annotation: {message}")]
    InvalidAnnotation { path: PathBuf, message: String },

    #[error("no utterance with id {id}")]
    UnknownUtterance { id: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
