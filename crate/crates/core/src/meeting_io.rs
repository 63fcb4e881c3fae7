//! Meeting persistence: a `meeting.json` annotation plus float32 WAV files
//! for the mixture and each utterance.
//!
//! The annotation uses 1-based utterance and speaker ids; everything
//! in-memory stays 0-based. The noise component is not stored separately —
//! it is recovered on read as mixture minus the sum of the utterances.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::graph::UtteranceInterval;
use crate::sim::{Meeting, MeetingConfig, MeetingUtterance, SpeakerInfo};
use crate::wav::{read_wav, write_wav};

pub const ANNOTATION_FILE: &str = "meeting.json";
pub const MIXTURE_FILE: &str = "mixture.wav";
pub const ANNOTATION_SCHEMA_VERSION: u32 = 1;

/// Serialized meeting metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeetingAnnotation {
    pub schema_version: u32,
    pub sample_rate: u32,
    pub num_samples: usize,
    pub mixture_file: String,
    pub noise_snr_db: f64,
    pub target_overlap_ratio: f64,
    pub realized_overlap_ratio: f64,
    pub speakers: Vec<SpeakerRecord>,
    pub utterances: Vec<UtteranceRecord>,
    pub config: MeetingConfig,
}

/// 1-based speaker id with its meeting-wide gain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeakerRecord {
    pub id: usize,
    pub gain_db: f64,
}

/// 1-based utterance record; `file` is relative to the meeting directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: usize,
    pub speaker: usize,
    pub start_sample: usize,
    pub end_sample: usize,
    pub gain_db: f64,
    pub synth_seed: u64,
    pub file: String,
}

fn utterance_file_name(index_zero_based: usize) -> String {
    format!("utt_{:04}.wav", index_zero_based + 1)
}

pub fn annotation_for(meeting: &Meeting) -> MeetingAnnotation {
    MeetingAnnotation {
        schema_version: ANNOTATION_SCHEMA_VERSION,
        sample_rate: meeting.sample_rate(),
        num_samples: meeting.num_samples(),
        mixture_file: MIXTURE_FILE.to_string(),
        noise_snr_db: meeting.noise_snr_db,
        target_overlap_ratio: meeting.target_overlap_ratio,
        realized_overlap_ratio: meeting.realized_overlap_ratio,
        speakers: meeting
            .speakers
            .iter()
            .map(|s| SpeakerRecord {
                id: s.id + 1,
                gain_db: s.gain_db,
            })
            .collect(),
        utterances: meeting
            .utterances
            .iter()
            .map(|u| UtteranceRecord {
                id: u.interval.id + 1,
                speaker: u.interval.speaker + 1,
                start_sample: u.interval.start,
                end_sample: u.interval.end,
                gain_db: u.gain_db,
                synth_seed: u.synth_seed,
                file: utterance_file_name(u.interval.id),
            })
            .collect(),
        config: meeting.config.clone(),
    }
}

/// Writes `meeting.json`, `mixture.wav` and one WAV per utterance into
/// `directory` (created if missing).
pub fn write_meeting(meeting: &Meeting, directory: &Path) -> Result<()> {
    std::fs::create_dir_all(directory).map_err(|source| Error::Io {
        path: directory.to_path_buf(),
        source,
    })?;
    write_wav(&directory.join(MIXTURE_FILE), &meeting.mixture)?;
    for utterance in &meeting.utterances {
        write_wav(
            &directory.join(utterance_file_name(utterance.interval.id)),
            &utterance.waveform,
        )?;
    }
    let annotation = annotation_for(meeting);
    let json = serde_json::to_string_pretty(&annotation).expect("annotation serializes");
    let path = directory.join(ANNOTATION_FILE);
    std::fs::write(&path, json).map_err(|source| Error::Io { path, source })
}

pub fn read_annotation(path: &Path) -> Result<MeetingAnnotation> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let annotation: MeetingAnnotation =
        serde_json::from_str(&text).map_err(|e| Error::InvalidAnnotation {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    validate_annotation(&annotation, path)?;
    Ok(annotation)
}

fn validate_annotation(annotation: &MeetingAnnotation, path: &Path) -> Result<()> {
    let fail = |message: String| {
        Err(Error::InvalidAnnotation {
            path: path.to_path_buf(),
            message,
        })
    };
    if annotation.schema_version != ANNOTATION_SCHEMA_VERSION {
        return fail(format!(
            "unsupported schema_version {}, expected {ANNOTATION_SCHEMA_VERSION}",
            annotation.schema_version
        ));
    }
    if annotation.sample_rate == 0 {
        return fail("sample_rate must be positive".into());
    }
    let num_speakers = annotation.speakers.len();
    for (position, speaker) in annotation.speakers.iter().enumerate() {
        if speaker.id != position + 1 {
            return fail(format!(
                "speaker ids must be contiguous from 1; found {} at position {position}",
                speaker.id
            ));
        }
    }
    let mut seen = vec![false; annotation.utterances.len()];
    for record in &annotation.utterances {
        if record.start_sample >= record.end_sample {
            return fail(format!(
                "utterance {}: start {} is not before end {}",
                record.id, record.start_sample, record.end_sample
            ));
        }
        if record.end_sample > annotation.num_samples {
            return fail(format!(
                "utterance {}: end {} exceeds mixture length {}",
                record.id, record.end_sample, annotation.num_samples
            ));
        }
        if record.speaker == 0 || record.speaker > num_speakers {
            return fail(format!(
                "utterance {}: unknown speaker {}",
                record.id, record.speaker
            ));
        }
        match record.id.checked_sub(1).and_then(|i| seen.get_mut(i)) {
            Some(slot) if !*slot => *slot = true,
            Some(_) => return fail(format!("duplicate utterance id {}", record.id)),
            None => {
                return fail(format!(
                    "utterance ids must be contiguous from 1; found {}",
                    record.id
                ))
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return fail(format!("missing utterance id {}", missing + 1));
    }
    Ok(())
}

fn read_referenced_wav(directory: &Path, file: &str, expected_rate: u32) -> Result<Waveform> {
    let path: PathBuf = directory.join(file);
    if !path.is_file() {
        return Err(Error::MissingFile { path });
    }
    let waveform = read_wav(&path)?;
    if waveform.sample_rate() != expected_rate {
        return Err(Error::FileFormat {
            path,
            message: format!(
                "sample rate {} does not match annotation rate {expected_rate}",
                waveform.sample_rate()
            ),
        });
    }
    Ok(waveform)
}

/// Loads a meeting directory written by [`write_meeting`].
pub fn read_meeting(directory: &Path) -> Result<Meeting> {
    let annotation_path = directory.join(ANNOTATION_FILE);
    let annotation = read_annotation(&annotation_path)?;

    let mixture = read_referenced_wav(directory, &annotation.mixture_file, annotation.sample_rate)?;
    if mixture.len() != annotation.num_samples {
        return Err(Error::FileFormat {
            path: directory.join(&annotation.mixture_file),
            message: format!(
                "mixture has {} samples, annotation says {}",
                mixture.len(),
                annotation.num_samples
            ),
        });
    }

    let mut utterances = Vec::with_capacity(annotation.utterances.len());
    let mut noise_samples = mixture.samples().to_vec();
    let mut records: Vec<&UtteranceRecord> = annotation.utterances.iter().collect();
    records.sort_by_key(|r| r.id);
    for record in records {
        let waveform = read_referenced_wav(directory, &record.file, annotation.sample_rate)?;
        if waveform.len() != record.end_sample - record.start_sample {
            return Err(Error::FileFormat {
                path: directory.join(&record.file),
                message: format!(
                    "utterance {} has {} samples, interval needs {}",
                    record.id,
                    waveform.len(),
                    record.end_sample - record.start_sample
                ),
            });
        }
        for (offset, sample) in waveform.samples().iter().enumerate() {
            noise_samples[record.start_sample + offset] -= sample;
        }
        utterances.push(MeetingUtterance {
            interval: UtteranceInterval::new(
                record.id - 1,
                record.speaker - 1,
                record.start_sample,
                record.end_sample,
            )?,
            waveform,
            gain_db: record.gain_db,
            synth_seed: record.synth_seed,
        });
    }

    Ok(Meeting {
        noise: Waveform::new(noise_samples, annotation.sample_rate)?,
        mixture,
        utterances,
        speakers: annotation
            .speakers
            .iter()
            .map(|s| SpeakerInfo {
                id: s.id - 1,
                gain_db: s.gain_db,
            })
            .collect(),
        target_overlap_ratio: annotation.target_overlap_ratio,
        realized_overlap_ratio: annotation.realized_overlap_ratio,
        noise_snr_db: annotation.noise_snr_db,
        config: annotation.config,
    })
}
