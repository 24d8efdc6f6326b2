//! Recorded-trace playback: re-run a campaign's measurement sequence from
//! trace files on disk.
//!
//! Archives are directories of numbered acquisitions (`acq_000000.csv` plus
//! JSON sidecars) in the order they were recorded. [`RecordingRig`] tees any
//! live rig into that layout; [`ReplayRig`] serves the files back in order.

use std::path::{Path, PathBuf};

use crate::geometry::MorphShape;
use crate::trace::{ForceTrace, RigConditions};

use super::{DragRig, RigError};

fn acquisition_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("acq_{index:06}.csv"))
}

/// Plays back an archive of recorded traces in acquisition order.
/// `set_shape` is a no-op: shape changes are implicit in the recording.
pub struct ReplayRig {
    dir: PathBuf,
    next: usize,
    conditions: RigConditions,
}

impl ReplayRig {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, RigError> {
        let dir = dir.into();
        let first = acquisition_path(&dir, 0);
        if !first.exists() {
            return Err(RigError::Replay(format!(
                "no recorded traces under {} (expected {})",
                dir.display(),
                first.display()
            )));
        }
        let probe = ForceTrace::read_files(&first)
            .map_err(|e| RigError::Replay(format!("unreadable archive: {e}")))?;
        Ok(Self { dir, next: 0, conditions: probe.conditions })
    }

    fn next_trace(&mut self) -> Result<ForceTrace, RigError> {
        let path = acquisition_path(&self.dir, self.next);
        if !path.exists() {
            return Err(RigError::Replay(format!(
                "archive exhausted after {} acquisitions",
                self.next
            )));
        }
        let trace = ForceTrace::read_files(&path)
            .map_err(|e| RigError::Replay(format!("{}: {e}", path.display())))?;
        self.next += 1;
        Ok(trace)
    }
}

impl DragRig for ReplayRig {
    fn backend_name(&self) -> &'static str {
        "replay"
    }

    fn conditions(&self) -> RigConditions {
        self.conditions
    }

    fn set_shape(&mut self, _shape: &MorphShape) -> Result<(), RigError> {
        Ok(())
    }

    fn acquire(&mut self, duration_s: f64) -> Result<ForceTrace, RigError> {
        let trace = self.next_trace()?;
        let expected = (duration_s * trace.sample_rate_hz).round() as usize;
        if trace.len() != expected {
            return Err(RigError::Replay(format!(
                "acquisition {} holds {} samples but {} were requested",
                self.next - 1,
                trace.len(),
                expected
            )));
        }
        Ok(trace)
    }

    fn acquire_wind_off(&mut self) -> Result<ForceTrace, RigError> {
        self.next_trace()
    }

    fn set_conditions(&mut self, _conditions: RigConditions) -> Result<(), RigError> {
        // Conditions ride with the recorded traces.
        Ok(())
    }
}

/// Delegates to a live rig while writing every acquisition into a replayable
/// archive directory.
pub struct RecordingRig<R: DragRig> {
    inner: R,
    dir: PathBuf,
    recorded: usize,
}

impl<R: DragRig> RecordingRig<R> {
    pub fn new(inner: R, dir: impl Into<PathBuf>) -> Result<Self, RigError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { inner, dir, recorded: 0 })
    }

    fn record(&mut self, trace: &ForceTrace) -> Result<(), RigError> {
        trace
            .write_files(&acquisition_path(&self.dir, self.recorded))
            .map_err(|e| RigError::Replay(format!("failed to record trace: {e}")))?;
        self.recorded += 1;
        Ok(())
    }
}

impl<R: DragRig> DragRig for RecordingRig<R> {
    fn backend_name(&self) -> &'static str {
        "recording"
    }

    fn conditions(&self) -> RigConditions {
        self.inner.conditions()
    }

    fn set_shape(&mut self, shape: &MorphShape) -> Result<(), RigError> {
        self.inner.set_shape(shape)
    }

    fn acquire(&mut self, duration_s: f64) -> Result<ForceTrace, RigError> {
        let trace = self.inner.acquire(duration_s)?;
        self.record(&trace)?;
        Ok(trace)
    }

    fn acquire_wind_off(&mut self) -> Result<ForceTrace, RigError> {
        let trace = self.inner.acquire_wind_off()?;
        self.record(&trace)?;
        Ok(trace)
    }

    fn set_conditions(&mut self, conditions: RigConditions) -> Result<(), RigError> {
        self.inner.set_conditions(conditions)
    }
}
