//! Drag-measurement backends and the fitness-evaluation layer above them.
//!
//! A [`DragRig`] models the wind tunnel's command surface: position the
//! morphing structure, acquire a force trace, or acquire a wind-off
//! reference. Three backends implement it: a synthetic tunnel stand-in
//! ([`synthetic::SyntheticRig`]), a recorded-trace replayer
//! ([`replay::ReplayRig`]), and a TCP client for an external rig
//! ([`remote::RemoteRig`]).
//!
//! [`MeanDragEvaluator`] turns a rig into a fitness function: it averages a
//! 10 s window and, in delta mode, subtracts the neutral-configuration
//! reference captured by [`MeanDragEvaluator::recalibrate_neutral`].

pub mod remote;
pub mod replay;
pub mod synthetic;

use crate::dsp;
use crate::geometry::MorphShape;
use crate::trace::{ForceTrace, RigConditions, TraceMode};

/// Default fitness-averaging window in seconds.
pub const FITNESS_WINDOW_S: f64 = 10.0;

/// Duration of a wind-off calibration acquisition in seconds.
pub const WIND_OFF_REFERENCE_S: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum RigError {
    #[error("delta-mode evaluation requires a neutral calibration reference")]
    NotCalibrated,
    #[error("invalid rig configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o failure talking to rig: {0}")]
    Io(#[from] std::io::Error),
    #[error("rig protocol error: {0}")]
    Protocol(String),
    #[error("rig reported failure: {0}")]
    Remote(String),
    #[error("replay archive exhausted or missing trace: {0}")]
    Replay(String),
    #[error("operation not supported by this backend: {0}")]
    Unsupported(String),
    #[error("trace processing failed: {0}")]
    Dsp(#[from] dsp::DspError),
}

/// Command surface of a drag-measurement rig.
pub trait DragRig {
    fn backend_name(&self) -> &'static str;

    fn conditions(&self) -> RigConditions;

    /// Positions the morphing structure.
    fn set_shape(&mut self, shape: &MorphShape) -> Result<(), RigError>;

    /// Records a force trace of the given duration at the current shape.
    fn acquire(&mut self, duration_s: f64) -> Result<ForceTrace, RigError>;

    /// Records a wind-off reference trace (transducer offset and drift, no
    /// aerodynamic load).
    fn acquire_wind_off(&mut self) -> Result<ForceTrace, RigError>;

    /// Retunes the tunnel (fan speed, air properties) where the backend can.
    /// The replayer ignores this (conditions ride with the recorded traces);
    /// the remote wire protocol has no such command.
    fn set_conditions(&mut self, conditions: RigConditions) -> Result<(), RigError> {
        let _ = conditions;
        Err(RigError::Unsupported(format!(
            "{} rig cannot change tunnel conditions",
            self.backend_name()
        )))
    }

    /// Whether independent evaluations may run concurrently. Physical
    /// tunnels are strictly serialized.
    fn supports_concurrent(&self) -> bool {
        false
    }

    /// Records one trace across a shape transition: hold `from`, morph to
    /// `to`, keep holding. The default implementation stitches two
    /// acquisitions around the shape change; backends that can model the
    /// transition itself override this.
    fn dynamic_trace(
        &mut self,
        from: &MorphShape,
        to: &MorphShape,
        hold_before_s: f64,
        transition_s: f64,
        hold_after_s: f64,
    ) -> Result<ForceTrace, RigError> {
        self.set_shape(from)?;
        let mut head = self.acquire(hold_before_s)?;
        self.set_shape(to)?;
        let tail = self.acquire(transition_s + hold_after_s)?;
        head.samples.extend_from_slice(&tail.samples);
        Ok(head)
    }
}

impl<R: DragRig + ?Sized> DragRig for Box<R> {
    fn backend_name(&self) -> &'static str {
        (**self).backend_name()
    }

    fn conditions(&self) -> RigConditions {
        (**self).conditions()
    }

    fn set_shape(&mut self, shape: &MorphShape) -> Result<(), RigError> {
        (**self).set_shape(shape)
    }

    fn acquire(&mut self, duration_s: f64) -> Result<ForceTrace, RigError> {
        (**self).acquire(duration_s)
    }

    fn acquire_wind_off(&mut self) -> Result<ForceTrace, RigError> {
        (**self).acquire_wind_off()
    }

    fn set_conditions(&mut self, conditions: RigConditions) -> Result<(), RigError> {
        (**self).set_conditions(conditions)
    }

    fn supports_concurrent(&self) -> bool {
        (**self).supports_concurrent()
    }

    fn dynamic_trace(
        &mut self,
        from: &MorphShape,
        to: &MorphShape,
        hold_before_s: f64,
        transition_s: f64,
        hold_after_s: f64,
    ) -> Result<ForceTrace, RigError> {
        (**self).dynamic_trace(from, to, hold_before_s, transition_s, hold_after_s)
    }
}

/// What the evolution loop needs from a measurement backend.
pub trait FitnessEvaluator {
    /// Called once before each generation is measured.
    fn begin_generation(&mut self, generation: usize) -> Result<(), RigError> {
        let _ = generation;
        Ok(())
    }

    /// Mean drag (or drag delta) for one shape, in newtons.
    fn evaluate(&mut self, shape: &MorphShape) -> Result<f64, RigError>;

    fn supports_concurrent(&self) -> bool {
        false
    }
}

/// Closure adapter, mainly for tests and enumeration sweeps.
pub struct FnEvaluator<F: FnMut(&MorphShape) -> f64>(pub F);

impl<F: FnMut(&MorphShape) -> f64> FitnessEvaluator for FnEvaluator<F> {
    fn evaluate(&mut self, shape: &MorphShape) -> Result<f64, RigError> {
        Ok((self.0)(shape))
    }
}

/// A measurement result: the windowed mean and the trace behind it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub mean_drag_n: f64,
    pub trace: ForceTrace,
}

/// Windowed-mean fitness evaluation over any rig, in absolute or
/// delta-vs-neutral mode.
pub struct MeanDragEvaluator<R: DragRig> {
    rig: R,
    mode: TraceMode,
    averaging_window_s: f64,
    neutral_reference_n: Option<f64>,
    recalibrate_each_generation: bool,
    evaluations: u64,
}

impl<R: DragRig> MeanDragEvaluator<R> {
    /// Absolute-force evaluation (wind-off calibration is the caller's job).
    pub fn absolute(rig: R) -> Self {
        Self {
            rig,
            mode: TraceMode::Absolute,
            averaging_window_s: FITNESS_WINDOW_S,
            neutral_reference_n: None,
            recalibrate_each_generation: false,
            evaluations: 0,
        }
    }

    /// Delta-vs-neutral evaluation with a recalibration before every
    /// generation, compensating transducer drift over long campaigns.
    pub fn delta_vs_neutral(rig: R) -> Self {
        Self {
            rig,
            mode: TraceMode::DeltaVsNeutral,
            averaging_window_s: FITNESS_WINDOW_S,
            neutral_reference_n: None,
            recalibrate_each_generation: true,
            evaluations: 0,
        }
    }

    pub fn with_window(mut self, window_s: f64) -> Self {
        self.averaging_window_s = window_s;
        self
    }

    pub fn rig(&self) -> &R {
        &self.rig
    }

    pub fn rig_mut(&mut self) -> &mut R {
        &mut self.rig
    }

    pub fn evaluation_count(&self) -> u64 {
        self.evaluations
    }

    pub fn neutral_reference_n(&self) -> Option<f64> {
        self.neutral_reference_n
    }

    /// Measures the neutral configuration and stores its windowed mean as
    /// the subtraction reference for subsequent delta evaluations.
    pub fn recalibrate_neutral(&mut self) -> Result<f64, RigError> {
        self.rig.set_shape(&MorphShape::neutral())?;
        let trace = self.rig.acquire(self.averaging_window_s)?;
        let reference = dsp::window_mean(&trace, self.averaging_window_s)?;
        self.neutral_reference_n = Some(reference);
        Ok(reference)
    }

    /// One fitness measurement, returning the trace alongside the mean.
    /// In delta mode both are shifted by the stored neutral reference.
    pub fn evaluate_with_trace(&mut self, shape: &MorphShape) -> Result<Evaluation, RigError> {
        self.rig.set_shape(shape)?;
        let mut trace = self.rig.acquire(self.averaging_window_s)?;
        self.evaluations += 1;
        let mean = dsp::window_mean(&trace, self.averaging_window_s)?;
        match self.mode {
            TraceMode::Absolute => Ok(Evaluation { mean_drag_n: mean, trace }),
            TraceMode::DeltaVsNeutral => {
                let reference = self.neutral_reference_n.ok_or(RigError::NotCalibrated)?;
                for s in &mut trace.samples {
                    *s -= reference;
                }
                trace.mode = TraceMode::DeltaVsNeutral;
                trace.calibration_reference_n = Some(reference);
                Ok(Evaluation { mean_drag_n: mean - reference, trace })
            }
        }
    }
}

impl<R: DragRig> FitnessEvaluator for MeanDragEvaluator<R> {
    fn begin_generation(&mut self, _generation: usize) -> Result<(), RigError> {
        if self.mode == TraceMode::DeltaVsNeutral
            && (self.recalibrate_each_generation || self.neutral_reference_n.is_none())
        {
            self.recalibrate_neutral()?;
        }
        Ok(())
    }

    fn evaluate(&mut self, shape: &MorphShape) -> Result<f64, RigError> {
        Ok(self.evaluate_with_trace(shape)?.mean_drag_n)
    }

    fn supports_concurrent(&self) -> bool {
        self.rig.supports_concurrent()
    }
}
