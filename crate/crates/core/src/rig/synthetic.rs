//! Synthetic tunnel stand-in: a smooth drag surface with a planted optimum,
//! plus measurement imperfections shaped like the real transducer chain.
//!
//! The noiseless drag at shape θ and wind speed U is
//!
//! ```text
//! F(θ, U) = baseline(U) · (1 − r·exp(−Σ (θi − θ*i)² / (2 wi²)))
//! ```
//!
//! a per-speed baseline scaled down by a Gaussian bowl of depth `r` centred
//! on the planted optimum θ*. Samples add an AR(1) noise process whose raw
//! standard deviation matches the per-speed table values, and a random-walk
//! transducer drift that accumulates over the rig's lifetime — the reason
//! delta-mode campaigns recalibrate against the neutral shape every
//! generation.
//!
//! Every acquisition draws from its own noise stream derived from
//! (seed, shape, acquisition counter), so a fresh rig fed the same command
//! sequence reproduces its traces bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::MorphShape;
use crate::trace::{
    ForceTrace, RigConditions, TraceMode, TraceProvenance, DEFAULT_SAMPLE_RATE_HZ,
};

use super::{DragRig, RigError};

/// Mean drag and raw-sample scatter at one wind speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub wind_speed_m_s: f64,
    pub mean_drag_n: f64,
    pub sample_std_n: f64,
}

/// AR(1) measurement-noise parameters. The innovation standard deviation is
/// derived from the baseline table so raw samples scatter like the recorded
/// ones; `amplitude_scale` rescales it (0 disables noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub ar_coefficient: f64,
    pub amplitude_scale: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { ar_coefficient: 0.95, amplitude_scale: 1.0 }
    }
}

/// Optional second, shallower bowl for exercising escape from local minima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondaryMinimum {
    pub center_deg: [f64; 3],
    pub widths_deg: [f64; 3],
    pub depth_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticDragModel {
    /// Per-speed baselines, strictly increasing in wind speed. Linear
    /// interpolation between points, clamped outside.
    pub baseline_by_speed: Vec<BaselinePoint>,
    pub planted_optimum_deg: [f64; 3],
    pub max_reduction_fraction: f64,
    pub bowl_widths_deg: [f64; 3],
    pub noise: NoiseSpec,
    pub drift_std_n_per_sqrt_s: f64,
    pub secondary_minimum: Option<SecondaryMinimum>,
    pub seed: u64,
}

impl Default for SyntheticDragModel {
    fn default() -> Self {
        Self::morphing_vehicle()
    }
}

impl SyntheticDragModel {
    /// The morphing vehicle: neutral-configuration baselines with a planted
    /// optimum worth an 8.5% drag reduction.
    pub fn morphing_vehicle() -> Self {
        Self {
            baseline_by_speed: vec![
                BaselinePoint { wind_speed_m_s: 5.79, mean_drag_n: 1.259, sample_std_n: 0.383 },
                BaselinePoint { wind_speed_m_s: 7.33, mean_drag_n: 1.888, sample_std_n: 0.353 },
                BaselinePoint { wind_speed_m_s: 8.65, mean_drag_n: 2.621, sample_std_n: 0.513 },
                BaselinePoint { wind_speed_m_s: 10.13, mean_drag_n: 3.485, sample_std_n: 0.655 },
            ],
            planted_optimum_deg: [-15.0, 6.5, 12.5],
            max_reduction_fraction: 0.085,
            bowl_widths_deg: [8.0, 10.0, 10.0],
            noise: NoiseSpec::default(),
            drift_std_n_per_sqrt_s: 0.002,
            secondary_minimum: None,
            seed: 0,
        }
    }

    /// The bare vehicle without the morphing structure: shape-independent
    /// drag at the base-configuration baselines.
    pub fn base_vehicle() -> Self {
        Self {
            baseline_by_speed: vec![
                BaselinePoint { wind_speed_m_s: 5.79, mean_drag_n: 1.227, sample_std_n: 0.263 },
                BaselinePoint { wind_speed_m_s: 7.33, mean_drag_n: 1.901, sample_std_n: 0.334 },
                BaselinePoint { wind_speed_m_s: 8.65, mean_drag_n: 2.703, sample_std_n: 0.468 },
                BaselinePoint { wind_speed_m_s: 10.13, mean_drag_n: 3.551, sample_std_n: 0.586 },
            ],
            max_reduction_fraction: 0.0,
            ..Self::morphing_vehicle()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn noiseless(mut self) -> Self {
        self.noise.amplitude_scale = 0.0;
        self.drift_std_n_per_sqrt_s = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), RigError> {
        if self.baseline_by_speed.is_empty() {
            return Err(RigError::InvalidConfig("baseline table is empty".into()));
        }
        for w in self.baseline_by_speed.windows(2) {
            if w[1].wind_speed_m_s <= w[0].wind_speed_m_s {
                return Err(RigError::InvalidConfig(
                    "baseline table must be strictly increasing in wind speed".into(),
                ));
            }
        }
        for p in &self.baseline_by_speed {
            if !(p.mean_drag_n.is_finite() && p.mean_drag_n > 0.0) || p.sample_std_n < 0.0 {
                return Err(RigError::InvalidConfig("baseline entries must be positive".into()));
            }
        }
        if !(0.0..1.0).contains(&self.max_reduction_fraction) {
            return Err(RigError::InvalidConfig(format!(
                "max_reduction_fraction must be in [0, 1), got {}",
                self.max_reduction_fraction
            )));
        }
        if self.noise.ar_coefficient.abs() >= 1.0 {
            return Err(RigError::InvalidConfig(
                "AR(1) coefficient magnitude must be < 1 for stationarity".into(),
            ));
        }
        if self.bowl_widths_deg.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(RigError::InvalidConfig("bowl widths must be positive".into()));
        }
        let secondary_depth = self.secondary_minimum.map_or(0.0, |m| m.depth_fraction);
        if self.max_reduction_fraction + secondary_depth >= 1.0 {
            return Err(RigError::InvalidConfig("total reduction depth must stay below 1".into()));
        }
        Ok(())
    }

    fn interpolate(&self, wind_speed: f64, value: impl Fn(&BaselinePoint) -> f64) -> f64 {
        let table = &self.baseline_by_speed;
        if wind_speed <= table[0].wind_speed_m_s {
            return value(&table[0]);
        }
        if wind_speed >= table[table.len() - 1].wind_speed_m_s {
            return value(&table[table.len() - 1]);
        }
        for w in table.windows(2) {
            if wind_speed <= w[1].wind_speed_m_s {
                let f = (wind_speed - w[0].wind_speed_m_s)
                    / (w[1].wind_speed_m_s - w[0].wind_speed_m_s);
                return value(&w[0]) + f * (value(&w[1]) - value(&w[0]));
            }
        }
        unreachable!("table is sorted");
    }

    pub fn baseline_mean_n(&self, wind_speed_m_s: f64) -> f64 {
        self.interpolate(wind_speed_m_s, |p| p.mean_drag_n)
    }

    pub fn raw_sample_std_n(&self, wind_speed_m_s: f64) -> f64 {
        self.interpolate(wind_speed_m_s, |p| p.sample_std_n) * self.noise.amplitude_scale
    }

    /// Fractional drag reduction at the given angles (0 at infinity, peaks
    /// at θ* with `max_reduction_fraction`).
    pub fn reduction_fraction(&self, theta_deg: &[f64; 3]) -> f64 {
        let bowl = |center: &[f64; 3], widths: &[f64; 3]| {
            let exponent: f64 = (0..3)
                .map(|i| {
                    let d = theta_deg[i] - center[i];
                    d * d / (2.0 * widths[i] * widths[i])
                })
                .sum();
            (-exponent).exp()
        };
        let mut r = self.max_reduction_fraction * bowl(&self.planted_optimum_deg, &self.bowl_widths_deg);
        if let Some(m) = &self.secondary_minimum {
            r += m.depth_fraction * bowl(&m.center_deg, &m.widths_deg);
        }
        r
    }

    /// Noise-free mean drag at a shape.
    pub fn noiseless_drag_n(&self, shape: &MorphShape, wind_speed_m_s: f64) -> f64 {
        self.baseline_mean_n(wind_speed_m_s) * (1.0 - self.reduction_fraction(&shape.theta_deg))
    }
}

const DRIFT_STREAM: u64 = 6;
const WIND_OFF_NOISE_FRACTION: f64 = 0.1;

/// Deterministic per-acquisition noise stream: seed, shape key, counter.
fn acquisition_rng(seed: u64, shape_key: &[u8], counter: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"morphlab.synthetic-rig.noise");
    hasher.update(seed.to_le_bytes());
    hasher.update(shape_key);
    hasher.update(counter.to_le_bytes());
    let digest = hasher.finalize();
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")))
}

fn shape_key(shape: &MorphShape) -> Vec<u8> {
    let mut key = Vec::with_capacity(25);
    key.push(1u8);
    for t in shape.theta_deg {
        key.extend_from_slice(&t.to_bits().to_le_bytes());
    }
    key
}

enum AeroSource<'a> {
    AtShape(&'a MorphShape),
    Ramp { from: &'a MorphShape, to: &'a MorphShape, start_s: f64, end_s: f64 },
    WindOff,
}

/// In-process tunnel emulator.
pub struct SyntheticRig {
    model: SyntheticDragModel,
    conditions: RigConditions,
    sample_rate_hz: f64,
    current_shape: MorphShape,
    acquisitions: u64,
    drift_rng: ChaCha8Rng,
    drift_offset_n: f64,
    realtime: bool,
}

impl SyntheticRig {
    pub fn new(model: SyntheticDragModel, conditions: RigConditions) -> Result<Self, RigError> {
        model.validate()?;
        conditions.validate().map_err(|e| RigError::InvalidConfig(e.to_string()))?;
        let mut drift_rng = ChaCha8Rng::seed_from_u64(model.seed);
        drift_rng.set_stream(DRIFT_STREAM);
        Ok(Self {
            model,
            conditions,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            current_shape: MorphShape::neutral(),
            acquisitions: 0,
            drift_rng,
            drift_offset_n: 0.0,
            realtime: false,
        })
    }

    /// Wall-clock pacing: sleep through each acquisition as a physical
    /// tunnel would.
    pub fn with_realtime(mut self, realtime: bool) -> Self {
        self.realtime = realtime;
        self
    }

    pub fn model(&self) -> &SyntheticDragModel {
        &self.model
    }

    /// Adds a step to the transducer drift state. Test hook for exercising
    /// recalibration.
    pub fn inject_drift_offset(&mut self, offset_n: f64) {
        self.drift_offset_n += offset_n;
    }

    fn synthesize(&mut self, duration_s: f64, source: AeroSource<'_>) -> ForceTrace {
        let n = (duration_s * self.sample_rate_hz).round() as usize;
        let dt = 1.0 / self.sample_rate_hz;
        let u = self.conditions.wind_speed_m_s;
        let raw_std = match source {
            AeroSource::WindOff => self.model.raw_sample_std_n(u) * WIND_OFF_NOISE_FRACTION,
            _ => self.model.raw_sample_std_n(u),
        };
        let ar = self.model.noise.ar_coefficient;
        let innovation_std = raw_std * (1.0 - ar * ar).sqrt();
        let drift_step = self.model.drift_std_n_per_sqrt_s * dt.sqrt();

        let key = match source {
            AeroSource::AtShape(shape) => shape_key(shape),
            AeroSource::Ramp { to, .. } => shape_key(to),
            AeroSource::WindOff => vec![0u8],
        };
        let mut noise_rng = acquisition_rng(self.model.seed, &key, self.acquisitions);
        self.acquisitions += 1;

        let mut noise = if raw_std > 0.0 {
            raw_std * noise_rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 * dt;
            let aero = match source {
                AeroSource::AtShape(shape) => self.model.noiseless_drag_n(shape, u),
                AeroSource::Ramp { from, to, start_s, end_s } => {
                    let f = ((t - start_s) / (end_s - start_s)).clamp(0.0, 1.0);
                    self.model.noiseless_drag_n(&from.lerp(to, f), u)
                }
                AeroSource::WindOff => 0.0,
            };
            if i > 0 && raw_std > 0.0 {
                noise = ar * noise + innovation_std * noise_rng.sample::<f64, _>(StandardNormal);
            }
            if drift_step > 0.0 {
                self.drift_offset_n +=
                    drift_step * self.drift_rng.sample::<f64, _>(StandardNormal);
            }
            samples.push(aero + noise + self.drift_offset_n);
        }
        if self.realtime {
            std::thread::sleep(std::time::Duration::from_secs_f64(duration_s));
        }
        let mut trace =
            ForceTrace::new(samples, self.sample_rate_hz, TraceMode::Absolute, self.conditions);
        trace.provenance = TraceProvenance {
            backend: "synthetic".into(),
            seed: Some(self.model.seed),
            evaluation_counter: Some(self.acquisitions - 1),
        };
        trace
    }
}

impl DragRig for SyntheticRig {
    fn backend_name(&self) -> &'static str {
        "synthetic"
    }

    fn conditions(&self) -> RigConditions {
        self.conditions
    }

    fn set_shape(&mut self, shape: &MorphShape) -> Result<(), RigError> {
        self.current_shape = *shape;
        Ok(())
    }

    fn acquire(&mut self, duration_s: f64) -> Result<ForceTrace, RigError> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(RigError::InvalidConfig(format!("duration must be > 0, got {duration_s}")));
        }
        let shape = self.current_shape;
        Ok(self.synthesize(duration_s, AeroSource::AtShape(&shape)))
    }

    fn acquire_wind_off(&mut self) -> Result<ForceTrace, RigError> {
        Ok(self.synthesize(super::WIND_OFF_REFERENCE_S, AeroSource::WindOff))
    }

    fn set_conditions(&mut self, conditions: RigConditions) -> Result<(), RigError> {
        conditions.validate().map_err(|e| RigError::InvalidConfig(e.to_string()))?;
        self.conditions = conditions;
        Ok(())
    }

    fn supports_concurrent(&self) -> bool {
        // Per-acquisition noise streams are independent; only the drift
        // random walk is serial rig state.
        self.model.drift_std_n_per_sqrt_s == 0.0
    }

    fn dynamic_trace(
        &mut self,
        from: &MorphShape,
        to: &MorphShape,
        hold_before_s: f64,
        transition_s: f64,
        hold_after_s: f64,
    ) -> Result<ForceTrace, RigError> {
        let total = hold_before_s + transition_s + hold_after_s;
        if !(total.is_finite() && total > 0.0)
            || hold_before_s < 0.0
            || transition_s < 0.0
            || hold_after_s < 0.0
        {
            return Err(RigError::InvalidConfig("morph timings must be non-negative".into()));
        }
        self.current_shape = *to;
        let trace = self.synthesize(
            total,
            AeroSource::Ramp {
                from,
                to,
                start_s: hold_before_s,
                end_s: hold_before_s + transition_s,
            },
        );
        Ok(trace)
    }
}
