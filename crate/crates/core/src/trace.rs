//! Force-trace records and the aerodynamic similarity numbers derived from
//! them.
//!
//! A [`ForceTrace`] is a fixed-rate series of drag-force samples in newtons
//! together with the tunnel conditions it was acquired under. Traces are
//! written as `t_s,force_N` CSV with a JSON sidecar carrying conditions,
//! acquisition mode, and provenance.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Airflow conditions in the test section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigConditions {
    pub wind_speed_m_s: f64,
    pub air_density_kg_m3: f64,
    pub kinematic_viscosity_m2_s: f64,
    pub temperature_c: f64,
}

impl Default for RigConditions {
    fn default() -> Self {
        Self {
            wind_speed_m_s: 7.33,
            air_density_kg_m3: 1.225,
            kinematic_viscosity_m2_s: 1.48e-5,
            temperature_c: 15.0,
        }
    }
}

impl RigConditions {
    pub fn at_wind_speed(wind_speed_m_s: f64) -> Self {
        Self { wind_speed_m_s, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        for (name, v) in [
            ("wind_speed_m_s", self.wind_speed_m_s),
            ("air_density_kg_m3", self.air_density_kg_m3),
            ("kinematic_viscosity_m2_s", self.kinematic_viscosity_m2_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TraceError::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// What the recorded force means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMode {
    /// Net aerodynamic force after wind-off subtraction.
    Absolute,
    /// Force change relative to the neutral-configuration reference.
    DeltaVsNeutral,
}

/// Where a trace came from, for audit of archived campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TraceProvenance {
    pub backend: String,
    pub seed: Option<u64>,
    pub evaluation_counter: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed trace file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("{0}")]
    Domain(String),
}

/// Timestamped force samples at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceTrace {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub mode: TraceMode,
    /// Mean of the reference trace subtracted from this one, if any.
    pub calibration_reference_n: Option<f64>,
    pub conditions: RigConditions,
    /// Set by the low-pass stage; statistical tests refuse filtered traces.
    pub filtered: bool,
    pub provenance: TraceProvenance,
}

/// Default acquisition rate of the load-measurement chain.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 600.0;

impl ForceTrace {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, mode: TraceMode, conditions: RigConditions) -> Self {
        Self {
            samples,
            sample_rate_hz,
            mode,
            calibration_reference_n: None,
            conditions,
            filtered: false,
            provenance: TraceProvenance::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn time_at(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate_hz
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return f64::NAN;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sample standard deviation (n − 1 denominator).
    pub fn sample_std(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return f64::NAN;
        }
        let mean = self.mean();
        let ss: f64 = self.samples.iter().map(|s| (s - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    /// A copy restricted to samples with t in [start_s, end_s).
    pub fn slice_seconds(&self, start_s: f64, end_s: f64) -> ForceTrace {
        let lo = ((start_s * self.sample_rate_hz).round().max(0.0)) as usize;
        let hi = ((end_s * self.sample_rate_hz).round() as usize).min(self.samples.len());
        let mut out = self.clone();
        out.samples = self.samples[lo.min(hi)..hi].to_vec();
        out
    }

    /// Writes `t_s,force_N` CSV plus the JSON sidecar next to it.
    pub fn write_files(&self, csv_path: &Path) -> Result<(), TraceError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        writeln!(file, "t_s,force_N")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(file, "{:.6},{:.9}", self.time_at(i), s)?;
        }
        file.flush()?;
        let sidecar = TraceSidecar {
            schema_version: 1,
            sample_rate_hz: self.sample_rate_hz,
            mode: self.mode,
            calibration_reference_n: self.calibration_reference_n,
            conditions: self.conditions,
            filtered: self.filtered,
            provenance: self.provenance.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar)?;
        std::fs::write(sidecar_path(csv_path), json + "\n")?;
        Ok(())
    }

    /// Reads a trace written by [`ForceTrace::write_files`].
    pub fn read_files(csv_path: &Path) -> Result<Self, TraceError> {
        let sidecar: TraceSidecar =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv_path))?)?;
        let file = std::io::BufReader::new(std::fs::File::open(csv_path)?);
        let mut samples = Vec::new();
        for (lineno, line) in file.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.is_empty() {
                continue;
            }
            let force = line.rsplit(',').next().and_then(|f| f.parse::<f64>().ok()).ok_or_else(
                || TraceError::Malformed {
                    path: csv_path.to_path_buf(),
                    reason: format!("line {}: expected `t_s,force_N`", lineno + 1),
                },
            )?;
            samples.push(force);
        }
        Ok(Self {
            samples,
            sample_rate_hz: sidecar.sample_rate_hz,
            mode: sidecar.mode,
            calibration_reference_n: sidecar.calibration_reference_n,
            conditions: sidecar.conditions,
            filtered: sidecar.filtered,
            provenance: sidecar.provenance,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TraceSidecar {
    schema_version: u32,
    sample_rate_hz: f64,
    mode: TraceMode,
    calibration_reference_n: Option<f64>,
    conditions: RigConditions,
    filtered: bool,
    provenance: TraceProvenance,
}

/// Sidecar file path for a trace CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Drag coefficient 2F̄ / (ρ U² A).
pub fn compute_drag_coefficient(
    mean_drag_n: f64,
    conditions: &RigConditions,
    frontal_area_m2: f64,
) -> Result<f64, TraceError> {
    if !(conditions.wind_speed_m_s.is_finite() && conditions.wind_speed_m_s > 0.0)
        || !(frontal_area_m2.is_finite() && frontal_area_m2 > 0.0)
    {
        return Err(TraceError::Domain(format!(
            "drag coefficient needs positive wind speed and area, got U={} A={}",
            conditions.wind_speed_m_s, frontal_area_m2
        )));
    }
    Ok(2.0 * mean_drag_n
        / (conditions.air_density_kg_m3 * conditions.wind_speed_m_s.powi(2) * frontal_area_m2))
}

/// Reynolds number L U / ν.
pub fn compute_reynolds(conditions: &RigConditions, characteristic_length_m: f64) -> f64 {
    characteristic_length_m * conditions.wind_speed_m_s / conditions.kinematic_viscosity_m2_s
}
