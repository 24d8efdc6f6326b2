//! Force-trace conditioning: wind-off calibration, zero-phase low-pass
//! filtering for plots, and fixed-window averaging.
//!
//! The low-pass stage is a Butterworth filter applied forward and backward
//! (two passes), which doubles the attenuation in decibels and cancels phase
//! lag. Edges are extended by odd reflection before filtering, and each pass
//! starts from the filter's constant-input steady state, so a constant trace
//! passes through bit-for-bit up to rounding: the DC gain of each biquad
//! section is normalized to exactly 1.
//!
//! Filtered traces are flagged; the statistics module refuses them, keeping
//! hypothesis tests on raw data only.

use serde::{Deserialize, Serialize};

use crate::trace::ForceTrace;

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("cutoff {cutoff_hz} Hz must lie below the Nyquist frequency {nyquist_hz} Hz")]
    CutoffAboveNyquist { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("filter order must be a positive even number, got {0}")]
    BadOrder(usize),
    #[error("trace too short: {len} samples, need more than {min} for filter warm-up")]
    TraceTooShort { len: usize, min: usize },
    #[error("traces must share a sample rate ({0} Hz vs {1} Hz)")]
    SampleRateMismatch(f64, f64),
    #[error("reference trace is empty")]
    EmptyReference,
    #[error("window of {window_s} s exceeds the {duration_s} s trace")]
    WindowTooLong { window_s: f64, duration_s: f64 },
}

/// Low-pass Butterworth specification, applied forward-backward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSpec {
    pub order: usize,
    pub cutoff_hz: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self { order: 4, cutoff_hz: 5.0 }
    }
}

/// One second-order section, direct form II transposed.
/// Denominator is monic: y[n] = b0 x[n] + z1, with the usual state updates.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    /// State that keeps a constant input `x0` at a constant output, given
    /// the section's unity DC gain.
    fn steady_state(&self, x0: f64) -> [f64; 2] {
        let z2 = (self.b[2] - self.a[1]) * x0;
        let z1 = (self.b[1] - self.a[0]) * x0 + z2;
        [z1, z2]
    }

    fn filter_in_place(&self, x: &mut [f64], mut z: [f64; 2]) {
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + z[0];
            z[0] = self.b[1] * input - self.a[0] * y + z[1];
            z[1] = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }
}

/// Butterworth low-pass as cascaded biquads via the bilinear transform with
/// cutoff prewarping. Only even orders are supported (conjugate pole pairs).
fn design_lowpass(spec: &FilterSpec, sample_rate_hz: f64) -> Result<Vec<Biquad>, DspError> {
    if spec.order == 0 || !spec.order.is_multiple_of(2) {
        return Err(DspError::BadOrder(spec.order));
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(spec.cutoff_hz.is_finite() && spec.cutoff_hz > 0.0) || spec.cutoff_hz >= nyquist {
        return Err(DspError::CutoffAboveNyquist { cutoff_hz: spec.cutoff_hz, nyquist_hz: nyquist });
    }
    let n = spec.order;
    let fs2 = 2.0 * sample_rate_hz;
    let warped = fs2 * (std::f64::consts::PI * spec.cutoff_hz / sample_rate_hz).tan();
    let mut sections = Vec::with_capacity(n / 2);
    for k in 1..=n / 2 {
        // Analog pole pair on the Butterworth circle, left half-plane.
        let angle = std::f64::consts::PI * (2.0 * k as f64 + n as f64 - 1.0) / (2.0 * n as f64);
        let (re, im) = (warped * angle.cos(), warped * angle.sin());
        // Bilinear map z = (fs2 + s)/(fs2 - s) for s = re ± j·im.
        let denom = (fs2 - re) * (fs2 - re) + im * im;
        let z_re = (fs2 * fs2 - re * re - im * im) / denom;
        let z_abs2 = ((fs2 + re) * (fs2 + re) + im * im) / denom;
        let a = [-2.0 * z_re, z_abs2];
        // Double zero at z = -1; scale for exact unit DC gain.
        let gain = (1.0 + a[0] + a[1]) / 4.0;
        sections.push(Biquad { b: [gain, 2.0 * gain, gain], a });
    }
    Ok(sections)
}

fn pad_length(order: usize) -> usize {
    3 * (order + 1)
}

/// Odd reflection about both endpoints, `pad` samples each side.
fn odd_extend(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        out.push(2.0 * x[0] - x[i]);
    }
    out.extend_from_slice(x);
    for i in 1..=pad {
        out.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    out
}

fn filter_cascade(sections: &[Biquad], x: &mut [f64]) {
    for section in sections {
        let zi = section.steady_state(x[0]);
        section.filter_in_place(x, zi);
    }
}

/// Forward-backward (zero-phase) filtering of a bare sample slice.
pub fn filtfilt(spec: &FilterSpec, sample_rate_hz: f64, x: &[f64]) -> Result<Vec<f64>, DspError> {
    let sections = design_lowpass(spec, sample_rate_hz)?;
    let pad = pad_length(spec.order);
    if x.len() <= pad {
        return Err(DspError::TraceTooShort { len: x.len(), min: pad });
    }
    let mut work = odd_extend(x, pad);
    filter_cascade(&sections, &mut work);
    work.reverse();
    filter_cascade(&sections, &mut work);
    work.reverse();
    Ok(work[pad..pad + x.len()].to_vec())
}

/// Zero-phase low-pass of a trace; the result is marked `filtered`.
pub fn lowpass(trace: &ForceTrace, spec: &FilterSpec) -> Result<ForceTrace, DspError> {
    let samples = filtfilt(spec, trace.sample_rate_hz, &trace.samples)?;
    let mut out = trace.clone();
    out.samples = samples;
    out.filtered = true;
    Ok(out)
}

/// Subtracts the mean of a wind-off reference from a wind-on trace, yielding
/// the net aerodynamic force. The subtracted value is recorded on the output.
pub fn calibrate_wind_off(
    trace: &ForceTrace,
    reference: &ForceTrace,
) -> Result<ForceTrace, DspError> {
    if reference.is_empty() {
        return Err(DspError::EmptyReference);
    }
    if (trace.sample_rate_hz - reference.sample_rate_hz).abs() > 1e-9 {
        return Err(DspError::SampleRateMismatch(trace.sample_rate_hz, reference.sample_rate_hz));
    }
    let offset = reference.mean();
    let mut out = trace.clone();
    for s in &mut out.samples {
        *s -= offset;
    }
    out.calibration_reference_n = Some(offset);
    Ok(out)
}

/// Mean of the last `window_s` seconds of the trace.
pub fn window_mean(trace: &ForceTrace, window_s: f64) -> Result<f64, DspError> {
    let count = (window_s * trace.sample_rate_hz).round() as usize;
    if count == 0 || count > trace.len() {
        return Err(DspError::WindowTooLong { window_s, duration_s: trace.duration_s() });
    }
    let tail = &trace.samples[trace.len() - count..];
    Ok(tail.iter().sum::<f64>() / count as f64)
}

/// Binned averages replace each window with one point; sliding averages move
/// the window one sample at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AverageKind {
    Binned,
    Sliding,
}

/// Moving average as (time, mean) pairs. Binned averages are stamped at the
/// bin center; sliding averages at the window center. A trailing partial bin
/// is dropped.
pub fn moving_average(
    trace: &ForceTrace,
    window_s: f64,
    kind: AverageKind,
) -> Result<Vec<(f64, f64)>, DspError> {
    let width = (window_s * trace.sample_rate_hz).round() as usize;
    if width == 0 || width > trace.len() {
        return Err(DspError::WindowTooLong { window_s, duration_s: trace.duration_s() });
    }
    let mut out = Vec::new();
    match kind {
        AverageKind::Binned => {
            for (bin, chunk) in trace.samples.chunks_exact(width).enumerate() {
                let mean = chunk.iter().sum::<f64>() / width as f64;
                let t = (bin as f64 + 0.5) * width as f64 / trace.sample_rate_hz;
                out.push((t, mean));
            }
        }
        AverageKind::Sliding => {
            let mut acc: f64 = trace.samples[..width].iter().sum();
            out.push(((width as f64 / 2.0) / trace.sample_rate_hz, acc / width as f64));
            for i in width..trace.len() {
                acc += trace.samples[i] - trace.samples[i - width];
                let t = ((i + 1 - width) as f64 + width as f64 / 2.0) / trace.sample_rate_hz;
                out.push((t, acc / width as f64));
            }
        }
    }
    Ok(out)
}
