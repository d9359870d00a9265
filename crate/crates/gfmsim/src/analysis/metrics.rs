//! Frequency-stability metrics: nadir, peak, settling frequency, windowed
//! rate of change of frequency, MVA-weighted system frequency, and
//! aggregate inertia.

use serde::{Deserialize, Serialize};

use crate::analysis::pencil::{matrix_pencil, MatrixPencilOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMetrics {
    /// Minimum post-event frequency (Hz).
    pub nadir_hz: f64,
    /// Maximum post-event frequency (Hz).
    pub peak_hz: f64,
    /// Mean frequency over the trailing settle window (Hz).
    pub settling_hz: f64,
    /// Largest sliding-window frequency slope magnitude (Hz/s).
    pub max_rocof_hz_per_s: f64,
    /// Dominant oscillatory mode of the detrended signal, when one exists.
    pub dominant_mode_hz: Option<f64>,
    pub dominant_mode_damping: Option<f64>,
}

/// Fraction of the post-event window averaged for the settling frequency,
/// with a 0.5 s floor.
const SETTLE_FRACTION: f64 = 0.1;
/// Oscillations slower than this are treated as trend, not a mode.
const MIN_MODE_HZ: f64 = 0.05;
/// Sample cap handed to the matrix pencil; grid modes live well below the
/// decimated Nyquist rate this leaves.
const PENCIL_MAX_SAMPLES: usize = 400;

/// Computes the frequency metrics of a uniformly sampled trace.
///
/// `event_time` marks the disturbance; extrema and the ROCOF search start
/// there. The sliding window is `window` seconds wide, rounded to whole
/// samples.
pub fn frequency_metrics(
    time: &[f64],
    f_hz: &[f64],
    event_time: Option<f64>,
    window: f64,
) -> Result<FrequencyMetrics> {
    if time.len() != f_hz.len() || time.len() < 2 {
        return Err(Error::Analysis("metrics need matched time/frequency arrays".into()));
    }
    let dt = time[1] - time[0];
    if !(dt > 0.0) {
        return Err(Error::Analysis("metrics need an increasing time grid".into()));
    }
    if !(window > 0.0) || window >= (time[time.len() - 1] - time[0]) {
        return Err(Error::Analysis(format!(
            "window {window} s does not fit the series"
        )));
    }
    let start = match event_time {
        Some(t_ev) => time
            .iter()
            .position(|&t| t >= t_ev - 0.5 * dt)
            .unwrap_or(0),
        None => 0,
    };
    let post = &f_hz[start..];
    if post.len() < 2 {
        return Err(Error::Analysis("no samples after the event".into()));
    }

    let nadir_hz = post.iter().copied().fold(f64::INFINITY, f64::min);
    let peak_hz = post.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let settle_len = ((post.len() as f64 * SETTLE_FRACTION) as usize)
        .max((0.5 / dt).round() as usize)
        .min(post.len());
    let tail = &post[post.len() - settle_len..];
    let settling_hz = tail.iter().sum::<f64>() / tail.len() as f64;

    let w = (window / dt).round().max(1.0) as usize;
    if w >= post.len() {
        return Err(Error::Analysis("window longer than the post-event series".into()));
    }
    let mut max_rocof = 0.0f64;
    for i in 0..post.len() - w {
        let slope = (post[i + w] - post[i]).abs() / (w as f64 * dt);
        max_rocof = max_rocof.max(slope);
    }

    // Dominant mode of the detrended post-event trace.
    let (dominant_mode_hz, dominant_mode_damping) = if post.len() >= 32 {
        let m = post.len() as f64;
        let mean_i = (m - 1.0) / 2.0;
        let mean_y = post.iter().sum::<f64>() / m;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &y) in post.iter().enumerate() {
            let di = i as f64 - mean_i;
            num += di * (y - mean_y);
            den += di * di;
        }
        let slope = if den > 0.0 { num / den } else { 0.0 };
        let detrended: Vec<f64> = post
            .iter()
            .enumerate()
            .map(|(i, &y)| y - mean_y - slope * (i as f64 - mean_i))
            .collect();
        let opts = MatrixPencilOptions {
            max_samples: Some(PENCIL_MAX_SAMPLES),
            ..Default::default()
        };
        match matrix_pencil(&detrended, dt, &opts) {
            Ok(modes) => {
                let dom = modes
                    .iter()
                    .find(|m| m.frequency_hz > MIN_MODE_HZ && m.damping < 0.999);
                (dom.map(|m| m.frequency_hz), dom.map(|m| m.damping))
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };

    Ok(FrequencyMetrics {
        nadir_hz,
        peak_hz,
        settling_hz,
        max_rocof_hz_per_s: max_rocof,
        dominant_mode_hz,
        dominant_mode_damping,
    })
}

/// MVA-weighted average of per-device traces, sample by sample.
pub fn weighted_frequency(series: &[&[f64]], ratings_mva: &[f64]) -> Result<Vec<f64>> {
    if series.is_empty() || series.len() != ratings_mva.len() {
        return Err(Error::Analysis("weighted frequency needs one rating per series".into()));
    }
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::Analysis("weighted frequency needs aligned series".into()));
    }
    let total: f64 = ratings_mva.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Analysis("total rating must be positive".into()));
    }
    let mut out = vec![0.0; n];
    for (trace, &rating) in series.iter().zip(ratings_mva) {
        for (acc, &v) in out.iter_mut().zip(*trace) {
            *acc += rating * v;
        }
    }
    for v in out.iter_mut() {
        *v /= total;
    }
    Ok(out)
}

/// MVA-weighted inertia `sum(H_i S_i) / sum(S_i)` in seconds.
pub fn aggregate_inertia(inertia_s: &[f64], ratings_mva: &[f64]) -> Result<f64> {
    if inertia_s.is_empty() || inertia_s.len() != ratings_mva.len() {
        return Err(Error::Analysis("aggregate inertia needs one rating per device".into()));
    }
    let total: f64 = ratings_mva.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Analysis("total rating must be positive".into()));
    }
    Ok(inertia_s
        .iter()
        .zip(ratings_mva)
        .map(|(h, s)| h * s)
        .sum::<f64>()
        / total)
}
