//! CSV emission and (for the metrics command) parsing of our own output.
//!
//! Numeric fields use Rust's shortest round-trip formatting: full
//! precision, locale-independent, and stable across runs.

use std::fmt::Write as _;

use crate::analysis::{FrequencyMetrics, ModeKind, SweepPoint};
use crate::error::{Error, Result};
use crate::simulator::TimeSeries;

/// Renders a time series with a `time_s` column followed by the channels.
pub fn timeseries_csv(series: &TimeSeries) -> String {
    let mut out = String::new();
    out.push_str("time_s");
    for ch in &series.channels {
        out.push(',');
        out.push_str(&ch.name);
    }
    out.push('\n');
    for (i, t) in series.time.iter().enumerate() {
        write!(out, "{t}").expect("string write");
        for ch in &series.channels {
            write!(out, ",{}", ch.data[i]).expect("string write");
        }
        out.push('\n');
    }
    out
}

/// Parses a time-series CSV produced by [`timeseries_csv`].
pub fn parse_timeseries_csv(text: &str) -> Result<TimeSeries> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Case("empty CSV".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.first() != Some(&"time_s") {
        return Err(Error::Case("first CSV column must be time_s".into()));
    }
    let mut time = Vec::new();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); names.len() - 1];
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::Case(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                names.len(),
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Case(format!("line {}: bad number '{s}'", lineno + 2)))
        };
        time.push(parse(fields[0])?);
        for (k, f) in fields[1..].iter().enumerate() {
            data[k].push(parse(f)?);
        }
    }
    Ok(TimeSeries {
        time,
        channels: names[1..]
            .iter()
            .zip(data)
            .map(|(name, data)| crate::simulator::Channel {
                name: name.to_string(),
                data,
            })
            .collect(),
    })
}

/// One metrics row for a named channel.
pub fn metrics_csv(channel: &str, m: &FrequencyMetrics) -> String {
    let mut out = String::from(
        "channel,nadir_hz,peak_hz,settling_hz,max_rocof_hz_per_s,dom_mode_freq_hz,dom_mode_damping\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        channel,
        m.nadir_hz,
        m.peak_hz,
        m.settling_hz,
        m.max_rocof_hz_per_s,
        opt(m.dominant_mode_hz),
        opt(m.dominant_mode_damping)
    )
    .expect("string write");
    out
}

/// One row per (dispatch, mode): the sweep's modal table.
pub fn modal_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "p_set_pu,re_per_s,im_rad_per_s,freq_hz,damping,kind,gfm_participation,dominant_states\n",
    );
    for pt in points {
        let r = &pt.report;
        for i in 0..r.eigenvalues.len() {
            if r.eigenvalues[i].im < 0.0 {
                continue; // one row per conjugate pair
            }
            let kind = match r.kind(i) {
                ModeKind::Reference => "reference",
                ModeKind::Real => "real",
                ModeKind::Oscillatory => "oscillatory",
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                pt.p_set,
                r.eigenvalues[i].re,
                r.eigenvalues[i].im,
                r.frequency_hz(i),
                r.damping(i),
                kind,
                r.gfm_participation(i),
                r.dominant_states(i, 4).join("|")
            )
            .expect("string write");
        }
    }
    out
}

/// Controller curve table: deviation, frequency, and tangent droop across
/// a power grid.
pub fn curve_csv(params: &crate::droop::ExpDroopParams, grid: &[f64]) -> Result<String> {
    let mut out = String::from("p_pu,d_exp_pu,freq_hz,tangent_droop_pu\n");
    let f_nom = params.omega_b / (2.0 * std::f64::consts::PI);
    for &p in grid {
        let d = params.deviation(p)?;
        let tangent = params.tangent_droop(p)?;
        let freq = f_nom * (params.omega_nom + d);
        writeln!(out, "{p},{d},{freq},{tangent}").expect("string write");
    }
    Ok(out)
}
