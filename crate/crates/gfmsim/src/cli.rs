//! Command-line entry points: simulate, sweep, metrics, curves, validate.
//!
//! The binary is a thin wrapper over this module; everything here returns
//! [`RunArtifacts`] so the behavior is testable in-process.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{dispatch_sweep, frequency_metrics};
use crate::cases;
use crate::device::{DeviceModel, GfmController};
use crate::droop::ExpDroopParams;
use crate::error::{Error, Result};
use crate::io::{
    self, load_case, load_case_str, metrics_csv, modal_csv, parse_grid, timeseries_csv, LoadedCase,
    RunManifest,
};
use crate::simulator;

#[derive(Debug, Parser)]
#[command(
    name = "gfmsim",
    version,
    about = "Phasor-domain grid dynamics with exponential grid-forming droop"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CaseArg {
    /// Bundled case name (e.g. case_3bus_A) or path to a case file.
    #[arg(value_name = "CASE")]
    pub case_pos: Option<String>,
    /// Same as the positional argument; use one or the other.
    #[arg(long = "case", value_name = "CASE")]
    pub case_flag: Option<String>,
}

impl CaseArg {
    fn resolve(&self) -> Result<(String, Vec<u8>, LoadedCase)> {
        let name = match (&self.case_pos, &self.case_flag) {
            (Some(_), Some(_)) => {
                return Err(Error::Case("give the case either positionally or via --case".into()))
            }
            (Some(n), None) | (None, Some(n)) => n.clone(),
            (None, None) => {
                return Err(Error::Case(format!(
                    "no case given; bundled cases: {}",
                    cases::bundled_names().join(", ")
                )))
            }
        };
        if let Some(text) = cases::bundled_source(&name) {
            let loaded = load_case_str(text)?;
            return Ok((name, text.as_bytes().to_vec(), loaded));
        }
        let path = PathBuf::from(&name);
        if !path.exists() {
            return Err(Error::Case(format!(
                "'{name}' is neither a bundled case ({}) nor an existing file",
                cases::bundled_names().join(", ")
            )));
        }
        let bytes = std::fs::read(&path)?;
        let loaded = load_case(&path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or(name);
        Ok((stem, bytes, loaded))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a time-domain case and write time-series, metrics, and manifest.
    Simulate {
        #[command(flatten)]
        case: CaseArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the integration step (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Override the end time (s).
        #[arg(long)]
        t_end: Option<f64>,
        /// Run twice and fail unless the artifacts are bit-identical.
        #[arg(long)]
        seedless: bool,
    },
    /// Linearize across a dispatch grid and write the modal table.
    Sweep {
        #[command(flatten)]
        case: CaseArg,
        /// Dispatch grid start:step:stop in device pu.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Grid-forming device to sweep (defaults to the case's analysis
        /// section or the sole inverter).
        #[arg(long)]
        device: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Compute frequency metrics from a time-series CSV.
    Metrics {
        /// Time-series CSV produced by simulate.
        #[arg(value_name = "INPUT")]
        input: PathBuf,
        /// Channel to analyze (defaults to the first frequency column).
        #[arg(long)]
        channel: Option<String>,
        /// Sliding ROCOF window (s).
        #[arg(long, default_value_t = 0.1)]
        window: f64,
        /// Event time; metrics start here (defaults to the whole series).
        #[arg(long)]
        event_time: Option<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Emit the droop curve table (deviation, frequency, tangent droop).
    Curves {
        /// Optional case supplying the controller parameters (defaults to
        /// the study parameter set).
        #[command(flatten)]
        case: CaseArg,
        /// Power grid start:step:stop in pu.
        #[arg(long, default_value = "-1:0.005:1", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Parse and validate a case file.
    Validate {
        #[command(flatten)]
        case: CaseArg,
    },
}

/// Paths written by a command.
#[derive(Debug, Default, Clone)]
pub struct RunArtifacts {
    pub timeseries_csv: Option<PathBuf>,
    pub metrics_csv: Option<PathBuf>,
    pub modal_csv: Option<PathBuf>,
    pub curves_csv: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    /// Human-readable outcome lines.
    pub summary: Vec<String>,
}

fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn simulate_once(
    name: &str,
    input: &[u8],
    loaded: &LoadedCase,
    out_dir: &Path,
) -> Result<(RunArtifacts, String, String, String)> {
    let t0 = std::time::Instant::now();
    let output = simulator::run(&loaded.scenario)?;
    let wall = t0.elapsed().as_secs_f64();

    let ts_text = timeseries_csv(&output.series);
    let stats = output.stats_frequency();
    let metrics = frequency_metrics(
        &output.series.time,
        &stats,
        output.first_event,
        loaded.scenario.rocof_window,
    )?;
    let metrics_text = metrics_csv(&output.stats_channel, &metrics);
    let manifest = RunManifest::new(
        name,
        input,
        &loaded.scenario,
        loaded.defaults_applied.clone(),
        output.load_scale,
        wall,
    );

    let ts_path = out_dir.join(format!("{name}_timeseries.csv"));
    let metrics_path = out_dir.join(format!("{name}_metrics.csv"));
    let manifest_path = out_dir.join(format!("{name}_manifest.json"));
    write_artifact(&ts_path, &ts_text)?;
    write_artifact(&metrics_path, &metrics_text)?;
    write_artifact(&manifest_path, &manifest.to_json())?;

    let mut artifacts = RunArtifacts {
        timeseries_csv: Some(ts_path),
        metrics_csv: Some(metrics_path),
        manifest: Some(manifest_path),
        ..Default::default()
    };
    artifacts.summary.push(format!(
        "{name}: {} samples, nadir {:.4} Hz, peak {:.4} Hz, max ROCOF {:.4} Hz/s ({} channel), wall {:.2} s",
        output.series.time.len(),
        metrics.nadir_hz,
        metrics.peak_hz,
        metrics.max_rocof_hz_per_s,
        output.stats_channel,
        wall
    ));
    Ok((artifacts, ts_text, metrics_text, manifest.scenario_sha256))
}

/// Executes a parsed command; returns the artifacts it wrote.
pub fn execute(command: Command) -> Result<RunArtifacts> {
    match command {
        Command::Simulate {
            case,
            out_dir,
            dt,
            t_end,
            seedless,
        } => {
            let (name, input, mut loaded) = case.resolve()?;
            if let Some(dt) = dt {
                loaded.scenario.dt = dt;
            }
            if let Some(t_end) = t_end {
                loaded.scenario.t_end = t_end;
            }
            loaded.scenario.validate()?;
            let (mut artifacts, ts_a, m_a, hash_a) =
                simulate_once(&name, &input, &loaded, &out_dir)?;
            if seedless {
                let (_, ts_b, m_b, hash_b) = simulate_once(&name, &input, &loaded, &out_dir)?;
                if ts_a != ts_b || m_a != m_b || hash_a != hash_b {
                    return Err(Error::Case(
                        "seedless check failed: repeated run differs".into(),
                    ));
                }
                artifacts
                    .summary
                    .push("seedless check: repeated run bit-identical".into());
            }
            Ok(artifacts)
        }
        Command::Sweep {
            case,
            grid,
            device,
            out_dir,
        } => {
            let (name, _, loaded) = case.resolve()?;
            let (default_device, default_grid) = match &loaded.sweep {
                Some((d, g)) => (Some(d.clone()), Some(g.clone())),
                None => (None, None),
            };
            let device = match device.or(default_device) {
                Some(d) => d,
                None => {
                    let gfms: Vec<&str> = loaded
                        .scenario
                        .devices
                        .iter()
                        .filter(|d| d.is_gfm())
                        .map(|d| d.name.as_str())
                        .collect();
                    match gfms.as_slice() {
                        [only] => only.to_string(),
                        _ => {
                            return Err(Error::Case(
                                "give --device: the case has no unique grid-forming device".into(),
                            ))
                        }
                    }
                }
            };
            let grid = match grid {
                Some(text) => parse_grid(&text)?,
                None => default_grid.ok_or_else(|| {
                    Error::Case("give --grid: the case declares no sweep grid".into())
                })?,
            };
            let sweep = dispatch_sweep(&loaded.scenario, &device, &grid)?;
            let path = out_dir.join(format!("{name}_modal.csv"));
            write_artifact(&path, &modal_csv(&sweep.points))?;
            let mut artifacts = RunArtifacts {
                modal_csv: Some(path),
                ..Default::default()
            };
            artifacts.summary.push(format!(
                "{name}: swept '{device}' over {} points ({} skipped)",
                sweep.points.len(),
                sweep.skipped.len()
            ));
            for (p, why) in &sweep.skipped {
                artifacts
                    .summary
                    .push(format!("  skipped p_set={p}: {why}"));
            }
            Ok(artifacts)
        }
        Command::Metrics {
            input,
            channel,
            window,
            event_time,
            out_dir,
        } => {
            let text = std::fs::read_to_string(&input)?;
            let series = io::parse_timeseries_csv(&text)?;
            let channel = match channel {
                Some(c) => c,
                None => series
                    .channels
                    .iter()
                    .find(|c| c.name.starts_with("f_"))
                    .map(|c| c.name.clone())
                    .ok_or_else(|| Error::Case("no frequency channel in the CSV".into()))?,
            };
            let trace = series
                .channel(&channel)
                .ok_or_else(|| Error::UnknownRef {
                    kind: "channel",
                    name: channel.clone(),
                })?;
            let metrics = frequency_metrics(&series.time, trace, event_time, window)?;
            let stem = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input".into());
            let path = out_dir.join(format!("{stem}_metrics.csv"));
            write_artifact(&path, &metrics_csv(&channel, &metrics))?;
            let mut artifacts = RunArtifacts {
                metrics_csv: Some(path),
                ..Default::default()
            };
            artifacts.summary.push(format!(
                "{channel}: nadir {:.4} Hz, peak {:.4} Hz, settling {:.4} Hz, max ROCOF {:.4} Hz/s",
                metrics.nadir_hz, metrics.peak_hz, metrics.settling_hz, metrics.max_rocof_hz_per_s
            ));
            Ok(artifacts)
        }
        Command::Curves { case, grid, out_dir } => {
            let (name, params) = if case.case_pos.is_some() || case.case_flag.is_some() {
                let (name, _, loaded) = case.resolve()?;
                let params = loaded
                    .scenario
                    .devices
                    .iter()
                    .find_map(|d| match &d.model {
                        DeviceModel::Gfm(g) => match &g.controller {
                            GfmController::ExpDroop { params, .. } => Some(*params),
                            GfmController::Linear { .. } => None,
                        },
                        DeviceModel::Sg(_) => None,
                    })
                    .ok_or_else(|| {
                        Error::Case("case has no exponential-droop device".into())
                    })?;
                (name, params)
            } else {
                ("droop_e".to_string(), ExpDroopParams::default())
            };
            let grid = parse_grid(&grid)?;
            let path = out_dir.join(format!("{name}_curves.csv"));
            write_artifact(&path, &io::curve_csv(&params, &grid)?)?;
            let mut artifacts = RunArtifacts {
                curves_csv: Some(path),
                ..Default::default()
            };
            artifacts.summary.push(format!(
                "{name}: {} rows, linearization power p_l = {:.4} pu",
                grid.len(),
                params.p_l()?
            ));
            Ok(artifacts)
        }
        Command::Validate { case } => {
            let (name, _, loaded) = case.resolve()?;
            let mut artifacts = RunArtifacts::default();
            artifacts.summary.push(format!(
                "{name}: valid ({} buses, {} devices, {} events)",
                loaded.scenario.network.buses.len(),
                loaded.scenario.devices.len(),
                loaded.scenario.events.len()
            ));
            for d in &loaded.defaults_applied {
                artifacts.summary.push(format!("  default applied: {d}"));
            }
            Ok(artifacts)
        }
    }
}

/// Full command-line entry point for the binary.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with its own formatting.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(artifacts) => {
            for line in &artifacts.summary {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string() })
            );
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_default_params() {
        let dir = std::env::temp_dir().join("gfmsim_cli_curves_test");
        let _ = std::fs::remove_dir_all(&dir);
        let artifacts = execute(Command::Curves {
            case: CaseArg {
                case_pos: None,
                case_flag: None,
            },
            grid: "-1:0.5:1".into(),
            out_dir: dir.clone(),
        })
        .unwrap();
        let text = std::fs::read_to_string(artifacts.curves_csv.unwrap()).unwrap();
        assert!(text.starts_with("p_pu,d_exp_pu,freq_hz,tangent_droop_pu"));
        assert_eq!(text.lines().count(), 6);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn validate_names_bundled_cases_on_missing_arg() {
        let err = execute(Command::Validate {
            case: CaseArg {
                case_pos: None,
                case_flag: None,
            },
        })
        .unwrap_err();
        assert!(err.to_string().contains("case_3bus_A"));
    }

    #[test]
    fn validate_bundled_case() {
        let artifacts = execute(Command::Validate {
            case: CaseArg {
                case_pos: Some("case_3bus_B".into()),
                case_flag: None,
            },
        })
        .unwrap();
        assert!(artifacts.summary[0].contains("valid"));
    }
}
