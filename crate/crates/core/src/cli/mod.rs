//! Command-line front end: config parsing, dispatch and output.

mod config;
mod output;
mod units;

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::{locate, parse_config, parse_str, Experiment, RunConfig, Settings, DEFAULT_MODES};
pub use output::{
    emit, emit_series, number, render, render_series, render_table, sidecar_path, write_sidecar, Format, Outcome, Row,
    Table,
};
pub use units::{parse_quantity, Angle, Dimension, Frequency, Time};

use crate::effective::effective_nuclear_model;
use crate::experiments::{
    run_fidelity_map, run_gate_pipeline, run_rf_sweep, run_selectivity, run_sensing, transfer_sweep, validate_rwa,
};
use crate::{Error, Result, TWO_PI};

#[derive(Parser, Debug)]
#[command(
    name = "nvgate",
    version,
    about = "Simulate NV-mediated nuclear spin gates with periodic electron resets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Data file; a `<out>.meta.json` sidecar is written next to it. Stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweep points: a positive integer or `auto`.
    #[arg(long, global = true, default_value = "auto", value_parser = parse_threads)]
    pub threads: Threads,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Nuclear state transfer for a list of simulation modes.
    Transfer,
    /// Gate infidelity over MW detuning and Rabi error.
    FidelityMap,
    /// Sensor population while the second target's RF frequency is swept.
    SweepRf,
    /// Gate fidelity versus the spectator detuning.
    Selectivity,
    /// Sensor population across a band of RF frequencies.
    Sense,
    /// Prepare, gate and read out in rotated bases.
    Pipeline,
    /// Scalars of the effective nuclear model.
    EffectiveModel,
    /// Time-dependent versus rotating-wave propagation, and the lab-frame Rabi check.
    ValidateRwa,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Transfer => Experiment::Transfer,
            Command::FidelityMap => Experiment::FidelityMap,
            Command::SweepRf => Experiment::SweepRf,
            Command::Selectivity => Experiment::Selectivity,
            Command::Sense => Experiment::Sense,
            Command::Pipeline => Experiment::Pipeline,
            Command::EffectiveModel => Experiment::EffectiveModel,
            Command::ValidateRwa => Experiment::ValidateRwa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

fn parse_threads(s: &str) -> std::result::Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
        _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
    }
}

extern "C" {
    fn openblas_set_num_threads(n: std::ffi::c_int);
}

/// Keeps BLAS single-threaded; sweep points are the unit of parallelism.
fn single_threaded_blas() {
    // SAFETY: plain setter in the linked OpenBLAS, no pointers involved.
    unsafe { openblas_set_num_threads(1) }
}

/// Runs the experiment of a validated config. Sweeps use the current rayon
/// pool; results are aggregated in grid order.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let spec = &cfg.spec;
    Ok(match &cfg.settings {
        Settings::Transfer { modes } => Outcome::Sweep(transfer_sweep(spec, modes)?),
        Settings::FidelityMap {
            mw_detuning,
            rabi_error,
            gate_time,
        } => Outcome::Sweep(run_fidelity_map(spec, mw_detuning, rabi_error, *gate_time)?),
        Settings::SweepRf { omega_rf2, time } => Outcome::Sweep(run_rf_sweep(spec, omega_rf2, *time)?),
        Settings::Selectivity { delta3, gate_time } => Outcome::Sweep(run_selectivity(spec, delta3, *gate_time)?),
        Settings::Sense { omega_rf, time } => Outcome::Sweep(run_sensing(spec, omega_rf, *time)?),
        Settings::Pipeline {
            theta_prep,
            theta_read,
            gate_time,
            mode,
        } => {
            let t = match gate_time {
                Some(t) => *t,
                None => crate::experiments::default_gate_time(spec)?,
            };
            let r = run_gate_pipeline(spec, theta_prep, theta_read, t, *mode)?;
            let mut table = Table::default();
            for (label, p) in r.labels.iter().zip(&r.populations) {
                table.push(&format!("P_{label}"), *p, "1");
            }
            table.push("parity_contrast", r.parity_contrast, "1");
            table.push("gate_time", r.gate_time, "s");
            table.diagnostics = Some(r.diagnostics);
            table.metadata = json!({ "experiment": "pipeline", "mode": mode });
            Outcome::Table(table)
        }
        Settings::EffectiveModel => Outcome::Table(effective_table(cfg)?),
        Settings::ValidateRwa {
            duration,
            lab_scale,
            min_fidelity,
            max_rabi_error,
        } => {
            let r = validate_rwa(spec, *duration, *lab_scale)?;
            let mut t = Table::default();
            t.push("duration", r.duration, "s");
            t.push("state_fidelity", r.state_fidelity, "1");
            t.push("lab_rabi", r.lab_rabi, "rad/s");
            t.push("lab_rabi", r.lab_rabi / TWO_PI, "Hz");
            t.push("dressed_rabi", r.dressed_rabi, "rad/s");
            t.push("dressed_rabi", r.dressed_rabi / TWO_PI, "Hz");
            t.push("rabi_relative_error", r.rabi_relative_error, "1");
            t.push("lab_scale", r.lab_scale, "1");
            let pass = r.passes(*min_fidelity, *max_rabi_error);
            t.push("passed", if pass { 1.0 } else { 0.0 }, "1");
            t.metadata = json!({
                "experiment": "validate-rwa",
                "min_fidelity": min_fidelity,
                "max_rabi_error": max_rabi_error,
                "passed": pass,
            });
            Outcome::Table(t)
        }
    })
}

fn effective_table(cfg: &RunConfig) -> Result<Table> {
    let m = effective_nuclear_model(&cfg.spec.register, &cfg.spec.dissipation, cfg.spec.convention)?;
    let mut t = Table::default();
    for (k, v) in [("g_e", m.g_e), ("g_e_prime", m.g_e_prime)] {
        t.push(k, v, "rad/s");
        t.push(k, v / TWO_PI, "Hz");
    }
    t.push("p", m.p, "1");
    t.push("gamma_r", m.gamma_r, "1/s");
    t.push("gamma_N", m.gamma_n, "1/s");
    t.push("validity_ratio", m.validity_ratio, "1");
    t.push("transfer_time", m.transfer_time(), "s");
    t.metadata = json!({ "experiment": "effective-model", "gate_capable": m.gate_capable() });
    Ok(t)
}

/// Everything needed to repeat a run: the verbatim config, its resolved
/// form, derived scalars and provenance.
pub fn sidecar(cfg: &RunConfig, outcome: &Outcome, format: Format, threads: usize) -> serde_json::Value {
    let echo = toml::from_str::<toml::Value>(&cfg.source)
        .ok()
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or(serde_json::Value::Null);
    let effective = match effective_nuclear_model(&cfg.spec.register, &cfg.spec.dissipation, cfg.spec.convention) {
        Ok(m) => serde_json::to_value(m.scalars()).unwrap_or_default(),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    json!({
        "tool": "nvgate",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix_s": timestamp,
        "experiment": cfg.experiment.name(),
        "config_path": cfg.path,
        "config_toml": cfg.source,
        "config": echo,
        "resolved": {
            "spec": cfg.spec,
            "settings": cfg.settings,
        },
        "effective_model": effective,
        "validity": cfg.spec.register.validity(),
        "result": {
            "metadata": outcome.metadata(),
            "diagnostics": outcome.diagnostics(),
        },
        "format": format,
        "threads": threads,
    })
}

/// Machine-readable error record for stderr.
pub fn error_record(e: &Error, source: Option<&str>) -> serde_json::Value {
    let mut rec = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    if let Error::Config { key, .. } = e {
        rec["key"] = json!(key);
        if let Some(line) = source.and_then(|s| locate(s, key)) {
            rec["line"] = json!(line);
        }
    }
    if let Error::Io { path, .. } = e {
        rec["path"] = json!(path);
    }
    rec
}

fn fail(e: &Error, source: Option<&str>) -> i32 {
    eprintln!("{}", error_record(e, source));
    e.exit_code()
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let Some(path) = cli.config.as_deref() else {
        return fail(&Error::config("--config", "a configuration file is required"), None);
    };
    let cfg = match parse_config(path, Some(cli.command.into())) {
        Ok(c) => c,
        Err(e) => return fail(&e, std::fs::read_to_string(path).ok().as_deref()),
    };
    single_threaded_blas();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Threads::Fixed(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return fail(&Error::InvalidArgument(format!("cannot start worker pool: {e}")), None),
    };
    log::info!(
        "running {} on {} threads",
        cfg.experiment.name(),
        pool.current_num_threads()
    );
    let outcome = match pool.install(|| execute(&cfg)) {
        Ok(o) => o,
        Err(e) => return fail(&e, Some(&cfg.source)),
    };
    let written = match &cli.out {
        Some(out) => emit(&outcome, cli.format, out)
            .and_then(|_| write_sidecar(out, &sidecar(&cfg, &outcome, cli.format, pool.current_num_threads())))
            .map(|_| ()),
        None => render(&outcome, cli.format).map(|text| print!("{text}")),
    };
    if let Err(e) = written {
        return fail(&e, None);
    }
    if let Outcome::Table(t) = &outcome {
        if t.metadata.get("passed") == Some(&json!(false)) {
            return fail(
                &Error::Numerical(format!(
                    "RWA validation failed: state fidelity {:.6}, Rabi relative error {:.3e}",
                    t.get("state_fidelity", "1").unwrap_or(f64::NAN),
                    t.get("rabi_relative_error", "1").unwrap_or(f64::NAN)
                )),
                None,
            );
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_flag_parsing() {
        assert_eq!(parse_threads("auto"), Ok(Threads::Auto));
        assert_eq!(parse_threads("3"), Ok(Threads::Fixed(3)));
        assert!(parse_threads("0").is_err());
        assert!(parse_threads("many").is_err());
    }

    #[test]
    fn config_error_record_has_key_and_line() {
        let text = "[drive]\nmw_rabi = 400\n";
        let e = parse_str(text, Some(Experiment::EffectiveModel)).unwrap_err();
        let rec = error_record(&e, Some(text));
        assert_eq!(rec["exit_code"], 2);
        assert_eq!(rec["key"], "drive.mw_rabi");
        assert_eq!(rec["line"], 2);
    }
}
