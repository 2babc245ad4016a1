//! The three subcommands. Each one writes its files into `out` and
//! returns the list of paths written.

use std::path::{Path, PathBuf};

use isolink::brownian::{
    calibrate_receiver_radius, estimate_hit_probability, hit_probability_pair, CalibrationReport, CalibrationTarget,
    HitRecord,
};
use isolink::energy::{total_energy, EnergyBreakdown};
use isolink::modulation::Scheme;
use isolink::physics::MessengerSpec;
use isolink::rate::{format_sig9, sweep_rate_curve, RateCurve};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const COMPARISON_SCHEMA: &str = "isolink/rate-comparison/1";
pub const RATE_JSON_SCHEMA: &str = "isolink/rate-curve-json/1";
pub const MC_SCHEMA: &str = "isolink/mc-phit/1";
pub const ENERGY_SCHEMA: &str = "isolink/energy/1";
pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

fn config_json(cfg: &RunConfig) -> String {
    serde_json::to_string(&cfg.embedded()).expect("config serializes to JSON")
}

fn provenance(cfg: &RunConfig) -> Vec<String> {
    vec![format!("seed: {}", cfg.seed), format!("config: {}", config_json(cfg))]
}

fn write(out: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = out.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::run(format!("cannot write {}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes to JSON");
    text.push('\n');
    write(out, name, &text, written)
}

/// Splits the configured messengers into usable ones and incomplete ones,
/// warning about the latter.
type Selection = (Vec<(usize, MessengerSpec)>, Vec<String>);

fn complete_messengers(cfg: &RunConfig) -> Result<Selection, CliError> {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (i, name) in cfg.messengers.iter().enumerate() {
        match cfg.messenger(name) {
            Ok(m) => ok.push((i, m)),
            Err(e) if cfg.catalog.iter().any(|c| &c.name == name) => {
                eprintln!("warning: skipping incomplete messenger `{name}`: {e}");
                skipped.push(name.clone());
            }
            Err(e) => return Err(e),
        }
    }
    if ok.is_empty() {
        return Err(CliError::config(format!(
            "messengers: none of {:?} has complete constants",
            cfg.messengers
        )));
    }
    if ok[0].0 != 0 && cfg.messengers.len() > 1 {
        return Err(CliError::config(format!(
            "messengers: the reference messenger `{}` is incomplete",
            cfg.messengers[0]
        )));
    }
    Ok((ok, skipped))
}

fn check_scheme(scheme: Scheme, messenger: &MessengerSpec) -> Result<(), CliError> {
    let types_needed = match scheme {
        Scheme::Icsk { .. } => 1,
        Scheme::ImoskAwgn { order } => order,
        Scheme::BImoskMuta | Scheme::QIrsk => 2,
    };
    if types_needed > messenger.family_order {
        return Err(CliError::config(format!(
            "schemes: {scheme} needs {types_needed} distinguishable types but `{}` has family_order {}",
            messenger.name, messenger.family_order
        )));
    }
    if scheme == Scheme::BImoskMuta && messenger.optical_rotation.is_none() {
        return Err(CliError::config(format!(
            "schemes: {scheme} needs catalog.{}.optical_rotation",
            messenger.name
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct RateFile<'a> {
    schema: &'static str,
    seed: u64,
    messenger: &'a str,
    config: RunConfig,
    curve: &'a RateCurve,
}

pub fn rate_sweep(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if cfg.schemes.is_empty() {
        return Err(CliError::usage("schemes: the scheme list is empty"));
    }
    cfg.validate_common()?;
    cfg.search
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    let snr = cfg.sweep.snr_db.values()?;
    if snr.is_empty() || snr.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::config("sweep.snr_db: must be a non-empty, strictly increasing grid"));
    }
    let (messengers, skipped) = complete_messengers(cfg)?;
    for (_, m) in &messengers {
        for s in &cfg.schemes {
            check_scheme(*s, m)?;
        }
    }

    let mut curves = Vec::new();
    for (index, messenger) in &messengers {
        let link = cfg.link_for(*index)?;
        for &scheme in &cfg.schemes {
            let curve = sweep_rate_curve(scheme, &link, &snr, &cfg.search)?;
            eprintln!("{scheme} / {}: peak {:.6} bits", messenger.name, curve.peak_rate());
            curves.push((messenger.clone(), curve));
        }
    }

    let mut comments = provenance(cfg);
    if !skipped.is_empty() {
        comments.push(format!("incomplete messengers skipped: {}", skipped.join(", ")));
    }
    let mut written = Vec::new();
    for (messenger, curve) in &curves {
        let stem = format!("rate_{}_{}", curve.scheme, messenger.name);
        write(out, &format!("{stem}.csv"), &curve.to_csv(&comments), &mut written)?;
        let file = RateFile {
            schema: RATE_JSON_SCHEMA,
            seed: cfg.seed,
            messenger: &messenger.name,
            config: cfg.embedded(),
            curve,
        };
        write_json(out, &format!("{stem}.json"), &file, &mut written)?;
    }

    let mut table = format!("# schema: {COMPARISON_SCHEMA}\n");
    for c in &comments {
        table.push_str(&format!("# {c}\n"));
    }
    table.push_str("scheme,messenger,snr_db,molecules,unit_energy_j,rate_bits\n");
    for (messenger, curve) in &curves {
        for p in &curve.points {
            let energy = total_energy(p.molecules, &cfg.cell, messenger)
                .map_err(|e| CliError::config(format!("cell: {e}")))?;
            table.push_str(&format!(
                "{},{},{},{},{},{}\n",
                curve.scheme,
                messenger.name,
                format_sig9(p.snr_db),
                format_sig9(p.molecules),
                format_sig9(energy.e_total),
                format_sig9(p.rate)
            ));
        }
    }
    write(out, "comparison.csv", &table, &mut written)?;
    write(out, RESOLVED_CONFIG, &cfg.to_toml(), &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct McFile {
    schema: &'static str,
    seed: u64,
    config: RunConfig,
    records: Vec<NamedRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<CalibrationReport>,
}

#[derive(Serialize)]
struct NamedRecord {
    messenger: String,
    #[serde(flatten)]
    record: HitRecord,
}

pub fn mc_phit(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate_common()?;
    let (messengers, _) = complete_messengers(cfg)?;
    let base = cfg.mc_config(None);
    base.validate().map_err(|e| CliError::config(format!("mc: {e}")))?;

    let mut file = McFile {
        schema: MC_SCHEMA,
        seed: cfg.seed,
        config: cfg.embedded(),
        records: Vec::new(),
        calibration: None,
    };
    let mut cfg = cfg.clone();
    if cfg.mc.calibrate {
        let target = CalibrationTarget {
            distance: cfg.channel.distance,
            diffusion: cfg.diffusion(&messengers[0].1)?,
            ts: cfg.channel.ts,
            dimensions: cfg.mc.dimensions,
            target_p1: cfg.mc.target_p1.unwrap_or(cfg.channel.p1),
            reference_p2: Some(cfg.mc.reference_p2.unwrap_or(cfg.channel.p2)),
        };
        let report = calibrate_receiver_radius(&target, &base)?;
        eprintln!(
            "calibrated radius {:.6e} m: held-out p1 {:.4}, p2 {:.4}",
            report.receiver_radius, report.held_out_p1.p_hat, report.held_out_p2.p_hat
        );
        cfg.mc.receiver_radius = Some(report.receiver_radius);
        let converged = report.converged;
        file.calibration = Some(report);
        if !converged {
            let mut written = Vec::new();
            write_json(out, "mc_phit.json", &file, &mut written)?;
            return Err(CliError::run(format!(
                "calibration did not converge; partial report written to {}",
                written[0].display()
            )));
        }
    }

    let geom = cfg.geometry()?;
    for (_, messenger) in &messengers {
        let diffusion = cfg.diffusion(messenger)?;
        let configs = match cfg.mc.horizon {
            Some(h) => {
                let c = cfg.mc_config(Some(h));
                vec![(c, estimate_hit_probability(&geom, diffusion, &c)?)]
            }
            None => {
                let (a, b) = hit_probability_pair(&geom, diffusion, cfg.channel.ts, &base)?;
                let two = cfg.mc_config(Some(2.0 * cfg.channel.ts));
                vec![(base, a), (two, b)]
            }
        };
        for (config, estimate) in configs {
            file.records.push(NamedRecord {
                messenger: messenger.name.clone(),
                record: HitRecord {
                    geometry: geom,
                    diffusion,
                    config,
                    estimate,
                },
            });
        }
    }
    let mut written = Vec::new();
    write_json(out, "mc_phit.json", &file, &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct EnergyFile {
    schema: &'static str,
    seed: u64,
    config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    incomplete: Vec<String>,
    reports: Vec<EnergyReport>,
}

#[derive(Serialize)]
struct EnergyReport {
    messenger: MessengerSpec,
    breakdowns: Vec<EnergyBreakdown>,
}

pub fn energy(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if cfg.energy.molecules.is_empty() {
        return Err(CliError::usage("energy.molecules: the molecule list is empty"));
    }
    let (messengers, skipped) = complete_messengers(cfg)?;
    let mut reports = Vec::new();
    for (_, messenger) in messengers {
        let breakdowns = cfg
            .energy
            .molecules
            .iter()
            .map(|&n| total_energy(n, &cfg.cell, &messenger))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::config(format!("energy ({}): {e}", messenger.name)))?;
        reports.push(EnergyReport { messenger, breakdowns });
    }
    let file = EnergyFile {
        schema: ENERGY_SCHEMA,
        seed: cfg.seed,
        config: cfg.embedded(),
        incomplete: skipped,
        reports,
    };
    let mut written = Vec::new();
    write_json(out, "energy.json", &file, &mut written)?;
    Ok(written)
}
