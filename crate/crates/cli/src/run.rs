use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use dbar_nft::harness::{
    decay_experiment, dk_system_check, gen_potential, lipschitz_experiment, plancherel_check, roundtrip_check,
    roundtrip_report, DecaySettings, ExperimentReport, LipschitzSettings,
};
use dbar_nft::io::{read_field, read_scattering, write_field, write_scattering};
use dbar_nft::nft::{forward_transform, inverse_transform, KGrid};
use dbar_nft::ComplexField;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write the configured potential as CF2D.
    Gen,
    /// Scattering transform of the configured (or `input`) potential, as SD2D.
    Forward,
    /// Reconstruct a potential from SD2D data and compare it with the configured one.
    Inverse,
    Plancherel,
    Roundtrip,
    Lipschitz,
    Decay,
    /// Finite-difference check of the k-derivative system.
    Dksys,
}

fn potential(config: &RunConfig) -> Result<ComplexField, CliError> {
    Ok(gen_potential(&config.potential_spec(), &config.grid()?)?)
}

fn write_report(config: &RunConfig, report: ExperimentReport) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![report.write_csv(&config.out_dir)?])
}

/// Runs one subcommand on a validated configuration; returns the files written.
pub fn run(command: Command, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&config.out_dir)?;
    let out = |name: &str, ext: &str| config.out_dir.join(format!("{name}-{}.{ext}", config.seed));
    let cfg = &config.solver;
    match command {
        Command::Gen => {
            let path = out("potential", "cf2d");
            write_field(&path, &potential(config)?)?;
            Ok(vec![path])
        }
        Command::Forward => {
            let q = match &config.input {
                Some(input) => read_field(input)?,
                None => potential(config)?,
            };
            let kgrid = if config.input.is_some() && config.kgrid_m.is_none() && config.kgrid_k.is_none() {
                KGrid::dual_of(q.grid())
            } else {
                config.kgrid()?
            };
            let path = out("scattering", "sd2d");
            write_scattering(&path, &forward_transform(&q, &kgrid, cfg)?)?;
            Ok(vec![path])
        }
        Command::Inverse => {
            let input = config.input.clone().unwrap_or_else(|| out("scattering", "sd2d"));
            let data = read_scattering(&input)?;
            let grid = config.grid()?;
            let back = inverse_transform(&data, &grid, cfg)?;
            let path = out("inverse", "cf2d");
            write_field(&path, &back)?;
            let report = roundtrip_report(&potential(config)?, &data, &back, cfg, config.seed)?;
            let mut written = vec![path];
            written.extend(write_report(config, report)?);
            Ok(written)
        }
        Command::Plancherel => {
            write_report(config, plancherel_check(&config.potential_spec(), &config.resolutions()?, cfg)?)
        }
        Command::Roundtrip => {
            write_report(config, roundtrip_check(&config.potential_spec(), &config.resolutions()?, cfg)?)
        }
        Command::Lipschitz => {
            let settings = LipschitzSettings {
                s: config.sobolev()?,
                ball_radius: config.ball_radius,
                pairs: config.pairs,
                seed: config.seed,
                template: config.potential_spec(),
                perturbation_steps: config.perturbation_steps,
            };
            write_report(config, lipschitz_experiment(&settings, &config.resolutions()?, cfg)?)
        }
        Command::Decay => {
            let settings = DecaySettings {
                s: config.sobolev()?,
                p: config.p,
                k_list: config.k_list.clone(),
                probes: config.probes,
                seed: config.seed,
            };
            write_report(config, decay_experiment(&config.potential_spec(), &settings, &config.grid()?, cfg)?)
        }
        Command::Dksys => write_report(
            config,
            dk_system_check(&config.potential_spec(), config.k, &config.deltas, &config.grid()?, cfg)?,
        ),
    }
}
