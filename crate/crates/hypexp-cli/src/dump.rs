//! The `dump-controller` and `dump-sigma-system` subcommands: polynomial
//! text for fixture diffing.

use anyhow::Result;
use std::path::Path;

use hypexp::controller::{synthesize_with, SynthesisOptions};
use hypexp::sigma::build_sigma_system;

use crate::config::ExperimentConfig;

pub fn dump_controller(config_path: &Path, force: bool) -> Result<()> {
    let config = ExperimentConfig::load(config_path)?;
    let spec = config.controller_spec()?;
    let ctrl = synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: force,
            allow_small_m: force,
        },
    )?;
    for (i, s) in ctrl.sigma_forms.iter().enumerate() {
        println!("sigma_{} = {}", i + 1, s);
    }
    for (i, w) in ctrl.omega_forms.iter().enumerate() {
        println!("omega_{} = {}", i + 1, w);
    }
    println!("Omega = {}", ctrl.cancel_form);
    println!("u = {}", ctrl.control_form);
    println!("S:");
    print!("{}", ctrl.s);
    println!("S^-1:");
    print!("{}", ctrl.s_inv);
    Ok(())
}

pub fn dump_sigma_system(config_path: &Path, force: bool) -> Result<()> {
    let config = ExperimentConfig::load(config_path)?;
    let spec = config.controller_spec()?;
    let ctrl = synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: force,
            allow_small_m: force,
        },
    )?;
    let sys = build_sigma_system(&ctrl)?;
    println!("M:");
    print!("{}", sys.m_mat);
    println!("L:");
    print!("{}", sys.l_mat);
    Ok(())
}
