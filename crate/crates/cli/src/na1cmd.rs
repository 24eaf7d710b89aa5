use anyhow::{anyhow, bail, Result};
use enlarge_core::initial::{density_system, eta_family, initial_filtration};
use enlarge_core::market::Market;
use enlarge_core::na1::{check_na1, Na1Verdict};
use enlarge_core::process::Process;
use enlarge_core::progressive::{azema, eta_analysis, progressive_filtration};
use enlarge_core::space::Filtration;
use serde_json::{json, Value};

use crate::render::{filtration as render_filtration, times, verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Stop {
    #[value(name = "tau")]
    Tau,
}

/// Resolves an asset name: a market asset, `S_arb` (needs `tau`), `S_J`
/// (needs a signal) or `S_<label>` for one label of the signal.
fn resolve(m: &Market, name: &str) -> Result<Process> {
    if let Some(p) = m.asset(name) {
        return Ok(p.clone());
    }
    if name == "S_arb" {
        let tau = m.tau.as_ref().ok_or_else(|| anyhow!("asset S_arb needs \"tau\" in the market spec"))?;
        return Ok(eta_analysis(&m.space, &azema(&m.space, tau)?)?.s_arb);
    }
    if let Some(label) = name.strip_prefix("S_") {
        if let Some(signal) = &m.signal {
            let ds = density_system(&m.space, signal)?;
            let fam = eta_family(&m.space, signal, &ds)?;
            if label == "J" {
                return Ok(fam.s_j);
            }
            if let Some(x) = signal.label(label) {
                return Ok(fam.per_label[x].s.clone());
            }
        }
    }
    bail!("unknown asset {name:?}; known assets: {}", m.asset_names.join(", "))
}

/// `G` is the progressive enlargement when the market has `tau`, otherwise
/// the initial enlargement by the signal.
fn g_filtration(m: &Market) -> Result<Filtration> {
    match (&m.tau, &m.signal) {
        (Some(tau), _) => Ok(progressive_filtration(&m.space, tau)?),
        (None, Some(signal)) => Ok(initial_filtration(&m.space, signal)?),
        (None, None) => bail!("filtration G needs \"tau\" or \"signal\" in the market spec"),
    }
}

pub fn run(m: &Market, which: Which, names: &[String], stop: Option<Stop>) -> Result<(Value, Na1Verdict)> {
    if names.is_empty() {
        bail!("--assets is empty");
    }
    let assets = names.iter().map(|n| resolve(m, n)).collect::<Result<Vec<_>>>()?;
    let filtration = match which {
        Which::F => m.space.filtration().clone(),
        Which::G => g_filtration(m)?,
    };
    let stop = match stop {
        Some(Stop::Tau) => Some(m.tau.as_ref().ok_or_else(|| anyhow!("--stop tau needs \"tau\" in the market spec"))?),
        None => None,
    };
    let v = check_na1(m.space.probs(), &filtration, &assets, stop)?;
    let ids = &m.atom_ids;
    let report = json!({
        "filtration": match which { Which::F => "F", Which::G => "G" },
        "filtration_cells": render_filtration(ids, &filtration),
        "assets": names,
        "stop": stop.map(|s| times(ids, s)),
        "verdict": verdict(ids, names, &filtration, &v),
    });
    Ok((report, v))
}
