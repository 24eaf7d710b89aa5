use anyhow::{bail, Result};
use enlarge_core::identities::{initial_identities, progressive_identities, Identity};
use enlarge_core::initial::{
    density_system, enlarge_initial, equivalence_report_initial, eta_b, eta_family, lift_deflator_initial,
};
use enlarge_core::market::Market;
use enlarge_core::na1::{check_na1, check_na1_localized, check_na1_market, verify_deflator};
use enlarge_core::process::Process;
use enlarge_core::progressive::{
    azema, enlarge_progressive, equivalence_report, eta_analysis, lift_deflator, optional_decomposition,
    supermartingale_lift_check,
};
use enlarge_core::rational::format_q;
use num_traits::One;
use serde_json::{json, Map, Value};

use crate::render::{filtration, flags, identities, table, times, verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Progressive,
    Initial,
}

pub struct Analysis {
    pub report: Value,
    pub identities: Vec<Identity>,
}

fn lift_entry(ids: &[String], result: enlarge_core::Result<Process>, check: impl Fn(&Process) -> bool) -> Value {
    match result {
        Ok(w) => json!({ "deflator": table(ids, &w), "verified": check(&w) }),
        Err(e) => json!({ "refused": e.to_string() }),
    }
}

pub fn progressive(m: &Market) -> Result<Analysis> {
    let Some(tau) = &m.tau else { bail!("progressive mode needs \"tau\" in the market spec") };
    let space = &m.space;
    let ids = &m.atom_ids;
    let b = azema(space, tau)?;
    let pair = optional_decomposition(&b);
    let e = eta_analysis(space, &b)?;
    let gm = enlarge_progressive(space, tau, &m.assets)?;
    let ledger = progressive_identities(space, tau)?;

    let f_arb = check_na1(space.probs(), space.filtration(), std::slice::from_ref(&e.s_arb), None)?;
    let g_arb = check_na1(space.probs(), &gm.filtration, std::slice::from_ref(&e.s_arb), Some(tau))?;
    let arb_name = vec!["S_arb".to_string()];

    let f_assets = check_na1(space.probs(), space.filtration(), &m.assets, None)?;
    let lift = match &f_assets.deflator {
        Some(y) => lift_entry(ids, lift_deflator(space, y, &m.assets, &gm, &pair, &e), |w| {
            verify_deflator(space.probs(), &gm.filtration, w, &gm.assets)
        }),
        None => json!({ "refused": "the assets admit an arbitrage of the first kind in F" }),
    };
    let one = Process::constant(space.horizon(), space.n_atoms(), One::one());
    let localized = check_na1_localized(space, &m.assets, &e.eta, &e.zeta_levels)?;

    let report = json!({
        "mode": "progressive",
        "tau": times(ids, tau),
        "azema": {
            "z": table(ids, &b.z),
            "z_tilde": table(ids, &b.z_tilde),
            "a": table(ids, &b.a),
            "mu": table(ids, &b.mu),
        },
        "decomposition": { "k": table(ids, &pair.k), "l": table(ids, &pair.l) },
        "eta": {
            "zeta": times(ids, &e.zeta),
            "zeta_levels": e.zeta_levels.iter().map(|l| json!({"n": l.n.to_string(), "time": times(ids, &l.time)})).collect::<Vec<_>>(),
            "lambda": flags(ids, &e.lambda),
            "eta": times(ids, &e.eta),
            "d": table(ids, &e.d),
            "s_arb": table(ids, &e.s_arb),
        },
        "g_filtration": filtration(ids, &gm.filtration),
        "equivalence": equivalence_report(space, tau)?,
        "one_over_l_is_g_supermartingale": supermartingale_lift_check(space, &one, &gm, &pair)?,
        "na1": {
            "s_arb_in_f": verdict(ids, &arb_name, space.filtration(), &f_arb),
            "s_arb_stopped_in_g": verdict(ids, &arb_name, &gm.filtration, &g_arb),
            "assets_in_f": verdict(ids, &m.asset_names, space.filtration(), &f_assets),
            "assets_stopped_in_g": verdict(ids, &m.asset_names, &gm.filtration, &check_na1_market(space, &gm)?),
            "assets_truncated_before_eta_per_level": localized.iter().map(|l| json!({
                "n": l.n.to_string(),
                "holds": l.verdict.holds,
            })).collect::<Vec<_>>(),
        },
        "lift": lift,
        "identities": identities(&ledger),
    });
    Ok(Analysis { report, identities: ledger })
}

pub fn initial(m: &Market) -> Result<Analysis> {
    let Some(signal) = &m.signal else { bail!("initial mode needs \"signal\" in the market spec") };
    let space = &m.space;
    let ids = &m.atom_ids;
    let ds = density_system(space, signal)?;
    let fam = eta_family(space, signal, &ds)?;
    let gm = enlarge_initial(space, signal, &m.assets)?;
    let ledger = initial_identities(space, signal)?;

    let mut densities = Map::new();
    let mut per_label = Map::new();
    let mut singletons = Map::new();
    for (x, name) in signal.names().iter().enumerate() {
        densities.insert(name.clone(), table(ids, &ds.p[x]));
        let le = &fam.per_label[x];
        per_label.insert(
            name.clone(),
            json!({ "zeta": times(ids, &le.zeta), "eta": times(ids, &le.eta), "d": table(ids, &le.d), "s": table(ids, &le.s) }),
        );
        let b = eta_b(space, signal, &ds, &[x])?;
        singletons.insert(name.clone(), json!({ "eta": times(ids, &b.eta), "wealth": table(ids, &b.wealth) }));
    }
    let gamma: Map<String, Value> = signal
        .names()
        .iter()
        .zip(signal.gamma())
        .map(|(n, g)| (n.clone(), json!(format_q(g))))
        .collect();

    let s_j_name = vec!["S_J".to_string()];
    let g_s_j = check_na1(space.probs(), &gm.filtration, std::slice::from_ref(&fam.s_j), None)?;
    let f_assets = check_na1(space.probs(), space.filtration(), &m.assets, None)?;
    let lift = match &f_assets.deflator {
        Some(y) => lift_entry(ids, lift_deflator_initial(space, y, &m.assets, signal, &ds, &fam), |w| {
            verify_deflator(space.probs(), &gm.filtration, w, &gm.assets)
        }),
        None => json!({ "refused": "the assets admit an arbitrage of the first kind in F" }),
    };

    let report = json!({
        "mode": "initial",
        "signal": {
            "labels": ids.iter().enumerate().map(|(a, id)| (id.clone(), json!(signal.names()[signal.of(a)]))).collect::<Map<_, _>>(),
            "gamma": gamma,
        },
        "densities": densities,
        "eta_family": per_label,
        "s_j": table(ids, &fam.s_j),
        "eta_b_singletons": singletons,
        "g_filtration": filtration(ids, &gm.filtration),
        "equivalence": equivalence_report_initial(space, signal)?,
        "na1": {
            "s_j_in_g": verdict(ids, &s_j_name, &gm.filtration, &g_s_j),
            "assets_in_f": verdict(ids, &m.asset_names, space.filtration(), &f_assets),
            "assets_in_g": verdict(ids, &m.asset_names, &gm.filtration, &check_na1_market(space, &gm)?),
        },
        "lift": lift,
        "identities": identities(&ledger),
    });
    Ok(Analysis { report, identities: ledger })
}
