//! JSON renderings of exact objects; rationals are `"num/den"` strings.

use std::collections::BTreeMap;

use enlarge_core::identities::Identity;
use enlarge_core::na1::Na1Verdict;
use enlarge_core::process::{Process, StoppingMap};
use enlarge_core::rational::format_q;
use enlarge_core::space::{Filtration, Partition};
use serde_json::{json, Value};

/// Per-atom paths keyed by atom id.
pub fn table(ids: &[String], p: &Process) -> Value {
    let map: BTreeMap<&str, Vec<String>> = ids
        .iter()
        .enumerate()
        .map(|(a, id)| (id.as_str(), p.path(a).iter().map(format_q).collect()))
        .collect();
    json!(map)
}

pub fn time_value(s: &StoppingMap, atom: usize) -> Value {
    if s.is_finite(atom) {
        json!(s.get(atom))
    } else {
        json!("inf")
    }
}

pub fn times(ids: &[String], s: &StoppingMap) -> Value {
    let map: BTreeMap<&str, Value> = ids.iter().enumerate().map(|(a, id)| (id.as_str(), time_value(s, a))).collect();
    json!(map)
}

pub fn flags(ids: &[String], f: &[bool]) -> Value {
    let map: BTreeMap<&str, bool> = ids.iter().map(String::as_str).zip(f.iter().copied()).collect();
    json!(map)
}

pub fn cells(ids: &[String], atoms: &[usize]) -> Value {
    json!(atoms.iter().map(|&a| ids[a].as_str()).collect::<Vec<_>>())
}

pub fn partition(ids: &[String], p: &Partition) -> Value {
    Value::Array(p.cells().iter().map(|c| cells(ids, c)).collect())
}

pub fn filtration(ids: &[String], f: &Filtration) -> Value {
    Value::Array(f.steps().iter().map(|p| partition(ids, p)).collect())
}

pub fn identities(rows: &[Identity]) -> Value {
    json!(rows.iter().map(Identity::row).collect::<Vec<_>>())
}

pub fn verdict(ids: &[String], asset_names: &[String], filtration: &Filtration, v: &Na1Verdict) -> Value {
    let mut out = json!({
        "holds": v.holds,
        "holds_up_to": (1..=filtration.horizon()).map(|h| json!({"horizon": h, "holds": v.holds_up_to(h)})).collect::<Vec<_>>(),
        "violations": v.violations.iter().map(|&(t, c)| json!({"t": t, "cell": cells(ids, filtration.at(t).cell(c))})).collect::<Vec<_>>(),
    });
    if let Some(y) = &v.deflator {
        out["deflator"] = table(ids, y);
    }
    if let Some(c) = &v.certificate {
        let position: BTreeMap<&str, String> = asset_names
            .iter()
            .map(String::as_str)
            .zip(c.position.iter().map(format_q))
            .collect();
        let claim: BTreeMap<&str, String> = ids.iter().map(String::as_str).zip(c.claim.iter().map(format_q)).collect();
        out["certificate"] = json!({
            "t": c.t,
            "cell": cells(ids, &c.atoms),
            "position": position,
            "children": c.children.iter().map(|ch| cells(ids, ch)).collect::<Vec<_>>(),
            "wealth_increments": c.wealth_increments.iter().map(format_q).collect::<Vec<_>>(),
            "claim": claim,
        });
    }
    out
}
