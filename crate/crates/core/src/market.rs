//! JSON market specification: atoms, filtration, assets and optionally a
//! random time and a signal.
//!
//! ```json
//! {
//!   "atoms": [{"id": "w1", "prob": "1/2"}, {"id": "w2", "prob": "1/2"}],
//!   "filtration": [[["w1", "w2"]], [["w1", "w2"]], [["w1"], ["w2"]]],
//!   "assets": {"S": {"w1": ["1", "1", "1"], "w2": ["1", "1", "1"]}},
//!   "tau": {"w1": 1, "w2": 2}
//! }
//! ```
//!
//! Rationals are strings (`"n"`, `"n/d"` or exact decimals).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::Signal;
use crate::process::{Process, StoppingMap, Tag};
use crate::rational::{format_q, parse_q, Q};
use crate::space::{FinSpace, Filtration, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub id: String,
    pub prob: String,
}

/// A time value: an integer or `"inf"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Finite(usize),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub atoms: Vec<AtomSpec>,
    pub filtration: Vec<Vec<Vec<String>>>,
    #[serde(default)]
    pub assets: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<BTreeMap<String, TimeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalSpec>,
}

/// A validated market.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub atom_ids: Vec<String>,
    /// Ambient sigma-field refined by `τ` and the signal.
    pub space: FinSpace,
    pub asset_names: Vec<String>,
    pub assets: Vec<Process>,
    pub tau: Option<StoppingMap>,
    pub signal: Option<Signal>,
}

impl Market {
    pub fn asset(&self, name: &str) -> Option<&Process> {
        self.asset_names.iter().position(|n| n == name).map(|i| &self.assets[i])
    }
}

fn field(path: &str, e: Error) -> Error {
    Error::Parse(format!("{path}: {e}"))
}

impl MarketSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec is serializable")
    }

    /// Validates the market spec and builds the exact model.
    pub fn build(&self) -> Result<Market> {
        let n = self.atoms.len();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if index.insert(a.id.as_str(), i).is_some() {
                return Err(Error::Parse(format!("atoms[{i}]: duplicate id {:?}", a.id)));
            }
        }
        let lookup = |path: &str, id: &str| -> Result<usize> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Parse(format!("{path}: unknown atom {id:?}")))
        };
        let probs: Vec<Q> = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| parse_q(&a.prob).map_err(|e| field(&format!("atoms[{i}].prob"), e)))
            .collect::<Result<_>>()?;

        let mut steps = Vec::with_capacity(self.filtration.len());
        for (t, cells) in self.filtration.iter().enumerate() {
            let mut idx = Vec::with_capacity(cells.len());
            for (c, cell) in cells.iter().enumerate() {
                let ids: Vec<usize> = cell
                    .iter()
                    .map(|id| lookup(&format!("filtration[{t}][{c}]"), id))
                    .collect::<Result<_>>()?;
                idx.push(ids);
            }
            steps.push(Partition::from_cells(n, idx).map_err(|e| field(&format!("filtration[{t}]"), e))?);
        }
        if steps.is_empty() {
            return Err(Error::Parse("filtration: at least one time is required".into()));
        }
        let horizon = steps.len() - 1;
        let mut space = FinSpace::new(probs, Filtration::new(steps)?)?;

        let mut asset_names = Vec::new();
        let mut assets = Vec::new();
        for (name, paths) in &self.assets {
            let path = format!("assets.{name}");
            let mut rows = vec![vec![Q::default(); n]; horizon + 1];
            let mut seen = vec![false; n];
            for (id, values) in paths {
                let a = lookup(&path, id)?;
                seen[a] = true;
                if values.len() != horizon + 1 {
                    return Err(Error::Parse(format!(
                        "{path}.{id}: {} values, expected {}",
                        values.len(),
                        horizon + 1
                    )));
                }
                for (t, v) in values.iter().enumerate() {
                    rows[t][a] = parse_q(v).map_err(|e| field(&format!("{path}.{id}[{t}]"), e))?;
                }
            }
            if let Some(a) = seen.iter().position(|s| !s) {
                return Err(Error::Parse(format!("{path}: no path for atom {:?}", self.atoms[a].id)));
            }
            let s = Process::new(rows, Tag::Adapted)?;
            s.check_measurable(space.filtration()).map_err(|e| field(&path, e))?;
            asset_names.push(name.clone());
            assets.push(s);
        }

        let tau = match &self.tau {
            None => None,
            Some(map) => {
                let mut values = vec![None; n];
                for (id, v) in map {
                    let a = lookup("tau", id)?;
                    values[a] = Some(match v {
                        TimeSpec::Finite(t) => *t,
                        TimeSpec::Named(s) if s == "inf" => StoppingMap::INFINITY,
                        TimeSpec::Named(s) => {
                            return Err(Error::Parse(format!("tau.{id}: expected an integer or \"inf\", got {s:?}")))
                        }
                    });
                }
                let values: Vec<usize> = values
                    .into_iter()
                    .enumerate()
                    .map(|(a, v)| v.ok_or_else(|| Error::Parse(format!("tau: no value for atom {:?}", self.atoms[a].id))))
                    .collect::<Result<_>>()?;
                space = space.refine_ambient(&values)?;
                Some(StoppingMap::new(values))
            }
        };

        let signal = match &self.signal {
            None => None,
            Some(sig) => {
                let mut labels = vec![None; n];
                for (id, l) in &sig.labels {
                    labels[lookup("signal.labels", id)?] = Some(l.clone());
                }
                let labels: Vec<String> = labels
                    .into_iter()
                    .enumerate()
                    .map(|(a, l)| {
                        l.ok_or_else(|| Error::Parse(format!("signal.labels: no label for atom {:?}", self.atoms[a].id)))
                    })
                    .collect::<Result<_>>()?;
                space = space.refine_ambient(&labels)?;
                Some(match &sig.gamma {
                    None => Signal::from_labels(&space, &labels)?,
                    Some(g) => {
                        let gamma = g
                            .iter()
                            .map(|(k, v)| Ok((k.clone(), parse_q(v).map_err(|e| field(&format!("signal.gamma.{k}"), e))?)))
                            .collect::<Result<BTreeMap<String, Q>>>()?;
                        Signal::with_gamma(&space, &labels, &gamma)?
                    }
                })
            }
        };

        Ok(Market {
            atom_ids: self.atoms.iter().map(|a| a.id.clone()).collect(),
            space,
            asset_names,
            assets,
            tau,
            signal,
        })
    }

    /// Spec describing a model; `build` of the result reproduces it.
    pub fn from_market(m: &Market) -> Self {
        let ids = &m.atom_ids;
        let filtration = m
            .space
            .filtration()
            .steps()
            .iter()
            .map(|p| p.cells().iter().map(|c| c.iter().map(|&a| ids[a].clone()).collect()).collect())
            .collect();
        let assets = m
            .asset_names
            .iter()
            .zip(&m.assets)
            .map(|(name, s)| {
                let paths = (0..s.n_atoms())
                    .map(|a| (ids[a].clone(), s.path(a).iter().map(format_q).collect()))
                    .collect();
                (name.clone(), paths)
            })
            .collect();
        let tau = m.tau.as_ref().map(|tau| {
            (0..tau.n_atoms())
                .map(|a| {
                    let v = if tau.is_finite(a) {
                        TimeSpec::Finite(tau.get(a))
                    } else {
                        TimeSpec::Named("inf".into())
                    };
                    (ids[a].clone(), v)
                })
                .collect()
        });
        let signal = m.signal.as_ref().map(|sig| SignalSpec {
            labels: (0..ids.len()).map(|a| (ids[a].clone(), sig.names()[sig.of(a)].clone())).collect(),
            gamma: Some(sig.names().iter().cloned().zip(sig.gamma().iter().map(format_q)).collect()),
        });
        MarketSpec {
            atoms: ids
                .iter()
                .zip(m.space.probs())
                .map(|(id, p)| AtomSpec {
                    id: id.clone(),
                    prob: format_q(p),
                })
                .collect(),
            filtration,
            assets,
            tau,
            signal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    const W1: &str = r#"{
        "atoms": [{"id": "w1", "prob": "1/2"}, {"id": "w2", "prob": "0.5"}],
        "filtration": [[["w1", "w2"]], [["w1", "w2"]], [["w1"], ["w2"]]],
        "assets": {"S": {"w1": ["1", "1", "1"], "w2": ["1", "1", "1"]}},
        "tau": {"w1": 1, "w2": 2}
    }"#;

    #[test]
    fn parses_w1() {
        let m = MarketSpec::from_json(W1).unwrap().build().unwrap();
        assert_eq!(m.space.probs(), &[q(1, 2), q(1, 2)]);
        assert_eq!(m.tau.unwrap().values(), &[1, 2]);
        assert_eq!(m.asset_names, vec!["S"]);
    }

    #[test]
    fn round_trip() {
        let spec = MarketSpec::from_json(W1).unwrap();
        let m = spec.build().unwrap();
        let again = MarketSpec::from_market(&m);
        let reparsed = MarketSpec::from_json(&again.to_json()).unwrap();
        assert_eq!(reparsed, again);
        assert_eq!(reparsed.build().unwrap(), m);
    }

    #[test]
    fn rejections() {
        let bad_sum = W1.replace("\"0.5\"", "\"0.49\"");
        assert!(matches!(
            MarketSpec::from_json(&bad_sum).unwrap().build(),
            Err(Error::ProbabilitiesDoNotSumToOne { .. })
        ));
        let syntax = MarketSpec::from_json("{\n \"atoms\": [,]}").unwrap_err();
        assert!(syntax.to_string().contains("line 2"), "{syntax}");
        let unknown = W1.replace("[[\"w1\"], [\"w2\"]]", "[[\"w1\"], [\"w3\"]]");
        let err = MarketSpec::from_json(&unknown).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("filtration[2][1]"), "{err}");
        let not_adapted = W1.replace("\"w1\": [\"1\", \"1\", \"1\"]", "\"w1\": [\"1\", \"2\", \"1\"]");
        assert!(MarketSpec::from_json(&not_adapted).unwrap().build().is_err());
        let bad_value = W1.replace("\"w1\": [\"1\", \"1\", \"1\"]", "\"w1\": [\"1\", \"x\", \"1\"]");
        let err = MarketSpec::from_json(&bad_value).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("assets.S.w1[1]"), "{err}");
    }

    #[test]
    fn infinite_tau_and_signal() {
        let text = r#"{
            "atoms": [{"id": "a", "prob": "1/2"}, {"id": "b", "prob": "1/2"}],
            "filtration": [[["a", "b"]], [["a"], ["b"]]],
            "tau": {"a": "inf", "b": 1},
            "signal": {"labels": {"a": "x", "b": "y"}, "gamma": {"x": "1/2", "y": "1/2"}}
        }"#;
        let m = MarketSpec::from_json(text).unwrap().build().unwrap();
        assert!(!m.tau.as_ref().unwrap().is_finite(0));
        assert_eq!(m.signal.as_ref().unwrap().names(), &["x", "y"]);
        let bad = text.replace("\"inf\"", "\"never\"");
        assert!(MarketSpec::from_json(&bad).unwrap().build().is_err());
    }
}
