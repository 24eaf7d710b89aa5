//! Progressive enlargement with a random time `τ`.
//!
//! Builds the Azéma supermartingale `Z = P[τ > t | F_t]`, its companion
//! `Z̃ = P[τ ≥ t | F_t]`, the dual optional projection `A`, the optional
//! multiplicative decomposition `Z = L(1 − K)`, the jump-to-zero time `η`
//! with its compensator `D`, the arbitrage asset `ℰ(−D)^{-1} 𝟙⟦0,η⟦`, the
//! enlarged filtration `G` and the deflator lift `M^τ / L^τ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::calculus::{compensator_of, stoch_exp_inverse_killed};
use crate::error::{Error, Result};
use crate::gmarket::GMarket;
use crate::martingale::classify;
use crate::process::{Process, StoppingMap, Tag};
use crate::rational::Q;
use crate::space::{FinSpace, Filtration, Partition};

#[derive(Debug, Clone, PartialEq)]
pub struct AzemaBundle {
    pub z: Process,
    pub z_tilde: Process,
    /// Cumulative `A_t = Σ_{s≤t} P[τ = s | F_s]`.
    pub a: Process,
    pub mu: Process,
}

impl AzemaBundle {
    /// `ΔA_t` with `A_{0-} = 0`.
    pub fn delta_a(&self, t: usize, atom: usize) -> Q {
        self.a.jump_from_origin(t, atom)
    }

    /// `Z_{t-}` with the convention `Z_{0-} = 1`.
    pub fn z_left(&self, t: usize, atom: usize) -> Q {
        if t == 0 {
            Q::one()
        } else {
            self.z.get(t - 1, atom).clone()
        }
    }
}

pub(crate) fn check_random_time(space: &FinSpace, tau: &StoppingMap) -> Result<()> {
    if tau.n_atoms() != space.n_atoms() {
        return Err(Error::Dimension("random time does not match the space".into()));
    }
    if let Some(atom) = (0..space.n_atoms()).find(|&a| tau.get(a) > space.horizon()) {
        return Err(Error::InfiniteRandomTime { atom });
    }
    if !space.ambient().is_measurable(tau.values()) {
        return Err(Error::NotAmbientMeasurable {
            what: "random time".into(),
        });
    }
    Ok(())
}

pub fn azema(space: &FinSpace, tau: &StoppingMap) -> Result<AzemaBundle> {
    check_random_time(space, tau)?;
    let n = space.n_atoms();
    let horizon = space.horizon();
    let indicator = |pred: &dyn Fn(usize) -> bool| -> Vec<Q> {
        (0..n).map(|a| if pred(a) { Q::one() } else { Q::zero() }).collect()
    };
    let mut z = Vec::with_capacity(horizon + 1);
    let mut z_tilde = Vec::with_capacity(horizon + 1);
    let mut a_rows: Vec<Vec<Q>> = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        z.push(space.cond_exp(&indicator(&|a| tau.get(a) > t), t)?);
        z_tilde.push(space.cond_exp(&indicator(&|a| tau.get(a) >= t), t)?);
        let jump = space.cond_exp(&indicator(&|a| tau.get(a) == t), t)?;
        let row = match a_rows.last() {
            Some(prev) => prev.iter().zip(jump).map(|(p, j)| p + j).collect(),
            None => jump,
        };
        a_rows.push(row);
    }
    let z = Process::new(z, Tag::Adapted)?;
    let a = Process::new(a_rows, Tag::Adapted)?;
    let mu = a.zip_with(&z, |x, y| x + y)?;
    Ok(AzemaBundle {
        z,
        z_tilde: Process::new(z_tilde, Tag::Adapted)?,
        a,
        mu,
    })
}

/// The pair `(K, L)` with `Z = L(1 − K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionalPair {
    pub k: Process,
    pub l: Process,
}

impl OptionalPair {
    /// `ΔK_t` with `K_{0-} = 0`.
    pub fn delta_k(&self, t: usize, atom: usize) -> Q {
        self.k.jump_from_origin(t, atom)
    }

    /// `K_{t-}` with `K_{0-} = 0`.
    pub fn k_left(&self, t: usize, atom: usize) -> Q {
        if t == 0 {
            Q::zero()
        } else {
            self.k.get(t - 1, atom).clone()
        }
    }
}

/// Recursion, per atom (`K_{-1} = 0`):
///
/// * `L_0 = Z̃_0`; for `t ≥ 1`, `L_t = Z̃_t / (1 − K_{t−1})` where
///   `K_{t−1} < 1`, else `L_t = L_{t−1}`;
/// * `K_t = K_{t−1} + ΔA_t / L_t` where `L_t > 0`, else `K_t = K_{t−1}`.
///
/// `L` is then a martingale because `E[Z̃_t | F_{t−1}] = Z_{t−1}`.
pub fn optional_decomposition(bundle: &AzemaBundle) -> OptionalPair {
    decompose(bundle, false)
}

/// Negative control for the self-test: the recursion with `L_t` built from
/// `Z` instead of `Z̃`. It must be caught by the `Z = L(1 − K)` suite.
#[doc(hidden)]
pub fn optional_decomposition_tampered(bundle: &AzemaBundle) -> OptionalPair {
    decompose(bundle, true)
}

fn decompose(bundle: &AzemaBundle, tampered: bool) -> OptionalPair {
    let horizon = bundle.z.horizon();
    let n = bundle.z.n_atoms();
    let source = if tampered { &bundle.z } else { &bundle.z_tilde };
    let mut k_rows: Vec<Vec<Q>> = Vec::with_capacity(horizon + 1);
    let mut l_rows: Vec<Vec<Q>> = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let mut k_row = Vec::with_capacity(n);
        let mut l_row = Vec::with_capacity(n);
        for a in 0..n {
            let k_prev = if t == 0 { Q::zero() } else { k_rows[t - 1][a].clone() };
            let l = if t > 0 && k_prev.is_one() {
                l_rows[t - 1][a].clone()
            } else {
                source.get(t, a) / (Q::one() - &k_prev)
            };
            let k = if l.is_positive() {
                k_prev + bundle.delta_a(t, a) / &l
            } else {
                k_prev
            };
            k_row.push(k);
            l_row.push(l);
        }
        k_rows.push(k_row);
        l_rows.push(l_row);
    }
    OptionalPair {
        k: Process::new(k_rows, Tag::Adapted).expect("rectangular"),
        l: Process::new(l_rows, Tag::Adapted).expect("rectangular"),
    }
}

/// One member of the localizing family `ζ_n = inf{t : Z_t < 1/n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaLevel {
    /// Smallest `n` producing this stopping time.
    pub n: BigInt,
    pub time: StoppingMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaData {
    /// First zero of `Z`.
    pub zeta: StoppingMap,
    /// Distinct `ζ_n`, ordered by `n`.
    pub zeta_levels: Vec<ZetaLevel>,
    /// `Λ = {ζ < ∞, Z_{ζ−} > 0, ΔA_ζ = 0}` per atom.
    pub lambda: Vec<bool>,
    pub eta: StoppingMap,
    /// Predictable compensator of `𝟙⟦η,∞⟦`.
    pub d: Process,
    /// `ℰ(−D)^{-1} 𝟙⟦0,η⟦`.
    pub s_arb: Process,
}

/// `ζ`, `Λ` and `η` from the Azéma bundle alone.
pub fn jump_to_zero_time(bundle: &AzemaBundle) -> (StoppingMap, Vec<bool>, StoppingMap) {
    let horizon = bundle.z.horizon();
    let n = bundle.z.n_atoms();
    let zeta = StoppingMap::new(
        (0..n)
            .map(|a| {
                (0..=horizon)
                    .find(|&t| bundle.z.get(t, a).is_zero())
                    .unwrap_or(StoppingMap::INFINITY)
            })
            .collect(),
    );
    let lambda: Vec<bool> = (0..n)
        .map(|a| {
            zeta.is_finite(a) && {
                let t = zeta.get(a);
                bundle.z_left(t, a).is_positive() && bundle.delta_a(t, a).is_zero()
            }
        })
        .collect();
    let eta = zeta.restricted(|a| lambda[a]);
    (zeta, lambda, eta)
}

/// Distinct `ζ_n` over `n ∈ ℕ`.
///
/// `Z_t < 1/n` holds iff `n < 1/Z_t`, so the stopping time only changes at
/// `n = 1` and `n = ⌈1/v⌉` for the positive values `v` taken by `Z`.
pub fn zeta_levels(z: &Process) -> Vec<ZetaLevel> {
    let mut values: Vec<&Q> = z.rows().iter().flatten().filter(|v| v.is_positive()).collect();
    values.sort();
    values.dedup();
    let mut candidates: Vec<BigInt> = vec![BigInt::one()];
    for v in values {
        let inv = v.recip();
        candidates.push(inv.numer().div_ceil(inv.denom()));
    }
    candidates.sort();
    candidates.dedup();
    let mut levels: Vec<ZetaLevel> = Vec::new();
    for n in candidates {
        let threshold = Q::new(BigInt::one(), n.clone());
        let time = StoppingMap::new(
            (0..z.n_atoms())
                .map(|a| {
                    (0..=z.horizon())
                        .find(|&t| *z.get(t, a) < threshold)
                        .unwrap_or(StoppingMap::INFINITY)
                })
                .collect(),
        );
        if levels.iter().all(|l| l.time != time) {
            levels.push(ZetaLevel { n, time });
        }
    }
    levels
}

pub fn eta_analysis(space: &FinSpace, bundle: &AzemaBundle) -> Result<EtaData> {
    let (zeta, lambda, eta) = jump_to_zero_time(bundle);
    let d = compensator_of(space, &eta)?;
    let s_arb = stoch_exp_inverse_killed(&d, &eta)?;
    Ok(EtaData {
        zeta,
        zeta_levels: zeta_levels(&bundle.z),
        lambda,
        eta,
        d,
        s_arb,
    })
}

/// The progressively enlarged filtration: before `τ` a `G_t`-cell is an
/// `F_t`-cell intersected with `{τ > t}`; from `τ` on it is the ambient cell.
pub fn progressive_filtration(space: &FinSpace, tau: &StoppingMap) -> Result<Filtration> {
    check_random_time(space, tau)?;
    let steps = (0..=space.horizon())
        .map(|t| {
            let keys: Vec<(bool, usize)> = (0..space.n_atoms())
                .map(|a| {
                    if tau.get(a) > t {
                        (false, space.at(t).cell_of(a))
                    } else {
                        (true, space.ambient().cell_of(a))
                    }
                })
                .collect();
            Partition::from_keys(&keys)
        })
        .collect();
    Filtration::new(steps)
}

pub fn enlarge_progressive(space: &FinSpace, tau: &StoppingMap, assets: &[Process]) -> Result<GMarket> {
    for s in assets {
        s.check_tag(space.filtration(), Tag::Adapted)?;
    }
    let filtration = progressive_filtration(space, tau)?;
    Ok(GMarket {
        filtration,
        assets: assets.iter().map(|s| s.stopped(tau)).collect(),
        tau: Some(tau.clone()),
    })
}

/// `X^τ / L^τ`. `L` is positive on `⟦0, τ⟧`, so the ratio is well defined.
pub fn over_l_stopped(x: &Process, tau: &StoppingMap, pair: &OptionalPair) -> Result<Process> {
    let mut rows = Vec::with_capacity(x.horizon() + 1);
    for t in 0..=x.horizon() {
        let mut row = Vec::with_capacity(x.n_atoms());
        for a in 0..x.n_atoms() {
            let s = t.min(tau.get(a));
            let l = pair.l.get(s, a);
            if !l.is_positive() {
                return Err(Error::Invariant(format!("L vanishes before τ at (t = {s}, atom {a})")));
            }
            row.push(x.get(s, a) / l);
        }
        rows.push(row);
    }
    Process::new(rows, Tag::Adapted)
}

/// Checks that `y` is a strictly positive deflator for `assets` in `filtration`.
pub(crate) fn check_deflator(probs: &[Q], filtration: &Filtration, y: &Process, assets: &[Process]) -> Result<()> {
    if let Some((t, a)) = first_non_positive(y) {
        return Err(Error::NotADeflator(format!("non-positive value at (t = {t}, atom {a})")));
    }
    if (0..y.n_atoms()).any(|a| !y.get(0, a).is_one()) {
        return Err(Error::NotADeflator("does not start at 1".into()));
    }
    if !classify(probs, filtration, y)?.is_martingale() {
        return Err(Error::NotADeflator("not a martingale".into()));
    }
    for (i, s) in assets.iter().enumerate() {
        if !classify(probs, filtration, &y.mul(s)?)?.is_martingale() {
            return Err(Error::NotADeflator(format!("deflated asset {i} is not a martingale")));
        }
    }
    Ok(())
}

fn first_non_positive(y: &Process) -> Option<(usize, usize)> {
    (0..=y.horizon()).find_map(|t| (0..y.n_atoms()).find(|&a| !y.get(t, a).is_positive()).map(|a| (t, a)))
}

/// Lifts an `F`-deflator `Y` for `S` to the `G`-deflator `M^τ / L^τ` for
/// `S^τ`, where `M = Y ℰ(−D)^{-1} 𝟙⟦0,η⟦`.
///
/// Requires that neither the assets nor `Y` jump at `η`; the first witness
/// `(t, atom)` of a jump is returned as an error.
pub fn lift_deflator(
    space: &FinSpace,
    y: &Process,
    assets: &[Process],
    gm: &GMarket,
    pair: &OptionalPair,
    eta: &EtaData,
) -> Result<Process> {
    let tau = gm
        .tau
        .as_ref()
        .ok_or_else(|| Error::Precondition("market is not a progressive enlargement".into()))?;
    check_deflator(space.probs(), space.filtration(), y, assets)?;
    for a in 0..space.n_atoms() {
        let t = eta.eta.get(a);
        if t > space.horizon() {
            continue;
        }
        for (i, s) in assets.iter().enumerate() {
            if !s.delta(t, a).is_zero() {
                return Err(Error::JumpAtEta {
                    label: None,
                    asset: i,
                    t,
                    atom: a,
                });
            }
        }
        if !y.delta(t, a).is_zero() {
            return Err(Error::DeflatorJumpAtEta { label: None, t, atom: a });
        }
    }
    let m = y.mul(&eta.s_arb)?;
    over_l_stopped(&m, tau, pair)
}

/// Whether `X^τ / L^τ` is a `G`-supermartingale for a nonnegative
/// `F`-supermartingale `X`.
pub fn supermartingale_lift_check(space: &FinSpace, x: &Process, gm: &GMarket, pair: &OptionalPair) -> Result<bool> {
    let tau = gm
        .tau
        .as_ref()
        .ok_or_else(|| Error::Precondition("market is not a progressive enlargement".into()))?;
    if !x.is_nonnegative() || !space.classify(x)?.is_supermartingale() {
        return Err(Error::Precondition("X must be a nonnegative supermartingale".into()));
    }
    let lifted = over_l_stopped(x, tau, pair)?;
    Ok(classify(space.probs(), &gm.filtration, &lifted)?.is_supermartingale())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// `P[η < ∞]` (weighted by `γ` for initial enlargement).
    #[serde(serialize_with = "crate::rational::ser_q")]
    pub eta_finite_prob: Q,
    pub reciprocal_is_g_martingale: bool,
    pub all_lifts_are_g_martingales: bool,
}

impl EquivalenceReport {
    pub fn agrees(&self) -> bool {
        let eta_null = self.eta_finite_prob.is_zero();
        eta_null == self.reciprocal_is_g_martingale && eta_null == self.all_lifts_are_g_martingales
    }
}

/// The nonnegative `F`-martingales `P[C | F_t]`, one per `F_T`-cell `C`;
/// every nonnegative martingale is a nonnegative combination of them.
pub(crate) fn martingale_generators(space: &FinSpace) -> Vec<Process> {
    let horizon = space.horizon();
    let last = space.at(horizon);
    (0..last.len())
        .map(|c| {
            let x: Vec<Q> = (0..space.n_atoms())
                .map(|a| if last.cell_of(a) == c { Q::one() } else { Q::zero() })
                .collect();
            let rows = (0..=horizon)
                .map(|t| space.cond_exp(&x, t).expect("time in range"))
                .collect();
            Process::new(rows, Tag::Adapted).expect("rectangular")
        })
        .collect()
}

/// Computes the three equivalent statements: `P[η < ∞] = 0`, `1/L^τ` is a
/// `G`-martingale, and `X^τ/L^τ` is a `G`-martingale for every nonnegative
/// `F`-martingale `X` (checked on the generators of that cone).
pub fn equivalence_report(space: &FinSpace, tau: &StoppingMap) -> Result<EquivalenceReport> {
    let bundle = azema(space, tau)?;
    let pair = optional_decomposition(&bundle);
    let (_, _, eta) = jump_to_zero_time(&bundle);
    let g = progressive_filtration(space, tau)?;
    let one = Process::constant(space.horizon(), space.n_atoms(), Q::one());
    let recip = over_l_stopped(&one, tau, &pair)?;
    let reciprocal_is_g_martingale = classify(space.probs(), &g, &recip)?.is_martingale();
    let mut all_lifts = true;
    for x in martingale_generators(space) {
        let lifted = over_l_stopped(&x, tau, &pair)?;
        if !classify(space.probs(), &g, &lifted)?.is_martingale() {
            all_lifts = false;
            break;
        }
    }
    Ok(EquivalenceReport {
        eta_finite_prob: space.prob_where(|a| eta.is_finite(a)),
        reciprocal_is_g_martingale,
        all_lifts_are_g_martingales: all_lifts,
    })
}

/// `η` recomputed under `dQ = density dP`.
pub fn eta_under_measure(space: &FinSpace, tau: &StoppingMap, density: &[Q]) -> Result<StoppingMap> {
    let q_space = space.change_measure(density)?;
    let bundle = azema(&q_space, tau)?;
    Ok(jump_to_zero_time(&bundle).2)
}

/// `S̃ = S^{η−}`: the asset with its jump at `η` removed.
pub fn truncate_before_eta(asset: &Process, eta: &StoppingMap) -> Process {
    asset.stopped_before(eta)
}
