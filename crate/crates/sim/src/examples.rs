use rand_distr::{Distribution, Exp, Geometric};

use crate::engine::{run, Totals};
use crate::report::{MCReport, PathCheck, Requirement, Statistic};
use crate::{Example, SimConfig, SimError};

fn expect(cfg: &SimConfig, example: Example) -> Result<(), SimError> {
    if cfg.example != example {
        return Err(SimError::InvalidConfig(format!(
            "configuration is for {:?}, not {example:?}",
            cfg.example
        )));
    }
    cfg.validate()
}

fn stat(totals: &Totals, i: usize, name: String, oracle: f64) -> Statistic {
    let m = &totals.moments[i];
    Statistic::new(name, m.mean(), m.se(), oracle, m.count)
}

fn check(totals: &Totals, i: usize, name: &str, requirement: Requirement) -> PathCheck {
    let t = &totals.tallies[i];
    PathCheck {
        name: name.to_string(),
        passed: t.passed,
        total: t.total,
        requirement,
    }
}

/// Exponential clock `ζ ~ Exp(λ)`, `τ = ζ/2`, `S_t = e^{λt} 𝟙{t < ζ}`.
///
/// `S` is an `F`-martingale with `E[S_t] = 1`, and `E[S_τ] = E[e^{λζ/2}] = 2`.
/// `e^{λζ/2}` has infinite variance, so the standard error of that row is
/// only a heuristic.
pub fn sim_exp_time(cfg: &SimConfig) -> Result<MCReport, SimError> {
    expect(cfg, Example::ExpTime)?;
    let lambda = cfg.lambda;
    let grid = cfg.grid();
    let clock = Exp::new(lambda).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let n_values = grid.len() + 1;
    let totals = run(cfg.paths, cfg.seed, n_values, 1, |rng, out| {
        let zeta: f64 = clock.sample(rng);
        let tau = zeta / 2.0;
        for (i, &t) in grid.iter().enumerate() {
            out.values[i] = Some(if t < zeta { (lambda * t).exp() } else { 0.0 });
        }
        let s_tau = (lambda * tau).exp();
        out.values[grid.len()] = Some(s_tau);
        // S^τ along the grid points before τ, then at τ itself.
        let mut prev = 1.0;
        let mut increasing = true;
        for v in grid.iter().take_while(|&&t| t < tau).map(|&t| (lambda * t).exp()).chain([s_tau]) {
            increasing &= v > prev;
            prev = v;
        }
        out.checks[0] = Some(increasing);
    });
    let mut statistics: Vec<Statistic> = grid
        .iter()
        .enumerate()
        .map(|(i, t)| stat(&totals, i, format!("E[S_{t}]"), 1.0))
        .collect();
    statistics.push(stat(&totals, grid.len(), "E[S_tau]".into(), 2.0));
    Ok(MCReport {
        config: cfg.clone(),
        statistics,
        path_checks: vec![check(&totals, 0, "S_stopped_at_tau_strictly_increasing", Requirement::Every)],
    })
}

/// Integer clock with `P[ζ = k] = (1 − r) r^{k−1}`, `τ = ζ − 1`.
///
/// On `{t < ζ}` the Azéma supermartingale is `Z_t = q_{k+1}/q_k` with
/// `k = ⌊t⌋` and `q_k = P[ζ > k] = r^k`, estimated by the fraction of
/// trials with `ζ > t` that also have `τ > t`.
pub fn sim_discrete_time(cfg: &SimConfig) -> Result<MCReport, SimError> {
    expect(cfg, Example::DiscreteTime)?;
    let r = cfg.ratio;
    let times: Vec<f64> = std::iter::once(0.0).chain(cfg.grid()).collect();
    let clock = Geometric::new(1.0 - r).map_err(|e| SimError::NonSummable(e.to_string()))?;
    let q = |k: f64| r.powf(k);
    let totals = run(cfg.paths, cfg.seed, times.len(), 2, |rng, out| {
        let zeta = 1.0 + clock.sample(rng) as f64;
        let tau = zeta - 1.0;
        for (i, &t) in times.iter().enumerate() {
            if t < zeta {
                out.values[i] = Some(if tau > t { 1.0 } else { 0.0 });
            }
        }
        // η = ζ here: the clock only rings at integers and τ never equals ζ.
        out.checks[0] = Some(zeta.fract() == 0.0);
        out.checks[1] = Some(tau != zeta);
    });
    let statistics = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let k = t.floor();
            stat(&totals, i, format!("Z_{t}"), q(k + 1.0) / q(k))
        })
        .collect();
    Ok(MCReport {
        config: cfg.clone(),
        statistics,
        path_checks: vec![
            check(&totals, 0, "eta_at_integer_time", Requirement::Every),
            check(&totals, 1, "no_mass_of_tau_at_zeta", Requirement::Every),
        ],
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `P[J = x | F_t] / P[J = x]` for `J = N_T`, given `N_t = n`, `t < T`.
fn poisson_density(lambda: f64, horizon: f64, x: u32, t: f64, n: u32) -> f64 {
    if n > x {
        return 0.0;
    }
    (lambda * t).exp() * (lambda * (horizon - t)).powi((x - n) as i32) / (lambda * horizon).powi(x as i32) * factorial(x)
        / factorial(x - n)
}

fn poisson_tail(mu: f64, x: u32) -> f64 {
    1.0 - (0..=x).map(|k| (-mu).exp() * mu.powi(k as i32) / factorial(k)).sum::<f64>()
}

const LABELS: [u32; 3] = [0, 1, 2];
const WEALTH_POINTS: usize = 64;

/// Poisson process `N` of rate `λ` on `[0, T]`, the signal `J = N_T` and
/// the `F`-martingale `S_t = exp(N_t − λt(e − 1))`.
///
/// The insider shorts `S` after the last jump `σ`; since `S` only decays
/// between jumps, the wealth `−𝟙_{(σ,T]}·S` is nondecreasing.
pub fn sim_poisson_insider(cfg: &SimConfig) -> Result<MCReport, SimError> {
    expect(cfg, Example::PoissonInsider)?;
    let (lambda, horizon) = (cfg.lambda, cfg.horizon);
    let grid = cfg.grid();
    let inner: Vec<f64> = grid.iter().copied().filter(|&t| t < horizon - 1e-12).collect();
    let gap = Exp::new(lambda).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let drift = lambda * (std::f64::consts::E - 1.0);

    let n_density = LABELS.len() * inner.len();
    let n_values = n_density + grid.len() + LABELS.len();
    let totals = run(cfg.paths, cfg.seed, n_values, 4, |rng, out| {
        let mut jumps: Vec<f64> = Vec::new();
        let mut t = 0.0;
        loop {
            t += gap.sample(rng);
            if t > horizon {
                break;
            }
            jumps.push(t);
        }
        let count = |s: f64| jumps.iter().take_while(|&&j| j <= s).count() as u32;
        let price = |s: f64| (f64::from(count(s)) - drift * s).exp();
        for (xi, &x) in LABELS.iter().enumerate() {
            for (ti, &s) in inner.iter().enumerate() {
                out.values[xi * inner.len() + ti] = Some(poisson_density(lambda, horizon, x, s, count(s)));
            }
        }
        for (i, &s) in grid.iter().enumerate() {
            out.values[n_density + i] = Some(price(s));
        }
        let n_total = jumps.len() as u32;
        for (xi, &x) in LABELS.iter().enumerate() {
            out.values[n_density + grid.len() + xi] = Some(if n_total > x { 1.0 } else { 0.0 });
        }

        let sigma = jumps.last().copied().unwrap_or(0.0);
        out.checks[0] = Some(sigma < horizon);
        // Wealth of −𝟙_{(σ,T]} from the simulated prices and in closed form.
        let s_sigma = price(sigma);
        let mut prev = 0.0;
        let mut monotone = true;
        let mut closed_form = true;
        for k in 0..=WEALTH_POINTS {
            let s = horizon * k as f64 / WEALTH_POINTS as f64;
            let wealth = if s > sigma { s_sigma - price(s) } else { 0.0 };
            let formula = if s > sigma {
                (f64::from(n_total) - drift * sigma).exp() * (1.0 - (-drift * (s - sigma)).exp())
            } else {
                0.0
            };
            monotone &= wealth >= prev;
            closed_form &= (wealth - formula).abs() <= 1e-9 * formula.abs().max(1.0);
            prev = wealth;
        }
        out.checks[1] = Some(monotone);
        out.checks[2] = Some(closed_form);
        // p^x vanishes exactly at the (x+1)-th jump, where S jumps as well.
        let mut witness = false;
        for &x in &LABELS {
            if let Some(&at) = jumps.get(x as usize) {
                let before = poisson_density(lambda, horizon, x, at, x);
                let after = poisson_density(lambda, horizon, x, at, x + 1);
                let price_jump = price(at) - (f64::from(x) - drift * at).exp();
                witness |= before > 0.0 && after == 0.0 && price_jump != 0.0;
            }
        }
        out.checks[3] = Some(witness);
    });

    let mut statistics = Vec::with_capacity(n_values);
    for (xi, x) in LABELS.iter().enumerate() {
        for (ti, t) in inner.iter().enumerate() {
            statistics.push(stat(&totals, xi * inner.len() + ti, format!("E[p^{x}_{t}]"), 1.0));
        }
    }
    for (i, t) in grid.iter().enumerate() {
        statistics.push(stat(&totals, n_density + i, format!("E[S_{t}]"), 1.0));
    }
    for (xi, &x) in LABELS.iter().enumerate() {
        statistics.push(stat(
            &totals,
            n_density + grid.len() + xi,
            format!("P[eta^{x}<=T]"),
            poisson_tail(lambda * horizon, x),
        ));
    }
    Ok(MCReport {
        config: cfg.clone(),
        statistics,
        path_checks: vec![
            check(&totals, 0, "sigma_before_T", Requirement::Every),
            check(&totals, 1, "insider_wealth_nondecreasing", Requirement::Every),
            check(&totals, 2, "insider_wealth_matches_closed_form", Requirement::Every),
            check(&totals, 3, "density_vanishes_at_price_jump", Requirement::Some),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_formula_edge_cases() {
        // x = 0 and no jumps: P[N_T = 0 | F_t] / P[N_T = 0] = e^{-λ(T-t)} / e^{-λT} = e^{λt}.
        assert!((poisson_density(1.0, 1.0, 0, 0.5, 0) - 0.5f64.exp()).abs() < 1e-15);
        // Direct ratio of Poisson probabilities for x = 3, n = 1.
        let (l, h, t) = (1.3f64, 2.0f64, 0.7f64);
        let cond = (-l * (h - t)).exp() * (l * (h - t)).powi(2) / 2.0;
        let prior = (-l * h).exp() * (l * h).powi(3) / 6.0;
        assert!((poisson_density(l, h, 3, t, 1) - cond / prior).abs() < 1e-12);
        assert_eq!(poisson_density(1.0, 1.0, 1, 0.5, 2), 0.0);
        // E[p^x_0] = 1 trivially: p^x_0 = 1.
        for x in 0..4 {
            assert!((poisson_density(2.0, 1.5, x, 0.0, 0) - 1.0).abs() < 1e-12);
        }
        assert!((poisson_tail(1.0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn single_exp_path_is_closed_form() {
        let cfg = SimConfig::new(Example::ExpTime, 1.0, 1.0, 1, 3);
        let r = sim_exp_time(&cfg).unwrap();
        for s in r.statistics.iter().filter(|s| s.name.starts_with("E[S_0") || s.name == "E[S_1]") {
            let t: f64 = s.name.trim_start_matches("E[S_").trim_end_matches(']').parse().unwrap();
            assert!(s.estimate == 0.0 || s.estimate == t.exp());
        }
    }

    #[test]
    fn wrong_example_rejected() {
        let cfg = SimConfig::new(Example::ExpTime, 1.0, 1.0, 10, 3);
        assert!(sim_poisson_insider(&cfg).is_err());
    }
}
