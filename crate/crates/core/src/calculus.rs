//! Discrete stochastic calculus: compensators, stochastic integrals and the
//! killed inverse stochastic exponential `ℰ(−D)^{-1} 𝟙⟦0,σ⟦`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::martingale::cond_exp_on;
use crate::process::{Process, StoppingMap, Tag};
use crate::rational::Q;
use crate::space::{FinSpace, Filtration, Partition};

/// Predictable compensator of an indicator path `H = 𝟙⟦σ,∞⟦`:
/// `ΔD_t = E[ΔH_t | F_{t-1}]` with `ΔD_0 = E[H_0]` over the trivial `F_{0-}`.
pub fn compensator(space: &FinSpace, h: &Process) -> Result<Process> {
    let n = space.n_atoms();
    let horizon = space.horizon();
    if h.n_atoms() != n || h.horizon() != horizon {
        return Err(Error::Dimension("indicator path does not match the space".into()));
    }
    for t in 0..=horizon {
        for a in 0..n {
            let v = h.get(t, a);
            let ok = (v.is_zero() || v.is_one()) && (t == 0 || v >= h.get(t - 1, a));
            if !ok {
                return Err(Error::NotIndicator { t, atom: a });
            }
        }
    }
    h.check_tag(space.filtration(), Tag::Adapted)?;

    let trivial = Partition::trivial(n);
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(horizon + 1);
    rows.push(cond_exp_on(space.probs(), &trivial, h.row(0)));
    for t in 1..=horizon {
        let jumps: Vec<Q> = (0..n).map(|a| h.delta(t, a)).collect();
        let dd = cond_exp_on(space.probs(), space.at(t - 1), &jumps);
        let row = rows[t - 1].iter().zip(dd).map(|(d, j)| d + j).collect();
        rows.push(row);
    }
    Process::new(rows, Tag::Predictable)
}

/// Compensator of `𝟙⟦σ,∞⟦` for a stopping time `σ`.
pub fn compensator_of(space: &FinSpace, sigma: &StoppingMap) -> Result<Process> {
    compensator(space, &sigma.indicator(space.horizon()))
}

/// `Π_{s≤t} (1 − ΔD_s)^{-1}` for `t < σ` and `0` from `σ` on.
///
/// Every jump must satisfy `ΔD < 1`; otherwise the first offending
/// `(t, atom)` is reported.
pub fn stoch_exp_inverse_killed(d: &Process, sigma: &StoppingMap) -> Result<Process> {
    if sigma.n_atoms() != d.n_atoms() {
        return Err(Error::Dimension("stopping map does not match the process".into()));
    }
    let horizon = d.horizon();
    let n = d.n_atoms();
    let mut jumps = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let row: Vec<Q> = (0..n)
            .map(|a| if t == 0 { d.get(0, a).clone() } else { d.delta(t, a) })
            .collect();
        for (a, j) in row.iter().enumerate() {
            if *j >= Q::one() {
                return Err(Error::PredictableJumpToCertainty {
                    t,
                    atom: a,
                    jump: crate::rational::format_q(j),
                });
            }
        }
        jumps.push(row);
    }
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(horizon + 1);
    let mut running = vec![Q::one(); n];
    for (t, row) in jumps.iter().enumerate() {
        for a in 0..n {
            running[a] = &running[a] / (Q::one() - &row[a]);
        }
        rows.push(
            (0..n)
                .map(|a| if t < sigma.get(a) { running[a].clone() } else { Q::zero() })
                .collect(),
        );
    }
    Process::new(rows, Tag::Adapted)
}

/// `Σ_{s≤t} Σ_i H^i_s ΔX^i_s`, starting at 0.
pub fn stoch_integral(filtration: &Filtration, h: &[Process], x: &[Process]) -> Result<Process> {
    if h.len() != x.len() || h.is_empty() {
        return Err(Error::Dimension(format!(
            "{} integrands for {} integrators",
            h.len(),
            x.len()
        )));
    }
    for (hi, xi) in h.iter().zip(x) {
        hi.check_tag(filtration, Tag::Predictable)?;
        xi.check_tag(filtration, Tag::Adapted)?;
    }
    Ok(integral_unchecked(h, x))
}

pub(crate) fn integral_unchecked(h: &[Process], x: &[Process]) -> Process {
    let horizon = x[0].horizon();
    let n = x[0].n_atoms();
    let mut rows = vec![vec![Q::zero(); n]];
    for t in 1..=horizon {
        let row = (0..n)
            .map(|a| {
                let mut v = rows[t - 1][a].clone();
                for (hi, xi) in h.iter().zip(x) {
                    v += hi.get(t, a) * xi.delta(t, a);
                }
                v
            })
            .collect();
        rows.push(row);
    }
    Process::new(rows, Tag::Adapted).expect("rows are rectangular")
}

/// Quadratic covariation `[X, Y]_t = Σ_{s≤t} ΔX_s ΔY_s`.
pub fn covariation(x: &Process, y: &Process) -> Result<Process> {
    x.same_shape(y)?;
    let mut rows = vec![vec![Q::zero(); x.n_atoms()]];
    for t in 1..=x.horizon() {
        let row = (0..x.n_atoms())
            .map(|a| &rows[t - 1][a] + x.delta(t, a) * y.delta(t, a))
            .collect();
        rows.push(row);
    }
    Process::new(rows, Tag::Adapted)
}

/// `X_{t-}` as a predictable process.
pub fn left_limit(x: &Process) -> Process {
    Process::from_fn(x.horizon(), x.n_atoms(), Tag::Predictable, |t, a| x.left(t, a).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::w1_space;
    use crate::rational::{q, qi};

    fn w1_asset() -> Process {
        Process::new(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]], Tag::Adapted).unwrap()
    }

    #[test]
    fn compensator_examples() {
        let s = w1_space();
        let d = compensator_of(&s, &StoppingMap::never(2)).unwrap();
        assert!(d.rows().iter().flatten().all(Zero::is_zero));

        let eta = StoppingMap::new(vec![2, StoppingMap::INFINITY]);
        let d = compensator_of(&s, &eta).unwrap();
        assert_eq!(d.path(0), vec![qi(0), qi(0), q(1, 2)]);
        assert_eq!(d.path(1), vec![qi(0), qi(0), q(1, 2)]);
        assert_eq!(d.tag(), Tag::Predictable);
        assert!(d.check_measurable(s.filtration()).is_ok());

        let d = compensator_of(&s, &StoppingMap::constant(2, 1)).unwrap();
        assert_eq!(d.delta(1, 0), qi(1));
    }

    #[test]
    fn compensator_rejects_bad_input() {
        let s = w1_space();
        let not_indicator = w1_asset();
        assert!(matches!(compensator(&s, &not_indicator), Err(Error::NotIndicator { .. })));
        // σ = (1 on ω1, 2 on ω2) is not a stopping time: {σ ≤ 1} ∉ F_1.
        let h = StoppingMap::new(vec![1, 2]).indicator(2);
        assert!(matches!(compensator(&s, &h), Err(Error::NotMeasurable { .. })));
    }

    #[test]
    fn killed_exponential_examples() {
        let s = w1_space();
        let d = Process::constant(2, 2, qi(0)).with_tag(Tag::Predictable);
        let e = stoch_exp_inverse_killed(&d, &StoppingMap::never(2)).unwrap();
        assert!(e.rows().iter().flatten().all(One::is_one));

        let eta = StoppingMap::new(vec![2, StoppingMap::INFINITY]);
        let d = compensator_of(&s, &eta).unwrap();
        let e = stoch_exp_inverse_killed(&d, &eta).unwrap();
        assert_eq!(e, w1_asset());

        let sigma = StoppingMap::constant(2, 1);
        let d = compensator_of(&s, &sigma).unwrap();
        let err = stoch_exp_inverse_killed(&d, &sigma).unwrap_err();
        assert!(matches!(err, Error::PredictableJumpToCertainty { t: 1, .. }));
    }

    #[test]
    fn integral_examples() {
        let s = w1_space();
        let f = s.filtration();
        let x = w1_asset();
        let zero = Process::constant(2, 2, qi(0)).with_tag(Tag::Predictable);
        let i = stoch_integral(f, &[zero], &[x.clone()]).unwrap();
        assert!(i.rows().iter().flatten().all(Zero::is_zero));

        let ones = Process::constant(2, 2, qi(1)).with_tag(Tag::Predictable);
        let i = stoch_integral(f, &[ones], &[x.clone()]).unwrap();
        assert_eq!(i.row(2), &[qi(-1), qi(1)]);
        assert_eq!(i.row(1), &[qi(0), qi(0)]);

        let last = Process::from_fn(2, 2, Tag::Predictable, |t, _| if t == 2 { qi(1) } else { qi(0) });
        let j = stoch_integral(f, &[last], &[x.clone()]).unwrap();
        assert_eq!(j.row(2), &[qi(-1), qi(1)]);

        // Integrand that peeks at the current step is rejected.
        assert!(stoch_integral(f, &[x.clone().with_tag(Tag::Predictable)], &[x]).is_err());
    }
}
