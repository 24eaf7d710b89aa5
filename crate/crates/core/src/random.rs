//! Random finite spaces, random times, signals and processes for the
//! property suites and the self-test.

use num_traits::{One, Zero};
use rand::Rng;

use crate::initial::Signal;
use crate::process::{Process, StoppingMap, Tag};
use crate::rational::{q, qi, Q};
use crate::space::{cell_mass, FinSpace, Filtration, Partition};

/// Each cell of `coarse` is split into up to `max_parts` random pieces.
fn split<R: Rng>(rng: &mut R, coarse: &Partition, max_parts: usize) -> Partition {
    let mut keys = vec![(0usize, 0usize); coarse.n_atoms()];
    for (ci, cell) in coarse.cells().iter().enumerate() {
        let parts = rng.random_range(1..=max_parts.min(cell.len()).max(1));
        for &a in cell {
            keys[a] = (ci, rng.random_range(0..parts));
        }
    }
    Partition::from_keys(&keys)
}

pub fn random_filtration<R: Rng>(rng: &mut R, n_atoms: usize, horizon: usize) -> Filtration {
    let first = if rng.random_bool(0.8) {
        Partition::trivial(n_atoms)
    } else {
        split(rng, &Partition::trivial(n_atoms), 2)
    };
    let mut steps = vec![first];
    for t in 1..=horizon {
        let next = if t == horizon && rng.random_bool(0.5) {
            Partition::discrete(n_atoms)
        } else {
            split(rng, &steps[t - 1], 3)
        };
        steps.push(next);
    }
    Filtration::new(steps).expect("splits refine")
}

/// Positive weights `1..=9`, normalized.
pub fn random_probs<R: Rng>(rng: &mut R, n_atoms: usize) -> Vec<Q> {
    let w: Vec<i64> = (0..n_atoms).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| q(x, total)).collect()
}

/// A space with `1..=max_atoms` atoms and horizon `1..=max_horizon`.
pub fn random_space<R: Rng>(rng: &mut R, max_atoms: usize, max_horizon: usize) -> FinSpace {
    let n = rng.random_range(1..=max_atoms);
    let horizon = rng.random_range(1..=max_horizon);
    let f = random_filtration(rng, n, horizon);
    FinSpace::new(random_probs(rng, n), f).expect("valid space")
}

/// A finite random time, mostly positive; the ambient sigma-field of the
/// returned space is refined so that `τ` is measurable.
pub fn with_random_tau<R: Rng>(rng: &mut R, space: FinSpace) -> (FinSpace, StoppingMap) {
    let horizon = space.horizon();
    let tau = StoppingMap::new(
        (0..space.n_atoms())
            .map(|_| {
                if rng.random_bool(0.05) {
                    0
                } else {
                    rng.random_range(1..=horizon)
                }
            })
            .collect(),
    );
    let space = space.refine_ambient(tau.values()).expect("same atom count");
    (space, tau)
}

/// A signal with up to `max_labels` labels, with the ambient sigma-field
/// refined accordingly.
pub fn with_random_signal<R: Rng>(rng: &mut R, space: FinSpace, max_labels: usize) -> (FinSpace, Signal) {
    let k = rng.random_range(1..=max_labels);
    let labels: Vec<String> = (0..space.n_atoms())
        .map(|_| format!("x{}", rng.random_range(0..k)))
        .collect();
    let space = space.refine_ambient(&labels).expect("same atom count");
    let signal = Signal::from_labels(&space, &labels).expect("labels cover the space");
    (space, signal)
}

/// Positive martingale built forward through the tree, with zero
/// increments on the children where one of the `avoid` times equals the
/// child's time. The `avoid` times must be stopping times.
pub fn random_martingale_avoiding<R: Rng>(rng: &mut R, space: &FinSpace, avoid: &[StoppingMap]) -> Process {
    let n = space.n_atoms();
    let horizon = space.horizon();
    let start: Vec<Q> = {
        let part = space.at(0);
        let vals: Vec<Q> = (0..part.len()).map(|_| qi(rng.random_range(1..=4))).collect();
        (0..n).map(|a| vals[part.cell_of(a)].clone()).collect()
    };
    let mut rows = vec![start];
    for t in 0..horizon {
        let part = space.at(t);
        let next_part = space.at(t + 1);
        let mut next = rows[t].clone();
        for ci in 0..part.len() {
            let parent = &rows[t][part.cell(ci)[0]];
            let children = part.children(ci, next_part);
            let free: Vec<bool> = children
                .iter()
                .map(|&c| avoid.iter().all(|s| s.get(next_part.cell(c)[0]) != t + 1))
                .collect();
            let mass: Vec<Q> = children.iter().map(|&c| cell_mass(space.probs(), next_part.cell(c))).collect();
            let mut r: Vec<Q> = children
                .iter()
                .zip(&free)
                .map(|(_, &f)| if f { q(rng.random_range(-2..=2), 5) } else { Q::zero() })
                .collect();
            let free_mass: Q = mass.iter().zip(&free).filter(|(_, &f)| f).map(|(m, _)| m).sum();
            if !free_mass.is_zero() {
                let mean: Q = r.iter().zip(&mass).map(|(x, m)| x * m).sum::<Q>() / &free_mass;
                for (x, &f) in r.iter_mut().zip(&free) {
                    if f {
                        *x -= &mean;
                    }
                }
            }
            for (&c, x) in children.iter().zip(&r) {
                for &a in next_part.cell(c) {
                    next[a] = parent * (Q::one() + x);
                }
            }
        }
        rows.push(next);
    }
    Process::new(rows, Tag::Adapted).expect("rectangular")
}

pub fn random_martingale<R: Rng>(rng: &mut R, space: &FinSpace) -> Process {
    random_martingale_avoiding(rng, space, &[])
}

/// An adapted process with values in `1..=max_value`, constant on cells.
pub fn random_adapted<R: Rng>(rng: &mut R, filtration: &Filtration, max_value: i64) -> Process {
    let rows = (0..=filtration.horizon())
        .map(|t| {
            let part = filtration.at(t);
            let vals: Vec<Q> = (0..part.len()).map(|_| qi(rng.random_range(1..=max_value))).collect();
            (0..filtration.n_atoms()).map(|a| vals[part.cell_of(a)].clone()).collect()
        })
        .collect();
    Process::new(rows, Tag::Adapted).expect("rectangular")
}

/// Strictly positive density with `E[density] = 1`.
pub fn random_density<R: Rng>(rng: &mut R, space: &FinSpace) -> Vec<Q> {
    let w: Vec<Q> = (0..space.n_atoms()).map(|_| qi(rng.random_range(1..=9))).collect();
    let mean = space.expect(&w);
    w.into_iter().map(|x| x / &mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let space = random_space(&mut rng, 12, 4);
            let (space, tau) = with_random_tau(&mut rng, space);
            assert!(space.ambient().is_measurable(tau.values()));
            let m = random_martingale(&mut rng, &space);
            assert!(space.classify(&m).unwrap().is_martingale());
            assert!(m.rows().iter().flatten().all(|v| *v > Q::zero()));
            let sigma = StoppingMap::new((0..space.n_atoms()).map(|a| space.at(1).cell_of(a) % 2 + 1).collect());
            let avoided = random_martingale_avoiding(&mut rng, &space, std::slice::from_ref(&sigma));
            assert!(space.classify(&avoided).unwrap().is_martingale());
            for a in 0..space.n_atoms() {
                if sigma.get(a) <= space.horizon() {
                    assert!(avoided.delta(sigma.get(a), a).is_zero());
                }
            }
            let d = random_density(&mut rng, &space);
            assert!(space.expect(&d).is_one());
        }
    }
}
