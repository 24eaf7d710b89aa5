use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BLOCK: u64 = 4096;

/// Per-trial output slots. `None` means the trial does not contribute.
pub(crate) struct Trial {
    pub values: Vec<Option<f64>>,
    pub checks: Vec<Option<bool>>,
}

#[derive(Clone, Default)]
pub(crate) struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn se(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

#[derive(Clone, Default)]
pub(crate) struct Tally {
    pub passed: u64,
    pub total: u64,
}

pub(crate) struct Totals {
    pub moments: Vec<Moments>,
    pub tallies: Vec<Tally>,
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `paths` trials in fixed-size blocks; blocks run in parallel and are
/// merged in index order, so the floating-point sums do not depend on the
/// thread count.
pub(crate) fn run<F>(paths: u64, seed: u64, n_values: usize, n_checks: usize, trial: F) -> Totals
where
    F: Fn(&mut ChaCha8Rng, &mut Trial) + Sync,
{
    let blocks: Vec<u64> = (0..paths.div_ceil(BLOCK)).collect();
    let partial: Vec<Totals> = blocks
        .par_iter()
        .map(|&b| {
            let mut acc = Totals {
                moments: vec![Moments::default(); n_values],
                tallies: vec![Tally::default(); n_checks],
            };
            let mut slot = Trial {
                values: vec![None; n_values],
                checks: vec![None; n_checks],
            };
            for i in b * BLOCK..((b + 1) * BLOCK).min(paths) {
                slot.values.iter_mut().for_each(|v| *v = None);
                slot.checks.iter_mut().for_each(|c| *c = None);
                trial(&mut trial_rng(seed, i), &mut slot);
                for (m, v) in acc.moments.iter_mut().zip(&slot.values) {
                    if let Some(v) = v {
                        m.count += 1;
                        m.sum += v;
                        m.sum_sq += v * v;
                    }
                }
                for (t, c) in acc.tallies.iter_mut().zip(&slot.checks) {
                    if let Some(c) = c {
                        t.total += 1;
                        t.passed += u64::from(*c);
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = Totals {
        moments: vec![Moments::default(); n_values],
        tallies: vec![Tally::default(); n_checks],
    };
    for p in partial {
        for (m, x) in out.moments.iter_mut().zip(p.moments) {
            m.count += x.count;
            m.sum += x.sum;
            m.sum_sq += x.sum_sq;
        }
        for (t, x) in out.tallies.iter_mut().zip(p.tallies) {
            t.passed += x.passed;
            t.total += x.total;
        }
    }
    out
}
