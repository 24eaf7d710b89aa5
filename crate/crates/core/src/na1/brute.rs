//! Small-instance NA₁ oracle that shares no code with the simplex kernel.
//!
//! A one-step market admits a strictly positive martingale weighting iff
//! every child lies in the support of some nonnegative kernel vector of the
//! increment matrix. The nonnegative kernel cone is generated by its
//! one-signed circuits (minimal supports), so enumerating column subsets
//! decides feasibility exactly. Exponential in the number of children.

use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::process::{Process, StoppingMap};
use crate::rational::Q;
use crate::space::Filtration;

/// Kernel basis of `m` restricted to `cols` via Gauss–Jordan elimination.
fn kernel(m: &[Vec<Q>], cols: &[usize]) -> Vec<Vec<Q>> {
    let mut a: Vec<Vec<Q>> = m.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
    let n = cols.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v /= &piv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pr = a[r].clone();
                for (v, p) in a[i].iter_mut().zip(&pr) {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); n];
            v[free] = Q::from_integer(1.into());
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free].clone();
            }
            v
        })
        .collect()
}

/// Decides `∃ y > 0: Σ_c y_c ΔS_c = 0` for increments `delta[c][i]`.
pub fn one_step_feasible(delta: &[Vec<Q>]) -> bool {
    let k = delta.len();
    let n_assets = delta.first().map_or(0, Vec::len);
    let m: Vec<Vec<Q>> = (0..n_assets).map(|i| (0..k).map(|c| delta[c][i].clone()).collect()).collect();
    let mut covered = vec![false; k];
    for mask in 1u64..(1u64 << k) {
        let cols: Vec<usize> = (0..k).filter(|c| mask >> c & 1 == 1).collect();
        let ker = kernel(&m, &cols);
        if ker.len() != 1 {
            continue;
        }
        let v = &ker[0];
        if v.iter().all(Signed::is_positive) || v.iter().all(Signed::is_negative) {
            for &c in &cols {
                covered[c] = true;
            }
        }
    }
    covered.iter().all(|&c| c)
}

/// NA₁ verdict for a market (optionally stopped) by per-node enumeration.
pub fn na1_holds(filtration: &Filtration, assets: &[Process], stop: Option<&StoppingMap>) -> Result<bool> {
    let stopped: Vec<Process> = assets.iter().map(|s| stop.map_or_else(|| s.clone(), |st| s.stopped(st))).collect();
    for t in 0..filtration.horizon() {
        for ci in 0..filtration.at(t).len() {
            let delta: Vec<Vec<Q>> = filtration
                .at(t)
                .children(ci, filtration.at(t + 1))
                .into_iter()
                .map(|child| {
                    let a = filtration.at(t + 1).cell(child)[0];
                    stopped.iter().map(|s| s.delta(t + 1, a)).collect()
                })
                .collect();
            if !one_step_feasible(&delta) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn circuits() {
        assert!(one_step_feasible(&[vec![qi(-1)], vec![qi(1)]]));
        assert!(one_step_feasible(&[vec![qi(0)]]));
        assert!(!one_step_feasible(&[vec![qi(1)]]));
        assert!(one_step_feasible(&[vec![qi(-1)], vec![qi(1)], vec![qi(2)], vec![qi(0)]]));
        assert!(!one_step_feasible(&[vec![qi(1), qi(0)], vec![qi(-1), qi(1)], vec![qi(0), qi(1)]]));
    }
}
