//! Exact phase-one simplex for the Stiemke system `M y = 0, y ≥ 1`.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

/// Outcome of the feasibility search.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Stiemke {
    /// A solution `y` with every entry `≥ 1`.
    Feasible(Vec<Q>),
    /// `u` with `u · M_c ≤ 0` for every column and `Σ_c u · M_c < 0`.
    Infeasible(Vec<Q>),
}

/// Solves `M y = 0, y ≥ 1` where `m` is row-major (`rows × cols`).
///
/// Substitutes `y = 1 + w` and runs phase one on `M' w + a = b'` with rows
/// sign-flipped so that `b' ≥ 0`. Bland's rule rules out cycling. On
/// infeasibility the simplex multipliers are read off the artificial
/// columns of the objective row.
pub(crate) fn solve(m: &[Vec<Q>], cols: usize) -> Stiemke {
    let rows = m.len();
    let mut sign = vec![Q::one(); rows];
    let mut b = vec![Q::zero(); rows];
    for i in 0..rows {
        let s: Q = -m[i].iter().sum::<Q>();
        if s.is_negative() {
            sign[i] = -Q::one();
        }
        b[i] = &s * &sign[i];
    }
    if b.iter().all(Zero::is_zero) {
        return Stiemke::Feasible(vec![Q::one(); cols]);
    }

    // Columns: w_0..w_{cols-1}, a_0..a_{rows-1}.
    let width = cols + rows;
    let mut tab: Vec<Vec<Q>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Q> = m[i].iter().map(|v| v * &sign[i]).collect();
            row.extend((0..rows).map(|k| if k == i { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let mut basis: Vec<usize> = (cols..width).collect();
    // Reduced costs of the phase-one objective Σ a.
    let mut cost: Vec<Q> = (0..width)
        .map(|j| {
            let c = if j >= cols { Q::one() } else { Q::zero() };
            c - (0..rows).map(|i| &tab[i][j]).sum::<Q>()
        })
        .collect();
    let mut obj: Q = b.iter().sum();

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..rows {
            if tab[i][enter].is_positive() {
                let ratio = &b[i] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so a leaving row always exists.
        let (r, _) = leave.expect("phase one is bounded");
        let piv = tab[r][enter].clone();
        for v in tab[r].iter_mut() {
            *v /= &piv;
        }
        b[r] /= &piv;
        let pivot_row = tab[r].clone();
        let pivot_b = b[r].clone();
        for i in 0..rows {
            if i != r && !tab[i][enter].is_zero() {
                let f = tab[i][enter].clone();
                for (v, p) in tab[i].iter_mut().zip(&pivot_row) {
                    *v -= &f * p;
                }
                b[i] -= &f * &pivot_b;
            }
        }
        let f = cost[enter].clone();
        for (v, p) in cost.iter_mut().zip(&pivot_row) {
            *v -= &f * p;
        }
        obj += &f * &pivot_b;
        basis[r] = enter;
    }

    if obj.is_zero() {
        let mut y = vec![Q::one(); cols];
        for (i, &j) in basis.iter().enumerate() {
            if j < cols {
                y[j] += &b[i];
            }
        }
        Stiemke::Feasible(y)
    } else {
        // Reduced cost of artificial i is 1 − π_i.
        let u = (0..rows).map(|i| (Q::one() - &cost[cols + i]) * &sign[i]).collect();
        Stiemke::Infeasible(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn check(m: &[Vec<Q>], cols: usize) {
        match solve(m, cols) {
            Stiemke::Feasible(y) => {
                assert!(y.iter().all(|v| *v >= Q::one()));
                for row in m {
                    assert!(row.iter().zip(&y).map(|(a, b)| a * b).sum::<Q>().is_zero());
                }
            }
            Stiemke::Infeasible(u) => {
                let g: Vec<Q> = (0..cols)
                    .map(|c| m.iter().zip(&u).map(|(row, ui)| &row[c] * ui).sum())
                    .collect();
                assert!(g.iter().all(|v| !v.is_positive()));
                assert!(g.iter().sum::<Q>().is_negative());
            }
        }
    }

    #[test]
    fn balanced_two_children() {
        let m = vec![vec![q(-1, 2), q(1, 2)]];
        assert_eq!(solve(&m, 2), Stiemke::Feasible(vec![qi(1), qi(1)]));
    }

    #[test]
    fn skewed_feasible() {
        let m = vec![vec![qi(-1), qi(3)]];
        let Stiemke::Feasible(y) = solve(&m, 2) else { panic!() };
        assert_eq!(y, vec![qi(3), qi(1)]);
    }

    #[test]
    fn one_sided_is_infeasible() {
        let m = vec![vec![qi(1)]];
        assert_eq!(solve(&m, 1), Stiemke::Infeasible(vec![qi(-1)]));
        check(&[vec![qi(1), qi(0), qi(2)]], 3);
        check(&[vec![qi(1), qi(-1), qi(0)], vec![qi(0), qi(1), qi(-1)]], 3);
        check(&[vec![qi(1), qi(-1)], vec![qi(1), qi(1)]], 2);
    }
}
