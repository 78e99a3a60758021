//! Exact nonlinear equations of motion A(theta) * thetadd = b(theta, omega).
//!
//! Coefficients carry the prefix-mass sums selected by the index function
//! pi(i, j) = max(i, j); the linear solve is a dense LU with partial pivoting.

use crate::chain::{ChainState, PendulumChain};
use crate::error::{Error, Result};

/// Condition-estimate threshold above which the solver logs a warning.
pub const CONDITION_WARN: f64 = 1e12;
/// Condition-estimate threshold above which the solver refuses to answer.
pub const CONDITION_ERROR: f64 = 1e14;

/// Index selector choosing which prefix-mass tail weights the (i, j) coupling.
#[inline]
pub fn pi_index(i: usize, j: usize) -> usize {
    i.max(j)
}

/// Assembled mass matrix and forcing vector of the chain EOM.
#[derive(Debug, Clone, PartialEq)]
pub struct EomSystem {
    n: usize,
    /// Row-major N x N matrix [kg m].
    a: Vec<f64>,
    /// Length-N forcing vector [kg m s^-2].
    b: Vec<f64>,
}

impl EomSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn a_matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn b_vector(&self) -> &[f64] {
        &self.b
    }
}

/// Builds A_ij = l_j cos(theta_i - theta_j) * tail_mass(max(i,j)) and
/// b_i = -g sin(theta_i) tail_mass(i) - sum_j l_j w_j^2 sin(theta_i - theta_j) tail_mass(max(i,j)).
///
/// The angle-dependent factor of each (i, j) pair is computed once, so
/// A_ij / l_j and A_ji / l_i share the same floating-point expression.
pub fn assemble(chain: &PendulumChain, state: &ChainState) -> Result<EomSystem> {
    state.check_chain(chain)?;
    let n = chain.n();
    let l = chain.lengths();
    let th = &state.thetas;
    let om = &state.omegas;

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let coupling = (th[i] - th[j]).cos() * chain.tail_mass(pi_index(i, j));
            a[i * n + j] = l[j] * coupling;
            a[j * n + i] = l[i] * coupling;
        }
    }

    let mut b = vec![0.0; n];
    for i in 0..n {
        let mut s = -chain.gravity() * th[i].sin() * chain.tail_mass(i);
        for j in 0..n {
            s -= l[j] * om[j] * om[j] * (th[i] - th[j]).sin() * chain.tail_mass(pi_index(i, j));
        }
        b[i] = s;
    }

    Ok(EomSystem { n, a, b })
}

/// Dense LU solve with partial pivoting; `a` and `b` are consumed in place and
/// the solution is left in `b`.
///
/// The returned value is a cheap condition estimate (max/min pivot ratio).
pub(crate) fn solve_in_place(n: usize, a: &mut [f64], b: &mut [f64]) -> Result<f64> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);

    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;

    for col in 0..n {
        // Partial pivot: largest magnitude in this column at or below the diagonal.
        let mut pivot_row = col;
        let mut pivot_mag = a[col * n + col].abs();
        for row in col + 1..n {
            let mag = a[row * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag == 0.0 {
            return Err(Error::IllConditioned { cond: f64::INFINITY });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }

        max_pivot = max_pivot.max(pivot_mag);
        min_pivot = min_pivot.min(pivot_mag);

        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }

    // Back substitution.
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * b[k];
        }
        b[row] = s / a[row * n + row];
    }

    let cond = max_pivot / min_pivot;
    if cond > CONDITION_ERROR {
        return Err(Error::IllConditioned { cond });
    }
    if cond > CONDITION_WARN {
        log::warn!("EOM matrix near-singular: condition estimate {cond:.3e}");
    }
    Ok(cond)
}

/// Angular accelerations: the unique solution of A(theta) * thetadd = b.
pub fn accelerations(chain: &PendulumChain, state: &ChainState) -> Result<Vec<f64>> {
    let sys = assemble(chain, state)?;
    let EomSystem { n, mut a, mut b } = sys;
    solve_in_place(n, &mut a, &mut b)?;
    Ok(b)
}

/// First-order derivative of the packed state [theta; omega]:
/// returns [omega; accelerations].
pub fn state_derivative(chain: &PendulumChain, state: &ChainState) -> Result<Vec<f64>> {
    let accel = accelerations(chain, state)?;
    let mut out = Vec::with_capacity(2 * state.n());
    out.extend_from_slice(&state.omegas);
    out.extend(accel);
    Ok(out)
}

/// Derivative over the packed representation used by the integrator.
pub(crate) fn packed_derivative(chain: &PendulumChain, t: f64, y: &[f64]) -> Result<Vec<f64>> {
    let n = chain.n();
    debug_assert_eq!(y.len(), 2 * n);
    let state = ChainState {
        thetas: y[..n].to_vec(),
        omegas: y[n..].to_vec(),
        time: t,
    };
    state_derivative(chain, &state)
}
