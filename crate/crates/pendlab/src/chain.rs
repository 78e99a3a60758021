//! Static chain description, dynamic state, and kinematic/energetic maps.
//!
//! Angles are measured counterclockwise from the downward vertical; the pivot
//! sits at the origin with y negative below it, so the potential datum is the
//! pivot height.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gravitational acceleration used by the stock unit chain [m s^-2].
pub const STANDARD_GRAVITY: f64 = 9.8;

/// Immutable physical description of an N-link planar pendulum chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendulumChain {
    lengths: Vec<f64>,
    masses: Vec<f64>,
    gravity: f64,
    /// `tail_masses[i]` = sum of `masses[i..]`, each tail summed in ascending
    /// index order so results are reproducible bit-for-bit.
    tail_masses: Vec<f64>,
}

impl PendulumChain {
    pub fn new(lengths: Vec<f64>, masses: Vec<f64>, gravity: f64) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidChain("at least one link required".into()));
        }
        if lengths.len() != masses.len() {
            return Err(Error::InvalidChain(format!(
                "{} lengths but {} masses",
                lengths.len(),
                masses.len()
            )));
        }
        for (i, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidChain(format!("length[{i}] = {l} must be > 0")));
            }
        }
        for (i, &m) in masses.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidChain(format!("mass[{i}] = {m} must be > 0")));
            }
        }
        if !(gravity.is_finite() && gravity > 0.0) {
            return Err(Error::InvalidChain(format!("gravity = {gravity} must be > 0")));
        }
        let n = masses.len();
        let tail_masses = (0..n).map(|i| masses[i..].iter().sum()).collect();
        Ok(Self {
            lengths,
            masses,
            gravity,
            tail_masses,
        })
    }

    /// Chain with `n` identical links.
    pub fn uniform(n: usize, length: f64, mass: f64, gravity: f64) -> Result<Self> {
        Self::new(vec![length; n], vec![mass; n], gravity)
    }

    /// The paper's controlled configuration: 1 m rods, 1 kg bobs, g = 9.8.
    pub fn unit(n: usize) -> Self {
        Self::uniform(n, 1.0, 1.0, STANDARD_GRAVITY).expect("unit chain parameters are valid")
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    /// Mass hanging at or below link `i`: sum of `masses[i..]`.
    pub fn tail_mass(&self, i: usize) -> f64 {
        self.tail_masses[i]
    }

    /// Total mass, summed in ascending index order.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Rod length from the pivot to bob `i` when the chain is straight.
    pub fn cumulative_length(&self, i: usize) -> f64 {
        self.lengths[..=i].iter().sum()
    }
}

/// Dynamic state of a chain: generalized coordinates, velocities, and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub thetas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub time: f64,
}

impl ChainState {
    pub fn new(thetas: Vec<f64>, omegas: Vec<f64>, time: f64) -> Result<Self> {
        if thetas.len() != omegas.len() {
            return Err(Error::InvalidState(format!(
                "{} angles but {} angular velocities",
                thetas.len(),
                omegas.len()
            )));
        }
        if !time.is_finite()
            || thetas.iter().any(|v| !v.is_finite())
            || omegas.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        Ok(Self {
            thetas,
            omegas,
            time,
        })
    }

    /// All bobs released from rest at the given angles, t = 0.
    pub fn at_rest(thetas: Vec<f64>) -> Result<Self> {
        let omegas = vec![0.0; thetas.len()];
        Self::new(thetas, omegas, 0.0)
    }

    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn check_chain(&self, chain: &PendulumChain) -> Result<()> {
        if self.n() != chain.n() {
            return Err(Error::DimensionMismatch {
                expected: chain.n(),
                actual: self.n(),
            });
        }
        Ok(())
    }
}

/// Cartesian bob positions and velocities derived from a chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianSample {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub vxs: Vec<f64>,
    pub vys: Vec<f64>,
}

/// Kinematic map: prefix sums x_i = sum l_k sin(theta_k), y_i = -sum l_k cos(theta_k)
/// and their time derivatives.
pub fn to_cartesian(chain: &PendulumChain, state: &ChainState) -> Result<CartesianSample> {
    state.check_chain(chain)?;
    let n = chain.n();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut vxs = Vec::with_capacity(n);
    let mut vys = Vec::with_capacity(n);
    let (mut x, mut y, mut vx, mut vy) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let l = chain.lengths()[k];
        let (sin, cos) = state.thetas[k].sin_cos();
        let w = state.omegas[k];
        x += l * sin;
        y -= l * cos;
        vx += l * w * cos;
        vy += l * w * sin;
        xs.push(x);
        ys.push(y);
        vxs.push(vx);
        vys.push(vy);
    }
    Ok(CartesianSample { xs, ys, vxs, vys })
}

/// T = 1/2 sum m_i (vx_i^2 + vy_i^2), mass-weighted.
pub fn kinetic_energy(chain: &PendulumChain, state: &ChainState) -> Result<f64> {
    let cart = to_cartesian(chain, state)?;
    let mut t = 0.0;
    for i in 0..chain.n() {
        t += 0.5 * chain.masses()[i] * (cart.vxs[i] * cart.vxs[i] + cart.vys[i] * cart.vys[i]);
    }
    Ok(t)
}

/// V = sum m_i g y_i, datum at the pivot.
pub fn potential_energy(chain: &PendulumChain, state: &ChainState) -> Result<f64> {
    let cart = to_cartesian(chain, state)?;
    let mut v = 0.0;
    for i in 0..chain.n() {
        v += chain.masses()[i] * chain.gravity() * cart.ys[i];
    }
    Ok(v)
}

/// E = T + V; conserved along exact trajectories of the undamped chain.
pub fn total_energy(chain: &PendulumChain, state: &ChainState) -> Result<f64> {
    Ok(kinetic_energy(chain, state)? + potential_energy(chain, state)?)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(PendulumChain::new(vec![], vec![], 9.8).is_err());
        assert!(PendulumChain::new(vec![1.0], vec![1.0, 1.0], 9.8).is_err());
        assert!(PendulumChain::new(vec![-1.0], vec![1.0], 9.8).is_err());
        assert!(PendulumChain::new(vec![1.0], vec![0.0], 9.8).is_err());
        assert!(PendulumChain::new(vec![1.0], vec![1.0], 0.0).is_err());
        assert!(ChainState::new(vec![0.0], vec![f64::NAN], 0.0).is_err());
        assert!(ChainState::new(vec![0.0, 0.0], vec![0.0], 0.0).is_err());
    }

    #[test]
    fn tail_masses_and_totals() {
        let chain = PendulumChain::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 4.0], 9.8).unwrap();
        assert_eq!(chain.tail_mass(0), 7.0);
        assert_eq!(chain.tail_mass(1), 6.0);
        assert_eq!(chain.tail_mass(2), 4.0);
        assert_eq!(chain.total_mass(), 7.0);
        assert_eq!(chain.cumulative_length(2), 6.0);
    }

    #[test]
    fn hanging_rest_position() {
        let chain = PendulumChain::unit(1);
        let state = ChainState::at_rest(vec![0.0]).unwrap();
        let cart = to_cartesian(&chain, &state).unwrap();
        assert_eq!(cart.xs[0], 0.0);
        assert_eq!(cart.ys[0], -1.0);
    }

    #[test]
    fn both_links_horizontal() {
        let chain = PendulumChain::unit(2);
        let state = ChainState::at_rest(vec![FRAC_PI_2, FRAC_PI_2]).unwrap();
        let cart = to_cartesian(&chain, &state).unwrap();
        assert_relative_eq!(cart.xs[1], 2.0, max_relative = 1e-15);
        assert_relative_eq!(cart.ys[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn velocity_prefix_sums() {
        let chain = PendulumChain::unit(2);
        let state =
            ChainState::new(vec![FRAC_PI_4, FRAC_PI_4], vec![1.0, 0.0], 0.0).unwrap();
        let cart = to_cartesian(&chain, &state).unwrap();
        assert_relative_eq!(cart.vxs[0], FRAC_PI_4.cos(), max_relative = 1e-12);
        // Second rod carries no angular velocity, so vx is unchanged.
        assert_eq!(cart.vxs[0], cart.vxs[1]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let chain = PendulumChain::unit(2);
        let state = ChainState::at_rest(vec![0.0]).unwrap();
        assert!(matches!(
            to_cartesian(&chain, &state),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn kinetic_energy_examples() {
        let chain = PendulumChain::unit(3);
        let state = ChainState::at_rest(vec![0.4, -0.2, 1.0]).unwrap();
        assert_eq!(kinetic_energy(&chain, &state).unwrap(), 0.0);

        let chain = PendulumChain::unit(1);
        let state = ChainState::new(vec![0.3], vec![2.0], 0.0).unwrap();
        assert_relative_eq!(kinetic_energy(&chain, &state).unwrap(), 2.0, max_relative = 1e-12);

        // Aligned double chain: bob 2 speed is l1*w1 + l2*w2.
        let chain = PendulumChain::unit(2);
        let state = ChainState::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.0).unwrap();
        assert_relative_eq!(kinetic_energy(&chain, &state).unwrap(), 2.5, max_relative = 1e-12);
    }

    #[test]
    fn potential_energy_examples() {
        let chain = PendulumChain::unit(1);
        let state = ChainState::at_rest(vec![0.0]).unwrap();
        assert_relative_eq!(potential_energy(&chain, &state).unwrap(), -9.8, max_relative = 1e-12);

        let state = ChainState::at_rest(vec![FRAC_PI_2]).unwrap();
        assert_relative_eq!(potential_energy(&chain, &state).unwrap(), 0.0, epsilon = 1e-12);

        let chain = PendulumChain::unit(2);
        let state = ChainState::at_rest(vec![FRAC_PI_4, FRAC_PI_4]).unwrap();
        let expected = 9.8 * (-FRAC_PI_4.cos()) + 9.8 * (-2.0 * FRAC_PI_4.cos());
        assert_relative_eq!(potential_energy(&chain, &state).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(expected, -20.789, max_relative = 1e-4);
    }

    #[test]
    fn total_energy_examples() {
        let chain = PendulumChain::unit(1);
        let state = ChainState::at_rest(vec![FRAC_PI_4]).unwrap();
        assert_relative_eq!(total_energy(&chain, &state).unwrap(), -6.9296, max_relative = 1e-4);

        // Hanging at rest: E = -g sum m_i cumlen(i).
        let chain = PendulumChain::new(vec![1.0, 0.5], vec![2.0, 3.0], 9.8).unwrap();
        let state = ChainState::at_rest(vec![0.0, 0.0]).unwrap();
        let expected = -9.8 * (2.0 * 1.0 + 3.0 * 1.5);
        assert_relative_eq!(total_energy(&chain, &state).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn finite_difference_matches_analytic_velocities() {
        let chain = PendulumChain::new(vec![1.0, 0.7, 1.3], vec![1.0, 2.0, 0.5], 9.8).unwrap();
        let thetas = vec![0.4, -0.9, 1.7];
        let omegas = vec![0.8, -1.1, 0.3];
        let dt = 1e-6;
        let here = ChainState::new(thetas.clone(), omegas.clone(), 0.0).unwrap();
        let shifted: Vec<f64> = thetas
            .iter()
            .zip(&omegas)
            .map(|(t, w)| t + w * dt)
            .collect();
        let there = ChainState::new(shifted, omegas.clone(), dt).unwrap();
        let c0 = to_cartesian(&chain, &here).unwrap();
        let c1 = to_cartesian(&chain, &there).unwrap();
        for i in 0..3 {
            let fd_vx = (c1.xs[i] - c0.xs[i]) / dt;
            let fd_vy = (c1.ys[i] - c0.ys[i]) / dt;
            assert_relative_eq!(fd_vx, c0.vxs[i], max_relative = 1e-5);
            assert_relative_eq!(fd_vy, c0.vys[i], max_relative = 1e-5);
        }
    }
}
