//! Leaky integrate-and-fire dynamics.
//!
//! Shared by the dense core's Activ unit, the sparse cores' spiking phase
//! and the brute-force oracle, so every datapath fires from exactly the
//! same arithmetic.
//!
//! One step computes `v = beta * u + weighted_input`; the neuron fires
//! when `v > theta` (strict) and the threshold is subtracted in the same
//! step it fires, which is the hardware's compare-then-subtract ordering.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitPlane;
use crate::{Error, Result};

/// Decay factor and firing threshold for a LIF population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams {
    beta: f64,
    theta: f64,
}

impl LifParams {
    /// `beta` must lie in `[0, 1]`, `theta` must be positive.
    pub fn new(beta: f64, theta: f64) -> Result<Self> {
        if !beta.is_finite() || !theta.is_finite() {
            return Err(Error::NonFinite {
                context: "LIF parameters",
            });
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParam {
                context: "decay factor beta must be within [0, 1]",
            });
        }
        if theta <= 0.0 {
            return Err(Error::InvalidParam {
                context: "firing threshold theta must be positive",
            });
        }
        Ok(Self { beta, theta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Membrane potentials for one `h x w` plane of neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    h: usize,
    w: usize,
    u: Vec<f64>,
}

impl LifState {
    pub fn new(h: usize, w: usize) -> Self {
        Self {
            h,
            w,
            u: vec![0.0; h * w],
        }
    }

    pub fn potentials(&self) -> &[f64] {
        &self.u
    }

    pub fn reset(&mut self) {
        self.u.fill(0.0);
    }
}

/// Advance one neuron by one timestep.
///
/// Returns the post-step membrane potential and whether a spike fired.
#[inline]
pub fn lif_step(u: f64, weighted_input: f64, params: &LifParams) -> Result<(f64, bool)> {
    if !u.is_finite() || !weighted_input.is_finite() {
        return Err(Error::NonFinite {
            context: "LIF step input",
        });
    }
    let v = params.beta * u + weighted_input;
    if v > params.theta {
        Ok((v - params.theta, true))
    } else {
        Ok((v, false))
    }
}

/// Advance a whole plane by one timestep.
///
/// `input_plane` carries the accumulated weighted input per neuron; the
/// per-channel `bias` is added before the step, matching the Activ unit.
/// Elements are independent, so evaluation order cannot affect results.
pub fn lif_plane_step(
    state: &mut LifState,
    input_plane: &[f64],
    bias: f64,
    params: &LifParams,
) -> Result<BitPlane> {
    if input_plane.len() != state.u.len() {
        return Err(Error::ShapeMismatch {
            context: "LIF plane step input",
        });
    }
    let mut spikes = BitPlane::new(state.h, state.w);
    for (idx, (u, inp)) in state.u.iter_mut().zip(input_plane).enumerate() {
        let (next, fired) = lif_step(*u, inp + bias, params)?;
        *u = next;
        if fired {
            spikes.set(idx / state.w, idx % state.w, true);
        }
    }
    Ok(spikes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, theta: f64) -> LifParams {
        LifParams::new(beta, theta).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(LifParams::new(-0.1, 0.5).is_err());
        assert!(LifParams::new(1.1, 0.5).is_err());
        assert!(LifParams::new(0.5, 0.0).is_err());
        assert!(LifParams::new(f64::NAN, 0.5).is_err());
        assert!(LifParams::new(0.0, 0.5).is_ok());
        assert!(LifParams::new(1.0, 0.5).is_ok());
    }

    #[test]
    fn zero_everything_stays_at_rest() {
        let (u, s) = lif_step(0.0, 0.0, &params(0.15, 0.5)).unwrap();
        assert_eq!(u, 0.0);
        assert!(!s);
    }

    #[test]
    fn subthreshold_integrates_without_firing() {
        let p = params(0.15, 0.5);
        let (u, s) = lif_step(0.4, 0.2, &p).unwrap();
        // Direct evaluation of the membrane update.
        assert_eq!(u, 0.15 * 0.4 + 0.2);
        assert!((u - 0.26).abs() < 1e-12);
        assert!(!s);
    }

    #[test]
    fn firing_subtracts_threshold_same_step() {
        let p = params(0.15, 0.5);
        let (u, s) = lif_step(0.4, 0.6, &p).unwrap();
        assert_eq!(u, 0.15 * 0.4 + 0.6 - 0.5);
        assert!((u - 0.16).abs() < 1e-12);
        assert!(s);
    }

    #[test]
    fn threshold_is_strict() {
        let p = params(0.0, 0.5);
        let (u, s) = lif_step(0.0, 0.5, &p).unwrap();
        assert_eq!(u, 0.5);
        assert!(!s);
    }

    #[test]
    fn non_finite_input_rejected() {
        let p = params(0.15, 0.5);
        assert!(matches!(
            lif_step(f64::NAN, 0.0, &p),
            Err(Error::NonFinite { .. })
        ));
        assert!(lif_step(0.0, f64::INFINITY, &p).is_err());
    }

    #[test]
    fn plane_step_zero_planes() {
        let p = params(0.15, 0.5);
        let mut state = LifState::new(2, 2);
        let spikes = lif_plane_step(&mut state, &[0.0; 4], 0.0, &p).unwrap();
        assert_eq!(spikes.count_ones(), 0);
        assert!(state.potentials().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn plane_step_bias_alone_can_fire() {
        let p = params(0.15, 0.5);
        let mut state = LifState::new(1, 1);
        let spikes = lif_plane_step(&mut state, &[0.0], 0.6, &p).unwrap();
        assert!(spikes.get(0, 0));
        assert!((state.potentials()[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn plane_step_fires_exactly_where_above_threshold() {
        let p = params(0.15, 0.5);
        let mut state = LifState::new(2, 2);
        let spikes = lif_plane_step(&mut state, &[0.1, 0.7, 0.2, 0.5], 0.0, &p).unwrap();
        assert_eq!(spikes.count_ones(), 1);
        assert!(spikes.get(0, 1));
        // Elementwise against scalar steps.
        for (idx, &inp) in [0.1, 0.7, 0.2, 0.5].iter().enumerate() {
            let (u, s) = lif_step(0.0, inp, &p).unwrap();
            assert_eq!(state.potentials()[idx], u);
            assert_eq!(spikes.get(idx / 2, idx % 2), s);
        }
    }

    #[test]
    fn plane_step_rejects_dimension_mismatch() {
        let p = params(0.15, 0.5);
        let mut state = LifState::new(2, 2);
        assert!(matches!(
            lif_plane_step(&mut state, &[0.0; 3], 0.0, &p),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn decay_is_monotone_toward_zero() {
        let p = params(0.6, 0.5);
        let mut u = 3.0;
        let mut prev = u;
        for _ in 0..64 {
            let (next, _) = lif_step(u, 0.0, &p).unwrap();
            assert!(next <= prev);
            prev = next;
            u = next;
        }
        assert!(u < 1e-6);
    }
}
