//! The control MDP: state encoding, composite action decoding, step
//! dynamics, and the reward gate.
//!
//! Each active site is one agent observing its own 3x2 (power, tilt) matrix;
//! actions adjust both per sector in discrete steps, clamped to the control
//! box. The reward is the network-wide association objective, zeroed whenever
//! fewer than the required minimum of users end up served.

use crate::association::{
    associate, eligibility, initial_controls, AssociationOutcome, Controls,
};
use crate::error::{Result, SimError};
use crate::metrics::RsrpCounts;
use crate::scenario::{Scenario, User};
use crate::derive_seed;

/// Tilt adjustment steps, degrees.
pub const TILT_DELTAS_DEG: [f64; 3] = [-1.0, 0.0, 1.0];
/// Power adjustment steps, dB.
pub const POWER_DELTAS_DB: [f64; 3] = [-5.0, 0.0, 5.0];
/// Delta combinations per sector.
pub const COMBOS_PER_SECTOR: usize = 9;
/// Sectors per site, fixing the composite action space at `9^L`.
pub const SECTORS_PER_GNB: usize = 3;

/// Composite actions available to one agent: `9^3`.
pub fn action_space_size() -> usize {
    COMBOS_PER_SECTOR.pow(SECTORS_PER_GNB as u32)
}

/// Decode a composite action index into per-sector (tilt, power) deltas.
///
/// Base-9 digits, sector 0 least significant; within a digit `d`, `d / 3`
/// selects the tilt step and `d % 3` the power step.
pub fn decode_action(index: usize, sectors: usize) -> Result<Vec<(f64, f64)>> {
    let limit = COMBOS_PER_SECTOR.pow(sectors as u32);
    if index >= limit {
        return Err(SimError::ActionOutOfRange { index, limit });
    }
    let mut rest = index;
    let mut deltas = Vec::with_capacity(sectors);
    for _ in 0..sectors {
        let digit = rest % COMBOS_PER_SECTOR;
        rest /= COMBOS_PER_SECTOR;
        deltas.push((TILT_DELTAS_DEG[digit / 3], POWER_DELTAS_DB[digit % 3]));
    }
    Ok(deltas)
}

/// Inverse of [`decode_action`] for delta tuples drawn from the step sets.
pub fn encode_action(deltas: &[(f64, f64)]) -> Result<usize> {
    let mut index = 0usize;
    for (s, &(tilt, power)) in deltas.iter().enumerate().rev() {
        let ti = TILT_DELTAS_DEG.iter().position(|&d| d == tilt);
        let pi = POWER_DELTAS_DB.iter().position(|&d| d == power);
        match (ti, pi) {
            (Some(ti), Some(pi)) => index = index * COMBOS_PER_SECTOR + ti * 3 + pi,
            _ => {
                return Err(SimError::InvalidConfig(format!(
                    "sector {s} deltas ({tilt}, {power}) are not on the action grid"
                )))
            }
        }
    }
    Ok(index)
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

/// Observation handed to the learners: one row per active site.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    /// gNB ids the rows correspond to.
    pub active_gnbs: Vec<usize>,
    /// Raw per-sector (power dBm, tilt deg) values, 3 pairs per row.
    pub raw: Vec<[(f64, f64); SECTORS_PER_GNB]>,
    /// Per-row normalized state `[p0, t0, p1, t1, p2, t2]` in `[0, 1]`.
    pub normalized: Vec<Vec<f64>>,
}

/// Aggregate per-step statistics alongside the reward.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub served: usize,
    pub leo_served: usize,
    pub rsrp: RsrpCounts,
}

/// One environment transition as seen by the trainer.
#[derive(Debug, Clone)]
pub struct EnvStep {
    pub states: Vec<Vec<f64>>,
    pub reward: f64,
    pub stats: StepStats,
}

/// Anything the training loop can drive: the network environment or a test
/// double with the same shape.
pub trait Environment {
    /// Number of parameter-shared agents stepping jointly.
    fn num_agents(&self) -> usize;
    fn state_dim(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn episode_steps(&self) -> usize;
    /// Start a new episode; returns one state vector per agent.
    fn reset(&mut self, episode_seed: u64) -> Vec<Vec<f64>>;
    /// Apply one action per agent.
    fn step(&mut self, actions: &[usize]) -> Result<EnvStep>;
}

// ---------------------------------------------------------------------------
// Network environment
// ---------------------------------------------------------------------------

/// The network control environment.
#[derive(Debug, Clone)]
pub struct NetworkEnv {
    scenario: Scenario,
    users: Vec<User>,
    controls: Controls,
    active: Vec<usize>,
    steps_taken: usize,
}

impl NetworkEnv {
    pub fn new(scenario: Scenario) -> Self {
        let controls = initial_controls(&scenario);
        let users = scenario.users.clone();
        let active = scenario.active_gnbs();
        Self {
            scenario,
            users,
            controls,
            active,
            steps_taken: 0,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn controls(&self) -> &Controls {
        &self.controls
    }

    /// Current observation.
    pub fn state(&self) -> EnvState {
        let b = &self.scenario.bounds;
        let p_span = (b.power_max_dbm - b.power_min_dbm).max(f64::MIN_POSITIVE);
        let t_span = (b.tilt_max_deg - b.tilt_min_deg).max(f64::MIN_POSITIVE);
        let mut raw = Vec::with_capacity(self.active.len());
        let mut normalized = Vec::with_capacity(self.active.len());
        for &g in &self.active {
            let row = [0, 1, 2].map(|s| {
                let c = &self.controls[g][s];
                (c.tx_power_dbm, c.tilt_deg)
            });
            let mut v = Vec::with_capacity(2 * SECTORS_PER_GNB);
            for (p, t) in row {
                v.push((p - b.power_min_dbm) / p_span);
                v.push((t - b.tilt_min_deg) / t_span);
            }
            raw.push(row);
            normalized.push(v);
        }
        EnvState {
            active_gnbs: self.active.clone(),
            raw,
            normalized,
        }
    }

    /// Association outcome under the current controls and users.
    pub fn evaluate(&self) -> Result<AssociationOutcome> {
        let elig = eligibility(&self.scenario, &self.controls, &self.users)?;
        Ok(associate(
            &elig,
            self.scenario.cell_capacity,
            self.scenario.satellite_capacity,
            self.scenario.min_served,
            self.scenario.penalty_lambda,
        ))
    }

    /// Reward under the gate: the objective when the minimum-served
    /// constraint holds, exactly zero otherwise.
    pub fn reward_of(outcome: &AssociationOutcome) -> f64 {
        if outcome.meets_min_served {
            outcome.objective
        } else {
            0.0
        }
    }

    /// Re-draw users/demands and restore the configured initial controls.
    pub fn reset_episode(&mut self, episode_seed: u64) -> EnvState {
        self.users = self
            .scenario
            .draw_users(derive_seed(self.scenario.rng_seed, episode_seed));
        self.controls = initial_controls(&self.scenario);
        self.steps_taken = 0;
        self.state()
    }

    /// Apply one composite action per active site, clamp the controls to the
    /// C7/C8 box, and re-run association.
    pub fn step_joint(
        &mut self,
        actions: &[usize],
    ) -> Result<(EnvState, f64, AssociationOutcome)> {
        if actions.len() != self.active.len() {
            return Err(SimError::ShapeMismatch {
                expected: self.active.len(),
                got: actions.len(),
            });
        }
        let b = self.scenario.bounds;
        for (&g, &a) in self.active.iter().zip(actions) {
            let deltas = decode_action(a, SECTORS_PER_GNB)?;
            for (s, (d_tilt, d_power)) in deltas.into_iter().enumerate() {
                let c = &mut self.controls[g][s];
                c.tilt_deg = (c.tilt_deg + d_tilt).clamp(b.tilt_min_deg, b.tilt_max_deg);
                c.tx_power_dbm =
                    (c.tx_power_dbm + d_power).clamp(b.power_min_dbm, b.power_max_dbm);
            }
        }
        self.steps_taken += 1;
        let outcome = self.evaluate()?;
        let reward = Self::reward_of(&outcome);
        Ok((self.state(), reward, outcome))
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }
}

impl Environment for NetworkEnv {
    fn num_agents(&self) -> usize {
        self.active.len()
    }

    fn state_dim(&self) -> usize {
        2 * SECTORS_PER_GNB
    }

    fn num_actions(&self) -> usize {
        action_space_size()
    }

    fn episode_steps(&self) -> usize {
        self.scenario.episode_steps
    }

    fn reset(&mut self, episode_seed: u64) -> Vec<Vec<f64>> {
        self.reset_episode(episode_seed).normalized
    }

    fn step(&mut self, actions: &[usize]) -> Result<EnvStep> {
        let (state, reward, outcome) = self.step_joint(actions)?;
        Ok(EnvStep {
            states: state.normalized,
            reward,
            stats: StepStats {
                served: outcome.served_count,
                leo_served: outcome.leo_served_count,
                rsrp: outcome.rsrp_counts,
            },
        })
    }
}
