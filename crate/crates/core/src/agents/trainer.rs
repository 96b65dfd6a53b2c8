//! Training loops: the DQN control loop with replay and a target network,
//! the tabular Q-learning baseline, greedy evaluation, and checkpoints.
//!
//! One policy is shared across all agents (sites): every agent feeds its own
//! observation through the same network, the joint action is applied, and the
//! single network-wide reward is stored on every agent's transition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::network::{argmax, QNetwork};
use crate::agents::qtable::QTable;
use crate::agents::replay::{ReplayMemory, Transition};
use crate::derive_seed;
use crate::env::Environment;
use crate::error::{Result, SimError};
use crate::metrics::IterationMetrics;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Which learner drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Dqn,
    Ql,
}

/// Gradient update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    /// Plain gradient descent.
    Sgd,
    /// Adaptive-moment estimation.
    Adam,
}

/// Hyperparameters for either learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub total_iterations: usize,
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: usize,
    pub target_sync_period: usize,
    pub replay_capacity: usize,
    /// Stored transitions required before gradient updates begin.
    pub learn_start: usize,
    pub hidden_layers: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub ql_learning_rate: f64,
    /// Quantization levels cycled over state components for the tabular key.
    pub ql_quantization: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 32,
            total_iterations: 20_000,
            gamma: 0.95,
            eps_start: 1.0,
            eps_end: 0.01,
            eps_decay_steps: 10_000,
            target_sync_period: 200,
            replay_capacity: 10_000,
            learn_start: 500,
            hidden_layers: vec![128, 128],
            optimizer: OptimizerKind::Sgd,
            ql_learning_rate: 0.1,
            ql_quantization: vec![8, 15],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(SimError::InvalidConfig(m));
        if self.learning_rate <= 0.0 || self.ql_learning_rate <= 0.0 {
            return fail("learning rates must be positive".into());
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return fail("batch size and replay capacity must be positive".into());
        }
        if !(0.0 < self.gamma && self.gamma <= 1.0) {
            return fail(format!("gamma {} outside (0, 1]", self.gamma));
        }
        if self.eps_end > self.eps_start || !(0.0..=1.0).contains(&self.eps_start) {
            return fail("epsilon schedule must run downward within [0, 1]".into());
        }
        if self.hidden_layers.iter().any(|&h| h == 0) {
            return fail("hidden layers must be non-empty".into());
        }
        if self.ql_quantization.is_empty() || self.ql_quantization.iter().any(|&q| q < 2) {
            return fail("tabular quantization needs at least two levels".into());
        }
        Ok(())
    }
}

/// Exploration probability at a training step: linear from `eps_start` to
/// `eps_end` over `eps_decay_steps`, constant afterwards.
pub fn epsilon_at(step: usize, cfg: &TrainConfig) -> f64 {
    if step >= cfg.eps_decay_steps || cfg.eps_decay_steps == 0 {
        return cfg.eps_end;
    }
    let frac = step as f64 / cfg.eps_decay_steps as f64;
    cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac
}

/// Epsilon-greedy action from the network: uniform with probability
/// `epsilon`, otherwise the argmax (ties to the lowest index).
pub fn select_action<R: Rng>(
    net: &QNetwork,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..net.output_dim()));
    }
    Ok(argmax(&net.forward(state)?))
}

// ---------------------------------------------------------------------------
// Optimizer state
// ---------------------------------------------------------------------------

/// Flat adaptive-moment accumulators aligned with the network's parameter
/// indexing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }
}

fn apply_update(
    net: &mut QNetwork,
    grads: &crate::agents::network::Gradients,
    lr: f64,
    adam: &mut Option<AdamState>,
) {
    match adam {
        None => net.apply_sgd(grads, lr),
        Some(state) => {
            const B1: f64 = 0.9;
            const B2: f64 = 0.999;
            const EPS: f64 = 1e-8;
            state.t += 1;
            let flat = QNetwork::flatten_grads(grads);
            let bc1 = 1.0 - B1.powi(state.t as i32);
            let bc2 = 1.0 - B2.powi(state.t as i32);
            for (i, g) in flat.iter().enumerate() {
                state.m[i] = B1 * state.m[i] + (1.0 - B1) * g;
                state.v[i] = B2 * state.v[i] + (1.0 - B2) * g * g;
                let m_hat = state.m[i] / bc1;
                let v_hat = state.v[i] / bc2;
                let p = net.get_param(i);
                net.set_param(i, p - lr * m_hat / (v_hat.sqrt() + EPS));
            }
        }
    }
}

/// One temporal-difference update on a sampled batch.
///
/// Targets are `r + gamma * max_a' Q_target(s', a')`, reduced to `r` on
/// terminal transitions; the loss is the mean squared error on the
/// chosen-action values.
pub fn td_train_step(
    net: &mut QNetwork,
    target_net: &QNetwork,
    batch: &[&Transition],
    gamma: f64,
    lr: f64,
    adam: &mut Option<AdamState>,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(SimError::ShapeMismatch { expected: 1, got: 0 });
    }
    let mut states = Vec::with_capacity(batch.len());
    let mut actions = Vec::with_capacity(batch.len());
    let mut targets = Vec::with_capacity(batch.len());
    for t in batch {
        let y = if t.terminal {
            t.reward
        } else {
            let next_q = target_net.forward(&t.next_state)?;
            t.reward + gamma * next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        states.push(t.state.as_slice());
        actions.push(t.action);
        targets.push(y);
    }
    let (loss, grads) = net.loss_and_grad(&states, &actions, &targets)?;
    apply_update(net, &grads, lr, adam);
    Ok(loss)
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

/// Full training state; JSON on disk, versioned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub agent: AgentKind,
    pub config: TrainConfig,
    pub state_dim: usize,
    pub num_actions: usize,
    /// Iterations completed so far.
    pub iteration: usize,
    /// Gradient updates performed so far.
    pub train_steps: usize,
    /// Episodes started so far.
    pub episode_index: u64,
    pub net: Option<QNetwork>,
    pub target_net: Option<QNetwork>,
    pub qtable: Option<QTable>,
    pub replay: Option<ReplayMemory>,
    pub adam: Option<AdamState>,
    pub action_rng: ChaCha8Rng,
    pub replay_rng: ChaCha8Rng,
}

impl Checkpoint {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self)
            .map_err(|e| SimError::BadCheckpoint(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint =
            serde_json::from_str(&text).map_err(|e| SimError::BadCheckpoint(e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(SimError::BadCheckpoint(format!(
                "version {} unsupported (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }
}

/// Metrics trace plus the final state of a training run.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub metrics: Vec<IterationMetrics>,
    pub checkpoint: Checkpoint,
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

/// Train an agent on `env` from scratch.
pub fn train(
    env: &mut dyn Environment,
    kind: AgentKind,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainResult> {
    train_with(env, kind, cfg, seed, None)
}

/// Train, optionally resuming from a checkpoint taken at an episode boundary.
pub fn train_with(
    env: &mut dyn Environment,
    kind: AgentKind,
    cfg: &TrainConfig,
    seed: u64,
    resume: Option<Checkpoint>,
) -> Result<TrainResult> {
    cfg.validate()?;
    let state_dim = env.state_dim();
    let num_actions = env.num_actions();
    let episode_steps = env.episode_steps().max(1);

    let mut ckpt = match resume {
        Some(c) => {
            if c.state_dim != state_dim || c.num_actions != num_actions {
                return Err(SimError::BadCheckpoint(format!(
                    "checkpoint shapes ({}, {}) do not match environment ({state_dim}, {num_actions})",
                    c.state_dim, c.num_actions
                )));
            }
            if c.agent != kind {
                return Err(SimError::BadCheckpoint("agent kind mismatch".into()));
            }
            c
        }
        None => {
            let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xA11CE));
            let (net, target_net, qtable, replay, adam) = match kind {
                AgentKind::Dqn => {
                    let mut dims = vec![state_dim];
                    dims.extend_from_slice(&cfg.hidden_layers);
                    dims.push(num_actions);
                    let net = QNetwork::new(&dims, &mut init_rng);
                    let target = net.clone();
                    let adam = matches!(cfg.optimizer, OptimizerKind::Adam)
                        .then(|| AdamState::new(net.param_count()));
                    (
                        Some(net),
                        Some(target),
                        None,
                        Some(ReplayMemory::new(cfg.replay_capacity)),
                        adam,
                    )
                }
                AgentKind::Ql => (
                    None,
                    None,
                    Some(QTable::new(num_actions, cfg.ql_quantization.clone())),
                    None,
                    None,
                ),
            };
            Checkpoint {
                version: CHECKPOINT_VERSION,
                agent: kind,
                config: cfg.clone(),
                state_dim,
                num_actions,
                iteration: 0,
                train_steps: 0,
                episode_index: 0,
                net,
                target_net,
                qtable,
                replay,
                adam,
                action_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xAC7)),
                replay_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5A3)),
            }
        }
    };

    let mut states = env.reset(derive_seed(seed, ckpt.episode_index));
    ckpt.episode_index += 1;
    let mut metrics = Vec::with_capacity(cfg.total_iterations);
    let end = ckpt.iteration + cfg.total_iterations;

    while ckpt.iteration < end {
        let t = ckpt.iteration;
        let eps = epsilon_at(t, cfg);

        let actions: Vec<usize> = match kind {
            AgentKind::Dqn => {
                let net = ckpt.net.as_ref().expect("dqn checkpoint holds a network");
                states
                    .iter()
                    .map(|s| select_action(net, s, eps, &mut ckpt.action_rng))
                    .collect::<Result<_>>()?
            }
            AgentKind::Ql => {
                let table = ckpt.qtable.as_ref().expect("ql checkpoint holds a table");
                states
                    .iter()
                    .map(|s| {
                        if eps > 0.0 && ckpt.action_rng.gen::<f64>() < eps {
                            ckpt.action_rng.gen_range(0..num_actions)
                        } else {
                            table.argmax(table.key(s))
                        }
                    })
                    .collect()
            }
        };

        let step = env.step(&actions)?;
        let terminal = (t + 1) % episode_steps == 0;

        let mut loss = 0.0;
        match kind {
            AgentKind::Dqn => {
                let replay = ckpt.replay.as_mut().expect("dqn replay");
                for (agent, s) in states.iter().enumerate() {
                    replay.push(Transition {
                        state: s.clone(),
                        action: actions[agent],
                        reward: step.reward,
                        next_state: step.states[agent].clone(),
                        terminal,
                    });
                }
                let ready = replay.len() >= cfg.learn_start.max(cfg.batch_size);
                if ready {
                    let batch = replay.sample(cfg.batch_size, &mut ckpt.replay_rng)?;
                    let net = ckpt.net.as_mut().unwrap();
                    let target = ckpt.target_net.as_ref().unwrap();
                    loss = td_train_step(net, target, &batch, cfg.gamma, cfg.learning_rate, &mut ckpt.adam)?;
                    ckpt.train_steps += 1;
                    if ckpt.train_steps % cfg.target_sync_period == 0 {
                        ckpt.target_net = ckpt.net.clone();
                    }
                }
            }
            AgentKind::Ql => {
                let table = ckpt.qtable.as_mut().unwrap();
                for (agent, s) in states.iter().enumerate() {
                    let key = table.key(s);
                    let next_key = table.key(&step.states[agent]);
                    table.update(
                        key,
                        actions[agent],
                        step.reward,
                        next_key,
                        terminal,
                        cfg.ql_learning_rate,
                        cfg.gamma,
                    );
                }
            }
        }

        metrics.push(IterationMetrics {
            iteration: t,
            reward: step.reward,
            loss,
            epsilon: eps,
            rsrp: step.stats.rsrp,
            served: step.stats.served,
            leo_served: step.stats.leo_served,
        });

        states = if terminal {
            let s = env.reset(derive_seed(seed, ckpt.episode_index));
            ckpt.episode_index += 1;
            s
        } else {
            step.states
        };
        ckpt.iteration += 1;

        if t % 1000 == 0 {
            log::debug!("iteration {t}: reward {:.3}, eps {eps:.3}", step.reward);
        }
    }

    Ok(TrainResult { metrics, checkpoint: ckpt })
}

/// Greedy rollouts from a checkpointed policy; same metric schema as
/// training, no learning, exploration off.
pub fn evaluate(
    ckpt: &Checkpoint,
    env: &mut dyn Environment,
    episodes: usize,
    seed: u64,
) -> Result<Vec<IterationMetrics>> {
    if ckpt.state_dim != env.state_dim() || ckpt.num_actions != env.num_actions() {
        return Err(SimError::ShapeMismatch {
            expected: env.state_dim(),
            got: ckpt.state_dim,
        });
    }
    let episode_steps = env.episode_steps().max(1);
    let mut metrics = Vec::with_capacity(episodes * episode_steps);
    let mut iteration = 0;
    for ep in 0..episodes {
        let mut states = env.reset(derive_seed(seed, 0xE7A1 + ep as u64));
        for _ in 0..episode_steps {
            let actions: Vec<usize> = match ckpt.agent {
                AgentKind::Dqn => {
                    let net = ckpt.net.as_ref().ok_or_else(|| {
                        SimError::BadCheckpoint("missing network parameters".into())
                    })?;
                    states
                        .iter()
                        .map(|s| net.forward(s).map(|q| argmax(&q)))
                        .collect::<Result<_>>()?
                }
                AgentKind::Ql => {
                    let table = ckpt.qtable.as_ref().ok_or_else(|| {
                        SimError::BadCheckpoint("missing tabular values".into())
                    })?;
                    states.iter().map(|s| table.argmax(table.key(s))).collect()
                }
            };
            let step = env.step(&actions)?;
            metrics.push(IterationMetrics {
                iteration,
                reward: step.reward,
                loss: 0.0,
                epsilon: 0.0,
                rsrp: step.stats.rsrp,
                served: step.stats.served,
                leo_served: step.stats.leo_served,
            });
            states = step.states;
            iteration += 1;
        }
    }
    Ok(metrics)
}
