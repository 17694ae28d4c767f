"""Actor-critic building blocks.

This package provides the Gaussian policies, the critic with its target
network, and rollout storage with GAE and the actor losses.
"""

from mfcgac.agents.critic import (
    CriticPair,
    critic_loss,
    target_sync,
    td_error,
    td_target,
    value_loss,
)
from mfcgac.agents.policy import (
    GaussianPolicy,
    OraclePolicy,
    Policy,
    gaussian_entropy,
    gaussian_log_prob,
    policy_entropy,
    policy_logprob,
    policy_sample,
)
from mfcgac.agents.rollout import (
    RolloutBuffer,
    TransitionBatch,
    gae,
    ppo_actor_loss,
    reinforce_actor_loss,
)

__all__ = [
    # Policies
    "GaussianPolicy",
    "OraclePolicy",
    "Policy",
    "gaussian_entropy",
    "gaussian_log_prob",
    "policy_entropy",
    "policy_logprob",
    "policy_sample",
    # Critic
    "CriticPair",
    "critic_loss",
    "target_sync",
    "td_error",
    "td_target",
    "value_loss",
    # Rollouts
    "RolloutBuffer",
    "TransitionBatch",
    "gae",
    "ppo_actor_loss",
    "reinforce_actor_loss",
]
