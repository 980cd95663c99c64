from .network import QLoss, QNetwork, q_loss_and_gradient, soft_update, td_targets
from .optim import Adam, LinearSchedule, adam_step, schedule_value
from .policy import epsilon_greedy
from .replay import PrioritizedReplayBuffer, ReplaySample

__all__ = [
    "Adam",
    "LinearSchedule",
    "PrioritizedReplayBuffer",
    "QLoss",
    "QNetwork",
    "ReplaySample",
    "adam_step",
    "epsilon_greedy",
    "q_loss_and_gradient",
    "schedule_value",
    "soft_update",
    "td_targets",
]
