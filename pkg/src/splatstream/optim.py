"""Self-contained adaptive-moment optimizer over named numpy parameter arrays."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0


class Adam:
    """Updates parameters in place; moments are keyed by parameter name."""

    def __init__(self, params: dict, lr=5e-4, beta1=0.9, beta2=0.999, eps=1e-8, lr_scale=None):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.lr_scale = lr_scale or {}
        self.state = AdamState(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )

    def step(self, grads: dict):
        self.state.step += 1
        t = self.state.step
        bias1 = 1.0 - self.beta1**t
        bias2 = 1.0 - self.beta2**t
        for k, g in grads.items():
            if k not in self.params:
                continue
            m = self.state.m[k]
            v = self.state.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            lr = self.lr * self.lr_scale.get(k, 1.0)
            self.params[k] -= lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)
