"""RMSprop without momentum.

The update, per parameter tensor:

    g' = grad + l2 * param          (L2 regularization folded into the grad)
    v  = rho * v + (1 - rho) * g'^2
    param = param - lr * g' / (sqrt(v) + eps)

No momentum buffer exists anywhere, by design.
"""

from __future__ import annotations

import torch
from torch.optim import Optimizer


def rmsprop_step(param, grad, accumulator, lr, l2=0.0, rho=0.9, eps=1e-8):
    """Functional single step; works on floats, numpy arrays and tensors.

    Returns (updated param, updated accumulator).
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    g = grad + l2 * param
    v = rho * accumulator + (1.0 - rho) * g * g
    return param - lr * g / (v**0.5 + eps), v


class RMSPropNoMomentum(Optimizer):
    def __init__(self, params, lr=1e-4, rho=0.9, eps=1e-8, l2=0.0):
        if lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        super().__init__(params, dict(lr=lr, rho=rho, eps=eps, l2=l2))

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            for p in group["params"]:
                if p.grad is None:
                    continue
                state = self.state[p]
                if "square_avg" not in state:
                    state["square_avg"] = torch.zeros_like(p)
                grad = p.grad
                if group["l2"] != 0.0:
                    grad = grad.add(p, alpha=group["l2"])
                v = state["square_avg"]
                v.mul_(group["rho"]).addcmul_(grad, grad, value=1.0 - group["rho"])
                denom = v.sqrt().add_(group["eps"])
                p.addcdiv_(grad, denom, value=-group["lr"])
        return loss
