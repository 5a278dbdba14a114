import numpy as np


class Adam:
    """Adam with bias correction, updating arrays in place.

    Parameters
    ----------

    params : list of ndarray
        Arrays updated in place by ``step``.

    lr : float, default=1e-3

    beta1 : float, default=0.9

    beta2 : float, default=0.999

    eps : float, default=1e-8

    decay : float, default=1.0
        Step ``t`` (0-based) uses ``lr * decay**t``.

    """

    def __init__(
        self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8, decay=1.0
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.decay = decay
        self.t = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    @property
    def current_lr(self):
        return self.lr * self.decay**self.t

    def step(self, grads):
        if len(grads) != len(self.params):
            raise ValueError(
                f"Got {len(grads)} gradients for {len(self.params)}"
                " parameters"
            )
        lr = self.current_lr
        self.t += 1
        for i, (p, g) in enumerate(zip(self.params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g**2
            m_hat = self.m[i] / (1 - self.beta1**self.t)
            v_hat = self.v[i] / (1 - self.beta2**self.t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
