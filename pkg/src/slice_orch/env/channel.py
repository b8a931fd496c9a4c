import numpy as np


class ChannelProcess:
    """AR(1) channel-quality process, clamped to [0, 1] after every update."""

    def __init__(
        self,
        rng: np.random.Generator,
        rho: float = 0.9,
        mean: float = 0.7,
        noise_std: float = 0.08,
        initial: float | None = None,
    ):
        if not 0.0 <= rho < 1.0:
            raise ValueError(f"rho must be in [0, 1), got {rho}")
        self.rng = rng
        self.rho = rho
        self.mean = mean
        self.noise_std = noise_std
        self.h = float(np.clip(mean if initial is None else initial, 0.0, 1.0))

    def step(self) -> float:
        innovation = self.rng.normal(0.0, self.noise_std)
        self.h = float(np.clip(self.mean + self.rho * (self.h - self.mean) + innovation, 0.0, 1.0))
        return self.h

    def stationary_samples(self, n: int) -> np.ndarray:
        """Draws from the (unclamped) stationary law, clamped; used for grid evaluation."""
        std = self.noise_std / np.sqrt(1.0 - self.rho**2)
        return np.clip(self.rng.normal(self.mean, std, size=n), 0.0, 1.0)
