"""Exceptions raised across slice-orch."""


class SliceOrchError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleActionError(SliceOrchError):
    """The aggregate executed action exceeds a resource capacity."""

    def __init__(self, resource: str, total: float, capacity: float):
        self.resource = resource
        self.total = total
        self.capacity = capacity
        super().__init__(
            f"resource '{resource}' over-requested: {total:.6f} > capacity {capacity:.6f}"
        )


class DimensionError(SliceOrchError, ValueError):
    """An input does not match the network's dimension chain."""


class EmptyDatasetError(SliceOrchError, ValueError):
    """A training routine was given no data."""


class UntrainedEstimatorError(SliceOrchError):
    """A prediction was requested from an estimator that was never fitted."""


class ConfigError(SliceOrchError, ValueError):
    """A configuration key is unknown or its value cannot be coerced."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class MissingArtifactError(SliceOrchError, FileNotFoundError):
    """A pipeline stage needs an artifact that a prior stage did not produce."""

    def __init__(self, path, stage: str):
        self.path = path
        self.stage = stage
        super().__init__(f"missing artifact {path} (run the '{stage}' stage first)")
