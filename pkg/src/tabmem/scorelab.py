"""Numerical lab for score-based diffusion over a finite latent set.

For a variance-exploding process z_t = z_0 + sigma(t) * eps over training
points, the score minimizing the denoising objective has a closed form: the
softmax-weighted average of (point - z) / sigma^2 with weights proportional
to exp(-||point - z||^2 / (2 sigma^2)). Reversing the SDE with this score
drives every trajectory onto a training point, which this module makes
measurable: the Euler iteration stops at the first positive grid time and
the terminal step applies the analytic small-time limit, a hard assignment
to the nearest point. Replication statistics are therefore reported for the
pre-assignment state, where they are informative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadTimeError, ZeroSigmaError


def _identity(t: float) -> float:
    return t


@dataclass(frozen=True)
class SigmaSchedule:
    """Noise level sigma(t) on [0, horizon], zero at t = 0, increasing after."""

    horizon: float = 1.0
    fn: Callable[[float], float] = _identity

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.fn(0.0) != 0.0:
            raise ValueError("sigma(0) must be 0")
        probe = np.linspace(0.0, self.horizon, 17)
        values = [self.fn(float(t)) for t in probe]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sigma must be strictly increasing on (0, horizon]")

    def sigma(self, t: float) -> float:
        return self.fn(t)


@dataclass(frozen=True)
class LatentSet:
    """Training points of the diffusion, shape (N, dim)."""

    points: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if points.ndim != 2 or points.shape[0] < 1:
            raise ValueError("latents must form an (N, dim) array with N >= 1")
        if not np.isfinite(points).all():
            raise ValueError("latent coordinates must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def diameter(self) -> float:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return float(np.sqrt(np.sum(diff * diff, axis=-1)).max())

    def nearest(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Index of and distance to the nearest latent, batched over rows."""
        z = np.atleast_2d(z)
        diff = z[:, None, :] - self.points[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        idx = np.argmin(dist, axis=1)
        return idx, dist[np.arange(z.shape[0]), idx]


@dataclass(frozen=True)
class SdeConfig:
    steps: int
    seed: int = 0
    trajectories: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.trajectories < 1:
            raise ValueError(f"trajectories must be >= 1, got {self.trajectories}")


def forward_noise(
    z0: np.ndarray,
    t: float,
    schedule: SigmaSchedule,
    rng: np.random.Generator,
) -> np.ndarray:
    """One draw of the noised state z_0 + sigma(t) * eps."""
    if not (0.0 <= t <= schedule.horizon):
        raise BadTimeError(f"t={t} outside [0, {schedule.horizon}]")
    z0 = np.asarray(z0, dtype=np.float64)
    return z0 + schedule.sigma(t) * rng.standard_normal(z0.shape)


def latent_posterior(z: np.ndarray, sigma: float, latents: LatentSet) -> np.ndarray:
    """Softmax weights over latents at noise level sigma, batched over rows.

    Computed through log-sum-exp so weights stay normalized down to very
    small sigma, where the raw exponentials underflow.
    """
    if sigma <= 0.0:
        raise ZeroSigmaError(f"sigma must be positive, got {sigma}")
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    diff = latents.points[None, :, :] - z[:, None, :]
    logits = -np.sum(diff * diff, axis=-1) / (2.0 * sigma * sigma)
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=1, keepdims=True)


def optimal_score(
    z: np.ndarray,
    t: float,
    latents: LatentSet,
    schedule: SigmaSchedule,
) -> np.ndarray:
    """Closed-form optimal denoising score at (z, t); batched over leading rows."""
    sigma = schedule.sigma(t)
    if sigma <= 0.0:
        raise ZeroSigmaError(f"sigma(t)={sigma} at t={t}; the score needs sigma > 0")
    single = np.asarray(z).ndim == 1
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    weights = latent_posterior(z, sigma, latents)
    diff = latents.points[None, :, :] - z[:, None, :]
    score = np.sum(weights[:, :, None] * diff, axis=1) / (sigma * sigma)
    return score[0] if single else score


def backward_sample(
    latents: LatentSet,
    schedule: SigmaSchedule,
    steps: int,
    rng: np.random.Generator,
    return_trajectory: bool = False,
):
    """Sample one latent-space point by reversing the diffusion.

    Starts from z_T ~ N(0, sigma(T)^2 I), Euler-iterates down to t = T/steps,
    then applies the terminal limit: hard assignment to the nearest latent.
    Returns the final point, or (point, trajectory) with the trajectory
    holding the state at every grid time from T down to 0.
    """
    dim = latents.dim
    draws = rng.standard_normal((steps + 1, dim))
    state = schedule.sigma(schedule.horizon) * draws[0]
    trajectory = [state.copy()] if return_trajectory else None

    times = np.linspace(0.0, schedule.horizon, steps + 1)
    for k in range(steps, 1, -1):
        t_hi = float(times[k])
        t_lo = float(times[k - 1])
        s_hi = schedule.sigma(t_hi)
        s_lo = schedule.sigma(t_lo)
        score = optimal_score(state, t_hi, latents, schedule)
        diffusion = np.sqrt(2.0 * s_hi * (s_hi - s_lo) * (t_hi - t_lo))
        state = state + 2.0 * s_hi * (s_hi - s_lo) * score + diffusion * draws[steps - k + 1]
        if trajectory is not None:
            trajectory.append(state.copy())

    idx, _ = latents.nearest(state)
    final = latents.points[int(idx[0])].copy()
    if trajectory is not None:
        trajectory.append(final.copy())
        return final, np.asarray(trajectory)
    return final


@dataclass(frozen=True)
class ReplicationResult:
    """Batched backward-SDE outcome against the training latents."""

    final_points: np.ndarray
    pre_assignment_points: np.ndarray
    assigned_indices: np.ndarray
    pre_assignment_distances: np.ndarray
    latent_diameter: float
    tolerance: float

    @property
    def replication_fraction(self) -> float:
        """Fraction of trajectories already within tolerance before assignment."""
        scale = self.latent_diameter if self.latent_diameter > 0 else 1.0
        return float(np.mean(self.pre_assignment_distances <= self.tolerance * scale))

    @property
    def mean_final_nn_distance(self) -> float:
        return float(np.mean(self.pre_assignment_distances))

    def to_dict(self) -> dict:
        return {
            "replication_fraction": self.replication_fraction,
            "mean_final_nn_distance": self.mean_final_nn_distance,
            "latent_diameter": self.latent_diameter,
            "tolerance": self.tolerance,
        }


def run_replication(
    latents: LatentSet,
    schedule: SigmaSchedule,
    config: SdeConfig,
    tolerance: float = 1e-2,
) -> ReplicationResult:
    """Run many backward trajectories and measure how they land on latents.

    Each trajectory consumes its own RNG stream spawned from the seed, so a
    trajectory's outcome is identical whether it is run here or alone through
    ``backward_sample``. All trajectories advance in lockstep for speed.
    """
    dim = latents.dim
    n = config.trajectories
    streams = np.random.SeedSequence(config.seed).spawn(n)
    draws = np.stack(
        [np.random.default_rng(s).standard_normal((config.steps + 1, dim)) for s in streams],
        axis=1,
    )  # (steps + 1, n, dim)

    state = schedule.sigma(schedule.horizon) * draws[0]
    times = np.linspace(0.0, schedule.horizon, config.steps + 1)
    for k in range(config.steps, 1, -1):
        t_hi = float(times[k])
        t_lo = float(times[k - 1])
        s_hi = schedule.sigma(t_hi)
        s_lo = schedule.sigma(t_lo)
        score = optimal_score(state, t_hi, latents, schedule)
        diffusion = np.sqrt(2.0 * s_hi * (s_hi - s_lo) * (t_hi - t_lo))
        state = state + 2.0 * s_hi * (s_hi - s_lo) * score + diffusion * draws[config.steps - k + 1]

    idx, dist = latents.nearest(state)
    return ReplicationResult(
        final_points=latents.points[idx].copy(),
        pre_assignment_points=state,
        assigned_indices=idx,
        pre_assignment_distances=dist,
        latent_diameter=latents.diameter(),
        tolerance=tolerance,
    )


def dsm_loss(
    latents: LatentSet,
    score_fn: Callable[[np.ndarray, float], np.ndarray],
    schedule: SigmaSchedule,
    samples: int,
    rng: np.random.Generator,
    t_bounds: tuple[float, float] | None = None,
) -> float:
    """Monte-Carlo denoising score-matching objective for a given score.

    Draws (point, t, eps), noises the point, and averages the squared error
    of the score against the conditional target -eps / sigma(t). Times are
    uniform on ``t_bounds`` (default [0.1 T, T] to keep target variance sane).
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    lo, hi = t_bounds if t_bounds is not None else (0.1 * schedule.horizon, schedule.horizon)
    if not (0.0 < lo <= hi <= schedule.horizon):
        raise BadTimeError(f"t_bounds {lo, hi} must satisfy 0 < lo <= hi <= horizon")
    total = 0.0
    for _ in range(samples):
        z0 = latents.points[int(rng.integers(latents.count))]
        t = float(rng.uniform(lo, hi))
        sigma = schedule.sigma(t)
        eps = rng.standard_normal(latents.dim)
        z_t = z0 + sigma * eps
        residual = np.asarray(score_fn(z_t, t)) - (-eps / sigma)
        total += float(np.sum(residual * residual))
    return total / samples
