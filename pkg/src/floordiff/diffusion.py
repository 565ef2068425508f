"""Diffusion mathematics: noise schedules, forward/reverse steps, x0
estimation, incremental-design alignment targets, and the training loss.

Model-free: the predicted noise is always an argument, so every function
here works on plain numpy arrays and on torch tensors alike (schedule
coefficients are Python floats and broadcasting does the rest).

Conventions: steps run t = 1..T with alpha_bar[0] = 1 so t = 0 means "no
noise"; the reverse-step noise scale is sigma_t = sqrt(beta_t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyElementMap, InvalidScheduleParams, ShapeMismatch

SCHEDULE_KINDS = ("linear", "cosine")


@dataclass(frozen=True)
class NoiseSchedule:
    kind: str
    timesteps: int
    beta_start: float
    beta_end: float
    beta: np.ndarray       # (T+1,), beta[0] unused
    alpha: np.ndarray      # (T+1,), alpha[0] = 1
    alpha_bar: np.ndarray  # (T+1,), alpha_bar[0] = 1, strictly decreasing
    sigma: np.ndarray      # (T+1,), sigma[0] unused

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "timesteps": self.timesteps,
            "beta_start": self.beta_start,
            "beta_end": self.beta_end,
        }

    @staticmethod
    def from_dict(d: dict) -> "NoiseSchedule":
        return build_schedule(d["kind"], d["timesteps"], d["beta_start"], d["beta_end"])


def build_schedule(
    kind: str = "linear",
    timesteps: int = 1000,
    beta_start: float = 1e-4,
    beta_end: float = 0.02,
) -> NoiseSchedule:
    if kind not in SCHEDULE_KINDS:
        raise InvalidScheduleParams(f"unknown schedule kind {kind!r}")
    if timesteps < 1:
        raise InvalidScheduleParams(f"timesteps {timesteps} must be >= 1")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise InvalidScheduleParams(
            f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
        )
    T = int(timesteps)
    if kind == "linear":
        if T == 1:
            betas = np.array([beta_start])
        else:
            betas = np.linspace(beta_start, beta_end, T)
    else:
        # squared-cosine cumulative preservation, rescaled to steps
        s = 0.008
        steps = np.arange(T + 1, dtype=np.float64) / T
        f = np.cos((steps + s) / (1.0 + s) * np.pi / 2.0) ** 2
        ab = f / f[0]
        betas = np.clip(1.0 - ab[1:] / ab[:-1], 1e-8, 0.999)
    beta = np.concatenate([[np.nan], betas])
    alpha = np.concatenate([[1.0], 1.0 - betas])
    alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
    sigma = np.concatenate([[np.nan], np.sqrt(betas)])
    return NoiseSchedule(kind, T, float(beta_start), float(beta_end), beta, alpha, alpha_bar, sigma)


def _check_t(t, schedule: NoiseSchedule, minimum: int) -> None:
    t_arr = np.asarray(t)
    if (t_arr < minimum).any() or (t_arr > schedule.timesteps).any():
        raise ValueError(f"t={t} outside [{minimum}, {schedule.timesteps}]")


def _gather(values: np.ndarray, t, x):
    """Schedule coefficient(s) for t, shaped to broadcast against x."""
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(values[int(t)])
    coeff = values[np.asarray(t)]
    # batched t: x is (B, ...) so append singleton dims
    shape = (len(coeff),) + (1,) * (x.ndim - 1)
    coeff = coeff.reshape(shape)
    if isinstance(x, np.ndarray):
        return coeff
    import torch

    return torch.as_tensor(coeff, dtype=x.dtype, device=x.device)


def _check_shapes(a, b, what: str) -> None:
    if tuple(a.shape) != tuple(b.shape):
        raise ShapeMismatch(f"{what}: {tuple(a.shape)} vs {tuple(b.shape)}")


def forward_noise(x0, t, eps, schedule: NoiseSchedule):
    """x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps."""
    _check_shapes(x0, eps, "forward_noise x0 vs eps")
    _check_t(t, schedule, minimum=0)
    ab = _gather(schedule.alpha_bar, t, x0)
    return (ab ** 0.5) * x0 + ((1.0 - ab) ** 0.5) * eps


def estimate_x0(x_t, eps_hat, t, schedule: NoiseSchedule):
    """Invert the forward map with predicted noise:
    x0 ~= (x_t - sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_bar_t)."""
    _check_shapes(x_t, eps_hat, "estimate_x0 x_t vs eps_hat")
    _check_t(t, schedule, minimum=1)
    ab = _gather(schedule.alpha_bar, t, x_t)
    return (x_t - ((1.0 - ab) ** 0.5) * eps_hat) / (ab ** 0.5)


def reverse_step(x_t, eps_hat, t, z, schedule: NoiseSchedule):
    """One denoising step; z must be zero (or None) at t = 1."""
    _check_shapes(x_t, eps_hat, "reverse_step x_t vs eps_hat")
    _check_t(t, schedule, minimum=1)
    a = _gather(schedule.alpha, t, x_t)
    ab = _gather(schedule.alpha_bar, t, x_t)
    mean = (x_t - ((1.0 - a) / (1.0 - ab) ** 0.5) * eps_hat) / (a ** 0.5)
    if z is None:
        return mean
    _check_shapes(x_t, z, "reverse_step x_t vs z")
    sig = _gather(schedule.sigma, t, x_t)
    return mean + sig * z


# ---------------------------------------------------------------------------
# incremental-design alignment targets


@dataclass(frozen=True)
class ElementGroup:
    """Entries forming one design element.  shared_draw ties all entries of
    the group to a single noise draw (symmetric adjacency tuples)."""

    entries: tuple[tuple[int, int], ...]
    shared_draw: bool = False


def element_groups(stage_kind: str, room_count: int, width: int | None = None) -> list[ElementGroup]:
    """One group per design element, covering all non-padding entries.

    nodes / boxes: one group per room row; adjacency: one group per
    unordered room pair, covering both symmetric entries.
    """
    if stage_kind in ("nodes", "boxes"):
        if width is None:
            width = 5 if stage_kind == "nodes" else 4
        groups = [
            ElementGroup(tuple((r, c) for c in range(width)))
            for r in range(room_count)
        ]
    elif stage_kind == "adjacency":
        groups = [
            ElementGroup(((i, j), (j, i)), shared_draw=True)
            for i in range(room_count)
            for j in range(i + 1, room_count)
        ]
    else:
        raise ValueError(f"unknown stage kind {stage_kind!r}")
    if not groups:
        raise EmptyElementMap(f"stage {stage_kind!r} with {room_count} rooms has no elements")
    return groups


def confirmed_count(n: int, t: int, timesteps: int) -> int:
    """min(floor(n (1 - t/T) + 1), n) in exact integer arithmetic."""
    if n < 1:
        raise EmptyElementMap("no elements")
    if not (0 <= t <= timesteps):
        raise ValueError(f"t={t} outside [0, {timesteps}]")
    return min(n * (timesteps - t) // timesteps + 1, n)


@dataclass(frozen=True)
class AlignmentTarget:
    x_inter: np.ndarray
    n: int
    n_confirmed: int
    n_unconfirmed: int
    k: float
    unconfirmed_indices: tuple[int, ...]


def build_alignment_target(
    x0: np.ndarray,
    t: int,
    timesteps: int,
    groups: list[ElementGroup],
    rng: np.random.Generator,
) -> AlignmentTarget:
    """Blend the unconfirmed design elements of x0 with fresh noise.

    Confirmed elements and padding entries stay bit-identical to x0; each
    unconfirmed group blends x0 * k + noise * (1 - k) with
    k = (1 + n_confirmed / n) / 2.
    """
    if not groups:
        raise EmptyElementMap("empty element map")
    n = len(groups)
    n_c = confirmed_count(n, t, timesteps)
    n_unc = n - n_c
    k = (1.0 + n_c / n) / 2.0
    x_inter = np.array(x0, dtype=np.float64, copy=True)
    if n_unc > 0:
        chosen = rng.choice(n, size=n_unc, replace=False)
        chosen = tuple(sorted(int(i) for i in chosen))
        for gi in chosen:
            group = groups[gi]
            if group.shared_draw:
                draw = float(rng.standard_normal())
                for r, c in group.entries:
                    x_inter[r, c] = x0[r, c] * k + draw * (1.0 - k)
            else:
                for r, c in group.entries:
                    draw = float(rng.standard_normal())
                    x_inter[r, c] = x0[r, c] * k + draw * (1.0 - k)
    else:
        chosen = ()
    return AlignmentTarget(x_inter, n, n_c, n_unc, k, chosen)


def total_loss(eps_hat, eps, x_tilde, x_inter, weight: float):
    """Entry-mean epsilon MSE plus weighted entry-mean alignment MSE."""
    _check_shapes(eps_hat, eps, "total_loss eps_hat vs eps")
    _check_shapes(x_tilde, x_inter, "total_loss x_tilde vs x_inter")
    if weight < 0.0:
        raise ValueError(f"loss weight {weight} must be >= 0")
    eps_term = ((eps_hat - eps) ** 2).mean()
    align_term = ((x_tilde - x_inter) ** 2).mean()
    return eps_term + weight * align_term
