"""Channel generation, the complex-to-real lift, and CSI-error sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UncertaintyModel:
    """How channel-estimate errors are bounded or distributed.

    kind "spherical": the real lift of the error is Frobenius-bounded by
    delta. kind "stochastic": each real error component is N(0, xi^2),
    i.e. complex entries are CN(0, 2 xi^2).
    """

    kind: str  # "none" | "spherical" | "stochastic"
    delta: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "spherical", "stochastic"):
            raise ValueError(f"unknown uncertainty kind {self.kind!r}")
        if self.delta < 0 or self.xi < 0:
            raise ValueError("uncertainty parameters must be nonnegative")

    @classmethod
    def none(cls) -> "UncertaintyModel":
        return cls("none")

    @classmethod
    def spherical(cls, delta: float) -> "UncertaintyModel":
        return cls("spherical", delta=float(delta))

    @classmethod
    def stochastic(cls, xi: float) -> "UncertaintyModel":
        return cls("stochastic", xi=float(xi))


def t_expand(x) -> np.ndarray:
    """Real lift of a complex vector: [[Re x, -Im x], [Im x, Re x]] (2 x 2N).

    Multiplying the lift by a stacked real vector [Re u; Im u] gives
    [Re(x u); Im(x u)], and ||t_expand(x)||_F = sqrt(2) ||x||_2.
    """
    x = np.asarray(x, dtype=complex).ravel()
    return np.block([[x.real[None, :], -x.imag[None, :]],
                     [x.imag[None, :], x.real[None, :]]])


def stack_real(u: np.ndarray) -> np.ndarray:
    """Complex N-vector -> stacked real 2N-vector [Re u; Im u]."""
    u = np.asarray(u, dtype=complex).ravel()
    return np.concatenate([u.real, u.imag])


def unstack_complex(v: np.ndarray) -> np.ndarray:
    """Stacked real 2N-vector -> complex N-vector."""
    v = np.asarray(v, dtype=float).ravel()
    n = v.size // 2
    return v[:n] + 1j * v[n:]


def sample_rayleigh(n_tx: int, n_users: int, rng) -> np.ndarray:
    """(K, N) i.i.d. CN(0, 1) channel coefficients."""
    return (rng.standard_normal((n_users, n_tx))
            + 1j * rng.standard_normal((n_users, n_tx))) / np.sqrt(2.0)


def sample_error_spherical(n_tx: int, delta: float, rng, size: int | None = None) -> np.ndarray:
    """Uniform draw from the complex ball of radius delta/sqrt(2).

    The radius is chosen so the real lift satisfies ||T(err)||_F <= delta
    tightly. Sampling: isotropic direction in R^(2N) scaled by
    R * U^(1/(2N)). With size given, returns (size, N) independent draws.
    """
    if delta < 0:
        raise ValueError("radius must be nonnegative")
    count = 1 if size is None else size
    g = rng.standard_normal((count, 2 * n_tx))
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    norm[norm == 0.0] = 1.0
    radius = (delta / np.sqrt(2.0)) * rng.uniform(size=count) ** (1.0 / (2 * n_tx))
    v = (radius[:, None] / norm) * g
    out = v[:, :n_tx] + 1j * v[:, n_tx:]
    return out[0] if size is None else out


def sample_error_gaussian(n_tx: int, xi: float, rng, size: int | None = None) -> np.ndarray:
    """CN(0, 2 xi^2) error entries: real and imaginary parts are N(0, xi^2)."""
    if xi < 0:
        raise ValueError("error std must be nonnegative")
    shape = n_tx if size is None else (size, n_tx)
    return xi * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ChannelRealization:
    """True/estimated channels per user with their real lifts.

    true = estimates + errors holds exactly, entrywise, in both domains.
    """

    true: np.ndarray            # (K, N) complex
    estimates: np.ndarray       # (K, N) complex
    errors: np.ndarray          # (K, N) complex
    true_lifts: np.ndarray      # (K, 2, 2N)
    estimate_lifts: np.ndarray  # (K, 2, 2N)
    error_lifts: np.ndarray     # (K, 2, 2N)


def realize(n_tx: int, n_users: int, model: UncertaintyModel, rng) -> ChannelRealization:
    """Draw true channels CN(0, I) and per-user errors, estimate = true - error.

    Sampling the true channel first keeps its CN(0, I) law exact regardless of
    the error model.
    """
    h = sample_rayleigh(n_tx, n_users, rng)
    if model.kind == "none":
        err = np.zeros_like(h)
    elif model.kind == "spherical":
        err = np.stack([sample_error_spherical(n_tx, model.delta, rng) for _ in range(n_users)])
    else:
        err = np.stack([sample_error_gaussian(n_tx, model.xi, rng) for _ in range(n_users)])
    est = h - err
    return ChannelRealization(
        true=h,
        estimates=est,
        errors=err,
        true_lifts=np.stack([t_expand(h[k]) for k in range(n_users)]),
        estimate_lifts=np.stack([t_expand(est[k]) for k in range(n_users)]),
        error_lifts=np.stack([t_expand(err[k]) for k in range(n_users)]),
    )
