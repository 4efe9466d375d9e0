"""Distance-preserving constructive-interference regions for PSK symbols.

A symbol's region is its decision sector translated away from the origin so
that scaled inter-symbol distances are never reduced: in hyperplane form
A x >= sigma*sqrt(gamma)*(b + c), where the rows of A are the unit inward
normals of the two sector boundary rays, b = A s puts the constellation
point itself on both hyperplanes, and the extra distance offsets c are zero
for PSK sectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation


class SingularGramError(ValueError):
    """A A^T is singular: both normals coincide (happens only for BPSK)."""


@dataclass(frozen=True)
class CirDescriptor:
    A: np.ndarray  # (2, 2), rows are unit-norm inward normals
    b: np.ndarray  # (2,) hyperplane offsets, A @ s
    c: np.ndarray  # (2,) nonnegative distance offsets (zero for PSK)
    symbol: int


@dataclass(frozen=True)
class Psi:
    """Scaled region threshold sigma*sqrt(gamma)*(b + c)."""

    value: np.ndarray  # (2,)
    sigma: float
    gamma: float


def dpcir_for(c: Constellation, symbol: int) -> CirDescriptor:
    """Hyperplane data of one symbol's region.

    With theta = 2*pi*symbol/M, row 1 is the inward normal of the boundary
    ray at theta + pi/M and row 2 of the ray at theta - pi/M; each normal is
    orthogonal to its ray and has positive inner product with the symbol.
    For BPSK the two rays coincide and so do the rows.
    """
    M = c.order
    if not 0 <= symbol < M:
        raise ValueError(f"symbol index {symbol} out of range for order {M}")
    theta = 2.0 * np.pi * symbol / M
    half = np.pi / M
    a1 = np.array([np.cos(theta + half - np.pi / 2), np.sin(theta + half - np.pi / 2)])
    a2 = np.array([np.cos(theta - half + np.pi / 2), np.sin(theta - half + np.pi / 2)])
    A = np.vstack((a1, a2))
    s = np.array([np.cos(theta), np.sin(theta)])
    return CirDescriptor(A=A, b=A @ s, c=np.zeros(2), symbol=symbol)


def psi(d: CirDescriptor, sigma: float, gamma: float) -> Psi:
    """Region threshold sigma*sqrt(gamma)*(b + c) for one user/symbol."""
    if sigma <= 0:
        raise ValueError(f"noise std must be positive, got {sigma}")
    if gamma < 0:
        raise ValueError(f"SINR threshold must be nonnegative, got {gamma}")
    return Psi(value=sigma * np.sqrt(gamma) * (d.b + d.c), sigma=float(sigma), gamma=float(gamma))


def inv_sqrt_gram(d: CirDescriptor) -> np.ndarray:
    """(A A^T)^(-1/2), the symmetric positive-definite X with X (A A^T) X = I.

    Uses the closed 2x2 form: with G = A A^T, s = sqrt(det G) and
    t = sqrt(trace G + 2 s), the principal square root is (G + s I)/t.
    """
    G = d.A @ d.A.T
    det = np.linalg.det(G)
    if det < 1e-12:
        raise SingularGramError(
            "A A^T is singular (duplicate rows); use the single-row reduction for BPSK"
        )
    s = np.sqrt(det)
    t = np.sqrt(np.trace(G) + 2.0 * s)
    sqrt_g = (G + s * np.eye(2)) / t
    return np.linalg.inv(sqrt_g)
