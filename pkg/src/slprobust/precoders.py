"""The three power-minimizing precoder designs and their analytic oracles.

Every design minimizes ||u||^2 over the stacked real transmit vector
subject to per-user region constraints built from that slot's symbols:

  * nonrobust   - region constraints on the estimated channels as-is;
                  with true channels supplied instead this is the
                  perfect-knowledge design.
  * worstcase   - each row hardened against every error matrix with
                  real-lift Frobenius norm <= delta, via the closed-form
                  infimum of the error term (-delta ||u|| per unit row).
  * stochastic  - each row hardened so the region holds with probability
                  >= 1 - epsilon under Gaussian errors, via whitening by
                  (A A^T)^(-1/2), a product-of-error-functions bound, and
                  the margin factor rho(epsilon).

The module also carries the scalar error function and its inverse (the
margin factor feeds constraint coefficients, so the inverse is computed to
full double precision), and Monte-Carlo/closed-form oracles used by the
validation suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import UncertaintyModel, unstack_complex
from .dpcir import CirDescriptor, Psi, inv_sqrt_gram, SingularGramError
from .socp import SocpProblem, SocpRow

erf = math.erf

# Central and tail rational approximations of the inverse normal CDF
# (Acklam), used only to seed Newton iterations on erf.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def _inv_norm_cdf(p: float) -> float:
    if p <= 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
               ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p >= 1.0 - 0.02425:
        return -_inv_norm_cdf(1.0 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
           (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def erf_inv(y: float) -> float:
    """Inverse error function: rational initial guess + Newton on erf.

    Newton with the exact derivative 2/sqrt(pi) * exp(-x^2) converges to
    full double precision in a couple of steps from the seed.
    """
    if not -1.0 < y < 1.0:
        if y == 0.0:
            return 0.0
        raise ValueError(f"erf_inv argument must lie in (-1, 1), got {y}")
    if y == 0.0:
        return 0.0
    x = _inv_norm_cdf(0.5 * (y + 1.0)) / math.sqrt(2.0)
    two_over_sqrt_pi = 2.0 / math.sqrt(math.pi)
    for _ in range(4):
        err = math.erf(x) - y
        if err == 0.0:
            break
        x -= err / (two_over_sqrt_pi * math.exp(-x * x))
    return x


def rho(epsilon: float) -> float:
    """Margin factor erf_inv(1 - 2 sqrt(1 - epsilon)); negative iff eps < 3/4."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"violation probability must lie in (0, 1), got {epsilon}")
    return erf_inv(1.0 - 2.0 * math.sqrt(1.0 - epsilon))


@dataclass(frozen=True)
class ScenarioInputs:
    """Everything one slot's precoder needs: channels, regions, thresholds."""

    estimates: np.ndarray        # (K, 2, 2N) real lifts of the channel estimates
    descriptors: list            # K CirDescriptor for the slot's symbols
    psis: list                   # K Psi
    model: UncertaintyModel
    epsilon: float = 0.01

    def __post_init__(self):
        K = self.estimates.shape[0]
        if len(self.descriptors) != K or len(self.psis) != K:
            raise ValueError("need one descriptor and one threshold per user")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"violation probability must lie in (0, 1), got {self.epsilon}")


def _dim(s: ScenarioInputs) -> int:
    return s.estimates.shape[2]


def build_nonrobust(s: ScenarioInputs) -> SocpProblem:
    """Region constraints on the estimates as given (alpha = 0 rows)."""
    rows = []
    for k, (d, p) in enumerate(zip(s.descriptors, s.psis)):
        GH = d.A @ s.estimates[k]
        for r in range(2):
            rows.append(SocpRow(0.0, GH[r], float(p.value[r])))
    return SocpProblem(dim=_dim(s), rows=rows)


def build_worstcase(s: ScenarioInputs) -> SocpProblem:
    """Rows hardened against every norm-bounded error: alpha = delta*||a_r||."""
    if s.model.kind != "spherical":
        raise ValueError("worst-case design needs a spherical uncertainty model")
    delta = s.model.delta
    rows = []
    for k, (d, p) in enumerate(zip(s.descriptors, s.psis)):
        GH = d.A @ s.estimates[k]
        for r in range(2):
            rows.append(SocpRow(delta * float(np.linalg.norm(d.A[r])), GH[r], float(p.value[r])))
    return SocpProblem(dim=_dim(s), rows=rows)


def build_stochastic(s: ScenarioInputs) -> SocpProblem:
    """Whitened rows with probability margin sqrt(2)*|rho(eps)|*xi per row.

    Rejects epsilon > 3/4: the margin factor would turn positive and the
    constraint would bound a maximum below a positive multiple of ||u||,
    which is not a convex cone constraint. For BPSK the two region rows
    coincide and the gram matrix is singular; the design then collapses to
    a single row with the one-dimensional margin erf_inv(2*eps - 1), which
    is convex only for eps <= 1/2.
    """
    if s.model.kind != "stochastic":
        raise ValueError("stochastic design needs a stochastic uncertainty model")
    xi = s.model.xi
    rows = []
    for k, (d, p) in enumerate(zip(s.descriptors, s.psis)):
        try:
            W = inv_sqrt_gram(d)
        except SingularGramError:
            if s.epsilon > 0.5:
                raise ValueError(
                    "single-row (BPSK) stochastic design needs epsilon <= 1/2")
            r1 = erf_inv(2.0 * s.epsilon - 1.0)
            norm_a = float(np.linalg.norm(d.A[0]))
            rows.append(SocpRow(math.sqrt(2.0) * abs(r1) * xi * norm_a,
                                d.A[0] @ s.estimates[k], float(p.value[0])))
            continue
        if s.epsilon > 0.75:
            raise ValueError(
                "stochastic design needs epsilon <= 3/4 to stay a cone constraint")
        alpha = math.sqrt(2.0) * abs(rho(s.epsilon)) * xi
        GH = W @ (d.A @ s.estimates[k])
        wpsi = W @ p.value
        for r in range(2):
            rows.append(SocpRow(alpha, GH[r], float(wpsi[r])))
    return SocpProblem(dim=_dim(s), rows=rows)


# -- worst-case infimum oracles ------------------------------------------


def wc_infimum_unstructured(a: np.ndarray, u: np.ndarray, delta: float) -> float:
    """inf of a^T D u over all real 2 x 2N matrices with ||D||_F <= delta.

    Closed form -delta*||u||*||a||, attained by the rank-one minimizer
    returned by wc_minimizer_unstructured.
    """
    if delta < 0:
        raise ValueError("radius must be nonnegative")
    return -delta * float(np.linalg.norm(u)) * float(np.linalg.norm(a))


def wc_minimizer_unstructured(a: np.ndarray, u: np.ndarray, delta: float) -> np.ndarray:
    """The matrix achieving wc_infimum_unstructured: -delta * a u^T / ||a u^T||."""
    outer = np.outer(np.asarray(a, float), np.asarray(u, float))
    nrm = np.linalg.norm(outer)
    if nrm == 0.0:
        return np.zeros_like(outer)
    return -delta * outer / nrm


def wc_infimum_structured(a: np.ndarray, u: np.ndarray, delta: float) -> float:
    """inf of a^T T(e) u over complex errors e with ||T(e)||_F <= delta.

    Real-lift errors reach only -delta/sqrt(2)*||u||*||a||: T(e)u equals
    [Re(e uc); Im(e uc)] whose magnitude is at most ||e||*||uc|| =
    (delta/sqrt(2))*||u||. The unstructured bound is therefore conservative
    by exactly sqrt(2).
    """
    if delta < 0:
        raise ValueError("radius must be nonnegative")
    return -(delta / math.sqrt(2.0)) * float(np.linalg.norm(u)) * float(np.linalg.norm(a))


def wc_minimizer_structured(a: np.ndarray, u: np.ndarray, delta: float) -> np.ndarray:
    """Complex error row achieving wc_infimum_structured (length N)."""
    a = np.asarray(a, float)
    uc = unstack_complex(np.asarray(u, float))
    nu = np.linalg.norm(uc)
    na = np.linalg.norm(a)
    n = uc.size
    if nu == 0.0 or na == 0.0 or delta == 0.0:
        return np.zeros(n, dtype=complex)
    w = -(delta / math.sqrt(2.0)) * nu * (a[0] + 1j * a[1]) / na
    return w * uc.conj() / (nu * nu)


def project_structured(delta_mat: np.ndarray) -> np.ndarray:
    """Nearest real-lift matrix to an arbitrary 2 x 2N matrix, as a complex row."""
    m = np.asarray(delta_mat, float)
    n = m.shape[1] // 2
    re = 0.5 * (m[0, :n] + m[1, n:])
    im = 0.5 * (m[1, :n] - m[0, n:])
    return re + 1j * im


# -- stochastic-design oracles ---------------------------------------------


def upsilon_covariance(d: CirDescriptor, u: np.ndarray, xi: float) -> np.ndarray:
    """Covariance of the region-row error term A T(e) u: xi^2 ||u||^2 A A^T."""
    if xi < 0:
        raise ValueError("error std must be nonnegative")
    u = np.asarray(u, float)
    return xi * xi * float(u @ u) * (d.A @ d.A.T)


def ci_violation_mc(d: CirDescriptor, p: Psi, H_hat: np.ndarray, u: np.ndarray,
                    model: UncertaintyModel, samples: int, rng, tol: float = 0.0) -> float:
    """Monte-Carlo estimate of the probability the region constraint fails.

    Draws errors from the model's law and counts draws where any component
    of A (H_hat + T(e)) u falls below its threshold (minus tol).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    u = np.asarray(u, float)
    nominal = d.A @ (H_hat @ u)
    if model.kind == "none":
        return 0.0 if bool((nominal >= p.value - tol).all()) else 1.0
    uc = unstack_complex(u)
    n = uc.size
    bad = 0
    chunk = 200_000
    left = samples
    while left > 0:
        c = min(chunk, left)
        if model.kind == "stochastic":
            e = model.xi * (rng.standard_normal((c, n)) + 1j * rng.standard_normal((c, n)))
        else:
            g = rng.standard_normal((c, 2 * n))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            radii = (model.delta / math.sqrt(2.0)) * rng.uniform(size=c) ** (1.0 / (2 * n))
            v = radii[:, None] * g
            e = v[:, :n] + 1j * v[:, n:]
        w = e @ uc
        ups = np.stack([w.real, w.imag], axis=1) @ d.A.T
        ok = (nominal[None, :] + ups >= p.value[None, :] - tol).all(axis=1)
        bad += int((~ok).sum())
        left -= c
    return bad / samples


def chance_product_bound(wbar: np.ndarray, u: np.ndarray, xi: float):
    """Satisfaction probability under the whitened-independence model.

    Returns (product, lower_bound): the product of per-row probabilities
    prod_r (1/2 - 1/2 erf(wbar_r / (sqrt(2) xi ||u||))) and its bound using
    max(wbar) in both factors. The bound never exceeds the product.
    """
    if xi <= 0:
        raise ValueError("error std must be positive")
    u = np.asarray(u, float)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise ValueError("transmit vector must be nonzero")
    wbar = np.asarray(wbar, float)
    scaled = wbar / (math.sqrt(2.0) * xi * nu)
    product = float(np.prod([0.5 - 0.5 * math.erf(x) for x in scaled]))
    worst = float(scaled.max())
    bound = (0.5 - 0.5 * math.erf(worst)) ** 2
    return product, bound
