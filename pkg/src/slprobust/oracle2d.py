"""Independent 2-D reference for the conic solver: dense angular grid + refinement.

Along a fixed ray u = r*d(theta), r >= 0, every row alpha*||u|| <= g^T u - h
becomes linear in r, so the feasible set of radii is a closed interval with
an exact endpoint formula. The minimum-norm point therefore sits at the
smallest feasible radius of some ray, and scanning a dense angle grid with
local refinement recovers the optimum to far better than the comparison
tolerance. No code is shared with the barrier solver.

Only two-dimensional problems are supported; that is all the oracle ever
needs, and it keeps the scan affordable.
"""

from __future__ import annotations

import numpy as np

from .socp import SocpProblem, SocpRow


def _min_radius(alphas, G, h, thetas):
    """Smallest feasible radius per angle (inf where the ray is infeasible)."""
    d = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)   # (T, 2)
    c = d @ G.T - alphas[None, :]                            # (T, m)
    lo = np.zeros(len(thetas))
    hi = np.full(len(thetas), np.inf)
    feas = np.ones(len(thetas), dtype=bool)
    for i in range(len(h)):
        ci = c[:, i]
        pos = ci > 0
        neg = ci < 0
        zer = ~pos & ~neg
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = h[i] / ci
        lo = np.where(pos, np.maximum(lo, np.maximum(bound, 0.0)), lo)
        hi = np.where(neg, np.minimum(hi, bound), hi)
        feas &= ~(neg & (bound < 0))
        feas &= ~(zer & (h[i] > 0))
    feas &= lo <= hi
    return np.where(feas, lo, np.inf)


def grid_oracle(problem: SocpProblem, feasible_norm: float | None = None,
                pts: int = 20001):
    """Optimal objective value, or None when every sampled ray is infeasible.

    feasible_norm is accepted for interface compatibility and ignored; the
    polar reduction needs no search box.
    """
    if problem.dim != 2:
        raise ValueError("oracle only handles 2-dimensional problems")
    alphas, G, h = problem.stacked()
    if (h <= 0).all():
        return 0.0
    thetas = np.linspace(0.0, 2.0 * np.pi, pts, endpoint=False)
    r = _min_radius(alphas, G, h, thetas)
    if not np.isfinite(r).any():
        return None
    k = int(np.argmin(r))
    width = 2.0 * (thetas[1] - thetas[0])
    center = thetas[k]
    best = r[k]
    for _ in range(4):
        local = np.linspace(center - width, center + width, 2001)
        rl = _min_radius(alphas, G, h, local)
        j = int(np.argmin(rl))
        if rl[j] < best:
            best = rl[j]
            center = local[j]
        width *= 2.0 / 2000
    return float(best * best)


def random_problem(rng, max_rows: int = 4):
    """Random feasible-by-construction 2-D problem and its witness point."""
    m = int(rng.integers(1, max_rows + 1))
    u_feas = rng.standard_normal(2) * rng.uniform(0.5, 3.0)
    rows = []
    for _ in range(m):
        alpha = float(rng.uniform(0.0, 0.8) * rng.integers(0, 2))
        g = rng.standard_normal(2) * rng.uniform(0.5, 2.0)
        margin = rng.uniform(0.05, 0.5)
        h = float(g @ u_feas - alpha * np.linalg.norm(u_feas) - margin)
        rows.append(SocpRow(alpha, g, h))
    return SocpProblem(dim=2, rows=rows), u_feas
