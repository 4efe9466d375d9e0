"""A small second-order-cone solver for programs of the form

    minimize   ||u||^2
    subject to alpha_i ||u|| <= g_i^T u - h_i,    i = 1..m,  alpha_i >= 0.

All three precoder designs reduce to this shape, so the solver handles
exactly this family instead of a generic conic interface. The norm is
lifted to an epigraph variable t >= ||u|| (one second-order cone), which
turns every row into a linear constraint in (u, t); "minimize t" is then
solved by a log-barrier interior-point method with Newton steps and
backtracking line search. When no strictly feasible start can be seeded
directly, a phase-I stage minimizes the worst row residual and either
produces one or certifies infeasibility.

The solver is batch-oriented: a batch of problems with identical shapes is
driven through the barrier path together with per-problem step sizes and
convergence masks, which is what makes the Monte-Carlo sweeps cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical-failure"

_STATUS_NAMES = (OPTIMAL, INFEASIBLE, NUMERICAL_FAILURE)


@dataclass(frozen=True)
class SocpRow:
    """One constraint alpha*||u|| <= g^T u - h."""

    alpha: float
    g: np.ndarray
    h: float


@dataclass
class SocpProblem:
    dim: int
    rows: list

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not self.rows:
            raise ValueError("need at least one constraint row")
        for r in self.rows:
            if r.alpha < 0:
                raise ValueError(f"row alpha must be nonnegative, got {r.alpha}")
            g = np.asarray(r.g, dtype=float)
            if g.shape != (self.dim,) or not np.all(np.isfinite(g)):
                raise ValueError("row g must be a finite vector of length dim")

    @classmethod
    def from_arrays(cls, alphas, G, h) -> "SocpProblem":
        G = np.asarray(G, dtype=float)
        return cls(
            dim=G.shape[1],
            rows=[SocpRow(float(a), np.asarray(g, dtype=float), float(hh))
                  for a, g, hh in zip(alphas, G, h)],
        )

    def stacked(self):
        """(alphas (m,), G (m, n), h (m,)) views of the rows."""
        alphas = np.array([r.alpha for r in self.rows], dtype=float)
        G = np.vstack([np.asarray(r.g, dtype=float) for r in self.rows])
        h = np.array([r.h for r in self.rows], dtype=float)
        return alphas, G, h


@dataclass
class SocpSolution:
    u: np.ndarray
    status: str
    objective: float
    iterations: int
    max_violation: float


def residuals(alphas, G, h, u) -> np.ndarray:
    """Row residuals alpha*||u|| - g^T u + h (feasible rows are <= 0)."""
    return alphas * np.linalg.norm(u) - G @ u + h


class BarrierSolver:
    """Reference log-barrier interior-point backend.

    Any replacement backend only needs solve_batch with the same signature;
    the test suite runs against the module-level solve()/solve_batch().
    """

    def __init__(self, mu: float = 20.0, max_newton: int = 50, max_stages: int = 64):
        self.mu = mu
        self.max_newton = max_newton
        self.max_stages = max_stages

    # -- shared Newton machinery ------------------------------------------

    @staticmethod
    def _barrier_value(tau, c_idx, M, hvec, z, n):
        """Barrier objective; +inf outside the open feasible region.

        The epigraph variable must stay on the t > 0 branch of
        t^2 > ||u||^2, otherwise "minimize t" escapes to -infinity.
        """
        s = np.einsum("bmp,bp->bm", M, z) - hvec
        u = z[:, :n]
        t = z[:, n]
        d = t * t - np.einsum("bi,bi->b", u, u)
        smin = s.min(axis=1)
        bad = ~(smin > 0.0) | ~(d > 0.0) | ~(t > 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (tau * z[:, c_idx]
                   - np.log(np.where(d > 0, d, 1.0))
                   - np.log(np.where(s > 0, s, 1.0)).sum(axis=1))
        return np.where(bad, np.inf, val)

    def _newton_path(self, tau0, c_idx, M, hvec, z, n, gap_tol_fn, early_stop=None):
        """Drive a batch along the central path; returns (z, iters, ok).

        gap_tol_fn(z) gives the per-problem absolute duality-gap target;
        early_stop(z), when given, terminates a problem as soon as its
        iterate satisfies the caller's goal (used by phase I).
        """
        B, m, p = M.shape
        nu = m + 2.0  # m log rows plus one second-order-cone barrier
        tau = np.asarray(tau0, dtype=float).copy()
        iters = np.zeros(B, dtype=int)
        ok = np.ones(B, dtype=bool)
        finished = np.zeros(B, dtype=bool)
        ident = np.eye(p)
        dg = np.arange(n)

        for _ in range(self.max_stages):
            if not ((~finished) & ok).any():
                break
            newton_done = finished | ~ok
            for _ in range(self.max_newton):
                run = ~newton_done
                if not run.any():
                    break
                s = np.einsum("bmp,bp->bm", M, z) - hvec
                u = z[:, :n]
                t = z[:, n]
                d = t * t - np.einsum("bi,bi->b", u, u)
                broken = run & (~(s.min(axis=1) > 0) | ~(d > 0) | ~(t > 0))
                if broken.any():
                    ok &= ~broken
                    newton_done |= broken
                    run = ~newton_done
                    if not run.any():
                        break
                inv_s = np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), 0.0)
                dsafe = np.where(d > 0, d, 1.0)
                grad = tau[:, None] * ident[c_idx][None, :] - np.einsum("bm,bmp->bp", inv_s, M)
                grad[:, :n] += 2.0 * u / dsafe[:, None]
                grad[:, n] -= 2.0 * t / dsafe
                H = np.einsum("bm,bmp,bmq->bpq", inv_s * inv_s, M, M)
                w = np.zeros((B, p))
                w[:, :n] = -2.0 * u
                w[:, n] = 2.0 * t
                H += np.einsum("b,bp,bq->bpq", 1.0 / (dsafe * dsafe), w, w)
                H[:, dg, dg] += (2.0 / dsafe)[:, None]
                H[:, n, n] -= 2.0 / dsafe
                diag = H[:, np.arange(p), np.arange(p)]
                H[:, np.arange(p), np.arange(p)] += 1e-13 * (1.0 + np.abs(diag))
                try:
                    step = -np.linalg.solve(H, grad[..., None])[..., 0]
                except np.linalg.LinAlgError:
                    tr = np.trace(H, axis1=1, axis2=2)[:, None, None]
                    step = -np.linalg.solve(H + 1e-10 * tr * ident[None], grad[..., None])[..., 0]
                lam2 = -np.einsum("bp,bp->b", grad, step)
                bad = run & (~np.isfinite(lam2) | (lam2 < -1e-9))
                ok &= ~bad
                newton_done |= bad
                # lam2 is affine-invariant, so a fixed threshold is scale-free
                newton_done |= run & (lam2 <= 1e-4)
                run = ~newton_done
                if not run.any():
                    break
                f0 = self._barrier_value(tau, c_idx, M, hvec, z, n)
                gdz = np.einsum("bp,bp->b", grad, step)
                beta = np.where(run, 1.0, 0.0)
                for _ in range(55):
                    ztry = z + beta[:, None] * step
                    ftry = self._barrier_value(tau, c_idx, M, hvec, ztry, n)
                    shrink = run & ~(ftry <= f0 + 0.25 * beta * gdz) & (beta > 0)
                    if not shrink.any():
                        break
                    beta[shrink] *= 0.5
                stuck = run & (beta < 1e-14)
                newton_done |= stuck
                upd = run & ~stuck
                z[upd] = z[upd] + beta[upd, None] * step[upd]
                iters[upd] += 1
                if early_stop is not None:
                    hit = early_stop(z) & ~finished & ok
                    finished |= hit
                    newton_done |= hit
            gap = nu / tau
            finished |= ok & (gap <= gap_tol_fn(z))
            if (finished | ~ok).all():
                break
            tau = np.where(finished | ~ok, tau, tau * self.mu)
        return z, iters, ok

    @staticmethod
    def _lift_start(u, alphas, G, h):
        """Epigraph start just above the cone boundary for feasible u.

        Picks t = ||u||(1 + theta) small enough that every row with
        alpha > 0 keeps strictly positive slack after the lift.
        """
        nu = np.linalg.norm(u, axis=1)
        slack = np.einsum("bmn,bn->bm", G, u) - h - alphas * nu[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            room = np.where(alphas > 0, slack / np.where(alphas > 0, alphas, 1.0), np.inf)
        theta_max = room.min(axis=1) / np.maximum(nu, 1e-300)
        theta = np.minimum(0.1, 0.5 * theta_max)
        t0 = nu * (1.0 + theta) + 1e-12 * (1.0 + nu)
        return t0

    # -- phase I -----------------------------------------------------------

    def _phase1(self, alphas, G, h, feas_tol):
        """Find a strictly feasible u per problem or certify infeasibility.

        Variables (u, t, sigma): minimize sigma subject to t >= ||u|| and
        g^T u - alpha t - h + sigma >= 0. Stops a problem as soon as sigma
        is safely negative, so iterates never race to extreme scales.
        """
        B, m, n = G.shape
        M = np.concatenate([G, -alphas[..., None], np.ones((B, m, 1))], axis=2)
        z = np.zeros((B, n + 2))
        z[:, n] = 1.0
        sig0 = (h + alphas).max(axis=1) + 1.0
        z[:, n + 1] = sig0
        scale = 1.0 + np.abs(h).max(axis=1)
        margin = 0.01 * scale

        def gap_tol(zc):
            return 0.1 * feas_tol * scale

        def early(zc):
            return zc[:, n + 1] < -margin

        tau0 = 1.0 / np.maximum(np.abs(sig0), 1.0)
        z, iters, ok = self._newton_path(tau0, n + 1, M, hvec=h, z=z, n=n,
                                         gap_tol_fn=gap_tol, early_stop=early)
        sigma = z[:, n + 1]
        feasible = ok & (sigma < 0)
        infeasible = ok & (sigma > feas_tol * scale)
        # borderline problems (sigma in [0, tol*scale]) count as infeasible:
        # they admit no strictly interior point the barrier could use
        feasible &= ~infeasible
        return z[:, :n], sigma, feasible, ok, iters

    # -- public entry points ------------------------------------------------

    def solve_batch(self, alphas, G, h, tol: float = 1e-8):
        """Solve a batch of identically shaped problems.

        alphas (B, m), G (B, m, n), h (B, m). Returns (U (B, n),
        statuses list[str], iterations (B,)).
        """
        alphas = np.asarray(alphas, dtype=float)
        G = np.asarray(G, dtype=float)
        h = np.asarray(h, dtype=float)
        B, m, n = G.shape
        U = np.zeros((B, n))
        iters = np.zeros(B, dtype=int)
        status = np.zeros(B, dtype=int)  # index into _STATUS_NAMES

        # u = 0 is feasible and globally optimal whenever every h_i <= 0
        trivial = (h <= 0.0).all(axis=1)
        todo = np.flatnonzero(~trivial)
        if todo.size == 0:
            return U, [_STATUS_NAMES[s] for s in status], iters

        al, Gm, hv = alphas[todo], G[todo], h[todo]
        u0, okseed = self._seed(al, Gm, hv)

        need_p1 = ~okseed
        if need_p1.any():
            idx = np.flatnonzero(need_p1)
            u1, sig, feas, ok1, it1 = self._phase1(al[idx], Gm[idx], hv[idx], feas_tol=tol)
            iters[todo[idx]] += it1
            u0[idx] = np.where(feas[:, None], u1, 0.0)
            okseed[idx] = feas
            status[todo[idx[~ok1]]] = 2
            status[todo[idx[ok1 & ~feas]]] = 1

        run = np.flatnonzero(okseed)
        if run.size:
            sub = todo[run]
            al_r, G_r, h_r = al[run], Gm[run], hv[run]
            t0 = self._lift_start(u0[run], al_r, G_r, h_r)
            M = np.concatenate([G_r, -al_r[..., None]], axis=2)
            z = np.concatenate([u0[run], t0[:, None]], axis=1)

            def gap_tol(zc):
                return 0.25 * tol * np.maximum(zc[:, n], 1e-12)

            tau0 = (m + 2.0) / np.maximum(t0, 1e-9)
            z, it2, ok2 = self._newton_path(tau0, n, M, hvec=h_r, z=z, n=n, gap_tol_fn=gap_tol)
            iters[sub] += it2
            Ur = z[:, :n]
            U[sub] = Ur
            viol = (al_r * np.linalg.norm(Ur, axis=1)[:, None]
                    - np.einsum("bmn,bn->bm", G_r, Ur) + h_r).max(axis=1)
            scale = 1.0 + np.abs(h_r).max(axis=1) + np.linalg.norm(Ur, axis=1)
            bad = ~ok2 | ~np.isfinite(z).all(axis=1) | (viol > 100.0 * tol * scale)
            status[sub[bad]] = 2
        return U, [_STATUS_NAMES[s] for s in status], iters

    def _seed(self, alphas, G, h):
        """Try to construct strictly feasible points by solving G u = h + margin.

        Cheap and usually sufficient; problems it cannot seed fall through to
        the barrier phase I.
        """
        B, m, n = G.shape
        scale = 1.0 + np.abs(h).max(axis=1)
        u0 = np.zeros((B, n))
        ok = np.zeros(B, dtype=bool)
        margin = scale.copy()
        for _ in range(4):
            target = h + margin[:, None]
            try:
                if m == n:
                    dets = np.abs(np.linalg.det(G))
                    solvable = dets > 1e-12
                    cand = np.zeros((B, n))
                    if solvable.any():
                        cand[solvable] = np.linalg.solve(
                            G[solvable], target[solvable][..., None])[..., 0]
                else:
                    cand = np.stack([np.linalg.lstsq(G[b], target[b], rcond=None)[0]
                                     for b in range(B)])
                    solvable = np.ones(B, dtype=bool)
            except np.linalg.LinAlgError:
                break
            slack = (np.einsum("bmn,bn->bm", G, cand) - h
                     - alphas * np.linalg.norm(cand, axis=1)[:, None])
            good = solvable & (slack.min(axis=1) > 0.05 * margin) & np.isfinite(cand).all(axis=1)
            newly = good & ~ok
            u0[newly] = cand[newly]
            ok |= good
            if ok.all():
                break
            margin = np.where(ok, margin, margin * 8.0)
        return u0, ok


_default_backend = BarrierSolver()


def solve(problem: SocpProblem, tol: float = 1e-8, backend=None) -> SocpSolution:
    """Solve one problem; see solve_batch for the batched form."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    backend = backend or _default_backend
    alphas, G, h = problem.stacked()
    U, statuses, iters = backend.solve_batch(alphas[None], G[None], h[None], tol=tol)
    u = U[0]
    status = statuses[0]
    if status != OPTIMAL:
        return SocpSolution(u=np.full(problem.dim, np.nan), status=status, objective=np.nan,
                            iterations=int(iters[0]), max_violation=np.nan)
    viol = float(np.maximum(residuals(alphas, G, h, u), 0.0).max())
    return SocpSolution(u=u, status=status, objective=float(u @ u),
                        iterations=int(iters[0]), max_violation=viol)


def solve_batch(alphas, G, h, tol: float = 1e-8, backend=None):
    """Batched solve on stacked arrays; returns (U, statuses, iterations)."""
    backend = backend or _default_backend
    return backend.solve_batch(alphas, G, h, tol=tol)


def verify(problem: SocpProblem, u: np.ndarray) -> dict:
    """Feasibility and stationarity check for a candidate point.

    max_violation is the worst positive row residual. The stationarity
    residual fits nonnegative multipliers on near-active rows by least
    squares and reports the remaining KKT gradient norm, scaled by the
    objective gradient.
    """
    u = np.asarray(u, dtype=float)
    alphas, G, h = problem.stacked()
    res = residuals(alphas, G, h, u)
    max_violation = float(np.maximum(res, 0.0).max())

    obj_grad = 2.0 * u
    nu = np.linalg.norm(u)
    if nu < 1e-14:
        return {"max_violation": max_violation, "stationarity_residual": 0.0}
    act_tol = 1e-5 * (1.0 + np.abs(h).max() + nu)
    active = res >= -act_tol
    if not active.any():
        resid = np.linalg.norm(obj_grad)
    else:
        V = alphas[active, None] * (u / nu)[None, :] - G[active]
        lam, _ = nnls(V.T, -obj_grad)
        resid = np.linalg.norm(V.T @ lam + obj_grad)
    return {
        "max_violation": max_violation,
        "stationarity_residual": float(resid / (1.0 + np.linalg.norm(obj_grad))),
    }


def problem_to_dict(problem: SocpProblem) -> dict:
    """Plain-dict form of a problem for the JSON dump."""
    return {
        "dim": problem.dim,
        "rows": [{"alpha": r.alpha, "g": list(map(float, r.g)), "h": r.h} for r in problem.rows],
    }


def solution_to_dict(sol: SocpSolution) -> dict:
    return {
        "u": [float(x) for x in np.atleast_1d(sol.u)],
        "status": sol.status,
        "objective": float(sol.objective) if np.isfinite(sol.objective) else None,
        "iterations": sol.iterations,
        "max_violation": float(sol.max_violation) if np.isfinite(sol.max_violation) else None,
    }
