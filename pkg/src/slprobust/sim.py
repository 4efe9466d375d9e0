"""Monte-Carlo evaluation: fading blocks, symbol slots, receive-and-detect.

Protocol per fading block: an RNG stream is derived from (master seed,
block index); the channel realization, the per-slot symbol vectors and the
per-slot noise draws are sampled once and reused across every SINR
threshold and every precoder, so all curves see identical realizations.
Precoders are built from the block's channel estimates (the perfect
variant from the true channels), solved, and always evaluated against the
true channels. Infeasible slots are excluded from power/SER/efficiency
averages and reported through the infeasibility rate.

Blocks are independent given their streams, so they could be processed in
parallel; aggregation is a deterministic order-independent reduction. The
implementation batches all (threshold, slot) problems of one block and
precoder through the conic solver in a single call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import precoders as pc
from .channel import ChannelRealization, UncertaintyModel, realize
from .constellation import mpsk
from .dpcir import dpcir_for, psi
from .socp import OPTIMAL, solve, solve_batch

PRECODER_KINDS = ("perfect", "nonrobust", "worstcase", "stochastic")


class UndefinedMetricError(RuntimeError):
    """Requested statistic has no feasible slots to average over."""


@dataclass(frozen=True)
class SimConfig:
    n_tx: int = 4
    n_users: int = 4
    order: int = 8
    gamma_grid_db: tuple = tuple(float(g) for g in range(0, 21, 2))
    sigma: float = 1.0
    model: UncertaintyModel = field(default_factory=UncertaintyModel.none)
    epsilon: float = 0.01
    blocks: int = 200
    slots: int = 50
    noise_draws: int = 100
    seed: int = 1
    precoders: tuple = PRECODER_KINDS
    eval_sigma: float | None = None  # None: evaluate at the design sigma
    xi: float | None = None          # assumed Gaussian error std for the stochastic design
    delta: float | None = None       # assumed error radius for the worst-case design

    def __post_init__(self):
        if min(self.blocks, self.slots, self.noise_draws) < 1:
            raise ValueError("blocks, slots and noise_draws must all be >= 1")
        if self.sigma <= 0:
            raise ValueError("design noise std must be positive")
        for p in self.precoders:
            if p not in PRECODER_KINDS:
                raise ValueError(f"unknown precoder kind {p!r}")
        # matched-comparison rule: radius delta = sqrt(2N) * xi ties the
        # two robustness parameters together unless both are given
        root = math.sqrt(2.0 * self.n_tx)
        xi = self.xi
        if xi is None:
            if self.model.kind == "stochastic":
                xi = self.model.xi
            elif self.model.kind == "spherical":
                xi = self.model.delta / root
            else:
                xi = 0.0
        delta = self.delta
        if delta is None:
            delta = self.model.delta if self.model.kind == "spherical" else root * xi
        object.__setattr__(self, "xi", float(xi))
        object.__setattr__(self, "delta", float(delta))

    @property
    def evaluation_sigma(self) -> float:
        return self.sigma if self.eval_sigma is None else self.eval_sigma


@dataclass
class SlotOutcome:
    power: float            # ||u||^2, linear watts
    feasible: bool
    errors: np.ndarray      # (K,) symbol-error counts over the noise draws
    hu_norm2: np.ndarray    # (K,) ||H_k u||^2 at the true channels
    status: str


@dataclass
class SweepRow:
    precoder: str
    gamma_db: float
    xi: float
    delta: float
    epsilon: float
    mean_power: float       # linear watts, averaged over feasible slots
    ser_user: np.ndarray    # (K,)
    ser_avg: float
    eta: float
    infeasible_rate: float
    blocks: int
    slots: int
    seed: int

    @property
    def avg_power_dbw(self) -> float:
        if math.isnan(self.mean_power):
            return math.nan
        return 10.0 * math.log10(self.mean_power) if self.mean_power > 0 else -math.inf


@dataclass
class SweepResult:
    rows: list

    def row(self, precoder: str, gamma_db: float) -> SweepRow:
        for r in self.rows:
            if r.precoder == precoder and r.gamma_db == gamma_db:
                return r
        raise KeyError((precoder, gamma_db))


@dataclass(frozen=True)
class BlockState:
    realization: ChannelRealization
    symbols: np.ndarray     # (slots, K) symbol indices
    noise: np.ndarray       # (slots, noise_draws, K) unit-variance complex noise


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent per-block stream derived from (master seed, block index)."""
    return np.random.default_rng(np.random.SeedSequence((seed, block)))


def draw_block(cfg: SimConfig, block: int) -> BlockState:
    """Channel realization, slot symbols, and slot noise for one block."""
    rng = block_rng(cfg.seed, block)
    real = realize(cfg.n_tx, cfg.n_users, cfg.model, rng)
    symbols = rng.integers(0, cfg.order, size=(cfg.slots, cfg.n_users))
    noise = (rng.standard_normal((cfg.slots, cfg.noise_draws, cfg.n_users))
             + 1j * rng.standard_normal((cfg.slots, cfg.noise_draws, cfg.n_users))) / math.sqrt(2.0)
    return BlockState(realization=real, symbols=symbols, noise=noise)


def receive(H, u, sigma, rng) -> complex:
    """One user's received sample: (H u as a complex scalar) + CN(0, sigma^2)."""
    if sigma < 0:
        raise ValueError("noise std must be nonnegative")
    y = np.asarray(H, float) @ np.asarray(u, float)
    z = sigma * (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
    return complex(y[0], y[1]) + z


def _scenario(cfg: SimConfig, real: ChannelRealization, symbols, kind: str, gamma_lin: float):
    const = mpsk(cfg.order)
    descs = [dpcir_for(const, int(m)) for m in symbols]
    psis = [psi(d, cfg.sigma, gamma_lin) for d in descs]
    if kind == "perfect":
        lifts = real.true_lifts
        model = UncertaintyModel.none()
    elif kind == "nonrobust":
        lifts = real.estimate_lifts
        model = cfg.model
    elif kind == "worstcase":
        lifts = real.estimate_lifts
        model = UncertaintyModel.spherical(cfg.delta)
    elif kind == "stochastic":
        lifts = real.estimate_lifts
        model = UncertaintyModel.stochastic(cfg.xi)
    else:
        raise ValueError(f"unknown precoder kind {kind!r}")
    return pc.ScenarioInputs(estimates=lifts, descriptors=descs, psis=psis,
                             model=model, epsilon=cfg.epsilon)


def build_problem(cfg: SimConfig, real: ChannelRealization, symbols, kind: str,
                  gamma_lin: float):
    s = _scenario(cfg, real, symbols, kind, gamma_lin)
    if kind in ("perfect", "nonrobust"):
        return pc.build_nonrobust(s)
    if kind == "worstcase":
        return pc.build_worstcase(s)
    return pc.build_stochastic(s)


def run_slot(cfg: SimConfig, real: ChannelRealization, symbols, kind: str,
             gamma_lin: float, noise) -> SlotOutcome:
    """Reference single-slot path: build, solve, evaluate at the true channels."""
    K = cfg.n_users
    problem = build_problem(cfg, real, symbols, kind, gamma_lin)
    sol = solve(problem)
    if sol.status != OPTIMAL:
        return SlotOutcome(power=math.nan, feasible=False, errors=np.zeros(K, dtype=int),
                           hu_norm2=np.zeros(K), status=sol.status)
    const = mpsk(cfg.order)
    uc = sol.u[:cfg.n_tx] + 1j * sol.u[cfg.n_tx:]
    nf = real.true @ uc                      # (K,) noise-free received points
    received = nf[None, :] + cfg.evaluation_sigma * np.asarray(noise)
    det = np.argmin(np.abs(received[..., None] - const.points) ** 2, axis=-1)
    errors = (det != np.asarray(symbols)[None, :]).sum(axis=0)
    return SlotOutcome(power=float(sol.objective), feasible=True,
                       errors=errors.astype(int), hu_norm2=np.abs(nf) ** 2,
                       status=sol.status)


def power_efficiency(outcomes, noise_draws: int, n_users: int | None = None) -> float:
    """Per-user throughput over transmit power, averaged per feasible slot.

    eta_slot = (1/K) sum_k (1 - SER_k) log2(1 + ||H_k u||^2) / ||u||^2,
    with the per-slot SER taken over the slot's noise draws. Zero-power
    slots contribute zero.
    """
    vals = []
    for o in outcomes:
        if not o.feasible:
            continue
        k = len(o.errors) if n_users is None else n_users
        ser = np.asarray(o.errors, float) / noise_draws
        tput = float(np.mean((1.0 - ser) * np.log2(1.0 + np.asarray(o.hu_norm2, float))))
        vals.append(tput / o.power if o.power > 0 else 0.0)
    if not vals:
        raise UndefinedMetricError("no feasible slots to average over")
    return float(np.mean(vals))


# -- batched sweep -----------------------------------------------------------


def _assemble_block(cfg: SimConfig, state: BlockState, kind: str, gammas_lin,
                    A_all, b_all, anorm_all, W_all):
    """Stacked (alphas, G, h) for all (gamma, slot) problems of one block.

    Row layout matches build_* exactly: user-major, region row minor.
    Batch index is gamma-major: b = gi * slots + slot.
    """
    slots, K = state.symbols.shape
    G_count = len(gammas_lin)
    lifts = state.realization.true_lifts if kind == "perfect" else state.realization.estimate_lifts
    AH = np.einsum("mij,kjn->kmin", A_all, lifts)          # (K, M, 2, 2N)
    if kind == "stochastic":
        AH = np.einsum("mij,kmjn->kmin", W_all, AH)
    sym = state.symbols                                     # (slots, K)
    rows = AH[np.arange(K)[None, :], sym]                   # (slots, K, 2, 2N)
    n = rows.shape[-1]
    G_slot = rows.reshape(slots, 2 * K, n)
    G_b = np.broadcast_to(G_slot[None], (G_count, slots, 2 * K, n)).reshape(-1, 2 * K, n)

    scale = cfg.sigma * np.sqrt(np.asarray(gammas_lin))     # (G,)
    if kind == "stochastic":
        wb = np.einsum("mij,mj->mi", W_all, b_all)          # (M, 2) whitened offsets
    else:
        wb = b_all
    h_slot = wb[sym]                                        # (slots, K, 2)
    h_b = (scale[:, None, None, None] * h_slot[None]).reshape(-1, 2 * K)

    if kind in ("perfect", "nonrobust"):
        al_slot = np.zeros((slots, K, 2))
    elif kind == "worstcase":
        al_slot = cfg.delta * anorm_all[sym]
    else:
        alpha = math.sqrt(2.0) * abs(pc.rho(cfg.epsilon)) * cfg.xi
        al_slot = np.full((slots, K, 2), alpha)
    al_b = np.broadcast_to(al_slot.reshape(slots, 2 * K)[None],
                           (G_count, slots, 2 * K)).reshape(-1, 2 * K).copy()
    return al_b, np.ascontiguousarray(G_b), h_b


def run_sweep(cfg: SimConfig, progress=None) -> SweepResult:
    """Full Monte-Carlo sweep; a pure function of the configuration."""
    const = mpsk(cfg.order)
    M = cfg.order
    K = cfg.n_users
    descs = [dpcir_for(const, m) for m in range(M)]
    A_all = np.stack([d.A for d in descs])                  # (M, 2, 2)
    b_all = np.stack([d.b + d.c for d in descs])            # (M, 2)
    anorm_all = np.linalg.norm(A_all, axis=2)               # (M, 2)
    if cfg.order > 2 and "stochastic" in cfg.precoders:
        from .dpcir import inv_sqrt_gram
        W_all = np.stack([inv_sqrt_gram(d) for d in descs])
    else:
        W_all = None
    gammas_lin = [10.0 ** (g / 10.0) for g in cfg.gamma_grid_db]
    Gc = len(gammas_lin)
    eval_sigma = cfg.evaluation_sigma

    acc = {
        (p, gi): {"power": 0.0, "feas": 0, "inf": 0, "err": np.zeros(K), "eta": 0.0}
        for p in cfg.precoders for gi in range(Gc)
    }

    for blk in range(cfg.blocks):
        state = draw_block(cfg, blk)
        h_true = state.realization.true
        sym = state.symbols
        for kind in cfg.precoders:
            if kind == "stochastic" and cfg.order == 2:
                # BPSK collapses to a single row per user; use the builder path
                U = np.full((Gc * cfg.slots, 2 * cfg.n_tx), np.nan)
                statuses = []
                for gi, gl in enumerate(gammas_lin):
                    for s in range(cfg.slots):
                        sol = solve(build_problem(cfg, state.realization, sym[s], kind, gl))
                        statuses.append(sol.status)
                        if sol.status == OPTIMAL:
                            U[gi * cfg.slots + s] = sol.u
            else:
                al, Gb, hb = _assemble_block(cfg, state, kind, gammas_lin,
                                             A_all, b_all, anorm_all, W_all)
                U, statuses, _ = solve_batch(al, Gb, hb)
            feas = np.array([st == OPTIMAL for st in statuses])
            uc = U[:, :cfg.n_tx] + 1j * U[:, cfg.n_tx:]
            nf = uc @ h_true.T                               # (B, K)
            power = np.einsum("bn,bn->b", U, U)
            hu2 = np.abs(nf) ** 2
            # detection in chunks to bound the (B, draws, K, M) temporaries
            err = np.zeros((Gc * cfg.slots, K), dtype=int)
            chunk = max(1, 4_000_000 // max(1, cfg.noise_draws * K * M))
            for lo in range(0, Gc * cfg.slots, chunk):
                hi = min(lo + chunk, Gc * cfg.slots)
                slot_idx = (np.arange(lo, hi) % cfg.slots)
                rec = nf[lo:hi, None, :] + eval_sigma * state.noise[slot_idx]
                det = np.argmin(np.abs(rec[..., None] - const.points) ** 2, axis=-1)
                err[lo:hi] = (det != sym[slot_idx][:, None, :]).sum(axis=1)
            for gi in range(Gc):
                sl = slice(gi * cfg.slots, (gi + 1) * cfg.slots)
                f = feas[sl]
                a = acc[(kind, gi)]
                a["feas"] += int(f.sum())
                a["inf"] += int((~f).sum())
                if f.any():
                    p_sl = power[sl][f]
                    a["power"] += float(p_sl.sum())
                    a["err"] += err[sl][f].sum(axis=0)
                    ser_slot = err[sl][f] / cfg.noise_draws
                    tput = np.mean((1.0 - ser_slot) * np.log2(1.0 + hu2[sl][f]), axis=1)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        eta_slot = np.where(p_sl > 0, tput / np.where(p_sl > 0, p_sl, 1.0), 0.0)
                    a["eta"] += float(eta_slot.sum())
        if progress is not None:
            progress(blk + 1, cfg.blocks)

    rows = []
    for kind in cfg.precoders:
        for gi, gdb in enumerate(cfg.gamma_grid_db):
            a = acc[(kind, gi)]
            nfeas = a["feas"]
            total = nfeas + a["inf"]
            if nfeas > 0:
                mean_power = a["power"] / nfeas
                ser_user = a["err"] / (nfeas * cfg.noise_draws)
                eta = a["eta"] / nfeas
            else:
                mean_power = math.nan
                ser_user = np.full(K, math.nan)
                eta = math.nan
            rows.append(SweepRow(
                precoder=kind, gamma_db=float(gdb), xi=cfg.xi, delta=cfg.delta,
                epsilon=cfg.epsilon, mean_power=mean_power, ser_user=ser_user,
                ser_avg=float(np.mean(ser_user)), eta=eta,
                infeasible_rate=a["inf"] / total, blocks=cfg.blocks, slots=cfg.slots,
                seed=cfg.seed,
            ))
    return SweepResult(rows=rows)
