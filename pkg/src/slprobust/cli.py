"""Command-line front end: sweeps to CSV, a validation suite, single-slot dumps.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import precoders as pc
from . import socp
from .channel import UncertaintyModel, realize, t_expand
from .constellation import mpsk
from .dpcir import dpcir_for, inv_sqrt_gram, psi
from .sim import PRECODER_KINDS, SimConfig, build_problem, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _fmt(x) -> str:
    """9 significant digits; dB conversions happen only at output time."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.9g}"
    return str(x)


def _parse_gammas(text: str):
    """Either a comma list of dB values or min:step:max."""
    if ":" in text:
        lo, step, hi = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("gamma step must be positive")
        out = []
        g = lo
        while g <= hi + 1e-12:
            out.append(round(g, 12))
            g += step
        return tuple(out)
    return tuple(float(v) for v in text.split(","))


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SLP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as e:
            raise ValueError(f"SLP_SEED must be an integer, got {env!r}") from e
    return 1


def _model_from_args(args, n_tx: int) -> UncertaintyModel:
    delta = args.delta if args.delta is not None else math.sqrt(2 * n_tx) * args.xi
    if args.model == "none":
        return UncertaintyModel.none()
    if args.model == "spherical":
        return UncertaintyModel.spherical(delta)
    return UncertaintyModel.stochastic(args.xi)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--antennas", type=int, default=4, help="transmit antennas N")
    p.add_argument("--users", type=int, default=4, help="single-antenna users K")
    p.add_argument("--modulation", type=int, default=8, help="PSK order M")
    p.add_argument("--sigma", type=float, default=1.0, help="receiver noise std")
    p.add_argument("--xi", type=float, default=0.05, help="Gaussian error std per real component")
    p.add_argument("--delta", type=float, default=None,
                   help="error radius override (default sqrt(2N)*xi)")
    p.add_argument("--epsilon", type=float, default=0.01, help="violation probability")
    p.add_argument("--model", choices=("none", "spherical", "stochastic"), default="spherical",
                   help="law the simulated errors are drawn from")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (SLP_SEED environment variable as fallback, then 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> _Parser:
    ap = _Parser(prog="slprobust", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="Monte-Carlo sweep over SINR thresholds, CSV output")
    _add_common(sp)
    sp.add_argument("--precoders", default=",".join(PRECODER_KINDS),
                    help="comma list among perfect,nonrobust,worstcase,stochastic")
    sp.add_argument("--gammas", default="0:2:20", help="dB list or min:step:max")
    sp.add_argument("--blocks", type=int, default=200)
    sp.add_argument("--slots", type=int, default=50)
    sp.add_argument("--noise-draws", type=int, default=100)
    sp.add_argument("--eval-sigma", type=float, default=None,
                    help="noise std used only when evaluating symbol errors")
    sp.add_argument("--out", default="sweep.csv")

    vp = sub.add_parser("validate", help="run the numerical property checks")
    _add_common(vp)
    vp.add_argument("--quick", action="store_true", help="reduced sample counts")

    gp = sub.add_parser("single", help="build, solve and dump one slot's problem")
    _add_common(gp)
    gp.add_argument("--precoder", choices=PRECODER_KINDS, default="nonrobust")
    gp.add_argument("--symbols", required=True, help="comma list of K symbol indices")
    gp.add_argument("--gamma", type=float, default=10.0, help="SINR threshold in dB")
    gp.add_argument("--mc-samples", type=int, default=10000)
    return ap


def _config_from_args(args) -> SimConfig:
    model = _model_from_args(args, args.antennas)
    return SimConfig(
        n_tx=args.antennas, n_users=args.users, order=args.modulation,
        gamma_grid_db=_parse_gammas(args.gammas), sigma=args.sigma, model=model,
        epsilon=args.epsilon, blocks=args.blocks, slots=args.slots,
        noise_draws=args.noise_draws, seed=_resolve_seed(args),
        precoders=tuple(p.strip() for p in args.precoders.split(",") if p.strip()),
        eval_sigma=args.eval_sigma,
        delta=args.delta if args.delta is not None else None,
        xi=args.xi,
    )


def csv_header(n_users: int) -> str:
    users = ",".join(f"ser_user_{k}" for k in range(1, n_users + 1))
    return ("precoder,gamma_db,xi,delta,epsilon,avg_power_dbw,ser_avg,"
            f"{users},eta,infeasible_rate,blocks,slots,seed")


def cmd_sweep(args) -> int:
    try:
        cfg = _config_from_args(args)
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    progress = None
    if args.verbose:
        def progress(done, total):
            sys.stderr.write(f"\rblock {done}/{total}")
            sys.stderr.flush()
            if done == total:
                sys.stderr.write("\n")
    try:
        result = run_sweep(cfg, progress=progress)
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    lines = [csv_header(cfg.n_users)]
    for r in result.rows:
        cells = [r.precoder, _fmt(r.gamma_db), _fmt(r.xi), _fmt(r.delta), _fmt(r.epsilon),
                 _fmt(r.avg_power_dbw), _fmt(r.ser_avg)]
        cells += [_fmt(float(s)) for s in r.ser_user]
        cells += [_fmt(r.eta), _fmt(r.infeasible_rate), str(r.blocks), str(r.slots), str(r.seed)]
        lines.append(",".join(cells))
    try:
        with open(args.out, "w") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as e:
        sys.stderr.write(f"error: cannot write {args.out}: {e}\n")
        return EXIT_IO
    for r in result.rows:
        if r.gamma_db == cfg.gamma_grid_db[len(cfg.gamma_grid_db) // 2]:
            print(f"{r.precoder:10s} gamma={r.gamma_db:5.1f} dB  power={r.avg_power_dbw:8.3f} dBW  "
                  f"ser={r.ser_avg:.5f}  eta={r.eta:.5f}  infeasible={r.infeasible_rate:.3f}")
    print(f"wrote {args.out} ({len(result.rows)} rows)")
    return EXIT_OK


def cmd_single(args) -> int:
    try:
        cfg = _config_from_args_single(args)
        symbols = [int(s) for s in args.symbols.split(",")]
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    if len(symbols) != cfg.n_users:
        sys.stderr.write(f"error: need {cfg.n_users} symbols, got {len(symbols)}\n")
        return EXIT_USAGE
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0)))
    real = realize(cfg.n_tx, cfg.n_users, cfg.model, rng)
    gamma_lin = 10.0 ** (args.gamma / 10.0)
    try:
        problem = build_problem(cfg, real, symbols, args.precoder, gamma_lin)
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    sol = socp.solve(problem)
    dump = {
        "precoder": args.precoder,
        "gamma_db": args.gamma,
        "symbols": symbols,
        "problem": socp.problem_to_dict(problem),
        "solution": socp.solution_to_dict(sol),
    }
    if sol.status == socp.OPTIMAL:
        dump["verify"] = socp.verify(problem, sol.u)
        const = mpsk(cfg.order)
        lifts = real.true_lifts if args.precoder == "perfect" else real.estimate_lifts
        if args.precoder == "worstcase":
            mc_model = UncertaintyModel.spherical(cfg.delta)
        elif args.precoder == "stochastic":
            mc_model = UncertaintyModel.stochastic(cfg.xi)
        else:
            mc_model = cfg.model
        viols = []
        for k, m in enumerate(symbols):
            d = dpcir_for(const, m)
            viols.append(pc.ci_violation_mc(d, psi(d, cfg.sigma, gamma_lin), lifts[k],
                                            sol.u, mc_model, args.mc_samples, rng))
        dump["ci_violation_mc"] = viols
    print(json.dumps(_round_floats(dump), indent=2))
    return EXIT_OK


def _config_from_args_single(args) -> SimConfig:
    model = _model_from_args(args, args.antennas)
    return SimConfig(
        n_tx=args.antennas, n_users=args.users, order=args.modulation,
        gamma_grid_db=(args.gamma,), sigma=args.sigma, model=model, epsilon=args.epsilon,
        blocks=1, slots=1, noise_draws=1, seed=_resolve_seed(args),
        precoders=(args.precoder,),
        delta=args.delta if args.delta is not None else None, xi=args.xi,
    )


def _round_floats(obj):
    """Round floats to 9 significant digits for the JSON dump."""
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


# -- validation suite ---------------------------------------------------------


def _check(name, ok, detail, failures):
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if not ok:
        failures.append(name)


def cmd_validate(args) -> int:
    quick = args.quick
    rng = np.random.default_rng(_resolve_seed(args))
    failures = []

    # error-function round trip
    grid = np.linspace(-1 + 1e-9, 1 - 1e-9, 1_000 if quick else 10_000)
    err = max(abs(pc.erf(pc.erf_inv(float(y))) - float(y)) for y in grid)
    _check("erf round-trip", err <= 1e-12, f"max |erf(erf_inv(y)) - y| = {err:.2e}", failures)

    # margin factor values and sign; reference from a 50-digit inversion
    r0 = pc.rho(0.75)
    r1 = pc.rho(0.01)
    ok = r0 == 0.0 and abs(r1 + 1.8207727065420406) < 5e-4 and pc.rho(0.5) < 0 < pc.rho(0.9)
    _check("rho values", ok, f"rho(3/4) = {r0}, rho(0.01) = {r1:.6f}", failures)

    # worst-case infimum closed forms vs minimizers and sampled errors
    samples = 20_000 if quick else 1_000_000
    worst_gap = 0.0
    ok = True
    for _ in range(5):
        a = rng.standard_normal(2)
        u = rng.standard_normal(8)
        delta = rng.uniform(0.2, 2.0)
        inf_u = pc.wc_infimum_unstructured(a, u, delta)
        dstar = pc.wc_minimizer_unstructured(a, u, delta)
        ok &= abs(a @ dstar @ u - inf_u) <= 1e-9
        inf_s = pc.wc_infimum_structured(a, u, delta)
        estar = pc.wc_minimizer_structured(a, u, delta)
        ok &= abs(a @ t_expand(estar) @ u - inf_s) <= 1e-9
        ok &= inf_s >= inf_u - 1e-12
        n = u.size // 2
        g = rng.standard_normal((samples, 2 * n))
        g *= (delta / math.sqrt(2.0)) / np.linalg.norm(g, axis=1, keepdims=True)
        e = g[:, :n] + 1j * g[:, n:]
        uc = u[:n] + 1j * u[n:]
        w = e @ uc
        vals = (np.stack([w.real, w.imag], axis=1) @ a)
        worst_gap = max(worst_gap, float(inf_s - vals.min()))
        ok &= vals.min() >= inf_s - 1e-9
    _check("worst-case infima", ok, f"sampled-vs-closed-form slack {worst_gap:.2e}", failures)

    # row-error covariance law
    samples = 50_000 if quick else 1_000_000
    tol = 0.01 * math.sqrt(1_000_000 / samples) * 3 if quick else 0.01
    worst = 0.0
    for _ in range(3):
        const = mpsk(int(rng.choice([3, 4, 8])))
        d = dpcir_for(const, int(rng.integers(const.order)))
        u = rng.standard_normal(8)
        xi = rng.uniform(0.05, 0.4)
        target = pc.upsilon_covariance(d, u, xi)
        uc = u[:4] + 1j * u[4:]
        e = xi * (rng.standard_normal((samples, 4)) + 1j * rng.standard_normal((samples, 4)))
        w = e @ uc
        ups = np.stack([w.real, w.imag], axis=1) @ d.A.T
        emp = ups.T @ ups / samples
        worst = max(worst, np.linalg.norm(emp - target) / np.linalg.norm(target))
    _check("error covariance law", worst <= tol,
           f"max relative Frobenius error {worst:.4f} (tol {tol:.3f})", failures)

    # solver vs independent grid oracle on random 2-D problems
    trials = 20 if quick else 100
    from .oracle2d import grid_oracle, random_problem
    worst_rel = 0.0
    worst_kkt = 0.0
    ok = True
    for _ in range(trials):
        prob, u_feas = random_problem(rng)
        sol = socp.solve(prob)
        ref = grid_oracle(prob, np.linalg.norm(u_feas))
        if ref is None:
            ok &= sol.status != socp.OPTIMAL
            continue
        rel = abs(sol.objective - ref) / max(ref, 1e-9)
        worst_rel = max(worst_rel, rel)
        v = socp.verify(prob, sol.u)
        worst_kkt = max(worst_kkt, v["max_violation"])
        ok &= sol.status == socp.OPTIMAL and rel <= 1e-3 and v["max_violation"] <= 1e-6
    _check("solver vs grid oracle", ok,
           f"worst relative gap {worst_rel:.2e}, worst violation {worst_kkt:.2e}", failures)

    # chance-constrained violation rate on the orthogonal-normal constellation,
    # where the whitening step is exact
    slots = 10 if quick else 50
    draws = 2_000 if quick else 10_000
    bad_slots = 0
    for s in range(slots):
        srng = np.random.default_rng(np.random.SeedSequence((_resolve_seed(args), 1000 + s)))
        model = UncertaintyModel.stochastic(args.xi)
        cfg = SimConfig(n_tx=4, n_users=4, order=4, gamma_grid_db=(10.0,), sigma=args.sigma,
                        model=model, epsilon=args.epsilon, blocks=1, slots=1, noise_draws=1,
                        seed=int(srng.integers(2**31)), precoders=("stochastic",))
        real = realize(4, 4, model, srng)
        symbols = srng.integers(0, 4, 4)
        problem = build_problem(cfg, real, symbols, "stochastic", 10.0)
        sol = socp.solve(problem)
        if sol.status != socp.OPTIMAL:
            continue
        const = mpsk(4)
        worst_rate = 0.0
        for k, m in enumerate(symbols):
            d = dpcir_for(const, int(m))
            rate = pc.ci_violation_mc(d, psi(d, cfg.sigma, 10.0), real.estimate_lifts[k],
                                      sol.u, model, draws, srng)
            se = math.sqrt(max(rate * (1 - rate), 1e-12) / draws)
            if rate > args.epsilon + 3 * se:
                worst_rate = max(worst_rate, rate)
        if worst_rate > 0:
            bad_slots += 1
    _check("chance-constraint violation rate", bad_slots <= max(1, int(0.05 * slots)),
           f"{bad_slots}/{slots} slots above epsilon + 3*stderr", failures)

    # product formula vs Monte-Carlo orthant probability
    samples = 50_000 if quick else 400_000
    ok = True
    worst = 0.0
    for _ in range(5):
        wbar = rng.standard_normal(2) * 1.5
        u = rng.standard_normal(8)
        xi = rng.uniform(0.05, 0.5)
        product, bound = pc.chance_product_bound(wbar, u, xi)
        ok &= bound <= product + 1e-15
        z = rng.standard_normal((samples, 2))
        emp = float((z >= wbar[None, :] / (xi * np.linalg.norm(u))).all(axis=1).mean())
        se = math.sqrt(max(product * (1 - product), 1e-12) / samples)
        worst = max(worst, abs(emp - product))
        ok &= abs(emp - product) <= max(4 * se, 5e-4)
    _check("product-bound Monte-Carlo", ok, f"max |MC - product| = {worst:.2e}", failures)

    # decorrelation-gap report (informational): on the default 8-point
    # constellation the whitening transform does not preserve the orthant
    # event, so the per-user violation can exceed 1 - product; measured here
    srng = np.random.default_rng(_resolve_seed(args) + 77)
    model = UncertaintyModel.stochastic(args.xi)
    cfg = SimConfig(n_tx=4, n_users=4, order=8, gamma_grid_db=(10.0,), sigma=args.sigma,
                    model=model, epsilon=args.epsilon, blocks=1, slots=1, noise_draws=1,
                    seed=7, precoders=("stochastic",))
    real = realize(4, 4, model, srng)
    symbols = srng.integers(0, 8, 4)
    problem = build_problem(cfg, real, symbols, "stochastic", 10.0)
    sol = socp.solve(problem)
    if sol.status == socp.OPTIMAL:
        const = mpsk(8)
        gaps = []
        for k, m in enumerate(symbols):
            d = dpcir_for(const, int(m))
            p = psi(d, cfg.sigma, 10.0)
            rate = pc.ci_violation_mc(d, p, real.estimate_lifts[k], sol.u, model,
                                      2_000 if quick else 20_000, srng)
            W = inv_sqrt_gram(d)
            wbar = W @ (p.value - d.A @ (real.estimate_lifts[k] @ sol.u))
            product, _ = pc.chance_product_bound(wbar, sol.u, cfg.xi)
            gaps.append(rate - (1.0 - product))
        print(f"INFO  decorrelation gap (8-PSK): per-user MC violation minus (1 - product) = "
              + ", ".join(f"{g:+.4f}" for g in gaps))

    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(failures)}")
        return EXIT_VALIDATION
    print("all checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        return cmd_sweep(args)
    if args.command == "validate":
        return cmd_validate(args)
    return cmd_single(args)


if __name__ == "__main__":
    sys.exit(main())
