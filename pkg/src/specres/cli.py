"""``specres`` command-line harness.

Every artifact records the resolved configuration (seed included) so a rerun
with the same arguments reproduces its numeric content byte for byte.
Exit status: 0 on success, 1 on a domain error (JSON description on stderr),
2 on invalid arguments.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .artifacts import dumps_json, write_csv, write_json
from .errors import PreconditionViolation, SpecresError
from .mpm import PencilConfig, error_bounds, recover
from .refine import RefineConfig, recover_refine
from .signal import (Signal, add_bounded_noise, location_matching_distance, matching_distance, measure,
                     measurement_from_dict, measurement_to_dict, min_separation, random_signal,
                     signal_from_dict, signal_to_dict)
from .vandermonde import (CENTERED, FROM_ZERO, VandermondeSpec, adversarial_instance, condition_number,
                          default_workers, phase_sweep)

PHASE_HEADER = ("delta", "m", "trial", "kappa", "selberg_bound", "sigma_min", "sigma_max")
NOISE_HEADER = ("sigma", "trial", "matching_distance")


class UsageError(Exception):
    """Bad command-line input; maps to exit status 2."""


# -- argument helpers --------------------------------------------------------

def parse_grid(text: str, count: Optional[int], integer: bool = False) -> list:
    """``a,b,c`` lists or ``start:stop`` geometric ranges (which need ``count``)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 2:
            raise UsageError(f"range {text!r} must look like start:stop")
        if count is None:
            raise UsageError(f"range {text!r} needs an explicit count flag")
        start, stop = float(parts[0]), float(parts[1])
        if start <= 0 or stop <= 0 or count < 1:
            raise UsageError("geometric ranges need positive endpoints and count >= 1")
        vals = np.geomspace(start, stop, count).tolist() if count > 1 else [start]
    else:
        vals = [float(x) for x in text.split(",") if x.strip()]
    if not vals:
        raise UsageError(f"empty grid {text!r}")
    if integer:
        out = []
        for v in vals:
            iv = int(round(v))
            if iv not in out:
                out.append(iv)
        return out
    return vals


def trial_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _config(args, command: str) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "output")}
    cfg["command"] = command
    cfg["version"] = __version__
    return cfg


# -- library-level sweeps used by the commands -------------------------------

def noise_sweep(signal: Signal, sigmas: Sequence[float], trials: int, seed: int, algo: str = "mpm",
                half_width: Optional[int] = None, pencil_order: Optional[int] = None,
                refine_config: Optional[RefineConfig] = None, workers: Optional[int] = None) -> list:
    """Rows ``(sigma, trial, matching distance)`` for repeated noisy recoveries.

    The noise seed for each row is derived from ``(seed, sigma index,
    trial)``. ``refine`` reports location-only matching distance.
    """
    if algo == "mpm":
        n = half_width if half_width is not None else max(signal.k, math.ceil(1.0 / min_separation(signal)) + 2)
    elif algo == "refine":
        if not np.allclose(signal.amplitudes, 1.0):
            raise PreconditionViolation("refinement assumes unit amplitudes; generate the signal with --unit")
        if refine_config is None:
            refine_config = RefineConfig.for_separation(min_separation(signal), 1e-3, signal.k)
        n = half_width if half_width is not None else refine_config.cutoff
    else:
        raise UsageError(f"unknown algorithm {algo!r}")

    def run(key):
        si, t = key
        meas = measure(signal, n, sigmas[si], trial_seed(seed, si, t))
        if algo == "mpm":
            est = recover(meas, PencilConfig(signal.k, pencil_order)).spikes
            dist = matching_distance(est, signal)
        else:
            res = recover_refine(meas, refine_config)
            dist = location_matching_distance(res.locations, signal.locations)
        return (float(sigmas[si]), t, dist)

    keys = [(si, t) for si in range(len(sigmas)) for t in range(trials)]
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [run(key) for key in keys]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, keys))


def phase_rows(rows) -> list:
    return [(r.delta, r.m, r.trial, r.report.kappa, r.report.selberg_bound,
             r.report.sigma_min, r.report.sigma_max) for r in rows]


# -- commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    rng = np.random.Generator(np.random.PCG64(args.seed))
    sig = random_signal(args.k, args.delta, rng, unit=args.unit)
    out = signal_to_dict(sig)
    out["separation"] = min_separation(sig)
    out["config"] = _config(args, "generate")
    write_json(args.output, out)
    return 0


def cmd_measure(args) -> int:
    sig = signal_from_dict(_load_json(args.signal))
    if args.bounded is not None:
        meas = add_bounded_noise(measure(sig, args.n), args.bounded, args.seed)
    else:
        meas = measure(sig, args.n, args.sigma, args.seed)
    out = measurement_to_dict(meas)
    out["config"] = _config(args, "measure")
    write_json(args.output, out)
    return 0


def cmd_cond(args) -> int:
    sig = signal_from_dict(_load_json(args.signal))
    spec = VandermondeSpec(tuple(sig.locations), args.m, args.indexing)
    rep = condition_number(spec, precision="extended" if args.extended else "double", warn=False)
    out = rep.as_dict()
    out["bound_holds"] = None if rep.selberg_bound is None else bool(rep.kappa <= rep.selberg_bound * (1 + 1e-12))
    out["config"] = _config(args, "cond")
    write_json(args.output, out)
    if out["bound_holds"] is False:
        raise SpecresError(f"measured kappa {rep.kappa} exceeds the bound {rep.selberg_bound}")
    return 0


def cmd_lower_bound(args) -> int:
    inst = adversarial_instance(args.k, args.epsilon)
    rep = condition_number(inst.spec, precision="extended", warn=False)
    from .vandermonde import build
    residual = float(np.linalg.norm(build(inst.spec) @ inst.witness))
    out = {
        "k": args.k, "epsilon": args.epsilon, "ell": inst.ell, "r": inst.r, "grid": inst.grid,
        "measurements": inst.measurements, "rows": inst.spec.rows,
        "locations": list(inst.spec.locations), "witness": inst.witness,
        "witness_residual": residual, "sup_bound": inst.sup_bound, "decay_ceiling": inst.decay_ceiling,
        "kappa": rep.kappa, "log2_kappa": rep.log2_kappa, "sigma_min": rep.sigma_min, "sigma_max": rep.sigma_max,
        "config": _config(args, "lower-bound"),
    }
    write_json(args.output, out)
    return 0


def cmd_recover_mpm(args) -> int:
    meas = measurement_from_dict(_load_json(args.input))
    cfg = PencilConfig(args.k, args.pencil_order)
    res = recover(meas, cfg)
    out = res.as_dict()
    if args.truth:
        truth = signal_from_dict(_load_json(args.truth))
        eta = float(np.linalg.norm(meas.values - measure(truth, meas.half_width).values))
        b = error_bounds(meas, cfg, truth, eta, strict=False)
        out["diagnostics"].update(gamma_bound=b.gamma, zeta_bound=b.zeta, regime=b.as_dict())
        out["matching_distance"] = matching_distance(res.spikes, truth)
    out["config"] = _config(args, "recover-mpm")
    write_json(args.output, out)
    return 0


def _refine_config(args, k: int) -> RefineConfig:
    return RefineConfig.for_separation(args.delta, args.eps, k, r=args.r)


def cmd_recover_refine(args) -> int:
    meas = measurement_from_dict(_load_json(args.input))
    cfg = _refine_config(args, args.k)
    res = recover_refine(meas, cfg, noise_bound=args.noise_bound)
    out = res.as_dict()
    out["refine"] = cfg.as_dict()
    out["call_ceiling"] = cfg.call_ceiling()
    out["config"] = _config(args, "recover-refine")
    write_json(args.output, out)
    return 0


def cmd_phase_sweep(args) -> int:
    deltas = parse_grid(args.deltas, args.delta_count)
    ms = parse_grid(args.ms, args.m_count, integer=True)
    rows = phase_sweep(deltas, ms, args.k, args.trials, args.seed, indexing=args.indexing)
    cfg = _config(args, "phase-sweep")
    cfg.update(resolved_deltas=deltas, resolved_ms=ms)
    write_csv(args.output, PHASE_HEADER, phase_rows(rows), cfg)
    return 0


def cmd_noise_sweep(args) -> int:
    sig = signal_from_dict(_load_json(args.signal))
    sigmas = parse_grid(args.sigmas, args.count)
    refine_cfg = None
    if args.algo == "refine":
        delta = args.delta if args.delta is not None else min_separation(sig)
        refine_cfg = RefineConfig.for_separation(delta, args.eps, sig.k)
    rows = noise_sweep(sig, sigmas, args.trials, args.seed, args.algo, args.n, args.pencil_order, refine_cfg)
    cfg = _config(args, "noise-sweep")
    cfg["resolved_sigmas"] = sigmas
    write_csv(args.output, NOISE_HEADER, rows, cfg)
    return 0


def cmd_bench(args) -> int:
    # refinement only handles unit amplitudes, so both algorithms see that instance
    sig = Signal.unit(signal_from_dict(_load_json(args.signal)).locations)
    delta = args.delta if args.delta is not None else min_separation(sig)
    cfg = RefineConfig.for_separation(delta, args.eps, sig.k)
    n = max(args.n or 0, cfg.cutoff, sig.k)
    meas = measure(sig, n)

    def best_time(fn):
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            out = fn()
            times.append(time.perf_counter() - t0)
        return min(times), out

    t_mpm, res_mpm = best_time(lambda: recover(meas, PencilConfig(sig.k)))
    t_ref, res_ref = best_time(lambda: recover_refine(meas, cfg))
    out = {
        "half_width": n,
        "mpm": {"seconds": t_mpm, "matching_distance": matching_distance(res_mpm.spikes, sig)},
        "refine": {"seconds": t_ref, "oracle_calls": res_ref.oracle_calls, "call_ceiling": cfg.call_ceiling(),
                   "location_distance": location_matching_distance(res_ref.locations, sig.locations),
                   "trace": res_ref.trace, **cfg.as_dict()},
        "config": _config(args, "bench"),
    }
    write_json(args.output, out)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specres", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--output", "-o", default=None, help="output path (default: stdout)")
        return sp

    sp = add("generate", cmd_generate, "random separated signal")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--unit", action="store_true", help="unit amplitudes instead of complex normal")

    sp = add("measure", cmd_measure, "noisy low-frequency measurements of a signal")
    sp.add_argument("--signal", required=True)
    sp.add_argument("--n", type=int, required=True, help="half-width: indices -n..n")
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.add_argument("--bounded", type=float, default=None, help="fixed per-entry noise modulus instead of Gaussian")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("cond", cmd_cond, "Vandermonde condition number and bound")
    sp.add_argument("--signal", required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--indexing", choices=(FROM_ZERO, CENTERED), default=FROM_ZERO)
    sp.add_argument("--extended", action="store_true", help="multiprecision singular values")

    sp = add("lower-bound", cmd_lower_bound, "exponentially ill-conditioned instance")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--epsilon", type=float, required=True)

    sp = add("recover-mpm", cmd_recover_mpm, "modified matrix pencil recovery")
    sp.add_argument("--input", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--pencil-order", type=int, default=None)
    sp.add_argument("--truth", default=None, help="ground-truth signal for error diagnostics")

    sp = add("recover-refine", cmd_recover_refine, "Fejer-preconditioned iterative refinement")
    sp.add_argument("--input", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--r", type=int, default=None, help="kernel power (default: from delta and eps)")
    sp.add_argument("--noise-bound", type=float, default=None)

    sp = add("phase-sweep", cmd_phase_sweep, "condition numbers over a (delta, m) grid")
    sp.add_argument("--deltas", required=True)
    sp.add_argument("--delta-count", type=int, default=None)
    sp.add_argument("--ms", required=True)
    sp.add_argument("--m-count", type=int, default=None)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--indexing", choices=(FROM_ZERO, CENTERED), default=FROM_ZERO)

    sp = add("noise-sweep", cmd_noise_sweep, "recovery error versus noise level")
    sp.add_argument("--signal", required=True)
    sp.add_argument("--sigmas", required=True)
    sp.add_argument("--count", type=int, default=None)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--algo", choices=("mpm", "refine"), required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--pencil-order", type=int, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--eps", type=float, default=1e-3)

    sp = add("bench", cmd_bench, "wall-clock of both recovery algorithms on one instance")
    sp.add_argument("--signal", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--repeats", type=int, default=3)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except SpecresError as exc:
        payload = {"error": getattr(exc, "code", "domain_error"), "message": str(exc), "command": args.command}
        sys.stderr.write(dumps_json(payload))
        return 1
    except ValueError as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
