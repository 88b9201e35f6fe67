"""Command-line surface: reproducible experiments with JSON/CSV artifacts.

Exit codes: 0 success, 2 configuration error, 3 resource-cap refusal.
Identical configuration and seed produce byte-identical JSON except for
the ``wall_time_s`` field.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import model as model_mod
from . import primes as primes_mod
from . import sieve_check as sieve_mod
from .errors import DivisorCapacityError, EnumerationCapError
from .gap_counter import GapParameters, segmented_sweep
from .stats import normalized_moment_report

TABLE_LIMIT_CAP = 2**31

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REFUSED = 3


@dataclass
class ExperimentConfig:
    """Parsed experiment description; one instance per CLI invocation."""

    command: str
    n: int = 0
    N: int = 0
    z: float = 0.0
    r_max: int = 4
    cutoff_policy: str = "corrected"
    seed: int | None = None
    trials: int = 0
    segment_size: int = 1 << 16
    threads: int | None = None
    output: str | None = None
    fmt: str = "json"
    input: str | None = None
    primes: tuple[int, ...] = field(default_factory=tuple)
    M: int = 0
    table_limit: int | None = None
    shift: float | None = None


def cutoff_for(policy: str, n: int) -> int:
    """Truncation cutoff N(n) for a named policy.

    "full" never truncates; "paper" is n^(1/log log n); "corrected" is
    n^(1/log log log n); "fixed:K" pins the cutoff to K.
    """
    if policy == "full":
        return n
    if policy == "paper":
        lnn = math.log(n)
        if math.log(lnn) <= 0:
            raise ValueError("policy 'paper' needs log log n > 0 (n >= 3)")
        return max(2, int(math.exp(lnn / math.log(lnn))))
    if policy == "corrected":
        lnn = math.log(n)
        if math.log(lnn) <= 1:
            raise ValueError("policy 'corrected' needs log log log n > 0 (n >= 16)")
        return max(2, int(math.exp(lnn / math.log(math.log(lnn)))))
    if policy.startswith("fixed:"):
        k = int(policy.split(":", 1)[1])
        if k < 2:
            raise ValueError("fixed cutoff must be >= 2")
        return k
    raise ValueError(f"unknown cutoff policy {policy!r}")


def default_shift(z: float, n: int) -> float:
    """Centering constant used during sweeps: e^-z * log log n."""
    return math.exp(-z) * math.log(math.log(n))


def _auto_table_limit(N: int, params: GapParameters, override: int | None) -> int:
    if override is not None:
        if override > TABLE_LIMIT_CAP:
            raise EnumerationCapError(f"table limit {override} exceeds cap {TABLE_LIMIT_CAP}")
        return override
    limit = int(math.floor(math.exp(params.exp_z * math.log(N)))) + 16
    if limit > TABLE_LIMIT_CAP:
        raise EnumerationCapError(
            f"model at N={N}, z={params.z} needs a table to {limit}, past cap {TABLE_LIMIT_CAP}"
        )
    return max(limit, N + 1)


def _threads(config: ExperimentConfig) -> int:
    return config.threads if config.threads else (os.cpu_count() or 1)


def _run_sweep(config: ExperimentConfig) -> dict:
    if config.n < 2:
        raise ValueError("sweep needs n >= 2")
    params = GapParameters(config.z)
    cutoff = cutoff_for(config.cutoff_policy, config.n)
    shift = config.shift if config.shift is not None else default_shift(config.z, config.n)
    t0 = time.perf_counter()
    acc = segmented_sweep(
        config.n,
        params,
        cutoff=cutoff,
        r_max=config.r_max,
        shift=shift,
        segment_size=config.segment_size,
        threads=_threads(config),
    )
    return {
        "kind": "sweep",
        "n": config.n,
        "z": config.z,
        "cutoff": min(cutoff, config.n),
        "cutoff_policy": config.cutoff_policy,
        "shift": shift,
        "r_max": config.r_max,
        "count": acc.count,
        "power_sums": acc.power_sums,
        "wall_time_s": time.perf_counter() - t0,
    }


def _run_model_exact(config: ExperimentConfig) -> dict:
    if config.N < 2:
        raise ValueError("model-exact needs N >= 2")
    params = GapParameters(config.z)
    limit = _auto_table_limit(config.N, params, config.table_limit)
    t0 = time.perf_counter()
    table = primes_mod.build_prime_table(limit)
    pred = model_mod.model_mean_and_variance(config.N, params, table)
    return {
        "kind": "model-exact",
        "N": config.N,
        "z": config.z,
        "c_N": pred.c_N,
        "s2_N": pred.s2_N,
        "asym_mean": pred.asym_mean,
        "asym_var": pred.asym_var,
        "prime_count": int(len(pred.prime_list)),
        "table_limit": limit,
        "wall_time_s": time.perf_counter() - t0,
    }


def _run_model_mc(config: ExperimentConfig) -> dict:
    if config.N < 2:
        raise ValueError("model-mc needs N >= 2")
    if config.seed is None:
        raise ValueError("model-mc requires an explicit --seed")
    if config.trials < 1:
        raise ValueError("model-mc needs --trials >= 1")
    params = GapParameters(config.z)
    limit = _auto_table_limit(config.N, params, config.table_limit)
    t0 = time.perf_counter()
    table = primes_mod.build_prime_table(limit)
    pred = model_mod.model_mean_and_variance(config.N, params, table)
    result = model_mod.monte_carlo(
        config.N,
        params,
        table,
        seed=config.seed,
        trials=config.trials,
        r_max=max(config.r_max, 2),
        shift=pred.c_N,
        threads=_threads(config),
    )
    acc = result.accumulator
    mean = pred.c_N + acc.centered_moment(1)
    variance = acc.centered_moment(2) - acc.centered_moment(1) ** 2
    return {
        "kind": "model-mc",
        "N": config.N,
        "z": config.z,
        "seed": config.seed,
        "trials": config.trials,
        "shift": pred.c_N,
        "c_N": pred.c_N,
        "s2_N": pred.s2_N,
        "count": acc.count,
        "power_sums": acc.power_sums,
        "sample_mean": mean,
        "sample_variance": variance,
        "histogram": result.histogram.tolist(),
        "wall_time_s": time.perf_counter() - t0,
    }


def _run_oracle(config: ExperimentConfig) -> dict:
    if config.N < 2:
        raise ValueError("oracle needs N >= 2")
    params = GapParameters(config.z)
    M = config.M or model_mod.minimal_enumeration_bound(config.N, params)
    t0 = time.perf_counter()
    moments = model_mod.exact_moments_by_enumeration(M, config.N, params, config.r_max)
    exact = isinstance(moments[0], Fraction)
    return {
        "kind": "oracle",
        "N": config.N,
        "M": M,
        "z": config.z,
        "r_max": config.r_max,
        "exact": exact,
        "central_moments": [float(m) for m in moments],
        "central_moments_exact": [str(m) for m in moments] if exact else None,
        "wall_time_s": time.perf_counter() - t0,
    }


def _run_stein(config: ExperimentConfig) -> dict:
    if config.N < 2:
        raise ValueError("stein needs N >= 2")
    params = GapParameters(config.z)
    t0 = time.perf_counter()
    report = model_mod.stein_diagnostics(config.N, params)
    return {
        "kind": "stein",
        "N": config.N,
        "z": config.z,
        "psi1": report.psi1,
        "psi2": report.psi2,
        "psi3": report.psi3,
        "max_cdf_deviation": report.max_cdf_deviation,
        "bound": report.bound,
        "holds_everywhere": report.holds_everywhere,
        "c_N": float(report.c_N),
        "s2_N": float(report.s2_N),
        "wall_time_s": time.perf_counter() - t0,
    }


def _run_sieve_check(config: ExperimentConfig) -> dict:
    if not config.primes:
        raise ValueError("sieve-check needs --primes")
    if config.n < 1:
        raise ValueError("sieve-check needs n >= 1")
    query = sieve_mod.JointDeltaQuery(primes=config.primes, z=config.z, n=config.n)
    params = query.params
    t0 = time.perf_counter()
    bound = int(math.floor(math.exp(params.exp_z * math.log(config.primes[-1])))) + 16
    table = primes_mod.build_prime_table(max(bound, config.primes[-1] + 1))
    predicted = sieve_mod.joint_predicted(query, table)
    empirical = sieve_mod.joint_empirical(query)
    emp_f = float(empirical)
    abs_err = abs(emp_f - predicted)
    return {
        "kind": "sieve-check",
        "primes": list(config.primes),
        "z": config.z,
        "n": config.n,
        "empirical": emp_f,
        "empirical_exact": f"{empirical.numerator}/{empirical.denominator}",
        "predicted": predicted,
        "abs_error": abs_err,
        "rel_error": abs_err / predicted if predicted else (0.0 if emp_f == 0 else math.inf),
        "wall_time_s": time.perf_counter() - t0,
    }


def _run_report(config: ExperimentConfig) -> dict:
    if not config.input:
        raise ValueError("report needs --input pointing at a sweep JSON file")
    with open(config.input) as fh:
        sweep = json.load(fh)
    if sweep.get("kind") != "sweep":
        raise ValueError("report consumes 'sweep' artifacts")
    n, z = sweep["n"], sweep["z"]
    from .gap_counter import MomentAccumulator
    from .stats import recenter

    acc = MomentAccumulator(
        shift=sweep["shift"], r_max=sweep["r_max"], count=sweep["count"],
        power_sums=list(sweep["power_sums"]),
    )
    acc = recenter(acc, default_shift(z, n))
    emz = math.exp(-z)
    normalizer = (1.0 - 2.0 * z * emz) * emz * math.log(math.log(n))
    rows = normalized_moment_report(acc, n, z, normalizer)
    return {
        "kind": "report",
        "n": n,
        "z": z,
        "normalizer": normalizer,
        "rows": [
            {
                "r": row.r,
                "normalized_moment": row.normalized,
                "gaussian_reference": row.reference,
                "abs_error": row.abs_error,
            }
            for row in rows
        ],
        "wall_time_s": 0.0,
    }


_RUNNERS = {
    "sweep": _run_sweep,
    "model-exact": _run_model_exact,
    "model-mc": _run_model_mc,
    "oracle": _run_oracle,
    "stein": _run_stein,
    "sieve-check": _run_sieve_check,
    "report": _run_report,
}


def _render_csv(artifact: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    if artifact["kind"] == "sweep":
        writer.writerow(["r", "centered_moment"])
        count = artifact["count"]
        for r, ps in enumerate(artifact["power_sums"]):
            writer.writerow([r, repr(ps / count)])
    elif artifact["kind"] == "report":
        writer.writerow(
            ["n", "z", "r", "normalized_moment", "gaussian_reference", "abs_error"]
        )
        for row in artifact["rows"]:
            writer.writerow(
                [
                    artifact["n"],
                    artifact["z"],
                    row["r"],
                    repr(row["normalized_moment"]),
                    repr(row["gaussian_reference"]),
                    repr(row["abs_error"]),
                ]
            )
    elif artifact["kind"] == "sieve-check":
        writer.writerow(
            ["primes", "z", "n", "empirical", "predicted", "abs_error", "rel_error"]
        )
        writer.writerow(
            [
                " ".join(str(p) for p in artifact["primes"]),
                artifact["z"],
                artifact["n"],
                repr(artifact["empirical"]),
                repr(artifact["predicted"]),
                repr(artifact["abs_error"]),
                repr(artifact["rel_error"]),
            ]
        )
    else:
        raise ValueError(f"no CSV rendering for kind {artifact['kind']!r}")
    return buf.getvalue()


def render_artifact(artifact: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(artifact, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(artifact)
    raise ValueError(f"unknown format {fmt!r}")


def run(config: ExperimentConfig) -> tuple[int, dict | None]:
    """Dispatch a config; returns (exit status, artifact or None on error).

    Error records go to stderr as a single JSON line.
    """
    runner = _RUNNERS.get(config.command)
    try:
        if runner is None:
            raise ValueError(f"unknown command {config.command!r}")
        artifact = runner(config)
    except (EnumerationCapError, DivisorCapacityError) as exc:
        _emit_error(exc)
        return EXIT_REFUSED, None
    except (ValueError, OSError) as exc:
        _emit_error(exc)
        return EXIT_CONFIG, None
    text = render_artifact(artifact, config.fmt)
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK, artifact


def _emit_error(exc: Exception) -> None:
    record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primegaps",
        description="Prime-divisor gap counting: sweeps, model, and diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_z=True):
        if needs_z:
            p.add_argument("--z", type=float, default=0.0, help="gap threshold (>= 0)")
        p.add_argument("--output", type=str, default=None, help="output path (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--threads", type=int, default=None, help="worker cap (default: cores)")

    p = sub.add_parser("sweep", help="sweep m in [1, n] and stream centered moments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r-max", dest="r_max", type=int, default=4)
    p.add_argument(
        "--cutoff-policy",
        dest="cutoff_policy",
        default="corrected",
        help="full | paper | corrected | fixed:K",
    )
    p.add_argument("--shift", type=float, default=None, help="centering constant override")
    p.add_argument("--segment-size", dest="segment_size", type=int, default=1 << 16)
    common(p)

    p = sub.add_parser("model-exact", help="exact model mean/variance at cutoff N")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--table-limit", dest="table_limit", type=int, default=None)
    common(p)

    p = sub.add_parser("model-mc", help="seeded Monte Carlo of the model sum")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--r-max", dest="r_max", type=int, default=2)
    p.add_argument("--table-limit", dest="table_limit", type=int, default=None)
    common(p)

    p = sub.add_parser("oracle", help="brute-force outcome enumeration moments")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, default=0, help="coin bound (default: minimal legal)")
    p.add_argument("--r-max", dest="r_max", type=int, default=2)
    common(p)

    p = sub.add_parser("stein", help="normal-approximation error functionals at N")
    p.add_argument("--N", type=int, required=True)
    common(p)

    p = sub.add_parser("sieve-check", help="exact count vs predicted product")
    p.add_argument("--primes", type=str, required=True, help="comma-separated, e.g. 2,11")
    p.add_argument("--n", type=int, required=True)
    common(p)

    p = sub.add_parser("report", help="normalized-moment CSV from a sweep JSON")
    p.add_argument("--input", type=str, required=True)
    common(p, needs_z=False)
    return parser


def config_from_args(argv=None) -> ExperimentConfig:
    args = _parser().parse_args(argv)
    primes = ()
    if getattr(args, "primes", None):
        primes = tuple(int(tok) for tok in args.primes.split(",") if tok.strip())
    return ExperimentConfig(
        command=args.command,
        n=getattr(args, "n", 0),
        N=getattr(args, "N", 0),
        z=getattr(args, "z", 0.0),
        r_max=getattr(args, "r_max", 4),
        cutoff_policy=getattr(args, "cutoff_policy", "corrected"),
        seed=getattr(args, "seed", None),
        trials=getattr(args, "trials", 0),
        segment_size=getattr(args, "segment_size", 1 << 16),
        threads=args.threads,
        output=args.output,
        fmt=args.fmt,
        input=getattr(args, "input", None),
        primes=primes,
        M=getattr(args, "M", 0),
        table_limit=getattr(args, "table_limit", None),
        shift=getattr(args, "shift", None),
    )


def main(argv=None) -> int:
    try:
        config = config_from_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    status, _ = run(config)
    return status


if __name__ == "__main__":
    sys.exit(main())
