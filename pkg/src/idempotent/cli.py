"""Command-line interface: ``idempotent <command> [options]``.

Commands read JSON (``--in``, ``-`` or absent for stdin) and write JSON or
CSV (``--out``, stdout when absent).  Every JSON output carries the fully
resolved configuration.  Exit codes: 0 success, 1 verification failure,
2 input error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from .bohr import BohrSystem, bohr_from_json, bohr_to_json, dimension_interval
from .connectivity import DEFAULT_C_MEL, Mode, is_arithmetically_connected
from .continuity import quantitative_continuity
from .decompose import (
    ORACLE_LIMIT,
    DecompositionResult,
    Strategy,
    decompose_paper,
    oracle_min_l1,
    subgroup_greedy,
    verify_decomposition,
)
from .errors import IdempotentError, InclusionFailed, InvariantBroken
from .fourier import (
    CosetCombination,
    DenseFunction,
    dft,
    function_from_json,
    function_to_json,
    indicator,
    spectrum_to_json,
    wiener_norm,
)
from .freiman import DEFAULT_C_CHANG, freiman_bohr
from .groups import Coset, FiniteAbelianGroup, closure, parse_group_spec, subgroup_from_set
from .measures import invariant_on_bohr, measure_to_json

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2
COMMANDS = ("norm", "dft", "bohr", "measure", "pipeline", "connectivity", "decompose", "experiment-ap", "verify")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    group: str | None = None
    input: str | None = None
    output: str | None = None
    log: str | None = None
    seed: int = 0
    strategy: str = "oracle"
    epsilon: float = 0.0
    p_norm: float = 2.0
    threads: int = 1
    timestamp: bool = True
    oracle_limit: int = ORACLE_LIMIT
    budget: int = 10_000_000
    c_mel: float = DEFAULT_C_MEL
    c_cs: float = 64
    c_chang: float = DEFAULT_C_CHANG
    stage: str = "freiman"
    r: int = 3
    s: int = 1
    delta: float = 0.25
    kappa: float = 0.125
    etas: list = field(default_factory=lambda: ["1", "1/2", "1/4"])
    m: int = 2
    l: int = 2
    mode: str = "exhaustive"
    trials: int = 200
    primes: list = field(default_factory=lambda: [13, 17])
    lengths: list | None = None

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_to_jsonable(v) for v in obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _read_json(cfg: RunConfig) -> dict:
    try:
        if cfg.input in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(cfg.input) as fh:
                text = fh.read()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read input: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("input must be a JSON object")
    return data


def _group(cfg: RunConfig, data: dict) -> FiniteAbelianGroup:
    if "group" in data:
        factors = data["group"]
        if isinstance(factors, str):
            return parse_group_spec(factors)
        return FiniteAbelianGroup(tuple(int(n) for n in factors))
    if cfg.group is None:
        raise InputError("no group given (use --group or a 'group' field)")
    return parse_group_spec(cfg.group)


def _element(G: FiniteAbelianGroup, x) -> int:
    if isinstance(x, int):
        if not 0 <= x < G.order:
            raise InputError(f"element index {x} out of range")
        return x
    if isinstance(x, list) and len(x) == len(G.factors) and all(isinstance(c, int) for c in x):
        return G.index(tuple(x))
    raise InputError(f"malformed element {x!r}")


def _set(G: FiniteAbelianGroup, data: dict, key: str = "set") -> frozenset[int]:
    raw = data.get(key)
    if not isinstance(raw, list):
        raise InputError(f"missing list field {key!r}")
    return frozenset(_element(G, x) for x in raw)


def _function(cfg: RunConfig, data: dict) -> DenseFunction:
    G = _group(cfg, data)
    if "values" in data:
        return function_from_json({"group": list(G.factors), "values": data["values"]})
    if "set" in data:
        return indicator(G, _set(G, data))
    raise InputError("function input needs 'values' or 'set'")


def _bohr(G: FiniteAbelianGroup, data: dict) -> BohrSystem:
    if "characters" not in data or "widths" not in data:
        raise InputError("Bohr input needs 'characters' and 'widths'")
    chars = [[c] if isinstance(c, int) else c for c in data["characters"]]
    B = bohr_from_json({"characters": chars, "widths": data["widths"]}, G)
    if any(not 0 < w for w in B.widths):
        raise InputError("widths must be positive")
    return B


def _decomposition_from_json(G: FiniteAbelianGroup, data: dict) -> DecompositionResult:
    terms = []
    for t in data["terms"]:
        gens = [_element(G, g) for g in t["subgroup_generators"]]
        H = subgroup_from_set(G, closure(G, gens))
        terms.append((Coset(H, _element(G, t["coset_rep"])), int(t["coefficient"])))
    return DecompositionResult(
        G,
        CosetCombination(tuple(terms)),
        float(data.get("residual_sup", 0.0)),
        data.get("rounds", []),
        Strategy(data.get("strategy", "ORACLE")),
    )


def _emit(cfg: RunConfig, result: dict) -> None:
    payload = {"command": cfg.command, "config": cfg.to_json(), "result": result}
    if cfg.timestamp:
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    text = json.dumps(_to_jsonable(payload), indent=2, sort_keys=True) + "\n"
    _write(cfg.output, text)


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_norm(cfg: RunConfig) -> int:
    f = _function(cfg, _read_json(cfg))
    _emit(
        cfg,
        {"wiener_norm": wiener_norm(f), "sup_norm": f.sup_norm(), "is_integer_valued": bool(f.is_integer_valued())},
    )
    return EXIT_OK


def cmd_dft(cfg: RunConfig) -> int:
    f = _function(cfg, _read_json(cfg))
    _emit(cfg, spectrum_to_json(dft(f)))
    return EXIT_OK


def _etas(cfg: RunConfig) -> list[Fraction]:
    try:
        etas = [Fraction(str(e)) for e in cfg.etas]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad eta list {cfg.etas!r}") from exc
    if any(not 0 < e <= 1 for e in etas):
        raise InputError("every eta must lie in (0, 1]")
    return etas


def cmd_bohr(cfg: RunConfig) -> int:
    data = _read_json(cfg)
    G = _group(cfg, data)
    B = _bohr(G, data)
    levels = [{"eta": str(e), "size": len(B.bohr_set(e)), "members": sorted(B.bohr_set(e))} for e in _etas(cfg)]
    lo, hi = dimension_interval(B)
    _emit(cfg, {"bohr": bohr_to_json(B), "rank": len(B.characters), "levels": levels, "dimension_interval": [lo, hi]})
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    data = _read_json(cfg)
    G = _group(cfg, data)
    B = _bohr(G, data)
    inv = invariant_on_bohr(B)
    result = {
        "lam": str(inv.lam),
        "kappa": str(inv.kappa),
        "K": inv.K,
        "measure": measure_to_json(inv.measure),
        "certificate_valid": inv.certificate.valid,
    }
    _emit(cfg, result)
    return EXIT_OK if inv.certificate.valid else EXIT_VERIFY


def _log_lines(cfg: RunConfig, entries: list[dict]) -> None:
    text = "".join(json.dumps(_to_jsonable(e), sort_keys=True) + "\n" for e in entries)
    if cfg.log is not None:
        _write(cfg.log, text)
    else:
        sys.stderr.write(text)


def cmd_pipeline(cfg: RunConfig) -> int:
    data = _read_json(cfg)
    G = _group(cfg, data)
    if cfg.stage == "freiman":
        A = _set(G, data)
        if not A:
            raise InputError("A must be non-empty")
        try:
            cert = freiman_bohr(A, G, r=cfg.r, s=cfg.s, seed=cfg.seed, c_cs=cfg.c_cs, c_chang=cfg.c_chang)
        except (InclusionFailed, InvariantBroken) as exc:
            _emit(cfg, {"verified": False, "error": str(exc)})
            return EXIT_VERIFY
        checks = cert.verify()
        _log_lines(cfg, [{"stage": k, **v} if isinstance(v, dict) else {"stage": k, "value": v} for k, v in cert.stages.items()])
        _emit(cfg, {"verified": all(checks.values()), "checks": checks, "certificate": cert.to_json()})
        return EXIT_OK if all(checks.values()) else EXIT_VERIFY
    if cfg.stage == "continuity":
        f = _function(cfg, data)
        B = _bohr(G, data)
        A = _set(G, data, "A") if "A" in data else f.support()
        try:
            res = quantitative_continuity(A, B, f, cfg.delta, cfg.kappa, cfg.p_norm, seed=cfg.seed, c_cs=cfg.c_cs)
        except (InclusionFailed, InvariantBroken) as exc:
            _emit(cfg, {"verified": False, "error": str(exc)})
            return EXIT_VERIFY
        ok = res.measured_sup <= res.bound * (1 + 1e-12)
        _log_lines(cfg, res.rounds)
        _emit(
            cfg,
            {
                "verified": ok,
                "bohr": bohr_to_json(res.bohr),
                "mu": measure_to_json(res.mu),
                "nu": measure_to_json(res.nu),
                "measured_sup": res.measured_sup,
                "bound": res.bound,
            },
        )
        return EXIT_OK if ok else EXIT_VERIFY
    raise InputError(f"unknown stage {cfg.stage!r}")


def cmd_connectivity(cfg: RunConfig) -> int:
    data = _read_json(cfg)
    G = _group(cfg, data)
    A = _set(G, data)
    try:
        mode = Mode(cfg.mode.upper())
    except ValueError as exc:
        raise InputError(f"unknown mode {cfg.mode!r}") from exc
    verdict = is_arithmetically_connected(A, cfg.m, cfg.l, G, mode, seed=cfg.seed, trials=cfg.trials, budget=cfg.budget)
    _emit(cfg, verdict.to_json(G))
    return EXIT_OK


def _decompose(f: DenseFunction, cfg: RunConfig) -> DecompositionResult:
    if cfg.strategy == "oracle":
        return oracle_min_l1(f, cfg.oracle_limit)
    if cfg.strategy == "greedy":
        return subgroup_greedy(f)
    if cfg.strategy == "paper":
        return decompose_paper(f, cfg.epsilon, seed=cfg.seed, c_mel=cfg.c_mel, c_cs=cfg.c_cs, oracle_limit=cfg.oracle_limit)
    raise InputError(f"unknown strategy {cfg.strategy!r}")


def cmd_decompose(cfg: RunConfig) -> int:
    f = _function(cfg, _read_json(cfg))
    if cfg.strategy != "paper" and not f.is_integer_valued():
        raise InputError("oracle and greedy strategies need an integer-valued function")
    result = _decompose(f, cfg)
    verdict = verify_decomposition(f, result, cfg.epsilon)
    out = result.to_json()
    out["verified"] = verdict.ok
    out["wiener_norm"] = verdict.wiener_norm
    _emit(cfg, out)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_verify(cfg: RunConfig) -> int:
    data = _read_json(cfg)
    if "function" not in data or "decomposition" not in data:
        raise InputError("verify input needs 'function' and 'decomposition'")
    f = _function(cfg, data["function"])
    try:
        result = _decomposition_from_json(f.group, data["decomposition"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed decomposition: {exc}") from exc
    verdict = verify_decomposition(f, result, cfg.epsilon)
    _emit(cfg, dataclasses.asdict(verdict))
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def _ap_row(p: int, L: int, limit: int) -> dict:
    G = FiniteAbelianGroup((p,))
    f = indicator(G, range(L))
    norm = wiener_norm(f)
    if p <= limit:
        weight, source = oracle_min_l1(f, limit).l1_weight, "oracle"
    else:
        weight, source = subgroup_greedy(f).l1_weight, "greedy"
    return {
        "p": p,
        "L": L,
        "wiener_norm": f"{norm:.12g}",
        "weight": weight,
        "weight_source": source,
        "closed_form": min(L, p - L + 1),
        "norm_over_log": f"{norm / math.log(L + 1):.6g}",
    }


def cmd_experiment_ap(cfg: RunConfig) -> int:
    jobs = []
    for p in cfg.primes:
        if not isinstance(p, int) or not _is_prime(p):
            raise InputError(f"{p!r} is not a prime")
        lengths = cfg.lengths if cfg.lengths is not None else range(1, p)
        for L in lengths:
            if not isinstance(L, int) or not 1 <= L < p:
                raise InputError(f"length {L!r} outside [1, {p})")
            jobs.append((p, L))
    with ThreadPoolExecutor(max_workers=max(1, cfg.threads)) as pool:
        rows = list(pool.map(lambda job: _ap_row(*job, cfg.oracle_limit), jobs))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(_AP_FIELDS), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    _write(cfg.output, buf.getvalue())
    # CSV has no room for metadata, so the configuration goes alongside it.
    sidecar = json.dumps({"command": cfg.command, "config": _to_jsonable(cfg.to_json())}, sort_keys=True, indent=2) + "\n"
    if cfg.output in (None, "-"):
        sys.stderr.write(sidecar)
    else:
        _write(cfg.output + ".config.json", sidecar)
    mismatched = [r for r in rows if r["weight_source"] == "oracle" and r["weight"] != r["closed_form"]]
    return EXIT_VERIFY if mismatched else EXIT_OK


_AP_FIELDS = ("p", "L", "wiener_norm", "weight", "weight_source", "closed_form", "norm_over_log")

HANDLERS = {
    "norm": cmd_norm,
    "dft": cmd_dft,
    "bohr": cmd_bohr,
    "measure": cmd_measure,
    "pipeline": cmd_pipeline,
    "connectivity": cmd_connectivity,
    "decompose": cmd_decompose,
    "experiment-ap": cmd_experiment_ap,
    "verify": cmd_verify,
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idempotent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        # Defaults stay None so config-file values are only overridden by explicit flags.
        p.add_argument("--group")
        p.add_argument("--in", dest="input")
        p.add_argument("--out", dest="output")
        p.add_argument("--log")
        p.add_argument("--seed", type=int)
        p.add_argument("--strategy", choices=["oracle", "paper", "greedy"])
        p.add_argument("--epsilon", type=float)
        p.add_argument("--p-norm", dest="p_norm", type=float)
        p.add_argument("--threads", type=int)
        p.add_argument("--no-timestamp", dest="timestamp", action="store_const", const=False)
        p.add_argument("--config")
        p.add_argument("--oracle-limit", dest="oracle_limit", type=int)
        p.add_argument("--stage", choices=["freiman", "continuity"])
        p.add_argument("--delta", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--etas", type=lambda s: s.split(","))
        p.add_argument("--m", type=int)
        p.add_argument("--l", type=int)
        p.add_argument("--mode", choices=["exhaustive", "sampled"])
        p.add_argument("--trials", type=int)
        p.add_argument("--primes", type=_int_list)
        p.add_argument("--lengths", type=_int_list)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.config:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        if not isinstance(overrides, dict):
            raise InputError("config must be a JSON object")
        unknown = set(overrides) - (RunConfig.keys() - {"command"})
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        for k, v in overrides.items():
            setattr(cfg, k, v)
    for k, v in vars(args).items():
        if k not in ("command", "config") and v is not None:
            setattr(cfg, k, v)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except (InclusionFailed, InvariantBroken) as exc:
        sys.stderr.write(f"verification failed: {exc}\n")
        return EXIT_VERIFY
    except (InputError, ValueError, KeyError, TypeError, IdempotentError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
