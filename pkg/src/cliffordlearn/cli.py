"""Command-line experiment driver.

Every run embeds its resolved config in the JSON report.  Trial ``i`` draws
from ``SeedSequence(seed, spawn_key=(i,))`` so reports do not depend on the
worker count.  Wall-clock numbers appear only with ``--timing``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import cltest, learn, metric, oracle
from .densesim import parse_gate_expression, random_unitary, tableau_unitary
from .gf2pauli import DenseLimitError, PauliOperator, PauliParseError, format_pauli, parse_pauli
from .tableau import (
    CliffordTableau,
    clifford_class_count,
    clifford_group_size,
    compose,
    conjugate_pauli,
    invert,
    query_lower_bound,
    random_clifford,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ExperimentConfig:
    command: str
    oracle: str | None = None
    n: int | None = None
    k: int = 2
    epsilon: float | None = None
    delta: float = 0.1
    eta: float | None = None
    trials: int = 1
    seed: int = 0
    workers: int = 1
    output: str | None = None
    dense_limit: int | None = None
    expect: str | None = None
    sizes: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("workers")  # never affects results
        out.pop("output")
        return out


# ----------------------------------------------------------------------------
# oracle construction


@dataclass
class Instance:
    handle: oracle.OracleHandle
    truth_tableau: CliffordTableau | None = None
    truth_matrix: np.ndarray | None = None
    info: dict = field(default_factory=dict)


def _kv(body: str, path: str) -> dict[str, str]:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise ConfigError(path, f"expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _int(d: dict, key: str, path: str, default=None) -> int:
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing")
        return default
    try:
        return int(d[key])
    except ValueError:
        raise ConfigError(f"{path}.{key}", f"not an integer: {d[key]!r}") from None


def build_instance(spec: str, seed_seq: np.random.SeedSequence) -> Instance:
    """Resolve an ``--oracle`` string into a fresh handle for one trial."""
    path = "oracle"
    kind, _, body = spec.partition(":")
    if kind == "random":
        opts = _kv(body, path)
        t = random_clifford(_int(opts, "n", path), np.random.default_rng(seed_seq))
        return Instance(oracle.tableau_oracle(t), truth_tableau=t)
    if kind == "gate":
        try:
            u = parse_gate_expression(body)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path}.gate", str(exc)) from None
        return Instance(oracle.dense_oracle(u), truth_matrix=np.array(u.entries))
    if kind == "pauli":
        try:
            p = parse_pauli(body)
        except PauliParseError as exc:
            raise ConfigError(f"{path}.pauli", str(exc)) from None
        return Instance(oracle.pauli_oracle(p), info={"pauli": format_pauli(p.sign_free())})
    if kind == "perturbed":
        opts = _kv(body, path)
        n = _int(opts, "n", path)
        try:
            eps = float(opts.get("eps", opts.get("epsilon", "")))
        except ValueError:
            raise ConfigError(f"{path}.eps", "missing or not a number") from None
        inst_seed, pert_seed = seed_seq.spawn(2)
        t = random_clifford(n, np.random.default_rng(inst_seed))
        try:
            h = oracle.make_perturbed_clifford(t, eps, np.random.default_rng(pert_seed))
        except ValueError as exc:
            raise ConfigError(f"{path}.eps", str(exc)) from None
        return Instance(h, truth_tableau=t, info={"realized_distance": h.metadata["realized_distance"]})
    file = Path(spec)
    if file.exists():
        try:
            h = oracle.oracle_from_spec(file)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}({file})", str(exc)) from None
        ch = oracle.trusted_channel(h)
        inst = Instance(h, info=dict(h.metadata))
        if isinstance(ch, CliffordTableau):
            inst.truth_tableau = ch
        elif isinstance(ch, np.ndarray):
            inst.truth_matrix = ch
        return inst
    raise ConfigError(path, f"unknown oracle {spec!r} (random:, gate:, pauli:, perturbed: or a JSON file)")


def _trial_streams(seed: int, i: int) -> tuple[np.random.SeedSequence, np.random.Generator]:
    inst, run = np.random.SeedSequence(seed, spawn_key=(i,)).spawn(2)
    return inst, np.random.default_rng(run)


def _map_trials(cfg: ExperimentConfig, fn) -> list:
    if cfg.workers <= 1:
        return [fn(i) for i in range(cfg.trials)]
    with ThreadPoolExecutor(cfg.workers) as pool:
        return list(pool.map(fn, range(cfg.trials)))


# ----------------------------------------------------------------------------
# learners


def _check_learned(kind: str, inst: Instance, learned) -> bool | None:
    """Compare against the trusted instance; None when no check is possible."""
    if kind == "pauli":
        ch = oracle.trusted_channel(inst.handle)
        return learned == ch.sign_free() if isinstance(ch, PauliOperator) else None
    if isinstance(learned, learn.ConjugationTable) and learned.level == 2:
        learned = learned.to_tableau()
    if isinstance(learned, CliffordTableau):
        if inst.truth_tableau is not None:
            return learned == inst.truth_tableau
        learned = learn.ConjugationTable.from_tableau(learned)
    if inst.truth_tableau is not None:
        target = tableau_unitary(inst.truth_tableau).entries
    elif inst.truth_matrix is not None:
        target = inst.truth_matrix
    else:
        return None
    try:
        return metric.d(learn.realize_unitary(learned), target) <= 1e-8
    except DenseLimitError:
        return None


def _learn_command(cfg: ExperimentConfig, kind: str) -> tuple[dict, bool]:
    def trial(i):
        inst_seed, rng = _trial_streams(cfg.seed, i)
        inst = build_instance(cfg.oracle, inst_seed)
        rep = learn.run_learner(kind, inst.handle, rng, k=cfg.k, epsilon=cfg.epsilon or 0.0, delta=cfg.delta)
        match = _check_learned(kind, inst, rep.learned) if rep.success else False
        rec = {"trial": i, **rep.to_json(), "match": match, **inst.info}
        if kind == "ck" and cfg.k >= 3:
            f, c = learn.nested_query_count(inst.handle.n, cfg.k)
            rec["nested_accounting"] = {"forward": f, "conjugate": c}
        return rec

    records = _map_trials(cfg, trial)
    matches = sum(1 for r in records if r["match"])
    ledger_ok = all(r["ledger_ok"] for r in records)
    summary = {
        "trials": cfg.trials,
        "successes": sum(1 for r in records if r["success"]),
        "matches": matches,
        "unchecked": sum(1 for r in records if r["match"] is None),
        "all_ledgers_ok": ledger_ok,
    }
    if kind == "approx":
        # randomized: the learner may fail with probability <= delta
        ok = ledger_ok
    else:
        ok = ledger_ok and all(r["success"] and r["match"] is not False for r in records)
    return {"summary": summary, "trials": records}, ok


# ----------------------------------------------------------------------------
# tester


def _test_command(cfg: ExperimentConfig) -> tuple[dict, bool]:
    if cfg.epsilon is None:
        raise ConfigError("epsilon", "required for test-clifford")

    def trial(i):
        inst_seed, rng = _trial_streams(cfg.seed, i)
        inst = build_instance(cfg.oracle, inst_seed)
        rec = {"trial": i, **inst.info}
        n = inst.handle.n
        if n <= 2 and cfg.expect in (cltest.CLOSE, cltest.FAR):
            cert = cltest.certify_instance(oracle.trusted_unitary(inst.handle), cfg.epsilon, cfg.expect)
            rec["certificate"] = cert.to_json()
            promise = cert.promise_holds and cert.chain_holds
        else:
            promise = None
        v = cltest.clifford_test(inst.handle, cfg.epsilon, cfg.delta, rng)
        rec.update(v.to_json())
        if promise is not True:
            rec["flags"].append("promise-unverified")
        rec["correct"] = None if cfg.expect is None else v.verdict == cfg.expect
        rec["ledger_ok"] = v.ledger == v.budget
        return rec

    records = _map_trials(cfg, trial)
    correct = sum(1 for r in records if r["correct"])
    summary = {
        "trials": cfg.trials,
        "verdicts": {
            name: sum(1 for r in records if r["verdict"] == name)
            for name in (cltest.CLOSE, cltest.FAR, cltest.FAILED_LEARN)
        },
        "correct": correct,
        "all_ledgers_ok": all(r["ledger_ok"] for r in records),
        "parameters": cltest.tester_parameters(build_instance(cfg.oracle, np.random.SeedSequence(cfg.seed)).handle.n,
                                               cfg.epsilon, cfg.delta),
    }
    ok = summary["all_ledgers_ok"] and all(r.get("certificate", {}).get("promise_holds", True) for r in records)
    return {"summary": summary, "trials": records}, ok


# ----------------------------------------------------------------------------
# budget / verify / bench


def _budget_command(cfg: ExperimentConfig) -> tuple[dict, bool]:
    n, k = cfg.n or 1, cfg.k
    rows = []
    for nn in range(1, n + 1):
        for kk in range(1, k + 1):
            t, tc = learn.query_budget(nn, kk)
            rows.append({
                "n": nn,
                "k": kk,
                "T": t,
                "T_conjugate": tc,
                "recurrence_ok": learn.query_budget_recurrence(nn, kk) == (t, tc),
                "nested": list(learn.nested_query_count(nn, kk)),
            })
    groups = [
        {
            "n": nn,
            "group_size": str(clifford_group_size(nn)),
            "class_count": str(clifford_class_count(nn)),
            "lower_bound": query_lower_bound(nn),
        }
        for nn in range(1, n + 1)
    ]
    t, tc = learn.query_budget(n, k)
    out = {
        "n": n,
        "k": k,
        "T": t,
        "T_conjugate": tc,
        "group_size": str(clifford_group_size(n)),
        "lower_bound": query_lower_bound(n),
        "query_budget": rows,
        "groups": groups,
    }
    return out, all(r["recurrence_ok"] for r in rows)


def _verify_command(cfg: ExperimentConfig) -> tuple[dict, bool]:
    n = cfg.n or 1
    if n > 2:
        raise ConfigError("n", "verify enumerates all Paulis; use n <= 2")

    def trial(i):
        _, rng = _trial_streams(cfg.seed, i)
        a = random_unitary(n, rng).entries
        b = random_unitary(n, rng).entries
        rep = metric.verify_conjugation_bounds(a, b, raise_on_violation=False)
        m = rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n))
        twirl_err = float(np.max(np.abs(metric.pauli_twirl(m) - np.trace(m) / 2**n * np.eye(2**n))))
        return rep, twirl_err

    results = _map_trials(cfg, trial)
    counts = {name: 0 for name in ("factor_two", "design_converse", "generator_bound")}
    for rep, _ in results:
        for v in rep.violations:
            counts[v] += 1
    max_twirl = max(e for _, e in results)
    ratio_two = max((r.max_conjugate_d / r.distance if r.distance > 0 else 0.0) for r, _ in results)
    gen_ratio = max(
        (r.max_conjugate_d_plus / r.max_generator_d_plus if r.max_generator_d_plus > 0 else 0.0)
        for r, _ in results
    )
    out = {
        "n": n,
        "trials": cfg.trials,
        "violations": counts,
        "max_twirl_error": max_twirl,
        "max_conj_d_over_d": ratio_two,
        "max_all_over_generator_d_plus": gen_ratio,
        "min_conj_d_plus_minus_d": min(r.max_conjugate_d_plus - r.distance for r, _ in results),
    }
    ok = sum(counts.values()) == 0 and max_twirl <= 1e-10
    return out, ok


def _bench_command(cfg: ExperimentConfig) -> tuple[dict, bool]:
    sizes = cfg.sizes or [8, 32, 128, 512]
    rows = []
    for n in sizes:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(n,)))
        a, b = random_clifford(n, rng), random_clifford(n, rng)
        paulis = [random_clifford(n, rng).x_images[0] for _ in range(16)]
        reps = max(1, cfg.trials)
        t0 = time.perf_counter()
        for _ in range(reps):
            for p in paulis:
                conjugate_pauli(a, p)
        conj_rate = reps * len(paulis) / (time.perf_counter() - t0)
        t0 = time.perf_counter()
        for _ in range(reps):
            compose(a, b)
        comp_rate = reps / (time.perf_counter() - t0)
        t0 = time.perf_counter()
        for _ in range(reps):
            invert(a)
        inv_rate = reps / (time.perf_counter() - t0)
        rows.append({"n": n, "conjugations_per_s": conj_rate, "compositions_per_s": comp_rate,
                     "inversions_per_s": inv_rate})
    return {"rows": rows}, True


# ----------------------------------------------------------------------------
# entry point


def _summary_lines(command: str, result: dict) -> list[str]:
    if command.startswith("learn"):
        s = result["summary"]
        lines = [f"{command}: {s['matches']}/{s['trials']} matched, ledgers ok: {s['all_ledgers_ok']}"]
        first = result["trials"][0]
        exp = first["expected_ledger"]
        exp_s = "n/a" if exp is None else f"({exp['forward']}, {exp['conjugate']})"
        lines.append(
            f"ledger ({first['ledger']['forward']}, {first['ledger']['conjugate']}) expected {exp_s}"
        )
        if "nested_accounting" in first:
            na = first["nested_accounting"]
            lines.append(f"nested accounting ({na['forward']}, {na['conjugate']})")
        return lines
    if command == "test-clifford":
        s = result["summary"]
        return [f"test-clifford: verdicts {s['verdicts']}, correct {s['correct']}/{s['trials']}, "
                f"ledgers ok: {s['all_ledgers_ok']}"]
    if command == "budget":
        return [
            f"n={result['n']} k={result['k']}: T={result['T']} T'={result['T_conjugate']} "
            f"group size {result['group_size']} lower bound {result['lower_bound']}"
        ]
    if command == "verify":
        return [f"verify n={result['n']} trials={result['trials']}: violations {result['violations']}, "
                f"max twirl error {result['max_twirl_error']:.3g}"]
    return [
        f"n={r['n']}: {r['conjugations_per_s']:.0f} conj/s, {r['compositions_per_s']:.0f} compose/s"
        for r in result["rows"]
    ]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cliffordlearn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, oracle_required=True):
        if oracle_required:
            sp.add_argument("--oracle", required=True,
                            help="random:n=N | gate:EXPR | pauli:+XZ | perturbed:n=N,eps=E | spec.json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--output", help="write the JSON report here")
        sp.add_argument("--json", action="store_true", help="print the JSON report")
        sp.add_argument("--timing", action="store_true", help="include wall-clock time")
        sp.add_argument("--dense-limit", type=int)

    common(sub.add_parser("learn-pauli"))
    common(sub.add_parser("learn-clifford"))
    sp = sub.add_parser("learn-ck")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp = sub.add_parser("learn-approx")
    common(sp)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--delta", type=float, default=0.1)
    sp = sub.add_parser("test-clifford")
    common(sp)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--expect", choices=[cltest.CLOSE, cltest.FAR])
    sp = sub.add_parser("budget")
    common(sp, oracle_required=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=2)
    sp = sub.add_parser("verify")
    common(sp, oracle_required=False)
    sp.add_argument("--n", type=int, default=1)
    sp = sub.add_parser("bench")
    common(sp, oracle_required=False)
    sp.add_argument("--sizes", type=lambda s: [int(v) for v in s.split(",")], default=[])
    return p


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(command=args.command)
    for name in ("oracle", "n", "k", "epsilon", "delta", "trials", "seed", "workers", "output",
                 "dense_limit", "expect", "sizes"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if cfg.trials < 1:
        raise ConfigError("trials", "must be >= 1")
    if cfg.seed < 0:
        raise ConfigError("seed", "must be non-negative")
    if not 0 < cfg.delta < 1:
        raise ConfigError("delta", "must lie in (0, 1)")
    if cfg.command in ("learn-ck", "learn-approx") and cfg.k < 1:
        raise ConfigError("k", "must be >= 1")
    return cfg


_COMMANDS = {
    "learn-pauli": lambda c: _learn_command(c, "pauli"),
    "learn-clifford": lambda c: _learn_command(c, "clifford"),
    "learn-ck": lambda c: _learn_command(c, "ck"),
    "learn-approx": lambda c: _learn_command(c, "approx"),
    "test-clifford": _test_command,
    "budget": _budget_command,
    "verify": _verify_command,
    "bench": _bench_command,
}


def run(cfg: ExperimentConfig) -> tuple[dict, bool]:
    if cfg.dense_limit is not None:
        os.environ["CLIFFORDLEARN_DENSE_LIMIT"] = str(cfg.dense_limit)
    result, ok = _COMMANDS[cfg.command](cfg)
    return {"config": cfg.to_json(), "ok": ok, "result": result}, ok


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = _config(args)
        report, ok = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (learn.PreconditionError, ValueError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    if args.timing:
        report["seconds"] = time.perf_counter() - start
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    if args.json:
        print(text)
    else:
        for line in _summary_lines(cfg.command, report["result"]):
            print(line)
        print("OK" if ok else "VIOLATION")
    return EXIT_OK if ok else EXIT_VIOLATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
