"""Experiment runner: validated JSON configs in, manifests and CSV series out.

Exit codes: 0 success, 2 configuration problem, 3 resource limit,
4 numerical failure.  Reruns of the same config and seed produce
byte-identical CSV bodies; manifests differ only in timestamps/timings.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import json
import os
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from . import __version__
from .analysis import (
    CostQuery,
    exact_ite,
    exact_ite_energy,
    gibbs_average,
    mutual_information,
    qite_measurement_count,
    spectral,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionError,
    NumericalError,
    PoolError,
    QitekitError,
    ResourceError,
)
from .hamiltonians import (
    Hamiltonian,
    energy,
    h2_from_table,
    heisenberg_1d,
    heisenberg_long_range,
    hubbard_1d_jw,
    maxcut,
    maxcut_six_vertex_instance,
    one_qubit_field,
    tfi_1d,
)
from .pauli import odd_y_count
from .qite import QiteConfig, qite_evolve
from .qlanczos import qlanczos_run
from .qmetts import MettsConfig, metts_chain
from .statevector import (
    StateVector,
    neel_state,
    plus_state,
    product_state,
    singlet_dimer_state,
    zero_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4

DEFAULT_MAX_QUBITS = 14
THREADS_ENV_VAR = "QITEKIT_THREADS"

_BOUND_TOL = 1e-9


# ---------------------------------------------------------------------------
# config loading and validation


def _schema() -> dict:
    text = resources.files("qitekit").joinpath("data/config_schema.json").read_text()
    return json.loads(text)


def load_config(path: Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    validate_config(config, origin=str(path))
    return config


def validate_config(config: dict, origin: str = "config") -> None:
    try:
        jsonschema.validate(config, _schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{origin}: at {exc.json_path}: {exc.message}") from exc
    algorithm = config["algorithm"]
    own_sections = {algorithm} & set(config)
    foreign = (
        set(config) - {"algorithm", "seed", "model", "initial_state"} - own_sections
    )
    if foreign:
        raise ConfigError(
            f"{origin}: sections {sorted(foreign)} do not belong to "
            f"algorithm {algorithm!r}"
        )
    _model_spec(config["model"])  # raises on unknown params


# one entry per runnable model: builder, required params, optional params
# with defaults, and the initial product state used when none is configured
_MODEL_TABLE = {
    "one_qubit_field": (one_qubit_field, ("alpha", "beta"), {}, "zeros"),
    "heisenberg_1d": (
        heisenberg_1d,
        ("n_qubits",),
        {"coupling": 1.0, "field": 0.0},
        "neel",
    ),
    "heisenberg_long_range": (
        heisenberg_long_range,
        ("n_qubits",),
        {"coupling": 1.0},
        "neel",
    ),
    "tfi_1d": (tfi_1d, ("n_qubits", "coupling", "field"), {}, "plus"),
    "hubbard_1d_jw": (
        hubbard_1d_jw,
        ("n_sites", "interaction"),
        {"chem_potential": 0.0, "hopping": 1.0},
        "half_filled",
    ),
    "h2_bk": (h2_from_table, ("bond_length",), {"table_path": None}, "zeros"),
    "maxcut": (maxcut, ("n_vertices", "edges"), {}, "plus"),
    "maxcut_six": (maxcut_six_vertex_instance, (), {}, "plus"),
}


def _model_spec(model_block: dict) -> Tuple:
    name = model_block["name"]
    builder, required, optional, default_state = _MODEL_TABLE[name]
    params = dict(model_block.get("params", {}))
    unknown = set(params) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"model {name!r}: unknown parameters {sorted(unknown)}")
    missing = [key for key in required if key not in params]
    if missing:
        raise ConfigError(f"model {name!r}: missing parameters {missing}")
    return builder, params, default_state


def build_model(model_block: dict) -> Hamiltonian:
    builder, params, _ = _model_spec(model_block)
    if model_block["name"] == "maxcut":
        params["edges"] = [tuple(edge) for edge in params["edges"]]
    if model_block["name"] == "h2_bk":
        params = dict(params)
        path = params.pop("table_path", None)
        return builder(params["bond_length"], path=path)
    try:
        return builder(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model {model_block['name']!r}: {exc}") from exc


def build_initial_state(config: dict, n_qubits: int, max_qubits: int) -> StateVector:
    default_state = _MODEL_TABLE[config["model"]["name"]][3]
    choice = config.get("initial_state", default_state)
    if isinstance(choice, dict):
        bits = choice["bits"]
        if len(bits) != n_qubits:
            raise ConfigError(
                f"initial_state bits length {len(bits)} != n_qubits {n_qubits}"
            )
        return product_state(bits, max_qubits)
    if choice == "zeros":
        return zero_state(n_qubits, max_qubits)
    if choice == "neel":
        return neel_state(n_qubits, max_qubits)
    if choice == "plus":
        return plus_state(n_qubits, max_qubits)
    if choice == "singlet_dimers":
        if n_qubits % 2:
            raise ConfigError("singlet_dimers initial state needs an even qubit count")
        return singlet_dimer_state(n_qubits, max_qubits)
    if choice == "half_filled":
        if n_qubits % 2:
            raise ConfigError("half_filled initial state needs an even qubit count")
        label = "".join("10" if i % 2 == 0 else "01" for i in range(n_qubits // 2))
        return product_state(label, max_qubits)
    raise ConfigError(f"unknown initial state {choice!r}")


def _qite_config(block: Optional[dict]) -> QiteConfig:
    config = QiteConfig(**(block or {}))
    config.validate()
    return config


# ---------------------------------------------------------------------------
# serialization helpers


def _fmt(value) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# per-algorithm runners


def _ground_projector(hamiltonian: Hamiltonian, max_qubits: int):
    dec = spectral(hamiltonian, max_qubits=max_qubits)
    ground = dec.evecs[:, dec.evals <= dec.evals[0] + _BOUND_TOL]
    e0 = float(dec.evals[0])
    return e0, ground


def _run_qite(config, hamiltonian, state0, rng, max_qubits):
    qite_cfg = _qite_config(config.get("qite"))
    e0, ground = _ground_projector(hamiltonian, max_qubits)

    def fid(state: StateVector) -> float:
        return float(np.sum(np.abs(ground.conj().T @ state.amplitudes) ** 2))

    fidelities = [fid(state0)]
    trajectory = qite_evolve(
        state0,
        hamiltonian,
        qite_cfg,
        rng=rng,
        on_sweep=lambda _l, state: fidelities.append(fid(state)),
    )
    rows = [
        (str(l), _fmt(beta), _fmt(e), _fmt(f))
        for l, (beta, e, f) in enumerate(
            zip(trajectory.betas, trajectory.energies, fidelities)
        )
    ]
    final = float(trajectory.energies[-1])
    scale = max(abs(e0), 1e-12)
    summary = {
        "beta_final": float(trajectory.betas[-1]),
        "energy_final": final,
        "e0_exact": e0,
        "relative_error": abs(final - e0) / scale,
        "fidelity_opt_final": fidelities[-1],
    }
    return {"qite.csv": (("sweep", "beta", "energy", "fidelity_opt"), rows)}, summary


def _run_qlanczos(config, hamiltonian, state0, rng, max_qubits):
    block = config.get("qlanczos", {})
    qite_cfg = _qite_config(block.get("qite"))
    result = qlanczos_run(
        hamiltonian,
        state0,
        qite_cfg,
        overlap_threshold=block.get("overlap_threshold", 0.95),
        eig_cutoff=block.get("eig_cutoff", 1e-14),
        rng=rng,
        ledger_noise_sigma=block.get("ledger_noise_sigma", 0.0),
    )
    e0, _ = _ground_projector(hamiltonian, max_qubits)
    rows = [
        (_fmt(b), _fmt(eq), _fmt(el), str(int(k)))
        for b, eq, el, k in zip(
            result.betas, result.e_qite, result.e_qlanczos, result.n_retained
        )
    ]
    summary = {
        "beta_final": float(result.betas[-1]),
        "e_qite_final": float(result.e_qite[-1]),
        "e_qlanczos_final": float(result.e_qlanczos[-1]),
        "e0_exact": e0,
        "n_retained_final": int(result.n_retained[-1]),
        "selected_sweeps": list(result.selected),
    }
    return {
        "qlanczos.csv": (("beta", "e_qite", "e_qlanczos", "n_retained"), rows)
    }, summary


def _run_qmetts(config, hamiltonian, state0, rng, max_qubits):
    block = config["qmetts"]
    qite_block = {"b_mode": "exact_delta0", **block.get("qite", {})}
    metts_cfg = MettsConfig(
        beta=block["beta"],
        n_samples=block["n_samples"],
        qite=_qite_config(qite_block),
        n_warmup=block.get("n_warmup", 10),
        basis_cycle=block.get("basis_cycle", "alternating"),
    )
    result = metts_chain(hamiltonian, metts_cfg, rng)
    rows = [
        (str(s.index), s.start_label, _fmt(s.value)) for s in result.samples
    ]
    reference = gibbs_average(hamiltonian, metts_cfg.beta, max_qubits=max_qubits)
    summary = {
        "beta": metts_cfg.beta,
        "n_samples": metts_cfg.n_samples,
        "n_warmup": metts_cfg.n_warmup,
        "mean": result.mean,
        "stderr_block": result.stderr,
        "gibbs_exact": reference,
        "abs_error": abs(result.mean - reference),
    }
    return {"qmetts.csv": (("sample", "label", "value"), rows)}, summary


def _run_mutualinfo(config, hamiltonian, state0, rng, max_qubits):
    block = config["mutualinfo"]
    n = hamiltonian.n_qubits
    pairs = block.get("pairs", "all")
    if pairs == "all":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        pairs = [tuple(p) for p in pairs]
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise ConfigError(f"mutual information pair ({i},{j}) invalid for n={n}")
    rows = []
    final_state = state0
    for beta in block["betas"]:
        final_state = exact_ite(state0, hamiltonian, beta, max_qubits=max_qubits)
        for i, j in pairs:
            rows.append(
                (_fmt(beta), str(i), str(j), _fmt(mutual_information(final_state, i, j)))
            )
    e0, ground = _ground_projector(hamiltonian, max_qubits)
    fidelity_final = float(
        np.sum(np.abs(ground.conj().T @ final_state.amplitudes) ** 2)
    )
    summary = {
        "betas": [float(b) for b in block["betas"]],
        "n_pairs": len(pairs),
        "fidelity_ground_final": fidelity_final,
        "e0_exact": e0,
    }
    return {
        "mutualinfo.csv": (("beta", "qubit_i", "qubit_j", "mutual_info"), rows)
    }, summary


def _run_count(config, hamiltonian, state0, rng, max_qubits):
    block = config["count"]
    query = CostQuery(
        n_terms=block["n_terms"],
        n_time_steps=block["n_time_steps"],
        domain_size=block["domain_size"],
        odd_y_only=block.get("odd_y_only", False),
    )
    total = qite_measurement_count(query)
    pool = (
        odd_y_count(query.domain_size)
        if query.odd_y_only
        else 4 ** query.domain_size
    )
    summary = {
        "p_total": total,
        "n_terms": query.n_terms,
        "n_time_steps": query.n_time_steps,
        "domain_size": query.domain_size,
        "odd_y_only": query.odd_y_only,
        "pool_size_per_term": pool,
    }
    return {}, summary


_RUNNERS = {
    "qite": _run_qite,
    "qlanczos": _run_qlanczos,
    "qmetts": _run_qmetts,
    "mutualinfo": _run_mutualinfo,
    "count": _run_count,
}


def execute_run(
    config: dict,
    out_dir: Path,
    seed_override: Optional[int] = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> dict:
    """Run one validated config into ``out_dir`` and return its summary."""
    algorithm = config["algorithm"]
    seed = seed_override if seed_override is not None else config.get("seed", 0)
    hamiltonian = build_model(config["model"])
    if hamiltonian.n_qubits > max_qubits:
        raise ResourceError(
            f"model needs {hamiltonian.n_qubits} qubits, limit is {max_qubits}"
        )
    state0 = build_initial_state(config, hamiltonian.n_qubits, max_qubits)
    rng = np.random.default_rng(seed)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "qitekit",
        "version": __version__,
        "status": "started",
        "created_utc": _utc_now(),
        "config": config,
        "seed_effective": int(seed),
    }
    _write_json(out_dir / "manifest.json", manifest)

    start = time.perf_counter()
    tables, summary = _RUNNERS[algorithm](config, hamiltonian, state0, rng, max_qubits)
    for filename, (header, rows) in tables.items():
        _write_csv(out_dir / filename, header, rows)
    summary = {
        "algorithm": algorithm,
        "model": config["model"],
        "n_qubits": hamiltonian.n_qubits,
        **summary,
    }
    _write_json(out_dir / "summary.json", summary)

    manifest["status"] = "completed"
    manifest["finished_utc"] = _utc_now()
    manifest["timings_s"] = {"total": time.perf_counter() - start}
    manifest["outputs"] = sorted(list(tables) + ["summary.json"])
    _write_json(out_dir / "manifest.json", manifest)
    return summary


# ---------------------------------------------------------------------------
# subcommands


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    return max(1, value)


def _batch_worker(args_tuple) -> dict:
    path, out_dir, seed_override, max_qubits = args_tuple
    config = load_config(Path(path))
    return execute_run(config, Path(out_dir), seed_override, max_qubits)


def cmd_run(args) -> int:
    # validate every config before creating any output path
    configs = [(path, load_config(Path(path))) for path in args.config]
    out_root = Path(args.out)
    if len(configs) == 1:
        targets = [out_root]
    else:
        targets, seen = [], {}
        for path, _ in configs:
            stem = Path(path).stem
            seen[stem] = seen.get(stem, 0) + 1
            name = stem if seen[stem] == 1 else f"{stem}_{seen[stem]}"
            targets.append(out_root / name)

    jobs = [
        (path, target, args.seed_override, args.max_qubits)
        for (path, _), target in zip(configs, targets)
    ]
    threads = _thread_count()
    if threads > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            summaries = list(pool.map(_batch_worker, jobs))
    else:
        summaries = [_batch_worker(job) for job in jobs]
    for (path, _), target, summary in zip(configs, targets, summaries):
        headline = {
            k: summary[k]
            for k in ("energy_final", "e_qlanczos_final", "mean", "p_total")
            if k in summary
        }
        print(f"{path}: {summary['algorithm']} -> {target} {headline}")
    return EXIT_OK


def _load_run_dir(run_dir: Path) -> Tuple[dict, dict]:
    manifest_path = Path(run_dir) / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise ConfigError(f"{run_dir}: no readable manifest.json: {exc}") from exc
    if manifest.get("status") != "completed":
        raise ConfigError(f"{run_dir}: run did not complete")
    return manifest, manifest["config"]


def _read_csv(path: Path) -> List[dict]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def cmd_compare(args) -> int:
    loaded = [_load_run_dir(Path(d)) for d in args.run]
    base_config = loaded[0][1]
    for _, config in loaded[1:]:
        if config["model"] != base_config["model"] or config.get(
            "initial_state"
        ) != base_config.get("initial_state"):
            raise ConfigError("compare requires runs of the same model and state")
        if config["algorithm"] != base_config["algorithm"]:
            raise ConfigError("compare requires runs of the same algorithm")
    algorithm = base_config["algorithm"]
    if algorithm not in ("qite", "qlanczos", "qmetts"):
        raise ConfigError(f"compare is not defined for algorithm {algorithm!r}")

    hamiltonian = build_model(base_config["model"])
    if hamiltonian.n_qubits > args.max_qubits:
        raise ResourceError(
            f"model needs {hamiltonian.n_qubits} qubits, limit is {args.max_qubits}"
        )
    state0 = build_initial_state(
        base_config, hamiltonian.n_qubits, args.max_qubits
    )
    e0, _ = _ground_projector(hamiltonian, args.max_qubits)

    header, rows = _compare_rows(
        algorithm, args.run, hamiltonian, state0, e0, args.max_qubits
    )
    if args.out:
        _write_csv(Path(args.out), header, rows)
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return EXIT_OK


def _compare_rows(algorithm, run_dirs, hamiltonian, state0, e0, max_qubits):
    if algorithm == "qite":
        header = (
            "run",
            "sweep",
            "beta",
            "energy",
            "e_exact_ite",
            "delta_exact",
            "bound_violation",
            "delta_vs_first",
        )
        series = [_read_csv(Path(d) / "qite.csv") for d in run_dirs]
        first = {row["sweep"]: float(row["energy"]) for row in series[0]}
        rows = []
        for run_dir, table in zip(run_dirs, series):
            for row in table:
                beta = float(row["beta"])
                e = float(row["energy"])
                oracle = exact_ite_energy(state0, hamiltonian, beta, max_qubits)
                rows.append(
                    (
                        str(run_dir),
                        row["sweep"],
                        _fmt(beta),
                        _fmt(e),
                        _fmt(oracle),
                        _fmt(e - oracle),
                        str(int(e < e0 - _BOUND_TOL)),
                        _fmt(e - first[row["sweep"]]),
                    )
                )
        return header, rows
    if algorithm == "qlanczos":
        header = (
            "run",
            "beta",
            "e_qite",
            "e_qlanczos",
            "bound_ok",
            "delta_vs_first",
        )
        series = [_read_csv(Path(d) / "qlanczos.csv") for d in run_dirs]
        first = {row["beta"]: float(row["e_qlanczos"]) for row in series[0]}
        rows = []
        for run_dir, table in zip(run_dirs, series):
            for row in table:
                eq = float(row["e_qite"])
                el = float(row["e_qlanczos"])
                rows.append(
                    (
                        str(run_dir),
                        row["beta"],
                        _fmt(eq),
                        _fmt(el),
                        str(int(el <= eq + _BOUND_TOL)),
                        _fmt(el - first[row["beta"]]),
                    )
                )
        return header, rows
    header = ("run", "beta", "mean", "stderr_block", "gibbs_exact", "delta", "within_3_stderr")
    rows = []
    for run_dir in run_dirs:
        summary = json.loads((Path(run_dir) / "summary.json").read_text())
        beta = float(summary["beta"])
        mean = float(summary["mean"])
        stderr = float(summary["stderr_block"])
        oracle = gibbs_average(hamiltonian, beta, max_qubits=max_qubits)
        delta = mean - oracle
        rows.append(
            (
                str(run_dir),
                _fmt(beta),
                _fmt(mean),
                _fmt(stderr),
                _fmt(oracle),
                _fmt(delta),
                str(int(abs(delta) <= 3 * stderr)),
            )
        )
    return header, rows


def cmd_count(args) -> int:
    config = load_config(Path(args.config))
    if config["algorithm"] != "count":
        raise ConfigError("count subcommand needs a config with algorithm 'count'")
    if args.out:
        summary = execute_run(
            config, Path(args.out), args.seed_override, args.max_qubits
        )
    else:
        _, summary = _run_count(config, None, None, None, args.max_qubits)
    print(summary["p_total"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qitekit",
        description="Imaginary-time evolution emulator and analysis runner.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one or more experiment configs")
    run.add_argument(
        "--config",
        action="append",
        required=True,
        help="path to a JSON experiment config (repeatable)",
    )
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed-override", type=int, default=None)
    run.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS)
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser(
        "compare", help="tabulate finished runs against exact oracles"
    )
    compare.add_argument("--run", action="append", required=True, dest="run")
    compare.add_argument("--out", default=None, help="output CSV path (default stdout)")
    compare.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS)
    compare.set_defaults(func=cmd_compare)

    count = sub.add_parser("count", help="evaluate a measurement-cost query")
    count.add_argument("--config", required=True)
    count.add_argument("--out", default=None, help="optional output directory")
    count.add_argument("--seed-override", type=int, default=None)
    count.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS)
    count.set_defaults(func=cmd_count)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError, PoolError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
