"""Command-line interface: train, run reference solvers, compare, gradcheck.

Exit codes: 0 success, 2 usage/configuration error, 3 training divergence.
Numeric imports happen inside the handlers so the QWELL_THREADS cap can be
applied to the BLAS thread pools before numpy loads.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

_WAVE_SAMPLES = 401
_FD_ORACLE_POINTS = 1999
_PAPER_ENERGIES = {
    "infinite-well": math.pi ** 2,
    "finite-well": 1.72,
    "barrier": 4.87,
}


def _fail(message: str) -> int:
    print(f"qwell: error: {message}", file=sys.stderr)
    return 2


def _apply_thread_cap() -> None:
    value = os.environ.get("QWELL_THREADS")
    if not value:
        return
    try:
        n = max(1, int(value))
    except ValueError:
        return
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[0] if isinstance(row[0], int) else repr(float(row[0]))]
                            + [repr(float(v)) for v in row[1:]])


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _problem_from_spec(obj):
    """Build a ProblemSpec from a preset name or an inline JSON object."""
    from .errors import ConfigurationError
    from .network import EnergyParam
    from .problems import (BoundaryEnvelope, PiecewisePotential, ProblemSpec,
                           preset)

    if isinstance(obj, str):
        return preset(obj)
    if not isinstance(obj, dict):
        raise ConfigurationError("problem must be a preset name or an inline object")
    try:
        domain = (float(obj["domain"][0]), float(obj["domain"][1]))
        pot = obj.get("potential", {})
        segments = tuple(
            (float(seg[0]), float(seg[1]), float(seg[2]))
            for seg in pot.get("segments", ())
        )
        potential = PiecewisePotential(segments, float(pot.get("default", 0.0)))
        energy_obj = obj["energy"]
        energy = EnergyParam(str(energy_obj["mode"]), float(energy_obj["value"]))
        envelope = obj.get("envelope")
        if envelope is not None and tuple(float(v) for v in envelope) != domain:
            raise ConfigurationError("envelope must equal the domain boundaries")
        return ProblemSpec(
            name=str(obj.get("name", "custom")),
            domain=domain,
            potential=potential,
            envelope=BoundaryEnvelope(*domain),
            energy_init=energy,
            layer_sizes=tuple(int(s) for s in obj.get("layer_sizes", (1, 20, 20, 1))),
            n_collocation=int(obj.get("n_collocation", 100)),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigurationError(f"invalid problem definition: {exc}") from exc


def _problem_to_json(problem) -> dict:
    return {
        "name": problem.name,
        "domain": list(problem.domain),
        "potential": {
            "segments": [list(seg) for seg in problem.potential.segments],
            "default": problem.potential.default_value,
        },
        "envelope": [problem.envelope.a, problem.envelope.b],
        "energy": {"mode": problem.energy_init.mode, "value": problem.energy_init.value},
        "layer_sizes": list(problem.layer_sizes),
        "n_collocation": problem.n_collocation,
    }


def _load_run_inputs(args):
    """Resolve (problem, training config, output dir) from flags and config file."""
    from dataclasses import replace

    from .errors import ConfigurationError
    from .training import TrainingConfig

    training_dict = {}
    out_dir = args.out
    if args.config is not None:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {args.config} is not valid JSON: {exc}") from exc
        if "problem" not in config:
            raise ConfigurationError("config must contain a 'problem' entry")
        problem = _problem_from_spec(config["problem"])
        training_dict = dict(config.get("training", {}))
        if out_dir is None:
            out_dir = config.get("output_dir")
    else:
        problem = _problem_from_spec(args.preset)

    try:
        cfg = TrainingConfig(**training_dict)
    except TypeError as exc:
        raise ConfigurationError(f"invalid training config: {exc}") from exc
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.lr is not None:
        overrides["learning_rate"] = args.lr
    if args.lambda_norm is not None:
        overrides["lambda_norm"] = args.lambda_norm
    if args.log_interval is not None:
        overrides["log_interval"] = args.log_interval
    if overrides:
        cfg = replace(cfg, **overrides)
    if args.points is not None:
        problem = replace(problem, n_collocation=args.points)
    return problem, cfg, out_dir or "qwell_out"


def _write_history(path, history) -> None:
    _write_csv(path, ["epoch", "energy", "l_pde", "l_norm", "total"],
               [(rec.epoch, rec.energy, rec.l_pde, rec.l_norm, rec.total)
                for rec in history])


def cmd_run(args) -> int:
    from .errors import ConfigurationError, TrainingDivergedError
    from .training import sample_wavefunction, train

    try:
        problem, cfg, out_dir = _load_run_inputs(args)
    except ConfigurationError as exc:
        return _fail(str(exc))

    os.makedirs(out_dir, exist_ok=True)
    start = time.perf_counter()
    try:
        model = train(problem, cfg)
    except ConfigurationError as exc:
        return _fail(str(exc))
    except TrainingDivergedError as exc:
        _write_history(os.path.join(out_dir, "history.csv"), exc.history)
        print(f"qwell: training diverged: {exc}", file=sys.stderr)
        return 3
    wall_clock = time.perf_counter() - start

    _write_history(os.path.join(out_dir, "history.csv"), model.history)
    wave = sample_wavefunction(model, _WAVE_SAMPLES)
    _write_csv(os.path.join(out_dir, "wavefunction.csv"), ["x", "psi"], wave)
    final = model.history[-1]
    _write_json(os.path.join(out_dir, "summary.json"), {
        "problem": problem.name,
        "final_energy": final.energy,
        "final_l_pde": final.l_pde,
        "final_l_norm": final.l_norm,
        "final_total": final.total,
        "energy_mode": model.energy.mode,
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "wall_clock_seconds": wall_clock,
        "config": {
            "problem": _problem_to_json(problem),
            "training": {
                "epochs": cfg.epochs,
                "learning_rate": cfg.learning_rate,
                "lambda_norm": cfg.lambda_norm,
                "seed": cfg.seed,
                "log_interval": cfg.log_interval,
                "adam_beta1": cfg.adam_beta1,
                "adam_beta2": cfg.adam_beta2,
                "adam_epsilon": cfg.adam_epsilon,
            },
        },
    })
    print(f"{problem.name}: final energy {final.energy:.6f}, total loss {final.total:.3e} "
          f"-> {out_dir}")
    return 0


def _finite_well_params(problem):
    """(v0, half_width) when the potential is a single centered zero well."""
    segs = problem.potential.segments
    if (len(segs) == 1 and segs[0][2] == 0.0 and segs[0][0] == -segs[0][1]
            and problem.potential.default_value > 0.0):
        return problem.potential.default_value, segs[0][1]
    return None


def cmd_reference(args) -> int:
    from .errors import ConfigurationError

    import numpy as np

    from .problems import make_grid, potential_values
    from .reference import (eigenvector_for, fd_hamiltonian,
                            finite_well_even_levels, finite_well_even_state,
                            infinite_well_exact, lowest_eigenvalues)

    try:
        problem = _problem_from_spec(args.preset if args.config is None
                                     else _read_config_problem(args.config))
    except ConfigurationError as exc:
        return _fail(str(exc))

    out_dir = args.out or "qwell_out"
    os.makedirs(out_dir, exist_ok=True)

    if args.method == "fd":
        n = args.n or _FD_ORACLE_POINTS
        try:
            matrix = fd_hamiltonian(problem.potential, problem.domain, n)
            eigenvalues = lowest_eigenvalues(matrix, min(3, matrix.dimension))
            ground = eigenvector_for(matrix, eigenvalues[0], domain=problem.domain)
        except ConfigurationError as exc:
            return _fail(str(exc))
        wave = np.column_stack([ground.grid.points, ground.eigenvector])
    elif args.method == "transcendental":
        params = _finite_well_params(problem)
        if params is None:
            return _fail("transcendental method applies only to a centered finite well")
        v0, half_width = params
        eigenvalues = finite_well_even_levels(v0, half_width)
        n = args.n or _WAVE_SAMPLES
        grid = make_grid(problem.domain, n)
        psi = finite_well_even_state(v0, half_width, eigenvalues[0], grid.points)
        wave = np.column_stack([grid.points, psi])
    elif args.method == "analytic":
        is_free = not np.any(potential_values(problem.potential,
                                              make_grid(problem.domain, 101).points))
        if problem.domain != (0.0, 1.0) or not is_free:
            return _fail("analytic method applies only to the infinite well on [0, 1]")
        n = args.n or 1
        try:
            energy, wave = infinite_well_exact(n, _WAVE_SAMPLES)
        except ConfigurationError as exc:
            return _fail(str(exc))
        eigenvalues = [energy]
    else:  # pragma: no cover - argparse restricts choices
        return _fail(f"unknown method {args.method}")

    _write_json(os.path.join(out_dir, "oracle.json"), {
        "problem": problem.name,
        "method": args.method,
        "n": args.n,
        "eigenvalues": list(map(float, eigenvalues)),
    })
    _write_csv(os.path.join(out_dir, "oracle_wavefunction.csv"), ["x", "psi"], wave)
    print(f"{problem.name} [{args.method}]: eigenvalues "
          + ", ".join(f"{e:.6f}" for e in eigenvalues[:3]) + f" -> {out_dir}")
    return 0


def _read_config_problem(path):
    from .errors import ConfigurationError

    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    if "problem" not in config:
        raise ConfigurationError("config must contain a 'problem' entry")
    return config["problem"]


def _resolve(path, default_name):
    return os.path.join(path, default_name) if os.path.isdir(path) else path


def cmd_compare(args) -> int:
    import numpy as np

    summary_path = _resolve(args.run, "summary.json")
    oracle_path = _resolve(args.oracle, "oracle.json")
    try:
        with open(summary_path) as fh:
            summary = json.load(fh)
        with open(oracle_path) as fh:
            oracle = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot load comparison inputs: {exc}")

    if summary.get("problem") != oracle.get("problem"):
        return _fail(f"problem mismatch: run is {summary.get('problem')!r}, "
                     f"oracle is {oracle.get('problem')!r}")

    pinn_energy = float(summary["final_energy"])
    oracle_energy = float(min(oracle["eigenvalues"]))
    abs_gap = abs(pinn_energy - oracle_energy)
    rel_gap = abs_gap / max(abs(oracle_energy), 1e-12)

    run_wave_path = _resolve(os.path.dirname(summary_path) or ".", "wavefunction.csv")
    oracle_wave_path = _resolve(os.path.dirname(oracle_path) or ".", "oracle_wavefunction.csv")
    try:
        run_wave = np.loadtxt(run_wave_path, delimiter=",", skiprows=1)
        oracle_wave = np.loadtxt(oracle_wave_path, delimiter=",", skiprows=1)
    except OSError as exc:
        return _fail(f"cannot load wavefunction tables: {exc}")

    def canonical(psi):
        return -psi if psi[np.argmax(np.abs(psi))] < 0.0 else psi

    xs = run_wave[:, 0]
    pinn_psi = canonical(run_wave[:, 1])
    oracle_psi = canonical(np.interp(xs, oracle_wave[:, 0], oracle_wave[:, 1]))
    l_inf_gap = float(np.max(np.abs(pinn_psi - oracle_psi)))

    paper_energy = _PAPER_ENERGIES.get(summary.get("problem"))
    report = {
        "problem": summary.get("problem"),
        "pinn_energy": pinn_energy,
        "oracle_energy": oracle_energy,
        "paper_energy": paper_energy,
        "abs_gap": abs_gap,
        "rel_gap": rel_gap,
        "paper_abs_gap": None if paper_energy is None else abs(pinn_energy - paper_energy),
        "paper_rel_gap": None if paper_energy is None else
            abs(pinn_energy - paper_energy) / max(abs(paper_energy), 1e-12),
        "wavefunction_l_inf_gap": l_inf_gap,
    }
    out_dir = args.out or (os.path.dirname(summary_path) or ".")
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "comparison.json"), report)
    print(f"{summary.get('problem')}: network E={pinn_energy:.6f} vs oracle "
          f"E={oracle_energy:.6f} (rel gap {rel_gap:.2%}), wavefunction L-inf gap "
          f"{l_inf_gap:.3e}")
    return 0


def cmd_gradcheck(args) -> int:
    from .errors import ConfigurationError
    from .gradcheck import gradient_check
    from .network import EnergyParam, init_network
    from .problems import (BoundaryEnvelope, PiecewisePotential, ProblemSpec,
                           make_grid)

    try:
        layer_sizes = tuple(int(s) for s in args.layers.split(","))
    except ValueError:
        return _fail(f"cannot parse layer sizes {args.layers!r}")
    try:
        net = init_network(layer_sizes, args.seed)
    except ConfigurationError as exc:
        return _fail(str(exc))
    if net.n_parameters > 500:
        return _fail(f"network has {net.n_parameters} parameters; gradcheck is "
                     "limited to 500 (finite differences get too slow)")
    if args.points < 2:
        return _fail("gradcheck needs at least 2 collocation points")

    # small fixed problem with a potential step so the V path is exercised
    problem = ProblemSpec(
        name="gradcheck",
        domain=(0.0, 1.0),
        potential=PiecewisePotential(((0.4, 0.7, 3.0),), 0.0),
        envelope=BoundaryEnvelope(0.0, 1.0),
        energy_init=EnergyParam.trainable(2.0),
        layer_sizes=layer_sizes,
        n_collocation=args.points,
    )
    grid = make_grid(problem.domain, args.points)
    report = gradient_check(net, problem.energy_init, problem, grid)
    worst = max(report.values())
    for group, err in report.items():
        print(f"  {group:18s} max rel err {err:.3e}")
    print(f"gradcheck: worst {worst:.3e} ({'PASS' if worst < 1e-5 else 'FAIL'})")
    return 0 if worst < 1e-5 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwell",
        description="Train neural-network quantum well eigenstates and check them "
                    "against classical solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train a model and write history/wavefunction/summary")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=("infinite-well", "finite-well", "barrier"))
    src.add_argument("--config", help="JSON config with a problem definition")
    run.add_argument("--out", help="output directory (default qwell_out)")
    run.add_argument("--seed", type=int)
    run.add_argument("--epochs", type=int)
    run.add_argument("--lr", type=float)
    run.add_argument("--lambda-norm", type=float, dest="lambda_norm")
    run.add_argument("--log-interval", type=int, dest="log_interval")
    run.add_argument("--points", type=int, help="number of collocation points")
    run.set_defaults(handler=cmd_run)

    ref = sub.add_parser("reference", help="run a classical solver on a problem")
    src = ref.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=("infinite-well", "finite-well", "barrier"))
    src.add_argument("--config")
    ref.add_argument("--method", choices=("fd", "transcendental", "analytic"),
                     required=True)
    ref.add_argument("--n", type=int,
                     help="fd: interior grid points (default 1999); "
                          "analytic: quantum number (default 1)")
    ref.add_argument("--out", help="output directory (default qwell_out)")
    ref.set_defaults(handler=cmd_reference)

    cmp_ = sub.add_parser("compare", help="compare a run against an oracle")
    cmp_.add_argument("--run", required=True, help="run directory or summary.json")
    cmp_.add_argument("--oracle", required=True, help="oracle directory or oracle.json")
    cmp_.add_argument("--out", help="output directory (default: next to the run)")
    cmp_.set_defaults(handler=cmd_compare)

    gc = sub.add_parser("gradcheck", help="verify gradients against finite differences")
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--layers", default="1,8,1")
    gc.add_argument("--points", type=int, default=20)
    gc.set_defaults(handler=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
