"""Command-line front end.

Subcommands: echo, predict, sigma, classical, figure, sweep.  Flags mirror
RunSpec fields; a ``--config`` file (key = value lines) overrides flags.
Each run writes one directory containing series.csv + meta.json and, where
applicable, predictions.json.
"""

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .echo import (
    EchoRunConfig,
    InitialState,
    fidelity_series,
    renormalized_fidelity_series,
)
from .io import atomic_write_text, write_series_dir
from .classical_echo import classical_fidelity_series, gaussian_patch_ensemble
from .models import coupled_tops, single_top
from .runspec import (
    RunSpec,
    RunSpecError,
    figure_preset,
    parse_and_validate,
    serialize,
)
from .semiclassics import predictions_for, transport_rate

_SPEC_FLAGS = [
    ("--model", "model", str, "single or coupled"),
    ("--J", "J", float, "spin magnitude (even integer)"),
    ("--alpha", "alpha", float, "single-top torsion strength"),
    ("--eps", "eps", float, "coupled-top coupling strength"),
    ("--delta", "delta", float, "perturbation strength"),
    ("--initial", "initial", str, "cis or ris"),
    ("--theta", "theta", float, "coherent-state polar angle"),
    ("--phi", "phi", float, "coherent-state azimuth"),
    ("--seed", "seed", int, "random seed"),
    ("--n-max", "n_max", int, "number of kicks"),
    ("--grid", "grid", str, "log or linear sample grid"),
    ("--samples-per-decade", "samples_per_decade", int, "log-grid density"),
    ("--mode", "mode", str, "direct or renormalized"),
    ("--method", "method", str, "spectral or stepping evolution"),
    ("--count", "count", int, "classical trajectories"),
    ("--width", "width", float, "classical patch width (0 = sqrt(hbar/2))"),
    ("--n-cut", "n_cut", int, "transport-rate fit start"),
    ("--sigma-ensemble", "sigma_ensemble", int, "transport-rate ensemble size"),
    ("--name", "name", str, "run name (output subdirectory)"),
    ("--out", "out", str, "output directory"),
    ("--workers", "workers", int, "parallel workers for sweeps"),
    ("--scale", "scale", float, "desk-scale factor for figure presets"),
]


def _add_spec_flags(sub):
    sub.add_argument("--config", help="key=value config file; overrides flags")
    for flag, dest, typ, doc in _SPEC_FLAGS:
        sub.add_argument(flag, dest=dest, type=typ, default=None, help=doc)


def _spec_from_args(args, experiment):
    spec = RunSpec(experiment=experiment)
    for _, dest, _, _ in _SPEC_FLAGS:
        val = getattr(args, dest, None)
        if val is not None:
            spec = replace(spec, **{dest: val})
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    # config overrides flags; validation runs either way
    spec = parse_and_validate(text, base=spec)
    if spec.experiment != experiment and experiment != "sweep":
        spec = replace(spec, experiment=experiment)
    return spec


def _sample_times(spec):
    from .echo import log_sample_times

    if spec.grid == "linear":
        step = max(1, spec.n_max // 2000)
        return np.arange(0, spec.n_max + 1, step)
    return log_sample_times(spec.n_max, per_decade=spec.samples_per_decade)


def _build_model(spec):
    if spec.model == "single":
        return single_top(spec.J, spec.alpha)
    return coupled_tops(spec.J, spec.eps)


def _initial(spec):
    if spec.initial == "ris":
        return InitialState(kind="ris", seed=spec.seed)
    return InitialState(kind="cis", theta=spec.theta, phi=spec.phi)


def _out_dir(spec, default_name):
    base = spec.out or "runs"
    return os.path.join(base, spec.name or default_name)


def run_spec(spec):
    """Execute a validated RunSpec; returns the output directory (or None)."""
    if spec.experiment in ("echo", "renorm-echo"):
        use_stepping = spec.method == "stepping"
        config = EchoRunConfig(
            model=None if use_stepping else _build_model(spec),
            delta=spec.delta,
            initial=_initial(spec),
            n_max=spec.n_max,
            sample_times=_sample_times(spec),
            mode="renormalized" if spec.experiment == "renorm-echo" else spec.mode,
            samples_per_decade=spec.samples_per_decade,
        )
        if use_stepping:
            config.model = _StepperShim(spec)
        if config.mode == "renormalized":
            series = renormalized_fidelity_series(config, method=spec.method)
        else:
            series = fidelity_series(config, method=spec.method)
        series.metadata["runspec"] = serialize(spec)
        out = _out_dir(spec, f"{spec.experiment}_{spec.model}_J{int(spec.J)}")
        write_series_dir(series, out)
        return out
    if spec.experiment == "classical-echo":
        params = spec.top_params()
        width = spec.width if spec.width > 0 else np.sqrt(params.hbar_eff / 2.0)
        ens = gaussian_patch_ensemble(spec.theta, spec.phi, width, spec.count, spec.seed)
        times = _sample_times(spec)
        series = classical_fidelity_series(ens, params, spec.delta, times)
        series.metadata["runspec"] = serialize(spec)
        out = _out_dir(spec, f"classical_J{int(spec.J)}")
        write_series_dir(series, out)
        return out
    if spec.experiment == "predict":
        params = spec.top_params()
        preds = predictions_for(
            params, spec.delta, sigma_ensemble=spec.sigma_ensemble,
            sigma_n_cut=spec.n_cut, seed=spec.seed,
        )
        out = _out_dir(spec, f"predict_{spec.model}_J{int(spec.J)}")
        os.makedirs(out, exist_ok=True)
        atomic_write_text(os.path.join(out, "predictions.json"), preds.to_json())
        return out
    if spec.experiment == "sigma":
        params = spec.top_params()
        tr = transport_rate(
            params, n_cut=spec.n_cut, ensemble=spec.sigma_ensemble, seed=spec.seed
        )
        out = _out_dir(spec, f"sigma_{spec.model}")
        os.makedirs(out, exist_ok=True)
        payload = {
            "sigma": tr.sigma,
            "converged": tr.converged,
            "n_cut": tr.n_cut,
            "ensemble": tr.ensemble,
            "seed": tr.seed,
            "model": params.as_dict(),
        }
        atomic_write_text(os.path.join(out, "sigma.json"), json.dumps(payload, indent=2))
        diag = "n,var_over_2n\n" + "\n".join(f"{n},{v!r}" for n, v in tr.estimates)
        atomic_write_text(os.path.join(out, "sigma_convergence.csv"), diag + "\n")
        return out
    if spec.experiment == "figure":
        bundle = figure_preset(spec.figure, scale=spec.scale, out=spec.out)
        outs = []
        for member in bundle:
            outs.append(run_spec(member))
        return outs
    raise RunSpecError([f"experiment {spec.experiment!r} cannot be executed directly"])


class _StepperShim:
    """Minimal model stand-in for step-wise coupled runs (no dense matrices)."""

    def __init__(self, spec):
        self.params = spec.top_params()
        self.subspace = None
        self.dim = self.params.subspace_dim

    @property
    def rep(self):
        return self.params.rep


def _cmd_simple(experiment):
    def run(args):
        spec = _spec_from_args(args, experiment)
        out = run_spec(spec)
        print(f"{experiment}: wrote {out}")
        return 0

    return run


def _cmd_sweep(args):
    base = _spec_from_args(args, "sweep")
    axes = []
    for item in args.set or []:
        if "=" not in item:
            raise RunSpecError([f"--set expects key=v1,v2,..., got {item!r}"])
        key, vals = item.split("=", 1)
        axes.append((key.strip(), [v.strip() for v in vals.split(",") if v.strip()]))
    if not axes:
        raise RunSpecError(["sweep needs at least one --set key=v1,v2,..."])
    members = []
    for combo in itertools.product(*[vals for _, vals in axes]):
        text = "\n".join(f"{k} = {v}" for (k, _), v in zip(axes, combo))
        member = parse_and_validate(
            text, base=replace(base, experiment=args.experiment)
        )
        tag = "_".join(f"{k}{v}" for (k, _), v in zip(axes, combo))
        member = replace(member, name=(member.name or "run") + "_" + tag)
        members.append(member)
    if base.workers > 1:
        with ProcessPoolExecutor(max_workers=base.workers) as pool:
            outs = list(pool.map(run_spec, members))
    else:
        outs = [run_spec(m) for m in members]
    manifest = {"runs": [{"name": m.name, "out": o} for m, o in zip(members, outs)]}
    base_dir = base.out or "runs"
    os.makedirs(base_dir, exist_ok=True)
    atomic_write_text(os.path.join(base_dir, "sweep.json"), json.dumps(manifest, indent=2))
    print(f"sweep: {len(outs)} runs under {base_dir}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="echotop",
        description="Kicked-top echo simulator: quantum fidelity freeze, "
        "semiclassical predictions, classical comparison.",
    )
    ap.add_argument("--version", action="version", version=f"echotop {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, experiment, doc in [
        ("echo", "echo", "direct or renormalized quantum echo run"),
        ("predict", "predict", "semiclassical predictions (plateau, t2, decay)"),
        ("sigma", "sigma", "classical transport-rate estimate"),
        ("classical", "classical-echo", "classical fidelity of the single top"),
        ("figure", "figure", "run a figure-reproduction preset bundle"),
    ]:
        p = sub.add_parser(name, help=doc)
        _add_spec_flags(p)
        if name == "figure":
            p.add_argument("--figure", dest="figure", default=None,
                           choices=["fig1a", "fig1b", "fig2", "fig3a", "fig3b"])
        p.set_defaults(func=_cmd_simple(experiment))
    p = sub.add_parser("sweep", help="run a parameter sweep in parallel")
    _add_spec_flags(p)
    p.add_argument("--experiment", default="echo",
                   choices=["echo", "renorm-echo", "classical-echo", "predict", "sigma"])
    p.add_argument("--set", action="append", metavar="KEY=V1,V2,...",
                   help="sweep axis (repeatable; cartesian product)")
    p.set_defaults(func=_cmd_sweep)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except RunSpecError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
