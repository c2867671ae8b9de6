"""Run specifications: a flat, validated, round-trippable description of a run.

The text format is one ``key = value`` pair per line (# comments allowed).
``parse_and_validate`` reports every problem it finds, not just the first.
Figure presets expand into bundles of RunSpecs reproducing the data behind
the standard plots at a configurable desk scale.
"""

import dataclasses
import math
from dataclasses import dataclass, fields

__all__ = ["RunSpec", "RunSpecError", "parse_and_validate", "serialize", "figure_preset"]

EXPERIMENTS = ("echo", "renorm-echo", "classical-echo", "predict", "sigma", "sweep", "figure")
FIGURES = ("fig1a", "fig1b", "fig2", "fig3a", "fig3b")

# Transport rates of the two chaotic maps, used only to size default time
# grids in figure presets; actual prediction runs recompute sigma by
# Monte Carlo.
_GRID_SIGMA = {"single": 5.1e-3, "coupled": 9.2e-3}


class RunSpecError(ValueError):
    """Validation failure carrying the full list of problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid run specification:\n  " + "\n  ".join(self.errors))


@dataclass
class RunSpec:
    """Flat description of one run; defaults give a small single-top echo."""

    experiment: str = "echo"
    model: str = "single"
    J: float = 200.0
    alpha: float = 30.0
    eps: float = 20.0
    delta: float = 1e-3
    initial: str = "cis"
    theta: float = 1.0
    phi: float = 1.0
    seed: int = 0
    n_max: int = 10_000
    grid: str = "log"
    samples_per_decade: int = 60
    mode: str = "direct"
    method: str = "spectral"
    count: int = 100_000
    width: float = 0.0  # 0 -> sqrt(hbar_eff/2)
    n_cut: int = 50
    sigma_ensemble: int = 100_000
    figure: str = "fig1a"
    scale: float = 1.0
    name: str = ""
    out: str = ""
    workers: int = 1

    def top_params(self):
        from .models import TopParams

        if self.model == "single":
            return TopParams(kind="single", J=self.J, alpha=self.alpha)
        return TopParams(kind="coupled", J=self.J, eps=self.eps)


_FIELD_TYPES = {f.name: f.type for f in fields(RunSpec)}


def _coerce(name, raw, errors):
    typ = _FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if typ is float or typ == "float":
            return float(raw)
        if typ is int or typ == "int":
            return int(raw)
        return raw
    except ValueError:
        errors.append(f"{name}: cannot parse {raw!r} as {typ}")
        return None


def _validate(spec, errors):
    if spec.experiment not in EXPERIMENTS:
        errors.append(f"experiment: {spec.experiment!r} not one of {EXPERIMENTS}")
    if spec.model not in ("single", "coupled"):
        errors.append(f"model: {spec.model!r} not 'single' or 'coupled'")
    j = spec.J
    if j <= 0 or abs(j - round(j)) > 1e-9 or int(round(j)) % 2 != 0:
        errors.append(
            f"J: {j} must be a positive even integer (the invariant subspace "
            "pairs +m with -m levels two at a time)"
        )
    if not math.isfinite(spec.delta):
        errors.append("delta: must be finite (negative values are fine)")
    if spec.initial not in ("cis", "ris"):
        errors.append(f"initial: {spec.initial!r} not 'cis' or 'ris'")
    if not 0.0 <= spec.theta <= math.pi:
        errors.append(f"theta: {spec.theta} outside [0, pi]")
    if spec.n_max < 1:
        errors.append(f"n_max: {spec.n_max} must be >= 1")
    if spec.grid not in ("log", "linear"):
        errors.append(f"grid: {spec.grid!r} not 'log' or 'linear'")
    if spec.mode not in ("direct", "renormalized"):
        errors.append(f"mode: {spec.mode!r} not 'direct' or 'renormalized'")
    if spec.method not in ("spectral", "stepping"):
        errors.append(f"method: {spec.method!r} not 'spectral' or 'stepping'")
    if spec.method == "stepping" and spec.model != "coupled":
        errors.append("method: stepping evolution applies to the coupled model only")
    if spec.experiment == "classical-echo":
        if spec.model != "single":
            errors.append("classical-echo: only the single top has a classical comparison")
        if spec.count < 1000:
            errors.append(f"count: {spec.count} classical trajectories; need >= 1000")
        if spec.width < 0:
            errors.append(f"width: {spec.width} must be >= 0 (0 selects sqrt(hbar/2))")
    if spec.experiment == "sigma":
        if spec.sigma_ensemble < 10_000:
            errors.append(f"sigma_ensemble: {spec.sigma_ensemble} must be >= 10^4")
        if spec.n_cut < 10:
            errors.append(f"n_cut: {spec.n_cut} must be >= 10")
    if spec.experiment == "figure" and spec.figure not in FIGURES:
        errors.append(f"figure: {spec.figure!r} not one of {FIGURES}")
    if not 0.0 < spec.scale <= 1.0:
        errors.append(f"scale: {spec.scale} outside (0, 1]")
    if spec.workers < 1:
        errors.append(f"workers: {spec.workers} must be >= 1")
    if spec.samples_per_decade < 1:
        errors.append(f"samples_per_decade: {spec.samples_per_decade} must be >= 1")


def parse_and_validate(text, base=None):
    """Parse ``key = value`` lines into a validated RunSpec.

    Unknown keys, unparsable values, out-of-range values and inconsistent
    combinations are all collected and raised together as RunSpecError.
    ``base`` supplies defaults to override (e.g. flags before a config file).
    """
    spec = dataclasses.replace(base) if base is not None else RunSpec()
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
            continue
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        val = _coerce(key, raw, errors)
        if val is not None:
            setattr(spec, key, val)
    _validate(spec, errors)
    if errors:
        raise RunSpecError(errors)
    return spec


def serialize(spec):
    """Text form of a RunSpec; parse_and_validate(serialize(s)) == s.

    Strings are written bare (they must not contain '#' or '='); numbers use
    repr, which round-trips floats exactly.
    """
    lines = []
    for f in fields(spec):
        v = getattr(spec, f.name)
        lines.append(f"{f.name} = {v}" if isinstance(v, str) else f"{f.name} = {v!r}")
    return "\n".join(lines) + "\n"


def _even_scaled_spin(j_full, scale):
    j = int(round(j_full * scale / 2.0)) * 2
    return max(2, j)


def _scaled(j_full, delta_full, scale):
    # desk-scale rule: shrink J, rescale delta to keep delta*J fixed
    j = _even_scaled_spin(j_full, scale)
    return j, delta_full * (j_full / j)


def figure_preset(name, scale=1.0, out=""):
    """RunSpec bundle reproducing the data behind one standard figure.

    ``scale`` in (0, 1] multiplies the spin magnitude, with delta rescaled
    to keep the dimensionless strength delta*J fixed; the plateau values are
    invariant under this reduction while the Heisenberg time shrinks.
    Returns a list of RunSpecs (quantum runs, classical run, predictions as
    applicable).
    """
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; expected one of {FIGURES}")
    if not 0.0 < scale <= 1.0:
        raise ValueError("scale must lie in (0, 1]")

    def spec(**kw):
        kw.setdefault("out", out)
        kw.setdefault("scale", scale)
        return RunSpec(**kw)

    bundle = []
    if name in ("fig1a", "fig1b"):
        j, delta = _scaled(1000.0, 1e-3 if name == "fig1a" else 1e-2, scale)
        sig = _GRID_SIGMA["single"]
        t2 = min(
            math.sqrt((j / 2.0) / sig) * math.sqrt(1 / 45.0) / delta,
            (1 / 45.0) / (sig * delta**2),
        )
        n_max = int(4 * t2)
        common = dict(model="single", J=float(j), alpha=30.0, delta=delta, n_max=n_max)
        bundle.append(spec(experiment="echo", initial="cis", name=f"{name}_cis", **common))
        bundle.append(spec(experiment="echo", initial="ris", name=f"{name}_ris", **common))
        bundle.append(
            spec(
                experiment="classical-echo",
                model="single",
                J=float(j),
                alpha=30.0,
                delta=delta,
                n_max=min(n_max, 40),
                grid="linear",
                name=f"{name}_classical",
            )
        )
        bundle.append(spec(experiment="predict", name=f"{name}_predictions", **common))
    elif name == "fig2":
        j, delta = _scaled(1000.0, 1e-3, scale)
        sig = _GRID_SIGMA["single"]
        gauss_rate = delta**4 * sig * j**2 / (2.0 * (j / 2.0))
        n_max = int(math.sqrt(-math.log(5e-3) / gauss_rate))
        common = dict(model="single", J=float(j), alpha=30.0, delta=delta, n_max=n_max)
        bundle.append(spec(experiment="echo", initial="cis", name="fig2_direct", **common))
        bundle.append(
            spec(
                experiment="renorm-echo",
                initial="cis",
                mode="renormalized",
                name="fig2_renormalized",
                **common,
            )
        )
        bundle.append(spec(experiment="predict", name="fig2_predictions", **common))
    else:  # fig3a / fig3b
        j, delta = _scaled(100.0, 7.5e-2 if name == "fig3a" else 2e-2, scale)
        sig = _GRID_SIGMA["coupled"]
        common = dict(model="coupled", J=float(j), eps=20.0, delta=delta)
        if name == "fig3a":
            # exponential regime: step-wise evolution over a linear grid
            t2 = (2 / 45.0) / (sig * delta**2)
            n_max = int(2.5 * t2)
            run = dict(grid="linear", method="stepping", n_max=n_max)
        else:
            # gaussian regime: long times need the spectral path
            t_h = j * (j + 1) / 2.0
            gauss_rate = delta**4 * sig * j**2 / (2.0 * t_h)
            n_max = int(math.sqrt(-math.log(1e-2) / gauss_rate))
            run = dict(grid="log", method="spectral", n_max=n_max)
        bundle.append(spec(experiment="echo", initial="cis", name=f"{name}_direct", **common, **run))
        bundle.append(
            spec(
                experiment="renorm-echo",
                initial="cis",
                mode="renormalized",
                name=f"{name}_renormalized",
                **common,
                **run,
            )
        )
        bundle.append(spec(experiment="predict", name=f"{name}_predictions", **common))
    return bundle
