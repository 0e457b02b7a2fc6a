#   Copyright 2020-present Michael Hall
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.


"""Command line entrypoint.

Settings resolve as per-command defaults, then a ``--config`` file of flat
``key=value`` lines, then flags. Every output carries the resolved
configuration, a schema tag and the package version; identical arguments
give identical bytes on stdout. Logs go to stderr.

Exit status is 0 on success, 2 for usage and validation errors and 1 for
any other failure; failures also print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import _typings as t
from ._logging import with_logging
from .constants import normalization_bundle
from .diagrams import CorrelationMatrix, diagram_moment, enumerate_diagrams
from .errors import (
    DomainError,
    FracLimitError,
    NotPSD,
    TooLarge,
    ValidationError,
    WrongRegime,
)
from .fracproc import (
    FoupSpec,
    PathKind,
    TimeGrid,
    brownian_sample,
    fbm_sample,
    foup_from_fbm,
    foup_stationary_sample,
)
from .mclab import (
    DEFAULT_DT,
    DEFAULT_REPS,
    DEFAULT_SEED,
    boundary_experiment,
    clt_experiment,
    nclt_experiment,
    smoothing_limit_check,
    variance_scaling,
)
from .unitroot import (
    DEFAULT_UNIT_DT,
    discrete_check,
    taubar_sample,
    thm31_sample,
    thm32_sample,
)

__all__ = ("Output", "RunConfig", "load_config_file", "main", "resolve_config", "run")

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_INPUT_ERRORS = (ValidationError, DomainError, WrongRegime, TooLarge, NotPSD)

# command -> per-command defaults; "verify" and "unitroot" are keyed by action
_DEFAULTS: dict[str, dict[str, t.Any]] = {
    "constants": {"h": 0.75, "q": 2},
    "diagram": {"p": 2, "q": 2},
    "sample": {"kind": "fbm", "h": 0.5, "gamma": 1.0, "horizon": 1.0, "dt": 0.01},
    "verify clt": {"h": 0.5, "q": 2, "gamma": 1.0, "horizon": 200.0, "dt": DEFAULT_DT},
    "verify boundary": {"q": 2, "gamma": 1.0, "horizon": 1600.0, "dt": DEFAULT_DT},
    "verify nclt": {"h": 0.85, "q": 2, "gamma": 1.0, "horizon": 800.0, "dt": DEFAULT_DT},
    "verify variance-scaling": {
        "h": 0.75,
        "q": 2,
        "gamma": 1.0,
        "t_ladder": (100.0, 200.0, 400.0, 800.0, 1600.0),
        "dt": DEFAULT_DT,
    },
    "verify smoothing": {
        "h": 0.5,
        "gamma": 2.0,
        "t_ladder": (10.0, 100.0),
        "mode": "deterministic",
        "dt": DEFAULT_DT,
    },
    "unitroot taubar": {"gamma": 50.0, "dt": DEFAULT_UNIT_DT},
    "unitroot thm31": {"h": 0.5, "gamma": 50.0, "dt": DEFAULT_UNIT_DT},
    "unitroot thm32": {"h": 0.5, "gamma": -8.0, "dt": 1e-3},
    "unitroot discrete": {"gamma": 5.0, "n": 1000, "dt": 1e-3},
}


def _ladder(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(" ", "").split(",") if x)


def _matrix(text: str) -> tuple[tuple[float, ...], ...]:
    """A JSON list of rows, inline or as a path to a \.json file."""
    if text.endswith(".json"):
        text = Path(text).read_text(encoding="utf-8")
    rows = json.loads(text)
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        msg = f"expected a JSON list of rows, got {text!r}"
        raise ValueError(msg)
    return tuple(tuple(float(v) for v in row) for row in rows)


_CONVERTERS: dict[str, Callable[[str], t.Any]] = {
    "h": float,
    "q": int,
    "p": int,
    "gamma": float,
    "horizon": float,
    "t": float,
    "t_ladder": _ladder,
    "n": int,
    "reps": int,
    "dt": float,
    "seed": int,
    "burn_in": float,
    "rho": float,
    "corr": _matrix,
    "kind": str,
    "mode": str,
    "out": str,
    "output": str,
}


@dataclass(frozen=True, slots=True)
class RunConfig:
    """The fully resolved settings of one invocation."""

    command: str
    action: str | None = None
    h: float | None = None
    q: int | None = None
    p: int | None = None
    gamma: float | None = None
    horizon: float | None = None
    t_ladder: tuple[float, ...] | None = None
    n: int | None = None
    reps: int = DEFAULT_REPS
    dt: float | None = None
    seed: int = DEFAULT_SEED
    burn_in: float | None = None
    rho: float | None = None
    corr: tuple[tuple[float, ...], ...] | None = None
    kind: str | None = None
    mode: str | None = None
    out: t.Literal["json", "csv"] = "json"
    output: str | None = None
    config: str | None = None

    @property
    def key(self) -> str:
        return self.command if self.action is None else f"{self.command} {self.action}"

    def to_dict(self) -> dict[str, t.Any]:
        out = asdict(self)
        out["t"] = out.pop("horizon")
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in out.items()}


def load_config_file(path: str | Path, /) -> dict[str, t.Any]:
    """Read flat ``key=value`` lines; ``#`` starts a comment.

    Raises
    ------
    ValidationError
        On unknown keys, malformed lines or values that do not parse.
    """
    values: dict[str, t.Any] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONVERTERS:
            msg = f"{path}:{lineno}: expected a known key=value, got {raw!r}"
            raise ValidationError(msg)
        try:
            parsed = _CONVERTERS[key](value.strip())
        except ValueError as exc:
            msg = f"{path}:{lineno}: bad value for {key}: {value.strip()!r}"
            raise ValidationError(msg) from exc
        values["horizon" if key == "t" else key] = parsed
    return values


def resolve_config(ns: argparse.Namespace, /) -> RunConfig:
    """Merge command defaults, the config file and explicit flags."""
    names = {f.name for f in fields(RunConfig)}
    key = ns.command if ns.action is None else f"{ns.command} {ns.action}"
    merged: dict[str, t.Any] = dict(_DEFAULTS.get(key, {}))
    if ns.config is not None:
        merged.update(load_config_file(ns.config))
    merged.update(
        (k, v) for k, v in vars(ns).items() if k in names and v is not None
    )
    if merged.get("out", "json") not in {"json", "csv"}:
        msg = f"out must be json or csv, got {merged['out']!r}"
        raise ValidationError(msg)
    return RunConfig(**merged)


@dataclass(frozen=True, slots=True)
class Output:
    """A JSON payload and the tabular form written for ``--out csv``."""

    schema: str
    payload: dict[str, t.Any]
    header: tuple[str, ...] = ()
    rows: list[Sequence[t.Any]] = field(default_factory=list)


def _jsonable(value: t.Any) -> t.Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(cfg: RunConfig, result: Output, /) -> str:
    if cfg.out == "json":
        doc = {
            "schema": f"fraclimit/{result.schema}/{SCHEMA_VERSION}",
            "version": __version__,
            "config": cfg.to_dict(),
            "result": result.payload,
        }
        return json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"

    buf = io.StringIO()
    buf.write(f"# fraclimit/{result.schema}/{SCHEMA_VERSION} version={__version__}\n")
    for k, v in sorted(cfg.to_dict().items()):
        buf.write(f"# {k}={json.dumps(_jsonable(v))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.header)
    writer.writerows(
        [format(v, ".17g") if isinstance(v, float) else v for v in row] for row in result.rows
    )
    return buf.getvalue()


def _sample_rows(sample: t.FloatArray) -> list[Sequence[t.Any]]:
    if sample.ndim == 1:
        return [(i, float(v)) for i, v in enumerate(sample)]
    return [(i, *map(float, row)) for i, row in enumerate(sample)]


# -- handlers ---------------------------------------------------------------


def _constants(cfg: RunConfig) -> Output:
    assert cfg.q is not None and cfg.h is not None
    bundle = normalization_bundle(cfg.q, cfg.h, cfg.gamma).to_dict()
    scalars = [(k, v) for k, v in sorted(bundle.items()) if isinstance(v, int | float | str)]
    return Output("constants", bundle, ("name", "value"), scalars)


def _diagram(cfg: RunConfig) -> Output:
    assert cfg.p is not None and cfg.q is not None
    payload: dict[str, t.Any] = {
        "p": cfg.p,
        "q": cfg.q,
        "count": len(enumerate_diagrams(cfg.p, cfg.q)),
    }
    if cfg.corr is not None and cfg.rho is not None:
        msg = "give either --rho or --corr, not both"
        raise ValidationError(msg)
    if cfg.corr is not None:
        payload["moment"] = diagram_moment(cfg.p, cfg.q, CorrelationMatrix.of(cfg.corr))
    elif cfg.rho is not None:
        corr = CorrelationMatrix.equicorrelated(cfg.p, cfg.rho)
        payload["rho"] = cfg.rho
        payload["moment"] = diagram_moment(cfg.p, cfg.q, corr)
    header = tuple(payload)
    return Output("diagram", payload, header, [tuple(payload.values())])


def _sample(cfg: RunConfig) -> Output:
    assert cfg.horizon is not None and cfg.dt is not None and cfg.h is not None
    grid = TimeGrid.from_step(cfg.horizon, cfg.dt)
    kind = PathKind(cfg.kind)
    if kind is PathKind.BROWNIAN:
        path = brownian_sample(grid, cfg.seed)
    elif kind is PathKind.FBM:
        path = fbm_sample(cfg.h, grid, cfg.seed)
    elif kind is PathKind.FOUP:
        assert cfg.gamma is not None
        path = foup_from_fbm(cfg.gamma, fbm_sample(cfg.h, grid, cfg.seed))
    else:
        assert cfg.gamma is not None
        spec = FoupSpec(cfg.h, cfg.gamma, cfg.burn_in)
        path = foup_stationary_sample(spec, grid, cfg.seed)
    times = grid.times
    payload = {"kind": str(kind), "times": times, "values": path.values}
    rows = [(float(s), float(v)) for s, v in zip(times, path.values, strict=True)]
    return Output("sample", payload, ("t", "value"), rows)


def _verify(cfg: RunConfig) -> Output:
    action = cfg.action
    if action == "variance-scaling":
        assert cfg.q is not None and cfg.h is not None and cfg.gamma is not None
        assert cfg.t_ladder is not None and cfg.dt is not None
        study = variance_scaling(
            cfg.q, cfg.h, cfg.gamma, cfg.t_ladder, cfg.reps, cfg.dt, cfg.seed
        )
        header = ("t", "variance", "ratio", "finite_ratio", "L", "L_ratio")
        rows = [tuple(r.to_dict()[k] for k in header) for r in study.rows]
        payload = study.to_dict() | {"log_slope": study.log_slope()}
        return Output("verify/variance-scaling", payload, header, rows)
    if action == "smoothing":
        assert cfg.h is not None and cfg.gamma is not None and cfg.t_ladder is not None
        assert cfg.dt is not None
        psi = (lambda s: s) if cfg.mode == "deterministic" else None
        report = smoothing_limit_check(
            cfg.h, cfg.gamma, cfg.t_ladder, psi=psi, reps=cfg.reps, dt=cfg.dt, seed=cfg.seed
        )
        rows = [(r.horizon, r.value, r.bound) for r in report.rows]
        return Output("verify/smoothing", report.to_dict(), ("t", "value", "bound"), rows)

    assert cfg.gamma is not None and cfg.horizon is not None and cfg.dt is not None
    assert cfg.q is not None
    if action == "clt":
        assert cfg.h is not None
        res = clt_experiment(cfg.q, cfg.h, cfg.gamma, cfg.horizon, cfg.dt, cfg.reps, cfg.seed)
    elif action == "boundary":
        res = boundary_experiment(cfg.q, cfg.gamma, cfg.horizon, cfg.dt, cfg.reps, cfg.seed)
    else:
        assert cfg.h is not None
        res = nclt_experiment(cfg.q, cfg.h, cfg.gamma, cfg.horizon, cfg.dt, cfg.reps, cfg.seed)
    return Output(f"verify/{action}", res.to_dict(), ("replicate", "value"), _sample_rows(res.sample))


def _unitroot(cfg: RunConfig) -> Output:
    action = cfg.action
    assert cfg.gamma is not None and cfg.dt is not None
    if action == "taubar":
        res = taubar_sample(cfg.gamma, cfg.reps, cfg.dt, cfg.seed)
        return Output(
            "unitroot/taubar", res.to_dict(), ("replicate", "value"), _sample_rows(res.sample)
        )
    if action == "discrete":
        assert cfg.n is not None
        check = discrete_check(cfg.n, cfg.gamma, cfg.reps, cfg.seed, cfg.dt)
        row = (cfg.n, cfg.gamma, check.statistic, check.pvalue)
        return Output(
            "unitroot/discrete", check.to_dict(), ("n", "gamma", "ks_2samp", "pvalue"), [row]
        )
    assert cfg.h is not None
    sampler = thm31_sample if action == "thm31" else thm32_sample
    comp = sampler(cfg.h, cfg.gamma, cfg.reps, cfg.dt, cfg.seed)
    header = ("replicate", "tau1", "tau2", "tau3", "tau4")
    return Output(f"unitroot/{action}", comp.to_dict(), header, _sample_rows(comp.sample))


_HANDLERS: dict[str, Callable[[RunConfig], Output]] = {
    "constants": _constants,
    "diagram": _diagram,
    "sample": _sample,
    "verify": _verify,
    "unitroot": _unitroot,
}


# -- parser -----------------------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> t.Never:
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file, overridden by flags")
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", choices=("json", "csv"))
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--quiet", action="store_true")
    return common


def _model_flags(p: argparse.ArgumentParser, *names: str) -> None:
    specs: dict[str, tuple[str, dict[str, t.Any]]] = {
        "h": ("--h", {"type": float, "help": "Hurst index"}),
        "q": ("--q", {"type": int, "help": "Hermite rank"}),
        "p": ("--p", {"type": int, "help": "number of levels"}),
        "gamma": ("--gamma", {"type": float}),
        "horizon": ("--t", {"type": float, "dest": "horizon", "help": "time horizon"}),
        "t_ladder": ("--t-ladder", {"type": _ladder, "help": "comma separated horizons"}),
        "n": ("--n", {"type": int, "help": "series length"}),
        "dt": ("--dt", {"type": float, "help": "grid step"}),
        "rho": ("--rho", {"type": float, "help": "equicorrelation"}),
        "corr": ("--corr", {"type": _matrix, "help": "correlation matrix as JSON rows or a .json file"}),
        "burn_in": ("--burn-in", {"type": float}),
        "kind": ("--kind", {"choices": [str(k) for k in PathKind]}),
        "mode": ("--mode", {"choices": ("deterministic", "stochastic")}),
    }
    for name in names:
        flag, kwargs = specs[name]
        p.add_argument(flag, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="fraclimit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="norming constants for (q, H, γ)")
    _model_flags(p, "h", "q", "gamma")
    p.set_defaults(action=None)

    p = sub.add_parser("diagram", parents=[common], help="diagram counts and moments")
    _model_flags(p, "p", "q", "rho", "corr")
    p.set_defaults(action=None)

    p = sub.add_parser("sample", parents=[common], help="dump one sampled path")
    _model_flags(p, "kind", "h", "gamma", "horizon", "dt", "burn_in")
    p.set_defaults(action=None)

    verify = sub.add_parser("verify", help="Monte Carlo checks of the limit theorems")
    vsub = verify.add_subparsers(dest="action", required=True)
    for name, flags in (
        ("clt", ("h", "q", "gamma", "horizon", "dt")),
        ("boundary", ("q", "gamma", "horizon", "dt")),
        ("nclt", ("h", "q", "gamma", "horizon", "dt")),
        ("variance-scaling", ("h", "q", "gamma", "t_ladder", "dt")),
        ("smoothing", ("h", "gamma", "t_ladder", "dt", "mode")),
    ):
        _model_flags(vsub.add_parser(name, parents=[common]), *flags)

    unit = sub.add_parser("unitroot", help="near unit root functionals")
    usub = unit.add_subparsers(dest="action", required=True)
    for name, flags in (
        ("taubar", ("gamma", "dt")),
        ("thm31", ("h", "gamma", "dt")),
        ("thm32", ("h", "gamma", "dt")),
        ("discrete", ("gamma", "n", "dt")),
    ):
        _model_flags(usub.add_parser(name, parents=[common]), *flags)
    return parser


def _fail(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True) + "\n")
    return code


def run(argv: Sequence[str] | None = None, /) -> int:
    """Parse ``argv``, execute and write the result. Returns the exit status."""
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except (ValidationError, OSError) as exc:
        return _fail(type(exc).__name__, exc, 2)
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else 0

    level = logging.WARNING if ns.quiet else (logging.DEBUG if ns.verbose else logging.INFO)
    with with_logging(level):
        try:
            log.debug("running %s", cfg.key)
            text = render(cfg, _HANDLERS[cfg.command](cfg))
        except _INPUT_ERRORS as exc:
            return _fail(type(exc).__name__, exc, 2)
        except (FracLimitError, OSError, ArithmeticError) as exc:
            log.exception("%s failed", cfg.key)
            return _fail(type(exc).__name__, exc, 1)

    if cfg.output is None:
        sys.stdout.write(text)
    else:
        Path(cfg.output).write_text(text, encoding="utf-8")
    return 0


def main() -> None:
    sys.exit(run())
