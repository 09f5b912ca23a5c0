"""Command-line front end.

    phasevol volume   --symbol schrodinger-inv:d=1,s=2,c=1 --grid 1e-3:1e-1:5:log
    phasevol entropy  --symbol ... --grid ... [--route volume|spectral|closed_form]
    phasevol risk     --symbol ... --grid ... [--route ...]
    phasevol spectrum --symbol schrodinger-inv:... --floor 1e-3
    phasevol constants --symbol weighted-inv:d=2,s=2,r=1,c=1
    phasevol validate weyl|weyl-up|fubini|pinsker|weighted|power-law

Records go to stdout (or ``--out``) as CSV or JSON.  Exit status is 0 on
success, 1 for argument errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import asymptotics as asy
from .errors import ConfigurationError, NumericalError, PhasevolError, SpecParseError
from .functionals import (
    closed_form_risk,
    entropy_from_spectrum,
    entropy_from_volume,
    entropy_log_integral,
    minimax_risk,
)
from .numerics import DEFAULT_REL_TOL, _pool_size
from .spectral import (
    count_at_or_above,
    count_upward,
    harmonic_base_levels,
    harmonic_spectrum,
    spectrum_rows,
    upward_volume_harmonic,
)
from .symbols import (
    SymbolDescriptor,
    SymbolKind,
    make_power_law_radial,
    make_schrodinger_inverse,
    make_weighted_sobolev_inverse,
    power_law_coefficient,
)
from .volume import MCConfig, volume_fn

COMMANDS = ("volume", "entropy", "risk", "spectrum", "constants", "validate")
ROUTES = ("auto", "volume", "spectral", "closed_form")
SUITES = ("weyl", "weyl-up", "fubini", "pinsker", "weighted", "power-law")


class ArgumentError(PhasevolError):
    """Bad command-line usage (exit status 1)."""


# ---------------------------------------------------------------- parsing


_KINDS = {
    "schrodinger-inv": (make_schrodinger_inverse, ("s", "c", "d"), ()),
    "weighted-inv": (make_weighted_sobolev_inverse, ("s", "r", "c", "d"), ()),
    "power-law": (make_power_law_radial, ("alpha", "d"), ("coef", "amp")),
}


def parse_symbol_spec(spec: str) -> SymbolDescriptor:
    """Parse ``kind:key=value,key=value`` into a symbol descriptor."""
    kind, sep, body = spec.strip().partition(":")
    if kind not in _KINDS:
        raise SpecParseError(f"unknown symbol kind {kind!r}; expected one of {sorted(_KINDS)}", kind)
    factory, required, optional = _KINDS[kind]
    values: dict[str, float] = {}
    for item in filter(None, (t.strip() for t in body.split(","))) if sep else ():
        key, eq, raw = item.partition("=")
        key = key.strip()
        if not eq:
            raise SpecParseError(f"expected key=value, got {item!r}", item)
        if key not in required and key not in optional:
            raise SpecParseError(f"unknown key {key!r} for {kind}", key)
        try:
            val = float(raw)
        except ValueError:
            raise SpecParseError(f"value of {key!r} is not a number: {raw!r}", key) from None
        if not (val > 0 and math.isfinite(val)):
            raise SpecParseError(f"{key!r} must be positive, got {raw!r}", key)
        if key == "d" and val != int(val):
            raise SpecParseError(f"'d' must be an integer, got {raw!r}", key)
        values[key] = val
    missing = [k for k in required if k not in values]
    if missing:
        raise SpecParseError(f"missing required key {missing[0]!r} for {kind}", missing[0])
    d = int(values["d"])
    if kind == "schrodinger-inv":
        return factory(values["s"], values["c"], d)
    if kind == "weighted-inv":
        return factory(values["s"], values["r"], values["c"], d)
    return factory(values["alpha"], d, coefficient=values.get("coef"), amplitude=values.get("amp", 1.0))


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if self.points < 1:
            raise ArgumentError("grid needs at least one point")
        if self.points > 1 and not self.start < self.stop:
            raise ArgumentError(f"grid start must be below stop, got {self.start} and {self.stop}")
        if self.spacing == "log" and self.start <= 0:
            raise ArgumentError("log grid needs a positive start")

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        if self.spacing == "log":
            vals = np.geomspace(self.start, self.stop, self.points)
        else:
            vals = np.linspace(self.start, self.stop, self.points)
        vals[0], vals[-1] = self.start, self.stop
        return [float(v) for v in vals]


def parse_grid(text: str) -> Grid:
    """``start:stop:points:log|lin`` or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return Grid(v, v, 1)
        if len(parts) not in (3, 4):
            raise ValueError
        spacing = parts[3] if len(parts) == 4 else "log"
        if spacing not in ("log", "lin", "linear"):
            raise ArgumentError(f"grid spacing must be log or lin, got {spacing!r}")
        return Grid(float(parts[0]), float(parts[1]), int(parts[2]), "log" if spacing == "log" else "linear")
    except ValueError:
        raise ArgumentError(f"cannot parse grid {text!r}; expected start:stop:points:log|lin") from None


@dataclass
class RunConfig:
    command: str
    symbol_spec: Optional[str] = None
    grid: Optional[Grid] = None
    route: str = "auto"
    seed: int = 0
    tol: float = DEFAULT_REL_TOL
    output: str = "csv"
    out_path: Optional[str] = None
    suite: Optional[str] = None
    ratio: bool = False
    timing: bool = False
    mc_samples: Optional[int] = None
    floor: float = 1e-3
    extra_symbols: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ArgumentError(f"unknown command {self.command!r}")
        if self.route not in ROUTES:
            raise ArgumentError(f"unknown route {self.route!r}")
        if not self.tol > 0:
            raise ArgumentError("tol must be positive")
        if self.output not in ("csv", "json"):
            raise ArgumentError(f"unknown output format {self.output!r}")


# ------------------------------------------------------------- asymptotes


def _volume_law(sym: SymbolDescriptor) -> asy.AsymptoticLaw:
    if sym.kind is SymbolKind.SCHRODINGER_INVERSE:
        const = asy.unit_ball_volume(2 * sym.d) / (2 * math.pi * math.sqrt(sym.c)) ** sym.d
        return asy.AsymptoticLaw(const, -2.0 * sym.d / sym.s, 0, asy.Variable.LAMBDA)
    if sym.kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
        return asy.weighted_volume_asymptote(sym.s, sym.r, sym.c, sym.d)
    if sym.kind is SymbolKind.POWER_LAW_RADIAL:
        const = power_law_coefficient(sym) * sym.sup_value**sym.alpha
        return asy.AsymptoticLaw(const, -sym.alpha, 0, asy.Variable.LAMBDA)
    raise ConfigurationError("no closed-form law for custom symbols")


def _entropy_law(sym: SymbolDescriptor) -> asy.AsymptoticLaw:
    if sym.kind is SymbolKind.SCHRODINGER_INVERSE:
        return asy.pinsker_entropy_law(sym.s, sym.c, sym.d)
    if sym.kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
        return asy.weighted_entropy_asymptote(sym.s, sym.r, sym.c, sym.d)
    vol = _volume_law(sym)
    return asy.AsymptoticLaw(vol.constant / sym.alpha, -sym.alpha, 0, asy.Variable.EPS)


def _power_law_params(sym: SymbolDescriptor) -> tuple[float, float]:
    """(c_frak, alpha) of the leading volume law, when it is a pure power."""
    law = _volume_law(sym)
    if law.log_power:
        raise ConfigurationError("closed-form risk needs a pure power-law volume (r != s)")
    return law.constant, -law.exponent


def _family(sym: SymbolDescriptor) -> str:
    return {
        SymbolKind.SCHRODINGER_INVERSE: "schrodinger",
        SymbolKind.WEIGHTED_SOBOLEV_INVERSE: "weighted",
        SymbolKind.POWER_LAW_RADIAL: "power_law",
    }.get(sym.kind, "custom")


def _need_schrodinger(sym: SymbolDescriptor, what: str) -> None:
    if sym.kind is not SymbolKind.SCHRODINGER_INVERSE:
        raise ArgumentError(f"{what} needs an exact spectrum; only schrodinger-inv symbols have one")


# ------------------------------------------------------------ evaluation


COLUMNS = {
    "volume": ["symbol", "lambda", "value", "error_estimate", "route"],
    "entropy": ["symbol", "eps", "value", "error_estimate", "route"],
    "risk": ["symbol", "kappa", "value", "eps_kappa", "residual", "route"],
    "spectrum": ["k", "eigenvalue", "multiplicity", "cumulative_count"],
    "constants": list(asy.CONSTANTS_COLUMNS),
    "validate": ["suite", "symbol", "variable", "at", "value", "reference", "ratio"],
}

_DEFAULT_SYMBOLS = {
    "weyl": "schrodinger-inv:d=1,s=2,c=1",
    "weyl-up": "schrodinger-inv:d=1,s=2,c=1",
    "fubini": "schrodinger-inv:d=1,s=2,c=1",
    "pinsker": "schrodinger-inv:d=1,s=2,c=1",
    "weighted": "weighted-inv:d=2,s=2,r=1,c=1",
    "power-law": "power-law:alpha=2,d=1,coef=1",
}
_DEFAULT_GRIDS = {
    "weyl": Grid(1e-5, 1e-3, 3),
    "weyl-up": Grid(1e1, 1e3, 3),
    "fubini": Grid(1e-3, 1e-1, 3),
    "pinsker": Grid(1e-3, 1e-1, 3),
    "weighted": Grid(1e-5, 1e-3, 3),
    "power-law": Grid(1e-3, 1e-1, 3),
}
_SUITE_VARIABLE = {
    "weyl": "lambda",
    "weyl-up": "lambda",
    "fubini": "eps",
    "pinsker": "kappa",
    "weighted": "lambda",
    "power-law": "kappa",
}


def _point_fn(cfg: RunConfig, sym: SymbolDescriptor) -> Callable[[float], dict]:
    """Build the per-grid-point evaluator for ``cfg.command``."""
    label = sym.label
    route = cfg.route
    tol = cfg.tol

    if cfg.command == "volume":
        if route == "spectral":
            _need_schrodinger(sym, "spectral volume")
            seq = harmonic_spectrum(sym.s, sym.c, sym.d, min(cfg.grid.values()))

            def point(lam):
                return {"lambda": lam, "value": count_at_or_above(seq, lam), "error_estimate": 0.0, "route": "spectral"}
        elif route == "closed_form":
            law = _volume_law(sym)

            def point(lam):
                return {"lambda": lam, "value": law(lam), "error_estimate": 0.0, "route": "closed_form"}
        else:
            mc = MCConfig(cfg.mc_samples, cfg.seed) if cfg.mc_samples else None
            V = volume_fn(sym, mc_config=mc, rel_tol=tol, force_monte_carlo=mc is not None)

            def point(lam):
                if mc is not None:
                    est = V.estimate(lam)
                    value, err = est.mean, est.std_error
                else:
                    value, err = V(lam), 0.0
                return {"lambda": lam, "value": value, "error_estimate": err, "route": V.method.value}
        asymptote = _volume_law(sym) if cfg.ratio else None
        var = "lambda"
    elif cfg.command == "entropy":
        if route == "spectral":
            _need_schrodinger(sym, "spectral entropy")
            seq = harmonic_spectrum(sym.s, sym.c, sym.d, min(cfg.grid.values()))

            def point(eps):
                h = entropy_from_spectrum(seq, eps)
                return {"eps": eps, "value": h.value, "error_estimate": 0.0, "route": h.route.value}
        elif route == "closed_form":
            law = _entropy_law(sym)

            def point(eps):
                return {"eps": eps, "value": law(eps), "error_estimate": 0.0, "route": "closed_form"}
        else:
            V = volume_fn(sym, rel_tol=tol)

            def point(eps):
                h = entropy_from_volume(V, eps, tol)
                return {"eps": eps, "value": h.value, "error_estimate": h.error_estimate, "route": h.route.value}
        asymptote = _entropy_law(sym) if cfg.ratio else None
        var = "eps"
    elif cfg.command == "risk":
        if route == "spectral":
            _need_schrodinger(sym, "spectral risk")
            # Materialize a generous prefix up front; deeper levels extend under a lock.
            seq = harmonic_spectrum(sym.s, sym.c, sym.d, min(cfg.grid.values()))
            source = seq
        elif route == "closed_form":
            c_frak, alpha = _power_law_params(sym)
            source = None
        else:
            source = volume_fn(sym, rel_tol=tol)

        def point(kappa):
            if source is None:
                r = closed_form_risk(c_frak, alpha, kappa)
                residual = 0.0
            else:
                r = minimax_risk(source, kappa)
                residual = _residual_for(source, kappa, r.eps_kappa)
            return {
                "kappa": kappa,
                "value": r.value,
                "eps_kappa": r.eps_kappa,
                "residual": residual,
                "route": r.route.value,
            }
        if cfg.ratio:
            c_a = _power_law_params(sym)
            asymptote = lambda k: closed_form_risk(c_a[0], c_a[1], k).value
        else:
            asymptote = None
        var = "kappa"
    else:  # pragma: no cover - guarded by caller
        raise ArgumentError(f"command {cfg.command!r} has no grid evaluator")

    def timed(x: float) -> dict:
        t0 = time.perf_counter()
        rec = {"symbol": label}
        rec.update(point(x))
        if asymptote is not None:
            ref = asymptote(rec[var])
            rec["ratio"] = rec["value"] / ref if ref else math.nan
        if cfg.timing:
            rec["elapsed_ms"] = 1e3 * (time.perf_counter() - t0)
        return rec

    return timed


def _residual_for(source, kappa: float, eps: float) -> float:
    from .functionals import critical_function

    return kappa * kappa * critical_function(source, eps) - 1.0


def _validate_fn(cfg: RunConfig, sym: SymbolDescriptor) -> Callable[[float], dict]:
    suite = cfg.suite
    tol = cfg.tol

    if suite == "weyl":
        _need_schrodinger(sym, "weyl validation")
        seq = harmonic_spectrum(sym.s, sym.c, sym.d, min(cfg.grid.values()))
        V = volume_fn(sym)
        pair = lambda lam: (count_at_or_above(seq, lam), V(lam))
    elif suite == "weyl-up":
        _need_schrodinger(sym, "upward weyl validation")
        pair = lambda lam: (
            count_upward(harmonic_base_levels(sym.c, sym.d), lam),
            upward_volume_harmonic(sym.c, sym.d, lam),
        )
    elif suite == "fubini":
        V = volume_fn(sym, rel_tol=tol)
        pair = lambda eps: (entropy_log_integral(sym, eps, tol).value, entropy_from_volume(V, eps, tol).value)
    elif suite == "pinsker":
        _need_schrodinger(sym, "pinsker validation")
        V = volume_fn(sym)
        pair = lambda k: (minimax_risk(V, k).value, asy.pinsker_risk_asymptote(sym.s, sym.c, sym.d, k))
    elif suite == "weighted":
        if sym.kind is not SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
            raise ArgumentError("weighted validation needs a weighted-inv symbol")
        V = volume_fn(sym, rel_tol=tol)
        law = asy.weighted_volume_asymptote(sym.s, sym.r, sym.c, sym.d)
        pair = lambda lam: (V(lam), law(lam))
    elif suite == "power-law":
        if sym.kind is not SymbolKind.POWER_LAW_RADIAL:
            raise ArgumentError("power-law validation needs a power-law symbol")
        V = volume_fn(sym)
        c_frak, alpha = _power_law_params(sym)
        pair = lambda k: (minimax_risk(V, k).value, closed_form_risk(c_frak, alpha, k).value)
    else:
        raise ArgumentError(f"unknown validation suite {suite!r}; expected one of {SUITES}")

    def point(x: float) -> dict:
        t0 = time.perf_counter()
        value, ref = pair(x)
        rec = {
            "suite": suite,
            "symbol": sym.label,
            "variable": _SUITE_VARIABLE[suite],
            "at": x,
            "value": value,
            "reference": ref,
            "ratio": value / ref if ref else math.nan,
        }
        if cfg.timing:
            rec["elapsed_ms"] = 1e3 * (time.perf_counter() - t0)
        return rec

    return point


def columns_for(cfg: RunConfig) -> list[str]:
    cols = list(COLUMNS[cfg.command])
    if cfg.ratio and cfg.command in ("volume", "entropy", "risk"):
        cols.append("ratio")
    if cfg.timing and cfg.command not in ("spectrum", "constants"):
        cols.append("elapsed_ms")
    return cols


def _map_grid(fn: Callable[[float], dict], xs: Sequence[float]) -> list[dict]:
    workers = min(_pool_size(), len(xs))
    if workers <= 1:
        return [fn(x) for x in xs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, xs))


def run(cfg: RunConfig) -> list[dict]:
    """Execute ``cfg`` and return one record per grid point, in grid order."""
    if cfg.command == "validate":
        if cfg.suite not in SUITES:
            raise ArgumentError(f"unknown validation suite {cfg.suite!r}; expected one of {SUITES}")
        sym = parse_symbol_spec(cfg.symbol_spec or _DEFAULT_SYMBOLS[cfg.suite])
        grid = cfg.grid or _DEFAULT_GRIDS[cfg.suite]
        cfg.grid = grid
        return _map_grid(_validate_fn(cfg, sym), grid.values())

    if cfg.command == "constants":
        specs = ([cfg.symbol_spec] if cfg.symbol_spec else []) + list(cfg.extra_symbols)
        if not specs:
            raise ArgumentError("constants needs at least one --symbol")
        rows = []
        for spec in specs:
            sym = parse_symbol_spec(spec)
            rows.append(asy.constants_row(_family(sym), sym.s, sym.r, sym.c, sym.d, _entropy_law(sym)))
        return rows

    if not cfg.symbol_spec:
        raise ArgumentError(f"{cfg.command} needs --symbol")
    sym = parse_symbol_spec(cfg.symbol_spec)

    if cfg.command == "spectrum":
        _need_schrodinger(sym, "spectrum")
        if not 0 < cfg.floor:
            raise ArgumentError("floor must be positive")
        return spectrum_rows(harmonic_spectrum(sym.s, sym.c, sym.d, cfg.floor), cfg.floor)

    if cfg.grid is None:
        raise ArgumentError(f"{cfg.command} needs --grid")
    return _map_grid(_point_fn(cfg, sym), cfg.grid.values())


# ---------------------------------------------------------------- output


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} in output record")
        return f"{value:.17g}"
    return str(value)


def _json_value(value) -> str:
    if isinstance(value, str):
        return json.dumps(value)
    return _fmt(value)


def render(records: Sequence[dict], fmt: str, columns: Sequence[str] | None = None) -> str:
    """CSV (header + rows) or a JSON array of flat objects, 17 significant digits."""
    if columns is None:
        columns = list(records[0].keys()) if records else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(rec[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        objs = [
            "{" + ", ".join(f"{json.dumps(c)}: {_json_value(rec[c])}" for c in columns) + "}"
            for rec in records
        ]
        if not objs:
            return "[]\n"
        return "[\n  " + ",\n  ".join(objs) + "\n]\n"
    raise ArgumentError(f"unknown output format {fmt!r}")


def emit(records: Sequence[dict], fmt: str = "csv", path: str | None = None, columns: Sequence[str] | None = None) -> None:
    text = render(records, fmt, columns)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ------------------------------------------------------------------ main


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phasevol", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, grid=True):
        sp.add_argument("--symbol", action="append", help="symbol spec, e.g. schrodinger-inv:d=1,s=2,c=1")
        if grid:
            sp.add_argument("--grid", help="start:stop:points:log|lin")
            sp.add_argument("--route", default="auto", choices=ROUTES)
            sp.add_argument("--ratio", action="store_true", help="add value/asymptote column")
            sp.add_argument("--timing", action="store_true", help="add elapsed_ms column")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=DEFAULT_REL_TOL)
        sp.add_argument("--format", dest="output", default="csv", choices=("csv", "json"))
        sp.add_argument("--out", dest="out_path")

    for name in ("volume", "entropy", "risk"):
        sp = sub.add_parser(name)
        common(sp)
        if name == "volume":
            sp.add_argument("--mc", type=int, dest="mc_samples", help="force Monte Carlo with this many samples")
    sp = sub.add_parser("spectrum")
    common(sp, grid=False)
    sp.add_argument("--floor", type=float, default=1e-3)
    sp = sub.add_parser("constants")
    common(sp, grid=False)
    sp = sub.add_parser("validate")
    sp.add_argument("suite", choices=SUITES)
    common(sp)
    return p


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    symbols = ns.symbol or []
    kw = dict(
        command=ns.command,
        symbol_spec=symbols[0] if symbols else None,
        extra_symbols=symbols[1:],
        seed=ns.seed,
        tol=ns.tol,
        output=ns.output,
        out_path=ns.out_path,
    )
    if hasattr(ns, "grid"):
        kw.update(
            grid=parse_grid(ns.grid) if ns.grid else None,
            route=ns.route,
            ratio=ns.ratio,
            timing=ns.timing,
        )
    for opt in ("suite", "mc_samples", "floor"):
        if getattr(ns, opt, None) is not None:
            kw[opt] = getattr(ns, opt)
    return RunConfig(**kw)


def _fail(kind: str, exc: BaseException, status: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
        records = run(cfg)
        emit(records, cfg.output, cfg.out_path, columns_for(cfg))
    except (ArgumentError, SpecParseError, ConfigurationError) as exc:
        return _fail(type(exc).__name__, exc, 1)
    except NumericalError as exc:
        return _fail(type(exc).__name__, exc, 2)
    except OSError as exc:
        return _fail("IOError", exc, 2)
    except ValueError as exc:
        return _fail("ValueError", exc, 1)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
