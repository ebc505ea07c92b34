"""Command-line front end.

Every run resolves its configuration (defaults, then ``--config`` file, then
flags), writes it to ``config.json`` in the output directory and stamps each
output with the package version, a hash of the configuration and the master
seed. Outputs are staged and only moved into place when the run succeeds.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 assumption not met.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    QuadratureError,
    expected_count_ball,
    expected_count_chirp_strip,
    intensity,
    spectrogram,
)
from .bounds import AssumptionError
from .contours import Circle, chirp_strip, rectangle, rectangle_cn
from .experiments import (
    ExclusionError,
    count_statistics,
    empirical_intensity,
    estimate_sup_mean,
    hermite_trapping_setup,
    pair_trapping_setup,
    sup_tail_check,
    trapping_experiment,
)
from .noise import NoisyField, OutOfRadiusError, realization_seed, sample_gaf_for_radius
from .signals import ChirpPair, Hermite, LinearChirp, chirp_frame
from .validation import TEMPLATES, run_checks
from .zeros import ContourError, GridSpec, find_zeros

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_ASSUMPTION = 0, 1, 2, 3

DEFAULTS = {
    "signal": "hermite",
    "k": 1,
    "a": 0.0,
    "b": 0.0,
    "a1": -1.0,
    "a2": 0.0,
    "gamma": None,
    "gamma1": None,
    "gamma2": None,
    "domain": "-3,-3,3,3",
    "res": 32.0,
    "n": 1000,
    "seed": 0,
    "eps": 0.05,
    "region": None,
    "bin": 0.25,
    "n_sup": 10000,
    "disc": None,
    "noiseless": False,
    "tol": None,
    "family": None,
}

INT_KEYS = {"k", "n", "seed", "n_sup", "disc"}
FLOAT_KEYS = {"a", "b", "a1", "a2", "gamma", "gamma1", "gamma2", "res", "eps", "bin", "tol"}
BOOL_KEYS = {"noiseless"}


class UsageError(ValueError):
    pass


class AssumptionNotMet(RuntimeError):
    pass


# --- configuration -----------------------------------------------------------------


def _coerce(key, value):
    if value is None or value == "":
        return None
    try:
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
        if key in BOOL_KEYS:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes", "on")
    except ValueError as e:
        raise UsageError(f"bad value for {key}: {value!r}") from e
    return value


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            cfg.update(read_config_file(args.config))
        except OSError as e:
            raise UsageError(f"cannot read config file: {e}") from e
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            cfg[key] = _coerce(key, v)
    cfg["command"] = args.command
    return cfg


def config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def parse_domain(text):
    msg = "domain must be x0,y0,x1,y1 with x0<x1 and y0<y1"
    try:
        x0, y0, x1, y1 = (float(t) for t in str(text).split(","))
    except ValueError as e:
        raise UsageError(msg) from e
    if not (x1 > x0 and y1 > y0):
        raise UsageError(msg)
    return x0, y0, x1, y1


def build_signal(cfg):
    kind = cfg["signal"]
    try:
        if kind == "hermite":
            return Hermite(cfg["k"], 1.0 if cfg["gamma"] is None else cfg["gamma"])
        if kind == "chirp":
            return LinearChirp(cfg["a"], cfg["b"], 1.0 if cfg["gamma"] is None else cfg["gamma"])
        if kind == "pair":
            g1 = 1.0 if cfg["gamma1"] is None else cfg["gamma1"]
            g2 = 1.0 if cfg["gamma2"] is None else cfg["gamma2"]
            return ChirpPair(cfg["a1"], cfg["a2"], cfg["b"], g1, g2)
    except ValueError as e:
        raise UsageError(str(e)) from e
    raise UsageError(f"unknown signal {kind!r} (hermite, chirp, pair)")


def build_region(cfg, signal):
    """``ball:R``, ``circle:x,y,R``, ``rect:x0,y0,x1,y1``, ``strip:R[,s0]``, ``cell:N``.

    Without ``--region`` the natural region of the family is used: the trapping
    disc for Hermite, the unit strip of width 1 for a chirp, ``C_0`` for a pair.
    """
    spec = cfg["region"]
    if spec is None:
        if isinstance(signal, Hermite):
            return Circle(0j, math.sqrt(max(signal.k, 1) / math.pi))
        if isinstance(signal, LinearChirp):
            return chirp_strip(signal, 1.0)
        return rectangle_cn(signal, 0)
    kind, _, rest = str(spec).partition(":")
    try:
        vals = [float(t) for t in rest.split(",")] if rest else []
        if kind == "ball" and len(vals) == 1:
            return Circle(0j, vals[0])
        if kind == "circle" and len(vals) == 3:
            return Circle(complex(vals[0], vals[1]), vals[2])
        if kind == "rect" and len(vals) == 4:
            return rectangle(*vals)
        if kind == "strip" and len(vals) in (1, 2) and isinstance(signal, LinearChirp):
            return chirp_strip(signal, vals[0], *(vals[1:]))
        if kind == "cell" and len(vals) == 1 and isinstance(signal, ChirpPair):
            return rectangle_cn(signal, int(vals[0]))
    except ValueError as e:
        raise UsageError(f"bad region {spec!r}: {e}") from e
    raise UsageError(f"bad region {spec!r}")


def _stamp(cfg):
    return {"version": __version__, "config_hash": config_hash(cfg), "master_seed": cfg["seed"]}


def _csv_header(cfg):
    s = _stamp(cfg)
    return f"# tfzeros {s['version']} config_hash={s['config_hash']} master_seed={s['master_seed']}\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


class Outputs:
    """Files staged in a temporary directory and moved to ``out`` on success."""

    def __init__(self, out, cfg):
        self.out = Path(out)
        self.cfg = cfg
        self.stage = Path(tempfile.mkdtemp(prefix=".tfzeros-", dir=self.out.parent if self.out.parent.exists() else None))

    def csv(self, name, body):
        (self.stage / name).write_text(_csv_header(self.cfg) + body)

    def json(self, name, data):
        payload = {**_stamp(self.cfg), **_jsonable(data)}
        (self.stage / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def commit(self):
        self.json("config.json", {"config": self.cfg})
        self.out.mkdir(parents=True, exist_ok=True)
        for f in sorted(self.stage.iterdir()):
            shutil.move(str(f), self.out / f.name)
        self.discard()

    def discard(self):
        shutil.rmtree(self.stage, ignore_errors=True)


# --- subcommands --------------------------------------------------------------------


def _grid(cfg):
    x0, y0, x1, y1 = parse_domain(cfg["domain"])
    if cfg["res"] < 8:
        raise UsageError("res must be at least 8")
    return GridSpec(x0, y0, x1, y1, cfg["res"])


def _field_grid_csv(signal, grid, extra=None):
    xs, ys = grid.nodes()
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    cols = {"spectrogram": np.asarray(spectrogram(signal, Z)).ravel()}
    if extra:
        cols.update(extra(Z))
    lines = ["tau,omega," + ",".join(cols) + "\n"]
    for j, z in enumerate(Z):
        vals = ",".join(repr(float(c[j])) for c in cols.values())
        lines.append(f"{float(z.real)!r},{float(z.imag)!r},{vals}\n")
    return "".join(lines)


def cmd_intensity(cfg, out: Outputs, threads):
    """Analytic density grid and, for n > 0, the empirical zero histogram."""
    signal = build_signal(cfg)
    grid = _grid(cfg)
    out.csv("analytic_density.csv", _field_grid_csv(
        signal, grid, lambda Z: {"analytic_density": np.asarray(intensity(signal, Z)).ravel()}))
    summary = {"signal": repr(signal)}
    if cfg["n"] > 0:
        profile = None
        if isinstance(signal, Hermite):
            half = min(-grid.x0, grid.x1, -grid.y0, grid.y1)
            if half > 0:
                profile = np.linspace(0.0, math.pi * half * half, 31)
        hist = empirical_intensity(signal, grid, cfg["n"], cfg["seed"], bin_size=cfg["bin"],
                                   profile_edges=profile, threads=threads)
        out.csv("histogram.csv", hist.to_csv())
        if hist.profile is not None:
            out.csv("radial_profile.csv", hist.profile_csv())
        summary.update(hist.summary())
    out.json("summary.json", summary)
    return EXIT_OK


def cmd_zeros(cfg, out: Outputs, threads):
    """Zeros of one realization (or of the noiseless signal) and the spectrogram grid."""
    signal = build_signal(cfg)
    grid = _grid(cfg)
    if cfg["noiseless"]:
        field = NoisyField(signal)
        seed = None
    else:
        seed = realization_seed(cfg["seed"], 0)
        field = NoisyField(signal, sample_gaf_for_radius(seed, grid.max_modulus() + 1.0))
    zs = find_zeros(field, grid)
    out.csv("zeros.csv", zs.to_csv())
    if cfg["noiseless"]:
        out.csv("spectrogram.csv", _field_grid_csv(signal, grid))
    else:
        from .noise import noisy_spectrogram

        out.csv("spectrogram.csv", _field_grid_csv(
            signal, grid, lambda Z: {"noisy_spectrogram": np.ravel(noisy_spectrogram(field, Z))}))
    out.json("summary.json", {"signal": repr(signal), "realization_seed": seed,
                              "total_count": zs.total_count, "n_zeros": len(zs),
                              "domain_area": grid.area})
    return EXIT_OK


def _analytic_count(signal, region, cfg):
    if isinstance(signal, Hermite) and isinstance(region, Circle) and region.center == 0:
        return expected_count_ball(signal.k, signal.gamma, region.radius)
    if isinstance(signal, LinearChirp) and (cfg["region"] is None or str(cfg["region"]).startswith("strip:")):
        R = 1.0 if cfg["region"] is None else float(str(cfg["region"])[6:].split(",")[0])
        return expected_count_chirp_strip(R, signal.b, signal.gamma)
    return None


def cmd_counts(cfg, out: Outputs, threads):
    """Statistics of the number of zeros inside a region."""
    signal = build_signal(cfg)
    region = build_region(cfg, signal)
    if cfg["n"] < 1:
        raise UsageError("counts needs n >= 1")
    stats = count_statistics(signal, region, cfg["n"], cfg["seed"], threads=threads)
    data = {"signal": repr(signal), "statistics": stats.to_dict(),
            "analytic_mean": _analytic_count(signal, region, cfg)}
    out.json("counts.json", data)
    return EXIT_OK


def cmd_trap(cfg, out: Outputs, threads):
    """Trapping frequency against the analytic lower bound."""
    if not 0.0 < cfg["eps"] < 0.25:
        raise UsageError(f"eps must lie in (0, 1/4), got {cfg['eps']}")
    if cfg["n"] < 1:
        raise UsageError("trap needs n >= 1")
    kind = cfg["signal"]
    if kind == "hermite" and cfg["gamma"] is None and cfg["region"] is None:
        signal, region, m_hat = hermite_trapping_setup(cfg["k"], cfg["eps"], cfg["n_sup"], cfg["seed"], threads)
    elif kind == "pair" and cfg["gamma1"] is None and cfg["gamma2"] is None and cfg["region"] is None:
        shape = build_signal(cfg)
        fr = chirp_frame(shape)
        signal, region, m_hat = pair_trapping_setup(fr.a, cfg["eps"], cfg["n_sup"], cfg["seed"], b=shape.b,
                                                    a1=shape.a1, threads=threads)
    else:
        signal = build_signal(cfg)
        region = build_region(cfg, signal)
        m_hat = estimate_sup_mean(region, cfg["n_sup"], cfg["seed"], threads=threads)
    target = signal.k if isinstance(signal, Hermite) else 1
    report = trapping_experiment(signal, region, target, cfg["n"], cfg["seed"], cfg["eps"], m_hat=m_hat,
                                 threads=threads)
    out.json("trap.json", {"signal": repr(signal), "report": report.to_dict()})
    if report.verdict == "not-applicable":
        out.commit()
        raise AssumptionNotMet("trapping assumptions not met; verdict withheld")
    return EXIT_OK


def cmd_sup(cfg, out: Outputs, threads):
    """Sup-mean estimate on a contour and its tail check."""
    if cfg["region"] is None:
        region = Circle(0j, math.sqrt(1.0 / math.pi))
    else:
        region = build_region(cfg, build_signal(cfg))
    disc = cfg["disc"]
    try:
        est = estimate_sup_mean(region, cfg["n"], cfg["seed"], discretization=disc, threads=threads)
    except ValueError as e:
        raise UsageError(str(e)) from e
    rows = sup_tail_check(region, cfg["n"], cfg["seed"], m_hat=est, threads=threads,
                          discretization=2 * est.discretization)
    out.json("sup.json", {
        "estimate": est.to_dict(),
        "tail": [{"u": r.u, "exceedance": r.exceedance, "se": r.se, "bound": r.bound, "ok": r.ok} for r in rows],
    })
    return EXIT_OK


def cmd_validate(cfg, out: Outputs, threads):
    """Cross-route consistency checks."""
    fams = None
    if cfg["family"]:
        fams = [f.strip() for f in str(cfg["family"]).split(",")]
        bad = [f for f in fams if f not in TEMPLATES]
        if bad:
            raise UsageError(f"unknown family {bad} (choose from {sorted(TEMPLATES)})")
    results = run_checks(fams, cfg["tol"])
    failures = [r.to_dict() for r in results if not r.ok]
    out.json("validate.json", {"n_checks": len(results), "failures": failures,
                               "checks": [r.to_dict() for r in results]})
    if failures:
        out.commit()
        for f in failures:
            print(f"FAIL {f['name']} {f['signal']}: {f['value']:.3g} > {f['tol']:.3g}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


COMMANDS = {
    "intensity": cmd_intensity,
    "zeros": cmd_zeros,
    "counts": cmd_counts,
    "trap": cmd_trap,
    "sup": cmd_sup,
    "validate": cmd_validate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--signal", choices=["hermite", "chirp", "pair"])
    for name in ("k", "n", "seed", "threads", "n-sup", "disc"):
        common.add_argument(f"--{name}", type=int)
    for name in ("a", "b", "a1", "a2", "gamma", "gamma1", "gamma2", "res", "eps", "bin", "tol"):
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--domain", help="x0,y0,x1,y1")
    common.add_argument("--region", help="ball:R | circle:x,y,R | rect:x0,y0,x1,y1 | strip:R[,s0] | cell:N")
    common.add_argument("--family", help="comma-separated families for validate")
    common.add_argument("--noiseless", action="store_true")
    common.add_argument("--out", default="out")
    common.add_argument("--config", help="key = value file")

    parser = _Parser(prog="tfzeros", description="Zeros of Gaussian spectrograms of noisy signals.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name))
    return parser


def _glue_negative_values(argv):
    # "--domain -3,-3,3,3" would otherwise read the value as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--domain", "--region"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    out = None
    try:
        cfg = resolve_config(args)
        threads = args.threads or 1
        if threads < 1:
            raise UsageError("threads must be >= 1")
        out = Outputs(args.out, cfg)
        code = COMMANDS[args.command](cfg, out, threads)
        if code == EXIT_OK:
            out.commit()
        return code
    except UsageError as e:
        print(f"tfzeros: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AssumptionNotMet as e:
        print(f"tfzeros: {e}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except AssumptionError as e:
        print(f"tfzeros: assumption not met: {e}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (ContourError, ExclusionError, QuadratureError, OutOfRadiusError, FloatingPointError) as e:
        print(f"tfzeros: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"tfzeros: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if out is not None:
            out.discard()


if __name__ == "__main__":
    sys.exit(main())
