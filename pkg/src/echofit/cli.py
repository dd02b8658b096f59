"""Command line entry point: ``echofit simulate | fit | report | demo``.

Exit codes: 0 success, 1 invalid input or usage, 2 fit did not converge,
3 file could not be read or written.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datafiles import DataFormatError, curve_digest, read_curve, read_fit_report, write_curve, write_fit_report
from .errors import ConfigError, DomainError, InsufficientDataError, RankError
from .estimation import (
    consistency_report,
    fit_3pe_surface,
    fit_activation,
    fit_exponential_decay,
    fit_hole_profile,
    fit_linear,
    fit_modulation_frequency,
    fit_powerlaw,
)
from .physics import t2_to_linewidth
from .sequences import Curve, HoleSpectrum, Pe3Surface
from .workbench import parse_config, simulate

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_IO = 0, 1, 2, 3
OUTPUT_DIR_ENV = "ECHOFIT_OUTPUT_DIR"

SIMULATE_SEQUENCES = {"shb": "shb", "2pe": "pe2", "3pe": "pe3", "mc3pe": "mc3pe", "powerseries": "power_series"}
FITS = ("decay", "modfreq", "powerlaw", "activation", "3pe", "hole", "linear")
# parameters each fit accepts through --fix
FIXABLE = {"3pe": ("gamma0", "amplitude", "t12"), "hole": ("laser_fwhm",), "activation": ("temperature",)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="echofit", description="Simulate and fit photon echo and hole burning data.")
    p.add_argument("--version", action="version", version=f"echofit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a sequence from a JSON config")
    s.add_argument("sequence", choices=sorted(SIMULATE_SEQUENCES))
    s.add_argument("--config", required=True, help="JSON experiment config")
    s.add_argument("--out", required=True, help="output CSV curve")

    f = sub.add_parser("fit", help="fit a model to a CSV curve")
    f.add_argument("model", choices=FITS)
    f.add_argument("--data", required=True, help="input CSV curve")
    f.add_argument("--out", required=True, help="output JSON fit report")
    f.add_argument("--fix", action="append", default=[], metavar="NAME=VALUE",
                   help="hold a parameter fixed; 3pe: gamma0 (or 'free'), amplitude (or 'free'), t12; "
                        "hole: laser_fwhm; activation: temperature")
    f.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"),
                   help="abscissa window (decay: fit window; modfreq: early window)")
    f.add_argument("--decay-window", nargs=2, type=float, metavar=("LO", "HI"),
                   help="modfreq: window for the exponential that is divided out")

    r = sub.add_parser("report", help="cross-experiment reports")
    r.add_argument("kind", choices=["consistency"])
    r.add_argument("--pe2", required=True, help="decay fit report (t2) giving Gamma0")
    r.add_argument("--shb", required=True, help="hole fit report (gamma_h)")
    r.add_argument("--sd-fit", required=True, help="3pe fit report (gamma1)")
    r.add_argument("--shb-two-sigma", type=float, default=None,
                   help="override the 2-sigma of the hole burning linewidth, Hz")
    r.add_argument("--out", help="output JSON report (printed to stdout as well)")

    d = sub.add_parser("demo", help="run the bundled synthetic reproductions")
    d.add_argument("name", choices=["paper"])
    d.add_argument("--out-dir", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or ./echofit_demo)")
    d.add_argument("--seed", type=int, default=0)
    return p


def _parse_fix(items, model):
    allowed = FIXABLE.get(model, ())
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--fix {item!r}: expected NAME=VALUE")
        if name not in allowed:
            raise ConfigError(f"--fix {name}: not a fixable parameter of '{model}' (allowed: {list(allowed)})")
        if value.lower() == "free" and model == "3pe" and name in ("gamma0", "amplitude"):
            out[name] = None
            continue
        try:
            out[name] = float(value)
        except ValueError:
            raise ConfigError(f"--fix {name}: {value!r} is not a number") from None
    return out


def _cmd_simulate(args) -> int:
    sequence = SIMULATE_SEQUENCES[args.sequence]
    text = Path(args.config).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "sequence" not in doc:
        doc["sequence"] = sequence
        text = json.dumps(doc)
    config = parse_config(text)
    if config.sequence != sequence:
        raise ConfigError(f"sequence: config says {config.sequence!r} but '{args.sequence}' was requested")
    data = simulate(config)
    curve = data if isinstance(data, Curve) else data.to_curve()
    curve.meta.update({"seed": config.seed, "sequence": sequence})
    write_curve(curve, args.out)
    return EXIT_OK


def _run_fit(model, curve, fixed, args):
    if model == "decay":
        return fit_exponential_decay(curve, args.window)
    if model == "modfreq":
        return fit_modulation_frequency(curve, args.window or (0.0, 200e-9), args.decay_window)
    if model == "powerlaw":
        return fit_powerlaw(curve)
    if model == "linear":
        return fit_linear(curve)
    if model == "activation":
        temperature = fixed.get("temperature", curve.meta.get("temperature"))
        if temperature is None:
            raise ConfigError("activation fit needs the temperature: --fix temperature=K or 'temperature' in meta")
        return fit_activation(curve, float(temperature))
    if model == "3pe":
        surface = Pe3Surface.from_curve(curve, fixed.get("t12"))
        return fit_3pe_surface(surface, gamma0=fixed.get("gamma0", 0.4e6), amplitude=fixed.get("amplitude", 1.0))
    spectrum = HoleSpectrum.from_curve(curve)
    return fit_hole_profile(spectrum, fixed.get("laser_fwhm"))


def _cmd_fit(args) -> int:
    fixed = _parse_fix(args.fix, args.model)
    curve = read_curve(args.data)
    result = _run_fit(args.model, curve, fixed, args)
    write_fit_report(result, args.out, fit=args.model, input_digest=curve_digest(curve))
    for name in result.names:
        print(f"{name:14s} {result[name]: .6g} +/- {result.error(name):.3g} {result.units[name]}")
    for flag in result.flags:
        print(f"flag: {flag}")
    if not result.converged:
        print(f"fit did not converge after {result.iterations} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _gamma0_from_report(result):
    if "t2" in result.names:
        t2, err = result["t2"], result.error("t2")
        gamma0 = float(t2_to_linewidth(t2))
        return gamma0, gamma0 * err / t2
    for name in ("gamma0", "gamma_h"):
        if name in result.names:
            return result[name], result.error(name)
    raise DataFormatError("--pe2 report has neither t2 nor gamma0")


def _cmd_report(args) -> int:
    pe2 = read_fit_report(args.pe2)
    shb = read_fit_report(args.shb)
    sd = read_fit_report(args.sd_fit)
    gamma0, gamma0_err = _gamma0_from_report(pe2)
    if "gamma_h" not in shb.names:
        raise DataFormatError("--shb report has no gamma_h")
    if "gamma1" not in sd.names:
        raise DataFormatError("--sd-fit report has no gamma1")
    shb_err = shb.error("gamma_h") if args.shb_two_sigma is None else args.shb_two_sigma
    report = consistency_report(gamma0, shb["gamma_h"], sd, shb_err, gamma0_err)
    doc = {"tool": "echofit", "version": __version__, "report": "consistency", "gamma0_2pe": gamma0,
           "gamma0_two_sigma": gamma0_err, **report.as_dict()}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def _cmd_demo(args) -> int:
    from .demo import run_paper_demo

    out_dir = args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "echofit_demo"
    summary = run_paper_demo(out_dir, seed=args.seed)
    print(summary["table"], end="")
    print(f"outputs written to {out_dir}")
    return EXIT_OK


COMMANDS = {"simulate": _cmd_simulate, "fit": _cmd_fit, "report": _cmd_report, "demo": _cmd_demo}


def cli_dispatch(argv=None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"echofit: cannot access {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"echofit: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        for line in exc.errors:
            print(f"echofit: {line}", file=sys.stderr)
        return EXIT_INVALID
    except (DomainError, RankError, InsufficientDataError) as exc:
        print(f"echofit: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None) -> None:
    sys.exit(cli_dispatch(argv))


if __name__ == "__main__":
    main()
