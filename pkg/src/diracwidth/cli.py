"""Command-line interface: ``diracwidth <command> [options]``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 invariant failure (``verify`` only).
"""
import argparse
import hashlib
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, DiracWidthError, QuadratureError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 1, 2, 3
UNITS_NOTE = "natural units (hbar = c = 1), lengths in 1/m; Compton wavelength = 2 pi / m"

DEFAULT_N = {
    "sigma-scan": "1..19",
    "density": "1,2,5,10",
    "counterexample": "2..50",
}


def parse_n_list(text):
    """``"1..19"``, ``"1,2,5,10"`` or mixtures like ``"1..3,8"``; entries must be >= 1."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ConfigError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif re.fullmatch(r"\d+", part):
            out.append(int(part))
        else:
            raise ConfigError(f"cannot parse n specification {part!r}")
    if not out:
        raise ConfigError("n list is empty")
    if min(out) < 1:
        raise ConfigError("n values must be >= 1")
    return out


@dataclass
class RunConfig:
    command: str
    n_list: list = field(default_factory=list)
    d: int = 1
    mass: float = 1.0
    r_max: float = 40.0
    grid_points: int = 400
    tol: float = 1e-10
    seed: int = 0
    out: str = "-"
    format: str = "csv"

    def validate(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ConfigError("--mass must be positive")
        if not self.r_max > 0:
            raise ConfigError("--r-max must be positive")
        if self.grid_points < 10:
            raise ConfigError("--grid-points must be at least 10")
        if not 0 < self.tol < 1:
            raise ConfigError("--tol must lie in (0, 1)")
        if self.d not in (1, 2, 3):
            raise ConfigError("--d must be 1, 2 or 3")
        if self.command == "counterexample" and min(self.n_list) < 2:
            raise ConfigError("counterexample needs n >= 2")
        if self.format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        return self

    def digest(self):
        payload = {k: v for k, v in asdict(self).items() if k != "out"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def render_table(config, columns, rows, footer=None):
    meta = {"version": __version__, "config_hash": config.digest(), "command": config.command,
            "units": UNITS_NOTE}
    footer = footer or {}
    if config.format == "json":
        doc = {"metadata": meta, "columns": columns,
               "rows": [[v if isinstance(v, (int, str)) else float(v) for v in row] for row in rows],
               "footer": footer}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    for k in ("version", "config_hash", "command", "units"):
        buf.write(f"# {k}: {meta[k]}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    for k, v in footer.items():
        buf.write(f"# {k}: {_fmt(v) if not isinstance(v, str) else v}\n")
    return buf.getvalue()


def _write(config, text):
    if config.out in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_sigma_scan(config):
    from .wavepacket import WavePacket, gaussian_envelope, sigma_scan

    env = gaussian_envelope()
    consts = env.condition_constants
    rows = []
    failed = False
    for rep in sigma_scan(config.n_list, WavePacket(env, 1, config.mass)):
        failed |= rep.error is not None
        rows.append([rep.n, rep.sigma, float(np.linalg.norm(rep.mean_x)), rep.second_moment,
                     consts.second_moment_bound(rep.n), rep.quadrature_error])
    cols = ["n", "sigma", "mean_abs", "second_moment", "bound_84_over_n2", "quadrature_error"]
    _write(config, render_table(config, cols, rows))
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_density(config):
    from .position import RadialGrid, density_scan, position_moments
    from .wavepacket import WavePacket, gaussian_envelope

    m = config.mass
    grid = RadialGrid.geometric(r_max=config.r_max / m, r_min=1e-3 / m, points=config.grid_points)
    profiles = density_scan(config.n_list, WavePacket(gaussian_envelope(), 1, m), grid, config.tol)
    rows = []
    footer = {}
    for prof in profiles:
        # Emit in units of 1/m: r -> m r, densities per unit (m r)^3.
        for r, rho, shell in zip(grid.r_values, prof.density, prof.shell_density):
            rows.append([prof.n, r * m, rho / m**3, shell / m])
        mo = position_moments(prof, check_tail=False)
        footer[f"norm[n={prof.n}]"] = mo["norm"]
        footer[f"modal_radius[n={prof.n}]"] = prof.modal_radius * m
    _write(config, render_table(config, ["n", "r", "density", "shell_density"], rows, footer))
    bad = [k for k, v in footer.items() if k.startswith("norm") and abs(v - 1.0) > 1e-6]
    return EXIT_NUMERIC if bad else EXIT_OK


def _kernel_radii(config, explicit):
    if explicit:
        return np.round(np.arange(1, 51) * 0.1, 12)
    return np.linspace(config.r_max / config.grid_points, config.r_max, config.grid_points)


def cmd_kernel(config, default_grid=True):
    from .kernel import kernel_profile

    r = _kernel_radii(config, default_grid)
    tab = kernel_profile(r, config.mass, numeric=True)
    cols = ["r", "k0_over_r", "k1_over_r", "k1_over_r2", "F", "F_numeric", "rel_diff"]
    rows = [list(vals) for vals in zip(*(tab[c] for c in cols))]
    _write(config, render_table(config, cols, rows, {"max_rel_diff": float(np.max(tab["rel_diff"]))}))
    return EXIT_OK


def cmd_counterexample(config):
    from .delta import convergence_report

    rep = convergence_report(config.n_list, config.d, test_functions=("gauss",))
    rows = []
    for i, n in enumerate(rep.n_list):
        rows.append([n, config.d, rep.l1_norms[i], float(np.linalg.norm(rep.means[i])),
                     rep.second_moments[i], n / 2.0, rep.weak_errors["gauss"][i]])
    cols = ["n", "d", "l1_norm", "mean_norm", "second_moment", "lower_bound_n_over_2", "weak_error_gauss"]
    _write(config, render_table(config, cols, rows))
    return EXIT_OK


def cmd_verify(config):
    from .verify import run_verification

    report = run_verification(config.seed)
    report["config_hash"] = config.digest()
    if config.format == "json":
        text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    else:
        cols = ["name", "passed", "value", "tolerance"]
        rows = [[c["name"], c["passed"], c["value"], c["tolerance"]] for c in report["checks"]]
        text = render_table(config, cols, rows, {"passed": "true" if report["passed"] else "false"})
    _write(config, text)
    return EXIT_OK if report["passed"] else EXIT_INVARIANT


COMMANDS = {
    "sigma-scan": cmd_sigma_scan,
    "density": cmd_density,
    "kernel": cmd_kernel,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="diracwidth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "sigma-scan": "position width sigma of the Gaussian packet sequence",
        "density": "radial densities 4 pi r^2 |psi_n(r)|^2 (long format)",
        "kernel": "K0/r, K1/r and F(r), closed form against quadrature",
        "counterexample": "delta sequence with divergent second moment",
        "verify": "run the invariant suite and write a JSON report",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--n", default=DEFAULT_N.get(name), help="list or range, e.g. 1..19 or 1,2,5,10")
        p.add_argument("--d", type=int, default=1, help="dimension for counterexample (1-3)")
        p.add_argument("--mass", type=float, default=1.0)
        p.add_argument("--r-max", type=float, default=None, help="largest radius, units 1/m")
        p.add_argument("--grid-points", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json" if name == "verify" else "csv")
    return parser


def config_from_args(args):
    n_list = parse_n_list(args.n) if args.n is not None else []
    defaults = {"density": (40.0, 400), "kernel": (5.0, 50)}
    r_max, points = defaults.get(args.command, (40.0, 400))
    cfg = RunConfig(
        command=args.command, n_list=n_list, d=args.d, mass=args.mass,
        r_max=args.r_max if args.r_max is not None else r_max,
        grid_points=args.grid_points if args.grid_points is not None else points,
        tol=args.tol, seed=args.seed, out=args.out, format=args.format,
    )
    return cfg.validate()


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        if config.command == "kernel":
            explicit = args.r_max is None and args.grid_points is None
            return cmd_kernel(config, explicit)
        return COMMANDS[config.command](config)
    except ConfigError as exc:
        print(f"diracwidth: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"diracwidth: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DiracWidthError as exc:
        print(f"diracwidth: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
