"""Command-line front end: run one of the sweep modes and write CSV or JSON.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numeric-domain error.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import ensemble as ens
from . import montecarlo as mc

MODES = ("curve", "trace", "montecarlo", "eta-sweep")
FORMATS = ("csv", "json")
DEFAULT_ETAS = (0.0, math.pi / 4, math.pi / 2)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3

NORMALIZATION_NOTE = (
    "Intensities in units of I0 = e0^2 (single-input intensity). g2 is the "
    "branch-averaged coincidence product divided by I0^2, i.e. the flat-spectrum "
    "mean of cos^2(eta + 2*delta_f*tau); uncorrelated light sits at 0.5."
)

_PI_LITERAL = re.compile(
    r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?|\.\d+))?\s*$",
    re.IGNORECASE,
)


def parse_angle(text: str) -> float:
    """Parse radians, also accepting multiples of pi such as ``pi/2`` or ``-3*pi/4``."""
    m = _PI_LITERAL.match(text)
    if m:
        sign, num, den = m.groups()
        value = float(num or 1.0) * math.pi / float(den or 1.0)
        value = -value if sign == "-" else value
    else:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite: {text!r}")
    return value


def format_angle(eta: float) -> str:
    """Label an angle as a simple fraction of pi when it is one."""
    for den in (1, 2, 3, 4, 6, 8, 12):
        num = eta * den / math.pi
        k = round(num)
        if abs(num - k) < 1e-12:
            if k == 0:
                return "0"
            head = {1: "", -1: "-"}.get(k, f"{k}*")
            return f"{head}pi" + (f"/{den}" if den != 1 else "")
    return repr(eta)


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    mode: str = "curve"
    eta: float = math.pi / 2
    etas: tuple[float, ...] = DEFAULT_ETAS
    bandwidth: float = ens.PAPER_BANDWIDTH
    spectral_step: float = ens.PAPER_SPECTRAL_STEP
    tau_min: float = ens.PAPER_TAU_MIN
    tau_max: float = ens.PAPER_TAU_MAX
    tau_step: float = ens.PAPER_TAU_STEP
    delta_f: Optional[float] = None
    mean_photon_number: float = 0.04
    n_windows: int = 10_000_000
    seed: int = 0
    workers: int = 1
    output_format: str = "csv"
    output_path: str = "-"
    reproducible: bool = False

    def spectral_grid(self) -> ens.SpectralGrid:
        return ens.build_spectral_grid(self.bandwidth, self.spectral_step)

    def tau_grid(self) -> ens.TauGrid:
        return ens.build_tau_grid(self.tau_min, self.tau_max, self.tau_step)

    def source(self) -> mc.SourceConfig:
        return mc.SourceConfig(self.mean_photon_number, self.n_windows, self.seed)


def build_parser() -> argparse.ArgumentParser:
    d = RunConfig()
    p = argparse.ArgumentParser(
        prog="hom-coherence",
        description="Coincidence correlation of frequency-detuned coherent photon pairs "
        "on a 50/50 beam splitter.",
    )
    p.add_argument("--mode", choices=MODES, default=d.mode)
    p.add_argument("--eta", type=parse_angle, default=d.eta,
                   help="relative pair phase in radians; 'pi/2' style literals accepted")
    p.add_argument("--etas", type=parse_angle, nargs="+", default=list(d.etas),
                   help="phases for eta-sweep mode (default: 0 pi/4 pi/2)")
    p.add_argument("--bandwidth", type=_finite_float, default=d.bandwidth, help="Hz")
    p.add_argument("--spectral-step", type=_finite_float, default=d.spectral_step, help="Hz")
    p.add_argument("--tau-min", type=_finite_float, default=d.tau_min, help="s")
    p.add_argument("--tau-max", type=_finite_float, default=d.tau_max, help="s")
    p.add_argument("--tau-step", type=_finite_float, default=d.tau_step, help="s")
    p.add_argument("--delta-f", type=_finite_float, default=None,
                   help="detuning in Hz (trace mode only)")
    p.add_argument("--mean-photon-number", type=_finite_float, default=d.mean_photon_number)
    p.add_argument("--n-windows", type=int, default=d.n_windows)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=d.workers,
                   help="threads for Monte Carlo sampling; results do not depend on it")
    p.add_argument("--format", dest="output_format", choices=FORMATS, default=d.output_format)
    p.add_argument("--output", dest="output_path", default=d.output_path,
                   help="output file, or '-' for standard output")
    p.add_argument("--reproducible", action="store_true",
                   help="omit the timestamp so identical configs give identical bytes")
    return p


def _validate(cfg: RunConfig, parser: argparse.ArgumentParser) -> None:
    if cfg.bandwidth <= 0:
        parser.error("--bandwidth must be positive")
    if cfg.spectral_step <= 0:
        parser.error("--spectral-step must be positive")
    try:
        cfg.spectral_grid()
    except ens.GridError as exc:
        parser.error(f"--spectral-step: {exc}")
    if cfg.tau_step <= 0:
        parser.error("--tau-step must be positive")
    if cfg.tau_max < cfg.tau_min:
        parser.error("--tau-max must not be below --tau-min")
    try:
        cfg.tau_grid()
    except ens.GridError as exc:
        parser.error(f"--tau-min/--tau-max/--tau-step: {exc}")
    if cfg.mode == "trace":
        if cfg.delta_f is None:
            parser.error("--delta-f is required in trace mode")
        if abs(cfg.delta_f) > cfg.bandwidth:
            parser.error(f"--delta-f {cfg.delta_f!r} lies outside the band "
                         f"[-{cfg.bandwidth!r}, {cfg.bandwidth!r}]")
    if not 0 < cfg.mean_photon_number < 1:
        parser.error("--mean-photon-number must lie in (0, 1)")
    if cfg.n_windows <= 0:
        parser.error("--n-windows must be positive")
    if not 0 <= cfg.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    if cfg.workers < 1:
        parser.error("--workers must be at least 1")


_VALUE_FLAGS = {
    "--mode", "--eta", "--bandwidth", "--spectral-step", "--tau-min", "--tau-max",
    "--tau-step", "--delta-f", "--mean-photon-number", "--n-windows", "--seed",
    "--workers", "--format", "--output",
}


def _bind_values(argv: Sequence[str]) -> list[str]:
    """Attach flag values as ``--flag=value`` so negatives like ``-pi/2`` are not read as flags."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        if tok == "--etas":
            j = i + 1
            while j < len(argv) and not argv[j].startswith("--"):
                j += 1
            # keep argparse's nargs="+" handling; leading '-' values need a guard
            out.append(tok)
            out.extend(f" {v}" if v.startswith("-") else v for v in argv[i + 1:j])
            i = j
            continue
        out.append(tok)
        i += 1
    return out


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    ns = parser.parse_args(_bind_values(list(argv)))
    values = vars(ns)
    values["etas"] = tuple(values["etas"])
    cfg = RunConfig(**values)
    _validate(cfg, parser)
    return cfg


def to_argv(cfg: RunConfig) -> list[str]:
    """Render a config as flags that ``parse_config`` maps back to the same config."""
    argv = [
        "--mode", cfg.mode,
        "--eta", repr(cfg.eta),
        "--etas", *[repr(e) for e in cfg.etas],
        "--bandwidth", repr(cfg.bandwidth),
        "--spectral-step", repr(cfg.spectral_step),
        "--tau-min", repr(cfg.tau_min),
        "--tau-max", repr(cfg.tau_max),
        "--tau-step", repr(cfg.tau_step),
        "--mean-photon-number", repr(cfg.mean_photon_number),
        "--n-windows", str(cfg.n_windows),
        "--seed", str(cfg.seed),
        "--workers", str(cfg.workers),
        "--format", cfg.output_format,
        "--output", cfg.output_path,
    ]
    if cfg.delta_f is not None:
        argv += ["--delta-f", repr(cfg.delta_f)]
    if cfg.reproducible:
        argv.append("--reproducible")
    return argv


@dataclass
class Table:
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))


def _metadata(cfg: RunConfig, **extra) -> dict:
    meta = {
        "tool": "hom-coherence",
        "version": __version__,
        "config": dataclasses.asdict(cfg),
        "rng_algorithm": mc.RNG_ALGORITHM if cfg.mode == "montecarlo" else None,
        "normalization": NORMALIZATION_NOTE,
        "spectral_weighting": "flat",
        "decoherence_time_s": ens.DECOHERENCE_TIME,
        "decoherence_applied": False,
    }
    meta["config"]["etas"] = list(cfg.etas)
    if not cfg.reproducible:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    meta.update(extra)
    return meta


def run_curve(cfg: RunConfig) -> Table:
    curve = ens.correlation_curve(cfg.spectral_grid(), cfg.tau_grid(), cfg.eta)
    cols = {"tau": curve.tau, "g2": curve.g2, "ic_mean": curve.ic_mean, "id_mean": curve.id_mean}
    return Table(cols, _metadata(cfg))


def run_eta_sweep(cfg: RunConfig) -> Table:
    sgrid, tgrid = cfg.spectral_grid(), cfg.tau_grid()
    cols = {"tau": tgrid.points.copy()}
    labels = []
    for eta in cfg.etas:
        label = f"g2_eta={format_angle(eta)}"
        if label in cols:
            raise ValueError(f"duplicate eta {eta!r} in sweep")
        cols[label] = ens.correlation_curve(sgrid, tgrid, eta).g2
        labels.append(label)
    return Table(cols, _metadata(cfg, columns_eta=dict(zip(labels, cfg.etas))))


def run_trace(cfg: RunConfig) -> Table:
    trace = ens.detuning_trace(cfg.delta_f, cfg.eta, cfg.tau_grid(), cfg.bandwidth)
    return Table({"tau": trace.tau, "product": trace.product}, _metadata(cfg))


def run_montecarlo(cfg: RunConfig) -> Table:
    src = cfg.source()
    events = mc.sample_pair_events(src, cfg.bandwidth, workers=cfg.workers)
    taus = cfg.tau_grid().points
    estimates = [mc.mc_correlation(events, cfg.eta, t) for t in taus]
    cols = {
        "tau": taus.copy(),
        "g2_hat": np.array([e.g2_hat for e in estimates]),
        "std_err": np.array([e.std_err for e in estimates]),
        "n_pairs": np.array([e.n_pairs for e in estimates], dtype=np.int64),
        "g2_closed_form": np.asarray(ens.closed_form_g2(cfg.eta, cfg.bandwidth, taus)),
    }
    return Table(cols, _metadata(cfg, pair_rates=mc.pair_rates(events, src)))


RUNNERS = {
    "curve": run_curve,
    "eta-sweep": run_eta_sweep,
    "trace": run_trace,
    "montecarlo": run_montecarlo,
}


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".16e")


def render_csv(table: Table) -> str:
    names = list(table.columns)
    lines = [",".join(names)]
    cols = [table.columns[n] for n in names]
    for i in range(table.n_rows):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_json(table: Table) -> str:
    columns = {
        name: [_json_safe(v) for v in np.asarray(col).tolist()]
        for name, col in table.columns.items()
    }
    doc = {"metadata": table.metadata, "columns": columns}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_output(table: Table, fmt: str, destination: str) -> None:
    """Write the table; CSV output gets its metadata in a ``.meta.json`` sidecar.

    With ``destination == '-'`` the CSV goes to stdout and its metadata to stderr.
    """
    if fmt == "json":
        body = render_json(table)
        meta = None
    elif fmt == "csv":
        body = render_csv(table)
        meta = json.dumps(table.metadata, indent=2) + "\n"
    else:
        raise ValueError(f"unknown output format {fmt!r}")

    if destination == "-":
        sys.stdout.write(body)
        sys.stdout.flush()
        if meta is not None:
            sys.stderr.write(meta)
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(body)
    if meta is not None:
        with open(destination + ".meta.json", "w", encoding="utf-8", newline="") as fh:
            fh.write(meta)


def run(cfg: RunConfig) -> int:
    try:
        table = RUNNERS[cfg.mode](cfg)
    except ValueError as exc:
        print(f"hom-coherence: numeric error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        write_output(table, cfg.output_format, cfg.output_path)
    except OSError as exc:
        print(f"hom-coherence: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
