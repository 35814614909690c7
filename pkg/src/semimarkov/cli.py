"""Command-line front end.

Subcommands:

    trajectories  q (pi = 1) or g (pi = 1/2) on a grid, with the population
                  w(t) of the first state for a few initial values w(0)
    rates         q and the time-local rates gamma, delta, with marker rows
                  at the zeros of q
    measures      BLP and RHP measures and the divisibility class of a qubit model
    mc-verify     Monte Carlo checks of parity, the Markov property and the
                  Chapman-Kolmogorov composition
    figures       all figure datasets with their fixed presets

Tables are written as CSV (17 significant digits) or as JSON lists of flat
rows; reports are flat JSON objects. Infinite measures carry an explicit
``"infinite": true`` tag and a null value. Exit status: 0 success,
2 invalid configuration, 3 numerical failure, 4 statistical-test failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._purepy import SplitMix64
from .classical import SemiMarkovSpec, trajectory
from .errors import ConsistencyError, InsufficientSamplesError, InvalidInputError, NumericalError
from .measures import blp_measure, blp_measure_search, classify, rhp_measure
from .montecarlo import chapman_kolmogorov_residual, estimate_parity, markov_test
from .quantum import Model, ModelSpec
from .renewal import ErlangTwo, Exponential, Hypoexponential, Mixture, WaitingTime

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_STATISTICAL = 4

DISTRIBUTIONS = ("exp", "erlang2", "hypoexp", "mix")
TABLE_COMMANDS = ("trajectories", "rates")


@dataclass
class RunConfig:
    command: str
    dist: str = "erlang2"
    lambda1: float = 1.0
    lambda2: float | None = None
    mu: float = 0.5
    ps2: float | None = None
    pi: float = 1.0
    model: str = "dephasing"
    tmax: float | None = None
    grid: int = 401
    seed: int = 0
    samples: int = 100_000
    markov_samples: int = 1_000_000
    trajectories: int = 5
    w0: list = field(default_factory=list)
    sigma: float = 3.0
    markov_z: float = 5.0
    search: bool = False
    figure: list = field(default_factory=list)
    out: str | None = None
    format: str | None = None

    def waiting_time(self) -> WaitingTime:
        if self.dist == "exp":
            return Exponential(self.lambda1)
        if self.dist == "erlang2":
            return ErlangTwo(self.lambda1)
        if self.dist == "hypoexp":
            if self.ps2 is not None:
                return Hypoexponential.from_ratio(self.ps2, self.lambda1)
            if self.lambda2 is None:
                raise InvalidInputError("hypoexp needs --lambda2 or --ps2")
            return Hypoexponential(self.lambda1, self.lambda2)
        if self.dist == "mix":
            if self.lambda2 is None:
                raise InvalidInputError("mix needs --lambda2")
            return Mixture(self.lambda1, self.lambda2, self.mu)
        raise InvalidInputError(f"unknown distribution {self.dist!r}")

    def validate(self):
        """Build every object the command needs so bad input fails before any work."""
        w = self.waiting_time()
        if self.pi not in (0.5, 1.0):
            raise InvalidInputError("--pi must be 0.5 or 1")
        spec = SemiMarkovSpec(w, self.pi)
        model = ModelSpec(Model(self.model), w)
        if self.tmax is not None and not self.tmax > 0:
            raise InvalidInputError("--tmax must be > 0")
        if self.grid < 2:
            raise InvalidInputError("--grid must be >= 2")
        if self.samples < 1 or self.markov_samples < 1:
            raise InvalidInputError("sample counts must be >= 1")
        if self.trajectories < 0:
            raise InvalidInputError("--trajectories must be >= 0")
        if any(not 0.0 <= v <= 1.0 for v in self.w0):
            raise InvalidInputError("--w0 values must lie in [0, 1]")
        if self.format is None:
            self.format = "csv" if self.command in TABLE_COMMANDS or self.command == "figures" else "json"
        if self.format == "csv" and self.command in ("measures", "mc-verify"):
            raise InvalidInputError(f"{self.command} writes a JSON report; --format csv is not available")
        return w, spec, model

    def parameters(self, w: WaitingTime) -> dict:
        return {"dist": w.name, "rates": list(w.rates), "mu": w.sampler_params[2], "pi": self.pi}


# ---------------------------------------------------------------------------
# serialization

def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in x]
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    return x


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(int(v)) if isinstance(v, (int, np.integer)) else "%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


def format_table(columns, rows, fmt: str) -> str:
    if fmt == "csv":
        return format_csv(columns, rows)
    return json.dumps([dict(zip(columns, _json_value(list(r)))) for r in rows], indent=1) + "\n"


def read_csv(text: str):
    """Parse output of ``format_csv`` back into (columns, float array)."""
    lines = text.strip().splitlines()
    columns = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]], dtype=float)
    return columns, data.reshape(len(lines) - 1, len(columns))


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# ---------------------------------------------------------------------------
# tables

def _default_tmax(w: WaitingTime) -> float:
    return 5.0 * w.mean


def initial_values(seed: int, k: int) -> list[float]:
    """k initial populations drawn uniformly in [0, 1) from the seeded stream."""
    rng = SplitMix64(seed, 0)
    return [rng.uniform() for _ in range(k)]


def trajectories_table(w: WaitingTime, pi: float, t_max: float, grid: int, w0s):
    spec = SemiMarkovSpec(w, pi)
    t = np.linspace(0.0, t_max, grid)
    mode = np.asarray(spec.mode(t), dtype=float)
    cols = ["t", "q" if pi == 1.0 else "g"] + [f"w_{i + 1}" for i in range(len(w0s))]
    data = [t, mode] + [trajectory(spec, v, t) for v in w0s]
    return cols, np.column_stack(data)


def rates_table(w: WaitingTime, t_max: float, grid: int):
    """(t, q, gamma, delta, singular) on the grid plus one marker row per zero of q."""
    t = np.linspace(0.0, t_max, grid)
    form = w.parity_form
    zeros = np.array(form.zeros(t_max) if form is not None else [], dtype=float)
    tt = np.concatenate([t, zeros])
    flag = np.concatenate([np.zeros(t.size), np.ones(zeros.size)])
    order = np.argsort(tt, kind="stable")
    tt, flag = tt[order], flag[order]
    q = np.asarray(w.parity(tt), dtype=float) * np.ones_like(tt)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gamma = np.asarray(w.gamma_rate(tt), dtype=float) * np.ones_like(tt)
        delta = np.asarray(w.delta_rate(tt), dtype=float) * np.ones_like(tt)
    gamma[flag == 1] = np.nan
    delta[flag == 1] = np.nan
    gamma[~np.isfinite(gamma)] = np.nan
    delta[~np.isfinite(delta)] = np.nan
    rows = [(a, b, c, d, int(s)) for a, b, c, d, s in zip(tt, q, gamma, delta, flag)]
    return ["t", "q", "gamma", "delta", "singular"], rows


def _rows(data):
    return [tuple(r) for r in np.asarray(data)]


# ---------------------------------------------------------------------------
# commands

def cmd_trajectories(cfg: RunConfig) -> int:
    w, _, _ = cfg.validate()
    w0s = cfg.w0 or initial_values(cfg.seed, cfg.trajectories)
    t_max = cfg.tmax if cfg.tmax is not None else _default_tmax(w)
    cols, data = trajectories_table(w, cfg.pi, t_max, cfg.grid, w0s)
    _emit(format_table(cols, _rows(data), cfg.format), cfg.out)
    return EXIT_OK


def cmd_rates(cfg: RunConfig) -> int:
    w, _, _ = cfg.validate()
    t_max = cfg.tmax if cfg.tmax is not None else _default_tmax(w)
    cols, rows = rates_table(w, t_max, cfg.grid)
    _emit(format_table(cols, rows, cfg.format), cfg.out)
    return EXIT_OK


def _flatten_measure(prefix: str, m) -> dict:
    return {f"{prefix}_{k}": v for k, v in m.to_dict().items()}


def measures_report(cfg: RunConfig) -> dict:
    w, _, model = cfg.validate()
    report = {"command": "measures", "model": model.variant.value}
    report.update(cfg.parameters(w))
    if cfg.search:
        res = blp_measure_search(model, cfg.tmax)
        report.update(_flatten_measure("blp", res.measure))
        report["blp_pair_angles"] = list(res.angles)
    else:
        report.update(_flatten_measure("blp", blp_measure(model, cfg.tmax).measure))
    report.update(_flatten_measure("rhp", rhp_measure(model, cfg.tmax)))
    cls = classify(model, cfg.tmax)
    report["class"] = cls.kind.value
    report["positivity_witness"] = list(cls.positivity_witness) if cls.positivity_witness else None
    report["cp_witness"] = list(cls.cp_witness) if cls.cp_witness else None
    return report


def cmd_measures(cfg: RunConfig) -> int:
    report = measures_report(cfg)
    _emit(json.dumps(_json_value(report), indent=1) + "\n", cfg.out)
    return EXIT_OK


def mc_report(cfg: RunConfig) -> dict:
    """Run the three Monte Carlo checks; ``passed`` is False if any definite expectation fails.

    Parity estimates must lie within ``sigma`` standard errors of q(t). For the
    exponential family the Markov and Chapman-Kolmogorov statistics must also
    lie within ``sigma``. For other families a Markov violation is expected
    but its detection depends on the sample size, so it is reported without
    affecting ``passed``.
    """
    w, spec, _ = cfg.validate()
    markovian = isinstance(w, Exponential)
    report = {"command": "mc-verify", "seed": cfg.seed, "samples": cfg.samples,
              "markov_samples": cfg.markov_samples, "sigma": cfg.sigma}
    report.update(cfg.parameters(w))
    passed = True

    rng = SplitMix64(cfg.seed, 1)
    horizon = cfg.tmax if cfg.tmax is not None else 5.0 / w.max_rate
    times = sorted(horizon * (1.0 - rng.uniform()) for _ in range(10))
    exact = np.asarray(w.parity(np.array(times)), dtype=float)
    est = estimate_parity(spec, times, cfg.samples, cfg.seed)
    zs = [e.z(x) for e, x in zip(est, exact)]
    ok = all(abs(z) <= cfg.sigma for z in zs)
    report.update({"parity_times": times, "parity_exact": list(exact),
                   "parity_estimate": [e.estimate for e in est],
                   "parity_stderr": [e.stderr for e in est], "parity_z": zs,
                   "parity_status": "pass" if ok else "fail"})
    passed &= ok

    mean = w.mean
    tri = (0.0, 0.5 * mean, mean)
    report["markov_times"] = list(tri)
    try:
        mt = markov_test(spec, tri, (0, 0, 0), cfg.markov_samples, cfg.seed)
        report.update({"markov_full": mt.full.estimate, "markov_reduced": mt.reduced.estimate,
                       "markov_complement": mt.complement.estimate, "markov_z": mt.z,
                       "markov_violation_detected": abs(mt.z) > cfg.markov_z})
        if markovian:
            ok = abs(mt.z) <= cfg.sigma
            report["markov_status"] = "pass" if ok else "fail"
            passed &= ok
        else:
            report["markov_status"] = "reported"
    except InsufficientSamplesError as exc:
        report.update({"markov_status": "insufficient_samples", "markov_reason": str(exc)})
        passed = False

    try:
        ck = chapman_kolmogorov_residual(spec, tri, cfg.markov_samples, cfg.seed)
        report.update({"ck_residual": ck.residual, "ck_stderr": ck.stderr, "ck_z": ck.z})
        if markovian:
            ok = ck.z <= cfg.sigma
            report["ck_status"] = "pass" if ok else "fail"
            passed &= ok
        else:
            report["ck_status"] = "reported"
    except InsufficientSamplesError as exc:
        report.update({"ck_status": "insufficient_samples", "ck_reason": str(exc)})
        passed = False

    report["passed"] = bool(passed)
    return report


def cmd_mc_verify(cfg: RunConfig) -> int:
    report = mc_report(cfg)
    _emit(json.dumps(_json_value(report), indent=1) + "\n", cfg.out)
    return EXIT_OK if report["passed"] else EXIT_STATISTICAL


# Figure presets: (file stem, kind, waiting time, pi, t_max). Times are in
# units of lambda (or of s for the hypoexponential), matching the axes.
def figure_presets():
    erl = ErlangTwo(1.0)
    hyp = Hypoexponential.from_ratio(0.12, 1.0)
    slow = Mixture(0.1, 0.2, 0.3)
    fast = Mixture(1.0, 6.0, 0.6)
    return {
        1: [("fig1_top", "trajectories", erl, 1.0, 10.0), ("fig1_bottom", "trajectories", erl, 0.5, 10.0)],
        2: [("fig2_top", "trajectories", hyp, 1.0, 30.0), ("fig2_bottom", "trajectories", hyp, 0.5, 30.0)],
        3: [("fig3_top", "trajectories", slow, 1.0, 40.0), ("fig3_bottom", "trajectories", slow, 0.5, 40.0)],
        4: [("fig4", "rates", erl, 1.0, 10.0)],
        5: [("fig5", "rates", hyp, 1.0, 30.0)],
        6: [("fig6", "rates", fast, 1.0, 3.0)],
    }


def write_figures(out_dir: Path, figures, seed: int, grid: int, k: int, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    w0s = initial_values(seed, k)
    written = []
    presets = figure_presets()
    for fig in figures:
        for stem, kind, w, pi, t_max in presets[fig]:
            if kind == "trajectories":
                cols, data = trajectories_table(w, pi, t_max, grid, w0s)
                rows = _rows(data)
            else:
                cols, rows = rates_table(w, t_max, grid)
            path = out_dir / f"{stem}.{fmt}"
            path.write_text(format_table(cols, rows, fmt))
            written.append(path)
    return written


def cmd_figures(cfg: RunConfig) -> int:
    cfg.validate()
    figures = cfg.figure or sorted(figure_presets())
    if any(f not in figure_presets() for f in figures):
        raise InvalidInputError("--figure must be in 1..6")
    paths = write_figures(Path(cfg.out or "figures"), figures, cfg.seed, cfg.grid, cfg.trajectories, cfg.format)
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {
    "trajectories": cmd_trajectories,
    "rates": cmd_rates,
    "measures": cmd_measures,
    "mc-verify": cmd_mc_verify,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", choices=DISTRIBUTIONS, default="erlang2", help="waiting time family")
    common.add_argument("--lambda1", type=float, default=1.0, help="first rate (or s with --ps2)")
    common.add_argument("--lambda2", type=float, default=None, help="second rate (hypoexp, mix)")
    common.add_argument("--mu", type=float, default=0.5, help="mixture weight of --lambda1")
    common.add_argument("--ps2", type=float, default=None, help="hypoexp: p/s^2 with s = --lambda1")
    common.add_argument("--pi", type=float, choices=(0.5, 1.0), default=1.0, help="jump probability")
    common.add_argument("--model", choices=[m.value for m in Model], default="dephasing")
    common.add_argument("--tmax", type=float, default=None, help="time horizon")
    common.add_argument("--grid", type=int, default=401, help="number of time points")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100_000, help="trajectories per parity estimate")
    common.add_argument("--out", default=None, help="output file (directory for figures); stdout if omitted")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = argparse.ArgumentParser(prog="semimarkov", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("trajectories", parents=[common], help="mode function and populations w(t)")
    p.add_argument("--trajectories", type=int, default=5, help="number of random initial values")
    p.add_argument("--w0", type=float, action="append", default=[], help="explicit initial value (repeatable)")
    sub.add_parser("rates", parents=[common], help="q, gamma, delta with singularity markers")
    p = sub.add_parser("measures", parents=[common], help="BLP and RHP measures and divisibility class")
    p.add_argument("--search", action="store_true", help="maximize BLP over pure-state pairs")
    p = sub.add_parser("mc-verify", parents=[common], help="Monte Carlo verification report")
    p.add_argument("--markov-samples", type=int, default=1_000_000)
    p.add_argument("--sigma", type=float, default=3.0, help="pass threshold in standard errors")
    p.add_argument("--markov-z", type=float, default=5.0, help="z above which a violation is reported")
    p = sub.add_parser("figures", parents=[common], help="write all figure datasets")
    p.add_argument("--figure", type=int, action="append", default=[], help="restrict to figure N (repeatable)")
    p.add_argument("--trajectories", type=int, default=5)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    try:
        return COMMANDS[cfg.command](cfg)
    except (InvalidInputError, OSError) as exc:
        print(f"semimarkov: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, ConsistencyError) as exc:
        print(f"semimarkov: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
