"""Experiment files: config parsing, seeded batch runs, and run comparison.

Config format
-------------
One ``key = value`` pair per line; ``#`` starts a comment; blank lines are
ignored; unknown or repeated keys are errors.  Keys and defaults:

=================  ==============  ==============================================
key                default         meaning
=================  ==============  ==============================================
benchmark          (required)      sphere | rastrigin | rosenbrock | ackley | lj
dimension          (required*)     gene count; for ``lj`` it must equal 3 * atoms
atoms              none            cluster size N for ``lj`` (N >= 2)
seed / seeds       0               one seed, or ``1, 2, 5`` / ``1..30`` (inclusive)
output             results         output directory
lower, upper       benchmark box   override the per-gene search box
population_size    50
max_generations    100
elitism_count      1
selection          tournament      tournament | roulette
tournament_k       3
crossover          one_point       one_point | direction_based | none
crossover_rate     0.9
direction_r        none            fixed extrapolation factor; none = uniform draw
mutation           truncated       truncated | clamped | q_gaussian | boundary | uniform
mutation_rate      1.0             per-gene mutation probability
sigma_override     none            fixed mutation strength (disables sigma adaptation)
sigma0             0.1             initial mutation strength
per_gene_sigma     false           one strength per gene instead of a shared one
q                  1.0             initial q-Gaussian shape, 1 <= q < 3
tau                none            log-normal learning rate; none = 1/sqrt(2n)
sigma_min          1e-06
sigma_max          1.0
q_min              1.0
q_max              2.5
q_step             0.05
target_objective   none            stop once the best objective reaches this value
=================  ==============  ==============================================

(*) ``dimension`` may be omitted for ``lj`` when ``atoms`` is given.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .adaptation import AdaptationPolicy
from .benchmarks import BENCHMARKS, get_benchmark
from .engine import CROSSOVERS, SELECTIONS, GaConfig, ObjectiveError, evolve
from .genome import GeneBounds
from .operators import MutationParams
from .stochastic import DomainError

__all__ = [
    "CompareReport",
    "ConfigError",
    "ExperimentSpec",
    "SUMMARY_HEADER",
    "compare_runs",
    "format_config",
    "parse_config",
    "parse_config_text",
    "run_experiment",
]

SUMMARY_HEADER = ["seed", "final_best", "evaluations", "termination", "median_final_best"]
CONFIG_MUTATIONS = ("truncated", "clamped", "q_gaussian", "boundary", "uniform")


class ConfigError(ValueError):
    """Malformed or invalid experiment config."""


@dataclass(frozen=True)
class ExperimentSpec:
    benchmark: str
    dimension: int
    config: GaConfig
    seeds: tuple[int, ...] = (0,)
    output_path: str = "results"
    atoms: Optional[int] = None
    lower: Optional[float] = None
    upper: Optional[float] = None

    def bounds(self) -> list[GeneBounds]:
        bench = get_benchmark(self.benchmark)
        lo = bench.lower if self.lower is None else self.lower
        hi = bench.upper if self.upper is None else self.upper
        return [GeneBounds(lo, hi)] * self.dimension

    def objective(self) -> Callable:
        return get_benchmark(self.benchmark).function

    def for_seed(self, seed: int) -> GaConfig:
        return dataclasses.replace(self.config, seed=seed)


# --------------------------------------------------------------------------
# value parsers
# --------------------------------------------------------------------------


def _int(text: str) -> int:
    return int(text)


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _opt_float(text: str) -> Optional[float]:
    return None if text.lower() == "none" else _float(text)


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError("expected true or false")


def _choice(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError("seeds must be 64-bit unsigned integers")
    return value


def _seeds(text: str) -> tuple[int, ...]:
    if ".." in text:
        first, last = (s.strip() for s in text.split("..", 1))
        lo, hi = _seed(first), _seed(last)
        if hi < lo:
            raise ValueError("empty seed range")
        return tuple(range(lo, hi + 1))
    seeds = tuple(_seed(p.strip()) for p in text.split(",") if p.strip())
    if not seeds:
        raise ValueError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    return seeds


def _check(pred: Callable, message: str):
    def check(value):
        if value is not None and not pred(value):
            raise ValueError(message)
        return value

    return check


# key -> (parser, range check)
_KEYS: dict[str, tuple[Callable, Callable]] = {
    "benchmark": (_choice(tuple(BENCHMARKS)), lambda v: v),
    "dimension": (_int, _check(lambda v: v >= 1, "dimension must be >= 1")),
    "atoms": (_int, _check(lambda v: v >= 2, "atoms must be >= 2")),
    "seed": (_seed, lambda v: v),
    "seeds": (_seeds, lambda v: v),
    "output": (str, _check(bool, "output must not be empty")),
    "lower": (_float, lambda v: v),
    "upper": (_float, lambda v: v),
    "population_size": (_int, _check(lambda v: v >= 2, "population_size must be >= 2")),
    "max_generations": (_int, _check(lambda v: v >= 0, "max_generations must be >= 0")),
    "elitism_count": (_int, _check(lambda v: v >= 0, "elitism_count must be >= 0")),
    "selection": (_choice(SELECTIONS), lambda v: v),
    "tournament_k": (_int, _check(lambda v: v >= 1, "tournament_k must be >= 1")),
    "crossover": (_choice(CROSSOVERS), lambda v: v),
    "crossover_rate": (_float, _check(lambda v: 0 <= v <= 1, "crossover_rate must lie in [0, 1]")),
    "direction_r": (_opt_float, _check(lambda v: 0 < v < 1, "direction_r must lie in (0, 1)")),
    "mutation": (_choice(CONFIG_MUTATIONS), lambda v: v),
    "mutation_rate": (_float, _check(lambda v: 0 <= v <= 1, "mutation_rate must lie in [0, 1]")),
    "sigma_override": (_opt_float, _check(lambda v: v > 0, "sigma_override must be > 0")),
    "sigma0": (_float, _check(lambda v: v > 0, "sigma0 must be > 0")),
    "per_gene_sigma": (_bool, lambda v: v),
    "q": (_float, _check(lambda v: 1 <= v < 3, "q must satisfy 1 <= q < 3")),
    "tau": (_opt_float, _check(lambda v: v >= 0, "tau must be >= 0")),
    "sigma_min": (_float, _check(lambda v: v > 0, "sigma_min must be > 0")),
    "sigma_max": (_float, _check(lambda v: v > 0, "sigma_max must be > 0")),
    "q_min": (_float, _check(lambda v: 1 <= v < 3, "q_min must satisfy 1 <= q_min < 3")),
    "q_max": (_float, _check(lambda v: 1 < v < 3, "q_max must satisfy 1 < q_max < 3")),
    "q_step": (_float, _check(lambda v: v >= 0, "q_step must be >= 0")),
    "target_objective": (_opt_float, lambda v: v),
}

KEYS = tuple(_KEYS)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentSpec:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {lines[key]})")
        parse, check = _KEYS[key]
        try:
            values[key] = check(parse(value))
        except ValueError as exc:
            raise ConfigError(f"{where}: invalid value for {key!r}: {exc}") from None
        lines[key] = lineno

    def fail(message: str, *keys: str):
        for key in keys:
            if key in lines:
                raise ConfigError(f"{source}:{lines[key]}: {message}")
        raise ConfigError(f"{source}: {message}")

    if "benchmark" not in values:
        fail("missing required key 'benchmark'")
    if "seed" in values and "seeds" in values:
        fail("give either 'seed' or 'seeds', not both", "seeds")
    benchmark = values["benchmark"]
    atoms = values.get("atoms")
    dimension = values.get("dimension")
    if benchmark == "lj":
        if atoms is None:
            fail("benchmark 'lj' requires 'atoms'", "benchmark")
        if dimension is None:
            dimension = 3 * atoms
        elif dimension != 3 * atoms:
            fail(f"dimension {dimension} inconsistent with {atoms} atoms (expected {3 * atoms})",
                 "dimension")
    else:
        if atoms is not None:
            fail("'atoms' only applies to benchmark 'lj'", "atoms")
        if dimension is None:
            fail("missing required key 'dimension'")
        if benchmark == "rosenbrock" and dimension < 2:
            fail("rosenbrock needs dimension >= 2", "dimension")

    bench = get_benchmark(benchmark)
    lower = values.get("lower")
    upper = values.get("upper")
    if (bench.lower if lower is None else lower) > (bench.upper if upper is None else upper):
        fail("lower must not exceed upper", "lower", "upper")

    if "seeds" in values:
        seeds = values["seeds"]
    elif "seed" in values:
        seeds = (values["seed"],)
    else:
        seeds = (0,)
    try:
        policy = AdaptationPolicy(
            tau=values.get("tau"),
            sigma_min=values.get("sigma_min", 1e-6),
            sigma_max=values.get("sigma_max", 1.0),
            q_min=values.get("q_min", 1.0),
            q_max=values.get("q_max", 2.5),
            q_step=values.get("q_step", 0.05),
        )
        config = GaConfig(
            population_size=values.get("population_size", 50),
            max_generations=values.get("max_generations", 100),
            elitism_count=values.get("elitism_count", 1),
            selection=values.get("selection", "tournament"),
            tournament_k=values.get("tournament_k", 3),
            crossover=values.get("crossover", "one_point"),
            crossover_rate=values.get("crossover_rate", 0.9),
            direction_r=values.get("direction_r"),
            mutation=values.get("mutation", "truncated"),
            mutation_params=MutationParams(
                rate=values.get("mutation_rate", 1.0),
                sigma_override=values.get("sigma_override"),
            ),
            sigma0=values.get("sigma0", 0.1),
            per_gene_sigma=values.get("per_gene_sigma", False),
            q0=values.get("q", 1.0),
            adaptation=policy,
            target_objective=values.get("target_objective"),
            seed=seeds[0],
        )
    except DomainError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return ExperimentSpec(
        benchmark=benchmark,
        dimension=dimension,
        config=config,
        seeds=tuple(seeds),
        output_path=values.get("output", "results"),
        atoms=atoms,
        lower=lower,
        upper=upper,
    )


def parse_config(path) -> ExperimentSpec:
    """Read and validate an experiment config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from None
    return parse_config_text(text, str(path))


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(spec: ExperimentSpec) -> str:
    """Serialize a spec with every key spelled out; parses back to an equal spec."""
    c = spec.config
    pol = c.adaptation
    pairs = [
        ("benchmark", spec.benchmark),
        ("dimension", spec.dimension),
        ("atoms", spec.atoms),
        ("seeds", ", ".join(str(s) for s in spec.seeds)),
        ("output", spec.output_path),
        ("lower", spec.lower),
        ("upper", spec.upper),
        ("population_size", c.population_size),
        ("max_generations", c.max_generations),
        ("elitism_count", c.elitism_count),
        ("selection", c.selection),
        ("tournament_k", c.tournament_k),
        ("crossover", c.crossover),
        ("crossover_rate", c.crossover_rate),
        ("direction_r", c.direction_r),
        ("mutation", c.mutation),
        ("mutation_rate", c.mutation_params.rate),
        ("sigma_override", c.mutation_params.sigma_override),
        ("sigma0", c.sigma0),
        ("per_gene_sigma", c.per_gene_sigma),
        ("q", c.q0),
        ("tau", pol.tau),
        ("sigma_min", pol.sigma_min),
        ("sigma_max", pol.sigma_max),
        ("q_min", pol.q_min),
        ("q_max", pol.q_max),
        ("q_step", pol.q_step),
        ("target_objective", c.target_objective),
    ]
    lines = []
    for key, value in pairs:
        if value is None and key in ("atoms", "lower", "upper"):
            continue
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------


def _err(message: str) -> None:
    print(f"gauss-evolve: {message}", file=sys.stderr)


def run_experiment(spec: ExperimentSpec, executor=None) -> int:
    """Run every seed and write ``<seed>.csv`` files plus ``summary.csv``.

    Returns the process exit status: 0 on success, 1 if a run failed (any
    files written by this call are removed), 2 if the output directory is
    unusable.
    """
    out = Path(spec.output_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        _err(f"cannot write to output directory {out}: {exc.strerror or exc}")
        return 2

    written: list[Path] = []
    finals: list[tuple[int, float, int, str]] = []
    bounds = spec.bounds()
    objective = spec.objective()
    try:
        for seed in spec.seeds:
            record = evolve(spec.for_seed(seed), objective, bounds, executor)
            path = out / f"{seed}.csv"
            written.append(path)
            path.write_text(record.to_csv(), encoding="utf-8", newline="")
            finals.append((seed, record.best, record.rows[-1].evaluations, record.termination_reason))
        median = statistics.median(f[1] for f in finals)
        summary = out / "summary.csv"
        written.append(summary)
        with summary.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SUMMARY_HEADER)
            for seed, best, evals, reason in finals:
                writer.writerow([seed, repr(float(best)), evals, reason, repr(float(median))])
    except (ObjectiveError, DomainError, OSError) as exc:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        _err(f"run failed: {exc}")
        return 1
    return 0


# --------------------------------------------------------------------------
# comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CompareReport:
    median_a: float
    median_b: float
    wins_a: int
    wins_b: int
    ties: int
    verdict: str
    seeds: tuple[int, ...] = field(default=())

    def format(self) -> str:
        n = len(self.seeds)
        return "\n".join([
            f"median final best A: {self.median_a!r}",
            f"median final best B: {self.median_b!r}",
            f"per-seed wins: A {self.wins_a}/{n}, B {self.wins_b}/{n}, ties {self.ties}/{n}",
            f"verdict: {self.verdict}",
        ])


def _read_summary(directory) -> dict[int, float]:
    path = Path(directory) / "summary.csv"
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            return {int(row["seed"]): float(row["final_best"]) for row in reader}
    except (OSError, KeyError, ValueError) as exc:
        raise ValueError(f"cannot read experiment summary {path}: {exc}") from None


def compare_runs(dir_a, dir_b) -> CompareReport:
    """Compare final bests of two experiment directories seed by seed."""
    a, b = _read_summary(dir_a), _read_summary(dir_b)
    if set(a) != set(b):
        raise ValueError(
            f"seed sets differ: only in A {sorted(set(a) - set(b))}, only in B {sorted(set(b) - set(a))}"
        )
    if not a:
        raise ValueError("experiment summaries contain no seeds")
    seeds = tuple(sorted(a))
    wins_a = sum(a[s] < b[s] for s in seeds)
    wins_b = sum(b[s] < a[s] for s in seeds)
    med_a = statistics.median(a[s] for s in seeds)
    med_b = statistics.median(b[s] for s in seeds)
    verdict = "A better" if med_a < med_b else "B better" if med_b < med_a else "tie"
    return CompareReport(med_a, med_b, wins_a, wins_b, len(seeds) - wins_a - wins_b, verdict, seeds)
