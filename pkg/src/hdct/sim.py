"""Monte-Carlo engine for empirical size, power and null-law diagnostics.

Each replication draws from its own generator, seeded from
``(master_seed, replication, group)`` through :class:`numpy.random.SeedSequence`,
so a report depends only on the configuration and never on the number of
worker threads or the order in which replications finish. All three tests are
evaluated on the same replication dataset.
"""

import csv
import dataclasses
import enum
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import nulldist
from .clr import clr_transform
from .datagen import (
    Cov,
    CovarianceSpec,
    Dist,
    DistributionSpec,
    SignalSpec,
    build_covariance,
    generate_log_basis,
    matrix_sqrt_sym,
    signal_vector,
    to_composition,
)
from .errors import ConfigError, HdctError, ReplicationError
from .estimators import one_sample_moments, two_sample_moments
from .meantests import one_sample_from_moments, two_sample_from_moments

STATISTICS = ("sum", "max", "com")


class Mode(enum.Enum):
    SizeOne = "size-one"
    SizeTwo = "size-two"
    PowerOne = "power-one"
    PowerTwo = "power-two"
    NullDiagnostics = "null-check"


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment.

    One-sample runs set ``n``; two-sample runs set ``n1`` and ``n2``.
    ``build_seed`` defaults to ``master_seed``. ``threads`` only affects
    speed, never results.
    """

    mode: Mode
    p: int
    master_seed: int
    dist: Dist = Dist.A1
    cov: Cov = Cov.B1
    n: int | None = None
    n1: int | None = None
    n2: int | None = None
    alpha: float = 0.05
    reps: int = 1000
    m_grid: tuple = ()
    energy: float = 0.5
    threads: int = 1
    build_seed: int | None = None
    redraw_cov_per_rep: bool = False
    unbiased_cov: bool = False
    cov_matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
            object.__setattr__(self, "dist", Dist(self.dist))
            object.__setattr__(self, "cov", Cov(self.cov))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        if self.build_seed is None:
            object.__setattr__(self, "build_seed", self.master_seed)
        self._validate()

    @property
    def two_sample(self):
        if self.mode in (Mode.SizeTwo, Mode.PowerTwo):
            return True
        if self.mode is Mode.NullDiagnostics:
            return self.n is None
        return False

    @property
    def n_label(self):
        return f"{self.n1}+{self.n2}" if self.two_sample else str(self.n)

    def _validate(self):
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.p < 2:
            raise ConfigError(f"p must be >= 2, got {self.p}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.master_seed is None or self.master_seed < 0:
            raise ConfigError("a non-negative master_seed is required")
        if self.two_sample:
            if self.n1 is None or self.n2 is None:
                raise ConfigError(f"{self.mode.value} needs n1 and n2")
            if self.n1 < 2 or self.n2 < 2 or self.n1 + self.n2 < 5:
                raise ConfigError("need n1, n2 >= 2 and n1 + n2 >= 5")
        else:
            if self.n is None:
                raise ConfigError(f"{self.mode.value} needs n")
            if self.n < 5:
                raise ConfigError("need n >= 5")
        if self.mode in (Mode.PowerOne, Mode.PowerTwo):
            if not self.m_grid:
                raise ConfigError("power experiments need a non-empty m_grid")
            if any(m < 1 or m > self.p for m in self.m_grid):
                raise ConfigError(f"m_grid entries must lie in [1, {self.p}]")
            if self.energy < 0:
                raise ConfigError("energy must be non-negative")
        if self.cov is Cov.EXPLICIT and self.cov_matrix is None:
            raise ConfigError("explicit covariance needs cov_matrix")

    def provenance(self):
        """Config echo embedded in reports; excludes ``threads`` on purpose."""
        d = {
            "mode": self.mode.value,
            "dist": self.dist.value,
            "cov": self.cov.value,
            "n": self.n,
            "n1": self.n1,
            "n2": self.n2,
            "p": self.p,
            "alpha": self.alpha,
            "reps": self.reps,
            "m_grid": list(self.m_grid),
            "energy": self.energy,
            "master_seed": self.master_seed,
            "build_seed": self.build_seed,
            "redraw_cov_per_rep": self.redraw_cov_per_rep,
            "unbiased_cov": self.unbiased_cov,
        }
        return d


@dataclass
class ExperimentReport:
    """Rows of a flat CSV table plus raw per-replication draws.

    ``samples`` keeps the per-replication statistics (null modes) for
    further analysis and is not serialized.
    """

    config: dict
    columns: list
    rows: list
    diagnostics: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict, repr=False)
    wall_clock: float = 0.0

    def rate(self, statistic, m=None):
        for row in self.rows:
            if row["statistic"] == statistic and (m is None or row.get("m") == m):
                return row["rate"]
        raise KeyError((statistic, m))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# hdct-report " + json.dumps(self.config, sort_keys=True) + "\n")
        writer = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(row[k]) for k in self.columns})
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def summary(self):
        lines = [
            f"{self.config['mode']}: dist={self.config['dist']} cov={self.config['cov']} "
            f"p={self.config['p']} reps={self.config['reps']} seed={self.config['master_seed']}"
        ]
        for row in self.rows:
            if "rate" in row:
                m = f" m={row['m']:>3}" if "m" in row else ""
                lines.append(
                    f"  {row['statistic']:>4}{m}  rate={row['rate']:.3f}  se={row['se']:.3f}"
                )
            else:
                lines.append(f"  {row['diagnostic']:<22} {row['value']:.4f}")
        lines.append(f"  wall clock {self.wall_clock:.1f}s")
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


_INT_COLUMNS = {"p", "reps", "seed", "m"}
_FLOAT_COLUMNS = {"alpha", "rate", "se", "value"}


def read_report(text):
    """Parse a CSV produced by :meth:`ExperimentReport.to_csv`."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# hdct-report "):
        raise ValueError("not an hdct report")
    config = json.loads(lines[0][len("# hdct-report "):])
    reader = csv.DictReader(lines[1:])
    rows = []
    for raw in reader:
        row = {}
        for k, v in raw.items():
            if k in _INT_COLUMNS:
                row[k] = int(v)
            elif k in _FLOAT_COLUMNS:
                row[k] = float(v)
            else:
                row[k] = v
        rows.append(row)
    return ExperimentReport(config, list(reader.fieldnames), rows)


def stream(master_seed, replication, group):
    """Generator private to one (replication, group) pair."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(replication, group))
    return np.random.Generator(np.random.PCG64(seq))


def _cov_spec(config, build_seed):
    return CovarianceSpec(config.cov, config.p, build_seed=build_seed, matrix=config.cov_matrix)


def _rep_build_seed(config, rep):
    seq = np.random.SeedSequence(config.build_seed, spawn_key=(rep, 0xC0))
    return int(seq.generate_state(1, np.uint64)[0])


class _Engine:
    """Holds the shared, read-only pieces of one experiment."""

    def __init__(self, config, signals):
        self.config = config
        self.signals = signals
        self.dist = DistributionSpec(config.dist)
        if config.redraw_cov_per_rep:
            self.root = None
        else:
            sigma = build_covariance(_cov_spec(config, config.build_seed))
            self.sigma = sigma
            self.root = matrix_sqrt_sym(sigma)

    def _root(self, rep):
        if self.root is not None:
            return self.root
        return matrix_sqrt_sym(build_covariance(_cov_spec(self.config, _rep_build_seed(self.config, rep))))

    def replicate(self, rep):
        """Statistics and decisions for every signal in one replication.

        Returns an array of shape ``(len(signals), 3, 2)`` holding
        ``(statistic, reject)`` for sum, max and combo.
        """
        cfg = self.config
        root = self._root(rep)
        p = cfg.p
        zero = np.zeros(p)
        out = np.empty((len(self.signals), 3, 2))
        if cfg.two_sample:
            b1 = generate_log_basis(zero, root, self.dist, cfg.n1, stream(cfg.master_seed, rep, 1)).values
            b2 = generate_log_basis(zero, root, self.dist, cfg.n2, stream(cfg.master_seed, rep, 2)).values
            y2 = clr_transform(to_composition(b2))
            for k, mu in enumerate(self.signals):
                y1 = clr_transform(to_composition(b1 + mu))
                mom = two_sample_moments(y1, y2, unbiased=cfg.unbiased_cov)
                res = two_sample_from_moments(mom, cfg.alpha)
                _store(out[k], res)
        else:
            b = generate_log_basis(zero, root, self.dist, cfg.n, stream(cfg.master_seed, rep, 0)).values
            for k, mu in enumerate(self.signals):
                y = clr_transform(to_composition(b + mu))
                mom = one_sample_moments(y, unbiased=cfg.unbiased_cov)
                res = one_sample_from_moments(mom, cfg.alpha)
                _store(out[k], res)
        return out

    def run(self):
        cfg = self.config
        results = np.empty((cfg.reps, len(self.signals), 3, 2))

        def work(rep):
            try:
                results[rep] = self.replicate(rep)
            except HdctError as exc:
                group = "1,2" if cfg.two_sample else "0"
                raise ReplicationError(rep, f"{cfg.master_seed}/{rep}/{group}", exc) from exc

        if cfg.threads == 1:
            for rep in range(cfg.reps):
                work(rep)
        else:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                # list() re-raises the first failure in replication order
                list(pool.map(work, range(cfg.reps)))
        return results


def _store(slot, res):
    for j, name in enumerate(STATISTICS):
        slot[j, 0] = res[name].statistic
        slot[j, 1] = float(res[name].reject)


def _rate_row(config, statistic, hits, extra=None):
    reps = config.reps
    rate = hits / reps
    row = {"statistic": statistic}
    if extra:
        row.update(extra)
    row.update(
        dist=config.dist.value,
        cov=config.cov.value,
        n=config.n_label,
        p=config.p,
        alpha=config.alpha,
        reps=reps,
        rate=rate,
        se=math.sqrt(rate * (1.0 - rate) / reps),
        seed=config.master_seed,
    )
    return row


SIZE_COLUMNS = ["statistic", "dist", "cov", "n", "p", "alpha", "reps", "rate", "se", "seed"]
POWER_COLUMNS = ["statistic", "m", "dist", "cov", "n", "p", "alpha", "reps", "rate", "se", "seed"]
NULL_COLUMNS = ["diagnostic", "dist", "cov", "n", "p", "alpha", "reps", "value", "seed"]


def run_size_experiment(config):
    """Empirical rejection rates of the three tests under the null."""
    if config.mode not in (Mode.SizeOne, Mode.SizeTwo):
        raise ConfigError(f"size experiment cannot run mode {config.mode.value}")
    start = time.perf_counter()
    res = _Engine(config, [np.zeros(config.p)]).run()
    rows = [
        _rate_row(config, name, int(res[:, 0, j, 1].sum()))
        for j, name in enumerate(STATISTICS)
    ]
    samples = {name: res[:, 0, j, 0].copy() for j, name in enumerate(STATISTICS)}
    return ExperimentReport(
        config.provenance(), SIZE_COLUMNS, rows, samples=samples,
        wall_clock=time.perf_counter() - start,
    )


def run_power_experiment(config):
    """Empirical power of the three tests for each sparsity level in ``m_grid``.

    The signal ``sqrt(energy/m)`` on the first ``m`` coordinates is added to the
    log-basis mean (of group 1 in the two-sample case). Every ``m`` reuses the
    same innovations, so the curves are paired across sparsity levels.
    """
    if config.mode not in (Mode.PowerOne, Mode.PowerTwo):
        raise ConfigError(f"power experiment cannot run mode {config.mode.value}")
    start = time.perf_counter()
    signals = [signal_vector(SignalSpec(m, config.energy), config.p) for m in config.m_grid]
    res = _Engine(config, signals).run()
    rows = []
    for k, m in enumerate(config.m_grid):
        for j, name in enumerate(STATISTICS):
            rows.append(_rate_row(config, name, int(res[:, k, j, 1].sum()), {"m": m}))
    return ExperimentReport(
        config.provenance(), POWER_COLUMNS, rows, wall_clock=time.perf_counter() - start
    )


def ks_distance_normal(x):
    """Kolmogorov-Smirnov distance between the sample ``x`` and N(0, 1)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    cdf = np.array([nulldist.std_normal_cdf(v) for v in x])
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def combo_gof(w, bins=10):
    """Chi-square goodness of fit of min-p values to the density ``2(1 - w)``.

    Returns ``(chi2, pvalue)`` on ``bins`` equal-width bins of [0, 1].
    """
    w = np.asarray(w, dtype=float)
    edges = np.linspace(0.0, 1.0, bins + 1)
    observed, _ = np.histogram(np.clip(w, 0.0, 1.0), bins=edges)
    cdf = edges * (2.0 - edges)
    expected = np.diff(cdf) * w.size
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    return chi2, float(sps.chi2.sf(chi2, bins - 1))


def run_null_diagnostics(config):
    """Null-law checks for the sum, max and combo statistics.

    Reports the KS distance of the sum statistic to N(0, 1) (with the
    asymptotic 5% band ``1.36/sqrt(reps)`` for reference), the rate at which
    the centered max exceeds the Gumbel quantile, the chi-square fit of the
    combo statistic to its limiting density, the combo rejection rate, and
    the Pearson correlation between the sum and centered max statistics.
    """
    if config.mode is not Mode.NullDiagnostics:
        raise ConfigError(f"null diagnostics cannot run mode {config.mode.value}")
    start = time.perf_counter()
    res = _Engine(config, [np.zeros(config.p)]).run()[:, 0]
    s, m, c = res[:, 0, 0], res[:, 1, 0], res[:, 2, 0]
    reps = config.reps
    chi2, gof_p = combo_gof(c)
    corr = float(np.corrcoef(s, m)[0, 1]) if reps > 1 else float("nan")
    diag = {
        "ks_distance_sum": ks_distance_normal(s),
        "ks_band_5pct": 1.36 / math.sqrt(reps),
        "sum_rejection_rate": float(res[:, 0, 1].mean()),
        "max_exceedance_rate": float(np.mean(m >= nulldist.gumbel_quantile(config.alpha))),
        "combo_gof_chi2": chi2,
        "combo_gof_pvalue": gof_p,
        "combo_rejection_rate": float(np.mean(c < nulldist.combo_threshold(config.alpha))),
        "sum_max_correlation": corr,
    }
    rows = [
        {
            "diagnostic": k,
            "dist": config.dist.value,
            "cov": config.cov.value,
            "n": config.n_label,
            "p": config.p,
            "alpha": config.alpha,
            "reps": reps,
            "value": v,
            "seed": config.master_seed,
        }
        for k, v in diag.items()
    ]
    return ExperimentReport(
        config.provenance(), NULL_COLUMNS, rows, diagnostics=diag,
        samples={"sum": s.copy(), "max": m.copy(), "com": c.copy()},
        wall_clock=time.perf_counter() - start,
    )


def run_experiment(config):
    if config.mode in (Mode.SizeOne, Mode.SizeTwo):
        return run_size_experiment(config)
    if config.mode in (Mode.PowerOne, Mode.PowerTwo):
        return run_power_experiment(config)
    return run_null_diagnostics(config)


def resolve_threads(value=None):
    """``None``/``"auto"`` fall back to ``HDCT_THREADS``, then the CPU count."""
    if value is None:
        value = os.environ.get("HDCT_THREADS", "auto")
    if str(value).lower() == "auto":
        try:
            return max(1, len(os.sched_getaffinity(0)))
        except AttributeError:
            return max(1, os.cpu_count() or 1)
    try:
        threads = int(value)
    except ValueError as exc:
        raise ConfigError(f"threads must be an integer or 'auto', got {value!r}") from exc
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return threads


def replace(config, **changes):
    return dataclasses.replace(config, **changes)
