"""Monte Carlo driver for rejection rates and imputation NRMSE.

A :class:`SimulationCell` fixes the data-generating setting, the missingness
sizes and the test method. Replicate ``i`` of a cell draws its data from the
stream ``default_rng([seed, data_key, i])`` where ``data_key`` hashes only the
data-defining fields, so every method sees the same samples and results do
not depend on scheduling or thread count.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .data import Bernoulli, FixedCounts, PairedSample, ingest_csv, inject_mcar
from .datagen import CovarianceSpec, ResidualLaw, generate
from .exceptions import ComputationError, PairedMIError, ValidationError
from .forest import ForestParams
from .imputation import METHODS as MI_METHODS
from .imputation import ImputationMethod
from .metrics import nrmse
from .permutation import PermutationConfig, permute_and_test
from .rubin import mi_analysis
from .stats import paired_t

logger = logging.getLogger(__name__)

TEST_METHODS = ("tml",) + MI_METHODS
ALPHA = 0.05
RESULT_COLUMNS = [
    "law", "rho", "sigma", "n1", "n2", "n3", "delta", "method",
    "rejection_rate", "mc_se", "nrmse_mean", "degenerate_count", "seconds",
]
DEGENERATE_LIMIT = 0.01


def _stable_int(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little") >> 1


@dataclass(frozen=True)
class SimulationCell:
    """One grid point of the simulation study."""

    law: str = "normal"
    rho: float = 0.0
    sigma: str = "sigma1"
    sizes: tuple[int, int, int] = (10, 10, 10)
    delta: float = 0.0
    method: str = "tml"
    n_sim: int = 1000
    B: int = 1000
    m: int = 5
    seed: int = 0
    forest: ForestParams | None = None
    pmm_k: int = 5
    chained_T: int = 5
    rfmi_max_iter: int = 10
    alpha: float = ALPHA
    kappa: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.method not in TEST_METHODS:
            raise ValidationError(f"unknown method {self.method!r}; expected one of {TEST_METHODS}")
        if len(self.sizes) != 3 or min(self.sizes) < 0:
            raise ValidationError(f"sizes must be three non-negative counts, got {self.sizes}")
        if self.n_sim < 1:
            raise ValidationError("n_sim must be at least 1")
        if self.method != "tml" and self.m < 2:
            raise ValidationError("imputation methods need m >= 2")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        # surfaces datagen / permutation parameter errors at construction
        ResidualLaw(self.law, self.kappa)
        CovarianceSpec(self.sigma, self.rho)
        PermutationConfig(self.B)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def data_key(self) -> int:
        n1, n2, n3 = self.sizes
        return _stable_int(f"{self.law}|{self.kappa!r}|{self.rho!r}|{self.sigma}|{n1},{n2},{n3}|{self.delta!r}")

    def imputation_method(self) -> ImputationMethod:
        return ImputationMethod(self.method, k=self.pmm_k, n_iter=self.chained_T,
                                max_iter=self.rfmi_max_iter, forest=self.forest)

    def cache_key(self) -> str:
        payload = json.dumps({"version": __version__, **asdict(self)}, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:24]


@dataclass
class CellResult:
    cell: SimulationCell
    rejection_rate: float
    mc_se: float
    nrmse_mean: float | None
    degenerate_count: int
    seconds: float
    pvalues: np.ndarray = field(repr=False, default=None)
    nrmse_values: np.ndarray = field(repr=False, default=None)

    def row(self) -> dict:
        c = self.cell
        return {
            "law": c.law, "rho": c.rho, "sigma": c.sigma,
            "n1": c.sizes[0], "n2": c.sizes[1], "n3": c.sizes[2],
            "delta": c.delta, "method": c.method,
            "rejection_rate": self.rejection_rate, "mc_se": self.mc_se,
            "nrmse_mean": "" if self.nrmse_mean is None else self.nrmse_mean,
            "degenerate_count": self.degenerate_count, "seconds": self.seconds,
        }


def replicate_sample(cell: SimulationCell, index: int):
    """Fully observed and masked samples of replicate ``index`` plus its stream."""
    rng = np.random.default_rng([cell.seed, cell.data_key(), index])
    n1, n2, n3 = cell.sizes
    full = generate(cell.n, ResidualLaw(cell.law, cell.kappa), CovarianceSpec(cell.sigma, cell.rho),
                    cell.delta, rng)
    masked = inject_mcar(full, FixedCounts(n2, n3), rng)
    return full, masked, rng


def run_replicate(cell: SimulationCell, index: int) -> tuple[float, float]:
    """p-value and NRMSE (``nan`` for the permutation test) of one replicate."""
    full, masked, rng = replicate_sample(cell, index)
    if cell.method == "tml":
        return permute_and_test(masked, PermutationConfig(B=cell.B), rng).pvalue, math.nan
    res = mi_analysis(masked, cell.imputation_method(), cell.m, rng)
    return res.outcome.pvalue, nrmse(full, masked, res.draws).value


def _run_indices(cell: SimulationCell, indices: Sequence[int]):
    out = []
    for i in indices:
        try:
            out.append(run_replicate(cell, i))
        except ComputationError as exc:
            logger.debug("replicate %d degenerate: %s", i, exc)
            out.append(None)
    return out


def run_cell(cell: SimulationCell, threads: int = 1) -> CellResult:
    """Monte Carlo rejection rate (and mean NRMSE) of one cell.

    Degenerate replicates are counted and left out of the rate; more than
    1% of ``n_sim`` is a hard failure. ``pvalues`` and ``nrmse_values`` on the
    result have one entry per replicate, ``nan`` where it was degenerate.
    """
    start = time.perf_counter()
    indices = list(range(cell.n_sim))
    if threads > 1:
        chunks = [indices[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(threads) as pool:
            parts = list(pool.map(_run_indices, [cell] * threads, chunks))
        results = [None] * cell.n_sim
        for chunk, part in zip(chunks, parts):
            for i, r in zip(chunk, part):
                results[i] = r
    else:
        results = _run_indices(cell, indices)
    degenerate = sum(r is None for r in results)
    if degenerate > DEGENERATE_LIMIT * cell.n_sim:
        raise ComputationError(
            f"{degenerate} of {cell.n_sim} replicates were degenerate for {cell}; configuration looks broken"
        )
    # full-length arrays (nan marks a degenerate replicate) keep replicate i
    # aligned across methods for paired comparisons
    pvalues = np.array([math.nan if r is None else r[0] for r in results])
    nrmses = np.array([math.nan if r is None else r[1] for r in results])
    ok = ~np.isnan(pvalues)
    rate = float(np.mean(pvalues[ok] < cell.alpha))
    se = math.sqrt(rate * (1 - rate) / ok.sum())
    nrmse_mean = None if cell.method == "tml" else float(np.mean(nrmses[ok]))
    return CellResult(cell, rate, se, nrmse_mean, degenerate, time.perf_counter() - start,
                      pvalues, nrmses)


# --------------------------------------------------------------------------
# grids and caching

CONFIG_KEYS = {
    "laws", "rhos", "sigma_variants", "sizes", "deltas", "methods", "n_sim", "B", "m", "seed",
    "forest", "pmm_k", "chained_T", "rfmi_max_iter", "alpha", "kappa",
}
FOREST_KEYS = {"n_trees", "mtry", "min_node", "max_depth"}


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def cells_from_config(config: dict, seed: int | None = None) -> list[SimulationCell]:
    """Expand a grid configuration into cells (law, rho, sigma, sizes, delta, method order)."""
    unknown = sorted(set(config) - CONFIG_KEYS)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    forest_cfg = config.get("forest")
    forest = None
    if forest_cfg is not None:
        bad = sorted(set(forest_cfg) - FOREST_KEYS)
        if bad:
            raise ValidationError(f"unknown forest keys: {', '.join(bad)}")
        forest = ForestParams(**forest_cfg)
    common = dict(
        n_sim=int(config.get("n_sim", 1000)),
        B=int(config.get("B", 1000)),
        m=int(config.get("m", 5)),
        seed=int(seed if seed is not None else config.get("seed", 0)),
        forest=forest,
        pmm_k=int(config.get("pmm_k", 5)),
        chained_T=int(config.get("chained_T", 5)),
        rfmi_max_iter=int(config.get("rfmi_max_iter", 10)),
        alpha=float(config.get("alpha", ALPHA)),
        kappa=float(config.get("kappa", 2.0)),
    )
    grid = itertools.product(
        config.get("laws", ["normal"]),
        config.get("rhos", [0.0]),
        config.get("sigma_variants", ["sigma1"]),
        [tuple(s) for s in config.get("sizes", [(10, 10, 10)])],
        config.get("deltas", [0.0]),
        config.get("methods", list(TEST_METHODS)),
    )
    return [
        SimulationCell(law=law, rho=float(rho), sigma=sigma, sizes=sizes, delta=float(delta),
                       method=method, **common)
        for law, rho, sigma, sizes, delta, method in grid
    ]


def _cached(cell: SimulationCell, cache_dir: Path | None, threads: int) -> CellResult:
    path = None
    if cache_dir is not None:
        path = cache_dir / f"{cell.cache_key()}.json"
        if path.exists():
            data = json.loads(path.read_text())
            return CellResult(cell, data["rejection_rate"], data["mc_se"], data["nrmse_mean"],
                              data["degenerate_count"], data["seconds"])
    res = run_cell(cell, threads)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {k: getattr(res, k) for k in
                   ("rejection_rate", "mc_se", "nrmse_mean", "degenerate_count", "seconds")}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload))
        tmp.replace(path)
    return res


def run_cells(cells: Iterable[SimulationCell], cache_dir=None, threads: int = 1,
              progress=None) -> list[CellResult]:
    cache = Path(cache_dir) if cache_dir is not None else None
    out = []
    for cell in cells:
        res = _cached(cell, cache, threads)
        out.append(res)
        if progress is not None:
            progress(res)
    return out


def write_results(results: Sequence[CellResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        for r in results:
            writer.writerow(r.row())


def run_grid(config, out_csv, seed: int | None = None, cache_dir=None, threads: int = 1) -> list[CellResult]:
    """Evaluate every cell of a configuration and write one CSV row per cell."""
    if not isinstance(config, dict):
        config = load_config(config)
    cells = cells_from_config(config, seed)
    results = run_cells(cells, cache_dir, threads)
    write_results(results, out_csv)
    return results


# --------------------------------------------------------------------------
# observed data


@dataclass
class AnalysisRow:
    method: str
    statistic: float | None
    df: float | str | None
    pvalue: float | None
    error: str = ""


def analyze_dataset(
    sample: PairedSample | str | Path,
    methods: Sequence[str] = ("ttest",) + TEST_METHODS,
    inject_rate: float | None = None,
    m: int = 5,
    B: int = 1000,
    seed: int = 0,
    x1: str = "x1",
    x2: str = "x2",
    aux: Sequence[str] = (),
    delimiter: str = ",",
) -> list[AnalysisRow]:
    """Two-sided p-values of every requested method on one dataset.

    ``ttest`` is the complete-data paired t test and needs a fully observed
    sample (before any injection). With auxiliary columns, every imputation
    method is run twice: on the pair alone and as ``<method>+aux``. A failing
    method produces a row with ``error`` set instead of aborting the report.
    """
    if not isinstance(sample, PairedSample):
        sample = ingest_csv(sample, x1, x2, aux, delimiter)
    unknown = [mth for mth in methods if mth not in ("ttest",) + TEST_METHODS]
    if unknown:
        raise ValidationError(f"unknown methods: {unknown}")
    original = sample
    if inject_rate is not None:
        rng = np.random.default_rng([seed, _stable_int("inject")])
        sample = inject_mcar(sample, Bernoulli(inject_rate), rng)
    rows = []
    for method in methods:
        variants = [(method, False)]
        if method in MI_METHODS and sample.aux is not None:
            variants.append((f"{method}+aux", True))
        for label, use_aux in variants:
            rng = np.random.default_rng([seed, _stable_int(label)])
            try:
                if method == "ttest":
                    if original.sizes[0] != original.n:
                        raise ValidationError("complete-case paired t needs fully observed pairs")
                    o = paired_t(original.x[:, 0] - original.x[:, 1])
                elif method == "tml":
                    o = permute_and_test(sample, PermutationConfig(B=B), rng)
                else:
                    s = sample if use_aux else PairedSample(sample.x)
                    o = mi_analysis(s, ImputationMethod(method), m, rng).outcome
                rows.append(AnalysisRow(label, o.statistic, o.df, o.pvalue))
            except PairedMIError as exc:
                rows.append(AnalysisRow(label, None, None, None, str(exc)))
    return rows


# --------------------------------------------------------------------------
# reproduction targets

RHOS = (-0.9, -0.5, -0.1, 0.1, 0.5, 0.9)
LAWS = ("normal", "exp", "chisq", "laplace")
GROWTH_K = (1, 2, 5, 10, 20, 50)
FULL_NSIM = 10_000
REPRODUCE_TARGETS = ("table1", "table2", "nrmse-figure", "growth-figure")


def reproduce_cells(target: str, scale: float = 0.2, seed: int = 0, B: int = 1000, m: int = 5,
                    n_trees: int = 100) -> list[SimulationCell]:
    """Cells of one published grid at ``n_sim = round(10000 * scale)``."""
    if target not in REPRODUCE_TARGETS:
        raise ValidationError(f"unknown reproduce target {target!r}; expected one of {REPRODUCE_TARGETS}")
    if not scale > 0:
        raise ValidationError("scale must be positive")
    n_sim = max(1, round(FULL_NSIM * scale))
    base = dict(n_sim=n_sim, B=B, m=m, seed=seed, alpha=ALPHA)

    def cells(laws, rhos, sigmas, sizes, deltas, methods):
        forest = ForestParams(n_trees=n_trees)
        out = []
        for law, rho, sigma, sz, delta, method in itertools.product(laws, rhos, sigmas, sizes, deltas, methods):
            f = forest if method == "rfmi" else None
            out.append(SimulationCell(law, rho, sigma, sz, delta, method, forest=f, **base))
        return out

    if target == "table1":
        return cells(LAWS, RHOS, ("sigma1", "sigma2"), [(10, 10, 10)], [0.0], TEST_METHODS)
    if target == "table2":
        return cells(LAWS, RHOS, ("sigma1",), [(10, 10, 10)], [0.5, 1.0], TEST_METHODS)
    if target == "nrmse-figure":
        return cells(LAWS, RHOS, ("sigma1",), [(10, 10, 10)], [0.0], MI_METHODS)
    sizes = [(30 * k, 10 * k, 10 * k) for k in GROWTH_K] + [(10 + k, 10 + k, 10 + k) for k in GROWTH_K]
    return cells(("chisq",), (0.1,), ("sigma1",), sizes, [0.0], TEST_METHODS)


def reference_value(cell: SimulationCell) -> float | None:
    """Published rejection rate for a cell, when one exists."""
    from . import reference

    if cell.sizes != (10, 10, 10) or (cell.law, cell.rho) not in reference.TYPE1:
        return None
    if cell.delta == 0:
        return reference.type1(cell.law, cell.rho, cell.sigma, cell.method)
    if cell.sigma == "sigma1" and cell.delta in (0.5, 1.0):
        return reference.power(cell.law, cell.rho, cell.delta, cell.method)
    return None


def deviation_flag(result: CellResult, ref: float | None) -> str:
    """``*`` when the estimate is more than 3 combined SEs from the reference."""
    if ref is None:
        return ""
    se = math.sqrt(result.mc_se ** 2 + ref * (1 - ref) / FULL_NSIM)
    return "*" if abs(result.rejection_rate - ref) > 3 * max(se, 1e-12) else ""


def write_comparison(results: Sequence[CellResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS + ["reference", "flag"])
        writer.writeheader()
        for r in results:
            ref = reference_value(r.cell)
            writer.writerow({**r.row(), "reference": "" if ref is None else ref,
                             "flag": deviation_flag(r, ref)})


def format_comparison(results: Sequence[CellResult]) -> str:
    lines = [f"{'law':8} {'rho':>5} {'sigma':6} {'sizes':>14} {'delta':>5} {'method':7} "
             f"{'rate':>6} {'se':>6} {'ref':>6} flag"]
    for r in results:
        c = r.cell
        ref = reference_value(c)
        lines.append(
            f"{c.law:8} {c.rho:5.1f} {c.sigma:6} {str(c.sizes):>14} {c.delta:5.1f} {c.method:7} "
            f"{r.rejection_rate:6.3f} {r.mc_se:6.3f} {'' if ref is None else f'{ref:6.3f}':>6} "
            f"{deviation_flag(r, ref)}"
        )
    return "\n".join(lines)
