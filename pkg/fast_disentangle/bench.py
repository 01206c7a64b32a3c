"""Benchmark protocols behind the CLI subcommands.

Every trial draws from its own stream SeedSequence(seed, spawn_key=(trial,)),
so results do not depend on the number of workers or on completion order.
Wall-clock columns are only filled when timing is requested; without them
identical configurations give identical reports.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Literal, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .descent import DescentConfig, haar_disentangler, minimize_entropy, riemannian_descent
from .disentangle import (
    Dims,
    Disentangler,
    DisentangleOptions,
    Regime,
    disentangle_auto,
    fast_disentangle_steps,
    select_regime,
    zero_singular_lower_bound,
)
from .entanglement import (
    apply_disentangler,
    cut_spectrum,
    entanglement_entropy,
    renyi_entropy,
    to_bits,
    truncation_error,
    von_neumann_entropy,
    zero_count,
)
from .generators import SpectrumKind, check_kind_dims, make_tensor, random_state
from .tensors import make_rng
from .wavefunction import Method, cut_entropies, disentangle_state

logger = logging.getLogger(__name__)

Command = Literal["table1", "trunc-curve", "wave", "run"]

T = TypeVar("T")


class CliConfig(BaseModel):
    """Validated run configuration; built from flags, environment and defaults."""

    model_config = ConfigDict(frozen=True)

    command: Command
    chi1: int = Field(2, ge=1)
    chi2: int = Field(2, ge=1)
    chi3: int = Field(2, ge=1)
    chi4: int = Field(2, ge=1)
    kind: SpectrumKind = SpectrumKind.GAUSSIAN
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    restarts: int = Field(8, ge=1)
    layers: int = Field(1, ge=1)
    qubits: int = Field(10, ge=2, le=24)
    method: Method = Method.FAST
    fmt: Literal["csv", "json"] = "csv"
    out: Path | None = None
    bits: bool = False
    workers: int = Field(1, ge=1)
    timing: bool = False
    speedup: bool = False
    rank1: bool = False

    @model_validator(mode="after")
    def _check_dims(self) -> CliConfig:
        if self.command != "wave":
            check_kind_dims(self.kind, self.dims)
            select_regime(self.dims)
        if self.rank1 and self.kind is not SpectrumKind.ANSATZ:
            raise ValueError("--rank1 only applies to --kind ansatz")
        return self

    @property
    def dims(self) -> Dims:
        return Dims(self.chi1, self.chi2, self.chi3, self.chi4)

    @property
    def unit(self) -> str:
        return "bits" if self.bits else "nats"

    def entropy(self, nats: float) -> float:
        return to_bits(nats) if self.bits else nats

    def descent(self) -> DescentConfig:
        return DescentConfig(restarts=self.restarts)


class Stat(BaseModel):
    count: int
    mean: float
    median: float
    q16: float
    q84: float


def quantile(values: Sequence[float], q: float) -> float:
    """Nearest-rank q-th percentile: the ceil(q/100 N)-th smallest value."""
    if not values:
        raise ValueError("quantile of an empty sample")
    if not 0 <= q <= 100:
        raise ValueError(f"percentile must be in [0, 100], got {q}")
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100 * len(ordered)))
    return ordered[rank - 1]


def summarize(values: Sequence[float | None]) -> Stat | None:
    """Mean, median and 16th/84th percentiles over the finite values."""
    finite = [v for v in values if v is not None and math.isfinite(v)]
    if not finite:
        return None
    return Stat(
        count=len(finite),
        mean=float(np.mean(finite)),
        median=quantile(finite, 50),
        q16=quantile(finite, 16),
        q84=quantile(finite, 84),
    )


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return make_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _map_trials(fn: Callable[[CliConfig, int], T], cfg: CliConfig) -> list[T]:
    """fn(cfg, trial) for every trial, in trial order."""
    trials = range(cfg.trials)
    if cfg.workers == 1 or cfg.trials == 1:
        results = []
        for trial in trials:
            results.append(fn(cfg, trial))
            logger.info("trial %d/%d done", trial + 1, cfg.trials)
        return results
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, [cfg] * cfg.trials, trials))


def _excess(value: float, reference: float) -> float | None:
    return value / reference - 1 if reference > 0 else None


def _timed(fn: Callable[[], T]) -> tuple[T, float]:
    started = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - started


# ---- table1 ------------------------------------------------------------------


class Table1Row(BaseModel):
    trial: int
    s_fast: float
    s_min: float
    s_rand: float
    fast_excess: float | None
    rand_excess: float | None
    eps_fast: float
    eps_min: float
    zeros_fast: int
    t_fast: float | None = None
    t_min: float | None = None
    speedup: float | None = None


class Table1Report(BaseModel):
    command: Literal["table1"] = "table1"
    kind: SpectrumKind
    dims: tuple[int, int, int, int]
    seed: int
    trials: int
    restarts: int
    unit: str
    rows: list[Table1Row]
    summary: dict[str, Stat | None]


def table1_trial(cfg: CliConfig, trial: int) -> Table1Row:
    """Generate A, then compare the fast, minimal-entropy and Haar unitaries."""
    d = cfg.dims
    rng = trial_rng(cfg.seed, trial)
    a = make_tensor(cfg.kind, d, rng, rank1=cfg.rank1)
    (u_fast, s_fast), t_fast = _timed(lambda: disentangle_auto(a, d.chi1, d.chi2, rng=rng))
    u_rand = haar_disentangler(d.chi1, d.chi2, rng)
    s_rand = entanglement_entropy(u_rand, a)
    best, t_min = _timed(
        lambda: minimize_entropy(a, d.chi1, d.chi2, cfg.descent(), rng, starts=(u_fast, u_rand))
    )
    fast_spectrum = cut_spectrum(apply_disentangler(u_fast, a))
    min_spectrum = cut_spectrum(apply_disentangler(best.unitary, a))

    speedup = None
    if cfg.speedup:
        target = DescentConfig(target_entropy=s_fast, max_iterations=10_000)
        trace = riemannian_descent(a, haar_disentangler(d.chi1, d.chi2, rng), target)
        speedup = trace.duration / t_fast if t_fast > 0 else None

    timing = cfg.timing or cfg.speedup
    return Table1Row(
        trial=trial,
        s_fast=cfg.entropy(s_fast),
        s_min=cfg.entropy(best.entropy),
        s_rand=cfg.entropy(s_rand),
        fast_excess=_excess(s_fast, best.entropy),
        rand_excess=_excess(s_rand, best.entropy),
        eps_fast=truncation_error(fast_spectrum, min(d.chi1, len(fast_spectrum))),
        eps_min=truncation_error(min_spectrum, min(d.chi1, len(min_spectrum))),
        zeros_fast=zero_count(fast_spectrum),
        t_fast=t_fast if timing else None,
        t_min=t_min if timing else None,
        speedup=speedup,
    )


def run_table1(cfg: CliConfig) -> Table1Report:
    rows = _map_trials(table1_trial, cfg)
    columns = ["s_fast", "s_min", "s_rand", "fast_excess", "rand_excess", "eps_fast", "eps_min"]
    if cfg.timing or cfg.speedup:
        columns += ["t_fast", "t_min"]
    if cfg.speedup:
        columns.append("speedup")
    summary = {col: summarize([getattr(row, col) for row in rows]) for col in columns}
    return Table1Report(
        kind=cfg.kind,
        dims=(cfg.chi1, cfg.chi2, cfg.chi3, cfg.chi4),
        seed=cfg.seed,
        trials=cfg.trials,
        restarts=cfg.restarts,
        unit=cfg.unit,
        rows=rows,
        summary=summary,
    )


# ---- trunc-curve -------------------------------------------------------------


class TruncRow(BaseModel):
    trial: int
    chi: int
    eps_fast: float
    eps_min: float
    eps_identity: float


class TruncSummary(BaseModel):
    chi: int
    fast: Stat
    min: Stat
    identity: Stat


class TruncCurveReport(BaseModel):
    command: Literal["trunc-curve"] = "trunc-curve"
    kind: SpectrumKind
    dims: tuple[int, int, int, int]
    seed: int
    trials: int
    restarts: int
    rows: list[TruncRow]
    summary: list[TruncSummary]


def trunc_trial(cfg: CliConfig, trial: int) -> list[TruncRow]:
    """Truncation error at every bond dimension for the three unitaries."""
    d = cfg.dims
    rng = trial_rng(cfg.seed, trial)
    a = make_tensor(cfg.kind, d, rng, rank1=cfg.rank1)
    u_fast, _ = disentangle_auto(a, d.chi1, d.chi2, rng=rng)
    best = minimize_entropy(a, d.chi1, d.chi2, cfg.descent(), rng, starts=(u_fast,))
    spectra = {
        name: cut_spectrum(apply_disentangler(u, a))
        for name, u in (
            ("fast", u_fast),
            ("min", best.unitary),
            ("identity", Disentangler.identity(d.chi1, d.chi2)),
        )
    }
    size = len(spectra["fast"])
    return [
        TruncRow(
            trial=trial,
            chi=chi,
            eps_fast=truncation_error(spectra["fast"], chi),
            eps_min=truncation_error(spectra["min"], chi),
            eps_identity=truncation_error(spectra["identity"], chi),
        )
        for chi in range(1, size + 1)
    ]


def run_trunc_curve(cfg: CliConfig) -> TruncCurveReport:
    rows = [row for trial_rows in _map_trials(trunc_trial, cfg) for row in trial_rows]
    summary = []
    for chi in sorted({row.chi for row in rows}):
        at_chi = [row for row in rows if row.chi == chi]
        stats = {
            name: summarize([getattr(row, f"eps_{name}") for row in at_chi])
            for name in ("fast", "min", "identity")
        }
        summary.append(TruncSummary(chi=chi, **stats))
    return TruncCurveReport(
        kind=cfg.kind,
        dims=(cfg.chi1, cfg.chi2, cfg.chi3, cfg.chi4),
        seed=cfg.seed,
        trials=cfg.trials,
        restarts=cfg.restarts,
        rows=rows,
        summary=summary,
    )


# ---- wave --------------------------------------------------------------------


class WaveRow(BaseModel):
    trial: int
    layer: int
    parity: str | None
    residual: float
    cumulative_gates: int
    elapsed: float | None = None
    entropies: list[float]


class WaveReport(BaseModel):
    command: Literal["wave"] = "wave"
    qubits: int
    layers: int
    method: Method
    seed: int
    trials: int
    unit: str
    rows: list[WaveRow]
    summary: dict[str, Stat | None]


def wave_trial(cfg: CliConfig, trial: int) -> list[WaveRow]:
    """Layer 0 is the random initial state; layers 1.. follow the sweeps."""
    rng = trial_rng(cfg.seed, trial)
    psi = random_state(cfg.qubits, rng)
    initial = [cfg.entropy(s) for s in cut_entropies(psi)]
    rows = [
        WaveRow(
            trial=trial,
            layer=0,
            parity=None,
            residual=max(initial),
            cumulative_gates=0,
            elapsed=0.0 if cfg.timing else None,
            entropies=initial,
        )
    ]
    for record in disentangle_state(psi, cfg.layers, cfg.method, rng):
        entropies = [cfg.entropy(s) for s in record.entropies]
        rows.append(
            WaveRow(
                trial=trial,
                layer=record.layer,
                parity=record.parity.value,
                residual=max(entropies),
                cumulative_gates=record.cumulative_gates,
                elapsed=record.elapsed if cfg.timing else None,
                entropies=entropies,
            )
        )
    return rows


def run_wave(cfg: CliConfig) -> WaveReport:
    rows = [row for trial_rows in _map_trials(wave_trial, cfg) for row in trial_rows]
    summary = {
        "initial_residual": summarize([r.residual for r in rows if r.layer == 0]),
        "final_residual": summarize([r.residual for r in rows if r.layer == cfg.layers]),
    }
    return WaveReport(
        qubits=cfg.qubits,
        layers=cfg.layers,
        method=cfg.method,
        seed=cfg.seed,
        trials=cfg.trials,
        unit=cfg.unit,
        rows=rows,
        summary=summary,
    )


# ---- run ---------------------------------------------------------------------


class SpectrumRow(BaseModel):
    index: int
    before: float
    after: float


class SingleReport(BaseModel):
    command: Literal["run"] = "run"
    kind: SpectrumKind
    dims: tuple[int, int, int, int]
    seed: int
    regime: str
    unit: str
    zero_lower_bound: int
    entropy_before: float
    entropy_after: float
    renyi2_before: float
    renyi2_after: float
    zeros_before: int
    zeros_after: int
    eps_after: float
    unitarity_error: float
    spectrum_before: list[float]
    spectrum_after: list[float]
    # base regime with a single attempt only
    ordering: str | None = None
    triangular_residual: float | None = None

    def spectrum_rows(self) -> list[SpectrumRow]:
        return [
            SpectrumRow(index=i, before=b, after=a)
            for i, (b, a) in enumerate(zip(self.spectrum_before, self.spectrum_after), start=1)
        ]


def run_single(cfg: CliConfig) -> SingleReport:
    """One tensor, one disentangler, both spectra."""
    d = cfg.dims
    rng = trial_rng(cfg.seed, 0)
    a = make_tensor(cfg.kind, d, rng, rank1=cfg.rank1)
    regime = select_regime(d)
    steps = None
    if regime is Regime.BASE and cfg.trials == 1:
        steps = fast_disentangle_steps(a, d.chi1, d.chi2, rng)
        u = steps.unitary
    else:
        u, _ = disentangle_auto(a, d.chi1, d.chi2, DisentangleOptions(trials=cfg.trials), rng)
    before = cut_spectrum(apply_disentangler(Disentangler.identity(d.chi1, d.chi2), a))
    after = cut_spectrum(apply_disentangler(u, a))
    return SingleReport(
        kind=cfg.kind,
        dims=(d.chi1, d.chi2, d.chi3, d.chi4),
        seed=cfg.seed,
        regime=regime.value,
        unit=cfg.unit,
        zero_lower_bound=zero_singular_lower_bound(d),
        entropy_before=cfg.entropy(von_neumann_entropy(before)),
        entropy_after=cfg.entropy(von_neumann_entropy(after)),
        renyi2_before=cfg.entropy(renyi_entropy(before, 2)),
        renyi2_after=cfg.entropy(renyi_entropy(after, 2)),
        zeros_before=zero_count(before),
        zeros_after=zero_count(after),
        eps_after=truncation_error(after, min(d.chi1, len(after))),
        unitarity_error=u.unitarity_error(),
        spectrum_before=before.values.tolist(),
        spectrum_after=after.values.tolist(),
        ordering=steps.ordering.value if steps else None,
        triangular_residual=steps.triangular_residual() if steps else None,
    )
