"""Experiment implementations behind the command-line driver."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correspondence import verify_correspondence_family
from .lattice import cube
from .observables import build_observable
from .reporting import ExperimentReport, config_hash
from .schrodinger import (
    counterexample_mass_profile,
    counterexample_potential,
    lattice_block,
    load_potential,
    partial_qe_experiment,
)
from .spectra import (
    bloch_basis,
    dirichlet_eigenvalues,
    lemma_c1_counts,
    periodic_eigenvalues,
    sine_basis,
)
from .time_average import bessel_bound_check, centered, quantum_variance
from .correlators import wucha_error_scan

__all__ = ["ConfigError", "ExperimentConfig", "EXPERIMENTS", "run"]

_VERSION = "0.1.0"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str
    d: int = 1
    n_values: tuple[int, ...] = ()
    obs: tuple[str, ...] = ("half-indicator",)
    mode: str = "dirichlet"
    q: tuple[int, ...] | None = None
    potential: str | None = None
    mass: float = 100.0
    task: str = "counterexample"
    max_offset: int = 3
    tol: float = 1e-10
    bound: float | None = None
    random_count: int = 0
    seed: int = 0
    unchecked: bool = False
    exploratory: bool = False
    out: str = "."  # execution detail, not part of the config identity
    threads: int = 1

    def canonical(self) -> dict:
        return {
            "experiment": self.experiment,
            "d": self.d,
            "n_values": list(self.n_values),
            "obs": list(self.obs),
            "mode": self.mode,
            "q": list(self.q) if self.q is not None else None,
            "potential": self.potential,
            "mass": self.mass,
            "task": self.task,
            "max_offset": self.max_offset,
            "tol": self.tol,
            "bound": self.bound,
            "random_count": self.random_count,
            "seed": self.seed,
            "unchecked": self.unchecked,
            "exploratory": self.exploratory,
        }

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.n_values:
            raise ConfigError("need at least one box size (--N)")
        if list(self.n_values) != sorted(self.n_values) or len(set(self.n_values)) != len(self.n_values):
            raise ConfigError(f"box sizes must be strictly ascending, got {self.n_values}")
        if any(N < 1 for N in self.n_values):
            raise ConfigError("box sizes must be positive")
        if self.d < 1:
            raise ConfigError("dimension must be positive")
        if self.mode not in ("dirichlet", "periodic"):
            raise ConfigError(f"unknown boundary mode {self.mode!r}")
        if self.task not in ("counterexample", "partial-qe"):
            raise ConfigError(f"unknown schrodinger task {self.task!r}")
        if self.potential is not None and not Path(self.potential).is_file():
            raise ConfigError(f"potential file not found: {self.potential}")
        for spec in self.obs:
            if spec.endswith(".json") and not Path(spec).is_file():
                raise ConfigError(f"observable file not found: {spec}")


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _basis(cfg: ExperimentConfig, N: int):
    if cfg.mode == "periodic":
        return bloch_basis(N, cfg.d)
    return sine_basis(N, cfg.d)


def _obs_rng(cfg: ExperimentConfig, *key):
    return np.random.default_rng([cfg.seed, *key])


def _run_var_scan(cfg: ExperimentConfig):
    spec = cfg.obs[0]
    bound = cfg.bound if cfg.bound is not None else 1.0

    def one(N):
        box = cube(N, cfg.d)
        a = build_observable(spec, box, q=cfg.q, rng=_obs_rng(cfg, N))
        var = quantum_variance(_basis(cfg, N), centered(a))
        return {"N": N, "var": var, "var_times_N": var * N, "pass": var * N <= bound}

    rows = _map(one, list(cfg.n_values), cfg.threads)
    return ["N", "var", "var_times_N", "pass"], rows


def _run_degeneracy(cfg: ExperimentConfig):
    def one(N):
        basis = _basis(cfg, N)
        sizes = [len(c) for c in basis.classes]
        cls_of = {}
        for ci, cls in enumerate(basis.classes):
            for j in cls:
                cls_of[basis.freqs[j]] = ci
        perm_ok = True
        for freq, ci in cls_of.items():
            if cls_of[tuple(sorted(freq))] != ci:
                perm_ok = False
                break
        singles = all(s == 1 for s in sizes)
        ok = perm_ok and (singles if cfg.d == 1 and cfg.mode == "dirichlet" else True)
        return {
            "N": N,
            "n_classes": len(sizes),
            "max_class_size": max(sizes),
            "sum_sq_sizes": sum(s * s for s in sizes),
            "all_singletons": singles,
            "perm_consistent": perm_ok,
            "pass": ok,
        }

    rows = _map(one, list(cfg.n_values), cfg.threads)
    return (
        ["N", "n_classes", "max_class_size", "sum_sq_sizes", "all_singletons", "perm_consistent", "pass"],
        rows,
    )


def _run_lemma_c1(cfg: ExperimentConfig):
    rows = []
    for N in cfg.n_values:
        counts = lemma_c1_counts(N, cfg.d)
        bound = 2 * N ** (cfg.d - 1)
        for (t, eps, epp), count in sorted(counts.items()):
            rows.append(
                {
                    "N": N,
                    "theta": ";".join(repr(tl / (N + 1)) for tl in t),
                    "t": ";".join(str(tl) for tl in t),
                    "eps": ";".join(str(e) for e in eps),
                    "epsp": ";".join(str(e) for e in epp),
                    "count": count,
                    "bound": bound,
                    "pass": count <= bound,
                }
            )
    return ["N", "theta", "t", "eps", "epsp", "count", "bound", "pass"], rows


def _spectral_inclusion_error(N: int, d: int) -> float:
    dir_eigs = dirichlet_eigenvalues(N, d)
    per_eigs = periodic_eigenvalues(2 * N + 2, d)
    gaps = np.min(np.abs(dir_eigs[:, None] - per_eigs[None, :]), axis=1)
    return float(np.max(gaps))


def _run_correspond(cfg: ExperimentConfig):
    def one(N):
        basis = sine_basis(N, cfg.d)
        max_residual, gram_error = verify_correspondence_family(basis)
        inclusion = _spectral_inclusion_error(N, cfg.d)
        ok = max_residual <= cfg.tol and gram_error <= cfg.tol and inclusion <= cfg.tol
        return {
            "N": N,
            "d": cfg.d,
            "max_residual": max_residual,
            "gram_error": gram_error,
            "spectral_inclusion_error": inclusion,
            "pass": ok,
        }

    rows = _map(one, list(cfg.n_values), cfg.threads)
    return ["N", "d", "max_residual", "gram_error", "spectral_inclusion_error", "pass"], rows


def _run_schrodinger(cfg: ExperimentConfig):
    if cfg.task == "counterexample":

        def one(N):
            profile = counterexample_mass_profile(cfg.mass, N)
            return {
                "N": N,
                "M": cfg.mass,
                "volume": 2 * N,
                "low_band_count": profile.low_band_count,
                "high_band_count": profile.high_band_count,
                "bands_complete": profile.bands_complete,
                "max_low_even_mass": profile.max_low_even_mass,
                "max_high_odd_mass": profile.max_high_odd_mass,
                "mass_bound": profile.mass_bound,
                "pass": profile.bands_complete and profile.bound_holds,
            }

        rows = _map(one, list(cfg.n_values), cfg.threads)
        return (
            [
                "N",
                "M",
                "volume",
                "low_band_count",
                "high_band_count",
                "bands_complete",
                "max_low_even_mass",
                "max_high_odd_mass",
                "mass_bound",
                "pass",
            ],
            rows,
        )

    potential = load_potential(cfg.potential) if cfg.potential else counterexample_potential(cfg.mass)
    rows = []
    first_var: dict[str, float] = {}
    for spec in cfg.obs:
        for N in cfg.n_values:
            box = lattice_block(potential.q, N)
            a = build_observable(spec, box, q=potential.q, rng=_obs_rng(cfg, N))
            result = partial_qe_experiment(
                potential, N, a, enforce_lc=not cfg.unchecked, exploratory=cfg.exploratory
            )
            if result.lc_checked:
                ok = result.variance <= first_var.setdefault(spec, result.variance) + 1e-15
            else:
                ok = True  # reporting only: inadmissible observable, nothing asserted
            rows.append(
                {
                    "N": N,
                    "q": ";".join(str(c) for c in potential.q),
                    "obs": spec,
                    "variance": result.variance,
                    "lc_deviation": result.lc_deviation,
                    "lc_checked": result.lc_checked,
                    "pass": ok,
                }
            )
    return ["N", "q", "obs", "variance", "lc_deviation", "lc_checked", "pass"], rows


def _run_correlator(cfg: ExperimentConfig):
    scan = wucha_error_scan(cfg.n_values, cfg.max_offset)
    first = {}
    for row in scan:
        first.setdefault(row["z"], row["err_times_N"])
    rows = []
    for row in scan:
        bound = cfg.bound if cfg.bound is not None else max(2.0 * first[row["z"]], 1e-8)
        rows.append({**row, "bound": bound, "pass": row["err_times_N"] <= bound})
    return ["N", "z", "max_err", "err_times_N", "bound", "pass"], rows


def _run_bessel(cfg: ExperimentConfig):
    specs = list(cfg.obs) + ["random-diagonal"] * cfg.random_count
    rows = []
    for N in cfg.n_values:
        box = cube(N, cfg.d)
        for i, spec in enumerate(specs):
            a = build_observable(spec, box, q=cfg.q, rng=_obs_rng(cfg, N, i))
            lhs, rhs = bessel_bound_check(a)
            name = spec if spec != "random-diagonal" else f"random-diagonal-{i}"
            rows.append(
                {
                    "N": N,
                    "d": cfg.d,
                    "obs": name,
                    "lhs": lhs,
                    "rhs": rhs,
                    "slack": rhs - lhs,
                    "pass": lhs <= rhs * (1 + 1e-12),
                }
            )
    return ["N", "d", "obs", "lhs", "rhs", "slack", "pass"], rows


EXPERIMENTS = {
    "var-scan": _run_var_scan,
    "degeneracy": _run_degeneracy,
    "lemma-c1": _run_lemma_c1,
    "correspond": _run_correspond,
    "schrodinger": _run_schrodinger,
    "correlator": _run_correlator,
    "bessel": _run_bessel,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    """Validate, dispatch, and package an experiment run."""
    cfg.validate()
    start = time.perf_counter()
    columns, rows = EXPERIMENTS[cfg.experiment](cfg)
    wall = time.perf_counter() - start
    metadata = {
        "version": _VERSION,
        "config_hash": config_hash(cfg.canonical()),
        "config": cfg.canonical(),
    }
    return ExperimentReport(cfg.experiment, columns, rows, metadata, wall_time_s=wall)


def threads_from_env() -> int:
    raw = os.environ.get("QE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"QE_THREADS must be an integer, got {raw!r}")
