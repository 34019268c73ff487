"""Seeded train/test pipelines, parameter sweeps and domain-generalization runs.

Random streams are derived from ``(master_seed, labels)`` so every input of
every realization is reproducible regardless of scheduling:

* ``(r, COUPLINGS)`` draws the Ising couplings of realization ``r``;
* ``(r, TRAIN, k)`` / ``(r, TEST, k)`` draw ``p_k``, the reservoir state
  ``R_k`` and the noise state ``r_k`` of input ``k``, in that order;
* ``(r, SHOTS, phase, k)`` drives the measurement shots of input ``k``.

Swept parameters and noise/shot/feature families therefore see identical
couplings and inputs within a realization.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .readout import CalibrationPoint, dress_predictions, fit_readout, mean_squared_error, predict
from .reservoir import (
    CorrelationOrder,
    FeatureSpec,
    ShotPlan,
    build_reservoir,
    draw_couplings,
    evolved_populations,
    features_from_distribution,
    sample_counts,
)
from .states import Ensemble, apply_input_noise, compose_initial, make_werner, random_density

COUPLINGS, TRAIN, TEST, SHOTS, FIXED_RESERVOIR = range(5)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message starts with the offending field."""


def derive_substream(master_seed: int, labels) -> np.random.Generator:
    """Independent generator for the label path ``labels`` under ``master_seed``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(x) for x in labels))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class ExperimentConfig:
    n_qubits: int = 5
    coupling_scale: float = 1.0
    h_values: tuple[float, ...] = (0.1,)
    delta_t_values: tuple[float, ...] = (10.0,)
    epsilons: tuple[float, ...] = (0.0,)
    shots: tuple[ShotPlan, ...] = (ShotPlan(),)
    correlation_orders: tuple[CorrelationOrder, ...] = (CorrelationOrder.LOCAL_Z,)
    include_bias: bool = True
    n_train: int = 100
    n_test: int = 100
    realizations: int = 20
    input_qubits_train: int = 2
    input_qubits_test: tuple[int, ...] = (2,)
    reservoir_ensemble: Ensemble = Ensemble.HILBERT_SCHMIDT
    noise_ensemble: Ensemble = Ensemble.HILBERT_SCHMIDT
    fixed_reservoir_state: bool = False
    ridge: float = 0.0
    calibration_index: int = 0
    allow_underdetermined: bool = False
    master_seed: int = 0

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("h_values", tuple(float(v) for v in self.h_values))
        set_("delta_t_values", tuple(float(v) for v in self.delta_t_values))
        set_("epsilons", tuple(float(v) for v in self.epsilons))
        set_("shots", tuple(ShotPlan.parse(s) for s in self.shots))
        set_("correlation_orders", tuple(CorrelationOrder(c) for c in self.correlation_orders))
        set_("input_qubits_test", tuple(int(n) for n in self.input_qubits_test))
        set_("reservoir_ensemble", Ensemble(self.reservoir_ensemble))
        set_("noise_ensemble", Ensemble(self.noise_ensemble))
        self._validate()

    def _validate(self):
        def need(cond, path, msg):
            if not cond:
                raise ConfigError(f"{path}: {msg}")

        need(self.n_qubits >= 2, "n_qubits", "must be >= 2")
        need(self.coupling_scale > 0, "coupling_scale", "must be positive")
        for name in ("h_values", "delta_t_values", "epsilons", "shots", "correlation_orders", "input_qubits_test"):
            need(len(getattr(self, name)) >= 1, name, "must not be empty")
        need(all(t >= 0 for t in self.delta_t_values), "delta_t_values", "must be >= 0")
        need(all(0 <= e <= 1 for e in self.epsilons), "epsilons", "must lie in [0, 1]")
        need(self.n_train >= 1, "n_train", "must be >= 1")
        need(self.n_test >= 1, "n_test", "must be >= 1")
        need(self.realizations >= 1, "realizations", "must be >= 1")
        need(self.ridge >= 0, "ridge", "must be >= 0")
        need(0 <= self.master_seed < 2**64, "master_seed", "must be a 64-bit unsigned integer")
        for name, ns in (("input_qubits_train", (self.input_qubits_train,)), ("input_qubits_test", self.input_qubits_test)):
            for n in ns:
                need(n >= 2, name, f"input register of {n} qubits; need >= 2")
                need(n < self.n_qubits, name, f"{n} input qubits leave no reservoir qubits out of {self.n_qubits}")
        need(0 <= self.calibration_index < self.n_test, "calibration_index", "must index a test element")
        self.sweep_axis
        if not self.allow_underdetermined:
            f = max(self.feature_spec(c).count(self.n_qubits) for c in self.correlation_orders)
            need(self.n_train >= f, "n_train", f"{self.n_train} training states for {f} features is under-determined")

    def feature_spec(self, order: CorrelationOrder) -> FeatureSpec:
        return FeatureSpec(self.include_bias, order)

    @property
    def families(self) -> list[tuple[float, ShotPlan, CorrelationOrder]]:
        return list(itertools.product(self.epsilons, self.shots, self.correlation_orders))

    @property
    def family_labels(self) -> list[str]:
        return [f"eps={e!r};shots={s.label};features={c.value}" for e, s, c in self.families]

    @property
    def sweep_axis(self) -> str:
        if len(self.h_values) > 1 and len(self.delta_t_values) > 1:
            raise ConfigError("h_values/delta_t_values: only one axis may be swept")
        return "delta_t" if len(self.delta_t_values) > 1 else "h"

    @property
    def axis_values(self) -> tuple[float, ...]:
        return self.delta_t_values if self.sweep_axis == "delta_t" else self.h_values

    @property
    def axis_points(self) -> list[tuple[float, float]]:
        """``(h, delta_t)`` for every axis point."""
        return [(h, t) for h in self.h_values for t in self.delta_t_values]


@dataclass
class RealizationResult:
    couplings: np.ndarray
    train_mse: float
    test_mse: float
    predictions: np.ndarray
    targets: np.ndarray


@dataclass
class SweepResult:
    axis_name: str
    axis_values: tuple[float, ...]
    family_labels: list[str]
    mean_test_mse: np.ndarray  # (axis, family)
    stderr_test_mse: np.ndarray
    test_mse: np.ndarray  # (realization, axis, family)
    train_mse: np.ndarray
    records: list[dict] | None = field(default=None, repr=False)

    def paired_gap(self, a: tuple[int, int], b: tuple[int, int]) -> tuple[float, float]:
        """Mean and standard error of ``MSE[b] - MSE[a]`` over paired realizations."""
        d = self.test_mse[:, b[0], b[1]] - self.test_mse[:, a[0], a[1]]
        return float(d.mean()), standard_error(d)


@dataclass
class GeneralizationResult:
    test_qubits: int
    raw: np.ndarray  # (realization, n_test)
    dressed: np.ndarray
    targets: np.ndarray
    train_mse: np.ndarray  # (realization,)

    @property
    def raw_mse(self) -> np.ndarray:
        return np.mean((self.raw - self.targets) ** 2, axis=1)

    @property
    def dressed_mse(self) -> np.ndarray:
        return np.mean((self.dressed - self.targets) ** 2, axis=1)

    @property
    def pearson(self) -> np.ndarray:
        return np.array([np.corrcoef(r, t)[0, 1] for r, t in zip(self.raw, self.targets)])


def standard_error(x: np.ndarray, axis: int = 0) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    if n < 2:
        out = np.zeros_like(np.take(x, 0, axis=axis))
    else:
        out = np.std(x, axis=axis, ddof=1) / np.sqrt(n)
    return float(out) if np.ndim(out) == 0 else out


def draw_input(
    rng: np.random.Generator,
    input_qubits: int,
    reservoir_qubits: int,
    reservoir_ensemble: Ensemble = Ensemble.HILBERT_SCHMIDT,
    noise_ensemble: Ensemble = Ensemble.HILBERT_SCHMIDT,
) -> tuple[float, np.ndarray | None, np.ndarray]:
    """Draw ``(p, R, r)`` for one input in the fixed order target, reservoir, noise."""
    p = float(rng.uniform())
    res = random_density(1 << reservoir_qubits, rng, reservoir_ensemble) if reservoir_qubits else None
    noise = random_density(1 << input_qubits, rng, noise_ensemble)
    return p, res, noise


def generate_dataset(count: int, input_qubits: int, epsilon: float, rng: np.random.Generator,
                     noise_ensemble: Ensemble = Ensemble.HILBERT_SCHMIDT) -> list[tuple[np.ndarray, float]]:
    """``count`` noisy Werner inputs with i.i.d. uniform targets, drawn from one stream."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for _ in range(count):
        p, _, r = draw_input(rng, input_qubits, 0, noise_ensemble=noise_ensemble)
        out.append((apply_input_noise(make_werner(p, input_qubits), epsilon, r), p))
    return out


@dataclass
class _Phase:
    """Composite initial states of one phase, split into clean and noise parts."""

    targets: np.ndarray
    clean: np.ndarray  # (K, d, d): werner ⊗ R
    noise: np.ndarray  # (K, d, d): r ⊗ R


def _build_phase(config: ExperimentConfig, r: int, phase: int, count: int, input_qubits: int) -> _Phase:
    n_res = config.n_qubits - input_qubits
    fixed = None
    if config.fixed_reservoir_state:
        fixed = random_density(1 << n_res, derive_substream(config.master_seed, (r, FIXED_RESERVOIR, n_res)),
                               config.reservoir_ensemble)
    targets, clean, noise = [], [], []
    for k in range(count):
        rng = derive_substream(config.master_seed, (r, phase, k))
        p, res, rk = draw_input(rng, input_qubits, n_res, config.reservoir_ensemble, config.noise_ensemble)
        if fixed is not None:
            res = fixed
        targets.append(p)
        clean.append(compose_initial(make_werner(p, input_qubits), res, config.n_qubits))
        noise.append(compose_initial(rk, res, config.n_qubits))
    return _Phase(np.array(targets), np.stack(clean), np.stack(noise))


def _phase_features(config: ExperimentConfig, r: int, phase_id: int, phase: _Phase, u: np.ndarray):
    """Yield ``(family_index, X)`` design matrices of one phase under propagator ``u``."""
    pop_clean = evolved_populations(phase.clean, u)
    pop_noise = evolved_populations(phase.noise, u)
    # evolution is linear, so the noisy mixture can be formed after evolving
    for fi, (eps, shots, order) in enumerate(config.families):
        pops = pop_clean if eps == 0.0 else (1.0 - eps) * pop_clean + eps * pop_noise
        if not shots.exact:
            freq = np.empty_like(pops)
            for k, pk in enumerate(pops):
                rng = derive_substream(config.master_seed, (r, SHOTS, phase_id, k))
                freq[k] = sample_counts(pk, shots.n_measurements, rng) / shots.n_measurements
            pops = freq
        yield fi, features_from_distribution(pops, config.feature_spec(order))


def _evaluate(config: ExperimentConfig, r: int, test_qubits: int) -> dict[tuple[int, int], RealizationResult]:
    """All axis points and families of realization ``r`` for one test input size."""
    couplings = draw_couplings(config.n_qubits, config.coupling_scale,
                               derive_substream(config.master_seed, (r, COUPLINGS)))
    train = _build_phase(config, r, TRAIN, config.n_train, config.input_qubits_train)
    test = _build_phase(config, r, TEST, config.n_test, test_qubits)
    out = {}
    for ai, (h, dt) in enumerate(config.axis_points):
        u = build_reservoir(couplings, h).propagator(dt)
        x_test = dict(_phase_features(config, r, TEST, test, u))
        for fi, x_train in _phase_features(config, r, TRAIN, train, u):
            w = fit_readout(x_train, train.targets, ridge=config.ridge)
            pred = predict(w, x_test[fi])
            out[ai, fi] = RealizationResult(
                couplings=couplings,
                train_mse=mean_squared_error(predict(w, x_train), train.targets),
                test_mse=mean_squared_error(pred, test.targets),
                predictions=np.asarray(pred),
                targets=test.targets,
            )
    return out


def run_realization(config: ExperimentConfig, realization_index: int) -> RealizationResult:
    """Train and test one reservoir realization of a single-point, single-family config."""
    if len(config.axis_points) != 1 or len(config.families) != 1 or len(config.input_qubits_test) != 1:
        raise ConfigError("run_realization needs exactly one axis point, family and test size")
    return _evaluate(config, realization_index, config.input_qubits_test[0])[0, 0]


def _sweep_task(args):
    config, r = args
    return _evaluate(config, r, config.input_qubits_test[0])


def _map(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def run_sweep(config: ExperimentConfig, workers: int = 1, keep_records: bool = False) -> SweepResult:
    """Average test MSE over realizations for every axis point and family.

    ``workers > 1`` spreads realizations over processes; results are merged
    by index and are bit-identical to the serial run.
    """
    axis = config.sweep_axis
    if config.input_qubits_test != (config.input_qubits_train,):
        raise ConfigError("input_qubits_test: sweeps test on the training input size")
    grids = _map(_sweep_task, [(config, r) for r in range(config.realizations)], workers)
    n_ax, n_fam = len(config.axis_points), len(config.families)
    test = np.empty((config.realizations, n_ax, n_fam))
    train = np.empty_like(test)
    for r, grid in enumerate(grids):
        for (ai, fi), res in grid.items():
            test[r, ai, fi] = res.test_mse
            train[r, ai, fi] = res.train_mse
    records = None
    if keep_records:
        records = [
            {"realization": r, "axis_index": ai, "family": config.family_labels[fi], "result": res}
            for r, grid in enumerate(grids) for (ai, fi), res in sorted(grid.items())
        ]
    return SweepResult(
        axis_name=axis,
        axis_values=config.axis_values,
        family_labels=config.family_labels,
        mean_test_mse=test.mean(axis=0),
        stderr_test_mse=standard_error(test, axis=0),
        test_mse=test,
        train_mse=train,
        records=records,
    )


def _generalization_task(args):
    config, r, n = args
    return _evaluate(config, r, n)[0, 0]


def run_generalization(config: ExperimentConfig, workers: int = 1) -> list[GeneralizationResult]:
    """Train on ``input_qubits_train`` Werner states, test on each size in ``input_qubits_test``.

    Raw predictions are rescaled with the test element at
    ``config.calibration_index`` as the single known point.
    """
    if len(config.axis_points) != 1 or len(config.families) != 1:
        raise ConfigError("run_generalization needs one (h, delta_t) point and one family")
    for n in config.input_qubits_test:
        if n < config.input_qubits_train:
            raise ConfigError(f"input_qubits_test: {n} is smaller than the training input size")
    tasks = [(config, r, n) for n in config.input_qubits_test for r in range(config.realizations)]
    results = _map(_generalization_task, tasks, workers)
    out = []
    for i, n in enumerate(config.input_qubits_test):
        chunk = results[i * config.realizations:(i + 1) * config.realizations]
        raw = np.stack([c.predictions for c in chunk])
        targets = np.stack([c.targets for c in chunk])
        ci = config.calibration_index
        dressed = np.stack([
            dress_predictions(rw, CalibrationPoint(float(rw[ci]), float(t[ci]))) for rw, t in zip(raw, targets)
        ])
        out.append(GeneralizationResult(n, raw, dressed, targets, np.array([c.train_mse for c in chunk])))
    return out


def single_point(config: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy of ``config`` with the given fields replaced."""
    return replace(config, **changes)
