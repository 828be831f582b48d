"""
Observation attacks and the heat-subsystem bad-data detector.

The indoor temperature delay scaling attack (ITDSA) falsifies the reported
indoor temperature as ``(1 + λ(1 − exp(−a(t − t0)))) · T_in`` inside the
attack window. The heat load reported alongside it is recomputed from the
falsified temperature through the building model, so the pair stays
consistent with the detector's measurement model and its residual carries
only the sensor noise.

The detector estimates the indoor temperature by weighted least squares
from two meters (a temperature sensor and a heat meter) and flags a
measurement when the normalized residual norm exceeds ``tau_thresh``.

Adversaries only ever touch the observation handed to the policy; they own
their random generator and never read or advance the environment's.
"""
import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .devices import BuildingParams, HOURS_PER_DAY, _check_hour
from .exceptions import DimensionMismatchError
from .fields import FloatField, IntField, ListField
from .logging import logger
from .nn.mlp import backward, forward
from .nn.policy import mean_head
from .params import ParamSet

HEAT_OBS_INDEX = 7
ATTACK_MODES = ('none', 'itdsa', 'linf_worst')


class ItdsaSpec(ParamSet):
    """ITDSA parameters. ``window`` left unset means every hour from ``t0`` on."""
    lam = FloatField(min_value=-1.0, min_exclusive=True, default=0.2, help="scaling amplitude")
    delay_rate = FloatField(min_value=0, min_exclusive=True, default=0.3, help="1/h")
    t0 = IntField(min_value=0, max_value=HOURS_PER_DAY - 1, default=0)
    window = ListField(IntField(min_value=0, max_value=HOURS_PER_DAY - 1), min_length=1, default=None)

    def clean(self) -> None:
        if self.window is not None and min(self.window) != self.t0:
            raise ValueError(f"t0 must equal min(window), got t0={self.t0}, min={min(self.window)}")

    @property
    def hours(self) -> frozenset:
        if self.window is None:
            return frozenset(range(self.t0, HOURS_PER_DAY))
        return frozenset(self.window)

    def multiplier(self, hour: int) -> float:
        if hour not in self.hours:
            return 1.0
        return 1.0 + self.lam * (1.0 - math.exp(-self.delay_rate * (hour - self.t0)))


class DetectorSpec(ParamSet):
    """Residual-test detector. The residual is measured in noise standard deviations."""
    tau_thresh = FloatField(min_value=0, min_exclusive=True, default=2.576)
    noise_sigma = FloatField(min_value=0, min_exclusive=True, default=0.1, help="temperature sensor, C")
    heat_noise_sigma = FloatField(min_value=0, min_exclusive=True, default=2.0, help="heat meter, kW")
    percentile = FloatField(min_value=0, max_value=100, min_exclusive=True, default=99.0)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([self.noise_sigma, self.heat_noise_sigma])


class AdversaryBudget(ParamSet):
    """ℓ∞ budget on the normalized observation and the components it may touch."""
    epsilon = FloatField(min_value=0, default=1.0)
    mask = ListField(IntField(min_value=0), min_length=1, default=(HEAT_OBS_INDEX,))
    pgd_steps = IntField(min_value=1, default=10)


def itdsa_temperature(t_in: float, hour: int, spec: ItdsaSpec) -> float:
    """Falsified indoor temperature reported at ``hour``."""
    return spec.multiplier(_check_hour(hour)) * t_in


# ---------------------------------------------------------------------------
# Detector
# ---------------------------------------------------------------------------

class MeasurementModel(NamedTuple):
    """Heat meter reading ``H = offset + slope * T_in`` for the current step."""
    offset: float
    slope: float

    def predict(self, t_in: float) -> np.ndarray:
        return np.array([t_in, self.offset + self.slope * t_in])


def measurement_model(t_in_prev: float, t_out: float, b: BuildingParams) -> MeasurementModel:
    """Linearize the building heat balance in the current indoor temperature."""
    s = b.heat_slope
    return MeasurementModel(s * (b.inertia_ratio * (t_in_prev - t_out) - t_out), s)


class DetectionResult(NamedTuple):
    estimate: float
    residual: float
    flagged: bool


def residual_check(measured: Sequence[float], predicted: Sequence[float], d: DetectorSpec) -> Tuple[float, bool]:
    """``(‖measured − predicted‖₂, residual > τ)``.

    Raises:
        DimensionMismatchError: If the vectors differ in length
    """
    measured = np.asarray(measured, dtype=np.float64).reshape(-1)
    predicted = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if measured.shape != predicted.shape:
        raise DimensionMismatchError(f"measured {measured.shape} vs predicted {predicted.shape}")
    residual = float(np.linalg.norm(measured - predicted))
    return residual, residual > d.tau_thresh


def estimate_indoor_temperature(z: Sequence[float], model: MeasurementModel, d: DetectorSpec) -> float:
    """Weighted least-squares estimate of ``T_in`` from ``z = (T_meas, H_meas)``."""
    w_t, w_h = 1.0 / d.noise_sigma ** 2, 1.0 / d.heat_noise_sigma ** 2
    return (w_t * z[0] + w_h * model.slope * (z[1] - model.offset)) / (w_t + w_h * model.slope ** 2)


def detect(z: Sequence[float], model: MeasurementModel, d: DetectorSpec) -> DetectionResult:
    """State estimation followed by the normalized residual test."""
    z = np.asarray(z, dtype=np.float64)
    estimate = estimate_indoor_temperature(z, model, d)
    residual, flagged = residual_check(z / d.sigmas, model.predict(estimate) / d.sigmas, d)
    return DetectionResult(estimate, residual, flagged)


def noisy_measurement(t_in: float, model: MeasurementModel, d: DetectorSpec,
                      rng: np.random.Generator) -> np.ndarray:
    """Honest meter readings with Gaussian sensor noise."""
    return model.predict(t_in) + rng.normal(0.0, 1.0, size=2) * d.sigmas


def itdsa_measurement(t_in: float, hour: int, spec: ItdsaSpec, model: MeasurementModel, d: DetectorSpec,
                      rng: np.random.Generator) -> np.ndarray:
    """Meter readings after the attacker rewrites temperature and the matching heat load."""
    return noisy_measurement(itdsa_temperature(t_in, hour, spec), model, d, rng)


def calibrate_threshold(residuals: Sequence[float], d: DetectorSpec) -> DetectorSpec:
    """Return ``d`` with ``tau_thresh`` at the configured percentile of no-attack residuals."""
    residuals = np.asarray(residuals, dtype=np.float64)
    if residuals.size == 0:
        raise ValueError("need at least one residual to calibrate the detector")
    tau = float(np.percentile(residuals, d.percentile))
    logger.info(f"Detector threshold calibrated to {tau:.4f} from {residuals.size} residuals")
    return d.replace(tau_thresh=max(tau, np.finfo(float).tiny))


# ---------------------------------------------------------------------------
# Observation adversaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttackContext:
    """What an adversary may look at when perturbing one observation.

    ``state`` is the true environment state and ``scaler`` the observation
    normalizer.
    """
    state: Any
    scaler: Any
    itdsa: ItdsaSpec
    building: BuildingParams
    policy: Any = None
    rng: Optional[np.random.Generator] = None


def _check_mask(obs: np.ndarray, budget: AdversaryBudget) -> np.ndarray:
    mask = np.asarray(budget.mask, dtype=int)
    if mask.size and (mask.min() < 0 or mask.max() >= obs.shape[-1]):
        raise DimensionMismatchError(f"adversary mask {tuple(mask)} outside observation of width {obs.shape[-1]}")
    return mask


def falsified_heat_load(ctx: AttackContext) -> float:
    """Heat-load reading implied by the falsified indoor temperature."""
    state = ctx.state
    t_true = state.t_in_prev
    t_fake = itdsa_temperature(t_true, state.hour, ctx.itdsa)
    return state.basic_h + ctx.building.heat_slope * (t_fake - t_true)


def _worst_case(obs: np.ndarray, mask: np.ndarray, eps: float, steps: int, ctx: AttackContext) -> np.ndarray:
    if ctx.policy is None:
        raise ValueError("linf_worst needs the policy in the attack context")
    rng = ctx.rng if ctx.rng is not None else np.random.default_rng(0)
    head = mean_head(ctx.policy)
    mu_clean, _ = forward(head, obs)
    lo = np.clip(obs[mask] - eps, -1.0, 1.0)
    hi = np.clip(obs[mask] + eps, -1.0, 1.0)
    x = obs.copy()
    x[mask] = rng.uniform(lo, hi)
    step = eps / 4.0
    for _ in range(steps):
        mu, cache = forward(head, x)
        grad = backward(head, cache, 2.0 * (mu - mu_clean)).dx
        x[mask] = np.clip(x[mask] + step * np.sign(grad[mask]), lo, hi)
    return x


def perturb_observation(obs: np.ndarray, b: AdversaryBudget, mode: str, ctx: Optional[AttackContext]) -> np.ndarray:
    """Return the observation the policy sees under ``mode``.

    ``none`` is the identity. ``itdsa`` replaces the heat-load component by
    the value implied by the falsified temperature, limited to the budget.
    ``linf_worst`` runs projected sign-gradient ascent on the policy-mean
    deviation inside the masked box. The result is clipped to [-1, 1].

    Raises:
        DimensionMismatchError: If a mask index is outside the observation
        ValueError: On an unknown mode
    """
    obs = np.asarray(obs, dtype=np.float64)
    if mode not in ATTACK_MODES:
        raise ValueError(f"unknown attack mode {mode!r}; expected one of {ATTACK_MODES}")
    mask = _check_mask(obs, b)
    if mode == 'none' or b.epsilon == 0.0:
        return obs.copy()

    if mode == 'itdsa':
        out = obs.copy()
        if HEAT_OBS_INDEX in set(mask.tolist()):
            target = ctx.scaler.normalize_component(HEAT_OBS_INDEX, falsified_heat_load(ctx))
            delta = np.clip(target - obs[HEAT_OBS_INDEX], -b.epsilon, b.epsilon)
            out[HEAT_OBS_INDEX] = obs[HEAT_OBS_INDEX] + delta
        return np.clip(out, -1.0, 1.0)

    return np.clip(_worst_case(obs, mask, b.epsilon, b.pgd_steps, ctx), -1.0, 1.0)


class Adversary:
    """Stateful wrapper that perturbs observations for the environment.

    Attributes:
        mode: One of ``none``, ``itdsa``, ``linf_worst``
        budget: Perturbation budget
        itdsa: ITDSA parameters
        building: Building used to recompute the heat load
        policy: Actor network, required by ``linf_worst``
    """

    def __init__(self, mode: str = 'itdsa', budget: Optional[AdversaryBudget] = None,
                 itdsa: Optional[ItdsaSpec] = None, building: Optional[BuildingParams] = None,
                 policy: Any = None, seed: Optional[int] = None) -> None:
        if mode not in ATTACK_MODES:
            raise ValueError(f"unknown attack mode {mode!r}; expected one of {ATTACK_MODES}")
        self.mode = mode
        self.budget = budget or AdversaryBudget()
        self.itdsa = itdsa or ItdsaSpec()
        self.building = building or BuildingParams()
        self.policy = policy
        self.rng = np.random.default_rng(seed)

    def perturb(self, obs: np.ndarray, state: Any, scaler: Any) -> np.ndarray:
        ctx = AttackContext(state, scaler, self.itdsa, self.building, self.policy, self.rng)
        return perturb_observation(obs, self.budget, self.mode, ctx)

    def __repr__(self) -> str:
        return f"Adversary(mode={self.mode!r}, epsilon={self.budget.epsilon})"


__all__ = [
    'ItdsaSpec', 'DetectorSpec', 'AdversaryBudget', 'AttackContext', 'Adversary', 'MeasurementModel',
    'DetectionResult', 'ATTACK_MODES', 'HEAT_OBS_INDEX',
    'itdsa_temperature', 'residual_check', 'measurement_model', 'estimate_indoor_temperature', 'detect',
    'noisy_measurement', 'itdsa_measurement', 'calibrate_threshold', 'falsified_heat_load',
    'perturb_observation',
]
