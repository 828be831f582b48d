"""
Run configuration.

A run config is a YAML file whose top-level keys are the fields of
:class:`RunConfig`; nested sections (``system``, ``trainer``, ``attack``,
``evaluation``) override the defaults of their parameter sets. Unknown keys
are rejected. ``IESGUARD_OUTPUT_ROOT`` overrides ``output_dir``.
"""
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from ..attack import ATTACK_MODES, AdversaryBudget
from ..environment.state import SCENARIOS, DayProfile, SystemParams
from ..exceptions import ValidationError
from ..fields import EmbeddedField, IntField, ListField, StringField
from ..logging import logger
from ..params import ParamSet
from ..sac.trainer import TrainerConfig
from .profiles import generate_profiles, load_profiles

OUTPUT_ROOT_ENV = 'IESGUARD_OUTPUT_ROOT'

# mode -> (algorithm, attacked)
MODES = {
    1: ('sac', False),
    2: ('sac', True),
    3: ('sa-sac', False),
    4: ('sa-sac', True),
}


class AttackConfig(ParamSet):
    """Adversary used for the attacked modes."""
    mode = StringField(default='itdsa', choices=[m for m in ATTACK_MODES if m != 'none'])
    budget = EmbeddedField(AdversaryBudget)
    seed = IntField(default=0)


class EvaluationConfig(ParamSet):
    """Evaluation lengths; ``clean_episodes`` then ``attacked_episodes`` form the robustness series."""
    episodes = IntField(min_value=1, default=7)
    clean_episodes = IntField(min_value=0, default=50)
    attacked_episodes = IntField(min_value=0, default=50)


class RunConfig(ParamSet):
    """Everything one CLI invocation needs.

    ``profiles`` left unset means a synthetic set of ``synthetic_days`` days
    generated from ``profile_seed``.
    """
    profiles = StringField(default=None)
    synthetic_days = IntField(min_value=1, default=7)
    profile_seed = IntField(default=0)
    output_dir = StringField(default='runs')
    checkpoint_dir = StringField(default=None)
    seeds = ListField(IntField(), min_length=1, default=(0,))
    mode = ListField(IntField(min_value=1, max_value=4), min_length=1, default=(1, 2, 3, 4))
    scenario = ListField(IntField(min_value=1, max_value=4), min_length=1, default=(1, 2, 3, 4))
    workers = IntField(min_value=1, default=1)
    system = EmbeddedField(SystemParams)
    trainer = EmbeddedField(TrainerConfig)
    attack = EmbeddedField(AttackConfig)
    evaluation = EmbeddedField(EvaluationConfig)

    def clean(self) -> None:
        if self.profiles is not None and not Path(self.profiles).is_file():
            raise ValueError(f"profile file {self.profiles} does not exist")
        for k in self.scenario:
            if k not in SCENARIOS:
                raise ValueError(f"unknown scenario {k}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"seeds must be distinct, got {list(self.seeds)}")

    @property
    def output_path(self) -> Path:
        return Path(os.environ.get(OUTPUT_ROOT_ENV) or self.output_dir)

    @property
    def checkpoint_path(self) -> Path:
        if self.checkpoint_dir is not None:
            return Path(self.checkpoint_dir)
        return self.output_path / 'checkpoints'

    def load_profiles(self) -> List[DayProfile]:
        if self.profiles is None:
            return generate_profiles(self.synthetic_days, self.profile_seed, self.system.building)
        return load_profiles(self.profiles)

    def system_for(self, scenario: int) -> SystemParams:
        return self.system.for_scenario(scenario)


def _coerce_sequences(data: Dict[str, Any]) -> Dict[str, Any]:
    # A bare integer is accepted where a list of modes, scenarios or seeds is expected.
    out = dict(data)
    for key in ('seeds', 'mode', 'scenario'):
        if isinstance(out.get(key), int):
            out[key] = [out[key]]
    return out


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """Read a YAML run config (or start from defaults) and apply CLI overrides.

    Raises:
        ValidationError: If the file is unreadable, not a mapping or contains invalid values
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with path.open('r', encoding='utf-8') as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ValidationError(f"cannot read run config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ValidationError(f"run config {path} is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError(f"run config {path} must be a mapping at the top level")
        logger.debug(f"Loaded run config from {path}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(_coerce_sequences(data))


def dump_run_config(cfg: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)
    return path


__all__ = [
    'OUTPUT_ROOT_ENV', 'MODES', 'AttackConfig', 'EvaluationConfig', 'RunConfig', 'load_run_config',
    'dump_run_config',
]
