"""
Mode × scenario × seed experiment matrix.

Modes pick the algorithm and whether the adversary is on (see
:data:`iesguard.harness.config.MODES`); scenarios toggle the heat storage
and the demand response. Cells are independent and run in a process pool
when ``workers > 1``; the report is assembled in cell order so the output
does not depend on scheduling.
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..attack import Adversary
from ..environment.core import ObservationScaler
from ..environment.gym_env import IesEnv
from ..environment.state import DayProfile
from ..exceptions import MissingCheckpointError
from ..logging import logger
from ..nn.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from ..sac.trainer import EvaluationResult, evaluate, train
from ..signals import SIGNAL_SUPPORT, matrix_cell_completed
from .config import MODES, RunConfig
from .report import Report, write_frame

log = logger.child('matrix')


def checkpoint_name(algorithm: str, scenario: int, seed: int) -> str:
    return f"{algorithm}_scenario{scenario}_s{seed}.cbor"


def curves_name(algorithm: str, scenario: int, seed: int) -> str:
    return f"curves_{algorithm}_scenario{scenario}_s{seed}.csv"


def make_adversary(cfg: RunConfig, scenario: int, seed: int, policy: Any) -> Adversary:
    params = cfg.system_for(scenario)
    return Adversary(mode=cfg.attack.mode, budget=cfg.attack.budget, itdsa=params.itdsa,
                     building=params.building, policy=policy, seed=cfg.attack.seed + seed)


def env_for(cfg: RunConfig, profiles: Sequence[DayProfile], scenario: int,
            checkpoint: Optional[Checkpoint] = None) -> IesEnv:
    """Environment for ``scenario``; normalization comes from the checkpoint when one is given."""
    scaler = None
    if checkpoint is not None:
        scaler = ObservationScaler(checkpoint.obs_low, checkpoint.obs_high)
    return IesEnv(profiles, cfg.system_for(scenario), scaler=scaler)


def train_checkpoint(cfg: RunConfig, profiles: Sequence[DayProfile], algorithm: str, scenario: int,
                     seed: int) -> Path:
    """Train one policy and write its checkpoint and learning curves."""
    trainer_cfg = cfg.trainer.replace(algorithm=algorithm)
    result = train(lambda: env_for(cfg, profiles, scenario), trainer_cfg, seed)
    ckpt = Checkpoint(result.checkpoint.policy, result.checkpoint.obs_low, result.checkpoint.obs_high,
                      {**result.checkpoint.meta, 'scenario': scenario})
    path = save_checkpoint(cfg.checkpoint_path / checkpoint_name(algorithm, scenario, seed), ckpt)
    write_frame(result.curves, _ensure_dir(cfg.output_path) / curves_name(algorithm, scenario, seed))
    return path


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _checkpoint_for(cfg: RunConfig, algorithm: str, scenario: int, seed: int) -> Checkpoint:
    path = cfg.checkpoint_path / checkpoint_name(algorithm, scenario, seed)
    if not path.is_file():
        raise MissingCheckpointError(
            f"no {algorithm} checkpoint for scenario {scenario}, seed {seed} (expected {path}); "
            f"train it first or pass --train-missing"
        )
    return load_checkpoint(path)


def run_cell(cfg: RunConfig, profiles: Sequence[DayProfile], mode: int, scenario: int,
             seed: int) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    """Evaluate one (mode, scenario, seed) cell; returns its report row and dispatch traces."""
    algorithm, attacked = MODES[mode]
    ckpt = _checkpoint_for(cfg, algorithm, scenario, seed)
    env = env_for(cfg, profiles, scenario, ckpt)
    adversary = make_adversary(cfg, scenario, seed, ckpt.policy) if attacked else None
    label = f"mode{mode}_scenario{scenario}_s{seed}"
    result: EvaluationResult = evaluate(ckpt.policy, env, cfg.evaluation.episodes, adversary, seed=seed,
                                        label=label)
    s = result.summary
    row = {
        'mode': mode, 'scenario': scenario, 'seed': seed, 'algorithm': algorithm, 'attacked': attacked,
        'episodes': cfg.evaluation.episodes,
        **{k: s[k] for k in ('profit', 'revenue', 'cost', 'reward_mean', 'reward_std', 'c1', 'c2',
                             'violations', 'elec_cost', 'gas_cost')},
    }
    traces = [{'mode': mode, 'scenario': scenario, 'seed': seed, **t} for t in result.traces.to_dicts()]
    return row, traces


def robustness_series(cfg: RunConfig, profiles: Sequence[DayProfile], algorithm: str, scenario: int,
                      seed: int) -> List[Dict[str, Any]]:
    """Clean episodes followed by attacked episodes for one trained policy."""
    ckpt = _checkpoint_for(cfg, algorithm, scenario, seed)
    env = env_for(cfg, profiles, scenario, ckpt)
    ev = cfg.evaluation
    rows: List[Dict[str, Any]] = []
    phases = ((False, ev.clean_episodes), (True, ev.attacked_episodes))
    offset = 0
    for attacked, n in phases:
        if n == 0:
            continue
        adversary = make_adversary(cfg, scenario, seed, ckpt.policy) if attacked else None
        result = evaluate(ckpt.policy, env, n, adversary, seed=seed)
        for rec in result.episodes.to_dicts():
            rows.append({'algorithm': algorithm, 'scenario': scenario, 'seed': seed,
                         'episode': offset + rec['episode'], 'attacked': attacked,
                         'reward': rec['reward'], 'profit': rec['profit']})
        offset += n
    return rows


def _cell_task(args):
    return run_cell(*args)


def _series_task(args):
    return robustness_series(*args)


def _map(fn, tasks: List[tuple], workers: int) -> List[Any]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def run_matrix(cfg: RunConfig, train_missing: bool = False,
               profiles: Optional[Sequence[DayProfile]] = None) -> Report:
    """Evaluate every requested (mode, scenario, seed) cell.

    Raises:
        MissingCheckpointError: If a cell needs a checkpoint that does not exist
            and ``train_missing`` is off
    """
    profiles = list(profiles) if profiles is not None else cfg.load_profiles()
    modes, scenarios, seeds = sorted(cfg.mode), sorted(cfg.scenario), list(cfg.seeds)
    algorithms = sorted({MODES[m][0] for m in modes})

    if train_missing:
        for algorithm in algorithms:
            for scenario in scenarios:
                for seed in seeds:
                    if not (cfg.checkpoint_path / checkpoint_name(algorithm, scenario, seed)).is_file():
                        log.info(f"Training missing {algorithm} checkpoint for scenario {scenario}, seed {seed}")
                        train_checkpoint(cfg, profiles, algorithm, scenario, seed)

    cells = [(cfg, profiles, m, k, s) for m in modes for k in scenarios for s in seeds]
    log.info(f"Running {len(cells)} matrix cells with {cfg.workers} worker(s)")
    results = _map(_cell_task, cells, cfg.workers)

    report = Report(meta=cfg.to_dict())
    for (_, _, m, k, s), (row, traces) in zip(cells, results):
        report.rows.append(row)
        report.traces.extend(traces)
        log.info(f"mode {m} scenario {k} seed {s}: profit {row['profit']:.2f}")
        if SIGNAL_SUPPORT:
            matrix_cell_completed.send(run_matrix, row=row)

    ev = cfg.evaluation
    if ev.clean_episodes + ev.attacked_episodes > 0:
        series_tasks = [(cfg, profiles, a, k, s) for a in algorithms for k in scenarios for s in seeds]
        for rows in _map(_series_task, series_tasks, cfg.workers):
            report.series.extend(rows)
    return report


__all__ = [
    'checkpoint_name', 'curves_name', 'make_adversary', 'env_for', 'train_checkpoint', 'run_cell',
    'robustness_series', 'run_matrix',
]
