"""Command line entry point: ``iesguard gen-profiles | train | evaluate | matrix``."""
from functools import wraps
from pathlib import Path
from typing import Optional, Tuple

import click

from ..exceptions import IesGuardError
from ..logging import logger
from ..nn.checkpoint import load_checkpoint
from ..sac.trainer import ALGORITHMS, evaluate as evaluate_policy
from .config import MODES, RunConfig, load_run_config
from .matrix import env_for, make_adversary, run_matrix, train_checkpoint
from .profiles import STRESS_KINDS, apply_stress, generate_profiles, write_profiles
from .report import Report, emit


def _guarded(fn):
    """Turn package errors into click errors (exit code 1)."""
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except IesGuardError as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper


def _config(config: Optional[str], out: Optional[str], **overrides) -> RunConfig:
    if out is not None:
        overrides['output_dir'] = out
    return load_run_config(config, **overrides)


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Log at DEBUG level.')
@click.option('--log-file', type=click.Path(dir_okay=False), default=None, help='Also write the log to FILE.')
def main(verbose: bool, log_file: Optional[str]):
    """Integrated energy system scheduling with robust soft actor-critic."""
    logger.configure(verbose=verbose, log_file=log_file)


@main.command('gen-profiles')
@click.option('--days', type=click.IntRange(min=1), default=7, show_default=True, help='Number of days.')
@click.option('--seed', type=int, default=0, show_default=True, help='Generator seed.')
@click.option('--out', type=click.Path(file_okay=False), default='.', show_default=True,
              help='Directory for profiles.csv.')
@_guarded
def gen_profiles(days: int, seed: int, out: str):
    """Write a synthetic profile set."""
    path = write_profiles(generate_profiles(days, seed), Path(out) / 'profiles.csv')
    click.echo(str(path))


@main.command()
@click.option('--config', 'config', type=click.Path(exists=True, dir_okay=False), default=None,
              help='YAML run config.')
@click.option('--seed', type=int, default=None, help='Train this seed only (default: every configured seed).')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory.')
@click.option('--algorithm', type=click.Choice(ALGORITHMS), default='sa-sac', show_default=True)
@click.option('--scenario', type=click.IntRange(1, 4), default=1, show_default=True)
@_guarded
def train(config: Optional[str], seed: Optional[int], out: Optional[str], algorithm: str, scenario: int):
    """Train policies and write their checkpoints and learning curves."""
    cfg = _config(config, out, seeds=[seed] if seed is not None else None)
    profiles = cfg.load_profiles()
    for s in cfg.seeds:
        path = train_checkpoint(cfg, profiles, algorithm, scenario, s)
        click.echo(str(path))


@main.command()
@click.option('--config', 'config', type=click.Path(exists=True, dir_okay=False), default=None,
              help='YAML run config.')
@click.option('--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--seed', type=int, default=0, show_default=True, help='Evaluation seed.')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory.')
@click.option('--attack', type=click.Choice(['on', 'off']), default='off', show_default=True)
@click.option('--scenario', type=click.IntRange(1, 4), default=1, show_default=True)
@click.option('--stress', type=click.Choice(STRESS_KINDS), default=None, help='Evaluate a stressed variant of every day.')
@_guarded
def evaluate(config: Optional[str], checkpoint: str, seed: int, out: Optional[str], attack: str,
             scenario: int, stress: Optional[str]):
    """Evaluate one checkpoint and write a single-run report."""
    cfg = _config(config, out)
    profiles = cfg.load_profiles()
    if stress is not None:
        profiles = [apply_stress(p, stress) for p in profiles]
    ckpt = load_checkpoint(checkpoint)
    attacked = attack == 'on'
    env = env_for(cfg, profiles, scenario, ckpt)
    adversary = make_adversary(cfg, scenario, seed, ckpt.policy) if attacked else None
    result = evaluate_policy(ckpt.policy, env, cfg.evaluation.episodes, adversary, seed=seed)

    algorithm = str(ckpt.meta.get('algorithm', 'sa-sac'))
    mode = {v: k for k, v in MODES.items()}[(algorithm, attacked)]
    row = {'mode': mode, 'scenario': scenario, 'seed': seed, 'algorithm': algorithm, 'attacked': attacked,
           'episodes': cfg.evaluation.episodes, **result.summary}
    meta = {**cfg.to_dict(), 'checkpoint': str(checkpoint), 'stress': stress}
    traces = [{'mode': mode, 'scenario': scenario, 'seed': seed, **t} for t in result.traces.to_dicts()]
    report = Report(rows=[row], traces=traces, meta=meta)
    for path in emit(report, cfg.output_path):
        click.echo(str(path))


@main.command()
@click.option('--config', 'config', type=click.Path(exists=True, dir_okay=False), default=None,
              help='YAML run config.')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory.')
@click.option('--mode', 'modes', type=click.IntRange(1, 4), multiple=True, help='Restrict to these modes.')
@click.option('--scenario', 'scenarios', type=click.IntRange(1, 4), multiple=True,
              help='Restrict to these scenarios.')
@click.option('--train-missing', is_flag=True, help='Train checkpoints that do not exist yet.')
@_guarded
def matrix(config: Optional[str], out: Optional[str], modes: Tuple[int, ...], scenarios: Tuple[int, ...],
           train_missing: bool):
    """Run the mode x scenario x seed matrix and write the report."""
    cfg = _config(config, out, mode=list(modes) or None, scenario=list(scenarios) or None)
    report = run_matrix(cfg, train_missing=train_missing)
    for path in emit(report, cfg.output_path):
        click.echo(str(path))


if __name__ == '__main__':
    main()
