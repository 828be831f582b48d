"""
Model checkpoints as CBOR records.

A checkpoint stores the actor network (layer shapes plus little-endian
float64 byte strings), the observation normalization bounds it was trained
with and a free-form metadata mapping (algorithm, scenario, seed, trainer
settings). Round trips are bit-exact.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import cbor2
import numpy as np

from ..exceptions import CheckpointError, MissingCheckpointError
from ..logging import logger
from .mlp import MlpParams

FORMAT_NAME = 'iesguard-checkpoint'
FORMAT_VERSION = 1
_DTYPE = '<f8'


@dataclass(frozen=True)
class Checkpoint:
    policy: MlpParams
    obs_low: np.ndarray
    obs_high: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)


def _encode_array(a: np.ndarray) -> Dict[str, Any]:
    a = np.ascontiguousarray(a, dtype=_DTYPE)
    return {'shape': list(a.shape), 'data': a.tobytes()}


def _decode_array(record: Dict[str, Any]) -> np.ndarray:
    shape = tuple(int(s) for s in record['shape'])
    flat = np.frombuffer(record['data'], dtype=_DTYPE)
    if flat.size != int(np.prod(shape, dtype=np.int64)):
        raise CheckpointError(f"array payload of {flat.size} values does not fit shape {shape}")
    return flat.reshape(shape).astype(np.float64)


def encode_network(net: MlpParams) -> Dict[str, Any]:
    return {
        'version': net.version,
        'layers': [{'weights': _encode_array(w), 'biases': _encode_array(b)}
                   for w, b in zip(net.weights, net.biases)],
    }


def decode_network(record: Dict[str, Any]) -> MlpParams:
    layers = record['layers']
    return MlpParams(
        tuple(_decode_array(layer['weights']) for layer in layers),
        tuple(_decode_array(layer['biases']) for layer in layers),
        int(record.get('version', 0)),
    )


def dumps_checkpoint(ckpt: Checkpoint) -> bytes:
    payload = {
        'format': FORMAT_NAME,
        'format_version': FORMAT_VERSION,
        'policy': encode_network(ckpt.policy),
        'obs_low': _encode_array(ckpt.obs_low),
        'obs_high': _encode_array(ckpt.obs_high),
        'meta': ckpt.meta,
    }
    return cbor2.dumps(payload, canonical=True)


def loads_checkpoint(data: bytes) -> Checkpoint:
    """Decode checkpoint bytes.

    Raises:
        CheckpointError: If the payload is not a checkpoint of a known version
    """
    try:
        payload = cbor2.loads(data)
    except Exception as exc:
        raise CheckpointError(f"checkpoint is not valid CBOR: {exc}") from exc
    if not isinstance(payload, dict) or payload.get('format') != FORMAT_NAME:
        raise CheckpointError("not an iesguard checkpoint")
    if payload.get('format_version') != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('format_version')!r}")
    try:
        return Checkpoint(
            policy=decode_network(payload['policy']),
            obs_low=_decode_array(payload['obs_low']),
            obs_high=_decode_array(payload['obs_high']),
            meta=dict(payload.get('meta') or {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from exc


def save_checkpoint(path: Union[str, Path], ckpt: Checkpoint) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(dumps_checkpoint(ckpt))
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc
    logger.info(f"Checkpoint written: {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read a checkpoint file.

    Raises:
        MissingCheckpointError: If the file does not exist
        CheckpointError: If it cannot be decoded
    """
    path = Path(path)
    if not path.exists():
        raise MissingCheckpointError(f"checkpoint not found: {path}")
    return loads_checkpoint(path.read_bytes())


__all__ = [
    'Checkpoint', 'encode_network', 'decode_network', 'dumps_checkpoint', 'loads_checkpoint',
    'save_checkpoint', 'load_checkpoint', 'FORMAT_VERSION',
]
