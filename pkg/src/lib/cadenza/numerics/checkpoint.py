"""
Checkpoint file format.

Little-endian layout:

    magic        8 bytes  b"CDZCKPT\\0"
    version      u16
    header_len   u32
    header       UTF-8 JSON (sorted keys): kind, configs, step, metadata
    count        u32
    count records:
        name_len u16, name UTF-8
        ndim     u8, ndim x u32 dims
        data     float32, row-major

Model parameters are stored under their module names; Adam moments under
`optim/<param>/exp_avg` and `optim/<param>/exp_avg_sq`.
"""

import json
import logging
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import torch
import torch.nn as nn

from ..core.errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"CDZCKPT\0"
FORMAT_VERSION = 1
OPTIM_PREFIX = "optim/"


@dataclass
class Checkpoint:
    """
    Named float32 arrays plus the JSON header that produced them.

    Attributes:
        header: kind, configs, step and free-form metadata
        tensors: name -> float32 array
    """

    header: Dict[str, Any]
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.header.get("kind", "")

    @property
    def step(self) -> int:
        return int(self.header.get("step", 0))

    def to_bytes(self) -> bytes:
        """Serialize to the documented byte layout."""
        header = json.dumps(self.header, sort_keys=True).encode("utf-8")
        out = bytearray(MAGIC)
        out += struct.pack("<HI", FORMAT_VERSION, len(header))
        out += header
        out += struct.pack("<I", len(self.tensors))
        for name in sorted(self.tensors):
            array = np.ascontiguousarray(self.tensors[name], dtype="<f4")
            encoded = name.encode("utf-8")
            out += struct.pack("<H", len(encoded)) + encoded
            out += struct.pack("<B", array.ndim)
            out += struct.pack(f"<{array.ndim}I", *array.shape)
            out += array.tobytes()
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        """
        Parse checkpoint bytes.

        Raises:
            CheckpointError: On a bad magic, an unknown version, truncation or
                an undecodable header or parameter name
        """
        if data[:len(MAGIC)] != MAGIC:
            raise CheckpointError("not a Cadenza checkpoint (bad magic)")
        pos = len(MAGIC)

        def take(size: int) -> bytes:
            nonlocal pos
            if pos + size > len(data):
                raise CheckpointError(f"truncated checkpoint at byte {pos}")
            chunk = data[pos:pos + size]
            pos += size
            return chunk

        version, header_len = struct.unpack("<HI", take(6))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        try:
            header = json.loads(take(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"unreadable checkpoint header: {exc}") from None
        (count,) = struct.unpack("<I", take(4))
        tensors = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", take(2))
            name_offset = pos
            try:
                name = take(name_len).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CheckpointError(f"parameter name at byte {name_offset} is not UTF-8: {exc.reason}") from None
            (ndim,) = struct.unpack("<B", take(1))
            shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
            size = int(np.prod(shape, dtype=np.int64))
            tensors[name] = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape).copy()
        if pos != len(data):
            raise CheckpointError(f"{len(data) - pos} trailing bytes after last record")
        return cls(header, tensors)

    def save(self, path: Union[str, Path]) -> Path:
        """Write atomically (temp file + rename)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        try:
            with os.fdopen(handle, "wb") as stream:
                stream.write(self.to_bytes())
            os.replace(temp_name, path)
        except BaseException:
            Path(temp_name).unlink(missing_ok=True)
            raise
        logger.debug("Saved %s checkpoint (step %d) to %s", self.kind, self.step, path)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Checkpoint":
        path = Path(path)
        if not path.is_file():
            raise CheckpointError(f"checkpoint not found: {path}")
        return cls.from_bytes(path.read_bytes())

    def model_tensors(self) -> Dict[str, np.ndarray]:
        return {k: v for k, v in self.tensors.items() if not k.startswith(OPTIM_PREFIX)}


def capture(module: nn.Module, header: Dict[str, Any],
            optimizer: Optional[torch.optim.Optimizer] = None) -> Checkpoint:
    """
    Snapshot module parameters (and Adam moments) into a Checkpoint.

    Args:
        module: Model
        header: kind, configs, step, metadata
        optimizer: Adam optimizer over module.parameters(), optional
    """
    tensors = {name: value.detach().cpu().float().numpy().copy()
               for name, value in module.state_dict().items()}
    header = dict(header)
    if optimizer is not None:
        names = {id(p): name for name, p in module.named_parameters()}
        steps = {}
        for group in optimizer.param_groups:
            for param in group["params"]:
                state = optimizer.state.get(param)
                if not state:
                    continue
                name = names[id(param)]
                for moment in ("exp_avg", "exp_avg_sq"):
                    tensors[f"{OPTIM_PREFIX}{name}/{moment}"] = state[moment].detach().cpu().float().numpy().copy()
                steps[name] = int(float(state["step"]))
        header["optim_steps"] = steps
    return Checkpoint(header, tensors)


def restore(module: nn.Module, checkpoint: Checkpoint,
            optimizer: Optional[torch.optim.Optimizer] = None) -> None:
    """
    Load parameters (and Adam moments) from a Checkpoint.

    Raises:
        CheckpointError: If names or shapes do not match the module
    """
    expected = module.state_dict()
    stored = checkpoint.model_tensors()
    if set(stored) != set(expected):
        missing = sorted(set(expected) - set(stored))
        extra = sorted(set(stored) - set(expected))
        raise CheckpointError(f"checkpoint does not fit model (missing {missing}, unexpected {extra})")
    state = {}
    for name, reference in expected.items():
        if tuple(stored[name].shape) != tuple(reference.shape):
            raise CheckpointError(
                f"shape of {name} is {stored[name].shape}, model expects {tuple(reference.shape)}")
        state[name] = torch.from_numpy(stored[name]).to(reference.dtype)
    module.load_state_dict(state)

    if optimizer is None:
        return
    steps = checkpoint.header.get("optim_steps", {})
    for name, param in module.named_parameters():
        if name not in steps:
            continue
        optimizer.state[param] = {
            "step": torch.tensor(float(steps[name])),
            "exp_avg": torch.from_numpy(checkpoint.tensors[f"{OPTIM_PREFIX}{name}/exp_avg"]).to(param.dtype),
            "exp_avg_sq": torch.from_numpy(checkpoint.tensors[f"{OPTIM_PREFIX}{name}/exp_avg_sq"]).to(param.dtype),
        }
