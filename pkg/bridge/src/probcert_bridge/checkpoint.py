"""Checkpoint loading with strict validation and float64 inference.

A checkpoint is a torch-saved dict with exactly the keys arch, state_dict,
input_shape, and num_classes. The arch block names one of the known
architectures; the module is rebuilt from it and the state dict must match
it tensor for tensor. Everything is cast to float64 so labels agree
bit-for-bit with reference implementations that compute in doubles.
"""

import math
from dataclasses import dataclass

import torch
from torch import nn


class CheckpointError(Exception):
    """The checkpoint file cannot be turned into a servable model."""


REQUIRED_KEYS = frozenset({"arch", "state_dict", "input_shape", "num_classes"})


@dataclass(frozen=True)
class LoadedModel:
    module: nn.Module
    input_shape: tuple[int, ...]
    input_dim: int
    num_classes: int


def build_module(arch: dict, input_dim: int, num_classes: int) -> nn.Module:
    """Construct the declared architecture with fresh parameters.

    "linear" is a single affine map; "mlp" inserts relu hidden layers of
    the listed widths. Both flatten the declared input shape first, so the
    wire protocol's flat rows and image-shaped checkpoints meet in the
    same place.
    """
    if not isinstance(arch, dict) or not isinstance(arch.get("name"), str):
        raise CheckpointError(f"arch must be an object with a name, got {arch!r}")
    name = arch["name"]
    if name == "linear":
        if set(arch) != {"name"}:
            raise CheckpointError(f"linear arch takes no extra fields: {sorted(arch)}")
        return nn.Sequential(nn.Flatten(), nn.Linear(input_dim, num_classes))
    if name == "mlp":
        if set(arch) != {"name", "hidden"}:
            raise CheckpointError(f"mlp arch needs exactly name and hidden: {sorted(arch)}")
        hidden = arch["hidden"]
        if (
            not isinstance(hidden, list)
            or not hidden
            or not all(isinstance(h, int) and h > 0 for h in hidden)
        ):
            raise CheckpointError(f"hidden must be a non-empty list of positive ints: {hidden!r}")
        layers: list[nn.Module] = [nn.Flatten()]
        widths = [input_dim, *hidden]
        for a, b in zip(widths, widths[1:]):
            layers += [nn.Linear(a, b), nn.ReLU()]
        layers.append(nn.Linear(widths[-1], num_classes))
        return nn.Sequential(*layers)
    raise CheckpointError(f"unknown arch name {name!r}")


def load_checkpoint(path: str, device: str = "cpu") -> LoadedModel:
    """Load, validate, and freeze a checkpoint for deterministic serving."""
    try:
        raw = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    except Exception as exc:
        raise CheckpointError(f"checkpoint {path} would not load: {exc}") from None
    if not isinstance(raw, dict):
        raise CheckpointError(f"checkpoint {path} must hold a dict, got {type(raw).__name__}")
    if set(raw) != REQUIRED_KEYS:
        raise CheckpointError(
            f"checkpoint keys must be exactly {sorted(REQUIRED_KEYS)}, got {sorted(raw)}"
        )

    shape = raw["input_shape"]
    if (
        not isinstance(shape, (list, tuple))
        or not shape
        or not all(isinstance(s, int) and s > 0 for s in shape)
    ):
        raise CheckpointError(f"input_shape must be positive ints: {shape!r}")
    num_classes = raw["num_classes"]
    if not isinstance(num_classes, int) or num_classes < 2:
        raise CheckpointError(f"num_classes must be an int >= 2, got {num_classes!r}")
    input_dim = math.prod(shape)

    module = build_module(raw["arch"], input_dim, num_classes)
    try:
        module.load_state_dict(raw["state_dict"], strict=True)
    except Exception as exc:
        raise CheckpointError(f"state_dict does not fit the declared arch: {exc}") from None

    module = module.to(torch.float64)
    try:
        module = module.to(device)
    except Exception as exc:
        raise CheckpointError(f"cannot move model to device {device!r}: {exc}") from None
    module.eval()
    for p in module.parameters():
        p.requires_grad_(False)
    return LoadedModel(module, tuple(shape), input_dim, num_classes)
