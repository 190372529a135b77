"""Request loop speaking the certifier's line-delimited JSON protocol.

One JSON object per line on stdin, one per line on stdout, flushed after
every response. A hello request is answered with the model's dimensions;
predict requests are answered with argmax labels under the same
first-occurrence tie rule the certifier's built-in models use. Bad
requests get an error response (carrying the request id when one was
parseable) and never kill the process; only a checkpoint that cannot be
served aborts, before the handshake, with a nonzero exit.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from .checkpoint import CheckpointError, LoadedModel, load_checkpoint


@dataclass(frozen=True)
class BridgeConfig:
    checkpoint: str
    device: str = "cpu"
    batch_cap: int = 1024
    # optional cross-check against the checkpoint's own declaration
    input_shape: Optional[tuple[int, ...]] = None


def predict_labels(loaded: LoadedModel, rows: np.ndarray, batch_cap: int) -> list[int]:
    """Argmax labels for float64 rows, split into slices of at most batch_cap."""
    labels: list[int] = []
    with torch.no_grad():
        for start in range(0, rows.shape[0], batch_cap):
            chunk = rows[start : start + batch_cap]
            tensor = torch.from_numpy(chunk.reshape(-1, *loaded.input_shape).copy())
            scores = loaded.module(tensor).cpu().numpy()
            labels.extend(int(v) for v in scores.argmax(axis=1))
    return labels


def _validate_rows(rows, input_dim: int) -> Optional[str]:
    if not isinstance(rows, list) or not rows:
        return "inputs must be a non-empty list of rows"
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            return f"row {i} is not a list"
        if len(row) != input_dim:
            return f"row {i} has {len(row)} values, expected {input_dim}"
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                return f"row {i} holds a non-finite or non-numeric value"
    return None


def _respond(stdout, payload: dict) -> None:
    stdout.write(json.dumps(payload, separators=(",", ":")) + "\n")
    stdout.flush()


def serve(config: BridgeConfig, stdin=None, stdout=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    try:
        if config.batch_cap < 1:
            raise CheckpointError(f"batch cap must be positive, got {config.batch_cap}")
        loaded = load_checkpoint(config.checkpoint, config.device)
        if config.input_shape is not None and config.input_shape != loaded.input_shape:
            raise CheckpointError(
                f"--input-shape {config.input_shape} does not match the "
                f"checkpoint's {loaded.input_shape}"
            )
        torch.use_deterministic_algorithms(True)
    except CheckpointError as exc:
        print(f"probcert-bridge: {exc}", file=sys.stderr)
        return 2

    for line in stdin:
        if not line.strip():
            continue
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError
        except ValueError:
            _respond(stdout, {"id": None, "error": "request is not a JSON object"})
            continue
        req_id = msg.get("id")
        if isinstance(req_id, bool) or not isinstance(req_id, int):
            req_id = None
        op = msg.get("op")

        if op == "hello":
            _respond(
                stdout,
                {"input_dim": loaded.input_dim, "num_classes": loaded.num_classes},
            )
            continue
        if op != "predict":
            _respond(stdout, {"id": req_id, "error": f"unknown op {op!r}"})
            continue
        if req_id is None:
            _respond(stdout, {"id": None, "error": "predict request needs an integer id"})
            continue
        problem = _validate_rows(msg.get("inputs"), loaded.input_dim)
        if problem is not None:
            _respond(stdout, {"id": req_id, "error": problem})
            continue
        try:
            rows = np.asarray(msg["inputs"], dtype=np.float64)
            labels = predict_labels(loaded, rows, config.batch_cap)
        except Exception as exc:
            _respond(stdout, {"id": req_id, "error": f"inference failed: {exc}"})
            continue
        _respond(stdout, {"id": req_id, "labels": labels})
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="probcert-bridge",
        description="Serve a torch checkpoint over stdin/stdout JSON lines.",
    )
    parser.add_argument("--checkpoint", required=True, help="path to the saved checkpoint")
    parser.add_argument("--device", default="cpu", help="torch device to run on")
    parser.add_argument(
        "--batch-cap",
        type=int,
        default=1024,
        help="largest slice fed to the model at once; bigger requests are split",
    )
    parser.add_argument(
        "--input-shape",
        default=None,
        help="comma-separated dims; rejected if the checkpoint declares otherwise",
    )
    args = parser.parse_args(argv)
    shape: Optional[tuple[int, ...]] = None
    if args.input_shape is not None:
        try:
            shape = tuple(int(s) for s in args.input_shape.split(","))
        except ValueError:
            parser.error(f"--input-shape must be comma-separated ints: {args.input_shape!r}")
    return serve(
        BridgeConfig(
            checkpoint=args.checkpoint,
            device=args.device,
            batch_cap=args.batch_cap,
            input_shape=shape,
        )
    )


if __name__ == "__main__":
    sys.exit(main())
