"""Classifier handles: in-process linear/MLP models and external processes.

Every handle exposes `input_dim`, `num_classes`, and `predict_batch`, which
maps a float array of shape (m, input_dim) to integer labels of shape (m,).
Prediction is argmax over class scores with ties resolved toward the lowest
class index, and handles are referentially transparent: the same batch
always yields the same labels.

External models are child processes speaking line-delimited JSON over
stdin/stdout. One request per line:

    {"id": 7, "op": "predict", "inputs": [[0.1, 0.9], [0.4, 0.2]]}

and one response per line, in any order, matched back by id:

    {"id": 7, "labels": [1, 0]}

A handshake precedes everything: {"op": "hello"} is answered by
{"input_dim": D, "num_classes": C}. Failures surface as TransportError and
never masquerade as predictions.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from pathlib import Path

import numpy as np

from .errors import ConfigError, TransportError

__all__ = [
    "LinearModel",
    "MlpModel",
    "ExternalModel",
    "load_weights",
    "check_determinism",
]

_ACTIVATIONS = ("relu", "none")


def _as_batch(inputs: np.ndarray, input_dim: int) -> np.ndarray:
    batch = np.asarray(inputs, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != input_dim:
        raise ValueError(
            f"expected a batch of shape (m, {input_dim}), got {batch.shape}"
        )
    return batch


class _Layer:
    """One affine layer with an optional relu."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray, activation: str):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2:
            raise ConfigError(f"layer weights must be 2-d, got shape {weights.shape}")
        if bias.shape != (weights.shape[0],):
            raise ConfigError(
                f"bias length {bias.shape} does not match {weights.shape[0]} output rows"
            )
        if activation not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation {activation!r}")
        self.weights = weights
        self.bias = bias
        self.activation = activation

    def apply(self, a: np.ndarray) -> np.ndarray:
        out = a @ self.weights.T + self.bias
        if self.activation == "relu":
            np.maximum(out, 0.0, out=out)
        return out


class MlpModel:
    """Feed-forward relu network; scores from the last layer are raw."""

    kind = "mlp"

    def __init__(self, layers: list[tuple[np.ndarray, np.ndarray, str]]):
        if not layers:
            raise ConfigError("model needs at least one layer")
        self._layers = [_Layer(w, b, act) for w, b, act in layers]
        for prev, cur in zip(self._layers, self._layers[1:]):
            if cur.weights.shape[1] != prev.weights.shape[0]:
                raise ConfigError(
                    "layer shapes do not chain: "
                    f"{prev.weights.shape} feeds {cur.weights.shape}"
                )
        if self._layers[-1].activation != "none":
            raise ConfigError("the output layer must not have an activation")
        self.input_dim = self._layers[0].weights.shape[1]
        self.num_classes = self._layers[-1].weights.shape[0]
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")

    def scores(self, inputs: np.ndarray) -> np.ndarray:
        a = _as_batch(inputs, self.input_dim)
        for layer in self._layers:
            a = layer.apply(a)
        return a

    def predict_batch(self, inputs: np.ndarray) -> np.ndarray:
        # np.argmax picks the first maximum, which is the tie rule
        return np.argmax(self.scores(inputs), axis=1)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.input_dim,
            "num_classes": self.num_classes,
            "layers": [list(l.weights.shape) for l in self._layers],
        }


class LinearModel(MlpModel):
    """Single affine layer: scores = W x + b."""

    kind = "linear"

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        super().__init__([(weights, bias, "none")])
        self.weights = self._layers[0].weights
        self.bias = self._layers[0].bias


def load_weights(path: str | Path):
    """Load a JSON weights file into a LinearModel or MlpModel.

    The file carries explicit shapes and is validated end to end: layer
    shapes must chain, the last layer must be as wide as num_classes, and
    the output layer must be activation-free. A single-layer file loads as
    a LinearModel.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"weights file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"weights file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"weights file {path} must hold a JSON object")
    for field in ("input_dim", "num_classes", "layers"):
        if field not in raw:
            raise ConfigError(f"weights file {path} lacks required field {field!r}")
    layer_specs = raw["layers"]
    if not isinstance(layer_specs, list) or not layer_specs:
        raise ConfigError(f"weights file {path} must declare a non-empty layer list")
    layers = []
    for i, spec in enumerate(layer_specs):
        try:
            layers.append(
                (
                    np.array(spec["weights"], dtype=np.float64),
                    np.array(spec["bias"], dtype=np.float64),
                    spec.get("activation", "none"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"layer {i} in {path} is malformed: {exc}") from None
    if len(layers) == 1:
        model = LinearModel(layers[0][0], layers[0][1])
        if layers[0][2] != "none":
            raise ConfigError("the output layer must not have an activation")
    else:
        model = MlpModel(layers)
    if model.input_dim != int(raw["input_dim"]):
        raise ConfigError(
            f"declared input_dim {raw['input_dim']} but the first layer "
            f"consumes {model.input_dim}"
        )
    if model.num_classes != int(raw["num_classes"]):
        raise ConfigError(
            f"declared num_classes {raw['num_classes']} but the last layer "
            f"produces {model.num_classes}"
        )
    return model


def _excerpt(line: str, limit: int = 200) -> str:
    line = line.strip()
    return line if len(line) <= limit else line[: limit - 3] + "..."


class ExternalModel:
    """Child-process classifier reached over the line-delimited JSON protocol.

    The handle owns a single child process and serializes requests, so it is
    safe to share across worker threads. Responses may arrive out of order
    and are re-matched by id; anything unparseable, any id never answered
    within the timeout, and any error response surfaces as TransportError.
    """

    kind = "external"

    def __init__(self, command: list[str], timeout: float = 30.0):
        if not command or not all(isinstance(c, str) for c in command):
            raise ConfigError(f"external command must be a list of strings: {command!r}")
        self.command = list(command)
        self.timeout = float(timeout)
        self.input_dim: int | None = None
        self.num_classes: int | None = None
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._reader: threading.Thread | None = None
        self._pending: dict[int, dict] = {}
        self._next_id = 1
        self._lock = threading.Lock()

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        if self._proc is not None:
            return
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"could not start {self.command[0]!r}: {exc}") from None
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        reply = self._roundtrip({"op": "hello"}, match_id=None)
        try:
            self.input_dim = int(reply["input_dim"])
            self.num_classes = int(reply["num_classes"])
        except (KeyError, TypeError, ValueError):
            raise TransportError(
                f"bad handshake response: {_excerpt(json.dumps(reply))}"
            ) from None
        if self.input_dim < 1 or self.num_classes < 2:
            raise TransportError(
                f"handshake announced input_dim={self.input_dim}, "
                f"num_classes={self.num_classes}"
            )

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.terminate()
            proc.wait(timeout=5)
        except Exception:
            proc.kill()

    def __enter__(self) -> "ExternalModel":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- protocol ----------------------------------------------------------

    def _read_loop(self) -> None:
        proc = self._proc
        assert proc is not None and proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def _roundtrip(self, request: dict, match_id: int | None) -> dict:
        proc = self._proc
        if proc is None or proc.stdin is None:
            raise TransportError("external model process is not running")
        try:
            proc.stdin.write(json.dumps(request, separators=(",", ":")) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"external model pipe closed: {exc}") from None
        if match_id is not None and match_id in self._pending:
            return self._pending.pop(match_id)
        import time

        deadline = time.monotonic() + self.timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportError(
                    f"timed out after {self.timeout}s waiting for response "
                    f"to request {request.get('op')}/{request.get('id')}"
                )
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                continue
            if line is None:
                code = proc.poll()
                raise TransportError(
                    f"external model exited (returncode={code}) before responding"
                )
            try:
                msg = json.loads(line)
                if not isinstance(msg, dict):
                    raise ValueError("not an object")
            except ValueError:
                raise TransportError(
                    f"malformed response line: {_excerpt(line)}"
                ) from None
            if match_id is None:
                return msg
            got_id = msg.get("id")
            if got_id == match_id:
                if "error" in msg:
                    raise TransportError(
                        f"external model error for request {match_id}: "
                        f"{_excerpt(str(msg['error']))}"
                    )
                return msg
            if isinstance(got_id, int):
                # stale or out-of-order line for another id; stash and keep going
                self._pending[got_id] = msg
            # lines without a usable id are dropped

    def predict_batch(self, inputs: np.ndarray) -> np.ndarray:
        with self._lock:
            if self._proc is None:
                self.start()
            batch = _as_batch(inputs, int(self.input_dim))
            req_id = self._next_id
            self._next_id += 1
            reply = self._roundtrip(
                {
                    "id": req_id,
                    "op": "predict",
                    "inputs": [[float(v) for v in row] for row in batch],
                },
                match_id=req_id,
            )
            labels = reply.get("labels")
            if not isinstance(labels, list) or len(labels) != batch.shape[0]:
                raise TransportError(
                    f"response to request {req_id} has no label per input: "
                    f"{_excerpt(json.dumps(reply))}"
                )
            out = np.asarray(labels)
            if out.dtype.kind not in "iu" or np.any(out < 0) or np.any(
                out >= self.num_classes
            ):
                raise TransportError(
                    f"response to request {req_id} contains labels outside "
                    f"[0, {self.num_classes}): {_excerpt(json.dumps(labels))}"
                )
            return out.astype(np.int64)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "command": self.command,
            "input_dim": self.input_dim,
            "num_classes": self.num_classes,
        }


def check_determinism(model, probe: np.ndarray) -> None:
    """Reject a model that answers the same batch differently twice.

    Assessment semantics assume referential transparency; an external model
    that violates it is unusable, so this raises TransportError.
    """
    first = model.predict_batch(probe)
    second = model.predict_batch(probe)
    if not np.array_equal(first, second):
        raise TransportError(
            "model is not deterministic: identical batches returned "
            "different labels"
        )
