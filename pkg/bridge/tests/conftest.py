import json
import subprocess
import sys

import pytest


def save_identity_checkpoint(path) -> None:
    """Two classes, decision thresholded on input component 0 at 0.5."""
    import torch

    from probcert_bridge.checkpoint import build_module

    module = build_module({"name": "linear"}, 2, 2).double()
    with torch.no_grad():
        module[1].weight.copy_(torch.tensor([[0.0, 0.0], [1.0, 0.0]], dtype=torch.float64))
        module[1].bias.copy_(torch.tensor([0.5, 0.0], dtype=torch.float64))
    torch.save(
        {
            "arch": {"name": "linear"},
            "state_dict": module.state_dict(),
            "input_shape": [2],
            "num_classes": 2,
        },
        path,
    )


class BridgeProcess:
    """Line-oriented test client around a running bridge subprocess."""

    def __init__(self, *args: str):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "probcert_bridge", *args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._next_id = 1

    def send(self, payload) -> None:
        line = payload if isinstance(payload, str) else json.dumps(payload)
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def recv(self) -> dict:
        line = self.proc.stdout.readline()
        assert line, f"bridge closed stdout (stderr: {self.proc.stderr.read()})"
        return json.loads(line)

    def predict(self, rows) -> dict:
        req_id = self._next_id
        self._next_id += 1
        self.send({"id": req_id, "op": "predict", "inputs": rows})
        reply = self.recv()
        assert reply.get("id") == req_id, reply
        return reply

    def close(self) -> int:
        self.proc.stdin.close()
        try:
            return self.proc.wait(timeout=10)
        finally:
            self.proc.stdout.close()
            self.proc.stderr.close()


@pytest.fixture
def make_bridge():
    """Factory for bridge subprocesses that are torn down even on failure."""
    spawned: list[BridgeProcess] = []

    def _make(*args: str) -> BridgeProcess:
        proc = BridgeProcess(*args)
        spawned.append(proc)
        return proc

    yield _make
    for proc in spawned:
        if proc.proc.poll() is None:
            proc.proc.kill()
        for stream in (proc.proc.stdin, proc.proc.stdout, proc.proc.stderr):
            if stream and not stream.closed:
                stream.close()


@pytest.fixture(scope="session")
def identity_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "identity.pt"
    save_identity_checkpoint(path)
    return path


@pytest.fixture(scope="session")
def write_identity_checkpoint():
    return save_identity_checkpoint


@pytest.fixture(scope="module")
def bridge(identity_checkpoint):
    proc = BridgeProcess("--checkpoint", str(identity_checkpoint))
    proc.send({"op": "hello"})
    hello = proc.recv()
    assert hello == {"input_dim": 2, "num_classes": 2}
    yield proc
    assert proc.close() == 0
