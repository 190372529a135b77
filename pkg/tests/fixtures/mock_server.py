"""Scriptable wire-protocol server used by the external-model tests.

Speaks the line-delimited JSON protocol on stdin/stdout. The --mode flag
selects a behavior, most of them deliberately broken in one specific way.
"""

import argparse
import json
import sys


def classify(rows):
    # label 1 iff the first component exceeds 0.5
    return [1 if row[0] > 0.5 else 0 for row in rows]


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="normal")
    mode = parser.parse_args().mode

    predicts_answered = 0

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            emit({"id": 0, "error": "unparseable request"})
            continue
        if msg.get("op") == "hello":
            if mode == "bad_handshake":
                emit({"hello": "world"})
            else:
                emit({"input_dim": 2, "num_classes": 2})
            if mode == "die_after_handshake":
                return
            continue
        req_id = msg.get("id", 0)
        if mode == "probe_only" and predicts_answered >= 2:
            # enough answers to pass the determinism probe, then gone
            return
        predicts_answered += 1
        if mode == "silent":
            continue
        if mode == "error_on_predict":
            emit({"id": req_id, "error": "synthetic failure"})
            continue
        if mode == "malformed":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        rows = msg.get("inputs", [])
        if mode == "error_above":
            # refuses any batch touching the top-right region, so a dataset
            # mixing benign and offending centers fails on exactly the latter
            if any(row[0] > 0.9 for row in rows):
                emit({"id": req_id, "error": "region rejected"})
                continue
        if mode == "nondeterministic":
            # every request flips all labels, so two identical batches in a
            # row can never agree
            labels = [predicts_answered % 2 for _ in rows]
        elif mode == "bad_labels":
            labels = [7 for _ in rows]
        elif mode == "short_reply":
            labels = classify(rows)[:-1]
        else:
            labels = classify(rows)
        if mode == "out_of_order":
            # a stale line for an unknown id arrives first; the client must
            # skip past it and still match the real response
            emit({"id": 999_999, "labels": [0]})
        emit({"id": req_id, "labels": labels})


if __name__ == "__main__":
    main()
