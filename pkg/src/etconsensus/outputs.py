"""CSV/JSON artifact writers. Every file is written to a temp name and renamed."""
from __future__ import annotations

import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path


def _fmt(v):
    return repr(float(v))


@contextmanager
def atomic_open(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _write_rows(path, header, rows):
    with atomic_open(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_estimates(path, res):
    n = res.x_hat.shape[2]
    header = ["t", "node"] + [f"xhat{j}" for j in range(n)] + ["traceP"]

    def rows():
        for k, t in enumerate(res.t):
            for i in range(res.x_hat.shape[1]):
                yield [_fmt(t), str(i + 1), *map(_fmt, res.x_hat[k, i]), _fmt(res.trace_P[k, i])]

    _write_rows(path, header, rows())


def write_events(path, res):
    ks = res.event_index()
    rows = ([_fmt(s * res.h), str(node + 1), str(k)]
            for s, node, k in zip(res.event_steps, res.event_nodes, ks))
    _write_rows(path, ["t", "node", "k"], rows)


def write_consensus(path, res):
    def rows():
        for k, t in enumerate(res.t):
            for i in range(res.z_err.shape[1]):
                yield [_fmt(t), str(i + 1), _fmt(res.z_err[k, i])]

    _write_rows(path, ["t", "node", "consensus_err"], rows())


def write_broadcasts(path, res):
    n = res.broadcast_z.shape[1]
    header = (["t", "node", "k"] + [f"z{j}" for j in range(n)]
              + [f"Z{r}{c}" for r in range(n) for c in range(n)])
    ks = res.event_index()

    def rows():
        for e, (s, node) in enumerate(zip(res.event_steps, res.event_nodes)):
            yield ([_fmt(s * res.h), str(node + 1), str(ks[e])]
                   + list(map(_fmt, res.broadcast_z[e])) + list(map(_fmt, res.broadcast_Z[e].ravel())))

    _write_rows(path, header, rows())


def write_sweep(path, rows):
    _write_rows(path, ["delta", "E", "F", "F_norm"],
                ([_fmt(r.delta), _fmt(r.E), _fmt(r.F), _fmt(r.F_norm)] for r in rows))


def write_json(path, obj):
    with atomic_open(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_run(out_dir, res, debug_broadcasts=False):
    out = Path(out_dir)
    write_estimates(out / "estimates.csv", res)
    write_events(out / "events.csv", res)
    write_consensus(out / "consensus.csv", res)
    if debug_broadcasts and res.broadcast_z is not None:
        write_broadcasts(out / "broadcasts.csv", res)
    m = res.metrics
    write_json(out / "metrics.json", {
        "E_s": m.E_s, "F_s": m.F_s, "F_norm": m.F_norm,
        "event_counts": [int(c) for c in res.event_counts],
        "pull_messages": [int(c) for c in res.pull_messages],
    })
