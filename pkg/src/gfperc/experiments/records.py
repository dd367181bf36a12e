"""Result records, CSV/JSON persistence and run manifests."""
from __future__ import annotations

import csv
import io
import json
import math
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

from .. import __version__

CSV_COLUMNS = ("experiment", "kernel", "epsilon", "p", "param1", "param2", "estimate", "stderr",
               "n", "seed", "elapsed_ms")


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    kernel: str
    epsilon: float
    p: float
    param1: float
    param2: float
    estimate: float
    stderr: float
    n: int
    seed: int
    elapsed_ms: float = 0.0
    boolean: bool = False

    def row(self) -> list[str]:
        return [self.experiment, self.kernel, _fmt(self.epsilon), _fmt(self.p), _fmt(self.param1),
                _fmt(self.param2), _fmt(self.estimate), _fmt(self.stderr), str(int(self.n)),
                str(int(self.seed)), _fmt(self.elapsed_ms)]


def _fmt(x) -> str:
    if x is None:
        return "nan"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def binomial_stderr(phat: float, n: int) -> float:
    return math.sqrt(max(phat * (1.0 - phat), 0.0) / n)


def boolean_record(experiment, kernel, epsilon, p, param1, param2, hits, n, seed,
                   elapsed_ms=0.0) -> ResultRecord:
    phat = hits / n
    return ResultRecord(experiment, kernel, epsilon, p, param1, param2, phat,
                        binomial_stderr(phat, n), n, seed, elapsed_ms, True)


class ResultSink:
    """Append-only, lock-protected collection of records."""

    def __init__(self):
        self._records: list[ResultRecord] = []
        self._lock = threading.Lock()

    def append(self, record: ResultRecord) -> None:
        with self._lock:
            self._records.append(record)

    def extend(self, records) -> None:
        with self._lock:
            self._records.extend(records)

    @property
    def records(self) -> tuple[ResultRecord, ...]:
        with self._lock:
            return tuple(self._records)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def to_json(records) -> str:
    rows = []
    for r in records:
        d = asdict(r)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = _fmt(v)
        rows.append(d)
    return json.dumps(rows, indent=1)


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def manifest(config, started: str, finished: str, files: list[str], timings: dict) -> dict:
    return {
        "experiment": config.experiment,
        "config_hash": config.hash(),
        "config": json.loads(config.canonical()),
        "version": __version__,
        "seed": int(config.seed),
        "threads": int(config.threads),
        "started": started,
        "finished": finished,
        "outputs": files,
        "elapsed_ms": timings,
    }

