"""SVG figures for experiment records."""
from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _series(records):
    groups = defaultdict(list)
    for r in records:
        if not (math.isfinite(r.param1) and math.isfinite(r.estimate)):
            continue
        groups[(r.experiment, r.kernel, r.epsilon, r.p, r.param2)].append(r)
    return groups


def plot_records(records, path) -> Path | None:
    """One panel per estimand; estimate against ``param1`` with 1-sigma bars.

    Returns ``None`` when nothing has two or more finite points.
    """
    groups = {k: v for k, v in _series(records).items() if len(v) >= 2}
    if not groups:
        return None
    names = sorted({k[0] for k in groups})
    fig, axes = plt.subplots(len(names), 1, figsize=(6, 3 * len(names)), squeeze=False)
    for ax, name in zip(axes[:, 0], names):
        for key, recs in sorted(groups.items(), key=lambda kv: str(kv[0])):
            if key[0] != name:
                continue
            recs = sorted(recs, key=lambda r: r.param1)
            err = [r.stderr if math.isfinite(r.stderr) else 0.0 for r in recs]
            label = f"{key[1]} eps={key[2]:g} p={key[3]:g} param2={key[4]:g}"
            ax.errorbar([r.param1 for r in recs], [r.estimate for r in recs], yerr=err,
                        marker="o", capsize=2, label=label)
        ax.set_title(name)
        ax.set_xlabel("param1")
        ax.legend(fontsize=6)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
