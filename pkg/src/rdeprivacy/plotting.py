"""PNG figures for the CLI ``--plot`` option.

matplotlib is imported lazily (Agg backend) so the library itself never
needs it; install the ``plot`` extra to use these.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("plotting needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, dpi=120, bbox_inches="tight")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def tradeoff_figure(curve, path, title=None):
    """Rate and privacy column (E or L) against distortion, side by side."""
    plt = _pyplot()
    second = "E" if "E" in curve.columns else "L"
    fig, (ax_r, ax_p) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax_r.plot(curve.D, curve.R, "o-")
    ax_r.set_xlabel("distortion D")
    ax_r.set_ylabel("rate R (bits)")
    ax_p.plot(curve.D, curve.column(second), "s-", color="C1")
    ax_p.set_xlabel("distortion D")
    ax_p.set_ylabel("equivocation E (bits)" if second == "E" else "leakage L (bits)")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    try:
        return _save(fig, path)
    finally:
        plt.close(fig)


def simulation_figure(rows, path):
    """Decode-error rate and plug-in equivocation against blocklength."""
    plt = _pyplot()
    ns = [r.n for r in rows]
    fig, (ax_e, ax_q) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax_e.plot(ns, [r.err_rate for r in rows], "o-")
    ax_e.set_xlabel("blocklength n")
    ax_e.set_ylabel("decode-error rate")
    ax_q.plot(ns, [r.plugin_equiv if r.plugin_equiv is not None else float("nan") for r in rows], "o-",
              label="plug-in")
    ax_q.axhline(rows[0].analytic_equiv, color="k", ls="--", lw=1, label="H(X_h|U,Z)")
    ax_q.set_xlabel("blocklength n")
    ax_q.set_ylabel("equivocation (bits/symbol)")
    ax_q.legend(frameon=False)
    fig.tight_layout()
    try:
        return _save(fig, path)
    finally:
        plt.close(fig)
