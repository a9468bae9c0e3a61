"""Static report figures rendered next to the delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import GAP_BUCKET_LABELS, EvalReport, InstanceEval


def save_gap_histogram(report: EvalReport, path: str):
    """Bar chart of the suboptimality-gap buckets for one system."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    positions = range(len(report.histogram))
    ax.bar(positions, report.histogram, color="#336699")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(GAP_BUCKET_LABELS, rotation=20, ha="right")
    ax.set_ylabel("instances")
    ax.set_xlabel("suboptimality gap")
    title = report.system_name or "gap distribution"
    ax.set_title(f"{title}: {report.n_instances} instances, "
                 f"{report.n_infeasible} infeasible")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_speedup_chart(evals: list[InstanceEval], path: str, *,
                       system_name: str = ""):
    """Per-instance speedup bars with the mean marked."""
    fig, ax = plt.subplots(figsize=(7.2, 4.0))
    ids = [e.instance_id for e in evals]
    speedups = [e.speedup for e in evals]
    ax.bar(range(len(ids)), speedups, color="#779944")
    if speedups:
        mean = sum(speedups) / len(speedups)
        ax.axhline(mean, color="black", linestyle="--", linewidth=1,
                   label=f"mean {mean:.1f}x")
        ax.legend()
    step = max(1, len(ids) // 25)
    ax.set_xticks(range(0, len(ids), step))
    ax.set_xticklabels([str(ids[i]) for i in range(0, len(ids), step)],
                       rotation=90, fontsize=7)
    ax.set_xlabel("instance")
    ax.set_ylabel("speedup (x)")
    ax.set_title(f"{system_name or 'speedup'}: exact solve time over "
                 "neighbor-strategy time")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
