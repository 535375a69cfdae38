"""
Console output helpers for the digieval command line.
"""

from __future__ import annotations

from typing import Any, Mapping

from ascii_colors import ASCIIColors

from .. import __version__
from ..base import MetricsReport
from ..metrics import format_percent


def _display_tree(title: str, items: Mapping[str, Any]) -> None:
    ASCIIColors.magenta(f"\n{title}:")
    entries = list(items.items())
    for i, (label, value) in enumerate(entries):
        branch = "└─" if i == len(entries) - 1 else "├─"
        ASCIIColors.white(f"    {branch} {label}: ", end="")
        ASCIIColors.yellow(f"{value}")


def display_splash_screen(command: str, settings: Mapping[str, Any]) -> None:
    """Banner plus the resolved settings of the command about to run."""
    ASCIIColors.cyan(f"""
    ╔══════════════════════════════════════════════╗
    ║   digieval v{__version__:<8}                         ║
    ║   building digitization evaluation           ║
    ╚══════════════════════════════════════════════╝
    """)
    _display_tree(f"Command {command}", settings)


def display_report(report: MetricsReport) -> None:
    c = report.counts
    _display_tree(
        "Counts",
        {
            "Ground-truth buildings": c.n_gt,
            "Predicted buildings": c.n_pred,
            "Ground truth detected": c.n_gt_matched,
            "Predictions matched": c.n_pred_matched,
        },
    )
    _display_tree(
        "Accuracy",
        {
            "True Positive": c.tp,
            "False Positive": c.fp,
            "False Negative": c.fn_,
            "Precision": f"{format_percent(report.precision)} %",
            "Recall": f"{format_percent(report.recall)} %",
            "F1-score": f"{format_percent(report.f1)} %",
        },
    )


def display_outputs(paths: list[str]) -> None:
    ASCIIColors.green("\nOutputs written:")
    for path in paths:
        ASCIIColors.white(f"    - {path}")
