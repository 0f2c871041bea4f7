import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def line_chart(
    path: str,
    x,
    series: dict[str, list[float]],
    xlabel: str,
    ylabel: str,
    marks: list[float] | None = None,
    log_x: bool = False,
) -> str:
    """Minimal SVG line chart, vertical dashed lines at `marks`"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    plt.rcParams["svg.hashsalt"] = "zero-rating"
    fig, ax = plt.subplots(figsize=(6, 4))

    for name, values in series.items():
        ax.plot(x, values, label=name)
    for mark in marks or []:
        ax.axvline(mark, linestyle="--", color="grey", linewidth=0.8)

    if log_x:
        ax.set_xscale("log")

    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)

    return path
