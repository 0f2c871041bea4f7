import os

import pandas as pd


def write_csv(frame: pd.DataFrame, path: str) -> str:
    """Write a table with 17 significant digits and `\\n` line endings"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")

    return path


def format_set(labels: list[str]) -> str:
    """Stable cell text for a set of profile labels"""
    return " ".join(sorted(labels))
