import csv
import json
import os
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config.settings import settings  # noqa: E402
from utils.logger import logger  # noqa: E402

# Fixed ids in the SVG output so identical data gives identical files.
matplotlib.rcParams["svg.hashsalt"] = "optomech"


def format_value(value: Any) -> str:
    """Render one CSV cell: booleans as 1/0, numbers with fixed significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{settings.CSV_SIGNIFICANT_DIGITS}g}"
    return str(value)


def resolve_output_path(filename: str, directory: Optional[str] = None) -> str:
    directory = directory or settings.OUTPUT_DIRECTORY
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, filename)


def export_to_csv(
    data: List[Dict[str, Any]],
    filename: str,
    directory: Optional[str] = None,
    metadata: Optional[Mapping[str, Any]] = None,
    fieldnames: Optional[Sequence[str]] = None,
) -> str:
    """
    Export rows to a CSV file preceded by '#' metadata comment lines.

    Args:
        data: Rows keyed by column name.
        filename: File name inside the output directory.
        directory: Output directory; defaults to settings.OUTPUT_DIRECTORY.
        metadata: Written as one ``# key: <json>`` line per entry, keys sorted.
        fieldnames: Column order; defaults to the keys of the first row.

    Returns:
        str: The path written.
    """
    if not data and fieldnames is None:
        logger.warning(f"No data to export to {filename}")

    filepath = resolve_output_path(filename, directory)
    fieldnames = list(fieldnames or (data[0].keys() if data else []))

    try:
        with open(filepath, "w", newline="", encoding="utf-8") as csvfile:
            for key, value in sorted((metadata or {}).items()):
                csvfile.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
            writer = csv.DictWriter(
                csvfile, fieldnames=fieldnames, lineterminator="\n"
            )
            writer.writeheader()
            writer.writerows(
                {name: format_value(row[name]) for name in fieldnames} for row in data
            )

        logger.info(f"Data exported to {filepath}")
        return filepath
    except OSError as e:
        logger.error(f"Error exporting to CSV {filepath}: {e}")
        raise


def read_csv_columns(filepath: str) -> Dict[str, np.ndarray]:
    """Read a CSV written by export_to_csv back into float columns."""
    with open(filepath, encoding="utf-8") as csvfile:
        lines = [line for line in csvfile if not line.startswith("#")]
    reader = csv.DictReader(lines)
    rows = list(reader)
    return {
        name: np.array([float(row[name]) for row in rows])
        for name in (reader.fieldnames or [])
    }


def export_to_svg(
    x: Iterable[float],
    columns: Mapping[str, Iterable[float]],
    filename: str,
    directory: Optional[str] = None,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    log_x: bool = False,
) -> str:
    """Render one line per column against x and save it as an SVG document."""
    filepath = resolve_output_path(filename, directory)
    x = np.asarray(list(x), dtype=float)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    try:
        for label, values in columns.items():
            ax.plot(x, np.asarray(list(values), dtype=float), label=label)
        if log_x:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True)
        if len(columns) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(filepath, format="svg", metadata={"Date": None})
    except OSError as e:
        logger.error(f"Error exporting to SVG {filepath}: {e}")
        raise
    finally:
        plt.close(fig)

    logger.info(f"Plot exported to {filepath}")
    return filepath
