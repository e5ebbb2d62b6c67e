"""Command-line entry point: ``render_figs <out-dir> [--fig <id>]``.

``<out-dir>`` is either a single run directory (contains manifest.json)
or an output root laid out as out/<scenario>/<timestamp>/.  For a root,
the newest completed run of each scenario is rendered; ``--fig``
restricts rendering to scenarios whose name starts with the given id
(so ``--fig fig3`` renders fig3b/fig3c/fig3d, ``--fig fig4b`` just one).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import RENDERERS, render_run
from .io import RenderError, latest_run, load_run

EXIT_OK = 0
EXIT_ERROR = 1


def _collect_run_dirs(root: Path, fig: str | None) -> list[Path]:
    if (root / "manifest.json").is_file():
        return [root]
    if not root.is_dir():
        raise RenderError(f"{root}: not a directory")
    dirs = []
    for child in sorted(root.iterdir()):
        if not child.is_dir() or child.name not in RENDERERS:
            continue
        if fig is not None and not child.name.startswith(fig):
            continue
        dirs.append(latest_run(child))
    if not dirs:
        what = f"matching {fig!r} " if fig else ""
        raise RenderError(f"{root}: no completed scenario runs {what}found")
    return dirs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render figures from completed scenario output directories.",
    )
    parser.add_argument("out_dir", help="run directory or output root")
    parser.add_argument("--fig", default=None,
                        help="figure id filter, e.g. fig3 or fig4b")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run_dirs = _collect_run_dirs(Path(args.out_dir), args.fig)
        for run_dir in run_dirs:
            run = load_run(run_dir)
            written = render_run(run)
            for name in written:
                print(run.directory / name)
    except RenderError as exc:
        print(f"render_figs: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
