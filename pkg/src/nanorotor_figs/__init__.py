"""Figure rendering for completed nanorotor scenario directories.

Reads only the CSV files listed in a run's manifest (after verifying
their checksums) and draws publication-style figures.  No physics is
recomputed here: analytic overlays use parameters recorded in the
manifest by the simulation run.
"""

from .io import RenderError, RunData, load_run
from .figures import RENDERERS, render_run

__all__ = ["RenderError", "RunData", "load_run", "RENDERERS", "render_run"]
