"""
Report Writer

Writes the sweep artifacts: errors.csv, manifest.csv and a plot script
rendered from a Jinja2 template. Run manifests are JSON via orjson.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import orjson
import pandas as pd
from jinja2 import Environment, FileSystemLoader

from ..models.schemas import ConvergenceReport, RunManifest

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"
FLOAT_FORMAT = '%.17g'


class ReportWriter:
    """
    Renders convergence reports to disk.

    Output is byte-stable: no timestamps, fixed column order and
    round-trip float formatting.
    """

    def __init__(self, template_dir: Optional[Path] = None):
        self.jinja_env = Environment(loader=FileSystemLoader(str(template_dir or TEMPLATE_DIR)),
                                     keep_trailing_newline=True)

    @staticmethod
    def errors_frame(report: ConvergenceReport) -> pd.DataFrame:
        return pd.DataFrame(
            [{'eps': e.eps, 'error': e.error, 'defect': e.defect, 'kernel_defect': e.kernel_defect,
              'ratio': e.ratio, 'solver_error': e.solver_error} for e in report.entries],
            columns=['eps', 'error', 'defect', 'kernel_defect', 'ratio', 'solver_error'],
        )

    @staticmethod
    def manifest_frame(report: ConvergenceReport, spec_hash: str, seeds: Dict[str, Any]) -> pd.DataFrame:
        rows = [('spec_hash', spec_hash), ('order', report.order),
                ('eps', ' '.join(repr(e) for e in report.eps)), ('horizon', repr(report.horizon))]
        for key in ('B', 'g', 'mu', 'k_gap'):
            if key in report.grid:
                rows.append((key, repr(report.grid[key])))
        for key in sorted(k for k in report.grid if k not in ('B', 'g', 'mu', 'k_gap')):
            value = report.grid[key]
            rows.append((key, repr(value) if isinstance(value, float) else value))
        for key in sorted(seeds):
            rows.append((f"seed.{key}", seeds[key]))
        rows.append(('error_slope', repr(report.error_fit.slope)))
        rows.append(('flags', ';'.join(report.flags)))
        return pd.DataFrame(rows, columns=['key', 'value'])

    def render_plot_script(self, report: ConvergenceReport, csv_name: str = 'errors.csv') -> str:
        template = self.jinja_env.get_template('plot_errors.py.j2')
        return template.render(order=report.order, guide_slope=report.order + 1, slope=report.slope,
                               csv_name=csv_name, html_name='errors.html')

    def save(self, report: ConvergenceReport, output_dir: str, spec_hash: str,
             seeds: Optional[Dict[str, Any]] = None) -> Dict[str, Path]:
        """
        Write errors.csv, manifest.csv and plot_errors.py.

        Returns:
            Mapping artifact name -> path
        """
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            'errors': out / 'errors.csv',
            'manifest': out / 'manifest.csv',
            'plot': out / 'plot_errors.py',
        }
        self.errors_frame(report).to_csv(paths['errors'], index=False, float_format=FLOAT_FORMAT,
                                         lineterminator='\n')
        self.manifest_frame(report, spec_hash, seeds or {}).to_csv(paths['manifest'], index=False,
                                                                    lineterminator='\n')
        with open(paths['plot'], 'w', encoding='utf-8') as f:
            f.write(self.render_plot_script(report))
        for name, path in paths.items():
            logger.info(f"Saved {name}: {path}")
        return paths


def emit_report(report: ConvergenceReport, output_dir: str, spec_hash: str,
                seeds: Optional[Dict[str, Any]] = None) -> Dict[str, Path]:
    """Write the sweep artifacts with the default template set."""
    return ReportWriter().save(report, output_dir, spec_hash, seeds)


def dump_json(data: Any) -> bytes:
    """Sorted, indented JSON"""
    return orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)


def write_manifest_json(manifest: RunManifest, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_json(manifest.model_dump(mode='json')))
    logger.info(f"Saved run manifest: {path}")
    return path
