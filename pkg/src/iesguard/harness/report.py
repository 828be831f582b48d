"""
Experiment report and its file formats.

``report.json`` holds the whole report and re-parses to an equal
:class:`Report`. The CSV files are views for spreadsheets and plotting:
one row per (mode, scenario, seed), the seed-mean profit table, the
clean-then-attacked reward series and the hourly dispatch traces.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import polars as pl

from ..exceptions import ReportError
from ..logging import logger
from ..signals import SIGNAL_SUPPORT, report_emitted

REPORT_COLUMNS = (
    'mode', 'scenario', 'seed', 'algorithm', 'attacked', 'episodes', 'profit', 'revenue', 'cost',
    'reward_mean', 'reward_std', 'c1', 'c2', 'violations', 'elec_cost', 'gas_cost',
)
SERIES_COLUMNS = ('algorithm', 'scenario', 'seed', 'episode', 'attacked', 'reward', 'profit')
FORMATS = ('csv', 'json')

_INT_COLUMNS = {'mode', 'scenario', 'seed', 'episodes', 'violations', 'episode'}
_STR_COLUMNS = {'algorithm'}
_BOOL_COLUMNS = {'attacked'}


def _schema(columns: Sequence[str]) -> Dict[str, Any]:
    def dtype(name):
        if name in _INT_COLUMNS:
            return pl.Int64
        if name in _STR_COLUMNS:
            return pl.Utf8
        if name in _BOOL_COLUMNS:
            return pl.Boolean
        return pl.Float64
    return {name: dtype(name) for name in columns}


def _frame(rows: List[Dict[str, Any]], columns: Sequence[str]) -> pl.DataFrame:
    if not rows:
        return pl.DataFrame(schema=_schema(columns))
    return pl.DataFrame([{c: row[c] for c in columns} for row in rows], schema=_schema(columns))


@dataclass
class Report:
    """Results of a matrix run.

    Attributes:
        rows: One record per (mode, scenario, seed) with the ``REPORT_COLUMNS`` keys
        series: Robustness series records (``SERIES_COLUMNS``)
        traces: Hourly dispatch records of every evaluated episode
        meta: Run configuration the report was produced with
    """
    rows: List[Dict[str, Any]] = field(default_factory=list)
    series: List[Dict[str, Any]] = field(default_factory=list)
    traces: List[Dict[str, Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def total_profit(self) -> float:
        return float(sum(row['profit'] for row in self.rows))

    def keys(self) -> List[Tuple[int, int, int]]:
        return [(row['mode'], row['scenario'], row['seed']) for row in self.rows]

    def table(self) -> pl.DataFrame:
        return _frame(self.rows, REPORT_COLUMNS)

    def profit_table(self) -> pl.DataFrame:
        """Seed-mean net profit, one row per scenario and one ``mode<k>`` column per mode."""
        if not self.rows:
            return pl.DataFrame(schema={'scenario': pl.Int64})
        means = (
            self.table()
            .group_by(['scenario', 'mode'])
            .agg(pl.col('profit').mean())
            .sort(['scenario', 'mode'])
        )
        modes = sorted(means['mode'].unique().to_list())
        out = means.select('scenario').unique().sort('scenario')
        for m in modes:
            col = means.filter(pl.col('mode') == m).select(['scenario', pl.col('profit').alias(f'mode{m}')])
            out = out.join(col, on='scenario', how='left')
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rows': self.rows,
            'series': self.series,
            'traces': self.traces,
            'meta': self.meta,
            'aggregate': {'profit': self.total_profit, 'runs': len(self.rows)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Report':
        return cls(
            rows=list(data.get('rows', [])),
            series=list(data.get('series', [])),
            traces=list(data.get('traces', [])),
            meta=dict(data.get('meta', {})),
        )

    @classmethod
    def from_json(cls, text: str) -> 'Report':
        return cls.from_dict(json.loads(text))


def write_frame(frame: pl.DataFrame, path: Path) -> Path:
    try:
        frame.write_csv(path)
    except OSError as exc:
        logger.error(f"cannot write {path}: {exc}")
        raise ReportError(f"cannot write {path}: {exc}") from exc
    return path


def emit(report: Report, out_dir: Union[str, Path], formats: Iterable[str] = FORMATS) -> List[Path]:
    """Write the report files into ``out_dir`` and return their paths.

    Raises:
        ReportError: If the directory cannot be created or a file cannot be written
        ValueError: On an unknown format
    """
    formats = tuple(formats)
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise ValueError(f"unknown report format(s) {unknown}; expected {FORMATS}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        logger.error(f"cannot create output directory {out}: {exc}")
        raise ReportError(f"cannot create output directory {out}: {exc}") from exc

    written: List[Path] = []
    if 'json' in formats:
        path = out / 'report.json'
        try:
            path.write_text(report.to_json(), encoding='utf-8')
        except OSError as exc:
            logger.error(f"cannot write {path}: {exc}")
            raise ReportError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    if 'csv' in formats:
        written.append(write_frame(report.table(), out / 'report.csv'))
        written.append(write_frame(report.profit_table(), out / 'profit_table.csv'))
        written.append(write_frame(_frame(report.series, SERIES_COLUMNS), out / 'robustness_series.csv'))
        written.append(write_frame(pl.DataFrame(report.traces), out / 'dispatch_traces.csv'))

    logger.info(f"Report with {len(report)} runs written to {out}")
    if SIGNAL_SUPPORT:
        report_emitted.send(Report, report=report, paths=written)
    return written


__all__ = ['REPORT_COLUMNS', 'SERIES_COLUMNS', 'FORMATS', 'Report', 'emit', 'write_frame']
