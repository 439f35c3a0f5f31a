"""Closing-price tables to log-returns and a sample covariance.

Prices are comma-separated UTF-8 text with a header ``date,TICKER1,...``
and ISO-8601 dates in the first column. Sector files have the header
``ticker,sector``.
"""

import csv
import datetime as dt
import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .objective import SampleCovariance

logger = logging.getLogger(__name__)


class IngestError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class PriceMatrix:
    dates: tuple
    tickers: tuple
    prices: np.ndarray

    @property
    def T(self):
        return self.prices.shape[0]

    @property
    def p(self):
        return self.prices.shape[1]


def _parse_price(cell):
    try:
        value = float(cell)
    except ValueError:
        return None
    if not math.isfinite(value) or value <= 0:
        return None
    return value


def load_prices(path, drop_bad_rows=False):
    """Read and validate a closing-price table.

    Parameters
    ----------
    path : str or Path
    drop_bad_rows : bool
        Drop rows with a missing, unparseable, or non-positive price
        instead of raising.

    Returns
    -------
    PriceMatrix

    Raises
    ------
    IngestError
        Empty file, duplicate tickers, malformed or non-increasing dates,
        ragged rows, or (without ``drop_bad_rows``) a bad price cell.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise IngestError(f"{path}: empty file")

    header = [cell.strip() for cell in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise IngestError(f"{path}: header must be 'date,TICKER1,...'")
    tickers = header[1:]
    dupes = sorted(t for t, count in Counter(tickers).items() if count > 1)
    if dupes:
        raise IngestError(f"{path}: duplicate ticker(s): {', '.join(dupes)}")
    if any(not t for t in tickers):
        raise IngestError(f"{path}: empty ticker name in header")

    dates, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise IngestError(f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise IngestError(f"{path}: line {lineno}: bad date {row[0]!r}") from None
        parsed = [_parse_price(cell.strip()) for cell in row[1:]]
        bad = [t for t, v in zip(tickers, parsed) if v is None]
        if bad:
            if drop_bad_rows:
                logger.info("dropping %s (line %d): bad price for %s", date, lineno, bad[0])
                continue
            cell = row[1 + tickers.index(bad[0])]
            raise IngestError(f"{path}: line {lineno} ({date}): bad price {cell!r} for {bad[0]}")
        if dates and date <= dates[-1]:
            raise IngestError(f"{path}: line {lineno}: date {date} does not follow {dates[-1]}")
        dates.append(date)
        values.append(parsed)

    if not dates:
        raise IngestError(f"{path}: no valid price rows")
    return PriceMatrix(tuple(dates), tuple(tickers), np.array(values, dtype=float))


def load_sectors(path, tickers=None):
    """Read a ``ticker,sector`` file.

    When ``tickers`` is given, the file must cover exactly that set and the
    labels are returned in that order; otherwise in file order.

    Returns
    -------
    list of (ticker, sector)
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise IngestError(f"{path}: empty file")
    header = [cell.strip().lower() for cell in rows[0]]
    if header != ["ticker", "sector"]:
        raise IngestError(f"{path}: header must be 'ticker,sector'")
    mapping = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise IngestError(f"{path}: line {lineno} has {len(row)} fields, expected 2")
        ticker, sector = row[0].strip(), row[1].strip()
        if ticker in mapping:
            raise IngestError(f"{path}: duplicate ticker {ticker}")
        mapping[ticker] = sector
    if tickers is None:
        return list(mapping.items())
    missing = [t for t in tickers if t not in mapping]
    if missing:
        raise IngestError(f"{path}: no sector for ticker(s): {', '.join(missing)}")
    extra = [t for t in mapping if t not in set(tickers)]
    if extra:
        raise IngestError(f"{path}: ticker(s) not in price table: {', '.join(extra)}")
    return [(t, mapping[t]) for t in tickers]


def log_returns(prices):
    """Day-over-day natural-log returns, shape ``(T - 1, p)``."""
    P = prices.prices if isinstance(prices, PriceMatrix) else np.asarray(prices, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2:
        raise ValueError("need at least two price rows")
    return np.diff(np.log(P), axis=0)


def covariance_from_returns(X, demean=True, standardize=False):
    """``(1/n) X^T X`` over returns, optionally after centering columns.

    ``standardize`` additionally scales each column to unit variance, i.e.
    returns the correlation matrix; constant columns are left at zero.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"returns must be 2-D, got shape {X.shape}")
    n = X.shape[0]
    if n < (2 if demean else 1):
        raise ValueError(f"too few rows ({n}) to build a covariance")
    if demean:
        X = X - X.mean(axis=0)
    if standardize:
        scale = np.sqrt((X ** 2).mean(axis=0))
        X = X / np.where(scale > 0, scale, 1.0)
    S = X.T @ X / n
    S = 0.5 * (S + S.T)
    return SampleCovariance(S, n=n)
