"""Regenerate the bundled 12-stock, 3-sector price fixture.

Returns follow a Laplacian Gaussian model whose graph is block structured:
a random connected graph with strong weights inside each sector, joined
by a few weak inter-sector edges. A common market factor and small
idiosyncratic noise are added, and returns are scaled to daily scale.

    python tools/make_toy_stocks.py [out_dir]
"""

import csv
import datetime as dt
import sys
from pathlib import Path

import numpy as np

from sparselap.datagen import GroundTruthGraph, erdos_renyi_weighted, sample_lggm
from sparselap.laplacian_ops import weights_from_laplacian

SEED = 20240105
SECTORS = ("Energy", "Financials", "Technology")
PER_SECTOR = 4
DAYS = 750


def business_days(start, count):
    day = start
    out = []
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return out


def main(out_dir):
    rng = np.random.default_rng(SEED)
    p = PER_SECTOR * len(SECTORS)
    W = np.zeros((p, p))
    tickers, sectors = [], []
    for s_idx, sector in enumerate(SECTORS):
        block = erdos_renyi_weighted(PER_SECTOR, 0.6, 2.0, 5.0, seed=rng)
        lo = s_idx * PER_SECTOR
        W[lo:lo + PER_SECTOR, lo:lo + PER_SECTOR] = block.adjacency
        for k in range(PER_SECTOR):
            tickers.append(f"{sector[:3].upper()}{k + 1}")
            sectors.append(sector)
    # weak links chaining the sectors together
    for s_idx in range(len(SECTORS) - 1):
        i = s_idx * PER_SECTOR + int(rng.integers(PER_SECTOR))
        j = (s_idx + 1) * PER_SECTOR + int(rng.integers(PER_SECTOR))
        W[i, j] = W[j, i] = rng.uniform(0.2, 0.5)
    graph = GroundTruthGraph(weights_from_laplacian(np.diag(W.sum(axis=1)) - W))
    block_returns = sample_lggm(graph, DAYS, seed=rng).samples
    market = rng.standard_normal((DAYS, 1))
    idio = rng.standard_normal(block_returns.shape)
    returns = 0.01 * (block_returns + 0.5 * market + 0.1 * idio)

    log_prices = np.log(100.0) + np.vstack([np.zeros((1, len(tickers))), np.cumsum(returns, axis=0)])
    prices = np.exp(log_prices)
    dates = business_days(dt.date(2021, 1, 4), DAYS + 1)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "toy_prices.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *tickers])
        for date, row in zip(dates, prices):
            w.writerow([date.isoformat(), *(f"{v:.6f}" for v in row)])
    with open(out / "toy_sectors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "sector"])
        w.writerows(zip(tickers, sectors))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parents[1] / "src" / "sparselap" / "data")
