"""Brute-force reference values for the F1, F2a, F2b fixtures.

Deliberately written as plain loops over Python floats with no numpy and no
import from ``hdct``, so it stays an independent check on the vectorized code.
Run from this directory to regenerate ``golden.json``:

    python make_golden.py

The fixture CSVs themselves were drawn once as closed log-normal rows
(numpy seed 20240607, group F2b with a drift of 0.3 per component) and are
committed as data.
"""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent
ALPHA = 0.05


def load(name):
    rows = []
    for line in (HERE / name).read_text().splitlines():
        if line.strip():
            rows.append([float(c) for c in line.split(",")])
    return rows


def clr(rows):
    out = []
    for row in rows:
        logs = [math.log(v) for v in row]
        g = sum(logs) / len(logs)
        out.append([v - g for v in logs])
    return out


def col_means(y):
    n, p = len(y), len(y[0])
    return [sum(y[k][i] for k in range(n)) / n for i in range(p)]


def covariance(groups, divisor):
    """Pooled covariance with deviations from each group's own mean."""
    p = len(groups[0][0])
    cov = [[0.0] * p for _ in range(p)]
    for y in groups:
        m = col_means(y)
        for row in y:
            for i in range(p):
                for j in range(p):
                    cov[i][j] += (row[i] - m[i]) * (row[j] - m[j])
    for i in range(p):
        for j in range(p):
            cov[i][j] /= divisor
    return cov


def corr_trace_sq(cov):
    p = len(cov)
    total = 0.0
    for i in range(p):
        for j in range(p):
            total += cov[i][j] ** 2 / (cov[i][i] * cov[j][j])
    return total


def normal_sf(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gumbel_sf(x):
    return 1.0 - math.exp(-math.exp(-x / 2.0) / math.sqrt(math.pi))


def one_sample(y):
    n, p = len(y), len(y[0])
    ybar = col_means(y)
    cov = covariance([y], n)
    tr = corr_trace_sq(cov)
    quad = 0.0
    for i in range(p):
        quad += ybar[i] ** 2 / cov[i][i]
    t_sum = (n * quad - (n - 1) * p / (n - 3)) / math.sqrt(2.0 * (tr - p * p / (n - 1)))
    raw = 0.0
    for i in range(p):
        raw = max(raw, n * ybar[i] ** 2 / cov[i][i])
    t_max = raw - 2.0 * math.log(p) + math.log(math.log(p))
    return finish(t_sum, raw, t_max, {
        "mean": ybar,
        "var_diag": [cov[i][i] for i in range(p)],
        "corr_trace_sq": tr,
        "cpn": 1.0,
    })


def two_sample(y1, y2):
    n1, n2, p = len(y1), len(y2), len(y1[0])
    big_n = n1 + n2
    m1, m2 = col_means(y1), col_means(y2)
    d = [m1[i] - m2[i] for i in range(p)]
    cov = covariance([y1, y2], big_n)
    tr = corr_trace_sq(cov)
    cpn = 1.0 + tr / p**1.5
    scale = n1 * n2 / big_n
    quad = 0.0
    for i in range(p):
        quad += d[i] ** 2 / cov[i][i]
    num = scale * quad - (big_n - 2) * p / (big_n - 4)
    t_sum = num / math.sqrt(2.0 * (tr - p * p / (big_n - 2)) * cpn)
    raw = 0.0
    for i in range(p):
        raw = max(raw, scale * d[i] ** 2 / cov[i][i])
    t_max = raw - 2.0 * math.log(p) + math.log(math.log(p))
    return finish(t_sum, raw, t_max, {
        "mean": d,
        "var_diag": [cov[i][i] for i in range(p)],
        "corr_trace_sq": tr,
        "cpn": cpn,
    })


def finish(t_sum, raw, t_max, moments):
    p_sum = normal_sf(t_sum)
    p_max = gumbel_sf(t_max)
    t_com = min(p_sum, p_max)
    return {
        "moments": moments,
        "sum": {"statistic": t_sum, "pvalue": p_sum},
        "max": {"statistic": t_max, "raw": raw, "pvalue": p_max},
        "com": {"statistic": t_com, "pvalue": 1.0 - (1.0 - t_com) ** 2},
    }


def main():
    f1 = clr(load("F1.csv"))
    f2a = clr(load("F2a.csv"))
    f2b = clr(load("F2b.csv"))
    golden = {
        "alpha": ALPHA,
        "F1": one_sample(f1),
        "F2": two_sample(f2a, f2b),
    }
    (HERE / "golden.json").write_text(json.dumps(golden, indent=2) + "\n")


if __name__ == "__main__":
    main()
