"""Regenerates oracles.json. Independent of the C++ code: scipy densities,
scipy.integrate.quad for Fisher information (score by finite differences of
the log density), brute-force numpy Monte Carlo for Ishigami."""
import json
import math

import numpy as np
from scipy import integrate, stats


def trunc(dist, lo, hi):
    a, b = dist.cdf(lo), dist.cdf(hi)
    z = b - a

    def pdf(x):
        return dist.pdf(x) / z if lo <= x <= hi else 0.0

    def cdf(x):
        return min(max((dist.cdf(x) - a) / z, 0.0), 1.0)

    def ppf(u):
        return float(dist.ppf(a + u * z))

    return pdf, cdf, ppf


def family(name, theta, lo, hi):
    if name == "normal":
        d = stats.norm(theta[0], theta[1])
        return d.pdf, d.cdf, d.ppf
    if name == "trunc_normal":
        return trunc(stats.norm(theta[0], theta[1]), lo, hi)
    if name == "trunc_gumbel":
        return trunc(stats.gumbel_r(theta[0], theta[1]), lo, hi)
    if name == "trunc_lognormal":
        return trunc(stats.lognorm(theta[1], scale=math.exp(theta[0])), lo, hi)
    if name == "triangular":
        m = theta[0]
        d = stats.triang((m - lo) / (hi - lo), loc=lo, scale=hi - lo)
        return d.pdf, d.cdf, d.ppf
    if name == "uniform":
        d = stats.uniform(lo, hi - lo)
        return d.pdf, d.cdf, d.ppf
    raise ValueError(name)


def fisher(name, theta, lo, hi):
    r = len(theta)
    pdf0 = family(name, theta, lo, hi)[0]

    def logpdf(th, x):
        return math.log(family(name, th, lo, hi)[0](x))

    def score(x):
        s = []
        for j in range(r):
            h = 1e-5 * max(1.0, abs(theta[j]))
            tp = list(theta); tp[j] += h
            tm = list(theta); tm[j] -= h
            s.append((logpdf(tp, x) - logpdf(tm, x)) / (2 * h))
        return s

    a = lo if math.isfinite(lo) else theta[0] - 12 * theta[1]
    b = hi if math.isfinite(hi) else theta[0] + 12 * theta[1]
    pts = [theta[0]] if name == "triangular" else None
    m = [[0.0] * r for _ in range(r)]
    for i in range(r):
        for j in range(i, r):
            def integrand(x, i=i, j=j):
                f = pdf0(x)
                if f < 1e-300:
                    return 0.0
                s = score(x)
                return s[i] * s[j] * f

            v, _ = integrate.quad(integrand, a, b, points=pts,
                                  epsabs=0, epsrel=1e-10, limit=400)
            m[i][j] = m[j][i] = v
    return m


CASES = [
    ("normal", [0.0, 1.0], -math.inf, math.inf),
    ("trunc_normal", [30.0, 7.5], 15.0, 75.0),
    ("trunc_gumbel", [1013.0, 558.0], 500.0, 3000.0),
    ("trunc_lognormal", [0.0, 0.76], 0.1, 10.0),
    ("triangular", [50.0], 49.0, 51.0),
    ("uniform", [], -44.9, 63.5),
]


def bound(x):
    return x if math.isfinite(x) else None


def main():
    out = {"distributions": [], "fisher": []}
    for name, theta, lo, hi in CASES:
        pdf, cdf, ppf = family(name, theta, lo, hi)
        if name == "uniform":
            xs = [-40.0, 0.0, 60.0]
        elif name == "normal":
            xs = [-1.5, 0.0, 2.0]
        else:
            xs = [lo + (hi - lo) * f for f in (0.1, 0.35, 0.8)]
        us = [0.05, 0.5, 0.95]
        out["distributions"].append({
            "family": name, "theta": theta, "support": [bound(lo), bound(hi)],
            "x": xs, "pdf": [float(pdf(x)) for x in xs], "cdf": [float(cdf(x)) for x in xs],
            "u": us, "quantile": [float(ppf(u)) for u in us],
        })
        if name != "uniform":
            out["fisher"].append({"family": name, "theta": theta, "support": [bound(lo), bound(hi)],
                                  "matrix": fisher(name, theta, lo, hi)})

    rng = np.random.default_rng(20240917)
    n, chunks = 10_000_000, 10
    ys = []
    for _ in range(chunks):
        x = rng.standard_normal((n // chunks, 3))
        ys.append(np.sin(x[:, 0]) + 7 * np.sin(x[:, 1]) ** 2 + 0.1 * x[:, 2] ** 4 * np.sin(x[:, 0]))
    y = np.concatenate(ys)
    out["ishigami"] = {"samples": n, "quantile_095": float(np.quantile(y, 0.95, method="inverted_cdf")),
                       "mean": float(y.mean()), "analytic_mean": 3.5 * (1 - math.exp(-2))}
    out["flood_nominal"] = (1013 / (300 * 30 * math.sqrt(2e-4 * 5))) ** 0.6
    out["gaussian_toy"] = {"q": float(stats.norm.ppf(0.95)), "q_shift_02": float(stats.norm.ppf(0.95) + 0.2)}
    with open("oracles.json", "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
