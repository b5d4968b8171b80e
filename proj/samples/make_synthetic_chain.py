"""Regenerates synthetic_chain.csv (run from this directory)."""
import numpy as np
from scipy.stats import norm

mu, sigma = np.log(2746.0), 0.05
lo, hi, step = 2000.0, 3500.0, 1.0
p = np.arange(lo, hi + step / 2, step)
edges = np.concatenate(([0.0], (p[1:] + p[:-1]) / 2, [np.inf]))
with np.errstate(divide="ignore"):
    cdf = norm.cdf((np.log(edges) - mu) / sigma)
pi = np.diff(cdf)
pi = np.maximum(pi, 1e-300)
pi /= pi.sum()
rng = np.random.default_rng(7)
mean = p @ pi
rows = ["#timestamp=2019-06-28T15:00:00", "#expiry=2019-07-23", "#underlying_price=%.2f" % mean, "kind,strike,bid,ask"]
rows.append("underlying,,%.2f,%.2f" % (mean - 0.25, mean + 0.25))
for k in np.arange(2500, 3001, 10):
    for kind in ("call", "put"):
        v = np.maximum(p - k, 0) @ pi if kind == "call" else np.maximum(k - p, 0) @ pi
        if v < 0.05:
            continue
        hs = 0.1 + 0.01 * v + 0.2 * rng.random()
        bid = np.floor(max(v - hs, 0.0) * 20) / 20
        ask = np.ceil((v + hs) * 20) / 20
        rows.append("%s,%g,%s,%.2f" % (kind, k, ("%.2f" % bid) if bid > 0 else "", ask))
# a crossed quote and a put without strike, both quarantined on load
rows.append("call,2750,60.00,59.00")
rows.append("put,,3.00,3.50")
open("synthetic_chain.csv", "w").write("\n".join(rows) + "\n")
