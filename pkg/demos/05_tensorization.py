"""k^(1/p) S(nk, ka, p) approaches the log-Sobolev constant as k grows."""
from sharpineq import verify as V

out = V.tensorization_limit(2, 1.0, 2.0, 0, ks=(1, 2, 5, 10, 50, 200, 1000, 10000))
print(f"limit {out['limit']:.12f}")
for row in out["rows"]:
    print(f"k={row['k']:6d}  c_k={row['c_k']:.12f}  rel gap {row['rel_gap']:.3e}")
