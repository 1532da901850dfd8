#!/usr/bin/env python3
"""Two-point iteration of the projective action of diag(lam, 1/lam) on the
circle R/Z (t -> line at angle pi*t), in 60-digit arithmetic.

Prints the finite-n exponent surrogate (tail max of log(d_n/eps)/n over
n >= nMax/2, discarding pairs that ever separate beyond 0.25) at the
attracting direction 0 and the repelling direction 1/2.
"""
import mpmath as mp

mp.mp.dps = 60


def act(lam, t):
    x, y = mp.cos(mp.pi * t), mp.sin(mp.pi * t)
    return mp.atan2(y / lam, lam * x) / mp.pi


def circ(a, b):
    d = (a - b) % 1
    return min(d, 1 - d)


def exponent(lam, p, n_max, eps):
    best, any_ok = None, False
    for side in (1, -1):
        a, b = mp.mpf(p), mp.mpf(p) + side * mp.mpf(eps)
        tail, sat = None, False
        for n in range(1, n_max + 1):
            a, b = act(lam, a), act(lam, b)
            d = max(circ(a, b), mp.mpf("1e-300"))
            if d > mp.mpf("0.25"):
                sat = True
            an = mp.log(d / eps) / n
            if n >= n_max // 2:
                tail = an if tail is None else max(tail, an)
        if not sat:
            any_ok = True
            best = tail if best is None else max(best, tail)
    return (best if any_ok else mp.mpf(0)), not any_ok


if __name__ == "__main__":
    print("analytic -2 ln 2 =", mp.nstr(-2 * mp.log(2), 12))
    for p in (0, mp.mpf(1) / 2):
        v, sat = exponent(2, p, 200, mp.mpf("1e-8"))
        print(f"p={mp.nstr(p, 3)} exponent={mp.nstr(v, 12)} allSaturated={sat}")
    # Lipschitz constant of the action: derivative lam^2 at the repeller.
    h = mp.mpf("1e-20")
    print("slope at repeller =", mp.nstr((act(2, mp.mpf(0.5) + h) - act(2, mp.mpf(0.5) - h)) / (2 * h), 12))
