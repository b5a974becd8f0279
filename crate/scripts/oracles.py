"""High-precision reference values frozen into the Rust test suites.

Run with `python3 scripts/oracles.py`; requires mpmath.
"""

from mpmath import mp, mpf, mpc, exp, log, pi, sqrt, findroot, kleinj, sinh, cos, loggamma, floor

mp.dps = 50

CURVES = {
    # label: (j numerator, j denominator, log |N Delta_min|, degree)
    "11a1": (-122023936, 161051, 5 * log(11), 1),
    "11a3": (-4096, 11, log(11), 1),
    "37a1": (110592, 37, log(37), 1),
    "15a1": (111284641, 50625, log(50625), 1),
}


def delta(tau, terms=2000):
    q = exp(2j * pi * tau)
    p = mpf(1)
    for n in range(1, terms + 1):
        p *= 1 - q**n
    return q * p**24


def tau_from_j(j):
    target = j / 1728
    if j < 0:
        f = lambda t: (kleinj(mpc(0.5, t)) - target).real
        t = findroot(f, 1.0 + abs(log(-j)) / 6)
        return mpc(0.5, t)
    if j >= 1728:
        f = lambda t: (kleinj(mpc(0, t)) - target).real
        return mpc(0, findroot(f, 1.05))
    f = lambda a: (kleinj(exp(1j * a)) - target).real
    return exp(1j * findroot(f, 1.8))


def faltings(taus, log_norm_disc, degree):
    s = sum(log(abs(delta(t)) * (2 * pi) ** 12 * t.imag**6) for t in taus)
    return log_norm_disc / (12 * degree) - s / (12 * degree)


def bost_integral(tau):
    y = tau.imag
    return log(2 * y) / 4 + log(abs(delta(tau))) / 24


def serre_f(p):
    p = mpf(p)
    lp = log(p)
    h = max(mpf(1000), pi * sqrt(p) / 6 + lp + 7 * lp**2 / (4 * sqrt(p)) + mpf("2.95"))
    return 2 * sqrt(mpf(2) / 3) * 1778 * (h + 4 * lp + mpf("2.4") + mpf("0.5") * log(h)) / p


if __name__ == "__main__":
    print("Delta(rho) =", delta(mpc(0.5, sqrt(3) / 2)))
    print("Delta(i)   =", delta(mpc(0, 1)))
    for label, (num, den, ld, deg) in CURVES.items():
        tau = tau_from_j(mpf(num) / den)
        hF = faltings([tau], ld, deg)
        print(label, "tau =", mp.nstr(tau.real, 20), mp.nstr(tau.imag, 20),
              "h_F =", mp.nstr(hF, 20), "bost_integral =", mp.nstr(bost_integral(tau), 20))
    for p in (3094026, 3094027, 3094028):
        print("f(%d) =" % p, mp.nstr(serre_f(p), 25))
    print("sinh(pi)/cos(pi/12) =", sinh(pi) / cos(pi / 12))
    for s in (2, 10, 1000):
        print("u_%d =" % s, exp(s * log(4) + 2 * loggamma(s) - loggamma(2 * s)))
