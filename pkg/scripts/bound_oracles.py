"""High-precision reference values for the closed-form bound calculators.

Evaluates each formula directly with mpmath at 50 digits, with no imports
from the package, and prints the values frozen into tests/test_bounds.py.

    python scripts/bound_oracles.py
"""
import mpmath as mp

mp.mp.dps = 50


def covering_bound_nm(m, ms):
    return mp.e ** m * (1 + mp.mpf(ms) / m) ** m


def upper_rate(logn, p, lam, dim_kappa):
    loglog = mp.log(logn)
    return mp.exp((1 + 1 / (2 * mp.mpf(p))) * loglog) * mp.exp(
        -2 * mp.sqrt(lam / (p * mp.mpf(dim_kappa))) * mp.sqrt(logn)
    )


def upper_rate_interval(logn, p, lam):
    loglog = mp.log(logn)
    return mp.exp((mp.mpf(1) / 2 + 1 / (2 * mp.mpf(p))) * loglog) * mp.exp(
        -2 * mp.sqrt(mp.mpf(lam) / p) * mp.sqrt(logn)
    )


def upper_rate_poisson(logn, p, dim_kappa, chi):
    loglog = mp.log(logn)
    return mp.exp(-(1 - mp.mpf(chi)) * mp.sqrt(2 / (p * mp.mpf(dim_kappa))) * mp.sqrt(logn * loglog))


def lower_rate_poisson(n, p, gap, rate):
    mmax = int(mp.floor(mp.log(n) ** (mp.mpf(2) / 3)))
    best = mp.mpf(0)
    for m in range(1, mmax + 1):
        pmf = mp.e ** (-rate) * mp.mpf(rate) ** m / mp.factorial(m)
        best = max(best, pmf ** (1 / mp.mpf(p)) * mp.mpf(n) ** (-1 / (m * mp.mpf(gap))))
    return mp.mpf(2) ** (-2 - 1 / mp.mpf(p)) * best


def concentration(eps, n, p, lam, k1, diam_alpha):
    eps, n, p, lam = mp.mpf(eps), mp.mpf(n), mp.mpf(p), mp.mpf(lam)
    den = 16 * k1 * mp.e ** lam * diam_alpha ** 2 * n ** (1 - 2 / p) + 4 * lam ** 2 * eps * diam_alpha * n ** (-1 / p)
    return mp.exp(-(eps ** 2) * lam ** 3 / den)


def min_sample_size(eps, p, lam, dim_2kappa):
    return mp.ceil(mp.exp(p * dim_2kappa * mp.log(1 / mp.mpf(eps)) ** 2 / (4 * lam)))


def covering_lower(eps, m, gap):
    return mp.mpf(eps) ** (-m * mp.mpf(gap))


VALUES = {
    "covering_bound_nm(1,10)": covering_bound_nm(1, 10),
    "covering_bound_nm(1,1)": covering_bound_nm(1, 1),
    "covering_bound_nm(3,9)": covering_bound_nm(3, 9),
    "upper_rate(logn=4,p=1,lam=1,dim+k=2)": upper_rate(4, 1, 1, 2),
    "upper_rate_interval(logn=4,p=1,lam=1)": upper_rate_interval(4, 1, 1),
    "upper_rate_poisson(logn=4,p=1,dim+k=2,chi=0)": upper_rate_poisson(4, 1, 2, 0),
    "lower_rate(n=100,p=1,gap=1,poisson(1))": lower_rate_poisson(100, 1, 1, 1),
    "concentration(eps=1,n=100,p=1,lam=1,k1=1,diam+a=2)": concentration(1, 100, 1, 1, 1, 2),
    "min_sample_size(eps=e^-2,p=1,lam=1,dim+2k=1)": min_sample_size(mp.e ** -2, 1, 1, 1),
    "covering_lower(0.1,m=1,gap=0.5)": covering_lower(mp.mpf("0.1"), 1, 0.5),
    "covering_lower(0.1,m=2,gap=1)": covering_lower(mp.mpf("0.1"), 2, 1),
}


if __name__ == "__main__":
    for key, value in VALUES.items():
        print(f"{key:55s} {mp.nstr(value, 20)}")
