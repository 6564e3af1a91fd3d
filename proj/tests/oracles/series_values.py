"""Reference values for the direct-summation tests, 40 significant digits.

Plain mpmath sums over every index up to a cutoff where the omitted terms are
far below 1e-60. Run with `python3 series_values.py`; the printed table is
pasted into tests/test_series.cpp.
"""
from mpmath import mp, mpf, mpc, nstr

mp.dps = 80


def br(q, n):
    return (q**n - 1) / (q - 1)


def zeta(q, s, cut):
    return sum(q**n / br(q, n)**s for n in range(1, cut + 1))


def zeta2(q, a, b, cut, star=False, circ=False):
    tot = 0
    for k1 in range(1, cut + 1):
        o = q**k1 / br(q, k1)**a
        for k2 in range(1, k1 + (1 if star else 0)):
            tot += o * (1 if circ else q**k2) / br(q, k2)**b
    return tot


def mt2(q, a, b, c, cut):
    return sum(q**m1 * q**m2 * q**(m1 + m2) / (br(q, m1)**a * br(q, m2)**b * br(q, m1 + m2)**c)
               for m1 in range(1, cut + 1) for m2 in range(1, cut + 1))


def show(name, v):
    if isinstance(v, mpc):
        print(f'{name:28s} {nstr(v.real, 40)} {nstr(v.imag, 40)}')
    else:
        print(f'{name:28s} {nstr(v, 40)}')


q2, q3, q15 = mpf(2), mpf(3), mpf(3) / 2
show('zeta(2) q=2', zeta(q2, 2, 400))
show('zeta(3) q=2', zeta(q2, 3, 400))
show('zeta(3) q=1.5', zeta(q15, 3, 800))
show('zeta(3+2i) q=2', zeta(q2, mpc(3, 2), 400))
show('zeta(2.5) q=3', zeta(q3, mpf(5) / 2, 300))
show('zeta2(3,2) q=2', zeta2(q2, 3, 2, 160))
show('zeta2*(3,2) q=2', zeta2(q2, 3, 2, 160, star=True))
show('circ(3,1) q=2', zeta2(q2, 3, 1, 160, circ=True))
show('circ*(3,1) q=2', zeta2(q2, 3, 1, 160, star=True, circ=True))
show('zeta2(2,2) q=3', zeta2(q3, 2, 2, 160))
show('mt(2,2;2) q=2', mt2(q2, 2, 2, 2, 90))
