"""High-precision reference eigenvalues for the test suite.

Integrates beta(theta) (1 - cos^E P_l(cos) - sin^E P_l(sin)) over |theta| <= pi/4
directly with mpmath (no polynomial rewriting), beta = |theta|^(-1-2s).
"""
import mpmath as mp

mp.mp.dps = 40


def lam(n, l, s):
    E = 2 * n + l

    def f(t):
        c, sn = mp.cos(t), mp.sin(t)
        val = 1 - c**E * mp.legendre(l, c) - sn**E * mp.legendre(l, sn)
        if E == 0:
            val += 1
        return t ** (-1 - 2 * s) * val

    return 2 * mp.quad(f, [0, mp.mpf("1e-8"), mp.mpf("1e-4"), mp.mpf("1e-2"), mp.pi / 8, mp.pi / 4])


if __name__ == "__main__":
    for s in ("0.25", "0.5", "0.75"):
        for n, l in [(0, 2), (2, 0), (1, 2), (0, 5), (3, 2), (0, 8), (4, 0), (2, 4)]:
            print(f"    {{{s}, {n}, {l}, {mp.nstr(lam(n, l, mp.mpf(s)), 20)}}},")
