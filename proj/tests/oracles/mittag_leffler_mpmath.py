"""High-precision reference values for E_{alpha,beta}(z).

Evaluates the defining power series with 80-digit arithmetic; the results are
frozen into tests/test_fraccalc.cpp. Run: python3 mittag_leffler_mpmath.py
"""
import mpmath as mp

mp.mp.dps = 80


def ml(alpha, beta, z):
    alpha, beta, z = mp.mpf(alpha), mp.mpf(beta), mp.mpc(z)
    total = mp.mpc(0)
    k = 0
    while True:
        term = z**k * mp.rgamma(alpha * k + beta)
        total += term
        if k > 10 and abs(term) < mp.mpf(10) ** (-60) * max(1, abs(total)):
            break
        k += 1
    return total


CASES = [
    (1.5, 1.0, -1),
    (1.5, 2.0, -1),
    (1.5, 1.0, -8),
    (1.5, 1.0, -12),
    (1.5, 2.0, -12),
    (1.5, 1.0, -30),
    (1.5, 1.0, -50),
    (1.5, 2.0, -50),
    (1.5, 1.0, 20),
    (1.5, 1.0, mp.mpc(-20, 15)),
    (1.25, 1.0, mp.mpc(10, -30)),
    (1.75, 2.0, -45),
    (1.0, 1.0, -40),
    (2.0, 1.0, -40),
    (1.9, 1.0, -25),
    (1.5, 1.0, -4356),
]

if __name__ == "__main__":
    for a, b, z in CASES:
        if abs(mp.mpc(z)) > 200:
            # Series is impractical here; use the algebraic asymptotic tail.
            zz = mp.mpc(z)
            v = -sum(zz ** (-k) * mp.rgamma(b - a * k) for k in range(1, 30))
        else:
            v = ml(a, b, z)
        zc = complex(z)
        print(f"{{{a}, {b}, {{{zc.real!r}, {zc.imag!r}}}, {{{mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)}}}}},")
