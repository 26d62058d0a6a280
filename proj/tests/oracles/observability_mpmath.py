"""High-precision singular values of the subdomain observation map.

Operator: 1D Dirichlet advection-diffusion -v'' - v' on (0,1), N interior
nodes, centred differences (tridiagonal Toeplitz, closed-form eigenpairs).
Observation: nodes in (0, 0.25], times k/64, k = 1..64, alpha = 1.5.
Columns: unit a-sources then unit b-sources.

Prints sigma_max, sigma_min, the ratio and the full spectrum (log10).
"""
import sys

import mpmath as mp

mp.mp.dps = 250

N = 32
ALPHA = mp.mpf(3) / 2
h = mp.mpf(1) / (N + 1)
diag = 2 / h**2
upper = -1 / h**2 - 1 / (2 * h)   # coefficient of v_{i+1}
lower = -1 / h**2 + 1 / (2 * h)   # coefficient of v_{i-1}


def ml(alpha, beta, z):
    """Series; plenty of guard digits at dps = 250 for |z| <= 5000."""
    total = mp.mpf(0)
    term_k = 0
    while True:
        term = z**term_k / mp.gamma(alpha * term_k + beta)
        total += term
        if term_k > 10 and abs(term) < mp.mpf(10) ** (-mp.mp.dps + 20) * max(1, abs(total)):
            return total
        term_k += 1


def main():
    omega = [i for i in range(N) if (i + 1) * h <= mp.mpf(1) / 4 + mp.mpf(10) ** -12]
    times = [mp.mpf(k) / 64 for k in range(1, 65)]
    r = mp.sqrt(lower / upper)
    s = mp.sqrt(upper * lower)
    lam, right, left = [], [], []
    for k in range(1, N + 1):
        theta = k * mp.pi / (N + 1)
        lam.append(diag + 2 * s * mp.cos(theta))
        right.append([r ** (j + 1) * mp.sin((j + 1) * theta) for j in range(N)])
        left.append([r ** (-(j + 1)) * mp.sin((j + 1) * theta) for j in range(N)])
    norm = [mp.fsum(right[k][j] * left[k][j] for j in range(N)) for k in range(N)]

    rows = []
    for t in times:
        ta = t**ALPHA
        e1 = [ml(ALPHA, 1, -lam[k] * ta) for k in range(N)]
        e2 = [t * ml(ALPHA, 2, -lam[k] * ta) for k in range(N)]
        for i in omega:
            ra = [mp.fsum(e1[k] * right[k][i] * left[k][j] / norm[k] for k in range(N)) for j in range(N)]
            rb = [mp.fsum(e2[k] * right[k][i] * left[k][j] / norm[k] for k in range(N)) for j in range(N)]
            rows.append(ra + rb)
    m = mp.matrix(rows)
    gram = m.T * m
    ev = mp.eigsy(gram, eigvals_only=True)
    sig = sorted((mp.sqrt(abs(x)) for x in ev), reverse=True)
    print("omega_nodes", len(omega), "rows", len(rows))
    print("sigma_max", mp.nstr(sig[0], 17))
    print("sigma_min", mp.nstr(sig[-1], 17))
    print("ratio", mp.nstr(sig[-1] / sig[0], 17))
    print("log10_sigma", " ".join(mp.nstr(mp.log10(x), 6) for x in sig))


if __name__ == "__main__":
    sys.exit(main())
