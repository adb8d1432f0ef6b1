"""Independent reference values used by several test modules."""
import math


def bessel_j_series(n: int, x: float, terms: int = 80) -> float:
    """Plain ascending series of J_n for moderate real x."""
    h = 0.5 * x
    out = []
    term = h ** n / math.factorial(n)
    for m in range(terms):
        out.append(term)
        term *= -h * h / ((m + 1) * (m + 1 + n))
    return math.fsum(out)


def bessel_y0_series(x: float, terms: int = 80) -> float:
    h = 0.5 * x
    j, s, term, harm = [], [], 1.0, 0.0
    for m in range(terms):
        j.append(term)
        s.append(harm * term)
        term *= -h * h / ((m + 1) ** 2)
        harm += 1.0 / (m + 1)
    J0 = math.fsum(j)
    return (2 / math.pi) * ((math.log(h) + 0.5772156649015329) * J0 - math.fsum(s))


def bisect(f, a: float, b: float, tol: float = 1e-13) -> float:
    fa = f(a)
    assert fa * f(b) < 0
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def bessel_zero(n: int, lo: float, hi: float) -> float:
    return bisect(lambda x: bessel_j_series(n, x), lo, hi)


def two_disk_multipole_det(k: complex, radius: float = 1.0, gap: float = 2.0, M: int = 30) -> complex:
    """Multiple-scattering determinant for the exterior Neumann problem of two disks.

    Independent of the boundary-integral code: built from Bessel addition
    theorems.  Its zeros are the exterior resonances.
    """
    import numpy as np
    from scipy.special import h1vp, hankel1, jvp

    m = np.arange(-M, M + 1)
    d = m[:, None] - m[None, :]
    R = gap + 2 * radius
    T = jvp(m, k * radius) / h1vp(m, k * radius)
    G12 = hankel1(d, k * R) * np.exp(0.5j * np.pi * d)
    G21 = G12 * np.exp(1j * np.pi * d)
    I = np.eye(m.size)
    A = np.block([[I, T[:, None] * G12], [T[:, None] * G21, I]])
    return complex(np.linalg.det(A))


def newton_root(f, z0: complex, h: float = 1e-6, tol: float = 1e-12, max_iter: int = 50) -> complex:
    z = complex(z0)
    for _ in range(max_iter):
        fz = f(z)
        step = fz / ((f(z + h) - f(z - h)) / (2 * h))
        z -= step
        if abs(step) < tol:
            return z
    raise RuntimeError("oracle Newton did not converge")
