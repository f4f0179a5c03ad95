"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's assembly code: operators are built from
explicit 2x2 Kronecker products, the frame rotation from a matrix
exponential, orbit counts from string manipulation and time evolution from
fixed-step matrix exponentials.
"""

import itertools

import numpy as np
import scipy.linalg

# single-site matrices in the (bit 0, bit 1) = (down, up) ordering
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
N_UP = np.array([[0, 0], [0, 1]], dtype=complex)
SPLUS = np.array([[0, 0], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def site_op(L, k, op):
    """``op`` on site k (bit k); site L-1 is the leftmost Kronecker factor."""
    out = np.eye(1, dtype=complex)
    for j in reversed(range(L)):
        out = np.kron(out, op if j == k else I2)
    return out


def dense_h_spin(L, omega, delta, beta):
    H = np.zeros((1 << L, 1 << L), dtype=complex)
    for k in range(L):
        H += omega * site_op(L, k, SX) + delta * site_op(L, k, N_UP)
        H += beta * site_op(L, k, N_UP) @ site_op(L, (k + 1) % L, N_UP)
    return H


def dense_rotation(L):
    """prod_k exp(-i pi/4 sigma_y^(k))."""
    u1 = scipy.linalg.expm(-1j * np.pi / 4 * SY)
    out = np.eye(1, dtype=complex)
    for _ in range(L):
        out = np.kron(out, u1)
    return out


def dense_shift(L):
    """Permutation moving the content of site k to site k+1."""
    n = 1 << L
    P = np.zeros((n, n))
    for a in range(n):
        bits = [(a >> k) & 1 for k in range(L)]
        moved = [bits[(k - 1) % L] for k in range(L)]
        P[sum(b << k for k, b in enumerate(moved)), a] = 1
    return P


def bracelet_count(L):
    """Number of binary strings of length L up to rotation and reflection."""
    seen = set()
    for bits in itertools.product("01", repeat=L):
        s = "".join(bits)
        images = []
        for r in range(L):
            t = s[r:] + s[:r]
            images += [t, t[::-1]]
        seen.add(min(images))
    return len(seen)


def fixed_step_propagate(psi0, hamiltonian_at, T, dt=1e-4):
    """Exponential midpoint rule with a fixed step; ``hamiltonian_at(t)`` is dense."""
    steps = int(round(T / dt))
    h = T / steps
    psi = np.array(psi0, dtype=complex)
    for i in range(steps):
        psi = scipy.linalg.expm(-1j * h * hamiltonian_at((i + 0.5) * h)) @ psi
    return psi
