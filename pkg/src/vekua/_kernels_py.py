"""Pure numpy versions of the sequential kernels in ``_kernels.pyx``.

Loops run over time steps; every step is vectorized across systems.
"""
import numpy as np


def scan_backward(c, A):
    """``J[:, N] = 0``, ``J[:, j] = A[:, j] + c[:, j] * J[:, j+1]``."""
    n, N = c.shape
    J = np.zeros((n, N + 1), dtype=complex)
    for j in range(N - 1, -1, -1):
        J[:, j] = A[:, j] + c[:, j] * J[:, j + 1]
    return J


def scan_forward(c, A):
    """``I[:, 0] = 0``, ``I[:, j+1] = c[:, j] * I[:, j] + A[:, j]``."""
    n, N = c.shape
    I = np.zeros((n, N + 1), dtype=complex)
    for j in range(N):
        I[:, j + 1] = c[:, j] * I[:, j] + A[:, j]
    return I


def rk4_propagate(q_half, s_half, a, b, delta, alpha, F_half, h):
    """Classical RK4 for ``Y' = M(t) Y + [0 | F]`` with ``Y(0) = [I | 0]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    Ns = (len(q_half) - 1) // 2
    alpha = complex(alpha)
    Y = np.zeros((n, Ns + 1, 2, 3), dtype=complex)
    y = np.zeros((n, 2, 3), dtype=complex)
    y[:, 0, 0] = 1.0
    y[:, 1, 1] = 1.0
    Y[:, 0] = y

    def rhs(idx, state):
        qq, ss = q_half[idx], s_half[idx]
        M = np.empty((n, 2, 2), dtype=complex)
        M[:, 0, 0] = 1j * b + ss + (1j * delta - a) * qq
        M[:, 1, 1] = 1j * b + ss + (a - 1j * delta) * qq
        M[:, 0, 1] = alpha * qq
        M[:, 1, 0] = np.conj(alpha) * qq
        d = M @ state
        d[:, :, 2] += F_half[:, idx, :]
        return d

    for j in range(Ns):
        k1 = rhs(2 * j, y)
        k2 = rhs(2 * j + 1, y + 0.5 * h * k1)
        k3 = rhs(2 * j + 1, y + 0.5 * h * k2)
        k4 = rhs(2 * j + 2, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        Y[:, j + 1] = y
    return Y
