# cython: language_level=3
"""Compiled sequential kernels.  Signatures mirror ``vekua._kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def scan_backward(double complex[:, ::1] c, double complex[:, ::1] A):
    """``J[:, N] = 0``, ``J[:, j] = A[:, j] + c[:, j] * J[:, j+1]``."""
    cdef Py_ssize_t n = c.shape[0], N = c.shape[1], i, j
    out = np.zeros((n, N + 1), dtype=np.complex128)
    cdef double complex[:, ::1] J = out
    cdef double complex acc
    with nogil:
        for i in range(n):
            acc = 0
            for j in range(N - 1, -1, -1):
                acc = A[i, j] + c[i, j] * acc
                J[i, j] = acc
    return out


def scan_forward(double complex[:, ::1] c, double complex[:, ::1] A):
    """``I[:, 0] = 0``, ``I[:, j+1] = c[:, j] * I[:, j] + A[:, j]``."""
    cdef Py_ssize_t n = c.shape[0], N = c.shape[1], i, j
    out = np.zeros((n, N + 1), dtype=np.complex128)
    cdef double complex[:, ::1] I = out
    cdef double complex acc
    with nogil:
        for i in range(n):
            acc = 0
            for j in range(N):
                acc = c[i, j] * acc + A[i, j]
                I[i, j + 1] = acc
    return out


cdef inline void _rhs(double complex m00, double complex m01, double complex m10,
                      double complex m11, double complex f0, double complex f1,
                      double complex *y, double complex *dy) noexcept nogil:
    # y is 2x3 row-major: columns 0,1 fundamental matrix, column 2 particular
    cdef int col
    for col in range(3):
        dy[col] = m00 * y[col] + m01 * y[3 + col]
        dy[3 + col] = m10 * y[col] + m11 * y[3 + col]
    dy[2] += f0
    dy[5] += f1


def rk4_propagate(double[::1] q_half, double[::1] s_half,
                  double[::1] a, double[::1] b, double delta,
                  double complex alpha, double complex[:, :, ::1] F_half,
                  double h):
    """Classical RK4 for ``Y' = M(t) Y + [0 | F]`` with ``Y(0) = [I | 0]``.

    ``q_half``, ``s_half`` and ``F_half`` are sampled at the ``2*Ns + 1``
    half-step points.  Returns ``Y`` of shape ``(n, Ns + 1, 2, 3)``.
    """
    cdef Py_ssize_t n = a.shape[0], Ns = (q_half.shape[0] - 1) // 2
    cdef Py_ssize_t i, j, r, stage
    out = np.zeros((n, Ns + 1, 2, 3), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] Y = out
    cdef double complex y[6]
    cdef double complex tmp[6]
    cdef double complex k1[6]
    cdef double complex k2[6]
    cdef double complex k3[6]
    cdef double complex k4[6]
    cdef double complex m00, m01, m10, m11, iota = 1j
    cdef double complex alpha_bar = alpha.conjugate()
    cdef double qq, ss
    cdef Py_ssize_t idx
    with nogil:
        for i in range(n):
            for r in range(6):
                y[r] = 0
            y[0] = 1
            y[4] = 1
            for r in range(3):
                Y[i, 0, 0, r] = y[r]
                Y[i, 0, 1, r] = y[3 + r]
            for j in range(Ns):
                for stage in range(4):
                    if stage == 0:
                        idx = 2 * j
                    elif stage == 3:
                        idx = 2 * j + 2
                    else:
                        idx = 2 * j + 1
                    qq = q_half[idx]
                    ss = s_half[idx]
                    m00 = iota * b[i] + ss + (iota * delta - a[i]) * qq
                    m11 = iota * b[i] + ss + (a[i] - iota * delta) * qq
                    m01 = alpha * qq
                    m10 = alpha_bar * qq
                    if stage == 0:
                        _rhs(m00, m01, m10, m11, F_half[i, idx, 0], F_half[i, idx, 1], y, k1)
                        for r in range(6):
                            tmp[r] = y[r] + 0.5 * h * k1[r]
                    elif stage == 1:
                        _rhs(m00, m01, m10, m11, F_half[i, idx, 0], F_half[i, idx, 1], tmp, k2)
                        for r in range(6):
                            tmp[r] = y[r] + 0.5 * h * k2[r]
                    elif stage == 2:
                        _rhs(m00, m01, m10, m11, F_half[i, idx, 0], F_half[i, idx, 1], tmp, k3)
                        for r in range(6):
                            tmp[r] = y[r] + h * k3[r]
                    else:
                        _rhs(m00, m01, m10, m11, F_half[i, idx, 0], F_half[i, idx, 1], tmp, k4)
                for r in range(6):
                    y[r] = y[r] + h / 6.0 * (k1[r] + 2 * k2[r] + 2 * k3[r] + k4[r])
                for r in range(3):
                    Y[i, j + 1, 0, r] = y[r]
                    Y[i, j + 1, 1, r] = y[3 + r]
    return out
