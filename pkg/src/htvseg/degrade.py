"""Blur kernels, the degradation operator, and synthetic noise.

The degradation model is f = A(g) + eta, where A is either the identity or
a circular (periodic) convolution with a normalized blur kernel, and eta is
zero-mean Gaussian noise. Convolutions run in the frequency domain through
the kernel's transfer function, which is the FFT of the kernel zero-padded
to the grid and circularly shifted so its center tap sits at index (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Transfer-function magnitudes below this count as a zero of the operator.
KERNEL_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class BlurKernel:
    """Nonnegative, unit-sum convolution kernel with odd dimensions."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 2:
            raise ValueError("kernel taps must be a 2-D array")
        if taps.shape[0] % 2 == 0 or taps.shape[1] % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {taps.shape}")
        if np.any(taps < 0):
            raise ValueError("kernel taps must be nonnegative")
        if abs(taps.sum() - 1.0) > 1e-12:
            raise ValueError(f"kernel taps must sum to 1, got {taps.sum()!r}")
        object.__setattr__(self, "taps", taps)

    @property
    def rows(self) -> int:
        return self.taps.shape[0]

    @property
    def cols(self) -> int:
        return self.taps.shape[1]


def gaussian_kernel(s: int, sigma_g: float) -> BlurKernel:
    """Sampled isotropic Gaussian on an s-by-s grid, normalized to sum 1.

    Parameters
    ----------
    s : odd kernel size in pixels.
    sigma_g : standard deviation of the Gaussian, > 0.
    """
    if s < 1 or s % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 1, got {s}")
    if sigma_g <= 0:
        raise ValueError(f"sigma_g must be positive, got {sigma_g}")
    r = s // 2
    x = np.arange(-r, r + 1, dtype=float)
    g1 = np.exp(-(x * x) / (2.0 * sigma_g * sigma_g))
    taps = np.outer(g1, g1)
    return BlurKernel(taps / taps.sum())


def motion_kernel(length: float, theta_deg: float) -> BlurKernel:
    """Linear motion blur: a straight segment of the given pixel length
    through the kernel center at angle ``theta_deg``, rasterized by
    depositing ceil(length) evenly spaced unit samples with bilinear
    weights and normalizing.

    An axis-aligned integer length L therefore yields exactly L taps of
    value 1/L; theta 90 is the transpose of theta 0.
    """
    if length < 1:
        raise ValueError(f"motion length must be >= 1, got {length}")
    n_samples = int(np.ceil(length))
    theta = np.deg2rad(theta_deg)
    di, dj = np.sin(theta), np.cos(theta)

    if n_samples == 1:
        t = np.zeros(1)
    else:
        half = (length - 1.0) / 2.0
        t = np.linspace(-half, half, n_samples)

    r = int(np.ceil((length - 1.0) / 2.0)) + 1
    size = 2 * r + 1
    acc = np.zeros((size, size))
    for tk in t:
        yi, xj = r + tk * di, r + tk * dj
        # Snap to the lattice so e.g. cos(90 deg) = 6e-17 leaves no ghost taps.
        if abs(yi - round(yi)) < 1e-9:
            yi = round(yi)
        if abs(xj - round(xj)) < 1e-9:
            xj = round(xj)
        i0, j0 = int(np.floor(yi)), int(np.floor(xj))
        fi, fj = yi - i0, xj - j0
        acc[i0, j0] += (1 - fi) * (1 - fj)
        acc[i0, j0 + 1] += (1 - fi) * fj
        acc[i0 + 1, j0] += fi * (1 - fj)
        acc[i0 + 1, j0 + 1] += fi * fj

    # Trim zero borders symmetrically so the center tap stays centered.
    nz_i, nz_j = np.nonzero(acc)
    ri = max(abs(nz_i - r).max(), 0)
    rj = max(abs(nz_j - r).max(), 0)
    acc = acc[r - ri : r + ri + 1, r - rj : r + rj + 1]
    return BlurKernel(acc / acc.sum())


def _transfer_function(kernel: BlurKernel, shape: tuple[int, int]) -> np.ndarray:
    """FFT of the kernel embedded on the grid with its center at (0, 0)."""
    m, n = shape
    if kernel.rows > m or kernel.cols > n:
        raise ValueError(f"kernel {kernel.taps.shape} larger than grid {shape}")
    psf = np.zeros(shape)
    ci, cj = kernel.rows // 2, kernel.cols // 2
    for a in range(kernel.rows):
        for b in range(kernel.cols):
            psf[(a - ci) % m, (b - cj) % n] += kernel.taps[a, b]
    return np.fft.fft2(psf)


@dataclass(frozen=True)
class LinearOperatorA:
    """Degradation operator: identity or periodic convolution on a fixed grid."""

    kind: str
    shape: tuple[int, int]
    kernel: BlurKernel | None = None
    transfer: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def identity(shape: tuple[int, int]) -> "LinearOperatorA":
        return LinearOperatorA(
            kind="identity", shape=tuple(shape), kernel=None,
            transfer=np.ones(shape, dtype=complex),
        )

    @staticmethod
    def convolution(kernel: BlurKernel, shape: tuple[int, int]) -> "LinearOperatorA":
        return LinearOperatorA(
            kind="convolution", shape=tuple(shape), kernel=kernel,
            transfer=_transfer_function(kernel, tuple(shape)),
        )

    @property
    def invertible(self) -> bool:
        """True when no transfer coefficient vanishes (trivial kernel/null space)."""
        return bool(np.min(np.abs(self.transfer)) > KERNEL_SINGULAR_TOL)

    def _check_shape(self, g: np.ndarray):
        if g.shape != self.shape:
            raise ValueError(f"field shape {g.shape} does not match operator grid {self.shape}")


def apply(A: LinearOperatorA, g: np.ndarray) -> np.ndarray:
    """Apply the degradation operator: A(g)."""
    g = np.asarray(g, dtype=float)
    A._check_shape(g)
    if A.kind == "identity":
        return g.copy()
    return np.real(np.fft.ifft2(A.transfer * np.fft.fft2(g)))


def apply_adjoint(A: LinearOperatorA, u: np.ndarray) -> np.ndarray:
    """Apply the adjoint operator, <A g, u> = <g, A* u>."""
    u = np.asarray(u, dtype=float)
    A._check_shape(u)
    if A.kind == "identity":
        return u.copy()
    return np.real(np.fft.ifft2(np.conj(A.transfer) * np.fft.fft2(u)))


def add_gaussian_noise(g: np.ndarray, variance: float, seed: int) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of the given variance.

    The result is not clipped; observed images may leave [0, 1]. The same
    seed always produces the same noise field.
    """
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    g = np.asarray(g, dtype=float)
    if variance == 0:
        return g.copy()
    rng = np.random.default_rng(seed)
    return g + rng.normal(0.0, np.sqrt(variance), size=g.shape)


def save_kernel(kernel: BlurKernel, path) -> None:
    """Write a kernel as plain text: 'rows cols' header, then row-major taps."""
    with open(path, "w") as fh:
        fh.write(f"{kernel.rows} {kernel.cols}\n")
        for row in kernel.taps:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_kernel(path) -> BlurKernel:
    """Read a kernel written by :func:`save_kernel`."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"malformed kernel file {path!r}")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = [float(tok) for tok in tokens[2:]]
    if len(values) != rows * cols:
        raise ValueError(f"kernel file {path!r} holds {len(values)} taps, expected {rows * cols}")
    return BlurKernel(np.array(values).reshape(rows, cols))
