"""Dense column-major datasets: LIBSVM I/O, synthetic generation, spectral helpers.

Columns of ``A`` are the coordinates the solvers work on.  For the regression
families (ridge, elastic net, Lasso) they are features and ``labels`` holds the
targets ``b`` (length ``d``).  For the dual SVM they are samples and ``labels``
holds ``y`` in {-1, +1} (length ``n``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DimensionError, LibsvmFormatError
from .tolerances import TOL

REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True, eq=False)
class Dataset:
    A: np.ndarray
    labels: np.ndarray
    kind: str
    coef: Optional[np.ndarray] = None  # ground truth for synthetic data

    def __post_init__(self):
        A = np.asfortranarray(self.A, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"A must be a non-empty 2-d array, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("A has non-finite entries")
        d, n = A.shape
        if self.kind == REGRESSION:
            if labels.shape != (d,):
                raise ValueError(f"regression targets must have length d={d}")
        elif self.kind == CLASSIFICATION:
            if labels.shape != (n,):
                raise ValueError(f"classification labels must have length n={n}")
            if not np.all(np.abs(labels) == 1.0):
                raise ValueError("classification labels must be exactly +1 or -1")
        else:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        A.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "labels", labels)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def column(self, i):
        return self.A[:, i]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.A.shape == other.A.shape
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def transpose(data: Dataset) -> Dataset:
    """Swap the sample/feature orientation.

    Samples-as-columns (classification) becomes samples-as-rows (regression)
    with the labels reused as targets.  The reverse requires +-1 targets.
    """
    if data.kind == CLASSIFICATION:
        return Dataset(data.A.T, data.labels, REGRESSION)
    return Dataset(data.A.T, data.labels, CLASSIFICATION)


# --------------------------------------------------------------------------- #
# LIBSVM text format

def _parse_libsvm(path):
    samples, labels = [], []
    max_index = 0
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise LibsvmFormatError(lineno, f"bad label {parts[0]!r}") from None
            entries = {}
            for tok in parts[1:]:
                idx, sep, val = tok.partition(":")
                if not sep:
                    raise LibsvmFormatError(lineno, f"expected idx:val, got {tok!r}")
                try:
                    j = int(idx)
                    x = float(val)
                except ValueError:
                    raise LibsvmFormatError(lineno, f"bad entry {tok!r}") from None
                if j < 1:
                    raise LibsvmFormatError(lineno, f"indices are 1-based, got {j}")
                if not np.isfinite(x):
                    raise LibsvmFormatError(lineno, f"non-finite value in {tok!r}")
                entries[j] = x
                max_index = max(max_index, j)
            samples.append(entries)
            labels.append(label)
    if not samples:
        raise LibsvmFormatError(0, "file contains no samples")
    return samples, np.array(labels), max_index


def load_libsvm(path, expected_d=None, orientation="columns") -> Dataset:
    """Load a LIBSVM file into a dense dataset.

    Parameters
    ----------
    path : str or PathLike
    expected_d : int, optional
        Number of features.  Indices above it raise :class:`DimensionError`.
        Defaults to the largest index seen.
    orientation : {"columns", "rows"}
        ``"columns"`` puts each sample in a column (dual SVM layout, labels must
        be +-1).  ``"rows"`` keeps samples as rows (regression layout, labels
        become the targets ``b``).
    """
    samples, labels, max_index = _parse_libsvm(path)
    n_features = max_index if expected_d is None else int(expected_d)
    if max_index > n_features:
        raise DimensionError(f"feature index {max_index} exceeds expected_d={n_features}")
    n_features = max(n_features, 1)
    X = np.zeros((len(samples), n_features))
    for r, entries in enumerate(samples):
        for j, x in entries.items():
            X[r, j - 1] = x
    if orientation == "columns":
        return Dataset(X.T, labels, CLASSIFICATION)
    if orientation == "rows":
        return Dataset(X, labels, REGRESSION)
    raise ValueError(f"orientation must be 'columns' or 'rows', got {orientation!r}")


def write_libsvm(data: Dataset, path) -> None:
    """Write one sample per line; values use repr so a reload is bit-exact."""
    X = data.A.T if data.kind == CLASSIFICATION else data.A
    with open(path, "w") as fh:
        for label, row in zip(data.labels, X):
            nz = np.flatnonzero(row)
            items = " ".join(f"{j + 1}:{float(row[j])!r}" for j in nz)
            fh.write(f"{float(label)!r} {items}".rstrip() + "\n")


# --------------------------------------------------------------------------- #
# synthetic data

@dataclass(frozen=True)
class SyntheticSpec:
    d: int
    n: int
    density: float = 0.1
    noise_std: float = 0.0
    column_scale_spread: float = 0.0
    seed: int = 0
    kind: str = REGRESSION

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")
        if self.noise_std < 0 or self.column_scale_spread < 0:
            raise ValueError("noise_std and column_scale_spread must be nonnegative")
        if self.kind not in (REGRESSION, CLASSIFICATION):
            raise ValueError(f"unknown kind {self.kind!r}")


def gen_synthetic(spec: SyntheticSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((spec.d, spec.n))
    u = rng.uniform(0.0, 1.0, size=spec.n)
    A *= 1.0 + spec.column_scale_spread * u

    if spec.kind == REGRESSION:
        k = max(1, int(round(spec.density * spec.n)))
        support = rng.choice(spec.n, size=k, replace=False)
        coef = np.zeros(spec.n)
        coef[support] = rng.standard_normal(k)
        b = A @ coef
        if spec.noise_std > 0:
            b = b + spec.noise_std * rng.standard_normal(spec.d)
        return Dataset(A, b, REGRESSION, coef=coef)

    k = max(1, int(round(spec.density * spec.d)))
    support = rng.choice(spec.d, size=k, replace=False)
    coef = np.zeros(spec.d)
    coef[support] = rng.standard_normal(k)
    score = A.T @ coef
    y = np.where(score >= 0, 1.0, -1.0)
    return Dataset(A, y, CLASSIFICATION, coef=coef)


# --------------------------------------------------------------------------- #
# spectral quantities

def column_norms_sq(data: Dataset) -> np.ndarray:
    return np.einsum("ij,ij->j", data.A, data.A)


def block_op_norm_sq(data: Dataset, block, rtol=TOL.power_rtol,
                     max_iter=TOL.power_max_iter) -> float:
    """Squared spectral norm of ``A[:, block]`` by power iteration on its Gram matrix."""
    idx = np.asarray(block, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("block must be nonempty")
    cols = data.A[:, idx]
    gram = cols.T @ cols
    scale = float(np.trace(gram))
    if scale == 0.0:
        return 0.0

    def iterate(x):
        x = x / np.linalg.norm(x)
        est = 0.0
        for _ in range(max_iter):
            y = gram @ x
            ny = np.linalg.norm(y)
            if ny <= 1e-300:
                return None
            new = float(x @ y)
            x = y / ny
            if abs(new - est) <= rtol * abs(new):
                return new
            est = new
        return est

    # The all-ones start can be orthogonal to the leading eigenvector (then the
    # iteration settles on a smaller eigenvalue), so a second fixed random start
    # runs as well.  Rayleigh quotients never exceed the top eigenvalue.
    ests = [iterate(np.ones(idx.size))]
    if idx.size > 1:
        ests.append(iterate(np.random.default_rng(0).standard_normal(idx.size)))
    ests = [e for e in ests if e is not None]
    return float(max(ests)) if ests else 0.0

