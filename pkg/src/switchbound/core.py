"""Dense matrix families, vector/operator norms, and product-set enumeration.

A family is a finite list of real n x n matrices together with a norm tag.
Products of at most k factors drawn from the family (the identity counts as
the empty product and is always present) are enumerated breadth-first with
value-based deduplication, each product carrying the index word that
generated it.

Word convention used throughout the package: a word (i0, i1, ..., i_{m-1})
lists factor indices in time order, so the associated matrix is
A[i_{m-1}] @ ... @ A[i0] (the factor applied first sits rightmost).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 12
ENUMERATION_CAP = 200_000
DEDUP_RESOLUTION = 1e-10
DEDUP_REL_TOL = 1e-10


class EnumerationCapError(RuntimeError):
    """Raised when product enumeration would exceed the item cap."""


class FamilyFormatError(ValueError):
    """Raised when a family document cannot be parsed or validated."""


class NormTag(Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "NormTag":
        return _DUAL[self]

    @classmethod
    def parse(cls, text: str) -> "NormTag":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise FamilyFormatError(
                f"unknown norm {text!r}; expected one of 'l1', 'l2', 'linf'"
            ) from None


_DUAL = {NormTag.L1: NormTag.LINF, NormTag.LINF: NormTag.L1, NormTag.L2: NormTag.L2}


def vector_norm(x: np.ndarray, norm: NormTag) -> float:
    """Norm of a vector under the given tag."""
    x = np.asarray(x, dtype=float).ravel()
    if norm is NormTag.L1:
        return float(np.sum(np.abs(x)))
    if norm is NormTag.L2:
        return float(np.sqrt(np.dot(x, x)))
    return float(np.max(np.abs(x))) if x.size else 0.0


def induced_norm(M: np.ndarray, norm: NormTag) -> float:
    """Operator norm of a matrix induced by the given vector norm.

    L1 is the maximum absolute column sum, Linf the maximum absolute row
    sum, and L2 the largest singular value.
    """
    M = np.asarray(M, dtype=float)
    if norm is NormTag.L1:
        return float(np.max(np.sum(np.abs(M), axis=0)))
    if norm is NormTag.LINF:
        return float(np.max(np.sum(np.abs(M), axis=1)))
    return float(np.linalg.norm(M, 2))


def spectral_radius(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(M, dtype=float)))))


def _as_square(entries, n: int | None = None) -> np.ndarray:
    M = np.asarray(entries, dtype=float)
    if M.ndim == 1:
        side = int(round(M.size ** 0.5))
        if side * side != M.size:
            raise FamilyFormatError(f"flat matrix of length {M.size} is not square")
        M = M.reshape(side, side)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise FamilyFormatError(f"matrix shape {M.shape} is not square")
    if n is not None and M.shape[0] != n:
        raise FamilyFormatError(f"matrix is {M.shape[0]}x{M.shape[0]}, expected {n}x{n}")
    if not np.all(np.isfinite(M)):
        raise FamilyFormatError("matrix entries must be finite")
    return M


@dataclass(frozen=True, eq=False)
class MatrixFamily:
    """Finite family of real n x n matrices with a norm tag.

    Members are stored as read-only copies; the object is safe to share.
    """

    members: tuple
    norm: NormTag = NormTag.L1
    labels: tuple | None = None

    def __post_init__(self):
        if not self.members:
            raise ValueError("family needs at least one member")
        mats = []
        n = None
        for raw in self.members:
            M = _as_square(raw, n)
            n = M.shape[0]
            M = M.copy()
            M.flags.writeable = False
            mats.append(M)
        if n > MAX_DIM:
            raise ValueError(f"dimension {n} exceeds the desk-scale guard {MAX_DIM}")
        if self.labels is not None and len(self.labels) != len(mats):
            raise ValueError("labels length must match member count")
        object.__setattr__(self, "members", tuple(mats))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class LabeledProduct:
    """A product matrix plus the index word that generated it (time order)."""

    matrix: np.ndarray
    word: tuple

    @property
    def length(self) -> int:
        return len(self.word)


@dataclass(frozen=True, eq=False)
class ProductSet:
    """All distinct products of at most k family factors, identity included."""

    k: int
    items: tuple
    norm: NormTag

    def __len__(self) -> int:
        return len(self.items)

    def stacked(self) -> np.ndarray:
        """Item matrices as a (Q, n, n) array."""
        return np.stack([it.matrix for it in self.items])

    def max_norm(self) -> float:
        """Largest induced norm over the items (at least 1: identity)."""
        return max(induced_norm(it.matrix, self.norm) for it in self.items)


def word_matrix(family: MatrixFamily, word: Sequence[int]) -> np.ndarray:
    """Product matrix of a time-ordered index word."""
    M = np.eye(family.dim)
    for i in word:
        M = family.members[i] @ M
    return M


def _quantized_key(M: np.ndarray) -> tuple:
    return tuple(np.round(M.ravel() / DEDUP_RESOLUTION).astype(np.int64).tolist())


def _matches(M: np.ndarray, other: np.ndarray, norm_m: float, norm_o: float) -> bool:
    tol = DEDUP_REL_TOL * max(1.0, norm_m, norm_o)
    return bool(np.max(np.abs(M - other)) <= tol)


def enumerate_products(
    family: MatrixFamily, k: int, cap: int = ENUMERATION_CAP
) -> ProductSet:
    """Breadth-first enumeration of products of at most k factors.

    Deduplicates by matrix value (quantized-entry hash plus exact recheck),
    keeping the first word found, which by breadth-first order is a shortest
    one. Raises EnumerationCapError beyond `cap` stored items.
    """
    if k < 0:
        raise ValueError("depth k must be nonnegative")
    n = family.dim
    identity = np.eye(n)
    items = [LabeledProduct(identity, ())]
    norms = [1.0]
    buckets: dict = {_quantized_key(identity): [0]}
    frontier = [0]
    for _ in range(k):
        fresh = []
        for idx in frontier:
            base = items[idx]
            for i, A in enumerate(family.members):
                cand = A @ base.matrix
                cnorm = induced_norm(cand, family.norm)
                key = _quantized_key(cand)
                bucket = buckets.setdefault(key, [])
                if any(_matches(cand, items[j].matrix, cnorm, norms[j]) for j in bucket):
                    continue
                if len(items) >= cap:
                    raise EnumerationCapError(
                        f"product enumeration exceeded cap {cap} at depth "
                        f"{base.length + 1}"
                    )
                cand.flags.writeable = False
                bucket.append(len(items))
                fresh.append(len(items))
                items.append(LabeledProduct(cand, base.word + (i,)))
                norms.append(cnorm)
        if not fresh:
            break
        frontier = fresh
    return ProductSet(k=k, items=tuple(items), norm=family.norm)


def product_levels(
    family: MatrixFamily, k: int, cap: int = ENUMERATION_CAP
) -> list:
    """Distinct product matrices of exactly ell factors, for ell = 1..k.

    Unlike enumerate_products, deduplication is per level only, so a value
    reachable both at length 1 and length 3 appears in both levels. Used by
    growth-rate probes that need exact-length maxima.
    """
    levels = []
    current = []
    seen: dict = {}
    total = 0
    for i, A in enumerate(family.members):
        key = _quantized_key(A)
        bucket = seen.setdefault(key, [])
        nrm = induced_norm(A, family.norm)
        if any(_matches(A, current[j][0], nrm, current[j][1]) for j in bucket):
            continue
        bucket.append(len(current))
        current.append((A, nrm, (i,)))
        total += 1
    levels.append(current)
    for _ in range(1, k):
        nxt = []
        seen = {}
        for M, mnorm, word in current:
            for i, A in enumerate(family.members):
                cand = A @ M
                cnorm = induced_norm(cand, family.norm)
                key = _quantized_key(cand)
                bucket = seen.setdefault(key, [])
                if any(_matches(cand, nxt[j][0], cnorm, nxt[j][1]) for j in bucket):
                    continue
                total += 1
                if total > cap:
                    raise EnumerationCapError(
                        f"per-level product enumeration exceeded cap {cap}"
                    )
                bucket.append(len(nxt))
                nxt.append((cand, cnorm, word + (i,)))
        levels.append(nxt)
        current = nxt
    return levels


def orbit_points(products: ProductSet, x: np.ndarray) -> np.ndarray:
    """Images L @ x over the product set, one row per item, no dedup."""
    x = np.asarray(x, dtype=float).ravel()
    return np.stack([it.matrix @ x for it in products.items])


def load_family(path: str) -> MatrixFamily:
    """Parse a family document (JSON) into a MatrixFamily.

    Required fields: `n` (int), `norm` ("l1"|"l2"|"linf"), `matrices`
    (list of n x n arrays, nested rows or flat row-major). Optional:
    `labels` (list of strings).
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_family(text)


def parse_family(text: str) -> MatrixFamily:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FamilyFormatError(f"family document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FamilyFormatError("family document must be an object")
    for field in ("n", "norm", "matrices"):
        if field not in doc:
            raise FamilyFormatError(f"family document missing field {field!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise FamilyFormatError("field 'n' must be a positive integer")
    norm = NormTag.parse(str(doc["norm"]))
    raw = doc["matrices"]
    if not isinstance(raw, list) or not raw:
        raise FamilyFormatError("field 'matrices' must be a nonempty list")
    mats = [_as_square(m, n) for m in raw]
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != len(mats):
            raise FamilyFormatError("field 'labels' must list one label per matrix")
        labels = tuple(str(s) for s in labels)
    try:
        return MatrixFamily(members=tuple(mats), norm=norm, labels=labels)
    except ValueError as exc:
        raise FamilyFormatError(str(exc)) from None


def dump_family(family: MatrixFamily) -> str:
    """Serialize a family back to its document form (canonical JSON)."""
    doc = {
        "n": family.dim,
        "norm": family.norm.value,
        "matrices": [m.tolist() for m in family.members],
    }
    if family.labels is not None:
        doc["labels"] = list(family.labels)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
