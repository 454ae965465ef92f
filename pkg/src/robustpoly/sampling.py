"""Sample generation on the cube: point draws under the uniform and
Chebyshev measures, noise and outlier injection, and fixed-point rounding."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .polynomial import MultiPoly, coeff_abs_sum, evaluate_many


@dataclass(frozen=True)
class Truth:
    poly: MultiPoly
    inlier_flags: np.ndarray  # True where |y - p(x)| <= sigma was enforced


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray                 # (M, n) in [-1,1]^n
    labels: np.ndarray                 # (M,)
    truth: Optional[Truth] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lab = np.asarray(self.labels, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array")
        if lab.shape != (pts.shape[0],):
            raise ValueError("labels must align with points")
        if pts.size and (pts.min() < -1.0 or pts.max() > 1.0):
            raise ValueError("points must lie in [-1,1]^n")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]


# ---------------------------------------------------------------------------
# Adversaries: decide outlier labels (and, for the indistinguishable pair,
# everything) after seeing all sample locations.
# ---------------------------------------------------------------------------

class ConstBlowup:
    """Outliers get +/-K, alternating in sample order.

    K defaults to 1e3 * (1 + sum|coeffs| of the target) so the corruption
    dwarfs any inlier value.
    """

    def __init__(self, magnitude: float | None = None):
        self.magnitude = magnitude

    def corrupt(self, points, true_values, outlier_mask, rng):
        k = self.magnitude
        if k is None:
            k = 1e3 * (1.0 + np.abs(true_values).max(initial=0.0))
        idx = np.flatnonzero(outlier_mask)
        signs = np.where(np.arange(len(idx)) % 2 == 0, 1.0, -1.0)
        out = true_values.copy()
        out[idx] = signs * k
        return out

    @staticmethod
    def for_poly(p: MultiPoly) -> "ConstBlowup":
        return ConstBlowup(1e3 * (1.0 + coeff_abs_sum(p)))


class SignFlipExtreme:
    """Outliers get -scale * (true value)."""

    def __init__(self, factor: float = 10.0):
        self.factor = factor

    def corrupt(self, points, true_values, outlier_mask, rng):
        out = true_values.copy()
        out[outlier_mask] = -self.factor * true_values[outlier_mask]
        return out


class PairIndistinguishable:
    """Label by a secret pick p' from {f, g} outside the distinguishable box
    and by the truth inside it; the pick is fixed per labelling pass."""

    def __init__(self, f: MultiPoly, g: MultiPoly, region: tuple[np.ndarray, np.ndarray]):
        lo = np.asarray(region[0], dtype=float)
        hi = np.asarray(region[1], dtype=float)
        if lo.min() < -1.0 or hi.max() > 1.0 or np.any(lo > hi):
            raise ValueError("region must be a box inside the cube")
        self.f, self.g = f, g
        self.lo, self.hi = lo, hi

    def in_region(self, points: np.ndarray) -> np.ndarray:
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)

    def relabel(self, points, true_values, rng) -> np.ndarray:
        secret = self.f if rng.random() < 0.5 else self.g
        out = evaluate_many(secret, points)
        inside = self.in_region(points)
        out[inside] = true_values[inside]
        return out


Adversary = Callable  # duck-typed: ConstBlowup / SignFlipExtreme / PairIndistinguishable


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 0.0
    rho: float = 0.0
    adversary: object = field(default_factory=ConstBlowup)
    precision_bits: Optional[int] = None
    worst_case_inliers: bool = False  # +/-sigma alternating instead of uniform

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not 0.0 <= self.rho < 0.5:
            raise ValueError(f"rho must lie in [0, 0.5), got {self.rho}")
        if self.precision_bits is not None:
            if self.precision_bits < 1:
                raise ValueError("precision_bits must be >= 1")
            if self.sigma < 2.0 ** (-self.precision_bits):
                raise ValueError(
                    f"sigma={self.sigma} below precision floor 2^-{self.precision_bits}"
                )


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def draw_points(dist: str, M: int, n: int, seed) -> np.ndarray:
    """i.i.d. points: 'uniform' on the cube, or 'chebyshev' via x = cos(pi*U)."""
    if M < 0:
        raise ValueError("M must be non-negative")
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        return rng.uniform(-1.0, 1.0, size=(M, n))
    if dist == "chebyshev":
        return np.cos(np.pi * rng.random(size=(M, n)))
    raise ValueError(f"unknown distribution {dist!r}")


def label_points(points: np.ndarray, p: MultiPoly, model: NoiseModel, seed) -> SampleSet:
    """Label points by p under the noise model.

    Each sample is independently an outlier with probability rho; inliers get
    p(x) plus noise bounded by sigma, outliers whatever the adversary picks.
    The pair adversary instead relabels every point itself.
    """
    rng = np.random.default_rng(seed)
    pts = np.asarray(points, dtype=float)
    true_values = evaluate_many(p, pts)
    M = len(true_values)

    if isinstance(model.adversary, PairIndistinguishable):
        labels = model.adversary.relabel(pts, true_values, rng)
        inliers = np.abs(labels - true_values) <= model.sigma + 1e-12
        return SampleSet(pts, labels, Truth(p, inliers))

    outlier_mask = rng.random(M) < model.rho
    if model.worst_case_inliers:
        noise = model.sigma * np.where(np.arange(M) % 2 == 0, 1.0, -1.0)
    else:
        noise = rng.uniform(-model.sigma, model.sigma, size=M)
    labels = true_values + noise
    if outlier_mask.any():
        labels = model.adversary.corrupt(pts, true_values, outlier_mask, rng)
        labels[~outlier_mask] = true_values[~outlier_mask] + noise[~outlier_mask]
    return SampleSet(pts, labels, Truth(p, ~outlier_mask))


def round_bits(s: SampleSet, bits: int) -> SampleSet:
    """Round coordinates and labels to the nearest multiple of 2^-bits
    (ties to even), clamping points back into the cube."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    q = 2.0**bits
    pts = np.clip(np.round(s.points * q) / q, -1.0, 1.0)
    labels = np.round(s.labels * q) / q
    return SampleSet(pts, labels, s.truth)


def subset(s: SampleSet, mask: np.ndarray) -> SampleSet:
    truth = None
    if s.truth is not None:
        truth = Truth(s.truth.poly, s.truth.inlier_flags[mask])
    return SampleSet(s.points[mask], s.labels[mask], truth)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def save_csv(s: SampleSet, path) -> None:
    n = s.n
    header = [f"x{i + 1}" for i in range(n)] + ["y"]
    flags = None
    if s.truth is not None:
        header.append("is_outlier")
        flags = ~s.truth.inlier_flags
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(s)):
            row = [f"{v:.17g}" for v in s.points[i]] + [f"{s.labels[i]:.17g}"]
            if flags is not None:
                row.append(str(bool(flags[i])).lower())
            w.writerow(row)


def load_csv(path) -> SampleSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    has_flag = header and header[-1] == "is_outlier"
    coord_cols = [h for h in header if h.startswith("x")]
    n = len(coord_cols)
    if n == 0 or "y" not in header:
        raise ValueError(f"{path}: line 1: expected header x1,...,xn,y[,is_outlier]")
    width = n + 1 + (1 if has_flag else 0)
    pts, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise ValueError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
        try:
            vals = [float(v) for v in row[: n + 1]]
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
        pts.append(vals[:n])
        labels.append(vals[n])
    return SampleSet(np.asarray(pts).reshape(-1, n), np.asarray(labels))


def samples_to_json(s: SampleSet) -> str:
    obj = {"points": s.points.tolist(), "labels": s.labels.tolist()}
    if s.truth is not None:
        obj["is_outlier"] = (~s.truth.inlier_flags).tolist()
    return json.dumps(obj)


def samples_from_json(text: str) -> SampleSet:
    obj = json.loads(text)
    return SampleSet(np.asarray(obj["points"], dtype=float), np.asarray(obj["labels"], dtype=float))
