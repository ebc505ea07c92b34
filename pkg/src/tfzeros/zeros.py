"""Zeros of entire functions by the argument principle.

Phase increments along sampled curves are accumulated after wrapping to
``(-pi, pi]``; any step whose increment reaches ``GUARD`` is bisected until
all steps are below it. The zero count inside a closed curve is the total
increment over ``2 pi``.

The grid search shares edge increments between neighbouring cells, so cell
counts always add up to the winding number along the domain boundary.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .contours import Polygon, rectangle
from .noise import FieldBatch, NoisyField

GUARD = np.pi / 2
MERGE_RADIUS = 1e-6
JITTER = 0.1
RETRIES = 3
NEWTON_ITERS = 60
# split points of the subdivision; off-center so exact-center zeros do not sit on a cut
_SPLIT = (0.4871, 0.5137)


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    x0: float
    y0: float
    x1: float
    y1: float
    resolution: float = 32.0

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("empty domain")
        if self.resolution < 8:
            raise ValueError("resolution must be at least 8 points per unit length")

    @classmethod
    def square(cls, half_width: float, resolution: float = 32.0, center: complex = 0j) -> "GridSpec":
        c = complex(center)
        return cls(c.real - half_width, c.imag - half_width, c.real + half_width, c.imag + half_width, resolution)

    @property
    def shape(self) -> tuple[int, int]:
        nx = int(math.ceil((self.x1 - self.x0) * self.resolution)) + 1
        ny = int(math.ceil((self.y1 - self.y0) * self.resolution)) + 1
        return ny, nx

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def nodes(self, jitter_level: int = 0):
        """Node coordinates; for ``jitter_level > 0`` interior lines move by up to 10% of a cell."""
        ny, nx = self.shape
        xs = np.linspace(self.x0, self.x1, nx)
        ys = np.linspace(self.y0, self.y1, ny)
        if jitter_level:
            rng = np.random.default_rng(jitter_level)
            hx, hy = xs[1] - xs[0], ys[1] - ys[0]
            xs[1:-1] += JITTER * hx * rng.uniform(-1, 1, nx - 2)
            ys[1:-1] += JITTER * hy * rng.uniform(-1, 1, ny - 2)
        return xs, ys

    def max_modulus(self) -> float:
        return max(abs(complex(x, y)) for x in (self.x0, self.x1) for y in (self.y0, self.y1))

    def contour(self) -> Polygon:
        return rectangle(self.x0, self.y0, self.x1, self.y1)

    def contains(self, z):
        z = np.asarray(z)
        return (z.real >= self.x0) & (z.real <= self.x1) & (z.imag >= self.y0) & (z.imag <= self.y1)


@dataclass
class ZeroSet:
    """Located zeros: complex ``locations`` (TF coordinates for noisy fields)."""

    locations: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray

    @classmethod
    def empty(cls) -> "ZeroSet":
        return cls(np.zeros(0, complex), np.zeros(0, int), np.zeros(0))

    def __len__(self):
        return len(self.locations)

    @property
    def total_count(self) -> int:
        return int(np.sum(self.multiplicities))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "omega", "multiplicity", "residual"])
        for z, m, r in zip(self.locations, self.multiplicities, self.residuals):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), int(m), repr(float(r))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "total_count": self.total_count,
            "zeros": [
                {"tau": float(z.real), "omega": float(z.imag), "multiplicity": int(m), "residual": float(r)}
                for z, m, r in zip(self.locations, self.multiplicities, self.residuals)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --- field adapters -----------------------------------------------------------------


class _CallableField:
    """Adapter giving a plain holomorphic callable the FieldBatch interface."""

    valid_radius = math.inf

    def __init__(self, f, df=None):
        self.f = f
        self.df = df

    def __len__(self):
        return 1

    def subset(self, idx):
        return self

    def normalized(self, z, deriv=False):
        v = self.normalized_at(None, np.ravel(np.asarray(z, dtype=complex)), deriv)
        return (v[0][None, :], v[1][None, :]) if deriv else v[None, :]

    def normalized_at(self, owner, z, deriv=False):
        z = np.asarray(z, dtype=complex)
        if deriv:
            return self.holomorphic_at(owner, z)
        return np.asarray(self.f(z), dtype=complex)

    def holomorphic_at(self, owner, z):
        z = np.asarray(z, dtype=complex)
        f = np.asarray(self.f(z), dtype=complex)
        if self.df is not None:
            return f, np.asarray(self.df(z), dtype=complex)
        h = 1e-6 * (1.0 + np.abs(z))
        return f, (np.asarray(self.f(z + h)) - np.asarray(self.f(z - h))) / (2.0 * h)

    def scale_at(self, z):
        return np.ones(np.shape(z))


def _as_batch(field):
    if isinstance(field, (FieldBatch, _CallableField)):
        return field
    if isinstance(field, NoisyField):
        return FieldBatch.from_fields([field], tf=True)
    if callable(field):
        return _CallableField(field)
    raise TypeError(f"cannot locate zeros of {field!r}")


# --- phase accumulation ---------------------------------------------------------------


def _accumulate_phase(t0, t1, z0, z1, v0, v1, d0, d1, owner, n_owner, point_at, value_at,
                      guard=GUARD, min_dt=1e-13):
    """Sum wrapped phase increments per owner, bisecting unresolved steps.

    ``v`` are field values and ``d`` their derivatives at the segment ends. A
    step is accepted when its wrapped increment and the local phase speed
    ``|f'/f| |dz|`` at both ends are below ``guard``. Returns
    ``(total, failed, where)``; ``where[o]`` is the first parameter interval
    of owner ``o`` that could not be resolved.
    """
    total = np.zeros(n_owner)
    failed = np.zeros(n_owner, dtype=bool)
    where: dict[int, tuple[float, float]] = {}
    while len(t0):
        with np.errstate(divide="ignore", invalid="ignore"):
            speed = np.maximum(np.abs(d0 / v0), np.abs(d1 / v1)) * np.abs(z1 - z0)
        bad = ~(np.isfinite(v0) & np.isfinite(v1)) | (v0 == 0) | (v1 == 0)
        d = np.angle(v1 * np.conj(v0))
        flag = (np.abs(d) >= guard) | ~(speed < guard)
        ok = ~flag & ~bad
        total += np.bincount(owner[ok], weights=d[ok], minlength=n_owner)
        stuck = bad | (flag & ((t1 - t0) < min_dt))
        for j in np.flatnonzero(stuck):
            where.setdefault(int(owner[j]), (float(t0[j]), float(t1[j])))
        failed[owner[stuck]] = True
        ref = flag & ~stuck & ~failed[owner]
        if not ref.any():
            break
        t0, t1, z0, z1, v0, v1, d0, d1, owner = (
            x[ref] for x in (t0, t1, z0, z1, v0, v1, d0, d1, owner))
        tm = 0.5 * (t0 + t1)
        zm = point_at(owner, tm)
        vm, dm = value_at(owner, zm)
        t0, t1 = np.concatenate([t0, tm]), np.concatenate([tm, t1])
        z0, z1 = np.concatenate([z0, zm]), np.concatenate([zm, z1])
        v0, v1 = np.concatenate([v0, vm]), np.concatenate([vm, v1])
        d0, d1 = np.concatenate([d0, dm]), np.concatenate([dm, d1])
        owner = np.concatenate([owner, owner])
    return total, failed, where


def _closed_loop(batch, owners, point_at, n_loops, samples, guard):
    """Phase totals along ``n_loops`` closed curves, ``samples`` initial points each."""
    t = np.arange(samples) / samples
    seg_owner = np.repeat(np.arange(n_loops), samples)
    t0 = np.tile(t, n_loops)
    t1 = np.tile(np.append(t[1:], 1.0), n_loops)
    z0 = point_at(seg_owner, t0)
    z1 = np.roll(z0.reshape(n_loops, samples), -1, axis=1).ravel()
    v0, d0 = batch.normalized_at(owners[seg_owner], z0, deriv=True)
    v1 = np.roll(v0.reshape(n_loops, samples), -1, axis=1).ravel()
    d1 = np.roll(d0.reshape(n_loops, samples), -1, axis=1).ravel()
    return _accumulate_phase(
        t0, t1, z0, z1, v0, v1, d0, d1, seg_owner, n_loops,
        point_at=point_at,
        value_at=lambda o, z: batch.normalized_at(owners[o], z, deriv=True),
        guard=guard,
    )


def _to_winding(total):
    w = total / (2.0 * np.pi)
    r = np.rint(w)
    return r.astype(int), np.abs(w - r) > 1e-3


def _contour_windings(batch, contour, guard=GUARD):
    """Winding numbers of every realization of ``batch`` along ``contour``."""
    n = len(batch)
    M = max(int(contour.discretization), 8)
    total, failed, where = _closed_loop(
        batch, np.arange(n), lambda o, t: contour.point(t), n, M, guard)
    w, off = _to_winding(total)
    return w, failed | off, where


def winding_number(field, contour, guard: float = GUARD) -> int:
    """Number of zeros (with multiplicity) enclosed by ``contour``.

    ``field`` is a :class:`NoisyField` (zeros of its spectrogram, TF plane) or
    any vectorized holomorphic callable.
    """
    batch = _as_batch(field)
    if contour.max_modulus() > batch.valid_radius:
        raise ContourError("contour leaves the validity disc of the noise field")
    w, failed, where = _contour_windings(batch, contour, guard)
    if failed[0]:
        t0, t1 = where.get(0, (float("nan"), float("nan")))
        raise ContourError(
            f"phase could not be resolved on the arc t in [{t0:.6g}, {t1:.6g}] "
            f"(z={complex(contour.point(t0)):.6g}): zero on or too close to the contour"
        )
    return int(w[0])


def winding_numbers(batch: FieldBatch, contour, guard: float = GUARD):
    """Batched :func:`winding_number`; returns ``(counts, failed_mask)``."""
    if contour.max_modulus() > batch.valid_radius:
        raise ContourError("contour leaves the validity disc of the noise field")
    w, failed, _ = _contour_windings(batch, contour, guard)
    return w, failed


# --- localization -------------------------------------------------------------------


def _newton(batch, owner, z0, multiplicity=1, iters=NEWTON_ITERS):
    z = np.array(z0, dtype=complex)
    owner = np.asarray(owner)
    conv = np.zeros(len(z), dtype=bool)
    act = np.ones(len(z), dtype=bool)
    for _ in range(iters):
        if not act.any():
            break
        idx = np.flatnonzero(act)
        f, df = batch.holomorphic_at(owner[idx], z[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = multiplicity * f / df
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        zn = z[idx] - step
        done = (np.abs(step) <= 4e-16 * (1.0 + np.abs(zn))) | (f == 0)
        z[idx] = zn
        conv[idx[done & ~bad]] = True
        act[idx[done | bad]] = False
    return z, conv


def _rect_windings(batch, owner, rects, guard=GUARD, per_side=8):
    """Winding numbers along rectangles ``rects[j] = (x0, x1, y0, y1)`` of realization ``owner[j]``."""
    rects = np.asarray(rects, dtype=float).reshape(-1, 4)
    owner = np.asarray(owner)
    k = len(rects)
    x0, x1, y0, y1 = rects.T
    corners = np.stack([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1, x0 + 1j * y0], axis=1)

    def point_at(o, t):
        side = np.minimum((4.0 * t).astype(int), 3)
        frac = 4.0 * t - side
        a = corners[o, side]
        return a + frac * (corners[o, side + 1] - a)

    total, failed, _ = _closed_loop(batch, owner, point_at, k, 4 * per_side, guard)
    w, off = _to_winding(total)
    return w, failed | off


def _inside(z, x0, x1, y0, y1, margin):
    return (z.real >= x0 - margin) & (z.real <= x1 + margin) & (z.imag >= y0 - margin) & (z.imag <= y1 + margin)


def _subdivide(batch, ridx, box, w, out, depth=0):
    """Split a box holding ``w`` zeros until each piece holds one simple zero.

    Appends ``(location, multiplicity)`` to ``out``; returns False on failure.
    """
    x0, x1, y0, y1 = box
    if max(x1 - x0, y1 - y0) < 0.25 * MERGE_RADIUS or depth > 80:
        # a cluster or a multiple zero: polish with the multiplicity-aware step
        c = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        z, conv = _newton(batch, [ridx], [c], multiplicity=int(w))
        if conv[0] and abs(z[0] - c) < MERGE_RADIUS:
            c = complex(z[0])
        out.append((c, int(w)))
        return True
    fx, fy = _SPLIT if depth % 2 == 0 else _SPLIT[::-1]
    xm = x0 + fx * (x1 - x0)
    ym = y0 + fy * (y1 - y0)
    subs = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
    ws, failed = _rect_windings(batch, np.full(4, ridx), subs)
    if failed.any() or ws.sum() != w or (ws < 0).any():
        return False
    for sub, ws_ in zip(subs, ws):
        if ws_ == 0:
            continue
        if ws_ == 1:
            c = complex(0.5 * (sub[0] + sub[1]), 0.5 * (sub[2] + sub[3]))
            z, conv = _newton(batch, [ridx], [c])
            h = max(sub[1] - sub[0], sub[3] - sub[2])
            if conv[0] and _inside(z, *sub, 1e-9 * h)[0]:
                out.append((complex(z[0]), 1))
                continue
        if not _subdivide(batch, ridx, sub, ws_, out, depth + 1):
            return False
    return True


def _merge(locs, mults):
    locs = list(locs)
    mults = list(mults)
    i = 0
    while i < len(locs):
        j = i + 1
        while j < len(locs):
            if abs(locs[i] - locs[j]) < MERGE_RADIUS:
                mults[i] += mults.pop(j)
                locs.pop(j)
            else:
                j += 1
        i += 1
    return np.array(locs, dtype=complex), np.array(mults, dtype=int)


def _grid_pass(batch, grid: GridSpec, jitter_level: int, guard=GUARD):
    """One scan of every realization in ``batch``; returns a list of ZeroSet or None."""
    n = len(batch)
    xs, ys = grid.nodes(jitter_level)
    ny, nx = len(ys), len(xs)
    Z = xs[None, :] + 1j * ys[:, None]
    V, D = batch.normalized(Z.ravel(), deriv=True)
    V = V.reshape(n, ny, nx)
    D = D.reshape(n, ny, nx)
    failed = np.zeros(n, dtype=bool)
    dead = (V == 0) | ~np.isfinite(V)
    failed |= dead.reshape(n, -1).any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.abs(D / V)

    def edge_increments(sl0, sl1):
        v0, v1 = V[(slice(None),) + sl0], V[(slice(None),) + sl1]
        za, zb = Z[sl0], Z[sl1]
        d = np.angle(v1 * np.conj(v0))
        speed = np.maximum(L[(slice(None),) + sl0], L[(slice(None),) + sl1]) * np.abs(zb - za)
        flag = (np.abs(d) >= guard) | ~(speed < guard)
        flag &= ~failed[:, None, None]
        if flag.any():
            r, i, j = np.nonzero(flag)
            a, b = za[i, j], zb[i, j]
            k = len(r)
            tot, bad, _ = _accumulate_phase(
                np.zeros(k), np.ones(k), a, b,
                v0[r, i, j], v1[r, i, j],
                D[(slice(None),) + sl0][r, i, j], D[(slice(None),) + sl1][r, i, j],
                np.arange(k), k,
                point_at=lambda o, t: a[o] + t * (b[o] - a[o]),
                value_at=lambda o, z: batch.normalized_at(r[o], z, deriv=True),
                guard=guard,
            )
            d[r, i, j] = tot
            failed[r[bad]] = True
        return d

    dH = edge_increments((slice(None), slice(None, -1)), (slice(None), slice(1, None)))
    dV = edge_increments((slice(None, -1), slice(None)), (slice(1, None), slice(None)))
    wf = (dH[:, :-1, :] + dV[:, :, 1:] - dH[:, 1:, :] - dV[:, :, :-1]) / (2.0 * np.pi)
    W = np.rint(wf).astype(int)
    failed |= (np.abs(wf - W) > 1e-3).reshape(n, -1).any(axis=1)
    failed |= (W < 0).reshape(n, -1).any(axis=1)

    # vectorized Newton from the centres of cells holding a single zero
    r, i, j = np.nonzero((W == 1) & ~failed[:, None, None])
    cx = 0.5 * (xs[j] + xs[j + 1])
    cy = 0.5 * (ys[i] + ys[i + 1])
    z, conv = _newton(batch, r, cx + 1j * cy)
    margin = 1e-9 * max(xs[1] - xs[0], ys[1] - ys[0])
    good = conv & _inside(z, xs[j], xs[j + 1], ys[i], ys[i + 1], margin)

    found: list[list] = [[] for _ in range(n)]
    for q in np.flatnonzero(good):
        found[r[q]].append((i[q], j[q], complex(z[q]), 1))
    hard = [(r[q], i[q], j[q], 1) for q in np.flatnonzero(~good)]
    rr, ii, jj = np.nonzero((W >= 2) & ~failed[:, None, None])
    hard += [(a, b, c, W[a, b, c]) for a, b, c in zip(rr, ii, jj)]
    for a, b, c, w in hard:
        if failed[a]:
            continue
        out: list = []
        if not _subdivide(batch, a, (xs[c], xs[c + 1], ys[b], ys[b + 1]), w, out):
            failed[a] = True
            continue
        found[a].extend((b, c, loc, m) for loc, m in out)

    results = []
    for a in range(n):
        if failed[a]:
            results.append(None)
            continue
        items = sorted(found[a], key=lambda it: (it[0], it[1], it[2].real, it[2].imag))
        locs, mults = _merge([it[2] for it in items], [it[3] for it in items])
        owner = np.full(len(locs), a)
        res = np.abs(batch.normalized_at(owner, locs)) if len(locs) else np.zeros(0)
        results.append(ZeroSet(locs, mults, res))
    return results


def find_zeros_batch(batch, grid: GridSpec, retries: int = RETRIES, guard: float = GUARD):
    """Zero sets of every realization; failures (after jittered retries) are ``None``."""
    if grid.max_modulus() > batch.valid_radius:
        raise ContourError("grid domain leaves the validity disc of the noise field")
    results = _grid_pass(batch, grid, 0, guard)
    for level in range(1, retries + 1):
        todo = [a for a, zs in enumerate(results) if zs is None]
        if not todo:
            break
        redo = _grid_pass(batch.subset(todo), grid, level, guard)
        for a, zs in zip(todo, redo):
            results[a] = zs
    return results


def find_zeros(field, grid: GridSpec, retries: int = RETRIES, guard: float = GUARD) -> ZeroSet:
    """All zeros inside ``grid`` with multiplicities.

    For a :class:`NoisyField` the locations are spectrogram zeros in TF
    coordinates; for a callable they are zeros of the callable itself.
    """
    batch = _as_batch(field)
    zs = find_zeros_batch(batch, grid, retries, guard)[0]
    if zs is None:
        raise ContourError(f"zero search failed after {retries} jittered retries")
    return zs


def count_in(zs: ZeroSet, region) -> int:
    """Multiplicity-weighted number of zeros of ``zs`` inside ``region``."""
    if len(zs) == 0:
        return 0
    return int(np.sum(zs.multiplicities[np.asarray(region.contains(zs.locations))]))
