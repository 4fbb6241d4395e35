"""Embedding parameter search driven by the closed-form similarity model.

Per block, the quality cost of forcing the coefficient pair onto a
lattice point is a smooth rational function of the first shift eps once
the second shift is eliminated through the lattice constraint. Its
stationarity condition collapses to a quadratic in eps (the cubic terms
cancel), so the best shift for a given lattice index k is found exactly;
only two candidate indices, the integers bracketing the unconstrained
optimum, need to be examined.

Image-level optimization comes in two flavors. The disjoint mode solves
each block independently. The windowed modes slide a measurement window
across the plane, jointly pick, per window, one of each covered block's
frozen (k, eps) candidates by enumerating every combination, and then let
each block take the majority lattice index over the votes it collected
and average the eps proposals that came with that index; the second
shift is recomputed afterwards so the lattice constraint stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import ImagePlane, dct2, idct2, partition_blocks
from .metric import (DEFAULT_CONSTANTS, SsimConstants, gaussian_window,
                     perturbation_constant, validate_coeff_pair,
                     window_positions)
from .qim import (DEFAULT_PAIR, BlockSolution, EmbedConfig,
                  lattice_multiplier, sigma_from_eps)

# Leading quadratic coefficients below this are treated as degenerate and
# handed to the bracketed scan.
DEGENERATE_COEFF = 1e-12

# Half-width of the eps bracket used by scans and grid oracles, as a
# multiple of the strength.
EPS_SPAN_STRENGTHS = 8.0


@dataclass(frozen=True)
class Objective:
    """Block similarity as a function of the first shift and lattice index."""

    coeffs: np.ndarray
    strength: float
    bit: int
    pair: tuple = DEFAULT_PAIR
    constants: SsimConstants = field(default_factory=SsimConstants)

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square coefficient block, got {arr.shape}")
        object.__setattr__(self, "coeffs", arr)
        pair = validate_coeff_pair(self.pair, arr.shape[0])
        object.__setattr__(self, "pair", pair)
        if not (self.strength > 0 and math.isfinite(self.strength)):
            raise ValueError("strength must be a positive finite number")
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit!r}")
        object.__setattr__(self, "coeff_a", float(arr[pair[0]]))
        object.__setattr__(self, "coeff_b", float(arr[pair[1]]))
        object.__setattr__(self, "constant",
                           perturbation_constant(arr, self.constants))

    def value(self, eps: float, k: int) -> float:
        """Model similarity at (eps, k); -inf where the model degenerates."""
        sigma = sigma_from_eps(eps, k, self.bit, self.strength,
                               self.coeff_a, self.coeff_b)
        pen = eps * eps + sigma * sigma
        den = pen + 2.0 * eps * self.coeff_a + 2.0 * sigma * self.coeff_b \
            + self.constant
        if den <= 0.0:
            return -math.inf
        return 1.0 - pen / den

    def values(self, eps: np.ndarray, k: int) -> np.ndarray:
        """Vectorized :meth:`value` over an eps array."""
        sigma = eps - self._gap(k)
        pen = eps * eps + sigma * sigma
        den = pen + 2.0 * eps * self.coeff_a + 2.0 * sigma * self.coeff_b \
            + self.constant
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1.0 - pen / den
        return np.where(den > 0.0, out, -np.inf)

    def _gap(self, k: int) -> float:
        # sigma = eps - gap, where gap is the lattice target minus the
        # current pair difference.
        return lattice_multiplier(k, self.bit) * self.strength \
            - self.coeff_a + self.coeff_b


def candidate_ks(objective: Objective, radius: int = 1) -> list:
    """Lattice indices nearest the unconstrained optimum.

    The pair difference would stay untouched at the real-valued index
    k* = ((Xa - Xb) / S - offset) / 2 with offset +1/2 for a one bit and
    -1/2 for a zero bit. Returns the 2 * radius integers closest to k*,
    ordered by distance (ties toward the smaller index).
    """
    if radius < 1:
        raise ValueError("radius must be at least 1")
    diff = objective.coeff_a - objective.coeff_b
    offset = 0.5 if objective.bit else -0.5
    k_star = (diff / objective.strength - offset) / 2.0
    base = math.floor(k_star)
    pool = range(base - radius, base + radius + 2)
    ranked = sorted(pool, key=lambda k: (abs(k - k_star), k))
    return ranked[:2 * radius]


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-6):
    """Golden-section maximization on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def _scan_eps(objective: Objective, k: int):
    """Bracketed scan fallback: 0.01-step grid plus golden refinement."""
    span = EPS_SPAN_STRENGTHS * objective.strength
    count = int(round(2.0 * span / 0.01)) + 1
    grid = np.linspace(-span, span, count)
    vals = objective.values(grid, k)
    i = int(np.argmax(vals))
    best_eps, best_val = float(grid[i]), float(vals[i])
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, count - 1)])
    eps_g, val_g = _golden_max(lambda e: objective.value(e, k), lo, hi)
    if val_g > best_val:
        return eps_g, val_g
    return best_eps, best_val


def best_eps_for_k(objective: Objective, k: int):
    """Best first shift for a fixed lattice index, by the exact quadratic.

    Writing sigma = eps - gap and the cross term as a linear function
    p * eps + q, the stationary points of the similarity solve

        p * eps^2 + 2 q * eps - (gap * q + p * gap^2 / 2) = 0.

    The discriminant is algebraically nonnegative, so with p away from
    zero both stationary points are real; the one with the larger
    similarity is the global optimum. Degenerate leading coefficients
    fall back to a bracketed scan. Returns (eps, value).
    """
    gap = objective._gap(k)
    p = 2.0 * (objective.coeff_a + objective.coeff_b)
    q = objective.constant - 2.0 * gap * objective.coeff_b
    if abs(p) < DEGENERATE_COEFF:
        if q > DEGENERATE_COEFF:
            eps = gap / 2.0
            return eps, objective.value(eps, k)
        return _scan_eps(objective, k)
    disc = q * q + p * gap * q + 0.5 * (p * gap) ** 2
    disc = max(disc, 0.0)
    root = math.sqrt(disc)
    sign = 1.0 if q >= 0.0 else -1.0
    folded = -(q + sign * root)
    if folded == 0.0:
        roots = [0.0]
    else:
        const_term = -(gap * q + 0.5 * p * gap * gap)
        roots = [folded / p, const_term / folded]
    best_eps, best_val = None, -math.inf
    for eps in roots:
        val = objective.value(eps, k)
        if val > best_val:
            best_eps, best_val = eps, val
    if not math.isfinite(best_val):
        return _scan_eps(objective, k)
    return best_eps, best_val


def optimize_block(objective: Objective, radius: int = 1) -> BlockSolution:
    """Best (eps, sigma, k) for one block over the candidate indices."""
    best = None
    for k in candidate_ks(objective, radius):
        eps, val = best_eps_for_k(objective, k)
        if best is None or val > best[2]:
            best = (k, eps, val)
    k, eps, val = best
    sigma = sigma_from_eps(eps, k, objective.bit, objective.strength,
                           objective.coeff_a, objective.coeff_b)
    return BlockSolution(eps=float(eps), sigma=float(sigma), k=int(k),
                         bit=objective.bit, local_ssim=float(val))


@dataclass(frozen=True)
class SurfaceSample:
    """One grid point of the similarity surface."""

    k: int
    eps: float
    ssim: float


def ssim_surface(objective: Objective, eps_values, k_values) -> list:
    """Similarity sampled on a grid, lattice-index major, eps ascending."""
    eps_sorted = sorted(float(e) for e in eps_values)
    k_sorted = sorted(int(k) for k in k_values)
    return [SurfaceSample(k=k, eps=e, ssim=objective.value(e, k))
            for k in k_sorted for e in eps_sorted]


@dataclass(frozen=True)
class WindowVote:
    """One window's winning proposal for the blocks it covers."""

    position: tuple
    proposals: dict
    window_ssim: float


@dataclass(frozen=True)
class ImageSolutions:
    """Per-block embedding decisions plus their mean model similarity."""

    solutions: list
    mean_block_ssim: float


@dataclass(frozen=True)
class _Candidate:
    k: int
    eps: float
    sigma: float
    value: float
    delta: np.ndarray


def _pair_basis(pair, n: int = 4):
    unit_a = np.zeros((n, n))
    unit_a[pair[0]] = 1.0
    unit_b = np.zeros((n, n))
    unit_b[pair[1]] = 1.0
    return idct2(unit_a), idct2(unit_b)


def _block_objectives(image: ImagePlane, payload, cfg: EmbedConfig):
    blocks = partition_blocks(image)
    bh, bw = blocks.shape[:2]
    bits = np.asarray(payload, dtype=np.uint8).reshape(bh, bw)
    objectives = [[Objective(dct2(blocks[p, q]), cfg.strength,
                             int(bits[p, q]), cfg.pair, cfg.constants)
                   for q in range(bw)] for p in range(bh)]
    return objectives, bh, bw


def _optimize_non_overlapped(image: ImagePlane, payload,
                             cfg: EmbedConfig) -> ImageSolutions:
    objectives, bh, bw = _block_objectives(image, payload, cfg)
    grid = []
    total = 0.0
    for p in range(bh):
        row = []
        for q in range(bw):
            sol = optimize_block(objectives[p][q], cfg.k_search_radius)
            row.append(sol)
            total += sol.local_ssim
        grid.append(row)
    return ImageSolutions(solutions=grid, mean_block_ssim=total / (bh * bw))


def _frozen_candidates(objectives, cfg: EmbedConfig):
    """Per block, the candidate list with pixel-domain shift patterns."""
    base_a, base_b = _pair_basis(cfg.pair)
    out = []
    for row in objectives:
        out_row = []
        for obj in row:
            entries = []
            for k in candidate_ks(obj, cfg.k_search_radius):
                eps, val = best_eps_for_k(obj, k)
                sigma = sigma_from_eps(eps, k, obj.bit, obj.strength,
                                       obj.coeff_a, obj.coeff_b)
                entries.append(_Candidate(
                    k=k, eps=eps, sigma=sigma, value=val,
                    delta=eps * base_a + sigma * base_b))
            out_row.append(entries)
        out.append(out_row)
    return out


class _ChoiceTables:
    """Cached enumeration of candidate-index combinations per window."""

    MAX_COMBINATIONS = 1 << 22

    def __init__(self):
        self._cache = {}

    def get(self, counts: tuple) -> np.ndarray:
        table = self._cache.get(counts)
        if table is None:
            if math.prod(counts) > self.MAX_COMBINATIONS:
                raise ValueError(
                    "window candidate enumeration too large "
                    f"({math.prod(counts)} combinations); lower the "
                    "search radius or use a smaller window")
            grids = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
            table = np.stack([g.ravel() for g in grids], axis=1)
            self._cache[counts] = table
        return table


def _window_votes(image: ImagePlane, candidates, cfg: EmbedConfig):
    """Slide the mode's window, jointly choosing candidates per window.

    For every window the similarity of each candidate combination is
    computed from precomputed intersection sums: block shift patterns
    have disjoint pixel support, so window statistics are additive in
    per-block terms and each combination costs only a handful of adds.

    Returns (votes, records): per-block vote lists of (eps, k, window
    similarity), plus one :class:`WindowVote` per window position.
    """
    x = image.samples
    h, w = x.shape
    positions, n = window_positions(cfg.mode, h, w)
    weights = gaussian_window() if cfg.mode.kind == "gauss" else None
    c1 = cfg.constants.c1
    c2 = cfg.constants.c2
    tables = _ChoiceTables()
    bh = h // 4
    bw = w // 4
    votes = [[[] for _ in range(bw)] for _ in range(bh)]
    records = []
    for (top, left) in positions:
        r0, r1 = max(top, 0), min(top + n, h)
        c0, c1_ = max(left, 0), min(left + n, w)
        covered = [(p, q)
                   for p in range(r0 // 4, (r1 - 1) // 4 + 1)
                   for q in range(c0 // 4, (c1_ - 1) // 4 + 1)]
        per_block = []
        for (p, q) in covered:
            entries = candidates[p][q]
            br0, br1 = max(r0, 4 * p), min(r1, 4 * p + 4)
            bc0, bc1 = max(c0, 4 * q), min(c1_, 4 * q + 4)
            xs = x[br0:br1, bc0:bc1]
            if weights is None:
                ws = None
            else:
                ws = weights[br0 - top:br1 - top, bc0 - left:bc1 - left]
            t1 = np.empty(len(entries))
            t2 = np.empty(len(entries))
            txd = np.empty(len(entries))
            for ci, cand in enumerate(entries):
                d = cand.delta[br0 - 4 * p:br1 - 4 * p,
                               bc0 - 4 * q:bc1 - 4 * q]
                if ws is None:
                    t1[ci] = d.sum()
                    t2[ci] = (d * d).sum()
                    txd[ci] = (xs * d).sum()
                else:
                    t1[ci] = (ws * d).sum()
                    t2[ci] = (ws * d * d).sum()
                    txd[ci] = (ws * xs * d).sum()
            per_block.append((t1, t2, txd))
        choices = tables.get(tuple(len(candidates[p][q]) for (p, q) in covered))
        total1 = np.zeros(choices.shape[0])
        total2 = np.zeros(choices.shape[0])
        totalxd = np.zeros(choices.shape[0])
        for j, (t1, t2, txd) in enumerate(per_block):
            idx = choices[:, j]
            total1 += t1[idx]
            total2 += t2[idx]
            totalxd += txd[idx]
        if weights is None:
            n2 = n * n
            win = x[r0:r1, c0:c1_]
            sx = win.sum()
            sxx = (win * win).sum()
            sy = sx + total1
            syy = sxx + 2.0 * totalxd + total2
            sxy = sxx + totalxd
            mx = sx / n2
            my = sy / n2
            vx = (sxx - sx * mx) / (n2 - 1)
            vy = (syy - sy * my) / (n2 - 1)
            cov = (sxy - sx * my) / (n2 - 1)
        else:
            win = x[r0:r1, c0:c1_]
            win_w = weights[r0 - top:r1 - top, c0 - left:c1_ - left]
            mx = (win_w * win).sum()
            exx = (win_w * win * win).sum()
            my = mx + total1
            eyy = exx + 2.0 * totalxd + total2
            exy = exx + totalxd
            vx = exx - mx * mx
            vy = eyy - my * my
            cov = exy - mx * my
        lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1)
        cs = (2.0 * cov + c2) / (vx + vy + c2)
        vals = lum * cs
        ibest = int(np.argmax(vals))
        wssim = float(vals[ibest])
        proposals = {}
        for j, (p, q) in enumerate(covered):
            cand = candidates[p][q][int(choices[ibest, j])]
            proposals[(p, q)] = (cand.eps, cand.k)
            votes[p][q].append((cand.eps, cand.k, wssim))
        records.append(WindowVote(position=(top, left), proposals=proposals,
                                  window_ssim=wssim))
    return votes, records


def _aggregate_votes(objectives, votes) -> ImageSolutions:
    """Reduce window votes to one (eps, k) per block.

    The majority lattice index wins; the final eps is the mean of the
    eps proposals attached to that index. Votes for a losing index are
    dropped rather than blended in, since their eps values target a
    different lattice point and pulling the shift toward them moves it
    off every candidate optimum at once.
    """
    bh = len(objectives)
    bw = len(objectives[0])
    grid = []
    total = 0.0
    for p in range(bh):
        row = []
        for q in range(bw):
            obj = objectives[p][q]
            block_votes = votes[p][q]
            if not block_votes:
                raise RuntimeError(f"block ({p}, {q}) received no window votes")
            tallies = {}
            for (_, k, wssim) in block_votes:
                count, acc = tallies.get(k, (0, 0.0))
                tallies[k] = (count + 1, acc + wssim)
            # majority index; ties resolved by higher mean window
            # similarity, then by the smaller index
            k = min(tallies,
                    key=lambda kk: (-tallies[kk][0],
                                    -tallies[kk][1] / tallies[kk][0], kk))
            agreeing = [v[0] for v in block_votes if v[1] == k]
            eps = math.fsum(agreeing) / len(agreeing)
            sigma = sigma_from_eps(eps, k, obj.bit, obj.strength,
                                   obj.coeff_a, obj.coeff_b)
            val = obj.value(eps, k)
            sol = BlockSolution(eps=float(eps), sigma=float(sigma), k=int(k),
                                bit=obj.bit, local_ssim=float(val))
            row.append(sol)
            total += sol.local_ssim
        grid.append(row)
    return ImageSolutions(solutions=grid, mean_block_ssim=total / (bh * bw))


def optimize_image(image: ImagePlane, payload,
                   cfg: EmbedConfig) -> ImageSolutions:
    """Embedding decisions for every block under the configured mode."""
    image.require_block_aligned()
    if cfg.mode.kind == "non":
        return _optimize_non_overlapped(image, payload, cfg)
    objectives, bh, bw = _block_objectives(image, payload, cfg)
    candidates = _frozen_candidates(objectives, cfg)
    votes, _ = _window_votes(image, candidates, cfg)
    return _aggregate_votes(objectives, votes)
