"""
Eigenvalue braids along parameter loops.

Strands are continued through phi by exact minimal-cost matching, the final
permutation is read off by matching the end of the loop against its start,
and the braid word in B4 comes from the order changes of the strands in a
planar projection.

Words are lists of signed ints: +i is sigma_i, -i its inverse (i = 1, 2, 3).
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from catastrophe import parallel_map
from config import Config, get_logger, resolve
from errors import (
    AmbiguousMatchingError,
    ArgumentError,
    BraidResolutionError,
    LoopTouchesDegeneracyError,
)
from loops import LoopSpec, loop_point
from parammap import forward_map
from spectral import solve_depressed_quartic

logger = get_logger("braid")

PROJECTIONS = ("imag", "real")

RootsAt = Callable[[float], np.ndarray]


# =========================
# Types
# =========================
@dataclass
class StrandSet:
    """Strand-continuous eigenvalues.

    values[i, k] is strand k at phis[i] (the loop's sample grid); path_phis /
    path_values also hold every refined intermediate step. Strand k starts at
    position k of the projection order.
    """
    phis: np.ndarray
    values: np.ndarray
    path_phis: np.ndarray
    path_values: np.ndarray
    min_gap: float
    scale: float
    projection: str = "imag"

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        for phi, vals in zip(self.phis, self.values):
            for k, lam in enumerate(vals):
                out.append({"phi": float(phi), "strand": k + 1,
                            "re_lambda": float(lam.real), "im_lambda": float(lam.imag)})
        return out


@dataclass
class BraidResult:
    strands: StrandSet
    permutation: Tuple[int, ...]
    word: List[int]
    min_gap: float
    exponent_sum: int = 0
    raw_word: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "word": list(self.word),
            "permutation": [p + 1 for p in self.permutation],
            "exponent_sum": self.exponent_sum,
            "letters": len(self.word),
            "unreduced_letters": len(self.raw_word),
            "min_gap": self.min_gap,
            "scale": self.strands.scale,
            "projection": self.strands.projection,
            "n_samples": len(self.strands.phis) - 1,
        }


# =========================
# Helpers
# =========================
def _min_gap(vals: Sequence[complex]) -> float:
    return min(abs(a - b) for a, b in itertools.combinations(vals, 2))


def _ranked_matchings(reference: Sequence[complex], vals: Sequence[complex]) -> List[Tuple[float, Tuple[int, ...]]]:
    """All 4! assignments, cheapest first; perm[k] is the index in vals matched to reference[k]."""
    ranked = []
    for perm in itertools.permutations(range(len(vals))):
        cost = sum(abs(vals[perm[k]] - reference[k]) for k in range(len(reference)))
        ranked.append((cost, perm))
    ranked.sort(key=lambda x: x[0])
    return ranked


def _matched(reference: np.ndarray, vals: np.ndarray) -> np.ndarray:
    cost, perm = _ranked_matchings(reference, vals)[0]
    return np.array([vals[perm[k]] for k in range(len(reference))], dtype=complex)


def _order_key(projection: str) -> Callable[[complex], Tuple[float, float]]:
    if projection == "imag":
        return lambda z: (z.imag, z.real)
    if projection == "real":
        return lambda z: (z.real, z.imag)
    raise ArgumentError(f"Unknown projection {projection!r}; expected one of {PROJECTIONS}")


def _over(projection: str, z: complex) -> float:
    return z.real if projection == "imag" else z.imag


def loop_roots(spec: LoopSpec, cfg: Optional[Config] = None) -> RootsAt:
    """phi -> roots of the traceless dynamical matrix along the loop."""
    def roots_at(phi: float) -> np.ndarray:
        return solve_depressed_quartic(forward_map(loop_point(spec, phi)), cfg)
    return roots_at


# =========================
# Continuation
# =========================
def track_eigenvalues(spec: LoopSpec, projection: str = "imag", roots_at: Optional[RootsAt] = None,
                      cfg: Optional[Config] = None) -> StrandSet:
    cfg = resolve(cfg)
    key = _order_key(projection)
    roots_at = roots_at or loop_roots(spec, cfg)
    phis = spec.phi_grid()

    grid_roots = parallel_map(roots_at, [float(p) for p in phis], cfg.threads)
    scale = max(1.0, max(float(np.max(np.abs(r))) for r in grid_roots))
    floor = cfg.scaled("gap_floor") * scale

    start = np.array(sorted(grid_roots[0], key=key), dtype=complex)
    current = start
    min_gap = _min_gap(current)
    if min_gap < floor:
        raise LoopTouchesDegeneracyError(
            f"Spectrum is degenerate at phi=0 (gap {min_gap:.3e})", min_gap=min_gap, phi=0.0)

    values = [current]
    path_phis = [0.0]
    path_values = [current]
    halvings_used = 0

    for i in range(len(phis) - 1):
        phi, phi_end = float(phis[i]), float(phis[i + 1])
        width = phi_end - phi
        h = width
        while phi < phi_end:
            h = min(h, phi_end - phi)
            at_end = h >= phi_end - phi
            target = phi_end if at_end else phi + h
            raw = grid_roots[i + 1] if at_end else roots_at(target)
            cand = _matched(current, raw)
            gap = min(_min_gap(current), _min_gap(cand))
            if gap < floor:
                raise LoopTouchesDegeneracyError(
                    f"Eigenvalue gap {gap:.3e} below {floor:.3e} near phi={target:.6f}; "
                    f"the loop touches a degeneracy", min_gap=gap, phi=target)
            jump = float(np.max(np.abs(cand - current)))
            if jump > gap / 4.0:
                if h <= width / 2 ** cfg.braid_max_halvings:
                    raise LoopTouchesDegeneracyError(
                        f"Strands still jump {jump:.3e} (gap {gap:.3e}) after "
                        f"{cfg.braid_max_halvings} halvings near phi={target:.6f}",
                        min_gap=gap, phi=target)
                h /= 2.0
                halvings_used += 1
                continue
            min_gap = min(min_gap, gap)
            phi, current = target, cand
            path_phis.append(phi)
            path_values.append(current)
            h = min(2.0 * h, width)
        values.append(current)

    logger.debug(f"Tracked {len(phis)} samples with {len(path_phis)} path points, "
                 f"{halvings_used} halvings, min gap {min_gap:.3e}")
    return StrandSet(
        phis=np.asarray(phis, dtype=float),
        values=np.array(values, dtype=complex),
        path_phis=np.array(path_phis, dtype=float),
        path_values=np.array(path_values, dtype=complex),
        min_gap=float(min_gap),
        scale=scale,
        projection=projection,
    )


# =========================
# Permutation and word
# =========================
def extract_permutation(strands: StrandSet, cfg: Optional[Config] = None) -> Tuple[int, ...]:
    """perm with strands[last][k] = strands[0][perm[k]] (0-based)."""
    cfg = resolve(cfg)
    first, last = strands.values[0], strands.values[-1]
    ranked = _ranked_matchings(first, last)
    # ranked perms map first -> last; invert to map last -> first
    cost, forward = ranked[0]
    if len(ranked) > 1 and ranked[1][0] - cost <= cfg.scaled("ambiguity_tol") * strands.scale:
        raise AmbiguousMatchingError(
            f"Closing match is ambiguous: costs {cost:.3e} and {ranked[1][0]:.3e}")
    if cost > cfg.scaled("closure_tol") * strands.scale:
        raise AmbiguousMatchingError(f"Strands do not close: matching cost {cost:.3e}")
    perm = [0] * len(forward)
    for j, k in enumerate(forward):
        perm[k] = j
    return tuple(perm)


def _positions(vals: Sequence[complex], key) -> List[int]:
    order = sorted(range(len(vals)), key=lambda k: key(vals[k]))
    pos = [0] * len(vals)
    for p, k in enumerate(order):
        pos[k] = p
    return pos


def _serialize(va: np.ndarray, vb: np.ndarray, projection: str) -> Optional[List[int]]:
    """Generators for one step, or None when the order change is not disjoint adjacent swaps."""
    key = _order_key(projection)
    pa, pb = _positions(va, key), _positions(vb, key)
    old = sorted(range(len(va)), key=lambda k: pa[k])
    new = sorted(range(len(vb)), key=lambda k: pb[k])
    letters = []
    i = 0
    while i < len(old):
        if old[i] == new[i]:
            i += 1
            continue
        if i + 1 < len(old) and old[i] == new[i + 1] and old[i + 1] == new[i]:
            up, down = old[i], old[i + 1]
            mid_up = 0.5 * (va[up] + vb[up])
            mid_down = 0.5 * (va[down] + vb[down])
            sign = 1 if _over(projection, mid_up) > _over(projection, mid_down) else -1
            letters.append(sign * (i + 1))
            i += 2
            continue
        return None
    return letters


def extract_braid_word(strands: StrandSet, roots_at: Optional[RootsAt] = None,
                       cfg: Optional[Config] = None) -> List[int]:
    """Unreduced word from the order changes along the tracked path.

    Steps whose order change is not a set of disjoint adjacent swaps are
    bisected (needs roots_at) up to braid_max_halvings times.
    """
    cfg = resolve(cfg)
    projection = strands.projection
    word: List[int] = []

    def step(phi_a, va, phi_b, vb, depth):
        letters = _serialize(va, vb, projection)
        if letters is not None:
            return letters
        if roots_at is None or depth >= cfg.braid_max_halvings:
            raise BraidResolutionError(
                f"Simultaneous crossings between phi={phi_a:.9f} and {phi_b:.9f} cannot be serialized")
        phi_m = 0.5 * (phi_a + phi_b)
        vm = _matched(va, roots_at(phi_m))
        return step(phi_a, va, phi_m, vm, depth + 1) + step(phi_m, vm, phi_b, vb, depth + 1)

    phis, vals = strands.path_phis, strands.path_values
    for i in range(len(phis) - 1):
        word.extend(step(float(phis[i]), vals[i], float(phis[i + 1]), vals[i + 1], 0))
    return word


def free_reduce(word: Sequence[int], commuting: bool = False) -> List[int]:
    """Cancel sigma_i sigma_i^-1 pairs.

    With commuting=True a letter also cancels across letters it commutes
    with (|i - j| >= 2), e.g. s1 s3 s1^-1 -> s3.
    """
    out: List[int] = []
    for letter in word:
        j = len(out) - 1
        if commuting:
            while j >= 0 and abs(abs(out[j]) - abs(letter)) >= 2:
                j -= 1
        if j >= 0 and out[j] == -letter:
            out.pop(j)
        else:
            out.append(int(letter))
    return out


def braid_invariants(word: Sequence[int], n_strands: int = 4) -> Tuple[Tuple[int, ...], int]:
    """(perm, exponent sum); perm[k] is the final position of the strand starting at k."""
    pos = list(range(n_strands))
    at = list(range(n_strands))
    for letter in word:
        i = abs(int(letter))
        if not 1 <= i < n_strands:
            raise ArgumentError(f"Generator {letter} out of range for B{n_strands}")
        a, b = at[i - 1], at[i]
        at[i - 1], at[i] = b, a
        pos[a], pos[b] = i, i - 1
    exponent_sum = sum(1 if letter > 0 else -1 for letter in word)
    return tuple(pos), exponent_sum


def permutation_cycles(perm: Sequence[int]) -> List[Tuple[int, ...]]:
    """Non-trivial cycles, 1-based."""
    seen = set()
    cycles = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = []
        k = start
        while k not in seen:
            seen.add(k)
            cyc.append(k + 1)
            k = perm[k]
        if len(cyc) > 1:
            cycles.append(tuple(cyc))
    return cycles


# =========================
# Orchestration
# =========================
def braid_loop(spec: LoopSpec, projection: str = "imag", cfg: Optional[Config] = None) -> BraidResult:
    cfg = resolve(cfg)
    roots_at = loop_roots(spec, cfg)
    strands = track_eigenvalues(spec, projection=projection, roots_at=roots_at, cfg=cfg)
    perm = extract_permutation(strands, cfg)
    raw = extract_braid_word(strands, roots_at=roots_at, cfg=cfg)
    word = free_reduce(raw, commuting=True)
    word_perm, exponent_sum = braid_invariants(word)
    if word_perm != perm:
        raise BraidResolutionError(
            f"Word {word} induces {word_perm}, but the strands close with {perm}")
    logger.info(f"Braid {spec.name or ''}: word {word} (from {len(raw)} letters), "
                f"permutation {permutation_cycles(perm) or 'identity'}, min gap {strands.min_gap:.3e}")
    return BraidResult(strands=strands, permutation=perm, word=word, min_gap=strands.min_gap,
                       exponent_sum=exponent_sum, raw_word=raw)
