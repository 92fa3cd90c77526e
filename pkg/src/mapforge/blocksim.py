"""Block-level resource accounting for bounding-box vs analytical thread mapping.

A bounding-box launch tiles the minimal axis-aligned box of the first N domain
elements with thread blocks; a block is wasted when its extent contains no
domain cell at all.  Counts are computed analytically: closed forms for the
dense domains, and an exact digit-level dynamic program for fractals whenever
every block dimension is a power of the fractal scale (the launch grid never
has to be materialized).  The analytical strategy launches exactly
ceil(N / threads) blocks, so its waste is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from mapforge.geometry import (
    CapacityError,
    Domain,
    DomainError,
    FractalSpec,
    builtin_spec,
    map_pyramid,
    map_triangular,
    tetrahedral_number,
)

__all__ = [
    "BlockShape",
    "BlockStats",
    "EnergySample",
    "bounding_box",
    "count_members",
    "simulate_bb",
    "simulate_analytical",
    "waste_fraction",
    "efficiency_points_per_joule",
    "block_stats_csv",
]

# Guards against accidentally astronomic dense loops / fallback enumerations.
_MAX_DENSE_ITER = 20_000_000
_MAX_FALLBACK_POINTS = 2_000_000


@dataclass(frozen=True)
class BlockShape:
    """Per-axis thread-block extents, e.g. (16, 16) or (8, 8, 4)."""

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.dims or any(d < 1 for d in self.dims):
            raise DomainError(f"block dims must all be >= 1, got {self.dims}")

    @property
    def threads(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    @classmethod
    def parse(cls, text: str) -> "BlockShape":
        try:
            dims = tuple(int(part) for part in text.lower().replace("×", "x").split("x"))
        except ValueError:
            raise DomainError(f"cannot parse block shape {text!r} (expected e.g. 16x16)") from None
        return cls(dims)


@dataclass(frozen=True)
class BlockStats:
    total_blocks: int
    valid_blocks: int
    wasted_blocks: int
    partially_filled: int
    elements: int

    def __post_init__(self) -> None:
        if self.total_blocks != self.valid_blocks + self.wasted_blocks:
            raise DomainError("total_blocks must equal valid_blocks + wasted_blocks")
        if not 0 <= self.partially_filled <= self.valid_blocks:
            raise DomainError("partially_filled must lie within [0, valid_blocks]")


@dataclass(frozen=True)
class EnergySample:
    """User-supplied measurement pair: correctly mapped points and energy in joules."""

    points: int
    joules: float

    def __post_init__(self) -> None:
        if self.joules <= 0:
            raise DomainError(f"joules must be > 0, got {self.joules}")
        if self.points < 0:
            raise DomainError(f"points must be >= 0, got {self.points}")


# ------------------------------------------------------------- bounding box

def _tri_extents(n: int) -> tuple[int, int]:
    x_last, y_last = map_triangular(n - 1)
    if x_last == 0:
        return 0, y_last
    return x_last, max(x_last - 1, y_last)


def _pyr_extents(n: int) -> tuple[int, int, int]:
    _, _, z_last = map_pyramid(n - 1)
    rem = n - 1 - tetrahedral_number(z_last)
    tx, ty = _tri_extents(rem + 1)
    if z_last == 0:
        return tx, ty, 0
    return max(z_last - 1, tx), max(z_last - 1, ty), z_last


def _fractal_axis_max(spec: FractalSpec, axis: int, n_max: int) -> int:
    # max over lam <= n_max of sum(vectors[d_i][axis] * scale**i): walk the
    # digits of n_max most-significant first, branching below each tight digit
    if n_max == 0:
        return 0
    digits = []
    t = n_max
    while t:
        t, d = divmod(t, spec.base)
        digits.append(d)
    vmax = max(v[axis] for v in spec.vectors)
    free = [0] * (len(digits) + 1)
    for i in range(1, len(digits) + 1):
        free[i] = free[i - 1] + vmax * spec.scale ** (i - 1)
    best = -1
    prefix = 0
    for i in range(len(digits) - 1, -1, -1):
        d = digits[i]
        if d > 0:
            below = max(v[axis] for v in spec.vectors[:d])
            best = max(best, prefix + below * spec.scale**i + free[i])
        prefix += spec.vectors[d][axis] * spec.scale**i
    return max(best, prefix)


def bounding_box(domain: Domain, num_elements: int) -> tuple[int, ...]:
    """Per-axis maximum coordinate over the first num_elements points (minima are 0)."""
    if num_elements < 1:
        raise DomainError(f"num_elements must be >= 1, got {num_elements}")
    if domain is Domain.TRIANGULAR_2D:
        return _tri_extents(num_elements)
    if domain is Domain.PYRAMID_3D:
        return _pyr_extents(num_elements)
    spec = builtin_spec(domain)
    return tuple(_fractal_axis_max(spec, a, num_elements - 1) for a in range(spec.dim))


# ------------------------------------------------------ member counting (DP)

def _digits_le(bound: int, base: int, length: int) -> list[int]:
    digits = []
    for _ in range(length):
        bound, d = divmod(bound, base)
        digits.append(d)
    return digits  # level 0 first


def _fractal_count_prefix(spec: FractalSpec, maxes: Sequence[int]) -> int:
    # members with coordinate[a] <= maxes[a] for every axis, via tight-flag DP
    if any(m < 0 for m in maxes):
        return 0
    levels = 1
    while any(spec.scale**levels <= m for m in maxes):
        levels += 1
    bounds = [_digits_le(m, spec.scale, levels) for m in maxes]
    axes = range(spec.dim)

    @lru_cache(maxsize=None)
    def go(level: int, tights: tuple[bool, ...]) -> int:
        if level < 0:
            return 1
        total = 0
        for vec in spec.vectors:
            ok = True
            new_tights = []
            for a in axes:
                if tights[a]:
                    b = bounds[a][level]
                    if vec[a] > b:
                        ok = False
                        break
                    new_tights.append(vec[a] == b)
                else:
                    new_tights.append(False)
            if ok:
                total += go(level - 1, tuple(new_tights))
        return total

    return go(levels - 1, (True,) * spec.dim)


def count_members(domain: Domain, maxes: Sequence[int]) -> int:
    """Lattice cells c with 0 <= c[a] <= maxes[a] satisfying the domain predicate."""
    if len(maxes) != domain.dim:
        raise DomainError(f"{domain.value} expects {domain.dim} extents, got {len(maxes)}")
    if any(m < 0 for m in maxes):
        return 0
    if domain is Domain.TRIANGULAR_2D:
        hx, hy = maxes
        return _tri_count(hx, hy)
    if domain is Domain.PYRAMID_3D:
        hx, hy, hz = maxes
        if hz > _MAX_DENSE_ITER:
            raise CapacityError("pyramid member count too large to iterate")
        return sum(_tri_count(min(hx, z), hy) for z in range(hz + 1))
    return _fractal_count_prefix(builtin_spec(domain), maxes)


def _tri_count(hx: int, hy: int) -> int:
    # |{(x, y): 0 <= x <= hx, 0 <= y <= min(x, hy)}|
    if hx < 0 or hy < 0:
        return 0
    below = min(hx, hy)  # rows where the triangle edge is inside the y-range
    count = (below + 1) * (below + 2) // 2
    if hx > hy:
        count += (hx - hy) * (hy + 1)
    return count


# --------------------------------------------------- fractal block-count DPs

def _power_of(value: int, base: int) -> int | None:
    e = 0
    while value > 1 and value % base == 0:
        value //= base
        e += 1
    return e if value == 1 else None


def _fractal_block_counts(
    spec: FractalSpec, grid: Sequence[int], shifts: Sequence[int]
) -> tuple[int, int]:
    """(hit, full) block counts over the grid; block dim on axis a is scale**shifts[a].

    A block index digit at point-level i is digit (i - shift) of the block
    coordinate; point levels below the shift are free.  Hit requires some free
    completion to be a member, full requires every completion to be one.
    """
    s = spec.scale
    axes = range(spec.dim)
    limits = [g - 1 for g in grid]
    block_len = [max(1, _ndigits(l, s)) for l in limits]
    levels = max(shifts[a] + block_len[a] for a in axes)
    bounds = [_digits_le(limits[a], s, levels) for a in axes]

    member = set(spec.vectors)
    all_digits = range(s)

    @lru_cache(maxsize=None)
    def hit(level: int, tights: tuple[bool, ...]) -> int:
        if level < 0:
            return 1
        transitions = set()
        for vec in member:
            ok = True
            proj = []
            new_tights = []
            for a in axes:
                if level >= shifts[a]:
                    digit = vec[a]
                    if tights[a]:
                        b = bounds[a][level - shifts[a]]
                        if digit > b:
                            ok = False
                            break
                        new_tights.append(digit == b)
                    else:
                        new_tights.append(False)
                    proj.append(digit)
                else:
                    new_tights.append(tights[a])
                    proj.append(-1)  # free axis: existential, deduplicated
            if ok:
                transitions.add((tuple(proj), tuple(new_tights)))
        return sum(hit(level - 1, nt) for _, nt in transitions)

    def _full_allowed(level: int) -> list[tuple[int, ...]]:
        # block-digit tuples whose every free completion stays a member
        free_axes = [a for a in axes if level < shifts[a]]
        block_axes = [a for a in axes if level >= shifts[a]]
        out = []
        for combo in _digit_combos(len(block_axes), s):
            candidate = [0] * spec.dim
            for a, digit in zip(block_axes, combo):
                candidate[a] = digit
            good = True
            for fill in _digit_combos(len(free_axes), s):
                for a, digit in zip(free_axes, fill):
                    candidate[a] = digit
                if tuple(candidate) not in member:
                    good = False
                    break
            if good:
                out.append(combo)
        return out

    full_allowed = {lvl: _full_allowed(lvl) for lvl in range(levels)}

    @lru_cache(maxsize=None)
    def full(level: int, tights: tuple[bool, ...]) -> int:
        if level < 0:
            return 1
        block_axes = [a for a in axes if level >= shifts[a]]
        total = 0
        for combo in full_allowed[level]:
            ok = True
            new_tights = list(tights)
            for a, digit in zip(block_axes, combo):
                if tights[a]:
                    b = bounds[a][level - shifts[a]]
                    if digit > b:
                        ok = False
                        break
                    new_tights[a] = digit == b
            if ok:
                total += full(level - 1, tuple(new_tights))
        return total

    start = (True,) * spec.dim
    return hit(levels - 1, start), full(levels - 1, start)


def _ndigits(value: int, base: int) -> int:
    n = 1
    while value >= base:
        value //= base
        n += 1
    return n


def _digit_combos(length: int, base: int) -> list[tuple[int, ...]]:
    combos = [()]
    for _ in range(length):
        combos = [c + (d,) for c in combos for d in range(base)]
    return combos


def _fractal_blocks_fallback(
    spec: FractalSpec, extents: Sequence[int], dims: Sequence[int], threads: int
) -> tuple[int, int]:
    # Exact but enumerative: subdivision of the fractal pruned to the grid
    # extent, tallying members per block.  Guarded by a point-count cap.
    n_points = _fractal_count_prefix(spec, tuple(extents))
    if n_points > _MAX_FALLBACK_POINTS:
        raise CapacityError(
            "block dims are not powers of the fractal scale and the grid is too "
            "large to enumerate; use scale-aligned block dims"
        )
    s = spec.scale
    levels = 1
    while any(s**levels <= e for e in extents):
        levels += 1
    counts: dict[tuple[int, ...], int] = {}
    axes = range(spec.dim)

    def rec(level: int, origin: tuple[int, ...]) -> None:
        if any(origin[a] > extents[a] for a in axes):
            return
        if level == 0:
            key = tuple(origin[a] // dims[a] for a in axes)
            counts[key] = counts.get(key, 0) + 1
            return
        unit = s ** (level - 1)
        for vec in spec.vectors:
            rec(level - 1, tuple(origin[a] + vec[a] * unit for a in axes))

    rec(levels, (0,) * spec.dim)
    hit = len(counts)
    full = sum(1 for c in counts.values() if c == threads)
    return hit, full


# ------------------------------------------------------- dense block counts

def _tri_block_counts(maxes, dims, grid) -> tuple[int, int]:
    bw, bh = dims
    gx, gy = grid
    if gx > _MAX_DENSE_ITER:
        raise CapacityError("triangular launch grid too large to account")
    valid = 0
    full = 0
    for i in range(gx):
        xl = i * bw
        xh = xl + bw - 1
        valid += min(gy, xh // bh + 1)
        if xl + 1 >= bh:
            full += min(gy, (xl - bh + 1) // bh + 1)
    return valid, full


def _pyr_block_counts(maxes, dims, grid) -> tuple[int, int]:
    bw, bh, bd = dims
    gx, gy, gz = grid
    if gx * gz > _MAX_DENSE_ITER:
        raise CapacityError("pyramid launch grid too large to account")
    valid = 0
    full = 0
    for i in range(gx):
        xl = i * bw
        xh = xl + bw - 1
        full_j = min(gy, (xl - bh + 1) // bh + 1) if xl + 1 >= bh else 0
        for k in range(gz):
            zl = k * bd
            zh = zl + bd - 1
            if xl > zh:
                continue
            valid += min(gy, min(xh, zh) // bh + 1)
            if xh <= zl:
                full += full_j
    return valid, full


# ----------------------------------------------------------- entry points

def simulate_bb(domain: Domain, num_elements: int, block: BlockShape) -> BlockStats:
    """Tile the bounding box of the first num_elements points with blocks and
    count validity from the membership predicate (a block is wasted iff its
    extent holds no domain cell)."""
    if len(block.dims) != domain.dim:
        raise DomainError(
            f"block shape {block.dims} does not match {domain.value} dimensionality"
        )
    maxes = bounding_box(domain, num_elements)
    grid = tuple((m + 1 + d - 1) // d for m, d in zip(maxes, block.dims))
    total = 1
    for g in grid:
        total *= g

    if domain is Domain.TRIANGULAR_2D:
        valid, full = _tri_block_counts(maxes, block.dims, grid)
    elif domain is Domain.PYRAMID_3D:
        valid, full = _pyr_block_counts(maxes, block.dims, grid)
    else:
        spec = builtin_spec(domain)
        shifts = [_power_of(d, spec.scale) for d in block.dims]
        if all(sh is not None for sh in shifts):
            valid, full = _fractal_block_counts(spec, grid, shifts)
        else:
            extents = tuple(g * d - 1 for g, d in zip(grid, block.dims))
            valid, full = _fractal_blocks_fallback(
                spec, extents, block.dims, block.threads
            )
    return BlockStats(
        total_blocks=total,
        valid_blocks=valid,
        wasted_blocks=total - valid,
        partially_filled=valid - full,
        elements=num_elements,
    )


def simulate_analytical(num_elements: int, block_threads: int) -> BlockStats:
    """The analytical mapping launches exactly the blocks it needs: zero waste."""
    if num_elements < 1:
        raise DomainError(f"num_elements must be >= 1, got {num_elements}")
    if block_threads < 1:
        raise DomainError(f"block_threads must be >= 1, got {block_threads}")
    total = (num_elements + block_threads - 1) // block_threads
    return BlockStats(
        total_blocks=total,
        valid_blocks=total,
        wasted_blocks=0,
        partially_filled=1 if num_elements % block_threads else 0,
        elements=num_elements,
    )


def waste_fraction(stats: BlockStats) -> float:
    if stats.total_blocks < 1:
        raise DomainError("waste fraction undefined for an empty launch")
    return stats.wasted_blocks / stats.total_blocks


def efficiency_points_per_joule(sample: EnergySample) -> float:
    return sample.points / sample.joules


def block_stats_csv(rows: Iterable[tuple[str, str, BlockStats]]) -> str:
    """CSV with the block-accounting column order:
    domain, strategy, total_blocks, wasted_blocks, waste_fraction, elements."""
    lines = ["domain,strategy,total_blocks,wasted_blocks,waste_fraction,elements"]
    for domain_label, strategy, stats in rows:
        lines.append(
            f"{domain_label},{strategy},{stats.total_blocks},{stats.wasted_blocks},"
            f"{waste_fraction(stats):.6f},{stats.elements}"
        )
    return "\n".join(lines) + "\n"
