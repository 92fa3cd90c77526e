"""Exact integer mappings from a linear thread index to lattice coordinates.

Six domains are supported: two dense ones (lower-triangular 2D, layered
pyramid 3D) inverted through integer square/cube roots, and four fractals
(Sierpinski gasket, Sierpinski carpet, Sierpinski pyramid, Menger sponge)
driven by base-B digit decomposition of the index.  All arithmetic is
integer-exact; floating point is only ever used to seed integer searches.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

__all__ = [
    "MAX_INDEX",
    "CapacityError",
    "DomainError",
    "Coord",
    "Domain",
    "FractalSpec",
    "GroundTruth",
    "builtin_spec",
    "map_triangular",
    "map_pyramid",
    "fractal_map",
    "map_domain",
    "membership",
    "oracle_enumerate",
    "generate_ground_truth",
    "write_ground_truth",
    "read_ground_truth",
    "triangular_number",
    "tetrahedral_number",
]

# Indices are modelled as unsigned 64-bit; beyond this we refuse rather than
# silently degrade (Python ints never wrap, so this is a contract, not a
# hardware limit).
MAX_INDEX = 2**63 - 1

Coord = tuple  # components are non-negative ints; dim is 2 or 3


class CapacityError(OverflowError):
    """Index or derived quantity exceeds the supported range."""


class DomainError(ValueError):
    """Invalid domain, coordinate dimensionality, or argument."""


class Domain(str, Enum):
    """The six computational domains, identified by their CLI/file ids."""

    TRIANGULAR_2D = "triangular2d"
    PYRAMID_3D = "pyramid3d"
    GASKET_2D = "gasket2d"
    CARPET_2D = "carpet2d"
    SIERPINSKI_3D = "sierpinski3d"
    MENGER_3D = "menger3d"

    @property
    def dim(self) -> int:
        return 3 if self in _THREE_D else 2

    @property
    def is_fractal(self) -> bool:
        return self not in (Domain.TRIANGULAR_2D, Domain.PYRAMID_3D)

    @classmethod
    def parse(cls, text: str) -> "Domain":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(d.value for d in cls)
            raise DomainError(f"unknown domain {text!r} (expected one of: {valid})") from None


_THREE_D = frozenset({"pyramid3d", "sierpinski3d", "menger3d"})


@dataclass(frozen=True)
class FractalSpec:
    """Base-B digit-decomposition rule: digit d at level i translates by vectors[d] * scale**i."""

    base: int
    scale: int
    dim: int
    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.base < 2:
            raise DomainError(f"base must be >= 2, got {self.base}")
        if self.scale < 2:
            raise DomainError(f"scale must be >= 2, got {self.scale}")
        if self.dim not in (2, 3):
            raise DomainError(f"dim must be 2 or 3, got {self.dim}")
        if len(self.vectors) != self.base:
            raise DomainError(
                f"expected exactly {self.base} translation vectors, got {len(self.vectors)}"
            )
        if len(set(self.vectors)) != self.base:
            raise DomainError("translation vectors must be pairwise distinct")
        for v in self.vectors:
            if len(v) != self.dim:
                raise DomainError(f"vector {v} does not have dim {self.dim}")
            if any(c < 0 or c >= self.scale for c in v):
                raise DomainError(f"vector {v} has components outside [0, {self.scale})")


def _cells_lex(dim: int, side: int, excluded: frozenset) -> tuple[tuple[int, ...], ...]:
    cells = []
    def rec(prefix):
        if len(prefix) == dim:
            t = tuple(prefix)
            if t not in excluded:
                cells.append(t)
            return
        for c in range(side):
            rec(prefix + [c])
    rec([])
    return tuple(cells)


_MENGER_VOIDS = frozenset(
    (x, y, z)
    for x in range(3)
    for y in range(3)
    for z in range(3)
    if (x == 1) + (y == 1) + (z == 1) >= 2
)

_BUILTIN_SPECS = {
    Domain.GASKET_2D: FractalSpec(3, 2, 2, ((0, 0), (1, 0), (0, 1))),
    Domain.SIERPINSKI_3D: FractalSpec(4, 2, 3, ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))),
    Domain.CARPET_2D: FractalSpec(8, 3, 2, _cells_lex(2, 3, frozenset({(1, 1)}))),
    Domain.MENGER_3D: FractalSpec(20, 3, 3, _cells_lex(3, 3, _MENGER_VOIDS)),
}


def builtin_spec(domain: Domain) -> FractalSpec:
    """Canonical digit rule for one of the four fractal domains."""
    try:
        return _BUILTIN_SPECS[domain]
    except KeyError:
        raise DomainError(f"{domain.value} is not a fractal domain") from None


def _check_index(lam: int) -> None:
    if lam < 0:
        raise DomainError(f"index must be non-negative, got {lam}")
    if lam > MAX_INDEX:
        raise CapacityError(f"index {lam} exceeds supported maximum {MAX_INDEX}")


def triangular_number(x: int) -> int:
    return x * (x + 1) // 2


def tetrahedral_number(z: int) -> int:
    return z * (z + 1) * (z + 2) // 6


def map_triangular(lam: int) -> tuple[int, int]:
    """Invert the row-major lower-triangular layout: lam = x(x+1)/2 + y, 0 <= y <= x.

    Uses the exact integer square root of 8*lam + 1; the correction loops
    guard boundary exactness and never fire with an exact isqrt.
    """
    _check_index(lam)
    x = (math.isqrt(8 * lam + 1) - 1) // 2
    while triangular_number(x) > lam:
        x -= 1
    while triangular_number(x + 1) <= lam:
        x += 1
    return x, lam - triangular_number(x)


def map_pyramid(lam: int) -> tuple[int, int, int]:
    """Invert the layered pyramid layout: layer z holds the triangle of side z+1.

    z is the unique integer with T3(z) <= lam < T3(z+1); the float cube root
    only seeds the search and integer comparisons settle it.
    """
    _check_index(lam)
    z = max(int(round((6 * lam) ** (1.0 / 3.0))) - 2, 0)
    while tetrahedral_number(z + 1) <= lam:
        z += 1
    while tetrahedral_number(z) > lam:
        z -= 1
    x, y = map_triangular(lam - tetrahedral_number(z))
    return x, y, z


def fractal_map(spec: FractalSpec, lam: int) -> tuple[int, ...]:
    """Decompose lam into base-B digits; each digit selects a vector scaled by scale**level."""
    _check_index(lam)
    comps = [0] * spec.dim
    unit = 1
    while lam:
        lam, d = divmod(lam, spec.base)
        vec = spec.vectors[d]
        for a in range(spec.dim):
            comps[a] += vec[a] * unit
        unit *= spec.scale
    return tuple(comps)


def map_domain(domain: Domain, lam: int) -> tuple[int, ...]:
    """Dispatch to the domain's exact mapping."""
    if domain is Domain.TRIANGULAR_2D:
        return map_triangular(lam)
    if domain is Domain.PYRAMID_3D:
        return map_pyramid(lam)
    return fractal_map(builtin_spec(domain), lam)


def _no_carpet_conflict(a: int, b: int) -> bool:
    while a or b:
        if a % 3 == 1 and b % 3 == 1:
            return False
        a //= 3
        b //= 3
    return True


def _menger_member(x: int, y: int, z: int) -> bool:
    while x or y or z:
        if (x % 3 == 1) + (y % 3 == 1) + (z % 3 == 1) >= 2:
            return False
        x //= 3
        y //= 3
        z //= 3
    return True


def membership(domain: Domain, c: Sequence[int]) -> bool:
    """Whether a lattice cell belongs to the (unbounded) domain."""
    if len(c) != domain.dim:
        raise DomainError(f"{domain.value} expects dim {domain.dim}, got coordinate {tuple(c)}")
    if any(v < 0 for v in c):
        return False
    if domain is Domain.TRIANGULAR_2D:
        x, y = c
        return y <= x
    if domain is Domain.PYRAMID_3D:
        x, y, z = c
        return y <= x <= z
    if domain is Domain.GASKET_2D:
        x, y = c
        return x & y == 0
    if domain is Domain.SIERPINSKI_3D:
        x, y, z = c
        return x & y == 0 and x & z == 0 and y & z == 0
    if domain is Domain.CARPET_2D:
        x, y = c
        return _no_carpet_conflict(x, y)
    x, y, z = c
    return _menger_member(x, y, z)


def _scan_triangular(count: int) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    x = 0
    while len(out) < count:
        for y in range(x + 1):
            out.append((x, y))
            if len(out) == count:
                break
        x += 1
    return out


def _scan_pyramid(count: int) -> list[tuple[int, int, int]]:
    out: list[tuple[int, int, int]] = []
    z = 0
    while len(out) < count:
        for x in range(z + 1):
            for y in range(x + 1):
                out.append((x, y, z))
                if len(out) == count:
                    return out
        z += 1
    return out


def _subdivide_fractal(spec: FractalSpec, count: int) -> list[tuple[int, ...]]:
    # Recursive subdivision in vector order: level k+1 concatenates the B
    # translated copies of level k.  Deliberately avoids per-index digit math.
    pts: list[tuple[int, ...]] = [(0,) * spec.dim]
    unit = 1
    while len(pts) < count:
        nxt: list[tuple[int, ...]] = []
        for vec in spec.vectors:
            off = tuple(v * unit for v in vec)
            for p in pts:
                nxt.append(tuple(pc + oc for pc, oc in zip(p, off)))
                if len(nxt) == count:
                    break
            if len(nxt) == count:
                break
        pts = nxt
        unit *= spec.scale
    return pts


def oracle_enumerate(domain: Domain, count: int) -> list[tuple[int, ...]]:
    """First `count` coordinates by brute-force lattice scan, not by closed form.

    Dense domains scan rows/layers; fractal domains grow by recursive
    subdivision in vector-table order.  Serves as the independent cross-check
    for map_domain.
    """
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}")
    if count == 0:
        return []
    _check_index(count - 1)
    if domain is Domain.TRIANGULAR_2D:
        return _scan_triangular(count)
    if domain is Domain.PYRAMID_3D:
        return _scan_pyramid(count)
    return _subdivide_fractal(builtin_spec(domain), count)[:count]


@dataclass(frozen=True)
class GroundTruth:
    """Ordered bijective sequence of the first `count` coordinates of a domain."""

    domain: Domain
    count: int
    coords: tuple

    def __post_init__(self) -> None:
        if self.count != len(self.coords):
            raise DomainError("count does not match number of coordinates")


def generate_ground_truth(domain: Domain, count: int) -> GroundTruth:
    """Generate and verify (distinctness) the first `count` mapped coordinates."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    _check_index(count - 1)
    if domain is Domain.TRIANGULAR_2D:
        coords = [map_triangular(k) for k in range(count)]
    elif domain is Domain.PYRAMID_3D:
        coords = [map_pyramid(k) for k in range(count)]
    else:
        spec = builtin_spec(domain)
        coords = [fractal_map(spec, k) for k in range(count)]
    if len(set(coords)) != count:
        raise DomainError(f"bijectivity violated for {domain.value}: duplicate coordinates")
    return GroundTruth(domain=domain, count=count, coords=tuple(coords))


def write_ground_truth(gt: GroundTruth, path: str | Path) -> None:
    """JSON Lines, one record per index: {"n": k, "c": [...]}, ascending n from 0."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for n, c in enumerate(gt.coords):
            fh.write(json.dumps({"n": n, "c": list(c)}, separators=(", ", ": ")) + "\n")


def read_ground_truth(path: str | Path, domain: Domain) -> GroundTruth:
    coords = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("n") != len(coords):
                raise DomainError(f"{path}: non-contiguous index at line {lineno + 1}")
            if "c" not in rec:
                raise DomainError(f"{path}: missing coordinate at line {lineno + 1}")
            c = tuple(rec["c"])
            if len(c) != domain.dim:
                raise DomainError(f"{path}: wrong dimensionality at line {lineno + 1}")
            coords.append(c)
    if not coords:
        raise DomainError(f"{path}: empty ground-truth file")
    return GroundTruth(domain=domain, count=len(coords), coords=tuple(coords))
