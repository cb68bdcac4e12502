"""Finite-box subshifts of finite type with obscured cells.

A subshift of finite type (SFT) is given by a finite alphabet and a finite
set of forbidden patterns.  Configurations here always live on finite boxes
with free boundary: a forbidden pattern only counts if it fits entirely
inside the box.  A noise mask marks cells as obscured; a constraint is
violated only when every cell it touches is clear, so obscured cells are
exempt from all checks.

Symbols are stored as integer indices into the declared alphabet order.
That order is also the universal tie-break order for every deterministic
choice made downstream (gap filling, offset votes, enumeration).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import ndimage

Offset = tuple[int, ...]


class SftParseError(ValueError):
    """Malformed SFT description text."""


class CapExceeded(RuntimeError):
    """reconstruction_phi found no radius up to the requested cap."""


class BudgetExceeded(RuntimeError):
    """An enumeration hit its node budget before finishing."""


def _as_offset(cell, dim: int | None = None) -> Offset:
    if isinstance(cell, int):
        off = (cell,)
    else:
        off = tuple(int(c) for c in cell)
    if dim is not None and len(off) != dim:
        raise ValueError(f"offset {off} has dimension {len(off)}, expected {dim}")
    return off


@dataclass(frozen=True)
class Pattern:
    """A finite partial configuration in canonical form.

    Cells are (offset, symbol) pairs sorted by offset, translated so the
    minimum corner of the bounding box is the origin.  Two patterns that
    differ by a translation are therefore equal.
    """

    cells: tuple[tuple[Offset, int], ...]

    @staticmethod
    def from_cells(cells: Iterable[tuple[Offset, int]]) -> "Pattern":
        items = [(_as_offset(o), int(s)) for o, s in cells]
        if not items:
            return Pattern(cells=())
        dim = len(items[0][0])
        for off, _ in items:
            if len(off) != dim:
                raise ValueError("mixed offset dimensions in pattern")
        mins = tuple(min(off[i] for off, _ in items) for i in range(dim))
        shifted = {}
        for off, sym in items:
            key = tuple(off[i] - mins[i] for i in range(dim))
            if key in shifted and shifted[key] != sym:
                raise ValueError(f"conflicting symbols at offset {key}")
            shifted[key] = sym
        return Pattern(cells=tuple(sorted(shifted.items())))

    @property
    def dim(self) -> int:
        if not self.cells:
            return 0
        return len(self.cells[0][0])

    @property
    def extent(self) -> Offset:
        """Bounding-box side lengths (max offset + 1 per axis)."""
        d = self.dim
        return tuple(max(off[i] for off, _ in self.cells) + 1 for i in range(d))

    @property
    def diameter(self) -> int:
        if not self.cells:
            return 0
        return max(e - 1 for e in self.extent)


@dataclass(frozen=True)
class Sft:
    """An SFT: dimension, ordered alphabet, canonical forbidden patterns."""

    dim: int
    alphabet: tuple[str, ...]
    forbidden: frozenset[Pattern]

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate alphabet symbols")
        for p in self.forbidden:
            if p.cells and p.dim != self.dim:
                raise ValueError("forbidden pattern dimension mismatch")
            for _, s in p.cells:
                if not 0 <= s < len(self.alphabet):
                    raise ValueError(f"symbol index {s} out of range")

    @property
    def diameter(self) -> int:
        """Largest bounding-box spread of any forbidden pattern."""
        if not self.forbidden:
            return 0
        return max(p.diameter for p in self.forbidden)

    def symbol_index(self, token: str) -> int:
        try:
            return self.alphabet.index(token)
        except ValueError:
            raise KeyError(f"unknown symbol {token!r}") from None


@dataclass(frozen=True)
class Grid:
    """Symbol values on a finite box, anchored at an absolute origin."""

    origin: Offset
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != len(self.origin):
            raise ValueError("origin dimension does not match data")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.ndim

    @property
    def shape(self) -> Offset:
        return tuple(self.data.shape)

    def translate(self, vec) -> "Grid":
        v = _as_offset(vec, self.dim)
        return Grid(tuple(o + dv for o, dv in zip(self.origin, v)), self.data)


@dataclass(frozen=True)
class NoiseMask:
    """Boolean obscured-cell indicator on a finite box (1 = obscured)."""

    origin: Offset
    data: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.uint8)
        if arr.ndim != len(self.origin):
            raise ValueError("origin dimension does not match data")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.ndim

    @property
    def shape(self) -> Offset:
        return tuple(self.data.shape)

    @property
    def density(self) -> float:
        return float(self.data.mean()) if self.data.size else 0.0


@dataclass(frozen=True)
class LocalMap:
    """A sliding-block map: window offsets plus a lookup table.

    The table maps tuples of symbols, read in window order, to an output
    symbol.  Applying the map shrinks the box to the cells whose whole
    window fits inside.
    """

    window: tuple[Offset, ...]
    table: dict

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(_as_offset(o) for o in self.window))


_DIRECTIVE_RE = re.compile(r"^(\w+)\s*(.*)$")
_FORBID_CELL_RE = re.compile(r"\(([^)]*)\)\s*=\s*(\S+)")


def _directives(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DIRECTIVE_RE.match(line)
        if not m:
            raise SftParseError(f"line {lineno}: cannot parse {raw!r}")
        yield lineno, m.group(1), m.group(2).strip()


def parse_sft(text: str, *, extra: dict | None = None) -> Sft:
    """Parse the plain-text SFT format.

    Directives, one per line, comments starting with '#':

        dim <d>
        alphabet <sym> <sym> ...
        forbid (<c1,...,cd>)=<sym> (<c1,...,cd>)=<sym> ...

    Each ``forbid`` line describes one forbidden pattern.  Unknown
    directives are an error unless ``extra`` is given, in which case they
    are collected there as ``{key: [(lineno, rest), ...]}`` for callers
    that extend the format.
    """
    dim: int | None = None
    alphabet: tuple[str, ...] | None = None
    forbid_lines: list[tuple[int, str]] = []
    for lineno, key, rest in _directives(text):
        if key == "dim":
            if dim is not None:
                raise SftParseError(f"line {lineno}: duplicate dim")
            try:
                dim = int(rest)
            except ValueError:
                raise SftParseError(f"line {lineno}: bad dimension {rest!r}") from None
            if dim < 1:
                raise SftParseError(f"line {lineno}: dimension must be positive")
        elif key == "alphabet":
            if alphabet is not None:
                raise SftParseError(f"line {lineno}: duplicate alphabet")
            alphabet = tuple(rest.split())
            if not alphabet:
                raise SftParseError(f"line {lineno}: empty alphabet")
        elif key == "forbid":
            forbid_lines.append((lineno, rest))
        elif extra is not None:
            extra.setdefault(key, []).append((lineno, rest))
        else:
            raise SftParseError(f"line {lineno}: unknown directive {key!r}")
    if dim is None:
        raise SftParseError("missing dim directive")
    if alphabet is None:
        raise SftParseError("missing alphabet directive")

    patterns = []
    for lineno, rest in forbid_lines:
        cells = []
        consumed = 0
        for m in _FORBID_CELL_RE.finditer(rest):
            consumed += len(m.group(0))
            coords = m.group(1).split(",")
            if len(coords) != dim:
                raise SftParseError(
                    f"line {lineno}: offset ({m.group(1)}) is not {dim}-dimensional")
            try:
                off = tuple(int(c) for c in coords)
            except ValueError:
                raise SftParseError(f"line {lineno}: bad offset ({m.group(1)})") from None
            tok = m.group(2)
            if tok not in alphabet:
                raise SftParseError(f"line {lineno}: unknown symbol {tok!r}")
            cells.append((off, alphabet.index(tok)))
        if not cells:
            raise SftParseError(f"line {lineno}: empty forbid")
        if len(re.sub(r"\s", "", rest)) != len(re.sub(r"\s", "", "".join(
                m.group(0) for m in _FORBID_CELL_RE.finditer(rest)))):
            raise SftParseError(f"line {lineno}: trailing junk in forbid")
        patterns.append(Pattern.from_cells(cells))
    return Sft(dim=dim, alphabet=alphabet, forbidden=frozenset(patterns))


def load_sft(path) -> Sft:
    with open(path) as fh:
        return parse_sft(fh.read())


def word_sft(alphabet: Sequence[str], words: Iterable[str]) -> Sft:
    """Convenience constructor for 1D SFTs with forbidden words.

    Each word is a string of alphabet tokens (single characters) or an
    iterable of tokens.
    """
    alpha = tuple(alphabet)
    pats = []
    for w in words:
        toks = list(w)
        cells = [((i,), alpha.index(t)) for i, t in enumerate(toks)]
        pats.append(Pattern.from_cells(cells))
    return Sft(dim=1, alphabet=alpha, forbidden=frozenset(pats))


def _clear_array(grid: Grid, mask: NoiseMask | None) -> np.ndarray | None:
    if mask is None:
        return None
    if mask.shape != grid.shape or mask.origin != grid.origin:
        raise ValueError("mask box does not match grid box")
    return mask.data == 0


def pattern_hits(sft: Sft, grid: Grid, pattern: Pattern,
                 clear: np.ndarray | None = None) -> np.ndarray:
    """Boolean array over anchor positions where the pattern occurs.

    Anchor positions are box-relative; only translates fully inside the
    box are considered.  With a clear array, occurrences involving any
    obscured cell do not count.
    """
    shape = grid.shape
    ext = pattern.extent
    out_shape = tuple(shape[i] - ext[i] + 1 for i in range(grid.dim))
    if any(s <= 0 for s in out_shape):
        return np.zeros(tuple(max(s, 0) for s in out_shape), dtype=bool)
    hit = np.ones(out_shape, dtype=bool)
    for off, sym in pattern.cells:
        sl = tuple(slice(off[i], off[i] + out_shape[i]) for i in range(grid.dim))
        block = grid.data[sl] == sym
        if clear is not None:
            block = block & clear[sl]
        hit &= block
    return hit


def violations(sft: Sft, grid: Grid, mask: NoiseMask | None = None):
    """All (pattern, absolute anchor) pairs violated by the clear cells."""
    clear = _clear_array(grid, mask)
    out = []
    for p in sorted(sft.forbidden, key=lambda q: q.cells):
        if not p.cells:
            continue
        hits = pattern_hits(sft, grid, p, clear)
        for idx in np.argwhere(hits):
            anchor = tuple(int(i) + o for i, o in zip(idx, grid.origin))
            out.append((p, anchor))
    return out


def is_locally_admissible(sft: Sft, grid: Grid, mask: NoiseMask | None = None) -> bool:
    """True when no forbidden pattern occurs entirely on clear cells."""
    if grid.dim != sft.dim:
        raise ValueError("grid dimension does not match SFT")
    clear = _clear_array(grid, mask)
    for p in sft.forbidden:
        if not p.cells:
            return False
        if pattern_hits(sft, grid, p, clear).any():
            return False
    return True


def ball(radius: int, dim: int) -> list[Offset]:
    """Offsets of the L-infinity ball of the given radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    rng = range(-radius, radius + 1)
    return list(itertools.product(rng, repeat=dim))


def minkowski_sum(cells: Iterable[Offset], radius: int, dim: int) -> list[Offset]:
    out = set()
    for c in cells:
        for b in ball(radius, dim):
            out.add(tuple(ci + bi for ci, bi in zip(c, b)))
    return sorted(out)


def _enumerate_admissible(sft: Sft, cells: list[Offset], budget: int):
    """Yield all locally admissible assignments on an arbitrary cell set.

    Assignments are dicts offset -> symbol.  Local admissibility is judged
    on the cell set itself: a forbidden translate counts only when all of
    its cells belong to the set.  DFS in lexicographic cell and symbol
    order, pruned as soon as a completed translate is violated.
    """
    cells = sorted(cells)
    index = {c: i for i, c in enumerate(cells)}
    dim = sft.dim
    nsym = len(sft.alphabet)
    # For each cell position, the constraints that become fully assigned
    # once that cell receives a value: (cells_as_indices, symbols).
    checks_at: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = [[] for _ in cells]
    cellset = set(cells)
    for p in sft.forbidden:
        if not p.cells:
            return
        ext = p.extent
        for c in cells:
            # translate anchored so that some pattern cell lands on c:
            # enumerate anchors a with a + off covering c is wasteful; instead
            # anchor over all positions within extent of c.
            for anchor in itertools.product(*[
                    range(c[i] - ext[i] + 1, c[i] + 1) for i in range(dim)]):
                placed = [tuple(anchor[i] + off[i] for i in range(dim))
                          for off, _ in p.cells]
                if any(q not in cellset for q in placed):
                    continue
                idxs = tuple(index[q] for q in placed)
                last = max(idxs)
                if index[c] != last:
                    continue
                syms = tuple(s for _, s in p.cells)
                checks_at[last].append((idxs, syms))
    # dedupe
    checks_at = [sorted(set(ck)) for ck in checks_at]

    assign = [-1] * len(cells)
    nodes = 0

    def dfs(i: int):
        nonlocal nodes
        if i == len(cells):
            yield dict(zip(cells, assign))
            return
        for s in range(nsym):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"admissible enumeration exceeded {budget} nodes")
            assign[i] = s
            ok = True
            for idxs, syms in checks_at[i]:
                if all(assign[j] == sym for j, sym in zip(idxs, syms)):
                    ok = False
                    break
            if ok:
                yield from dfs(i + 1)
        assign[i] = -1

    yield from dfs(0)


def reconstruction_phi(sft: Sft, window, cap: int, *,
                       global_oracle: Callable[[dict], bool] | None = None,
                       budget: int = 2_000_000) -> int:
    """Least k such that local admissibility on window + B_k forces global
    admissibility on the window.

    The window is a set of offsets.  For each k = 0..cap, every locally
    admissible assignment on the inflated set is enumerated and its
    restriction to the window tested for global admissibility.  For 1D
    SFTs with a contiguous window the word automaton provides the oracle;
    otherwise a ``global_oracle`` callable must be supplied (it receives a
    dict offset -> symbol on the window).

    Raises CapExceeded if no k up to cap works, BudgetExceeded if the
    enumeration is too large.
    """
    win = sorted(_as_offset(c, sft.dim) for c in window)
    if not win:
        raise ValueError("empty window")
    if global_oracle is None:
        if sft.dim != 1:
            raise ValueError("global_oracle is required for dimension > 1")
        lo, hi = win[0][0], win[-1][0]
        if [c[0] for c in win] != list(range(lo, hi + 1)):
            raise ValueError("1D windows must be contiguous intervals")
        from . import automaton1d

        auto = automaton1d.build_automaton(sft)

        def global_oracle(cells: dict) -> bool:
            word = tuple(cells[c] for c in sorted(cells))
            return automaton1d.is_globally_admissible(auto, word)

    for k in range(cap + 1):
        inflated = minkowski_sum(win, k, sft.dim)
        good = True
        for assign in _enumerate_admissible(sft, inflated, budget):
            restr = {c: assign[c] for c in win}
            if not global_oracle(restr):
                good = False
                break
        if good:
            return k
    raise CapExceeded(f"no reconstruction radius up to {cap}")


def apply_local_map(lmap: LocalMap, grid: Grid) -> Grid:
    """Apply a sliding-block map; the output lives on the interior where
    the whole window fits."""
    dim = grid.dim
    offs = lmap.window
    if not offs:
        raise ValueError("empty window")
    mins = tuple(min(o[i] for o in offs) for i in range(dim))
    maxs = tuple(max(o[i] for o in offs) for i in range(dim))
    out_shape = tuple(grid.shape[i] - (maxs[i] - mins[i]) for i in range(dim))
    if any(s <= 0 for s in out_shape):
        raise ValueError("box too small for the window")
    stacks = []
    for off in offs:
        sl = tuple(slice(off[i] - mins[i], off[i] - mins[i] + out_shape[i])
                   for i in range(dim))
        stacks.append(grid.data[sl])
    out = np.empty(out_shape, dtype=grid.data.dtype)
    it = np.nditer(stacks[0], flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        key = tuple(int(st[idx]) for st in stacks)
        try:
            out[idx] = lmap.table[key]
        except KeyError:
            raise KeyError(f"local map has no entry for window contents {key}") from None
    new_origin = tuple(grid.origin[i] - mins[i] for i in range(dim))
    return Grid(new_origin, out)


def thicken(mask: NoiseMask, n: int) -> NoiseMask:
    """The n-thickening: a cell is obscured when any cell within
    L-infinity distance n of it is.  Free boundary, so the box shrinks by
    n on every side; n = 0 is the identity."""
    if n < 0:
        raise ValueError("thickening radius must be nonnegative")
    if n == 0:
        return mask
    if any(s <= 2 * n for s in mask.shape):
        raise ValueError("box too small to thicken")
    fat = ndimage.maximum_filter(mask.data, size=2 * n + 1, mode="constant")
    crop = tuple(slice(n, s - n) for s in mask.shape)
    return NoiseMask(tuple(o + n for o in mask.origin), fat[crop],
                     meta=dict(mask.meta))


def extend_dimension(sft: Sft, dim: int, axis: int = 0) -> Sft:
    """Lift a 1D SFT to `dim` dimensions, words running along `axis`."""
    if sft.dim != 1:
        raise ValueError("only 1D SFTs can be lifted")
    if not 0 <= axis < dim:
        raise ValueError("bad axis")
    pats = []
    for p in sft.forbidden:
        cells = []
        for off, sym in p.cells:
            vec = [0] * dim
            vec[axis] = off[0]
            cells.append((tuple(vec), sym))
        pats.append(Pattern.from_cells(cells))
    return Sft(dim=dim, alphabet=sft.alphabet, forbidden=frozenset(pats))


GOLDEN_MEAN = word_sft("01", ["11"])
ALTERNATING = word_sft("01", ["00", "11"])
FULL_SHIFT_2 = Sft(dim=1, alphabet=("0", "1"), forbidden=frozenset())
