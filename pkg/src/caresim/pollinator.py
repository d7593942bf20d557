"""Pollinator puzzles: generation, exhaustive solving, answer scoring.

Ten cells take the digits 0-9, each exactly once; every petal constrains one
pair of cells with an arithmetic fact. Pairs are unordered, so subtraction
means absolute difference and division means the exact ratio of the larger to
the smaller value (kept as a rational, never a float). The bundled flower
layout is a ring of ten cells with petals between neighbors, plus chords
added until the solution is unique.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from itertools import permutations
from typing import Iterator

N_CELLS = 10
OPS = ("+", "-", "x", "/")

FORMAT_TAG = "pollinator-puzzle v1"


class GenerationError(RuntimeError):
    pass


def _op_value(op: str, a: int, b: int) -> Fraction | None:
    """Value of the unordered pair (a, b) under op; None when undefined."""
    if op == "+":
        return Fraction(a + b)
    if op == "-":
        return Fraction(abs(a - b))
    if op == "x":
        return Fraction(a * b)
    if op == "/":
        lo, hi = min(a, b), max(a, b)
        if lo == 0:
            return None
        return Fraction(hi, lo)
    raise ValueError(f"unknown op {op!r}")


@dataclass(frozen=True)
class Constraint:
    cell_a: int
    cell_b: int
    op: str
    target: Fraction

    def __post_init__(self) -> None:
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}")
        for cell in (self.cell_a, self.cell_b):
            if not (0 <= cell < N_CELLS):
                raise ValueError(f"cell index {cell} out of range")
        if self.cell_a == self.cell_b:
            raise ValueError("constraint endpoints must be distinct cells")

    def satisfied(self, a: int, b: int) -> bool:
        return _op_value(self.op, a, b) == self.target

    def encode(self) -> str:
        return f"constraint {self.cell_a} {self.cell_b} {self.op} {self.target}"


@dataclass
class Puzzle:
    constraints: list[Constraint]
    solution: tuple[int, ...] | None = None  # hidden from solvers

    def __post_init__(self) -> None:
        if self.solution is not None:
            if sorted(self.solution) != list(range(N_CELLS)):
                raise ValueError("solution must be a permutation of the digits 0-9")

    def to_text(self, reveal_solution: bool = False) -> str:
        lines = [f"# {FORMAT_TAG}", f"cells {N_CELLS}"]
        lines.extend(c.encode() for c in self.constraints)
        if reveal_solution and self.solution is not None:
            lines.append("solution " + " ".join(map(str, self.solution)))
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path, reveal_solution: bool = False) -> None:
        Path(path).write_text(self.to_text(reveal_solution))

    @classmethod
    def from_text(cls, text: str) -> "Puzzle":
        constraints: list[Constraint] = []
        solution = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if parts[0] == "cells":
                if int(parts[1]) != N_CELLS:
                    raise ValueError(f"line {lineno}: only {N_CELLS}-cell puzzles supported")
            elif parts[0] == "constraint":
                constraints.append(
                    Constraint(int(parts[1]), int(parts[2]), parts[3], Fraction(parts[4]))
                )
            elif parts[0] == "solution":
                solution = tuple(int(v) for v in parts[1:])
            else:
                raise ValueError(f"line {lineno}: unknown directive {parts[0]!r}")
        return cls(constraints=constraints, solution=solution)

    @classmethod
    def load(cls, path: str | Path) -> "Puzzle":
        return cls.from_text(Path(path).read_text())


def iter_solutions(puzzle: Puzzle) -> Iterator[tuple[int, ...]]:
    """Backtracking over all digit placements, most-constrained cells first.

    Constraints are checked as soon as both endpoints are assigned, so the
    search is exhaustive with pruning; the full solution set equals naive
    enumeration of all 10! permutations.
    """
    degree = [0] * N_CELLS
    for constraint in puzzle.constraints:
        degree[constraint.cell_a] += 1
        degree[constraint.cell_b] += 1
    order = sorted(range(N_CELLS), key=lambda cell: (-degree[cell], cell))
    position = {cell: i for i, cell in enumerate(order)}

    # For each cell (in search order), constraints whose other endpoint is
    # assigned earlier, as (earlier cell, op, target).
    checks: list[list[tuple[int, str, Fraction]]] = [[] for _ in range(N_CELLS)]
    for constraint in puzzle.constraints:
        a, b = constraint.cell_a, constraint.cell_b
        late, early = (a, b) if position[a] > position[b] else (b, a)
        checks[position[late]].append((early, constraint.op, constraint.target))

    # Cells past the last constrained one are a free tail: every arrangement
    # of the remaining digits works, so enumerate those as permutations.
    free_tail = N_CELLS
    while free_tail > 0 and not checks[free_tail - 1]:
        free_tail -= 1

    assignment = [-1] * N_CELLS  # indexed by cell
    used = [False] * N_CELLS

    def extend(depth: int) -> Iterator[tuple[int, ...]]:
        if depth >= free_tail:
            remaining = [d for d in range(N_CELLS) if not used[d]]
            tail_cells = order[depth:]
            for perm in permutations(remaining):
                out = assignment.copy()
                for cell, digit in zip(tail_cells, perm):
                    out[cell] = digit
                yield tuple(out)
            return
        cell = order[depth]
        cell_checks = checks[depth]
        for digit in range(N_CELLS):
            if used[digit]:
                continue
            ok = True
            for other, op, target in cell_checks:
                if _op_value(op, digit, assignment[other]) != target:
                    ok = False
                    break
            if ok:
                assignment[cell] = digit
                used[digit] = True
                yield from extend(depth + 1)
                used[digit] = False
                assignment[cell] = -1

    return extend(0)


def solve(puzzle: Puzzle, limit: int | None = None) -> list[tuple[int, ...]]:
    """All satisfying placements in canonical (sorted) order.

    ``limit`` stops the search early (2 suffices for uniqueness checks);
    an empty list means the puzzle is unsatisfiable.
    """
    solutions: list[tuple[int, ...]] = []
    for solution in iter_solutions(puzzle):
        solutions.append(solution)
        if limit is not None and len(solutions) >= limit:
            break
    solutions.sort()
    return solutions


def ring_edges() -> list[tuple[int, int]]:
    return [(i, (i + 1) % N_CELLS) for i in range(N_CELLS)]


def _valid_ops(op_palette, a: int, b: int) -> list[str]:
    return [op for op in op_palette if _op_value(op, a, b) is not None]


def generate(
    rng: random.Random,
    op_palette=OPS,
    n_constraints: int = 10,
    max_extra: int = 25,
    max_attempts: int = 40,
) -> Puzzle:
    """Build a unique-solution puzzle around a secret permutation.

    Starts from the flower ring (neighbor petals), then adds random chord
    constraints until the solver proves uniqueness. Raises
    :class:`GenerationError` after a bounded number of attempts.
    """
    bad_ops = set(op_palette) - set(OPS)
    if bad_ops:
        raise ValueError(f"unknown ops in palette: {sorted(bad_ops)}")
    if n_constraints < 9:
        raise ValueError(
            "n_constraints must be at least 9 to connect all ten cells"
        )

    for _ in range(max_attempts):
        secret = tuple(rng.sample(range(N_CELLS), N_CELLS))
        edges = ring_edges()
        rng.shuffle(edges)
        all_pairs = [
            (a, b) for a in range(N_CELLS) for b in range(a + 1, N_CELLS)
        ]
        chord_pool = [p for p in all_pairs if p not in {tuple(sorted(e)) for e in edges}]
        rng.shuffle(chord_pool)
        while len(edges) < n_constraints and chord_pool:
            edges.append(chord_pool.pop())

        constraints: list[Constraint] = []
        ok = True
        for a, b in edges[:n_constraints]:
            ops = _valid_ops(op_palette, secret[a], secret[b])
            if not ops:
                ok = False
                break
            op = rng.choice(ops)
            constraints.append(Constraint(a, b, op, _op_value(op, secret[a], secret[b])))
        if not ok:
            continue

        puzzle = Puzzle(constraints=constraints, solution=secret)
        for _ in range(max_extra + 1):
            found = solve(puzzle, limit=2)
            if found == [secret]:
                return puzzle
            if not chord_pool:
                break
            a, b = chord_pool.pop()
            ops = _valid_ops(op_palette, secret[a], secret[b])
            if not ops:
                continue
            op = rng.choice(ops)
            puzzle.constraints.append(
                Constraint(a, b, op, _op_value(op, secret[a], secret[b]))
            )
    raise GenerationError(
        f"could not reach a unique solution in {max_attempts} attempts "
        f"(palette {list(op_palette)}, n_constraints {n_constraints})"
    )


@dataclass(frozen=True)
class PuzzleAnswer:
    """Digits entered by a caretaker; duplicates are rejected at entry."""

    filled: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cell, digit in self.filled.items():
            if not (0 <= int(cell) < N_CELLS):
                raise ValueError(f"cell index {cell} out of range")
            if not (0 <= int(digit) < 10):
                raise ValueError(f"digit {digit} out of range")
        digits = list(self.filled.values())
        if len(set(digits)) != len(digits):
            raise ValueError("answer digits must be distinct")


def score(
    answer: PuzzleAnswer,
    solution: tuple[int, ...],
    y_denominator: str = "filled",
) -> tuple[float, float, float]:
    """Completeness X, accuracy Y and the combined metric Z = 0.4X + 0.6Y.

    X is the percentage of the ten fields filled. Y defaults to the accuracy
    of the attempted fields (correct / filled); pass ``y_denominator="all"``
    to measure accuracy against all ten fields instead.
    """
    if y_denominator not in ("filled", "all"):
        raise ValueError("y_denominator must be 'filled' or 'all'")
    filled = len(answer.filled)
    correct = sum(
        1 for cell, digit in answer.filled.items() if solution[int(cell)] == int(digit)
    )
    x = 100.0 * filled / N_CELLS
    if y_denominator == "all":
        y = 100.0 * correct / N_CELLS
    else:
        y = 100.0 * correct / filled if filled else 0.0
    z = 0.4 * x + 0.6 * y
    return x, y, z
