"""Puzzle solver exhaustiveness, generation uniqueness and scoring."""

import random
from fractions import Fraction
from itertools import islice, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caresim.pollinator import (
    Constraint,
    GenerationError,
    Puzzle,
    PuzzleAnswer,
    generate,
    iter_solutions,
    ring_edges,
    score,
    solve,
)


def naive_solutions(puzzle):
    """Independent oracle: scan all 10! permutations with plain int math."""
    checks = []
    for c in puzzle.constraints:
        checks.append((c.cell_a, c.cell_b, c.op, c.target.numerator, c.target.denominator))
    out = []
    for perm in permutations(range(10)):
        ok = True
        for a, b, op, num, den in checks:
            x, y = perm[a], perm[b]
            if op == "+":
                good = (x + y) * den == num
            elif op == "-":
                good = abs(x - y) * den == num
            elif op == "x":
                good = x * y * den == num
            else:
                lo, hi = min(x, y), max(x, y)
                good = lo != 0 and hi * den == num * lo
            if not good:
                ok = False
                break
        if ok:
            out.append(perm)
    return out


class TestSolve:
    def test_unconstrained_puzzle_has_factorial_many_solutions(self):
        count = sum(1 for _ in iter_solutions(Puzzle(constraints=[])))
        assert count == 3_628_800

    def test_adjacent_product_chain_pins_the_permutation(self):
        secret = (3, 1, 4, 0, 5, 9, 2, 6, 8, 7)
        constraints = [
            Constraint(a, b, "x", Fraction(secret[a] * secret[b]))
            for a, b in ring_edges()
        ]
        # plus one sum to break the ring's reversal symmetry if present
        constraints.append(Constraint(0, 2, "+", Fraction(secret[0] + secret[2])))
        found = solve(Puzzle(constraints=constraints))
        assert found == naive_solutions(Puzzle(constraints=constraints))
        assert secret in found

    def test_contradictory_constraints_unsatisfiable(self):
        constraints = [
            Constraint(0, 1, "+", Fraction(0)),  # needs 0+0, impossible distinct
            Constraint(0, 1, "x", Fraction(9)),
        ]
        assert solve(Puzzle(constraints=constraints)) == []

    def test_matches_naive_enumeration_on_loose_puzzle(self):
        constraints = [
            Constraint(0, 1, "+", Fraction(9)),
            Constraint(2, 3, "x", Fraction(12)),
            Constraint(4, 5, "-", Fraction(2)),
        ]
        puzzle = Puzzle(constraints=constraints)
        assert solve(puzzle) == naive_solutions(puzzle)

    def test_division_targets_are_exact_rationals(self):
        constraint = Constraint(0, 1, "/", Fraction(7, 3))
        assert constraint.satisfied(3, 7) and constraint.satisfied(7, 3)
        assert not constraint.satisfied(2, 5)
        assert not constraint.satisfied(0, 7)  # ratio undefined with zero

    def test_limit_stops_early(self):
        assert len(solve(Puzzle(constraints=[]), limit=2)) == 2


class TestGenerate:
    def test_generated_puzzles_are_unique_and_fast(self):
        for seed in range(25):
            puzzle = generate(random.Random(seed))
            found = solve(puzzle)
            assert found == [puzzle.solution], seed

    def test_same_seed_same_puzzle(self):
        first = generate(random.Random(42))
        second = generate(random.Random(42))
        assert first.constraints == second.constraints
        assert first.solution == second.solution

    def test_zero_constraints_rejected(self):
        with pytest.raises(ValueError):
            generate(random.Random(0), n_constraints=0)

    def test_unknown_ops_rejected(self):
        with pytest.raises(ValueError):
            generate(random.Random(0), op_palette=("+", "%"))

    def test_restricted_palette(self):
        puzzle = generate(random.Random(3), op_palette=("+", "x"))
        assert {c.op for c in puzzle.constraints} <= {"+", "x"}
        assert solve(puzzle) == [puzzle.solution]

    def test_unsatisfiable_palette_raises_generation_error(self):
        # difference-only puzzles are invariant under the digit complement
        # x -> 9 - x, so a unique solution is impossible for any budget
        with pytest.raises(GenerationError):
            generate(random.Random(0), op_palette=("-",), max_extra=5, max_attempts=3)


class TestScore:
    def test_perfect(self):
        solution = tuple(range(10))
        answer = PuzzleAnswer({i: i for i in range(10)})
        assert score(answer, solution) == (100.0, 100.0, 100.0)

    def test_half_filled_all_correct(self):
        solution = tuple(range(10))
        answer = PuzzleAnswer({i: i for i in range(5)})
        assert score(answer, solution) == (50.0, 100.0, 80.0)

    def test_empty(self):
        assert score(PuzzleAnswer({}), tuple(range(10))) == (0.0, 0.0, 0.0)

    def test_alternative_denominator(self):
        solution = tuple(range(10))
        answer = PuzzleAnswer({i: i for i in range(5)})
        x, y, z = score(answer, solution, y_denominator="all")
        assert (x, y, z) == (50.0, 50.0, 50.0)

    def test_duplicate_digits_rejected_at_entry(self):
        with pytest.raises(ValueError):
            PuzzleAnswer({0: 4, 1: 4})

    @staticmethod
    def answer_with(n_filled: int, n_correct: int) -> PuzzleAnswer:
        """Fill cells 0..n_filled-1 against solution (0, 1, ..., 9) with
        exactly n_correct correct entries; wrong cells borrow digits >= n_filled
        so they can never be accidentally right."""
        filled = {i: i for i in range(n_correct)}
        pool = iter(range(n_filled, 10))
        for i in range(n_correct, n_filled):
            filled[i] = next(pool)
        return PuzzleAnswer(filled)

    @given(n_filled=st.integers(min_value=1, max_value=10), data=st.data())
    @settings(max_examples=80, deadline=None)
    def test_z_bounded_and_monotone_in_correctness(self, n_filled, data):
        low = max(0, 2 * n_filled - 10)  # wrong cells need spare digits
        n_correct = data.draw(st.integers(min_value=low, max_value=n_filled))
        solution = tuple(range(10))
        x, y, z = score(self.answer_with(n_filled, n_correct), solution)
        assert 0.0 <= z <= 100.0
        if n_correct < n_filled:
            _, _, z_better = score(
                self.answer_with(n_filled, n_correct + 1), solution
            )
            assert z_better > z


class TestSerialization:
    def test_round_trip_with_solution(self):
        puzzle = generate(random.Random(5))
        text = puzzle.to_text(reveal_solution=True)
        loaded = Puzzle.from_text(text)
        assert loaded.constraints == puzzle.constraints
        assert loaded.solution == puzzle.solution

    def test_solution_hidden_by_default(self):
        puzzle = generate(random.Random(5))
        loaded = Puzzle.from_text(puzzle.to_text())
        assert loaded.solution is None
        assert solve(loaded) == [puzzle.solution]

    def test_rejects_unknown_directive(self):
        with pytest.raises(ValueError):
            Puzzle.from_text("gibberish 1 2 3\n")

    def test_rejects_bad_solution_permutation(self):
        with pytest.raises(ValueError):
            Puzzle(constraints=[], solution=(0,) * 10)
