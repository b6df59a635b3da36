"""Minimal incremental CNF engine used as the MARCO seed generator.

One Boolean variable per referenced input dimension; clauses only ever grow
(monotone blocking of explored lattice regions). The solver is plain DPLL with
unit propagation and chronological backtracking, branching default-polarity
first; a greedy single-flip pass afterwards pushes the model toward the
default polarity, which biases seeds to the top of the power-set lattice and
keeps Grow cheap. Clause learning, restarts and proof logging are out of
scope: formulas here stay tiny (at most a few dozen variables, only blocking
clauses).
"""

from __future__ import annotations

from typing import Iterable, Mapping

__all__ = ["SeedFormula"]

# A literal is (variable, wanted polarity); a clause is a tuple of literals.
Literal = tuple[int, bool]
Clause = tuple[Literal, ...]


class SeedFormula:
    """A growable CNF over a fixed set of Boolean variables."""

    def __init__(self, variables: Iterable[int], default_polarity: bool = True):
        self.variables: tuple[int, ...] = tuple(sorted(set(variables)))
        self.default_polarity = default_polarity
        self.clauses: list[Clause] = []

    # -- clause construction --------------------------------------------------

    def _check_vars(self, indices: Iterable[int], what: str) -> set[int]:
        s = set(indices)
        unknown = s - set(self.variables)
        if unknown:
            raise ValueError(f"{what} mentions unknown variables {sorted(unknown)}")
        return s

    def add_clause(self, literals: Iterable[Literal]) -> None:
        clause = tuple(sorted(set(literals)))
        self._check_vars((v for v, _ in clause), "clause")
        self.clauses.append(clause)

    def block_subsets(self, subset: Iterable[int], universe: Iterable[int]) -> None:
        """Require every future model to include some element outside ``subset``.

        Blocks all subsets of ``subset`` (viewed as true-variable sets). When
        subset == universe this adds the empty clause: the formula becomes
        permanently unsatisfiable, the valid terminal state after the top
        element itself was satisfiable.
        """
        s = self._check_vars(subset, "block_subsets")
        u = self._check_vars(universe, "block_subsets universe")
        if not s <= u:
            raise ValueError("subset must be contained in universe")
        self.add_clause((v, True) for v in u - s)

    def block_supersets(self, subset: Iterable[int]) -> None:
        """Exclude all supersets of ``subset``: some member must be false."""
        s = self._check_vars(subset, "block_supersets")
        if not s:
            raise ValueError("block_supersets needs a nonempty set")
        self.add_clause((v, False) for v in s)

    # -- solving ---------------------------------------------------------------

    def satisfies(self, model: Mapping[int, bool]) -> bool:
        return all(
            any(model[var] == want for var, want in clause) if clause else False
            for clause in self.clauses
        )

    def solve(self) -> dict[int, bool] | None:
        """A total satisfying assignment, or None when unsatisfiable.

        Free variables take the default polarity; the returned model cannot
        have any single variable flipped to the default polarity without
        violating a clause.
        """
        partial = self._dpll({})
        if partial is None:
            return None
        model = {v: partial.get(v, self.default_polarity) for v in self.variables}
        for v in self.variables:
            if model[v] != self.default_polarity:
                model[v] = self.default_polarity
                if not self.satisfies(model):
                    model[v] = not self.default_polarity
        assert self.satisfies(model)
        return model

    def _dpll(self, assign: dict[int, bool]) -> dict[int, bool] | None:
        assign = dict(assign)
        while True:
            unit: Literal | None = None
            for clause in self.clauses:
                satisfied = False
                unassigned: list[Literal] = []
                for var, want in clause:
                    cur = assign.get(var)
                    if cur is None:
                        unassigned.append((var, want))
                    elif cur == want:
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not unassigned:
                    return None  # conflict (covers the empty clause)
                if len(unassigned) == 1:
                    unit = unassigned[0]
                    break
            if unit is None:
                break
            assign[unit[0]] = unit[1]

        branch = next((v for v in self.variables if v not in assign), None)
        if branch is None:
            return assign
        for want in (self.default_polarity, not self.default_polarity):
            assign[branch] = want
            result = self._dpll(assign)
            if result is not None:
                return result
        del assign[branch]
        return None

    # -- debugging ---------------------------------------------------------------

    def to_dimacs(self) -> str:
        """DIMACS CNF text; variable k maps to the k-th smallest index."""
        num = {v: i + 1 for i, v in enumerate(self.variables)}
        lines = [f"c vars: {' '.join(f'{num[v]}={v}' for v in self.variables)}"]
        lines.append(f"p cnf {len(self.variables)} {len(self.clauses)}")
        for clause in self.clauses:
            lits = " ".join(str(num[v] if want else -num[v]) for v, want in clause)
            lines.append((lits + " 0").strip())
        return "\n".join(lines) + "\n"
