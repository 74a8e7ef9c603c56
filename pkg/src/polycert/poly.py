"""Sparse multivariate polynomials over float coefficients.

Monomials are exponent tuples of fixed length (the ambient variable count).
Polynomials are dicts from monomial to coefficient, kept canonical: no stored
coefficient is exactly zero. Canonicalization never rounds; only coefficients
that come out exactly 0.0 after arithmetic are dropped, so the structure of
the algebra stays exact even though coefficients are floats.

Variables are anonymous indices 0..n-1. The textual form writes them as
``x0, x1, ...``; any naming for humans happens at the CLI boundary.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

Monomial = tuple[int, ...]


def grlex_key(m: Monomial) -> tuple:
    """Sort key realizing graded lexicographic order (degree, then lex)."""
    return (sum(m), tuple(-e for e in m))


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def monomial_degree(m: Monomial) -> int:
    return sum(m)


class Polynomial:
    """Immutable-by-convention sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, float] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[Monomial, float] = {}
        if terms:
            for mono, coeff in terms.items():
                if len(mono) != nvars:
                    raise ValueError(
                        f"monomial {mono} has length {len(mono)}, expected {nvars}"
                    )
                if any(e < 0 for e in mono):
                    raise ValueError(f"negative exponent in monomial {mono}")
                c = float(coeff)
                if c != 0.0:
                    key = tuple(int(e) for e in mono)
                    clean[key] = clean.get(key, 0.0) + c
                    if clean[key] == 0.0:
                        del clean[key]
        object.__setattr__(self, "nvars", int(nvars))
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @staticmethod
    def zero(nvars: int) -> "Polynomial":
        return Polynomial(nvars, {})

    @staticmethod
    def constant(nvars: int, c: float) -> "Polynomial":
        return Polynomial(nvars, {(0,) * nvars: c})

    @staticmethod
    def variable(nvars: int, index: int) -> "Polynomial":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for nvars={nvars}")
        mono = tuple(1 if i == index else 0 for i in range(nvars))
        return Polynomial(nvars, {mono: 1.0})

    @staticmethod
    def monomial(mono: Monomial, coeff: float = 1.0) -> "Polynomial":
        return Polynomial(len(mono), {tuple(mono): coeff})

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0 by convention."""
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def coeff(self, mono: Monomial) -> float:
        return self.terms.get(tuple(mono), 0.0)

    def constant_term(self) -> float:
        return self.terms.get((0,) * self.nvars, 0.0)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        return add(self, other * -1.0)

    def __rsub__(self, other) -> "Polynomial":
        return (self * -1.0) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            c = float(other)
            return Polynomial(self.nvars, {m: c * v for m, v in self.terms.items()})
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self * -1.0

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        n = k
        while n:
            if n & 1:
                result = mul(result, base)
            base = mul(base, base)
            n >>= 1
        return result

    def __call__(self, point: Sequence[float]) -> float:
        return evaluate(self, point)

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {poly_to_text(self)!r})"


def _check_same_nvars(a: Polynomial, b: Polynomial) -> None:
    if a.nvars != b.nvars:
        raise ValueError(f"variable count mismatch: {a.nvars} vs {b.nvars}")


def add(a: Polynomial, b: Polynomial) -> Polynomial:
    """Coefficientwise sum in canonical form."""
    _check_same_nvars(a, b)
    terms = dict(a.terms)
    for mono, coeff in b.terms.items():
        s = terms.get(mono, 0.0) + coeff
        if s == 0.0:
            terms.pop(mono, None)
        else:
            terms[mono] = s
    out = Polynomial.__new__(Polynomial)
    object.__setattr__(out, "nvars", a.nvars)
    object.__setattr__(out, "terms", terms)
    return out


def mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Distributive product in canonical form."""
    _check_same_nvars(a, b)
    terms: dict[Monomial, float] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            mono = tuple(x + y for x, y in zip(ma, mb))
            s = terms.get(mono, 0.0) + ca * cb
            if s == 0.0:
                terms.pop(mono, None)
            else:
                terms[mono] = s
    out = Polynomial.__new__(Polynomial)
    object.__setattr__(out, "nvars", a.nvars)
    object.__setattr__(out, "terms", terms)
    return out


def evaluate(p: Polynomial, point: Sequence[float]) -> float:
    """Numeric value of p at the point."""
    if len(point) != p.nvars:
        raise ValueError(f"point length {len(point)} != nvars {p.nvars}")
    total = 0.0
    for mono, coeff in p.terms.items():
        v = coeff
        for x, e in zip(point, mono):
            if e:
                v *= x**e
        total += v
    return total


def partial_derivative(p: Polynomial, var_index: int) -> Polynomial:
    """Formal partial derivative with respect to variable ``var_index``."""
    if not 0 <= var_index < p.nvars:
        raise IndexError(f"variable index {var_index} out of range")
    terms: dict[Monomial, float] = {}
    for mono, coeff in p.terms.items():
        e = mono[var_index]
        if e == 0:
            continue
        lowered = tuple(
            v - 1 if i == var_index else v for i, v in enumerate(mono)
        )
        terms[lowered] = terms.get(lowered, 0.0) + coeff * e
    return Polynomial(p.nvars, terms)


def lie_derivative(V: Polynomial, f: Sequence[Polynomial]) -> Polynomial:
    """Directional derivative <grad V, f> along the vector field f."""
    if len(f) != V.nvars:
        raise ValueError(f"field has {len(f)} components, expected {V.nvars}")
    acc = Polynomial.zero(V.nvars)
    for i, fi in enumerate(f):
        _check_same_nvars(V, fi)
        acc = add(acc, mul(partial_derivative(V, i), fi))
    return acc


def substitute_affine(
    p: Polynomial, A: Sequence[Sequence[float]], b: Sequence[float]
) -> Polynomial:
    """Expand q(x) = p(Ax + b) to canonical form.

    A is nvars x nvars and b has length nvars; A need not be invertible.
    Each original variable x_i is replaced by the affine form
    sum_j A[i][j] x_j + b_i, and powers of the forms are built incrementally
    so repeated exponents share work.
    """
    n = p.nvars
    if len(A) != n or any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("A must be nvars x nvars and b of length nvars")
    forms = []
    for i in range(n):
        terms: dict[Monomial, float] = {}
        const = float(b[i])
        if const != 0.0:
            terms[(0,) * n] = const
        for j in range(n):
            aij = float(A[i][j])
            if aij != 0.0:
                mono = tuple(1 if k == j else 0 for k in range(n))
                terms[mono] = aij
        forms.append(Polynomial(n, terms))

    max_pow = [0] * n
    for mono in p.terms:
        for i, e in enumerate(mono):
            max_pow[i] = max(max_pow[i], e)
    powers: list[list[Polynomial]] = []
    for i in range(n):
        row = [Polynomial.constant(n, 1.0)]
        for _ in range(max_pow[i]):
            row.append(mul(row[-1], forms[i]))
        powers.append(row)

    acc = Polynomial.zero(n)
    for mono, coeff in p.terms.items():
        term = Polynomial.constant(n, coeff)
        for i, e in enumerate(mono):
            if e:
                term = mul(term, powers[i][e])
        acc = add(acc, term)
    return acc


def monomial_basis(n: int, d: int) -> list[Monomial]:
    """All monomials in n variables of total degree <= d, graded-lex ordered.

    The count is C(n + d, d).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 0:
        raise ValueError("d must be >= 0")

    def exact(nv: int, total: int) -> Iterator[tuple[int, ...]]:
        if nv == 1:
            yield (total,)
            return
        for lead in range(total, -1, -1):
            for rest in exact(nv - 1, total - lead):
                yield (lead,) + rest

    basis: list[Monomial] = []
    for total in range(d + 1):
        basis.extend(exact(n, total))
    return basis


def taylor_trig(kind: str, center: float, degree: int) -> Polynomial:
    """Truncated Taylor series of sin or cos about ``center``.

    Returns a univariate polynomial in the offset variable t, approximating
    sin(center + t) or cos(center + t) up to the requested degree. Derivative
    values at the center come from the exact four-cycle of sin/cos rather
    than evaluating shifted arguments, to keep signs exact.
    """
    if kind not in ("sin", "cos"):
        raise ValueError("kind must be 'sin' or 'cos'")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    s, c = math.sin(center), math.cos(center)
    cycle = (s, c, -s, -c) if kind == "sin" else (c, -s, -c, s)
    terms: dict[Monomial, float] = {}
    fact = 1.0
    for k in range(degree + 1):
        if k > 0:
            fact *= k
        coeff = cycle[k % 4] / fact
        if coeff != 0.0:
            terms[(k,)] = coeff
    return Polynomial(1, terms)


def poly_allclose(a: Polynomial, b: Polynomial, tol: float = 1e-9) -> bool:
    """Coefficientwise closeness (absolute tolerance) over the union support."""
    _check_same_nvars(a, b)
    for mono in set(a.terms) | set(b.terms):
        if abs(a.terms.get(mono, 0.0) - b.terms.get(mono, 0.0)) > tol:
            return False
    return True


def max_coeff_diff(a: Polynomial, b: Polynomial) -> float:
    """Max absolute coefficient difference over the union support."""
    _check_same_nvars(a, b)
    worst = 0.0
    for mono in set(a.terms) | set(b.terms):
        worst = max(worst, abs(a.terms.get(mono, 0.0) - b.terms.get(mono, 0.0)))
    return worst


def extend_vars(p: Polynomial, new_nvars: int) -> Polynomial:
    """Reinterpret p in a larger variable space (new variables unused)."""
    if new_nvars < p.nvars:
        raise ValueError("cannot shrink variable space")
    pad = (0,) * (new_nvars - p.nvars)
    return Polynomial(new_nvars, {m + pad: c for m, c in p.terms.items()})


def poly_to_text(p: Polynomial) -> str:
    """Serialize as ``coeff * x0^a x1^b ...`` terms joined by `` + ``.

    Terms appear in graded-lex order and coefficients use repr() so that a
    parse of the printed form reproduces the polynomial bit for bit. The
    zero polynomial prints as ``0``.
    """
    if not p.terms:
        return "0"
    parts = []
    for mono in sorted(p.terms, key=grlex_key):
        coeff = p.terms[mono]
        factors = [f"x{i}^{e}" for i, e in enumerate(mono) if e]
        if factors:
            parts.append(f"{coeff!r} * " + " ".join(factors))
        else:
            parts.append(repr(coeff))
    return " + ".join(parts)


def poly_from_text(text: str, nvars: int | None = None) -> Polynomial:
    """Parse the output of :func:`poly_to_text`.

    When ``nvars`` is omitted it is inferred as 1 + the largest variable
    index mentioned (0 for a constant).
    """
    text = text.strip()
    raw_terms: list[tuple[dict[int, int], float]] = []
    max_index = -1
    if text != "0":
        for chunk in text.split(" + "):
            chunk = chunk.strip()
            if not chunk:
                raise ValueError("empty term in polynomial text")
            if "*" in chunk:
                coeff_text, _, factor_text = chunk.partition("*")
                coeff = float(coeff_text.strip())
                exps: dict[int, int] = {}
                for factor in factor_text.split():
                    if not factor.startswith("x") or "^" not in factor:
                        raise ValueError(f"bad factor {factor!r}")
                    idx_text, _, exp_text = factor[1:].partition("^")
                    idx, exp = int(idx_text), int(exp_text)
                    if exp <= 0:
                        raise ValueError(f"bad exponent in {factor!r}")
                    exps[idx] = exps.get(idx, 0) + exp
                    max_index = max(max_index, idx)
                raw_terms.append((exps, coeff))
            else:
                raw_terms.append(({}, float(chunk)))
    n = (max_index + 1 if max_index >= 0 else 1) if nvars is None else nvars
    if max_index >= n:
        raise ValueError(f"variable x{max_index} out of range for nvars={n}")
    terms: dict[Monomial, float] = {}
    for exps, coeff in raw_terms:
        mono = tuple(exps.get(i, 0) for i in range(n))
        terms[mono] = terms.get(mono, 0.0) + coeff
    return Polynomial(n, terms)
