"""Exact sparse multivariate polynomials over Python integers (or Fractions).

Monomials are packed into a single Python int: variable ``i`` owns the 16-bit
field starting at bit ``16*i``.  Multiplying monomials is then integer
addition of keys, which keeps the inner loops of ``mul`` tight.  Every
operand of a product is checked to keep its exponents below ``2**15`` so that
a sum of two fields can never carry into its neighbour.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
_GUARD_BIT = 1 << (FIELD_BITS - 1)

Coefficient = Union[int, Fraction]

ROLES = ("x", "factor", "aux")


class VariableTableMismatch(ValueError):
    pass


class VariableTable:
    """Ordered registry of variable names with roles.

    Roles are ``"x"`` (exactly three: x1, x2, x3), ``"factor"`` (triples
    a_j, b_j, c_j of the formal product) and ``"aux"`` (anything else, e.g.
    the Hesse parameter or the ten generic cubic coefficients).
    """

    def __init__(self, names: Sequence[str], roles: Sequence[str]):
        names = tuple(names)
        roles = tuple(roles)
        if len(names) != len(roles):
            raise ValueError("names and roles differ in length")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        for role in roles:
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r}")
        x_names = [n for n, r in zip(names, roles) if r == "x"]
        if x_names != ["x1", "x2", "x3"]:
            raise ValueError("a table carries exactly the x-variables x1, x2, x3 in order")
        order = [ROLES.index(r) for r in roles]
        if order != sorted(order):
            raise ValueError("variables are ordered x, then factor, then aux")
        n_factor = sum(1 for r in roles if r == "factor")
        if n_factor % 3:
            raise ValueError("factor variables come in triples")
        self.names = names
        self.roles = roles
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def standard(cls, r: int = 0, aux: Sequence[str] = (), factor_names=None) -> "VariableTable":
        """x1..x3, then a_j, b_j, c_j for j = 1..r, then auxiliary names."""
        names = ["x1", "x2", "x3"]
        roles = ["x", "x", "x"]
        if factor_names is None:
            factor_names = [(f"a{j}", f"b{j}", f"c{j}") for j in range(1, r + 1)]
        for triple in factor_names:
            names.extend(triple)
            roles.extend(["factor"] * 3)
        names.extend(aux)
        roles.extend(["aux"] * len(aux))
        return cls(names, roles)

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, VariableTable):
            return NotImplemented
        return self.names == other.names and self.roles == other.roles

    def __hash__(self) -> int:
        return hash((self.names, self.roles))

    def __repr__(self) -> str:
        return f"VariableTable({list(self.names)!r})"

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def names_with_role(self, role: str) -> Tuple[str, ...]:
        return tuple(n for n, r in zip(self.names, self.roles) if r == role)

    def factor_triples(self) -> Tuple[Tuple[str, str, str], ...]:
        f = self.names_with_role("factor")
        return tuple(tuple(f[i:i + 3]) for i in range(0, len(f), 3))

    def shift(self, name: str) -> int:
        return FIELD_BITS * self.index(name)

    def unit(self, name: str) -> int:
        """Packed key of the monomial consisting of the single variable."""
        return 1 << self.shift(name)

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            m |= FIELD_MASK << self.shift(n)
        return m

    def pack(self, exponents: Mapping[str, int]) -> int:
        key = 0
        for name, e in exponents.items():
            if e < 0:
                raise ValueError("negative exponent")
            if e >= _GUARD_BIT:
                raise OverflowError("exponent too large for packed monomial")
            key |= e << self.shift(name)
        return key

    def unpack(self, key: int) -> Tuple[int, ...]:
        return tuple((key >> (FIELD_BITS * i)) & FIELD_MASK for i in range(len(self.names)))

    def guard_mask(self) -> int:
        g = 0
        for i in range(len(self.names)):
            g |= _GUARD_BIT << (FIELD_BITS * i)
        return g

    def header(self) -> str:
        parts = []
        for role in ROLES:
            group = self.names_with_role(role)
            if group:
                parts.append(f"{role}:{','.join(group)}")
        return "vars " + " ".join(parts)

    @classmethod
    def from_header(cls, line: str) -> "VariableTable":
        if not line.startswith("vars"):
            raise ValueError("missing 'vars' header line")
        names, roles = [], []
        for part in line.split()[1:]:
            role, _, body = part.partition(":")
            for n in body.split(","):
                names.append(n)
                roles.append(role)
        return cls(names, roles)


def key_degree(key: int) -> int:
    """Total degree of a packed monomial (digit sum in base 2**16)."""
    total = 0
    while key:
        total += key & FIELD_MASK
        key >>= FIELD_BITS
    return total


class Polynomial:
    """Immutable sparse polynomial bound to a VariableTable.

    ``terms`` maps packed monomial keys to nonzero coefficients.
    """

    __slots__ = ("table", "_terms", "_or")

    def __init__(self, table: VariableTable, terms: Optional[Dict[int, Coefficient]] = None):
        self.table = table
        if terms is None:
            terms = {}
        else:
            terms = {k: c for k, c in terms.items() if c}
        self._terms = terms
        self._or = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def _raw(cls, table, terms):
        # internal: terms already free of zeros
        p = cls.__new__(cls)
        p.table = table
        p._terms = terms
        p._or = None
        return p

    @classmethod
    def constant(cls, table: VariableTable, c: Coefficient) -> "Polynomial":
        return cls(table, {0: c})

    @classmethod
    def variable(cls, table: VariableTable, name: str) -> "Polynomial":
        return cls._raw(table, {table.unit(name): 1})

    @classmethod
    def monomial(cls, table: VariableTable, exponents: Mapping[str, int], c: Coefficient = 1):
        return cls(table, {table.pack(exponents): c})

    @classmethod
    def from_terms(cls, table: VariableTable, terms: Iterable[Tuple[Mapping[str, int], Coefficient]]):
        out: Dict[int, Coefficient] = {}
        for exps, c in terms:
            k = table.pack(exps)
            out[k] = out.get(k, 0) + c
        return cls(table, out)

    # -- basic protocol ----------------------------------------------------
    @property
    def raw_terms(self) -> Dict[int, Coefficient]:
        """The packed-key term dict.  Treat as read-only."""
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.table == other.table and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self._terms
            return self._terms == {0: other}
        return NotImplemented

    def __hash__(self):
        return hash((self.table, frozenset(self._terms.items())))

    def _check(self, other: "Polynomial"):
        if self.table is not other.table and self.table != other.table:
            raise VariableTableMismatch("polynomials live over different variable tables")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.table, other)
        return NotImplemented

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for k, c in small.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                del out[k]
        return Polynomial._raw(self.table, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.table, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Coefficient) -> "Polynomial":
        if not c:
            return Polynomial._raw(self.table, {})
        return Polynomial._raw(self.table, {k: v * c for k, v in self._terms.items()})

    def _or_keys(self) -> int:
        if self._or is None:
            acc = 0
            for k in self._terms:
                acc |= k
            self._or = acc
        return self._or

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        guard = self.table.guard_mask()
        if (self._or_keys() | other._or_keys()) & guard:
            raise OverflowError("exponent too large for packed monomial product")
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out: Dict[int, Coefficient] = {}
        get = out.get
        b_items = list(b.items())
        for k1, c1 in a.items():
            for k2, c2 in b_items:
                k = k1 + k2
                out[k] = get(k, 0) + c1 * c2
        return Polynomial._raw(self.table, {k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.table, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exact_div(self, c: int) -> "Polynomial":
        """Divide every coefficient by the integer ``c``; raise if not exact."""
        out = {}
        for k, v in self._terms.items():
            q, rem = divmod(v, c)
            if rem:
                raise ArithmeticError(f"coefficient {v} not divisible by {c}")
            out[k] = q
        return Polynomial._raw(self.table, out)

    # -- calculus and extraction ----------------------------------------------
    def partial_derivative(self, name: str) -> "Polynomial":
        shift = self.table.shift(name)
        unit = 1 << shift
        out = {}
        for k, c in self._terms.items():
            e = (k >> shift) & FIELD_MASK
            if e:
                out[k - unit] = c * e
        return Polynomial._raw(self.table, out)

    def coefficient_of(self, pattern: Mapping[str, int]) -> "Polynomial":
        """Coefficient of the partial monomial ``pattern`` as a polynomial in
        the variables not named in it."""
        mask = self.table.mask(pattern)
        target = self.table.pack(pattern)
        out = {}
        for k, c in self._terms.items():
            if k & mask == target:
                out[k - target] = c
        return Polynomial._raw(self.table, out)

    def coefficient(self, exponents: Mapping[str, int]) -> Coefficient:
        """Scalar coefficient of a full monomial (unnamed exponents are 0)."""
        return self._terms.get(self.table.pack(exponents), 0)

    def evaluate(self, assignment: Mapping[str, Coefficient]) -> Fraction:
        """Exact value with every occurring variable assigned."""
        used = self.variables()
        missing = [n for n in used if n not in assignment]
        if missing:
            raise KeyError(f"missing assignment for {missing}")
        return Fraction(self.substitute(assignment).constant_term())

    def substitute(self, assignment: Mapping[str, Coefficient]) -> "Polynomial":
        """Replace the named variables by exact numbers."""
        items = [(self.table.shift(n), Fraction(v)) for n, v in assignment.items()]
        mask = self.table.mask(assignment)
        out: Dict[int, Coefficient] = {}
        for k, c in self._terms.items():
            val = Fraction(c)
            for shift, v in items:
                e = (k >> shift) & FIELD_MASK
                if e:
                    val *= v ** e
            if val:
                nk = k & ~mask
                out[nk] = out.get(nk, 0) + val
        return Polynomial(self.table, {k: _demote(v) for k, v in out.items()})

    def constant_term(self) -> Coefficient:
        return self._terms.get(0, 0)

    def variables(self) -> Tuple[str, ...]:
        acc = self._or_keys()
        return tuple(n for i, n in enumerate(self.table.names) if (acc >> (FIELD_BITS * i)) & FIELD_MASK)

    def degree(self, names: Optional[Iterable[str]] = None) -> int:
        """Maximum total degree, optionally restricted to ``names``; -1 for 0."""
        if not self._terms:
            return -1
        mask = self.table.mask(names) if names is not None else -1
        return max(key_degree(k & mask) for k in self._terms)

    def degrees(self, names: Iterable[str]) -> set:
        """Set of total degrees in ``names`` over all terms."""
        mask = self.table.mask(names)
        return {key_degree(k & mask) for k in self._terms}

    def max_exponent(self, name: str) -> int:
        shift = self.table.shift(name)
        return max(((k >> shift) & FIELD_MASK for k in self._terms), default=-1)

    def filter(self, predicate) -> "Polynomial":
        """Keep the terms whose exponent dict satisfies ``predicate``."""
        out = {}
        for k, c in self._terms.items():
            if predicate(self.exponent_dict(k)):
                out[k] = c
        return Polynomial._raw(self.table, out)

    def exponent_dict(self, key: int) -> Dict[str, int]:
        return {n: e for n, e in zip(self.table.names, self.table.unpack(key)) if e}

    def relabel(self, table: VariableTable) -> "Polynomial":
        """The same polynomial expressed over another table containing all of
        its variables."""
        if table == self.table:
            return self
        moves = [(self.table.shift(n), table.shift(n)) for n in self.variables()]
        out = {}
        for k, c in self._terms.items():
            nk = 0
            for s_old, s_new in moves:
                nk |= ((k >> s_old) & FIELD_MASK) << s_new
            out[nk] = c
        return Polynomial._raw(table, out)

    # -- iteration and serialization ----------------------------------------
    def sort_key(self, key: int):
        exps = self.table.unpack(key)
        return (-sum(exps), tuple(-e for e in exps))

    def terms(self) -> Iterator[Tuple[Tuple[int, ...], Coefficient]]:
        """(exponent tuple, coefficient) in graded lexicographic order."""
        for k in sorted(self._terms, key=self.sort_key):
            yield self.table.unpack(k), self._terms[k]

    def coefficients(self):
        return self._terms.values()

    def to_text(self) -> str:
        lines = [self.table.header()]
        names = self.table.names
        for exps, c in self.terms():
            factors = [f"{n}^{e}" for n, e in zip(names, exps) if e]
            lines.append(" ".join([str(c)] + factors))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, table: Optional[VariableTable] = None) -> "Polynomial":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        parsed = VariableTable.from_header(lines[0])
        if table is None:
            table = parsed
        out: Dict[int, Coefficient] = {}
        for ln in lines[1:]:
            head, *factors = ln.split()
            c = Fraction(head)
            c = _demote(c)
            exps = {}
            for f in factors:
                n, _, e = f.partition("^")
                exps[n] = int(e)
            k = table.pack(exps)
            if k in out:
                raise ValueError("duplicate monomial in serialized polynomial")
            out[k] = c
        return cls(table, out)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = self.table.names
        pieces = []
        for exps, c in self.terms():
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e)
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def _demote(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def parse_polynomial(text: str, table: VariableTable) -> Polynomial:
    """Parse an arithmetic expression (+, -, *, ^ or **, integer/rational
    literals, variable names) into a Polynomial over ``table``."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.BinOp):
            left, right = walk(node.left), node.right
            if isinstance(node.op, ast.Pow):
                exp = walk(right)
                if not (isinstance(exp, Polynomial) and set(exp.raw_terms) <= {0}):
                    raise ValueError("exponent must be a non-negative integer literal")
                return left ** int(exp.constant_term())
            right = walk(right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if set(right.raw_terms) - {0} or not right:
                    raise ValueError("division only by nonzero constants")
                return left * (1 / Fraction(right.constant_term()))
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        if isinstance(node, ast.UnaryOp):
            val = walk(node.operand)
            if isinstance(node.op, ast.USub):
                return -val
            if isinstance(node.op, ast.UAdd):
                return val
            raise ValueError("unsupported unary operator")
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Polynomial.constant(table, node.value)
        if isinstance(node, ast.Name):
            return Polynomial.variable(table, node.id)
        raise ValueError(f"cannot parse {ast.dump(node)}")

    return walk(tree)
