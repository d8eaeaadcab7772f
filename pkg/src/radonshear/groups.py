"""Shearlet dilation groups H = SD in arbitrary dimension.

An element of H is parametrized by a shear vector ``s`` in R^(d-1) and a
nonzero scale ``a``; its matrix is::

    h_{s,a} = a * [[1, -s^T Lambda(a)],
                   [0,  B(s) Lambda(a)]]

with ``Lambda(a) = diag(|a|**lambda_1, ..., |a|**lambda_(d-1))`` and
``B`` a map into unipotent upper-triangular matrices.  Everything here is
plain double-precision matrix algebra on small matrices; all objects are
immutable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ParseError, ShapeError

BMap = Callable[[np.ndarray], np.ndarray]

AXIOM_TOL = 1e-10


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


def _identity_b(dim: int) -> BMap:
    def B(s: np.ndarray) -> np.ndarray:
        return np.eye(dim)

    return B


def toeplitz_b(dim: int) -> BMap:
    """Toeplitz shear map: superdiagonal ``k`` holds ``-s_k`` (uses s_1..s_{dim-1})."""

    def B(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.eye(dim)
        for k in range(1, dim):
            out -= s[k - 1] * np.eye(dim, k=k)
        return out

    return B


def heisenberg_b(s: np.ndarray) -> np.ndarray:
    u1, u2, _ = np.asarray(s, dtype=float)
    return np.array(
        [
            [1.0, -u1, -u2 - 0.5 * u1 * u1],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )


@dataclass(frozen=True)
class DilationFamily:
    """A shearlet dilation group, given by its weights and shear map.

    Parameters
    ----------
    d : int
        Ambient dimension (>= 2).
    lambdas : tuple of float
        Exponents ``lambda_1 .. lambda_(d-1)`` of the diagonal scaling.
    kind : str
        ``"standard"``, ``"toeplitz"``, ``"heisenberg"`` or ``"custom"``.
    B : callable
        Map from R^(d-1) to (d-1)x(d-1) unipotent upper-triangular matrices.
        Custom maps should be checked with :func:`verify_family` before use.
    """

    d: int
    lambdas: tuple[float, ...]
    kind: str = "custom"
    B: BMap = field(default=None, repr=False, compare=False)  # type: ignore[assignment]
    label: str = ""

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"dimension must be >= 2, got {self.d}", module="sdg-groups")
        lambdas = tuple(float(x) for x in self.lambdas)
        if len(lambdas) != self.d - 1:
            raise ShapeError(
                f"expected {self.d - 1} exponents for d={self.d}, got {len(lambdas)}",
                module="sdg-groups",
            )
        object.__setattr__(self, "lambdas", lambdas)
        if self.B is None:
            object.__setattr__(self, "B", _identity_b(self.d - 1))
        if not self.label:
            object.__setattr__(self, "label", f"{self.kind}:d={self.d}")

    @property
    def lambda_D(self) -> float:
        return float(sum(self.lambdas))

    def Lambda(self, a: float) -> np.ndarray:
        a = _check_scale(a)
        return np.diag(np.abs(a) ** np.asarray(self.lambdas))

    # constructors -----------------------------------------------------

    @classmethod
    def standard(cls, d: int = 2, gamma: float = 0.5) -> "DilationFamily":
        """Standard group S^gamma: B = I, Lambda(a) = |a|^(gamma-1) I."""
        return cls(
            d,
            (gamma - 1.0,) * (d - 1),
            "standard",
            _identity_b(d - 1),
            f"standard:d={d},gamma={gamma:g}",
        )

    @classmethod
    def toeplitz(
        cls, d: int, lambda1: float = 0.5, lambdas: tuple[float, ...] | None = None
    ) -> "DilationFamily":
        """Toeplitz shearlet group; ``lambdas`` overrides the compatible k*lambda1 weights."""
        if d < 3:
            raise DomainError("Toeplitz groups need d >= 3", module="sdg-groups")
        label = f"toeplitz:d={d},lambda1={lambda1:g}"
        if lambdas is None:
            lambdas = tuple(k * lambda1 for k in range(1, d))
        else:
            label = f"toeplitz:d={d},lambdas={','.join(f'{x:g}' for x in lambdas)}"
        return cls(d, tuple(lambdas), "toeplitz", toeplitz_b(d - 1), label)

    @classmethod
    def heisenberg(cls, lam: float = 0.5) -> "DilationFamily":
        """The non-Abelian (Heisenberg) shearing group in d = 4."""
        return cls(4, (lam, 2 * lam, 3 * lam), "heisenberg", heisenberg_b, f"heisenberg:lambda={lam:g}")

    @classmethod
    def custom(cls, d: int, lambdas, B: BMap, label: str = "") -> "DilationFamily":
        return cls(d, tuple(lambdas), "custom", B, label or f"custom:d={d}")

    @classmethod
    def from_id(cls, text: str) -> "DilationFamily":
        """Parse ids such as ``"standard:d=3,gamma=0.5"`` or ``"heisenberg:lambda=1"``."""
        m = re.fullmatch(r"\s*(\w+)\s*(?::(.*))?", text)
        if not m:
            raise ParseError(f"bad family id {text!r}", module="sdg-groups")
        kind, rest = m.group(1), m.group(2) or ""
        params: dict[str, float] = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ParseError(f"bad parameter {item!r} in family id {text!r}", module="sdg-groups")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise ParseError(f"non-numeric value in {item!r}", module="sdg-groups") from None
        try:
            if kind == "standard":
                return cls.standard(int(params.get("d", 2)), params.get("gamma", 0.5))
            if kind == "toeplitz":
                return cls.toeplitz(int(params.get("d", 4)), params.get("lambda1", 0.5))
            if kind == "heisenberg":
                return cls.heisenberg(params.get("lambda", 0.5))
        except KeyError as exc:  # pragma: no cover - defaults cover every key
            raise ParseError(f"missing parameter {exc} in {text!r}", module="sdg-groups") from None
        raise ParseError(f"unknown family kind {kind!r}", module="sdg-groups")


def _check_scale(a: float) -> float:
    a = float(a)
    if a == 0.0 or not np.isfinite(a):
        raise DomainError(f"scale a must be finite and nonzero, got {a}", module="sdg-groups")
    return a


def _check_shear(family: DilationFamily, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (family.d - 1,):
        raise ShapeError(
            f"shear vector must have length {family.d - 1}, got shape {s.shape}",
            module="sdg-groups",
        )
    return s


def element_matrix(family: DilationFamily, s, a: float) -> np.ndarray:
    """The d x d matrix h_{s,a}."""
    s = _check_shear(family, s)
    a = _check_scale(a)
    lam = family.Lambda(a)
    d = family.d
    m = np.zeros((d, d))
    m[0, 0] = 1.0
    m[0, 1:] = -s @ lam
    m[1:, 1:] = family.B(s) @ lam
    return a * m


@dataclass(frozen=True, eq=False)
class GroupElement:
    family: DilationFamily
    s: np.ndarray
    a: float
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        s = _check_shear(self.family, self.s)
        a = _check_scale(self.a)
        object.__setattr__(self, "s", _frozen(s))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "matrix", _frozen(element_matrix(self.family, s, a)))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)


def build_element(family: DilationFamily, s, a: float) -> GroupElement:
    return GroupElement(family, s, a)


def identity(family: DilationFamily) -> GroupElement:
    return GroupElement(family, np.zeros(family.d - 1), 1.0)


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """Product (s,a)(s',a') = (Lambda(a)^-1 s' + B(Lambda(a)^-1 s')^T s, a a')."""
    if g1.family is not g2.family and g1.family != g2.family:
        raise DomainError(
            f"cannot compose elements of {g1.family.label} and {g2.family.label}",
            module="sdg-groups",
        )
    fam = g1.family
    u = np.linalg.solve(fam.Lambda(g1.a), g2.s)
    s = u + fam.B(u).T @ g1.s
    return GroupElement(fam, s, g1.a * g2.a)


def inverse(g: GroupElement) -> GroupElement:
    """(s,a)^-1 = (-Lambda(a) B(s)^-T s, 1/a)."""
    fam = g.family
    s = -fam.Lambda(g.a) @ np.linalg.solve(fam.B(g.s).T, g.s)
    return GroupElement(fam, s, 1.0 / g.a)


def dual_action(g: GroupElement, v) -> tuple[np.ndarray, float]:
    """Action of h^T on the affine chart n(v) = (1, v).

    Returns ``(v', scale)`` with ``h^T n(v) = scale * n(v')``.
    """
    fam = g.family
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (fam.d - 1,):
        raise ShapeError(f"slope vector must have length {fam.d - 1}", module="sdg-groups")
    v_new = fam.Lambda(g.a) @ (fam.B(g.s).T @ v - g.s)
    return v_new, g.a


def haar_density(family: DilationFamily, a: float) -> tuple[float, float]:
    """Densities of the left Haar measures of H and of G = R^d x| H.

    With respect to ds da (resp. db ds da) these are |a|^(lambda_D - 1) and
    |a|^-(d+1).
    """
    a = abs(_check_scale(a))
    return a ** (family.lambda_D - 1.0), a ** (-(family.d + 1.0))


# -- axiom checks ---------------------------------------------------------


@dataclass(frozen=True)
class FamilyReport:
    family: str
    residuals: dict[str, float]
    tolerance: float = AXIOM_TOL

    @property
    def passed(self) -> bool:
        return all(r <= self.tolerance for r in self.residuals.values())

    @property
    def failing(self) -> list[str]:
        return [k for k, r in self.residuals.items() if not r <= self.tolerance]


def verify_family(family: DilationFamily, sample_count: int = 100, seed: int = 0) -> FamilyReport:
    """Randomized check of the group axioms and D-compatibility.

    Failing axioms are reported through ``FamilyReport.residuals``; nothing
    is raised.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1", module="sdg-groups")
    rng = np.random.default_rng(seed)
    n = family.d - 1
    B = family.B
    eye = np.eye(n)
    res = {
        "unipotent": 0.0,
        "B(0)=I": float(np.max(np.abs(B(np.zeros(n)) - eye))),
        "B(u)B(v)=B(v+B(v)^T u)": 0.0,
        "B(u)^-1=B(-B(u)^-T u)": 0.0,
        "compatibility": 0.0,
        "product_law": 0.0,
    }
    for _ in range(sample_count):
        u, v, s = rng.uniform(-2.0, 2.0, size=(3, n))
        a, a2 = rng.choice([-1.0, 1.0], size=2) * 2.0 ** rng.uniform(-2.0, 2.0, size=2)
        Bu, Bv = B(u), B(v)
        res["unipotent"] = max(
            res["unipotent"], float(np.max(np.abs(np.tril(Bu) - eye)))
        )
        res["B(u)B(v)=B(v+B(v)^T u)"] = max(
            res["B(u)B(v)=B(v+B(v)^T u)"], float(np.max(np.abs(Bu @ Bv - B(v + Bv.T @ u))))
        )
        inv_arg = -np.linalg.solve(Bu.T, u)
        res["B(u)^-1=B(-B(u)^-T u)"] = max(
            res["B(u)^-1=B(-B(u)^-T u)"], float(np.max(np.abs(np.linalg.inv(Bu) - B(inv_arg))))
        )
        lam = family.Lambda(a)
        lam_inv = np.linalg.inv(lam)
        res["compatibility"] = max(
            res["compatibility"], float(np.max(np.abs(lam @ B(s) @ lam_inv - B(lam_inv @ s))))
        )
        g1 = GroupElement(family, s, a)
        g2 = GroupElement(family, u, a2)
        prod = g1.matrix @ g2.matrix
        diff = np.linalg.norm(compose(g1, g2).matrix - prod) / np.linalg.norm(prod)
        res["product_law"] = max(res["product_law"], float(diff))
    return FamilyReport(family.label, res)


# -- the Heisenberg example ----------------------------------------------


def heisenberg_algebra(q: float, p: float, t: float) -> np.ndarray:
    """Lie algebra element X(q, p, t) of the Heisenberg shearing group."""
    X = np.zeros((4, 4))
    X[0, 1:] = (q, p, t)
    X[1, 2:] = (q, p)
    return X


def bracket(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def heisenberg_exp(q: float, p: float, t: float, family: DilationFamily | None = None) -> GroupElement:
    """exp(X(q,p,t)) = I + X + X^2/2, returned as a group element with a = 1.

    Its shear parameters are ``(-q, -(p + q^2/2), -(t + q p/2))``.
    """
    family = family or DilationFamily.heisenberg()
    if family.kind != "heisenberg":
        raise DomainError("heisenberg_exp needs the Heisenberg family", module="sdg-groups")
    X = heisenberg_algebra(q, p, t)
    E = np.eye(4) + X + 0.5 * (X @ X)
    return GroupElement(family, -E[0, 1:], 1.0)


def toeplitz_sharp(u_hat, v_hat) -> np.ndarray:
    """Parameter law of Toeplitz matrices: T(u) T(v) = T(u # v).

    With T(u) = I - sum_k u_k N^k the law is
    (u # v)_i = u_i + v_i - sum_{j+k=i} v_j u_k.
    """
    u = np.asarray(u_hat, dtype=float)
    v = np.asarray(v_hat, dtype=float)
    out = u + v
    for i in range(len(u)):
        for j in range(i):
            out[i] -= v[j] * u[i - j - 1]
    return out


# -- the full semidirect product G = R^d x| H ------------------------------


@dataclass(frozen=True, eq=False)
class AffineElement:
    """(b, h) in G with law (b1, h1)(b2, h2) = (b1 + h1 b2, h1 h2)."""

    b: np.ndarray
    h: GroupElement

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if b.shape != (self.h.family.d,):
            raise ShapeError(f"translation must have length {self.h.family.d}", module="sdg-groups")
        object.__setattr__(self, "b", _frozen(b))


def affine_compose(g1: AffineElement, g2: AffineElement) -> AffineElement:
    return AffineElement(g1.b + g1.h.matrix @ g2.b, compose(g1.h, g2.h))


def affine_inverse(g: AffineElement) -> AffineElement:
    h_inv = inverse(g.h)
    return AffineElement(-h_inv.matrix @ g.b, h_inv)
