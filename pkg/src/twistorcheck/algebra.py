"""Exact rational verification of the pointwise identities behind the bound chain.

Everything here runs over exact arbitrary-precision rationals (gmpy2.mpq when
available, fractions.Fraction otherwise) with no tolerances: a single failed
check is a transcription bug in the inequality chain, not numerical noise.  The objects are free algebraic models -- coefficient tensors with the
right antisymmetries and skew matrices -- so no manifold is involved.

Verified facts, each for every index combination:

  * 2 C_ijk = d_ijk - d_jki + d_kij (and the two cyclic companions);
  * 4 (C_ijk^2 + C_jki^2 + C_kij^2)
      = 3 (d_ijk^2 + d_jki^2 + d_kij^2) - 2 d_ijk d_jki - 2 d_ijk d_kij - 2 d_jki d_kij
     <= 5 (d_ijk^2 + d_jki^2 + d_kij^2), with aggregate sum C^2 <= 5/4 sum d^2;
  * for n = 2:  sum C^2 = 2 (d_121^2 + d_212^2) = sum d^2;
  * the splitting of a skew matrix into commuting and anticommuting parts
    under J0 is exact, with the parts orthogonal in -tr(PQ);
  * the canonical complex structure (psi, V) -> (J0 psi, -V J0) squares to - Id;
  * the quadratic wedge identity
    sum_ij (w_ij ^ w_{j,i+n} + w_{i,j+n} ^ w_{j+n,i+n}) = -1/2 sum_ij alpha_ij ^ beta_ij
    read as a bilinear form in a pair of skew matrices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

try:  # gmpy2.mpq is an exact drop-in for Fraction, roughly an order faster
    from gmpy2 import mpq as _rational
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _rational = Fraction

MAX_N = 6  # exhaustive index loops stay cheap up to here

NUMERATOR_RANGE = 10**6
DENOMINATOR_RANGE = 10**3


@dataclass(frozen=True)
class CheckResult:
    """Boolean verdict plus a serialized counterexample when it fails."""

    ok: bool
    counterexample: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def random_fraction(rng: random.Random):
    """Exact rational with numerator in [-10^6, 10^6] and denominator in [1, 10^3]."""
    return _rational(
        rng.randint(-NUMERATOR_RANGE, NUMERATOR_RANGE), rng.randint(1, DENOMINATOR_RANGE)
    )


def _zero_cube(n: int) -> list:
    return [[[_rational(0)] * n for _ in range(n)] for _ in range(n)]


def _freeze_cube(c: list) -> tuple:
    return tuple(tuple(tuple(row) for row in plane) for plane in c)


@dataclass(frozen=True)
class RationalCTensor:
    """Free algebraic model of the C / C' coefficient tensors.

    Entries are exact rationals, antisymmetric in the last two indices; the
    constructor rejects anything else.
    """

    n: int
    C: tuple
    Cp: tuple

    def __post_init__(self):
        if not 2 <= self.n <= MAX_N:
            raise ValueError(f"n must lie in [2, {MAX_N}]")
        for name in ("C", "Cp"):
            t = getattr(self, name)
            if len(t) != self.n or any(
                len(p) != self.n or any(len(r) != self.n for r in p) for p in t
            ):
                raise ValueError(f"{name} must be an n x n x n nested tuple")
            for i in range(self.n):
                for j in range(self.n):
                    for k in range(j, self.n):
                        if t[i][j][k] != -t[i][k][j]:
                            raise ValueError(
                                f"{name}[{i}][{j}][{k}] breaks antisymmetry in the last two indices"
                            )

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "RationalCTensor":
        cubes = []
        for _ in range(2):
            cube = _zero_cube(n)
            for i in range(n):
                for j in range(n):
                    for k in range(j + 1, n):
                        v = random_fraction(rng)
                        cube[i][j][k] = v
                        cube[i][k][j] = -v
            cubes.append(_freeze_cube(cube))
        return cls(n=n, C=cubes[0], Cp=cubes[1])


def d_from_c(t: RationalCTensor) -> tuple:
    """Exact d_ijk = C_ijk - C_jik and its primed companion."""
    n = t.n
    d = _freeze_cube(
        [[[t.C[i][j][k] - t.C[j][i][k] for k in range(n)] for j in range(n)] for i in range(n)]
    )
    dp = _freeze_cube(
        [[[t.Cp[i][j][k] - t.Cp[j][i][k] for k in range(n)] for j in range(n)] for i in range(n)]
    )
    return d, dp


def check_identity_c1(t: RationalCTensor) -> CheckResult:
    """2 C_ijk = d_ijk - d_jki + d_kij, exactly, for all triples, C and C'."""
    d, dp = d_from_c(t)
    n = t.n
    for name, c, dd in (("C", t.C, d), ("C'", t.Cp, dp)):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if 2 * c[i][j][k] != dd[i][j][k] - dd[j][k][i] + dd[k][i][j]:
                        return CheckResult(
                            False, f"{name} triple (i,j,k)=({i + 1},{j + 1},{k + 1})"
                        )
    return CheckResult(True)


def check_case1_inequality(t: RationalCTensor) -> tuple:
    """Per-triple expansion equality, the <= 5 bound, and the aggregate 5/4 bound.

    Returns (CheckResult, worst_ratio) with worst_ratio the maximum over
    triples of 4 (C_ijk^2 + C_jki^2 + C_kij^2) / (d_ijk^2 + d_jki^2 + d_kij^2),
    zero if no triple has a nonzero denominator.

    Both sides of the per-triple statement are invariant under cyclic rotation
    of (i, j, k), so each rotation orbit is checked once through its
    lexicographically smallest representative; that still certifies the
    statement for every triple.
    """
    d, dp = d_from_c(t)
    n = t.n
    worst = _rational(0)
    for name, c, dd in (("C", t.C, d), ("C'", t.Cp, dp)):
        total_c2 = sum(x * x for plane in c for row in plane for x in row)
        total_d2 = sum(x * x for plane in dd for row in plane for x in row)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if (j, k, i) < (i, j, k) or (k, i, j) < (i, j, k):
                        continue
                    x, y, z = dd[i][j][k], dd[j][k][i], dd[k][i][j]
                    s3 = x * x + y * y + z * z
                    lhs = 4 * (c[i][j][k] ** 2 + c[j][k][i] ** 2 + c[k][i][j] ** 2)
                    expansion = 3 * s3 - 2 * (x * y + x * z + y * z)
                    if lhs != expansion:
                        return (
                            CheckResult(
                                False,
                                f"{name} expansion equality at ({i + 1},{j + 1},{k + 1})",
                            ),
                            worst,
                        )
                    if lhs > 5 * s3:
                        return (
                            CheckResult(
                                False, f"{name} 5-bound at ({i + 1},{j + 1},{k + 1})"
                            ),
                            worst,
                        )
                    if s3 > 0:
                        worst = max(worst, lhs / s3)
        if 4 * total_c2 > 5 * total_d2:
            return CheckResult(False, f"aggregate 5/4 bound for {name}"), worst
    return CheckResult(True), worst


def check_case2_identities(t: RationalCTensor) -> CheckResult:
    """The n = 2 equalities sum C^2 = 2 (d_121^2 + d_212^2) = sum d^2, both tensors."""
    if t.n != 2:
        raise ValueError("case-2 identities are specific to n = 2")
    d, dp = d_from_c(t)
    for name, c, dd in (("C", t.C, d), ("C'", t.Cp, dp)):
        sum_c2 = sum(c[i][j][k] ** 2 for i in range(2) for j in range(2) for k in range(2))
        sum_d2 = sum(dd[i][j][k] ** 2 for i in range(2) for j in range(2) for k in range(2))
        middle = 2 * (dd[0][1][0] ** 2 + dd[1][0][1] ** 2)
        if not (sum_c2 == middle == sum_d2):
            return CheckResult(
                False, f"{name}: sum C^2={sum_c2}, 2(d121^2+d212^2)={middle}, sum d^2={sum_d2}"
            )
    return CheckResult(True)


# --- exact skew-matrix algebra -------------------------------------------------

@dataclass(frozen=True)
class RationalSkewMatrix:
    """Skew 2n x 2n matrix over exact rationals."""

    n: int
    entries: tuple

    def __post_init__(self):
        dim = 2 * self.n
        if len(self.entries) != dim or any(len(r) != dim for r in self.entries):
            raise ValueError(f"entries must be {dim} x {dim}")
        for a in range(dim):
            for b in range(a, dim):
                if self.entries[a][b] != -self.entries[b][a]:
                    raise ValueError(f"entry ({a}, {b}) breaks skew symmetry")

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "RationalSkewMatrix":
        dim = 2 * n
        m = [[_rational(0)] * dim for _ in range(dim)]
        for a in range(dim):
            for b in range(a + 1, dim):
                v = random_fraction(rng)
                m[a][b] = v
                m[b][a] = -v
        return cls(n=n, entries=tuple(tuple(r) for r in m))

    @classmethod
    def from_rows(cls, n: int, rows) -> "RationalSkewMatrix":
        return cls(n=n, entries=tuple(tuple(_rational(x) for x in row) for row in rows))


def _j0_left(m: tuple, n: int) -> tuple:
    """J0 M computed by block moves: (J0 M) = [[-M_lower], [M_upper]]."""
    lower = tuple(tuple(-x for x in m[n + i]) for i in range(n))
    upper = tuple(m[i] for i in range(n))
    return lower + upper


def _j0_right(m: tuple, n: int) -> tuple:
    """M J0 by column moves: columns (right block, -(left block))... exactly."""
    dim = 2 * n
    return tuple(
        tuple(m[a][n + b] if b < n else -m[a][b - n] for b in range(dim)) for a in range(dim)
    )


def _mat_scale_add(x: tuple, y: tuple, half: bool) -> tuple:
    if half:
        return tuple(tuple((xa + ya) / 2 for xa, ya in zip(xr, yr)) for xr, yr in zip(x, y))
    return tuple(tuple(xa + ya for xa, ya in zip(xr, yr)) for xr, yr in zip(x, y))


def _mat_sub_half(x: tuple, y: tuple) -> tuple:
    return tuple(tuple((xa - ya) / 2 for xa, ya in zip(xr, yr)) for xr, yr in zip(x, y))


def skew_decompose(omega: RationalSkewMatrix) -> tuple:
    """Exact splitting of a skew matrix into its J0-commuting and anticommuting parts.

    Returns (u_part, sigma_part) with
    u_part = (omega - J0 omega J0)/2 and sigma_part = (omega + J0 omega J0)/2.
    """
    n = omega.n
    conj = _j0_right(_j0_left(omega.entries, n), n)  # J0 omega J0
    u_part = _mat_sub_half(omega.entries, conj)
    sigma_part = _mat_scale_add(omega.entries, conj, half=True)
    return (
        RationalSkewMatrix(n=n, entries=u_part),
        RationalSkewMatrix(n=n, entries=sigma_part),
    )


def commutes_with_j0(m: RationalSkewMatrix) -> bool:
    return _j0_left(m.entries, m.n) == _j0_right(m.entries, m.n)


def anticommutes_with_j0(m: RationalSkewMatrix) -> bool:
    left = _j0_left(m.entries, m.n)
    right = _j0_right(m.entries, m.n)
    return all(
        left[a][b] == -right[a][b] for a in range(2 * m.n) for b in range(2 * m.n)
    )


def trace_pairing(p: RationalSkewMatrix, q: RationalSkewMatrix):
    """The invariant pairing -tr(PQ) used on so(2n)."""
    dim = 2 * p.n
    return -sum(p.entries[a][b] * q.entries[b][a] for a in range(dim) for b in range(dim))


def canonical_j1(psi: RationalSkewMatrix, V: tuple) -> tuple:
    """One application of the canonical complex structure (psi, V) -> (J0 psi, -V J0).

    ``psi`` must anticommute with J0 (raise NotInSigma otherwise); the first
    output slot anticommutes again and applying the map twice negates both
    slots exactly.
    """
    from .errors import NotInSigma

    if not anticommutes_with_j0(psi):
        raise NotInSigma("psi does not anticommute with J0")
    n = psi.n
    V = tuple(_rational(x) for x in V)
    if len(V) != 2 * n:
        raise ValueError(f"V must have length {2 * n}")
    new_psi = RationalSkewMatrix(n=n, entries=_j0_left(psi.entries, n))
    # -V J0 : (V J0)_b = V_{b+n} for b < n, -(V_{b-n}) otherwise
    new_v = tuple(-V[n + b] for b in range(n)) + tuple(V[b] for b in range(n))
    return new_psi, new_v


def random_sigma_matrix(n: int, rng: random.Random) -> RationalSkewMatrix:
    """Random skew matrix anticommuting with J0 (the sigma part of a random skew)."""
    _, sigma = skew_decompose(RationalSkewMatrix.random(n, rng))
    return sigma


def _alpha_of(m: tuple, n: int):
    return [[m[i][n + j] + m[n + i][j] for j in range(n)] for i in range(n)]


def _beta_of(m: tuple, n: int):
    return [[m[n + i][n + j] - m[i][j] for j in range(n)] for i in range(n)]


def check_wedge_identity(P: RationalSkewMatrix, Q: RationalSkewMatrix) -> CheckResult:
    """Exact equality of the two bilinear forms of the quadratic wedge identity.

    With P = w(X) and Q = w(Y) for a skew matrix of 1-forms w, the left side
    is sum_ij (w_ij ^ w_{j,i+n} + w_{i,j+n} ^ w_{j+n,i+n})(X, Y) and the right
    side is -1/2 sum_ij (alpha_ij ^ beta_ij)(X, Y).
    """
    if P.n != Q.n:
        raise ValueError("matrices must share the same n")
    n = P.n
    p, q = P.entries, Q.entries
    lhs = _rational(0)
    for i in range(n):
        for j in range(n):
            lhs += (
                p[i][j] * q[j][i + n]
                - q[i][j] * p[j][i + n]
                + p[i][j + n] * q[j + n][i + n]
                - q[i][j + n] * p[j + n][i + n]
            )
    ap, bp = _alpha_of(p, n), _beta_of(p, n)
    aq, bq = _alpha_of(q, n), _beta_of(q, n)
    rhs = _rational(0)
    for i in range(n):
        for j in range(n):
            rhs += ap[i][j] * bq[i][j] - aq[i][j] * bp[i][j]
    rhs = -rhs / 2
    if lhs != rhs:
        return CheckResult(False, f"lhs={lhs} rhs={rhs}")
    return CheckResult(True)


def run_algebra_sweep(n_list, samples: int, seed: int) -> dict:
    """Seeded randomized sweep of every exact check; returns per-check pass counts.

    The report carries the first counterexample encountered (if any) and the
    largest per-triple ratio observed in the quadratic expansion bound.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    report = {"seed": seed, "samples": samples, "n_list": list(n_list), "checks": {}, "failures": []}
    counts: dict = {}

    def record(name: str, ok: bool, detail: str | None, n: int, k: int):
        slot = counts.setdefault(name, {"pass": 0, "fail": 0})
        slot["pass" if ok else "fail"] += 1
        if not ok:
            report["failures"].append(
                {"check": name, "n": n, "sample": k, "detail": detail or ""}
            )

    worst_ratio = _rational(0)
    for n in n_list:
        if not 2 <= n <= MAX_N:
            raise ValueError(f"n must lie in [2, {MAX_N}], got {n}")
        rng = random.Random(seed * 100003 + n)
        for k in range(samples):
            tensor = RationalCTensor.random(n, rng)
            if n >= 3:
                res = check_identity_c1(tensor)
                record("identity_c1", res.ok, res.counterexample, n, k)
                res, ratio = check_case1_inequality(tensor)
                worst_ratio = max(worst_ratio, ratio)
                record("case1_inequality", res.ok, res.counterexample, n, k)
            else:
                res = check_case2_identities(tensor)
                record("case2_identities", res.ok, res.counterexample, n, k)

            skew = RationalSkewMatrix.random(n, rng)
            u_part, sigma_part = skew_decompose(skew)
            ok = (
                commutes_with_j0(u_part)
                and anticommutes_with_j0(sigma_part)
                and _mat_scale_add(u_part.entries, sigma_part.entries, half=False)
                == skew.entries
                and trace_pairing(u_part, sigma_part) == 0
            )
            record("skew_decompose", ok, None if ok else "decomposition failed", n, k)

            V = tuple(random_fraction(rng) for _ in range(2 * n))
            psi = sigma_part
            psi1, v1 = canonical_j1(psi, V)
            psi2, v2 = canonical_j1(psi1, v1)
            ok = (
                anticommutes_with_j0(psi1)
                and all(
                    psi2.entries[a][b] == -psi.entries[a][b]
                    for a in range(2 * n)
                    for b in range(2 * n)
                )
                and v2 == tuple(-x for x in V)
            )
            record("canonical_j1_square", ok, None if ok else "J1^2 != -Id", n, k)

            Q = RationalSkewMatrix.random(n, rng)
            res = check_wedge_identity(skew, Q)
            record("wedge_identity", res.ok, res.counterexample, n, k)
    report["checks"] = counts
    report["max_case1_ratio"] = str(worst_ratio)
    report["all_pass"] = not report["failures"]
    return report
