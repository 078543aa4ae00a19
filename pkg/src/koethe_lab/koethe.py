"""Graded sequence-space machinery: seminorms, pairings and certificates.

The objects here are finite truncations: a :class:`SeqVector` is a finitely
supported complex sequence, a :class:`KoetheMatrix` is a lazily evaluated
grading rule ``(j, q) -> weight``, and the checkers scan quantified
inequalities over finite parameter boxes, returning :class:`Certificate`
records instead of claims about the untested tail.

All weight arithmetic routes through :mod:`koethe_lab.logtower` so that the
same code paths survive iterated-exponential magnitudes; a float fast path is
taken when every term fits a double, which keeps the large-depth scans quick.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .logtower import (
    LogTower,
    LogTowerError,
    lt_add,
    lt_cmp,
    lt_div,
    lt_encode,
    lt_from_int,
    lt_from_ln,
    lt_from_real,
    lt_max,
    lt_mul,
    lt_one,
    lt_pow,
    lt_zero,
)

__all__ = [
    "SeqVector",
    "KoetheMatrix",
    "power_matrix",
    "scaled_power_matrix",
    "geometric_matrix",
    "matrix_from_rows",
    "seminorm",
    "s_norm",
    "s_dual_norm",
    "pairing",
    "dn_check",
    "dn_exponent",
    "CertStatus",
    "Witness",
    "Certificate",
    "CheckBounds",
    "gp_nuclearity_check",
    "equivalence_check",
    "condition_iv_check",
    "norm_table_csv",
]

INF = math.inf

_REL_SLACK = 1e-12          # multiplicative slack for order comparisons
_C_ONE_SLACK = 1e-9         # "constant is essentially 1" threshold


# ---------------------------------------------------------------------------
# Sequence vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeqVector:
    """Finitely supported complex sequence, indices 1-based and increasing."""

    indices: tuple[int, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values length mismatch")
        prev = 0
        for j, val in zip(self.indices, self.values):
            if j <= prev:
                raise ValueError("indices must be strictly increasing and >= 1")
            if val == 0:
                raise ValueError("exact zeros must not be stored")
            prev = j

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, complex]]) -> "SeqVector":
        cleaned = sorted((int(j), complex(v)) for j, v in pairs if complex(v) != 0)
        return SeqVector(tuple(j for j, _ in cleaned), tuple(v for _, v in cleaned))

    @staticmethod
    def from_dense(values: Sequence[complex]) -> "SeqVector":
        return SeqVector.from_pairs((j + 1, v) for j, v in enumerate(values))

    @staticmethod
    def basis(k: int) -> "SeqVector":
        return SeqVector((k,), (1.0 + 0j,))

    def get(self, j: int) -> complex:
        try:
            return self.values[self.indices.index(j)]
        except ValueError:
            return 0j

    def items(self):
        return zip(self.indices, self.values)

    def conj(self) -> "SeqVector":
        return SeqVector(self.indices, tuple(v.conjugate() for v in self.values))

    def scale(self, c: complex) -> "SeqVector":
        return SeqVector.from_pairs((j, c * v) for j, v in self.items())

    def max_index(self) -> int:
        return self.indices[-1] if self.indices else 0

    def __len__(self) -> int:
        return len(self.indices)


def pairing(x: SeqVector, y: SeqVector) -> complex:
    """sum_j x_j * conj(y_j); the second slot carries the conjugation."""
    total = 0j
    i = k = 0
    while i < len(x.indices) and k < len(y.indices):
        ji, jk = x.indices[i], y.indices[k]
        if ji == jk:
            total += x.values[i] * y.values[k].conjugate()
            i += 1
            k += 1
        elif ji < jk:
            i += 1
        else:
            k += 1
    return total


# ---------------------------------------------------------------------------
# Koethe matrices
# ---------------------------------------------------------------------------


class KoetheMatrix:
    """Grading rule ``(j, q) -> LogTower`` with q-monotone non-negative entries.

    ``ln_rows``, when supplied, vectorizes ``ln a_{j,q}`` over a j-range and
    lets the deep scans run on numpy floats instead of tower objects.
    """

    def __init__(
        self,
        name: str,
        entry: Callable[[int, int], LogTower],
        ln_rows: Callable[[np.ndarray, int], np.ndarray] | None = None,
        probe_j: int = 16,
        probe_q: int = 6,
        validate: bool = True,
    ):
        self.name = name
        self._entry = entry
        self._ln_rows = ln_rows
        if validate:
            self._validate(probe_j, probe_q)

    def _validate(self, probe_j: int, probe_q: int) -> None:
        slack = lt_from_real(1.0 + _REL_SLACK)
        for j in range(1, probe_j + 1):
            prev = None
            positive = False
            for q in range(probe_q + 1):
                a = self.entry(j, q)
                if lt_cmp(a, lt_zero()) > 0:
                    positive = True
                if prev is not None and lt_cmp(prev, lt_mul(a, slack)) > 0:
                    raise ValueError(
                        f"matrix {self.name!r}: entry({j},{q}) decreased in the grade"
                    )
                prev = a
            if not positive:
                raise ValueError(
                    f"matrix {self.name!r}: row {j} vanishes up to grade {probe_q}"
                )

    def entry(self, j: int, q: int) -> LogTower:
        if j < 1:
            raise ValueError(f"index {j} must be >= 1")
        if q < 0:
            raise ValueError(f"grade {q} must be >= 0")
        return self._entry(j, q)

    def ln_row(self, q: int, j_max: int) -> np.ndarray | None:
        """ln a_{j,q} for j = 1..j_max as floats, or None when out of range."""
        if self._ln_rows is not None:
            js = np.arange(1, j_max + 1, dtype=np.float64)
            return np.asarray(self._ln_rows(js, q), dtype=np.float64)
        out = np.empty(j_max, dtype=np.float64)
        for j in range(1, j_max + 1):
            ln = self.entry(j, q).ln_float()
            if ln == INF:
                return None  # deep tower entry: caller uses the exact path
            out[j - 1] = ln
        return out


def power_matrix() -> KoetheMatrix:
    """The canonical matrix (j^q) grading the rapidly decreasing sequences."""
    return KoetheMatrix(
        "power",
        lambda j, q: lt_pow(lt_from_int(j), q),
        ln_rows=lambda js, q: q * np.log(js),
        validate=False,
    )


def scaled_power_matrix(scale: int) -> KoetheMatrix:
    return KoetheMatrix(
        f"power_scaled_{scale}",
        lambda j, q: lt_pow(lt_from_int(scale * j), q),
        ln_rows=lambda js, q: q * np.log(scale * js),
        validate=False,
    )


def geometric_matrix(base: float = 2.0) -> KoetheMatrix:
    lb = math.log(base)
    return KoetheMatrix(
        f"geometric_{base}",
        lambda j, q: lt_pow(lt_from_real(base), j * q),
        ln_rows=lambda js, q: js * q * lb,
        validate=False,
    )


def matrix_from_rows(
    rows: Callable[[int, int], LogTower], name: str, probe_j: int = 8
) -> KoetheMatrix:
    """Adapter: treat a row table ``(k, q) -> LogTower`` as a Koethe matrix."""
    return KoetheMatrix(name, lambda j, q: rows(j, q), probe_j=probe_j)


_POWER = power_matrix()


# ---------------------------------------------------------------------------
# Seminorms
# ---------------------------------------------------------------------------


def seminorm(x: SeqVector, A: KoetheMatrix, p, q: int) -> LogTower:
    """Weighted l_p seminorm of x against column q of A; p in {1, 2, inf}."""
    if p not in (1, 2, INF):
        raise ValueError(f"only p in {{1, 2, inf}} is supported, got {p}")
    if q < 0:
        raise ValueError("grade must be >= 0")
    if not x.indices:
        return lt_zero()
    weights = [A.entry(j, q) for j in x.indices]
    fast = _try_float_seminorm(x, weights, p)
    if fast is not None:
        return fast
    terms = [lt_mul(lt_from_real(abs(v)), w) for v, w in zip(x.values, weights)]
    if p == INF:
        return lt_max(terms)
    acc = lt_zero()
    for t in terms:
        acc = lt_add(acc, lt_pow(t, p))
    return lt_pow(acc, 1.0 / p)


def _try_float_seminorm(x: SeqVector, weights, p) -> LogTower | None:
    vals = []
    for v, w in zip(x.values, weights):
        try:
            wf = w.to_float()
        except LogTowerError:
            return None
        vals.append(abs(v) * wf)
    if p == INF:
        return lt_from_real(max(vals))
    total = math.fsum(t**p for t in vals)
    if math.isinf(total):
        return None
    return lt_from_real(total ** (1.0 / p))


def s_norm(x: SeqVector, q: int) -> LogTower:
    """The weighted l_2 norm with weights j^q (grade-q norm on s)."""
    return seminorm(x, _POWER, 2, q)


def s_dual_norm(x: SeqVector, q: int) -> LogTower:
    """The weighted l_2 norm with weights j^-q (grade-q norm on the dual)."""
    if q < 0:
        raise ValueError("grade must be >= 0")
    if not x.indices:
        return lt_zero()
    terms = []
    for j, v in x.items():
        try:
            w = float(j) ** (-q)
        except OverflowError:
            w = 0.0
        if w == 0.0:
            terms = None  # index too large for the float path
            break
        terms.append((abs(v) * w) ** 2)
    if terms is not None:
        return lt_from_real(math.sqrt(math.fsum(terms)))
    acc = lt_zero()
    for j, v in x.items():
        t = lt_mul(lt_from_real(abs(v)), lt_pow(lt_from_int(j), -q))
        acc = lt_add(acc, lt_pow(t, 2))
    return lt_pow(acc, 0.5)


def dn_check(x: SeqVector, p: int) -> tuple[LogTower, LogTower, bool]:
    """Dominating-norm inequality |x|_p^2 <= ||x||_l2 * |x|_2p, with slack."""
    if p < 0:
        raise ValueError("grade must be >= 0")
    lhs = lt_pow(s_norm(x, p), 2)
    rhs = lt_mul(s_norm(x, 0), s_norm(x, 2 * p))
    ok = lt_cmp(lhs, lt_mul(rhs, lt_from_real(1.0 + _REL_SLACK))) <= 0
    return lhs, rhs, ok


def dn_exponent(p: int, r: int) -> int:
    """Smallest grade q = 2^ceil(log2 r) * p with |x|_p^r <= |x|_q on unit x."""
    if p < 0 or r < 1:
        raise ValueError("need p >= 0 and r >= 1")
    return (1 << (r - 1).bit_length()) * p


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


class CertStatus(str, Enum):
    VERIFIED_TO_DEPTH = "verified_to_depth"
    CANDIDATE_REFUTATION = "candidate_refutation"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Witness:
    params: dict
    lhs: LogTower | float
    rhs: LogTower | float

    def to_json_dict(self) -> dict:
        return {
            "params": dict(sorted(self.params.items())),
            "lhs": _encode_scalar(self.lhs),
            "rhs": _encode_scalar(self.rhs),
        }


def _encode_scalar(x):
    if isinstance(x, LogTower):
        return lt_encode(x)
    return x


@dataclass
class Certificate:
    condition: str
    quantifier_bounds: dict
    status: CertStatus
    constants: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    notes: str = ""

    def __post_init__(self):
        if self.status is CertStatus.CANDIDATE_REFUTATION and not self.witnesses:
            raise ValueError("a candidate refutation must carry witnesses")

    def to_json_dict(self) -> dict:
        return {
            "condition": self.condition,
            "status": self.status.value,
            "bounds": dict(sorted(self.quantifier_bounds.items())),
            "constants": {k: _encode_scalar(v) for k, v in sorted(self.constants.items())},
            "witnesses": [w.to_json_dict() for w in self.witnesses],
            "notes": self.notes,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, sort_keys=True)


@dataclass(frozen=True)
class CheckBounds:
    """Quantifier box for the checkers; defaults cover the worked examples."""

    P: int = 6
    Q: int = 6
    R: int = 6
    K: int = 10_000
    J: int = 10_000


# ---------------------------------------------------------------------------
# Ratio-series helpers.  A series is either a numpy array of ln-ratios (fast
# path) or a list of LogTower ratios (exact path for deep magnitudes).
# ---------------------------------------------------------------------------


def _ln_tail_nonincreasing(arr: np.ndarray) -> bool:
    tail = arr[-max(2, len(arr) // 4):]
    return bool(np.all(np.diff(tail) <= _REL_SLACK))


def _ln_tail_increasing(arr: np.ndarray) -> bool:
    tail = arr[-max(2, len(arr) // 2):]
    return bool(np.all(np.diff(tail) > _REL_SLACK))


def _lt_tail_nonincreasing(series: list[LogTower]) -> bool:
    tail = series[-max(2, len(series) // 4):]
    slack = lt_from_real(1.0 + _REL_SLACK)
    return all(
        lt_cmp(tail[i + 1], lt_mul(tail[i], slack)) <= 0 for i in range(len(tail) - 1)
    )


def _lt_tail_increasing(series: list[LogTower]) -> bool:
    tail = series[-max(2, len(series) // 2):]
    slack = lt_from_real(1.0 + _REL_SLACK)
    return all(
        lt_cmp(tail[i + 1], lt_mul(tail[i], slack)) > 0 for i in range(len(tail) - 1)
    )


def _pick_stable(candidates: list[tuple[int, LogTower]]) -> tuple[int, LogTower]:
    """Smallest inner grade with C essentially <= 1; else the minimal C."""
    one_plus = lt_from_real(1.0 + _C_ONE_SLACK)
    for inner, c in candidates:
        if lt_cmp(c, one_plus) <= 0:
            return inner, c
    best = candidates[0]
    for cand in candidates[1:]:
        if lt_cmp(cand[1], best[1]) < 0:
            best = cand
    return best


def _sample_positions(n: int, count: int = 6) -> list[int]:
    """Deterministic 0-based sample positions across the last half of a series."""
    start = n // 2
    if n - start <= count:
        return list(range(start, n))
    step = (n - 1 - start) / (count - 1)
    return sorted({start + round(i * step) for i in range(count)})


# ---------------------------------------------------------------------------
# Grothendieck-Pietsch style summability scan
# ---------------------------------------------------------------------------


def gp_nuclearity_check(
    A: KoetheMatrix, q: int, r: int, depth: int, tail: str = "auto"
) -> Certificate:
    """Partial sums of a_{j,q}/a_{j,r} plus a depth-limited tail strategy.

    ``tail`` is one of "integral", "geometric" or "auto".  The integral
    strategy fits a power-law exponent to the observed tail and bounds the
    remainder by the comparison integral; the geometric strategy requires the
    consecutive-term ratio to stay below 0.99 on the last quarter.  Neither
    proves convergence: the certificate records what was checked.
    """
    if q > r:
        raise ValueError("need q <= r")
    if depth < 16:
        raise ValueError("depth must be at least 16")
    if tail not in ("auto", "integral", "geometric"):
        raise ValueError(f"unknown tail strategy {tail!r}")

    terms = _gp_terms(A, q, r, depth)
    bounds = {"q": q, "r": r, "depth": depth}
    if terms is None:
        return Certificate(
            "gp_nuclearity",
            bounds,
            CertStatus.INCONCLUSIVE,
            notes="a ratio left the supported range (zero or deep denominator)",
        )
    partial = float(np.sum(terms))
    constants: dict = {"partial_sum": partial}

    nz = int(np.max(np.nonzero(terms)[0])) + 1 if np.any(terms > 0) else 0
    body = terms[:nz] if nz else terms
    strategies = [tail] if tail != "auto" else ["integral", "geometric"]
    for strat in strategies:
        if strat == "integral":
            est = _integral_tail(body, depth)
            if est is not None:
                s_hat, bound = est
                constants.update(
                    {"tail_bound": bound, "decay_exponent": s_hat, "strategy": "integral"}
                )
                return Certificate(
                    "gp_nuclearity", bounds, CertStatus.VERIFIED_TO_DEPTH, constants
                )
        else:
            est = _geometric_tail(body)
            if est is not None:
                rho, bound = est
                constants.update({"tail_bound": bound, "rho": rho, "strategy": "geometric"})
                return Certificate(
                    "gp_nuclearity", bounds, CertStatus.VERIFIED_TO_DEPTH, constants
                )
    return Certificate(
        "gp_nuclearity",
        bounds,
        CertStatus.INCONCLUSIVE,
        constants,
        notes="no tail strategy certified the remainder at this depth",
    )


def _gp_terms(A: KoetheMatrix, q: int, r: int, depth: int) -> np.ndarray | None:
    ln_q = A.ln_row(q, depth)
    ln_r = A.ln_row(r, depth)
    if ln_q is not None and ln_r is not None:
        with np.errstate(invalid="ignore", over="ignore"):
            diff = ln_q - ln_r
            diff[np.isnan(diff)] = -INF  # 0/0 rows contribute nothing
            if np.any(np.isposinf(diff)):
                return None
            terms = np.exp(diff)
            return None if np.any(np.isinf(terms)) else terms
    out = np.empty(depth, dtype=np.float64)
    for j in range(1, depth + 1):
        den = A.entry(j, r)
        num = A.entry(j, q)
        if den.is_zero():
            if num.is_zero():
                out[j - 1] = 0.0
                continue
            return None
        ratio = lt_div(num, den)
        try:
            out[j - 1] = ratio.to_float()
        except LogTowerError:
            return None
    return out


def _integral_tail(terms: np.ndarray, depth: int) -> tuple[float, float] | None:
    n = len(terms)
    if n < 16 or terms[-1] <= 0.0:
        return None
    lo = 3 * n // 4
    idx = np.unique(np.geomspace(lo + 1, n, num=min(64, n - lo)).astype(np.int64))
    t = terms[idx - 1]
    if np.any(t <= 0.0) or np.any(np.diff(terms[lo:]) > _REL_SLACK * terms[lo:-1]):
        return None
    x = np.log(idx.astype(np.float64))
    y = np.log(t)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    if np.max(np.abs(resid)) > 0.1:
        return None
    s_hat = -float(slope)
    if s_hat <= 1.05:
        return None
    bound = float(terms[-1]) * depth / (s_hat - 1.0)
    return s_hat, bound


def _geometric_tail(terms: np.ndarray) -> tuple[float, float] | None:
    n = len(terms)
    if n < 8:
        return None
    tail = terms[-max(4, n // 4):]
    if np.any(tail <= 0.0):
        return None
    ratios = tail[1:] / tail[:-1]
    rho = float(np.max(ratios))
    if rho >= 0.99:
        return None
    bound = float(tail[-1]) * rho / (1.0 - rho)
    return rho, bound


# ---------------------------------------------------------------------------
# Mutual-domination scan (alpha/beta) and the existential interpolation scan
# ---------------------------------------------------------------------------


def _as_bijection(sigma, J: int) -> Callable[[int], int]:
    if sigma is None:
        return lambda j: j
    if callable(sigma):
        fn = sigma
    else:
        table = list(sigma)
        fn = lambda j: table[j - 1]  # noqa: E731
    seen = set()
    for j in range(1, J + 1):
        v = fn(j)
        if not isinstance(v, int) or v < 1 or v in seen:
            raise ValueError(f"sigma is not injective into the positive integers at j={j}")
        seen.add(v)
    return fn


class _SeriesSource:
    """Ratio series builder over one index range, float-array or tower-list."""

    def __init__(self, num_entry, den_entry, count: int):
        # num_entry/den_entry: grade -> (np.ndarray of ln values) or list[LogTower]
        self._num = num_entry
        self._den = den_entry
        self.count = count

    def series(self, outer: int, inner: int, den_power: float = 1.0):
        num = self._num(outer)
        den = self._den(inner)
        if isinstance(num, np.ndarray) and isinstance(den, np.ndarray):
            with np.errstate(invalid="ignore"):
                arr = num - den_power * den
            arr[np.isnan(arr)] = -INF
            if np.any(np.isposinf(arr)):
                return None
            return arr
        num_l = _to_lt_list(num)
        den_l = _to_lt_list(den)
        out = []
        for a, b in zip(num_l, den_l):
            bb = lt_pow(b, den_power) if den_power != 1.0 else b
            if bb.is_zero():
                if a.is_zero():
                    out.append(lt_zero())
                    continue
                return None
            out.append(lt_div(a, bb))
        return out


def _to_lt_list(row) -> list[LogTower]:
    if isinstance(row, np.ndarray):
        return [lt_from_ln(float(x)) for x in row]
    return row


def _series_stats(series):
    """(C, stable, increasing) for either series representation."""
    if isinstance(series, np.ndarray):
        c = lt_from_ln(float(np.max(series)))
        return c, _ln_tail_nonincreasing(series), _ln_tail_increasing(series)
    c = lt_max(series)
    return c, _lt_tail_nonincreasing(series), _lt_tail_increasing(series)


def _series_point(series, pos: int):
    if isinstance(series, np.ndarray):
        return lt_from_ln(float(series[pos]))
    return series[pos]


def _domination_pass(
    source: _SeriesSource,
    outer_max: int,
    inner_max: int,
    index_name: str,
    outer_name: str,
    inner_name: str,
    den_power_of_inner: bool = False,
):
    """Scan: for every outer grade find an inner grade with a stable constant.

    Returns (table, failing_outer, refuting, witnesses, cached_series):
    ``table`` maps outer -> (inner, C) for the cleared grades; when an outer
    grade fails, ``refuting`` says whether every inner candidate grew
    monotonically over the last half of the range.
    """
    table: dict[int, tuple[int, LogTower]] = {}
    for outer in range(outer_max + 1):
        candidates = []
        all_series = []
        for inner in range(inner_max + 1):
            if den_power_of_inner:
                series = source.series(outer, inner=0, den_power=float(inner))
            else:
                series = source.series(outer, inner)
            all_series.append(series)
            if series is None:
                continue
            c, stable, _ = _series_stats(series)
            if stable:
                candidates.append((inner, c))
        if candidates:
            table[outer] = _pick_stable(candidates)
            continue
        # outer grade failed: classify
        refuting = True
        witnesses = []
        positions = _sample_positions(source.count)
        for inner, series in enumerate(all_series):
            if series is None:
                refuting = False
                continue
            _, _, increasing = _series_stats(series)
            if not increasing:
                refuting = False
            for pos in positions:
                witnesses.append(
                    Witness(
                        {outer_name: outer, inner_name: inner, index_name: pos + 1},
                        _series_point(series, pos),
                        lt_one(),
                    )
                )
        return table, outer, refuting, witnesses
    return table, None, False, []


def equivalence_check(
    A: KoetheMatrix,
    B: KoetheMatrix,
    sigma=None,
    bounds: CheckBounds | None = None,
) -> tuple[Certificate, Certificate]:
    """Mutual polynomial domination of two matrices along a bijection.

    Returns the (alpha, beta) certificate pair: alpha scans
    ``a_{sigma(j),q} <= C b_{j,r}`` and beta scans the reverse domination
    ``b_{j,r'} <= C' a_{sigma(j),q'}``.  The constant is computed as the
    maximal ratio over the range, never searched on a grid; an inner grade is
    accepted when the ratio sequence is non-increasing over the final quarter.
    """
    bounds = bounds or CheckBounds()
    J = bounds.J
    sig = _as_bijection(sigma, J)

    a_rows = _grade_rows(lambda j, g: A.entry(sig(j), g), A, J, sig)
    b_rows = _grade_rows(lambda j, g: B.entry(j, g), B, J, None)

    alpha = _domination_certificate(
        "alpha",
        _SeriesSource(a_rows, b_rows, J),
        outer_max=bounds.Q,
        inner_max=bounds.R,
        names=("q", "r", "j"),
        bounds={"Q": bounds.Q, "R": bounds.R, "J": J},
        note=f"{A.name} (along sigma) against {B.name}",
    )
    beta = _domination_certificate(
        "beta",
        _SeriesSource(b_rows, a_rows, J),
        outer_max=bounds.R,
        inner_max=bounds.Q,
        names=("r'", "q'", "j"),
        bounds={"Q": bounds.Q, "R": bounds.R, "J": J},
        note=f"{B.name} against {A.name} (along sigma)",
    )
    return alpha, beta


def _grade_rows(entry_fn, M: KoetheMatrix, J: int, sig):
    cache: dict[int, object] = {}

    def rows(grade: int):
        if grade not in cache:
            row = None
            if sig is None:
                row = M.ln_row(grade, J)
            elif M._ln_rows is not None:
                js = np.array([sig(j) for j in range(1, J + 1)], dtype=np.float64)
                row = np.asarray(M._ln_rows(js, grade), dtype=np.float64)
            if row is None:
                towers = [entry_fn(j, grade) for j in range(1, J + 1)]
                lns = [t.ln_float() for t in towers]
                if all(ln < INF for ln in lns):
                    row = np.array(lns, dtype=np.float64)
                else:
                    row = towers
            cache[grade] = row
        return cache[grade]

    return rows


def _domination_certificate(
    condition, source, outer_max, inner_max, names, bounds, note=""
) -> Certificate:
    outer_name, inner_name, index_name = names
    table, failed_outer, refuting, witnesses = _domination_pass(
        source, outer_max, inner_max, index_name, outer_name, inner_name
    )
    if failed_outer is None:
        constants: dict = {}
        for outer, (inner, c) in table.items():
            constants[f"C({outer_name}={outer})"] = c
            constants[f"{inner_name}({outer_name}={outer})"] = inner
        return Certificate(
            condition, bounds, CertStatus.VERIFIED_TO_DEPTH, constants, notes=note
        )
    status = CertStatus.CANDIDATE_REFUTATION if refuting else CertStatus.INCONCLUSIVE
    msg = (
        f"{outer_name}={failed_outer} admits no stable constant for any "
        f"{inner_name} <= {inner_max}"
    )
    if status is CertStatus.CANDIDATE_REFUTATION:
        msg += "; every candidate ratio grows monotonically over the last half"
    return Certificate(
        condition,
        bounds,
        status,
        {f"failing_{outer_name}": failed_outer},
        witnesses if status is CertStatus.CANDIDATE_REFUTATION else witnesses[:2],
        notes=(note + "; " if note else "") + msg,
    )


def condition_iv_check(
    rows: Callable[[int, int], LogTower], bounds: CheckBounds | None = None
) -> Certificate:
    """Existential interpolation scan over normalized row maxima.

    Searches p <= P such that for every q <= Q some r <= R gives a stable
    constant C = max_k rows(k,q)/rows(k,p)^r.  Rows must be normalized:
    rows(k, 0) >= 1 on the tested range.
    """
    bounds = bounds or CheckBounds()
    K, P, Q, R = bounds.K, bounds.P, bounds.Q, bounds.R
    cache: dict[tuple[int, int], LogTower] = {}

    def val(k: int, g: int) -> LogTower:
        if (k, g) not in cache:
            cache[(k, g)] = rows(k, g)
        return cache[(k, g)]

    floor = lt_from_real(1.0 - _C_ONE_SLACK)
    for k in range(1, K + 1):
        if lt_cmp(val(k, 0), floor) < 0:
            raise ValueError(f"rows(k={k}, 0) < 1: the system is not normalized")

    cert_bounds = {"P": P, "Q": Q, "R": R, "K": K}
    attempts = []
    for p in range(P + 1):
        pow_cache: dict[int, object] = {}

        def den_rows(_inner: int, p=p, pow_cache=pow_cache):
            if 0 not in pow_cache:
                towers = [val(k, p) for k in range(1, K + 1)]
                lns = [t.ln_float() for t in towers]
                if all(ln < INF for ln in lns):
                    pow_cache[0] = np.array(lns, dtype=np.float64)
                else:
                    pow_cache[0] = towers
            return pow_cache[0]

        def num_rows(q: int):
            towers = [val(k, q) for k in range(1, K + 1)]
            lns = [t.ln_float() for t in towers]
            if all(ln < INF for ln in lns):
                return np.array(lns, dtype=np.float64)
            return towers

        num_cache: dict[int, object] = {}

        def num(q: int):
            if q not in num_cache:
                num_cache[q] = num_rows(q)
            return num_cache[q]

        source = _SeriesSource(num, den_rows, K)
        table, failed_q, refuting, witnesses = _domination_pass(
            source, Q, R, "k", "q", "r", den_power_of_inner=True
        )
        if failed_q is None:
            constants: dict = {"p": p}
            for q, (r, c) in table.items():
                constants[f"C(q={q})"] = c
                constants[f"r(q={q})"] = r
            return Certificate(
                "condition_iv", cert_bounds, CertStatus.VERIFIED_TO_DEPTH, constants
            )
        attempts.append((len(table), -p, p, failed_q, refuting, witnesses))

    attempts.sort(reverse=True)
    _, _, best_p, failed_q, refuting, witnesses = attempts[0]
    for w in witnesses:
        w.params["p"] = best_p
    status = CertStatus.CANDIDATE_REFUTATION if refuting else CertStatus.INCONCLUSIVE
    notes = f"best p={best_p} fails at q={failed_q}"
    if status is CertStatus.CANDIDATE_REFUTATION:
        notes += "; for every r the ratio grows monotonically over the last half of k"
    return Certificate(
        "condition_iv",
        cert_bounds,
        status,
        {"best_p": best_p, "failing_q": failed_q},
        witnesses if status is CertStatus.CANDIDATE_REFUTATION else witnesses[:2],
        notes=notes,
    )


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def norm_table_csv(rows: Callable[[int, int], LogTower], K: int, Q: int) -> str:
    """Tabulate a row rule as CSV with header k,q,value."""
    lines = ["k,q,value"]
    for k in range(1, K + 1):
        for q in range(Q + 1):
            v = rows(k, q)
            try:
                cell = repr(v.to_float())
            except LogTowerError:
                cell = lt_encode(v)
            lines.append(f"{k},{q},{cell}")
    return "\n".join(lines) + "\n"
