import math
import random

import numpy as np
import pytest

from koethe_lab.koethe import (
    Certificate,
    CertStatus,
    CheckBounds,
    KoetheMatrix,
    SeqVector,
    Witness,
    condition_iv_check,
    dn_check,
    dn_exponent,
    equivalence_check,
    geometric_matrix,
    gp_nuclearity_check,
    matrix_from_rows,
    norm_table_csv,
    pairing,
    power_matrix,
    s_dual_norm,
    s_norm,
    scaled_power_matrix,
    seminorm,
)
from koethe_lab.logtower import lt_cmp, lt_from_int, lt_from_real, lt_one, lt_pow

INF = math.inf
POWER = power_matrix()


def random_vector(rng, max_index=60, max_support=20):
    support = rng.sample(range(1, max_index + 1), rng.randint(1, max_support))
    return SeqVector.from_pairs(
        (j, complex(rng.uniform(-2, 2), rng.uniform(-2, 2))) for j in support
    )


# ---------------------------------------------------------------------------
# SeqVector / pairing
# ---------------------------------------------------------------------------


def test_seqvector_invariants():
    with pytest.raises(ValueError):
        SeqVector((2, 1), (1 + 0j, 1 + 0j))
    with pytest.raises(ValueError):
        SeqVector((1,), (0j,))
    v = SeqVector.from_pairs([(3, 2.0), (1, 1.0), (5, 0.0)])
    assert v.indices == (1, 3)


def test_pairing_examples():
    assert pairing(SeqVector.basis(1), SeqVector.basis(2)) == 0
    rng = random.Random(5)
    for _ in range(20):
        x = random_vector(rng)
        norm_sq = sum(abs(v) ** 2 for v in x.values)
        assert pairing(x, x) == pytest.approx(norm_sq)
    assert pairing(SeqVector.basis(1).scale(1j), SeqVector.basis(1)) == 1j


def test_pairing_bound_against_direct_sum():
    rng = random.Random(9)
    for _ in range(100):
        x = random_vector(rng)
        y = random_vector(rng)
        direct = sum(x.get(j) * y.get(j).conjugate() for j in set(x.indices) | set(y.indices))
        assert pairing(x, y) == pytest.approx(direct)
        for q in range(5):
            bound = s_norm(x, q).to_float() * s_dual_norm(y, q).to_float()
            assert abs(pairing(x, y)) <= bound * (1 + 1e-9)


# ---------------------------------------------------------------------------
# Seminorms
# ---------------------------------------------------------------------------


def test_seminorm_examples():
    assert seminorm(SeqVector.basis(1), POWER, INF, 5).to_float() == 1.0
    assert seminorm(SeqVector.basis(3), POWER, 2, 2).to_float() == 9.0
    x = SeqVector.from_pairs([(1, 1 / math.sqrt(2)), (2, 1 / math.sqrt(2))])
    for q in range(7):
        got = seminorm(x, POWER, INF, q).to_float()
        # independent enumeration of sup_j |x_j| j^q
        expect = max(abs(v) * j**q for j, v in x.items())
        assert got == pytest.approx(expect, rel=1e-12)
        assert got == pytest.approx(2 ** (q - 0.5), rel=1e-12)


def test_seminorm_rejects_other_p():
    with pytest.raises(ValueError):
        seminorm(SeqVector.basis(1), POWER, 3, 0)


def test_seminorm_empty_vector_is_zero():
    empty = SeqVector((), ())
    assert seminorm(empty, POWER, 2, 3).is_zero()
    assert s_dual_norm(empty, 1).is_zero()


def test_seminorm_monotone_in_grade():
    rng = random.Random(21)
    for A in (POWER, geometric_matrix(2.0)):
        for _ in range(25):
            x = random_vector(rng, max_index=30)
            for p in (1, 2, INF):
                prev = None
                for q in range(5):
                    cur = seminorm(x, A, p, q)
                    if prev is not None:
                        assert lt_cmp(prev, cur) <= 0
                    prev = cur


def test_s_norm_matches_seminorm_bit_for_bit():
    rng = random.Random(33)
    for _ in range(50):
        x = random_vector(rng)
        for q in range(4):
            assert s_norm(x, q) == seminorm(x, POWER, 2, q)


def test_s_norm_examples():
    for k in (1, 2, 7, 40):
        assert s_norm(SeqVector.basis(k), 0).to_float() == 1.0
    assert s_norm(SeqVector.basis(2), 3).to_float() == 8.0
    assert s_dual_norm(SeqVector.basis(2), 3).to_float() == pytest.approx(1 / 8)


def test_seminorm_deep_weights_survive():
    # weights far beyond float range still produce a usable seminorm
    deep = KoetheMatrix(
        "deep", lambda j, q: lt_pow(lt_from_real(2.0), j * q * 1000.0), validate=False
    )
    x = SeqVector.from_pairs([(1, 1.0), (2, 1.0)])
    v = seminorm(x, deep, INF, 2)
    assert lt_cmp(v, lt_pow(lt_from_real(2.0), 4000.0)) == 0


# ---------------------------------------------------------------------------
# Dominating norm
# ---------------------------------------------------------------------------


def test_dn_check_equality_on_basis_vectors():
    for k in (1, 2, 9):
        for p in range(4):
            lhs, rhs, ok = dn_check(SeqVector.basis(k), p)
            assert ok
            assert lhs.to_float() == pytest.approx(rhs.to_float(), rel=1e-12)
            assert lhs.to_float() == pytest.approx(float(k) ** (2 * p))


def test_dn_check_hand_computed_case():
    x = SeqVector.from_pairs([(1, 1.0), (2, 1.0)])
    lhs, rhs, ok = dn_check(x, 1)
    assert lhs.to_float() == pytest.approx(5.0, rel=1e-12)
    assert rhs.to_float() == pytest.approx(math.sqrt(2) * math.sqrt(17), rel=1e-12)
    assert ok


def test_dn_check_random_vectors():
    rng = random.Random(41)
    for _ in range(200):
        x = random_vector(rng)
        for p in range(5):
            assert dn_check(x, p)[2]


def test_dn_exponent():
    assert dn_exponent(1, 2) == 2
    assert dn_exponent(3, 1) == 3
    assert dn_exponent(2, 5) == 16
    with pytest.raises(ValueError):
        dn_exponent(1, 0)


def test_dn_exponent_guarantee_on_unit_vectors():
    rng = random.Random(43)
    for _ in range(100):
        x = random_vector(rng, max_index=25)
        scale = 1 / math.sqrt(sum(abs(v) ** 2 for v in x.values))
        x = x.scale(scale)
        p, r = rng.randint(0, 3), rng.randint(1, 5)
        q = dn_exponent(p, r)
        lhs = s_norm(x, p).to_float() ** r
        rhs = s_norm(x, q).to_float()
        assert lhs <= rhs * (1 + 1e-9)


# ---------------------------------------------------------------------------
# Koethe matrix registration
# ---------------------------------------------------------------------------


def test_matrix_validation_rejects_bad_rules():
    from koethe_lab.logtower import lt_zero

    with pytest.raises(ValueError):
        KoetheMatrix("shrinking", lambda j, q: lt_from_real(1.0 / (q + 1)))
    with pytest.raises(ValueError):
        KoetheMatrix("dead-row", lambda j, q: lt_zero() if j == 3 else lt_one())


# ---------------------------------------------------------------------------
# Grothendieck-Pietsch scan
# ---------------------------------------------------------------------------


def test_gp_zeta2_verified():
    cert = gp_nuclearity_check(POWER, 0, 2, 10**6)
    assert cert.status is CertStatus.VERIFIED_TO_DEPTH
    assert cert.constants["partial_sum"] == pytest.approx(math.pi**2 / 6, abs=1e-3)
    assert cert.constants["tail_bound"] <= 2e-6


def test_gp_harmonic_inconclusive():
    cert = gp_nuclearity_check(POWER, 0, 1, 10**5)
    assert cert.status is CertStatus.INCONCLUSIVE


def test_gp_geometric_verified():
    cert = gp_nuclearity_check(geometric_matrix(2.0), 0, 1, 400)
    assert cert.status is CertStatus.VERIFIED_TO_DEPTH
    assert cert.constants["strategy"] == "geometric"
    assert cert.constants["partial_sum"] == pytest.approx(1.0, rel=1e-9)


def test_gp_preconditions():
    with pytest.raises(ValueError):
        gp_nuclearity_check(POWER, 2, 0, 100)
    with pytest.raises(ValueError):
        gp_nuclearity_check(POWER, 0, 1, 8)


# ---------------------------------------------------------------------------
# alpha/beta equivalence scan
# ---------------------------------------------------------------------------


def test_equivalence_identity_has_constant_one():
    for A in (POWER, geometric_matrix(2.0)):
        alpha, beta = equivalence_check(A, A, bounds=CheckBounds(J=400))
        for cert in (alpha, beta):
            assert cert.status is CertStatus.VERIFIED_TO_DEPTH
            for q in range(7):
                name = "C(q=%d)" % q if cert.condition == "alpha" else "C(r'=%d)" % q
                assert cert.constants[name].to_float() == pytest.approx(1.0)


def test_equivalence_scaled_power():
    A, B = POWER, scaled_power_matrix(2)
    alpha, beta = equivalence_check(A, B, bounds=CheckBounds(J=500))
    assert alpha.status is CertStatus.VERIFIED_TO_DEPTH
    assert beta.status is CertStatus.VERIFIED_TO_DEPTH
    for q in range(7):
        # exact ratio j^q / (2j)^q = 2^-q, achieved with r = q
        assert alpha.constants[f"r(q={q})"] == q
        assert alpha.constants[f"C(q={q})"].to_float() == pytest.approx(2.0**-q)
    for r in range(7):
        assert beta.constants[f"q'(r'={r})"] == r
        assert beta.constants[f"C(r'={r})"].to_float() == pytest.approx(2.0**r)


def test_equivalence_power_vs_geometric_refutes_beta():
    alpha, beta = equivalence_check(
        POWER, geometric_matrix(2.0), bounds=CheckBounds(J=600)
    )
    assert alpha.status is CertStatus.VERIFIED_TO_DEPTH
    assert beta.status is CertStatus.CANDIDATE_REFUTATION
    assert beta.witnesses
    # witnesses grow along j for each fixed q'
    by_inner = {}
    for w in beta.witnesses:
        by_inner.setdefault(w.params["q'"], []).append((w.params["j"], w.lhs.to_float()))
    for pts in by_inner.values():
        vals = [v for _, v in sorted(pts)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_equivalence_sigma_checked():
    with pytest.raises(ValueError):
        equivalence_check(POWER, POWER, sigma=lambda j: 1, bounds=CheckBounds(J=50))


def test_equivalence_with_permutation():
    # swap consecutive pairs; the power matrices still dominate each other
    sigma = lambda j: j + 1 if j % 2 == 1 else j - 1  # noqa: E731
    alpha, beta = equivalence_check(POWER, POWER, sigma=sigma, bounds=CheckBounds(J=200))
    assert alpha.status is CertStatus.VERIFIED_TO_DEPTH
    assert beta.status is CertStatus.VERIFIED_TO_DEPTH


# ---------------------------------------------------------------------------
# condition (iv) scan
# ---------------------------------------------------------------------------


def power_rows(n):
    return lambda k, q: lt_pow(lt_from_int(n[k - 1]), q)


def test_condition_iv_power_rows():
    rows = power_rows(list(range(1, 41)))
    cert = condition_iv_check(rows, CheckBounds(K=40))
    assert cert.status is CertStatus.VERIFIED_TO_DEPTH
    assert cert.constants["p"] == 1
    for q in range(7):
        assert cert.constants[f"r(q={q})"] == q
        assert cert.constants[f"C(q={q})"].to_float() == pytest.approx(1.0)


def test_condition_iv_random_power_rows():
    rng = random.Random(77)
    for _ in range(10):
        n = sorted(rng.sample(range(1, 500), 25))
        cert = condition_iv_check(power_rows(n), CheckBounds(K=25))
        assert cert.status is CertStatus.VERIFIED_TO_DEPTH
        assert cert.constants["p"] <= 1


def test_condition_iv_requires_normalized_rows():
    rows = lambda k, q: lt_from_real(0.5 * (k**q))  # noqa: E731
    with pytest.raises(ValueError):
        condition_iv_check(rows, CheckBounds(K=5))


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


def test_certificate_json_is_deterministic_and_encodes_towers():
    cert = Certificate(
        "demo",
        {"K": 3},
        CertStatus.VERIFIED_TO_DEPTH,
        {"C": lt_from_real(2.5), "r": 2},
        [Witness({"k": 1}, lt_from_real(1.0), lt_from_real(2.0))],
        notes="n",
    )
    one = cert.to_json()
    two = cert.to_json()
    assert one == two
    data = one
    assert '"status": "verified_to_depth"' in data
    assert '"T0:2.5"' in data


def test_refutation_requires_witnesses():
    with pytest.raises(ValueError):
        Certificate("demo", {}, CertStatus.CANDIDATE_REFUTATION)


def test_norm_table_csv_header():
    rows = power_rows([2, 5, 9])
    table = norm_table_csv(rows, 3, 2)
    lines = table.strip().split("\n")
    assert lines[0] == "k,q,value"
    assert lines[1] == "1,0,1.0"
    assert len(lines) == 1 + 3 * 3
