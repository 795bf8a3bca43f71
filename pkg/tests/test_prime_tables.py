import math
import random

import numpy as np
import pytest

from friabilis.errors import CacheError, DomainError, RangeError, ResourceError
from friabilis.prime_tables import (
    LI2,
    PrimeTable,
    _iroot,
    _simple_sieve,
    big_pi,
    chebyshev_psi,
    li,
    load_prime_cache,
    remainder_sample,
    save_prime_cache,
    sieve_primes,
)


# --- oracles ---------------------------------------------------------------


def trial_division_primes(limit):
    out = []
    for n in range(2, limit + 1):
        for d in range(2, math.isqrt(n) + 1):
            if n % d == 0:
                break
        else:
            out.append(n)
    return out


def mr_is_prime(n):
    # deterministic Miller-Rabin, independent reimplementation for the oracle
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def lambda_table(limit):
    """Von Mangoldt values Lambda(n) for n <= limit, by direct prime powers."""
    lam = np.zeros(limit + 1)
    for p in trial_division_primes(limit):
        pk = p
        while pk <= limit:
            lam[pk] = math.log(p)
            pk *= p
    return lam


def li_series(t):
    """Independent li oracle: li(t) = Ei(log t) via the everywhere-convergent series."""
    x = math.log(t)
    gamma = 0.57721566490153286060651209008240243104
    term = 1.0
    terms = [gamma, math.log(x)]
    for k in range(1, 200):
        term *= x / k
        piece = term / k
        terms.append(piece)
        if piece < 1e-18 * abs(sum(terms)):
            break
    return math.fsum(terms)


# --- fixtures ---------------------------------------------------------------


@pytest.fixture(scope="module")
def table_1e6():
    return sieve_primes(10**6)


# --- sieve ------------------------------------------------------------------


def test_sieve_20():
    assert sieve_primes(20).primes == [2, 3, 5, 7, 11, 13, 17, 19]


def test_sieve_2():
    assert sieve_primes(2).primes == [2]


def test_sieve_matches_trial_division():
    assert sieve_primes(10**4).primes == trial_division_primes(10**4)


def test_pi_1e6(table_1e6):
    assert table_1e6.pi(10**6) == 78498


def test_segmented_equals_simple():
    for limit in (10**2, 10**4, 10**6):
        seg = sieve_primes(limit, segment_size=1 << 12).primes
        mono = sieve_primes(limit, segment_size=0).primes
        assert seg == mono


def test_sieve_tail_by_miller_rabin(table_1e6):
    # every integer in the last block is classified identically by MR
    tail = [p for p in range(999000, 10**6 + 1) if mr_is_prime(p)]
    got = [p for p in table_1e6.primes if p >= 999000]
    assert got == tail


def test_log_primes_exact(table_1e6):
    rnd = random.Random(7)
    idx = [rnd.randrange(len(table_1e6.primes)) for _ in range(500)]
    for i in idx:
        assert table_1e6.log_primes[i] == pytest.approx(math.log(table_1e6.primes[i]), abs=0, rel=1e-15)


def test_sieve_domain_errors():
    with pytest.raises(DomainError):
        sieve_primes(1)
    with pytest.raises(ResourceError):
        sieve_primes(10**10)


# --- chebyshev psi -----------------------------------------------------------


def test_psi_10(table_1e6):
    expected = 3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7)
    assert chebyshev_psi(10, table_1e6) == pytest.approx(expected, abs=1e-12)


def test_psi_100(table_1e6):
    assert chebyshev_psi(100, table_1e6) == pytest.approx(94.0453112293, abs=1e-8)


def test_psi_against_lambda_sums(table_1e6):
    limit = 10**5
    lam = lambda_table(limit)
    # running Kahan cumulative as the oracle, checked at every integer t
    s = 0.0
    c = 0.0
    for t in range(2, limit + 1):
        y = lam[t] - c
        tt = s + y
        c = (tt - s) - y
        s = tt
        if t % 977 == 0 or t < 50:
            assert chebyshev_psi(t, table_1e6) == pytest.approx(s, abs=1e-8)
    # and spot-check the endpoint with exact fsum
    assert chebyshev_psi(limit, table_1e6) == pytest.approx(math.fsum(lam), abs=1e-8)


def test_psi_real_argument(table_1e6):
    # psi is a step function; a real t lands on the previous step
    assert chebyshev_psi(10.9, table_1e6) == chebyshev_psi(10, table_1e6)


def test_psi_range_error(table_1e6):
    with pytest.raises(RangeError):
        chebyshev_psi(10**7, table_1e6)


# --- li -----------------------------------------------------------------------


def test_li_at_2():
    assert li(2) == LI2
    assert LI2 == pytest.approx(1.045163780117492784844588889194, abs=1e-15)


def test_li_10():
    assert li(10) == pytest.approx(6.1655995047872979, rel=1e-10)


def test_li_against_series():
    for t in (2.0, 3.5, 10.0, 100.0, 1e4, 1e6, 1e8):
        assert li(t) == pytest.approx(li_series(t), rel=1e-10)


def test_li_increasing_and_pnt_band():
    prev = li(100)
    for t in np.geomspace(100, 1e8, 25)[1:]:
        cur = li(float(t))
        assert cur > prev
        prev = cur
        ratio = cur / (t / math.log(t))
        assert 1.0 < ratio < 1.5


def test_li_domain():
    with pytest.raises(DomainError):
        li(1.5)


# --- big_pi --------------------------------------------------------------------


def test_iroot_exact():
    for n in (0, 1, 7, 8, 9, 1023, 1024, 1025, 10**12):
        for k in (1, 2, 3, 5, 10):
            r = _iroot(n, k)
            assert r**k <= n < (r + 1) ** k


def test_big_pi_values(table_1e6):
    assert big_pi(3, table_1e6) == 2.0
    assert big_pi(4, table_1e6) == 2.5
    assert big_pi(10, table_1e6) == pytest.approx(16 / 3, abs=1e-14)


def test_big_pi_via_prime_powers(table_1e6):
    # independent route: direct sum of 1/k over prime powers
    for t in (10, 100, 5000):
        acc = []
        for p in trial_division_primes(t):
            pk, k = p, 1
            while pk <= t:
                acc.append(1.0 / k)
                pk *= p
                k += 1
        assert big_pi(t, table_1e6) == pytest.approx(math.fsum(acc), abs=1e-12)


def test_big_pi_sandwich(table_1e6):
    # 0 <= Pi(t) - pi(t) <= 2 sqrt(t)/log 2 for t in range
    for t in (4, 10, 1000, 10**6):
        gap = big_pi(t, table_1e6) - table_1e6.pi(t)
        assert 0.0 <= gap <= 2 * math.sqrt(t) / math.log(2)


# --- remainders -----------------------------------------------------------------


def test_remainder_sample_10(table_1e6):
    rs = remainder_sample(10, table_1e6)
    assert rs.pi_t == 4
    assert rs.r_t == pytest.approx(chebyshev_psi(10, table_1e6) - 10, abs=0)
    assert rs.q_t == pytest.approx(16 / 3 - 6.1655995047872979, abs=1e-9)


def test_remainder_sample_2(table_1e6):
    rs = remainder_sample(2, table_1e6)
    assert rs.r_t == pytest.approx(math.log(2) - 2, abs=1e-14)
    assert rs.q_t == pytest.approx(1.0 - LI2, abs=1e-14)


def test_remainder_sample_100(table_1e6):
    rs = remainder_sample(100, table_1e6)
    assert rs.r_t == pytest.approx(-5.9546887706, abs=1e-8)


# --- cache ------------------------------------------------------------------------


def test_cache_round_trip(tmp_path):
    t = sieve_primes(10**5)
    path = tmp_path / "p.frb"
    save_prime_cache(t, path)
    back = load_prime_cache(path)
    assert back.limit == t.limit
    assert back.primes == t.primes
    assert np.array_equal(back.log_primes, t.log_primes)


def test_cache_corruption_detected(tmp_path):
    t = sieve_primes(10**4)
    path = tmp_path / "p.frb"
    save_prime_cache(t, path)
    raw = bytearray(path.read_bytes())
    raw[0] = ord("X")
    (tmp_path / "bad_magic.frb").write_bytes(bytes(raw))
    with pytest.raises(CacheError):
        load_prime_cache(tmp_path / "bad_magic.frb")
    # flip a gap byte so the last prime moves off a prime
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 0x03
    (tmp_path / "bad_tail.frb").write_bytes(bytes(raw))
    with pytest.raises(CacheError):
        load_prime_cache(tmp_path / "bad_tail.frb")
