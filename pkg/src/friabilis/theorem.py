"""Desk-scale harness for the three regimes of Psi(x,y)/(x rho(u)).

With y = (log x)^c the ratio Psi/(x rho(u)) behaves differently for
c in (1,2), c = 1, and c in (0,1).  This module evaluates both sides
numerically: the measured gap log Psi - log(x rho(u)) from exact counts
and the rho grid, the predicted main term per regime, the two-term and
three-term expansions of log(x rho(u)) and log Psi, and the oscillation
quantity S(alpha,y) - I((1-alpha) log y) with its prime-power integral
counterparts.  Everything here reports numbers; nothing asserts the
asymptotic statements themselves.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dickman import int_exp, rho
from .errors import DomainError, RangeError
from .prime_tables import PrimeTable
from .psi_exact import psi_enumerate
from .saddle import SaddleState, prime_power_sums, solve_alpha

REGIMES = ("c_lt_1", "c_eq_1", "c_in_1_2")

# y > e^e keeps log log log y positive (oscillation normalizer)
_MIN_OSC_Y = math.exp(math.e)


@dataclass
class RegimeRecord:
    log_x: float
    c: float
    y: float              # (log x)^c
    u: float
    alpha: float
    log_psi_exact: float
    log_x_rho: float      # log x + log rho(u), from the grid
    measured_gap: float   # log_psi_exact - log_x_rho
    predicted_gap: float  # regime main term, no O-terms
    regime: str
    flag: str = ""        # "alpha_ge_half": c in (1,2) side condition unmet


@dataclass
class OscillationRecord:
    y: float
    alpha: float
    s_sum: float          # S(alpha, y)
    i_term: float         # I((1 - alpha) log y)
    diff: float
    normalizer: float     # y^(1/2-alpha) log_3 y / log y
    normalized_diff: float


def classify_regime(c: float) -> str:
    if not 0.0 < c < 2.0:
        raise DomainError(f"regimes cover c in (0, 2), got {c}")
    if c < 1.0:
        return "c_lt_1"
    return "c_eq_1" if c == 1.0 else "c_in_1_2"


def predicted_gap(log_x: float, c: float, state: SaddleState) -> float:
    """Main term of log(Psi/(x rho(u))) in the regime that c selects.

    All O- and o-terms are dropped; callers compare against measured_gap
    and report the ratio rather than pretending the asymptotics are exact.
    For c in (1,2) the formula is only meaningful when alpha < 1/2; the
    record builder flags that case instead of raising.
    """
    regime = classify_regime(c)
    if regime == "c_lt_1":
        return (1.0 / c - 1.0) * log_x
    if regime == "c_eq_1":
        return (math.log(4.0) - 1.0) * log_x / math.log(log_x)
    a = state.alpha
    den = (1.0 - 2.0 * a) * math.log(state.y)
    if den == 0.0:
        return math.inf
    return 0.5 * state.y ** (1.0 - 2.0 * a) / den


def log_x_rho(log_x: float, c: float, grid=None) -> tuple:
    """(exact, expansion) for log(x rho(u)) when y = (log x)^c, c in (0,1].

    exact comes from the rho grid; expansion keeps the three explicit terms

        (c-1)/c log x + (1+log c) log x/(c log_2 x) + (1-log c) log x/(c (log_2 x)^2)

    and drops the O(log x (log_3 x)^2/(log_2 x)^3) tail.
    """
    if not 0.0 < c <= 1.0:
        raise DomainError(f"log_x_rho covers c in (0, 1], got {c}")
    if log_x <= 1.0:
        raise DomainError(f"need log_x > 1 so log_2 x exists, got {log_x}")
    l2 = math.log(log_x)
    u = log_x / (c * l2)
    exact = log_x + rho(u, grid)
    lc = math.log(c)
    expansion = ((c - 1.0) / c * log_x
                 + (1.0 + lc) * log_x / (c * l2)
                 + (1.0 - lc) * log_x / (c * l2 * l2))
    return exact, expansion


def z_bruijn(log_x: float, y: float) -> float:
    """Z(x,y) = (log x/log y) log(1 + y/log x) + (y/log y) log(1 + log x/y).

    The de Bruijn shape of log Psi(x,y), valid for x >= y >= 3.  At
    y = log x both terms collapse to (log 2) log x/log_2 x, giving the
    familiar (log 4) log x/log_2 x.
    """
    if y < 3.0 or log_x < math.log(y):
        raise DomainError(f"z_bruijn needs x >= y >= 3, got log_x={log_x}, y={y}")
    ly = math.log(y)
    return (log_x / ly) * math.log1p(y / log_x) + (y / ly) * math.log1p(log_x / y)


def z_cases(log_x: float, c: float) -> float:
    """Explicit terms of the case expansion of Z(x,y) at y = (log x)^c."""
    regime = classify_regime(c)
    l2 = math.log(log_x)
    if regime == "c_eq_1":
        return math.log(4.0) * log_x / l2
    if regime == "c_in_1_2":
        return ((c - 1.0) / c * log_x
                + log_x / (c * l2)
                + log_x ** (2.0 - c) / (2.0 * c * l2))
    return (1.0 - c) * log_x ** c / c + log_x ** c / (c * l2)


def regime_record(log_x: float, c: float, table: PrimeTable, *,
                  x_exact=None, grid=None, max_count: float = 10**8,
                  eps_guard=None) -> RegimeRecord:
    """Evaluate both sides of the regime comparison at one (x, c) point.

    measured_gap uses only the exact count and the rho grid; predicted_gap
    uses only closed forms and the saddle state, so the two sides stay
    independent.  x_exact (an int) resolves guard-band points exactly when
    the caller knows x beyond its logarithm.
    """
    regime = classify_regime(c)
    y = log_x ** c
    u = log_x / math.log(y)
    state = solve_alpha(log_x, table, y)
    count = psi_enumerate(log_x, table, y, x_exact=x_exact,
                          max_count=max_count, eps_guard=eps_guard)
    lpsi = math.log(count.count)
    lxr = log_x + rho(u, grid)
    flag = ""
    if regime == "c_in_1_2" and state.alpha >= 0.5:
        flag = "alpha_ge_half"
    return RegimeRecord(
        log_x=log_x, c=c, y=y, u=u, alpha=state.alpha,
        log_psi_exact=lpsi, log_x_rho=lxr, measured_gap=lpsi - lxr,
        predicted_gap=predicted_gap(log_x, c, state), regime=regime, flag=flag,
    )


def oscillation_record(y: float, c: float, table: PrimeTable, *,
                       alpha=None) -> OscillationRecord:
    """S(alpha,y) - I((1-alpha) log y), normalized by y^(1/2-alpha) log_3 y/log y.

    alpha defaults to the saddle point of the (x, y) pair with y = (log x)^c,
    i.e. log x = y^(1/c); pass alpha explicitly to probe a synthetic value.
    """
    if y <= _MIN_OSC_Y:
        raise DomainError(f"need y > e^e for log_3 y > 0, got {y}")
    if not 1.0 < c < 2.0:
        raise DomainError(f"oscillation regime needs c in (1, 2), got {c}")
    if alpha is None:
        alpha = solve_alpha(y ** (1.0 / c), table, y).alpha
    ly = math.log(y)
    s_sum, _ = prime_power_sums(alpha, table, y)
    i_term = int_exp((1.0 - alpha) * ly)
    diff = s_sum - i_term
    normalizer = y ** (0.5 - alpha) * math.log(math.log(ly)) / ly
    return OscillationRecord(y=y, alpha=alpha, s_sum=s_sum, i_term=i_term,
                             diff=diff, normalizer=normalizer,
                             normalized_diff=diff / normalizer)


def oscillation_scan(c: float, y_grid, table: PrimeTable, *, jobs: int = 1) -> list:
    """OscillationRecords over y_grid, ascending.  jobs > 1 fans the grid
    points over threads; output order and content stay deterministic."""
    ys = sorted(float(y) for y in y_grid)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda y: oscillation_record(y, c, table), ys))
    return [oscillation_record(y, c, table) for y in ys]


def largest_feasible_log_x(c: float, table: PrimeTable, *,
                           max_count: float = 10**8, grid=None) -> float:
    """Largest log x whose regime record at this c stays within budget.

    Feasible means: y = (log x)^c within the prime table, u within the rho
    grid, and the saddle estimate of Psi at most max_count.  All three
    constraints tighten monotonically in log x, so doubling plus bisection
    finds the frontier.  Used by scans when the caller names only c.
    """
    from .dickman import default_grid
    from .saddle import psi_saddle

    classify_regime(c)
    u_max = (grid or default_grid()).u_max
    target = math.log(max_count)

    def feasible(lx: float) -> bool:
        y = lx ** c
        if y > table.limit or y < 2.0:
            return False
        u = lx / math.log(y)
        if u > u_max:
            return False
        return psi_saddle(lx, table, y) <= target

    lo = 9.0
    if not feasible(lo):
        raise DomainError(f"no feasible x at c={c} under max_count={max_count:.3g}")
    hi = lo * 2.0
    while feasible(hi):
        lo = hi
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


_GL_CACHE = {}


def _smooth_integral(y: float, alpha: float, panels: int, order: int) -> float:
    # int_2^y t^(-alpha)/log t dt over log-spaced panels, Gauss-Legendre each
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    nodes, weights = _GL_CACHE[order]
    edges = np.exp(np.linspace(math.log(2.0), math.log(y), panels + 1))
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * nodes[None, :]
    vals = t ** (-alpha) / np.log(t)
    return float(math.fsum((half[:, None] * weights[None, :] * vals).ravel()))


def q_integral(y: float, alpha: float, table: PrimeTable, *,
               panels: int = 64, order: int = 16) -> tuple:
    """(q_part, pi_part): prime-power and prime Stieltjes sums at exponent
    -alpha, each minus the smooth part int_2^y t^(-alpha) d li(t).

    q_part = sum_{p^k <= y} (1/k) (p^k)^(-alpha) - smooth
    pi_part = sum_{p <= y} p^(-alpha) - smooth

    Their difference is exactly the k >= 2 tail, the numeric face of the
    pi-vs-Q comparison.  panels/order are the quadrature resolution knobs.
    """
    if not 2.0 <= y:
        raise DomainError(f"need y >= 2, got {y}")
    if y > table.limit:
        raise RangeError(f"y={y} beyond table limit {table.limit}")
    if alpha <= 0.0:
        raise DomainError(f"need alpha > 0, got {alpha}")
    lp = table.log_primes
    # pad one ulp so p == y stays included despite log rounding
    k_end = int(np.searchsorted(lp, math.log(y) * (1.0 + 1e-15), side="right"))
    pi_sum = math.fsum(np.exp(-alpha * lp[:k_end]))
    tail = 0.0
    for p in table.primes:
        if p * p > y:
            break
        q = p * p
        k = 2
        while q <= y:
            tail += q ** (-alpha) / k
            q *= p
            k += 1
    smooth = _smooth_integral(y, alpha, panels, order)
    return pi_sum + tail - smooth, pi_sum - smooth


# --- CSV plumbing -------------------------------------------------------------------

REGIME_HEADER = "log_x,c,y,u,alpha,log_psi_exact,log_x_rho,measured_gap,predicted_gap,regime"
OSCILLATION_HEADER = "y,alpha,S,I,diff,normalizer,normalized_diff"


def write_regime_csv(records, fh) -> None:
    fh.write(REGIME_HEADER + "\n")
    for r in records:
        fh.write(f"{r.log_x:.17g},{r.c:.17g},{r.y:.17g},{r.u:.17g},{r.alpha:.17g},"
                 f"{r.log_psi_exact:.17g},{r.log_x_rho:.17g},{r.measured_gap:.17g},"
                 f"{r.predicted_gap:.17g},{r.regime}\n")


def read_regime_csv(fh) -> list:
    header = fh.readline().strip()
    if header != REGIME_HEADER:
        raise DomainError(f"unexpected regime header: {header!r}")
    out = []
    for line in fh:
        parts = line.strip().split(",")
        if not parts or parts == [""]:
            continue
        vals = [float(v) for v in parts[:9]]
        regime = parts[9]
        flag = ""
        if regime == "c_in_1_2" and vals[4] >= 0.5:
            flag = "alpha_ge_half"
        out.append(RegimeRecord(*vals, regime=regime, flag=flag))
    return out


def write_oscillation_csv(records, fh) -> None:
    fh.write(OSCILLATION_HEADER + "\n")
    for r in records:
        fh.write(f"{r.y:.17g},{r.alpha:.17g},{r.s_sum:.17g},{r.i_term:.17g},"
                 f"{r.diff:.17g},{r.normalizer:.17g},{r.normalized_diff:.17g}\n")


def read_oscillation_csv(fh) -> list:
    header = fh.readline().strip()
    if header != OSCILLATION_HEADER:
        raise DomainError(f"unexpected oscillation header: {header!r}")
    out = []
    for line in fh:
        parts = line.strip().split(",")
        if not parts or parts == [""]:
            continue
        out.append(OscillationRecord(*[float(v) for v in parts]))
    return out
