"""Wigner 3j symbols from the Racah sum, evaluated in log-gamma arithmetic."""

import math


def _lfact(n):
    return math.lgamma(n + 1)


def wigner_3j(l1, l2, l3, m1, m2, m3):
    """Return the Wigner 3j symbol (l1 l2 l3; m1 m2 m3) for integer arguments.

    Symbols violating a selection rule (triangle condition, m1+m2+m3 = 0,
    |m_i| <= l_i) are zero.
    """
    if m1 + m2 + m3 != 0:
        return 0.0
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    if l3 > l1 + l2 or l3 < abs(l1 - l2):
        return 0.0
    if m1 == m2 == m3 == 0 and (l1 + l2 + l3) % 2:
        return 0.0

    log_pref = 0.5 * (
        _lfact(l1 + l2 - l3) + _lfact(l1 - l2 + l3) + _lfact(-l1 + l2 + l3)
        - _lfact(l1 + l2 + l3 + 1)
        + _lfact(l1 + m1) + _lfact(l1 - m1)
        + _lfact(l2 + m2) + _lfact(l2 - m2)
        + _lfact(l3 + m3) + _lfact(l3 - m3)
    )

    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    total = 0.0
    for k in range(kmin, kmax + 1):
        log_den = (
            _lfact(k) + _lfact(l3 - l2 + k + m1) + _lfact(l3 - l1 + k - m2)
            + _lfact(l1 + l2 - l3 - k) + _lfact(l1 - k - m1) + _lfact(l2 - k + m2)
        )
        term = math.exp(log_pref - log_den)
        total += -term if k % 2 else term

    phase = -1.0 if (l1 - l2 - m3) % 2 else 1.0
    return phase * total
