"""Independent scalar reference implementations used as test oracles.

Pure ``math``: no numpy, no scipy and nothing imported from the package, so a
shared bug cannot make both sides agree.  Parameters are plain dicts.
"""

import math

LN2 = math.log(2.0)

SYSTEM = dict(D=100.0, H=50.0, beta0=1e-6, N0=10 ** (-169 / 10) * 1e-3, B=3e6, T=1e-3,
              fU=9e9, kU=1e-28, eta=0.5, delta=0.5)
UE = dict(L=1200.0, c=1000.0, kappa=1e-28, fmax=1e9, Pmax=0.1, eps=1e-5)


def q_func(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def q_inv(eps, tol=1e-13):
    """Bisection on the Gaussian tail (reflected above 1/2, where 1 - eps is exact)."""
    if eps > 0.5:
        return -q_inv(1.0 - eps, tol)
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if q_func(mid) > eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gains(d, s=SYSTEM):
    h1 = s["beta0"] / (s["H"] ** 2 + d**2)
    h2 = s["beta0"] / (s["H"] ** 2 + (s["D"] - d) ** 2)
    bn0 = s["B"] * s["N0"]
    return h1, h2, h1 / bn0, h2 / bn0


def ups_inf(bits, n):
    return 0.0 if bits == 0 else 2.0 ** (bits / n) - 1.0


def ups_fin(bits, n, eps):
    if bits == 0:
        return 0.0
    return math.exp(LN2 * bits / (n * (1 - eps)) + q_inv(eps) / math.sqrt(n)) - 1.0


def ups(regime, bits, n, eps):
    return ups_inf(bits, n) if regime == "inf" else ups_fin(bits, n, eps)


def rate(regime, sinr, n, eps):
    """Bits carried over ``n`` channel uses at SINR ``sinr``."""
    if regime == "inf":
        return n * math.log2(1.0 + sinr)
    return (1 - eps) * n * (math.log2(1.0 + sinr) - q_inv(eps) / (math.sqrt(n) * LN2))


def powers(scheme, regime, rho1, rho2, t, d, s=SYSTEM, u1=UE, u2=UE):
    """Minimum powers; NOMA-F returns the SIC-success/failure average and the branches."""
    _, _, g1, g2 = gains(d, s)
    n = s["B"] * t
    b1, b2 = rho1 * u1["L"], rho2 * u2["L"]
    if scheme == "noma":
        y1, y2 = ups(regime, b1, n, u1["eps"]), ups(regime, b2, n, u2["eps"])
        hat1, hat2 = y1 * (y2 + 1) / g1, y2 / g2
        if regime == "inf":
            return hat1, hat2, {}
        A = 1 - y1 * y2
        chk1, chk2 = y1 * (y2 + 1) / (A * g1), y2 * (y1 + 1) / (A * g2)
        e = u1["eps"]
        return (1 - e) * hat1 + e * chk1, (1 - e) * hat2 + e * chk2, dict(hat1=hat1, hat2=hat2, chk1=chk1, chk2=chk2, A=A)
    share = s["eta"] if scheme == "fdma" else s["delta"]
    y1 = ups(regime, b1, share * n, u1["eps"])
    y2 = ups(regime, b2, (1 - share) * n, u2["eps"])
    if scheme == "fdma":
        return share * y1 / g1, (1 - share) * y2 / g2, {}
    return y1 / g1, y2 / g2, {}


def energy(scheme, regime, rho1, rho2, t, d, s=SYSTEM, u1=UE, u2=UE):
    """Total energy and its parts as a dict."""
    T = s["T"]
    out = {}
    w1 = T - (s["delta"] * t if scheme == "tdma" else t)
    w2 = T - t
    for k, (rho, u, w) in enumerate(((rho1, u1, w1), (rho2, u2, w2)), start=1):
        cyc = u["c"] * u["L"]
        f_loc = (1 - rho) * cyc / T
        out[f"e_loc{k}"] = u["kappa"] * T * f_loc**3
        f_rem = rho * cyc / w if rho > 0 else 0.0
        out[f"e_rem{k}"] = s["kU"] * w * f_rem**3 if rho > 0 else 0.0
        out[f"f_loc{k}"], out[f"f_rem{k}"] = f_loc, f_rem
    p1, p2, _ = powers(scheme, regime, rho1, rho2, t, d, s, u1, u2)
    tw1, tw2 = (s["delta"] * t, (1 - s["delta"]) * t) if scheme == "tdma" else (t, t)
    out["e_off1"], out["e_off2"] = p1 * tw1, p2 * tw2
    out["p1"], out["p2"] = p1, p2
    out["total"] = sum(out[k] for k in ("e_loc1", "e_loc2", "e_rem1", "e_rem2", "e_off1", "e_off2"))
    return out


def noma_location(rho1, rho2, t, s=SYSTEM, u1=UE, u2=UE):
    """Unclamped weighted midpoint of the NOMA-F sum power."""
    # powers at d are a_k * pathloss_k; pathloss_1 = H^2 + d^2, pathloss_2 = H^2 + (D-d)^2
    p1, p2, _ = powers("noma", "fin", rho1, rho2, t, 0.0, s, u1, u2)
    a1 = p1 / s["H"] ** 2
    a2 = p2 / (s["H"] ** 2 + s["D"] ** 2)
    return a2 * s["D"] / (a1 + a2)


def ab(b1, b2, N, e1, e2, override=True):
    def y(bits, n, e):
        if bits == 0 and override:
            return 0.0
        return math.exp(LN2 * bits / (n * (1 - e)) + q_inv(e) / math.sqrt(n)) - 1.0

    A = 1 - y(b1, N, e1) * y(b2, N, e2)
    B = (y(b1, N, e1) + 1) * (y(b2, N, e2) + 1) - 0.5 * ((y(b1, N / 2, e1) + 1) + (y(b2, N / 2, e2) + 1))
    return A, B
