"""Independent high-precision scalar evaluations used to freeze expected values.

These are written directly from the rate equations with mpmath at 50 digits and
share no code with the package. Running this file prints the frozen values.
"""
import mpmath as mp

mp.mp.dps = 50

FE_TABLE = [(mp.mpf("0.01"), mp.mpf("1.16")), (mp.mpf("0.05"), mp.mpf("1.16")),
            (mp.mpf("0.1"), mp.mpf("1.22")), (mp.mpf("0.15"), mp.mpf("1.35"))]


def fe(e):
    if e <= FE_TABLE[0][0]:
        return FE_TABLE[0][1]
    for (x0, y0), (x1, y1) in zip(FE_TABLE, FE_TABLE[1:]):
        if e <= x1:
            return y0 + (y1 - y0) * (e - x0) / (x1 - x0)
    return FE_TABLE[-1][1]


def h(e):
    if e == 0:
        return mp.mpf(0)
    return e * mp.log(e, 2) + (1 - e) * mp.log(1 - e, 2)


def trans(L, passes, alpha="0.2", Lr="1"):
    return mp.power(10, -(mp.mpf(alpha) * L + passes * mp.mpf(Lr)) / 10)


def eta_up(p):
    return mp.mpf("0.465") * mp.sin(mp.sqrt(mp.mpf("79.75") * p)) ** 2


def dark_up(p):
    b = [mp.mpf(x) for x in ("50", "826.4", "110.3", "-0.403", "0.00065")]
    return sum(bk * p**k for k, bk in enumerate(b))


def bb84_poisson_memory(mu, eta, d, L, nu="1e9", td="50e-9", b="0.01"):
    mu, eta, d, nu, td, b = map(mp.mpf, (mu, eta, d, nu, td, b))
    ps = mu * eta * trans(L, 1)
    pd = 4 * d
    pc = ps + pd
    e = (pd / 2 + b * ps) / pc
    pm = 1 - (1 + mu) * mp.exp(-mu)
    beta = (pc - pm) / pc
    x = e / beta
    tau = -beta * mp.log(mp.mpf(1) / 2 + 2 * x - 2 * x**2, 2)
    sat = mp.exp(-nu * pc * td / 4)
    return dict(p_click=pc, e=e, beta=beta, tau=tau,
                R=nu * pc * (tau + fe(e) * h(e)) * sat / 2)


def bbm92_deterministic(eta, d, L, nu="1e9", td="50e-9", b="0.01"):
    eta, d, nu, td, b = map(mp.mpf, (eta, d, nu, td, b))
    t2 = trans(L, 2)
    pt = eta**2 * t2
    pf = 8 * d * eta * mp.sqrt(t2) + 16 * d**2
    pc = pt + pf
    e = (pf / 2 + b * pt) / pc
    tau = -mp.log(mp.mpf(1) / 2 + 2 * e - 2 * e**2, 2)
    side = eta * mp.sqrt(t2)
    sat = mp.exp(-nu * side * td / 4) ** 2
    return dict(p_click=pc, e=e, tau=tau, R=nu * pc * (tau + fe(e) * h(e)) * sat / 2)


def dpsk(mu, N, memory, eta, d, L, nu="1e9", td="50e-9", b="0.01"):
    mu, eta, d, nu, td, b = map(mp.mpf, (mu, eta, d, nu, td, b))
    ebs = eta * trans(L, 1)
    ps = mu * ebs
    pd = 2 * d
    pc = ps + pd
    e = (pd / 2 + b * ps) / pc
    gamma = 1 - 2 * mu + 2 * ps if memory else 1 - mu / N + ps / N
    tau = gamma - e / (N * (1 - mp.mpf(1) / (2 * N)))
    sat = mp.exp(-nu * pc * td / 2)
    return dict(p_click=pc, e=e, gamma=gamma, tau=tau, R=nu * pc * (tau + fe(e) * h(e)) * sat)


def pdc_c1(chi, tl):
    chi, tl = mp.mpf(chi), mp.mpf(tl)
    th2 = mp.tanh(chi) ** 2
    return 2 * tl**2 * th2 / (mp.cosh(chi) ** 4 * (1 - th2 * (1 - tl) ** 2) ** 4)


if __name__ == "__main__":
    a2 = mp.mpf("79.75")
    print("eta peak p", (mp.pi / 2) ** 2 / a2, "eta", eta_up((mp.pi / 2) ** 2 / a2))
    print("eta(0.01)", eta_up(mp.mpf("0.01")))
    print("D(10)", dark_up(10), "D(100)", dark_up(100))
    print("NEP(0.01)", mp.sqrt(2 * dark_up(mp.mpf("0.01"))) / eta_up(mp.mpf("0.01")))
    print("T1(100)", trans(100, 1), "T2(100)", trans(100, 2))
    print("h(0.11)", h(mp.mpf("0.11")))
    print("sat", mp.exp(-mp.mpf("0.25")))
    print("bb84", bb84_poisson_memory("0.005", "0.075", "1.28e-7", 50))
    print("bbm92 300", bbm92_deterministic("0.075", "1.28e-7", 300))
    print("bbm92 ideal 350", bbm92_deterministic("0.46", "5e-8", 350))
    print("dpsk", dpsk("0.5", 100, False, "0.075", "1.28e-7", 200))
    print("c1", pdc_c1("0.1", "0.5"))
