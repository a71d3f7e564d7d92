"""Independent reference values for the seqdec test suites.

Everything here is plain numpy on dense matrices: projectors are built from
numpy's own eigendecompositions and summed outer products, the sequential
measurement elements are expanded term by term, and averages over codewords
are explicit loops. Nothing is shared with the Rust implementation.

Usage:
    python3 pin_values.py             # fast pins -> fixtures/oracle_pins.json
    python3 pin_values.py --rates     # also the random-code rate sweep (minutes)

The printed values are frozen as constants in tests/common/pins.rs.
"""

import itertools
import json
import math
import sys
from pathlib import Path

import mpmath
import numpy as np

FLOOR = 1e-12


def ket(theta):
    return np.array([math.cos(theta), math.sin(theta)], dtype=complex)


def pure(v):
    return np.outer(v, v.conj())


def depolarize(rho, lam):
    return (1 - lam) * rho + lam * np.eye(2) / 2


def two_pure(theta):
    return [0.5, 0.5], [pure(ket(0.0)), pure(ket(theta))]


def depolarized_pair(theta, lam):
    p, states = two_pure(theta)
    return p, [depolarize(s, lam) for s in states]


def entropy(rho):
    w = np.linalg.eigvalsh(rho)
    return float(-sum(x * math.log2(x) for x in w if x > FLOOR))


def chi_of(p, states):
    avg = sum(pi * s for pi, s in zip(p, states))
    return entropy(avg) - sum(pi * entropy(s) for pi, s in zip(p, states))


def kron_all(ms):
    out = np.array([[1.0 + 0j]])
    for m in ms:
        out = np.kron(out, m)
    return out


def window_projector(site_states, lo, hi):
    """Projector onto product eigenvectors whose log2 eigenvalue lies in [lo, hi]."""
    spectra = [np.linalg.eigh(s) for s in site_states]
    dim = 2 ** len(site_states)
    proj = np.zeros((dim, dim), dtype=complex)
    rank = 0
    inside_mass = 0.0
    for idx in itertools.product(range(2), repeat=len(site_states)):
        vals = [spectra[s][0][k] for s, k in enumerate(idx)]
        if any(v <= FLOOR for v in vals):
            continue
        log_q = sum(math.log2(v) for v in vals)
        if lo <= log_q <= hi:
            vec = np.array([1.0 + 0j])
            for s, k in enumerate(idx):
                vec = np.kron(vec, spectra[s][1][:, k])
            proj += np.outer(vec, vec.conj())
            rank += 1
            inside_mass += math.prod(vals)
    return proj, rank, inside_mass


class Instance:
    def __init__(self, p, states, n, delta):
        self.p, self.states, self.n, self.delta = p, states, n, delta
        self.avg = sum(pi * s for pi, s in zip(p, states))
        self.S = entropy(self.avg)
        self.chi = chi_of(p, states)
        self.P, self.rank, self.mass = window_projector(
            [self.avg] * n, -n * (self.S + delta), -n * (self.S - delta)
        )

    def cond(self, word):
        base = self.S - self.chi
        proj, rank, mass = window_projector(
            [self.states[j] for j in word], -self.n * (base + self.delta), -self.n * (base - self.delta)
        )
        return proj, rank, mass

    def rho(self, word):
        return kron_all([self.states[j] for j in word])

    def prob(self, word):
        return math.prod(self.p[j] for j in word)

    def words(self):
        return itertools.product(range(len(self.p)), repeat=self.n)


def f_values(inst, zmax):
    P = inst.P
    W0 = sum(inst.prob(w) * inst.cond(w)[0] for w in inst.words())
    W1 = 0
    for w in inst.words():
        pj = inst.cond(w)[0]
        W1 = W1 + inst.prob(w) * pj @ inst.rho(w) @ pj
    W0bar = P @ W0 @ P
    out = []
    X = P.copy()
    for _ in range(zmax + 1):
        out.append(float(np.trace(W1 @ X).real))
        X = X @ W0bar
    Q = P @ (np.eye(len(P)) - W0) @ P
    return out, W0, W1, Q


def exact_average_error(inst, N):
    """Explicit average over every ordered code of N codewords."""
    total = 0.0
    words = list(inst.words())
    conds = {w: inst.cond(w)[0] for w in words}
    P = inst.P
    I = np.eye(len(P))
    for code in itertools.product(words, repeat=N):
        weight = math.prod(inst.prob(w) for w in code)
        succ = 0.0
        for u in range(N):
            M = conds[code[u]] @ P
            for i in reversed(range(u)):
                M = M @ P @ (I - conds[code[i]]) @ P
            succ += float(np.trace(M @ inst.rho(code[u]) @ M.conj().T).real)
        total += weight * (1 - succ / N)
    return total


def sequential_elements_expanded(inst, code):
    """E_1 = P P1 P and E_2 expanded with Qbar_1 = P - P P1 P written out."""
    P = inst.P
    P1 = inst.cond(code[0])[0]
    P2 = inst.cond(code[1])[0]
    a = P @ P1 @ P
    b = P @ P2 @ P
    E1 = a
    E2 = b - a @ b - b @ a + a @ b @ a
    return E1, E2


def inv_sqrt_pinv(h, rel=1e-10):
    w, v = np.linalg.eigh(h)
    top = max(w.max(), 0.0)
    d = np.array([x ** -0.5 if x > rel * top and x > 0 else 0.0 for x in w])
    return (v * d) @ v.conj().T


def pgm_error(inst, code):
    P = inst.P
    sand = [P @ inst.cond(w)[0] @ P for w in code]
    r = inv_sqrt_pinv(sum(sand))
    succ = sum(float(np.trace(r @ s @ r @ inst.rho(w)).real) for s, w in zip(sand, code))
    return 1 - succ / len(code)


def cmat(m):
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def fast_pins():
    pins = {}
    th = math.pi / 4

    # Average-state typical sets of the canonical ensemble.
    p, states = two_pure(th)
    for n in (4, 8, 12):
        inst_avg = sum(pi * s for pi, s in zip(p, states))
        S = entropy(inst_avg)
        _, rank, mass = window_projector([inst_avg] * n, -n * (S + 0.25), -n * (S - 0.25))
        pins[f"canonical_d0.25_n{n}"] = {"rank": rank, "typical_mass": mass, "atypical_mass": 1 - mass}
    pins["canonical_entropy"] = entropy(sum(pi * s for pi, s in zip(p, states)))
    pins["canonical_avg_eigs"] = sorted(np.linalg.eigvalsh(0.5 * (states[0] + states[1])).tolist(), reverse=True)

    # Depolarized pair, conditional sets.
    dp, dstates = depolarized_pair(th, 0.3)
    inst4 = Instance(dp, dstates, 4, 0.3)
    pins["depolarized_n4_d0.3_word0100_rank"] = inst4.cond((0, 1, 0, 0))[1]
    inst6 = Instance(dp, dstates, 6, 0.3)
    cond_mass = sum(inst6.prob(w) * (1 - inst6.cond(w)[2]) for w in inst6.words())
    pins["depolarized_n6_d0.3_conditional_atypical_mass"] = cond_mass
    pins["depolarized_chi"] = inst6.chi

    # f_z chain and the bound quantities on canonical n = 6, delta = 0.2.
    inst = Instance(p, states, 6, 0.2)
    f, W0, W1, Q = f_values(inst, 4)
    pins["canonical_n6_d0.2_f"] = f
    pins["canonical_n6_d0.2_rank"] = inst.rank
    a_exact = float(np.trace(W1 @ Q).real)
    chi_eff = inst.chi - 0.4
    certified = max(0.0, f[0] * (2 - (1 + 2 ** (-6 * chi_eff)))) ** 2
    err = exact_average_error(inst, 2)
    pins["canonical_n6_d0.2_N2"] = {"a_exact": a_exact, "certified": certified, "avg_err_exact": err}

    # f0 along n at delta = 0.5.
    pins["canonical_d0.5_f0"] = {str(n): f_values(Instance(p, states, n, 0.5), 0)[0][0] for n in (4, 6, 8)}

    # Fixed n = 4, N = 2 code at delta = 0.3.
    inst = Instance(p, states, 4, 0.3)
    code = [(0, 1, 0, 0), (1, 1, 0, 1)]
    E1, E2 = sequential_elements_expanded(inst, code)
    rhos = [inst.rho(w) for w in code]
    conf = [[float(np.trace(E @ r).real) for r in rhos] for E in (np.eye(16) - E1 - E2, E1, E2)]
    pins["canonical_n4_d0.3_code"] = {
        "code": [list(w) for w in code],
        "E1": cmat(E1),
        "E2": cmat(E2),
        "confusion": conf,
        "sequential_error": 1 - (conf[1][0] + conf[2][1]) / 2,
        "pgm_error": pgm_error(inst, code),
        "avg_err_exact_N2": exact_average_error(inst, 2),
    }

    # Y on the diagonal x = y, high precision.
    mpmath.mp.dps = 50
    ys = {}
    for x, n in ((1.5, 10), (1.5, 50), (2 ** 0.4, 20)):
        X = mpmath.mpf(x)
        ys[f"{x}_{n}"] = float((X ** n - 1) * mpmath.log1p(X ** (-n)))
    pins["log_y_diagonal"] = ys
    return pins


def rate_sweep(num_codes=200, seed=1):
    """Random-code averages of the sequential error, canonical ensemble, delta = 0.1."""
    p, states = two_pure(math.pi / 4)
    out = {}
    rng = np.random.default_rng(seed)
    for n in (4, 6, 8):
        inst = Instance(p, states, n, 0.1)
        vecs = {}

        def cw(word):
            if word not in vecs:
                v = np.array([1.0 + 0j])
                for j in word:
                    v = np.kron(v, ket(0.0 if j == 0 else math.pi / 4))
                vecs[word] = v
            return vecs[word]

        for R in (0.2, 0.9):
            N = round(2 ** (n * R))
            errs = []
            for _ in range(num_codes):
                code = [tuple(int(x) for x in rng.integers(0, 2, n)) for _ in range(N)]
                succ = 0.0
                for u in range(N):
                    v = cw(code[u])
                    for i in range(u):
                        v = inst.P @ v
                        w = cw(code[i])
                        v = v - w * (w.conj() @ v)
                    v = inst.P @ v
                    w = cw(code[u])
                    succ += abs(w.conj() @ v) ** 2
                errs.append(1 - succ / N)
            out[f"n{n}_R{R}"] = {
                "N": N,
                "rank_P": inst.rank,
                "mean": float(np.mean(errs)),
                "stderr": float(np.std(errs, ddof=1) / math.sqrt(num_codes)),
            }
    return out


def main():
    pins = fast_pins()
    if "--rates" in sys.argv:
        pins["rate_sweep_d0.1"] = rate_sweep()
    path = Path(__file__).resolve().parent.parent / "fixtures" / "oracle_pins.json"
    path.write_text(json.dumps(pins, indent=1))
    for k, v in pins.items():
        if k != "canonical_n4_d0.3_code":
            print(k, v)
    code = pins["canonical_n4_d0.3_code"]
    for k in ("confusion", "sequential_error", "pgm_error", "avg_err_exact_N2"):
        print(k, code[k])


if __name__ == "__main__":
    main()
