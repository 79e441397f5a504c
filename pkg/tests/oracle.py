"""Independent high-precision reference model used to derive frozen test values.

Everything here is written directly from the physics with ``mpmath`` at 40
significant digits and shares no code with the package: states are plain
2x2 / 4x4 ``mpmath`` matrices, channels are explicit Kraus sums, the switch
is assembled block by block, and entropies come from ``mpmath.eighe``.
"""

import mpmath as mp

mp.mp.dps = 40


def mat(rows):
    return mp.matrix(rows)


def diag(*xs):
    m = mp.zeros(len(xs))
    for i, x in enumerate(xs):
        m[i, i] = mp.mpf(x)
    return m


def dagger(m):
    return m.transpose_conj()


def tr(m):
    return sum(m[i, i] for i in range(m.rows))


def energy(rho, eps=1):
    # H = -eps sigma_z
    return mp.re(-eps * (rho[0, 0] - rho[1, 1]))


def entropy(rho):
    herm = (rho + dagger(rho)) / 2
    vals = mp.eighe(herm, eigvals_only=True)
    return -sum(mp.re(v) * mp.log(mp.re(v)) for v in vals if mp.re(v) > mp.mpf(10) ** -35)


def binary_entropy(u):
    u = mp.mpf(u)
    return -sum(x * mp.log(x) for x in (u, 1 - u) if x > 0)


def relative_entropy(rho, sigma):
    """tr rho ln rho - tr rho ln sigma, via sigma's eigenbasis."""
    vals, vecs = mp.eighe((sigma + dagger(sigma)) / 2)
    cross = 0
    for i in range(sigma.rows):
        v = vecs[:, i]
        pop = mp.re((dagger(v) * rho * v)[0, 0])
        cross += pop * mp.log(mp.re(vals[i]))
    return -entropy(rho) - cross


def gibbs(beta_eps):
    t = mp.tanh(mp.mpf(beta_eps))
    return diag((1 + t) / 2, (1 - t) / 2)


def reset_kraus(target_excited, x):
    """Kraus set of a reset onto diag(1-x, x) (target_excited) or diag(x, 1-x)."""
    x = mp.mpf(x)
    s, c = mp.sqrt(x), mp.sqrt(1 - x)
    if target_excited:
        # meter A and channel D
        return [mat([[c, 0], [0, 0]]), mat([[0, c], [0, 0]]), mat([[0, 0], [0, s]]), mat([[0, 0], [-s, 0]])]
    # meter B and channel C
    return [mat([[0, 0], [0, c]]), mat([[0, 0], [c, 0]]), mat([[s, 0], [0, 0]]), mat([[0, -s], [0, 0]])]


def apply(kraus, rho):
    out = mp.zeros(rho.rows)
    for k in kraus:
        out += k * rho * dagger(k)
    return out


def switch_output(rho, a, b, theta):
    """Switch output as a 4x4 matrix, system slow index, controller fast index.

    Controller |0> applies A first then B; controller |1> applies B first.
    """
    A = reset_kraus(True, a)
    B = reset_kraus(False, b)
    c = [mp.cos(mp.mpf(theta) / 2), mp.sin(mp.mpf(theta) / 2)]
    # order[k] lists the Kraus products for controller state k
    order = [[Bi * Aj for Bi in B for Aj in A], [Aj * Bi for Bi in B for Aj in A]]
    out = mp.zeros(4)
    for k in range(2):
        for l in range(2):
            block = mp.zeros(2)
            for Kk, Kl in zip(order[k], order[l]):
                block += Kk * rho * dagger(Kl)
            for i in range(2):
                for j in range(2):
                    out[2 * i + k, 2 * j + l] += c[k] * c[l] * block[i, j]
    return out


def reduce_controller(m4):
    return mat([[m4[2 * i, 2 * j] + m4[2 * i + 1, 2 * j + 1] for j in range(2)] for i in range(2)])


def postselect(m4, sign):
    """(p, rho) for projecting the controller onto (|0> + sign |1>)/sqrt 2."""
    x = [1 / mp.sqrt(2), sign / mp.sqrt(2)]
    un = mat([[sum(x[k] * x[l] * m4[2 * i + k, 2 * j + l] for k in range(2) for l in range(2))
               for j in range(2)] for i in range(2)])
    p = mp.re(tr(un))
    return p, un / p


def definite_cycle(beta_eps, a, b):
    rho1 = gibbs(beta_eps)
    rho2 = apply(reset_kraus(True, a), rho1)
    rho3 = apply(reset_kraus(False, b), rho2)
    du2, du3, du1 = energy(rho2) - energy(rho1), energy(rho3) - energy(rho2), energy(rho1) - energy(rho3)
    return {"rho1": rho1, "rho2": rho2, "rho3": rho3, "du2": du2, "du3": du3, "du1": du1}


def ico_engine(beta_eps, a, theta, sign):
    rho1 = gibbs(beta_eps)
    p, rho2 = postselect(switch_output(rho1, a, a, theta), sign)
    w = mp.re(rho2[1, 1])
    rho3 = apply(reset_kraus(False, w), rho2)
    return {"p": p, "rho2": rho2, "w": w, "q_hot": energy(rho2) - energy(rho1),
            "work": energy(rho3) - energy(rho2), "q_cold": energy(rho1) - energy(rho3)}


def ico_refrigerator(beta_eps, a, theta, sign):
    rho1 = gibbs(beta_eps)
    d = rho1[0, 0]
    rho2 = apply(reset_kraus(True, d), rho1)
    p, rho3 = postselect(switch_output(rho2, a, a, theta), sign)
    return {"p": p, "work": energy(rho2) - energy(rho1), "q_hot": energy(rho3) - energy(rho2),
            "q_cold": energy(rho1) - energy(rho3)}


def incoherent(beta_eps, a, theta):
    rho1 = gibbs(beta_eps)
    rho2 = reduce_controller(switch_output(rho1, a, a, theta))
    w = mp.re(rho2[1, 1])
    rho3 = apply(reset_kraus(False, w), rho2)
    return {"rho2": rho2, "w": w, "q_hot": energy(rho2) - energy(rho1),
            "work": energy(rho3) - energy(rho2), "q_cold": energy(rho1) - energy(rho3)}

