"""Curvature and weighted-curvature algebra over a generic scalar ring.

Every function here manipulates nested lists of "scalars": anything
closed under +, -, *, / and multiplication by floats (ScalarField,
Series, Graded, or plain floats).  Differentiation is injected as a
list `derivs` of per-coordinate derivation callables, so the same code
serves the base chart (jet-backed fields), deformation series, and the
graded cone scalars.

Conventions (fixed so the unit round sphere has positive sectional
curvature and R_{abkl} = -2(g_{a[l} P_{k]b} + g_{b[k} P_{l]a}) holds on
conformally flat spaces with X_[ab] = (X_ab - X_ba)/2):

    Gamma^k_ij = g^{kl}(d_i g_jl + d_j g_il - d_l g_ij)/2
    R^i_jkl    = d_k Gamma^i_lj - d_l Gamma^i_kj
                 + Gamma^i_kp Gamma^p_lj - Gamma^i_lp Gamma^p_kj
    R_ijkl     = g_im R^m_jkl
    Ric_jl     = R^k_jkl            (contraction on slots 1 and 3)
"""

from __future__ import annotations

__all__ = [
    "matrix_inverse", "christoffel", "ricci", "riemann_lowered",
    "scalar_curvature", "gradient", "hessian", "laplacian", "grad_norm_sq",
    "bakry_emery_ricci", "f_curvature", "weighted_scalar",
    "schouten_tensor", "kulkarni_nomizu", "weighted_weyl", "weighted_cotton",
    "cov_deriv_sym2", "weighted_divergence_sym2", "weighted_divergence_rank3",
    "weighted_bach", "bianchi_residual", "phi_gradient", "phi_hessian",
    "weighted_ricci_coordinate_formula",
]


def _is_zero(x) -> bool:
    if isinstance(x, (int, float)):
        return x == 0.0
    return bool(getattr(x, "is_zero", False))


def acc_sum(terms, zero):
    """Sum skipping structural zeros; `zero` is returned for an empty sum."""
    acc = None
    for t in terms:
        if _is_zero(t):
            continue
        acc = t if acc is None else acc + t
    return zero if acc is None else acc


def _det(m, rows, cols, memo, zero):
    if len(rows) == 1:
        return m[rows[0]][cols[0]]
    key = (rows, cols)
    hit = memo.get(key)
    if hit is not None:
        return hit
    r = rows[0]
    terms = []
    for t, c in enumerate(cols):
        if _is_zero(m[r][c]):
            continue
        minor = _det(m, rows[1:], cols[:t] + cols[t + 1:], memo, zero)
        if _is_zero(minor):
            continue
        term = m[r][c] * minor
        terms.append(term if t % 2 == 0 else -term)
    return memo.setdefault(key, acc_sum(terms, zero))


def matrix_inverse(g, zero):
    """Cofactor inverse of a square matrix of ring elements; also returns det."""
    n = len(g)
    memo = {}
    all_idx = tuple(range(n))
    det = _det(g, all_idx, all_idx, memo, zero)
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        rows = all_idx[:i] + all_idx[i + 1:]
        for j in range(n):
            cols = all_idx[:j] + all_idx[j + 1:]
            if n == 1:
                cof = 1.0 if isinstance(zero, float) else zero + 1.0
            else:
                cof = _det(g, rows, cols, memo, zero)
            cof = cof if (i + j) % 2 == 0 else -cof
            inv[j][i] = cof / det
    return inv, det


def christoffel(g, ginv, derivs, zero):
    """Levi-Civita connection coefficients Gamma[k][i][j]."""
    n = len(g)
    dg = [[[derivs[k](g[i][j]) for k in range(n)] for j in range(n)] for i in range(n)]
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                terms = []
                for l in range(n):
                    if _is_zero(ginv[k][l]):
                        continue
                    inner = acc_sum([dg[j][l][i], dg[i][l][j], -dg[i][j][l]], zero)
                    if not _is_zero(inner):
                        terms.append(ginv[k][l] * inner)
                val = acc_sum(terms, zero) * 0.5
                gamma[k][i][j] = gamma[k][j][i] = val
    return gamma


def ricci(gamma, derivs, zero):
    """Ric[j][l] from the connection coefficients alone."""
    n = len(gamma)
    dgam = [[[[derivs[a](gamma[k][i][j]) for a in range(n)]
              for j in range(n)] for i in range(n)] for k in range(n)]
    ric = [[None] * n for _ in range(n)]
    for j in range(n):
        for l in range(j, n):
            terms = []
            for k in range(n):
                terms.append(dgam[k][l][j][k])
                terms.append(-dgam[k][k][j][l])
                for p in range(n):
                    if not (_is_zero(gamma[k][k][p]) or _is_zero(gamma[p][l][j])):
                        terms.append(gamma[k][k][p] * gamma[p][l][j])
                    if not (_is_zero(gamma[k][l][p]) or _is_zero(gamma[p][k][j])):
                        terms.append(-(gamma[k][l][p] * gamma[p][k][j]))
            ric[j][l] = ric[l][j] = acc_sum(terms, zero)
    return ric


def riemann_lowered(g, gamma, derivs, zero):
    """Fully lowered curvature R[i][j][k][l]."""
    n = len(g)
    dgam = [[[[derivs[a](gamma[m][i][j]) for a in range(n)]
              for j in range(n)] for i in range(n)] for m in range(n)]
    rm_up = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for m in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    terms = [dgam[m][l][j][k], -dgam[m][k][j][l]]
                    for p in range(n):
                        if not (_is_zero(gamma[m][k][p]) or _is_zero(gamma[p][l][j])):
                            terms.append(gamma[m][k][p] * gamma[p][l][j])
                        if not (_is_zero(gamma[m][l][p]) or _is_zero(gamma[p][k][j])):
                            terms.append(-(gamma[m][l][p] * gamma[p][k][j]))
                    rm_up[m][j][k][l] = acc_sum(terms, zero)
    rm = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    rm[i][j][k][l] = acc_sum(
                        [g[i][m] * rm_up[m][j][k][l] for m in range(n)
                         if not (_is_zero(g[i][m]) or _is_zero(rm_up[m][j][k][l]))],
                        zero)
    return rm


def scalar_curvature(ginv, ric, zero):
    n = len(ginv)
    return acc_sum([ginv[i][j] * ric[i][j] for i in range(n) for j in range(n)
                    if not (_is_zero(ginv[i][j]) or _is_zero(ric[i][j]))], zero)


def gradient(f, derivs):
    return [d(f) for d in derivs]


def hessian(f, gamma, derivs, zero):
    n = len(gamma)
    df = gradient(f, derivs)
    h = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            terms = [derivs[i](df[j])]
            for k in range(n):
                if not (_is_zero(gamma[k][i][j]) or _is_zero(df[k])):
                    terms.append(-(gamma[k][i][j] * df[k]))
            h[i][j] = h[j][i] = acc_sum(terms, zero)
    return h


def laplacian(ginv, hess, zero):
    return scalar_curvature(ginv, hess, zero)


def grad_norm_sq(ginv, df, zero):
    n = len(ginv)
    return acc_sum([ginv[i][j] * (df[i] * df[j]) for i in range(n) for j in range(n)
                    if not (_is_zero(ginv[i][j]) or _is_zero(df[i]) or _is_zero(df[j]))],
                   zero)


# -- weighted invariants ------------------------------------------------------


def bakry_emery_ricci(ric, hess_f, f, m, zero):
    """Ric - (m/f) Hess f; the m = 0 correction drops structurally."""
    n = len(ric)
    if m == 0.0:
        return [row[:] for row in ric]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if _is_zero(hess_f[i][j]):
                out[i][j] = ric[i][j]
            else:
                out[i][j] = ric[i][j] - (hess_f[i][j] * float(m)) / f
    return out


def f_curvature(f, lap_f, gn2_f, m, mu, zero):
    """f Lap f + (m-1)(|grad f|^2 - mu)."""
    return acc_sum([f * lap_f, (gn2_f - mu) * (float(m) - 1.0)], zero)


def weighted_scalar(scal, f, lap_f, gn2_f, m, mu, zero):
    """R - (2m/f) Lap f - m(m-1)/f^2 (|grad f|^2 - mu)."""
    terms = [scal]
    if m != 0.0 and not _is_zero(lap_f):
        terms.append(-((lap_f * (2.0 * float(m))) / f))
    if m != 0.0 and m != 1.0:
        terms.append(-(((gn2_f - mu) * (float(m) * (float(m) - 1.0))) / (f * f)))
    return acc_sum(terms, zero)


def schouten_tensor(ric_phi, scal_phi, g, ginv, d, m, zero):
    """Returns (P, J, trace of P, Y) with the d+m-shifted normalizations."""
    dm = d + float(m)
    if abs(dm - 2.0) < 1e-12 or abs(dm - 1.0) < 1e-12:
        raise ZeroDivisionError(f"Schouten normalization degenerate at d+m={dm}")
    J = scal_phi * (1.0 / (2.0 * (dm - 1.0)))
    P = [[(ric_phi[i][j] - g[i][j] * J) * (1.0 / (dm - 2.0)) for j in range(d)]
         for i in range(d)]
    trP = scalar_curvature(ginv, P, zero)
    Y = J - trP
    return P, J, trP, Y


def kulkarni_nomizu(h, k, zero):
    """(h ^ k)_xyzw = h_xz k_yw + h_yw k_xz - h_xw k_yz - h_yz k_xw."""
    n = len(h)

    def prod(a, b):
        return zero if (_is_zero(a) or _is_zero(b)) else a * b

    out = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for x in range(n):
        for y in range(n):
            for z in range(n):
                for w in range(n):
                    out[x][y][z][w] = acc_sum(
                        [prod(h[x][z], k[y][w]), prod(h[y][w], k[x][z]),
                         -prod(h[x][w], k[y][z]), -prod(h[y][z], k[x][w])], zero)
    return out


def weighted_weyl(rm, P, g, zero):
    n = len(g)
    png = kulkarni_nomizu(P, g, zero)
    return [[[[rm[i][j][k][l] - png[i][j][k][l] for l in range(n)]
              for k in range(n)] for j in range(n)] for i in range(n)]


def cov_deriv_sym2(T, gamma, derivs, zero):
    """nabla_k T_ij as out[k][i][j]."""
    n = len(gamma)
    out = [[[None] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                terms = [derivs[k](T[i][j])]
                for p in range(n):
                    if not (_is_zero(gamma[p][k][i]) or _is_zero(T[p][j])):
                        terms.append(-(gamma[p][k][i] * T[p][j]))
                    if not (_is_zero(gamma[p][k][j]) or _is_zero(T[i][p])):
                        terms.append(-(gamma[p][k][j] * T[i][p]))
                out[k][i][j] = acc_sum(terms, zero)
    return out


def weighted_cotton(P, gamma, derivs, zero):
    """dP[i][j][k] = nabla_i P_jk - nabla_j P_ik."""
    n = len(gamma)
    dP_cov = cov_deriv_sym2(P, gamma, derivs, zero)
    return [[[dP_cov[i][j][k] - dP_cov[j][i][k] for k in range(n)]
             for j in range(n)] for i in range(n)]


def phi_gradient(f, derivs, m):
    """d(phi) = -m df/f for phi = -m log f, without forming the log."""
    return [-(d(f) * float(m)) / f for d in derivs]


def phi_hessian(f, gamma, derivs, m, zero):
    """Hess(phi) = -m (Hess f / f - df x df / f^2)."""
    n = len(gamma)
    hf = hessian(f, gamma, derivs, zero)
    df = gradient(f, derivs)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = acc_sum(
                [-(hf[i][j] * float(m)) / f,
                 ((df[i] * df[j]) * float(m)) / (f * f)], zero)
    return out


def weighted_divergence_sym2(T, ginv, dphi, gamma, derivs, zero):
    """(delta_phi T)_j = g^{ik}(nabla_i T_kj - phi_i T_kj)."""
    n = len(ginv)
    covT = cov_deriv_sym2(T, gamma, derivs, zero)
    out = []
    for j in range(n):
        terms = []
        for i in range(n):
            for k in range(n):
                if _is_zero(ginv[i][k]):
                    continue
                terms.append(ginv[i][k] * covT[i][k][j])
                if not (_is_zero(dphi[i]) or _is_zero(T[k][j])):
                    terms.append(-(ginv[i][k] * (dphi[i] * T[k][j])))
        out.append(acc_sum(terms, zero))
    return out


def weighted_divergence_rank3(T, ginv, dphi, gamma, derivs, zero):
    """(delta_phi T)_{jk} = g^{ab}(nabla_a T_{bjk} - phi_a T_{bjk})."""
    n = len(ginv)
    covT = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for j in range(n):
                for k in range(n):
                    terms = [derivs[a](T[b][j][k])]
                    for p in range(n):
                        for (slot, tpjk) in ((b, (p, j, k)), (j, (b, p, k)),
                                             (k, (b, j, p))):
                            gam = gamma[p][a][slot]
                            tv = T[tpjk[0]][tpjk[1]][tpjk[2]]
                            if not (_is_zero(gam) or _is_zero(tv)):
                                terms.append(-(gam * tv))
                    covT[a][b][j][k] = acc_sum(terms, zero)
    out = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(n):
            terms = []
            for a in range(n):
                for b in range(n):
                    if _is_zero(ginv[a][b]):
                        continue
                    terms.append(ginv[a][b] * covT[a][b][j][k])
                    if not (_is_zero(dphi[a]) or _is_zero(T[b][j][k])):
                        terms.append(-(ginv[a][b] * (dphi[a] * T[b][j][k])))
            out[j][k] = acc_sum(terms, zero)
    return out


def weighted_bach(A, P, g, ginv, dP, dphi, Y, gamma, derivs, m, zero):
    """delta_phi dP - (1/m) tr dP x dphi + <A, P - (Y/m) g>."""
    if m == 0.0:
        raise ZeroDivisionError("the weighted Bach tensor divides by m; m must be positive")
    n = len(g)
    div_dP = weighted_divergence_rank3(dP, ginv, dphi, gamma, derivs, zero)
    # (tr dP)_x = g^{ik} dP_{ixk}
    tr_dP = [acc_sum([ginv[i][k] * dP[i][x][k] for i in range(n) for k in range(n)
                      if not (_is_zero(ginv[i][k]) or _is_zero(dP[i][x][k]))], zero)
             for x in range(n)]
    S = [[P[i][j] - (g[i][j] * Y) * (1.0 / float(m)) for j in range(n)]
         for i in range(n)]
    Sup = [[acc_sum([ginv[i][a] * (ginv[j][b] * S[a][b])
                     for a in range(n) for b in range(n)
                     if not (_is_zero(ginv[i][a]) or _is_zero(ginv[j][b])
                             or _is_zero(S[a][b]))], zero)
            for j in range(n)] for i in range(n)]
    out = [[None] * n for _ in range(n)]
    for j in range(n):
        for l in range(n):
            terms = [div_dP[j][l]]
            if not (_is_zero(tr_dP[j]) or _is_zero(dphi[l])):
                terms.append(-((tr_dP[j] * dphi[l]) * (1.0 / float(m))))
            for a in range(n):
                for c in range(n):
                    if not (_is_zero(A[a][j][c][l]) or _is_zero(Sup[a][c])):
                        terms.append(A[a][j][c][l] * Sup[a][c])
            out[j][l] = acc_sum(terms, zero)
    return out


def bianchi_residual(ric_phi, scal_phi, F_phi, f, ginv, dphi, gamma, derivs, zero):
    """delta_phi Ric_phi - d(R_phi)/2 - F_phi dphi / f^2, a 1-form."""
    n = len(ginv)
    div_ric = weighted_divergence_sym2(ric_phi, ginv, dphi, gamma, derivs, zero)
    out = []
    for j in range(n):
        terms = [div_ric[j], -(derivs[j](scal_phi) * 0.5)]
        if not (_is_zero(F_phi) or _is_zero(dphi[j])):
            terms.append(-((F_phi * dphi[j]) / (f * f)))
        out.append(acc_sum(terms, zero))
    return out


def weighted_ricci_coordinate_formula(g, ginv, f, m, mu, derivs, zero):
    """The second-derivative coordinate expression for the weighted Ricci
    tensor and its companion scalar, used as an independent route:

        Ric_IJ = (1/2) g^{KL}(d2_{IL} g_{JK} + d2_{JK} g_{IL}
                              - d2_{KL} g_{IJ} - d2_{IJ} g_{KL})
                 + g^{KL} g^{PQ}(G_{ILP} G_{JKQ} - G_{IJP} G_{KLQ})
                 - (m/f)(d2_{IJ} f - Gamma^K_{IJ} d_K f)

    with G the first-kind connection symbols, plus

        F = f Lap f + (m-1)(|grad f|^2 - mu).
    """
    n = len(g)
    dg = [[[derivs[k](g[i][j]) for k in range(n)] for j in range(n)]
          for i in range(n)]
    d2g = [[[[derivs[l](dg[i][j][k]) for l in range(n)] for k in range(n)]
            for j in range(n)] for i in range(n)]
    gamma1 = [[[acc_sum([dg[j][p][i], dg[i][p][j], -dg[i][j][p]], zero) * 0.5
                for p in range(n)] for j in range(n)] for i in range(n)]
    df = gradient(f, derivs)
    d2f = [[derivs[j](df[i]) for j in range(n)] for i in range(n)]

    def _hess_entry(i, j):
        terms = [d2f[i][j]]
        for kk in range(n):
            for ll in range(n):
                if (_is_zero(ginv[kk][ll]) or _is_zero(gamma1[i][j][ll])
                        or _is_zero(df[kk])):
                    continue
                terms.append(-(ginv[kk][ll] * (gamma1[i][j][ll] * df[kk])))
        return acc_sum(terms, zero)

    hess = [[_hess_entry(i, j) for j in range(n)] for i in range(n)]
    ric = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            terms = []
            for kk in range(n):
                for ll in range(n):
                    if _is_zero(ginv[kk][ll]):
                        continue
                    inner = acc_sum([d2g[j][kk][i][ll], d2g[i][ll][j][kk],
                                     -d2g[i][j][kk][ll], -d2g[kk][ll][i][j]], zero)
                    if not _is_zero(inner):
                        terms.append((ginv[kk][ll] * inner) * 0.5)
                    for p in range(n):
                        for q in range(n):
                            if _is_zero(ginv[p][q]):
                                continue
                            gg = ginv[kk][ll] * ginv[p][q]
                            if not (_is_zero(gamma1[i][ll][p]) or _is_zero(gamma1[j][kk][q])):
                                terms.append(gg * (gamma1[i][ll][p] * gamma1[j][kk][q]))
                            if not (_is_zero(gamma1[i][j][p]) or _is_zero(gamma1[kk][ll][q])):
                                terms.append(-(gg * (gamma1[i][j][p] * gamma1[kk][ll][q])))
            if m != 0.0:
                hf = hess[i][j]
                if not _is_zero(hf):
                    terms.append(-((hf * float(m)) / f))
            ric[i][j] = ric[j][i] = acc_sum(terms, zero)

    lap = acc_sum([ginv[i][j] * hess[i][j] for i in range(n) for j in range(n)
                   if not (_is_zero(ginv[i][j]) or _is_zero(hess[i][j]))], zero)
    gn2 = grad_norm_sq(ginv, df, zero)
    F = f_curvature(f, lap, gn2, m, mu, zero)
    return ric, F
