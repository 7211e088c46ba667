"""Scenario generation, error injection, correction dispatch, verification
and benchmarking for the CLI.

All randomness flows from a single seed per scenario, so generated and
corrupted instances are bit-reproducible.
"""

import os
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import ff
from .blackbox import BlackboxRHS
from .croutec import (crout_ec, crout_reference, make_grp_instance,
                      rank_deficient_ec, rect_ec)
from .mat import Mat, PackedLU, Tri, multiply
from .matio import read_matrix, write_matrix
from .syssolve import (LargeRhsBundle, SmallRhsBundle, solve_large_rhs,
                       solve_small_rhs, tr_inv_ec)
from .trsmec import TrsmEcParams, trsm_ec_upper_right

WORKLOADS = ("lu", "rect", "rankdef", "solve-small", "solve-large",
             "trinv", "trsm")


@dataclass
class Scenario:
    p: int
    nu: int = 1
    n: int = 8
    m: int = None
    rank: int = None
    errors: int = 1
    eps: float = 0.05
    seed: int = 0
    workload: str = "lu"

    def field(self):
        if self.nu == 1:
            return ff.make_prime_field(self.p)
        return ff.make_ext_field(self.p, self.nu)

    def to_lines(self):
        vals = [("p", self.p), ("nu", self.nu), ("n", self.n),
                ("m", self.m), ("rank", self.rank), ("errors", self.errors),
                ("eps", self.eps), ("seed", self.seed),
                ("workload", self.workload)]
        return ["%s=%s" % (k, v) for k, v in vals if v is not None]

    @classmethod
    def from_file(cls, path):
        kw = {}
        with open(path) as fh:
            for line in fh:
                if "=" not in line:
                    continue
                k, v = line.strip().split("=", 1)
                if k == "workload":
                    kw[k] = v
                elif k == "eps":
                    kw[k] = float(v)
                else:
                    kw[k] = int(v)
        return cls(**kw)


def inject_errors(rng, ctx, mats_regions, k):
    """Corrupt matrices in place: k distinct positions over the union of the
    given legal regions, each shifted by a uniform nonzero delta.

    mats_regions: list of (ndarray, (rows, cols)) index-array pairs.
    Returns the list of (mat_index, row, col) actually corrupted.
    """
    lens = [len(r[1][0]) for r in mats_regions]
    total = sum(lens)
    if k > total:
        raise ValueError("cannot place %d errors in %d legal positions"
                         % (k, total))
    chosen = rng.choice(total, size=k, replace=False)
    out = []
    offsets = np.cumsum([0] + lens)
    for pos in sorted(int(c) for c in chosen):
        mi = int(np.searchsorted(offsets, pos, side="right")) - 1
        a, (rows, cols) = mats_regions[mi]
        r, c = int(rows[pos - offsets[mi]]), int(cols[pos - offsets[mi]])
        delta = int(ctx.rand_nonzero(rng))
        a[r, c] = ctx.sadd(int(a[r, c]), delta)
        out.append((mi, r, c))
    return out


def _strict_lower(m, n):
    return np.tril_indices(m, -1, n)


def _upper_incl(m, n):
    return np.triu_indices(m, 0, n)


def _full(m, n):
    idx = np.indices((m, n))
    return idx[0].ravel(), idx[1].ravel()


def gen(scenario, outdir):
    """Write ground-truth and corrupted inputs for a scenario."""
    os.makedirs(outdir, exist_ok=True)
    ctx = scenario.field()
    rng = np.random.default_rng(scenario.seed)
    n = scenario.n
    m = scenario.m if scenario.m is not None else n
    w = scenario.workload
    files = {}

    def put(name, M, sparse=None):
        path = os.path.join(outdir, name + ".mat")
        write_matrix(path, M, sparse=sparse)
        files[name] = path

    if w == "lu":
        A, L, U = make_grp_instance(ctx, n, rng)
        La, Ua = L.copy(), U.copy()
        inject_errors(rng, ctx, [(La.a, _strict_lower(n, n)),
                                 (Ua.a, _upper_incl(n, n))], scenario.errors)
        put("A", A)
        put("L_true", L)
        put("U_true", U)
        put("L_approx", La)
        put("U_approx", Ua)
    elif w == "rect":
        if m >= n:
            raise ValueError("rect workload needs m < n")
        A, L, U = make_grp_instance(ctx, (m, n), rng)
        La, Ua = L.copy(), U.copy()
        inject_errors(rng, ctx, [(La.a, _strict_lower(m, m)),
                                 (Ua.a, _upper_incl(m, n))], scenario.errors)
        put("A", A)
        put("L_true", L)
        put("U_true", U)
        put("L_approx", La)
        put("U_approx", Ua)
    elif w == "rankdef":
        r = scenario.rank if scenario.rank is not None else max(1, min(m, n) // 2)
        A, L, U = make_grp_instance(ctx, (m, n), rng, rank=r)
        La, Ua = L.copy(), U.copy()
        lr = _strict_lower(m, r)
        ur = np.triu_indices(r, 0, n)
        inject_errors(rng, ctx, [(La.a, lr), (Ua.a, ur)], scenario.errors)
        put("A", A)
        put("L_true", L)
        put("U_true", U)
        put("L_approx", La)
        put("U_approx", Ua)
    elif w in ("solve-small", "solve-large"):
        A, L, U = make_grp_instance(ctx, n, rng)
        B = Mat.random(ctx, m, n, rng)
        Y = B.copy()
        Tri(U, "upper").solve_right(Y)
        X = Y.copy()
        Tri(L, "lower", unit=True).solve_right(X)
        La, Ua, Xa = L.copy(), U.copy(), X.copy()
        regions = [(La.a, _strict_lower(n, n)), (Ua.a, _upper_incl(n, n)),
                   (Xa.a, _full(m, n))]
        extra = {}
        if w == "solve-small":
            Ya = Y.copy()
            regions.append((Ya.a, _full(m, n)))
            extra["Y_true"], extra["Y_approx"] = Y, Ya
        else:
            R = Mat.identity(ctx, n)
            Tri(U, "upper").solve_right(R)  # R = U^{-1}
            Ra = R.copy()
            regions.append((Ra.a, _full(n, n)))
            extra["R_true"], extra["R_approx"] = R, Ra
        inject_errors(rng, ctx, regions, scenario.errors)
        put("A", A)
        put("B", B)
        put("L_true", L)
        put("U_true", U)
        put("X_true", X)
        put("L_approx", La)
        put("U_approx", Ua)
        put("X_approx", Xa)
        for name, M in extra.items():
            put(name, M)
    elif w == "trinv":
        U = Mat(ctx, np.triu(ctx.rand(rng, (n, n))))
        U.a[np.arange(n), np.arange(n)] = ctx.rand_nonzero(rng, (n,))
        R = Mat.identity(ctx, n)
        Tri(U, "upper").solve_left(R)  # R = U^{-1}
        Ra = R.copy()
        inject_errors(rng, ctx, [(Ra.a, _upper_incl(n, n))], scenario.errors)
        put("U", U)
        put("R_true", R)
        put("R_approx", Ra)
    elif w == "trsm":
        U = Mat(ctx, np.triu(ctx.rand(rng, (n, n))))
        U.a[np.arange(n), np.arange(n)] = ctx.rand_nonzero(rng, (n,))
        R = Mat.random(ctx, m, n, rng)
        C = multiply(R, U)
        Ra = R.copy()
        inject_errors(rng, ctx, [(Ra.a, _full(m, n))], scenario.errors)
        put("U", U)
        put("C", C)
        put("R_true", R)
        put("R_approx", Ra)
    else:
        raise ValueError("unknown workload %r" % w)

    with open(os.path.join(outdir, "scenario.txt"), "w") as fh:
        fh.write("\n".join(scenario.to_lines()) + "\n")
    return files


def correct(workdir, eps=None, seed=None, verify_after=True):
    """Run the correction for a generated scenario directory.

    Writes ``*_corrected.mat`` files plus ``report.txt``; returns
    (report, verified) where verified is the deterministic post-check
    (None when verify_after is off).
    """
    sc = Scenario.from_file(os.path.join(workdir, "scenario.txt"))
    eps = sc.eps if eps is None else eps
    seed = sc.seed + 1 if seed is None else seed
    params = TrsmEcParams(eps, seed=seed, rng=np.random.default_rng(seed))

    def rd(name):
        return read_matrix(os.path.join(workdir, name + ".mat"))

    def wr(name, M):
        write_matrix(os.path.join(workdir, name + "_corrected.mat"), M)

    w = sc.workload
    t0 = time.perf_counter()
    if w == "lu":
        A = rd("A")
        packed = PackedLU.pack(rd("L_approx"), rd("U_approx"))
        _, rep = crout_ec(packed, A, params)
        wr("L", packed.extract_L())
        wr("U", packed.extract_U())
        verified = _verify_lu(A, packed.extract_L(), packed.extract_U()) \
            if verify_after else None
    elif w == "rect":
        A = rd("A")
        La, Ua = rd("L_approx"), rd("U_approx")
        mm = La.rows
        packed = PackedLU.pack(La, Ua.view(0, 0, mm, mm))
        U2 = Ua.view(0, mm, mm, A.cols - mm).copy()
        _, _, rep = rect_ec(A, packed, U2, params)
        L = packed.extract_L()
        U = Mat(A.ctx, np.hstack([packed.extract_U().a, U2.a]))
        wr("L", L)
        wr("U", U)
        verified = _verify_lu(A, L, U) if verify_after else None
    elif w == "rankdef":
        A = rd("A")
        r, L, U, rep = rank_deficient_ec(A, rd("L_approx"), rd("U_approx"),
                                         params)
        wr("L", L)
        wr("U", U)
        verified = _verify_lu(A, L, U) if verify_after else None
    elif w == "solve-small":
        A, B = rd("A"), rd("B")
        bundle = SmallRhsBundle(A, B,
                                PackedLU.pack(rd("L_approx"), rd("U_approx")),
                                rd("Y_approx"), rd("X_approx"), eps)
        X, rep = solve_small_rhs(bundle, params)
        wr("X", X)
        verified = multiply(X, A) == B if verify_after else None
    elif w == "solve-large":
        A, B = rd("A"), rd("B")
        bundle = LargeRhsBundle(A, B,
                                PackedLU.pack(rd("L_approx"), rd("U_approx")),
                                rd("R_approx"), rd("X_approx"), eps)
        X, rep = solve_large_rhs(bundle, params)
        wr("X", X)
        verified = multiply(X, A) == B if verify_after else None
    elif w == "trinv":
        U, R = rd("U"), rd("R_approx")
        rep = tr_inv_ec(R, Tri(U, "upper"), params)
        wr("R", R)
        verified = multiply(R, U) == Mat.identity(U.ctx, U.rows) \
            if verify_after else None
    elif w == "trsm":
        U, C, R = rd("U"), rd("C"), rd("R_approx")
        rep = trsm_ec_upper_right(R, BlackboxRHS(C=C), Tri(U, "upper"),
                                  params)
        wr("R", R)
        verified = multiply(R, U) == C if verify_after else None
    else:
        raise ValueError("unknown workload %r" % w)

    rep.wall_time = time.perf_counter() - t0
    rep.seed = seed
    rep.dense_verified = verified
    with open(os.path.join(workdir, "report.txt"), "w") as fh:
        fh.write(rep.serialize())
    return rep, verified


def _verify_lu(A, L, U):
    return multiply(L, U) == A


def verify(workdir, use_corrected=True):
    """Deterministic exact check of the workload identity. Pure, no RNG."""
    sc = Scenario.from_file(os.path.join(workdir, "scenario.txt"))

    def rd(name, fallback=None):
        corrected = os.path.join(workdir, name + "_corrected.mat")
        if use_corrected and os.path.exists(corrected):
            return read_matrix(corrected)
        return read_matrix(os.path.join(workdir, (fallback or name) + ".mat"))

    w = sc.workload
    if w in ("lu", "rect", "rankdef"):
        A = rd("A")
        return _verify_lu(A, rd("L", "L_approx"), rd("U", "U_approx"))
    if w in ("solve-small", "solve-large"):
        A, B = rd("A"), rd("B")
        return multiply(rd("X", "X_approx"), A) == B
    if w == "trinv":
        U = rd("U")
        return multiply(rd("R", "R_approx"), U) == Mat.identity(U.ctx, U.rows)
    if w == "trsm":
        return multiply(rd("R", "R_approx"), rd("U")) == rd("C")
    raise ValueError("unknown workload %r" % w)


def bench_lu(ctx, n, ks, eps=0.05, reps=5, seed=0):
    """Median correction times and field-op counts over an error-count grid.

    Returns a list of CSV rows (header first): one row per k plus one row
    for the plain reference factorization.
    """
    rows = ["workload,n,k,median_time,median_field_ops,median_rounds"]
    rng = np.random.default_rng(seed)
    A, L, U = make_grp_instance(ctx, n, rng)

    times = []
    ops = []
    for _ in range(reps):
        ff.reset_op_count()
        t0 = time.perf_counter()
        crout_reference(A)
        times.append(time.perf_counter() - t0)
        ops.append(ff.op_count())
    rows.append("reference,%d,,%.6f,%d," % (n, statistics.median(times),
                                            int(statistics.median(ops))))

    for k in ks:
        times = []
        ops = []
        rounds = []
        for rep_i in range(reps):
            La, Ua = L.copy(), U.copy()
            if k:
                inject_errors(rng, ctx, [(La.a, _strict_lower(n, n)),
                                         (Ua.a, _upper_incl(n, n))], k)
            packed = PackedLU.pack(La, Ua)
            params = TrsmEcParams(eps, rng=rng)
            ff.reset_op_count()
            t0 = time.perf_counter()
            _, rep = crout_ec(packed, A, params)
            times.append(time.perf_counter() - t0)
            ops.append(ff.op_count())
            rounds.append(rep.max_rounds())
        rows.append("croutec,%d,%d,%.6f,%d,%d"
                    % (n, k, statistics.median(times),
                       int(statistics.median(ops)),
                       int(statistics.median(rounds))))
    return rows
