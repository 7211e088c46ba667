"""Finite field contexts.

Two kinds of field are supported:

 - PrimeField: GF(p) with p prime, elements stored as int64 residues in [0, p).
 - ExtField: GF(p^nu), elements stored as packed base-p digit codes in
   [0, p^nu); code sum_i c_i * p^i stands for the polynomial sum_i c_i * x^i.

All elementwise operations are vectorized over numpy int64 arrays of codes
(plain Python ints work too).  Contexts are immutable after construction and
safe to share across threads.
"""

import math

import numpy as np

_INT64_MAX = (1 << 63) - 1

# global field-operation counter, used by the benchmark harness
_OPS = 0


def op_count():
    return _OPS


def reset_op_count():
    global _OPS
    _OPS = 0


def _bump(n):
    global _OPS
    _OPS += int(n)


def _sz(a):
    return a.size if isinstance(a, np.ndarray) else 1


def is_prime(n):
    """Deterministic Miller-Rabin, valid for all 64-bit n."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldError(ValueError):
    pass


class FieldCtx:
    """Common interface for prime and extension fields.

    Attributes:
        p: characteristic (prime)
        nu: extension degree (1 for prime fields)
        q: cardinality p**nu
        modulus: coefficient list of the irreducible modulus (None when nu=1)
    """

    p = None
    nu = None
    q = None
    modulus = None

    @property
    def is_prime_field(self):
        return self.nu == 1

    def rand(self, rng, shape=None):
        """Uniform sample over all q elements (zero included)."""
        out = rng.integers(0, self.q, size=shape, dtype=np.int64)
        _bump(_sz(out))
        return out

    def rand_nonzero(self, rng, shape=None):
        out = rng.integers(1, self.q, size=shape, dtype=np.int64)
        _bump(_sz(out))
        return out

    def zeros(self, shape):
        return np.zeros(shape, dtype=np.int64)

    def eye(self, n):
        return np.eye(n, dtype=np.int64)

    def __eq__(self, other):
        return (isinstance(other, FieldCtx)
                and self.p == other.p and self.nu == other.nu)

    def __hash__(self):
        return hash((self.p, self.nu))


class PrimeField(FieldCtx):

    def __init__(self, p):
        if p >= (1 << 62):
            raise FieldError("characteristic %d too large (must be < 2^62)" % p)
        if not is_prime(p):
            raise FieldError("%d is not prime" % p)
        self.p = int(p)
        self.nu = 1
        self.q = int(p)
        self.modulus = None
        # products of two residues overflow int64 once p >= 2^31; fall back
        # to object (bignum) arithmetic in that regime
        self._big = (p - 1) ** 2 > _INT64_MAX
        self._acc_limit = 1 if self._big else _INT64_MAX // max(1, (p - 1) ** 2)

    def __repr__(self):
        return "GF(%d)" % self.p

    def add(self, a, b):
        _bump(_sz(a))
        return (a + b) % self.p

    def sub(self, a, b):
        _bump(_sz(a))
        return (a - b) % self.p

    def neg(self, a):
        _bump(_sz(a))
        return (-a) % self.p

    def mul(self, a, b):
        _bump(max(_sz(a), _sz(b)))
        if self._big:
            r = (np.asarray(a, dtype=object) * np.asarray(b, dtype=object)) % self.p
            return r.astype(np.int64) if isinstance(r, np.ndarray) else int(r)
        return (a * b) % self.p

    def sinv(self, a):
        a = int(a) % self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero in %r" % self)
        _bump(1)
        return pow(a, self.p - 2, self.p)

    def inv_vec(self, a):
        flat_in = np.ascontiguousarray(a).ravel()
        out = np.empty(flat_in.size, dtype=np.int64)
        for i in range(flat_in.size):
            out[i] = self.sinv(int(flat_in[i]))
        return out.reshape(np.shape(a))

    def spow(self, a, e):
        _bump(1)
        return pow(int(a), int(e), self.p)

    # scalar aliases (same code path as the vector ops for prime fields)
    smul = mul
    sadd = add
    ssub = sub
    sneg = neg

    def matmul(self, A, B):
        m, ell = A.shape
        n = B.shape[1]
        _bump(m * ell * n)
        if ell == 0:
            return np.zeros((m, n), dtype=np.int64)
        if self._big:
            C = (A.astype(object) @ B.astype(object)) % self.p
            return C.astype(np.int64)
        # keep accumulated sums inside int64
        limit = self._acc_limit
        if ell <= limit:
            return (A @ B) % self.p
        acc = np.zeros((m, n), dtype=np.int64)
        for i in range(0, ell, limit):
            acc = (acc + A[:, i:i + limit] @ B[i:i + limit, :]) % self.p
        return acc

    def dot(self, a, b):
        return int(self.matmul(a.reshape(1, -1), b.reshape(-1, 1))[0, 0])

    def embed_array(self, a):
        return a

    def coerce_array(self, a, base):
        return a


class ExtField(FieldCtx):
    """GF(p^nu) via packed digit codes plus log/antilog tables.

    Addition is digit-wise mod p on the packed codes; multiplication goes
    through discrete-log tables over a fixed primitive element, so q is kept
    at desk scale (q <= 2^20 enforced).
    """

    def __init__(self, p, nu, modulus=None):
        if not is_prime(p):
            raise FieldError("%d is not prime" % p)
        if nu < 2:
            raise FieldError("extension degree must be >= 2")
        q = p ** nu
        if q > (1 << 20):
            raise FieldError("extension field too large: %d^%d" % (p, nu))
        self.p = int(p)
        self.nu = int(nu)
        self.q = int(q)
        if modulus is None:
            modulus = _find_irreducible(p, nu)
        self.modulus = tuple(int(c) % p for c in modulus)
        if len(self.modulus) != nu + 1 or self.modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree %d" % nu)
        self._pw = np.array([p ** i for i in range(nu)], dtype=np.int64)
        self._build_log_tables()

    def __repr__(self):
        return "GF(%d^%d)" % (self.p, self.nu)

    # -- code <-> coefficient vector --------------------------------------

    def code(self, coeffs):
        c = 0
        for i, v in enumerate(coeffs):
            c += (int(v) % self.p) * self.p ** i
        return c

    def coeffs(self, code):
        code = int(code)
        out = []
        for _ in range(self.nu):
            out.append(code % self.p)
            code //= self.p
        return out

    def _digits(self, a):
        # shape (..., nu) digit view of packed codes
        return (np.asarray(a, dtype=np.int64)[..., None] // self._pw) % self.p

    def _pack(self, d):
        return (d * self._pw).sum(axis=-1)

    # -- arithmetic --------------------------------------------------------

    def add(self, a, b):
        _bump(max(_sz(a), _sz(b)))
        s = (self._digits(a) + self._digits(b)) % self.p
        r = self._pack(s)
        return r if isinstance(r, np.ndarray) and r.ndim else int(r)

    def sub(self, a, b):
        _bump(max(_sz(a), _sz(b)))
        s = (self._digits(a) - self._digits(b)) % self.p
        r = self._pack(s)
        return r if isinstance(r, np.ndarray) and r.ndim else int(r)

    def neg(self, a):
        _bump(_sz(a))
        r = self._pack((-self._digits(a)) % self.p)
        return r if isinstance(r, np.ndarray) and r.ndim else int(r)

    def mul(self, a, b):
        _bump(max(_sz(a), _sz(b)))
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la = self._log[a]
        lb = self._log[b]
        zero = (la < 0) | (lb < 0)
        prod = self._exp[(np.maximum(la, 0) + np.maximum(lb, 0)) % (self.q - 1)]
        r = np.where(zero, 0, prod)
        return r if r.ndim else int(r)

    def sadd(self, a, b):
        return int(self.add(a, b))

    def ssub(self, a, b):
        return int(self.sub(a, b))

    def sneg(self, a):
        return int(self.neg(a))

    def smul(self, a, b):
        _bump(1)
        la = int(self._log[a])
        lb = int(self._log[b])
        if la < 0 or lb < 0:
            return 0
        return int(self._exp[(la + lb) % (self.q - 1)])

    def sinv(self, a):
        la = int(self._log[a])
        if la < 0:
            raise ZeroDivisionError("inverse of zero in %r" % self)
        _bump(1)
        return int(self._exp[(self.q - 1 - la) % (self.q - 1)])

    def inv_vec(self, a):
        la = self._log[a]
        if np.any(la < 0):
            raise ZeroDivisionError("inverse of zero in %r" % self)
        _bump(_sz(a))
        return self._exp[(self.q - 1 - la) % (self.q - 1)]

    def spow(self, a, e):
        e = int(e)
        if e == 0:
            return 1
        la = int(self._log[a])
        if la < 0:
            if e < 0:
                raise ZeroDivisionError
            return 0
        _bump(1)
        return int(self._exp[(la * e) % (self.q - 1)])

    def matmul(self, A, B):
        m, ell = A.shape
        n = B.shape[1]
        _bump(m * ell * n)
        if ell == 0:
            return np.zeros((m, n), dtype=np.int64)
        # accumulate raw digit sums, reduce mod p once at the end
        acc = np.zeros((m, n, self.nu), dtype=np.int64)
        for k in range(ell):
            prod = self.mul(A[:, k:k + 1], B[k:k + 1, :])
            acc += self._digits(prod)
            if (k + 1) % 4096 == 0:
                acc %= self.p
        return self._pack(acc % self.p)

    def dot(self, a, b):
        return int(self.matmul(a.reshape(1, -1), b.reshape(-1, 1))[0, 0])

    # -- embedding of the base prime field --------------------------------

    def embed_array(self, a):
        # constants of GF(p) keep their code in GF(p^nu)
        return a

    def coerce_array(self, a, base):
        """Map degree-0 codes back to the base field; raise on non-constants."""
        if base.p != self.p or base.nu != 1:
            raise FieldError("can only coerce down to the prime subfield")
        arr = np.asarray(a)
        if np.any(arr >= self.p):
            raise FieldError("non-constant element cannot be coerced to GF(%d)"
                             % self.p)
        return arr

    # -- construction helpers ---------------------------------------------

    def _polmul_mod(self, f, g):
        p, nu = self.p, self.nu
        out = [0] * (2 * nu - 1)
        for i, fi in enumerate(f):
            if fi:
                for j, gj in enumerate(g):
                    out[i + j] = (out[i + j] + fi * gj) % p
        # reduce by the monic modulus
        for d in range(len(out) - 1, nu - 1, -1):
            c = out[d]
            if c:
                out[d] = 0
                for i in range(nu):
                    out[d - nu + i] = (out[d - nu + i] - c * self.modulus[i]) % p
        return out[:nu]

    def _build_log_tables(self):
        q = self.q
        gen = self._find_generator()
        exp = np.empty(q - 1, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        cur = [1] + [0] * (self.nu - 1)
        gcoef = self.coeffs(gen)
        for i in range(q - 1):
            code = self.code(cur)
            exp[i] = code
            log[code] = i
            cur = self._polmul_mod(cur, gcoef)
        if self.code(cur) != 1:
            raise FieldError("modulus %s is not irreducible over GF(%d)"
                             % (list(self.modulus), self.p))
        self._exp = exp
        self._log = log

    def _find_generator(self):
        q = self.q
        fac = _prime_factors(q - 1)
        for cand in range(2, q):
            cc = self.coeffs(cand)
            if all(self._pol_order_check(cc, (q - 1) // f) for f in fac):
                return cand
        raise FieldError("no generator found (modulus not irreducible?)")

    def _pol_order_check(self, coeffs, e):
        # coeffs**e != 1 by square-and-multiply on coefficient vectors
        acc = [1] + [0] * (self.nu - 1)
        base = list(coeffs)
        while e:
            if e & 1:
                acc = self._polmul_mod(acc, base)
            base = self._polmul_mod(base, base)
            e >>= 1
        return self.code(acc) != 1


def _prime_factors(n):
    fac = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            fac.add(d)
            n //= d
        d += 1
    if n > 1:
        fac.add(n)
    return sorted(fac)


def _poly_gcd_is_one(p, f, g):
    """gcd over GF(p) of coefficient lists, low degree first."""
    def deg(h):
        for i in range(len(h) - 1, -1, -1):
            if h[i]:
                return i
        return -1

    f = list(f)
    g = list(g)
    while deg(g) >= 0:
        df, dg = deg(f), deg(g)
        if df < dg:
            f, g = g, f
            continue
        lead = f[df] * pow(g[dg], p - 2, p) % p
        for i in range(dg + 1):
            f[df - dg + i] = (f[df - dg + i] - lead * g[i]) % p
        f, g = g, f[:deg(f) + 1] if deg(f) >= 0 else [0]
    return deg(f) == 0


def _x_pow_pe_mod(p, modulus, nu, i):
    """x^(p^i) mod modulus, as a coefficient list of length nu."""
    cur = [0, 1][:max(2, nu)]
    cur = cur + [0] * (nu - len(cur))

    def polmul(f, g):
        out = [0] * (2 * nu - 1)
        for a, fa in enumerate(f):
            if fa:
                for b, gb in enumerate(g):
                    out[a + b] = (out[a + b] + fa * gb) % p
        for d in range(len(out) - 1, nu - 1, -1):
            c = out[d]
            if c:
                out[d] = 0
                for t in range(nu):
                    out[d - nu + t] = (out[d - nu + t] - c * modulus[t]) % p
        return out[:nu]

    def polpow(f, e):
        acc = [1] + [0] * (nu - 1)
        while e:
            if e & 1:
                acc = polmul(acc, f)
            f = polmul(f, f)
            e >>= 1
        return acc

    for _ in range(i):
        cur = polpow(cur, p)
    return cur


def _is_irreducible(p, coeffs):
    """Monic coeffs (low first, degree nu): irreducible over GF(p)?"""
    nu = len(coeffs) - 1
    if nu == 1:
        return True
    # x^(p^nu) == x mod f, and gcd(x^(p^i) - x, f) = 1 for i <= nu/2
    top = _x_pow_pe_mod(p, coeffs, nu, nu)
    x = [0, 1] + [0] * (nu - 2)
    if top != x:
        return False
    for i in range(1, nu // 2 + 1):
        xpi = _x_pow_pe_mod(p, coeffs, nu, i)
        diff = [(a - b) % p for a, b in zip(xpi, x)]
        if not _poly_gcd_is_one(p, diff, list(coeffs)):
            return False
    return True


def _find_irreducible(p, nu):
    """First monic irreducible of degree nu in lexicographic code order."""
    for t in range(p ** nu):
        coeffs = []
        tt = t
        for _ in range(nu):
            coeffs.append(tt % p)
            tt //= p
        coeffs.append(1)
        if _is_irreducible(p, coeffs):
            return coeffs
    raise FieldError("no irreducible polynomial found")  # cannot happen


_FIELD_CACHE = {}


def make_prime_field(p):
    """GF(p) context; rejects non-prime p with a diagnostic."""
    key = (int(p), 1)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = PrimeField(p)
    return _FIELD_CACHE[key]


def make_ext_field(p, nu):
    """GF(p^nu) with the canonical (lexicographically first) modulus."""
    if nu == 1:
        return make_prime_field(p)
    key = (int(p), int(nu))
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = ExtField(p, nu)
    return _FIELD_CACHE[key]


def extend_field(base, m):
    """Smallest-degree extension of `base` with more than m elements.

    The degree is ceil(log_q(m+1)) over the base cardinality q.  Base-field
    elements embed as degree-0 polynomials; `coerce_down` maps them back.
    """
    if m < base.q:
        raise FieldError("no extension needed: m=%d < #F=%d" % (m, base.q))
    nu = 1
    qq = base.q
    while qq <= m:
        qq *= base.q
        nu += 1
    if base.nu == 1:
        return make_ext_field(base.p, nu)
    # extension of an extension: build GF(p^(a*nu)) and embed via a root of
    # the base modulus
    big = make_ext_field(base.p, base.nu * nu)
    _embedding(base, big)
    return big


_EMBED_CACHE = {}


def _embedding(base, big):
    """Embedding table base -> big for nested extensions."""
    key = (base.p, base.nu, big.nu)
    if key in _EMBED_CACHE:
        return _EMBED_CACHE[key]
    # find a root of the base modulus in the big field
    root = None
    for cand in range(big.q):
        acc = 0
        for c in reversed(base.modulus):
            acc = big.sadd(big.smul(acc, cand), c % big.p)
        if acc == 0:
            root = cand
            break
    if root is None:
        raise FieldError("no embedding of %r into %r" % (base, big))
    table = np.zeros(base.q, dtype=np.int64)
    for code in range(base.q):
        acc = 0
        rp = 1
        for c in base.coeffs(code):
            acc = big.sadd(acc, big.smul(c, rp))
            rp = big.smul(rp, root)
        table[code] = acc
    inverse = {int(v): i for i, v in enumerate(table)}
    _EMBED_CACHE[key] = (table, inverse)
    return _EMBED_CACHE[key]


def embed_up(base, big, arr):
    """Map an array of base-field codes into the bigger field."""
    if base == big:
        return arr
    if base.nu == 1:
        return arr  # constants keep their code
    table, _ = _embedding(base, big)
    return table[arr]


def coerce_down(base, big, arr):
    """Inverse of embed_up; raises FieldError on non-embedded elements."""
    if base == big:
        return arr
    if base.nu == 1:
        return big.coerce_array(arr, base)
    _, inverse = _embedding(base, big)
    flat_in = np.ascontiguousarray(arr).ravel()
    out = np.empty(flat_in.size, dtype=np.int64)
    for i in range(flat_in.size):
        v = inverse.get(int(flat_in[i]))
        if v is None:
            raise FieldError("element not in the embedded subfield")
        out[i] = v
    return out.reshape(np.shape(arr))


class PowTable:
    """Powers theta^0..theta^(m-1) of a high-order element, with dlog lookup.

    All m powers are pairwise distinct (checked at construction).
    """

    __slots__ = ("ctx", "theta", "m", "powers", "dlog")

    def __init__(self, ctx, theta, m, powers):
        self.ctx = ctx
        self.theta = int(theta)
        self.m = int(m)
        self.powers = powers
        self.dlog = {int(v): j for j, v in enumerate(powers)}


def element_of_order_at_least(ctx, m, rng=None):
    """Pick theta with multiplicative order >= m and build its power table.

    Candidates 2, 3, ... are tried in code order for reproducibility; after 64
    deterministic misses we switch to random trials (a generator of the cyclic
    unit group always qualifies since #F > m).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if ctx.q <= m:
        raise FieldError("field of size %d too small for order >= %d"
                         % (ctx.q, m))
    if m == 1:
        return PowTable(ctx, 1, 1, np.array([1], dtype=np.int64))

    def try_theta(theta):
        powers = np.empty(m, dtype=np.int64)
        powers[0] = 1
        cur = 1
        for j in range(1, m):
            cur = ctx.smul(cur, theta)
            if cur == 1:
                return None  # order j < m
            powers[j] = cur
        return powers

    candidates = list(range(2, min(ctx.q, 2 + 64)))
    for theta in candidates:
        powers = try_theta(theta)
        if powers is not None:
            return PowTable(ctx, theta, m, powers)
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(4 * ctx.q):
        theta = int(rng.integers(2, ctx.q))
        powers = try_theta(theta)
        if powers is not None:
            return PowTable(ctx, theta, m, powers)
    raise FieldError("no element of order >= %d found in %r" % (m, ctx))
