"""Paillier additively homomorphic cryptosystem.

Ciphertexts are bound to the public key that produced them through a short
fingerprint of ``n``; every operation combining ciphertexts checks it.

Signed plaintexts live in ``[0, n)`` by wrapping negatives into the upper
half: :func:`encode` / :func:`decode` convert between the two views.

Randomness defaults to the operating system CSPRNG. Every function taking an
``rng`` also accepts a ``random.Random`` instance; a seeded one is only meant
for reproducible tests and must never be used to protect real routes.
"""
from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field
from math import gcd

import gmpy2
from gmpy2 import mpz

MIN_KEY_BITS = 1024

_SYSTEM_RNG = secrets.SystemRandom()


class KeyMismatchError(ValueError):
    """Raised when ciphertexts from different public keys are combined."""


def _fingerprint(n) -> bytes:
    n = int(n)
    return hashlib.sha256(n.to_bytes((n.bit_length() + 7) // 8, "big")).digest()[:16]


@dataclass(frozen=True)
class PublicKey:
    n: mpz
    n_sq: mpz = field(init=False, repr=False)
    g: mpz = field(init=False, repr=False)
    bits: int = field(init=False)
    key_id: bytes = field(init=False, repr=False)

    def __post_init__(self):
        n = mpz(self.n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "n_sq", n * n)
        object.__setattr__(self, "g", n + 1)
        object.__setattr__(self, "bits", n.bit_length())
        object.__setattr__(self, "key_id", _fingerprint(n))

    @property
    def half_n(self) -> mpz:
        return self.n // 2

    @property
    def ciphertext_bytes(self) -> int:
        """Fixed width of a serialized residue mod n**2."""
        return (self.n_sq.bit_length() + 7) // 8


@dataclass(frozen=True)
class PrivateKey:
    p: mpz
    q: mpz
    pk: PublicKey
    lambda_: mpz = field(init=False, repr=False)
    mu: mpz = field(init=False, repr=False)

    def __post_init__(self):
        p, q = mpz(self.p), mpz(self.q)
        if p == q:
            raise ValueError("p and q must be distinct")
        if p * q != self.pk.n:
            raise ValueError("p * q does not match the public modulus")
        n, n_sq = self.pk.n, self.pk.n_sq
        lam = gmpy2.lcm(p - 1, q - 1)
        mu = gmpy2.invert((gmpy2.powmod(self.pk.g, lam, n_sq) - 1) // n, n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "lambda_", lam)
        object.__setattr__(self, "mu", mu)
        # CRT precomputation, used by decrypt() and encrypt()
        p_sq, q_sq = p * p, q * q
        object.__setattr__(self, "_p_sq", p_sq)
        object.__setattr__(self, "_q_sq", q_sq)
        object.__setattr__(self, "_hp", self._h(p, p_sq))
        object.__setattr__(self, "_hq", self._h(q, q_sq))
        object.__setattr__(self, "_q_inv_p", gmpy2.invert(q, p))
        object.__setattr__(self, "_p_sq_inv_q_sq", gmpy2.invert(p_sq, q_sq))
        object.__setattr__(self, "_n_mod_phi_p_sq", n % (p * (p - 1)))
        object.__setattr__(self, "_n_mod_phi_q_sq", n % (q * (q - 1)))

    def _h(self, prime, prime_sq):
        x = gmpy2.powmod(self.pk.g, prime - 1, prime_sq)
        return gmpy2.invert((x - 1) // prime, prime)

    def encrypt(self, m, rng=None) -> "Ciphertext":
        """Encrypt with the factorization at hand (CRT for ``r**n``)."""
        pk = self.pk
        m = _check_plaintext(pk, m)
        r = _draw_unit(pk.n, rng)
        rp = gmpy2.powmod(r, self._n_mod_phi_p_sq, self._p_sq)
        rq = gmpy2.powmod(r, self._n_mod_phi_q_sq, self._q_sq)
        rn = rp + self._p_sq * ((rq - rp) * self._p_sq_inv_q_sq % self._q_sq)
        return Ciphertext((1 + m * pk.n) * rn % pk.n_sq, pk.key_id)


@dataclass(frozen=True)
class Ciphertext:
    value: mpz
    key_id: bytes = field(repr=False)


def keygen(bits: int = 2048, rng=None) -> tuple[PublicKey, PrivateKey]:
    """Generate a key pair whose modulus has exactly ``bits`` bits."""
    if bits < MIN_KEY_BITS:
        raise ValueError(f"key size {bits} is below the {MIN_KEY_BITS}-bit minimum")
    if bits % 2:
        raise ValueError("key size must be even")
    rng = rng or _SYSTEM_RNG
    half = bits // 2
    while True:
        p = _draw_prime(half, rng)
        q = _draw_prime(half, rng)
        n = p * q
        if p != q and n.bit_length() == bits and gcd(int(n), int((p - 1) * (q - 1))) == 1:
            break
    pk = PublicKey(n)
    return pk, PrivateKey(p, q, pk)


def _draw_prime(bits: int, rng) -> mpz:
    while True:
        # top two bits set so that the product of two such primes is full length
        start = mpz(rng.getrandbits(bits)) | (mpz(3) << (bits - 2))
        p = gmpy2.next_prime(start)
        if p.bit_length() == bits:
            return p


def _draw_unit(n, rng) -> mpz:
    rng = rng or _SYSTEM_RNG
    while True:
        r = mpz(rng.randrange(1, int(n)))
        if gmpy2.gcd(r, n) == 1:
            return r


def _check_plaintext(pk: PublicKey, m) -> mpz:
    m = mpz(m)
    if not 0 <= m < pk.n:
        raise ValueError("plaintext outside [0, n)")
    return m


def _check_key(pk: PublicKey, *cts: Ciphertext) -> None:
    for c in cts:
        if c.key_id != pk.key_id:
            raise KeyMismatchError("ciphertext is bound to a different public key")


def encrypt(pk: PublicKey, m, rng=None) -> Ciphertext:
    m = _check_plaintext(pk, m)
    r = _draw_unit(pk.n, rng)
    # g = n + 1, so g**m = 1 + m*n (mod n**2)
    c = (1 + m * pk.n) * gmpy2.powmod(r, pk.n, pk.n_sq) % pk.n_sq
    return Ciphertext(c, pk.key_id)


def encrypt_signed(pk: PublicKey, v: int, rng=None) -> Ciphertext:
    return encrypt(pk, encode(pk, v), rng)


def trivial(pk: PublicKey, v: int) -> Ciphertext:
    """Deterministic encryption of ``v`` with r = 1.

    Only safe as an intermediate term that is later combined with a properly
    randomized ciphertext or rerandomized before leaving the process.
    """
    return Ciphertext((1 + (mpz(v) % pk.n) * pk.n) % pk.n_sq, pk.key_id)


def decrypt(sk: PrivateKey, c: Ciphertext) -> mpz:
    _check_key(sk.pk, c)
    p, q = sk.p, sk.q
    mp = (gmpy2.powmod(c.value, p - 1, sk._p_sq) - 1) // p * sk._hp % p
    mq = (gmpy2.powmod(c.value, q - 1, sk._q_sq) - 1) // q * sk._hq % q
    return mq + q * ((mp - mq) * sk._q_inv_p % p)


def decrypt_signed(sk: PrivateKey, c: Ciphertext) -> int:
    return decode(sk.pk, decrypt(sk, c))


def add(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    _check_key(pk, c1, c2)
    return Ciphertext(c1.value * c2.value % pk.n_sq, pk.key_id)


def add_plain(pk: PublicKey, c: Ciphertext, k: int) -> Ciphertext:
    _check_key(pk, c)
    return Ciphertext(c.value * (1 + (mpz(k) % pk.n) * pk.n) % pk.n_sq, pk.key_id)


def scalar_mul(pk: PublicKey, c: Ciphertext, k: int) -> Ciphertext:
    _check_key(pk, c)
    k = mpz(k) % pk.n
    if k > pk.half_n:
        # small negative scalars: invert once, then a short exponent
        k -= pk.n
    return Ciphertext(gmpy2.powmod(c.value, k, pk.n_sq), pk.key_id)


def negate(pk: PublicKey, c: Ciphertext) -> Ciphertext:
    return scalar_mul(pk, c, -1)


def sub(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return add(pk, c1, negate(pk, c2))


def rerandomize(pk: PublicKey, c: Ciphertext, rng=None) -> Ciphertext:
    _check_key(pk, c)
    r = _draw_unit(pk.n, rng)
    return Ciphertext(c.value * gmpy2.powmod(r, pk.n, pk.n_sq) % pk.n_sq, pk.key_id)


def encode(pk: PublicKey, v: int) -> mpz:
    """Map a signed integer with ``|v| < n/2`` into ``[0, n)``."""
    v = mpz(v)
    if 2 * abs(v) >= pk.n:
        raise OverflowError("signed value does not fit the plaintext space")
    return v % pk.n


def decode(pk: PublicKey, m) -> int:
    m = mpz(m)
    if not 0 <= m < pk.n:
        raise ValueError("residue outside [0, n)")
    return int(m - pk.n) if m > pk.half_n else int(m)
