import hashlib
import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from sapphire import keccak


def test_permute_zero_state_vector():
    lanes = keccak.keccak_f1600([0] * 25)
    assert lanes[0] == 0xF1258F7940E1DDE7


def test_permute_bijective_spot_check():
    rng = random.Random(0)
    a = [rng.getrandbits(64) for _ in range(25)]
    b = list(a)
    b[7] ^= 1
    assert keccak.keccak_f1600(a) != keccak.keccak_f1600(b)
    once = keccak.keccak_f1600(a)
    assert keccak.keccak_f1600(once) != once   # not idempotent


def test_sha3_empty_vectors():
    assert keccak.sha3_digest(b"", 256).hex() == (
        "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a")
    assert keccak.sha3_digest(b"", 512) == hashlib.sha3_512(b"").digest()


def test_shake_empty_prefix():
    s = keccak.shake128().finalize()
    assert s.squeeze(16).hex() == "7f9c2ba4e88f827d616045507605853e"


@pytest.mark.parametrize("nbytes", [0, 1, 3, 135, 136, 137, 168, 169, 500])
def test_digests_match_hashlib(nbytes):
    data = bytes(range(256)) * 2
    msg = data[:nbytes]
    assert keccak.sha3_digest(msg, 256) == hashlib.sha3_256(msg).digest()
    assert keccak.sha3_digest(msg, 512) == hashlib.sha3_512(msg).digest()
    assert keccak.shake128(msg).finalize().squeeze(73) == \
        hashlib.shake_128(msg).digest(73)
    assert keccak.shake256(msg).finalize().squeeze(73) == \
        hashlib.shake_256(msg).digest(73)


def test_kat_file():
    path = os.path.join(os.path.dirname(__file__), "..", "src", "sapphire",
                        "data", "fips202_kat.txt")
    count = 0
    for raw in open(path):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        mode, msg_hex, want_hex = line.split()
        msg = bytes.fromhex(msg_hex) if msg_hex != "-" else b""
        want = bytes.fromhex(want_hex)
        if mode == "SHA3-256":
            got = keccak.sha3_digest(msg, 256)
        elif mode == "SHA3-512":
            got = keccak.sha3_digest(msg, 512)
        elif mode == "SHAKE-128":
            got = keccak.shake128(msg).finalize().squeeze(len(want))
        else:
            got = keccak.shake256(msg).finalize().squeeze(len(want))
        assert got == want, f"{mode}({msg_hex})"
        count += 1
    assert count >= 24


def test_rate_block_consumption():
    # squeezing exactly one SHAKE-128 rate block (1344 bits) costs no extra
    # permutation; the next bit triggers one
    s = keccak.shake128(b"x").finalize()
    before = s.permutes
    s.squeeze_bits(1344)
    assert s.permutes == before
    s.squeeze_bits(1)
    assert s.permutes == before + 1


@settings(max_examples=40, deadline=None)
@given(st.binary(max_size=64), st.lists(st.integers(1, 200), min_size=1,
                                        max_size=8))
def test_squeeze_granularity_independence(seed, widths):
    total = sum(widths)
    s1 = keccak.shake256(seed).finalize()
    s2 = keccak.shake256(seed).finalize()
    whole = s1.squeeze_bits(total)
    acc, off = 0, 0
    for w in widths:
        acc |= s2.squeeze_bits(w) << off
        off += w
    assert acc == whole


def test_two_64s_equal_one_128():
    s1 = keccak.shake128(b"seed").finalize()
    s2 = keccak.shake128(b"seed").finalize()
    lo, hi = s1.squeeze_bits(64), s1.squeeze_bits(64)
    assert (hi << 64) | lo == s2.squeeze_bits(128)


def test_next_word_counters():
    s = keccak.shake128(b"w").finalize()
    for i in range(100):
        s.next_word()
    assert s.words_out == 100


def test_sampler_prng_layout():
    # seed || c0 || c1 little-endian is the canonical block
    seed = bytes(range(32))
    a = keccak.sampler_prng("SHAKE-128", seed, 0x0102, 0x0304)
    manual = keccak.shake128(seed + bytes([0x02, 0x01, 0x04, 0x03])).finalize()
    assert a.squeeze(32) == manual.squeeze(32)
    with pytest.raises(ValueError):
        keccak.sampler_prng("SHAKE-128", b"short", 0, 0)
    with pytest.raises(ValueError):
        keccak.sampler_prng("SHAKE-512", seed, 0, 0)


def test_absorb_after_squeeze_rejected():
    s = keccak.shake128(b"a").finalize()
    with pytest.raises(ValueError):
        s.absorb(b"more")


def test_digest_deterministic():
    assert keccak.sha3_digest(b"same", 256) == keccak.sha3_digest(b"same", 256)
