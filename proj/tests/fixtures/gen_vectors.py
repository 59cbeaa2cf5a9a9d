"""Freezes reference vectors for the C++ tests.

AES comes from the `cryptography` package; the key schedule and the rest are
written out longhand here so that nothing is shared with the C++ code.
Run once; the output is checked in as vectors.txt.
"""
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

ENC_KEY = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
MAC_KEY = bytes(range(16))


def aes(key, block):
    e = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return e.update(block) + e.finalize()


def sbox(x):
    # multiplicative inverse in GF(2^8) followed by the affine map
    inv = 0
    if x:
        for c in range(1, 256):
            a, b, p = x, c, 0
            while b:
                if b & 1:
                    p ^= a
                a = ((a << 1) ^ 0x1B) & 0xFF if a & 0x80 else a << 1
                b >>= 1
            if p == 1:
                inv = c
                break
    s = inv
    for i in range(1, 5):
        s ^= ((inv << i) | (inv >> (8 - i))) & 0xFF
    return s ^ 0x63


def round_keys(key):
    w = [list(key[4 * i:4 * i + 4]) for i in range(4)]
    rcon = 1
    for i in range(4, 44):
        t = list(w[i - 1])
        if i % 4 == 0:
            t = [sbox(b) for b in t[1:] + t[:1]]
            t[0] ^= rcon
            rcon = ((rcon << 1) ^ 0x1B) & 0xFF if rcon & 0x80 else rcon << 1
        w.append([a ^ b for a, b in zip(w[i - 4], t)])
    return [bytes(sum(w[4 * r:4 * r + 4], [])) for r in range(11)]


def xor(a, b):
    return bytes(x ^ y for x, y in zip(a, b))


def ctr(pa, vn):
    return pa.to_bytes(8, "big") + vn.to_bytes(8, "big")


def pad_group(key, pa, vn, n):
    c = ctr(pa, vn)
    base = aes(key, c)
    if n <= 11:
        return [xor(base, rk) for rk in round_keys(key)[:n]]
    segs, j = [], 0
    while len(segs) < n:
        seed = xor(xor(key, c), (0).to_bytes(8, "big") + j.to_bytes(8, "big"))
        for rk in round_keys(seed):
            if len(segs) < n:
                segs.append(xor(base, rk))
        j += 1
    return segs


def cbc_mac(key, msg):
    msg = msg + bytes(-len(msg) % 16)
    state = bytes(16)
    for i in range(0, len(msg), 16):
        state = aes(key, xor(state, msg[i:i + 16]))
    return state[:8]


def main():
    out = []
    out.append(("otp_pa1000_vn1", aes(ENC_KEY, ctr(0x1000, 1))))
    pads = pad_group(ENC_KEY, 0x1000, 1, 4)
    out.append(("pads64_pa1000_vn1", b"".join(pads)))
    plain = bytes(range(64))
    cipher = xor(plain, b"".join(pads))
    out.append(("cipher64_pa1000_vn1", cipher))
    msg = cipher + (0x1000).to_bytes(8, "big") + (1).to_bytes(8, "big") + \
        (2).to_bytes(4, "big") + (3).to_bytes(4, "big") + (5).to_bytes(4, "big")
    out.append(("mac_msg", msg))
    out.append(("mac_tag", cbc_mac(MAC_KEY, msg)))
    out.append(("naive_mac_tag", cbc_mac(MAC_KEY, cipher)))
    out.append(("pads512_pa2000_vn7", b"".join(pad_group(ENC_KEY, 0x2000, 7, 32))))
    out.append(("round_keys_enc", b"".join(round_keys(ENC_KEY))))
    for name, value in out:
        print(f"{name}={value.hex()}")


if __name__ == "__main__":
    main()
