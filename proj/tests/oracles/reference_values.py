#!/usr/bin/env python3
"""Bit-by-bit reference models used to freeze expected values in the C++ tests.

Registers are plain Python lists of bits (index 0 = least significant cell) so
nothing here shares code or representation with the library.  Run it and paste
the printed values into tests/unit when the constructions change.
"""

M64 = (1 << 64) - 1


def clock(reg, taps):
    fb = 0
    for t in taps:
        fb ^= reg[t]
    out = reg[-1]
    return [fb] + reg[:-1], out


def reg_value(reg):
    return sum(b << i for i, b in enumerate(reg))


def reg_from(value, length):
    return [(value >> i) & 1 for i in range(length)]


def maj(a, b, c):
    return 1 if a + b + c >= 2 else 0


R1 = (19, [13, 16, 17, 18], 8)
R2 = (22, [20, 21], 10)
R3 = (23, [7, 20, 21, 22], 10)
R4 = (17, [11, 16], None)


def load(regs, specs, kc, frame):
    for i in range(64):
        for j, (n, taps, _) in enumerate(specs):
            regs[j], _ = clock(regs[j], taps)
            regs[j][0] ^= (kc >> i) & 1
    for i in range(22):
        for j, (n, taps, _) in enumerate(specs):
            regs[j], _ = clock(regs[j], taps)
            regs[j][0] ^= (frame >> i) & 1


def a51(kc, frame, nbits=228):
    specs = [R1, R2, R3]
    regs = [[0] * s[0] for s in specs]
    load(regs, specs, kc, frame)

    def step():
        m = maj(regs[0][8], regs[1][10], regs[2][10])
        for j, (n, taps, cb) in enumerate(specs):
            if regs[j][cb] == m:
                regs[j], _ = clock(regs[j], taps)

    for _ in range(100):
        step()
    out = []
    for _ in range(nbits):
        step()
        out.append(regs[0][18] ^ regs[1][21] ^ regs[2][22])
    return out


def a52(kc, frame, nbits=228):
    specs = [R1, R2, R3, R4]
    regs = [[0] * s[0] for s in specs]
    load(regs, specs, kc, frame)
    regs[0][15] = 1
    regs[1][16] = 1
    regs[2][18] = 1
    regs[3][10] = 1

    def step():
        r4 = regs[3]
        m = maj(r4[3], r4[7], r4[10])
        if r4[10] == m:
            regs[0], _ = clock(regs[0], R1[1])
        if r4[3] == m:
            regs[1], _ = clock(regs[1], R2[1])
        if r4[7] == m:
            regs[2], _ = clock(regs[2], R3[1])
        regs[3], _ = clock(regs[3], R4[1])

    def outbit():
        a, b, c = regs[0], regs[1], regs[2]
        return (a[18] ^ b[21] ^ c[22]
                ^ maj(a[12], a[14] ^ 1, a[15])
                ^ maj(b[9], b[13], b[16] ^ 1)
                ^ maj(c[13], c[16] ^ 1, c[18]))

    for _ in range(99):
        step()
    out = []
    for _ in range(nbits):
        step()
        out.append(outbit())
    return out


def sboxes():
    s = 0x9E3779B97F4A7C15

    def nxt(s):
        s ^= (s << 13) & M64
        s ^= s >> 7
        s ^= (s << 17) & M64
        return s

    s0, s1 = [], []
    for _ in range(256):
        s = nxt(s)
        s0.append(((s >> 32) & 0xFF) % 128)
    for _ in range(128):
        s = nxt(s)
        s1.append(((s >> 32) & 0x7F) % 64)
    return s0, s1


S0, S1 = sboxes()


def pair_compress(a, b, c, d):
    t1 = S0[(a + 2 * c) % 256]
    t2 = S0[(b + 2 * d) % 256]
    return S1[(t1 + 2 * t2) % 128], S1[(t2 + 2 * t1) % 128]


def rotl32(x, r):
    r %= 32
    return ((x << r) | (x >> (32 - r))) & 0xFFFFFFFF if r else x


def mini_comp128(ki, rand):
    w = 0
    words = [0, 0, 0]
    for i in range(8):
        u, v = pair_compress(ki[i], ki[i + 8], rand[i], rand[i + 8])
        u2 = S1[(u + 2 * v + i) % 128]
        v2 = S1[(v + 2 * u + i) % 128]
        w = (w << 12) | (u << 6) | v
        x = (u2 << 6) | v2
        for k in range(3):
            words[k] ^= rotl32(x, 5 * i + 11 * k)
    fold = (words[0] << 64) | (words[1] << 32) | words[2]
    out = w ^ fold
    return out >> 64, out & M64


def bits_str(bits):
    return "".join(str(b) for b in bits)


if __name__ == "__main__":
    reg = reg_from(0x7FFFF, 19)
    for _ in range(19):
        reg, _ = clock(reg, R1[1])
    print("lfsr 0x7FFFF x19 ->", hex(reg_value(reg)))

    ks = a51(0xEFCDAB8967452312, 0x134)
    packed = bytes(int(bits_str(ks[i:i + 8]).ljust(8, "0"), 2) for i in range(0, 114, 8))
    print("a51 published vector downlink:", packed.hex())
    packed = bytes(int(bits_str(ks[114 + i:114 + i + 8]).ljust(8, "0"), 2) for i in range(0, 114, 8))
    print("a51 published vector uplink:  ", packed.hex())

    print("a51 kc=0x0123456789ABCDEF fn=0x134 first16:", bits_str(a51(0x0123456789ABCDEF, 0x134, 16)))
    print("a51 kc=0 fn=0 first16:", bits_str(a51(0, 0, 16)))
    print("a52 kc=0 fn=0 first32:", bits_str(a52(0, 0, 32)))
    print("a52 kc=0x0123456789ABCDEF fn=0x134 first32:", bits_str(a52(0x0123456789ABCDEF, 0x134, 32)))

    print("s0[0..8]:", S0[:8])
    print("s1[0..8]:", S1[:8])
    print("sum s0:", sum(S0), "sum s1:", sum(S1))
    print("pair_compress(1,2,3,4):", pair_compress(1, 2, 3, 4))
    sres, kc = mini_comp128([0] * 16, [0] * 16)
    print("mini_comp128(0,0): sres=%08x kc=%016x" % (sres, kc))
    sres, kc = mini_comp128(list(range(16)), list(range(0xF0, 0x100)))
    print("mini_comp128(00..0f, f0..ff): sres=%08x kc=%016x" % (sres, kc))
