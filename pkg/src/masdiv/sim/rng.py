"""Portable pseudo-random stream for reproducible match logs.

xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D) seeded
through one splitmix64 step.  Uniforms take the top 53 bits of each
output, so any implementation of the same recipe reproduces the same
matches bit for bit.
"""

MASK64 = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed (used for per-game seeds)."""
    s = 0
    for p in parts:
        s = splitmix64(s ^ (p & MASK64))
    return s


class XorShift64Star:
    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        self.state = state or 0x9E3779B97F4A7C15  # all-zero state is a fixed point

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & MASK64

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
